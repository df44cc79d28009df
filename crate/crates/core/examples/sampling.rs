// Draw bitstrings from the visible marginal of a synthesized circuit.
//
// ```sh
// cargo run --example sampling
// ```

use iqp_hidden::bits::to_bitstring;
use iqp_hidden::sim::{marginal_mixture, sample};
use iqp_hidden::synth::exact_phase_table;
use iqp_hidden::ProbVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let target = ProbVector::from_json_str(r#"{"n": 2, "probs": {"00": 0.5, "11": 0.375, "01": 0.125}}"#)?;
    let marginal = marginal_mixture(&exact_phase_table(&target)?)?;
    let shots = 20_000;
    let draws = sample(&marginal, shots, 42);
    let mut counts = vec![0usize; marginal.len()];
    for b in &draws {
        counts[*b] += 1;
    }
    for (b, c) in counts.iter().enumerate() {
        let freq = *c as f64 / shots as f64;
        println!("{}  p = {:.4}  observed = {freq:.4}", to_bitstring(b, 2), target.get(b));
        assert!((freq - target.get(b)).abs() < 0.02);
    }
    assert_eq!(counts[0b10], 0);
    Ok(())
}

fn main() {
    run_example().expect("sampling example");
}
