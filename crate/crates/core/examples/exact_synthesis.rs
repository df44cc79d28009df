// Compile a target distribution into a circuit with `n + 1` hidden qubits
// and check that the visible marginal matches it.
//
// ```sh
// cargo run --example exact_synthesis
// ```

use iqp_hidden::bits::to_bitstring;
use iqp_hidden::probdist::tv_distance;
use iqp_hidden::sim::{marginal_full, marginal_mixture};
use iqp_hidden::synth::exact_phase_table;
use iqp_hidden::ProbVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let target = ProbVector::validate(&[0.05, 0.0, 0.15, 0.1, 0.3, 0.0, 0.25, 0.15], 3)?;
    let table = exact_phase_table(&target)?;
    println!(
        "target over n = {} bits -> {} hidden + {} visible qubits, {} phases",
        target.n(),
        table.m(),
        table.n(),
        table.phases().len()
    );

    let mixture = marginal_mixture(&table)?;
    let full = marginal_full(&table)?;
    for b in 0..target.len() {
        println!(
            "  {}  target {:.6}  marginal {:.6}",
            to_bitstring(b, target.n()),
            target.get(b),
            mixture.get(b)
        );
    }
    let tv = tv_distance(&target, &mixture)?;
    println!("total variation distance: {tv:.3e}");
    println!("mixture vs full simulation: {:.3e}", tv_distance(&mixture, &full)?);
    assert!(tv <= 1e-9);
    Ok(())
}

fn main() {
    run_example().expect("exact synthesis example");
}
