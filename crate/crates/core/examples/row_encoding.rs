// Encode a two-outcome distribution in the phases of a single
// uniform-magnitude state and measure it.
//
// ```sh
// cargo run --example row_encoding
// ```

use iqp_hidden::bits::to_bitstring;
use iqp_hidden::synth::uma_phases_for_pair;
use iqp_hidden::sim::{apply_hadamard_layer, is_uma, StateVector};
use num_complex::Complex64;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = 3;
    let (b1, b2, mass) = (0b011, 0b110, 0.3);
    let row = uma_phases_for_pair(b1, b2, mass, n)?;
    println!("theta* = {:.6}", row.theta_star);
    for (y, t) in row.theta_row.iter().enumerate() {
        println!("  theta[{}] = {t:.6}", to_bitstring(y, n));
    }

    let amp = ((1 << n) as f64).sqrt().recip();
    let state = StateVector::from_amplitudes(
        n,
        row.theta_row.iter().map(|&t| Complex64::from_polar(amp, t)).collect(),
    )?;
    assert!(is_uma(&state, 1e-12));
    let measured = apply_hadamard_layer(&state, &[0, 1, 2])?.probabilities();
    for (b, p) in measured.iter().enumerate() {
        println!("  P({}) = {p:.6}", to_bitstring(b, n));
    }
    assert!((measured[b1] - mass).abs() < 1e-12);
    assert!((measured[b2] - (1.0 - mass)).abs() < 1e-12);
    Ok(())
}

fn main() {
    run_example().expect("row encoding example");
}
