// Lower a phase table to commuting X-parity rotations, write the circuit
// file, and compare the gate form with the diagonal form.
//
// ```sh
// cargo run --example gate_lowering
// ```

use iqp_hidden::sim::{apply_hadamard_layer, full_statevector, simulate_gates};
use iqp_hidden::synth::{exact_phase_table, gates_to_phases, walsh_lower, CircuitFile};
use iqp_hidden::ProbVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let target = ProbVector::validate(&[0.6, 0.4], 1)?;
    let table = exact_phase_table(&target)?;
    let gates = walsh_lower(&table)?;
    println!("{} rotations after lowering", gates.len());

    let file = CircuitFile { gates: Some(gates.clone()), ..CircuitFile::from_phases(table.clone()) };
    print!("{}", file.to_text());
    assert_eq!(CircuitFile::parse(&file.to_text())?, file);

    let all: Vec<usize> = (0..table.total_qubits()).collect();
    let diagonal = apply_hadamard_layer(&full_statevector(&table)?, &all)?;
    let overlap = simulate_gates(&gates)?.inner(&diagonal).norm();
    println!("|<gates|diagonal>| = {overlap:.15}");
    let drift = gates_to_phases(&gates)?.max_phase_distance(&table);
    println!("phase roundtrip drift = {drift:.3e}");
    assert!(overlap >= 1.0 - 1e-9 && drift <= 1e-9);
    Ok(())
}

fn main() {
    run_example().expect("gate lowering example");
}
