// Round a distribution onto multiples of `2^{-m}` and realize it with
// `0`/`π` phases only, for a range of hidden-register sizes.
//
// ```sh
// cargo run --example approximate_synthesis
// ```

use std::f64::consts::PI;

use iqp_hidden::decompose::{build_multiplicity_map, round_to_dyadic};
use iqp_hidden::probdist::tv_distance;
use iqp_hidden::sim::marginal_mixture;
use iqp_hidden::synth::approx_phase_table;
use iqp_hidden::ProbVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let target = ProbVector::validate(&[0.1, 0.2, 0.3, 0.4], 2)?;
    println!(" m  leftover  rounding tv   bound      circuit tv");
    for m in 0..=8 {
        let rounding = round_to_dyadic(&target, m)?;
        let table = approx_phase_table(&build_multiplicity_map(&rounding)?);
        assert!(table.phases().iter().all(|&t| t == 0.0 || t == PI));
        let realized = marginal_mixture(&table)?;
        let tv = tv_distance(&target, &realized)?;
        let bound = rounding.tv_bound();
        println!(
            "{m:>2}  {:>8}  {:>11.6}  {:>9.6}{}  {:>10.6}",
            rounding.r,
            tv_distance(&target, &rounding.q)?,
            bound,
            if bound >= 1.0 { "*" } else { " " },
            tv
        );
        assert!(tv <= bound + 1e-12);
    }
    println!("(* bound is vacuous)");
    Ok(())
}

fn main() {
    run_example().expect("approximate synthesis example");
}
