// Split a distribution into a uniform mixture of components with at most
// three, then at most two, outcomes.
//
// ```sh
// cargo run --example sparse_decomposition
// ```

use iqp_hidden::decompose::{allocate_3sparse, decompose_2sparse, rows_to_dists};
use iqp_hidden::probdist::mix;
use iqp_hidden::ProbVector;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let p = ProbVector::validate(&[0.1, 0.1, 0.3, 0.5], 2)?;
    let q = allocate_3sparse(&p);
    q.check(&p, 1e-12)?;
    println!("allocation matrix (rows sum to 1/N, columns to p):");
    for row in q.to_dense() {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.3}")).collect();
        println!("  [{}]", cells.join(", "));
    }

    println!("three-outcome components:");
    for (i, c) in rows_to_dists(&q).iter().enumerate() {
        println!("  q({i}) = {:?}", c.entries());
    }

    let two = decompose_2sparse(&p)?;
    println!("{} two-outcome components:", two.len());
    for (i, c) in two.iter().enumerate() {
        println!("  {i}: {:?}", c.entries());
    }
    let mixed = mix(p.n(), &two, 1.0 / two.len() as f64);
    let err = mixed.iter().zip(p.probs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("reconstruction error: {err:.3e}");
    assert!(err <= 1e-12);
    Ok(())
}

fn main() {
    run_example().expect("sparse decomposition example");
}
