//! Phase-parameter synthesis.
//!
//! A circuit on `m` hidden and `n` visible qubits is described by the
//! diagonal phases `θ_{j,k}` applied between two Hadamard layers. Hidden
//! qubits occupy `0..m`, visible qubits `m..m+n`, and the table index of
//! `(j, k)` is `j·2^n + k`.

use std::f64::consts::{PI, TAU};

use crate::bits::dot_parity;
use crate::decompose::{decompose_2sparse, MultiplicityMap};
use crate::error::{Error, Result};
use crate::probdist::ProbVector;

pub mod text;
pub mod walsh;

pub use text::CircuitFile;
pub use walsh::{gates_to_phases, walsh_lower, GateList, XRotation, MAX_LOWER_QUBITS};

/// Reduces a phase into `[0, 2π)`.
pub fn canonical_phase(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduces a rotation angle into `(-π, π]`.
pub fn canonical_angle(x: f64) -> f64 {
    let r = canonical_phase(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// Distance between two phases on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = canonical_phase(a - b);
    d.min(TAU - d)
}

/// Diagonal phases of an IQP circuit with `m` hidden and `n` visible qubits.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTable {
    m: usize,
    n: usize,
    theta: Vec<f64>,
}

impl PhaseTable {
    /// Builds a table from `2^{m+n}` finite phases, canonicalized to `[0, 2π)`.
    pub fn new(m: usize, n: usize, theta: Vec<f64>) -> Result<Self> {
        let total = m + n;
        if total >= usize::BITS as usize - 1 {
            return Err(Error::TooManyQubits { requested: total, max: usize::BITS as usize - 2 });
        }
        if theta.len() != 1 << total {
            return Err(Error::LengthMismatch { expected: 1 << total, found: theta.len() });
        }
        if let Some(index) = theta.iter().position(|t| !t.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { m, n, theta: theta.into_iter().map(canonical_phase).collect() })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        Self { m, n, theta: vec![0.0; 1 << (m + n)] }
    }

    /// Hidden qubits.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Visible qubits.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn total_qubits(&self) -> usize {
        self.m + self.n
    }

    pub fn phases(&self) -> &[f64] {
        &self.theta
    }

    pub fn get(&self, hidden: usize, visible: usize) -> f64 {
        self.theta[(hidden << self.n) | visible]
    }

    /// The phases `θ_{j,·}` of hidden index `j`.
    pub fn row(&self, hidden: usize) -> &[f64] {
        let width = 1 << self.n;
        &self.theta[hidden * width..(hidden + 1) * width]
    }

    /// Largest entrywise distance on the circle.
    pub fn max_phase_distance(&self, other: &PhaseTable) -> f64 {
        self.theta
            .iter()
            .zip(&other.theta)
            .map(|(&a, &b)| phase_distance(a, b))
            .fold(0.0, f64::max)
    }
}

/// The phases of one hidden index, encoding a distribution supported on two
/// outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseRow {
    pub n: usize,
    pub theta_row: Vec<f64>,
    /// Outcome receiving `mass`.
    pub b1: usize,
    /// Outcome receiving `1 - mass`.
    pub b2: usize,
    pub mass: f64,
    /// `2·arccos(√mass)`.
    pub theta_star: f64,
}

/// Phases `θ_y = π·(b1·y) + θ*·((b1⊕b2)·y)` with `θ* = 2·arccos(√mass)`.
///
/// After a Hadamard on every qubit the row state has amplitude
/// `(1 + e^{iθ*})/2` on `b1` and `(1 - e^{iθ*})/2` on `b2`, so measuring
/// yields `b1` with probability `cos²(θ*/2) = mass`. When `b1 == b2` the mass
/// is forced to one.
pub fn uma_phases_for_pair(b1: usize, b2: usize, mass: f64, n: usize) -> Result<PhaseRow> {
    if !(0.0..=1.0).contains(&mass) {
        return Err(Error::MassOutOfRange(mass));
    }
    for b in [b1, b2] {
        if b >> n != 0 {
            return Err(Error::OutcomeOutOfRange { outcome: b, bits: n });
        }
    }
    let mass = if b1 == b2 { 1.0 } else { mass };
    let theta_star = 2.0 * mass.sqrt().min(1.0).acos();
    let flip = b1 ^ b2;
    let theta_row = (0..1usize << n)
        .map(|y| {
            let sign = PI * f64::from(dot_parity(b1, y));
            let rot = theta_star * f64::from(dot_parity(flip, y));
            canonical_phase(sign + rot)
        })
        .collect();
    Ok(PhaseRow { n, theta_row, b1, b2, mass, theta_star })
}

/// Phase table with `m = n + 1` hidden qubits whose visible marginal is `p`.
///
/// Row `k` encodes the `k`-th component of [`decompose_2sparse`].
pub fn exact_phase_table(p: &ProbVector) -> Result<PhaseTable> {
    let n = p.n();
    let components = decompose_2sparse(p)?;
    let mut theta = Vec::with_capacity(components.len() << n);
    for component in &components {
        let row = match *component.entries() {
            [(b, _)] => uma_phases_for_pair(b, b, 1.0, n)?,
            [(b1, m1), (b2, m2)] => uma_phases_for_pair(b1, b2, (m1 / (m1 + m2)).min(1.0), n)?,
            _ => {
                return Err(Error::SparsityViolation { found: component.support_size(), max: 2 })
            }
        };
        theta.extend(row.theta_row);
    }
    Ok(PhaseTable { m: n + 1, n, theta })
}

/// Phase table with phases in `{0, π}`: hidden index `j` gets the sign
/// pattern `θ_{j,k} = π·(v(j)·k)`, which the visible Hadamard layer maps to
/// the outcome `v(j)`.
pub fn approx_phase_table(v: &MultiplicityMap) -> PhaseTable {
    let (m, n) = (v.m(), v.n());
    let mut theta = Vec::with_capacity(1 << (m + n));
    for &b in v.assignments() {
        theta.extend((0..1usize << n).map(|k| PI * f64::from(dot_parity(b, k))));
    }
    PhaseTable { m, n, theta }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probdist::tv_distance;
    use crate::sim::{apply_hadamard_layer, is_uma, marginal_full, marginal_mixture, StateVector};
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Brute-force measurement of a single row state.
    fn measure_row(row: &PhaseRow) -> Vec<f64> {
        let dim = 1usize << row.n;
        let amp = (dim as f64).sqrt().recip();
        let amps = row.theta_row.iter().map(|&t| Complex64::from_polar(amp, t)).collect();
        let state = StateVector::from_amplitudes(row.n, amps).unwrap();
        assert!(is_uma(&state, 1e-12));
        let targets: Vec<usize> = (0..row.n).collect();
        apply_hadamard_layer(&state, &targets).unwrap().probabilities()
    }

    #[test]
    fn canonical_ranges() {
        assert_eq!(canonical_phase(-PI / 2.0), 1.5 * PI);
        assert_eq!(canonical_phase(TAU), 0.0);
        assert_eq!(canonical_angle(1.5 * PI), -PI / 2.0);
        assert_eq!(canonical_angle(PI), PI);
        assert_eq!(canonical_angle(-PI), PI);
    }

    #[test]
    fn single_qubit_half_mass() {
        let row = uma_phases_for_pair(0, 1, 0.5, 1).unwrap();
        assert!((row.theta_star - PI / 2.0).abs() < 1e-15);
        assert_eq!(row.theta_row[0], 0.0);
        assert!((row.theta_row[1] - PI / 2.0).abs() < 1e-15);
        let probs = measure_row(&row);
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn equal_outcomes_give_point_mass() {
        for mass in [0.0, 0.3, 1.0] {
            let row = uma_phases_for_pair(5, 5, mass, 3).unwrap();
            assert_eq!(row.mass, 1.0);
            assert_eq!(row.theta_star, 0.0);
            let probs = measure_row(&row);
            assert!((probs[5] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn random_pairs_on_three_qubits() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let b1 = rng.gen_range(0..8);
            let b2 = (b1 + rng.gen_range(1..8)) % 8;
            let mass = rng.gen::<f64>();
            let probs = measure_row(&uma_phases_for_pair(b1, b2, mass, 3).unwrap());
            for (b, &pr) in probs.iter().enumerate() {
                let want = if b == b1 { mass } else if b == b2 { 1.0 - mass } else { 0.0 };
                assert!((pr - want).abs() < 1e-12, "b={b} got {pr} want {want}");
            }
        }
    }

    #[test]
    fn pair_errors() {
        assert!(matches!(uma_phases_for_pair(0, 1, 1.5, 1), Err(Error::MassOutOfRange(_))));
        assert!(matches!(uma_phases_for_pair(0, 1, f64::NAN, 1), Err(Error::MassOutOfRange(_))));
        assert!(matches!(
            uma_phases_for_pair(0, 4, 0.5, 2),
            Err(Error::OutcomeOutOfRange { outcome: 4, bits: 2 })
        ));
    }

    #[test]
    fn point_mass_at_zero_gives_zero_table() {
        let pt = exact_phase_table(&ProbVector::point_mass(2, 0).unwrap()).unwrap();
        assert_eq!(pt.m(), 3);
        assert!(pt.phases().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn uniform_one_bit_end_to_end() {
        let p = ProbVector::uniform(1);
        let pt = exact_phase_table(&p).unwrap();
        let q = marginal_full(&pt).unwrap();
        assert!((q.get(0) - 0.5).abs() < 1e-12 && (q.get(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn exact_tables_reproduce_random_targets() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3 {
            for _ in 0..30 {
                let raw: Vec<f64> = (0..1 << n).map(|_| rng.gen::<f64>()).collect();
                let s: f64 = raw.iter().sum();
                let p = ProbVector::validate(&raw.iter().map(|x| x / s).collect::<Vec<_>>(), n)
                    .unwrap();
                let q = marginal_mixture(&exact_phase_table(&p).unwrap()).unwrap();
                assert!(tv_distance(&p, &q).unwrap() <= 1e-9);
            }
        }
    }

    #[test]
    fn approx_tables() {
        let zero = MultiplicityMap::from_assignments(2, 2, vec![0; 4]).unwrap();
        let pt = approx_phase_table(&zero);
        assert!(pt.phases().iter().all(|&t| t == 0.0));
        assert_eq!(marginal_full(&pt).unwrap().get(0), 1.0);

        let v = MultiplicityMap::from_assignments(1, 1, vec![0, 1]).unwrap();
        let q = marginal_full(&approx_phase_table(&v)).unwrap();
        assert!((q.get(0) - 0.5).abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..40 {
            let (m, n) = (rng.gen_range(0..=4), rng.gen_range(1..=3));
            let assign = (0..1 << m).map(|_| rng.gen_range(0..1 << n)).collect();
            let v = MultiplicityMap::from_assignments(m, n, assign).unwrap();
            let pt = approx_phase_table(&v);
            assert!(pt.phases().iter().all(|&t| t == 0.0 || t == PI));
            let q = marginal_full(&pt).unwrap();
            for (b, c) in v.frequencies().into_iter().enumerate() {
                assert!((q.get(b) - c as f64 / (1u64 << m) as f64).abs() < 1e-12);
            }
        }
    }
}
