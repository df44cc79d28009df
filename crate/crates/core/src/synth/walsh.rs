//! Lowering of diagonal phases to commuting X-parity rotations.
//!
//! Writing `θ(x) = c_∅ + Σ_S c_S (-1)^{S·x}`, the diagonal operator is
//! `e^{i c_∅} Π_S exp(i c_S Z_S)`, and conjugating by the Hadamard layers
//! turns each `Z_S` into `X_S`.

use crate::bits::qubit_mask;
use crate::error::{Error, Result};
use crate::synth::{canonical_angle, canonical_phase, PhaseTable};

/// Largest register [`walsh_lower`] accepts.
pub const MAX_LOWER_QUBITS: usize = 16;

/// Coefficients with magnitude at or below this are not emitted as gates.
pub const PRUNE_TOL: f64 = 1e-12;

/// `exp(i·angle·X_S)` over the qubits in `support`.
#[derive(Debug, Clone, PartialEq)]
pub struct XRotation {
    /// Ascending qubit indices.
    pub support: Vec<usize>,
    pub angle: f64,
}

impl XRotation {
    /// Index mask flipped by `X_S` in a `width`-qubit register.
    pub fn mask(&self, width: usize) -> usize {
        self.support.iter().fold(0, |acc, &q| acc | qubit_mask(q, width))
    }
}

/// A global phase followed by commuting X-parity rotations.
#[derive(Debug, Clone, PartialEq)]
pub struct GateList {
    hidden: usize,
    visible: usize,
    global_phase: f64,
    gates: Vec<XRotation>,
}

impl GateList {
    /// Checks supports and canonicalizes angles. Supports must be nonempty,
    /// inside the register and pairwise distinct.
    pub fn new(
        hidden: usize,
        visible: usize,
        global_phase: f64,
        gates: Vec<XRotation>,
    ) -> Result<Self> {
        let total = hidden + visible;
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::with_capacity(gates.len());
        for mut gate in gates {
            gate.support.sort_unstable();
            gate.support.dedup();
            if gate.support.is_empty() {
                return Err(Error::Parse("rotation with empty support".into()));
            }
            if let Some(&q) = gate.support.iter().find(|&&q| q >= total) {
                return Err(Error::BadTarget { qubit: q, qubits: total });
            }
            if !gate.angle.is_finite() {
                return Err(Error::Parse("non-finite rotation angle".into()));
            }
            if !seen.insert(gate.support.clone()) {
                return Err(Error::Parse(format!("support {:?} appears twice", gate.support)));
            }
            gate.angle = canonical_angle(gate.angle);
            out.push(gate);
        }
        if !global_phase.is_finite() {
            return Err(Error::Parse("non-finite global phase".into()));
        }
        Ok(Self { hidden, visible, global_phase: canonical_angle(global_phase), gates: out })
    }

    pub fn hidden(&self) -> usize {
        self.hidden
    }

    pub fn visible(&self) -> usize {
        self.visible
    }

    pub fn total_qubits(&self) -> usize {
        self.hidden + self.visible
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn gates(&self) -> &[XRotation] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// Same gates in a different order.
    pub fn reordered(&self, order: &[usize]) -> Self {
        Self { gates: order.iter().map(|&i| self.gates[i].clone()).collect(), ..self.clone() }
    }

    /// Adds the angles of matching supports and the global phases.
    pub fn merged(&self, other: &GateList) -> Result<GateList> {
        if self.hidden != other.hidden || self.visible != other.visible {
            return Err(Error::DimensionMismatch {
                left: self.total_qubits(),
                right: other.total_qubits(),
            });
        }
        let mut gates = self.gates.clone();
        for g in &other.gates {
            match gates.iter_mut().find(|h| h.support == g.support) {
                Some(h) => h.angle += g.angle,
                None => gates.push(g.clone()),
            }
        }
        GateList::new(self.hidden, self.visible, self.global_phase + other.global_phase, gates)
    }
}

/// In-place unnormalized Walsh–Hadamard transform.
pub(crate) fn fwht(values: &mut [f64]) {
    let len = values.len();
    let mut half = 1;
    while half < len {
        for block in (0..len).step_by(2 * half) {
            for i in block..block + half {
                let (a, b) = (values[i], values[i + half]);
                values[i] = a + b;
                values[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// Lowers a phase table to its Walsh coefficients: the empty-support
/// coefficient becomes the global phase and every other coefficient above
/// the pruning threshold becomes one rotation.
pub fn walsh_lower(pt: &PhaseTable) -> Result<GateList> {
    let total = pt.total_qubits();
    if total > MAX_LOWER_QUBITS {
        return Err(Error::TooManyQubits { requested: total, max: MAX_LOWER_QUBITS });
    }
    let mut coeffs = pt.phases().to_vec();
    fwht(&mut coeffs);
    let scale = (coeffs.len() as f64).recip();
    let global_phase = coeffs[0] * scale;
    let gates = coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(mask, &c)| (mask, c * scale))
        .filter(|&(_, c)| c.abs() > PRUNE_TOL)
        .map(|(mask, c)| XRotation {
            support: (0..total).filter(|&q| mask & qubit_mask(q, total) != 0).collect(),
            angle: c,
        })
        .collect();
    GateList::new(pt.m(), pt.n(), global_phase, gates)
}

/// Evaluates `θ(x) = φ + Σ angle·(-1)^{S·x}` over the whole register.
pub fn gates_to_phases(g: &GateList) -> Result<PhaseTable> {
    let total = g.total_qubits();
    let mut coeffs = vec![0.0; 1 << total];
    coeffs[0] = g.global_phase;
    for gate in &g.gates {
        coeffs[gate.mask(total)] += gate.angle;
    }
    fwht(&mut coeffs);
    PhaseTable::new(g.hidden, g.visible, coeffs.into_iter().map(canonical_phase).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_table(rng: &mut ChaCha8Rng, m: usize, n: usize, scale: f64) -> PhaseTable {
        let theta = (0..1 << (m + n)).map(|_| rng.gen::<f64>() * scale).collect();
        PhaseTable::new(m, n, theta).unwrap()
    }

    #[test]
    fn one_qubit_sign_flip() {
        // c_∅ = (0 + π)/2, c_{0} = (0 - π)/2.
        let pt = PhaseTable::new(0, 1, vec![0.0, PI]).unwrap();
        let g = walsh_lower(&pt).unwrap();
        assert!((g.global_phase() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(g.len(), 1);
        assert_eq!(g.gates()[0].support, vec![0]);
        assert!((g.gates()[0].angle + FRAC_PI_2).abs() < 1e-15);
        assert!(gates_to_phases(&g).unwrap().max_phase_distance(&pt) < 1e-15);
    }

    #[test]
    fn zero_table_lowers_to_nothing() {
        let g = walsh_lower(&PhaseTable::zeros(2, 3)).unwrap();
        assert!(g.is_empty());
        assert_eq!(g.global_phase(), 0.0);
        assert!(gates_to_phases(&g).unwrap().phases().iter().all(|&t| t == 0.0));
    }

    #[test]
    fn single_gate_evaluation() {
        // x = 0: π/2 + π/2 = π; x = 1: π/2 - π/2 = 0.
        let g = GateList::new(0, 1, FRAC_PI_2, vec![XRotation { support: vec![0], angle: FRAC_PI_2 }])
            .unwrap();
        let pt = gates_to_phases(&g).unwrap();
        assert!((pt.phases()[0] - PI).abs() < 1e-15);
        assert!(pt.phases()[1].abs() < 1e-15);
    }

    #[test]
    fn support_follows_big_endian_qubits() {
        // Phase π only where qubit 0 of two is set: coefficient on {0}.
        let pt = PhaseTable::new(1, 1, vec![0.0, 0.0, PI, PI]).unwrap();
        let g = walsh_lower(&pt).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.gates()[0].support, vec![0]);
    }

    #[test]
    fn too_many_qubits() {
        let pt = PhaseTable::zeros(9, 8);
        assert!(matches!(walsh_lower(&pt), Err(Error::TooManyQubits { requested: 17, max: 16 })));
    }

    #[test]
    fn gate_list_validation() {
        let bad = |gates| GateList::new(1, 1, 0.0, gates);
        assert!(bad(vec![XRotation { support: vec![], angle: 0.1 }]).is_err());
        assert!(matches!(
            bad(vec![XRotation { support: vec![2], angle: 0.1 }]),
            Err(Error::BadTarget { qubit: 2, qubits: 2 })
        ));
        assert!(bad(vec![
            XRotation { support: vec![0, 1], angle: 0.1 },
            XRotation { support: vec![1, 0], angle: 0.2 },
        ])
        .is_err());
        let g = bad(vec![XRotation { support: vec![1], angle: 3.0 * PI / 2.0 }]).unwrap();
        assert!((g.gates()[0].angle + FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_random_tables() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..100 {
            let total = rng.gen_range(1..=6);
            let m = rng.gen_range(0..=total);
            let pt = random_table(&mut rng, m, total - m, TAU);
            let g = walsh_lower(&pt).unwrap();
            assert!(g.len() < 1 << total);
            assert!(gates_to_phases(&g).unwrap().max_phase_distance(&pt) < 1e-9);
        }
    }

    #[test]
    fn lowering_is_linear() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..50 {
            // Summands stay in [0, π) so the sum needs no wrap-around.
            let (a, b) = (random_table(&mut rng, 2, 2, PI), random_table(&mut rng, 2, 2, PI));
            let sum: Vec<f64> = a.phases().iter().zip(b.phases()).map(|(x, y)| x + y).collect();
            let lowered = walsh_lower(&PhaseTable::new(2, 2, sum).unwrap()).unwrap();
            let merged = walsh_lower(&a).unwrap().merged(&walsh_lower(&b).unwrap()).unwrap();
            let close = |x: f64, y: f64| crate::synth::phase_distance(x, y) < 1e-9;
            assert!(close(lowered.global_phase(), merged.global_phase()));
            for gate in merged.gates() {
                let other = lowered.gates().iter().find(|h| h.support == gate.support);
                let angle = other.map_or(0.0, |h| h.angle);
                assert!(close(angle, gate.angle), "{:?}", gate.support);
            }
        }
    }
}
