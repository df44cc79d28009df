//! Exact dense simulation of IQP circuits with hidden qubits.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::qubit_mask;
use crate::error::{Error, Result};
use crate::probdist::ProbVector;
use crate::synth::{GateList, PhaseTable};

/// Largest register held as a dense state vector.
pub const MAX_STATE_QUBITS: usize = 24;
/// Largest register handled by [`marginal_mixture`].
pub const MAX_MIXTURE_QUBITS: usize = 32;

/// Seed used when callers do not pick one.
pub const DEFAULT_SEED: u64 = 0;

const NORM_TOL: f64 = 1e-12;

/// Dense amplitudes over `2^qubits` big-endian basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0…0⟩`.
    pub fn zero(qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { qubits, amps }
    }

    pub fn from_amplitudes(qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != 1 << qubits {
            return Err(Error::LengthMismatch { expected: 1 << qubits, found: amps.len() });
        }
        let state = Self { qubits, amps };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::BadNormalization { sum: norm });
        }
        Ok(state)
    }

    pub fn qubits(&self) -> usize {
        self.qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    /// L2 norm.
    pub fn norm(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    /// Born-rule probabilities of the computational basis states.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    fn hadamard(&mut self, qubit: usize) {
        let mask = qubit_mask(qubit, self.qubits);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for x in 0..self.amps.len() {
            if x & mask == 0 {
                let (a, b) = (self.amps[x], self.amps[x | mask]);
                self.amps[x] = (a + b) * s;
                self.amps[x | mask] = (a - b) * s;
            }
        }
    }

    fn x_rotation(&mut self, mask: usize, angle: f64) {
        let (sin, cos) = angle.sin_cos();
        let isin = Complex64::new(0.0, sin);
        for x in 0..self.amps.len() {
            let y = x ^ mask;
            if x < y {
                let (a, b) = (self.amps[x], self.amps[y]);
                self.amps[x] = a * cos + b * isin;
                self.amps[y] = b * cos + a * isin;
            }
        }
    }
}

fn check_qubits(requested: usize, max: usize) -> Result<()> {
    if requested > max {
        Err(Error::TooManyQubits { requested, max })
    } else {
        Ok(())
    }
}

/// The state `D(θ) H^{⊗(m+n)} |0⟩`, i.e. amplitude `2^{-(m+n)/2}·e^{iθ_x}`.
pub fn full_statevector(pt: &PhaseTable) -> Result<StateVector> {
    let qubits = pt.total_qubits();
    check_qubits(qubits, MAX_STATE_QUBITS)?;
    let amp = ((1u64 << qubits) as f64).sqrt().recip();
    let amps = pt.phases().iter().map(|&t| Complex64::from_polar(amp, t)).collect();
    Ok(StateVector { qubits, amps })
}

/// Applies one Hadamard to each distinct qubit in `targets`.
pub fn apply_hadamard_layer(s: &StateVector, targets: &[usize]) -> Result<StateVector> {
    if let Some(&qubit) = targets.iter().find(|&&q| q >= s.qubits) {
        return Err(Error::BadTarget { qubit, qubits: s.qubits });
    }
    let mut targets = targets.to_vec();
    targets.sort_unstable();
    targets.dedup();
    let mut out = s.clone();
    for q in targets {
        out.hadamard(q);
    }
    Ok(out)
}

fn to_marginal(n: usize, mut probs: Vec<f64>) -> Result<ProbVector> {
    for p in probs.iter_mut() {
        if *p < 0.0 && *p >= -1e-14 {
            *p = 0.0;
        }
    }
    ProbVector::validate(&probs, n)
}

/// Visible marginal by full simulation: apply the final Hadamard layer to
/// every qubit and sum the probabilities over the hidden register.
pub fn marginal_full(pt: &PhaseTable) -> Result<ProbVector> {
    let state = full_statevector(pt)?;
    let all: Vec<usize> = (0..state.qubits).collect();
    let state = apply_hadamard_layer(&state, &all)?;
    let visible_mask = (1usize << pt.n()) - 1;
    let mut marginal = vec![0.0; 1 << pt.n()];
    for (x, amp) in state.amps.iter().enumerate() {
        marginal[x & visible_mask] += amp.norm_sqr();
    }
    to_marginal(pt.n(), marginal)
}

/// Visible marginal as the uniform mixture of the `2^m` row states
/// `2^{-n/2} Σ_y e^{iθ_{k,y}} |y⟩`, each measured after a Hadamard layer on
/// the visible qubits. Only one `2^n` buffer is live at a time.
pub fn marginal_mixture(pt: &PhaseTable) -> Result<ProbVector> {
    let (m, n) = (pt.m(), pt.n());
    check_qubits(n, MAX_STATE_QUBITS)?;
    check_qubits(m + n, MAX_MIXTURE_QUBITS)?;
    let dim = 1usize << n;
    // The transform is unnormalized and the row amplitudes are unit phases,
    // so each probability carries 2^{-2n} on top of the 2^{-m} row weight.
    let weight = (dim as f64).powi(-2) * ((1u64 << m) as f64).recip();
    let mut marginal = vec![0.0; dim];
    let mut buf = vec![Complex64::new(0.0, 0.0); dim];
    for k in 0..1usize << m {
        for (b, &t) in buf.iter_mut().zip(pt.row(k)) {
            *b = Complex64::from_polar(1.0, t);
        }
        fwht_complex(&mut buf);
        for (acc, b) in marginal.iter_mut().zip(&buf) {
            *acc += b.norm_sqr() * weight;
        }
    }
    to_marginal(n, marginal)
}

fn fwht_complex(values: &mut [Complex64]) {
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

/// Whether every amplitude has magnitude `2^{-qubits/2}` within `tol`.
pub fn is_uma(s: &StateVector, tol: f64) -> bool {
    let target = ((1u64 << s.qubits) as f64).sqrt().recip();
    s.amps.iter().all(|a| (a.norm() - target).abs() <= tol)
}

/// Runs the gate form from `|0…0⟩`: each `exp(i·angle·X_S)` in list order,
/// then the global phase.
pub fn simulate_gates(g: &GateList) -> Result<StateVector> {
    let qubits = g.total_qubits();
    check_qubits(qubits, MAX_STATE_QUBITS)?;
    let mut state = StateVector::zero(qubits);
    for gate in g.gates() {
        state.x_rotation(gate.mask(qubits), gate.angle);
    }
    let phase = Complex64::from_polar(1.0, g.global_phase());
    for a in state.amps.iter_mut() {
        *a *= phase;
    }
    Ok(state)
}

/// Draws `count` outcome indices from `p` by inverse-CDF sampling with a
/// seeded ChaCha8 generator.
pub fn sample(p: &ProbVector, count: usize, seed: u64) -> Vec<usize> {
    let mut cdf = Vec::with_capacity(p.len());
    let mut acc = 0.0;
    for &x in p.probs() {
        acc += x;
        cdf.push(acc);
    }
    let last_positive = p.probs().iter().rposition(|&x| x > 0.0).unwrap_or(0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = rng.gen::<f64>() * acc;
            cdf.partition_point(|&c| c <= u).min(last_positive)
        })
        .collect()
}
