//! Probability vectors over `n`-bit outcomes and sparse components.

use serde_json::Value;

use crate::bits::{fmt_sig17, parse_bitstring, to_bitstring};
use crate::error::{Error, Result};

/// Entries at or above `-NEGATIVE_CLAMP` are clamped to zero on validation.
pub const NEGATIVE_CLAMP: f64 = 1e-12;
/// Accepted deviation of the raw sum from one.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Tolerance on the mass sum of a sparse component.
pub const SPARSE_SUM_TOL: f64 = 1e-12;

/// A dense probability vector over the `2^n` outcomes of `n` bits.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbVector {
    n: usize,
    probs: Vec<f64>,
}

impl ProbVector {
    /// Checks and normalizes raw masses.
    ///
    /// Entries within `1e-12` below zero are clamped; a sum within `1e-9` of
    /// one is accepted and rescaled so that the entries sum to one.
    pub fn validate(raw: &[f64], n: usize) -> Result<Self> {
        let expected = 1usize
            .checked_shl(n as u32)
            .filter(|_| n < usize::BITS as usize)
            .ok_or(Error::LengthMismatch { expected: usize::MAX, found: raw.len() })?;
        if raw.len() != expected {
            return Err(Error::LengthMismatch { expected, found: raw.len() });
        }
        let mut probs = Vec::with_capacity(raw.len());
        for (index, &value) in raw.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite { index });
            }
            if value < -NEGATIVE_CLAMP {
                return Err(Error::NegativeMass { index, value });
            }
            probs.push(value.max(0.0));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::BadNormalization { sum });
        }
        normalize_in_place(&mut probs, sum);
        Ok(Self { n, probs })
    }

    /// Uniform distribution over `n` bits.
    pub fn uniform(n: usize) -> Self {
        let len = 1usize << n;
        Self { n, probs: vec![1.0 / len as f64; len] }
    }

    /// Point mass on `outcome`.
    pub fn point_mass(n: usize, outcome: usize) -> Result<Self> {
        let len = 1usize << n;
        if outcome >= len {
            return Err(Error::OutcomeOutOfRange { outcome, bits: n });
        }
        let mut probs = vec![0.0; len];
        probs[outcome] = 1.0;
        Ok(Self { n, probs })
    }

    /// Wraps entries that are already known to be an exact distribution.
    pub(crate) fn from_exact(n: usize, probs: Vec<f64>) -> Self {
        debug_assert_eq!(probs.len(), 1 << n);
        Self { n, probs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of outcomes, `2^n`.
    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, outcome: usize) -> f64 {
        self.probs[outcome]
    }

    /// Parses the JSON distribution format, either
    /// `{"n": 2, "probs": {"01": 0.5, ...}}` or `{"n": 2, "dense": [...]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let obj = value
            .as_object()
            .ok_or_else(|| Error::Parse("expected a JSON object".into()))?;
        let n = obj
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| Error::Parse("missing integer field \"n\"".into()))?
            as usize;
        if n >= 40 {
            return Err(Error::Parse(format!("n = {n} is too large for dense storage")));
        }
        let len = 1usize << n;
        let raw = match (obj.get("probs"), obj.get("dense")) {
            (Some(probs), None) => {
                let map = probs
                    .as_object()
                    .ok_or_else(|| Error::Parse("\"probs\" must be an object".into()))?;
                let mut raw = vec![0.0; len];
                for (key, mass) in map {
                    let index = parse_bitstring(key, n)?;
                    raw[index] = mass
                        .as_f64()
                        .ok_or_else(|| Error::Parse(format!("mass of {key:?} is not a number")))?;
                }
                raw
            }
            (None, Some(dense)) => dense
                .as_array()
                .ok_or_else(|| Error::Parse("\"dense\" must be an array".into()))?
                .iter()
                .map(|v| v.as_f64().ok_or_else(|| Error::Parse("non-numeric dense entry".into())))
                .collect::<Result<Vec<_>>>()?,
            _ => {
                return Err(Error::Parse(
                    "exactly one of \"probs\" or \"dense\" is required".into(),
                ))
            }
        };
        Self::validate(&raw, n)
    }

    /// Serializes to the sparse-keyed JSON form; zero entries are omitted.
    pub fn to_json_string(&self) -> String {
        format!("{{\"n\": {}, \"probs\": {}}}\n", self.n, probs_object(self.n, self.nonzero()))
    }

    /// Serializes to the dense JSON form.
    pub fn to_dense_json_string(&self) -> String {
        let entries: Vec<String> = self.probs.iter().map(|&p| fmt_sig17(p)).collect();
        format!("{{\"n\": {}, \"dense\": [{}]}}\n", self.n, entries.join(", "))
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().copied().enumerate().filter(|&(_, p)| p > 0.0)
    }
}

fn normalize_in_place(probs: &mut [f64], sum: f64) {
    if sum == 1.0 || sum == 0.0 {
        return;
    }
    for p in probs.iter_mut() {
        *p /= sum;
    }
    // Make the summed value read back as exactly one so that validation is
    // idempotent. Resetting the last nonzero entry fixes the final addition;
    // the ulp walk on the largest entry catches what that misses.
    if let Some(last) = probs.iter().rposition(|&p| p > 0.0) {
        let prefix: f64 = probs[..last].iter().sum();
        let fixed = 1.0 - prefix;
        if fixed >= 0.0 {
            probs[last] = fixed;
        }
    }
    let Some(largest) = (0..probs.len()).max_by(|&a, &b| probs[a].total_cmp(&probs[b])) else {
        return;
    };
    for _ in 0..64 {
        let total: f64 = probs.iter().sum();
        if total == 1.0 {
            break;
        }
        probs[largest] = if total > 1.0 {
            probs[largest].next_down().max(0.0)
        } else {
            probs[largest].next_up()
        };
    }
}

fn probs_object(n: usize, entries: impl Iterator<Item = (usize, f64)>) -> String {
    let body: Vec<String> = entries
        .map(|(index, p)| format!("\"{}\": {}", to_bitstring(index, n), fmt_sig17(p)))
        .collect();
    format!("{{{}}}", body.join(", "))
}

/// Total variation distance, half the L1 distance.
pub fn tv_distance(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    if p.n != q.n {
        return Err(Error::DimensionMismatch { left: p.n, right: q.n });
    }
    let l1: f64 = p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum();
    Ok((0.5 * l1).min(1.0))
}

/// Number of entries strictly above `zero_tol`.
pub fn sparsity(p: &ProbVector, zero_tol: f64) -> usize {
    p.probs.iter().filter(|&&x| x > zero_tol).count()
}

/// Maps sorted positions back to original outcome labels:
/// `sorted[i] == p[perm.original(i)]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn original(&self, sorted_pos: usize) -> usize {
        self.0[sorted_pos]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// Puts sorted values back at their original positions.
    pub fn unsort<T: Copy + Default>(&self, sorted: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); sorted.len()];
        for (pos, &orig) in self.0.iter().enumerate() {
            out[orig] = sorted[pos];
        }
        out
    }
}

/// Stable ascending sort of the entries of `p`.
pub fn sort_with_permutation(p: &ProbVector) -> (Vec<f64>, Permutation) {
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| p.probs[a].total_cmp(&p.probs[b]));
    let sorted = order.iter().map(|&i| p.probs[i]).collect();
    (sorted, Permutation(order))
}

/// A distribution stored as `(outcome, mass)` pairs with positive masses.
///
/// Entries are kept in ascending outcome order.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseDist {
    n: usize,
    entries: Vec<(usize, f64)>,
}

impl SparseDist {
    pub fn new(n: usize, mut entries: Vec<(usize, f64)>) -> Result<Self> {
        let len = 1usize << n;
        if entries.is_empty() {
            return Err(Error::InvalidSparse("no entries".into()));
        }
        entries.sort_by_key(|&(i, _)| i);
        for w in entries.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidSparse(format!("outcome {} repeated", w[0].0)));
            }
        }
        for &(index, mass) in &entries {
            if index >= len {
                return Err(Error::OutcomeOutOfRange { outcome: index, bits: n });
            }
            if !(mass.is_finite() && mass > 0.0) {
                return Err(Error::InvalidSparse(format!("mass {mass} at outcome {index}")));
            }
        }
        let sum: f64 = entries.iter().map(|&(_, m)| m).sum();
        if (sum - 1.0).abs() > SPARSE_SUM_TOL {
            return Err(Error::InvalidSparse(format!("masses sum to {sum}")));
        }
        Ok(Self { n, entries })
    }

    pub fn point(n: usize, outcome: usize) -> Result<Self> {
        Self::new(n, vec![(outcome, 1.0)])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// Number of nonzero entries.
    pub fn support_size(&self) -> usize {
        self.entries.len()
    }

    pub fn is_k_sparse(&self, k: usize) -> bool {
        self.entries.len() <= k
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let mut dense = vec![0.0; 1 << self.n];
        for &(i, m) in &self.entries {
            dense[i] = m;
        }
        dense
    }

    /// JSON object in the distribution format with an added mixture weight.
    pub fn to_weighted_json(&self, weight: f64) -> String {
        format!(
            "{{\"n\": {}, \"weight\": {}, \"probs\": {}}}",
            self.n,
            fmt_sig17(weight),
            probs_object(self.n, self.entries.iter().copied())
        )
    }
}

/// Averages the components with the given weights into a dense vector.
pub fn mix(n: usize, components: &[SparseDist], weight: f64) -> Vec<f64> {
    let mut out = vec![0.0; 1 << n];
    for c in components {
        for &(i, m) in c.entries() {
            out[i] += weight * m;
        }
    }
    out
}
