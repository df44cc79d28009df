//! Mixture decompositions of probability vectors.
//!
//! [`allocate_3sparse`] spreads a distribution over `N` rows of capacity
//! `1/N` each, so every row (scaled by `N`) is a component with at most three
//! outcomes. [`decompose_2sparse`] splits those rows further into `2N`
//! components with at most two outcomes. [`round_to_dyadic`] and
//! [`build_multiplicity_map`] cover the approximate route where every
//! component is a single outcome.

use crate::bits::fmt_sig17;
use crate::error::{Error, Result};
use crate::probdist::{sort_with_permutation, ProbVector, SparseDist};

/// Remaining row capacity or column residual at or below this is treated as
/// zero while filling the allocation matrix.
pub const CAPACITY_TOL: f64 = 1e-15;

/// A near-integer `p·2^m` within this distance below the next integer is
/// snapped up to it.
pub const DYADIC_SNAP: f64 = 1e-9;

/// Largest hidden register for which dyadic counts stay exact in `f64`.
pub const MAX_DYADIC_BITS: usize = 52;

/// Largest hidden register for which a multiplicity map is materialized.
pub const MAX_MAP_BITS: usize = 30;

/// Nonnegative `N×N` matrix with row sums `1/N` and column sums `p_j`,
/// stored as per-row `(column, value)` lists of nonzero entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl AllocationMatrix {
    /// Bits per outcome; the matrix is `2^n × 2^n`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<(usize, f64)>] {
        &self.rows
    }

    pub fn row_sums(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.iter().map(|&(_, v)| v).sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.dim()];
        for row in &self.rows {
            for &(col, v) in row {
                sums[col] += v;
            }
        }
        sums
    }

    pub fn max_row_nonzeros(&self) -> usize {
        self.rows.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Checks every structural invariant against the source distribution.
    pub fn check(&self, p: &ProbVector, tol: f64) -> Result<()> {
        let dim = self.dim();
        if p.len() != dim {
            return Err(Error::LengthMismatch { expected: dim, found: p.len() });
        }
        let target = 1.0 / dim as f64;
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() > 3 {
                return Err(Error::SparsityViolation { found: row.len(), max: 3 });
            }
            if let Some(&(col, v)) = row.iter().find(|&&(_, v)| !(v >= 0.0)) {
                return Err(Error::NegativeMass { index: i * dim + col, value: v });
            }
            let sum: f64 = row.iter().map(|&(_, v)| v).sum();
            if (sum - target).abs() > tol {
                return Err(Error::BadNormalization { sum });
            }
        }
        for (j, sum) in self.column_sums().into_iter().enumerate() {
            if (sum - p.get(j)).abs() > tol {
                return Err(Error::BadNormalization { sum });
            }
        }
        Ok(())
    }

    /// Dense copy, mostly for inspection in tests and examples.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0.0; self.dim()];
                for &(col, v) in row {
                    dense[col] = v;
                }
                dense
            })
            .collect()
    }
}

/// Builds the allocation matrix of `p`.
pub fn allocate_3sparse(p: &ProbVector) -> AllocationMatrix {
    allocate_3sparse_observed(p, |_, _| {})
}

/// Like [`allocate_3sparse`], calling `observe(column, rows)` after each
/// column of the greedy fill. Columns passed to the observer are positions in
/// ascending sorted order, not outcome labels.
pub fn allocate_3sparse_observed<F>(p: &ProbVector, mut observe: F) -> AllocationMatrix
where
    F: FnMut(usize, &[Vec<(usize, f64)>]),
{
    let dim = p.len();
    let capacity = 1.0 / dim as f64;
    let (sorted, perm) = sort_with_permutation(p);

    // Entries below 1/N go on the diagonal.
    let pivot = sorted.iter().take_while(|&&x| x < capacity).count();
    let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::with_capacity(3); dim];
    let mut filled = vec![0.0; dim];
    for i in 0..pivot {
        if sorted[i] > 0.0 {
            rows[i].push((i, sorted[i]));
        }
        filled[i] = sorted[i];
    }

    // Rows before `cursor` are full and never regain capacity, so starting
    // the scan there is the same as scanning from the first row.
    let mut cursor = 0;
    for col in pivot..dim {
        let mut residual = sorted[col];
        let mut last_row = None;
        while residual > CAPACITY_TOL && cursor < dim {
            let room = capacity - filled[cursor];
            if room <= CAPACITY_TOL {
                cursor += 1;
                continue;
            }
            let take = room.min(residual);
            rows[cursor].push((col, take));
            filled[cursor] += take;
            residual -= take;
            last_row = Some(cursor);
            if take == room {
                cursor += 1;
            }
        }
        if residual > CAPACITY_TOL {
            // Every row is full: only rounding dust is left over.
            let row = last_row.unwrap_or(dim - 1);
            match rows[row].iter_mut().find(|(c, _)| *c == col) {
                Some(entry) => entry.1 += residual,
                None => rows[row].push((col, residual)),
            }
            filled[row] += residual;
        }
        observe(col, &rows);
    }

    for row in &mut rows {
        for entry in row.iter_mut() {
            entry.0 = perm.original(entry.0);
        }
        row.sort_by_key(|&(c, _)| c);
    }
    AllocationMatrix { n: p.n(), rows }
}

/// Scales each row by `N`, giving `N` components with at most three outcomes
/// whose uniform mixture is the source distribution.
pub fn rows_to_dists(q: &AllocationMatrix) -> Vec<SparseDist> {
    let scale = q.dim() as f64;
    q.rows
        .iter()
        .map(|row| {
            let entries = row
                .iter()
                .filter(|&&(_, v)| v > 0.0)
                .map(|&(c, v)| (c, v * scale))
                .collect();
            SparseDist::new(q.n, entries).expect("allocation rows are valid components")
        })
        .collect()
}

/// Splits a component with at most three outcomes into two components with
/// at most two outcomes whose average is the input.
///
/// For masses `p_a <= p_b <= p_c` the halves are `{a: 2p_a, c: 1 - 2p_a}` and
/// `{b: 2p_b, c: 1 - 2p_b}`. Smaller supports are duplicated.
pub fn split_3_to_2(q: &SparseDist) -> Result<(SparseDist, SparseDist)> {
    match q.support_size() {
        0..=2 => Ok((q.clone(), q.clone())),
        3 => {
            let mut e = q.entries().to_vec();
            e.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            let [(a, pa), (b, pb), (c, _)] = [e[0], e[1], e[2]];
            let half = |idx: usize, mass: f64| {
                let rest = 1.0 - 2.0 * mass;
                let mut entries = vec![(idx, 2.0 * mass)];
                if rest > 0.0 {
                    entries.push((c, rest));
                }
                SparseDist::new(q.n(), entries)
            };
            Ok((half(a, pa)?, half(b, pb)?))
        }
        found => Err(Error::SparsityViolation { found, max: 3 }),
    }
}

/// Decomposes `p` into exactly `2^{n+1}` components, each with at most two
/// outcomes, whose uniform mixture is `p`.
///
/// Components `2i` and `2i + 1` come from row `i` of the allocation matrix.
pub fn decompose_2sparse(p: &ProbVector) -> Result<Vec<SparseDist>> {
    let rows = rows_to_dists(&allocate_3sparse(p));
    let mut out = Vec::with_capacity(2 * rows.len());
    for row in &rows {
        let (first, second) = split_3_to_2(row)?;
        out.push(first);
        out.push(second);
    }
    Ok(out)
}

/// Serializes a uniform mixture as a JSON certificate.
pub fn certificate_json(n: usize, components: &[SparseDist]) -> String {
    let weight = 1.0 / components.len() as f64;
    let body: Vec<String> = components
        .iter()
        .map(|c| format!("    {}", c.to_weighted_json(weight)))
        .collect();
    let max_support = components.iter().map(SparseDist::support_size).max().unwrap_or(0);
    format!(
        "{{\n  \"n\": {n},\n  \"sparsity\": {max_support},\n  \"count\": {},\n  \"weight\": {},\n  \"components\": [\n{}\n  ]\n}}\n",
        components.len(),
        fmt_sig17(weight),
        body.join(",\n")
    )
}

/// Rounding of a distribution onto the grid of multiples of `2^{-m}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DyadicRounding {
    /// Hidden-register size.
    pub m: usize,
    /// `floor(p_j · 2^m)`.
    pub i: Vec<u64>,
    /// `p_j - i_j / 2^m`.
    pub eps: Vec<f64>,
    /// Number of outcomes that receive one extra unit of `2^{-m}`.
    pub r: u64,
    /// Rounded distribution; `q_j · 2^m` is an integer.
    pub q: ProbVector,
    counts: Vec<u64>,
}

impl DyadicRounding {
    /// `q_j · 2^m` for each outcome.
    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Worst-case total variation distance of the rounding,
    /// `(1/2)·2^{-(m-n)}`.
    pub fn tv_bound(&self) -> f64 {
        tv_bound(self.q.n(), self.m)
    }
}

/// `(1/2)·2^{n-m}`.
pub fn tv_bound(n: usize, m: usize) -> f64 {
    0.5 * 2f64.powi(n as i32 - m as i32)
}

/// Rounds `p` to a distribution whose entries are multiples of `2^{-m}`.
///
/// The `r` units of mass lost to flooring go to the `r` outcomes with the
/// largest residuals, ties broken towards lower outcome index.
pub fn round_to_dyadic(p: &ProbVector, m: usize) -> Result<DyadicRounding> {
    if m > MAX_DYADIC_BITS {
        return Err(Error::TooManyQubits { requested: m, max: MAX_DYADIC_BITS });
    }
    let total = 1u64 << m;
    let scale = total as f64;
    let mut i = Vec::with_capacity(p.len());
    let mut eps = Vec::with_capacity(p.len());
    for &pj in p.probs() {
        // Scaling by a power of two is exact in binary floating point.
        let x = pj * scale;
        let floor = x.floor();
        if x - floor >= 1.0 - DYADIC_SNAP {
            i.push(floor as u64 + 1);
            eps.push(0.0);
        } else {
            i.push(floor as u64);
            eps.push((pj - floor / scale).max(0.0));
        }
    }
    let mut assigned: u64 = i.iter().sum();
    while assigned > total {
        // Only reachable through accumulated snapping on huge registers.
        let j = (0..i.len()).max_by_key(|&j| (i[j], std::cmp::Reverse(j))).expect("nonempty");
        i[j] -= 1;
        assigned -= 1;
    }
    let r = (total - assigned).min(p.len() as u64);

    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| eps[b].total_cmp(&eps[a]));
    let mut counts = i.clone();
    for &j in order.iter().take(r as usize) {
        counts[j] += 1;
    }
    let q = ProbVector::from_exact(p.n(), counts.iter().map(|&c| c as f64 / scale).collect());
    Ok(DyadicRounding { m, i, eps, r, q, counts })
}

/// The assignment `v(j)` of an outcome to every hidden index `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiplicityMap {
    m: usize,
    n: usize,
    v: Vec<usize>,
}

impl MultiplicityMap {
    /// Wraps an explicit assignment of `2^m` hidden indices to outcomes.
    pub fn from_assignments(m: usize, n: usize, v: Vec<usize>) -> Result<Self> {
        if v.len() != 1 << m {
            return Err(Error::LengthMismatch { expected: 1 << m, found: v.len() });
        }
        if let Some(&outcome) = v.iter().find(|&&b| b >= 1 << n) {
            return Err(Error::OutcomeOutOfRange { outcome, bits: n });
        }
        Ok(Self { m, n, v })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn assignments(&self) -> &[usize] {
        &self.v
    }

    /// How many hidden indices map to each outcome.
    pub fn frequencies(&self) -> Vec<u64> {
        let mut freq = vec![0u64; 1 << self.n];
        for &b in &self.v {
            freq[b] += 1;
        }
        freq
    }

    /// The distribution `|{j : v(j) = b}| / 2^m`.
    pub fn distribution(&self) -> ProbVector {
        let scale = (1u64 << self.m) as f64;
        ProbVector::from_exact(
            self.n,
            self.frequencies().into_iter().map(|c| c as f64 / scale).collect(),
        )
    }
}

/// Lays out the rounded counts over the hidden indices: outcome 0 takes the
/// first `q_0·2^m` indices, outcome 1 the next block, and so on.
pub fn build_multiplicity_map(d: &DyadicRounding) -> Result<MultiplicityMap> {
    if d.m > MAX_MAP_BITS {
        return Err(Error::TooManyQubits { requested: d.m, max: MAX_MAP_BITS });
    }
    let expected = 1u64 << d.m;
    let total: u64 = d.counts.iter().sum();
    if total != expected {
        return Err(Error::InconsistentCounts { total, expected });
    }
    let v = d
        .counts
        .iter()
        .enumerate()
        .flat_map(|(b, &c)| std::iter::repeat(b).take(c as usize))
        .collect();
    Ok(MultiplicityMap { m: d.m, n: d.q.n(), v })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probdist::{mix, tv_distance};
    use proptest::prelude::*;

    fn pv(raw: &[f64]) -> ProbVector {
        ProbVector::validate(raw, raw.len().trailing_zeros() as usize).unwrap()
    }

    #[test]
    fn uniform_allocation_is_scaled_identity() {
        let q = allocate_3sparse(&ProbVector::uniform(2));
        for (i, row) in q.rows().iter().enumerate() {
            assert_eq!(row, &vec![(i, 0.25)]);
        }
    }

    #[test]
    fn allocation_hand_run() {
        // Hand run of the greedy fill on sorted (0.1, 0.1, 0.3, 0.5): pivot 2,
        // column 3 splits 0.15/0.15 over rows 1-2, column 4 fills rows 3-4.
        let expected = [
            [0.1, 0.0, 0.15, 0.0],
            [0.0, 0.1, 0.15, 0.0],
            [0.0, 0.0, 0.0, 0.25],
            [0.0, 0.0, 0.0, 0.25],
        ];
        let dense = allocate_3sparse(&pv(&[0.1, 0.1, 0.3, 0.5])).to_dense();
        for (row, want) in dense.iter().zip(expected) {
            for (a, b) in row.iter().zip(want) {
                assert!((a - b).abs() < 1e-15, "{dense:?}");
            }
        }

        // Shuffled labels: columns follow the outcomes, rows follow sorted order.
        let p = pv(&[0.5, 0.125, 0.25, 0.125]);
        let q = allocate_3sparse(&p);
        q.check(&p, 1e-12).unwrap();
        assert_eq!(q.rows()[0].iter().map(|e| e.0).collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(q.rows()[1].iter().map(|e| e.0).collect::<Vec<_>>(), vec![2, 3]);
        assert_eq!(q.rows()[2], vec![(0, 0.25)]);
    }

    #[test]
    fn point_mass_allocation() {
        let p = ProbVector::point_mass(3, 5).unwrap();
        let q = allocate_3sparse(&p);
        q.check(&p, 1e-12).unwrap();
        for row in q.rows() {
            assert_eq!(row, &vec![(5, 0.125)]);
        }
    }

    #[test]
    fn rows_scale_by_dimension() {
        let q = allocate_3sparse(&pv(&[0.1, 0.1, 0.3, 0.5]));
        let dists = rows_to_dists(&q);
        assert_eq!(dists.len(), 4);
        let first = dists[0].entries();
        assert_eq!(first.len(), 2);
        assert_eq!(first[0].0, 0);
        assert!((first[0].1 - 0.4).abs() < 1e-15);
        assert_eq!(first[1].0, 2);
        assert!((first[1].1 - 0.6).abs() < 1e-15);

        let uniform = rows_to_dists(&allocate_3sparse(&ProbVector::uniform(2)));
        for (i, d) in uniform.iter().enumerate() {
            assert_eq!(d.entries(), &[(i, 1.0)]);
        }
    }

    #[test]
    fn split_example() {
        let q = SparseDist::new(2, vec![(0, 0.2), (1, 0.3), (2, 0.5)]).unwrap();
        let (q1, q2) = split_3_to_2(&q).unwrap();
        assert_eq!(q1.entries()[0], (0, 0.4));
        assert_eq!(q1.entries()[1].0, 2);
        assert!((q1.entries()[1].1 - 0.6).abs() < 1e-15);
        assert_eq!(q2.entries()[0], (1, 0.6));
        assert!((q2.entries()[1].1 - 0.4).abs() < 1e-15);
        let avg: Vec<f64> =
            q1.to_dense().iter().zip(q2.to_dense()).map(|(a, b)| (a + b) / 2.0).collect();
        for (a, b) in avg.iter().zip(q.to_dense()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn split_copies_small_supports() {
        let two = SparseDist::new(2, vec![(1, 0.3), (3, 0.7)]).unwrap();
        assert_eq!(split_3_to_2(&two).unwrap(), (two.clone(), two));
        let point = SparseDist::point(2, 2).unwrap();
        assert_eq!(split_3_to_2(&point).unwrap(), (point.clone(), point));
        let four = SparseDist::new(2, vec![(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]).unwrap();
        assert!(matches!(split_3_to_2(&four), Err(Error::SparsityViolation { found: 4, max: 3 })));
    }

    #[test]
    fn two_sparse_of_uniform_and_point_mass() {
        let d = decompose_2sparse(&ProbVector::uniform(2)).unwrap();
        assert_eq!(d.len(), 8);
        for (k, c) in d.iter().enumerate() {
            assert_eq!(c.entries(), &[(k / 2, 1.0)]);
        }
        let d = decompose_2sparse(&ProbVector::point_mass(2, 1).unwrap()).unwrap();
        assert_eq!(d.len(), 8);
        assert!(d.iter().all(|c| c.entries() == [(1, 1.0)]));
    }

    #[test]
    fn dyadic_hand_run() {
        // 0.3·8 = 2.4, 0.7·8 = 5.6 → i = (2, 5), r = 1; the larger residual
        // (0.075 at outcome 1) takes the extra unit.
        let p = pv(&[0.3, 0.7]);
        let d = round_to_dyadic(&p, 3).unwrap();
        assert_eq!(d.i, vec![2, 5]);
        assert!((d.eps[0] - 0.05).abs() < 1e-15);
        assert!((d.eps[1] - 0.075).abs() < 1e-15);
        assert_eq!(d.r, 1);
        assert_eq!(d.q.probs(), &[0.25, 0.75]);
        let tv = tv_distance(&p, &d.q).unwrap();
        assert!((tv - 0.05).abs() < 1e-15);
        assert!(tv <= d.tv_bound());
        assert_eq!(d.tv_bound(), 0.125);
    }

    #[test]
    fn dyadic_identity_on_grid() {
        let p = pv(&[0.125, 0.375, 0.5, 0.0]);
        let d = round_to_dyadic(&p, 3).unwrap();
        assert_eq!(d.r, 0);
        assert_eq!(d.q, p);
        assert!(d.eps.iter().all(|&e| e == 0.0));
    }

    #[test]
    fn dyadic_snaps_near_integers() {
        // 0.1 + 0.2 lands just below 0.3 · 10 / 10 style boundaries; here the
        // scaled value sits a hair under an integer.
        let p = pv(&[0.25 - 1e-12, 0.75 + 1e-12]);
        let d = round_to_dyadic(&p, 2).unwrap();
        assert_eq!(d.i, vec![1, 3]);
        assert_eq!(d.eps[0], 0.0);
        assert_eq!(d.r, 0);
    }

    #[test]
    fn dyadic_with_empty_register() {
        let p = pv(&[0.4, 0.6]);
        let d = round_to_dyadic(&p, 0).unwrap();
        assert_eq!(d.r, 1);
        assert_eq!(d.q.probs(), &[0.0, 1.0]);
        assert!(tv_distance(&p, &d.q).unwrap() <= d.tv_bound());
        assert_eq!(d.tv_bound(), 1.0);
    }

    #[test]
    fn multiplicity_examples() {
        let d = round_to_dyadic(&pv(&[0.5, 0.5]), 1).unwrap();
        assert_eq!(build_multiplicity_map(&d).unwrap().assignments(), &[0, 1]);
        let d = round_to_dyadic(&ProbVector::point_mass(2, 2).unwrap(), 3).unwrap();
        assert!(build_multiplicity_map(&d).unwrap().assignments().iter().all(|&b| b == 2));
        let d = round_to_dyadic(&pv(&[0.25, 0.75]), 2).unwrap();
        let v = build_multiplicity_map(&d).unwrap();
        assert_eq!(v.assignments(), &[0, 1, 1, 1]);
        assert_eq!(v.frequencies(), vec![1, 3]);
    }

    #[test]
    fn multiplicity_rejects_bad_counts() {
        let mut d = round_to_dyadic(&pv(&[0.25, 0.75]), 2).unwrap();
        d.counts[0] += 1;
        assert!(matches!(
            build_multiplicity_map(&d),
            Err(Error::InconsistentCounts { total: 5, expected: 4 })
        ));
    }

    fn dist(max_n: usize) -> impl Strategy<Value = ProbVector> {
        (1..=max_n).prop_flat_map(|n| {
            proptest::collection::vec(prop_oneof![1 => Just(0.0), 4 => 0.0..1.0f64], 1usize << n)
                .prop_filter("nonzero", |v| v.iter().sum::<f64>() > 0.0)
                .prop_map(move |v| {
                    let s: f64 = v.iter().sum();
                    ProbVector::validate(&v.iter().map(|x| x / s).collect::<Vec<_>>(), n).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn allocation_invariants_hold_mid_fill(p in dist(8)) {
            let mut worst = 0;
            let q = allocate_3sparse_observed(&p, |_, rows| {
                worst = worst.max(rows.iter().map(Vec::len).max().unwrap_or(0));
            });
            prop_assert!(worst <= 3);
            prop_assert!(q.check(&p, 1e-12).is_ok());
        }

        #[test]
        fn two_sparse_reconstructs(p in dist(6)) {
            let comps = decompose_2sparse(&p).unwrap();
            prop_assert_eq!(comps.len(), 2 * p.len());
            prop_assert!(comps.iter().all(|c| c.is_k_sparse(2)));
            let mixed = mix(p.n(), &comps, 1.0 / comps.len() as f64);
            for (a, b) in mixed.iter().zip(p.probs()) {
                prop_assert!((a - b).abs() <= 1e-12);
            }
        }

        #[test]
        fn dyadic_bound_and_map(p in dist(4), extra in 0usize..7) {
            let m = p.n() + extra;
            let d = round_to_dyadic(&p, m).unwrap();
            prop_assert!(tv_distance(&p, &d.q).unwrap() <= d.tv_bound());
            prop_assert_eq!(d.q.probs().iter().sum::<f64>(), 1.0);
            let v = build_multiplicity_map(&d).unwrap();
            prop_assert_eq!(v.frequencies(), d.counts().to_vec());
        }
    }
}
