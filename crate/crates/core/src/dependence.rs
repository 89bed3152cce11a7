//! Neighbour structures and the closed-form correlations they induce.
//!
//! Indices are 0-based in this API; configuration files and CSV output use
//! 1-based indices.

use crate::error::{invalid, DdpError, Result};
use crate::scalar::{lift, Field, Real};

/// Forward neighbour sets `∂_t` together with the reversed sets
/// `ϱ_t = { j : t ∈ ∂_j }`. Every `t` belongs to its own `∂_t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NeighborStructure {
    forward: Vec<Vec<usize>>,
    reversed: Vec<Vec<usize>>,
}

impl NeighborStructure {
    /// Build from explicit forward sets. Sets are sorted and deduplicated.
    pub fn custom(sets: Vec<Vec<usize>>) -> Result<Self> {
        let n = sets.len();
        if n == 0 {
            return Err(invalid("neighbour structure needs at least one index"));
        }
        let mut forward = Vec::with_capacity(n);
        for (t, mut set) in sets.into_iter().enumerate() {
            set.sort_unstable();
            set.dedup();
            if let Some(&bad) = set.iter().find(|&&j| j >= n) {
                return Err(invalid(format!(
                    "neighbour {} of index {} is outside 1..={n}",
                    bad + 1,
                    t + 1
                )));
            }
            if set.binary_search(&t).is_err() {
                return Err(invalid(format!("index {} must belong to its own neighbour set", t + 1)));
            }
            forward.push(set);
        }
        let mut reversed = vec![Vec::new(); n];
        for (j, set) in forward.iter().enumerate() {
            for &t in set {
                reversed[t].push(j);
            }
        }
        Ok(Self { forward, reversed })
    }

    /// Moving-average structure of order `q`: `∂_t = {t-q, ..., t}` clamped at the first index.
    pub fn moving_average(len: usize, q: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("moving-average structure needs T >= 1"));
        }
        Self::custom((0..len).map(|t| (t.saturating_sub(q)..=t).collect()).collect())
    }

    /// Spatial structure from an undirected edge list: `∂_t` is `t` plus its graph neighbours.
    pub fn spatial(len: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if len == 0 {
            return Err(invalid("spatial structure needs T >= 1"));
        }
        let mut sets: Vec<Vec<usize>> = (0..len).map(|t| vec![t]).collect();
        for &(a, b) in edges {
            if a >= len || b >= len {
                return Err(invalid(format!(
                    "edge ({}, {}) references an index outside 1..={len}",
                    a + 1,
                    b + 1
                )));
            }
            sets[a].push(b);
            sets[b].push(a);
        }
        Self::custom(sets)
    }

    /// Order-one circular structure: `∂_t = {t-1 mod T, t}`. For `T = 2`
    /// both sets are `{1, 2}`.
    pub fn circular(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("circular structure needs T >= 1"));
        }
        Self::custom((0..len).map(|t| vec![(t + len - 1) % len, t]).collect())
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    /// `∂_t`, sorted ascending.
    pub fn forward(&self, t: usize) -> &[usize] {
        &self.forward[t]
    }

    /// `ϱ_t`, sorted ascending.
    pub fn reversed(&self, t: usize) -> &[usize] {
        &self.reversed[t]
    }

    pub fn forward_sets(&self) -> &[Vec<usize>] {
        &self.forward
    }

    /// `∂_t ∩ ∂_t'`.
    pub fn shared(&self, t: usize, t2: usize) -> Vec<usize> {
        let b = &self.forward[t2];
        self.forward[t]
            .iter()
            .copied()
            .filter(|j| b.binary_search(j).is_ok())
            .collect()
    }
}

/// Precision `c0` and integer dependence parameters `c_t`. `c_t = 0` means
/// `N_t` is identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PrecisionParams<S> {
    pub c0: S,
    pub c: Vec<u32>,
}

impl<S: Field> PrecisionParams<S> {
    pub fn new(c0: S, c: Vec<u32>) -> Result<Self> {
        if !(c0 > S::zero()) {
            return Err(invalid(format!("c0 must be positive, got {c0:?}")));
        }
        Ok(Self { c0, c })
    }

    pub fn constant(c0: S, c: u32, len: usize) -> Result<Self> {
        Self::new(c0, vec![c; len])
    }

    pub fn len(&self) -> usize {
        self.c.len()
    }

    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }

    /// `Σ_{j ∈ set} c_j`.
    pub fn sum_over(&self, set: &[usize]) -> u64 {
        set.iter().map(|&j| self.c[j] as u64).sum()
    }

    pub fn total(&self) -> u64 {
        self.c.iter().map(|&c| c as u64).sum()
    }
}

fn check_pair(t: usize, t2: usize, len: usize, params_len: usize) -> Result<()> {
    if params_len != len {
        return Err(DdpError::DimensionMismatch(format!(
            "{params_len} precision parameters for {len} indices"
        )));
    }
    if t >= len || t2 >= len {
        return Err(invalid(format!("index pair ({}, {}) outside 1..={len}", t + 1, t2 + 1)));
    }
    if t == t2 {
        return Err(invalid("correlation of a measure with itself is not computed"));
    }
    Ok(())
}

/// `Corr{F_t(B), F_t'(B)}` for any set `B`.
pub fn corr_same_set<S: Field>(
    t: usize,
    t2: usize,
    params: &PrecisionParams<S>,
    structure: &NeighborStructure,
) -> Result<S> {
    check_pair(t, t2, structure.len(), params.len())?;
    let shared: S = lift(params.sum_over(&structure.shared(t, t2)));
    let a: S = lift(params.sum_over(structure.forward(t)));
    let b: S = lift(params.sum_over(structure.forward(t2)));
    let c0 = params.c0;
    Ok((c0 * shared + a * b) / ((c0 + a) * (c0 + b)))
}

/// `Corr{F_t(B_i), F_t'(B_k)}` for disjoint `B_i`, `B_k` with centring masses
/// `f0_i`, `f0_k`. Always nonpositive.
pub fn corr_cross_sets<R: Real>(
    t: usize,
    t2: usize,
    f0_i: R,
    f0_k: R,
    params: &PrecisionParams<R>,
    structure: &NeighborStructure,
) -> Result<R> {
    let unit = |m: R| m > R::zero() && m < R::one();
    if !unit(f0_i) || !unit(f0_k) {
        return Err(invalid(format!(
            "centring masses must lie in (0, 1), got {f0_i}, {f0_k}"
        )));
    }
    if f0_i + f0_k > R::one() + R::of(R::SIMPLEX_TOL) {
        return Err(invalid("masses of disjoint sets cannot exceed 1 in total"));
    }
    let same = corr_same_set(t, t2, params, structure)?;
    let factor = (f0_i * f0_k / ((R::one() - f0_i) * (R::one() - f0_k))).sqrt();
    Ok(-factor * same)
}

/// Correlation under constant `c_t = c`, written with set sizes `r_∂`.
pub fn corr_stationary<S: Field>(t: usize, t2: usize, c: u32, c0: S, structure: &NeighborStructure) -> Result<S> {
    let len = structure.len();
    check_pair(t, t2, len, len)?;
    let r_shared: S = lift(structure.shared(t, t2).len() as u64);
    let r_a: S = lift(structure.forward(t).len() as u64);
    let r_b: S = lift(structure.forward(t2).len() as u64);
    let c: S = lift(c as u64);
    Ok((r_shared * c0 * c + r_a * r_b * c * c) / ((c0 + r_a * c) * (c0 + r_b * c)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    #[test]
    fn moving_average_sets() {
        let s = NeighborStructure::moving_average(5, 2).unwrap();
        assert_eq!(s.forward(2), &[0, 1, 2]);
        assert_eq!(s.forward(0), &[0]);
        assert_eq!(s.reversed(2), &[2, 3, 4]);
        assert_eq!(s.reversed(4), &[4]);
        let s0 = NeighborStructure::moving_average(3, 0).unwrap();
        assert!((0..3).all(|t| s0.forward(t) == [t]));
    }

    #[test]
    fn spatial_sets() {
        let s = NeighborStructure::spatial(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(s.forward(1), &[0, 1, 2]);
        assert_eq!(s.forward(0), &[0, 1]);
        for t in 0..3 {
            assert_eq!(s.forward(t), s.reversed(t));
        }
        let iso = NeighborStructure::spatial(4, &[]).unwrap();
        assert!((0..4).all(|t| iso.forward(t) == [t]));
        assert!(NeighborStructure::spatial(3, &[(0, 3)]).is_err());
    }

    #[test]
    fn circular_and_custom() {
        let s = NeighborStructure::circular(2).unwrap();
        assert_eq!(s.forward(0), &[0, 1]);
        assert_eq!(s.forward(1), &[0, 1]);
        let wm = NeighborStructure::custom(vec![vec![0], vec![0, 1]]).unwrap();
        assert_eq!(wm.reversed(0), &[0, 1]);
        assert!(NeighborStructure::custom(vec![vec![1], vec![1]]).is_err());
        assert!(NeighborStructure::custom(vec![vec![0, 2], vec![1]]).is_err());
    }

    #[test]
    fn walker_muliere_correlation() {
        let wm = NeighborStructure::custom(vec![vec![0], vec![0, 1]]).unwrap();
        for (c0, c1, c2) in [(1, 1, 0), (1, 1, 1), (3, 2, 5)] {
            let p = PrecisionParams::new(r(c0, 1), vec![c1, c2]).unwrap();
            let got = corr_same_set(0, 1, &p, &wm).unwrap();
            assert_eq!(got, r(c1 as i64, c0 + c1 as i64));
        }
        let p = PrecisionParams::new(1.0, vec![1, 1]).unwrap();
        assert_eq!(corr_same_set(0, 1, &p, &wm).unwrap(), 0.5);
    }

    #[test]
    fn circular_correlation() {
        let s = NeighborStructure::circular(2).unwrap();
        let p = PrecisionParams::new(r(1, 1), vec![2, 3]).unwrap();
        assert_eq!(corr_same_set(0, 1, &p, &s).unwrap(), r(5, 6));
    }

    #[test]
    fn ma1_interior_correlation() {
        let s = NeighborStructure::moving_average(6, 1).unwrap();
        let p = PrecisionParams::constant(r(1, 1), 1, 6).unwrap();
        assert_eq!(corr_same_set(2, 3, &p, &s).unwrap(), r(5, 9));
        assert_eq!(corr_stationary(2, 3, 1, r(1, 1), &s).unwrap(), r(5, 9));
    }

    #[test]
    fn same_index_rejected() {
        let s = NeighborStructure::moving_average(3, 1).unwrap();
        let p = PrecisionParams::constant(1.0, 1, 3).unwrap();
        assert!(corr_same_set(1, 1, &p, &s).is_err());
        let short = PrecisionParams::constant(1.0, 1, 2).unwrap();
        assert!(matches!(
            corr_same_set(0, 1, &short, &s),
            Err(DdpError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn cross_set_values() {
        let wm = NeighborStructure::custom(vec![vec![0], vec![0, 1]]).unwrap();
        let p = PrecisionParams::new(1.0f64, vec![1, 1]).unwrap();
        let v = corr_cross_sets(0, 1, 0.25, 0.25, &p, &wm).unwrap();
        assert!((v + 1.0 / 6.0).abs() < 1e-15);
        let v = corr_cross_sets(0, 1, 0.5, 0.5, &p, &wm).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        assert!(corr_cross_sets(0, 1, 0.0, 0.5, &p, &wm).is_err());
        assert!(corr_cross_sets(0, 1, 0.7, 0.6, &p, &wm).is_err());
    }

    #[test]
    fn disjoint_sets_stay_positive() {
        let s = NeighborStructure::moving_average(6, 1).unwrap();
        assert!(s.shared(0, 4).is_empty());
        let v = corr_stationary(0, 4, 2, r(1, 2), &s).unwrap();
        // r = 1 and r' = 2
        assert_eq!(v, r(1 * 2 * 4, 1) / ((r(1, 2) + r(2, 1)) * (r(1, 2) + r(4, 1))));
        assert!(v > r(0, 1));
    }

    fn arb_structure() -> impl Strategy<Value = NeighborStructure> {
        (2usize..8).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(0..n, 0..n), n).prop_map(move |mut sets| {
                for (t, s) in sets.iter_mut().enumerate() {
                    s.push(t);
                }
                NeighborStructure::custom(sets).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn reversed_is_exact_inverse(s in arb_structure()) {
            for t in 0..s.len() {
                for j in 0..s.len() {
                    prop_assert_eq!(
                        s.reversed(t).contains(&j),
                        s.forward(j).contains(&t)
                    );
                }
            }
        }

        #[test]
        fn correlation_bounds_symmetry_and_monotonicity(
            s in arb_structure(),
            c0 in 1i64..20,
            cs in proptest::collection::vec(0u32..15, 8),
            bump in 0usize..8,
        ) {
            let n = s.len();
            let p = PrecisionParams::new(r(c0, 4), cs[..n].to_vec()).unwrap();
            for t in 0..n {
                for t2 in 0..n {
                    if t == t2 { continue; }
                    let v = corr_same_set(t, t2, &p, &s).unwrap();
                    prop_assert!(v >= r(0, 1) && v < r(1, 1));
                    prop_assert_eq!(v, corr_same_set(t2, t, &p, &s).unwrap());
                    let j = bump % n;
                    if s.forward(t).contains(&j) && s.forward(t2).contains(&j) {
                        let mut q = p.clone();
                        q.c[j] += 1;
                        prop_assert!(corr_same_set(t, t2, &q, &s).unwrap() >= v);
                    }
                }
            }
        }

        #[test]
        fn independent_when_all_c_zero(s in arb_structure(), c0 in 1i64..10) {
            let p = PrecisionParams::constant(r(c0, 3), 0, s.len()).unwrap();
            for t in 1..s.len() {
                prop_assert_eq!(corr_same_set(0, t, &p, &s).unwrap(), r(0, 1));
            }
        }

        #[test]
        fn stationary_matches_general(s in arb_structure(), c0 in 1i64..10, c in 0u32..12) {
            let p = PrecisionParams::constant(r(c0, 2), c, s.len()).unwrap();
            for t in 1..s.len() {
                prop_assert_eq!(
                    corr_stationary(0, t, c, r(c0, 2), &s).unwrap(),
                    corr_same_set(0, t, &p, &s).unwrap()
                );
            }
        }
    }

    #[test]
    fn reversed_involution_up_to_fifty() {
        for len in 1..=50 {
            for q in [0, 1, 3, 7] {
                let s = NeighborStructure::moving_average(len, q).unwrap();
                for t in 0..len {
                    for j in 0..len {
                        assert_eq!(s.reversed(t).contains(&j), s.forward(j).contains(&t));
                    }
                }
            }
            let c = NeighborStructure::circular(len).unwrap();
            for t in 0..len {
                for j in 0..len {
                    assert_eq!(c.reversed(t).contains(&j), c.forward(j).contains(&t));
                }
            }
        }
    }
}
