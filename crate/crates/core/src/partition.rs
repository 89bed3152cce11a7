//! Finite partition of the real line and the normal base measure on it.

use libm::erfc;

use crate::error::{invalid, DdpError, Result};
use crate::scalar::Real;

/// Equal- or unequal-width partition `b_0 < b_1 < ... < b_K`.
///
/// Bins are `(b_{k-1}, b_k]`. For mass assignment the first bin is extended
/// down to `-inf` and the last up to `+inf`. Bin indices are 0-based here.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition<R> {
    edges: Vec<R>,
}

impl<R: Real> Partition<R> {
    pub fn from_edges(edges: Vec<R>) -> Result<Self> {
        if edges.len() < 3 {
            return Err(invalid(format!(
                "a partition needs at least 2 bins, got {} edges",
                edges.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(invalid("partition edges must be finite"));
        }
        if edges.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("partition edges must be strictly increasing"));
        }
        Ok(Self { edges })
    }

    /// `k` equal-width bins spanning `[x_min, x_max]`.
    pub fn equal_width(x_min: R, x_max: R, k: usize) -> Result<Self> {
        if !x_min.is_finite() || !x_max.is_finite() {
            return Err(invalid("partition bounds must be finite"));
        }
        if x_min >= x_max {
            return Err(invalid(format!("x_min ({x_min}) must be below x_max ({x_max})")));
        }
        if k < 2 {
            return Err(invalid(format!("bin count must be at least 2, got {k}")));
        }
        let step = (x_max - x_min) / R::of_count(k as u64);
        let mut edges = Vec::with_capacity(k + 1);
        edges.push(x_min);
        for i in 1..k {
            edges.push(x_min + step * R::of_count(i as u64));
        }
        edges.push(x_max);
        Self::from_edges(edges)
    }

    pub fn bins(&self) -> usize {
        self.edges.len() - 1
    }

    pub fn edges(&self) -> &[R] {
        &self.edges
    }

    pub fn left(&self, k: usize) -> R {
        self.edges[k]
    }

    pub fn right(&self, k: usize) -> R {
        self.edges[k + 1]
    }

    /// Width of bin `k` measured between its finite edges.
    pub fn width(&self, k: usize) -> R {
        self.edges[k + 1] - self.edges[k]
    }

    /// Index of the bin containing `x`; tails are absorbed by the extreme bins.
    pub fn locate(&self, x: R) -> Result<usize> {
        if !x.is_finite() {
            return Err(invalid(format!("cannot locate non-finite value {x}")));
        }
        let interior = &self.edges[1..self.edges.len() - 1];
        Ok(interior.partition_point(|&b| b < x))
    }

    /// Point at relative position `u ∈ [0, 1]` inside bin `k`.
    pub fn point_in_bin(&self, k: usize, u: R) -> R {
        self.left(k) + u * self.width(k)
    }
}

/// `build_partition`: `k` equal-width bins on `[x_min, x_max]`.
pub fn build_partition<R: Real>(x_min: R, x_max: R, k: usize) -> Result<Partition<R>> {
    Partition::equal_width(x_min, x_max, k)
}

/// Normal centring measure `F0 = N(mu0, sigma0^2)` projected onto a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct BaseMeasure<R> {
    pub mu0: R,
    pub sigma0: R,
    masses: Vec<R>,
}

impl<R: Real> BaseMeasure<R> {
    pub fn normal(mu0: R, sigma0: R, partition: &Partition<R>) -> Result<Self> {
        let masses = base_masses(mu0, sigma0, partition)?;
        Ok(Self { mu0, sigma0, masses })
    }

    pub fn masses(&self) -> &[R] {
        &self.masses
    }

    pub fn into_masses(self) -> Vec<R> {
        self.masses
    }
}

/// Midrange location and range/7 scale.
pub fn default_base_params<R: Real>(data: &[R]) -> Result<(R, R)> {
    if data.is_empty() {
        return Err(invalid("no data to derive base parameters from"));
    }
    if data.iter().any(|x| !x.is_finite()) {
        return Err(invalid("data contain non-finite values"));
    }
    let (lo, hi) = min_max(data);
    if hi <= lo {
        return Err(DdpError::DegenerateScale);
    }
    let two = R::of(2.0);
    Ok(((lo + hi) / two, (hi - lo) / R::of(7.0)))
}

pub(crate) fn min_max<R: Real>(data: &[R]) -> (R, R) {
    data.iter().fold((R::infinity(), R::neg_infinity()), |(lo, hi), &x| {
        (lo.min(x), hi.max(x))
    })
}

/// Standard normal CDF.
pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// `F0(B_k)` for every bin, tails folded into the extreme bins.
pub fn base_masses<R: Real>(mu0: R, sigma0: R, partition: &Partition<R>) -> Result<Vec<R>> {
    if !(sigma0 > R::zero()) || !sigma0.is_finite() {
        return Err(invalid(format!("sigma0 must be positive, got {sigma0}")));
    }
    if !mu0.is_finite() {
        return Err(invalid("mu0 must be finite"));
    }
    let (mu, sd) = (mu0.as_f64(), sigma0.as_f64());
    masses_from_cdf(
        partition,
        |x| std_normal_cdf((x - mu) / sd),
        |x| std_normal_cdf(-(x - mu) / sd),
    )
}

/// Bin masses of an arbitrary continuous centring measure given its CDF and
/// survival function. The upper tail is evaluated through the survival
/// function to keep precision.
pub fn masses_from_cdf<R, C, S>(partition: &Partition<R>, cdf: C, survival: S) -> Result<Vec<R>>
where
    R: Real,
    C: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let k = partition.bins();
    let edges: Vec<f64> = partition.edges().iter().map(|e| e.as_f64()).collect();
    let mut raw = Vec::with_capacity(k);
    for i in 0..k {
        let m = if i == 0 {
            cdf(edges[1])
        } else if i == k - 1 {
            survival(edges[k - 1])
        } else {
            let (a, b) = (edges[i], edges[i + 1]);
            let lower = cdf(a);
            if lower < 0.5 {
                cdf(b) - lower
            } else {
                survival(a) - survival(b)
            }
        };
        if !(m > 0.0) || !m.is_finite() {
            return Err(invalid(format!(
                "base measure assigns no mass to bin {} ({}, {}]",
                i + 1,
                edges[i],
                edges[i + 1]
            )));
        }
        raw.push(m);
    }
    Ok(renormalize(&raw))
}

/// Normalise and push the rounding residual into the largest entry.
pub(crate) fn renormalize<R: Real>(raw: &[f64]) -> Vec<R> {
    let total: f64 = raw.iter().sum();
    let mut out: Vec<f64> = raw.iter().map(|m| m / total).collect();
    let (imax, _) = out
        .iter()
        .enumerate()
        .fold((0, f64::MIN), |acc, (i, &m)| if m > acc.1 { (i, m) } else { acc });
    let rest: f64 = out.iter().enumerate().filter(|(i, _)| *i != imax).map(|(_, m)| m).sum();
    out[imax] = 1.0 - rest;
    out.into_iter().map(R::of).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn equal_width_edges() {
        let p = build_partition(0.0, 10.0, 5).unwrap();
        assert_eq!(p.edges(), &[0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        let p = build_partition(0.0, 1.0, 2).unwrap();
        assert_eq!(p.edges(), &[0.0, 0.5, 1.0]);
        let p = build_partition(98.7, 121.3, 50).unwrap();
        assert_eq!(p.bins(), 50);
        assert_eq!(p.edges()[50], 121.3);
    }

    #[test]
    fn build_rejects_bad_input() {
        assert!(build_partition(1.0, 1.0, 4).is_err());
        assert!(build_partition(2.0, 1.0, 4).is_err());
        assert!(build_partition(0.0, 1.0, 1).is_err());
        assert!(build_partition(f64::NAN, 1.0, 3).is_err());
        assert!(build_partition(0.0, f64::INFINITY, 3).is_err());
    }

    #[test]
    fn locate_conventions() {
        let p = build_partition(0.0, 1.0, 2).unwrap();
        assert_eq!(p.locate(0.5).unwrap(), 0);
        assert_eq!(p.locate(0.50001).unwrap(), 1);
        assert_eq!(p.locate(-99.0).unwrap(), 0);
        assert_eq!(p.locate(2.0).unwrap(), 1);
        assert_eq!(p.locate(0.0).unwrap(), 0);
        assert!(p.locate(f64::NAN).is_err());
    }

    #[test]
    fn default_params() {
        assert_eq!(default_base_params(&[0.0, 3.0, 7.0]).unwrap(), (3.5, 1.0));
        assert_eq!(default_base_params(&[-7.0, 7.0, 1.0]).unwrap(), (0.0, 2.0));
        assert_eq!(default_base_params(&[5.0, 5.0, 5.0]), Err(DdpError::DegenerateScale));
    }

    #[test]
    fn symmetric_split() {
        let p = Partition::from_edges(vec![-1.0, 0.0, 1.0]).unwrap();
        let m = base_masses(0.0, 1.0, &p).unwrap();
        assert_eq!(m, vec![0.5, 0.5]);
    }

    #[test]
    fn sigma_must_be_positive() {
        let p = build_partition(0.0, 1.0, 4).unwrap();
        assert!(base_masses(0.5, 0.0, &p).is_err());
        assert!(base_masses(0.5, -1.0, &p).is_err());
    }

    /// Composite Simpson rule on the normal density.
    fn simpson_mass(a: f64, b: f64) -> f64 {
        let n = 20_000;
        let h = (b - a) / n as f64;
        let pdf = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mut s = pdf(a) + pdf(b);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * pdf(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn masses_match_quadrature() {
        let p = Partition::from_edges(vec![-1.0, 0.0, 1.0]).unwrap();
        let m = base_masses(0.0, 1.0, &p).unwrap();
        assert_abs_diff_eq!(m[0], simpson_mass(-40.0, 0.0), epsilon = 1e-12);
        assert_abs_diff_eq!(m[1], simpson_mass(0.0, 40.0), epsilon = 1e-12);

        let p = build_partition(-2.0, 3.0, 7).unwrap();
        let m = base_masses(0.0, 1.0, &p).unwrap();
        let e = p.edges();
        for k in 0..7 {
            let a = if k == 0 { -40.0 } else { e[k] };
            let b = if k == 6 { 40.0 } else { e[k + 1] };
            assert_abs_diff_eq!(m[k], simpson_mass(a, b), epsilon = 1e-12);
        }
        // Φ(-9/7) from a 30-digit reference
        assert_abs_diff_eq!(m[0], 0.099_271_396_843_330_98, epsilon = 1e-13);
    }

    proptest::proptest! {
        #[test]
        fn masses_positive_and_normalised(
            lo in -50.0f64..50.0, span in 0.1f64..40.0, k in 2usize..60, rel_mu in -0.5f64..1.5, rel_sd in 0.05f64..1.0,
        ) {
            let p = build_partition(lo, lo + span, k).unwrap();
            let m = base_masses(lo + rel_mu * span, rel_sd * span, &p).unwrap();
            proptest::prop_assert!(m.iter().all(|&x| x > 0.0));
            proptest::prop_assert!((m.iter().sum::<f64>() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn masses_invariant_under_shift(
            shift in -1e3f64..1e3, k in 2usize..40, sd in 0.2f64..3.0,
        ) {
            let p = build_partition(-3.0, 4.0, k).unwrap();
            let q = build_partition(-3.0 + shift, 4.0 + shift, k).unwrap();
            let a = base_masses(0.5, sd, &p).unwrap();
            let b = base_masses(0.5 + shift, sd, &q).unwrap();
            for (x, y) in a.iter().zip(&b) {
                proptest::prop_assert!((x - y).abs() < 1e-9);
            }
        }

        #[test]
        fn locate_is_consistent_with_edges(x in -20.0f64..20.0, k in 2usize..30) {
            let p = build_partition(-5.0, 7.0, k).unwrap();
            let b = p.locate(x).unwrap();
            proptest::prop_assert!(b < k);
            if b > 0 {
                proptest::prop_assert!(x > p.left(b));
            }
            if b < k - 1 {
                proptest::prop_assert!(x <= p.right(b));
            }
        }
    }

    #[test]
    fn f32_masses() {
        let p = build_partition(-1.0f32, 1.0, 4).unwrap();
        let m = base_masses(0.0f32, 0.5, &p).unwrap();
        let s: f32 = m.iter().sum();
        assert!((s - 1.0).abs() < 1e-6);
    }
}
