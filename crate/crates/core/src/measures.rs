//! Finite-dimensional random-measure primitives.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Open01};

use crate::error::{invalid, Result};
use crate::scalar::Real;

/// Probability vector over the bins of a partition.
#[derive(Clone, Debug, PartialEq)]
pub struct SimplexMeasure<R> {
    probs: Vec<R>,
}

impl<R: Real> SimplexMeasure<R> {
    pub fn new(probs: Vec<R>) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("simplex measure needs at least one bin"));
        }
        if probs.iter().any(|p| !(*p >= R::zero()) || !p.is_finite()) {
            return Err(invalid("simplex entries must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().map(|p| p.as_f64()).sum();
        if (total - 1.0).abs() > R::SIMPLEX_TOL {
            return Err(invalid(format!("simplex entries sum to {total}, not 1")));
        }
        Ok(Self { probs })
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<R>) -> Self {
        Self { probs }
    }

    pub fn uniform(k: usize) -> Self {
        let p = R::one() / R::of_count(k as u64);
        Self { probs: vec![p; k] }
    }

    pub fn probs(&self) -> &[R] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn get(&self, k: usize) -> R {
        self.probs[k]
    }

    /// Cumulative sums, i.e. the CDF evaluated at the right bin edges.
    pub fn cumulative(&self) -> Vec<R> {
        self.probs
            .iter()
            .scan(R::zero(), |acc, &p| {
                *acc = *acc + p;
                Some(*acc)
            })
            .collect()
    }
}

/// Nonnegative integer counts over bins with fixed total.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CountMeasure {
    counts: Vec<u32>,
    total: u32,
}

impl CountMeasure {
    pub fn new(counts: Vec<u32>) -> Self {
        let total = counts.iter().sum();
        Self { counts, total }
    }

    pub fn zeros(k: usize) -> Self {
        Self {
            counts: vec![0; k],
            total: 0,
        }
    }

    pub fn counts(&self) -> &[u32] {
        &self.counts
    }

    pub fn total(&self) -> u32 {
        self.total
    }

    pub fn get(&self, k: usize) -> u32 {
        self.counts[k]
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Move one unit from bin `from` to bin `to`. Total is unchanged.
    pub(crate) fn transfer(&mut self, from: usize, to: usize) {
        debug_assert!(self.counts[from] > 0);
        self.counts[from] -= 1;
        self.counts[to] += 1;
    }
}

/// Truncated stick-breaking representation of a Dirichlet process draw.
#[derive(Clone, Debug, PartialEq)]
pub struct StickBreakingDraw<R> {
    pub weights: Vec<R>,
    pub atoms: Vec<R>,
    /// Unallocated stick length `prod_j (1 - v_j)`.
    pub residual: R,
}

/// Log of a Gamma(shape, 1) variate. Small shapes use the
/// `Gamma(shape + 1) * U^(1/shape)` boost so the result never underflows.
pub(crate) fn ln_gamma_variate<G: Rng + ?Sized>(shape: f64, rng: &mut G) -> f64 {
    debug_assert!(shape > 0.0);
    if shape >= 1.0 {
        let g: f64 = Gamma::new(shape, 1.0).expect("positive shape").sample(rng);
        g.ln()
    } else {
        let g: f64 = Gamma::new(shape + 1.0, 1.0).expect("positive shape").sample(rng);
        let u: f64 = Open01.sample(rng);
        g.ln() + u.ln() / shape
    }
}

/// Dirichlet draw into `out`, computed by normalising gamma variates in log space.
pub(crate) fn dirichlet_into<R: Real, G: Rng + ?Sized>(alpha: &[f64], rng: &mut G, out: &mut Vec<R>) {
    out.clear();
    if alpha.len() == 1 {
        out.push(R::one());
        return;
    }
    let logs: Vec<f64> = alpha.iter().map(|&a| ln_gamma_variate(a, rng)).collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    out.extend(weights.iter().map(|w| R::of(w / total)));
}

pub(crate) fn check_alpha<R: Real>(alpha: &[R]) -> Result<Vec<f64>> {
    if alpha.is_empty() {
        return Err(invalid("Dirichlet parameter vector is empty"));
    }
    alpha
        .iter()
        .map(|a| {
            let v = a.as_f64();
            if v > 0.0 && v.is_finite() {
                Ok(v)
            } else {
                Err(invalid(format!("Dirichlet parameters must be positive, got {a}")))
            }
        })
        .collect()
}

/// `Dir(alpha)` draw.
pub fn sample_dirichlet<R: Real, G: Rng + ?Sized>(alpha: &[R], rng: &mut G) -> Result<SimplexMeasure<R>> {
    let alpha = check_alpha(alpha)?;
    let mut out = Vec::with_capacity(alpha.len());
    dirichlet_into(&alpha, rng, &mut out);
    Ok(SimplexMeasure::from_vec_unchecked(out))
}

/// Binomial draw that tolerates probabilities rounded slightly outside [0, 1].
pub(crate) fn binomial<G: Rng + ?Sized>(n: u32, p: f64, rng: &mut G) -> u32 {
    if n == 0 || p <= 0.0 {
        return 0;
    }
    if p >= 1.0 {
        return n;
    }
    Binomial::new(n as u64, p).expect("valid binomial").sample(rng) as u32
}

/// Multinomial counts with probabilities given as plain `f64`s, by
/// sequential conditional binomials.
pub(crate) fn multinomial_f64<G: Rng + ?Sized>(c: u32, probs: &[f64], rng: &mut G) -> Vec<u32> {
    let k = probs.len();
    let mut counts = vec![0u32; k];
    let mut remaining = c;
    let mut mass_left: f64 = probs.iter().sum();
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i == k - 1 {
            counts[i] = remaining;
            break;
        }
        let x = if mass_left > 0.0 {
            binomial(remaining, p / mass_left, rng)
        } else {
            0
        };
        counts[i] = x;
        remaining -= x;
        mass_left -= p;
    }
    counts
}

/// `Mul(c; p)` draw.
pub fn sample_multinomial<R: Real, G: Rng + ?Sized>(c: u32, p: &SimplexMeasure<R>, rng: &mut G) -> CountMeasure {
    let probs: Vec<f64> = p.probs().iter().map(|x| x.as_f64()).collect();
    CountMeasure::new(multinomial_f64(c, &probs, rng))
}

/// Categorical draw from (possibly unnormalised) nonnegative weights.
pub(crate) fn categorical<G: Rng + ?Sized>(weights: &[f64], rng: &mut G) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(weights.len() - 1)
}

/// Beta(a, b) draw via two log-gamma variates.
pub(crate) fn beta<G: Rng + ?Sized>(a: f64, b: f64, rng: &mut G) -> f64 {
    let la = ln_gamma_variate(a, rng);
    let lb = ln_gamma_variate(b, rng);
    let top = la.max(lb);
    let (ea, eb) = ((la - top).exp(), (lb - top).exp());
    ea / (ea + eb)
}

/// Dirichlet-multinomial `DMP(c, c0, base)` draw on the partition, by
/// sequential beta-binomial composition.
pub fn sample_dirichlet_multinomial<R: Real, G: Rng + ?Sized>(
    c: u32,
    c0: R,
    base: &[R],
    rng: &mut G,
) -> Result<CountMeasure> {
    if !(c0 > R::zero()) || !c0.is_finite() {
        return Err(invalid(format!("c0 must be positive, got {c0}")));
    }
    let alpha: Vec<R> = base.iter().map(|&b| c0 * b).collect();
    let alpha = check_alpha(&alpha)?;
    let k = alpha.len();
    let mut counts = vec![0u32; k];
    let mut remaining = c;
    let mut alpha_left: f64 = alpha.iter().sum();
    for i in 0..k {
        if remaining == 0 {
            break;
        }
        if i == k - 1 {
            counts[i] = remaining;
            break;
        }
        alpha_left -= alpha[i];
        let p = beta(alpha[i], alpha_left.max(f64::MIN_POSITIVE), rng);
        let x = binomial(remaining, p, rng);
        counts[i] = x;
        remaining -= x;
    }
    Ok(CountMeasure::new(counts))
}

/// Truncated stick-breaking draw with `truncation` sticks. `quantile` maps a
/// uniform variate to an atom from the centring measure.
pub fn sample_stick_breaking<R, Q, G>(
    c0: R,
    quantile: Q,
    truncation: usize,
    rng: &mut G,
) -> Result<StickBreakingDraw<R>>
where
    R: Real,
    Q: Fn(f64) -> R,
    G: Rng + ?Sized,
{
    if !(c0 > R::zero()) || !c0.is_finite() {
        return Err(invalid(format!("c0 must be positive, got {c0}")));
    }
    if truncation == 0 {
        return Err(invalid("truncation level must be at least 1"));
    }
    let shape = c0.as_f64();
    let mut weights = Vec::with_capacity(truncation);
    let mut atoms = Vec::with_capacity(truncation);
    let mut remaining = 1.0f64;
    for _ in 0..truncation {
        // v ~ Be(1, c0) by inversion
        let u: f64 = Open01.sample(rng);
        let v = 1.0 - u.powf(1.0 / shape);
        weights.push(R::of(remaining * v));
        remaining *= 1.0 - v;
        let a: f64 = Open01.sample(rng);
        atoms.push(quantile(a));
    }
    Ok(StickBreakingDraw {
        weights,
        atoms,
        residual: R::of(remaining),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn dirichlet_single_bin() {
        let mut rng = RngStream::seeded(1);
        let d = sample_dirichlet(&[3.7], &mut rng).unwrap();
        assert_eq!(d.probs(), &[1.0]);
    }

    #[test]
    fn dirichlet_rejects_nonpositive() {
        let mut rng = RngStream::seeded(1);
        assert!(sample_dirichlet(&[1.0, 0.0], &mut rng).is_err());
        assert!(sample_dirichlet(&[1.0, -2.0], &mut rng).is_err());
        assert!(sample_dirichlet::<f64, _>(&[], &mut rng).is_err());
    }

    #[test]
    fn dirichlet_tiny_alpha_stays_on_simplex() {
        let mut rng = RngStream::seeded(2);
        for _ in 0..200 {
            let d = sample_dirichlet(&[1e-6, 2e-6, 1e-7, 5e-6], &mut rng).unwrap();
            let s: f64 = d.probs().iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(d.probs().iter().all(|p| p.is_finite() && *p >= 0.0));
        }
    }

    #[test]
    fn dirichlet_beta22_mean() {
        let mut rng = RngStream::seeded(3);
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_dirichlet(&[2.0, 2.0], &mut rng).unwrap().get(0))
            .collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 0.5).abs() < 3.0 * (v / n as f64).sqrt(), "mean {m}");
    }

    #[test]
    fn dirichlet_flat_variance() {
        let mut rng = RngStream::seeded(4);
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_dirichlet(&[1.0, 1.0, 1.0], &mut rng).unwrap().get(0))
            .collect();
        let (m, v) = mean_var(&xs);
        // SE of the sample variance from the fourth central moment.
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
        let se = ((m4 - v * v) / n as f64).sqrt();
        assert!((v - 2.0 / 36.0).abs() < 3.0 * se, "var {v}");
    }

    #[test]
    fn multinomial_edge_cases() {
        let mut rng = RngStream::seeded(5);
        let p = SimplexMeasure::new(vec![0.2, 0.8]).unwrap();
        assert_eq!(sample_multinomial(0, &p, &mut rng).counts(), &[0, 0]);
        let p = SimplexMeasure::new(vec![1.0, 0.0]).unwrap();
        assert_eq!(sample_multinomial(5, &p, &mut rng).counts(), &[5, 0]);
        let p = SimplexMeasure::new(vec![0.0, 0.0, 1.0]).unwrap();
        assert_eq!(sample_multinomial(4, &p, &mut rng).counts(), &[0, 0, 4]);
    }

    #[test]
    fn multinomial_binomial_mean() {
        let mut rng = RngStream::seeded(6);
        let p = SimplexMeasure::new(vec![0.3, 0.7]).unwrap();
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                let c = sample_multinomial(10, &p, &mut rng);
                assert_eq!(c.total(), 10);
                c.get(0) as f64
            })
            .collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 3.0).abs() < 3.0 * (v / n as f64).sqrt());
    }

    #[test]
    fn dirichlet_multinomial_beta_binomial_variance() {
        let mut rng = RngStream::seeded(7);
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| {
                sample_dirichlet_multinomial(5, 2.0, &[0.5, 0.5], &mut rng)
                    .unwrap()
                    .get(0) as f64
            })
            .collect();
        let (m, v) = mean_var(&xs);
        let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n as f64;
        let se = ((m4 - v * v) / n as f64).sqrt();
        let target = 5.0 * 0.25 * 7.0 / 3.0;
        assert!((v - target).abs() < 3.0 * se, "var {v} vs {target}");
    }

    #[test]
    fn dirichlet_multinomial_small_cases() {
        let mut rng = RngStream::seeded(8);
        assert_eq!(
            sample_dirichlet_multinomial(0, 1.0, &[0.3, 0.7], &mut rng)
                .unwrap()
                .counts(),
            &[0, 0]
        );
        assert!(sample_dirichlet_multinomial(3, 0.0, &[0.3, 0.7], &mut rng).is_err());
        let n = 40_000;
        let hits = (0..n)
            .filter(|_| {
                sample_dirichlet_multinomial(1, 1.5, &[0.3, 0.7], &mut rng)
                    .unwrap()
                    .get(0)
                    == 1
            })
            .count() as f64;
        let se = (0.3 * 0.7 / n as f64).sqrt();
        assert!((hits / n as f64 - 0.3).abs() < 3.0 * se);
    }

    #[test]
    fn stick_breaking_identities() {
        let mut rng = RngStream::seeded(9);
        let d = sample_stick_breaking(2.0, |u| u, 1, &mut rng).unwrap();
        assert!((d.weights[0] + d.residual - 1.0).abs() < 1e-15);
        for _ in 0..100 {
            let d = sample_stick_breaking(0.7, |u| u, 30, &mut rng).unwrap();
            let s: f64 = d.weights.iter().sum::<f64>() + d.residual;
            assert!((s - 1.0).abs() < 1e-12);
        }
        assert!(sample_stick_breaking(0.0, |u| u, 3, &mut rng).is_err());
        assert!(sample_stick_breaking(1.0, |u| u, 0, &mut rng).is_err());
    }

    #[test]
    fn stick_breaking_residual_mean() {
        let mut rng = RngStream::seeded(10);
        let n = 50_000;
        let xs: Vec<f64> = (0..n)
            .map(|_| sample_stick_breaking(1.0, |u| u, 20, &mut rng).unwrap().residual)
            .collect();
        let (m, v) = mean_var(&xs);
        let target = 0.5f64.powi(20);
        assert!((m - target).abs() < 3.0 * (v / n as f64).sqrt(), "{m} vs {target}");
    }

    #[test]
    fn seeded_samplers_are_reproducible() {
        let a = sample_dirichlet(&[0.3, 1.0, 4.0], &mut RngStream::seeded(42)).unwrap();
        let b = sample_dirichlet(&[0.3, 1.0, 4.0], &mut RngStream::seeded(42)).unwrap();
        assert_eq!(a, b);
    }
}
