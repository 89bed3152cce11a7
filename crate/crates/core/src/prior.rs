//! Forward simulation of the three-level hierarchy `G → N_t → F_t`.

use rand::Rng;

use crate::error::{invalid, Result};
use crate::measures::{dirichlet_into, multinomial_f64, CountMeasure, SimplexMeasure};
use crate::model::DdpModel;
use crate::scalar::Real;
use crate::stats::pearson_jackknife;

/// One joint draw `(G, {N_t}, {F_t})` on the partition.
#[derive(Clone, Debug, PartialEq)]
pub struct PriorDraw<R> {
    pub g: SimplexMeasure<R>,
    pub n: Vec<CountMeasure>,
    pub f: Vec<SimplexMeasure<R>>,
}

/// `Σ_{j ∈ ∂_t} N_j(B_k)` for every bin.
pub(crate) fn neighbour_counts<R: Real>(model: &DdpModel<R>, n: &[CountMeasure], t: usize, out: &mut [u64]) {
    out.iter_mut().for_each(|x| *x = 0);
    for &j in model.structure().forward(t) {
        for (o, &c) in out.iter_mut().zip(n[j].counts()) {
            *o += c as u64;
        }
    }
}

/// Draw `G ~ Dir(c0 F0)`, `N_t | G ~ Mul(c_t, G)` and
/// `F_t | N ~ Dir(c0 F0 + Σ_{∂_t} N_j)`.
pub fn sample_prior<R: Real, G: Rng + ?Sized>(model: &DdpModel<R>, rng: &mut G) -> PriorDraw<R> {
    let k = model.bins();
    let prior = model.prior_alpha();
    let mut buf = Vec::with_capacity(k);
    dirichlet_into::<R, _>(prior, rng, &mut buf);
    let g = SimplexMeasure::from_vec_unchecked(buf.clone());
    let g64: Vec<f64> = g.probs().iter().map(|p| p.as_f64()).collect();
    let n: Vec<CountMeasure> = (0..model.len())
        .map(|t| CountMeasure::new(multinomial_f64(model.c(t), &g64, rng)))
        .collect();
    let mut counts = vec![0u64; k];
    let mut alpha = vec![0.0; k];
    let f = (0..model.len())
        .map(|t| {
            neighbour_counts(model, &n, t, &mut counts);
            for ((a, &p), &c) in alpha.iter_mut().zip(prior).zip(&counts) {
                *a = p + c as f64;
            }
            dirichlet_into::<R, _>(&alpha, rng, &mut buf);
            SimplexMeasure::from_vec_unchecked(buf.clone())
        })
        .collect();
    PriorDraw { g, n, f }
}

/// Mean and variance of `F_t(B)` under its marginal `DP(c0, F0)`:
/// `(F0(B), F0(B)(1 - F0(B)) / (c0 + 1))`.
pub fn marginal_moments<R: Real>(base_mass: R, c0: R) -> Result<(R, R)> {
    if !(base_mass > R::zero() && base_mass < R::one()) {
        return Err(invalid(format!("centring mass must lie in (0, 1), got {base_mass}")));
    }
    if !(c0 > R::zero()) {
        return Err(invalid(format!("c0 must be positive, got {c0}")));
    }
    Ok((base_mass, base_mass * (R::one() - base_mass) / (c0 + R::one())))
}

/// Monte Carlo correlation estimate and its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub se: f64,
}

impl McEstimate {
    /// Whether `target` lies within `z` standard errors.
    pub fn covers(&self, target: f64, z: f64) -> bool {
        (self.estimate - target).abs() <= z * self.se
    }
}

/// Minimum replicate count accepted by the correlation harness.
pub const MIN_REPLICATES: usize = 1000;

/// Pearson correlation of `F_t(B_bin)` and `F_t'(B_bin)` over `replicates`
/// independent prior draws, with jackknife standard error.
pub fn mc_correlation<R: Real, G: Rng + ?Sized>(
    model: &DdpModel<R>,
    t: usize,
    t2: usize,
    bin: usize,
    replicates: usize,
    rng: &mut G,
) -> Result<McEstimate> {
    mc_cross_correlation(model, t, t2, bin, bin, replicates, rng)
}

/// Pearson correlation of `F_t(B_i)` and `F_t'(B_k)`.
pub fn mc_cross_correlation<R: Real, G: Rng + ?Sized>(
    model: &DdpModel<R>,
    t: usize,
    t2: usize,
    bin_i: usize,
    bin_k: usize,
    replicates: usize,
    rng: &mut G,
) -> Result<McEstimate> {
    if replicates < MIN_REPLICATES {
        return Err(invalid(format!(
            "need at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    if t >= model.len() || t2 >= model.len() || t == t2 {
        return Err(invalid(format!("invalid index pair ({}, {})", t + 1, t2 + 1)));
    }
    if bin_i >= model.bins() || bin_k >= model.bins() {
        return Err(invalid("bin index outside the partition"));
    }
    let mut xs = Vec::with_capacity(replicates);
    let mut ys = Vec::with_capacity(replicates);
    for _ in 0..replicates {
        let d = sample_prior(model, rng);
        xs.push(d.f[t].get(bin_i).as_f64());
        ys.push(d.f[t2].get(bin_k).as_f64());
    }
    let (estimate, se) = pearson_jackknife(&xs, &ys);
    Ok(McEstimate { estimate, se })
}
