//! Metropolis-within-Gibbs posterior sampler over the partition.
//!
//! One sweep redraws every `F_t` from its Dirichlet full conditional, then
//! updates each latent count vector `N_t` (ascending `t`) with unit-transfer
//! Metropolis-Hastings moves, then redraws the anchor `G`.

mod exact;

pub use exact::{exact_posterior_small, ExactPosterior, ENUMERATION_LIMIT};

use std::fmt;

use libm::lgamma as ln_gamma;
use rand::Rng;

use crate::data::ObservedData;
use crate::error::{invalid, DdpError, Result};
use crate::measures::{dirichlet_into, sample_dirichlet_multinomial, CountMeasure, SimplexMeasure};
use crate::model::DdpModel;
use crate::prior::{neighbour_counts, PriorDraw};
use crate::rng::RngStream;
use crate::scalar::Real;

/// Current values of `({F_t}, {N_t}, G)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState<R> {
    pub f: Vec<SimplexMeasure<R>>,
    pub n: Vec<CountMeasure>,
    pub g: SimplexMeasure<R>,
}

impl<R: Real> From<PriorDraw<R>> for ChainState<R> {
    fn from(d: PriorDraw<R>) -> Self {
        Self { f: d.f, n: d.n, g: d.g }
    }
}

/// How the compensating bin of a unit-transfer proposal is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum MhPartner {
    /// Always the last bin `K`.
    LastBin,
    /// Drawn from weights `∝ G(B_l) Π_{j∈ϱ_t} F_j(B_l)`, fixed during the
    /// `N_t` update. Proposals that pick bin `k` itself do nothing.
    #[default]
    Weighted,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GibbsConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    /// Metropolis-Hastings proposals per `(t, k)` cell and sweep.
    pub mh_moves_per_sweep: usize,
    pub mh_partner: MhPartner,
    pub seed: u64,
}

impl Default for GibbsConfig {
    fn default() -> Self {
        Self {
            iterations: 100_000,
            burn_in: 5_000,
            thin: 25,
            mh_moves_per_sweep: 1,
            mh_partner: MhPartner::Weighted,
            seed: 0,
        }
    }
}

impl GibbsConfig {
    pub fn validate(&self) -> Result<()> {
        if self.burn_in >= self.iterations {
            return Err(invalid(format!(
                "burn-in ({}) must be smaller than iterations ({})",
                self.burn_in, self.iterations
            )));
        }
        if self.thin == 0 {
            return Err(invalid("thin must be at least 1"));
        }
        if self.mh_moves_per_sweep == 0 {
            return Err(invalid("mh_moves_per_sweep must be at least 1"));
        }
        Ok(())
    }

    /// `floor((iterations - burn_in) / thin)`.
    pub fn stored_draws(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }
}

/// Thinned post-burn-in draws plus Metropolis-Hastings diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainSamples<R> {
    pub draws: Vec<ChainState<R>>,
    /// 1-based sweep number of each stored draw.
    pub iterations: Vec<usize>,
    /// MH proposals per index `t`, counted over all sweeps.
    pub proposed: Vec<u64>,
    pub accepted: Vec<u64>,
}

impl<R: Real> ChainSamples<R> {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Acceptance rate per index, `None` where `c_t = 0` or `K = 1`.
    pub fn acceptance_rates(&self) -> Vec<Option<f64>> {
        self.proposed
            .iter()
            .zip(&self.accepted)
            .map(|(&p, &a)| (p > 0).then(|| a as f64 / p as f64))
            .collect()
    }

    /// Keep every `step`-th stored draw.
    pub fn thinned(&self, step: usize) -> Self {
        let step = step.max(1);
        Self {
            draws: self.draws.iter().step_by(step).cloned().collect(),
            iterations: self.iterations.iter().step_by(step).copied().collect(),
            proposed: self.proposed.clone(),
            accepted: self.accepted.clone(),
        }
    }

    /// Trace of `F_t(B_k)` across stored draws.
    pub fn f_trace(&self, t: usize, k: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d.f[t].get(k).as_f64()).collect()
    }
}

/// The chain hit a non-finite Metropolis-Hastings ratio.
#[derive(Clone, Debug)]
pub struct ChainFailure<R> {
    pub iteration: usize,
    pub index: usize,
    pub message: String,
    pub state: ChainState<R>,
    pub partial: ChainSamples<R>,
}

impl<R: fmt::Debug> fmt::Display for ChainFailure<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "numeric failure at sweep {} while updating N_{}: {}",
            self.iteration,
            self.index + 1,
            self.message
        )
    }
}

impl<R: fmt::Debug> std::error::Error for ChainFailure<R> {}

#[derive(Debug)]
pub enum RunError<R> {
    Setup(DdpError),
    Numeric(Box<ChainFailure<R>>),
}

impl<R: fmt::Debug> fmt::Display for RunError<R> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Setup(e) => e.fmt(f),
            RunError::Numeric(e) => e.fmt(f),
        }
    }
}

impl<R: fmt::Debug> std::error::Error for RunError<R> {}

impl<R> From<DdpError> for RunError<R> {
    fn from(e: DdpError) -> Self {
        RunError::Setup(e)
    }
}

/// Dirichlet parameters of `F_t | N, X_t`: `c0 F0(B_k) + Σ_{∂_t} N_j(B_k) + h_{t,k}`.
pub fn f_conditional_alpha<R: Real>(
    model: &DdpModel<R>,
    n: &[CountMeasure],
    data: &ObservedData<R>,
    t: usize,
) -> Vec<f64> {
    let mut counts = vec![0u64; model.bins()];
    neighbour_counts(model, n, t, &mut counts);
    model
        .prior_alpha()
        .iter()
        .zip(&counts)
        .zip(data.counts(t))
        .map(|((&a, &s), &h)| a + s as f64 + h as f64)
        .collect()
}

/// Dirichlet parameters of `G | N`: `c0 F0(B_k) + Σ_t N_t(B_k)`.
pub fn g_conditional_alpha<R: Real>(model: &DdpModel<R>, n: &[CountMeasure]) -> Vec<f64> {
    let mut alpha = model.prior_alpha().to_vec();
    for nt in n {
        for (a, &c) in alpha.iter_mut().zip(nt.counts()) {
            *a += c as f64;
        }
    }
    alpha
}

/// Redraw every `F_t` from its full conditional.
pub fn update_f<R: Real, G: Rng + ?Sized>(
    state: &mut ChainState<R>,
    data: &ObservedData<R>,
    model: &DdpModel<R>,
    rng: &mut G,
) {
    let mut buf = Vec::with_capacity(model.bins());
    for t in 0..model.len() {
        let alpha = f_conditional_alpha(model, &state.n, data, t);
        dirichlet_into::<R, _>(&alpha, rng, &mut buf);
        state.f[t] = SimplexMeasure::from_vec_unchecked(buf.clone());
    }
}

/// Redraw `G` from its full conditional.
pub fn update_g<R: Real, G: Rng + ?Sized>(state: &mut ChainState<R>, model: &DdpModel<R>, rng: &mut G) {
    let alpha = g_conditional_alpha(model, &state.n);
    let mut buf = Vec::with_capacity(alpha.len());
    dirichlet_into::<R, _>(&alpha, rng, &mut buf);
    state.g = SimplexMeasure::from_vec_unchecked(buf);
}

/// Unnormalised log full conditional of `N_t = candidate` given `F` and `G`:
///
/// `Σ_k n_k (ln G(B_k) + Σ_{j∈ϱ_t} ln F_j(B_k)) - ln n_k! - Σ_{j∈ϱ_t} ln Γ(c0 F0(B_k) + Σ_{l∈∂_j} n_{l,k})`
///
/// with `N_t` replaced by the candidate inside the inner sums.
pub fn log_density_n<R: Real>(candidate: &[u32], t: usize, state: &ChainState<R>, model: &DdpModel<R>) -> Result<f64> {
    if candidate.len() != model.bins() {
        return Err(DdpError::DimensionMismatch(format!(
            "candidate has {} bins, model has {}",
            candidate.len(),
            model.bins()
        )));
    }
    let total: u64 = candidate.iter().map(|&n| n as u64).sum();
    if total != model.c(t) as u64 {
        return Err(invalid(format!(
            "candidate counts sum to {total}, c_{} is {}",
            t + 1,
            model.c(t)
        )));
    }
    let structure = model.structure();
    let prior = model.prior_alpha();
    let mut out = 0.0;
    for (k, &nk) in candidate.iter().enumerate() {
        if nk > 0 {
            let mut weight = state.g.get(k).as_f64().ln();
            for &j in structure.reversed(t) {
                weight += state.f[j].get(k).as_f64().ln();
            }
            out += nk as f64 * weight - ln_gamma(nk as f64 + 1.0);
        }
        for &j in structure.reversed(t) {
            let shared: u64 = structure
                .forward(j)
                .iter()
                .map(|&l| if l == t { nk as u64 } else { state.n[l].get(k) as u64 })
                .sum();
            out -= ln_gamma(prior[k] + shared as f64);
        }
    }
    Ok(out)
}

/// Acceptance bookkeeping for one `N_t` update.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MhStats {
    pub proposed: u64,
    pub accepted: u64,
}

/// Metropolis-Hastings update of `N_t` with `F` and `G` held fixed.
///
/// For every bin `k < K - 1`, each move picks a partner bin `l` (see
/// [`MhPartner`]) and proposes transferring one unit between `k` and `l`,
/// in either direction with probability one half. The partner law does not
/// depend on `N_t`, so the proposal is symmetric. Proposals that would make
/// a count negative are rejected. Returns an error if a log acceptance
/// ratio is NaN.
pub fn update_n_mh<R: Real, G: Rng + ?Sized>(
    state: &mut ChainState<R>,
    t: usize,
    model: &DdpModel<R>,
    moves: usize,
    partner: MhPartner,
    rng: &mut G,
) -> Result<MhStats> {
    let k_bins = model.bins();
    let mut stats = MhStats::default();
    if model.c(t) == 0 || k_bins < 2 {
        return Ok(stats);
    }
    let structure = model.structure();
    let rev = structure.reversed(t);
    let prior = model.prior_alpha();
    let last = k_bins - 1;

    // Per bin: ln G + Σ_{j∈ϱ_t} ln F_j, and the shared counts S_{j,k}.
    let weight: Vec<f64> = (0..k_bins)
        .map(|k| state.g.get(k).as_f64().ln() + rev.iter().map(|&j| state.f[j].get(k).as_f64().ln()).sum::<f64>())
        .collect();
    let mut shared: Vec<Vec<u64>> = rev
        .iter()
        .map(|&j| {
            let mut s = vec![0u64; k_bins];
            neighbour_counts(model, &state.n, j, &mut s);
            s
        })
        .collect();

    // Cumulative partner weights for the weighted scheme.
    let cumulative: Vec<f64> = match partner {
        MhPartner::LastBin => Vec::new(),
        MhPartner::Weighted => {
            let top = weight.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            weight
                .iter()
                .scan(0.0, |acc, w| {
                    *acc += (w - top).exp();
                    Some(*acc)
                })
                .collect()
        }
    };

    let nt = &mut state.n[t];
    for k in 0..last {
        for _ in 0..moves {
            let l = match partner {
                MhPartner::LastBin => last,
                MhPartner::Weighted => {
                    let u = rng.random::<f64>() * cumulative[last];
                    cumulative.partition_point(|&c| c <= u).min(last)
                }
            };
            let outward = rng.random::<bool>();
            stats.proposed += 1;
            if l == k {
                continue;
            }
            let (from, to) = if outward { (k, l) } else { (l, k) };
            let n_from = nt.get(from);
            if n_from == 0 {
                continue;
            }
            let n_to = nt.get(to);
            let mut delta = weight[to] - weight[from] + (n_from as f64).ln() - ((n_to + 1) as f64).ln();
            for s in &shared {
                delta -= (prior[to] + s[to] as f64).ln();
                delta += (prior[from] + (s[from] - 1) as f64).ln();
            }
            if delta.is_nan() {
                return Err(DdpError::Numeric(format!(
                    "NaN acceptance ratio for transfer {} -> {} in N_{}",
                    from + 1,
                    to + 1,
                    t + 1
                )));
            }
            if delta >= 0.0 || rng.random::<f64>().ln() < delta {
                nt.transfer(from, to);
                for s in shared.iter_mut() {
                    s[from] -= 1;
                    s[to] += 1;
                }
                stats.accepted += 1;
            }
        }
    }
    Ok(stats)
}

/// Sequential scan sampler. Holds the state of a single chain.
#[derive(Clone, Debug)]
pub struct GibbsSampler<'m, R> {
    model: &'m DdpModel<R>,
    state: ChainState<R>,
    moves: usize,
    partner: MhPartner,
    proposed: Vec<u64>,
    accepted: Vec<u64>,
}

impl<'m, R: Real> GibbsSampler<'m, R> {
    /// Start from `N_t ~ DMP(c_t, c0, F0)`, then `G | N` and `F | N, X`.
    pub fn initialise<G: Rng + ?Sized>(
        model: &'m DdpModel<R>,
        data: &ObservedData<R>,
        moves: usize,
        rng: &mut G,
    ) -> Result<Self> {
        data.check_shape(model.len(), model.bins())?;
        let n = (0..model.len())
            .map(|t| sample_dirichlet_multinomial(model.c(t), model.c0(), model.base(), rng))
            .collect::<Result<Vec<_>>>()?;
        let k = model.bins();
        let mut state = ChainState {
            f: vec![SimplexMeasure::uniform(k); model.len()],
            n,
            g: SimplexMeasure::uniform(k),
        };
        update_g(&mut state, model, rng);
        update_f(&mut state, data, model, rng);
        Ok(Self::from_state(model, state, moves))
    }

    pub fn from_state(model: &'m DdpModel<R>, state: ChainState<R>, moves: usize) -> Self {
        Self {
            model,
            state,
            moves: moves.max(1),
            partner: MhPartner::default(),
            proposed: vec![0; model.len()],
            accepted: vec![0; model.len()],
        }
    }

    pub fn with_partner(mut self, partner: MhPartner) -> Self {
        self.partner = partner;
        self
    }

    pub fn state(&self) -> &ChainState<R> {
        &self.state
    }

    pub fn proposed(&self) -> &[u64] {
        &self.proposed
    }

    pub fn accepted(&self) -> &[u64] {
        &self.accepted
    }

    /// One sweep `F → N_1..N_T → G`. On error returns the failing index.
    pub fn sweep<G: Rng + ?Sized>(
        &mut self,
        data: &ObservedData<R>,
        rng: &mut G,
    ) -> std::result::Result<(), (usize, DdpError)> {
        update_f(&mut self.state, data, self.model, rng);
        for t in 0..self.model.len() {
            let s = update_n_mh(&mut self.state, t, self.model, self.moves, self.partner, rng).map_err(|e| (t, e))?;
            self.proposed[t] += s.proposed;
            self.accepted[t] += s.accepted;
        }
        update_g(&mut self.state, self.model, rng);
        Ok(())
    }
}

/// Run a full chain and keep the thinned post-burn-in draws.
pub fn run_gibbs<R: Real>(
    data: &ObservedData<R>,
    model: &DdpModel<R>,
    cfg: &GibbsConfig,
) -> std::result::Result<ChainSamples<R>, RunError<R>> {
    cfg.validate()?;
    let mut rng = RngStream::seeded(cfg.seed);
    let mut sampler =
        GibbsSampler::initialise(model, data, cfg.mh_moves_per_sweep, &mut rng)?.with_partner(cfg.mh_partner);
    let mut samples = ChainSamples {
        draws: Vec::with_capacity(cfg.stored_draws()),
        iterations: Vec::with_capacity(cfg.stored_draws()),
        proposed: vec![],
        accepted: vec![],
    };
    for it in 1..=cfg.iterations {
        if let Err((index, e)) = sampler.sweep(data, &mut rng) {
            samples.proposed = sampler.proposed.clone();
            samples.accepted = sampler.accepted.clone();
            return Err(RunError::Numeric(Box::new(ChainFailure {
                iteration: it,
                index,
                message: e.to_string(),
                state: sampler.state.clone(),
                partial: samples,
            })));
        }
        if it > cfg.burn_in && (it - cfg.burn_in).is_multiple_of(cfg.thin) {
            samples.draws.push(sampler.state.clone());
            samples.iterations.push(it);
        }
    }
    samples.proposed = sampler.proposed;
    samples.accepted = sampler.accepted;
    Ok(samples)
}

#[cfg(test)]
mod tests;
