use rand::Rng;

use crate::data::ObservedData;
use crate::error::{invalid, DdpError, Result};
use crate::gibbs::f_conditional_alpha;
use crate::measures::{categorical, dirichlet_into, CountMeasure};
use crate::model::DdpModel;
use crate::partition::Partition;
use crate::scalar::Real;

/// Posterior predictive `E(F_t | N, X_t)` on the partition:
/// `(c0 F0 + Σ_{∂_t} N_j + m_t F̂_t) / (c0 + Σ_{∂_t} c_j + m_t)`.
pub fn predictive_mean<R: Real>(n: &[CountMeasure], data: &ObservedData<R>, t: usize, model: &DdpModel<R>) -> Vec<R> {
    let alpha = f_conditional_alpha(model, n, data, t);
    let total: f64 = alpha.iter().sum();
    alpha.iter().map(|a| R::of(a / total)).collect()
}

/// Generalised Pólya urns sharing latent starting balls.
///
/// Urn `t` starts with the balls `Y_{i,j}` of every `j ∈ ∂_t`; balls drawn
/// from urn `t` are returned to it. Balls are stored as bin indices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrnState {
    latent: Vec<Vec<usize>>,
    drawn: Vec<Vec<usize>>,
}

impl UrnState {
    pub fn new<R: Real>(latent: Vec<Vec<usize>>, model: &DdpModel<R>) -> Result<Self> {
        if latent.len() != model.len() {
            return Err(DdpError::DimensionMismatch(format!(
                "{} latent ball sets for {} indices",
                latent.len(),
                model.len()
            )));
        }
        for (j, balls) in latent.iter().enumerate() {
            if balls.len() != model.c(j) as usize {
                return Err(invalid(format!(
                    "index {} has {} latent balls, c_{} = {}",
                    j + 1,
                    balls.len(),
                    j + 1,
                    model.c(j)
                )));
            }
            if balls.iter().any(|&b| b >= model.bins()) {
                return Err(invalid("latent ball outside the partition"));
            }
        }
        Ok(Self {
            drawn: vec![Vec::new(); latent.len()],
            latent,
        })
    }

    /// Draw `G ~ Dir(c0 F0)` and then `Y_{i,j} | G` iid from `G`.
    pub fn sample_latent<R: Real, G: Rng + ?Sized>(model: &DdpModel<R>, rng: &mut G) -> Self {
        let mut g = Vec::with_capacity(model.bins());
        dirichlet_into::<f64, _>(model.prior_alpha(), rng, &mut g);
        Self::from_anchor(model, &g, rng)
    }

    /// `Y_{i,j}` iid from a fixed anchor `g`.
    pub fn from_anchor<R: Real, G: Rng + ?Sized>(model: &DdpModel<R>, g: &[f64], rng: &mut G) -> Self {
        let latent = (0..model.len())
            .map(|j| (0..model.c(j)).map(|_| categorical(g, rng)).collect())
            .collect();
        Self {
            drawn: vec![Vec::new(); model.len()],
            latent,
        }
    }

    pub fn latent(&self, j: usize) -> &[usize] {
        &self.latent[j]
    }

    pub fn drawn(&self, t: usize) -> &[usize] {
        &self.drawn[t]
    }

    /// Latent balls as count measures `N_j = c_j Ĝ_j`.
    pub fn latent_counts(&self, bins: usize) -> Vec<CountMeasure> {
        self.latent.iter().map(|b| to_counts(b, bins)).collect()
    }

    /// Drawn balls as binned observations.
    pub fn drawn_data<R: Real>(&self, bins: usize) -> ObservedData<R> {
        ObservedData::from_counts(
            self.drawn
                .iter()
                .map(|b| to_counts(b, bins).counts().to_vec())
                .collect(),
        )
        .expect("rectangular counts")
    }

    /// Bin probabilities of the next draw from urn `t`.
    pub fn next_distribution<R: Real>(&self, model: &DdpModel<R>, t: usize) -> Vec<f64> {
        let mut w: Vec<f64> = model.prior_alpha().to_vec();
        for &j in model.structure().forward(t) {
            for &b in &self.latent[j] {
                w[b] += 1.0;
            }
        }
        for &b in &self.drawn[t] {
            w[b] += 1.0;
        }
        let total: f64 = w.iter().sum();
        w.iter().map(|x| x / total).collect()
    }

    /// Draw the next ball from urn `t` and return it to the urn: a fresh
    /// ball from `F0` with weight `c0`, otherwise a uniformly chosen ball
    /// among the latent balls of `∂_t` and the balls already drawn at `t`.
    pub fn next<R: Real, G: Rng + ?Sized>(&mut self, model: &DdpModel<R>, t: usize, rng: &mut G) -> usize {
        let c0 = model.c0().as_f64();
        let pool: usize = model
            .structure()
            .forward(t)
            .iter()
            .map(|&j| self.latent[j].len())
            .sum::<usize>()
            + self.drawn[t].len();
        let u = rng.random::<f64>() * (c0 + pool as f64);
        let ball = if u < c0 || pool == 0 {
            let base: Vec<f64> = model.base().iter().map(|b| b.as_f64()).collect();
            categorical(&base, rng)
        } else {
            let mut i = ((u - c0).floor() as usize).min(pool - 1);
            let mut pick = None;
            for &j in model.structure().forward(t) {
                if i < self.latent[j].len() {
                    pick = Some(self.latent[j][i]);
                    break;
                }
                i -= self.latent[j].len();
            }
            pick.unwrap_or_else(|| self.drawn[t][i])
        };
        self.drawn[t].push(ball);
        ball
    }
}

fn to_counts(balls: &[usize], bins: usize) -> CountMeasure {
    let mut c = vec![0u32; bins];
    for &b in balls {
        c[b] += 1;
    }
    CountMeasure::new(c)
}

/// Partially exchangeable sequences generated by the urn scheme.
#[derive(Clone, Debug, PartialEq)]
pub struct Sequences {
    pub urn: UrnState,
    /// Bin index of each draw, per index `t`.
    pub bins: Vec<Vec<usize>>,
}

impl Sequences {
    /// Raw values drawn uniformly inside each ball's bin.
    pub fn values<R: Real, G: Rng + ?Sized>(&self, partition: &Partition<R>, rng: &mut G) -> Vec<Vec<R>> {
        self.bins
            .iter()
            .map(|seq| {
                seq.iter()
                    .map(|&b| partition.point_in_bin(b, R::of(rng.random::<f64>())))
                    .collect()
            })
            .collect()
    }
}

/// Draw latent balls once, then `n_per_t` balls from every urn.
pub fn simulate_sequences<R: Real, G: Rng + ?Sized>(model: &DdpModel<R>, n_per_t: usize, rng: &mut G) -> Sequences {
    let mut urn = UrnState::sample_latent(model, rng);
    let bins = (0..model.len())
        .map(|t| (0..n_per_t).map(|_| urn.next(model, t, rng)).collect())
        .collect();
    Sequences { urn, bins }
}
