use crate::data::ObservedData;
use crate::error::Result;
use crate::gibbs::ChainSamples;
use crate::inference::selection::{lmeasure_terms, lpml, posterior_moments, LMeasure, LpmlReport};
use crate::partition::Partition;
use crate::scalar::Real;

/// Posterior point estimates and fit statistics for a finished chain.
#[derive(Clone, Debug, PartialEq)]
pub struct FitSummary {
    /// `E[F_t(B_k) | x]`, indexed `[t][k]`.
    pub mean: Vec<Vec<f64>>,
    pub var: Vec<Vec<f64>>,
    /// Cumulative sums of `mean`: the posterior mean CDF at right bin edges.
    pub cdf: Vec<Vec<f64>>,
    pub g_mean: Vec<f64>,
    pub g_var: Vec<f64>,
    pub lpml: LpmlReport,
    pub lmeasure: LMeasure,
    pub nu: f64,
}

impl FitSummary {
    pub fn lmea(&self) -> f64 {
        self.lmeasure.value(self.nu)
    }
}

fn cumulative(xs: &[f64]) -> Vec<f64> {
    xs.iter()
        .scan(0.0, |acc, x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

pub fn summarize<R: Real>(
    chain: &ChainSamples<R>,
    data: &ObservedData<R>,
    partition: &Partition<R>,
    nu: f64,
) -> Result<FitSummary> {
    let (mean, var) = posterior_moments(chain)?;
    let cdf = mean.iter().map(|m| cumulative(m)).collect();
    let k = partition.bins();
    let l = chain.len() as f64;
    let mut g_mean = vec![0.0; k];
    for d in &chain.draws {
        for (acc, p) in g_mean.iter_mut().zip(d.g.probs()) {
            *acc += p.as_f64();
        }
    }
    g_mean.iter_mut().for_each(|m| *m /= l);
    let mut g_var = vec![0.0; k];
    for d in &chain.draws {
        for ((acc, p), m) in g_var.iter_mut().zip(d.g.probs()).zip(&g_mean) {
            *acc += (p.as_f64() - m).powi(2);
        }
    }
    g_var.iter_mut().for_each(|v| *v /= l);
    let lpml = lpml(chain, data, partition)?;
    let lmeasure = lmeasure_terms(chain, data)?;
    Ok(FitSummary {
        mean,
        var,
        cdf,
        g_mean,
        g_var,
        lpml,
        lmeasure,
        nu,
    })
}
