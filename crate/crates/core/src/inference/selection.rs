use crate::data::ObservedData;
use crate::error::{invalid, Result};
use crate::gibbs::ChainSamples;
use crate::partition::Partition;
use crate::scalar::Real;

/// Conditional predictive ordinates and the two pseudo-marginal-likelihood
/// aggregates.
#[derive(Clone, Debug, PartialEq)]
pub struct LpmlReport {
    /// Mean over indices of the mean `ln CPO_{i,t}`.
    pub lpml_log: f64,
    /// Same average taken over `CPO_{i,t}` without the logarithm.
    pub lpml_paper: f64,
    /// `CPO_{i,t}`, indexed `[t][i]`.
    pub cpo: Vec<Vec<f64>>,
    /// Observations whose predictive density vanished in some stored draw.
    pub zero_density: usize,
}

/// CPO by the harmonic-mean estimator over stored draws, using the
/// piecewise-constant density `F_t(B_k) / width(B_k)`.
///
/// Indices without observations are left out of both averages.
pub fn lpml<R: Real>(chain: &ChainSamples<R>, data: &ObservedData<R>, partition: &Partition<R>) -> Result<LpmlReport> {
    if chain.is_empty() {
        return Err(invalid("cannot compute LPML from an empty chain"));
    }
    if !data.has_values() {
        return Err(invalid("LPML needs the raw observations, not only bin counts"));
    }
    let edges = partition.edges();
    let (lo, hi) = (edges[0], edges[edges.len() - 1]);
    let len = data.len();
    let draws = chain.len() as f64;
    let ln_draws = draws.ln();
    let mut cpo = Vec::with_capacity(len);
    let mut zero_density = 0;
    let (mut sum_log, mut sum_raw, mut used) = (0.0, 0.0, 0usize);
    for t in 0..len {
        let values = data.values(t);
        let mut row = Vec::with_capacity(values.len());
        for &x in values {
            if x < lo || x > hi {
                return Err(invalid(format!(
                    "observation {x} at index {} lies outside the partition [{lo}, {hi}]",
                    t + 1
                )));
            }
            let k = partition.locate(x)?;
            let ln_width = partition.width(k).as_f64().ln();
            // -ln f = ln width - ln F
            let neg_log_f: Vec<f64> = chain
                .draws
                .iter()
                .map(|d| ln_width - d.f[t].get(k).as_f64().ln())
                .collect();
            let ln_cpo = if neg_log_f.iter().any(|v| v.is_infinite()) {
                zero_density += 1;
                f64::NEG_INFINITY
            } else {
                let top = neg_log_f.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let lse = top + neg_log_f.iter().map(|v| (v - top).exp()).sum::<f64>().ln();
                ln_draws - lse
            };
            row.push(ln_cpo.exp());
        }
        if !row.is_empty() {
            let m = row.len() as f64;
            sum_log += row.iter().map(|c| c.ln()).sum::<f64>() / m;
            sum_raw += row.iter().sum::<f64>() / m;
            used += 1;
        }
        cpo.push(row);
    }
    if used == 0 {
        return Err(invalid("no observations to score"));
    }
    Ok(LpmlReport {
        lpml_log: sum_log / used as f64,
        lpml_paper: sum_raw / used as f64,
        cpo,
        zero_density,
    })
}

/// Posterior mean and variance of `F_t(B_k)` over stored draws (variance
/// with divisor `L`).
pub fn posterior_moments<R: Real>(chain: &ChainSamples<R>) -> Result<(Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let first = chain.draws.first().ok_or_else(|| invalid("empty chain"))?;
    let len = first.f.len();
    let k = first.f.first().map(|f| f.len()).unwrap_or(0);
    let l = chain.len() as f64;
    let mut mean = vec![vec![0.0; k]; len];
    for d in &chain.draws {
        for t in 0..len {
            for b in 0..k {
                mean[t][b] += d.f[t].get(b).as_f64();
            }
        }
    }
    mean.iter_mut().flatten().for_each(|m| *m /= l);
    let mut var = vec![vec![0.0; k]; len];
    for d in &chain.draws {
        for t in 0..len {
            for b in 0..k {
                var[t][b] += (d.f[t].get(b).as_f64() - mean[t][b]).powi(2);
            }
        }
    }
    var.iter_mut().flatten().for_each(|v| *v /= l);
    Ok((mean, var))
}

/// The two components of the L-measure, each already averaged over `T K`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LMeasure {
    pub variance: f64,
    pub bias: f64,
}

impl LMeasure {
    /// `LMEA(ν) = variance + ν · bias`.
    pub fn value(&self, nu: f64) -> f64 {
        self.variance + nu * self.bias
    }
}

/// Average posterior variance and average squared distance between the
/// posterior mean and the empirical bin frequencies. Indices without
/// observations contribute no bias.
pub fn lmeasure_terms<R: Real>(chain: &ChainSamples<R>, data: &ObservedData<R>) -> Result<LMeasure> {
    let (mean, var) = posterior_moments(chain)?;
    if mean.len() != data.len() || mean.first().map(Vec::len) != Some(data.bins()) {
        return Err(invalid("chain and data dimensions disagree"));
    }
    let cells = (mean.len() * data.bins()) as f64;
    let variance = var.iter().flatten().sum::<f64>() / cells;
    let bias = (0..data.len())
        .filter_map(|t| {
            data.empirical(t)
                .map(|emp| emp.iter().zip(&mean[t]).map(|(e, m)| (m - e).powi(2)).sum::<f64>())
        })
        .sum::<f64>()
        / cells;
    Ok(LMeasure { variance, bias })
}

/// `LMEA(ν)` for `ν ∈ [0, 1]`.
pub fn lmeasure<R: Real>(chain: &ChainSamples<R>, data: &ObservedData<R>, nu: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&nu) {
        return Err(invalid(format!("nu must lie in [0, 1], got {nu}")));
    }
    Ok(lmeasure_terms(chain, data)?.value(nu))
}
