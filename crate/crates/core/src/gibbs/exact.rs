//! Exact posterior by enumerating every joint latent-count configuration.
//! Only feasible for tiny instances; used as a reference for the sampler.

use libm::lgamma as ln_gamma;

use crate::data::ObservedData;
use crate::error::{DdpError, Result};
use crate::model::DdpModel;
use crate::scalar::Real;

/// Largest number of joint `{N_t}` configurations that will be enumerated.
pub const ENUMERATION_LIMIT: u128 = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactPosterior {
    /// `E[F_t(B_k) | X]`, indexed `[t][k]`.
    pub f_mean: Vec<Vec<f64>>,
    pub f_var: Vec<Vec<f64>>,
    pub g_mean: Vec<f64>,
    pub n_mean: Vec<Vec<f64>>,
    /// Log probability of the observed bin labels, in observation order.
    pub log_marginal: f64,
    pub configurations: usize,
}

fn compositions_count(total: u32, parts: usize) -> u128 {
    // C(total + parts - 1, parts - 1)
    let (n, r) = (total as u128 + parts as u128 - 1, parts as u128 - 1);
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// All vectors of `parts` nonnegative integers summing to `total`.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    fn rec(rest: u32, parts: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            cur.push(rest);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for x in 0..=rest {
            cur.push(x);
            rec(rest - x, parts - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let top = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    top + xs.iter().map(|x| (x - top).exp()).sum::<f64>().ln()
}

/// Enumerate `{N_t}` and integrate `F` and `G` analytically.
///
/// Each configuration is weighted by `p(N) p(X | N)`, where `p(N)` is the
/// Dirichlet-multinomial law of the counts after integrating out `G` and
/// `p(X | N)` the Dirichlet-multinomial likelihood of the bin labels under
/// `F_t | N`.
pub fn exact_posterior_small<R: Real>(data: &ObservedData<R>, model: &DdpModel<R>) -> Result<ExactPosterior> {
    data.check_shape(model.len(), model.bins())?;
    let len = model.len();
    let k = model.bins();
    let size = (0..len).fold(1u128, |acc, t| acc.saturating_mul(compositions_count(model.c(t), k)));
    if size > ENUMERATION_LIMIT {
        return Err(DdpError::StateSpaceTooLarge {
            size,
            limit: ENUMERATION_LIMIT,
        });
    }
    let per_t: Vec<Vec<Vec<u32>>> = (0..len).map(|t| compositions(model.c(t), k)).collect();
    let prior = model.prior_alpha();
    let c0 = model.c0().as_f64();
    let structure = model.structure();
    let c_total: f64 = (0..len).map(|t| model.c(t) as f64).sum();

    let mut log_w = Vec::with_capacity(size as usize);
    // Conditional moments per configuration: F mean / second moment, G mean, N.
    let mut cond: Vec<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>, Vec<Vec<f64>>)> = Vec::new();
    let mut idx = vec![0usize; len];
    loop {
        let n: Vec<&Vec<u32>> = (0..len).map(|t| &per_t[t][idx[t]]).collect();

        // ln p(N): multinomial given G, G integrated out.
        let mut lw = ln_gamma(c0) - ln_gamma(c0 + c_total);
        for t in 0..len {
            lw += ln_gamma(model.c(t) as f64 + 1.0);
            lw -= n[t].iter().map(|&x| ln_gamma(x as f64 + 1.0)).sum::<f64>();
        }
        let mut g_alpha = prior.to_vec();
        for nt in &n {
            for (a, &x) in g_alpha.iter_mut().zip(nt.iter()) {
                *a += x as f64;
            }
        }
        for (a, p) in g_alpha.iter().zip(prior) {
            lw += ln_gamma(*a) - ln_gamma(*p);
        }

        // ln p(X | N) and the conditional Dirichlet moments of F_t.
        let mut f_m = Vec::with_capacity(len);
        let mut f_m2 = Vec::with_capacity(len);
        for t in 0..len {
            let alpha: Vec<f64> = (0..k)
                .map(|b| prior[b] + structure.forward(t).iter().map(|&j| n[j][b] as f64).sum::<f64>())
                .collect();
            let a_tot: f64 = alpha.iter().sum();
            let h = data.counts(t);
            let m = data.size(t) as f64;
            lw += ln_gamma(a_tot) - ln_gamma(a_tot + m);
            for b in 0..k {
                lw += ln_gamma(alpha[b] + h[b] as f64) - ln_gamma(alpha[b]);
            }
            let post_tot = a_tot + m;
            let mean: Vec<f64> = (0..k).map(|b| (alpha[b] + h[b] as f64) / post_tot).collect();
            let m2: Vec<f64> = (0..k)
                .map(|b| {
                    let a = alpha[b] + h[b] as f64;
                    a * (a + 1.0) / (post_tot * (post_tot + 1.0))
                })
                .collect();
            f_m.push(mean);
            f_m2.push(m2);
        }
        let g_tot: f64 = g_alpha.iter().sum();
        let g_m: Vec<f64> = g_alpha.iter().map(|a| a / g_tot).collect();
        let n_f: Vec<Vec<f64>> = n.iter().map(|v| v.iter().map(|&x| x as f64).collect()).collect();
        log_w.push(lw);
        cond.push((f_m, f_m2, g_m, n_f));

        // odometer
        let mut pos = 0;
        loop {
            if pos == len {
                break;
            }
            idx[pos] += 1;
            if idx[pos] < per_t[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == len {
            break;
        }
    }

    let log_marginal = log_sum_exp(&log_w);
    let w: Vec<f64> = log_w.iter().map(|l| (l - log_marginal).exp()).collect();
    let mut f_mean = vec![vec![0.0; k]; len];
    let mut f_sq = vec![vec![0.0; k]; len];
    let mut g_mean = vec![0.0; k];
    let mut n_mean = vec![vec![0.0; k]; len];
    for (wi, (fm, fm2, gm, nf)) in w.iter().zip(&cond) {
        for t in 0..len {
            for b in 0..k {
                f_mean[t][b] += wi * fm[t][b];
                f_sq[t][b] += wi * fm2[t][b];
                n_mean[t][b] += wi * nf[t][b];
            }
        }
        for b in 0..k {
            g_mean[b] += wi * gm[b];
        }
    }
    let f_var = f_sq
        .iter()
        .zip(&f_mean)
        .map(|(sq, m)| sq.iter().zip(m).map(|(s, m)| (s - m * m).max(0.0)).collect())
        .collect();
    Ok(ExactPosterior {
        f_mean,
        f_var,
        g_mean,
        n_mean,
        log_marginal,
        configurations: w.len(),
    })
}
