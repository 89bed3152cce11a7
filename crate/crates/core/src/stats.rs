//! Small Monte Carlo summaries shared by the verification harnesses.

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Standard error of the mean of independent draws.
pub fn mean_se(xs: &[f64]) -> f64 {
    let (_, v) = mean_var(xs);
    (v / xs.len() as f64).sqrt()
}

/// Standard error of the sample variance, from the fourth central moment.
pub fn variance_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (m, v) = mean_var(xs);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    ((m4 - v * v).max(0.0) / n).sqrt()
}

/// Batch-means standard error of the mean of an autocorrelated series.
pub fn batch_means_se(xs: &[f64], batches: usize) -> f64 {
    let batches = batches.max(2).min(xs.len());
    let size = xs.len() / batches;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..batches)
        .map(|b| xs[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let (_, v) = mean_var(&means);
    (v / batches as f64).sqrt()
}

/// Pearson correlation with its delete-one jackknife standard error.
pub fn pearson_jackknife(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let (a, b) = (x - mx, y - my);
        sx += a;
        sy += b;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    let corr = |sx: f64, sy: f64, sxx: f64, syy: f64, sxy: f64, n: f64| {
        let cxy = sxy - sx * sy / n;
        let cxx = sxx - sx * sx / n;
        let cyy = syy - sy * sy / n;
        cxy / (cxx * cyy).sqrt()
    };
    let full = corr(sx, sy, sxx, syy, sxy, nf);
    let leave: Vec<f64> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let (a, b) = (x - mx, y - my);
            corr(sx - a, sy - b, sxx - a * a, syy - b * b, sxy - a * b, nf - 1.0)
        })
        .collect();
    let lbar = leave.iter().sum::<f64>() / nf;
    let se = ((nf - 1.0) / nf * leave.iter().map(|l| (l - lbar).powi(2)).sum::<f64>()).sqrt();
    (full, se)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pearson_perfect_line() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let (r, se) = pearson_jackknife(&xs, &ys);
        assert!((r - 1.0).abs() < 1e-12);
        assert!(se < 1e-6);
    }

    #[test]
    fn batch_means_of_constant_is_zero() {
        assert_eq!(batch_means_se(&[2.0; 100], 10), 0.0);
    }
}
