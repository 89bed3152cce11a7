use crate::error::{invalid, DdpError, Result};
use crate::partition::Partition;
use crate::scalar::Real;

/// Observations per index together with their bin counts `h_{t,k}`.
///
/// The sampler only sees the counts; raw values are kept for predictive
/// density evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservedData<R> {
    values: Vec<Vec<R>>,
    counts: Vec<Vec<u32>>,
}

impl<R: Real> ObservedData<R> {
    pub fn from_values(values: Vec<Vec<R>>, partition: &Partition<R>) -> Result<Self> {
        let k = partition.bins();
        let counts = values
            .iter()
            .map(|xs| {
                let mut h = vec![0u32; k];
                for &x in xs {
                    h[partition.locate(x)?] += 1;
                }
                Ok(h)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { values, counts })
    }

    /// Binned data without raw values.
    pub fn from_counts(counts: Vec<Vec<u32>>) -> Result<Self> {
        let k = counts.first().map(Vec::len).unwrap_or(0);
        if counts.iter().any(|h| h.len() != k) {
            return Err(DdpError::DimensionMismatch("ragged bin counts".into()));
        }
        Ok(Self {
            values: vec![Vec::new(); counts.len()],
            counts,
        })
    }

    /// No observations at any of `len` indices over `bins` bins.
    pub fn empty(len: usize, bins: usize) -> Self {
        Self {
            values: vec![Vec::new(); len],
            counts: vec![vec![0; bins]; len],
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn bins(&self) -> usize {
        self.counts.first().map(Vec::len).unwrap_or(0)
    }

    /// `m_t`.
    pub fn size(&self, t: usize) -> u32 {
        self.counts[t].iter().sum()
    }

    /// `h_{t,·}`.
    pub fn counts(&self, t: usize) -> &[u32] {
        &self.counts[t]
    }

    pub fn values(&self, t: usize) -> &[R] {
        &self.values[t]
    }

    pub fn has_values(&self) -> bool {
        self.values
            .iter()
            .zip(&self.counts)
            .all(|(v, h)| v.len() as u32 == h.iter().sum::<u32>())
    }

    /// Empirical bin frequencies `h_{t,k} / m_t`, or `None` when `m_t = 0`.
    pub fn empirical(&self, t: usize) -> Option<Vec<f64>> {
        let m = self.size(t);
        (m > 0).then(|| self.counts[t].iter().map(|&h| h as f64 / m as f64).collect())
    }

    pub(crate) fn check_shape(&self, len: usize, bins: usize) -> Result<()> {
        if self.len() != len {
            return Err(DdpError::DimensionMismatch(format!(
                "data cover {} indices, model has {len}",
                self.len()
            )));
        }
        if self.bins() != bins {
            return Err(invalid(format!(
                "data are binned into {} bins, model has {bins}",
                self.bins()
            )));
        }
        Ok(())
    }
}
