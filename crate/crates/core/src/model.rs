use crate::dependence::{NeighborStructure, PrecisionParams};
use crate::error::{invalid, DdpError, Result};
use crate::scalar::Real;

/// A validated `DDP(c, F0)` prior projected onto a partition: precision
/// parameters, neighbour structure and centring masses `F0(B_k)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DdpModel<R> {
    params: PrecisionParams<R>,
    structure: NeighborStructure,
    base: Vec<R>,
    /// `c0 * F0(B_k)`, cached in f64.
    prior_alpha: Vec<f64>,
}

impl<R: Real> DdpModel<R> {
    pub fn new(params: PrecisionParams<R>, structure: NeighborStructure, base: Vec<R>) -> Result<Self> {
        if params.len() != structure.len() {
            return Err(DdpError::DimensionMismatch(format!(
                "{} precision parameters for {} indices",
                params.len(),
                structure.len()
            )));
        }
        if !(params.c0 > R::zero()) || !params.c0.is_finite() {
            return Err(invalid(format!("c0 must be positive, got {}", params.c0)));
        }
        if base.is_empty() {
            return Err(invalid("base measure has no bins"));
        }
        if let Some(k) = base.iter().position(|b| !(*b > R::zero()) || !b.is_finite()) {
            return Err(invalid(format!(
                "base mass of bin {} is {}; every Dirichlet parameter must be positive",
                k + 1,
                base[k]
            )));
        }
        let total: f64 = base.iter().map(|b| b.as_f64()).sum();
        if (total - 1.0).abs() > R::SIMPLEX_TOL {
            return Err(invalid(format!("base masses sum to {total}, not 1")));
        }
        let c0 = params.c0.as_f64();
        let prior_alpha = base.iter().map(|b| c0 * b.as_f64()).collect();
        Ok(Self {
            params,
            structure,
            base,
            prior_alpha,
        })
    }

    pub fn params(&self) -> &PrecisionParams<R> {
        &self.params
    }

    pub fn structure(&self) -> &NeighborStructure {
        &self.structure
    }

    pub fn base(&self) -> &[R] {
        &self.base
    }

    pub fn c0(&self) -> R {
        self.params.c0
    }

    /// `c_t`.
    pub fn c(&self, t: usize) -> u32 {
        self.params.c[t]
    }

    /// Number of indices `T`.
    pub fn len(&self) -> usize {
        self.structure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.structure.is_empty()
    }

    /// Number of bins `K`.
    pub fn bins(&self) -> usize {
        self.base.len()
    }

    pub(crate) fn prior_alpha(&self) -> &[f64] {
        &self.prior_alpha
    }
}
