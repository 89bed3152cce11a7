//! Dependent Dirichlet processes built from latent multinomial processes.
//!
//! A collection `{F_t}` of random probability measures is coupled through an
//! anchor `G ~ DP(c0, F0)`, latent counts `N_t | G ~ MP(c_t, G)` and
//! `F_t | N ~ DP(c0 + Σ_{∂_t} c_j, (c0 F0 + Σ_{∂_t} N_j) / (c0 + Σ_{∂_t} c_j))`.
//! Everything runs on the projection to a finite partition `B_1, ..., B_K`.
//!
//! Numeric code is generic over [`Real`] (`f32`, `f64`); the closed-form
//! correlations also accept exact rationals. The aliases below fix the
//! scalar for the common cases.

pub mod data;
pub mod dependence;
pub mod error;
pub mod gibbs;
pub mod inference;
pub mod measures;
pub mod model;
pub mod partition;
pub mod prior;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use data::ObservedData;
pub use dependence::{corr_cross_sets, corr_same_set, corr_stationary, NeighborStructure, PrecisionParams};
pub use error::{DdpError, Result};
pub use gibbs::{
    exact_posterior_small, run_gibbs, update_f, update_g, update_n_mh, ChainSamples, ChainState, ExactPosterior,
    GibbsConfig, GibbsSampler, MhPartner, RunError,
};
pub use inference::{
    lmeasure, lmeasure_terms, lpml, predictive_mean, simulate_sequences, summarize, FitSummary, LMeasure, LpmlReport,
    UrnState,
};
pub use measures::{
    sample_dirichlet, sample_dirichlet_multinomial, sample_multinomial, sample_stick_breaking, CountMeasure,
    SimplexMeasure, StickBreakingDraw,
};
pub use model::DdpModel;
pub use partition::{base_masses, build_partition, default_base_params, BaseMeasure, Partition};
pub use prior::{marginal_moments, mc_correlation, mc_cross_correlation, sample_prior, McEstimate, PriorDraw};
pub use rng::RngStream;
pub use scalar::{Field, Real};

pub type Partition64 = Partition<f64>;
pub type Partition32 = Partition<f32>;
pub type BaseMeasure64 = BaseMeasure<f64>;
pub type Simplex64 = SimplexMeasure<f64>;
pub type Simplex32 = SimplexMeasure<f32>;
pub type Model64 = DdpModel<f64>;
pub type Model32 = DdpModel<f32>;
pub type Params64 = PrecisionParams<f64>;
/// Precision parameters with an exact rational `c0`, for the closed-form correlations.
pub type ExactParams = PrecisionParams<num_rational::Rational64>;
pub type Data64 = ObservedData<f64>;
pub type Chain64 = ChainSamples<f64>;
pub type State64 = ChainState<f64>;
pub type PriorDraw64 = PriorDraw<f64>;
