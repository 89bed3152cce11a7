//! Predictive distributions, generalised Pólya urns, model-selection
//! statistics and posterior summaries.

mod selection;
mod summary;
mod urn;

pub use selection::{lmeasure, lmeasure_terms, lpml, posterior_moments, LMeasure, LpmlReport};
pub use summary::{summarize, FitSummary};
pub use urn::{predictive_mean, simulate_sequences, Sequences, UrnState};
