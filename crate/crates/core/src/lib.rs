//! Score and rank expert-elicited prior distributions against observed data
//! with the Data Agreement Criterion (DAC).
//!
//! The DAC of a prior is the KL divergence from the benchmark posterior to
//! that prior, divided by the KL divergence from the benchmark posterior to
//! the benchmark prior. Values above 1 signal prior-data conflict.
//!
//! ```
//! use dac_core::{evaluate, DistributionSpec, ExpertPrior, PosteriorSummary, QuadratureConfig};
//!
//! let posterior = PosteriorSummary::supplied(DistributionSpec::normal(0.0, 1.0)?)?;
//! let benchmark = DistributionSpec::normal_var(0.0, 900.0)?;
//! let experts = [ExpertPrior::new("e1", "Expert 1", DistributionSpec::normal(0.5, 1.0)?)];
//! let report = evaluate(&posterior, &benchmark, &experts, &QuadratureConfig::default())?;
//! assert!((report.entries[0].dac_value - 0.043).abs() < 5e-4);
//! # Ok::<(), dac_core::DacError>(())
//! ```

#![allow(clippy::excessive_precision, clippy::neg_cmp_op_on_partial_ord)]

pub mod dac;
pub mod dist;
pub mod divergence;
pub mod error;
pub mod interface;
pub mod posterior;
pub mod quadrature;
pub mod sensitivity;
pub mod serde_ext;

pub use dac::{evaluate, rank_stability_note, DacEntry, DacReport, ExpertPrior, StabilityNote};
pub use dist::{DistributionSpec, EffectiveSupport, SkewNormal, SkewParameterization};
pub use divergence::{kl, kl_closed_normal, kl_closed_normal_uniform, DensityFloorPolicy, KlResult, QuadratureConfig};
pub use error::{DacError, Result};
pub use posterior::{
    fit_posterior, fit_posterior_analytic, fit_posterior_conjugate, fit_posterior_mcmc, gelman_rubin, Dataset,
    McmcConfig, PosteriorMethod, PosteriorSummary,
};
pub use sensitivity::{compare_rank_stability, conflict_fraction, run_grid, DacMatrix, GridConfig, GridResult};
