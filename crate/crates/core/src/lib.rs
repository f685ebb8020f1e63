//! Single-fit parametric bootstrap (SAFE) for meta-analytic effect sizes.
//!
//! Fit a sampling model to the reported summary statistics once, draw `B` replicate
//! summaries, transform each to the effect size, then read off the bootstrap standard
//! error and the bias-corrected point estimate `2θ̂ − mean(θ*)`. Closed-form delta-method
//! estimators are provided alongside for comparison.
//!
//! ```
//! use safe_bootstrap::{safe_estimate, ContingencyTable, EffectInputs, SafeConfig};
//!
//! let table = ContingencyTable::new(2, 20, 10, 12)?;
//! let config = SafeConfig::with_seed(7).replicates(20_000);
//! let r = safe_estimate(&EffectInputs::LnOR(table), &config)?;
//! assert!((r.theta_hat + 2.1203).abs() < 1e-4);
//! assert!(r.theta_bc > r.theta_hat);
//! # Ok::<(), safe_bootstrap::Error>(())
//! ```

pub mod batch;
pub mod cli;
pub mod closed_form;
pub mod engine;
pub mod error;
pub mod models;
pub mod rng;
pub mod summary;
pub mod transforms;
pub mod validation;

pub use closed_form::{EstimatorResult, Method, Order, SmdDetails, SmdEstimator};
pub use engine::{safe_estimate, summarise, BootstrapResult, RunningMoments, SafeConfig};
pub use error::{Error, Result, Stage, Warning};
pub use models::{Draws, SamplingModel, Truncation, VarianceMode};
pub use rng::{CovarianceMatrix, Matrix, RngStream};
pub use summary::{ContingencyTable, Design, GenotypeCounts, GroupSummary, PairedDesign};
pub use transforms::{
    plugin_estimate, transform_replicates, CcPolicy, EffectInputs, EffectSizeKind,
    ReplicateBatch,
};
