//! Pairwise maximum-entropy (inverse-Ising) modeling of binary multivariate
//! time series, built around sign-of-return panels.
//!
//! The crate covers the full pipeline:
//!
//! - [`core`]: panels, configurations, moments, coupling models, and the
//!   information-theoretic primitives (entropy, KLD, mutual information).
//! - [`ingest`]: price CSV parsing, synchronization, and binarization.
//! - [`exact`]: exact Gibbs ensembles, maximum-entropy fitting by moment
//!   matching, and the multi-information criterion.
//! - [`infer`]: regularized pseudo-maximum-likelihood and mean-field/TAP
//!   inversions for large systems.
//! - [`mcmc`]: Glauber-dynamics simulation and observable estimation.
//! - [`approx`]: self-consistent mean-field hierarchies, Plefka functionals,
//!   Edgeworth-corrected expectations, and consensus dynamics.
//! - [`crit`]: distribution rescaling, response-function scans, Zipf tests,
//!   and sampling-significance diagnostics.
//! - [`topo`]: dissimilarities, minimum spanning trees, sliding-window
//!   structural series, and hierarchical clustering.
//! - [`predict`]: trend-reversal probabilities, ROC/AUC evaluation, k-fold
//!   cross-validation, and simultaneous-reversal model comparison.

pub mod approx;
pub mod core;
pub mod crit;
pub mod error;
pub mod exact;
pub mod infer;
pub mod ingest;
pub mod mcmc;
pub mod predict;
pub mod topo;

pub use crate::core::{ConfigDistribution, Configuration, CouplingModel, MomentSet, SignPanel};
pub use crate::error::{MaxentError, Result};
