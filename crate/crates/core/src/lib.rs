//! Numerical laboratory for generalization bounds, capacity measures and
//! soft inductive biases.
//!
//! Modules:
//! - [`bounds`]: countable-hypothesis and PAC-Bayes bounds, plus a
//!   Monte-Carlo check of their coverage.
//! - [`capacity`]: Rademacher complexity, VC and fat-shattering searches.
//! - [`softbias`]: polynomial regression with ordered penalties.
//! - [`double_descent`]: random-feature regression and spectral tools.
//! - [`evidence`]: Gaussian-process marginal likelihood.
//! - [`compression`]: turning a model into complexity bits.

pub mod bounds;
pub mod capacity;
pub mod compression;
pub mod double_descent;
pub mod error;
pub mod evidence;
pub mod linalg;
pub mod rng;
pub mod softbias;

pub use bounds::{BoundKind, BoundReport, PriorMass, PriorSource, RiskSpec};
pub use capacity::{CapacityEstimate, FiniteHypothesisClass, Measure, Method};
pub use compression::CompressedArtifact;
pub use double_descent::{RandomFeatureEnsemble, SpectrumSummary};
pub use error::{Error, Result};
pub use evidence::{EvidenceRecord, KernelSpec};
pub use softbias::{PolynomialModel, RegularizerSpec};
