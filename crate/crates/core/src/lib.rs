//! Belief elicitation under incentive schemes: optimal reports, Bayesian
//! updating, a stylized two-group example, a hierarchical population model
//! and a simulated identification experiment.

pub mod distributions;
pub mod elicitation;
pub mod error;
pub mod hierarchical;
pub mod identification;
pub mod optimize;
pub mod rng;
pub mod special;
pub mod stylized;
pub mod updating;

pub use distributions::{Atom, BeliefDistribution, BetaBelief, DiscreteBelief, Interval};
pub use elicitation::{ReportSolution, Scheme};
pub use error::{Error, Result};
pub use hierarchical::{FitResult, HyperParams, ModeDataset, QuantifyResult};
pub use identification::{ExperimentConfig, PanelData, Population, RegressionResult, Regressor};
pub use stylized::{AgentGroup, ScVerdict, StylizedOutcome};
pub use updating::{BinomialSignal, Direction, Signal, UniformSignal};
