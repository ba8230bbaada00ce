//! PAC ranking from multiwise preferences under the Plackett-Luce model.
//!
//! The crate provides the choice model and its feedback oracle, the
//! pairwise and renewal estimators, the pivot search and two ranking
//! learners, ground-truth evaluation, and a seeded experiment harness.

pub mod algorithms;
pub mod error;
pub mod estimators;
pub mod evaluation;
pub mod harness;
pub mod oracle;
pub mod pl;
pub mod rng;

pub use algorithms::{
    beat_the_pivot, find_the_pivot, score_and_rank, AlgorithmOptions, PacParams, PivotOutcome,
    RankOutcome, Snapshot,
};
pub use error::{Error, Result};
pub use oracle::{FeedbackMode, PreferenceOracle, QueryOracle};
pub use pl::{Item, PlInstance, Ranking, Subset, TopMRanking};
