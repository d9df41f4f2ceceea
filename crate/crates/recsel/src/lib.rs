//! Per-user algorithm selection for recommender systems.
//!
//! The pipeline: ingest interaction logs ([`dataset`]), fit a portfolio of
//! recommenders ([`portfolio`]), evaluate every (user, algorithm) pair into a
//! performance matrix ([`ground_truth`]), describe users ([`user_features`])
//! and algorithm implementations ([`code_metrics`]) with meta-features, train
//! gradient-boosted meta-learners that pick an algorithm per user
//! ([`meta_learner`]), and report selector quality against the single-best
//! and oracle baselines under user-grouped cross-validation ([`experiment`]).
//!
//! See the `examples/` directory for one runnable example per stage, or the
//! `recsel` binary for the subcommand interface.

pub mod cache;
pub mod cli;
pub mod code_metrics;
pub mod dataset;
pub mod error;
pub mod experiment;
pub mod ground_truth;
pub mod meta_learner;
pub mod portfolio;
pub mod user_features;

pub use error::{Error, Result};
