//! Monte Carlo laboratory for two-station spin/polarization correlation
//! experiments.
//!
//! The crate simulates outcome streams under quantum, counterfactual
//! (instruction-set) and contextual local models, builds coincidence samples
//! from them, estimates Bell-type statistics on finite samples, runs the
//! repeated-run challenge protocols and the Bell game, and provides the
//! significance and sample-homogeneity tooling needed to judge the results.
//!
//! Every stochastic entry point takes a [`SeededRng`]; the same seed and
//! stream id reproduce bit-identical output.

pub mod bellgame;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimators;
pub mod io;
pub mod pairing;
pub mod parallel;
pub mod randi;
pub mod rng;
pub mod sources;
pub mod stats;
pub mod summary;
pub mod types;

pub use error::{Error, Result};
pub use rng::SeededRng;
pub use types::{tabulate, Angle, CountTable, Outcome, PairedTrial, Setting, StationEvent};

/// Crate version, embedded in every JSON summary.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
