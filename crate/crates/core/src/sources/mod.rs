//! Outcome generators: quantum singlet sampling, counterfactual
//! spreadsheets, tennis-ball instruction sets and the contextual
//! local-deterministic model.

pub mod contextual;
pub mod singlet;
pub mod spreadsheet;
pub mod tennis;

pub use contextual::{
    contextual_trial, contextual_trial_with, ContextualParams, DeviceDist, Response, ResponseSpec, SourceDist, THRESHOLD_GAMMA,
    THRESHOLD_TAU0,
};
pub use singlet::{sample_singlet_pair, sample_smeared_pair, singlet_correlation, AngleJitter, JitterDensity};
pub use spreadsheet::{generate_cfd_spreadsheet, CfdRow, InstructionDist, Spreadsheet4};
pub use tennis::{generate_tennis_balls, BallPair, TennisModel, TennisVariant};
