//! Multi-bubble approximation W, interaction exponents Theta and the residual.

mod config;
mod fields;

pub use config::{BlowupConfig, Potential};
pub use fields::{
    assemble_ansatz, bubble_gap_rate, lp_norm, residual, residual_rate, schedule, theta,
    AnsatzFields, ResidualReport, Schedule, ThetaProfile,
};
