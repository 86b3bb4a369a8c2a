//! Compute-and-forward relaying for real-valued Gaussian channels with
//! integer constellations.
//!
//! The relay observes `y = h1*x1 + h2*x2 + z`, picks the integer coefficient
//! vector `a` maximizing the computation rate (a shortest-vector search in the
//! lattice with Gram matrix `G`), and decodes the equation value
//! `lambda = a1*x1 + a2*x2` either by exact maximum likelihood or by the
//! inhomogeneous Diophantine approximation metric `|y - beta*lambda + k*alpha|`.
//!
//! * [`lattice`]: Gram matrix, computation rate, exact Fincke-Pohst SVP.
//! * [`diophantine`]: extended Euclid, solution family, constellation limits.
//! * [`decoder`]: likelihood profile, ML / IDA / joint decoders.
//! * [`simulator`]: seeded Monte Carlo SNR sweeps and diversity fits.
//! * [`report`]: CSV and run-manifest serialization.

pub mod decoder;
pub mod diophantine;
mod error;
pub mod lattice;
pub mod report;
pub mod simulator;

pub use decoder::{
    decode_ida, decode_joint, decode_ml, ida_metrics, likelihood_profile, DecodeResult,
    DecoderSetup,
};
pub use diophantine::{
    extended_gcd, feasible_k_range, lambda_alphabet, solution_family, Constellation,
    EquationCoeffs, KRange,
};
pub use error::{Error, Result};
pub use lattice::{
    best_coefficients, build_gram, computation_rate, shortest_vector, ChannelState, CoeffResult,
    GramLattice,
};
pub use simulator::{
    ambiguity_census, run_sweep, run_sweep_with, run_trial, DecoderKind, Execution, PointRecord,
    SimConfig, SimResult, SnrConvention, TrialRecord,
};

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}
