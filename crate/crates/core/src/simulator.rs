//! Monte Carlo error-rate sweeps.
//!
//! Each trial draws `h1, h2 ~ N(0,1)`, symbols uniform on the constellation
//! and Gaussian noise whose variance follows the [`SnrConvention`]. The
//! default measures SNR against the unit spacing of the integer symbols,
//! `z ~ N(0, 1/snr)`: the same model as unit-variance noise with the
//! received lattice scaled by `sqrt(snr)`. The same `snr` feeds the Gram
//! matrix used for coefficient selection.
//!
//! Random streams: trial `t` of SNR point `p` uses a ChaCha8 generator keyed
//! by `seed` on stream `(p << 32) | t`. Outcomes depend only on
//! `(seed, p, t)`, never on how trials are scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::decoder::{decode_ida, decode_joint, decode_ml, DecoderSetup};
use crate::diophantine::{extended_gcd, Constellation};
use crate::error::{Error, Result};
use crate::lattice::{best_coefficients, ChannelState};

/// Points with fewer error events are left out of the diversity fit.
pub const MIN_FIT_ERRORS: u64 = 10;
const BATCH: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    ExactMl,
    Ida,
    Joint,
}

impl DecoderKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DecoderKind::ExactMl => "exact_ml",
            DecoderKind::Ida => "ida",
            DecoderKind::Joint => "joint",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_ml" => Ok(DecoderKind::ExactMl),
            "ida" => Ok(DecoderKind::Ida),
            "joint" => Ok(DecoderKind::Joint),
            other => Err(Error::InvalidInput(format!(
                "unknown decoder kind {other:?}"
            ))),
        }
    }
}

/// How a nominal SNR maps to the noise variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SnrConvention {
    /// `sigma^2 = 1 / snr`: SNR per unit symbol spacing.
    #[default]
    UnitSpacing,
    /// `sigma^2 = E_s / snr` with `E_s = s_m(s_m+1)/3`: per-source average power.
    AverageEnergy,
}

impl SnrConvention {
    pub fn noise_variance(&self, cons: &Constellation, snr_linear: f64) -> f64 {
        match self {
            SnrConvention::UnitSpacing => 1.0 / snr_linear,
            SnrConvention::AverageEnergy => cons.avg_energy() / snr_linear,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            SnrConvention::UnitSpacing => "unit_spacing",
            SnrConvention::AverageEnergy => "average_energy",
        }
    }
}

impl fmt::Display for SnrConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SnrConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit_spacing" => Ok(SnrConvention::UnitSpacing),
            "average_energy" => Ok(SnrConvention::AverageEnergy),
            other => Err(Error::InvalidInput(format!(
                "unknown SNR convention {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub s_m: i64,
    pub snr_db_points: Vec<f64>,
    pub trials_per_point: u64,
    pub seed: u64,
    pub decoder_kind: DecoderKind,
    /// Stop a point once this many errors were seen.
    pub max_error_events: Option<u64>,
    pub snr_convention: SnrConvention,
}

impl SimConfig {
    pub fn validate(&self) -> Result<Constellation> {
        let cons = Constellation::new(self.s_m)?;
        if self.trials_per_point == 0 {
            return Err(Error::InvalidInput(
                "trials_per_point must be at least 1".into(),
            ));
        }
        if self.trials_per_point > u32::MAX as u64 {
            return Err(Error::InvalidInput(format!(
                "trials_per_point above {}",
                u32::MAX
            )));
        }
        if self.snr_db_points.is_empty() {
            return Err(Error::InvalidInput("no SNR points given".into()));
        }
        if self.snr_db_points.len() > u32::MAX as usize {
            return Err(Error::InvalidInput("too many SNR points".into()));
        }
        if self.snr_db_points.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("SNR points must be finite".into()));
        }
        if self.snr_db_points.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "SNR points must be strictly increasing".into(),
            ));
        }
        if self.max_error_events == Some(0) {
            return Err(Error::InvalidInput(
                "max_error_events must be positive".into(),
            ));
        }
        Ok(cons)
    }
}

/// Outcome of one simulated channel use.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub h: [f64; 2],
    pub x: (i64, i64),
    pub y: f64,
    pub a: [i64; 2],
    pub rate_bits: f64,
    pub true_lambda: i64,
    /// Decoded equation value (ML and IDA decoders).
    pub lambda_hat: Option<i64>,
    /// Decoded symbol pair (joint decoder).
    pub joint_hat: Option<(i64, i64)>,
    pub error: bool,
    pub ambiguous: bool,
}

/// Generator for trial `trial` of SNR point `point`.
pub fn trial_rng(seed: u64, point: u32, trial: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((point as u64) << 32) | trial as u64);
    rng
}

/// A single reproducible `N(0, variance)` draw.
pub fn draw_noise(seed: u64, variance: f64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.sample::<f64, _>(StandardNormal) * variance.sqrt()
}

/// Simulates one relay observation and decodes it.
pub fn run_trial<R: Rng + ?Sized>(
    rng: &mut R,
    cons: &Constellation,
    snr_linear: f64,
    kind: DecoderKind,
    convention: SnrConvention,
) -> Result<TrialRecord> {
    if !(snr_linear > 0.0 && snr_linear.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "snr must be positive and finite, got {snr_linear}"
        )));
    }
    let noise_variance = convention.noise_variance(cons, snr_linear);
    let h1: f64 = rng.sample(StandardNormal);
    let h2: f64 = rng.sample(StandardNormal);
    let s = cons.s_m();
    let x1 = rng.random_range(-s..=s);
    let x2 = rng.random_range(-s..=s);
    let z: f64 = rng.sample::<f64, _>(StandardNormal) * noise_variance.sqrt();
    let y = h1 * x1 as f64 + h2 * x2 as f64 + z;

    let channel = ChannelState::new(vec![h1, h2], snr_linear, noise_variance)?;
    let coeff = best_coefficients(&channel)?;
    let a = [coeff.a[0], coeff.a[1]];
    let eq = extended_gcd(a[0], a[1])?;
    let true_lambda = eq.evaluate(x1, x2);
    let setup = DecoderSetup::new(channel, eq, *cons)?;

    let (lambda_hat, joint_hat, error, ambiguous) = match kind {
        DecoderKind::ExactMl | DecoderKind::Ida => {
            let res = if kind == DecoderKind::ExactMl {
                decode_ml(&setup, y)
            } else {
                decode_ida(&setup, y)
            };
            (
                Some(res.lambda_hat),
                None,
                res.lambda_hat != true_lambda,
                res.ambiguous,
            )
        }
        DecoderKind::Joint => {
            let pair = decode_joint(&setup, y);
            (None, Some(pair), pair != (x1, x2), false)
        }
    };
    Ok(TrialRecord {
        h: [h1, h2],
        x: (x1, x2),
        y,
        a,
        rate_bits: coeff.rate_bits,
        true_lambda,
        lambda_hat,
        joint_hat,
        error,
        ambiguous,
    })
}

/// Aggregate counts for one SNR point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointRecord {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub error_rate: f64,
    pub ambiguous_count: u64,
}

impl PointRecord {
    pub fn new(snr_db: f64, trials: u64, errors: u64, ambiguous_count: u64) -> Self {
        let error_rate = if trials == 0 {
            0.0
        } else {
            errors as f64 / trials as f64
        };
        Self {
            snr_db,
            trials,
            errors,
            error_rate,
            ambiguous_count,
        }
    }

    pub fn ambiguous_fraction(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.ambiguous_count as f64 / self.trials as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub points: Vec<PointRecord>,
    /// Negated log-log slope over the upper half of the SNR grid.
    pub fitted_diversity: Option<f64>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Serial,
    #[default]
    Parallel,
}

fn point_records(
    cfg: &SimConfig,
    cons: &Constellation,
    point: usize,
    exec: Execution,
) -> Result<Vec<TrialRecord>> {
    let snr = crate::db_to_linear(cfg.snr_db_points[point]);
    let one = |t: u64| {
        run_trial(
            &mut trial_rng(cfg.seed, point as u32, t as u32),
            cons,
            snr,
            cfg.decoder_kind,
            cfg.snr_convention,
        )
    };
    let mut out = Vec::new();
    let mut errors = 0u64;
    let mut start = 0u64;
    while start < cfg.trials_per_point {
        let end = (start + BATCH).min(cfg.trials_per_point);
        let batch: Vec<TrialRecord> = match exec {
            Execution::Serial => (start..end).map(one).collect::<Result<_>>()?,
            Execution::Parallel => (start..end)
                .into_par_iter()
                .map(one)
                .collect::<Result<_>>()?,
        };
        for rec in batch {
            errors += rec.error as u64;
            out.push(rec);
            if cfg.max_error_events.is_some_and(|cap| errors >= cap) {
                return Ok(out);
            }
        }
        start = end;
    }
    Ok(out)
}

/// Full trial records of one SNR point, honoring the early-stop cap.
pub fn run_point_records(
    cfg: &SimConfig,
    point: usize,
    exec: Execution,
) -> Result<Vec<TrialRecord>> {
    let cons = cfg.validate()?;
    if point >= cfg.snr_db_points.len() {
        return Err(Error::InvalidInput(format!(
            "SNR point index {point} out of range"
        )));
    }
    point_records(cfg, &cons, point, exec)
}

pub fn run_sweep(cfg: &SimConfig) -> Result<SimResult> {
    run_sweep_with(cfg, Execution::Parallel)
}

pub fn run_sweep_with(cfg: &SimConfig, exec: Execution) -> Result<SimResult> {
    let cons = cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.snr_db_points.len());
    for (p, &snr_db) in cfg.snr_db_points.iter().enumerate() {
        let recs = point_records(cfg, &cons, p, exec)?;
        points.push(summarize(snr_db, &recs));
    }
    let fitted_diversity = fit_diversity(&points);
    Ok(SimResult {
        points,
        fitted_diversity,
        seed: cfg.seed,
    })
}

fn summarize(snr_db: f64, recs: &[TrialRecord]) -> PointRecord {
    let errors = recs.iter().filter(|r| r.error).count() as u64;
    let ambiguous = recs.iter().filter(|r| r.ambiguous).count() as u64;
    PointRecord::new(snr_db, recs.len() as u64, errors, ambiguous)
}

/// Least-squares diversity estimate: `-slope` of `log10(error_rate)` against
/// `log10(snr)` over points in the upper half of the SNR range that saw at
/// least [`MIN_FIT_ERRORS`] errors. `None` with fewer than two such points.
pub fn fit_diversity(points: &[PointRecord]) -> Option<f64> {
    let (first, last) = (points.first()?.snr_db, points.last()?.snr_db);
    let mid = 0.5 * (first + last);
    let xy: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.snr_db >= mid && p.errors >= MIN_FIT_ERRORS && p.error_rate > 0.0)
        .map(|p| (p.snr_db / 10.0, p.error_rate.log10()))
        .collect();
    if xy.len() < 2 {
        return None;
    }
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Some(-sxy / sxx)
}

/// Fraction of ambiguous decisions per SNR point, as `(snr_db, fraction)`.
pub fn ambiguity_census(cfg: &SimConfig) -> Result<Vec<(f64, f64)>> {
    if cfg.decoder_kind == DecoderKind::Joint {
        return Err(Error::InvalidInput(
            "ambiguity census needs the exact_ml or ida decoder".into(),
        ));
    }
    let res = run_sweep(cfg)?;
    Ok(res
        .points
        .iter()
        .map(|p| (p.snr_db, p.ambiguous_fraction()))
        .collect())
}

/// Census recomputed from stored trial records grouped by SNR point.
pub fn census_from_records(groups: &[(f64, Vec<TrialRecord>)]) -> Vec<(f64, f64)> {
    groups
        .iter()
        .filter(|(_, recs)| !recs.is_empty())
        .map(|(snr, recs)| (*snr, summarize(*snr, recs).ambiguous_fraction()))
        .collect()
}
