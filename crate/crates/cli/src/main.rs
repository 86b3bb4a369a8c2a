//! `cnf`: coefficient selection, likelihood dumps and Monte Carlo sweeps
//! for compute-and-forward relaying.

mod manifest;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use compute_forward::report::{write_profile_csv, write_sweep_csv, ProfileRow};
use compute_forward::simulator::draw_noise;
use compute_forward::{
    best_coefficients, db_to_linear, decode_ida, decode_ml, extended_gcd, ida_metrics,
    likelihood_profile, run_sweep_with, ChannelState, Constellation, DecoderKind, DecoderSetup,
    Execution, SimConfig, SnrConvention,
};

use crate::manifest::{sidecar_path, RunManifest};

const EXIT_USAGE: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical error: {m}"),
        }
    }
}

impl From<compute_forward::Error> for CliError {
    fn from(e: compute_forward::Error) -> Self {
        match e {
            compute_forward::Error::Numerical(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    }
}

fn io_error(path: &Path, e: io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

/// Comma-separated channel gains, e.g. `-1.274,0.602`.
#[derive(Debug, Clone, PartialEq)]
struct Gains(Vec<f64>);

impl FromStr for Gains {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let vals = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("bad channel gain {t:?}: {e}"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        if vals.len() < 2 {
            return Err("need at least two channel gains".into());
        }
        if vals.iter().any(|v| !v.is_finite()) {
            return Err("channel gains must be finite".into());
        }
        Ok(Gains(vals))
    }
}

impl std::fmt::Display for Gains {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Parser)]
#[command(
    name = "cnf",
    version,
    about = "Compute-and-forward relay toolkit",
    allow_negative_numbers = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate-maximizing coefficient vector for a channel.
    Rate(RateArgs),
    /// Per-equation likelihood and IDA metric for one observation.
    Likelihood(LikelihoodArgs),
    /// Monte Carlo error-rate sweep over SNR.
    Simulate(SimulateArgs),
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct RateArgs {
    /// Channel gains, comma separated.
    #[arg(long, allow_hyphen_values = true)]
    h: Gains,
    #[arg(long)]
    snr_db: f64,
    /// Write CSV here (plus a `.manifest` sidecar) instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct LikelihoodArgs {
    #[arg(long, allow_hyphen_values = true)]
    h: Gains,
    #[arg(long)]
    snr_db: f64,
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    sm: i64,
    #[arg(long, required_unless_present = "y")]
    x1: Option<i64>,
    #[arg(long, required_unless_present = "y")]
    x2: Option<i64>,
    /// Seed of the noise draw added to `h1*x1 + h2*x2`.
    #[arg(long, default_value_t = 0, conflicts_with = "y")]
    seed: u64,
    /// Use this observation directly instead of sampling.
    #[arg(long, conflicts_with_all = ["x1", "x2"])]
    y: Option<f64>,
    #[arg(long, default_value = "unit_spacing")]
    snr_convention: SnrConvention,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    sm: i64,
    #[arg(long)]
    snr_db_start: f64,
    #[arg(long)]
    snr_db_stop: f64,
    #[arg(long)]
    snr_db_step: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..=u32::MAX as u64))]
    trials: u64,
    #[arg(long, default_value = "ida")]
    decoder: DecoderKind,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Stop a point after this many errors.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    max_errors: Option<u64>,
    #[arg(long, default_value = "unit_spacing")]
    snr_convention: SnrConvention,
    /// Run trials on one thread (results are identical either way).
    #[arg(long)]
    serial: bool,
}

/// Writes `body` to `out` with a manifest sidecar, or to stdout with the
/// manifest as `#` lines on stderr.
fn emit(out: Option<&Path>, manifest: &RunManifest, body: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| io_error(path, e))?;
            let side = sidecar_path(path);
            std::fs::write(&side, manifest.render()).map_err(|e| io_error(&side, e))?;
        }
        None => {
            io::stdout()
                .write_all(body)
                .map_err(|e| CliError::Io(e.to_string()))?;
            let mut err = io::stderr();
            for line in manifest.render().lines() {
                let _ = writeln!(err, "# {line}");
            }
        }
    }
    Ok(())
}

fn cmd_rate(args: &RateArgs) -> Result<(), CliError> {
    let ch = ChannelState::with_unit_noise(args.h.0.clone(), db_to_linear(args.snr_db))?;
    let res = best_coefficients(&ch)?;
    let mut header: Vec<String> = (1..=res.a.len()).map(|i| format!("a{i}")).collect();
    header.extend(["quadratic_form", "rate_bits", "rate_clamped"].map(String::from));
    let mut row: Vec<String> = res.a.iter().map(|v| v.to_string()).collect();
    row.extend([
        res.quadratic_form.to_string(),
        res.rate_bits.to_string(),
        res.rate_clamped().to_string(),
    ]);
    let body = format!("{}\n{}\n", header.join(","), row.join(","));
    let manifest = RunManifest::new("rate", None)
        .param("h", &args.h)
        .param("snr_db", args.snr_db);
    emit(args.out.as_deref(), &manifest, body.as_bytes())
}

fn cmd_likelihood(args: &LikelihoodArgs) -> Result<(), CliError> {
    if args.h.0.len() != 2 {
        return Err(CliError::Usage(
            "likelihood needs exactly two channel gains".into(),
        ));
    }
    let cons = Constellation::new(args.sm)?;
    let snr = db_to_linear(args.snr_db);
    let var = args.snr_convention.noise_variance(&cons, snr);
    let ch = ChannelState::new(args.h.0.clone(), snr, var)?;
    let y = match (args.y, args.x1, args.x2) {
        (Some(y), _, _) => y,
        (None, Some(x1), Some(x2)) => {
            for x in [x1, x2] {
                if !cons.contains(x) {
                    return Err(CliError::Usage(format!(
                        "symbol {x} outside constellation of s_m={}",
                        args.sm
                    )));
                }
            }
            args.h.0[0] * x1 as f64 + args.h.0[1] * x2 as f64 + draw_noise(args.seed, var)
        }
        _ => return Err(CliError::Usage("give --x1 and --x2, or --y".into())),
    };
    let coeff = best_coefficients(&ch)?;
    let eq = extended_gcd(coeff.a[0], coeff.a[1])?;
    let setup = DecoderSetup::new(ch, eq, cons)?;
    let profile = likelihood_profile(&setup, y);
    let metrics = ida_metrics(&setup, y);
    let rows: Vec<ProfileRow> = profile
        .iter()
        .zip(&metrics)
        .map(|(&(lambda, score_ml), &(_, _, metric_ida))| ProfileRow {
            lambda,
            score_ml,
            metric_ida,
        })
        .collect();
    let mut body = Vec::new();
    write_profile_csv(&mut body, &rows).map_err(|e| CliError::Io(e.to_string()))?;

    let ml = decode_ml(&setup, y);
    let ida = decode_ida(&setup, y);
    let mut manifest = RunManifest::new("likelihood", args.y.is_none().then_some(args.seed))
        .param("h", &args.h)
        .param("snr_db", args.snr_db)
        .param("sm", args.sm)
        .param("snr_convention", args.snr_convention)
        .param("noise_variance", var);
    if let (Some(x1), Some(x2)) = (args.x1, args.x2) {
        manifest = manifest.param("x1", x1).param("x2", x2);
    }
    manifest = manifest
        .param("y", y)
        .param("a", format!("{},{}", coeff.a[0], coeff.a[1]))
        .param("lambda_ml", ml.lambda_hat)
        .param("ml_ambiguous", ml.ambiguous)
        .param("lambda_ida", ida.lambda_hat);
    emit(args.out.as_deref(), &manifest, &body)
}

fn snr_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(CliError::Usage(format!(
            "invalid SNR grid {start}..{stop} step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| start + i as f64 * step).collect())
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let cfg = SimConfig {
        s_m: args.sm,
        snr_db_points: snr_grid(args.snr_db_start, args.snr_db_stop, args.snr_db_step)?,
        trials_per_point: args.trials,
        seed: args.seed,
        decoder_kind: args.decoder,
        max_error_events: args.max_errors,
        snr_convention: args.snr_convention,
    };
    let exec = if args.serial {
        Execution::Serial
    } else {
        Execution::Parallel
    };
    let res = run_sweep_with(&cfg, exec)?;

    let file = File::create(&args.out).map_err(|e| io_error(&args.out, e))?;
    write_sweep_csv(BufWriter::new(file), &res.points).map_err(|e| io_error(&args.out, e))?;
    let diversity = res
        .fitted_diversity
        .map_or_else(|| "absent".to_string(), |d| d.to_string());
    let manifest = RunManifest::new("simulate", Some(args.seed))
        .param("sm", args.sm)
        .param("snr_db_start", args.snr_db_start)
        .param("snr_db_stop", args.snr_db_stop)
        .param("snr_db_step", args.snr_db_step)
        .param("trials", args.trials)
        .param("decoder", args.decoder)
        .param(
            "max_errors",
            args.max_errors
                .map_or("none".to_string(), |m| m.to_string()),
        )
        .param("snr_convention", args.snr_convention)
        .param("serial", args.serial)
        .param("out", args.out.display())
        .param("fitted_diversity", &diversity);
    let side = sidecar_path(&args.out);
    std::fs::write(&side, manifest.render()).map_err(|e| io_error(&side, e))?;
    println!("fitted_diversity={diversity}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = match &cli.command {
        Command::Rate(a) => cmd_rate(a),
        Command::Likelihood(a) => cmd_likelihood(a),
        Command::Simulate(a) => cmd_simulate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cnf: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gains_parse() {
        assert_eq!(
            "-1.274, 0.602".parse::<Gains>().unwrap(),
            Gains(vec![-1.274, 0.602])
        );
        assert!("1".parse::<Gains>().is_err());
        assert!("1,x".parse::<Gains>().is_err());
        assert!("1,inf".parse::<Gains>().is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = snr_grid(20.0, 40.0, 2.5).unwrap();
        assert_eq!(g.len(), 9);
        assert_eq!(g[8], 40.0);
        assert!(snr_grid(20.0, 10.0, 1.0).is_err());
        assert!(snr_grid(0.0, 1.0, 0.0).is_err());
    }
}
