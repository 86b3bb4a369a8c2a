//! Recovering the equation value `lambda = a1*x1 + a2*x2` from `y`.
//!
//! Every constellation pair `(x1, x2)` with `a1*x1 + a2*x2 = lambda` is the
//! member `k` of the solution family, and for it
//! `h1*x1 + h2*x2 = beta*lambda - k*alpha`. Both decoders work on the
//! residual `y - beta*lambda + k*alpha` over the constellation-feasible
//! `(lambda, k)` pairs.

use std::cmp::Ordering;

use crate::diophantine::{
    feasible_k_range, lambda_alphabet, Constellation, EquationCoeffs, KRange,
};
use crate::error::{Error, Result};
use crate::lattice::ChannelState;

/// Relative likelihood gap below which the ML decision is flagged ambiguous.
pub const ML_AMBIGUITY_RTOL: f64 = 1e-9;
/// Absolute metric gap below which the IDA decision is flagged ambiguous.
pub const IDA_AMBIGUITY_ATOL: f64 = 1e-9;
/// Scores or metrics this close are treated as exact ties.
const TIE_TOL: f64 = 1e-12;

/// Everything the decoders need for one channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderSetup {
    channel: ChannelState,
    coeffs: EquationCoeffs,
    cons: Constellation,
    alpha: f64,
    beta: f64,
    xi: [f64; 2],
    alphabet: Vec<i64>,
}

impl DecoderSetup {
    pub fn new(channel: ChannelState, coeffs: EquationCoeffs, cons: Constellation) -> Result<Self> {
        if channel.dimension() != 2 {
            return Err(Error::InvalidInput(format!(
                "decoding needs exactly 2 sources, channel has {}",
                channel.dimension()
            )));
        }
        let [h1, h2] = [channel.h()[0], channel.h()[1]];
        let g = coeffs.gcd() as f64;
        let (a1, a2) = (coeffs.a1() as f64, coeffs.a2() as f64);
        let alpha = (h2 * a1 - h1 * a2) / g;
        let beta = (h1 * coeffs.u1() as f64 + h2 * coeffs.u2() as f64) / g;
        let xi = [h1 - a1, h2 - a2];
        let alphabet = lambda_alphabet(&coeffs, &cons);
        Ok(Self {
            channel,
            coeffs,
            cons,
            alpha,
            beta,
            xi,
            alphabet,
        })
    }

    pub fn channel(&self) -> &ChannelState {
        &self.channel
    }
    pub fn coeffs(&self) -> &EquationCoeffs {
        &self.coeffs
    }
    pub fn constellation(&self) -> &Constellation {
        &self.cons
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn beta(&self) -> f64 {
        self.beta
    }
    /// Fractional channel parts `h_i - a_i`.
    pub fn xi(&self) -> [f64; 2] {
        self.xi
    }
    pub fn alphabet(&self) -> &[i64] {
        &self.alphabet
    }

    /// `alpha / beta`, undefined when `beta == 0`.
    pub fn alpha_prime(&self) -> Option<f64> {
        (self.beta != 0.0).then(|| self.alpha / self.beta)
    }

    /// `y / beta`, undefined when `beta == 0`.
    pub fn y_prime(&self, y: f64) -> Option<f64> {
        (self.beta != 0.0).then(|| y / self.beta)
    }

    pub fn residual(&self, y: f64, lambda: i64, k: i64) -> f64 {
        y - self.beta * lambda as f64 + k as f64 * self.alpha
    }

    fn k_range(&self, lambda: i64) -> KRange {
        // alphabet members are always multiples of g
        feasible_k_range(&self.coeffs, lambda, &self.cons).unwrap_or(KRange::EMPTY)
    }

    /// Feasible `k` minimizing `|residual|`; smallest `k` on ties.
    fn nearest_k(&self, y: f64, lambda: i64, range: KRange) -> (i64, f64) {
        let mut best = (range.lo, self.residual(y, lambda, range.lo).abs());
        if self.alpha != 0.0 {
            // |residual| is convex in k, so its minimizer is next to the real root
            let root = (self.beta * lambda as f64 - y) / self.alpha;
            let guess = root.round().clamp(range.lo as f64, range.hi as f64) as i64;
            for k in [guess - 1, guess, guess + 1] {
                if !range.contains(k) {
                    continue;
                }
                let m = self.residual(y, lambda, k).abs();
                if m < best.1 || (m == best.1 && k < best.0) {
                    best = (k, m);
                }
            }
        }
        best
    }
}

/// Outcome of an equation decoder.
#[derive(Debug, Clone, PartialEq)]
pub struct DecodeResult {
    pub lambda_hat: i64,
    /// Achieved `|y - beta*lambda_hat + k_hat*alpha|`.
    pub metric: f64,
    pub k_hat: i64,
    pub ambiguous: bool,
    /// ML: relative score gap to the runner-up. IDA: absolute metric gap.
    pub runner_up_gap: f64,
}

/// Preference order among tied equation values: smallest `|lambda|`, then smallest `lambda`.
fn lambda_order(a: i64, b: i64) -> Ordering {
    a.abs().cmp(&b.abs()).then(a.cmp(&b))
}

/// Unnormalized likelihood `sum_k exp(-(y - beta*lambda + k*alpha)^2 / (2 sigma^2))`
/// for every equation value, summed over constellation-feasible `k` only.
pub fn likelihood_profile(setup: &DecoderSetup, y: f64) -> Vec<(i64, f64)> {
    let two_var = 2.0 * setup.channel.noise_variance();
    setup
        .alphabet
        .iter()
        .map(|&lambda| {
            let score = setup
                .k_range(lambda)
                .iter()
                .map(|k| {
                    let r = setup.residual(y, lambda, k);
                    (-r * r / two_var).exp()
                })
                .sum();
            (lambda, score)
        })
        .collect()
}

/// Natural log of the profile score, stable when the scores underflow.
fn log_score(setup: &DecoderSetup, y: f64, lambda: i64, range: KRange) -> f64 {
    let two_var = 2.0 * setup.channel.noise_variance();
    let exps: Vec<f64> = range
        .iter()
        .map(|k| {
            let r = setup.residual(y, lambda, k);
            -r * r / two_var
        })
        .collect();
    let peak = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    peak + exps.iter().map(|e| (e - peak).exp()).sum::<f64>().ln()
}

/// Exact maximum-likelihood equation decoder.
pub fn decode_ml(setup: &DecoderSetup, y: f64) -> DecodeResult {
    let scored: Vec<(i64, f64)> = setup
        .alphabet
        .iter()
        .map(|&lambda| (lambda, log_score(setup, y, lambda, setup.k_range(lambda))))
        .collect();

    let mut best = scored[0];
    for &(lambda, ls) in &scored[1..] {
        let tol = TIE_TOL * best.1.abs().max(1.0);
        if ls > best.1 + tol
            || ((ls - best.1).abs() <= tol && lambda_order(lambda, best.0) == Ordering::Less)
        {
            best = (lambda, ls);
        }
    }
    let runner_up = scored
        .iter()
        .filter(|(l, _)| *l != best.0)
        .map(|&(_, ls)| ls)
        .fold(f64::NEG_INFINITY, f64::max);
    // 1 - s2/s1, computed in the log domain
    let gap = (-(runner_up - best.1).min(0.0).exp_m1()).clamp(0.0, 1.0);

    let (k_hat, metric) = setup.nearest_k(y, best.0, setup.k_range(best.0));
    DecodeResult {
        lambda_hat: best.0,
        metric,
        k_hat,
        ambiguous: gap < ML_AMBIGUITY_RTOL,
        runner_up_gap: gap,
    }
}

/// Best feasible `k` and its metric `|y - beta*lambda + k*alpha|` for every
/// equation value that has a constellation-feasible solution.
pub fn ida_metrics(setup: &DecoderSetup, y: f64) -> Vec<(i64, i64, f64)> {
    setup
        .alphabet
        .iter()
        .filter_map(|&lambda| {
            let range = setup.k_range(lambda);
            (!range.is_empty()).then(|| {
                let (k, m) = setup.nearest_k(y, lambda, range);
                (lambda, k, m)
            })
        })
        .collect()
}

/// Inhomogeneous Diophantine approximation decoder: the feasible `(lambda, k)`
/// minimizing `|y - beta*lambda + k*alpha|`.
pub fn decode_ida(setup: &DecoderSetup, y: f64) -> DecodeResult {
    let per_lambda = ida_metrics(setup, y);

    let tol = TIE_TOL * y.abs().max(1.0);
    let mut best = per_lambda[0];
    for &cand in &per_lambda[1..] {
        if cand.2 < best.2 - tol
            || ((cand.2 - best.2).abs() <= tol && lambda_order(cand.0, best.0) == Ordering::Less)
        {
            best = cand;
        }
    }
    let runner_up = per_lambda
        .iter()
        .filter(|c| c.0 != best.0)
        .map(|c| c.2)
        .fold(f64::INFINITY, f64::min);
    let gap = (runner_up - best.2).max(0.0);
    DecodeResult {
        lambda_hat: best.0,
        metric: best.2,
        k_hat: best.1,
        ambiguous: gap < IDA_AMBIGUITY_ATOL,
        runner_up_gap: gap,
    }
}

/// Decodes both symbols: the constellation pair nearest to `y`,
/// lexicographically first on exact ties.
pub fn decode_joint(setup: &DecoderSetup, y: f64) -> (i64, i64) {
    let [h1, h2] = [setup.channel.h()[0], setup.channel.h()[1]];
    let mut best = (0, 0);
    let mut best_d = f64::INFINITY;
    for x1 in setup.cons.symbols() {
        for x2 in setup.cons.symbols() {
            let r = y - h1 * x1 as f64 - h2 * x2 as f64;
            let d = r * r;
            if d < best_d {
                best_d = d;
                best = (x1, x2);
            }
        }
    }
    best
}
