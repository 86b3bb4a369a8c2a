//! Two-variable linear Diophantine equations `a1*x1 + a2*x2 = lambda`
//! restricted to a finite integer constellation.

use std::collections::BTreeSet;
use std::ops::RangeInclusive;

use crate::error::{Error, Result};

/// Symmetric integer constellation `{-s_m, ..., s_m}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Constellation {
    s_m: i64,
}

impl Constellation {
    pub fn new(s_m: i64) -> Result<Self> {
        if s_m < 1 {
            return Err(Error::InvalidInput(format!(
                "s_m must be at least 1, got {s_m}"
            )));
        }
        Ok(Self { s_m })
    }

    pub fn s_m(&self) -> i64 {
        self.s_m
    }

    /// Mean square of the uniform distribution on the symbols, `s_m(s_m+1)/3`.
    pub fn avg_energy(&self) -> f64 {
        (self.s_m * (self.s_m + 1)) as f64 / 3.0
    }

    pub fn contains(&self, x: i64) -> bool {
        x.abs() <= self.s_m
    }

    pub fn symbols(&self) -> RangeInclusive<i64> {
        -self.s_m..=self.s_m
    }

    pub fn size(&self) -> usize {
        (2 * self.s_m + 1) as usize
    }
}

/// Equation coefficients with their gcd and a Bezout pair,
/// `a1*u1 + a2*u2 = g`, `g > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EquationCoeffs {
    a1: i64,
    a2: i64,
    g: i64,
    u1: i64,
    u2: i64,
}

impl EquationCoeffs {
    pub fn a1(&self) -> i64 {
        self.a1
    }
    pub fn a2(&self) -> i64 {
        self.a2
    }
    pub fn gcd(&self) -> i64 {
        self.g
    }
    pub fn u1(&self) -> i64 {
        self.u1
    }
    pub fn u2(&self) -> i64 {
        self.u2
    }

    /// Same coefficients with a caller-chosen Bezout pair.
    pub fn with_bezout(a1: i64, a2: i64, u1: i64, u2: i64) -> Result<Self> {
        let base = extended_gcd(a1, a2)?;
        if a1 * u1 + a2 * u2 != base.g {
            return Err(Error::InvalidInput(format!(
                "({u1},{u2}) is not a Bezout pair for ({a1},{a2})"
            )));
        }
        Ok(Self { u1, u2, ..base })
    }

    /// Moves to another Bezout pair, `u -> u + t*(a2/g, -a1/g)`.
    pub fn shifted_bezout(&self, t: i64) -> Self {
        Self {
            u1: self.u1 + t * self.a2 / self.g,
            u2: self.u2 - t * self.a1 / self.g,
            ..*self
        }
    }

    /// Coefficients `-a` with Bezout pair `-u`.
    pub fn negated(&self) -> Self {
        Self {
            a1: -self.a1,
            a2: -self.a2,
            u1: -self.u1,
            u2: -self.u2,
            g: self.g,
        }
    }

    pub fn evaluate(&self, x1: i64, x2: i64) -> i64 {
        self.a1 * x1 + self.a2 * x2
    }

    fn check_divides(&self, lambda: i64) -> Result<()> {
        if lambda % self.g != 0 {
            return Err(Error::NoSolution {
                gcd: self.g,
                lambda,
            });
        }
        Ok(())
    }
}

/// Extended Euclid: `g = gcd(|a1|, |a2|) > 0` and `(u1, u2)` with
/// `a1*u1 + a2*u2 = g`.
pub fn extended_gcd(a1: i64, a2: i64) -> Result<EquationCoeffs> {
    if a1 == 0 && a2 == 0 {
        return Err(Error::InvalidInput("coefficients (0,0) have no gcd".into()));
    }
    let (mut old_r, mut r) = (a1, a2);
    let (mut old_s, mut s) = (1i64, 0i64);
    let (mut old_t, mut t) = (0i64, 1i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        old_r = -old_r;
        old_s = -old_s;
        old_t = -old_t;
    }
    Ok(EquationCoeffs {
        a1,
        a2,
        g: old_r,
        u1: old_s,
        u2: old_t,
    })
}

/// The `k`-th member of the solution family of `a1*x1 + a2*x2 = lambda`:
/// `x1 = (u1*lambda + a2*k)/g`, `x2 = (u2*lambda - a1*k)/g`.
pub fn solution_family(coeffs: &EquationCoeffs, lambda: i64, k: i64) -> Result<(i64, i64)> {
    coeffs.check_divides(lambda)?;
    let m = lambda / coeffs.g;
    let x1 = coeffs.u1 * m + (coeffs.a2 / coeffs.g) * k;
    let x2 = coeffs.u2 * m - (coeffs.a1 / coeffs.g) * k;
    Ok((x1, x2))
}

/// Inclusive interval of integers; empty when `lo > hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KRange {
    pub lo: i64,
    pub hi: i64,
}

impl KRange {
    pub const EMPTY: KRange = KRange { lo: 1, hi: 0 };

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi
    }

    pub fn contains(&self, k: i64) -> bool {
        self.lo <= k && k <= self.hi
    }

    pub fn len(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.hi - self.lo + 1) as usize
        }
    }

    pub fn iter(&self) -> RangeInclusive<i64> {
        self.lo..=self.hi
    }
}

fn div_floor(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

fn div_ceil(a: i64, b: i64) -> i64 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) == (b < 0)) {
        q + 1
    } else {
        q
    }
}

/// Narrows `[lo, hi]` to the `k` with `-s <= base + step*k <= s`.
fn clip(lo: &mut i64, hi: &mut i64, base: i64, step: i64, s: i64) {
    match step {
        0 => {
            if base.abs() > s {
                *lo = 1;
                *hi = 0;
            }
        }
        p if p > 0 => {
            *lo = (*lo).max(div_ceil(-s - base, p));
            *hi = (*hi).min(div_floor(s - base, p));
        }
        p => {
            *lo = (*lo).max(div_ceil(s - base, p));
            *hi = (*hi).min(div_floor(-s - base, p));
        }
    }
}

/// All `k` whose family member lies in the constellation, as one interval.
pub fn feasible_k_range(
    coeffs: &EquationCoeffs,
    lambda: i64,
    cons: &Constellation,
) -> Result<KRange> {
    coeffs.check_divides(lambda)?;
    let m = lambda / coeffs.g;
    let s = cons.s_m();
    let (mut lo, mut hi) = (i64::MIN, i64::MAX);
    clip(&mut lo, &mut hi, coeffs.u1 * m, coeffs.a2 / coeffs.g, s);
    clip(&mut lo, &mut hi, coeffs.u2 * m, -coeffs.a1 / coeffs.g, s);
    if lo > hi {
        return Ok(KRange::EMPTY);
    }
    Ok(KRange { lo, hi })
}

/// Sorted, deduplicated set of equation values reachable from the constellation.
pub fn lambda_alphabet(coeffs: &EquationCoeffs, cons: &Constellation) -> Vec<i64> {
    let mut set = BTreeSet::new();
    for x1 in cons.symbols() {
        for x2 in cons.symbols() {
            set.insert(coeffs.evaluate(x1, x2));
        }
    }
    set.into_iter().collect()
}
