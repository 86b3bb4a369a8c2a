//! Brute-force oracles shared by the integration tests. Each one works
//! straight from the model definitions and never calls into the code paths
//! it is used to check.
#![allow(dead_code, clippy::needless_range_loop)]

/// Dense `G = I - snr/(1+snr|h|^2) h h^T`, computed independently.
pub fn gram_oracle(h: &[f64], snr: f64) -> Vec<Vec<f64>> {
    let n2: f64 = h.iter().map(|v| v * v).sum();
    let c = snr / (1.0 + snr * n2);
    (0..h.len())
        .map(|i| {
            (0..h.len())
                .map(|j| if i == j { 1.0 } else { 0.0 } - c * h[i] * h[j])
                .collect()
        })
        .collect()
}

pub fn form(g: &[Vec<f64>], a: &[i64]) -> f64 {
    let n = a.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += a[i] as f64 * g[i][j] * a[j] as f64;
        }
    }
    s
}

/// Smallest eigenvalue of a symmetric matrix by Jacobi rotations (N <= 3 here).
pub fn min_eigenvalue(g: &[Vec<f64>]) -> f64 {
    let n = g.len();
    let mut m: Vec<Vec<f64>> = g.to_vec();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += m[i][j] * m[i][j];
                }
            }
        }
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if m[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q][q] - m[p][p]) / (2.0 * m[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (mkp, mkq) = (m[k][p], m[k][q]);
                    m[k][p] = c * mkp - s * mkq;
                    m[k][q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let (mpk, mqk) = (m[p][k], m[q][k]);
                    m[p][k] = c * mpk - s * mqk;
                    m[q][k] = s * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i][i]).fold(f64::INFINITY, f64::min)
}

/// Exhaustive minimum of `a^T G a` over `[-b, b]^N \ {0}`.
pub fn box_minimum(g: &[Vec<f64>], b: i64) -> f64 {
    let n = g.len();
    let mut best = f64::INFINITY;
    let mut a = vec![-b; n];
    loop {
        if a.iter().any(|&v| v != 0) {
            best = best.min(form(g, &a));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            if a[i] < b {
                a[i] += 1;
                break;
            }
            a[i] = -b;
            i += 1;
        }
    }
}

/// Box half-width guaranteed to contain the shortest vector:
/// `ceil(sqrt(min_i G_ii / lambda_min))`.
pub fn svp_box(g: &[Vec<f64>]) -> i64 {
    let diag_min = (0..g.len()).map(|i| g[i][i]).fold(f64::INFINITY, f64::min);
    (diag_min / min_eigenvalue(g)).sqrt().ceil() as i64
}

/// Unnormalized `p(y | lambda)` by direct enumeration of all symbol pairs.
pub fn profile_oracle(h: [f64; 2], a: (i64, i64), s_m: i64, var: f64, y: f64) -> Vec<(i64, f64)> {
    let mut acc: std::collections::BTreeMap<i64, f64> = Default::default();
    for x1 in -s_m..=s_m {
        for x2 in -s_m..=s_m {
            let r = y - h[0] * x1 as f64 - h[1] * x2 as f64;
            *acc.entry(a.0 * x1 + a.1 * x2).or_insert(0.0) += (-r * r / (2.0 * var)).exp();
        }
    }
    acc.into_iter().collect()
}

/// Minimum of `|y - h.x|` over all symbol pairs.
pub fn nearest_oracle(h: [f64; 2], s_m: i64, y: f64) -> f64 {
    let mut best = f64::INFINITY;
    for x1 in -s_m..=s_m {
        for x2 in -s_m..=s_m {
            best = best.min((y - h[0] * x1 as f64 - h[1] * x2 as f64).abs());
        }
    }
    best
}

/// Binomial standard deviation of a count.
pub fn binom_sigma(n: u64, p: f64) -> f64 {
    (n as f64 * p * (1.0 - p)).sqrt()
}
