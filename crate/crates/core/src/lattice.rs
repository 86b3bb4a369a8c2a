//! Rate-maximizing coefficient selection.
//!
//! The computation rate `R(h, a) = -log2(|a|^2 - snr (h.a)^2 / (1 + snr |h|^2))`
//! equals `-log2(a^T G a)` with `G = I - snr / (1 + snr |h|^2) h h^T`, so the
//! best coefficient vector is the shortest nonzero vector of the lattice whose
//! Gram matrix is `G`. That vector is found exactly by Fincke-Pohst sphere
//! enumeration on the Cholesky factor of `G`.

use std::cmp::Ordering;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Quadratic forms within this relative distance are treated as tied.
pub const FORM_TIE_RTOL: f64 = 1e-12;

/// Real channel gains seen by the relay together with the operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    h: Vec<f64>,
    snr: f64,
    noise_variance: f64,
}

impl ChannelState {
    pub fn new(h: Vec<f64>, snr: f64, noise_variance: f64) -> Result<Self> {
        if h.len() < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 channel gains, got {}",
                h.len()
            )));
        }
        if let Some(bad) = h.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "channel gain {bad} is not finite"
            )));
        }
        if !(snr > 0.0 && snr.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "snr must be positive and finite, got {snr}"
            )));
        }
        if !(noise_variance > 0.0 && noise_variance.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "noise variance must be positive and finite, got {noise_variance}"
            )));
        }
        Ok(Self {
            h,
            snr,
            noise_variance,
        })
    }

    /// Channel state with unit noise variance.
    pub fn with_unit_noise(h: Vec<f64>, snr: f64) -> Result<Self> {
        Self::new(h, snr, 1.0)
    }

    pub fn h(&self) -> &[f64] {
        &self.h
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn dimension(&self) -> usize {
        self.h.len()
    }

    fn norm_sqr(&self) -> f64 {
        self.h.iter().map(|v| v * v).sum()
    }
}

/// Positive-definite Gram matrix of the coefficient lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct GramLattice {
    g: DMatrix<f64>,
}

impl GramLattice {
    /// Wraps an arbitrary symmetric matrix. Positive definiteness is checked
    /// lazily by [`shortest_vector`].
    pub fn from_matrix(g: DMatrix<f64>) -> Result<Self> {
        if g.nrows() != g.ncols() || g.nrows() == 0 {
            return Err(Error::InvalidInput(format!(
                "Gram matrix must be square, got {}x{}",
                g.nrows(),
                g.ncols()
            )));
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "Gram matrix has non-finite entries".into(),
            ));
        }
        let scale = g
            .iter()
            .fold(0.0f64, |m, v| m.max(v.abs()))
            .max(f64::MIN_POSITIVE);
        for i in 0..g.nrows() {
            for j in 0..i {
                if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::InvalidInput(format!(
                        "Gram matrix is not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Self { g })
    }

    /// Row-major construction, mainly for tests and bindings.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput(
                "Gram matrix rows must all have length N".into(),
            ));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn dimension(&self) -> usize {
        self.g.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.g[(i, j)]
    }

    /// `a^T G a` evaluated directly.
    pub fn quadratic_form(&self, a: &[i64]) -> f64 {
        let n = self.dimension();
        assert_eq!(a.len(), n, "coefficient vector has wrong length");
        let mut acc = 0.0;
        for i in 0..n {
            let mut row = 0.0;
            for j in 0..n {
                row += self.g[(i, j)] * a[j] as f64;
            }
            acc += a[i] as f64 * row;
        }
        acc
    }
}

/// Rate-maximizing coefficient vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CoeffResult {
    pub a: Vec<i64>,
    pub quadratic_form: f64,
    /// Raw computation rate in bits; negative when `a^T G a > 1`.
    pub rate_bits: f64,
}

impl CoeffResult {
    /// Rate clamped at zero, as reported for achievability.
    pub fn rate_clamped(&self) -> f64 {
        self.rate_bits.max(0.0)
    }
}

/// `G = I - snr / (1 + snr |h|^2) h h^T`.
pub fn build_gram(ch: &ChannelState) -> GramLattice {
    let n = ch.dimension();
    let c = ch.snr / (1.0 + ch.snr * ch.norm_sqr());
    let h = &ch.h;
    let g = DMatrix::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        id - c * (h[i] * h[j])
    });
    GramLattice { g }
}

/// Computation rate in bits, evaluated from the rate formula itself rather
/// than through the Gram matrix.
pub fn computation_rate(ch: &ChannelState, a: &[i64]) -> Result<f64> {
    if a.len() != ch.dimension() {
        return Err(Error::InvalidInput(format!(
            "coefficient vector has length {}, channel has {}",
            a.len(),
            ch.dimension()
        )));
    }
    if a.iter().all(|&v| v == 0) {
        return Err(Error::InvalidInput(
            "coefficient vector must be nonzero".into(),
        ));
    }
    let a_norm: f64 = a.iter().map(|&v| (v as f64) * (v as f64)).sum();
    let proj: f64 = ch.h.iter().zip(a).map(|(h, &v)| h * v as f64).sum();
    let form = a_norm - ch.snr * proj * proj / (1.0 + ch.snr * ch.norm_sqr());
    if form <= 0.0 {
        return Err(Error::Numerical(format!(
            "rate denominator {form} is not positive"
        )));
    }
    Ok(-form.log2())
}

/// Flips `a` so that its first nonzero component is positive.
pub fn canonicalize_sign(a: &mut [i64]) {
    if let Some(&first) = a.iter().find(|&&v| v != 0) {
        if first < 0 {
            a.iter_mut().for_each(|v| *v = -*v);
        }
    }
}

/// Tie-break order among sign-canonical vectors: earlier first nonzero
/// component wins, then plain lexicographic order.
fn tie_order(a: &[i64], b: &[i64]) -> Ordering {
    let lead = |v: &[i64]| v.iter().position(|&x| x != 0).unwrap_or(v.len());
    lead(a).cmp(&lead(b)).then_with(|| a.cmp(b))
}

struct Enumerator<'a> {
    lattice: &'a GramLattice,
    // diag[i] = r_ii^2, mu[i][j] = r_ij / r_ii for j > i, with G = R^T R
    diag: Vec<f64>,
    mu: Vec<Vec<f64>>,
    bound: f64,
    current: Vec<i64>,
    best: Option<(Vec<i64>, f64)>,
}

impl Enumerator<'_> {
    fn search_radius(&self) -> f64 {
        // slack keeps vectors tied with the incumbent inside the sphere
        self.bound * (1.0 + 1e-9) + f64::EPSILON
    }

    fn descend(&mut self, level: usize, partial: f64) {
        let n = self.diag.len();
        let center: f64 = -(level + 1..n)
            .map(|j| self.mu[level][j] * self.current[j] as f64)
            .sum::<f64>();
        let remaining = self.search_radius() - partial;
        if remaining < 0.0 {
            return;
        }
        // zigzag outwards from the nearest integer; each side stops at the
        // first value outside the (shrinking) sphere
        let start = center.round() as i64;
        let (mut up_open, mut down_open) = (true, true);
        let mut offset = 0i64;
        while up_open || down_open {
            for (v, open) in [
                (start + offset, &mut up_open),
                (start - offset - 1, &mut down_open),
            ] {
                if !*open {
                    continue;
                }
                let d = v as f64 - center;
                let next = partial + self.diag[level] * d * d;
                if next > self.search_radius() {
                    *open = false;
                    continue;
                }
                self.current[level] = v;
                if level == 0 {
                    self.offer();
                } else {
                    self.descend(level - 1, next);
                }
            }
            offset += 1;
        }
        self.current[level] = 0;
    }

    fn offer(&mut self) {
        if self.current.iter().all(|&v| v == 0) {
            return;
        }
        let mut cand = self.current.clone();
        canonicalize_sign(&mut cand);
        let form = self.lattice.quadratic_form(&cand);
        let replace = match &self.best {
            None => true,
            Some((best, best_form)) => {
                let tol = FORM_TIE_RTOL * best_form.abs().max(form.abs());
                if form < best_form - tol {
                    true
                } else if (form - best_form).abs() <= tol {
                    tie_order(&cand, best) == Ordering::Less
                } else {
                    false
                }
            }
        };
        if replace {
            self.bound = self.bound.min(form);
            self.best = Some((cand, form));
        }
    }
}

/// Exact shortest nonzero vector of the lattice, sign-canonical.
pub fn shortest_vector(lat: &GramLattice) -> Result<CoeffResult> {
    let n = lat.dimension();
    let chol = lat
        .g
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Numerical("Gram matrix is not positive definite".into()))?;
    let r = chol.l().transpose();
    let mut diag = vec![0.0; n];
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let rii = r[(i, i)];
        if !(rii > 0.0) || !rii.is_finite() {
            return Err(Error::Numerical(format!(
                "non-positive Cholesky pivot {rii} at {i}"
            )));
        }
        diag[i] = rii * rii;
        for j in i + 1..n {
            mu[i][j] = r[(i, j)] / rii;
        }
    }
    // the best unit vector bounds the minimum from above
    let bound = (0..n).map(|i| lat.g[(i, i)]).fold(f64::INFINITY, f64::min);
    let mut en = Enumerator {
        lattice: lat,
        diag,
        mu,
        bound,
        current: vec![0; n],
        best: None,
    };
    en.descend(n - 1, 0.0);
    let (a, quadratic_form) = en
        .best
        .ok_or_else(|| Error::Numerical("sphere enumeration found no nonzero vector".into()))?;
    if !(quadratic_form > 0.0) {
        return Err(Error::Numerical(format!(
            "quadratic form {quadratic_form} is not positive"
        )));
    }
    Ok(CoeffResult {
        a,
        quadratic_form,
        rate_bits: -quadratic_form.log2(),
    })
}

/// Rate-maximizing integer coefficients for the channel.
pub fn best_coefficients(ch: &ChannelState) -> Result<CoeffResult> {
    let mut res = shortest_vector(&build_gram(ch))?;
    res.rate_bits = computation_rate(ch, &res.a)?;
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(h: &[f64], snr: f64) -> ChannelState {
        ChannelState::with_unit_noise(h.to_vec(), snr).unwrap()
    }

    #[test]
    fn rejects_bad_channel_state() {
        assert!(ChannelState::new(vec![1.0], 1.0, 1.0).is_err());
        assert!(ChannelState::new(vec![1.0, f64::NAN], 1.0, 1.0).is_err());
        assert!(ChannelState::new(vec![1.0, 0.0], 0.0, 1.0).is_err());
        assert!(ChannelState::new(vec![1.0, 0.0], 1.0, -1.0).is_err());
    }

    #[test]
    fn gram_zero_snr_limit_is_identity() {
        let g = build_gram(&ch(&[1.0, 0.0], 1e-12));
        for i in 0..2 {
            for j in 0..2 {
                let id = if i == j { 1.0 } else { 0.0 };
                assert!((g.entry(i, j) - id).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn gram_unit_channel_closed_form() {
        let g = build_gram(&ch(&[1.0, 1.0], 1.0));
        let want = [[2.0 / 3.0, -1.0 / 3.0], [-1.0 / 3.0, 2.0 / 3.0]];
        for i in 0..2 {
            for j in 0..2 {
                assert!((g.entry(i, j) - want[i][j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gram_figure_channel_entries() {
        // frozen from an independent scalar evaluation
        let g = build_gram(&ch(&[-1.274, 0.602], 1e4));
        assert!((g.entry(0, 0) - 0.1825683175696774).abs() < 1e-13);
        assert!((g.entry(0, 1) - 0.3862589268626799).abs() < 1e-13);
        assert!((g.entry(1, 1) - 0.817482045548404).abs() < 1e-13);
        assert_eq!(g.entry(0, 1), g.entry(1, 0));
    }

    #[test]
    fn rate_examples() {
        assert!(
            computation_rate(&ch(&[1.0, 0.0], 1e-12), &[1, 0])
                .unwrap()
                .abs()
                < 1e-6
        );
        let r = computation_rate(&ch(&[1.0, 1.0], 1.0), &[1, 1]).unwrap();
        assert!((r - 1.5f64.log2()).abs() < 1e-12);
        let r = computation_rate(&ch(&[-1.274, 0.602], 1e4), &[2, -1]).unwrap();
        assert!(r > 8.0);
        assert!((r - 8.52238536631585).abs() < 1e-9);
    }

    #[test]
    fn rate_rejects_zero_vector() {
        assert!(matches!(
            computation_rate(&ch(&[1.0, 1.0], 1.0), &[0, 0]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn identity_tie_break_prefers_first_axis() {
        let g = GramLattice::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let res = shortest_vector(&g).unwrap();
        assert_eq!(res.a, vec![1, 0]);
        assert_eq!(res.quadratic_form, 1.0);
    }

    #[test]
    fn figure_channel_selects_two_minus_one() {
        let res = best_coefficients(&ch(&[-1.274, 0.602], 1e4)).unwrap();
        assert_eq!(res.a, vec![2, -1]);
        assert!((res.quadratic_form - 0.002719608376393956).abs() < 1e-12);
    }

    #[test]
    fn axis_channel_selects_first_unit_vector() {
        for snr in [1e-6, 1.0, 1e4] {
            assert_eq!(
                best_coefficients(&ch(&[1.0, 0.0], snr)).unwrap().a,
                vec![1, 0]
            );
        }
    }

    #[test]
    fn balanced_channel_matches_rate_scan() {
        // brute-force argmax over [-30,30]^2 gives (1,1) at 4.6724253419714925 bits
        let res = best_coefficients(&ch(&[0.5, 0.5], 100.0)).unwrap();
        assert_eq!(res.a, vec![1, 1]);
        assert!((res.rate_bits - 4.6724253419714925).abs() < 1e-9);
    }

    #[test]
    fn non_positive_definite_is_numerical_error() {
        let g = GramLattice::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]).unwrap();
        assert!(matches!(shortest_vector(&g), Err(Error::Numerical(_))));
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        assert!(GramLattice::from_rows(&[vec![1.0, 0.5], vec![0.4, 1.0]]).is_err());
    }

    #[test]
    fn three_dimensional_identity() {
        let g = GramLattice::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(shortest_vector(&g).unwrap().a, vec![1, 0, 0]);
    }
}
