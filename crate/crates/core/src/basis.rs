//! Orthonormal function families used to discretize each side of the
//! bipartite amplitude.
//!
//! Every family is evaluated as *functions* (polynomial times the square
//! root of its weight) through the orthonormal three-term recurrence
//!
//! ```text
//! b_{n+1} φ_{n+1}(x) = (x − a_n) φ_n(x) − b_n φ_{n−1}(x)
//! ```
//!
//! so magnitudes stay O(1) and nothing like `2ⁿ n!` is ever formed. A family
//! with scale β and center c is `O_n(k) = √β φ_n(β (k − c))`, which keeps
//! orthonormality in `k` for free.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::math::{exp, pow, sqrt};

/// Highest basis order for which the recurrences are exercised and trusted.
pub const MAX_STABLE_ORDER: usize = 200;

/// The underlying orthogonal-polynomial family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BasisKind {
    /// Hermite functions `(√π 2ⁿ n!)^(-1/2) Hₙ(x) e^(−x²/2)` on the real line.
    HermiteScaled,
    /// Laguerre functions `Lₙ(x) e^(−x/2)` on the half line.
    Laguerre,
    /// Normalized Legendre polynomials `√((2n+1)/2) Pₙ(x)` on [−1, 1].
    Legendre,
}

impl BasisKind {
    pub fn name(self) -> &'static str {
        match self {
            BasisKind::HermiteScaled => "hermite",
            BasisKind::Laguerre => "laguerre",
            BasisKind::Legendre => "legendre",
        }
    }

    /// Diagonal recurrence coefficient `a_n`.
    #[inline]
    pub(crate) fn diag(self, n: usize) -> f64 {
        match self {
            BasisKind::HermiteScaled | BasisKind::Legendre => 0.0,
            BasisKind::Laguerre => (2 * n + 1) as f64,
        }
    }

    /// Off-diagonal recurrence coefficient `b_n` (n ≥ 1). Laguerre carries a
    /// negative sign so that `Lₙ(0) = 1` keeps the textbook convention.
    #[inline]
    pub(crate) fn off(self, n: usize) -> f64 {
        let n = n as f64;
        match self {
            BasisKind::HermiteScaled => sqrt(n / 2.0),
            BasisKind::Laguerre => -n,
            BasisKind::Legendre => n / sqrt(4.0 * n * n - 1.0),
        }
    }

    /// Constant orthonormal polynomial `p₀ = 1/√μ₀`.
    #[inline]
    pub(crate) fn p0(self) -> f64 {
        match self {
            BasisKind::HermiteScaled => pow(PI, -0.25),
            BasisKind::Laguerre => 1.0,
            BasisKind::Legendre => core::f64::consts::FRAC_1_SQRT_2,
        }
    }

    /// Square root of the weight, in canonical coordinates.
    #[inline]
    pub(crate) fn envelope(self, x: f64) -> f64 {
        match self {
            BasisKind::HermiteScaled => exp(-0.5 * x * x),
            BasisKind::Laguerre => exp(-0.5 * x),
            BasisKind::Legendre => 1.0,
        }
    }
}

/// Open or closed interval; endpoints may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const REAL_LINE: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParameter(alloc::format!("empty interval ({lo}, {hi})")));
        }
        Ok(Self { lo, hi })
    }

    /// Closed-endpoint membership for finite `x`.
    pub fn contains(&self, x: f64) -> bool {
        x.is_finite() && self.lo <= x && x <= self.hi
    }
}

/// A parameterized orthonormal family `O_n(k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BasisFamily {
    kind: BasisKind,
    scale: f64,
    center: f64,
}

impl BasisFamily {
    /// `O_n(k) = √β (√π 2ⁿ n!)^(-1/2) Hₙ(βk) e^(−(βk)²/2)`.
    pub fn hermite(beta: f64) -> Result<Self> {
        Self::new(BasisKind::HermiteScaled, beta, 0.0)
    }

    /// Laguerre functions on `(0, ∞)` with argument `βk`.
    pub fn laguerre(beta: f64) -> Result<Self> {
        Self::new(BasisKind::Laguerre, beta, 0.0)
    }

    /// Normalized Legendre polynomials mapped onto `[lo, hi]`.
    pub fn legendre(lo: f64, hi: f64) -> Result<Self> {
        let iv = Interval::new(lo, hi)?;
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter("Legendre basis needs a finite interval".into()));
        }
        Self::new(BasisKind::Legendre, 2.0 / (iv.hi - iv.lo), 0.5 * (iv.lo + iv.hi))
    }

    /// General constructor: canonical variable is `x = scale · (k − center)`.
    pub fn new(kind: BasisKind, scale: f64, center: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("basis scale must be positive, got {scale}")));
        }
        if !center.is_finite() {
            return Err(Error::InvalidParameter("basis center must be finite".into()));
        }
        Ok(Self { kind, scale, center })
    }

    #[inline]
    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    #[inline]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    #[inline]
    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn domain(&self) -> Interval {
        match self.kind {
            BasisKind::HermiteScaled => Interval::REAL_LINE,
            BasisKind::Laguerre => Interval {
                lo: self.center,
                hi: f64::INFINITY,
            },
            BasisKind::Legendre => Interval {
                lo: self.center - 1.0 / self.scale,
                hi: self.center + 1.0 / self.scale,
            },
        }
    }

    /// Maps a physical argument to the canonical variable.
    #[inline]
    pub fn canonical(&self, k: f64) -> f64 {
        self.scale * (k - self.center)
    }

    /// Square root of the weight at `k` (the factor multiplying the
    /// polynomial part of every `O_n`, up to `√β`).
    pub fn envelope(&self, k: f64) -> f64 {
        self.kind.envelope(self.canonical(k))
    }

    fn check(&self, k: f64) -> Result<f64> {
        let d = self.domain();
        if !d.contains(k) {
            return Err(Error::DomainViolation {
                value: k,
                lo: d.lo,
                hi: d.hi,
            });
        }
        Ok(self.canonical(k))
    }

    /// `O_n(k)`.
    pub fn eval(&self, n: usize, k: f64) -> Result<f64> {
        let mut buf = vec![0.0; n + 1];
        self.eval_batch_into(k, &mut buf)?;
        Ok(buf[n])
    }

    /// `[O_0(k), …, O_{n_max}(k)]`.
    pub fn eval_batch(&self, n_max: usize, k: f64) -> Result<Vec<f64>> {
        let mut buf = vec![0.0; n_max + 1];
        self.eval_batch_into(k, &mut buf)?;
        Ok(buf)
    }

    /// Fills `out[n] = O_n(k)` for every `n < out.len()`.
    pub fn eval_batch_into(&self, k: f64, out: &mut [f64]) -> Result<()> {
        let x = self.check(k)?;
        orthonormal_functions(self.kind, x, out);
        let s = sqrt(self.scale);
        out.iter_mut().for_each(|v| *v *= s);
        Ok(())
    }
}

/// Canonical orthonormal functions `φ_n(x)` for `n < out.len()`.
pub(crate) fn orthonormal_functions(kind: BasisKind, x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = kind.p0() * kind.envelope(x);
    if out.len() > 1 {
        out[1] = (x - kind.diag(0)) * out[0] / kind.off(1);
    }
    for n in 1..out.len().saturating_sub(1) {
        out[n + 1] = ((x - kind.diag(n)) * out[n] - kind.off(n) * out[n - 1]) / kind.off(n + 1);
    }
}

/// Monomial coefficients of the orthonormal polynomials `p_0..=p_{n_max}` in
/// the canonical variable: `result[n][d]` multiplies `x^d`.
pub(crate) fn orthonormal_polynomial_coefficients(kind: BasisKind, n_max: usize) -> Vec<Vec<f64>> {
    let mut polys: Vec<Vec<f64>> = Vec::with_capacity(n_max + 1);
    polys.push(vec![kind.p0()]);
    for n in 0..n_max {
        let mut next = vec![0.0; n + 2];
        let cur = &polys[n];
        for (d, &c) in cur.iter().enumerate() {
            next[d + 1] += c;
            next[d] -= kind.diag(n) * c;
        }
        if n > 0 {
            for (d, &c) in polys[n - 1].iter().enumerate() {
                next[d] -= kind.off(n) * c;
            }
        }
        let b = kind.off(n + 1);
        next.iter_mut().for_each(|c| *c /= b);
        polys.push(next);
    }
    polys
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pi_quarter() -> f64 {
        pow(PI, -0.25)
    }

    #[test]
    fn hermite_ground_state_at_origin() {
        let b = BasisFamily::hermite(1.0).unwrap();
        assert!((b.eval(0, 0.0).unwrap() - pi_quarter()).abs() < 1e-15);
        assert_eq!(b.eval(1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn scaled_hermite_ground_state() {
        // √2 · π^(-1/4) · e^(-0.5)
        let b = BasisFamily::hermite(2.0).unwrap();
        let expected = 0.644_288_365_113_475_2;
        assert!((b.eval(0, 0.5).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn batch_examples() {
        let b = BasisFamily::hermite(1.0).unwrap();
        let v = b.eval_batch(1, 0.0).unwrap();
        assert!((v[0] - pi_quarter()).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
        let v = b.eval_batch(0, 3.0).unwrap();
        assert_eq!(v.len(), 1);
        assert!((v[0] - pi_quarter() * exp(-4.5)).abs() < 1e-16);
    }

    #[test]
    fn hermite_matches_closed_form_for_low_orders() {
        // H_3(x) = 8x³ − 12x, normalization (√π · 8 · 6)^(-1/2).
        let b = BasisFamily::hermite(1.0).unwrap();
        for &x in &[-1.7, -0.2, 0.4, 2.9] {
            let h3 = 8.0 * x * x * x - 12.0 * x;
            let closed = h3 * exp(-x * x / 2.0) / sqrt(sqrt(PI) * 48.0);
            assert!((b.eval(3, x).unwrap() - closed).abs() < 1e-14);
        }
    }

    #[test]
    fn laguerre_and_legendre_closed_forms() {
        let lag = BasisFamily::laguerre(1.0).unwrap();
        // L_2(x) = 1 − 2x + x²/2
        let x = 1.3;
        let l2 = 1.0 - 2.0 * x + x * x / 2.0;
        assert!((lag.eval(2, x).unwrap() - l2 * exp(-x / 2.0)).abs() < 1e-14);
        assert!((lag.eval(5, 0.0).unwrap() - 1.0).abs() < 1e-14);

        // P_2(x) = (3x² − 1)/2, normalized by √(5/2).
        let leg = BasisFamily::legendre(-1.0, 1.0).unwrap();
        let y = 0.5;
        let p2 = sqrt(2.5) * (3.0 * y * y - 1.0) / 2.0;
        assert!((leg.eval(2, y).unwrap() - p2).abs() < 1e-14);
    }

    #[test]
    fn domain_violations() {
        let lag = BasisFamily::laguerre(1.0).unwrap();
        assert!(matches!(lag.eval(0, -0.1), Err(Error::DomainViolation { .. })));
        let leg = BasisFamily::legendre(0.0, 2.0).unwrap();
        assert!(leg.eval(3, 2.0).is_ok());
        assert!(matches!(leg.eval(3, 2.01), Err(Error::DomainViolation { .. })));
        let her = BasisFamily::hermite(1.0).unwrap();
        assert!(her.eval(0, f64::NAN).is_err());
        assert!(her.eval(0, f64::INFINITY).is_err());
    }

    #[test]
    fn rejects_nonpositive_scale() {
        assert!(BasisFamily::hermite(0.0).is_err());
        assert!(BasisFamily::hermite(-1.0).is_err());
        assert!(BasisFamily::hermite(f64::NAN).is_err());
        assert!(BasisFamily::legendre(1.0, 1.0).is_err());
    }

    #[test]
    fn hermite_parity() {
        let b = BasisFamily::hermite(1.7).unwrap();
        for &k in &[0.1, 0.9, 2.3, 4.0] {
            let plus = b.eval_batch(40, k).unwrap();
            let minus = b.eval_batch(40, -k).unwrap();
            for n in 0..=40 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                assert!((minus[n] - sign * plus[n]).abs() <= 1e-14, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn polynomial_coefficients_reproduce_functions() {
        for kind in [BasisKind::HermiteScaled, BasisKind::Laguerre, BasisKind::Legendre] {
            let polys = orthonormal_polynomial_coefficients(kind, 8);
            let x = 0.37;
            let mut f = vec![0.0; 9];
            orthonormal_functions(kind, x, &mut f);
            for n in 0..=8 {
                let p: f64 = polys[n].iter().rev().fold(0.0, |acc, &c| acc * x + c);
                assert!((p * kind.envelope(x) - f[n]).abs() < 1e-13, "{kind:?} n={n}");
            }
        }
    }

    #[test]
    fn high_order_stays_bounded() {
        let b = BasisFamily::hermite(1.0).unwrap();
        for &k in &[0.0, 3.3, 10.0, 19.9, 25.0, 40.0] {
            let v = b.eval_batch(MAX_STABLE_ORDER, k).unwrap();
            assert!(v.iter().all(|x| x.is_finite() && x.abs() < 1.0));
        }
    }
}
