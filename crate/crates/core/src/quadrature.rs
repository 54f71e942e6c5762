//! Gaussian quadrature rules matched to the basis weights, and tensor-product
//! integration over the plane.
//!
//! Nodes come from the Jacobi matrix of each family (Golub–Welsch), polished
//! by Newton steps on the orthonormal polynomial. Weights use the Christoffel
//! form `w_i = 1 / Σ_k p_k(x_i)²`, accumulated in log space so the
//! weight-compensated weights `w_i / ρ(x_i)` stay finite even where `e^{x²}`
//! alone would overflow.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::basis::{BasisFamily, BasisKind};
use crate::error::{Error, Result};
use crate::linalg::symmetric_tridiagonal_eigenvalues;
use crate::math::{exp, ln, CompensatedComplexSum, CompensatedSum};

/// Weight measure a rule is exact against (before any affine map).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Measure {
    /// `e^{−x²}` on ℝ.
    GaussHermite,
    /// `e^{−x}` on (0, ∞).
    GaussLaguerre,
    /// `1` on [−1, 1].
    GaussLegendre,
}

impl Measure {
    pub fn name(self) -> &'static str {
        match self {
            Measure::GaussHermite => "gauss-hermite",
            Measure::GaussLaguerre => "gauss-laguerre",
            Measure::GaussLegendre => "gauss-legendre",
        }
    }

    fn kind(self) -> BasisKind {
        match self {
            Measure::GaussHermite => BasisKind::HermiteScaled,
            Measure::GaussLaguerre => BasisKind::Laguerre,
            Measure::GaussLegendre => BasisKind::Legendre,
        }
    }

    fn is_symmetric(self) -> bool {
        !matches!(self, Measure::GaussLaguerre)
    }

    /// Weight density in canonical coordinates.
    pub fn density(self, x: f64) -> f64 {
        exp(self.log_density(x))
    }

    fn log_density(self, x: f64) -> f64 {
        match self {
            Measure::GaussHermite => -x * x,
            Measure::GaussLaguerre => -x,
            Measure::GaussLegendre => 0.0,
        }
    }
}

impl From<BasisKind> for Measure {
    fn from(kind: BasisKind) -> Self {
        match kind {
            BasisKind::HermiteScaled => Measure::GaussHermite,
            BasisKind::Laguerre => Measure::GaussLaguerre,
            BasisKind::Legendre => Measure::GaussLegendre,
        }
    }
}

/// Physical coordinate `k = center + x / scale` for canonical `x`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub scale: f64,
    pub center: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        scale: 1.0,
        center: 0.0,
    };

    #[inline]
    pub fn to_physical(&self, x: f64) -> f64 {
        self.center + x / self.scale
    }
}

/// Nodes and weights of an `order`-point Gauss rule.
///
/// `weights` integrate `g(k) ρ(scale·(k − center)) dk`; `compensated_weights`
/// integrate plain `g(k) dk`. Both are expressed in the physical variable.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    measure: Measure,
    map: AffineMap,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    compensated: Vec<f64>,
}

impl QuadratureRule {
    pub fn measure(&self) -> Measure {
        self.measure
    }

    pub fn map(&self) -> AffineMap {
        self.map
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights against the (mapped) measure. For Gauss–Hermite of very high
    /// order the outermost values underflow to zero; the compensated weights
    /// do not.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for plain `dk` integrals, i.e. `wᵢ / ρ(xᵢ)`.
    pub fn compensated_weights(&self) -> &[f64] {
        &self.compensated
    }

    /// Weights used by [`integrate_2d`] for the given compensation flag.
    pub fn effective_weights(&self, compensated: bool) -> &[f64] {
        if compensated {
            &self.compensated
        } else {
            &self.weights
        }
    }

    /// Same rule expressed in the variable `k = center + x / scale`.
    pub fn mapped(mut self, map: AffineMap) -> Result<Self> {
        if !(map.scale.is_finite() && map.scale > 0.0 && map.center.is_finite()) {
            return Err(Error::InvalidParameter("affine map needs positive finite scale".into()));
        }
        // Compose with any existing map.
        let composed = AffineMap {
            scale: self.map.scale * map.scale,
            center: map.center + self.map.center / map.scale,
        };
        for x in &mut self.nodes {
            *x = map.to_physical(*x);
        }
        for w in self.weights.iter_mut().chain(self.compensated.iter_mut()) {
            *w /= map.scale;
        }
        self.map = composed;
        Ok(self)
    }

    /// Integrates `g` over the real line (or the mapped interval).
    pub fn integrate(&self, compensated: bool, mut g: impl FnMut(f64) -> f64) -> f64 {
        let mut s = CompensatedSum::default();
        for (&x, &w) in self.nodes.iter().zip(self.effective_weights(compensated)) {
            s.add(w * g(x));
        }
        s.value()
    }
}

/// `order`-point Gauss rule for `measure` in canonical coordinates.
pub fn gauss_rule(measure: Measure, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be at least 1".into()));
    }
    let kind = measure.kind();
    let diag: Vec<f64> = (0..order).map(|n| kind.diag(n)).collect();
    let off: Vec<f64> = (1..order).map(|n| kind.off(n).abs()).collect();
    let mut nodes = symmetric_tridiagonal_eigenvalues(&diag, &off)?;

    for x in &mut nodes {
        *x = newton_polish(kind, order, *x);
    }
    if measure.is_symmetric() {
        for i in 0..order / 2 {
            let j = order - 1 - i;
            let half = 0.5 * (nodes[j] - nodes[i]);
            nodes[i] = -half;
            nodes[j] = half;
        }
        if order % 2 == 1 {
            nodes[order / 2] = 0.0;
        }
    }

    let mut compensated = Vec::with_capacity(order);
    let mut weights = Vec::with_capacity(order);
    for &x in &nodes {
        let log_sum = log_christoffel_sum(kind, order, x);
        compensated.push(exp(-log_sum - measure.log_density(x)));
        weights.push(exp(-log_sum));
    }

    Ok(QuadratureRule {
        measure,
        map: AffineMap::IDENTITY,
        nodes,
        weights,
        compensated,
    })
}

/// Rule whose measure and coordinate map match `basis`, so that
/// `basis.eval(n, node)` is evaluated exactly where the weight lives.
pub fn matched_rule(basis: &BasisFamily, order: usize) -> Result<QuadratureRule> {
    gauss_rule(basis.kind().into(), order)?.mapped(AffineMap {
        scale: basis.scale(),
        center: basis.center(),
    })
}

/// Default order for coefficient and residual integrals at the given cutoff.
pub fn auto_order(max_cutoff: usize) -> usize {
    4 * max_cutoff + 40
}

/// `ln Σ_{k<order} p_k(x)²` for the orthonormal polynomials, with running
/// rescaling so the sum never overflows.
fn log_christoffel_sum(kind: BasisKind, order: usize, x: f64) -> f64 {
    let (mut p_prev, mut p) = (0.0, kind.p0());
    let mut log_scale = 0.0;
    let mut sum = CompensatedSum::default();
    sum.add(p * p);
    for n in 0..order - 1 {
        let b = if n == 0 { 0.0 } else { kind.off(n) };
        let p_next = ((x - kind.diag(n)) * p - b * p_prev) / kind.off(n + 1);
        p_prev = p;
        p = p_next;
        sum.add(p * p);
        let m = p.abs().max(p_prev.abs());
        if m > 1e100 {
            p /= m;
            p_prev /= m;
            let s = sum.value() / (m * m);
            sum = CompensatedSum::default();
            sum.add(s);
            log_scale += 2.0 * ln(m);
        }
    }
    ln(sum.value()) + log_scale
}

/// Newton steps on `p_order(x) = 0`, rescaling the recurrence so large
/// polynomial values never overflow.
fn newton_polish(kind: BasisKind, order: usize, mut x: f64) -> f64 {
    for _ in 0..3 {
        let (mut p_prev, mut p) = (0.0, kind.p0());
        let (mut d_prev, mut d) = (0.0, 0.0);
        for n in 0..order {
            let b_next = kind.off(n + 1);
            let b = if n == 0 { 0.0 } else { kind.off(n) };
            let shift = x - kind.diag(n);
            let p_next = (shift * p - b * p_prev) / b_next;
            let d_next = (p + shift * d - b * d_prev) / b_next;
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
            let m = p.abs().max(d.abs());
            if m > 1e100 {
                p /= m;
                p_prev /= m;
                d /= m;
                d_prev /= m;
            }
        }
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let step = p / d;
        x -= step;
        if step.abs() <= 4.0 * f64::EPSILON * x.abs().max(1.0) {
            break;
        }
    }
    x
}

/// `Σᵢⱼ wᵢ w'ⱼ g(pᵢ, qⱼ)` over the tensor grid, row-major over the sorted
/// nodes with compensated summation. With `compensated` set the weights are
/// the plain-`dp dq` ones.
pub fn integrate_2d(
    f: impl FnMut(f64, f64) -> Complex64,
    rule_p: &QuadratureRule,
    rule_q: &QuadratureRule,
    compensated: bool,
) -> Result<Complex64> {
    let mut f = f;
    try_integrate_2d(|p, q| Ok(f(p, q)), rule_p, rule_q, compensated)
}

/// Fallible variant of [`integrate_2d`]; the first error or non-finite
/// sample aborts the sum.
pub fn try_integrate_2d(
    mut f: impl FnMut(f64, f64) -> Result<Complex64>,
    rule_p: &QuadratureRule,
    rule_q: &QuadratureRule,
    compensated: bool,
) -> Result<Complex64> {
    let wp = rule_p.effective_weights(compensated);
    let wq = rule_q.effective_weights(compensated);
    let mut total = CompensatedComplexSum::default();
    for (&p, &w1) in rule_p.nodes().iter().zip(wp) {
        let mut row = CompensatedComplexSum::default();
        for (&q, &w2) in rule_q.nodes().iter().zip(wq) {
            let v = f(p, q)?;
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(Error::NonFinite {
                    p,
                    q,
                    value: if v.re.is_finite() { v.im } else { v.re },
                });
            }
            row.add(v * w2);
        }
        total.add(row.value() * w1);
    }
    Ok(total.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn zero_order_is_rejected() {
        assert!(gauss_rule(Measure::GaussHermite, 0).is_err());
    }

    #[test]
    fn one_point_hermite() {
        let r = gauss_rule(Measure::GaussHermite, 1).unwrap();
        assert_eq!(r.nodes(), &[0.0]);
        assert!((r.weights()[0] - crate::math::sqrt(PI)).abs() < 1e-15);
    }

    #[test]
    fn two_point_legendre() {
        let r = gauss_rule(Measure::GaussLegendre, 2).unwrap();
        let x = 1.0 / crate::math::sqrt(3.0);
        assert!((r.nodes()[0] + x).abs() < 1e-15);
        assert!((r.nodes()[1] - x).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
        assert!((r.weights()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hermite_sixth_moment() {
        let r = gauss_rule(Measure::GaussHermite, 20).unwrap();
        let got = r.integrate(false, |x| x.powi(6));
        let exact = 15.0 * crate::math::sqrt(PI) / 8.0;
        assert!((got - exact).abs() < 1e-12);
    }

    #[test]
    fn nodes_sorted_and_symmetric() {
        for order in [1, 2, 7, 40, 201] {
            let r = gauss_rule(Measure::GaussHermite, order).unwrap();
            assert!(r.nodes().windows(2).all(|w| w[0] < w[1]));
            for i in 0..order {
                assert_eq!(r.nodes()[i], -r.nodes()[order - 1 - i]);
            }
            assert!(r.weights().iter().all(|&w| w > 0.0));
        }
    }

    #[test]
    fn laguerre_moments() {
        let r = gauss_rule(Measure::GaussLaguerre, 6).unwrap();
        // ∫ x^k e^{-x} = k!, exact for k ≤ 11.
        let mut fact = 1.0;
        for k in 0..=11 {
            if k > 0 {
                fact *= k as f64;
            }
            let got = r.integrate(false, |x| x.powi(k));
            assert!((got / fact - 1.0).abs() < 1e-12, "k={k}");
        }
    }

    #[test]
    fn mapped_rule_integrates_in_physical_variable() {
        // ∫ e^{-(βk)²} dk = √π / β
        let beta = 0.5;
        let b = BasisFamily::hermite(beta).unwrap();
        let r = matched_rule(&b, 5).unwrap();
        let got = r.integrate(false, |_| 1.0);
        assert!((got - crate::math::sqrt(PI) / beta).abs() < 1e-13);
        // plain dk integral of e^{-k²/2}
        let r = matched_rule(&b, 40).unwrap();
        let got = r.integrate(true, |k| exp(-k * k / 2.0));
        let exact = crate::math::sqrt(2.0 * PI);
        assert!((got - exact).abs() < 1e-10, "{got} vs {exact}");

        let leg = BasisFamily::legendre(1.0, 4.0).unwrap();
        let r = matched_rule(&leg, 4).unwrap();
        assert!((r.integrate(true, |k| k * k) - (64.0 - 1.0) / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_constant() {
        let r = gauss_rule(Measure::GaussHermite, 12).unwrap();
        let v = integrate_2d(|_, _| Complex64::new(1.0, 0.0), &r, &r, false).unwrap();
        assert!((v.re - PI).abs() < 1e-13);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn normalized_ground_state_product() {
        let b = BasisFamily::hermite(1.0).unwrap();
        let r = gauss_rule(Measure::GaussHermite, 10).unwrap();
        let v = integrate_2d(
            |p, q| {
                let o = b.eval(0, p).unwrap() * b.eval(0, q).unwrap();
                Complex64::new(o * o, 0.0)
            },
            &r,
            &r,
            true,
        )
        .unwrap();
        assert!((v.re - 1.0).abs() < 1e-13);
    }

    #[test]
    fn non_finite_sample_reports_location() {
        let r = gauss_rule(Measure::GaussLegendre, 3).unwrap();
        let err = integrate_2d(
            |p, q| {
                if p > 0.5 && q == 0.0 {
                    Complex64::new(f64::NAN, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            },
            &r,
            &r,
            false,
        )
        .unwrap_err();
        match err {
            Error::NonFinite { p, q, .. } => {
                assert!(p > 0.5);
                assert_eq!(q, 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
