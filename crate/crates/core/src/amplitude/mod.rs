//! Bipartite amplitudes `f(p, q)`.
//!
//! Built-ins are the biphoton amplitude of type-II parametric
//! down-conversion, products of basis functions, parsed expressions and
//! arbitrary closures.

pub mod expr;

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use core::f64::consts::PI;
use core::fmt;

use num_complex::Complex64;

use crate::basis::{BasisFamily, Interval};
use crate::error::{Error, Result};
use crate::math::{exp, sinc, sqrt};
use crate::quadrature::{try_integrate_2d, QuadratureRule};

pub use expr::{Expr, Program};

/// Product domain `(a₁, b₁) × (a₂, b₂)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rectangle {
    pub p: Interval,
    pub q: Interval,
}

impl Rectangle {
    pub const PLANE: Rectangle = Rectangle {
        p: Interval::REAL_LINE,
        q: Interval::REAL_LINE,
    };

    pub fn contains(&self, p: f64, q: f64) -> bool {
        self.p.contains(p) && self.q.contains(q)
    }
}

/// Physical parameters of the down-conversion source.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicalPdc {
    /// `(k̄ − k'_e) L` in ps.
    pub tau_e: f64,
    /// `(k̄ − k'_o) L` in ps.
    pub tau_o: f64,
    /// Pump width σ in ps⁻¹.
    pub sigma: f64,
    /// Central frequency ω̄ in ps⁻¹; drops out of the dimensionless amplitude.
    pub omega_bar: f64,
}

/// Dimensionless parameters of `f(p,q) = e^{−(p+q)²} sinc((L_p p + L_q q)/2)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PdcParams {
    l_p: f64,
    l_q: f64,
    physical: Option<PhysicalPdc>,
}

impl PdcParams {
    /// `L_p = τ_o σ`, `L_q = τ_e σ` with `p = (ω_o − ω̄)/σ`, `q = (ω_e − ω̄)/σ`.
    pub fn from_physical(tau_e: f64, tau_o: f64, sigma: f64, omega_bar: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParameter(format!("pump width sigma must be positive, got {sigma}")));
        }
        if !(tau_e.is_finite() && tau_o.is_finite() && omega_bar.is_finite()) {
            return Err(Error::InvalidParameter("PDC parameters must be finite".into()));
        }
        Ok(Self {
            l_p: tau_o * sigma,
            l_q: tau_e * sigma,
            physical: Some(PhysicalPdc {
                tau_e,
                tau_o,
                sigma,
                omega_bar,
            }),
        })
    }

    pub fn dimensionless(l_p: f64, l_q: f64) -> Result<Self> {
        if !(l_p.is_finite() && l_q.is_finite()) {
            return Err(Error::InvalidParameter("L_p and L_q must be finite".into()));
        }
        Ok(Self {
            l_p,
            l_q,
            physical: None,
        })
    }

    /// A typical type-II crystal: `τ_e = 0.213 ps`, `τ_o = 0.061 ps`,
    /// `σ = 35 ps⁻¹`, `ω̄ = 2700 ps⁻¹`, giving `L_p = 2.135`, `L_q = 7.455`.
    pub fn typical() -> Self {
        Self::from_physical(0.213, 0.061, 35.0, 2700.0).expect("valid constants")
    }

    pub fn l_p(&self) -> f64 {
        self.l_p
    }

    pub fn l_q(&self) -> f64 {
        self.l_q
    }

    pub fn physical(&self) -> Option<&PhysicalPdc> {
        self.physical.as_ref()
    }

    /// `‖f‖² = 2π √(π/2) / |L_q − L_p|`, obtained by integrating in the
    /// rotated coordinates `u = p + q`, `w = (L_p p + L_q q)/2`. Diverges when
    /// `L_p = L_q`.
    pub fn exact_norm_squared(&self) -> Option<f64> {
        let gap = (self.l_q - self.l_p).abs();
        (gap > 0.0).then(|| 2.0 * PI * sqrt(PI / 2.0) / gap)
    }

    #[inline]
    fn eval(&self, p: f64, q: f64) -> f64 {
        let s = p + q;
        exp(-s * s) * sinc(0.5 * (self.l_p * p + self.l_q * q))
    }
}

/// Shorthand for [`PdcParams::from_physical`].
pub fn pdc_from_physical(tau_e: f64, tau_o: f64, sigma: f64, omega_bar: f64) -> Result<PdcParams> {
    PdcParams::from_physical(tau_e, tau_o, sigma, omega_bar)
}

/// A parsed expression together with its compiled program.
#[derive(Clone, Debug, PartialEq)]
pub struct Expression {
    source: String,
    tree: Expr,
    program: Program,
}

impl Expression {
    pub fn parse(src: &str) -> Result<Self> {
        let tree = expr::parse(src)?;
        let program = Program::compile(&tree);
        Ok(Self {
            source: src.into(),
            tree,
            program,
        })
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn tree(&self) -> &Expr {
        &self.tree
    }

    pub fn eval(&self, p: f64, q: f64) -> Result<f64> {
        self.program.eval(p, q)
    }
}

type AmplitudeFn = dyn Fn(f64, f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
enum Shape {
    Pdc(PdcParams),
    Expression(Expression),
    BasisProduct {
        first: BasisFamily,
        m: usize,
        second: BasisFamily,
        n: usize,
    },
    Custom(Arc<AmplitudeFn>),
}

/// An evaluable bipartite wavefunction with domain metadata.
///
/// Immutable once built; [`Amplitude::scaled`] returns a new value.
#[derive(Clone)]
pub struct Amplitude {
    shape: Shape,
    factor: Complex64,
    domain: Rectangle,
    label: String,
    norm_hint: Option<f64>,
}

impl fmt::Debug for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Amplitude")
            .field("label", &self.label)
            .field("factor", &self.factor)
            .field("domain", &self.domain)
            .field("norm_hint", &self.norm_hint)
            .finish_non_exhaustive()
    }
}

impl Amplitude {
    /// Biphoton amplitude over the whole dimensionless plane. The exact norm
    /// is cached as the hint when `L_p ≠ L_q`.
    pub fn pdc(params: PdcParams) -> Self {
        Self {
            shape: Shape::Pdc(params),
            factor: Complex64::new(1.0, 0.0),
            domain: Rectangle::PLANE,
            label: format!("pdc(L_p={}, L_q={})", params.l_p, params.l_q),
            norm_hint: Some(params.exact_norm_squared().unwrap_or(f64::INFINITY)),
        }
    }

    pub fn expression(src: &str) -> Result<Self> {
        let e = Expression::parse(src)?;
        Ok(Self {
            label: format!("expr({})", e.source),
            shape: Shape::Expression(e),
            factor: Complex64::new(1.0, 0.0),
            domain: Rectangle::PLANE,
            norm_hint: None,
        })
    }

    /// Separable `O⁽¹⁾_m(p) O⁽²⁾_n(q)`, of unit norm.
    pub fn basis_product(first: BasisFamily, m: usize, second: BasisFamily, n: usize) -> Self {
        Self {
            shape: Shape::BasisProduct { first, m, second, n },
            factor: Complex64::new(1.0, 0.0),
            domain: Rectangle {
                p: first.domain(),
                q: second.domain(),
            },
            label: format!("O{m}(p)*O{n}(q)"),
            norm_hint: Some(1.0),
        }
    }

    pub fn from_fn(
        label: impl Into<String>,
        domain: Rectangle,
        f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            shape: Shape::Custom(Arc::new(f)),
            factor: Complex64::new(1.0, 0.0),
            domain,
            label: label.into(),
            norm_hint: None,
        }
    }

    /// `c · f`, with the norm hint scaled by `|c|²`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.factor *= c;
        out.norm_hint = self.norm_hint.map(|n| n * c.norm_sqr());
        out
    }

    /// Replaces the cached `‖f‖²`. An infinite value marks `f` as not square
    /// integrable.
    pub fn with_norm_hint(mut self, norm_squared: Option<f64>) -> Self {
        self.norm_hint = norm_squared;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn domain(&self) -> Rectangle {
        self.domain
    }

    pub fn norm_hint(&self) -> Option<f64> {
        self.norm_hint
    }

    pub fn pdc_params(&self) -> Option<&PdcParams> {
        match &self.shape {
            Shape::Pdc(p) => Some(p),
            _ => None,
        }
    }

    pub fn expression_source(&self) -> Option<&str> {
        match &self.shape {
            Shape::Expression(e) => Some(e.source()),
            _ => None,
        }
    }

    /// `f(p, q)`.
    pub fn evaluate(&self, p: f64, q: f64) -> Result<Complex64> {
        if !self.domain.contains(p, q) {
            let (value, iv) = if self.domain.p.contains(p) { (q, self.domain.q) } else { (p, self.domain.p) };
            return Err(Error::DomainViolation {
                value,
                lo: iv.lo,
                hi: iv.hi,
            });
        }
        let raw = match &self.shape {
            Shape::Pdc(params) => Complex64::new(params.eval(p, q), 0.0),
            Shape::Expression(e) => Complex64::new(e.eval(p, q)?, 0.0),
            Shape::BasisProduct { first, m, second, n } => {
                Complex64::new(first.eval(*m, p)? * second.eval(*n, q)?, 0.0)
            }
            Shape::Custom(f) => f(p, q),
        };
        Ok(raw * self.factor)
    }
}

/// Shorthand for [`Amplitude::pdc`].
pub fn pdc_amplitude(params: PdcParams) -> Amplitude {
    Amplitude::pdc(params)
}

/// Shorthand for [`Amplitude::expression`].
pub fn parse_expression(src: &str) -> Result<Amplitude> {
    Amplitude::expression(src)
}

/// `∫∫ |f|² dp dq` by tensor quadrature with weight compensation.
///
/// Slowly decaying tails beyond the outermost nodes are invisible to the
/// rule; amplitudes that know their norm carry it in [`Amplitude::norm_hint`].
pub fn norm_squared(amp: &Amplitude, rule_p: &QuadratureRule, rule_q: &QuadratureRule) -> Result<f64> {
    let v = try_integrate_2d(|p, q| amp.evaluate(p, q).map(|z| Complex64::new(z.norm_sqr(), 0.0)), rule_p, rule_q, true)?;
    Ok(v.re)
}

/// Where a recorded `‖f‖²` came from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NormSquared {
    /// Cached on the amplitude (closed form or previously normalized).
    Exact(f64),
    /// Integrated with the quadrature rules in use.
    Quadrature(f64),
    /// Not square integrable (e.g. the Dirac delta).
    Divergent,
}

impl NormSquared {
    pub fn value(&self) -> Option<f64> {
        match *self {
            NormSquared::Exact(v) | NormSquared::Quadrature(v) => Some(v),
            NormSquared::Divergent => None,
        }
    }

    pub fn source(&self) -> &'static str {
        match self {
            NormSquared::Exact(_) => "exact",
            NormSquared::Quadrature(_) => "quadrature",
            NormSquared::Divergent => "divergent",
        }
    }
}

/// The cached norm when available, otherwise [`norm_squared`].
pub fn resolve_norm_squared(amp: &Amplitude, rule_p: &QuadratureRule, rule_q: &QuadratureRule) -> Result<NormSquared> {
    match amp.norm_hint() {
        Some(n) if n.is_infinite() => Ok(NormSquared::Divergent),
        Some(n) => Ok(NormSquared::Exact(n)),
        None => norm_squared(amp, rule_p, rule_q).map(NormSquared::Quadrature),
    }
}

/// Rescales `amp` to unit norm and records the new norm as its hint.
pub fn normalize(amp: &Amplitude, rule_p: &QuadratureRule, rule_q: &QuadratureRule) -> Result<Amplitude> {
    let n2 = resolve_norm_squared(amp, rule_p, rule_q)?.value().unwrap_or(f64::INFINITY);
    if !(n2.is_finite() && n2 > 0.0) {
        return Err(Error::BadNorm(n2));
    }
    Ok(amp.scaled(Complex64::new(1.0 / sqrt(n2), 0.0)).with_norm_hint(Some(1.0)))
}
