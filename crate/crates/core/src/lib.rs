//! Schmidt decomposition of bipartite continuous-variable wavefunctions.
//!
//! A wavefunction `f(p, q)` is expanded in two discrete orthonormal bases,
//! truncated at cutoffs `(m₀, n₀)`, and the finite coefficient block is
//! diagonalized:
//!
//! ```text
//! f(p,q) ≈ Σ_mn C_mn O⁽¹⁾_m(p) O⁽²⁾_n(q) = Σᵢ √λᵢ ψ⁽¹⁾ᵢ(p) ψ⁽²⁾ᵢ(q)
//! ```
//!
//! The modes `ψ` stay continuous functions (finite combinations of the basis),
//! and truncation error is tracked through the distances `d¹` (residual
//! integral) and `d²` (uncaptured eigenvalue weight).
//!
//! ```
//! use cvschmidt_core::{
//!     compute_coefficients, decompose, distance_d2, matched_rule, Amplitude, BasisFamily, PdcParams,
//! };
//!
//! let amp = Amplitude::pdc(PdcParams::typical());
//! let basis = BasisFamily::hermite(1.0).unwrap();
//! let rule = matched_rule(&basis, 80).unwrap();
//! let c = compute_coefficients(&amp, &basis, &basis, 10, 10, &rule, &rule).unwrap();
//! let dec = decompose(&c).unwrap();
//! assert!((distance_d2(&dec).unwrap() - 0.062).abs() < 0.005);
//! ```
//!
//! The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod amplitude;
pub mod basis;
mod error;
pub mod linalg;
mod math;
pub mod quadrature;
pub mod schmidt;

pub use amplitude::{
    normalize, norm_squared, parse_expression, pdc_amplitude, pdc_from_physical, resolve_norm_squared, Amplitude,
    NormSquared, PdcParams, PhysicalPdc, Rectangle,
};
pub use basis::{BasisFamily, BasisKind, Interval, MAX_STABLE_ORDER};
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use math::sinc;
pub use quadrature::{auto_order, gauss_rule, integrate_2d, matched_rule, try_integrate_2d, AffineMap, Measure, QuadratureRule};
pub use schmidt::{
    coefficients_from_samples, compute_coefficients, decompose, delta_coefficients, distance_d1, distance_d2, entropy,
    eval_mode, eval_modes, mode_to_monomial, sample_row, schmidt_number, CoefficientMatrix, SampleGrid,
    SchmidtDecomposition, Side,
};

pub use num_complex::Complex64;
