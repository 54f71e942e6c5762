use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use super::{SchmidtDecomposition, Side};
use crate::basis::orthonormal_polynomial_coefficients;
use crate::error::{Error, Result};
use crate::math::{powi, sqrt};

/// `ψ⁽ˢⁱᵈᵉ⁾ᵢ(k) = Σₙ Aᵢₙ Oₙ(k)`.
pub fn eval_mode(dec: &SchmidtDecomposition, side: Side, i: usize, k: f64) -> Result<Complex64> {
    if i >= dec.len() {
        return Err(Error::IndexOutOfRange { index: i, len: dec.len() });
    }
    let modes = dec.modes(side);
    let o = dec.source().basis(side).eval_batch(modes.cols() - 1, k)?;
    Ok(modes.row(i).iter().zip(&o).map(|(a, &b)| a * b).sum())
}

/// All modes of one side at `k`, sharing one basis evaluation.
pub fn eval_modes(dec: &SchmidtDecomposition, side: Side, k: f64) -> Result<Vec<Complex64>> {
    let modes = dec.modes(side);
    let o = dec.source().basis(side).eval_batch(modes.cols() - 1, k)?;
    Ok((0..dec.len())
        .map(|i| modes.row(i).iter().zip(&o).map(|(a, &b)| a * b).sum())
        .collect())
}

/// Monomial coefficients `c_d`, `d ≤ max_degree`, with
/// `ψᵢ(k) = envelope(k) · Σ_d c_d k^d` when `max_degree` equals the cutoff
/// (`envelope` is `e^{−(βk)²/2}` for Hermite, `e^{−β(k−c)/2}` for Laguerre and
/// `1` for Legendre; see [`BasisFamily::envelope`](crate::BasisFamily::envelope)).
///
/// Each orthonormal polynomial is expanded exactly into powers of the
/// canonical variable, then rewritten in `k`; lower `max_degree` truncates
/// that series.
pub fn mode_to_monomial(dec: &SchmidtDecomposition, side: Side, i: usize, max_degree: usize) -> Result<Vec<Complex64>> {
    if i >= dec.len() {
        return Err(Error::IndexOutOfRange { index: i, len: dec.len() });
    }
    let modes = dec.modes(side);
    let cutoff = modes.cols() - 1;
    if max_degree > cutoff {
        return Err(Error::DegreeOutOfRange {
            degree: max_degree,
            available: cutoff,
        });
    }
    let basis = dec.source().basis(side);
    let polys = orthonormal_polynomial_coefficients(basis.kind(), cutoff);

    // Polynomial part in the canonical variable x = β(k − c).
    let mut in_x = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    for (a, poly) in modes.row(i).iter().zip(&polys) {
        for (d, &c) in poly.iter().enumerate() {
            in_x[d] += a * c;
        }
    }

    // x^d = β^d Σ_e C(d, e) k^e (−c)^{d−e}
    let (beta, center) = (basis.scale(), basis.center());
    let mut in_k = vec![Complex64::new(0.0, 0.0); cutoff + 1];
    let mut beta_pow = 1.0;
    for (d, &coef) in in_x.iter().enumerate() {
        if center == 0.0 {
            in_k[d] += coef * beta_pow;
        } else {
            let mut binom = 1.0;
            for e in (0..=d).rev() {
                let shift = powi(-center, (d - e) as i32);
                in_k[e] += coef * (beta_pow * binom * shift);
                binom = binom * (e as f64) / ((d - e + 1) as f64);
            }
        }
        beta_pow *= beta;
    }

    let root = sqrt(beta);
    in_k.truncate(max_degree + 1);
    in_k.iter_mut().for_each(|z| *z *= root);
    Ok(in_k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitude::NormSquared;
    use crate::basis::BasisFamily;
    use crate::linalg::ComplexMatrix;
    use crate::schmidt::{decompose, CoefficientMatrix};

    fn identity_dec(basis: BasisFamily, n: usize) -> SchmidtDecomposition {
        let c = CoefficientMatrix::from_entries(ComplexMatrix::identity(n), basis, basis, NormSquared::Divergent).unwrap();
        decompose(&c).unwrap()
    }

    #[test]
    fn identity_modes_are_basis_functions() {
        let b = BasisFamily::hermite(1.3).unwrap();
        let d = identity_dec(b, 4);
        for i in 0..4 {
            for &k in &[-1.0, 0.2, 2.5] {
                let m = eval_mode(&d, Side::First, i, k).unwrap();
                assert!((m.re - b.eval(i, k).unwrap()).abs() < 1e-15);
            }
        }
        assert!(eval_mode(&d, Side::First, 4, 0.0).is_err());
    }

    #[test]
    fn identity_ground_mode_monomial() {
        let d = identity_dec(BasisFamily::hermite(1.0).unwrap(), 4);
        let c = mode_to_monomial(&d, Side::First, 0, 3).unwrap();
        assert!((c[0].re - libm::pow(core::f64::consts::PI, -0.25)).abs() < 1e-15);
        assert!(c[1..].iter().all(|z| z.norm() == 0.0));
        assert!(mode_to_monomial(&d, Side::First, 0, 4).is_err());
    }

    #[test]
    fn full_monomial_series_reproduces_mode() {
        let bases = [
            BasisFamily::hermite(0.7).unwrap(),
            BasisFamily::laguerre(1.5).unwrap(),
            BasisFamily::legendre(0.5, 3.0).unwrap(),
        ];
        for b in bases {
            let n = 7;
            let entries: Vec<f64> = (0..n * n).map(|x| libm::sin(x as f64 * 0.37 + 0.1)).collect();
            let c = CoefficientMatrix::from_entries(ComplexMatrix::from_real(n, n, &entries), b, b, NormSquared::Exact(1.0)).unwrap();
            let d = decompose(&c).unwrap();
            let coeffs = mode_to_monomial(&d, Side::Second, 2, n - 1).unwrap();
            for &k in &[0.6, 1.1, 2.2] {
                let poly: Complex64 = coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * k + c);
                let direct = eval_mode(&d, Side::Second, 2, k).unwrap();
                assert!((poly * b.envelope(k) - direct).norm() < 1e-11, "{:?} k={k}", b.kind());
            }
        }
    }
}
