//! Small dense linear algebra: a row-major complex matrix, a symmetric
//! tridiagonal eigenvalue solver and a one-sided Jacobi SVD.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::math::{hypot, sqrt};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major data. Panics if the length is wrong.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        Self { rows, cols, data }
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        Self::from_row_major(rows, cols, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[Complex64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [Complex64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    /// Leading `rows × cols` block.
    pub fn top_left(&self, rows: usize, cols: usize) -> Self {
        assert!(rows <= self.rows && cols <= self.cols);
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            out.row_mut(r).copy_from_slice(&self.row(r)[..cols]);
        }
        out
    }

    pub fn frobenius_norm_sqr(&self) -> f64 {
        let mut s = crate::math::CompensatedSum::default();
        for z in &self.data {
            s.add(z.norm_sqr());
        }
        s.value()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        &mut self.data[r * self.cols + c]
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `diag` and
/// sub-diagonal `off` (`off[i]` couples rows `i` and `i + 1`), ascending.
///
/// Implicit QL with Wilkinson shifts.
pub fn symmetric_tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 == n, "off-diagonal must have n - 1 entries");
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > 60 {
                return Err(Error::NoConvergence);
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Thin factorization `C = Σ_j σ_j u_j w_jᴴ` of an `r × c` matrix with `r`
/// terms, where `u_j` (columns of `left`) form a complete orthonormal basis of
/// ℂʳ even when `σ_j = 0`.
#[derive(Clone, Debug)]
pub(crate) struct JacobiSvd {
    /// Singular values, descending; ties keep their original order.
    pub sigma: Vec<f64>,
    /// `left[j]` is `u_j`, length `r`.
    pub left: Vec<Vec<Complex64>>,
    /// `scaled_right[j]` is `σ_j w_j`, length `c`.
    pub scaled_right: Vec<Vec<Complex64>>,
}

/// One-sided (Hestenes) Jacobi SVD, run on the columns of `Cᴴ`.
///
/// Rotations are accumulated into a unitary `Q` so that `Cᴴ Q = B` has
/// mutually orthogonal columns; then `C = Q Bᴴ`.
pub(crate) fn jacobi_svd(c: &ComplexMatrix) -> Result<JacobiSvd> {
    let (r, n) = (c.rows(), c.cols());
    // Column j of Cᴴ is the conjugate of row j of C.
    let mut b: Vec<Vec<Complex64>> = (0..r).map(|j| c.row(j).iter().map(|z| z.conj()).collect()).collect();
    let mut q: Vec<Vec<Complex64>> = (0..r)
        .map(|j| {
            let mut col = vec![Complex64::new(0.0, 0.0); r];
            col[j] = Complex64::new(1.0, 0.0);
            col
        })
        .collect();

    let tol = f64::EPSILON * sqrt(n.max(1) as f64);
    // Columns below this are numerically zero; rotating them only shuffles
    // roundoff, which never settles when there are more columns than rows.
    let negligible = f64::EPSILON * f64::EPSILON * c.frobenius_norm_sqr();
    const MAX_SWEEPS: usize = 80;
    let mut converged = r < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for j in 0..r {
            for k in (j + 1)..r {
                let alpha: f64 = b[j].iter().map(|z| z.norm_sqr()).sum();
                let beta: f64 = b[k].iter().map(|z| z.norm_sqr()).sum();
                let gamma: Complex64 = b[j].iter().zip(&b[k]).map(|(x, y)| x.conj() * y).sum();
                let g = gamma.norm();
                if g == 0.0 || g <= tol * sqrt(alpha * beta) || alpha.min(beta) <= negligible {
                    continue;
                }
                rotated = true;
                // Rotate column k's phase so the pair overlap becomes real.
                let phase = (gamma / g).conj();
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta == 0.0 {
                    1.0
                } else {
                    zeta.signum() / (zeta.abs() + hypot(1.0, zeta))
                };
                let cs = 1.0 / hypot(1.0, t);
                let sn = cs * t;
                rotate_pair(&mut b, j, k, phase, cs, sn);
                rotate_pair(&mut q, j, k, phase, cs, sn);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence);
    }

    let norms: Vec<f64> = b.iter().map(|col| sqrt(col.iter().map(|z| z.norm_sqr()).sum())).collect();
    let mut order: Vec<usize> = (0..r).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]));

    Ok(JacobiSvd {
        sigma: order.iter().map(|&j| norms[j]).collect(),
        left: order.iter().map(|&j| q[j].clone()).collect(),
        scaled_right: order.iter().map(|&j| b[j].clone()).collect(),
    })
}

fn rotate_pair(cols: &mut [Vec<Complex64>], j: usize, k: usize, phase: Complex64, cs: f64, sn: f64) {
    let (head, tail) = cols.split_at_mut(k);
    let (cj, ck) = (&mut head[j], &mut tail[0]);
    for (x, y) in cj.iter_mut().zip(ck.iter_mut()) {
        let yk = *y * phase;
        let xj = *x;
        *x = xj * cs - yk * sn;
        *y = xj * sn + yk * cs;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_two_by_two() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let ev = symmetric_tridiagonal_eigenvalues(&[2.0, 2.0], &[1.0]).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14);
        assert!((ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_toeplitz_matches_closed_form() {
        // tridiag(-1, 2, -1) of size n: 2 - 2 cos(kπ/(n+1)).
        let n = 30;
        let ev = symmetric_tridiagonal_eigenvalues(&vec![2.0; n], &vec![-1.0; n - 1]).unwrap();
        for (k, v) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * libm::cos((k + 1) as f64 * core::f64::consts::PI / (n + 1) as f64);
            assert!((v - exact).abs() < 1e-13, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn svd_of_diagonal_keeps_order_for_ties() {
        let c = ComplexMatrix::identity(3);
        let svd = jacobi_svd(&c).unwrap();
        assert_eq!(svd.sigma, vec![1.0, 1.0, 1.0]);
        for (j, u) in svd.left.iter().enumerate() {
            assert_eq!(u[j], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn svd_reconstructs_wide_complex_matrix() {
        let data: Vec<Complex64> = (0..12)
            .map(|i| Complex64::new(libm::sin(i as f64 * 1.3), libm::cos(i as f64 * 0.7 + 0.2)))
            .collect();
        let c = ComplexMatrix::from_row_major(3, 4, data);
        let svd = jacobi_svd(&c).unwrap();
        let mut rebuilt = ComplexMatrix::zeros(3, 4);
        for j in 0..3 {
            for m in 0..3 {
                for n in 0..4 {
                    rebuilt[(m, n)] += svd.left[j][m] * svd.scaled_right[j][n].conj();
                }
            }
        }
        assert!(rebuilt.max_abs_diff(&c) < 1e-13);
        assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
    }
}
