//! Truncated expansion of `f(p,q)` in product bases and its discrete Schmidt
//! decomposition.
//!
//! The coefficient block `C_mn = ∫∫ O⁽¹⁾*_m(p) O⁽²⁾*_n(q) f(p,q) dp dq` is
//! factorized directly by singular values, `C = Σᵢ √λᵢ vᵢ wᵢᵀ`. The left
//! vectors are the eigenvectors of `M = C C†`, and the right vectors are
//! `(1/√λᵢ) Σ_m V*ᵢₘ C_mn`, so
//!
//! ```text
//! f(p,q) ≈ Σᵢ √λᵢ ψ⁽¹⁾ᵢ(p) ψ⁽²⁾ᵢ(q),   ψ⁽¹⁾ᵢ = Σ_m Vᵢₘ O⁽¹⁾_m,   ψ⁽²⁾ᵢ = Σ_n Wᵢₙ O⁽²⁾_n.
//! ```

mod metrics;
mod modes;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::amplitude::{Amplitude, NormSquared};
use crate::basis::{BasisFamily, MAX_STABLE_ORDER};
use crate::error::{Error, Result};
use crate::linalg::{jacobi_svd, ComplexMatrix};
use crate::math::{sqrt, CompensatedComplexSum, CompensatedSum};
use crate::quadrature::QuadratureRule;

pub use metrics::{distance_d1, distance_d2, entropy, schmidt_number};
pub use modes::{eval_mode, eval_modes, mode_to_monomial};

/// Eigenvalues below this fraction of the largest are treated as zero.
pub const LAMBDA_CLIP: f64 = 1e-14;

/// Which subsystem a mode or basis belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// Variable `p`, basis `O⁽¹⁾`.
    First,
    /// Variable `q`, basis `O⁽²⁾`.
    Second,
}

/// Amplitude values `f(pᵢ, qⱼ)` on a tensor grid of quadrature nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    rows: usize,
    cols: usize,
    values: Vec<Complex64>,
}

impl SampleGrid {
    /// Samples every node pair, row by row.
    pub fn sample(amp: &Amplitude, rule_p: &QuadratureRule, rule_q: &QuadratureRule) -> Result<Self> {
        let rows = rule_p
            .nodes()
            .iter()
            .map(|&p| sample_row(amp, p, rule_q))
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(rows)
    }

    /// Assembles a grid from rows sampled elsewhere (e.g. in parallel).
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidParameter("sample rows have different lengths".into()));
        }
        let n = rows.len();
        Ok(Self {
            rows: n,
            cols,
            values: rows.into_iter().flatten().collect(),
        })
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.cols + j]
    }

    fn row(&self, i: usize) -> &[Complex64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }
}

/// `f(p, qⱼ)` for every node of `rule_q`, rejecting non-finite values.
pub fn sample_row(amp: &Amplitude, p: f64, rule_q: &QuadratureRule) -> Result<Vec<Complex64>> {
    rule_q
        .nodes()
        .iter()
        .map(|&q| {
            let v = amp.evaluate(p, q)?;
            if v.re.is_finite() && v.im.is_finite() {
                Ok(v)
            } else {
                Err(Error::NonFinite {
                    p,
                    q,
                    value: if v.re.is_finite() { v.im } else { v.re },
                })
            }
        })
        .collect()
}

/// The truncated block `C_mn`, `0 ≤ m ≤ m₀`, `0 ≤ n ≤ n₀`, with provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientMatrix {
    entries: ComplexMatrix,
    basis_1: BasisFamily,
    basis_2: BasisFamily,
    norm: NormSquared,
    quadrature_order: Option<(usize, usize)>,
}

impl CoefficientMatrix {
    /// Wraps an explicit block; cutoffs are its shape minus one.
    pub fn from_entries(entries: ComplexMatrix, basis_1: BasisFamily, basis_2: BasisFamily, norm: NormSquared) -> Result<Self> {
        if entries.rows() == 0 || entries.cols() == 0 {
            return Err(Error::InvalidParameter("coefficient block must be nonempty".into()));
        }
        Ok(Self {
            entries,
            basis_1,
            basis_2,
            norm,
            quadrature_order: None,
        })
    }

    pub fn entries(&self) -> &ComplexMatrix {
        &self.entries
    }

    /// `(m₀, n₀)`.
    pub fn cutoffs(&self) -> (usize, usize) {
        (self.entries.rows() - 1, self.entries.cols() - 1)
    }

    pub fn basis(&self, side: Side) -> &BasisFamily {
        match side {
            Side::First => &self.basis_1,
            Side::Second => &self.basis_2,
        }
    }

    pub fn norm_squared(&self) -> NormSquared {
        self.norm
    }

    pub fn quadrature_order(&self) -> Option<(usize, usize)> {
        self.quadrature_order
    }

    /// `Σ |C_mn|²`, the squared norm captured by the truncated expansion.
    pub fn captured_norm_squared(&self) -> f64 {
        self.entries.frobenius_norm_sqr()
    }

    /// The block of `f/‖f‖`: entries divided by `‖f‖`, norm recorded as one.
    pub fn normalized(&self) -> Result<Self> {
        let n2 = self.norm.value().ok_or(Error::DivergentNorm)?;
        if !(n2.is_finite() && n2 > 0.0) {
            return Err(Error::BadNorm(n2));
        }
        let inv = 1.0 / sqrt(n2);
        let mut entries = self.entries.clone();
        for m in 0..entries.rows() {
            entries.row_mut(m).iter_mut().for_each(|z| *z *= inv);
        }
        Ok(Self {
            entries,
            norm: NormSquared::Exact(1.0),
            ..self.clone()
        })
    }

    /// Leading block with smaller cutoffs. Entries do not depend on the
    /// cutoff, so nested sweeps reuse one computation.
    pub fn truncated(&self, m0: usize, n0: usize) -> Result<Self> {
        let (cm, cn) = self.cutoffs();
        if m0 > cm || n0 > cn {
            return Err(Error::IndexOutOfRange {
                index: m0.max(n0),
                len: cm.min(cn) + 1,
            });
        }
        Ok(Self {
            entries: self.entries.top_left(m0 + 1, n0 + 1),
            ..self.clone()
        })
    }
}

/// `C_mn` by tensor quadrature on the given rules, with `‖f‖²` taken from
/// the amplitude's hint or from the same samples.
pub fn compute_coefficients(
    amp: &Amplitude,
    basis_1: &BasisFamily,
    basis_2: &BasisFamily,
    m0: usize,
    n0: usize,
    rule_p: &QuadratureRule,
    rule_q: &QuadratureRule,
) -> Result<CoefficientMatrix> {
    check_cutoff(m0)?;
    check_cutoff(n0)?;
    let grid = SampleGrid::sample(amp, rule_p, rule_q)?;
    coefficients_from_samples(&grid, amp.norm_hint(), basis_1, basis_2, m0, n0, rule_p, rule_q)
}

fn check_cutoff(c: usize) -> Result<()> {
    if c > MAX_STABLE_ORDER {
        return Err(Error::CutoffTooLarge {
            cutoff: c,
            limit: MAX_STABLE_ORDER,
        });
    }
    Ok(())
}

/// Second half of [`compute_coefficients`], for grids sampled by the caller.
///
/// Contracts the grid one axis at a time: first `Tᵢₙ = Σⱼ w'ⱼ fᵢⱼ O⁽²⁾_n(qⱼ)`,
/// then `C_mn = Σᵢ wᵢ O⁽¹⁾_m(pᵢ) Tᵢₙ`, so each node's basis values are
/// generated once.
#[allow(clippy::too_many_arguments)]
pub fn coefficients_from_samples(
    grid: &SampleGrid,
    norm_hint: Option<f64>,
    basis_1: &BasisFamily,
    basis_2: &BasisFamily,
    m0: usize,
    n0: usize,
    rule_p: &QuadratureRule,
    rule_q: &QuadratureRule,
) -> Result<CoefficientMatrix> {
    check_cutoff(m0)?;
    check_cutoff(n0)?;
    if grid.shape() != (rule_p.order(), rule_q.order()) {
        return Err(Error::InvalidParameter("sample grid does not match the quadrature rules".into()));
    }
    let wp = rule_p.compensated_weights();
    let wq = rule_q.compensated_weights();
    let o1 = basis_table(basis_1, m0, rule_p.nodes())?;
    let o2 = basis_table(basis_2, n0, rule_q.nodes())?;

    let mut t = vec![Complex64::new(0.0, 0.0); rule_p.order() * (n0 + 1)];
    for i in 0..rule_p.order() {
        let row = grid.row(i);
        for n in 0..=n0 {
            let mut s = CompensatedComplexSum::default();
            for (j, &f) in row.iter().enumerate() {
                s.add(f * (wq[j] * o2[j * (n0 + 1) + n]));
            }
            t[i * (n0 + 1) + n] = s.value();
        }
    }

    let mut entries = ComplexMatrix::zeros(m0 + 1, n0 + 1);
    for m in 0..=m0 {
        for n in 0..=n0 {
            let mut s = CompensatedComplexSum::default();
            for i in 0..rule_p.order() {
                s.add(t[i * (n0 + 1) + n] * (wp[i] * o1[i * (m0 + 1) + m]));
            }
            entries[(m, n)] = s.value();
        }
    }

    let norm = match norm_hint {
        Some(v) if v.is_infinite() => NormSquared::Divergent,
        Some(v) => NormSquared::Exact(v),
        None => {
            let mut s = CompensatedSum::default();
            for (i, w) in wp.iter().enumerate() {
                let mut row = CompensatedSum::default();
                for (j, f) in grid.row(i).iter().enumerate() {
                    row.add(wq[j] * f.norm_sqr());
                }
                s.add(w * row.value());
            }
            NormSquared::Quadrature(s.value())
        }
    };

    Ok(CoefficientMatrix {
        entries,
        basis_1: *basis_1,
        basis_2: *basis_2,
        norm,
        quadrature_order: Some((rule_p.order(), rule_q.order())),
    })
}

/// Row-major `[node][n]` table of basis values.
pub(crate) fn basis_table(basis: &BasisFamily, n_max: usize, nodes: &[f64]) -> Result<Vec<f64>> {
    let mut table = vec![0.0; nodes.len() * (n_max + 1)];
    for (chunk, &k) in table.chunks_exact_mut(n_max + 1).zip(nodes) {
        basis.eval_batch_into(k, chunk)?;
    }
    Ok(table)
}

/// Identity coefficients of `δ(p − q)` in a real basis used on both sides.
/// The norm is recorded as divergent, so distances refuse it while the
/// decomposition, entropy and Schmidt number still work.
pub fn delta_coefficients(basis: &BasisFamily, n_max: usize) -> CoefficientMatrix {
    CoefficientMatrix {
        entries: ComplexMatrix::identity(n_max + 1),
        basis_1: *basis,
        basis_2: *basis,
        norm: NormSquared::Divergent,
        quadrature_order: None,
    }
}

/// Eigenvalues `λᵢ` of `C C†` (descending) with the mode coefficient rows.
///
/// `modes_1` is `(m₀+1) × (m₀+1)`, `modes_2` is `(m₀+1) × (n₀+1)`; row `i`
/// of each holds the coefficients of `ψ⁽¹⁾ᵢ` and `ψ⁽²⁾ᵢ` in their bases.
#[derive(Clone, Debug)]
pub struct SchmidtDecomposition {
    lambdas: Vec<f64>,
    modes_1: ComplexMatrix,
    modes_2: ComplexMatrix,
    source: CoefficientMatrix,
}

impl SchmidtDecomposition {
    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn modes(&self, side: Side) -> &ComplexMatrix {
        match side {
            Side::First => &self.modes_1,
            Side::Second => &self.modes_2,
        }
    }

    pub fn source(&self) -> &CoefficientMatrix {
        &self.source
    }

    /// Number of Schmidt terms, `m₀ + 1`.
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    /// `Σᵢ λᵢ`.
    pub fn captured_weight(&self) -> f64 {
        let mut s = CompensatedSum::default();
        self.lambdas.iter().for_each(|&l| s.add(l));
        s.value()
    }

    /// `Σᵢ √λᵢ Vᵢₘ Wᵢₙ`, which reproduces the source block.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let (rows, cols) = (self.modes_1.cols(), self.modes_2.cols());
        let mut out = ComplexMatrix::zeros(rows, cols);
        for (i, &l) in self.lambdas.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let s = sqrt(l);
            for m in 0..rows {
                let a = self.modes_1[(i, m)] * s;
                for n in 0..cols {
                    out[(m, n)] += a * self.modes_2[(i, n)];
                }
            }
        }
        out
    }
}

/// Schmidt decomposition of a truncated coefficient block.
///
/// Ties among equal eigenvalues keep the original basis order (the
/// decomposition is not unique there). Each `ψ⁽¹⁾ᵢ` has its largest
/// coefficient made real and positive, with `ψ⁽²⁾ᵢ` counter-rotated.
pub fn decompose(c: &CoefficientMatrix) -> Result<SchmidtDecomposition> {
    if !c.entries.is_finite() {
        return Err(Error::InvalidParameter("coefficient block contains non-finite entries".into()));
    }
    let svd = jacobi_svd(&c.entries)?;
    let (rows, cols) = (c.entries.rows(), c.entries.cols());
    let lambda_max = svd.sigma.first().map_or(0.0, |s| s * s);

    let mut lambdas = Vec::with_capacity(rows);
    let mut modes_1 = ComplexMatrix::zeros(rows, rows);
    let mut modes_2 = ComplexMatrix::zeros(rows, cols);
    for (i, &sigma) in svd.sigma.iter().enumerate() {
        let u = &svd.left[i];
        let pivot = u
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (m, z)| if z.norm() > best.1 { (m, z.norm()) } else { best })
            .0;
        let phase = if u[pivot].norm() > 0.0 {
            u[pivot] / u[pivot].norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for (dst, z) in modes_1.row_mut(i).iter_mut().zip(u) {
            *dst = z * phase.conj();
        }

        let lambda = sigma * sigma;
        if lambda_max > 0.0 && lambda >= LAMBDA_CLIP * lambda_max {
            lambdas.push(lambda);
            for (dst, z) in modes_2.row_mut(i).iter_mut().zip(&svd.scaled_right[i]) {
                *dst = z.conj() * phase / sigma;
            }
        } else {
            lambdas.push(0.0);
        }
    }

    Ok(SchmidtDecomposition {
        lambdas,
        modes_1,
        modes_2,
        source: c.clone(),
    })
}
