use alloc::vec::Vec;

use num_complex::Complex64;

use super::{basis_table, SchmidtDecomposition, Side};
use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::math::{log2, sqrt, CompensatedSum};
use crate::quadrature::QuadratureRule;

/// Relative mean-square distance between `f` and its truncated Schmidt sum,
///
/// ```text
/// d¹ = ∫∫ |f − Σᵢ √λᵢ ψ⁽¹⁾ᵢ ψ⁽²⁾ᵢ|² / ‖f‖².
/// ```
///
/// The residual is integrated on the rules' nodes. The part of `|f|²` the
/// rules cannot see (tails past the outermost nodes) is restored from the
/// recorded norm: `‖f‖² − Q[|f|²]` is added to the residual. When the norm
/// itself came from these rules that correction vanishes.
pub fn distance_d1(
    amp: &Amplitude,
    dec: &SchmidtDecomposition,
    rule_p: &QuadratureRule,
    rule_q: &QuadratureRule,
) -> Result<f64> {
    let norm = dec.source().norm_squared().value().ok_or(Error::DivergentNorm)?;
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::BadNorm(norm));
    }

    let active: Vec<usize> = (0..dec.len()).filter(|&i| dec.lambdas()[i] > 0.0).collect();
    let psi_1 = mode_table(dec, Side::First, rule_p.nodes(), &active)?;
    let psi_2 = mode_table(dec, Side::Second, rule_q.nodes(), &active)?;
    let roots: Vec<f64> = active.iter().map(|&i| sqrt(dec.lambdas()[i])).collect();
    let r = active.len();

    let wp = rule_p.compensated_weights();
    let wq = rule_q.compensated_weights();
    let mut residual = CompensatedSum::default();
    let mut seen = CompensatedSum::default();
    for (i, &p) in rule_p.nodes().iter().enumerate() {
        let mut res_row = CompensatedSum::default();
        let mut seen_row = CompensatedSum::default();
        for (j, &q) in rule_q.nodes().iter().enumerate() {
            let f = amp.evaluate(p, q)?;
            let mut approx = Complex64::new(0.0, 0.0);
            for l in 0..r {
                approx += psi_1[i * r + l] * psi_2[j * r + l] * roots[l];
            }
            res_row.add(wq[j] * (f - approx).norm_sqr());
            seen_row.add(wq[j] * f.norm_sqr());
        }
        residual.add(wp[i] * res_row.value());
        seen.add(wp[i] * seen_row.value());
    }
    let d1 = (residual.value() + (norm - seen.value())) / norm;
    Ok(d1.max(0.0))
}

/// `[node][l]` values of the active modes on one side.
fn mode_table(dec: &SchmidtDecomposition, side: Side, nodes: &[f64], active: &[usize]) -> Result<Vec<Complex64>> {
    let modes = dec.modes(side);
    let n_max = modes.cols() - 1;
    let basis = dec.source().basis(side);
    let table = basis_table(basis, n_max, nodes)?;
    let mut out = Vec::with_capacity(nodes.len() * active.len());
    for chunk in table.chunks_exact(n_max + 1) {
        for &i in active {
            out.push(modes.row(i).iter().zip(chunk).map(|(a, &o)| a * o).sum());
        }
    }
    Ok(out)
}

/// `d² = 1 − Σᵢ λᵢ / ‖f‖²`, clamped to `[0, 1]`.
pub fn distance_d2(dec: &SchmidtDecomposition) -> Result<f64> {
    let norm = dec.source().norm_squared().value().ok_or(Error::DivergentNorm)?;
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::BadNorm(norm));
    }
    Ok((1.0 - dec.captured_weight() / norm).clamp(0.0, 1.0))
}

fn check_weights(lambdas: &[f64]) -> Result<f64> {
    if let Some(&bad) = lambdas.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(Error::InvalidParameter(alloc::format!("Schmidt weight {bad} is not a finite nonnegative number")));
    }
    let mut total = CompensatedSum::default();
    lambdas.iter().for_each(|&l| total.add(l));
    let total = total.value();
    if total == 0.0 {
        return Err(Error::AllZeroWeights);
    }
    Ok(total)
}

/// Entropy of entanglement `S = −Σ pᵢ log₂ pᵢ` of the weights renormalized
/// to `pᵢ = λᵢ / Σλ`, with `0 log 0 = 0`.
///
/// Renormalizing by the captured weight keeps `S` meaningful for truncated
/// decompositions and for the (non-normalizable) delta.
pub fn entropy(lambdas: &[f64]) -> Result<f64> {
    let total = check_weights(lambdas)?;
    let mut s = CompensatedSum::default();
    for &l in lambdas {
        if l > 0.0 {
            let p = l / total;
            s.add(-p * log2(p));
        }
    }
    Ok(s.value().max(0.0))
}

/// Participation ratio `K = (Σλ)² / Σλ²`.
pub fn schmidt_number(lambdas: &[f64]) -> Result<f64> {
    let total = check_weights(lambdas)?;
    let mut sq = CompensatedSum::default();
    lambdas.iter().for_each(|&l| sq.add((l / total) * (l / total)));
    Ok(1.0 / sq.value())
}
