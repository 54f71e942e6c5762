//! File formats. Every number goes through [`format_number`], so reruns of
//! the same job produce byte-identical files.

use std::fs;
use std::path::Path;

use cvschmidt_core::{eval_modes, Complex64, ComplexMatrix, SchmidtDecomposition, Side};
use serde::Serialize;

use crate::error::JobError;

/// Twelve significant digits, `%.12g` style: fixed notation for exponents
/// in `[-5, 12)`, scientific otherwise, trailing zeros dropped.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("LowerExp exponent is an integer");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        trim_fraction(&format!("{x:.decimals$}")).to_string()
    } else {
        format!("{}e{exp}", trim_fraction(mantissa))
    }
}

fn trim_fraction(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to the twelve digits [`format_number`] prints, for JSON.
pub fn round12(x: f64) -> f64 {
    if x.is_finite() {
        format_number(x).parse().expect("formatted numbers parse back")
    } else {
        x
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>, JobError> {
    let file = fs::File::create(path).map_err(|e| JobError::io(path, e))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

/// `n,lambda`
pub fn write_lambdas(path: &Path, lambdas: &[f64]) -> Result<(), JobError> {
    let mut w = csv_writer(path)?;
    w.write_record(["n", "lambda"])?;
    for (n, &l) in lambdas.iter().enumerate() {
        w.write_record([n.to_string(), format_number(l)])?;
    }
    w.flush().map_err(|e| JobError::io(path, e))
}

/// `m,n,re,im`, row-major.
pub fn write_coefficients(path: &Path, c: &ComplexMatrix) -> Result<(), JobError> {
    let mut w = csv_writer(path)?;
    w.write_record(["m", "n", "re", "im"])?;
    for m in 0..c.rows() {
        for (n, z) in c.row(m).iter().enumerate() {
            w.write_record([m.to_string(), n.to_string(), format_number(z.re), format_number(z.im)])?;
        }
    }
    w.flush().map_err(|e| JobError::io(path, e))
}

/// `k,psi1_i…,psi2_i…` for the selected mode indices. Imaginary parts get
/// their own `_im` columns, written only when some mode is complex.
pub fn write_modes(path: &Path, dec: &SchmidtDecomposition, indices: &[usize], points: &[f64]) -> Result<(), JobError> {
    if let Some(&bad) = indices.iter().find(|&&i| i >= dec.len()) {
        return Err(JobError::config(format!("mode index {bad} out of range (have {} modes)", dec.len())));
    }
    let mut rows: Vec<(f64, Vec<Complex64>, Vec<Complex64>)> = Vec::with_capacity(points.len());
    for &k in points {
        let first = eval_modes(dec, Side::First, k)?;
        let second = eval_modes(dec, Side::Second, k)?;
        rows.push((
            k,
            indices.iter().map(|&i| first[i]).collect(),
            indices.iter().map(|&i| second[i]).collect(),
        ));
    }
    let complex = [Side::First, Side::Second]
        .iter()
        .any(|&s| indices.iter().any(|&i| dec.modes(s).row(i).iter().any(|z| z.im != 0.0)));

    let mut header = vec!["k".to_string()];
    for side in [1, 2] {
        for &i in indices {
            header.push(format!("psi{side}_{i}"));
            if complex {
                header.push(format!("psi{side}_{i}_im"));
            }
        }
    }
    let mut w = csv_writer(path)?;
    w.write_record(&header)?;
    for (k, first, second) in rows {
        let mut record = vec![format_number(k)];
        for z in first.iter().chain(&second) {
            record.push(format_number(z.re));
            if complex {
                record.push(format_number(z.im));
            }
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| JobError::io(path, e))
}

/// One row of `sweep.csv`. Undefined measures are empty cells.
#[derive(Clone, Debug)]
pub struct SweepRow {
    pub beta: f64,
    pub m0: usize,
    pub n0: usize,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub entropy: Option<f64>,
    pub schmidt_number: Option<f64>,
    pub wall_time_ms: f64,
}

pub const SWEEP_HEADER: [&str; 8] = ["beta", "m0", "n0", "d1", "d2", "entropy", "schmidt_number", "wall_time_ms"];

pub fn write_sweep(path: &Path, rows: &[SweepRow]) -> Result<(), JobError> {
    let opt = |x: Option<f64>| x.map(format_number).unwrap_or_default();
    let mut w = csv_writer(path)?;
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            format_number(r.beta),
            r.m0.to_string(),
            r.n0.to_string(),
            opt(r.d1),
            opt(r.d2),
            opt(r.entropy),
            opt(r.schmidt_number),
            format!("{:.3}", r.wall_time_ms),
        ])?;
    }
    w.flush().map_err(|e| JobError::io(path, e))
}

/// Pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), JobError> {
    let mut text = serde_json::to_string_pretty(value).expect("output records always serialize");
    text.push('\n');
    fs::write(path, text).map_err(|e| JobError::io(path, e))
}
