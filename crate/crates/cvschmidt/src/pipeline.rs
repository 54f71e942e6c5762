//! Running jobs: sampling in parallel, decomposing, and writing outputs.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use cvschmidt_core::{
    coefficients_from_samples, decompose, delta_coefficients, distance_d1, distance_d2, entropy, matched_rule,
    mode_to_monomial, sample_row, schmidt_number, Amplitude, BasisFamily, CoefficientMatrix, Complex64, NormSquared,
    QuadratureRule, SampleGrid, SchmidtDecomposition, Side, MAX_STABLE_ORDER,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{AmplitudeConfig, BasisConfig, Cutoffs, JobConfig, OutputKind};
use crate::error::JobError;
use crate::output::{self, round12, SweepRow};

/// What gets decomposed.
#[derive(Clone, Debug)]
pub enum Target {
    Amplitude(Amplitude),
    /// `δ(p − q)`, known only through its identity coefficients.
    Delta { n_max: usize },
}

/// The rule pair used for every integral of a job.
#[derive(Clone, Debug)]
pub struct Quadrature {
    pub rule_p: QuadratureRule,
    pub rule_q: QuadratureRule,
    pub auto: bool,
}

/// Coefficients of `f/‖f‖`, the unit-norm amplitude itself, and `‖f‖²`
/// as found before normalizing.
#[derive(Clone, Debug)]
pub struct Block {
    pub coeffs: CoefficientMatrix,
    pub amplitude: Option<Amplitude>,
    pub raw_norm: NormSquared,
}

impl Block {
    pub fn truncated(&self, m0: usize, n0: usize) -> Result<Self, JobError> {
        Ok(Self {
            coeffs: self.coeffs.truncated(m0, n0)?,
            ..self.clone()
        })
    }
}

/// A decomposition of the normalized amplitude with its error and
/// entanglement measures.
#[derive(Clone, Debug)]
pub struct Analysis {
    pub dec: SchmidtDecomposition,
    pub raw_norm: NormSquared,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    /// `None` when every weight vanishes (nothing of `f` was captured).
    pub entropy: Option<f64>,
    pub schmidt_number: Option<f64>,
}

fn unless_all_zero(r: cvschmidt_core::Result<f64>) -> Result<Option<f64>, JobError> {
    match r {
        Ok(v) => Ok(Some(v)),
        Err(cvschmidt_core::Error::AllZeroWeights) => Ok(None),
        Err(e) => Err(e.into()),
    }
}

#[derive(Clone, Debug)]
pub struct Job {
    config: JobConfig,
    target: Target,
    basis_1: BasisFamily,
    basis_2: BasisFamily,
}

impl Job {
    pub fn new(config: JobConfig) -> Result<Self, JobError> {
        config.validate()?;
        let target = match &config.amplitude {
            AmplitudeConfig::Pdc(p) => Target::Amplitude(Amplitude::pdc(p.params()?)),
            AmplitudeConfig::Expression { text } => Target::Amplitude(Amplitude::expression(text)?),
            AmplitudeConfig::Delta { n_max } => Target::Delta { n_max: *n_max },
        };
        Ok(Self {
            basis_1: config.basis.first.family()?,
            basis_2: config.basis.second.family()?,
            config,
            target,
        })
    }

    pub fn config(&self) -> &JobConfig {
        &self.config
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    /// The cutoffs actually used; the delta fixes both to `n_max`.
    pub fn cutoffs(&self) -> Cutoffs {
        match self.target {
            Target::Delta { n_max } => Cutoffs { m0: n_max, n0: n_max },
            Target::Amplitude(_) => self.config.cutoffs,
        }
    }

    /// Rules matched to each basis, sized for `max_cutoff`. `None` for the
    /// delta, which needs no integration.
    pub fn quadrature(&self, max_cutoff: usize) -> Result<Option<Quadrature>, JobError> {
        if let Target::Delta { .. } = self.target {
            return Ok(None);
        }
        let order = self.config.quadrature_order.resolve(max_cutoff);
        Ok(Some(Quadrature {
            rule_p: matched_rule(&self.basis_1, order)?,
            rule_q: matched_rule(&self.basis_2, order)?,
            auto: matches!(self.config.quadrature_order, crate::config::QuadratureOrder::Auto),
        }))
    }

    /// `C_mn` of the normalized amplitude up to `(m0, n0)`.
    pub fn coefficients(&self, m0: usize, n0: usize, quad: Option<&Quadrature>) -> Result<Block, JobError> {
        for c in [m0, n0] {
            if c > MAX_STABLE_ORDER {
                return Err(cvschmidt_core::Error::CutoffTooLarge {
                    cutoff: c,
                    limit: MAX_STABLE_ORDER,
                }
                .into());
            }
        }
        match (&self.target, quad) {
            (Target::Delta { .. }, _) => Ok(Block {
                coeffs: delta_coefficients(&self.basis_1, m0),
                amplitude: None,
                raw_norm: NormSquared::Divergent,
            }),
            (Target::Amplitude(amp), Some(q)) => {
                let grid = sample_parallel(amp, &q.rule_p, &q.rule_q)?;
                let raw = coefficients_from_samples(
                    &grid,
                    amp.norm_hint(),
                    &self.basis_1,
                    &self.basis_2,
                    m0,
                    n0,
                    &q.rule_p,
                    &q.rule_q,
                )?;
                let raw_norm = raw.norm_squared();
                if raw_norm == NormSquared::Divergent {
                    // Nothing to normalize by; decompose the truncated block as is.
                    return Ok(Block {
                        coeffs: raw,
                        amplitude: None,
                        raw_norm,
                    });
                }
                let n2 = raw_norm.value().unwrap_or(f64::NAN);
                if !(n2.is_finite() && n2 > 0.0) {
                    return Err(cvschmidt_core::Error::BadNorm(n2).into());
                }
                let unit = amp
                    .scaled(Complex64::new(1.0 / n2.sqrt(), 0.0))
                    .with_norm_hint(Some(1.0));
                Ok(Block {
                    coeffs: raw.normalized()?,
                    amplitude: Some(unit),
                    raw_norm,
                })
            }
            (Target::Amplitude(_), None) => Err(JobError::config("an amplitude needs quadrature rules")),
        }
    }

    pub fn analyse(&self, block: &Block, quad: Option<&Quadrature>) -> Result<Analysis, JobError> {
        let dec = decompose(&block.coeffs)?;
        let (d1, d2) = match (&block.amplitude, quad) {
            (Some(amp), Some(q)) => (
                Some(distance_d1(amp, &dec, &q.rule_p, &q.rule_q)?),
                Some(distance_d2(&dec)?),
            ),
            _ => (None, None),
        };
        Ok(Analysis {
            entropy: unless_all_zero(entropy(dec.lambdas()))?,
            schmidt_number: unless_all_zero(schmidt_number(dec.lambdas()))?,
            raw_norm: block.raw_norm,
            dec,
            d1,
            d2,
        })
    }

    /// Coefficients and analysis at the configured cutoffs.
    pub fn run(&self) -> Result<(Analysis, Option<Quadrature>), JobError> {
        let Cutoffs { m0, n0 } = self.cutoffs();
        let quad = self.quadrature(m0.max(n0))?;
        let block = self.coefficients(m0, n0, quad.as_ref())?;
        Ok((self.analyse(&block, quad.as_ref())?, quad))
    }

    pub fn metrics(&self, a: &Analysis, quad: Option<&Quadrature>) -> Metrics {
        let norm = a.raw_norm;
        Metrics {
            amplitude: self.amplitude_summary(),
            cutoffs: self.cutoffs(),
            basis: BasisSummary {
                first: self.config.basis.first,
                second: self.config.basis.second,
            },
            quadrature: quad.map(|q| QuadratureSummary {
                order_p: q.rule_p.order(),
                order_q: q.rule_q.order(),
                rule_p: q.rule_p.measure().name(),
                rule_q: q.rule_q.measure().name(),
                order_source: if q.auto { "auto" } else { "fixed" },
                weights: "compensated",
            }),
            norm_f_squared: norm.value().map(round12),
            norm_source: norm.source(),
            d1: a.d1.map(round12),
            d2: a.d2.map(round12),
            entropy: a.entropy.map(round12),
            schmidt_number: a.schmidt_number.map(round12),
            captured_weight: round12(a.dec.captured_weight()),
            modes: a.dec.len(),
        }
    }

    fn amplitude_summary(&self) -> AmplitudeSummary {
        let mut s = AmplitudeSummary {
            kind: self.config.amplitude.name(),
            l_p: None,
            l_q: None,
            expression: None,
            n_max: None,
        };
        match &self.target {
            Target::Amplitude(amp) => {
                if let Some(p) = amp.pdc_params() {
                    s.l_p = Some(round12(p.l_p()));
                    s.l_q = Some(round12(p.l_q()));
                }
                s.expression = amp.expression_source().map(str::to_string);
            }
            Target::Delta { n_max } => s.n_max = Some(*n_max),
        }
        s
    }
}

/// Rows sampled on the rayon pool; results are assembled in node order and
/// the first failing row (in that order) is reported.
pub fn sample_parallel(amp: &Amplitude, rule_p: &QuadratureRule, rule_q: &QuadratureRule) -> Result<SampleGrid, JobError> {
    let rows: Vec<_> = rule_p.nodes().par_iter().map(|&p| sample_row(amp, p, rule_q)).collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(SampleGrid::from_rows(rows)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct Metrics {
    pub amplitude: AmplitudeSummary,
    pub cutoffs: Cutoffs,
    pub basis: BasisSummary,
    pub quadrature: Option<QuadratureSummary>,
    pub norm_f_squared: Option<f64>,
    pub norm_source: &'static str,
    pub d1: Option<f64>,
    pub d2: Option<f64>,
    pub entropy: Option<f64>,
    pub schmidt_number: Option<f64>,
    pub captured_weight: f64,
    pub modes: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmplitudeSummary {
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l_q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BasisSummary {
    pub first: BasisConfig,
    pub second: BasisConfig,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuadratureSummary {
    pub order_p: usize,
    pub order_q: usize,
    pub rule_p: &'static str,
    pub rule_q: &'static str,
    pub order_source: &'static str,
    pub weights: &'static str,
}

fn output_dir(config: &JobConfig) -> Result<PathBuf, JobError> {
    let dir = config.output_dir.clone();
    fs::create_dir_all(&dir).map_err(|e| JobError::io(&dir, e))?;
    Ok(dir)
}

/// `decompose`: writes the configured outputs and returns the metrics.
pub fn cmd_decompose(job: &Job) -> Result<Metrics, JobError> {
    let (analysis, quad) = job.run()?;
    let metrics = job.metrics(&analysis, quad.as_ref());
    let cfg = job.config();
    let dir = output_dir(cfg)?;
    if cfg.wants(OutputKind::Lambdas) {
        output::write_lambdas(&dir.join("lambdas.csv"), analysis.dec.lambdas())?;
    }
    if cfg.wants(OutputKind::Metrics) {
        output::write_json(&dir.join("metrics.json"), &metrics)?;
    }
    if cfg.wants(OutputKind::Coefficients) {
        output::write_coefficients(&dir.join("coefficients.csv"), analysis.dec.source().entries())?;
    }
    if cfg.wants(OutputKind::Modes) {
        let count = cfg.mode_grid.count.min(analysis.dec.len());
        let indices: Vec<usize> = (0..count).collect();
        output::write_modes(&dir.join("modes.csv"), &analysis.dec, &indices, &cfg.mode_grid.points()?)?;
    }
    Ok(metrics)
}

/// Sweep axes: basis scales applied to both sides, and cutoff pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepAxes {
    pub betas: Vec<f64>,
    pub cutoffs: Vec<Cutoffs>,
}

/// `sweep`: one decomposition per `(β, cutoff)` point, rows in axis order.
///
/// For each β the block is computed once at the largest cutoff and every
/// point reads its leading sub-block. `wall_time_ms` covers the point's
/// decomposition and metrics, not the shared block.
pub fn cmd_sweep(base: &JobConfig, axes: &SweepAxes) -> Result<Vec<SweepRow>, JobError> {
    if axes.betas.is_empty() || axes.cutoffs.is_empty() {
        return Err(JobError::config("sweep axes must not be empty"));
    }
    let max_m0 = axes.cutoffs.iter().map(|c| c.m0).max().unwrap_or(0);
    let max_n0 = axes.cutoffs.iter().map(|c| c.n0).max().unwrap_or(0);
    let mut rows = Vec::new();
    for &beta in &axes.betas {
        let mut cfg = base.clone();
        cfg.basis.first.beta = beta;
        cfg.basis.second.beta = beta;
        cfg.cutoffs = Cutoffs { m0: max_m0, n0: max_n0 };
        if let AmplitudeConfig::Delta { n_max } = &mut cfg.amplitude {
            *n_max = max_m0.max(max_n0);
        }
        let job = Job::new(cfg)?;
        let top = job.cutoffs();
        let quad = job.quadrature(top.m0.max(top.n0))?;
        let full = job.coefficients(top.m0, top.n0, quad.as_ref())?;
        for c in &axes.cutoffs {
            let start = Instant::now();
            let (m0, n0) = match job.target() {
                Target::Delta { .. } => (c.m0.max(c.n0), c.m0.max(c.n0)),
                Target::Amplitude(_) => (c.m0, c.n0),
            };
            let block = full.truncated(m0, n0)?;
            let a = job.analyse(&block, quad.as_ref())?;
            rows.push(SweepRow {
                beta,
                m0,
                n0,
                d1: a.d1,
                d2: a.d2,
                entropy: a.entropy,
                schmidt_number: a.schmidt_number,
                wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
            });
        }
    }
    let dir = output_dir(base)?;
    output::write_sweep(&dir.join("sweep.csv"), &rows)?;
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct MonomialExport {
    /// The factor multiplying every polynomial, in terms of `beta`,
    /// `center` and `k`.
    pub envelope: &'static str,
    pub degree: usize,
    pub modes: Vec<MonomialMode>,
}

/// `ψ(k) = envelope(k) · Σ_d (re[d] + i·im[d]) kᵈ`, truncated at `degree`.
#[derive(Clone, Debug, Serialize)]
pub struct MonomialMode {
    pub side: u8,
    pub index: usize,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
}

fn envelope_text(b: &BasisConfig) -> &'static str {
    match b.kind {
        crate::config::KindName::Hermite => "exp(-(beta*(k-center))^2/2)",
        crate::config::KindName::Laguerre => "exp(-beta*(k-center)/2)",
        crate::config::KindName::Legendre => "1",
    }
}

/// `modes`: samples of the chosen modes and, with a degree, their monomial
/// coefficients.
pub fn cmd_modes(job: &Job, indices: &[usize], monomial_degree: Option<usize>) -> Result<Option<MonomialExport>, JobError> {
    let Cutoffs { m0, .. } = job.cutoffs();
    if let Some(&bad) = indices.iter().find(|&&i| i > m0) {
        return Err(JobError::config(format!("mode index {bad} exceeds the cutoff {m0}")));
    }
    let (analysis, _) = job.run()?;
    let dec = &analysis.dec;
    let cfg = job.config();
    let dir = output_dir(cfg)?;
    output::write_modes(&dir.join("modes.csv"), dec, indices, &cfg.mode_grid.points()?)?;

    let Some(degree) = monomial_degree else {
        return Ok(None);
    };
    if cfg.basis.first.kind != cfg.basis.second.kind {
        return Err(JobError::config("monomial export needs the same basis kind on both sides"));
    }
    let mut modes = Vec::new();
    for (side, tag) in [(Side::First, 1), (Side::Second, 2)] {
        let available = dec.modes(side).cols() - 1;
        if degree > available {
            return Err(JobError::config(format!(
                "monomial degree {degree} exceeds the side-{tag} cutoff {available}"
            )));
        }
        for &i in indices {
            let c = mode_to_monomial(dec, side, i, degree)?;
            modes.push(MonomialMode {
                side: tag,
                index: i,
                re: c.iter().map(|z| round12(z.re)).collect(),
                im: c.iter().map(|z| round12(z.im)).collect(),
            });
        }
    }
    let export = MonomialExport {
        envelope: envelope_text(&cfg.basis.first),
        degree,
        modes,
    };
    output::write_json(&dir.join("monomial.json"), &export)?;
    Ok(Some(export))
}

/// Writes `config` as TOML.
pub fn write_config(path: &Path, config: &JobConfig) -> Result<(), JobError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| JobError::io(parent, e))?;
    }
    fs::write(path, config.to_toml()).map_err(|e| JobError::io(path, e))
}

pub fn read_config(path: &Path) -> Result<JobConfig, JobError> {
    let text = fs::read_to_string(path).map_err(|e| JobError::io(path, e))?;
    JobConfig::from_toml(&text)
}
