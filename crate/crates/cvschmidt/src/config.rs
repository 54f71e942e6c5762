//! Job description, as read from and written to TOML.

use std::fmt;
use std::path::PathBuf;

use cvschmidt_core::{BasisFamily, BasisKind, PdcParams};
use serde::{Deserialize, Serialize};

use crate::error::JobError;

/// Everything needed to run one decomposition.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobConfig {
    pub output_dir: PathBuf,
    pub quadrature_order: QuadratureOrder,
    pub outputs: Vec<OutputKind>,
    pub amplitude: AmplitudeConfig,
    pub cutoffs: Cutoffs,
    pub basis: BasisPair,
    pub mode_grid: ModeGrid,
}

impl Default for JobConfig {
    fn default() -> Self {
        Self {
            output_dir: PathBuf::from("cvschmidt-out"),
            quadrature_order: QuadratureOrder::Auto,
            outputs: vec![OutputKind::Lambdas, OutputKind::Metrics],
            amplitude: AmplitudeConfig::Pdc(PdcConfig::physical_defaults()),
            cutoffs: Cutoffs { m0: 25, n0: 25 },
            basis: BasisPair {
                first: BasisConfig::default(),
                second: BasisConfig::default(),
            },
            mode_grid: ModeGrid::default(),
        }
    }
}

impl JobConfig {
    pub fn from_toml(text: &str) -> Result<Self, JobError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("job configs always serialize")
    }

    pub fn validate(&self) -> Result<(), JobError> {
        self.amplitude.validate()?;
        self.basis.first.family()?;
        self.basis.second.family()?;
        self.mode_grid.points()?;
        if let QuadratureOrder::Fixed(0) = self.quadrature_order {
            return Err(JobError::config("quadrature order must be positive"));
        }
        if let AmplitudeConfig::Delta { .. } = self.amplitude {
            if self.basis.first != self.basis.second {
                return Err(JobError::config("the delta amplitude needs the same basis on both sides"));
            }
        }
        Ok(())
    }

    pub fn wants(&self, kind: OutputKind) -> bool {
        self.outputs.contains(&kind)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Cutoffs {
    pub m0: usize,
    pub n0: usize,
}

/// `"auto"` or an explicit number of nodes per axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "OrderRepr", into = "OrderRepr")]
pub enum QuadratureOrder {
    Auto,
    Fixed(usize),
}

impl QuadratureOrder {
    pub fn resolve(self, max_cutoff: usize) -> usize {
        match self {
            QuadratureOrder::Auto => cvschmidt_core::auto_order(max_cutoff),
            QuadratureOrder::Fixed(n) => n,
        }
    }
}

impl std::str::FromStr for QuadratureOrder {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(QuadratureOrder::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected \"auto\" or a positive integer, got `{s}`")),
            Ok(n) => Ok(QuadratureOrder::Fixed(n)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum OrderRepr {
    Fixed(usize),
    Word(String),
}

impl TryFrom<OrderRepr> for QuadratureOrder {
    type Error = String;

    fn try_from(r: OrderRepr) -> Result<Self, Self::Error> {
        match r {
            OrderRepr::Fixed(n) => n.to_string().parse(),
            OrderRepr::Word(w) => w.parse(),
        }
    }
}

impl From<QuadratureOrder> for OrderRepr {
    fn from(q: QuadratureOrder) -> Self {
        match q {
            QuadratureOrder::Auto => OrderRepr::Word("auto".into()),
            QuadratureOrder::Fixed(n) => OrderRepr::Fixed(n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputKind {
    Lambdas,
    Modes,
    Coefficients,
    Metrics,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AmplitudeConfig {
    Pdc(PdcConfig),
    #[serde(alias = "expr")]
    Expression { text: String },
    Delta { n_max: usize },
}

impl AmplitudeConfig {
    fn validate(&self) -> Result<(), JobError> {
        match self {
            AmplitudeConfig::Pdc(p) => p.params().map(|_| ()),
            AmplitudeConfig::Expression { text } => cvschmidt_core::parse_expression(text).map(|_| ()).map_err(JobError::from),
            AmplitudeConfig::Delta { .. } => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            AmplitudeConfig::Pdc(_) => "pdc",
            AmplitudeConfig::Expression { .. } => "expression",
            AmplitudeConfig::Delta { .. } => "delta",
        }
    }
}

/// Either the physical parameters (any omitted one takes its default) or
/// the two dimensionless widths, never a mix.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PdcConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_e: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_o: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_bar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_q: Option<f64>,
}

pub const DEFAULT_TAU_E: f64 = 0.213;
pub const DEFAULT_TAU_O: f64 = 0.061;
pub const DEFAULT_SIGMA: f64 = 35.0;
pub const DEFAULT_OMEGA_BAR: f64 = 2700.0;

impl PdcConfig {
    pub fn physical_defaults() -> Self {
        Self {
            tau_e: Some(DEFAULT_TAU_E),
            tau_o: Some(DEFAULT_TAU_O),
            sigma: Some(DEFAULT_SIGMA),
            omega_bar: Some(DEFAULT_OMEGA_BAR),
            l_p: None,
            l_q: None,
        }
    }

    fn is_dimensionless(&self) -> bool {
        self.l_p.is_some() || self.l_q.is_some()
    }

    fn has_physical(&self) -> bool {
        self.tau_e.is_some() || self.tau_o.is_some() || self.sigma.is_some() || self.omega_bar.is_some()
    }

    pub fn params(&self) -> Result<PdcParams, JobError> {
        if self.is_dimensionless() {
            if self.has_physical() {
                return Err(JobError::config("give either physical PDC parameters or l_p/l_q, not both"));
            }
            let (Some(lp), Some(lq)) = (self.l_p, self.l_q) else {
                return Err(JobError::config("l_p and l_q must be given together"));
            };
            return Ok(PdcParams::dimensionless(lp, lq)?);
        }
        Ok(PdcParams::from_physical(
            self.tau_e.unwrap_or(DEFAULT_TAU_E),
            self.tau_o.unwrap_or(DEFAULT_TAU_O),
            self.sigma.unwrap_or(DEFAULT_SIGMA),
            self.omega_bar.unwrap_or(DEFAULT_OMEGA_BAR),
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisPair {
    pub first: BasisConfig,
    pub second: BasisConfig,
}

/// `x = beta · (k − center)` is the family's canonical variable. For
/// Legendre the support is `[center − 1/beta, center + 1/beta]`; for
/// Laguerre it is `[center, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    pub kind: KindName,
    pub beta: f64,
    #[serde(default)]
    pub center: f64,
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self {
            kind: KindName::Hermite,
            beta: 1.0,
            center: 0.0,
        }
    }
}

impl BasisConfig {
    pub fn family(&self) -> Result<BasisFamily, JobError> {
        Ok(BasisFamily::new(self.kind.into(), self.beta, self.center)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindName {
    Hermite,
    Laguerre,
    Legendre,
}

impl From<KindName> for BasisKind {
    fn from(k: KindName) -> Self {
        match k {
            KindName::Hermite => BasisKind::HermiteScaled,
            KindName::Laguerre => BasisKind::Laguerre,
            KindName::Legendre => BasisKind::Legendre,
        }
    }
}

impl fmt::Display for KindName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(BasisKind::from(*self).name())
    }
}

/// Uniform sample points `start, start + step, …, stop` for mode export,
/// and how many leading modes to write.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModeGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
    pub count: usize,
}

impl Default for ModeGrid {
    fn default() -> Self {
        Self {
            start: -5.0,
            stop: 5.0,
            step: 0.01,
            count: 4,
        }
    }
}

impl ModeGrid {
    /// Points are `start + i·step`, so no error accumulates along the grid.
    pub fn points(&self) -> Result<Vec<f64>, JobError> {
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite() && self.step > 0.0) {
            return Err(JobError::config("mode grid needs finite bounds and a positive step"));
        }
        if self.stop < self.start {
            return Err(JobError::config("mode grid stop lies below start"));
        }
        // Tolerate stop being a rounding error away from a whole step.
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        if n > 10_000_000 {
            return Err(JobError::config("mode grid has too many points"));
        }
        Ok((0..=n).map(|i| self.start + i as f64 * self.step).collect())
    }
}
