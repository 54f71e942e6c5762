use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use cvschmidt::config::{AmplitudeConfig, Cutoffs, KindName, OutputKind, PdcConfig, QuadratureOrder};
use cvschmidt::pipeline::{read_config, write_config};
use cvschmidt::{cmd_decompose, cmd_modes, cmd_sweep, Job, JobConfig, JobError, SweepAxes};

/// Schmidt decomposition of bipartite continuous-variable wavefunctions.
#[derive(Parser)]
#[command(name = "cvschmidt", version)]
struct Cli {
    /// Worker threads for sampling (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decompose one amplitude and write spectra, metrics and modes.
    #[command(allow_negative_numbers = true)]
    Decompose {
        #[command(flatten)]
        job: JobArgs,
    },
    /// Sweep basis scale and cutoffs; writes sweep.csv.
    #[command(allow_negative_numbers = true)]
    Sweep {
        #[command(flatten)]
        job: JobArgs,
        /// Basis scales, applied to both sides.
        #[arg(long, value_delimiter = ',', default_value = "1.0,0.5,2.0")]
        betas: Vec<f64>,
        /// Cutoffs, each `N` (m0 = n0 = N) or `MxN`.
        #[arg(long, value_delimiter = ',', default_value = "10,15,20,25", value_parser = parse_cutoff)]
        cutoffs: Vec<Cutoffs>,
    },
    /// Export selected modes as samples and, optionally, monomial coefficients.
    #[command(allow_negative_numbers = true)]
    Modes {
        #[command(flatten)]
        job: JobArgs,
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
        indices: Vec<usize>,
        /// Highest power kept in monomial.json.
        #[arg(long)]
        monomial_degree: Option<usize>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AmplitudeKind {
    Pdc,
    Expr,
    Delta,
}

/// Flags override the config file, which overrides the defaults.
#[derive(Args)]
struct JobArgs {
    /// TOML job file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the effective job as TOML before running.
    #[arg(long)]
    write_config: Option<PathBuf>,

    #[arg(long, value_enum)]
    amplitude: Option<AmplitudeKind>,
    /// Expression in `p` and `q` (implies `--amplitude expr`).
    #[arg(long)]
    expr: Option<String>,
    /// Size of the delta's identity block minus one.
    #[arg(long)]
    n_max: Option<usize>,

    /// (k̄ − k'_e)·L in ps.
    #[arg(long)]
    tau_e: Option<f64>,
    /// (k̄ − k'_o)·L in ps.
    #[arg(long)]
    tau_o: Option<f64>,
    /// Pump width in ps⁻¹.
    #[arg(long)]
    sigma: Option<f64>,
    /// Central frequency in ps⁻¹.
    #[arg(long)]
    omega_bar: Option<f64>,
    /// Dimensionless width L_p (with --lq, instead of the physical flags).
    #[arg(long)]
    lp: Option<f64>,
    #[arg(long)]
    lq: Option<f64>,

    #[arg(long, value_enum)]
    basis1: Option<KindName>,
    #[arg(long, value_enum)]
    basis2: Option<KindName>,
    #[arg(long)]
    beta1: Option<f64>,
    #[arg(long)]
    beta2: Option<f64>,
    #[arg(long)]
    center1: Option<f64>,
    #[arg(long)]
    center2: Option<f64>,

    #[arg(long)]
    m0: Option<usize>,
    #[arg(long)]
    n0: Option<usize>,
    /// Nodes per axis, or `auto` (4·max(m0, n0) + 40).
    #[arg(long)]
    quad_order: Option<QuadratureOrder>,

    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', value_enum)]
    outputs: Option<Vec<OutputKind>>,

    /// Mode sampling grid.
    #[arg(long)]
    k_min: Option<f64>,
    #[arg(long)]
    k_max: Option<f64>,
    #[arg(long)]
    k_step: Option<f64>,
    /// Leading modes written to modes.csv by `decompose`.
    #[arg(long)]
    mode_count: Option<usize>,
}

fn parse_cutoff(s: &str) -> Result<Cutoffs, String> {
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| format!("bad cutoff `{s}`"));
    match s.split_once(['x', 'X']) {
        Some((m, n)) => Ok(Cutoffs { m0: num(m)?, n0: num(n)? }),
        None => {
            let n = num(s)?;
            Ok(Cutoffs { m0: n, n0: n })
        }
    }
}

impl JobArgs {
    fn resolve(&self) -> Result<JobConfig, JobError> {
        let mut cfg = match &self.config {
            Some(path) => read_config(path)?,
            None => JobConfig::default(),
        };

        let kind = self.amplitude.or(self.expr.as_ref().map(|_| AmplitudeKind::Expr));
        match kind {
            Some(AmplitudeKind::Pdc) if !matches!(cfg.amplitude, AmplitudeConfig::Pdc(_)) => {
                cfg.amplitude = AmplitudeConfig::Pdc(PdcConfig::physical_defaults());
            }
            Some(AmplitudeKind::Expr) => {
                let text = match (&self.expr, &cfg.amplitude) {
                    (Some(t), _) => t.clone(),
                    (None, AmplitudeConfig::Expression { text }) => text.clone(),
                    (None, _) => return Err(JobError::config("--amplitude expr needs --expr")),
                };
                cfg.amplitude = AmplitudeConfig::Expression { text };
            }
            Some(AmplitudeKind::Delta) => {
                let n_max = match (self.n_max, &cfg.amplitude) {
                    (Some(n), _) => n,
                    (None, AmplitudeConfig::Delta { n_max }) => *n_max,
                    (None, _) => self.m0.unwrap_or(cfg.cutoffs.m0),
                };
                cfg.amplitude = AmplitudeConfig::Delta { n_max };
            }
            _ => {}
        }
        if let Some(n) = self.n_max {
            match &mut cfg.amplitude {
                AmplitudeConfig::Delta { n_max } => *n_max = n,
                _ => return Err(JobError::config("--n-max only applies to the delta amplitude")),
            }
        }

        let physical = [self.tau_e, self.tau_o, self.sigma, self.omega_bar];
        let dimensionless = [self.lp, self.lq];
        if physical.iter().chain(&dimensionless).any(Option::is_some) {
            let AmplitudeConfig::Pdc(p) = &mut cfg.amplitude else {
                return Err(JobError::config("PDC parameters given for a non-PDC amplitude"));
            };
            if dimensionless.iter().any(Option::is_some) {
                *p = PdcConfig {
                    l_p: self.lp.or(p.l_p),
                    l_q: self.lq.or(p.l_q),
                    ..PdcConfig::default()
                };
            }
            if physical.iter().any(Option::is_some) {
                let base = if p.l_p.is_some() || p.l_q.is_some() { PdcConfig::physical_defaults() } else { p.clone() };
                *p = PdcConfig {
                    tau_e: self.tau_e.or(base.tau_e),
                    tau_o: self.tau_o.or(base.tau_o),
                    sigma: self.sigma.or(base.sigma),
                    omega_bar: self.omega_bar.or(base.omega_bar),
                    // Dimensionless widths from the file give way; from flags they
                    // stay, and validation reports the clash.
                    l_p: self.lp,
                    l_q: self.lq,
                };
            }
        }

        let b = &mut cfg.basis;
        if let Some(k) = self.basis1 {
            b.first.kind = k;
        }
        if let Some(k) = self.basis2 {
            b.second.kind = k;
        }
        if let Some(v) = self.beta1 {
            b.first.beta = v;
        }
        if let Some(v) = self.beta2 {
            b.second.beta = v;
        }
        if let Some(v) = self.center1 {
            b.first.center = v;
        }
        if let Some(v) = self.center2 {
            b.second.center = v;
        }
        if let Some(v) = self.m0 {
            cfg.cutoffs.m0 = v;
        }
        if let Some(v) = self.n0 {
            cfg.cutoffs.n0 = v;
        }
        if let Some(q) = self.quad_order {
            cfg.quadrature_order = q;
        }
        if let Some(dir) = &self.out {
            cfg.output_dir = dir.clone();
        }
        if let Some(o) = &self.outputs {
            cfg.outputs = o.clone();
        }
        let g = &mut cfg.mode_grid;
        if let Some(v) = self.k_min {
            g.start = v;
        }
        if let Some(v) = self.k_max {
            g.stop = v;
        }
        if let Some(v) = self.k_step {
            g.step = v;
        }
        if let Some(v) = self.mode_count {
            g.count = v;
        }

        cfg.validate()?;
        if let Some(path) = &self.write_config {
            write_config(path, &cfg)?;
        }
        Ok(cfg)
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("cannot start the worker pool")?;
    }
    match cli.command {
        Command::Decompose { job } => {
            let cfg = job.resolve()?;
            let dir = cfg.output_dir.clone();
            let m = cmd_decompose(&Job::new(cfg)?)?;
            let fmt = |x: Option<f64>| x.map_or("n/a".into(), cvschmidt::output::format_number);
            println!(
                "d1 = {}  d2 = {}  S = {}  K = {}  -> {}",
                fmt(m.d1),
                fmt(m.d2),
                fmt(m.entropy),
                fmt(m.schmidt_number),
                dir.display()
            );
        }
        Command::Sweep { job, betas, cutoffs } => {
            let cfg = job.resolve()?;
            let rows = cmd_sweep(&cfg, &SweepAxes { betas, cutoffs })?;
            println!("{} points -> {}", rows.len(), cfg.output_dir.join("sweep.csv").display());
        }
        Command::Modes {
            job,
            indices,
            monomial_degree,
        } => {
            let cfg = job.resolve()?;
            let dir = cfg.output_dir.clone();
            cmd_modes(&Job::new(cfg)?, &indices, monomial_degree)?;
            println!("{} modes per side -> {}", indices.len(), dir.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<JobError>().map_or(1, JobError::exit_code);
            ExitCode::from(code)
        }
    }
}
