//! Run configuration: defaults, optional TOML file, command-line overrides.
//!
//! Resolution order is defaults < file < explicit flags; the fully resolved
//! configuration is echoed into every output directory so a run's tables
//! can be reproduced from its artifacts alone.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use pulseopt::analysis::StateVector;
use pulseopt::constraints::GradientWeighting;
use pulseopt::objective::GateTarget;
use pulseopt::optimizer::{ConstraintMode, OptimizerConfig};
use pulseopt::StateVector64;

use crate::error::CliError;

/// Workflow selected by the subcommand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    OptimizeOct,
    SynthDp,
    OptimizeHybrid,
    Sweep,
    Ensemble,
}

impl Mode {
    pub fn name(&self) -> &'static str {
        match self {
            Mode::OptimizeOct => "optimize-oct",
            Mode::SynthDp => "synth-dp",
            Mode::OptimizeHybrid => "optimize-hybrid",
            Mode::Sweep => "sweep",
            Mode::Ensemble => "ensemble",
        }
    }
}

/// Flag values as they arrive from clap (all optional).
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// TOML config file with the same keys as these flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Target gate: `z_pi_2` | `z_pi` | `angle:<radians>`.
    #[arg(long)]
    pub target: Option<String>,
    /// Drift estimate used for propagation (scaled units).
    #[arg(long)]
    pub epsilon0: Option<f64>,
    /// Grid cells N.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Final time t_f (scaled units).
    #[arg(long)]
    pub t_f: Option<f64>,
    /// Fluence weight α in the objective.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shape-function exponent p in s(t) = sin^p(πt/t_f).
    #[arg(long)]
    pub shape_p: Option<f64>,
    /// Initial line-search step β.
    #[arg(long)]
    pub beta: Option<f64>,
    /// Iteration budget.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Plateau tolerance on successive objective values.
    #[arg(long)]
    pub tol_j: Option<f64>,
    /// Weighted gradient-norm stopping tolerance.
    #[arg(long)]
    pub tol_grad: Option<f64>,
    /// Multiplicative step shrink per rejected line-search trial.
    #[arg(long)]
    pub backtrack_factor: Option<f64>,
    /// Max shrinks per iteration.
    #[arg(long)]
    pub backtrack_cap: Option<usize>,
    /// Constraint vector for the hybrid flow: none | reduced | full.
    #[arg(long)]
    pub constraint_mode: Option<String>,
    /// Constraint gradient convention: weighted | raw.
    #[arg(long)]
    pub gradient_weighting: Option<String>,
    /// Re-run feasibility restoration every K accepted hybrid steps.
    #[arg(long)]
    pub restore_every: Option<usize>,
    /// Interval minimum (sweep / ensemble).
    #[arg(long)]
    pub min: Option<f64>,
    /// Interval maximum (sweep / ensemble).
    #[arg(long)]
    pub max: Option<f64>,
    /// Sweep resolution (drift step).
    #[arg(long)]
    pub res: Option<f64>,
    /// Ensemble point count (inclusive endpoints).
    #[arg(long)]
    pub count: Option<usize>,
    /// Ensemble initial state: x+|x-|y+|y-|z+|z-.
    #[arg(long)]
    pub initial_state: Option<String>,
    /// Ensemble target state: x+|x-|y+|y-|z+|z-.
    #[arg(long)]
    pub target_state: Option<String>,
    /// Input control CSV used as the optimizer's initial field.
    #[arg(long)]
    pub initial: Option<PathBuf>,
    /// Input control CSV analyzed by sweep/ensemble.
    #[arg(long)]
    pub control: Option<PathBuf>,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweep/ensemble fan-out (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
}

/// TOML file mirror of [`RunArgs`].
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub mode: Option<String>,
    pub target: Option<String>,
    pub epsilon0: Option<f64>,
    pub samples: Option<usize>,
    pub t_f: Option<f64>,
    pub alpha: Option<f64>,
    pub shape_p: Option<f64>,
    pub beta: Option<f64>,
    pub max_iters: Option<usize>,
    #[serde(rename = "tol_J")]
    pub tol_j: Option<f64>,
    pub tol_grad: Option<f64>,
    pub backtrack_factor: Option<f64>,
    pub backtrack_cap: Option<usize>,
    pub constraint_mode: Option<String>,
    pub gradient_weighting: Option<String>,
    pub restore_every: Option<usize>,
    pub sweep: Option<FileSweep>,
    pub ensemble: Option<FileEnsemble>,
    pub initial: Option<PathBuf>,
    pub control: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileSweep {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub resolution: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileEnsemble {
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub count: Option<usize>,
    pub initial: Option<String>,
    pub target_state: Option<String>,
}

/// Fully resolved configuration for one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub mode: Mode,
    pub target: String,
    pub epsilon0: f64,
    pub samples: usize,
    pub t_f: f64,
    pub alpha: f64,
    pub shape_p: f64,
    pub beta: f64,
    pub max_iters: usize,
    pub tol_j: f64,
    pub tol_grad: f64,
    pub backtrack_factor: f64,
    pub backtrack_cap: usize,
    pub constraint_mode: String,
    pub gradient_weighting: String,
    pub restore_every: Option<usize>,
    pub sweep_min: f64,
    pub sweep_max: f64,
    pub sweep_resolution: f64,
    pub ensemble_min: f64,
    pub ensemble_max: f64,
    pub ensemble_count: usize,
    pub ensemble_initial: String,
    pub ensemble_target_state: String,
    pub initial: Option<PathBuf>,
    pub control: Option<PathBuf>,
    pub out: PathBuf,
    pub threads: Option<usize>,
}

fn pick<T: Clone>(cli: &Option<T>, file: &Option<T>, default: T) -> T {
    cli.clone().or_else(|| file.clone()).unwrap_or(default)
}

impl RunConfig {
    pub fn resolve(mode: Mode, args: &RunArgs) -> Result<Self, CliError> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(CliError::Io)?;
                toml::from_str(&text)
                    .map_err(|e| CliError::Config(format!("bad config file: {e}")))?
            }
            None => FileConfig::default(),
        };
        if let Some(file_mode) = &file.mode {
            if file_mode != mode.name() {
                return Err(CliError::Config(format!(
                    "config file declares mode '{file_mode}' but the subcommand is '{}'",
                    mode.name()
                )));
            }
        }
        let fs = file.sweep.clone().unwrap_or_default();
        let fe = file.ensemble.clone().unwrap_or_default();
        let target = args
            .target
            .clone()
            .or(file.target.clone())
            .ok_or_else(|| CliError::Config("missing required option --target".into()))?;
        let out = args
            .out
            .clone()
            .or(file.out.clone())
            .ok_or_else(|| CliError::Config("missing required option --out".into()))?;
        let cfg = Self {
            mode,
            target,
            epsilon0: pick(&args.epsilon0, &file.epsilon0, 0.0),
            samples: pick(&args.samples, &file.samples, 1024),
            t_f: pick(&args.t_f, &file.t_f, 1.0),
            alpha: pick(&args.alpha, &file.alpha, 1e-6),
            shape_p: pick(&args.shape_p, &file.shape_p, 1.0),
            beta: pick(&args.beta, &file.beta, 2.0),
            max_iters: pick(&args.max_iters, &file.max_iters, 20_000),
            tol_j: pick(&args.tol_j, &file.tol_j, 1e-12),
            tol_grad: pick(&args.tol_grad, &file.tol_grad, 1e-10),
            backtrack_factor: pick(&args.backtrack_factor, &file.backtrack_factor, 0.5),
            backtrack_cap: pick(&args.backtrack_cap, &file.backtrack_cap, 40),
            constraint_mode: pick(&args.constraint_mode, &file.constraint_mode, "reduced".into()),
            gradient_weighting: pick(
                &args.gradient_weighting,
                &file.gradient_weighting,
                "weighted".into(),
            ),
            restore_every: args.restore_every.or(file.restore_every),
            sweep_min: pick(&args.min, &fs.min, 0.0),
            sweep_max: pick(&args.max, &fs.max, 6.0),
            sweep_resolution: pick(&args.res, &fs.resolution, 0.01),
            ensemble_min: pick(&args.min, &fe.min, 1.5),
            ensemble_max: pick(&args.max, &fe.max, 2.5),
            ensemble_count: pick(&args.count, &fe.count, 21),
            ensemble_initial: pick(&args.initial_state, &fe.initial, "x+".into()),
            ensemble_target_state: pick(&args.target_state, &fe.target_state, "x-".into()),
            initial: args.initial.clone().or(file.initial.clone()),
            control: args.control.clone().or(file.control.clone()),
            out,
            threads: args.threads.or(file.threads),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        self.parse_target()?;
        if self.mode == Mode::Ensemble {
            self.state(&self.ensemble_initial)?;
            self.state(&self.ensemble_target_state)?;
        }
        self.parse_constraint_mode()?;
        self.parse_gradient_weighting()?;
        Ok(())
    }

    /// φ and the gate for the configured target.
    pub fn parse_target(&self) -> Result<(f64, GateTarget<f64>), CliError> {
        match self.target.as_str() {
            "z_pi_2" => Ok((std::f64::consts::FRAC_PI_2, GateTarget::z_half_pi())),
            "z_pi" => Ok((std::f64::consts::PI, GateTarget::z_pi())),
            other => {
                if let Some(angle) = other.strip_prefix("angle:") {
                    let phi: f64 = angle.parse().map_err(|e| {
                        CliError::Config(format!("bad target angle '{angle}': {e}"))
                    })?;
                    let target = GateTarget::z_angle(phi)
                        .map_err(|e| CliError::Config(e.to_string()))?;
                    Ok((phi, target))
                } else {
                    Err(CliError::Config(format!(
                        "unknown target '{other}' (expected z_pi_2, z_pi, or angle:<radians>)"
                    )))
                }
            }
        }
    }

    pub fn parse_constraint_mode(&self) -> Result<ConstraintMode, CliError> {
        match self.constraint_mode.as_str() {
            "none" => Ok(ConstraintMode::None),
            "reduced" => Ok(ConstraintMode::Reduced),
            "full" => Ok(ConstraintMode::Full),
            other => Err(CliError::Config(format!("unknown constraint mode '{other}'"))),
        }
    }

    pub fn parse_gradient_weighting(&self) -> Result<GradientWeighting, CliError> {
        match self.gradient_weighting.as_str() {
            "weighted" => Ok(GradientWeighting::ShapeWeighted),
            "raw" => Ok(GradientWeighting::Raw),
            other => Err(CliError::Config(format!("unknown gradient weighting '{other}'"))),
        }
    }

    pub fn state(&self, name: &str) -> Result<StateVector64, CliError> {
        match name {
            "x+" => Ok(StateVector::sigma_x_plus()),
            "x-" => Ok(StateVector::sigma_x_minus()),
            "y+" => Ok(StateVector::sigma_y(true)),
            "y-" => Ok(StateVector::sigma_y(false)),
            "z+" => Ok(StateVector::sigma_z_plus()),
            "z-" => Ok(StateVector::sigma_z_minus()),
            other => Err(CliError::Config(format!(
                "unknown state '{other}' (expected one of x+|x-|y+|y-|z+|z-)"
            ))),
        }
    }

    pub fn optimizer_config(&self) -> Result<OptimizerConfig<f64>, CliError> {
        Ok(OptimizerConfig {
            beta: self.beta,
            max_iters: self.max_iters,
            tol_j: self.tol_j,
            tol_grad: self.tol_grad,
            backtrack_factor: self.backtrack_factor,
            backtrack_cap: self.backtrack_cap,
            constraint_mode: self.parse_constraint_mode()?,
            gradient_weighting: self.parse_gradient_weighting()?,
            restore_every: self.restore_every,
        })
    }

    pub fn out_path(&self, file: &str) -> PathBuf {
        Path::new(&self.out).join(file)
    }
}
