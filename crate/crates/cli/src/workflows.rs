//! The five workflows behind the subcommands.

use std::fs;
use std::io::BufReader;

use pulseopt::analysis::{ensemble_state_fidelity, epsilon_sweep, linspace};
use pulseopt::control::{initial_square_pulse, ShapeFunction, TimeGrid};
use pulseopt::io::read_control_csv;
use pulseopt::objective::ObjectiveConfig;
use pulseopt::optimizer::{optimize_hybrid, optimize_oct, synth_dp, synth_dp_result};
use pulseopt::ControlField64;

use crate::artifacts;
use crate::config::{Mode, RunConfig};
use crate::error::CliError;

pub fn run(cfg: &RunConfig) -> Result<(), CliError> {
    if let Some(threads) = cfg.threads {
        // Sweep/ensemble points fan out over this pool; results are joined
        // by index, so the pool size never changes the output bytes.
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    fs::create_dir_all(&cfg.out)?;
    artifacts::write_config_echo(&cfg.out_path("config.echo.json"), cfg)?;
    match cfg.mode {
        Mode::OptimizeOct => optimize_oct_workflow(cfg),
        Mode::SynthDp => synth_dp_workflow(cfg),
        Mode::OptimizeHybrid => optimize_hybrid_workflow(cfg),
        Mode::Sweep => sweep_workflow(cfg),
        Mode::Ensemble => ensemble_workflow(cfg),
    }
}

fn grid_and_shape(cfg: &RunConfig) -> Result<(TimeGrid<f64>, ShapeFunction<f64>), CliError> {
    let grid = TimeGrid::new(cfg.samples, cfg.t_f)?;
    let shape = ShapeFunction::new(cfg.shape_p)?;
    Ok((grid, shape))
}

fn load_control(cfg: &RunConfig, path: &std::path::Path) -> Result<ControlField64, CliError> {
    let file = fs::File::open(path)?;
    let shape = ShapeFunction::new(cfg.shape_p)?;
    Ok(read_control_csv(&mut BufReader::new(file), shape)?)
}

/// Initial field for the unconstrained optimizer: an explicit CSV when
/// given, otherwise a smoothed square pulse of area φ.
fn initial_field(cfg: &RunConfig, phi: f64) -> Result<ControlField64, CliError> {
    match &cfg.initial {
        Some(path) => load_control(cfg, path),
        None => {
            let (grid, shape) = grid_and_shape(cfg)?;
            Ok(initial_square_pulse(phi, &grid, &shape)?)
        }
    }
}

fn optimize_oct_workflow(cfg: &RunConfig) -> Result<(), CliError> {
    let (phi, target) = cfg.parse_target()?;
    let (_, shape) = grid_and_shape(cfg)?;
    let initial = initial_field(cfg, phi)?;
    let obj = ObjectiveConfig::new(cfg.alpha, shape, cfg.epsilon0)?;
    let res = optimize_oct(&initial, &target, &obj, &cfg.optimizer_config()?)?;
    artifacts::write_control(&cfg.out_path("control.csv"), &res.control)?;
    artifacts::write_optimizer_metrics(&cfg.out_path("metrics.json"), &res)?;
    artifacts::write_history(&cfg.out_path("history.csv"), &res)?;
    Ok(())
}

fn synth_dp_workflow(cfg: &RunConfig) -> Result<(), CliError> {
    let (phi, _) = cfg.parse_target()?;
    let (grid, shape) = grid_and_shape(cfg)?;
    let res = synth_dp_result(phi, &grid, &shape, &cfg.optimizer_config()?)?;
    artifacts::write_control(&cfg.out_path("control.csv"), &res.control)?;
    artifacts::write_optimizer_metrics(&cfg.out_path("metrics.json"), &res)?;
    artifacts::write_history(&cfg.out_path("history.csv"), &res)?;
    Ok(())
}

fn optimize_hybrid_workflow(cfg: &RunConfig) -> Result<(), CliError> {
    let (phi, target) = cfg.parse_target()?;
    let (grid, shape) = grid_and_shape(cfg)?;
    let initial = match &cfg.initial {
        Some(path) => load_control(cfg, path)?,
        // Matching the intended flow: the hybrid starts from a decoupling
        // pulse, synthesized on the spot when none is supplied.
        None => synth_dp(phi, &grid, &shape, &cfg.optimizer_config()?)?,
    };
    let obj = ObjectiveConfig::new(cfg.alpha, shape, cfg.epsilon0)?;
    let res = optimize_hybrid(&initial, &target, &obj, &cfg.optimizer_config()?)?;
    artifacts::write_control(&cfg.out_path("control.csv"), &res.control)?;
    artifacts::write_optimizer_metrics(&cfg.out_path("metrics.json"), &res)?;
    artifacts::write_history(&cfg.out_path("history.csv"), &res)?;
    Ok(())
}

fn sweep_workflow(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, target) = cfg.parse_target()?;
    let control_path = cfg
        .control
        .as_ref()
        .ok_or_else(|| CliError::Config("sweep needs --control <csv>".into()))?;
    let control = load_control(cfg, control_path)?;
    let mut sweep = epsilon_sweep(
        &control,
        &target,
        cfg.sweep_min,
        cfg.sweep_max,
        cfg.sweep_resolution,
    )?;
    sweep.source = Some(control_path.display().to_string());
    artifacts::write_sweep(&cfg.out_path("sweep.csv"), &sweep)?;
    artifacts::write_sweep_metrics(&cfg.out_path("metrics.json"), &sweep)?;
    Ok(())
}

fn ensemble_workflow(cfg: &RunConfig) -> Result<(), CliError> {
    let control_path = cfg
        .control
        .as_ref()
        .ok_or_else(|| CliError::Config("ensemble needs --control <csv>".into()))?;
    let control = load_control(cfg, control_path)?;
    let initial = cfg.state(&cfg.ensemble_initial)?;
    let target_state = cfg.state(&cfg.ensemble_target_state)?;
    let eps = linspace(cfg.ensemble_min, cfg.ensemble_max, cfg.ensemble_count)?;
    let stats = ensemble_state_fidelity(&control, &initial, &target_state, &eps)?;
    artifacts::write_ensemble(&cfg.out_path("ensemble.csv"), &stats)?;
    artifacts::write_ensemble_metrics(&cfg.out_path("metrics.json"), &stats)?;
    Ok(())
}
