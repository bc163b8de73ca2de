//! Deterministic artifact emission.
//!
//! Every float is written with 17 significant digits so `f64` values round
//! trip losslessly; JSON objects are emitted with a fixed key order, so a
//! repeated run reproduces its artifacts byte for byte.

use std::fs;
use std::io::Write;
use std::path::Path;

use pulseopt::analysis::EnsembleStats;
use pulseopt::io::{fmt_scalar, write_control_csv};
use pulseopt::optimizer::OptResult;
use pulseopt::{ControlField64, SweepResult64};

use crate::config::RunConfig;
use crate::error::CliError;

fn f(v: f64) -> String {
    fmt_scalar(v)
}

pub fn write_control(path: &Path, c: &ControlField64) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    write_control_csv(&mut file, c)?;
    Ok(())
}

pub fn write_optimizer_metrics(path: &Path, res: &OptResult<f64>) -> Result<(), CliError> {
    let eta = pulseopt::constraints::constraint_vector(&res.control).values();
    let json = format!(
        "{{\n  \"delta\": {},\n  \"eta\": [{}, {}, {}, {}, {}],\n  \"eta_r_norm\": {},\n  \"fluence\": {},\n  \"theta_tf\": {},\n  \"max_abs_C\": {},\n  \"iters\": {}\n}}\n",
        f(res.delta),
        f(eta[0]),
        f(eta[1]),
        f(eta[2]),
        f(eta[3]),
        f(eta[4]),
        f(res.constraint_norm),
        f(res.fluence),
        f(res.theta_tf),
        f(res.control.max_abs()),
        res.iterations
    );
    fs::write(path, json)?;
    Ok(())
}

pub fn write_history(path: &Path, res: &OptResult<f64>) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "iter,J,delta,eta_r_norm")?;
    for (i, rec) in res.history.iter().enumerate() {
        writeln!(
            file,
            "{},{},{},{}",
            i,
            f(rec.objective),
            f(rec.delta),
            f(rec.constraint_norm)
        )?;
    }
    Ok(())
}

pub fn write_sweep(path: &Path, sweep: &SweepResult64) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "epsilon,delta")?;
    for (e, d) in sweep.epsilon.iter().zip(&sweep.delta) {
        writeln!(file, "{},{}", f(*e), f(*d))?;
    }
    Ok(())
}

pub fn write_sweep_metrics(path: &Path, sweep: &SweepResult64) -> Result<(), CliError> {
    let json = format!(
        "{{\n  \"robustness\": {},\n  \"points\": {}\n}}\n",
        f(sweep.robustness),
        sweep.epsilon.len()
    );
    fs::write(path, json)?;
    Ok(())
}

pub fn write_ensemble(path: &Path, stats: &EnsembleStats<f64>) -> Result<(), CliError> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "epsilon,fidelity,x,y,z")?;
    for m in &stats.members {
        writeln!(
            file,
            "{},{},{},{},{}",
            f(m.epsilon),
            f(m.fidelity),
            f(m.bloch[0]),
            f(m.bloch[1]),
            f(m.bloch[2])
        )?;
    }
    Ok(())
}

pub fn write_ensemble_metrics(path: &Path, stats: &EnsembleStats<f64>) -> Result<(), CliError> {
    let json = format!(
        "{{\n  \"min\": {},\n  \"max\": {},\n  \"mean\": {},\n  \"std\": {}\n}}\n",
        f(stats.min),
        f(stats.max),
        f(stats.mean),
        f(stats.std)
    );
    fs::write(path, json)?;
    Ok(())
}

fn json_opt_path(p: &Option<std::path::PathBuf>) -> String {
    match p {
        Some(path) => format!("\"{}\"", path.display().to_string().replace('\\', "\\\\").replace('"', "\\\"")),
        None => "null".into(),
    }
}

fn json_opt_usize(v: &Option<usize>) -> String {
    match v {
        Some(n) => n.to_string(),
        None => "null".into(),
    }
}

/// Echo of the fully resolved configuration, defaults included.
pub fn write_config_echo(path: &Path, cfg: &RunConfig) -> Result<(), CliError> {
    let json = format!(
        concat!(
            "{{\n",
            "  \"mode\": \"{mode}\",\n",
            "  \"target\": \"{target}\",\n",
            "  \"epsilon0\": {epsilon0},\n",
            "  \"samples\": {samples},\n",
            "  \"t_f\": {t_f},\n",
            "  \"alpha\": {alpha},\n",
            "  \"shape_p\": {shape_p},\n",
            "  \"beta\": {beta},\n",
            "  \"max_iters\": {max_iters},\n",
            "  \"tol_J\": {tol_j},\n",
            "  \"tol_grad\": {tol_grad},\n",
            "  \"backtrack_factor\": {backtrack_factor},\n",
            "  \"backtrack_cap\": {backtrack_cap},\n",
            "  \"constraint_mode\": \"{constraint_mode}\",\n",
            "  \"gradient_weighting\": \"{gradient_weighting}\",\n",
            "  \"restore_every\": {restore_every},\n",
            "  \"sweep\": {{\"min\": {sweep_min}, \"max\": {sweep_max}, \"resolution\": {sweep_resolution}}},\n",
            "  \"ensemble\": {{\"min\": {ens_min}, \"max\": {ens_max}, \"count\": {ens_count}, \"initial\": \"{ens_initial}\", \"target_state\": \"{ens_target}\"}},\n",
            "  \"initial\": {initial},\n",
            "  \"control\": {control},\n",
            "  \"out\": {out},\n",
            "  \"threads\": {threads}\n",
            "}}\n"
        ),
        mode = cfg.mode.name(),
        target = cfg.target,
        epsilon0 = f(cfg.epsilon0),
        samples = cfg.samples,
        t_f = f(cfg.t_f),
        alpha = f(cfg.alpha),
        shape_p = f(cfg.shape_p),
        beta = f(cfg.beta),
        max_iters = cfg.max_iters,
        tol_j = f(cfg.tol_j),
        tol_grad = f(cfg.tol_grad),
        backtrack_factor = f(cfg.backtrack_factor),
        backtrack_cap = cfg.backtrack_cap,
        constraint_mode = cfg.constraint_mode,
        gradient_weighting = cfg.gradient_weighting,
        restore_every = json_opt_usize(&cfg.restore_every),
        sweep_min = f(cfg.sweep_min),
        sweep_max = f(cfg.sweep_max),
        sweep_resolution = f(cfg.sweep_resolution),
        ens_min = f(cfg.ensemble_min),
        ens_max = f(cfg.ensemble_max),
        ens_count = cfg.ensemble_count,
        ens_initial = cfg.ensemble_initial,
        ens_target = cfg.ensemble_target_state,
        initial = json_opt_path(&cfg.initial),
        control = json_opt_path(&cfg.control),
        out = json_opt_path(&Some(cfg.out.clone())),
        threads = json_opt_usize(&cfg.threads),
    );
    fs::write(path, json)?;
    Ok(())
}
