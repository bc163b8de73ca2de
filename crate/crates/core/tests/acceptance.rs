//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured values (run with `--nocapture` to see them).
//!
//! The expensive artifacts (optimized controls, synthesized pulses, hybrid
//! flows) are computed once and shared across criteria through lazy
//! statics. Everything is deterministic, so the suite doubles as a
//! regression net for the numeric kernels.

use once_cell::sync::Lazy;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use pulseopt::analysis::{
    ensemble_state_fidelity, epsilon_sweep, linspace, robustness_integral, StateVector,
};
use pulseopt::constraints::{
    constraint_gradients, constraint_gradients_with, constraint_integrals, constraint_vector,
    GradientWeighting,
};
use pulseopt::control::{initial_square_pulse, ControlField, ShapeFunction, TimeGrid};
use pulseopt::objective::{
    gate_distance, objective_gradient, objective_value, GateTarget, ObjectiveConfig,
};
use pulseopt::optimizer::{optimize_hybrid, optimize_oct, synth_dp_result, OptimizerConfig};
use pulseopt::projection::project_gradient;
use pulseopt::su2::{propagate, rotation, HamiltonianParams, Unitary2};
use pulseopt::units::{convert_units, si_factor, Direction, Quantity};
use pulseopt::{ControlField64, OptResult64};

const N: usize = 1024;
/// Grid for the third-order robustness criterion: fine enough that the
/// O(dt²) mismatch between quadrature constraints and discrete dynamics
/// stays below the cubic term at the smallest swept drift.
const N_SLOPE: usize = 16384;
const EPS0_SET: [f64; 6] = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];

fn shape() -> ShapeFunction<f64> {
    ShapeFunction::new(1.0).unwrap()
}

fn grid(n: usize) -> TimeGrid<f64> {
    TimeGrid::new(n, 1.0).unwrap()
}

fn obj_cfg(eps0: f64) -> ObjectiveConfig<f64> {
    ObjectiveConfig::new(1e-6, shape(), eps0).unwrap()
}

#[derive(Clone, Copy)]
struct Case {
    label: &'static str,
    phi: f64,
}

const CASES: [Case; 2] = [Case { label: "z_pi_2", phi: FRAC_PI_2 }, Case { label: "z_pi", phi: PI }];

fn target_of(case: &Case) -> GateTarget<f64> {
    if case.phi == PI {
        GateTarget::z_pi()
    } else {
        GateTarget::z_half_pi()
    }
}

/// All twelve unconstrained optimizations, with wall time per run.
static OCT_RUNS: Lazy<Vec<(Case, f64, OptResult64, Duration)>> = Lazy::new(|| {
    let g = grid(N);
    let mut out = Vec::new();
    for case in CASES {
        let target = target_of(&case);
        for eps0 in EPS0_SET {
            let initial = initial_square_pulse(case.phi, &g, &shape()).unwrap();
            let started = Instant::now();
            let res = optimize_oct(&initial, &target, &obj_cfg(eps0), &OptimizerConfig::default())
                .expect("unconstrained optimization");
            out.push((case, eps0, res, started.elapsed()));
        }
    }
    out
});

fn oct_run(label: &str, eps0: f64) -> &'static OptResult64 {
    &OCT_RUNS
        .iter()
        .find(|(c, e, _, _)| c.label == label && *e == eps0)
        .expect("run exists")
        .2
}

/// Synthesized decoupling pulses at the working grid.
static DP_RUNS: Lazy<Vec<(Case, OptResult64)>> = Lazy::new(|| {
    let g = grid(N);
    CASES
        .iter()
        .map(|case| {
            let res = synth_dp_result(case.phi, &g, &shape(), &OptimizerConfig::default())
                .expect("pulse synthesis");
            (*case, res)
        })
        .collect()
});

fn dp_control(label: &str) -> &'static ControlField64 {
    &DP_RUNS.iter().find(|(c, _)| c.label == label).expect("dp exists").1.control
}

/// Hybrid flows from the decoupling pulses, all nominal drift values.
static HYBRID_RUNS: Lazy<Vec<(Case, f64, OptResult64)>> = Lazy::new(|| {
    let mut out = Vec::new();
    for case in CASES {
        let target = target_of(&case);
        let dp = dp_control(case.label);
        for eps0 in EPS0_SET {
            let res = optimize_hybrid(dp, &target, &obj_cfg(eps0), &OptimizerConfig::default())
                .expect("hybrid flow");
            out.push((case, eps0, res));
        }
    }
    out
});

fn hybrid_run(label: &str, eps0: f64) -> &'static OptResult64 {
    &HYBRID_RUNS
        .iter()
        .find(|(c, e, _)| c.label == label && *e == eps0)
        .expect("hybrid exists")
        .2
}

/// Least-squares slope of ln Δ against ln ε.
fn loglog_slope(eps: &[f64], delta: &[f64]) -> f64 {
    let n = eps.len() as f64;
    let (mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0);
    for (e, d) in eps.iter().zip(delta) {
        let x = e.ln();
        let y = d.ln();
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn random_smooth(g: &TimeGrid<f64>, rng: &mut ChaCha8Rng, scale: f64) -> ControlField<f64> {
    let coeffs: Vec<f64> = (0..6).map(|_| rng.gen_range(-scale..scale)).collect();
    ControlField::from_fn(*g, shape(), |t| {
        coeffs
            .iter()
            .enumerate()
            .map(|(m, a)| a * ((m + 1) as f64 * PI * t).sin())
            .sum()
    })
    .unwrap()
}

#[test]
fn c01_oct_convergence() {
    for (case, eps0, res, elapsed) in OCT_RUNS.iter() {
        assert!(
            res.delta < 1e-6,
            "{} eps0={eps0}: delta {}",
            case.label,
            res.delta
        );
        assert!(res.iterations <= 20_000);
        assert!(
            *elapsed <= Duration::from_secs(120),
            "{} eps0={eps0} took {elapsed:?}",
            case.label
        );
    }
    // Fluence calibration at zero drift: the converged Z_{π/2} field's
    // fluence sits near 3.4 scaled units (within a factor of 3; local
    // optima differ).
    let f = oct_run("z_pi_2", 0.0).fluence;
    assert!(f > 3.4 / 3.0 && f < 3.4 * 3.0, "fluence {f}");
    // The optimum is sharp: a hundredth of drift detuning costs orders of
    // magnitude in distance.
    let o2 = oct_run("z_pi_2", 2.0);
    let sweep = epsilon_sweep(&o2.control, &target_of(&CASES[0]), 1.99, 2.01, 0.01).unwrap();
    assert!(sweep.delta[1] < 1e-6);
    let edge = sweep.delta[0].max(sweep.delta[2]);
    assert!(edge > 1e-5 && edge < 1e-3, "edge distance {edge}");
    let worst = OCT_RUNS
        .iter()
        .map(|(_, _, r, _)| r.delta)
        .fold(0.0f64, f64::max);
    println!("acceptance 01: PASS — 12/12 runs below 1e-6 (worst {worst:.2e}), detuning response {edge:.2e}");
}

#[test]
fn c02_pulse_area_law() {
    for case in CASES {
        let res = oct_run(case.label, 0.0);
        let wrapped = (res.theta_tf - case.phi).rem_euclid(2.0 * PI);
        let dist = wrapped.min(2.0 * PI - wrapped);
        assert!(dist < 1e-4, "{}: theta(t_f) = {}", case.label, res.theta_tf);
        println!(
            "acceptance 02: PASS — {} zero-drift area error {dist:.2e}",
            case.label
        );
    }
}

#[test]
fn c03_dp_synthesis() {
    for (case, res) in DP_RUNS.iter() {
        assert!(res.constraint_norm < 1e-7, "{}: {}", case.label, res.constraint_norm);
        assert!(res.delta < 1e-7, "{}: delta at zero drift {}", case.label, res.delta);
        println!(
            "acceptance 03: PASS — {} |eta_r| = {:.2e}, delta(0) = {:.2e}",
            case.label, res.constraint_norm, res.delta
        );
    }
}

#[test]
fn c04_third_order_suppression() {
    let g = grid(N_SLOPE);
    for case in CASES {
        let target = target_of(&case);
        let dp = synth_dp_result(case.phi, &g, &shape(), &OptimizerConfig::default())
            .unwrap()
            .control;
        let sweep = epsilon_sweep(&dp, &target, 0.02, 0.2, 0.01).unwrap();
        let slope = loglog_slope(&sweep.epsilon, &sweep.delta);
        assert!(
            (2.5..=3.5).contains(&slope),
            "{}: decoupled slope {slope}",
            case.label
        );

        let square = initial_square_pulse(case.phi, &g, &shape()).unwrap();
        let base = epsilon_sweep(&square, &target, 0.02, 0.2, 0.01).unwrap();
        let base_slope = loglog_slope(&base.epsilon, &base.delta);
        assert!(
            (0.8..=1.2).contains(&base_slope),
            "{}: baseline slope {base_slope}",
            case.label
        );
        println!(
            "acceptance 04: PASS — {} decoupled slope {slope:.2}, square-pulse baseline {base_slope:.2}",
            case.label
        );
    }
}

#[test]
fn c05_hybrid_improvement() {
    for case in CASES {
        let target = target_of(&case);
        let dp = dp_control(case.label);
        let params = HamiltonianParams::new(2.0).unwrap();
        let dp_delta = gate_distance(target.unitary(), &propagate(dp, &params));
        let hybrid = hybrid_run(case.label, 2.0);
        assert!(
            hybrid.delta <= dp_delta / 10.0,
            "{}: {} vs dp {}",
            case.label,
            hybrid.delta,
            dp_delta
        );
        assert!(hybrid.constraint_norm <= 1e-2);
        println!(
            "acceptance 05: PASS — {} delta {dp_delta:.2e} -> {:.2e} ({:.0}x) with |eta_r| {:.2e}",
            case.label,
            hybrid.delta,
            dp_delta / hybrid.delta,
            hybrid.constraint_norm
        );
    }
}

#[test]
fn c06_robustness_ordering() {
    for case in CASES {
        let target = target_of(&case);
        let dp = dp_control(case.label);
        for eps0 in [1.0, 2.0, 3.0] {
            let r_h =
                robustness_integral(&hybrid_run(case.label, eps0).control, &target, eps0, 0.5, 0.01)
                    .unwrap();
            let r_d = robustness_integral(dp, &target, eps0, 0.5, 0.01).unwrap();
            assert!(r_h < r_d, "{} eps0={eps0}: {r_h} !< {r_d}", case.label);
        }
        // Against the drift-specific optima, restricted to the cases whose
        // published robustness is at least 3e-2.
        let oct_eps = if case.label == "z_pi_2" { &[0.0, 4.0, 5.0][..] } else { &[0.0, 5.0][..] };
        for &eps0 in oct_eps {
            let r_h =
                robustness_integral(&hybrid_run(case.label, eps0).control, &target, eps0, 0.5, 0.01)
                    .unwrap();
            let r_o =
                robustness_integral(&oct_run(case.label, eps0).control, &target, eps0, 0.5, 0.01)
                    .unwrap();
            assert!(r_h < r_o, "{} eps0={eps0}: {r_h} !< {r_o}", case.label);
        }
        println!("acceptance 06: PASS — {} hybrid beats the pulse at 1,2,3 and the optimum at {oct_eps:?}", case.label);
    }
    // Calibration: the decoupled pulse's robustness around zero drift sits
    // within a factor of 10 of 2.84e-6.
    let r0 = robustness_integral(
        dp_control("z_pi_2"),
        &target_of(&CASES[0]),
        0.0,
        0.5,
        0.01,
    )
    .unwrap();
    assert!(r0 > 2.84e-7 && r0 < 2.84e-5, "calibration {r0}");
}

#[test]
fn c07_projection_properties() {
    let g = grid(256);
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst_overlap = 0.0f64;
    let mut worst_idem = 0.0f64;
    let mut worst_span = 0.0f64;
    for _ in 0..100 {
        let grads: Vec<_> = (0..3).map(|_| random_smooth(&g, &mut rng, 2.0)).collect();
        let gj = random_smooth(&g, &mut rng, 3.0);
        let out = project_gradient(&gj, &grads).unwrap();
        let out_norm = out.weighted_norm();
        for gi in &grads {
            let overlap = out.inner_product(gi).unwrap().abs()
                / (out_norm * gi.weighted_norm()).max(1e-300);
            worst_overlap = worst_overlap.max(overlap);
        }
        let twice = project_gradient(&out, &grads).unwrap();
        worst_idem = worst_idem
            .max(twice.add_scaled(-1.0, &out).weighted_norm() / out_norm.max(1e-300));
        // A field assembled inside the span must be annihilated.
        let span = grads[0]
            .add_scaled(rng.gen_range(-2.0..2.0), &grads[1])
            .add_scaled(rng.gen_range(-2.0..2.0), &grads[2]);
        let killed = project_gradient(&span, &grads).unwrap();
        worst_span = worst_span.max(killed.weighted_norm() / span.weighted_norm());
    }
    assert!(worst_overlap <= 1e-10, "orthogonality residual {worst_overlap}");
    assert!(worst_idem <= 1e-12, "idempotence residual {worst_idem}");
    assert!(worst_span <= 1e-10, "span annihilation residual {worst_span}");
    println!(
        "acceptance 07: PASS — residuals: orthogonality {worst_overlap:.2e}, idempotence {worst_idem:.2e}, span {worst_span:.2e}"
    );
}

#[test]
fn c08_gradient_oracles() {
    let g = grid(N);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let c = random_smooth(&g, &mut rng, 2.5);
    let v = random_smooth(&g, &mut rng, 1.5);
    let target = GateTarget::z_half_pi();
    let cfg = obj_cfg(1.5);
    let h = 1e-6;

    // Objective gradient against central differences.
    let gj = objective_gradient(&c, &target, &cfg).unwrap();
    let fd = (objective_value(&c.add_scaled(h, &v), &target, &cfg).unwrap()
        - objective_value(&c.add_scaled(-h, &v), &target, &cfg).unwrap())
        / (2.0 * h);
    let ip = gj.inner_product(&v).unwrap();
    let rel_j = ((fd - ip) / fd.abs().max(1e-12)).abs();
    assert!(rel_j <= 1e-4, "objective gradient mismatch {rel_j}");

    // Constraint gradients against central differences.
    let grads = constraint_gradients(&c);
    let plus = constraint_vector(&c.add_scaled(h, &v)).values();
    let minus = constraint_vector(&c.add_scaled(-h, &v)).values();
    let mut rel_eta = 0.0f64;
    for i in 0..5 {
        let fd_i = (plus[i] - minus[i]) / (2.0 * h);
        let ip_i = grads[i].inner_product(&v).unwrap();
        rel_eta = rel_eta.max(((fd_i - ip_i) / fd_i.abs().max(1e-3)).abs());
    }
    assert!(rel_eta <= 1e-6, "constraint gradient mismatch {rel_eta}");

    // Projected steps drift the constraints at second order: halving the
    // step shrinks the drift at least 3.5-fold.
    let dp = dp_control("z_pi_2");
    let gj_dp = objective_gradient(dp, &GateTarget::z_half_pi(), &obj_cfg(2.0)).unwrap();
    let cg = constraint_gradients_with(dp, GradientWeighting::ShapeWeighted);
    let dir = project_gradient(&gj_dp, &cg[..3]).unwrap();
    let base = constraint_vector(dp).reduced_norm();
    let step = 0.05 / dir.weighted_norm();
    let drift =
        |hh: f64| (constraint_vector(&dp.add_scaled(-hh, &dir)).reduced_norm() - base).abs();
    let d1 = drift(step);
    let d2 = drift(step / 2.0);
    assert!(d1 / d2 >= 3.5, "drift ratio {}", d1 / d2);
    println!(
        "acceptance 08: PASS — gradient mismatches {rel_j:.2e} / {rel_eta:.2e}, drift ratio {:.2}",
        d1 / d2
    );
}

#[test]
fn c09_zeta3_fast_path() {
    let n = 512;
    let g = grid(n);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let a = rng.gen_range(1.5..4.0);
        let b = rng.gen_range(-0.5..0.5);
        let c = rng.gen_range(-0.5..0.5);
        let p0 = rng.gen_range(0.0..(2.0 * PI));
        let theta: Vec<f64> = (0..n)
            .map(|k| {
                let t = g.midpoint(k);
                a * PI * t + b * (2.0 * PI * t + p0).sin() + c * (PI * t).sin()
            })
            .collect();
        let fast = constraint_integrals(&theta, &g)[2];
        // Direct double sum, written independently of the library path.
        let dt = g.dt();
        let mut brute = 0.0;
        for (i, &ti) in theta.iter().enumerate() {
            for (j, &tj) in theta.iter().enumerate() {
                let sgn = if i > j {
                    1.0
                } else if i < j {
                    -1.0
                } else {
                    0.0
                };
                brute += (ti - tj).sin() * sgn;
            }
        }
        brute *= dt * dt;
        assert!(brute.abs() > 1e-3, "degenerate oracle value {brute}");
        worst = worst.max(((fast - brute) / brute).abs());
    }
    assert!(worst <= 1e-12, "worst relative deviation {worst}");
    println!("acceptance 09: PASS — 50 profiles, worst relative deviation {worst:.2e}");
}

#[test]
fn c10_propagator_accuracy() {
    // Constant fields against the closed-form exponential.
    let g = grid(N);
    for (cval, eps) in [(0.0, 1.7), (2.3, 0.0), (-1.1, 0.8), (4.0, 5.0)] {
        let c = ControlField::new(g, shape(), vec![cval; N]).unwrap();
        let u = propagate(&c, &HamiltonianParams::new(eps).unwrap());
        let expect = rotation(eps, 0.0, cval).unwrap();
        let err = u.max_abs_diff(&expect);
        assert!(err <= 1e-12, "C={cval}, eps={eps}: {err}");
    }

    // Observed order of accuracy for a smooth resampled control.
    let f = |t: f64| 3.0 * (PI * t).sin() - 1.2 * (2.0 * PI * t).sin();
    let params = HamiltonianParams::new(1.3).unwrap();
    let at = |n: usize| {
        let c = ControlField::from_fn(grid(n), shape(), f).unwrap();
        propagate(&c, &params)
    };
    let reference = at(16 * 512);
    let e1 = at(128).max_abs_diff(&reference);
    let e2 = at(256).max_abs_diff(&reference);
    let order = (e1 / e2).log2();
    assert!(order >= 1.9, "observed order {order}");
    println!("acceptance 10: PASS — analytic match ≤ 1e-12, observed order {order:.2}");
}

#[test]
fn c11_ensemble_experiment() {
    let dp = dp_control("z_pi");
    let hybrid = &hybrid_run("z_pi", 2.0).control;
    let oct = &oct_run("z_pi", 2.0).control;
    let eps = linspace(1.5, 2.5, 21).unwrap();
    let xp = StateVector::sigma_x_plus();
    let xm = StateVector::sigma_x_minus();

    let s_h = ensemble_state_fidelity(hybrid, &xp, &xm, &eps).unwrap();
    let s_d = ensemble_state_fidelity(dp, &xp, &xm, &eps).unwrap();
    let s_o = ensemble_state_fidelity(oct, &xp, &xm, &eps).unwrap();

    assert!(s_h.mean > 0.9999, "hybrid mean {}", s_h.mean);
    assert!(
        s_h.std < s_d.std && s_d.std < s_o.std,
        "std ordering {} {} {}",
        s_h.std,
        s_d.std,
        s_o.std
    );
    assert!(
        s_h.min > s_d.min && s_d.min > s_o.min,
        "min ordering {} {} {}",
        s_h.min,
        s_d.min,
        s_o.min
    );
    // The member at the nominal drift realizes the gate almost exactly.
    let at_nominal = s_o
        .members
        .iter()
        .find(|m| (m.epsilon - 2.0).abs() < 1e-12)
        .unwrap();
    assert!(at_nominal.fidelity >= 1.0 - 1e-9);
    println!(
        "acceptance 11: PASS — mean {:.6}, std {:.2e} < {:.2e} < {:.2e}, min {:.6} > {:.6} > {:.6}",
        s_h.mean, s_h.std, s_d.std, s_o.std, s_h.min, s_d.min, s_o.min
    );
}

#[test]
fn c12_unit_conversions() {
    assert_eq!(si_factor(Quantity::Time), 2.0e-8);
    assert_eq!(si_factor(Quantity::Energy), 5.273e-27);
    assert_eq!(si_factor(Quantity::AngularMomentum), 1.055e-34);
    let mut worst = 0.0f64;
    for q in [Quantity::Time, Quantity::Energy, Quantity::AngularMomentum] {
        for v in [1.0f64, 0.37, 5.0, 123.456] {
            let si = convert_units(v, q, Direction::ScaledToSi);
            let back = convert_units(si, q, Direction::SiToScaled);
            worst = worst.max(((back - v) / v).abs());
        }
    }
    assert!(worst <= 1e-15);
    println!("acceptance 12: PASS — factors exact, worst round trip {worst:.2e}");
}

#[test]
fn determinism_of_shared_runs() {
    // Identical configuration and initial field reproduce the history
    // bit for bit.
    let g = grid(256);
    let initial = initial_square_pulse(PI, &g, &shape()).unwrap();
    let run = || {
        optimize_oct(&initial, &GateTarget::z_pi(), &obj_cfg(2.0), &OptimizerConfig::default())
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.control.samples(), b.control.samples());
    assert!(a
        .history
        .iter()
        .zip(&b.history)
        .all(|(x, y)| x.objective == y.objective && x.delta == y.delta));
    let _ = Unitary2::<f64>::identity();
}
