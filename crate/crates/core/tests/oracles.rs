//! Independent numerical oracles for the model, integrator and analytics.

use sirdelay::analytics::{classify, sweep, ClassifyOptions, Regime, SweepOptions};
use sirdelay::integrator::default_step;
use sirdelay::model::{find_disease_free, find_endemic, jacobian_coeffs};
use sirdelay::{eval_rhs, integrate, presets, HistorySpec, ModelSpec, State};

fn fd(g: impl Fn(f64) -> f64, at: f64) -> f64 {
    let h = 1e-6 * at.abs().max(1.0);
    (g(at + h) - g(at - h)) / (2.0 * h)
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

#[test]
fn jacobian_matches_finite_differences_on_every_preset() {
    for name in presets::NAMES {
        let m = presets::load(name).unwrap().model;
        let dfe = find_disease_free(&m).equilibrium();
        for eq in dfe.into_iter().chain(find_endemic(&m)) {
            let s = eq.state;
            let j = jacobian_coeffs(&m, &eq).unwrap();
            let rhs = |now: State, xt: f64, yd: f64| eval_rhs(&m, &now, xt, yd).unwrap();
            let a = fd(|u| rhs(State::new(u, s.y, s.z), s.x, s.y)[0], s.x);
            let b = fd(|u| rhs(State::new(s.x, u, s.z), s.x, s.y)[0], s.y);
            let alpha = fd(|u| rhs(State::new(s.x, s.y, u), s.x, s.y)[0], s.z);
            let c = fd(|u| rhs(State::new(s.x, u, s.z), s.x, s.y)[1], s.y);
            let d = fd(|u| rhs(s, u, s.y)[1], s.x);
            let e = fd(|u| rhs(s, s.x, u)[2], s.y);
            for (label, got, want) in
                [("A", j.A, a), ("B", j.B, b), ("C", j.C, c), ("D", j.D, d), ("E", j.E, e), ("alpha", j.alpha, alpha)]
            {
                assert!(close(got, want, 1e-6), "{name} {:?} {label}: {got} vs {want}", eq.kind);
            }
        }
    }
}

/// Plain RK4 on the delay-free system, written independently of the library.
fn reference_rk4(m: &ModelSpec, x0: State, horizon: f64, h: f64) -> Vec<State> {
    let f = |s: [f64; 3]| {
        let st = State::from_array(s);
        eval_rhs(m, &st, st.x, st.y).unwrap()
    };
    let add = |s: [f64; 3], k: [f64; 3], w: f64| [s[0] + w * k[0], s[1] + w * k[1], s[2] + w * k[2]];
    let n = (horizon / h).round() as usize;
    let mut s = x0.to_array();
    let mut out = vec![x0];
    for _ in 0..n {
        let k1 = f(s);
        let k2 = f(add(s, k1, h / 2.0));
        let k3 = f(add(s, k2, h / 2.0));
        let k4 = f(add(s, k3, h));
        for i in 0..3 {
            s[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        out.push(State::from_array(s));
    }
    out
}

#[test]
fn zero_delays_match_plain_runge_kutta() {
    for name in presets::NAMES {
        let cfg = presets::load(name).unwrap();
        let m = cfg.model.with_delays(0.0, 0.0).unwrap();
        let x0 = State::new(1.0, 1.0, 1.0);
        let traj = integrate(&m, &HistorySpec::Constant(x0), 20.0, 0.01).unwrap();
        let reference = reference_rk4(&m, x0, 20.0, 0.01);
        assert_eq!(traj.states().len(), reference.len(), "{name}");
        let worst = traj.states().iter().zip(&reference).map(|(a, b)| a.dist(b)).fold(0.0, f64::max);
        assert!(worst < 1e-8, "{name}: {worst}");
    }
}

#[test]
fn converged_rows_sit_near_a_stationary_point() {
    let opts = ClassifyOptions::default();
    for name in ["ex5_3", "ex5_5", "ex5_6", "ex5_7"] {
        let cfg = presets::load(name).unwrap();
        let grid = cfg.sweep.clone().unwrap();
        for (tau, delta) in grid {
            let m = cfg.model.with_delays(tau, delta).unwrap();
            let traj = integrate(&m, &cfg.history, cfg.horizon, default_step(&m)).unwrap();
            let c = classify(&traj, None, m.params().max_delay(), &opts).unwrap();
            if c.kind.is_converged() {
                let s = traj.final_state();
                let r = eval_rhs(&m, &s, s.x, s.y).unwrap();
                let norm = r.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
                assert!(norm < 10.0 * opts.convergence_tol, "{name} ({tau},{delta}): |rhs| = {norm}");
            }
        }
    }
}

fn period(horizon: f64) -> f64 {
    let cfg = presets::load("ex5_3").unwrap();
    let m = cfg.model.with_delays(7.0, 0.0).unwrap();
    let traj = integrate(&m, &cfg.history, horizon, default_step(&m)).unwrap();
    match classify(&traj, None, 7.0, &ClassifyOptions::default()).unwrap().kind {
        Regime::SustainedOscillation { period, .. } => period,
        other => panic!("expected sustained oscillation, got {other:?}"),
    }
}

#[test]
fn oscillation_period_is_stable_under_horizon_doubling() {
    let (p1, p2) = (period(200.0), period(400.0));
    assert!((p1 - p2).abs() <= 0.05 * p1, "{p1} vs {p2}");
}

#[test]
fn parallel_sweep_matches_sequential_runs() {
    let cfg = presets::load("ex5_3").unwrap();
    let grid: Vec<(f64, f64)> = (0..6).map(|k| (k as f64 * 1.5, 0.0)).collect();
    let opts = SweepOptions { target: cfg.target, ..Default::default() };
    let table = sweep(&cfg.model, &grid, &cfg.history, 150.0, &opts).unwrap();
    let again = sweep(&cfg.model, &grid, &cfg.history, 150.0, &opts).unwrap();
    assert_eq!(table, again);
    let target = table.target.as_ref().map(|e| e.state);
    for (row, &(tau, delta)) in table.rows.iter().zip(&grid) {
        assert_eq!((row.tau, row.delta), (tau, delta));
        let m = cfg.model.with_delays(tau, delta).unwrap();
        let traj = integrate(&m, &cfg.history, 150.0, default_step(&m)).unwrap();
        let single = classify(&traj, target.as_ref(), m.params().max_delay(), &opts.classify).unwrap();
        assert_eq!(row.classification.as_ref(), Some(&single), "tau {tau}");
    }
}
