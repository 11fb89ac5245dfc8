//! End-to-end verification suite over the bundled presets.
//!
//! Each criterion returns a [`CriterionResult`] with a one-line detail; the
//! CLI `verify` command and the `acceptance` test target both run them.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analytics::{classify, sweep, ClassifyOptions, Regime, SweepOptions};
use crate::error::AnalysisError;
use crate::integrator::{default_step, integrate, HistorySpec};
use crate::model::{
    find_disease_free, find_endemic, jacobian_coeffs, Equilibrium, EquilibriumKind, ModelSpec, Params, ResponseFn,
    State,
};
use crate::presets;
use crate::stability::{
    char_coeffs, char_roots_scan, delay_free_stable, select_target, solve_cubic_real, tau_crossing,
    tau_from_pseudo_delay, DelayFreeVerdict, ReportOptions, ScanBox,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
}

impl std::fmt::Display for CriterionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "criterion {:>2} [{}] {}: {} ({:.2} s)",
            self.id,
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.detail,
            self.elapsed_secs
        )
    }
}

pub const CRITERIA: [(u8, &str); 10] = [
    (1, "equilibrium closed forms"),
    (2, "delay-free verdicts"),
    (3, "cubic solver"),
    (4, "critical delay formula"),
    (5, "bifurcation bracket by root scan"),
    (6, "regime sweep"),
    (7, "global stability by simulation"),
    (8, "nonlinear preset stability"),
    (9, "integrator order and equilibrium drift"),
    (10, "theory and simulation agreement"),
];

/// Runs one criterion by number.
pub fn run(id: u8) -> CriterionResult {
    let name = CRITERIA.iter().find(|c| c.0 == id).map_or("unknown", |c| c.1).to_string();
    let start = Instant::now();
    let (passed, mut detail, limit) = match id {
        1 => with_limit(equilibria(), 1.0),
        2 => with_limit(delay_free(), f64::INFINITY),
        3 => with_limit(cubic(), f64::INFINITY),
        4 => with_limit(tau_formula(), f64::INFINITY),
        5 => with_limit(bracket(), 30.0),
        6 => with_limit(regimes(), 60.0),
        7 => with_limit(global_simulation(), 60.0),
        8 => with_limit(nonlinear(), 30.0),
        9 => with_limit(integrator(), f64::INFINITY),
        10 => with_limit(agreement(), f64::INFINITY),
        _ => (false, format!("no criterion {id}"), f64::INFINITY),
    };
    let elapsed_secs = start.elapsed().as_secs_f64();
    let on_time = elapsed_secs < limit;
    if !on_time {
        detail.push_str(&format!("; runtime {elapsed_secs:.2} s exceeds {limit} s"));
    }
    CriterionResult { id, name, passed: passed && on_time, detail, elapsed_secs }
}

pub fn run_all() -> Vec<CriterionResult> {
    CRITERIA.iter().map(|c| run(c.0)).collect()
}

fn with_limit(r: Result<(bool, String), AnalysisError>, limit: f64) -> (bool, String, f64) {
    match r {
        Ok((p, d)) => (p, d, limit),
        Err(e) => (false, format!("error: {e}"), limit),
    }
}

type Outcome = Result<(bool, String), AnalysisError>;

fn preset_model(name: &str) -> Result<ModelSpec, AnalysisError> {
    presets::load(name).map(|c| c.model).map_err(|e| AnalysisError::Precondition(e.to_string()))
}

fn equilibrium_of(model: &ModelSpec, kind: EquilibriumKind) -> Option<Equilibrium> {
    let dfe = find_disease_free(model).equilibrium();
    select_target(Some(kind), dfe.as_ref(), &find_endemic(model))
}

/// Distance used for "converges within tol": max-norm, relative to
/// `1 + |target|_inf`, matching the trajectory classifier.
fn within(state: &State, target: &State, tol: f64) -> bool {
    state.dist(target) < tol * (1.0 + target.norm_inf())
}

fn equilibria() -> Outcome {
    let s41 = 41f64.sqrt();
    let s57 = 57f64.sqrt();
    let cases = [
        ("ex5_1", EquilibriumKind::Endemic, State::new(2.0, 6.0, 6.0)),
        ("ex5_2", EquilibriumKind::DiseaseFree, State::new(5.0, 0.0, 0.0)),
        ("ex5_3", EquilibriumKind::Endemic, State::new(2.0, 2.0, 2.0)),
        ("ex5_4", EquilibriumKind::DiseaseFree, State::new(2.5, 0.0, 0.0)),
        ("ex5_5", EquilibriumKind::Endemic, State::new(200.0 / 21.0, 10.0 / 21.0, 30.0 / 21.0)),
        ("ex5_6", EquilibriumKind::DiseaseFree, State::new((s41 - 1.0) / 2.0, 0.0, 0.0)),
        ("ex5_7", EquilibriumKind::DiseaseFree, State::new((s57 - 3.0) / 4.0, 0.0, 0.0)),
    ];
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for (name, kind, want) in cases {
        let m = preset_model(name)?;
        match equilibrium_of(&m, kind) {
            Some(eq) => {
                let d = eq.state.dist(&want);
                worst = worst.max(d);
                if d >= 1e-9 {
                    failed.push(format!("{name}: {:?} off by {d:.2e}", eq.state));
                }
            }
            None => failed.push(format!("{name}: no {kind:?} equilibrium")),
        }
    }
    Ok((failed.is_empty(), format!("7 presets, worst error {worst:.2e}{}", fmt_failures(&failed))))
}

fn fmt_failures(f: &[String]) -> String {
    if f.is_empty() {
        String::new()
    } else {
        format!("; failures: {}", f.join("; "))
    }
}

fn delay_free() -> Outcome {
    let mut failed = Vec::new();
    let mut notes = Vec::new();

    let m = preset_model("ex5_1")?;
    let eq = equilibrium_of(&m, EquilibriumKind::Endemic).ok_or_else(|| AnalysisError::Precondition("ex5_1".into()))?;
    let cc = char_coeffs(&jacobian_coeffs(&m, &eq)?);
    let r = delay_free_stable(&cc, None);
    if r.verdict != DelayFreeVerdict::Stable {
        failed.push("ex5_1 not stable".to_string());
    }
    notes.push(format!("ex5_1 {:?}", r.verdict));

    for name in ["ex5_2", "ex5_4"] {
        let m = preset_model(name)?;
        let eq = equilibrium_of(&m, EquilibriumKind::DiseaseFree)
            .ok_or_else(|| AnalysisError::Precondition(name.into()))?;
        let j = jacobian_coeffs(&m, &eq)?;
        let cc = char_coeffs(&j);
        let r = delay_free_stable(&cc, Some(&j));
        if !r.delay_free_equivalent || r.verdict != DelayFreeVerdict::Stable {
            failed.push(format!("{name} not flagged delay-free equivalent"));
        }
        let p = m.params();
        let scan = char_roots_scan(&cc, p.tau, p.delta, &ScanBox::default());
        let nonzero_left = scan.roots.iter().filter(|z| z.norm() > 1e-9).all(|z| z.re < 0.0);
        if !nonzero_left {
            failed.push(format!("{name}: nonzero root with Re >= 0"));
        }
        if name == "ex5_2" {
            let want = [0.0, -1.0, -2.0];
            let ok = scan.roots.len() == 3
                && scan.roots.iter().zip(want).all(|(z, w)| (z.re - w).abs() < 1e-9 && z.im.abs() < 1e-9);
            if !ok {
                failed.push(format!("ex5_2 roots {:?}", scan.roots));
            }
            notes.push(format!("ex5_2 roots {:?}", scan.roots.iter().map(|z| z.re).collect::<Vec<_>>()));
        }
    }
    Ok((failed.is_empty(), format!("{}{}", notes.join(", "), fmt_failures(&failed))))
}

fn cubic() -> Outcome {
    let a = solve_cubic_real(42.0, -46.0, -117.0, -8.0)?;
    let pos: Vec<f64> = a.into_iter().filter(|t| *t > 0.0).collect();
    let first_ok = pos.len() == 1 && (pos[0] - 2.325).abs() <= 0.005;
    let b = solve_cubic_real(756.0, 1488.0, 500.0, 84.0)?;
    let second_ok = b.iter().all(|t| *t <= 0.0);
    Ok((first_ok && second_ok, format!("positive roots {pos:?}; second cubic roots {b:?}")))
}

fn tau_formula() -> Outcome {
    let tau = tau_from_pseudo_delay(2.325, 0.2125, 0);
    Ok(((tau - 4.32).abs() <= 0.01, format!("tau+ = {tau:.4}")))
}

fn bracket() -> Outcome {
    let m = preset_model("ex5_3")?;
    let eq = equilibrium_of(&m, EquilibriumKind::Endemic).ok_or_else(|| AnalysisError::Precondition("ex5_3".into()))?;
    let cc = char_coeffs(&jacobian_coeffs(&m, &eq)?);
    let crossing = tau_crossing(&cc, 0.0, &ReportOptions::default());
    let ok = crossing.is_some_and(|t| (4.0..=5.0).contains(&t));
    Ok((ok, format!("first crossing at tau = {crossing:.4?}")))
}

fn regimes() -> Outcome {
    let cfg = presets::load("ex5_3").map_err(|e| AnalysisError::Precondition(e.to_string()))?;
    let taus = [0.0, 0.9, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0];
    let grid: Vec<(f64, f64)> = taus.iter().map(|t| (*t, 0.0)).collect();
    let opts = SweepOptions { target: Some(EquilibriumKind::Endemic), ..Default::default() };
    let table = sweep(&cfg.model, &grid, &cfg.history, 200.0, &opts)?;
    let mut failed = Vec::new();
    let mut labels = Vec::new();
    for row in &table.rows {
        let kind = row.classification.as_ref().map(|c| &c.kind);
        labels.push(format!("{}:{}", row.tau, row.label()));
        let ok = match row.tau {
            t if t <= 3.0 => matches!(kind, Some(Regime::Converged { target, .. }) if target.dist(&State::new(2.0, 2.0, 2.0)) < 1e-9),
            4.0 => matches!(kind, Some(Regime::Converged { .. } | Regime::DampedOscillation { .. })),
            _ => matches!(kind, Some(Regime::SustainedOscillation { .. })),
        };
        if !ok {
            failed.push(format!("tau {}: {}", row.tau, row.error.clone().unwrap_or_else(|| row.label().into())));
        }
    }
    Ok((failed.is_empty(), format!("{}{}", labels.join(" "), fmt_failures(&failed))))
}

const GLOBAL_HISTORIES: [State; 5] = [
    State::new(0.1, 0.1, 0.1),
    State::new(1.0, 1.0, 1.0),
    State::new(10.0, 10.0, 10.0),
    State::new(0.5, 5.0, 2.0),
    State::new(8.0, 0.3, 4.0),
];

fn converge_runs(name: &str, kind: EquilibriumKind, delays: &[(f64, f64)], histories: &[State], horizon: f64) -> Result<(usize, usize, Vec<String>), AnalysisError> {
    let m = preset_model(name)?;
    let eq = equilibrium_of(&m, kind).ok_or_else(|| AnalysisError::Precondition(format!("{name}: no {kind:?}")))?;
    let mut ok = 0;
    let mut total = 0;
    let mut failed = Vec::new();
    for &(tau, delta) in delays {
        let md = m.with_delays(tau, delta)?;
        for h in histories {
            total += 1;
            match integrate(&md, &HistorySpec::Constant(*h), horizon, default_step(&md)) {
                Ok(traj) => {
                    let fin = traj.final_state();
                    if within(&fin, &eq.state, 1e-2) {
                        ok += 1;
                    } else {
                        failed.push(format!(
                            "{name} ({tau},{delta}) from ({},{},{}): final ({:.3},{:.3},{:.3})",
                            h.x, h.y, h.z, fin.x, fin.y, fin.z
                        ));
                    }
                }
                Err(e) => failed.push(format!("{name} ({tau},{delta}) from ({},{},{}): {e}", h.x, h.y, h.z)),
            }
        }
    }
    Ok((ok, total, failed))
}

fn global_simulation() -> Outcome {
    let delays = [(0.0, 0.0), (1.0, 1.0), (5.0, 2.0)];
    let (ok1, n1, f1) = converge_runs("ex5_1", EquilibriumKind::Endemic, &delays, &GLOBAL_HISTORIES, 300.0)?;
    let (ok2, n2, f2) = converge_runs("ex5_2", EquilibriumKind::DiseaseFree, &delays, &GLOBAL_HISTORIES, 300.0)?;
    let failed: Vec<String> = f1.into_iter().take(3).chain(f2.into_iter().take(3)).collect();
    Ok((
        ok1 == n1 && ok2 == n2,
        format!("ex5_1 {ok1}/{n1} converged, ex5_2 {ok2}/{n2} converged{}", fmt_failures(&failed)),
    ))
}

fn nonlinear() -> Outcome {
    let delays = [(1.0, 0.5), (1.0, 1.5), (9.0, 0.5), (9.0, 1.5)];
    let (ok, n, failed) =
        converge_runs("ex5_7", EquilibriumKind::DiseaseFree, &delays, &[State::new(0.5, 0.5, 0.5)], 200.0)?;
    Ok((ok == n, format!("{ok}/{n} converged{}", fmt_failures(&failed))))
}

/// `x' = a - d x`, `y' = -d1 y`, `z' = 0`: every response function zero.
pub fn linear_reduction() -> ModelSpec {
    let params = Params { a: 3.0, b: 0.0, b1: 0.0, c: 0.0, d: 1.5, d1: 0.7, r: 0.0, alpha: 0.0, tau: 0.0, delta: 0.0 };
    ModelSpec::new(params, ResponseFn::Zero, ResponseFn::Zero, ResponseFn::Zero).expect("valid linear model")
}

/// Exact solution of [`linear_reduction`] from `(x0, y0, z0)`.
pub fn linear_reduction_exact(x0: State, t: f64) -> State {
    let (a, d, d1) = (3.0, 1.5, 0.7);
    State::new(a / d + (x0.x - a / d) * (-d * t).exp(), x0.y * (-d1 * t).exp(), x0.z)
}

fn max_error(step: f64) -> Result<f64, AnalysisError> {
    let m = linear_reduction();
    let x0 = State::new(0.5, 2.0, 1.0);
    let traj = integrate(&m, &HistorySpec::Constant(x0), 40.0, step)?;
    Ok(traj
        .times()
        .iter()
        .zip(traj.states())
        .map(|(t, s)| s.dist(&linear_reduction_exact(x0, *t)))
        .fold(0.0, f64::max))
}

fn integrator() -> Outcome {
    let e1 = max_error(0.1)?;
    let e2 = max_error(0.05)?;
    let ratio = e1 / e2;
    let order_ok = (14.0..=18.0).contains(&ratio);

    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for name in presets::NAMES {
        let cfg = presets::load(name).map_err(|e| AnalysisError::Precondition(e.to_string()))?;
        let m = &cfg.model;
        let dfe = find_disease_free(m).equilibrium();
        for eq in dfe.into_iter().chain(find_endemic(m)) {
            let traj = integrate(m, &HistorySpec::Constant(eq.state), 100.0, default_step(m))?;
            let drift = traj.states().iter().map(|s| s.dist(&eq.state)).fold(0.0, f64::max);
            worst = worst.max(drift);
            if drift >= 1e-8 {
                failed.push(format!("{name} {:?}: drift {drift:.2e}", eq.kind));
            }
        }
    }
    Ok((
        order_ok && failed.is_empty(),
        format!("error ratio {ratio:.3} (errors {e1:.2e}, {e2:.2e}); worst equilibrium drift {worst:.2e}{}", fmt_failures(&failed)),
    ))
}

fn agreement() -> Outcome {
    let mut rows = 0;
    let mut violations = Vec::new();
    for name in presets::NAMES {
        let cfg = presets::load(name).map_err(|e| AnalysisError::Precondition(e.to_string()))?;
        let Some(grid) = &cfg.sweep else { continue };
        let opts = SweepOptions { target: cfg.target, step: cfg.step, ..Default::default() };
        let table = sweep(&cfg.model, grid, &cfg.history, cfg.horizon, &opts)?;
        for row in &table.rows {
            rows += 1;
            let Some(re) = row.max_re_lambda else { continue };
            let converged = row.is_converged();
            if (re < -0.05 && !converged) || (re > 0.05 && converged) {
                violations.push(format!("{name} ({},{}): Re {re:.3}, {}", row.tau, row.delta, row.label()));
            }
        }
    }
    Ok((violations.is_empty(), format!("{rows} rows, {} violations{}", violations.len(), fmt_failures(&violations))))
}

/// Classifies a single run; exposed for the CLI and tests.
pub fn classify_run(model: &ModelSpec, history: &HistorySpec, horizon: f64, target: Option<&State>) -> Result<Regime, AnalysisError> {
    let traj = integrate(model, history, horizon, default_step(model))?;
    let p = model.params();
    Ok(classify(&traj, target, p.max_delay(), &ClassifyOptions::default())?.kind)
}
