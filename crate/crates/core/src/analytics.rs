//! Long-run behavior of simulated trajectories.
//!
//! [`classify`] reduces the tail of a trajectory to one of five regimes;
//! [`sweep`] runs the classification over a grid of delays, in parallel,
//! alongside the rightmost characteristic root at each grid point.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::AnalysisError;
use crate::integrator::{default_step, integrate, HistorySpec, Trajectory};
use crate::model::{find_disease_free, find_endemic, jacobian_coeffs, Equilibrium, EquilibriumKind, ModelSpec, State};
use crate::stability::{char_coeffs, char_roots_scan, select_target, ScanBox};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifyOptions {
    /// Trailing fraction of the horizon analyzed.
    pub tail_fraction: f64,
    /// Convergence tolerance relative to `1 + |candidate|_inf`.
    pub convergence_tol: f64,
    pub divergence_bound: f64,
    /// Last-to-first peak amplitude ratio below which oscillations are damped.
    pub damped_ratio: f64,
    /// Upper end of the ratio band counted as sustained.
    pub sustained_ratio: f64,
    pub min_peaks: usize,
    /// Peaks smaller than this, measured from the reference level, are ignored.
    pub min_amplitude: f64,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            tail_fraction: 0.5,
            convergence_tol: 1e-2,
            divergence_bound: 1e6,
            damped_ratio: 0.9,
            sustained_ratio: 1.1,
            min_peaks: 3,
            min_amplitude: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Regime {
    Converged { target: State, max_deviation: f64 },
    DampedOscillation { decay_ratio: f64 },
    SustainedOscillation { period: f64, amplitude: f64 },
    Diverged,
    Unclassified,
}

impl Regime {
    pub fn label(&self) -> &'static str {
        match self {
            Regime::Converged { .. } => "converged",
            Regime::DampedOscillation { .. } => "damped_oscillation",
            Regime::SustainedOscillation { .. } => "sustained_oscillation",
            Regime::Diverged => "diverged",
            Regime::Unclassified => "unclassified",
        }
    }

    pub fn is_converged(&self) -> bool {
        matches!(self, Regime::Converged { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub kind: Regime,
    /// Analyzed time interval.
    pub window: (f64, f64),
    /// Peaks of the infected compartment in the window, `(time, amplitude)`.
    pub peaks: Vec<(f64, f64)>,
}

/// Classifies the trailing window of `traj`. Without a candidate the final
/// state is used as the convergence target and the window mean of `y` as
/// the reference level for peak amplitudes.
pub fn classify(
    traj: &Trajectory,
    candidate: Option<&State>,
    max_delay: f64,
    opts: &ClassifyOptions,
) -> Result<Classification, AnalysisError> {
    let horizon = traj.horizon();
    if horizon < 50.0 || horizon < 10.0 * max_delay {
        return Err(AnalysisError::Precondition(format!(
            "horizon {horizon} too short: need at least 50 and 10 x the largest delay ({max_delay})"
        )));
    }
    if !(opts.tail_fraction > 0.0 && opts.tail_fraction <= 1.0) {
        return Err(AnalysisError::Precondition(format!("tail fraction {} outside (0, 1]", opts.tail_fraction)));
    }
    let start = horizon * (1.0 - opts.tail_fraction);
    let window = (start, horizon);
    let times = traj.times();
    let states = traj.states();
    let first = times.partition_point(|t| *t < start);
    let (wt, ws) = (&times[first..], &states[first..]);

    if states.iter().any(|s| !s.is_finite() || s.norm_inf() > opts.divergence_bound) {
        return Ok(Classification { kind: Regime::Diverged, window, peaks: Vec::new() });
    }

    let target = candidate.copied().unwrap_or_else(|| traj.final_state());
    let max_deviation = ws.iter().map(|s| s.dist(&target)).fold(0.0_f64, f64::max);
    if max_deviation < opts.convergence_tol * (1.0 + target.norm_inf()) {
        return Ok(Classification { kind: Regime::Converged { target, max_deviation }, window, peaks: Vec::new() });
    }

    let reference = match candidate {
        Some(c) => c.y,
        None => ws.iter().map(|s| s.y).sum::<f64>() / ws.len() as f64,
    };
    let mut peaks = Vec::new();
    for i in 1..ws.len().saturating_sub(1) {
        let (a, b, c) = (ws[i - 1].y, ws[i].y, ws[i + 1].y);
        if b > a && b >= c {
            let amp = b - reference;
            if amp > opts.min_amplitude {
                peaks.push((wt[i], amp));
            }
        }
    }
    let kind = if peaks.len() < 2 {
        Regime::Unclassified
    } else {
        let ratio = peaks[peaks.len() - 1].1 / peaks[0].1;
        if ratio < opts.damped_ratio {
            Regime::DampedOscillation { decay_ratio: ratio }
        } else if ratio <= opts.sustained_ratio && peaks.len() >= opts.min_peaks {
            let period = (peaks[peaks.len() - 1].0 - peaks[0].0) / (peaks.len() - 1) as f64;
            let amplitude = peaks.iter().map(|p| p.1).sum::<f64>() / peaks.len() as f64;
            Regime::SustainedOscillation { period, amplitude }
        } else {
            Regime::Unclassified
        }
    };
    Ok(Classification { kind, window, peaks })
}

/// Sweep settings shared by every grid point.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepOptions {
    /// Fixed step; `None` picks the default step for each grid point.
    pub step: Option<f64>,
    /// Equilibrium used as convergence target and for the root scan.
    pub target: Option<EquilibriumKind>,
    pub classify: ClassifyOptions,
    pub scan: ScanBox,
}


#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub delta: f64,
    pub classification: Option<Classification>,
    /// Integration or classification failure, when there was one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Real part of the rightmost characteristic root at the target.
    pub max_re_lambda: Option<f64>,
}

impl SweepRow {
    pub fn label(&self) -> &'static str {
        match &self.classification {
            Some(c) => c.kind.label(),
            None => "error",
        }
    }

    pub fn is_converged(&self) -> bool {
        self.classification.as_ref().is_some_and(|c| c.kind.is_converged())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    /// Equilibrium the rows are compared against.
    pub target: Option<Equilibrium>,
    pub rows: Vec<SweepRow>,
}

/// Integrates and classifies the model at every `(tau, delta)` in `grid`.
/// Rows run in parallel and come back in grid order. A failing row records
/// its error; the sweep continues.
pub fn sweep(
    model: &ModelSpec,
    grid: &[(f64, f64)],
    history: &HistorySpec,
    horizon: f64,
    opts: &SweepOptions,
) -> Result<SweepTable, AnalysisError> {
    if grid.is_empty() {
        return Err(AnalysisError::Precondition("empty delay grid".into()));
    }
    let dfe = find_disease_free(model).equilibrium();
    let endemic = find_endemic(model);
    let target = select_target(opts.target, dfe.as_ref(), &endemic);
    let cc = match &target {
        Some(eq) => Some(char_coeffs(&jacobian_coeffs(model, eq)?)),
        None => None,
    };

    let rows = grid
        .par_iter()
        .map(|&(tau, delta)| {
            let max_re_lambda =
                cc.as_ref().and_then(|cc| char_roots_scan(cc, tau, delta, &opts.scan).rightmost().map(|z| z.re));
            let outcome = run_row(model, tau, delta, history, horizon, target.as_ref(), opts);
            let (classification, error) = match outcome {
                Ok(c) => (Some(c), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow { tau, delta, classification, error, max_re_lambda }
        })
        .collect();
    Ok(SweepTable { target, rows })
}

fn run_row(
    model: &ModelSpec,
    tau: f64,
    delta: f64,
    history: &HistorySpec,
    horizon: f64,
    target: Option<&Equilibrium>,
    opts: &SweepOptions,
) -> Result<Classification, AnalysisError> {
    let m = model.with_delays(tau, delta)?;
    let step = opts.step.unwrap_or_else(|| default_step(&m));
    let traj = integrate(&m, history, horizon, step)?;
    classify(&traj, target.map(|e| &e.state), tau.max(delta), &opts.classify)
}

impl SweepTable {
    /// CSV with columns `tau,delta,classification,period,amplitude,max_re_lambda`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau", "delta", "classification", "period", "amplitude", "max_re_lambda"])?;
        for r in &self.rows {
            let (period, amplitude) = match r.classification.as_ref().map(|c| &c.kind) {
                Some(Regime::SustainedOscillation { period, amplitude }) => (period.to_string(), amplitude.to_string()),
                _ => (String::new(), String::new()),
            };
            let re = r.max_re_lambda.map(|v| v.to_string()).unwrap_or_default();
            w.write_record([r.tau.to_string(), r.delta.to_string(), r.label().to_string(), period, amplitude, re])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("sweep table serializes")
    }
}
