//! Method-of-steps integration of the delayed system.
//!
//! Classical fourth-order Runge-Kutta on a fixed mesh. The step never exceeds
//! the smallest positive delay, so every delayed lookup lands either in the
//! initial history or on an already-computed mesh interval, where it is read
//! from the cubic Hermite interpolant built from stored states and slopes.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::IntegrationError;
use crate::model::{ModelSpec, State};

/// Components below this value abort the run; smaller undershoots are
/// treated as round-off and clamped to zero.
pub const NEGATIVITY_TOLERANCE: f64 = -1e-6;

/// Initial history on `[-max(tau, delta), 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistorySpec {
    Constant(State),
    /// Time-ordered `(t, state)` samples, linearly interpolated. Must cover
    /// `[-max(tau, delta), 0]`.
    SampledTable(Vec<(f64, State)>),
}

impl HistorySpec {
    pub fn validate(&self, max_delay: f64) -> Result<(), IntegrationError> {
        let nonneg = |s: &State| s.is_finite() && s.min_component() >= 0.0;
        match self {
            HistorySpec::Constant(s) => {
                if !nonneg(s) {
                    return Err(IntegrationError::Setup(format!("history state {s:?} must be finite and nonnegative")));
                }
            }
            HistorySpec::SampledTable(rows) => {
                if rows.is_empty() {
                    return Err(IntegrationError::Setup("history table is empty".into()));
                }
                if rows.windows(2).any(|w| w[1].0.partial_cmp(&w[0].0) != Some(std::cmp::Ordering::Greater)) {
                    return Err(IntegrationError::Setup("history times must be strictly increasing".into()));
                }
                let (first, last) = (rows[0].0, rows[rows.len() - 1].0);
                if first > -max_delay + 1e-12 * max_delay.max(1.0) && max_delay > 0.0 || last < 0.0 {
                    return Err(IntegrationError::Setup(format!(
                        "history table spans [{first}, {last}] but must cover [{}, 0]",
                        -max_delay
                    )));
                }
                if let Some((_, s)) = rows.iter().find(|(_, s)| !nonneg(s)) {
                    return Err(IntegrationError::Setup(format!("history state {s:?} must be finite and nonnegative")));
                }
            }
        }
        Ok(())
    }

    /// History value at `t <= 0`.
    pub fn at(&self, t: f64) -> State {
        match self {
            HistorySpec::Constant(s) => *s,
            HistorySpec::SampledTable(rows) => {
                let i = rows.partition_point(|(ti, _)| *ti <= t);
                if i == 0 {
                    return rows[0].1;
                }
                if i == rows.len() {
                    return rows[i - 1].1;
                }
                let (t0, s0) = rows[i - 1];
                let (t1, s1) = rows[i];
                let w = (t - t0) / (t1 - t0);
                let lerp = |a: f64, b: f64| a + w * (b - a);
                State::new(lerp(s0.x, s1.x), lerp(s0.y, s1.y), lerp(s0.z, s1.z))
            }
        }
    }
}

/// Dense-output solution on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<State>,
    derivatives: Vec<[f64; 3]>,
    step: f64,
    model_fingerprint: u64,
}

impl Trajectory {
    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn derivatives(&self) -> &[[f64; 3]] {
        &self.derivatives
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("trajectory has at least one point")
    }

    pub fn model_fingerprint(&self) -> u64 {
        self.model_fingerprint
    }

    pub fn final_state(&self) -> State {
        *self.states.last().expect("trajectory has at least one point")
    }

    /// Cubic Hermite interpolation on the containing mesh interval. Exact at
    /// mesh points.
    pub fn dense_eval(&self, t: f64) -> Result<State, IntegrationError> {
        let horizon = self.horizon();
        if !(0.0..=horizon).contains(&t) {
            return Err(IntegrationError::OutOfRange { t, horizon });
        }
        let i = self.times.partition_point(|&ti| ti <= t);
        if i > 0 && self.times[i - 1] == t {
            return Ok(self.states[i - 1]);
        }
        let i = i.clamp(1, self.times.len() - 1) - 1;
        Ok(hermite(
            self.times[i],
            self.times[i + 1],
            &self.states[i],
            &self.states[i + 1],
            &self.derivatives[i],
            &self.derivatives[i + 1],
            t,
        ))
    }

    /// Writes `t,x,y,z` rows every `stride` time units (plus the horizon).
    pub fn write_csv<W: Write>(&self, out: W, stride: f64) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "x", "y", "z"])?;
        for t in self.sample_times(stride) {
            let s = self.dense_eval(t).expect("sample time inside range");
            w.write_record([t, s.x, s.y, s.z].iter().map(|v| v.to_string()))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Output times `0, stride, 2 stride, ...` up to and including the horizon.
    pub fn sample_times(&self, stride: f64) -> Vec<f64> {
        let horizon = self.horizon();
        let n = (horizon / stride + 1e-9).floor() as usize;
        let mut ts: Vec<f64> = (0..=n).map(|k| (k as f64 * stride).min(horizon)).collect();
        if horizon - ts[ts.len() - 1] > 1e-9 * horizon.max(1.0) {
            ts.push(horizon);
        }
        ts
    }
}

fn hermite(t0: f64, t1: f64, s0: &State, s1: &State, d0: &[f64; 3], d1: &[f64; 3], t: f64) -> State {
    let h = t1 - t0;
    let u = (t - t0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    let a = s0.to_array();
    let b = s1.to_array();
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = h00 * a[k] + h10 * h * d0[k] + h01 * b[k] + h11 * h * d1[k];
    }
    State::from_array(out)
}

/// Default step: `min(0.01, smallest positive delay / 20)`.
pub fn default_step(model: &ModelSpec) -> f64 {
    let p = model.params();
    let min_delay = [p.tau, p.delta].into_iter().filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    0.01_f64.min(min_delay / 20.0)
}

struct Solver<'a> {
    model: &'a ModelSpec,
    history: &'a HistorySpec,
    tau: f64,
    delta: f64,
    step: f64,
    times: Vec<f64>,
    states: Vec<State>,
    derivatives: Vec<[f64; 3]>,
}

impl Solver<'_> {
    /// Value of component `k` at `s <= current time`.
    fn past(&self, s: f64, k: usize) -> f64 {
        if s <= 0.0 {
            return self.history.at(s).to_array()[k];
        }
        let n = self.times.len();
        let i = ((s / self.step).floor() as usize).min(n - 2);
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let st = hermite(t0, t1, &self.states[i], &self.states[i + 1], &self.derivatives[i], &self.derivatives[i + 1], s);
        st.to_array()[k]
    }

    fn slope(&self, t: f64, s: &State) -> [f64; 3] {
        let x_tau = if self.tau > 0.0 { self.past(t - self.tau, 0) } else { s.x };
        let y_delta = if self.delta > 0.0 { self.past(t - self.delta, 1) } else { s.y };
        self.model.rhs(s, x_tau, y_delta)
    }
}

/// Integrates the model from `history` over `[0, horizon]` with a fixed step.
pub fn integrate(model: &ModelSpec, history: &HistorySpec, horizon: f64, step: f64) -> Result<Trajectory, IntegrationError> {
    let p = model.params();
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(IntegrationError::Setup(format!("horizon must be positive, got {horizon}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(IntegrationError::Setup(format!("step must be positive, got {step}")));
    }
    let min_delay = [p.tau, p.delta].into_iter().filter(|d| *d > 0.0).fold(f64::INFINITY, f64::min);
    if min_delay.is_finite() {
        if step > min_delay * (1.0 + 1e-12) {
            return Err(IntegrationError::Setup(format!("step {step} exceeds the smallest positive delay {min_delay}")));
        }
    } else if step > horizon / 100.0 * (1.0 + 1e-12) {
        return Err(IntegrationError::Setup(format!("step {step} exceeds horizon/100 for a delay-free model")));
    }
    history.validate(p.max_delay())?;

    let n_full = (horizon / step + 1e-9).floor() as usize;
    let mut grid: Vec<f64> = (0..=n_full).map(|i| i as f64 * step).collect();
    if horizon - grid[n_full] > 1e-9 * step {
        grid.push(horizon);
    } else {
        grid[n_full] = horizon;
    }

    let start = history.at(0.0);
    let mut solver = Solver {
        model,
        history,
        tau: p.tau,
        delta: p.delta,
        step,
        times: Vec::with_capacity(grid.len()),
        states: Vec::with_capacity(grid.len()),
        derivatives: Vec::with_capacity(grid.len()),
    };
    solver.times.push(0.0);
    solver.states.push(start);
    let d0 = solver.slope(0.0, &start);
    solver.derivatives.push(d0);

    for w in grid.windows(2) {
        let (t, t_next) = (w[0], w[1]);
        let h = t_next - t;
        let y = *solver.states.last().unwrap();
        let k1 = *solver.derivatives.last().unwrap();
        let add = |s: &State, k: &[f64; 3], c: f64| State::new(s.x + c * k[0], s.y + c * k[1], s.z + c * k[2]);
        let k2 = solver.slope(t + 0.5 * h, &add(&y, &k1, 0.5 * h));
        let k3 = solver.slope(t + 0.5 * h, &add(&y, &k2, 0.5 * h));
        let k4 = solver.slope(t_next, &add(&y, &k3, h));
        let mut next = [0.0; 3];
        let ya = y.to_array();
        for k in 0..3 {
            next[k] = ya[k] + h / 6.0 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k]);
        }
        let mut next = State::from_array(next);
        if !next.is_finite() {
            return Err(IntegrationError::BlowUp { time: t_next });
        }
        if next.min_component() < NEGATIVITY_TOLERANCE {
            return Err(IntegrationError::Negativity { time: t_next, x: next.x, y: next.y, z: next.z });
        }
        next = State::new(next.x.max(0.0), next.y.max(0.0), next.z.max(0.0));
        solver.times.push(t_next);
        solver.states.push(next);
        let d = solver.slope(t_next, &next);
        if d.iter().any(|v| !v.is_finite()) {
            return Err(IntegrationError::BlowUp { time: t_next });
        }
        solver.derivatives.push(d);
    }

    Ok(Trajectory {
        times: solver.times,
        states: solver.states,
        derivatives: solver.derivatives,
        step,
        model_fingerprint: model.fingerprint(),
    })
}
