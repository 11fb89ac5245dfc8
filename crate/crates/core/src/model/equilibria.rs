use serde::{Deserialize, Serialize};

use super::{ModelSpec, State};

/// Whether an equilibrium carries infection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquilibriumKind {
    DiseaseFree,
    Endemic,
}

/// A constant solution of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub state: State,
    pub kind: EquilibriumKind,
    /// Max absolute right-hand side at the point, delayed arguments equal
    /// to current values.
    pub residual: f64,
}

impl Equilibrium {
    fn at(model: &ModelSpec, state: State, kind: EquilibriumKind) -> Self {
        Equilibrium { state, kind, residual: residual(model, &state) }
    }
}

/// Outcome of the disease-free search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DiseaseFreeSearch {
    Found { equilibrium: Equilibrium },
    /// The incidence function does not vanish at `y = 0`, so no state with
    /// `y = z = 0` can be stationary.
    IncidenceDoesNotVanish,
    /// `a - d x - c V(x)` has no sign change on `[0, a/d]`.
    NoSignChange,
}

impl DiseaseFreeSearch {
    pub fn equilibrium(&self) -> Option<Equilibrium> {
        match self {
            DiseaseFreeSearch::Found { equilibrium } => Some(*equilibrium),
            _ => None,
        }
    }
}

const ENDEMIC_GRID: usize = 8;
const NEWTON_MAX_ITER: usize = 100;
const NEWTON_TOL: f64 = 1e-12;
const DEDUP_DIST: f64 = 1e-8;
const RESIDUAL_MAX: f64 = 1e-10;
/// Strict-inequality band for the endemic existence condition.
const EXISTENCE_BAND: f64 = 1e-12;

fn residual(model: &ModelSpec, s: &State) -> f64 {
    model.rhs(s, s.x, s.y).iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Finds the disease-free equilibrium `(x, 0, 0)` with `c V(x) = a - d x`
/// by bisection on `[0, a/d]`.
pub fn find_disease_free(model: &ModelSpec) -> DiseaseFreeSearch {
    if !model.incidence().vanishes_without_infection() {
        return DiseaseFreeSearch::IncidenceDoesNotVanish;
    }
    let p = model.params();
    let v = model.vaccination();
    let g = |x: f64| p.a - p.d * x - p.c * v.eval1(x);
    let found = |x: f64| DiseaseFreeSearch::Found {
        equilibrium: Equilibrium::at(model, State::new(x, 0.0, 0.0), EquilibriumKind::DiseaseFree),
    };
    if p.d <= 0.0 {
        return DiseaseFreeSearch::NoSignChange;
    }
    let (mut lo, mut hi) = (0.0, p.a / p.d);
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return found(lo);
    }
    if ghi == 0.0 {
        return found(hi);
    }
    if glo.signum() == ghi.signum() {
        return DiseaseFreeSearch::NoSignChange;
    }
    let lo_positive = glo > 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm == 0.0 || (hi - lo) <= f64::EPSILON * hi.abs().max(1.0) {
            return found(mid);
        }
        if (gm > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
        if gm.abs() < 1e-14 {
            return found(mid);
        }
    }
    found(0.5 * (lo + hi))
}

/// Endemic equilibria (`y > 0`). Uses the closed form for the
/// bilinear/linear special case and multi-start Newton otherwise.
pub fn find_endemic(model: &ModelSpec) -> Vec<Equilibrium> {
    if model.is_bilinear_linear() {
        find_endemic_closed_form(model).into_iter().collect()
    } else {
        find_endemic_newton(model)
    }
}

/// Closed-form endemic equilibrium of the bilinear/linear special case.
/// Requires the strict existence condition `(d1 + r) / b1 < a / (c + d)`;
/// equality counts as non-existence. Returns `None` for other model shapes.
pub fn find_endemic_closed_form(model: &ModelSpec) -> Option<Equilibrium> {
    if !model.is_bilinear_linear() {
        return None;
    }
    let p = model.params();
    if p.b1 <= 0.0 || p.c + p.d <= 0.0 {
        return None;
    }
    let threshold = (p.d1 + p.r) / p.b1;
    let capacity = p.a / (p.c + p.d);
    if capacity - threshold <= EXISTENCE_BAND * threshold.abs().max(1.0) {
        return None;
    }
    let x = threshold;
    let y = (p.b1 * p.a - (p.c + p.d) * (p.d1 + p.r)) / (p.b * p.d1 + p.r * (p.b - p.b1));
    let z = if p.alpha > 0.0 { p.r / p.alpha * y } else { return None };
    if !(y > 0.0 && y.is_finite()) {
        return None;
    }
    Some(Equilibrium::at(model, State::new(x, y, z), EquilibriumKind::Endemic))
}

/// Damped Newton from a deterministic 8x8x8 start grid over `[0, a/d]^3`.
/// Keeps nonnegative roots with `y > 0` whose residual is below `1e-10`,
/// deduplicated at distance `1e-8`, sorted lexicographically.
pub fn find_endemic_newton(model: &ModelSpec) -> Vec<Equilibrium> {
    let p = model.params();
    let span = if p.d > 0.0 { p.a / p.d } else { p.a.max(1.0) };
    let span = if span > 0.0 { span } else { 1.0 };
    let mut roots: Vec<State> = Vec::new();
    let coord = |i: usize| (i as f64 + 0.5) / ENDEMIC_GRID as f64 * span;
    for i in 0..ENDEMIC_GRID {
        for j in 0..ENDEMIC_GRID {
            for k in 0..ENDEMIC_GRID {
                let start = State::new(coord(i), coord(j), coord(k));
                if let Some(s) = newton(model, start) {
                    if s.x >= -NEWTON_TOL && s.z >= -NEWTON_TOL && s.y > 1e-9 && residual(model, &s) < RESIDUAL_MAX {
                        let s = State::new(s.x.max(0.0), s.y, s.z.max(0.0));
                        if roots.iter().all(|r| r.dist(&s) > DEDUP_DIST) {
                            roots.push(s);
                        }
                    }
                }
            }
        }
    }
    roots.sort_by(|a, b| {
        a.x.total_cmp(&b.x).then(a.y.total_cmp(&b.y)).then(a.z.total_cmp(&b.z))
    });
    roots.into_iter().map(|s| Equilibrium::at(model, s, EquilibriumKind::Endemic)).collect()
}

fn newton(model: &ModelSpec, start: State) -> Option<State> {
    let mut s = start.to_array();
    let norm = |v: &[f64; 3]| v.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    let g = |s: &[f64; 3]| model.rhs(&State::from_array(*s), s[0], s[1]);
    let mut gs = g(&s);
    for _ in 0..NEWTON_MAX_ITER {
        let gn = norm(&gs);
        if !gn.is_finite() {
            return None;
        }
        if gn < NEWTON_TOL {
            return Some(State::from_array(s));
        }
        let jac = steady_jacobian(model, &State::from_array(s));
        let step = solve3(jac, [-gs[0], -gs[1], -gs[2]])?;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let trial = [s[0] + lambda * step[0], s[1] + lambda * step[1], s[2] + lambda * step[2]];
            let gt = g(&trial);
            if norm(&gt) < gn || norm(&gt) < NEWTON_TOL {
                s = trial;
                gs = gt;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // Round-off floor: no further decrease is possible.
            return (gn < RESIDUAL_MAX).then(|| State::from_array(s));
        }
    }
    (norm(&gs) < NEWTON_TOL).then(|| State::from_array(s))
}

/// Jacobian of the right-hand side with delayed arguments tied to the
/// current state.
fn steady_jacobian(model: &ModelSpec, s: &State) -> [[f64; 3]; 3] {
    let p = model.params();
    let (fx, fy) = model.incidence().grad2(s.x, s.y);
    let dv = model.vaccination().deriv1(s.x);
    let dp = model.recovery().deriv1(s.y);
    [
        [-p.b * fx - p.c * dv - p.d, -p.b * fy, p.alpha],
        [p.b1 * fx, p.b1 * fy - p.r * dp - p.d1, 0.0],
        [0.0, p.r * dp, -p.alpha],
    ]
}

/// Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut m: [[f64; 3]; 3], mut rhs: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for row in col + 1..3 {
            let factor = m[row][col] / m[col][col];
            for k in col..3 {
                m[row][k] -= factor * m[col][k];
            }
            rhs[row] -= factor * rhs[col];
        }
    }
    let mut out = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| m[row][k] * out[k]).sum();
        out[row] = (rhs[row] - tail) / m[row][row];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}
