//! The delayed susceptible-infected-recovered system:
//!
//! ```text
//! x' = a - b f(x, y) - d x - c V(x) + alpha z
//! y' = b1 f(x(t - tau), y) - r P(y) - d1 y
//! z' = r P(y(t - delta)) - alpha z
//! ```

mod equilibria;
mod jacobian;
mod response;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

pub use equilibria::{
    find_disease_free, find_endemic, find_endemic_closed_form, find_endemic_newton,
    DiseaseFreeSearch, Equilibrium, EquilibriumKind,
};
pub use jacobian::{jacobian_coeffs, JacCoeffs};
pub use response::{response_eval, response_partial, Arity, ResponseFn};

/// Rate constants and delays.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// Susceptible inflow.
    pub a: f64,
    /// Contact rate.
    pub b: f64,
    /// Conversion rate, `b1 <= b`.
    pub b1: f64,
    /// Vaccination rate.
    pub c: f64,
    /// Susceptible removal rate.
    pub d: f64,
    /// Infected removal rate.
    pub d1: f64,
    /// Treatment rate.
    pub r: f64,
    /// Re-susceptibility rate.
    pub alpha: f64,
    /// Incubation delay.
    #[serde(default)]
    pub tau: f64,
    /// Recovery delay.
    #[serde(default)]
    pub delta: f64,
}

impl Params {
    pub fn validate(&self) -> Result<(), ModelError> {
        let fields = [
            ("a", self.a),
            ("b", self.b),
            ("b1", self.b1),
            ("c", self.c),
            ("d", self.d),
            ("d1", self.d1),
            ("r", self.r),
            ("alpha", self.alpha),
            ("tau", self.tau),
            ("delta", self.delta),
        ];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(ModelError::InvalidParam { name, reason: format!("{v} is not finite") });
            }
            if v < 0.0 {
                return Err(ModelError::InvalidParam { name, reason: format!("{v} is negative") });
            }
        }
        if self.b1 > self.b {
            return Err(ModelError::InvalidParam {
                name: "b1",
                reason: format!("conversion rate {} exceeds contact rate {}", self.b1, self.b),
            });
        }
        Ok(())
    }

    pub fn with_delays(mut self, tau: f64, delta: f64) -> Self {
        self.tau = tau;
        self.delta = delta;
        self
    }

    pub fn max_delay(&self) -> f64 {
        self.tau.max(self.delta)
    }
}

/// Parameters plus the three response functions. Construct through
/// [`ModelSpec::new`] (or deserialization), which validates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModelSpec", into = "RawModelSpec")]
pub struct ModelSpec {
    params: Params,
    f: ResponseFn,
    v: ResponseFn,
    p: ResponseFn,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModelSpec {
    params: Params,
    f: ResponseFn,
    #[serde(rename = "V")]
    v: ResponseFn,
    #[serde(rename = "P")]
    p: ResponseFn,
}

impl TryFrom<RawModelSpec> for ModelSpec {
    type Error = ModelError;

    fn try_from(raw: RawModelSpec) -> Result<Self, Self::Error> {
        ModelSpec::new(raw.params, raw.f, raw.v, raw.p)
    }
}

impl From<ModelSpec> for RawModelSpec {
    fn from(m: ModelSpec) -> Self {
        RawModelSpec { params: m.params, f: m.f, v: m.v, p: m.p }
    }
}

impl ModelSpec {
    /// `f` is the incidence function, `v` the vaccination function and `p`
    /// the recovery function.
    pub fn new(params: Params, f: ResponseFn, v: ResponseFn, p: ResponseFn) -> Result<Self, ModelError> {
        params.validate()?;
        if !f.accepts_binary() {
            return Err(ModelError::Arity { role: "f", reason: format!("{f:?} is one-argument") });
        }
        if !v.accepts_unary() {
            return Err(ModelError::Arity { role: "V", reason: format!("{v:?} is two-argument") });
        }
        if !p.accepts_unary() {
            return Err(ModelError::Arity { role: "P", reason: format!("{p:?} is two-argument") });
        }
        for (role, g) in [("f", f), ("V", v), ("P", p)] {
            g.validate().map_err(|reason| ModelError::Arity { role, reason })?;
        }
        if p.eval1(0.0) != 0.0 {
            return Err(ModelError::Arity { role: "P", reason: "P(0) must be 0".into() });
        }
        Ok(ModelSpec { params, f, v, p })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn incidence(&self) -> &ResponseFn {
        &self.f
    }

    pub fn vaccination(&self) -> &ResponseFn {
        &self.v
    }

    pub fn recovery(&self) -> &ResponseFn {
        &self.p
    }

    /// Same model with the delays replaced.
    pub fn with_delays(&self, tau: f64, delta: f64) -> Result<Self, ModelError> {
        ModelSpec::new(self.params.with_delays(tau, delta), self.f, self.v, self.p)
    }

    /// True for the bilinear / linear / linear special case where the
    /// closed-form equilibria and the global-stability criteria apply.
    pub fn is_bilinear_linear(&self) -> bool {
        self.f == ResponseFn::Bilinear
            && self.v == ResponseFn::Linear { k: 1.0 }
            && self.p == ResponseFn::Linear { k: 1.0 }
    }

    /// Right-hand side without input checks. Used on the integrator hot path.
    #[inline]
    pub fn rhs(&self, now: &State, x_tau: f64, y_delta: f64) -> [f64; 3] {
        let p = &self.params;
        [
            p.a - p.b * self.f.eval2(now.x, now.y) - p.d * now.x - p.c * self.v.eval1(now.x)
                + p.alpha * now.z,
            p.b1 * self.f.eval2(x_tau, now.y) - p.r * self.p.eval1(now.y) - p.d1 * now.y,
            p.r * self.p.eval1(y_delta) - p.alpha * now.z,
        ]
    }

    /// Stable 64-bit fingerprint of the model (FNV-1a over its JSON form).
    pub fn fingerprint(&self) -> u64 {
        let json = serde_json::to_string(self).expect("model serializes");
        json.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
    }
}

/// A point in the (susceptible, infected, recovered) state space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl State {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        State { x, y, z }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        State { x: v[0], y: v[1], z: v[2] }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn norm_inf(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    /// Max-norm distance.
    pub fn dist(&self, other: &State) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max((self.z - other.z).abs())
    }

    pub fn min_component(&self) -> f64 {
        self.x.min(self.y).min(self.z)
    }
}

/// Evaluates the right-hand side at `now`, with the delayed susceptible
/// value `x_tau = x(t - tau)` and delayed infected value `y_delta = y(t - delta)`.
pub fn eval_rhs(model: &ModelSpec, now: &State, x_tau: f64, y_delta: f64) -> Result<[f64; 3], ModelError> {
    if !now.is_finite() || !x_tau.is_finite() || !y_delta.is_finite() {
        return Err(ModelError::Domain("non-finite state or delayed argument".into()));
    }
    Ok(model.rhs(now, x_tau, y_delta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn ex5_1_endemic_point_is_stationary() {
        let m = presets::load("ex5_1").unwrap().model;
        let d = eval_rhs(&m, &State::new(2.0, 6.0, 6.0), 2.0, 6.0).unwrap();
        assert_eq!(d, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn origin_gives_pure_inflow() {
        for name in presets::NAMES {
            let m = presets::load(name).unwrap().model;
            let d = eval_rhs(&m, &State::default(), 0.0, 0.0).unwrap();
            assert_eq!(d, [m.params().a, 0.0, 0.0], "{name}");
        }
    }

    #[test]
    fn ex5_5_endemic_point_is_stationary() {
        let m = presets::load("ex5_5").unwrap().model;
        let s = State::new(200.0 / 21.0, 10.0 / 21.0, 30.0 / 21.0);
        let d = eval_rhs(&m, &s, s.x, s.y).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-12), "{d:?}");
    }

    #[test]
    fn non_finite_input_is_a_domain_error() {
        let m = presets::load("ex5_1").unwrap().model;
        assert!(eval_rhs(&m, &State::new(f64::NAN, 1.0, 1.0), 1.0, 1.0).is_err());
        assert!(eval_rhs(&m, &State::new(1.0, 1.0, 1.0), f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn conversion_rate_above_contact_rate_is_rejected() {
        let mut p = *presets::load("ex5_1").unwrap().model.params();
        p.b1 = 2.0;
        let err = ModelSpec::new(p, ResponseFn::Bilinear, ResponseFn::Linear { k: 1.0 }, ResponseFn::Linear { k: 1.0 });
        assert!(matches!(err, Err(ModelError::InvalidParam { name: "b1", .. })));
    }

    #[test]
    fn wrong_arity_roles_are_rejected() {
        let p = *presets::load("ex5_1").unwrap().model.params();
        let lin = ResponseFn::Linear { k: 1.0 };
        assert!(ModelSpec::new(p, lin, lin, lin).is_err());
        assert!(ModelSpec::new(p, ResponseFn::Bilinear, ResponseFn::Bilinear, lin).is_err());
        assert!(ModelSpec::new(p, ResponseFn::Bilinear, lin, ResponseFn::FractionalMix).is_err());
    }

    #[test]
    fn model_json_uses_documented_keys() {
        let json = r#"{
            "params": {"a": 10, "b": 1, "b1": 1, "c": 1, "d": 1, "d1": 1, "r": 1, "alpha": 1, "tau": 0, "delta": 0},
            "f": {"kind": "bilinear"},
            "V": {"kind": "linear", "k": 1},
            "P": {"kind": "linear", "k": 1}
        }"#;
        let m: ModelSpec = serde_json::from_str(json).unwrap();
        assert!(m.is_bilinear_linear());
        let back: ModelSpec = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.fingerprint(), m.fingerprint());

        let bad = json.replace(r#""b1": 1"#, r#""b1": 5"#);
        let err = serde_json::from_str::<ModelSpec>(&bad).unwrap_err().to_string();
        assert!(err.contains("b1"), "{err}");
    }
}
