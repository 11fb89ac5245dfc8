//! Catalog of incidence, vaccination and recovery response functions.
//!
//! Every variant carries its analytic partial derivatives. Two-argument
//! variants act as incidence functions `f(x, y)`; one-argument variants act
//! as vaccination `V(x)` or recovery `P(y)` functions. `Zero` works in both
//! roles.

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// A response function of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ResponseFn {
    /// Identically zero.
    Zero,
    /// `k * u`.
    Linear { k: f64 },
    /// `x * y`.
    Bilinear,
    /// `x / (x + k) * y`.
    SaturatingIncidence { k: f64 },
    /// `x / (x + y)`, defined as 0 at the origin.
    FractionalMix,
    /// `u / (k + u)`.
    SaturatingUnary { k: f64 },
    /// `p1 * u + p2 * u^2`.
    PowerSum { p1: f64, p2: f64 },
}

/// Number of arguments a response function accepts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arity {
    /// Works with one or two arguments (`Zero`).
    Any,
    Unary,
    Binary,
}

impl ResponseFn {
    pub fn arity(&self) -> Arity {
        match self {
            ResponseFn::Zero => Arity::Any,
            ResponseFn::Bilinear
            | ResponseFn::SaturatingIncidence { .. }
            | ResponseFn::FractionalMix => Arity::Binary,
            ResponseFn::Linear { .. }
            | ResponseFn::SaturatingUnary { .. }
            | ResponseFn::PowerSum { .. } => Arity::Unary,
        }
    }

    pub fn accepts_unary(&self) -> bool {
        self.arity() != Arity::Binary
    }

    pub fn accepts_binary(&self) -> bool {
        self.arity() != Arity::Unary
    }

    /// True when `f(x, 0) = 0` for every `x`, i.e. a disease-free state can
    /// be an equilibrium. `FractionalMix` fails this: `f(x, 0) = 1` for `x > 0`.
    pub fn vanishes_without_infection(&self) -> bool {
        !matches!(self, ResponseFn::FractionalMix)
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        let check = |name: &str, v: f64, positive: bool| -> Result<(), String> {
            if !v.is_finite() {
                return Err(format!("{name} must be finite"));
            }
            if positive && v <= 0.0 {
                return Err(format!("{name} must be > 0"));
            }
            if v < 0.0 {
                return Err(format!("{name} must be >= 0"));
            }
            Ok(())
        };
        match *self {
            ResponseFn::Linear { k } => check("k", k, false),
            ResponseFn::SaturatingIncidence { k } | ResponseFn::SaturatingUnary { k } => {
                check("k", k, true)
            }
            ResponseFn::PowerSum { p1, p2 } => {
                check("p1", p1, false)?;
                check("p2", p2, false)
            }
            _ => Ok(()),
        }
    }

    /// Value of a one-argument response at `u`.
    pub fn eval1(&self, u: f64) -> f64 {
        match *self {
            ResponseFn::Zero => 0.0,
            ResponseFn::Linear { k } => k * u,
            ResponseFn::SaturatingUnary { k } => u / (k + u),
            ResponseFn::PowerSum { p1, p2 } => p1 * u + p2 * u * u,
            // Binary variants read as f(u, u); never reached for validated models.
            _ => self.eval2(u, u),
        }
    }

    /// Derivative of a one-argument response at `u`.
    pub fn deriv1(&self, u: f64) -> f64 {
        match *self {
            ResponseFn::Zero => 0.0,
            ResponseFn::Linear { k } => k,
            ResponseFn::SaturatingUnary { k } => k / ((k + u) * (k + u)),
            ResponseFn::PowerSum { p1, p2 } => p1 + 2.0 * p2 * u,
            _ => {
                let (fx, fy) = self.grad2(u, u);
                fx + fy
            }
        }
    }

    /// Value of a two-argument response at `(x, y)`.
    pub fn eval2(&self, x: f64, y: f64) -> f64 {
        match *self {
            ResponseFn::Zero => 0.0,
            ResponseFn::Bilinear => x * y,
            ResponseFn::SaturatingIncidence { k } => x / (x + k) * y,
            ResponseFn::FractionalMix => {
                let s = x + y;
                if s == 0.0 {
                    0.0
                } else {
                    x / s
                }
            }
            // Unary variants read as V(x); never reached for validated models.
            _ => self.eval1(x),
        }
    }

    /// Partial derivatives `(df/dx, df/dy)` of a two-argument response.
    pub fn grad2(&self, x: f64, y: f64) -> (f64, f64) {
        match *self {
            ResponseFn::Zero => (0.0, 0.0),
            ResponseFn::Bilinear => (y, x),
            ResponseFn::SaturatingIncidence { k } => {
                let s = x + k;
                (k * y / (s * s), x / s)
            }
            ResponseFn::FractionalMix => {
                let s = x + y;
                if s == 0.0 {
                    (0.0, 0.0)
                } else {
                    (y / (s * s), -x / (s * s))
                }
            }
            _ => (self.deriv1(x), 0.0),
        }
    }
}

/// Evaluates a response function on one or two arguments.
pub fn response_eval(f: &ResponseFn, args: &[f64]) -> Result<f64, ModelError> {
    check_args(f, args)?;
    Ok(match args {
        [u] => f.eval1(*u),
        [x, y] => f.eval2(*x, *y),
        _ => unreachable!(),
    })
}

/// Evaluates the partial derivative with respect to argument `index`.
pub fn response_partial(f: &ResponseFn, index: usize, args: &[f64]) -> Result<f64, ModelError> {
    check_args(f, args)?;
    match (args, index) {
        ([u], 0) => Ok(f.deriv1(*u)),
        ([x, y], 0) => Ok(f.grad2(*x, *y).0),
        ([x, y], 1) => Ok(f.grad2(*x, *y).1),
        _ => Err(ModelError::Domain(format!(
            "argument index {index} out of range for {} argument(s)",
            args.len()
        ))),
    }
}

fn check_args(f: &ResponseFn, args: &[f64]) -> Result<(), ModelError> {
    let ok = match args.len() {
        1 => f.accepts_unary(),
        2 => f.accepts_binary(),
        _ => false,
    };
    if !ok {
        return Err(ModelError::Arity {
            role: "response",
            reason: format!("{f:?} cannot take {} argument(s)", args.len()),
        });
    }
    if args.iter().any(|a| !a.is_finite()) {
        return Err(ModelError::Domain("non-finite argument".into()));
    }
    Ok(())
}
