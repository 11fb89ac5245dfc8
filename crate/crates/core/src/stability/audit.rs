use std::fmt;

use serde::{Deserialize, Serialize};

/// Relative width of the equality band used by every criterion check.
pub const EQUALITY_BAND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Gt,
    Ge,
    Lt,
    Le,
    Ne,
}

impl Relation {
    fn symbol(self) -> &'static str {
        match self {
            Relation::Gt => ">",
            Relation::Ge => ">=",
            Relation::Lt => "<",
            Relation::Le => "<=",
            Relation::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Holds,
    Fails,
    /// Both sides agree to within the equality band.
    Boundary,
}

/// One evaluated inequality, kept so every verdict can be audited.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Inequality {
    pub label: String,
    pub lhs: f64,
    pub rhs: f64,
    pub relation: Relation,
    pub outcome: Outcome,
}

impl Inequality {
    /// Evaluates `lhs relation rhs`. Values within
    /// `EQUALITY_BAND * max(1, |lhs|, |rhs|)` of each other are a boundary
    /// case: it satisfies `>=` and `<=` but not the strict relations.
    pub fn check(label: impl Into<String>, lhs: f64, relation: Relation, rhs: f64) -> Self {
        let band = EQUALITY_BAND * 1f64.max(lhs.abs()).max(rhs.abs());
        let outcome = if !(lhs.is_finite() && rhs.is_finite()) {
            // Comparisons against infinities are still meaningful; NaN never holds.
            if lhs.is_nan() || rhs.is_nan() {
                Outcome::Fails
            } else if strict_holds(lhs, relation, rhs) {
                Outcome::Holds
            } else {
                Outcome::Fails
            }
        } else if (lhs - rhs).abs() <= band {
            Outcome::Boundary
        } else if strict_holds(lhs, relation, rhs) {
            Outcome::Holds
        } else {
            Outcome::Fails
        };
        Inequality { label: label.into(), lhs, rhs, relation, outcome }
    }

    pub fn holds(&self) -> bool {
        match self.outcome {
            Outcome::Holds => true,
            Outcome::Fails => false,
            Outcome::Boundary => matches!(self.relation, Relation::Ge | Relation::Le),
        }
    }

    pub fn is_boundary(&self) -> bool {
        self.outcome == Outcome::Boundary
    }
}

fn strict_holds(lhs: f64, relation: Relation, rhs: f64) -> bool {
    match relation {
        Relation::Gt | Relation::Ge => lhs > rhs,
        Relation::Lt | Relation::Le => lhs < rhs,
        Relation::Ne => lhs != rhs,
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mark = match self.outcome {
            Outcome::Holds => "holds",
            Outcome::Fails => "fails",
            Outcome::Boundary => "boundary",
        };
        write!(f, "{}: {:.6} {} {:.6} [{}]", self.label, self.lhs, self.relation.symbol(), self.rhs, mark)
    }
}

pub(crate) fn all_hold(checks: &[Inequality]) -> bool {
    checks.iter().all(Inequality::holds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_satisfies_only_weak_relations() {
        let eq = Inequality::check("x", 5.0, Relation::Lt, 5.0 + 1e-13);
        assert!(eq.is_boundary());
        assert!(!eq.holds());
        assert!(Inequality::check("x", 5.0, Relation::Le, 5.0).holds());
        assert!(Inequality::check("x", 5.0, Relation::Ge, 5.0).holds());
        assert!(!Inequality::check("x", 5.0, Relation::Ne, 5.0).holds());
    }

    #[test]
    fn clear_cases() {
        assert!(Inequality::check("x", 1.0, Relation::Gt, 0.0).holds());
        assert!(!Inequality::check("x", -1.0, Relation::Gt, 0.0).holds());
        assert!(Inequality::check("x", 1.0, Relation::Lt, f64::INFINITY).holds());
        assert!(!Inequality::check("x", f64::NAN, Relation::Lt, 1.0).holds());
    }

    #[test]
    fn band_is_relative_to_magnitude() {
        assert!(Inequality::check("x", 1e6, Relation::Lt, 1e6 + 1e-7).is_boundary());
        assert!(!Inequality::check("x", 1e-3, Relation::Lt, 1e-3 + 1e-7).is_boundary());
    }
}
