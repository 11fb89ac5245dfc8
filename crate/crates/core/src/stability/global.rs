use serde::{Deserialize, Serialize};

use super::audit::{Inequality, Relation};
use crate::model::{Equilibrium, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GlobalVerdict {
    #[serde(rename = "endemic_gas")]
    EndemicGAS,
    #[serde(rename = "disease_free_gas")]
    DiseaseFreeGAS,
    NotApplicable,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalResult {
    pub verdict: GlobalVerdict,
    /// A deciding inequality sits on its boundary.
    pub boundary: bool,
    pub checks: Vec<Inequality>,
}

/// Delay-independent global stability, for the bilinear incidence with
/// linear vaccination and recovery only.
///
/// * endemic point: globally stable if it exists and
///   `b1 < min(b (d1 + r) / r, c + d)`, the first term being infinite for `r = 0`;
/// * disease-free point: globally stable if `a / (c + d) < (d1 + r) / b1`.
pub fn global_verdict(model: &ModelSpec, disease_free: Option<&Equilibrium>, endemic: &[Equilibrium]) -> GlobalResult {
    if !model.is_bilinear_linear() {
        return GlobalResult { verdict: GlobalVerdict::NotApplicable, boundary: false, checks: Vec::new() };
    }
    let p = model.params();
    let treatment_bound = if p.r > 0.0 { p.b * (p.d1 + p.r) / p.r } else { f64::INFINITY };
    let endemic_check =
        Inequality::check("b1 < min(b (d1 + r) / r, c + d)", p.b1, Relation::Lt, treatment_bound.min(p.c + p.d));
    let inflow_ratio = if p.c + p.d > 0.0 { p.a / (p.c + p.d) } else { f64::INFINITY };
    let threshold = if p.b1 > 0.0 { (p.d1 + p.r) / p.b1 } else { f64::INFINITY };
    let dfe_check = Inequality::check("a / (c + d) < (d1 + r) / b1", inflow_ratio, Relation::Lt, threshold);

    let verdict = if !endemic.is_empty() && endemic_check.holds() {
        GlobalVerdict::EndemicGAS
    } else if disease_free.is_some() && dfe_check.holds() {
        GlobalVerdict::DiseaseFreeGAS
    } else {
        GlobalVerdict::Inconclusive
    };
    let boundary = verdict == GlobalVerdict::Inconclusive
        && ((!endemic.is_empty() && endemic_check.is_boundary()) || (disease_free.is_some() && dfe_check.is_boundary()));
    GlobalResult { verdict, boundary, checks: vec![endemic_check, dfe_check] }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{find_disease_free, find_endemic};
    use crate::presets;

    fn verdict_for(name: &str) -> GlobalResult {
        let m = presets::load(name).unwrap().model;
        let dfe = find_disease_free(&m).equilibrium();
        global_verdict(&m, dfe.as_ref(), &find_endemic(&m))
    }

    #[test]
    fn reference_systems() {
        let r = verdict_for("ex5_1");
        assert_eq!(r.verdict, GlobalVerdict::EndemicGAS);
        assert_eq!((r.checks[0].lhs, r.checks[0].rhs), (1.0, 2.0));

        let r = verdict_for("ex5_2");
        assert_eq!(r.verdict, GlobalVerdict::Inconclusive);
        assert!(r.boundary);
        assert_eq!((r.checks[1].lhs, r.checks[1].rhs), (5.0, 5.0));

        let r = verdict_for("sec6_followup");
        assert_eq!(r.verdict, GlobalVerdict::Inconclusive);
        assert!(!r.boundary);
    }

    #[test]
    fn nonlinear_forms_are_not_applicable() {
        for name in ["ex5_5", "ex5_6", "ex5_7"] {
            assert_eq!(verdict_for(name).verdict, GlobalVerdict::NotApplicable, "{name}");
        }
    }

    #[test]
    fn strict_disease_free_case() {
        // a / (c + d) = 2.5 < (d1 + r) / b1 = 5: no endemic point, disease-free GAS.
        let mut cfg = presets::load("ex5_2").unwrap();
        let mut p = *cfg.model.params();
        p.a = 5.0;
        cfg.model = crate::model::ModelSpec::new(p, *cfg.model.incidence(), *cfg.model.vaccination(), *cfg.model.recovery()).unwrap();
        let dfe = find_disease_free(&cfg.model).equilibrium();
        let r = global_verdict(&cfg.model, dfe.as_ref(), &find_endemic(&cfg.model));
        assert_eq!(r.verdict, GlobalVerdict::DiseaseFreeGAS);
    }
}
