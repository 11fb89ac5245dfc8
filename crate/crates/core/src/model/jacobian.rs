use serde::{Deserialize, Serialize};

use super::{Equilibrium, ModelSpec};
use crate::error::ModelError;

/// Partial-derivative aggregates of the linearization around an equilibrium:
///
/// ```text
/// [x']   [A  B  alpha] [x]   [0 0 0] [x(t-tau)  ]
/// [y'] = [0  C  0    ] [y] + [D 0 0] [y(t-delta)]
/// [z']   [0  0 -alpha] [z]   [0 E 0] [0         ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct JacCoeffs {
    pub A: f64,
    pub B: f64,
    pub C: f64,
    pub D: f64,
    pub E: f64,
    pub alpha: f64,
}

/// Evaluates `A = -b f_x - c V' - d`, `B = -b f_y`, `C = b1 f_y - d1 - r P'`,
/// `D = b1 f_x` (delayed argument) and `E = r P'` (delayed argument) at the
/// equilibrium.
pub fn jacobian_coeffs(model: &ModelSpec, eq: &Equilibrium) -> Result<JacCoeffs, ModelError> {
    let s = eq.state;
    if !s.is_finite() {
        return Err(ModelError::Domain("equilibrium is not finite".into()));
    }
    let p = model.params();
    let (fx, fy) = model.incidence().grad2(s.x, s.y);
    let dv = model.vaccination().deriv1(s.x);
    let dp = model.recovery().deriv1(s.y);
    let j = JacCoeffs {
        A: -p.b * fx - p.c * dv - p.d,
        B: -p.b * fy,
        C: p.b1 * fy - p.d1 - p.r * dp,
        D: p.b1 * fx,
        E: p.r * dp,
        alpha: p.alpha,
    };
    if [j.A, j.B, j.C, j.D, j.E].iter().any(|v| !v.is_finite()) {
        return Err(ModelError::Domain(format!("response partial undefined at {s:?}")));
    }
    Ok(j)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{find_disease_free, find_endemic, EquilibriumKind, ResponseFn, State};
    use crate::presets;

    fn coeffs(name: &str, endemic: bool) -> JacCoeffs {
        let m = presets::load(name).unwrap().model;
        let eq = if endemic {
            find_endemic(&m)[0]
        } else {
            find_disease_free(&m).equilibrium().unwrap()
        };
        jacobian_coeffs(&m, &eq).unwrap()
    }

    fn assert_close(j: JacCoeffs, want: [f64; 5]) {
        let got = [j.A, j.B, j.C, j.D, j.E];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-12, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn ex5_2_disease_free() {
        assert_close(coeffs("ex5_2", false), [-2.0, -5.0, 0.0, 0.0, 4.0]);
    }

    #[test]
    fn ex5_1_endemic() {
        assert_close(coeffs("ex5_1", true), [-8.0, -2.0, 0.0, 6.0, 1.0]);
    }

    #[test]
    fn zero_model_keeps_linear_removal_only() {
        let mut p = *presets::load("ex5_1").unwrap().model.params();
        p.c = 0.0;
        let z = ResponseFn::Zero;
        let m = ModelSpec::new(p, z, z, z).unwrap();
        let eq = Equilibrium { state: State::new(3.0, 1.0, 2.0), kind: EquilibriumKind::Endemic, residual: 0.0 };
        assert_close(jacobian_coeffs(&m, &eq).unwrap(), [-p.d, 0.0, -p.d1, 0.0, 0.0]);
    }

    #[test]
    fn disease_free_c_matches_bilinear_formula() {
        for name in ["ex5_2", "ex5_4", "sec6_followup"] {
            let m = presets::load(name).unwrap().model;
            let eq = find_disease_free(&m).equilibrium().unwrap();
            let p = m.params();
            let j = jacobian_coeffs(&m, &eq).unwrap();
            assert!((j.C - (p.b1 * eq.state.x - p.d1 - p.r)).abs() < 1e-12, "{name}");
        }
    }

    #[test]
    fn non_finite_equilibrium_is_rejected() {
        let m = presets::load("ex5_1").unwrap().model;
        let eq = Equilibrium { state: State::new(f64::NAN, 0.0, 0.0), kind: EquilibriumKind::DiseaseFree, residual: 0.0 };
        assert!(jacobian_coeffs(&m, &eq).is_err());
    }
}
