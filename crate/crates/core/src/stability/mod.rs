//! Local and global stability of the equilibria.
//!
//! Linearizing around an equilibrium gives the characteristic equation
//!
//! ```text
//! F(lambda) = lambda^3 + l lambda^2 + m lambda + n
//!           + (l1 lambda + m1) e^{-lambda tau} + n1 e^{-lambda (tau + delta)} = 0
//! ```
//!
//! Each criterion below works on the six scalars `(l, m, n, l1, m1, n1)`.
//! [`char_roots_scan`] locates roots of `F` directly and is used as an
//! independent check on the criteria.

mod audit;
mod criteria;
mod cubic;
mod global;
mod report;
mod roots;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::model::JacCoeffs;

pub use audit::{Inequality, Outcome, Relation, EQUALITY_BAND};
pub use criteria::{
    delay_free_stable, delta_analysis, general_delay_analysis, pseudo_delay_cubic, tau_critical,
    tau_from_pseudo_delay, tau_persistence, CombinedResult, CombinedVerdict, DeltaCandidate, DeltaResult,
    DeltaVerdict, DelayFreeResult, DelayFreeVerdict, PseudoDelayRoot, TauCritical, TauCriticalOutcome,
    TauPersistence, TauPersistenceBranch,
};
pub use cubic::solve_cubic_real;
pub use global::{global_verdict, GlobalResult, GlobalVerdict};
pub use report::{
    analyze, select_target, tau_crossing, Discrepancy, OracleSwitchCheck, ReportOptions, StabilityReport, TauOnlyResult,
    TauOnlyVerdict,
};
pub use roots::{char_roots_scan, rightmost_real_part, RootScan, ScanBox};

/// Coefficients of the characteristic equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharCoeffs {
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub l1: f64,
    pub m1: f64,
    pub n1: f64,
}

/// `l = alpha - (A + C)`, `m = A C - alpha (A + C)`, `n = alpha A C`,
/// `l1 = -B D`, `m1 = -alpha B D`, `n1 = -alpha D E`.
pub fn char_coeffs(j: &JacCoeffs) -> CharCoeffs {
    let (a, b, c, d, e, al) = (j.A, j.B, j.C, j.D, j.E, j.alpha);
    // Adding zero turns -0.0 into 0.0 so reports print clean signs.
    CharCoeffs {
        l: al - (a + c) + 0.0,
        m: a * c - al * (a + c) + 0.0,
        n: al * c * a + 0.0,
        l1: -b * d + 0.0,
        m1: -b * al * d + 0.0,
        n1: -d * al * e + 0.0,
    }
}

impl CharCoeffs {
    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }

    pub fn to_array(&self) -> [f64; 6] {
        [self.l, self.m, self.n, self.l1, self.m1, self.n1]
    }

    /// True when no delayed term is present, so the delays cannot matter.
    pub fn has_no_delayed_terms(&self) -> bool {
        let scale = self.to_array().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        [self.l1, self.m1, self.n1].iter().all(|v| v.abs() <= EQUALITY_BAND * scale)
    }

    /// Coefficients of `F` with both delays set to zero, highest degree
    /// first: `[1, l, m + l1, n + m1 + n1]`.
    pub fn delay_free_poly(&self) -> [f64; 4] {
        [1.0, self.l, self.m + self.l1, self.n + self.m1 + self.n1]
    }

    /// `F(lambda)` at the given delays.
    pub fn eval(&self, lambda: Complex64, tau: f64, delta: f64) -> Complex64 {
        let e1 = (-lambda * tau).exp();
        let e2 = (-lambda * (tau + delta)).exp();
        ((lambda + self.l) * lambda + self.m) * lambda + self.n + (lambda * self.l1 + self.m1) * e1 + e2 * self.n1
    }

    /// `dF/dlambda` at the given delays.
    pub fn eval_deriv(&self, lambda: Complex64, tau: f64, delta: f64) -> Complex64 {
        let e1 = (-lambda * tau).exp();
        let e2 = (-lambda * (tau + delta)).exp();
        (lambda * 3.0 + 2.0 * self.l) * lambda + self.m + e1 * self.l1 - (lambda * self.l1 + self.m1) * e1 * tau
            - e2 * (self.n1 * (tau + delta))
    }

    /// Sum of the magnitudes of the terms of `F(lambda)`; the natural scale
    /// for judging whether a residual is small.
    pub fn term_scale(&self, lambda: Complex64, tau: f64, delta: f64) -> f64 {
        let a = lambda.norm();
        let e1 = (-lambda.re * tau).exp();
        let e2 = (-lambda.re * (tau + delta)).exp();
        a.powi(3)
            + self.l.abs() * a * a
            + self.m.abs() * a
            + self.n.abs()
            + (self.l1.abs() * a + self.m1.abs()) * e1
            + self.n1.abs() * e2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn jac(a: f64, b: f64, c: f64, d: f64, e: f64, alpha: f64) -> JacCoeffs {
        JacCoeffs { A: a, B: b, C: c, D: d, E: e, alpha }
    }

    /// `det(lambda I - J(lambda))` of the linearized system expanded by
    /// cofactors, with `e1 = e^{-lambda tau}` and `e2 = e^{-lambda (tau + delta)}`.
    fn det_oracle(j: &JacCoeffs, lambda: Complex64, e1: Complex64, e2: Complex64) -> Complex64 {
        let one = Complex64::new(1.0, 0.0);
        let m = [
            [lambda - j.A, -j.B * one, -j.alpha * one],
            [-j.D * e1, lambda - j.C, 0.0 * one],
            [0.0 * one, -j.E * e2 / e1, lambda + j.alpha],
        ];
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    #[test]
    fn reference_coefficients() {
        let cc = char_coeffs(&jac(-2.0, -5.0, 0.0, 0.0, 4.0, 1.0));
        assert_eq!(cc.to_array(), [3.0, 2.0, 0.0, 0.0, 0.0, 0.0]);
        let cc = char_coeffs(&jac(-8.0, -2.0, 0.0, 6.0, 1.0, 1.0));
        assert_eq!(cc.to_array(), [9.0, 8.0, 0.0, 12.0, 12.0, -6.0]);
        let cc = char_coeffs(&jac(0.0, 0.0, 0.0, 0.0, 0.0, 1.0));
        assert_eq!(cc.to_array(), [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn eval_and_derivative_match_oracles() {
        let j = jac(-8.0, -2.0, 0.5, 6.0, 1.5, 0.7);
        let cc = char_coeffs(&j);
        let (tau, delta) = (1.3, 0.4);
        for lambda in [Complex64::new(0.3, 1.1), Complex64::new(-1.2, 0.2), Complex64::new(2.0, -3.0)] {
            let e1 = (-lambda * tau).exp();
            let e2 = (-lambda * (tau + delta)).exp();
            // Row three carries e^{-lambda delta} = e2 / e1.
            let want = det_oracle(&j, lambda, e1, e2);
            let got = cc.eval(lambda, tau, delta);
            assert!((want - got).norm() < 1e-10 * (1.0 + want.norm()), "{want} vs {got}");

            let h = 1e-6;
            let fd = (cc.eval(lambda + h, tau, delta) - cc.eval(lambda - h, tau, delta)) / (2.0 * h);
            let d = cc.eval_deriv(lambda, tau, delta);
            assert!((fd - d).norm() < 1e-6 * (1.0 + d.norm()), "{fd} vs {d}");
        }
    }

    proptest::proptest! {
        #[test]
        fn m1_is_alpha_times_l1(a in -10.0f64..10.0, b in -10.0f64..10.0, c in -10.0f64..10.0,
                                d in -10.0f64..10.0, e in -10.0f64..10.0, alpha in 0.0f64..10.0) {
            let cc = char_coeffs(&jac(a, b, c, d, e, alpha));
            proptest::prop_assert!((cc.m1 - alpha * cc.l1).abs() <= 1e-12 * (1.0 + cc.m1.abs()));
        }
    }
}
