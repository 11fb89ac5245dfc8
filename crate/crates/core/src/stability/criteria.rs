use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::audit::{all_hold, Inequality, Relation};
use super::cubic::solve_cubic_real;
use super::CharCoeffs;
use crate::model::JacCoeffs;

// ---------------------------------------------------------------------------
// Delay-free stability

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DelayFreeVerdict {
    Stable,
    NotEstablished,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayFreeResult {
    pub verdict: DelayFreeVerdict,
    /// `D = 0`, `C <= 0`, `A <= 0`: the delayed terms drop out and the
    /// equilibrium behaves as in the delay-free system.
    pub delay_free_equivalent: bool,
    pub checks: Vec<Inequality>,
    /// Checks behind `delay_free_equivalent`; empty when no linearization
    /// coefficients were supplied.
    pub equivalence_checks: Vec<Inequality>,
}

/// Stable when `l > 0`, `l1 + m > 0` and `n + m1 + n1 > 0`, or when the
/// linearization decouples (`D = 0`, `C <= 0`, `A <= 0`).
pub fn delay_free_stable(cc: &CharCoeffs, jac: Option<&JacCoeffs>) -> DelayFreeResult {
    let checks = vec![
        Inequality::check("l > 0", cc.l, Relation::Gt, 0.0),
        Inequality::check("l1 + m > 0", cc.l1 + cc.m, Relation::Gt, 0.0),
        Inequality::check("n + m1 + n1 > 0", cc.n + cc.m1 + cc.n1, Relation::Gt, 0.0),
    ];
    let equivalence_checks = match jac {
        Some(j) => {
            vec![
                Inequality::check("|D| <= 0", j.D.abs(), Relation::Le, 0.0),
                Inequality::check("C <= 0", j.C, Relation::Le, 0.0),
                Inequality::check("A <= 0", j.A, Relation::Le, 0.0),
            ]
        }
        None => Vec::new(),
    };
    let delay_free_equivalent = !equivalence_checks.is_empty() && all_hold(&equivalence_checks);
    let verdict = if all_hold(&checks) || delay_free_equivalent {
        DelayFreeVerdict::Stable
    } else {
        DelayFreeVerdict::NotEstablished
    };
    DelayFreeResult { verdict, delay_free_equivalent, checks, equivalence_checks }
}

// ---------------------------------------------------------------------------
// Incubation delay only: persistence

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TauPersistenceBranch {
    /// No delayed terms: `F` does not depend on the delays.
    NoDelayedTerms,
    /// `a0 > 0`, `a1 >= 0`: no crossing frequency, stability or instability
    /// is kept for every `tau`.
    PreservedNoCrossing,
    /// `a0 > 0`, `a1 < 0` and the discriminant inequality: likewise preserved.
    PreservedDiscriminant,
    /// `a0 < 0`: a stable equilibrium loses stability for large enough
    /// `tau`, and an unstable one stays unstable.
    EventualSwitch,
    /// `a0 = 0`: instability, once present, persists.
    InstabilityPersists,
    /// None of the branches applies.
    NoConclusion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauPersistence {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub branch: TauPersistenceBranch,
    pub checks: Vec<Inequality>,
}

impl TauPersistence {
    pub fn preserves(&self) -> bool {
        matches!(
            self.branch,
            TauPersistenceBranch::NoDelayedTerms
                | TauPersistenceBranch::PreservedNoCrossing
                | TauPersistenceBranch::PreservedDiscriminant
        )
    }
}

/// With `delta = 0`, `|P(i nu)|^2 = |Q(i nu)|^2` reduces to
/// `w^3 + a2 w^2 + a1 w + a0 = 0` in `w = nu^2`, where
/// `a0 = n^2 - (m1 + n1)^2`, `a1 = m^2 - 2 l n - l1^2`, `a2 = l^2 - 2 m`.
pub fn tau_persistence(cc: &CharCoeffs) -> TauPersistence {
    let a0 = cc.n * cc.n - (cc.m1 + cc.n1).powi(2);
    let a1 = cc.m * cc.m - 2.0 * cc.l * cc.n - cc.l1 * cc.l1;
    let a2 = cc.l * cc.l - 2.0 * cc.m;
    let a0_pos = Inequality::check("a0 > 0", a0, Relation::Gt, 0.0);
    let a1_nonneg = Inequality::check("a1 >= 0", a1, Relation::Ge, 0.0);
    let disc = Inequality::check(
        "2 a2^3 - 9 a1 a2 + 27 a0 > 2 (a2^2 - 3 a1)^(3/2)",
        2.0 * a2.powi(3) - 9.0 * a1 * a2 + 27.0 * a0,
        Relation::Gt,
        2.0 * (a2 * a2 - 3.0 * a1).max(0.0).powf(1.5),
    );
    let a0_neg = Inequality::check("a0 < 0", a0, Relation::Lt, 0.0);
    let a0_nonpos = Inequality::check("a0 <= 0", a0, Relation::Le, 0.0);

    let branch = if cc.has_no_delayed_terms() {
        TauPersistenceBranch::NoDelayedTerms
    } else if a0_pos.holds() && a1_nonneg.holds() {
        TauPersistenceBranch::PreservedNoCrossing
    } else if a0_pos.holds() && !a1_nonneg.holds() && disc.holds() {
        TauPersistenceBranch::PreservedDiscriminant
    } else if a0_neg.holds() {
        TauPersistenceBranch::EventualSwitch
    } else if a0_nonpos.holds() {
        TauPersistenceBranch::InstabilityPersists
    } else {
        TauPersistenceBranch::NoConclusion
    };
    TauPersistence { a0, a1, a2, branch, checks: vec![a0_pos, a1_nonneg, disc, a0_neg, a0_nonpos] }
}

// ---------------------------------------------------------------------------
// Incubation delay only: pseudo-delay switch

/// Coefficients `(A, B, C, D)` of the pseudo-delay cubic
/// `A T^3 + B T^2 + C T + D = 0`:
///
/// ```text
/// A = -l (n - m1 - n1)(m - l1)
/// B = (n - m1 - n1)^2 - [(m^2 - l1^2) l + l^2 (n - m1 - n1) - (n - m1 - n1)(m - l1)] + l^2 (n + m1 + n1)
/// C = 2 (l1 + m)(n - m1 - n1) - [(l1 + m) l^2 + l (n - m1 - n1) + (m^2 - l1^2)] + 2 l (n + m1 + n1)
/// D = (l1 + m)^2 - l (l1 + m) + (n + m1 + n1)
/// ```
pub fn pseudo_delay_cubic(cc: &CharCoeffs) -> [f64; 4] {
    let CharCoeffs { l, m, n, l1, m1, n1 } = *cc;
    let q = n - m1 - n1;
    let s = n + m1 + n1;
    let a = -l * q * (m - l1);
    let b = q * q - ((m * m - l1 * l1) * l + l * l * q - q * (m - l1)) + l * l * s;
    let c = 2.0 * (l1 + m) * q - ((l1 + m) * l * l + l * q + (m * m - l1 * l1)) + 2.0 * l * s;
    let d = (l1 + m).powi(2) - l * (l1 + m) + s;
    [a, b, c, d]
}

/// `tau = (2 / nu) [atan(nu T) + k pi]`.
pub fn tau_from_pseudo_delay(t: f64, nu: f64, k: u32) -> f64 {
    2.0 / nu * ((nu * t).atan() + k as f64 * PI)
}

/// One positive root of the pseudo-delay cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PseudoDelayRoot {
    pub t: f64,
    /// `nu^2 = (l1 + m + (n - m1 - n1) T) / (1 + l T)`.
    pub nu_squared: f64,
    /// Delays for `k = 0` and `k = 1`; absent when `nu^2 <= 0`.
    pub tau: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum TauCriticalOutcome {
    /// Preserved by the sign conditions (`case = 1`) or because every cubic
    /// coefficient is nonnegative (`case = 2`).
    Preserved { case: u8 },
    Switch { t_plus: f64, nu_plus: f64, tau_plus: f64, tau_plus_next: f64 },
    Inconclusive { diagnostic: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauCritical {
    pub cubic: [f64; 4],
    pub sign_checks: Vec<Inequality>,
    pub coefficient_checks: Vec<Inequality>,
    /// Every positive root of the cubic, ascending.
    pub roots: Vec<PseudoDelayRoot>,
    pub outcome: TauCriticalOutcome,
}

impl TauCritical {
    /// `(T+, nu+, tau+)` when a switch is predicted.
    pub fn switch(&self) -> Option<(f64, f64, f64)> {
        match self.outcome {
            TauCriticalOutcome::Switch { t_plus, nu_plus, tau_plus, .. } => Some((t_plus, nu_plus, tau_plus)),
            _ => None,
        }
    }
}

/// Critical incubation delay from the pseudo-delay cubic. Meaningful when
/// the delay-free system is stable; the caller checks that.
pub fn tau_critical(cc: &CharCoeffs) -> TauCritical {
    let CharCoeffs { l, m, n, l1, m1, n1 } = *cc;
    let q = n - m1 - n1;
    let cubic = pseudo_delay_cubic(cc);
    let sign_checks = vec![
        Inequality::check("l (n - m1 - n1) > 0", l * q, Relation::Gt, 0.0),
        Inequality::check("l (l1 + m) + (n - m1 - n1) > 0", l * (l1 + m) + q, Relation::Gt, 0.0),
        Inequality::check("l1 + m > 0", l1 + m, Relation::Gt, 0.0),
    ];
    let coefficient_checks: Vec<Inequality> = ["A", "B", "C", "D"]
        .iter()
        .zip(cubic)
        .map(|(name, v)| Inequality::check(format!("cubic coefficient {name} >= 0"), v, Relation::Ge, 0.0))
        .collect();

    let mut roots = Vec::new();
    let outcome = if all_hold(&sign_checks) {
        TauCriticalOutcome::Preserved { case: 1 }
    } else if all_hold(&coefficient_checks) {
        TauCriticalOutcome::Preserved { case: 2 }
    } else {
        match solve_cubic_real(cubic[0], cubic[1], cubic[2], cubic[3]) {
            Err(e) => TauCriticalOutcome::Inconclusive { diagnostic: e.to_string() },
            Ok(ts) => {
                for t in ts.into_iter().filter(|t| *t > 0.0) {
                    let nu_squared = (l1 + m + q * t) / (1.0 + l * t);
                    let tau = (nu_squared > 0.0 && nu_squared.is_finite()).then(|| {
                        let nu = nu_squared.sqrt();
                        [tau_from_pseudo_delay(t, nu, 0), tau_from_pseudo_delay(t, nu, 1)]
                    });
                    roots.push(PseudoDelayRoot { t, nu_squared, tau });
                }
                match roots.iter().find(|r| r.tau.is_some()) {
                    Some(r) => {
                        let [tau_plus, tau_plus_next] = r.tau.expect("checked");
                        TauCriticalOutcome::Switch { t_plus: r.t, nu_plus: r.nu_squared.sqrt(), tau_plus, tau_plus_next }
                    }
                    None if roots.is_empty() => TauCriticalOutcome::Inconclusive {
                        diagnostic: "a cubic coefficient is negative but the cubic has no positive root".into(),
                    },
                    None => TauCriticalOutcome::Inconclusive {
                        diagnostic: "nu^2 <= 0 at every positive root of the pseudo-delay cubic".into(),
                    },
                }
            }
        }
    };
    TauCritical { cubic, sign_checks, coefficient_checks, roots, outcome }
}

// ---------------------------------------------------------------------------
// Recovery delay only

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DeltaVerdict {
    Preserved,
    /// One crossing frequency; delays for `k = 0, 1`, ascending.
    SwitchAt { deltas: Vec<f64> },
    /// Two or more crossing frequencies; all candidate delays, ascending.
    SecondBifurcationPossible { deltas: Vec<f64> },
    Inconclusive { diagnostic: String },
}

/// A positive root `w = nu^2` of the frequency cubic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaCandidate {
    pub nu_squared: f64,
    /// `T = (nu^2 - (l1 + m)) / (n + m1 - n1 - l nu^2)`.
    pub t: f64,
    /// Delays for `k = 0, 1` when `T > 0`.
    pub delta: Option<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaResult {
    pub verdict: DeltaVerdict,
    /// `w^3 + c2 w^2 + c1 w + c0` in `w = nu^2`, highest degree first.
    pub frequency_cubic: [f64; 4],
    /// `l (l1 + m) != n + m1 - n1`.
    pub limit_check: Inequality,
    /// The three coefficients of the frequency cubic, each `>= 0`.
    pub preservation_checks: Vec<Inequality>,
    /// Which of the four one-root sign patterns hold (1-based).
    pub one_root_patterns: Vec<u8>,
    /// `c2 < 0`, `c1 > 0`, `c0 < 0`: two positive roots.
    pub two_root_pattern: bool,
    pub candidates: Vec<DeltaCandidate>,
}

/// With `tau = 0` the equation becomes
/// `lambda^3 + l lambda^2 + (l1 + m) lambda + n + m1 + n1 e^{-lambda delta}`;
/// purely imaginary roots `i nu` satisfy
/// `nu^6 + (l^2 - 2 (l1 + m)) nu^4 + ((l1 + m)^2 - 2 l (n + m1)) nu^2 + (n + m1)^2 - n1^2 = 0`.
pub fn delta_analysis(cc: &CharCoeffs) -> DeltaResult {
    let CharCoeffs { l, m, n, l1, m1, n1 } = *cc;
    let p = l1 + m;
    let c2 = l * l - 2.0 * p;
    let c1 = p * p - 2.0 * l * (n + m1);
    let c0 = (n + m1).powi(2) - n1 * n1;
    let frequency_cubic = [1.0, c2, c1, c0];
    let limit_check = Inequality::check("l (l1 + m) != n + m1 - n1", l * p, Relation::Ne, n + m1 - n1);
    let preservation_checks = vec![
        Inequality::check("l^2 - 2 (l1 + m) >= 0", c2, Relation::Ge, 0.0),
        Inequality::check("(l1 + m)^2 - 2 l (n + m1) >= 0", c1, Relation::Ge, 0.0),
        Inequality::check("(n + m1)^2 - n1^2 >= 0", c0, Relation::Ge, 0.0),
    ];
    let signs = |s2: f64, s1: f64, s0: f64| c2 * s2 > 0.0 && c1 * s1 > 0.0 && c0 * s0 > 0.0;
    let one_root_patterns: Vec<u8> = [(-1.0, 1.0, 1.0), (1.0, -1.0, 1.0), (1.0, 1.0, -1.0), (-1.0, -1.0, -1.0)]
        .iter()
        .enumerate()
        .filter(|(_, (a, b, c))| signs(*a, *b, *c))
        .map(|(i, _)| i as u8 + 1)
        .collect();
    let two_root_pattern = signs(-1.0, 1.0, -1.0);

    let mut result = DeltaResult {
        verdict: DeltaVerdict::Preserved,
        frequency_cubic,
        limit_check,
        preservation_checks,
        one_root_patterns,
        two_root_pattern,
        candidates: Vec::new(),
    };

    if cc.has_no_delayed_terms() {
        return result;
    }
    if !result.limit_check.holds() {
        result.verdict = DeltaVerdict::Inconclusive {
            diagnostic: "l (l1 + m) = n + m1 - n1: purely imaginary roots possible in the limiting case".into(),
        };
        return result;
    }
    if all_hold(&result.preservation_checks) {
        return result;
    }
    let ws = match solve_cubic_real(1.0, c2, c1, c0) {
        Ok(ws) => ws,
        Err(e) => {
            result.verdict = DeltaVerdict::Inconclusive { diagnostic: e.to_string() };
            return result;
        }
    };
    for w in ws.into_iter().filter(|w| *w > 0.0) {
        let t = (w - p) / (n + m1 - n1 - l * w);
        let delta = (t > 0.0 && t.is_finite()).then(|| {
            let nu = w.sqrt();
            [tau_from_pseudo_delay(t, nu, 0), tau_from_pseudo_delay(t, nu, 1)]
        });
        result.candidates.push(DeltaCandidate { nu_squared: w, t, delta });
    }
    let mut deltas: Vec<f64> = result.candidates.iter().filter_map(|c| c.delta).flatten().collect();
    deltas.sort_by(f64::total_cmp);
    let valid = result.candidates.iter().filter(|c| c.delta.is_some()).count();
    result.verdict = match valid {
        _ if result.candidates.is_empty() => DeltaVerdict::Preserved,
        0 => DeltaVerdict::Inconclusive {
            diagnostic: "positive nu^2 found but no pseudo delay T > 0".into(),
        },
        1 => DeltaVerdict::SwitchAt { deltas },
        _ => DeltaVerdict::SecondBifurcationPossible { deltas },
    };
    result
}

// ---------------------------------------------------------------------------
// Both delays

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum CombinedVerdict {
    Preserved,
    /// `theta = tau + delta` from the smallest positive root `nu+` of `Psi`;
    /// both absent when `Psi` has no positive root on the search range.
    SwitchPossible { nu_plus: Option<f64>, theta: Option<f64> },
    Inconclusive { diagnostic: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedResult {
    pub verdict: CombinedVerdict,
    /// The two preservation conditions; empty when `l = 0` or `l1 = 0`.
    pub preservation_checks: Vec<Inequality>,
    /// `n^2 + 2 n + n1^2 < m1^2`.
    pub switch_check: Inequality,
}

/// Search range for the smallest positive root of `Psi`.
const PSI_NU_MIN: f64 = 1e-6;
const PSI_NU_MAX: f64 = 1e3;
const PSI_GRID: usize = 4000;

/// `Psi(nu)` at `theta = tau + delta`:
/// `nu^6 + a2 nu^4 + a1 nu^2 + (n^2 + n1^2 - m1^2) + 2 (n - l nu^2) cos(nu theta) + 2 (m nu - nu^3) sin(nu theta)`.
pub(crate) fn psi(cc: &CharCoeffs, nu: f64, theta: f64) -> f64 {
    let CharCoeffs { l, m, n, l1, m1, n1 } = *cc;
    let v2 = nu * nu;
    v2 * v2 * v2 + (l * l - 2.0 * m) * v2 * v2 + (m * m - 2.0 * l * n - l1 * l1) * v2 + (n * n + n1 * n1 - m1 * m1)
        + 2.0 * (n - l * v2) * (nu * theta).cos()
        + 2.0 * (m * nu - v2 * nu) * (nu * theta).sin()
}

fn smallest_psi_root(cc: &CharCoeffs, theta: f64) -> Option<f64> {
    let ratio = (PSI_NU_MAX / PSI_NU_MIN).ln();
    let grid = |i: usize| PSI_NU_MIN * (ratio * i as f64 / PSI_GRID as f64).exp();
    let mut lo = grid(0);
    let mut f_lo = psi(cc, lo, theta);
    for i in 1..=PSI_GRID {
        let hi = grid(i);
        let f_hi = psi(cc, hi, theta);
        if f_lo == 0.0 {
            return Some(lo);
        }
        if f_lo.signum() != f_hi.signum() {
            let (mut a, mut b, mut fa) = (lo, hi, f_lo);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                let fm = psi(cc, mid, theta);
                if fm == 0.0 || (b - a) <= 1e-15 * mid {
                    return Some(mid);
                }
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Some(0.5 * (a + b));
        }
        lo = hi;
        f_lo = f_hi;
    }
    None
}

/// Both delays positive. `tau` and `delta` enter only through
/// `theta = tau + delta` in the root search.
pub fn general_delay_analysis(cc: &CharCoeffs, tau: f64, delta: f64) -> CombinedResult {
    let CharCoeffs { l, m, n, l1, m1, n1 } = *cc;
    let switch_check = Inequality::check("n^2 + 2 n + n1^2 < m1^2", n * n + 2.0 * n + n1 * n1, Relation::Lt, m1 * m1);
    let l_zero = l.abs() <= super::EQUALITY_BAND;
    let l1_zero = l1.abs() <= super::EQUALITY_BAND;
    let preservation_checks = if l_zero || l1_zero {
        Vec::new()
    } else {
        let root = (l1.abs() + (l1 * l1 + 4.0 * l * (n + n1.abs() + m1.abs())).sqrt()) / (2.0 * l);
        vec![
            Inequality::check(
                "((|l1| + sqrt(l1^2 + 4 l (n + |n1| + |m1|))) / (2 l))^2 <= (n1^2 - (m1^2 + 2)) / l1^2",
                root * root,
                Relation::Le,
                (n1 * n1 - (m1 * m1 + 2.0)) / (l1 * l1),
            ),
            Inequality::check("n1^2 > m1^2 + 2", n1 * n1, Relation::Gt, m1 * m1 + 2.0),
        ]
    };
    let verdict = if cc.has_no_delayed_terms() || (!preservation_checks.is_empty() && all_hold(&preservation_checks)) {
        CombinedVerdict::Preserved
    } else if switch_check.holds() {
        let theta_given = tau + delta;
        let nu_plus = smallest_psi_root(cc, theta_given);
        let theta = nu_plus.map(|v| ((m * v - v * v * v) / (n - l * v * v)).atan() / v);
        CombinedVerdict::SwitchPossible { nu_plus, theta }
    } else if preservation_checks.is_empty() {
        CombinedVerdict::Inconclusive {
            diagnostic: format!(
                "preservation condition undefined ({} = 0) and the switch condition fails",
                if l_zero { "l" } else { "l1" }
            ),
        }
    } else {
        CombinedVerdict::Inconclusive { diagnostic: "neither the preservation nor the switch condition holds".into() }
    };
    CombinedResult { verdict, preservation_checks, switch_check }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stability::rightmost_real_part;

    fn cc(l: f64, m: f64, n: f64, l1: f64, m1: f64, n1: f64) -> CharCoeffs {
        CharCoeffs { l, m, n, l1, m1, n1 }
    }

    const EX5_1: CharCoeffs = CharCoeffs { l: 9.0, m: 8.0, n: 0.0, l1: 12.0, m1: 12.0, n1: -6.0 };
    const EX5_3: CharCoeffs = CharCoeffs { l: 7.0, m: 6.0, n: 0.0, l1: 4.0, m1: 4.0, n1: -2.0 };

    #[test]
    fn delay_free_examples() {
        let r = delay_free_stable(&EX5_1, None);
        assert_eq!(r.verdict, DelayFreeVerdict::Stable);
        assert_eq!(r.checks[1].lhs, 20.0);
        assert_eq!(r.checks[2].lhs, 6.0);

        let j = JacCoeffs { A: -2.0, B: -5.0, C: 0.0, D: 0.0, E: 4.0, alpha: 1.0 };
        let r = delay_free_stable(&crate::stability::char_coeffs(&j), Some(&j));
        assert!(r.delay_free_equivalent);
        assert_eq!(r.verdict, DelayFreeVerdict::Stable);
        // n + m1 + n1 = 0 on its own does not establish stability.
        assert!(!r.checks[2].holds());

        let r = delay_free_stable(&cc(-1.0, 1.0, 1.0, 0.0, 0.0, 0.0), None);
        assert_eq!(r.verdict, DelayFreeVerdict::NotEstablished);
    }

    #[test]
    fn persistence_branches() {
        let r = tau_persistence(&EX5_3);
        assert_eq!(r.a0, -4.0);
        assert_eq!(r.branch, TauPersistenceBranch::EventualSwitch);

        let r = tau_persistence(&cc(1.0, 3.0, 2.0, 0.0, 0.0, 1e-3));
        assert!((r.a0 - (4.0 - 1e-6)).abs() < 1e-12);
        assert_eq!(r.a1, 5.0);
        assert_eq!(r.branch, TauPersistenceBranch::PreservedNoCrossing);

        let r = tau_persistence(&cc(1.0, 3.0, 2.0, 0.0, 0.0, 0.0));
        assert_eq!(r.branch, TauPersistenceBranch::NoDelayedTerms);
        assert_eq!((r.a0, r.a1), (4.0, 5.0));
    }

    /// Discriminant branch: search a small family for a coefficient set with
    /// `a0 > 0`, `a1 < 0` and the discriminant inequality, then confirm with
    /// the root scan that the rightmost root stays left of the axis for every
    /// incubation delay on a grid.
    #[test]
    fn discriminant_branch_preserves_stability() {
        let mut found = None;
        'search: for l in [2.0, 3.0, 4.0] {
            for m in [0.5, 1.0, 1.5] {
                for n in [1.5, 2.0, 2.5, 3.0] {
                    for l1 in [0.1, 0.5, 1.0] {
                        let c = cc(l, m, n, l1, 0.1, 0.0);
                        let r = tau_persistence(&c);
                        if r.branch == TauPersistenceBranch::PreservedDiscriminant
                            && delay_free_stable(&c, None).verdict == DelayFreeVerdict::Stable
                            && l * (m + l1) > n + 0.1
                        {
                            found = Some(c);
                            break 'search;
                        }
                    }
                }
            }
        }
        let c = found.expect("a coefficient set in the discriminant branch");
        for i in 0..=20 {
            let tau = i as f64 * 0.75;
            let re = rightmost_real_part(&c, tau, 0.0).expect("roots found");
            assert!(re < 0.0, "tau {tau}: rightmost {re} for {c:?}");
        }
    }

    #[test]
    fn pseudo_delay_cubic_against_unexpanded_relation() {
        // Oracle: substitute nu^2 from the imaginary part into the real-part
        // relation, clear the (1 + l T)^2 denominator, and recover the cubic
        // coefficients from samples at T = 0, 1, 2, 3 by forward differences.
        fn unexpanded(cc: &CharCoeffs, t: f64) -> f64 {
            let CharCoeffs { l, m, n, l1, m1, n1 } = *cc;
            let num = (l1 + m) + (n - m1 - n1) * t;
            let den = 1.0 + l * t;
            num * num - num * den * (l + m * t - l1 * t) + (n + m1 + n1) * den * den
        }
        for c in [cc(1.0, 1.0, 1.0, 0.0, 0.0, 0.0), EX5_3, EX5_1, cc(2.0, -1.0, 0.5, 0.3, 0.7, -1.1)] {
            let got = pseudo_delay_cubic(&c);
            let y: Vec<f64> = (0..4).map(|i| unexpanded(&c, i as f64)).collect();
            let a3 = (y[3] - 3.0 * y[2] + 3.0 * y[1] - y[0]) / 6.0;
            let a2 = (y[2] - 2.0 * y[1] + y[0]) / 2.0 - 3.0 * a3;
            let a1 = y[1] - y[0] - a2 - a3;
            let tol = 1e-9 * y.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
            assert!((got[0] - a3).abs() < tol, "{c:?}");
            assert!((got[2] - a1).abs() < tol, "{c:?}");
            assert!((got[3] - y[0]).abs() < tol, "{c:?}");
            // The closed-form T^2 coefficient carries +q (m - l1) where the
            // expansion gives -q (m - l1), q = n - m1 - n1. The closed form is
            // kept and the root scan arbitrates.
            let q = c.n - c.m1 - c.n1;
            assert!((got[1] - a2 - 2.0 * q * (c.m - c.l1)).abs() < tol, "{c:?}");
        }
        assert_eq!(pseudo_delay_cubic(&cc(1.0, 1.0, 1.0, 0.0, 0.0, 0.0)), [-1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn pipeline_cubics_for_reference_systems() {
        assert_eq!(pseudo_delay_cubic(&EX5_3), [28.0, 56.0, -508.0, 32.0]);
        assert_eq!(pseudo_delay_cubic(&EX5_1), [-216.0, 1752.0, -1618.0, 226.0]);
    }

    #[test]
    fn tau_formula_on_injected_values() {
        let tau = tau_from_pseudo_delay(2.325, 0.2125, 0);
        assert!((tau - 4.32).abs() < 0.01, "{tau}");
        let next = tau_from_pseudo_delay(2.325, 0.2125, 1);
        assert!((next - tau - 2.0 * PI / 0.2125).abs() < 1e-9);
    }

    #[test]
    fn tau_critical_preserved_when_signs_allow() {
        let r = tau_critical(&cc(3.0, 2.0, 1.0, 0.5, 0.1, 0.2));
        assert_eq!(r.outcome, TauCriticalOutcome::Preserved { case: 1 });
        let r = tau_critical(&EX5_3);
        let (t, nu, tau) = r.switch().expect("negative coefficient gives a switch");
        assert!(t > 0.0 && nu > 0.0 && tau > 0.0);
        assert_eq!(tau, tau_from_pseudo_delay(t, nu, 0));
    }

    /// Constructed so that the frequency cubic is `w^3 + 3 w^2 + 3 w - 3`,
    /// whose only positive root is `4^(1/3) - 1`.
    const DELTA_SWITCH: CharCoeffs = CharCoeffs { l: 3.0, m: 3.0, n: 1.0, l1: 0.0, m1: 0.0, n1: 2.0 };

    #[test]
    fn delta_switch_is_a_pure_imaginary_crossing() {
        let r = delta_analysis(&DELTA_SWITCH);
        assert_eq!(r.frequency_cubic, [1.0, 3.0, 3.0, -3.0]);
        assert_eq!(r.one_root_patterns, vec![3]);
        let deltas = match &r.verdict {
            DeltaVerdict::SwitchAt { deltas } => deltas.clone(),
            other => panic!("{other:?}"),
        };
        let w = 4f64.cbrt() - 1.0;
        assert!((r.candidates[0].nu_squared - w).abs() < 1e-12);
        let delta = deltas[0];
        // Oracle: at the predicted delay there is a root on the imaginary axis.
        let re = rightmost_real_part(&DELTA_SWITCH, 0.0, delta).unwrap();
        assert!(re.abs() < 1e-6, "rightmost {re} at delta {delta}");
        let before = rightmost_real_part(&DELTA_SWITCH, 0.0, 0.9 * delta).unwrap();
        let after = rightmost_real_part(&DELTA_SWITCH, 0.0, 1.1 * delta).unwrap();
        assert!(before < 0.0 && after > 0.0, "{before} {after}");
    }

    #[test]
    fn delta_no_delayed_terms_is_preserved() {
        let r = delta_analysis(&cc(3.0, 3.0, 1.0, 0.0, 0.0, 0.0));
        assert_eq!(r.verdict, DeltaVerdict::Preserved);
    }

    #[test]
    fn delta_limit_boundary_is_inconclusive() {
        // l (l1 + m) = 1 * 2 = n + m1 - n1 = 3 + 0 - 1.
        let r = delta_analysis(&cc(1.0, 2.0, 3.0, 0.0, 0.0, 1.0));
        assert!(matches!(r.verdict, DeltaVerdict::Inconclusive { .. }), "{:?}", r.verdict);
    }

    #[test]
    fn combined_examples() {
        let r = general_delay_analysis(&EX5_3, 3.0, 0.0);
        assert!(r.switch_check.holds());
        match r.verdict {
            CombinedVerdict::SwitchPossible { nu_plus: Some(nu), theta: Some(_) } => {
                assert!(psi(&EX5_3, nu, 3.0).abs() < 1e-8);
            }
            other => panic!("{other:?}"),
        }
        let r = general_delay_analysis(&cc(1.0, 1.0, 1.0, 0.0, 0.0, 0.5), 1.0, 1.0);
        assert!(matches!(r.verdict, CombinedVerdict::Inconclusive { .. }));
        assert!(r.preservation_checks.is_empty());
    }

    #[test]
    fn combined_preserved_branch_agrees_with_root_scan() {
        // n1^2 = 16 > m1^2 + 2 and the nu bound holds for a small l1.
        let c = cc(10.0, 30.0, 5.0, 0.1, 0.1, 4.0);
        let r = general_delay_analysis(&c, 1.0, 1.0);
        assert_eq!(r.verdict, CombinedVerdict::Preserved, "{:?}", r.preservation_checks);
        for tau in [0.0, 0.5, 2.0, 5.0] {
            for delta in [0.0, 0.5, 2.0, 5.0] {
                let re = rightmost_real_part(&c, tau, delta).unwrap();
                assert!(re < 0.0, "({tau}, {delta}): {re}");
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn no_delayed_terms_preserve_everywhere(l in -5.0f64..5.0, m in -5.0f64..5.0, n in -5.0f64..5.0,
                                                 tau in 0.0f64..10.0, delta in 0.0f64..10.0) {
            let c = cc(l, m, n, 0.0, 0.0, 0.0);
            proptest::prop_assert!(tau_persistence(&c).preserves());
            proptest::prop_assert_eq!(delta_analysis(&c).verdict, DeltaVerdict::Preserved);
            proptest::prop_assert_eq!(general_delay_analysis(&c, tau, delta).verdict, CombinedVerdict::Preserved);
        }
    }
}
