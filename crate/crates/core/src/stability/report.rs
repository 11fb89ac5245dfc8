use std::fmt::{self, Write as _};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::criteria::{
    delay_free_stable, delta_analysis, general_delay_analysis, tau_critical, tau_persistence, CombinedResult,
    CombinedVerdict, DelayFreeResult, DelayFreeVerdict, DeltaResult, DeltaVerdict, TauCritical, TauCriticalOutcome,
    TauPersistence,
};
use super::global::{global_verdict, GlobalResult};
use super::roots::{char_roots_scan, RootScan, ScanBox};
use super::{char_coeffs, CharCoeffs, Inequality};
use crate::config::{ReferenceValues, ScenarioConfig};
use crate::error::AnalysisError;
use crate::model::{find_disease_free, find_endemic, jacobian_coeffs, Equilibrium, EquilibriumKind, JacCoeffs, ModelSpec};

/// Settings for the numerical cross-checks in a report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub scan: ScanBox,
    /// Upper end of the delay range searched for the first crossing.
    pub crossing_search_max: f64,
    /// Coarse grid spacing of that search.
    pub crossing_search_step: f64,
    /// Relative offset used to confirm a predicted switch on both sides.
    pub switch_probe: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        ReportOptions { scan: ScanBox::default(), crossing_search_max: 20.0, crossing_search_step: 0.5, switch_probe: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum TauOnlyVerdict {
    PreservedStable,
    PreservedUnstable,
    SwitchAt { tau_plus: f64, nu_plus: f64, t_plus: f64 },
    Inconclusive { diagnostic: String },
}

/// Root-scan probe either side of a predicted switch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleSwitchCheck {
    pub delay_below: f64,
    pub rightmost_below: Option<f64>,
    pub delay_above: f64,
    pub rightmost_above: Option<f64>,
    /// Stable below and unstable above.
    pub confirmed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauOnlyResult {
    pub verdict: TauOnlyVerdict,
    pub persistence: TauPersistence,
    pub critical: TauCritical,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_check: Option<OracleSwitchCheck>,
    /// First incubation delay (recovery delay zero) where the rightmost root
    /// reaches the imaginary axis, by root scan; absent when none is found in
    /// the search range or the delay-free system is not stable.
    pub oracle_crossing: Option<f64>,
}

/// A computed value that does not match a documented reference value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub quantity: String,
    pub computed: Vec<f64>,
    pub reference: Vec<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    /// Every equilibrium found for the model.
    pub equilibria: Vec<Equilibrium>,
    /// The equilibrium analyzed.
    pub equilibrium: Equilibrium,
    pub tau: f64,
    pub delta: f64,
    pub jacobian: JacCoeffs,
    pub coefficients: CharCoeffs,
    /// `F` with both delays zero, highest degree first.
    pub delay_free_polynomial: [f64; 4],
    pub delay_free: DelayFreeResult,
    pub tau_only: TauOnlyResult,
    pub delta_only: DeltaResult,
    /// First recovery delay (incubation delay zero) where the rightmost root
    /// reaches the imaginary axis, by root scan.
    pub delta_oracle_crossing: Option<f64>,
    pub combined: CombinedResult,
    pub global: GlobalResult,
    /// Roots at the model's own delays.
    pub oracle: RootScan,
    /// Rightmost nonzero root with both delays zero.
    pub delay_free_rightmost: Option<Complex64>,
    /// The delay-free verdict and the root scan agree.
    pub oracle_agrees_delay_free: bool,
    pub discrepancies: Vec<Discrepancy>,
}

/// Equilibrium a scenario is analyzed at: its stated target when present,
/// otherwise the first endemic point, otherwise the disease-free point.
pub fn select_target(
    target: Option<EquilibriumKind>,
    disease_free: Option<&Equilibrium>,
    endemic: &[Equilibrium],
) -> Option<Equilibrium> {
    match target {
        Some(EquilibriumKind::DiseaseFree) => disease_free.copied(),
        Some(EquilibriumKind::Endemic) => endemic.first().copied(),
        None => endemic.first().or(disease_free).copied(),
    }
}

/// Full report for a scenario at its model's delays.
pub fn analyze(cfg: &ScenarioConfig, opts: &ReportOptions) -> Result<StabilityReport, AnalysisError> {
    let model = &cfg.model;
    let dfe = find_disease_free(model).equilibrium();
    let endemic = find_endemic(model);
    let eq = select_target(cfg.target, dfe.as_ref(), &endemic).ok_or_else(|| {
        AnalysisError::Precondition(format!("no {:?} equilibrium found", cfg.target.unwrap_or(EquilibriumKind::Endemic)))
    })?;
    StabilityReport::build(model, &eq, dfe.as_ref(), &endemic, cfg.reference.as_ref(), opts)
}

fn rightmost(cc: &CharCoeffs, tau: f64, delta: f64, scan: &ScanBox) -> Option<f64> {
    char_roots_scan(cc, tau, delta, scan).rightmost().map(|z| z.re)
}

/// First delay along `path(s) = (tau, delta)` for `s` in `[0, max]` at which
/// the rightmost root moves from the left half plane onto or past the
/// imaginary axis. Coarse grid, then bisection to `1e-4`.
fn first_crossing(cc: &CharCoeffs, path: impl Fn(f64) -> (f64, f64), opts: &ReportOptions) -> Option<f64> {
    let re_at = |s: f64| {
        let (t, d) = path(s);
        rightmost(cc, t, d, &opts.scan)
    };
    let steps = (opts.crossing_search_max / opts.crossing_search_step).ceil() as usize;
    let mut prev = (0.0, re_at(0.0)?);
    if prev.1 >= 0.0 {
        return None;
    }
    for i in 1..=steps {
        let s = (i as f64 * opts.crossing_search_step).min(opts.crossing_search_max);
        let re = re_at(s)?;
        if re >= 0.0 {
            let (mut lo, mut hi) = (prev.0, s);
            while hi - lo > 1e-4 {
                let mid = 0.5 * (lo + hi);
                match re_at(mid) {
                    Some(r) if r < 0.0 => lo = mid,
                    _ => hi = mid,
                }
            }
            return Some(0.5 * (lo + hi));
        }
        prev = (s, re);
    }
    None
}

/// First incubation delay, at a fixed recovery delay, where the rightmost
/// characteristic root crosses into the closed right half plane.
pub fn tau_crossing(cc: &CharCoeffs, delta: f64, opts: &ReportOptions) -> Option<f64> {
    first_crossing(cc, |s| (s, delta), opts)
}

fn tau_only(cc: &CharCoeffs, delay_free: &DelayFreeResult, opts: &ReportOptions) -> TauOnlyResult {
    let persistence = tau_persistence(cc);
    let critical = tau_critical(cc);
    let stable = delay_free.verdict == DelayFreeVerdict::Stable;
    let verdict = if persistence.preserves() {
        if stable {
            TauOnlyVerdict::PreservedStable
        } else {
            TauOnlyVerdict::PreservedUnstable
        }
    } else if stable {
        match &critical.outcome {
            TauCriticalOutcome::Preserved { .. } => TauOnlyVerdict::PreservedStable,
            TauCriticalOutcome::Switch { t_plus, nu_plus, tau_plus, .. } => {
                TauOnlyVerdict::SwitchAt { tau_plus: *tau_plus, nu_plus: *nu_plus, t_plus: *t_plus }
            }
            TauCriticalOutcome::Inconclusive { diagnostic } => {
                TauOnlyVerdict::Inconclusive { diagnostic: diagnostic.clone() }
            }
        }
    } else if persistence.a0 <= 0.0 {
        TauOnlyVerdict::PreservedUnstable
    } else {
        TauOnlyVerdict::Inconclusive { diagnostic: "delay-free stability not established".into() }
    };

    let oracle_check = match verdict {
        TauOnlyVerdict::SwitchAt { tau_plus, .. } => {
            let below = tau_plus * (1.0 - opts.switch_probe);
            let above = tau_plus * (1.0 + opts.switch_probe);
            let rb = rightmost(cc, below, 0.0, &opts.scan);
            let ra = rightmost(cc, above, 0.0, &opts.scan);
            let confirmed = matches!((rb, ra), (Some(b), Some(a)) if b < 0.0 && a > 0.0);
            Some(OracleSwitchCheck {
                delay_below: below,
                rightmost_below: rb,
                delay_above: above,
                rightmost_above: ra,
                confirmed,
            })
        }
        _ => None,
    };
    let oracle_crossing =
        if stable && !cc.has_no_delayed_terms() { tau_crossing(cc, 0.0, opts) } else { None };
    TauOnlyResult { verdict, persistence, critical, oracle_check, oracle_crossing }
}

const REFERENCE_TOL: f64 = 1e-9;

fn close(a: &[f64], b: &[f64], rel: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= rel * 1f64.max(x.abs()).max(y.abs()))
}

impl StabilityReport {
    pub fn build(
        model: &ModelSpec,
        eq: &Equilibrium,
        disease_free: Option<&Equilibrium>,
        endemic: &[Equilibrium],
        reference: Option<&ReferenceValues>,
        opts: &ReportOptions,
    ) -> Result<Self, AnalysisError> {
        let p = model.params();
        let jacobian = jacobian_coeffs(model, eq)?;
        let cc = char_coeffs(&jacobian);
        if !cc.is_finite() {
            return Err(AnalysisError::Precondition("characteristic coefficients are not finite".into()));
        }
        let delay_free = delay_free_stable(&cc, Some(&jacobian));
        let tau_only = tau_only(&cc, &delay_free, opts);
        let delta_only = delta_analysis(&cc);
        let delta_oracle_crossing = if delay_free.verdict == DelayFreeVerdict::Stable && !cc.has_no_delayed_terms() {
            first_crossing(&cc, |s| (0.0, s), opts)
        } else {
            None
        };
        let combined = general_delay_analysis(&cc, p.tau, p.delta);
        let global = global_verdict(model, disease_free, endemic);
        let oracle = char_roots_scan(&cc, p.tau, p.delta, &opts.scan);

        let base = char_roots_scan(&cc, 0.0, 0.0, &opts.scan);
        let delay_free_rightmost = base.roots.iter().copied().find(|z| z.norm() > 1e-9);
        let oracle_agrees_delay_free = match delay_free.verdict {
            DelayFreeVerdict::Stable => delay_free_rightmost.is_none_or(|z| z.re < 0.0),
            DelayFreeVerdict::NotEstablished => base.rightmost().is_some_and(|z| z.re >= -1e-9),
        };

        let mut equilibria: Vec<Equilibrium> = disease_free.into_iter().copied().chain(endemic.iter().copied()).collect();
        equilibria.sort_by(|a, b| a.state.x.total_cmp(&b.state.x));

        let mut report = StabilityReport {
            equilibria,
            equilibrium: *eq,
            tau: p.tau,
            delta: p.delta,
            jacobian,
            coefficients: cc,
            delay_free_polynomial: cc.delay_free_poly(),
            delay_free,
            tau_only,
            delta_only,
            delta_oracle_crossing,
            combined,
            global,
            oracle,
            delay_free_rightmost,
            oracle_agrees_delay_free,
            discrepancies: Vec::new(),
        };
        report.annotate(reference);
        Ok(report)
    }

    fn annotate(&mut self, reference: Option<&ReferenceValues>) {
        let mut out = Vec::new();
        if let Some(r) = reference {
            for want in &r.equilibria {
                let nearest = self.equilibria.iter().min_by(|a, b| a.state.dist(want).total_cmp(&b.state.dist(want)));
                let ok = nearest.is_some_and(|e| e.state.dist(want) <= REFERENCE_TOL * 1f64.max(want.norm_inf()));
                if !ok {
                    out.push(Discrepancy {
                        quantity: "equilibrium".into(),
                        computed: nearest.map(|e| e.state.to_array().to_vec()).unwrap_or_default(),
                        reference: want.to_array().to_vec(),
                        note: "documented equilibrium is not a computed equilibrium; the computed one satisfies the steady-state equations".into(),
                    });
                }
            }
            if let Some(want) = r.char_poly {
                if !close(&self.delay_free_polynomial, &want, REFERENCE_TOL) {
                    out.push(Discrepancy {
                        quantity: "delay-free characteristic polynomial".into(),
                        computed: self.delay_free_polynomial.to_vec(),
                        reference: want.to_vec(),
                        note: "computed from the linearization at the stated parameters".into(),
                    });
                }
            }
            if let Some(want) = r.pseudo_delay_cubic {
                if !close(&self.tau_only.critical.cubic, &want, REFERENCE_TOL) {
                    out.push(Discrepancy {
                        quantity: "pseudo-delay cubic".into(),
                        computed: self.tau_only.critical.cubic.to_vec(),
                        reference: want.to_vec(),
                        note: "computed from the characteristic coefficients; the root scan decides the verdict".into(),
                    });
                }
            }
            let switch = self.tau_only.critical.switch();
            for (name, want, got) in [
                ("T+", r.t_plus, switch.map(|s| s.0)),
                ("nu+", r.nu_plus, switch.map(|s| s.1)),
                ("tau+", r.tau_plus, switch.map(|s| s.2)),
            ] {
                if let Some(want) = want {
                    if !got.is_some_and(|g| close(&[g], &[want], 1e-3)) {
                        out.push(Discrepancy {
                            quantity: name.into(),
                            computed: got.into_iter().collect(),
                            reference: vec![want],
                            note: match self.tau_only.oracle_crossing {
                                Some(t) => format!("root scan places the first crossing at tau = {t:.4}"),
                                None => "root scan finds no crossing in the search range".into(),
                            },
                        });
                    }
                }
            }
        }
        if let Some(check) = &self.tau_only.oracle_check {
            if !check.confirmed {
                let tau_plus = 0.5 * (check.delay_below + check.delay_above);
                out.push(Discrepancy {
                    quantity: "tau+ against root scan".into(),
                    computed: [check.rightmost_below, check.rightmost_above].into_iter().flatten().collect(),
                    reference: vec![tau_plus],
                    note: format!(
                        "predicted switch at tau = {tau_plus:.4} not confirmed: rightmost real parts {:?} / {:?} at {:.4} / {:.4}; first crossing by scan: {}",
                        check.rightmost_below,
                        check.rightmost_above,
                        check.delay_below,
                        check.delay_above,
                        self.tau_only.oracle_crossing.map_or("none".to_string(), |t| format!("{t:.4}")),
                    ),
                });
            }
        }
        let delta_claims_preserved = self.delta_only.verdict == DeltaVerdict::Preserved;
        let stable = self.delay_free.verdict == DelayFreeVerdict::Stable;
        if stable && delta_claims_preserved {
            if let Some(d) = self.delta_oracle_crossing {
                out.push(Discrepancy {
                    quantity: "recovery-delay verdict against root scan".into(),
                    computed: vec![d],
                    reference: Vec::new(),
                    note: format!("criterion reports preservation but the root scan finds a crossing at delta = {d:.4}"),
                });
            }
        }
        if stable && self.tau_only.verdict == TauOnlyVerdict::PreservedStable {
            if let Some(t) = self.tau_only.oracle_crossing {
                out.push(Discrepancy {
                    quantity: "incubation-delay verdict against root scan".into(),
                    computed: vec![t],
                    reference: Vec::new(),
                    note: format!("criterion reports preservation but the root scan finds a crossing at tau = {t:.4}"),
                });
            }
        }
        if !self.oracle_agrees_delay_free {
            out.push(Discrepancy {
                quantity: "delay-free verdict against root scan".into(),
                computed: self.delay_free_rightmost.map(|z| vec![z.re, z.im]).unwrap_or_default(),
                reference: Vec::new(),
                note: "sign of the rightmost nonzero root disagrees with the delay-free verdict".into(),
            });
        }
        self.discrepancies = out;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn poly_string(c: &[f64; 4]) -> String {
    let mut s = String::from("lambda^3");
    for (coef, pow) in c[1..].iter().zip(["lambda^2", "lambda", ""]) {
        if *coef == 0.0 {
            continue;
        }
        let sign = if *coef < 0.0 { "-" } else { "+" };
        let mag = coef.abs();
        let mag = if mag == 1.0 && !pow.is_empty() { String::new() } else { fmt_num(mag).to_string() };
        let _ = write!(s, " {sign} {mag}{pow}");
    }
    s
}

fn fmt_num(v: f64) -> String {
    if v == v.round() && v.abs() < 1e12 {
        format!("{}", v as i64)
    } else {
        format!("{v:.6}")
    }
}

fn checks_lines(f: &mut fmt::Formatter<'_>, checks: &[Inequality]) -> fmt::Result {
    for c in checks {
        writeln!(f, "    {c}")?;
    }
    Ok(())
}

impl fmt::Display for StabilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.equilibrium.state;
        writeln!(f, "equilibrium ({:?}): ({:.9}, {:.9}, {:.9})", self.equilibrium.kind, s.x, s.y, s.z)?;
        writeln!(f, "delays: tau = {}, delta = {}", self.tau, self.delta)?;
        let j = &self.jacobian;
        writeln!(f, "linearization: A = {:.6}, B = {:.6}, C = {:.6}, D = {:.6}, E = {:.6}, alpha = {:.6}", j.A, j.B, j.C, j.D, j.E, j.alpha)?;
        let c = &self.coefficients;
        writeln!(f, "coefficients: l = {:.6}, m = {:.6}, n = {:.6}, l1 = {:.6}, m1 = {:.6}, n1 = {:.6}", c.l, c.m, c.n, c.l1, c.m1, c.n1)?;
        writeln!(f, "delay-free polynomial: {}", poly_string(&self.delay_free_polynomial))?;
        writeln!(f)?;
        writeln!(f, "{:<22} verdict", "criterion")?;
        writeln!(f, "{:-<22} {:-<50}", "", "")?;

        let df = &self.delay_free;
        let extra = if df.delay_free_equivalent { " (behaves as delay-free: D = 0, C <= 0, A <= 0)" } else { "" };
        writeln!(f, "{:<22} {:?}{extra}", "delay-free", df.verdict)?;
        checks_lines(f, &df.checks)?;
        checks_lines(f, &df.equivalence_checks)?;

        let t = &self.tau_only;
        let v = match &t.verdict {
            TauOnlyVerdict::PreservedStable => "preserved (stable)".to_string(),
            TauOnlyVerdict::PreservedUnstable => "preserved (unstable)".to_string(),
            TauOnlyVerdict::SwitchAt { tau_plus, nu_plus, t_plus } => {
                format!("switch at tau+ = {tau_plus:.4} (nu+ = {nu_plus:.4}, T+ = {t_plus:.4})")
            }
            TauOnlyVerdict::Inconclusive { diagnostic } => format!("inconclusive: {diagnostic}"),
        };
        writeln!(f, "{:<22} {v}", "incubation delay")?;
        writeln!(f, "    a0 = {:.6}, a1 = {:.6}, a2 = {:.6} -> {:?}", t.persistence.a0, t.persistence.a1, t.persistence.a2, t.persistence.branch)?;
        let cu = &t.critical.cubic;
        writeln!(f, "    pseudo-delay cubic: {} T^3 + {} T^2 + {} T + {}", fmt_num(cu[0]), fmt_num(cu[1]), fmt_num(cu[2]), fmt_num(cu[3]))?;
        if let Some(x) = t.oracle_crossing {
            writeln!(f, "    root scan: first crossing at tau = {x:.4} (delta = 0)")?;
        }

        let d = &self.delta_only;
        let v = match &d.verdict {
            DeltaVerdict::Preserved => "preserved".to_string(),
            DeltaVerdict::SwitchAt { deltas } => format!("switch at delta = {deltas:.4?}"),
            DeltaVerdict::SecondBifurcationPossible { deltas } => format!("second bifurcation possible, delta = {deltas:.4?}"),
            DeltaVerdict::Inconclusive { diagnostic } => format!("inconclusive: {diagnostic}"),
        };
        writeln!(f, "{:<22} {v}", "recovery delay")?;
        writeln!(f, "    {}", d.limit_check)?;
        checks_lines(f, &d.preservation_checks)?;
        if !d.one_root_patterns.is_empty() || d.two_root_pattern {
            writeln!(f, "    sign patterns: one-root {:?}, two-root {}", d.one_root_patterns, d.two_root_pattern)?;
        }
        if let Some(x) = self.delta_oracle_crossing {
            writeln!(f, "    root scan: first crossing at delta = {x:.4} (tau = 0)")?;
        }

        let c = &self.combined;
        let v = match &c.verdict {
            CombinedVerdict::Preserved => "preserved".to_string(),
            CombinedVerdict::SwitchPossible { nu_plus, theta } => {
                format!("switch possible (nu+ = {nu_plus:.4?}, tau + delta = {theta:.4?})")
            }
            CombinedVerdict::Inconclusive { diagnostic } => format!("inconclusive: {diagnostic}"),
        };
        writeln!(f, "{:<22} {v}", "both delays")?;
        checks_lines(f, &c.preservation_checks)?;
        writeln!(f, "    {}", c.switch_check)?;

        let g = &self.global;
        let boundary = if g.boundary { " (boundary case)" } else { "" };
        writeln!(f, "{:<22} {:?}{boundary}", "global", g.verdict)?;
        checks_lines(f, &g.checks)?;

        writeln!(f)?;
        writeln!(f, "root scan at (tau, delta) = ({}, {}):", self.tau, self.delta)?;
        for z in self.oracle.roots.iter().take(6) {
            writeln!(f, "    {:+.9} {:+.9}i", z.re, z.im)?;
        }
        if let Some(diag) = &self.oracle.diagnostic {
            writeln!(f, "    {diag}")?;
        }
        if !self.discrepancies.is_empty() {
            writeln!(f)?;
            writeln!(f, "discrepancies with documented values:")?;
            for d in &self.discrepancies {
                writeln!(f, "    {}: computed {:?}, documented {:?}; {}", d.quantity, d.computed, d.reference, d.note)?;
            }
        }
        Ok(())
    }
}
