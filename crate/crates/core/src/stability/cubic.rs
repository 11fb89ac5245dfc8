use std::f64::consts::PI;

use crate::error::AnalysisError;

/// All real roots of `c3 t^3 + c2 t^2 + c1 t + c0`, ascending, by the
/// trigonometric / Cardano closed form. Lower-degree inputs (`c3 = 0`, ...)
/// fall back to the quadratic or linear formula. Each root gets two Newton
/// polishing steps against the original coefficients.
pub fn solve_cubic_real(c3: f64, c2: f64, c1: f64, c0: f64) -> Result<Vec<f64>, AnalysisError> {
    let coeffs = [c3, c2, c1, c0];
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(AnalysisError::Precondition("non-finite cubic coefficient".into()));
    }
    let scale = coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    if scale == 0.0 {
        return Err(AnalysisError::ZeroPolynomial);
    }
    let negligible = |c: f64| c.abs() <= 1e-14 * scale;

    let mut roots = if !negligible(c3) {
        cubic_roots(c2 / c3, c1 / c3, c0 / c3)
    } else if !negligible(c2) {
        quadratic_roots(c2, c1, c0)
    } else if !negligible(c1) {
        vec![-c0 / c1]
    } else {
        Vec::new()
    };

    let p = |t: f64| ((c3 * t + c2) * t + c1) * t + c0;
    let dp = |t: f64| (3.0 * c3 * t + 2.0 * c2) * t + c1;
    for r in roots.iter_mut() {
        for _ in 0..2 {
            let d = dp(*r);
            if d != 0.0 {
                let next = *r - p(*r) / d;
                if next.is_finite() && p(next).abs() <= p(*r).abs() {
                    *r = next;
                }
            }
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1.0));
    Ok(roots)
}

/// Roots of the monic cubic `t^3 + a t^2 + b t + c`.
fn cubic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    // Depressed cubic s^3 + p s + q with t = s - a/3.
    let shift = a / 3.0;
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    let tiny = 1e-14 * (1.0 + (q / 2.0).powi(2) + (p / 3.0).abs().powi(3));
    if p.abs() < 1e-300 && q.abs() < 1e-300 {
        return vec![-shift];
    }
    if disc.abs() <= tiny {
        // Repeated root.
        let u = (-q / 2.0).cbrt();
        return vec![2.0 * u - shift, -u - shift];
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        return vec![u + v - shift];
    }
    // Three distinct real roots: trigonometric form (p < 0 here).
    let m = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
    let theta = arg.acos() / 3.0;
    (0..3).map(|k| m * (theta - 2.0 * PI * k as f64 / 3.0).cos() - shift).collect()
}

fn quadratic_roots(a: f64, b: f64, c: f64) -> Vec<f64> {
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Vec::new();
    }
    if disc == 0.0 {
        return vec![-b / (2.0 * a)];
    }
    // Numerically stable pairing.
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    if q == 0.0 {
        return vec![0.0];
    }
    vec![q / a, c / q]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual_ok(c: [f64; 4], roots: &[f64]) {
        let scale = c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for &t in roots {
            let r = ((c[0] * t + c[1]) * t + c[2]) * t + c[3];
            assert!(r.abs() < 1e-9 * scale, "residual {r} at {t} for {c:?}");
        }
    }

    #[test]
    fn factored_cubic() {
        let r = solve_cubic_real(1.0, -6.0, 11.0, -6.0).unwrap();
        assert_eq!(r.len(), 3);
        for (a, b) in r.iter().zip([1.0, 2.0, 3.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn reference_cubics() {
        let r = solve_cubic_real(42.0, -46.0, -117.0, -8.0).unwrap();
        let pos: Vec<f64> = r.iter().copied().filter(|t| *t > 0.0).collect();
        assert_eq!(pos.len(), 1);
        assert!((pos[0] - 2.325).abs() < 0.005, "{pos:?}");
        let r = solve_cubic_real(756.0, 1488.0, 500.0, 84.0).unwrap();
        assert!(r.iter().all(|t| *t <= 0.0), "{r:?}");
        residual_ok([756.0, 1488.0, 500.0, 84.0], &r);
    }

    #[test]
    fn degenerate_degrees() {
        assert_eq!(solve_cubic_real(0.0, 1.0, -3.0, 2.0).unwrap(), vec![1.0, 2.0]);
        assert_eq!(solve_cubic_real(0.0, 0.0, 2.0, -1.0).unwrap(), vec![0.5]);
        assert!(solve_cubic_real(0.0, 0.0, 0.0, 3.0).unwrap().is_empty());
        assert!(solve_cubic_real(0.0, 1.0, 0.0, 1.0).unwrap().is_empty());
        assert!(matches!(solve_cubic_real(0.0, 0.0, 0.0, 0.0), Err(AnalysisError::ZeroPolynomial)));
    }

    #[test]
    fn repeated_roots() {
        // (t - 1)^2 (t + 2)
        let r = solve_cubic_real(1.0, 0.0, -3.0, 2.0).unwrap();
        assert!(r.iter().any(|t| (t - 1.0).abs() < 1e-6) && r.iter().any(|t| (t + 2.0).abs() < 1e-9), "{r:?}");
        // t^3
        assert_eq!(solve_cubic_real(1.0, 0.0, 0.0, 0.0).unwrap(), vec![0.0]);
    }

    proptest::proptest! {
        #[test]
        fn roots_from_factors_are_recovered(a in -50.0f64..50.0, b in -50.0f64..50.0, c in -50.0f64..50.0, lead in 0.1f64..10.0) {
            let c3 = lead;
            let c2 = -lead * (a + b + c);
            let c1 = lead * (a * b + b * c + a * c);
            let c0 = -lead * a * b * c;
            let roots = solve_cubic_real(c3, c2, c1, c0).unwrap();
            residual_ok([c3, c2, c1, c0], &roots);
            for want in [a, b, c] {
                let near = roots.iter().map(|r| (r - want).abs()).fold(f64::INFINITY, f64::min);
                // Clustered roots are ill-conditioned; tolerance scales with the gap to the others.
                let gap = [a, b, c].iter().map(|o| (o - want).abs()).filter(|g| *g > 0.0).fold(f64::INFINITY, f64::min);
                if gap > 1e-2 {
                    proptest::prop_assert!(near < 1e-6 * (1.0 + want.abs()) / gap.min(1.0), "missing {} in {:?}", want, roots);
                }
            }
        }

        #[test]
        fn every_returned_root_has_small_residual(c3 in -100.0f64..100.0, c2 in -100.0f64..100.0, c1 in -100.0f64..100.0, c0 in -100.0f64..100.0) {
            proptest::prop_assume!(c3.abs() > 1e-3);
            let roots = solve_cubic_real(c3, c2, c1, c0).unwrap();
            proptest::prop_assert!(!roots.is_empty());
            residual_ok([c3, c2, c1, c0], &roots);
        }
    }
}
