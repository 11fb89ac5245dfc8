use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::CharCoeffs;

/// Rectangle of the complex plane searched for characteristic roots.
/// Only the upper half is needed: roots come in conjugate pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    /// Grid points per side.
    pub resolution: usize,
}

impl Default for ScanBox {
    fn default() -> Self {
        ScanBox { re_min: -20.0, re_max: 5.0, im_min: 0.0, im_max: 50.0, resolution: 200 }
    }
}

impl ScanBox {
    fn contains(&self, z: Complex64) -> bool {
        let slack = 1e-9;
        z.re >= self.re_min - slack && z.re <= self.re_max + slack && z.im >= self.im_min - slack && z.im <= self.im_max + slack
    }
}

/// Roots of `F` found in a box, sorted by descending real part. Only roots
/// with nonnegative imaginary part are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RootScan {
    pub tau: f64,
    pub delta: f64,
    pub bounds: ScanBox,
    pub roots: Vec<Complex64>,
    /// Set when nothing was found.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl RootScan {
    pub fn rightmost(&self) -> Option<Complex64> {
        self.roots.first().copied()
    }
}

const NEWTON_MAX_ITER: usize = 200;
const NEWTON_STEP_TOL: f64 = 1e-14;
const ACCEPT_RESIDUAL: f64 = 1e-9;
const DEDUP_DIST: f64 = 1e-8;

/// Evaluates `|F|` on the grid, starts complex Newton (analytic derivative)
/// from every local minimum of `|F|`, and keeps the converged points whose
/// residual is below `1e-9` relative to the size of the terms of `F`.
pub fn char_roots_scan(cc: &CharCoeffs, tau: f64, delta: f64, bounds: &ScanBox) -> RootScan {
    let n = bounds.resolution.max(2);
    let dr = (bounds.re_max - bounds.re_min) / (n - 1) as f64;
    let di = (bounds.im_max - bounds.im_min) / (n - 1) as f64;
    let point = |i: usize, j: usize| Complex64::new(bounds.re_min + i as f64 * dr, bounds.im_min + j as f64 * di);

    // Row-major magnitude grid, rows indexed by the imaginary coordinate.
    let mags: Vec<f64> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let z = point(k % n, k / n);
            let f = cc.eval(z, tau, delta).norm();
            if f.is_finite() { f } else { f64::INFINITY }
        })
        .collect();
    let at = |i: usize, j: usize| mags[j * n + i];

    let mut starts = Vec::new();
    for j in 0..n {
        for i in 0..n {
            let v = at(i, j);
            if !v.is_finite() {
                continue;
            }
            let mut is_min = true;
            'nb: for dj in -1i64..=1 {
                for dk in -1i64..=1 {
                    if dj == 0 && dk == 0 {
                        continue;
                    }
                    let (ii, jj) = (i as i64 + dk, j as i64 + dj);
                    if ii < 0 || jj < 0 || ii >= n as i64 || jj >= n as i64 {
                        continue;
                    }
                    if at(ii as usize, jj as usize) < v {
                        is_min = false;
                        break 'nb;
                    }
                }
            }
            if is_min {
                starts.push(point(i, j));
            }
        }
    }

    let mut roots: Vec<Complex64> = starts.par_iter().filter_map(|z0| newton(cc, tau, delta, *z0)).collect();
    roots.retain(|z| bounds.contains(*z));
    roots.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut unique: Vec<Complex64> = Vec::with_capacity(roots.len());
    for z in roots {
        if !unique.iter().any(|u| (*u - z).norm() <= DEDUP_DIST * 1f64.max(z.norm())) {
            unique.push(z);
        }
    }
    let diagnostic = unique.is_empty().then(|| {
        format!("no roots found on a {n}x{n} grid (spacing {dr:.3} x {di:.3}); refine the grid or enlarge the box")
    });
    RootScan { tau, delta, bounds: *bounds, roots: unique, diagnostic }
}

fn newton(cc: &CharCoeffs, tau: f64, delta: f64, z0: Complex64) -> Option<Complex64> {
    let mut z = z0;
    for _ in 0..NEWTON_MAX_ITER {
        let f = cc.eval(z, tau, delta);
        let df = cc.eval_deriv(z, tau, delta);
        if !(f.is_finite() && df.is_finite()) || df.norm() == 0.0 {
            break;
        }
        let step = f / df;
        z -= step;
        if !z.is_finite() {
            return None;
        }
        if step.norm() < NEWTON_STEP_TOL * 1f64.max(z.norm()) {
            break;
        }
    }
    if z.im < 0.0 {
        z = z.conj();
    }
    let residual = cc.eval(z, tau, delta).norm();
    let scale = 1f64.max(cc.term_scale(z, tau, delta));
    (residual < ACCEPT_RESIDUAL * scale).then_some(z)
}

/// Real part of the rightmost root in the default box, if any root is found.
pub fn rightmost_real_part(cc: &CharCoeffs, tau: f64, delta: f64) -> Option<f64> {
    char_roots_scan(cc, tau, delta, &ScanBox::default()).rightmost().map(|z| z.re)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cc(l: f64, m: f64, n: f64, l1: f64, m1: f64, n1: f64) -> CharCoeffs {
        CharCoeffs { l, m, n, l1, m1, n1 }
    }

    #[test]
    fn polynomial_roots_are_exact() {
        for (tau, delta) in [(0.0, 0.0), (1.0, 1.0), (5.0, 2.0)] {
            let scan = char_roots_scan(&cc(3.0, 2.0, 0.0, 0.0, 0.0, 0.0), tau, delta, &ScanBox::default());
            assert_eq!(scan.roots.len(), 3, "{:?}", scan.roots);
            for (z, want) in scan.roots.iter().zip([0.0, -1.0, -2.0]) {
                assert!((z.re - want).abs() < 1e-9 && z.im.abs() < 1e-9, "{z}");
            }
        }
    }

    #[test]
    fn zero_coefficients_collapse_to_one_root() {
        let scan = char_roots_scan(&cc(0.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1.0, 1.0, &ScanBox::default());
        assert_eq!(scan.roots.len(), 1);
        assert!(scan.roots[0].norm() < 1e-8);
    }

    #[test]
    fn complex_pair_is_reported_once() {
        // (lambda + 1)(lambda^2 + 2 lambda + 5): roots -1, -1 +- 2i.
        let scan = char_roots_scan(&cc(3.0, 7.0, 5.0, 0.0, 0.0, 0.0), 0.0, 0.0, &ScanBox::default());
        assert_eq!(scan.roots.len(), 2, "{:?}", scan.roots);
        assert!(scan.roots.iter().any(|z| (z - Complex64::new(-1.0, 2.0)).norm() < 1e-9));
        assert!(scan.roots.iter().any(|z| (z - Complex64::new(-1.0, 0.0)).norm() < 1e-9));
    }

    #[test]
    fn empty_box_gives_diagnostic() {
        let b = ScanBox { re_min: 1.0, re_max: 2.0, im_min: 10.0, im_max: 11.0, resolution: 20 };
        let scan = char_roots_scan(&cc(3.0, 2.0, 0.0, 0.0, 0.0, 0.0), 0.0, 0.0, &b);
        assert!(scan.roots.is_empty());
        assert!(scan.diagnostic.is_some());
    }

    #[test]
    fn reported_roots_satisfy_the_equation() {
        let c = cc(7.0, 6.0, 0.0, 4.0, 4.0, -2.0);
        let scan = char_roots_scan(&c, 6.0, 0.5, &ScanBox::default());
        assert!(!scan.roots.is_empty());
        for z in &scan.roots {
            let r = c.eval(*z, 6.0, 0.5).norm();
            assert!(r < 1e-9 * c.term_scale(*z, 6.0, 0.5).max(1.0), "{z}: {r}");
        }
        for w in scan.roots.windows(2) {
            assert!(w[0].re >= w[1].re);
        }
    }

    #[test]
    fn scan_is_deterministic() {
        let c = cc(9.0, 8.0, 0.0, 12.0, 12.0, -6.0);
        let a = char_roots_scan(&c, 1.0, 1.0, &ScanBox::default());
        let b = char_roots_scan(&c, 1.0, 1.0, &ScanBox::default());
        assert_eq!(a, b);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(12))]
        #[test]
        fn no_delayed_terms_make_roots_delay_invariant(l in 0.5f64..5.0, m in 0.5f64..5.0, n in 0.1f64..3.0,
                                                        tau in 0.0f64..10.0, delta in 0.0f64..10.0) {
            let c = cc(l, m, n, 0.0, 0.0, 0.0);
            let base = char_roots_scan(&c, 0.0, 0.0, &ScanBox::default());
            let moved = char_roots_scan(&c, tau, delta, &ScanBox::default());
            proptest::prop_assert_eq!(base.roots.len(), moved.roots.len());
            for (a, b) in base.roots.iter().zip(&moved.roots) {
                proptest::prop_assert!((a - b).norm() < 1e-8, "{} vs {}", a, b);
            }
        }
    }
}
