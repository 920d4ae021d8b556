//! One-dimensional minimization: uniform grid scan plus golden-section refinement.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Result of a bracketed scalar minimization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum {
    pub x: f64,
    pub value: f64,
    /// The objective was flat to within the degeneracy tolerance on the grid.
    pub degenerate: bool,
}

/// Golden-section search for a minimum of `f` on `[a, b]`, stopping once the
/// bracket is narrower than `tol`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while (b - a) > tol {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

/// Bisection for a sign change of `g` on `[a, b]`. Returns `None` unless
/// `g(a)` and `g(b)` have opposite signs.
pub fn bisect_root(g: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> Option<f64> {
    let mut ga = g(a);
    let gb = g(b);
    if !(ga.is_finite() && gb.is_finite()) || ga * gb > 0.0 {
        return None;
    }
    if ga == 0.0 {
        return Some(a);
    }
    if gb == 0.0 {
        return Some(b);
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let gm = g(m);
        if gm == 0.0 {
            return Some(m);
        }
        if (gm < 0.0) == (ga < 0.0) {
            a = m;
            ga = gm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

/// Scans `points` evenly spaced samples over `[lo, hi]`, then refines the best
/// grid cell with golden-section search to `tol`.
///
/// When the sampled values span less than `flat_tol * (1 + |min|)` the
/// objective is treated as constant: the interval midpoint is returned with
/// `degenerate` set.
pub fn grid_then_golden(
    f: impl Fn(f64) -> f64,
    lo: f64,
    hi: f64,
    points: usize,
    tol: f64,
    flat_tol: f64,
) -> Minimum {
    assert!(points >= 3, "grid needs at least three points");
    let step = (hi - lo) / (points - 1) as f64;
    let node = |i: usize| if i == points - 1 { hi } else { lo + step * i as f64 };

    let mut best = (0, f64::INFINITY);
    let mut max = f64::NEG_INFINITY;
    for i in 0..points {
        let v = f(node(i));
        if v < best.1 {
            best = (i, v);
        }
        max = max.max(v);
    }
    let (i_min, v_min) = best;

    if max - v_min < flat_tol * (1.0 + v_min.abs()) {
        let mid = 0.5 * (lo + hi);
        return Minimum { x: mid, value: f(mid), degenerate: true };
    }

    let a = node(i_min.saturating_sub(1));
    let b = node((i_min + 1).min(points - 1));
    let (x, value) = golden_section(&f, a, b, tol);
    if value <= v_min {
        Minimum { x, value, degenerate: false }
    } else {
        Minimum { x: node(i_min), value: v_min, degenerate: false }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_vertex() {
        let (x, v) = golden_section(|x| (x - 0.3).powi(2) + 1.0, -2.0, 2.0, 1e-10);
        // value-based search resolves the vertex only to about sqrt(eps)
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn bisection_to_machine_precision() {
        let r = bisect_root(|x| x * x - 2.0, 0.0, 2.0).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 4e-16);
        assert_eq!(bisect_root(|x| x * x + 1.0, -1.0, 1.0), None);
        assert_eq!(bisect_root(|x| x - 1.0, 1.0, 3.0), Some(1.0));
    }

    #[test]
    fn grid_escapes_local_minimum() {
        // local minimum near x = -1, global near x = 2
        let f = |x: f64| (x + 1.0).powi(2) * (x - 2.0).powi(2) - 0.5 * x;
        let m = grid_then_golden(f, -3.0, 4.0, 257, 1e-10, 1e-10);
        assert!(!m.degenerate);
        assert!(m.x > 1.5, "got {}", m.x);
    }

    #[test]
    fn flat_objective_returns_midpoint() {
        let m = grid_then_golden(|_| 0.5, 1.0, 3.0, 257, 1e-8, 1e-10);
        assert!(m.degenerate);
        assert_eq!(m.x, 2.0);
    }

    #[test]
    fn boundary_minimum() {
        let m = grid_then_golden(|x| x, 0.0, 1.0, 257, 1e-10, 1e-10);
        assert!(m.x < 1e-9);
    }
}
