//! Small numerical utilities shared across modules: adaptive quadrature,
//! least-squares slopes, and a minimum enclosing circle.

/// Adaptive Simpson quadrature of `f` on `[a, b]` with absolute tolerance
/// `tol`. Returns the estimate together with a bound on the accumulated
/// panel error (which can exceed `tol` if `max_depth` is exhausted, e.g. on
/// jump discontinuities; the caller decides whether that matters).
pub fn adaptive_simpson<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    tol: f64,
    max_depth: u32,
) -> (f64, f64) {
    if a == b {
        return (0.0, 0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut err = 0.0;
    let value = simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth, &mut err);
    (value, err)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    err: &mut f64,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        *err += delta.abs() / 15.0;
        return left + right + delta / 15.0;
    }
    let half_tol = 0.5 * tol;
    simpson_rec(f, a, m, fa, flm, fm, left, half_tol, depth - 1, err)
        + simpson_rec(f, m, b, fm, frm, fb, right, half_tol, depth - 1, err)
}

/// Least-squares slope of y against x. Returns `None` with fewer than two
/// points or a degenerate abscissa.
pub fn ls_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

/// Log-log slope of y against x, skipping non-positive values.
pub fn log_log_slope(points: &[(f64, f64)]) -> Option<f64> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    ls_slope(&logs)
}

/// Minimum enclosing circle of a planar point set (Welzl's algorithm with a
/// deterministic seeded shuffle). Returns (center, radius).
pub fn min_enclosing_circle(points: &[(f64, f64)]) -> ((f64, f64), f64) {
    assert!(!points.is_empty(), "minimum enclosing circle of an empty set");
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let mut pts: Vec<(f64, f64)> = points.to_vec();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x5EED_C19C);
    pts.shuffle(&mut rng);

    let mut c = Circle { center: pts[0], r2: 0.0 };
    for i in 1..pts.len() {
        if c.contains(pts[i]) {
            continue;
        }
        c = Circle { center: pts[i], r2: 0.0 };
        for j in 0..i {
            if c.contains(pts[j]) {
                continue;
            }
            c = circle_two(pts[i], pts[j]);
            for k in 0..j {
                if !c.contains(pts[k]) {
                    c = circle_three(pts[i], pts[j], pts[k]);
                }
            }
        }
    }
    (c.center, c.r2.max(0.0).sqrt())
}

#[derive(Clone, Copy)]
struct Circle {
    center: (f64, f64),
    r2: f64,
}

impl Circle {
    fn contains(&self, p: (f64, f64)) -> bool {
        let dx = p.0 - self.center.0;
        let dy = p.1 - self.center.1;
        dx * dx + dy * dy <= self.r2 * (1.0 + 1e-12) + 1e-30
    }
}

fn circle_two(a: (f64, f64), b: (f64, f64)) -> Circle {
    let center = (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1));
    let dx = a.0 - center.0;
    let dy = a.1 - center.1;
    Circle { center, r2: dx * dx + dy * dy }
}

fn circle_three(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Circle {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    if d.abs() < 1e-30 {
        // Collinear: fall back to the widest two-point circle.
        let ab = circle_two(a, b);
        let ac = circle_two(a, c);
        let bc = circle_two(b, c);
        let mut best = ab;
        for cand in [ac, bc] {
            if cand.r2 > best.r2 {
                best = cand;
            }
        }
        return best;
    }
    let a2 = a.0 * a.0 + a.1 * a.1;
    let b2 = b.0 * b.0 + b.1 * b.1;
    let c2 = c.0 * c.0 + c.1 * c.1;
    let ux = (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d;
    let uy = (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d;
    let dx = a.0 - ux;
    let dy = a.1 - uy;
    Circle { center: (ux, uy), r2: dx * dx + dy * dy }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_integrates_polynomials_exactly() {
        let (v, _) = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12, 30);
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn simpson_handles_a_jump() {
        let f = |x: f64| if x < 1.0 { 0.0 } else { 1.0 };
        let (v, _) = adaptive_simpson(&f, 0.0, 2.0, 1e-9, 48);
        assert!((v - 1.0).abs() < 1e-6, "got {v}");
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 * i as f64 + 1.0)).collect();
        assert!((ls_slope(&pts).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn mec_of_a_square() {
        let pts = [(0.0, 0.0), (2.0, 0.0), (0.0, 2.0), (2.0, 2.0)];
        let ((cx, cy), r) = min_enclosing_circle(&pts);
        assert!((cx - 1.0).abs() < 1e-9 && (cy - 1.0).abs() < 1e-9);
        assert!((r - 2f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn mec_collinear() {
        let pts = [(0.0, 0.0), (1.0, 0.0), (4.0, 0.0)];
        let ((cx, _), r) = min_enclosing_circle(&pts);
        assert!((cx - 2.0).abs() < 1e-9);
        assert!((r - 2.0).abs() < 1e-9);
    }
}
