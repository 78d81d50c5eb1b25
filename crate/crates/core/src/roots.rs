//! Bracketed scalar root finding: bisection to a narrow bracket, then
//! safeguarded secant steps.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    pub iterations: usize,
}

/// Root of `f` on [a, b] given f(a)·f(b) ≤ 0. Stops when |f| < `f_tol` or the
/// bracket collapses to a few ulps; returns the best point seen.
pub fn bisect_secant(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, f_tol: f64) -> Option<Root> {
    let mut fa = f(a);
    let mut fb = f(b);
    if !(fa.is_finite() && fb.is_finite()) || fa * fb > 0.0 {
        return None;
    }
    let mut best = if fa.abs() < fb.abs() { (a, fa) } else { (b, fb) };
    if best.1.abs() < f_tol {
        return Some(Root { x: best.0, fx: best.1, iterations: 0 });
    }
    for it in 1..=300 {
        let width = (b - a).abs();
        let narrow = width < 1e-6 * (a.abs() + b.abs()).max(1e-300);
        let mut x = 0.5 * (a + b);
        if narrow && fb != fa {
            let s = b - fb * (b - a) / (fb - fa);
            let lo = a.min(b);
            let hi = a.max(b);
            if s > lo && s < hi {
                x = s;
            }
        }
        let fx = f(x);
        if fx.abs() < best.1.abs() {
            best = (x, fx);
        }
        if fx.abs() < f_tol || width <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            return Some(Root { x: best.0, fx: best.1, iterations: it });
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
        } else {
            b = x;
            fb = fx;
        }
    }
    Some(Root { x: best.0, fx: best.1, iterations: 300 })
}

/// Indices i such that values i and i+1 bracket a root (sign change or exact zero).
pub fn sign_changes(values: &[f64]) -> Vec<usize> {
    values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].is_finite() && w[1].is_finite() && (w[0] == 0.0 || (w[0] < 0.0) != (w[1] < 0.0)))
        .map(|(i, _)| i)
        .collect()
}
