//! Numerical primitives: adaptive Simpson quadrature and bracketing bisection.

/// Absolute tolerance used by the distribution layer.
pub const QUAD_TOL: f64 = 1e-10;
/// Recursion cap for the adaptive scheme.
pub const QUAD_MAX_DEPTH: u32 = 40;

/// Adaptive Simpson integral of `f` over `[a, b]` with absolute tolerance `tol`.
///
/// Integrands in this crate are piecewise polynomials of degree at most three
/// once callers split at the kinks, so the first Richardson check usually
/// terminates immediately.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_depth: u32) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, max_depth)
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
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Integrates over `[a, b]` after splitting at every breakpoint strictly inside.
pub fn simpson_split<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    if !(b > a) {
        return 0.0;
    }
    let mut pts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b)
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut total = 0.0;
    let mut lo = a;
    let n = pts.len() + 1;
    for hi in pts.into_iter().chain(std::iter::once(b)) {
        total += simpson(&f, lo, hi, tol / n as f64, QUAD_MAX_DEPTH);
        lo = hi;
    }
    total
}

/// Finds the boundary of a monotone predicate on `[lo, hi]`.
///
/// Requires `pred(lo)` true and `pred(hi)` false; returns a point within `tol`
/// of `sup { x : pred(x) }`. The returned value is the last point where the
/// predicate held.
pub fn bisect_boundary<P: Fn(f64) -> bool>(pred: P, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    debug_assert!(lo <= hi);
    for _ in 0..400 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Root of an increasing function `g` on `[lo, hi]` with `g(lo) <= 0 <= g(hi)`.
pub fn bisect_root<G: Fn(f64) -> f64>(g: G, lo: f64, hi: f64, tol: f64) -> f64 {
    bisect_boundary(|x| g(x) <= 0.0, lo, hi, tol)
}
