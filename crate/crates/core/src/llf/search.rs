//! One- and two-dimensional maximization helpers used for the level-set
//! constants. All routines are deterministic scans followed by golden-section
//! refinement.

use crate::model::RationalTermFunction;

/// Points in the scan preceding golden refinement of a segment maximum.
pub const SEGMENT_SCAN_POINTS: usize = 4096;
/// Absolute golden-section tolerance on the abscissa.
pub const GOLDEN_TOL: f64 = 1e-9;

const INV_PHI: f64 = 0.618_033_988_749_894_8;

fn golden_tol(lo: f64, hi: f64) -> f64 {
    GOLDEN_TOL.max(1e-15 * lo.abs().max(hi.abs()))
}

/// Golden-section search for a maximum of `f` on `[lo, hi]`; returns `(x, f(x))`.
pub fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> (f64, f64) {
    let tol = golden_tol(lo, hi);
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iter = 0;
    while hi - lo > tol && iter < 200 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        }
        iter += 1;
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Golden-section search for a minimum.
pub fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    let (x, fx) = golden_max(|x| -f(x), lo, hi);
    (x, -fx)
}

/// Maximum of `f` on `[lo, hi]`: uniform scan of [`SEGMENT_SCAN_POINTS`]
/// intervals, then golden refinement inside the bracket of the best sample.
pub fn segment_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, f64) {
    if hi <= lo {
        return (lo, f(lo));
    }
    let n = SEGMENT_SCAN_POINTS;
    let step = (hi - lo) / n as f64;
    let at = |k: usize| if k == n { hi } else { lo + step * k as f64 };
    let mut best_k = 0;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=n {
        let y = f(at(k));
        if y > best {
            best = y;
            best_k = k;
        }
    }
    let a = at(best_k.saturating_sub(1));
    let b = at((best_k + 1).min(n));
    let (x, y) = golden_max(&f, a, b);
    if y > best {
        (x, y)
    } else {
        (at(best_k), best)
    }
}

/// `max_{u+v=L} target(u, v)` over the nonnegative segment.
pub fn level_line_max(target: &RationalTermFunction, level: f64) -> f64 {
    level_line_argmax(target, level).1
}

/// `(u, max)` for the maximum of `target(u, L − u)` over `u ∈ [0, L]`.
pub fn level_line_argmax(target: &RationalTermFunction, level: f64) -> (f64, f64) {
    if level <= 0.0 {
        return (0.0, target.eval(0.0, 0.0));
    }
    segment_max(|u| target.eval(u, (level - u).max(0.0)), 0.0, level)
}

/// Samples of `[0, x_max]` mixing a uniform and a geometric progression so that
/// both small and very large ranges are resolved.
pub(crate) fn axis_samples(x_max: f64, uniform: usize, geometric: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(uniform + geometric + 2);
    if x_max <= 0.0 {
        return vec![0.0];
    }
    for k in 0..=uniform {
        out.push(x_max * k as f64 / uniform as f64);
    }
    let lo = (x_max * 1e-9).ln();
    let hi = x_max.ln();
    for k in 0..geometric {
        out.push((lo + (hi - lo) * k as f64 / (geometric - 1) as f64).exp());
    }
    out.push(x_max);
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

/// Maximum of `g` over the rectangle `[0, u_max] × [0, v_max]`: mixed
/// uniform/geometric scan, then coordinate-wise golden refinement.
pub(crate) fn rect_max(g: impl Fn(f64, f64) -> f64, u_max: f64, v_max: f64) -> f64 {
    let us = axis_samples(u_max, 256, 128);
    let vs = axis_samples(v_max, 256, 128);
    let (mut bi, mut bj, mut best) = (0, 0, f64::NEG_INFINITY);
    for (i, &u) in us.iter().enumerate() {
        for (j, &v) in vs.iter().enumerate() {
            let y = g(u, v);
            if y > best {
                best = y;
                bi = i;
                bj = j;
            }
        }
    }
    let (mut u, mut v) = (us[bi], vs[bj]);
    let (ua, ub) = (us[bi.saturating_sub(1)], us[(bi + 1).min(us.len() - 1)]);
    let (va, vb) = (vs[bj.saturating_sub(1)], vs[(bj + 1).min(vs.len() - 1)]);
    for _ in 0..2 {
        let (x, y) = golden_max(|x| g(x, v), ua, ub);
        if y > best {
            best = y;
            u = x;
        }
        let (x, y) = golden_max(|x| g(u, x), va, vb);
        if y > best {
            best = y;
            v = x;
        }
    }
    best
}

/// `max |F|` over the rectangle `[0, u_max] × [0, v_max]`.
pub(crate) fn rect_max_abs(target: &RationalTermFunction, u_max: f64, v_max: f64) -> f64 {
    rect_max(|u, v| target.eval(u, v).abs(), u_max, v_max)
}

/// Maximum of `g` over the closed triangle `u, v ≥ 0, u + v ≤ level`.
pub(crate) fn triangle_max(g: impl Fn(f64, f64) -> f64, level: f64) -> f64 {
    if level <= 0.0 {
        return g(0.0, 0.0);
    }
    let xs = axis_samples(level, 256, 64);
    let mut best = f64::NEG_INFINITY;
    for &u in &xs {
        for &v in &xs {
            if u + v <= level {
                best = best.max(g(u, v));
            }
        }
    }
    let edge = segment_max(|u| g(u, (level - u).max(0.0)), 0.0, level).1;
    let axis_u = segment_max(|u| g(u, 0.0), 0.0, level).1;
    let axis_v = segment_max(|v| g(0.0, v), 0.0, level).1;
    best.max(edge).max(axis_u).max(axis_v)
}

/// `max |F|` over the closed triangle `u, v ≥ 0, u + v ≤ level`.
pub(crate) fn triangle_max_abs(target: &RationalTermFunction, level: f64) -> f64 {
    triangle_max(|u, v| target.eval(u, v).abs(), level)
}

/// Smallest `x` in `(lo, hi]` with `pred(x)` true, for a predicate that is
/// false at `lo`, true at `hi` and monotone in between. Returns a point where
/// the predicate holds.
pub(crate) fn bisect_threshold(pred: impl Fn(f64) -> bool, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= 1e-9 * hi.abs().max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Doubles from `start` until `pred` holds; `None` past `cap`.
pub(crate) fn expand_until(pred: impl Fn(f64) -> bool, start: f64, cap: f64) -> Option<f64> {
    let mut x = start.max(1e-6);
    while x <= cap {
        if pred(x) {
            return Some(x);
        }
        x *= 2.0;
    }
    None
}

/// Evaluates `target` on the tensor grid `us × vs`, calling `visit(i, j, value)`
/// until it returns `false`. Per-term factors are separated by variable so each
/// point costs one dot product.
pub(crate) fn scan_grid(
    target: &RationalTermFunction,
    us: &[f64],
    vs: &[f64],
    mut visit: impl FnMut(usize, usize, f64) -> bool,
) {
    let terms = target.terms();
    let nt = terms.len();
    if nt == 0 {
        for i in 0..us.len() {
            for j in 0..vs.len() {
                if !visit(i, j, 0.0) {
                    return;
                }
            }
        }
        return;
    }
    let mut col = vec![0.0; nt * vs.len()];
    for (j, &v) in vs.iter().enumerate() {
        for (k, t) in terms.iter().enumerate() {
            col[j * nt + k] = v.powi(t.q as i32) / (v + 1.0).powi(t.s as i32);
        }
    }
    let mut row = vec![0.0; nt];
    for (i, &u) in us.iter().enumerate() {
        for (k, t) in terms.iter().enumerate() {
            row[k] = t.coef * u.powi(t.p as i32) / (u + 1.0).powi(t.r as i32);
        }
        for j in 0..vs.len() {
            let c = &col[j * nt..(j + 1) * nt];
            let val: f64 = row.iter().zip(c).map(|(a, b)| a * b).sum();
            if !visit(i, j, val) {
                return;
            }
        }
    }
}

/// `0, h, 2h, ...` up to and including the first point `≥ extent`.
pub(crate) fn uniform_axis(extent: f64, spacing: f64) -> Vec<f64> {
    let n = (extent / spacing).ceil() as usize;
    (0..=n).map(|i| i as f64 * spacing).collect()
}

/// `count` geometric points from `lo` to `hi` inclusive.
pub(crate) fn geometric_range(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..count)
        .map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp())
        .collect()
}
