use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::search::{axis_samples, geometric_range, scan_grid, uniform_axis};
use super::{GridMeta, GridSettings, Llf, Property, PropertyReport, Verdict, Witness, P1_TOL};
use crate::model::{Limit, RationalTermFunction, ReactionPair};

/// Directions in the ray fan, including both axes.
pub const RAY_FAN: usize = 64;
const MAX_P1_ROUNDS: usize = 4;
const LIMIT_REL_TOL: f64 = 1e-9;

/// Unit-speed directions `(cos θ, sin θ)` spanning the closed quadrant; the
/// first and last are exactly the axes.
pub(crate) fn ray_fan(count: usize) -> Vec<(f64, f64)> {
    (0..count)
        .map(|k| {
            if k == 0 {
                (1.0, 0.0)
            } else if k == count - 1 {
                (0.0, 1.0)
            } else {
                let th = FRAC_PI_2 * k as f64 / (count - 1) as f64;
                (th.cos(), th.sin())
            }
        })
        .collect()
}

/// Fixed coordinates at which one-variable tails are examined.
fn line_samples(extent: f64, cap: f64) -> Vec<f64> {
    let mut out = axis_samples(extent, 32, 8);
    if cap > extent && extent > 0.0 {
        out.extend(geometric_range(extent, cap, 16).into_iter().skip(1));
    }
    out
}

/// First point `start · 2^k` on `point(t)` where `value > threshold`.
fn march(
    f: &RationalTermFunction,
    point: impl Fn(f64) -> (f64, f64),
    start: f64,
    threshold: f64,
) -> Option<Witness> {
    let mut t = start.max(1.0);
    while t < 1e300 {
        let (u, v) = point(t);
        let value = f.eval(u, v);
        if value > threshold && value.is_finite() {
            return Some(Witness { u, v, value });
        }
        t *= 2.0;
    }
    None
}

/// P1 result together with the certified threshold `K̲`.
#[derive(Clone, Debug, PartialEq)]
pub struct P1Outcome {
    pub report: PropertyReport,
    pub k_underbar: Option<f64>,
    /// Grid extent actually scanned.
    pub extent: f64,
}

/// Searches for a positive tail of `∇W·(f, g)` on lines and rays; a positive
/// tail means no threshold can exist.
fn p1_tail(dot: &RationalTermFunction, extent: f64, cap: f64) -> Option<PropertyReport> {
    let lines = line_samples(extent, cap);
    let mut faint = None;
    let mut check = |asym: crate::model::Asymptote,
                     point: &dyn Fn(f64) -> (f64, f64),
                     what: String|
     -> Option<PropertyReport> {
        if asym.eventual_sign() <= 0 {
            return None;
        }
        match march(dot, point, extent, P1_TOL) {
            Some(w) => Some(PropertyReport::refuted(
                Property::P1,
                w,
                format!("orbital derivative has a positive tail {what} (~{:e}·t^{})", asym.coef, asym.exponent),
            )),
            None => {
                faint.get_or_insert(format!("positive tail below tolerance {what}"));
                None
            }
        }
    };
    for &v in &lines {
        if let Some(r) = check(dot.tail_in_u(v), &|t| (t, v), format!("as u grows at v = {v}")) {
            return Some(r);
        }
    }
    for &u in &lines {
        if let Some(r) = check(dot.tail_in_v(u), &|t| (u, t), format!("as v grows at u = {u}")) {
            return Some(r);
        }
    }
    for (a, b) in ray_fan(RAY_FAN) {
        if let Some(r) = check(
            dot.tail_on_ray(a, b),
            &|t| (a * t, b * t),
            format!("along the ray ({a:.4}, {b:.4})"),
        ) {
            return Some(r);
        }
    }
    faint.map(|d| PropertyReport::inconclusive(Property::P1, d))
}

/// P1: `∇W·(f, g) ≤ 0` once `u + v ≥ K̲`.
///
/// Scans the uniform grid `[0, E]²`, then geometric bands beyond `E` up to the
/// cap, then the exact tails. `K̲` is the largest violating norm plus one grid
/// spacing. With the default extent `E = 3(u̲ + v̲ + K̲ + 10)` the scan is
/// repeated until `K̲` is consistent with the extent that certified it.
pub fn check_p1(
    llf: &Llf,
    reactions: &ReactionPair,
    grid: &GridSettings,
    u_under: f64,
    v_under: f64,
) -> P1Outcome {
    let dot = llf.orbital(reactions);
    let h = grid.spacing;
    let mut k_guess = h;
    let mut extent = grid.resolve_extent(u_under, v_under, k_guess);
    for _ in 0..MAX_P1_ROUNDS {
        extent = grid.resolve_extent(u_under, v_under, k_guess);
        let axis = uniform_axis(extent, h);
        let mut viol_norm = f64::NEG_INFINITY;
        let mut worst: Option<Witness> = None;
        let mut note = |u: f64, v: f64, value: f64| {
            if value > P1_TOL || value.is_nan() {
                viol_norm = viol_norm.max(u + v);
                if worst.is_none_or(|w| value > w.value) {
                    worst = Some(Witness { u, v, value });
                }
            }
        };
        scan_grid(&dot, &axis, &axis, |i, j, val| {
            note(axis[i], axis[j], val);
            true
        });
        let band = if grid.v_cap > extent {
            geometric_range(extent, grid.v_cap, 48)
        } else {
            Vec::new()
        };
        let across = line_samples(extent, grid.v_cap);
        scan_grid(&dot, &band, &across, |i, j, val| {
            note(band[i], across[j], val);
            true
        });
        scan_grid(&dot, &across, &band, |i, j, val| {
            note(across[i], band[j], val);
            true
        });
        let points = (axis.len() * axis.len() + 2 * band.len() * across.len()) as u64;
        let meta = GridMeta {
            extent,
            spacing: h,
            points,
        };
        if let Some(report) = p1_tail(&dot, extent, grid.v_cap) {
            return P1Outcome {
                report: report.with_grid(meta),
                k_underbar: None,
                extent,
            };
        }
        let k = if viol_norm.is_finite() { viol_norm + h } else { h };
        let consistent = grid.extent.is_some() || k <= k_guess;
        if consistent {
            if k >= extent {
                let mut r = PropertyReport::inconclusive(
                    Property::P1,
                    format!("violations reach norm {k} which is not inside the extent {extent}"),
                );
                r.witness = worst;
                return P1Outcome {
                    report: r.with_grid(meta),
                    k_underbar: None,
                    extent,
                };
            }
            let detail = match worst {
                Some(w) => format!(
                    "K_underbar = {k}; largest violation {:e} at ({}, {})",
                    w.value, w.u, w.v
                ),
                None => format!("K_underbar = {k}; no violation on the grid"),
            };
            return P1Outcome {
                report: PropertyReport::verified(Property::P1, detail).with_grid(meta),
                k_underbar: Some(k),
                extent,
            };
        }
        k_guess = k;
    }
    P1Outcome {
        report: PropertyReport::inconclusive(
            Property::P1,
            format!("threshold did not settle after {MAX_P1_ROUNDS} grid enlargements"),
        ),
        k_underbar: None,
        extent,
    }
}

/// P2: `∂_uuW > 0`, `∂_vvW > 0`, `∂_uvW ≥ 0`.
pub fn check_p2(llf: &Llf, grid: &GridSettings) -> PropertyReport {
    let extent = grid.resolve_extent(0.0, 0.0, 0.0);
    let axis = uniform_axis(extent, grid.spacing);
    let meta = GridMeta {
        extent,
        spacing: grid.spacing,
        points: 3 * (axis.len() * axis.len()) as u64,
    };
    let checks: [(&RationalTermFunction, bool, &str); 3] = [
        (llf.wuu(), true, "d2W/du2"),
        (llf.wvv(), true, "d2W/dv2"),
        (llf.wuv(), false, "d2W/dudv"),
    ];
    for (f, strict, name) in checks {
        let fails = |x: f64| if strict { !(x > 0.0) } else { !(x >= 0.0) };
        let mut bad = None;
        scan_grid(f, &axis, &axis, |i, j, val| {
            if fails(val) {
                bad = Some(Witness {
                    u: axis[i],
                    v: axis[j],
                    value: val,
                });
                return false;
            }
            true
        });
        if let Some(w) = bad {
            return PropertyReport::refuted(Property::P2, w, format!("{name} = {} at ({}, {})", w.value, w.u, w.v))
                .with_grid(meta);
        }
        let tails_ok = |s: i32| if strict { s > 0 } else { s >= 0 };
        let lines = line_samples(extent, grid.v_cap);
        let mut tail_fail: Option<(f64, f64, String)> = None;
        for &c in &lines {
            if !tails_ok(f.tail_in_u(c).eventual_sign()) {
                tail_fail = Some((grid.v_cap, c, format!("{name} has the wrong sign as u grows at v = {c}")));
                break;
            }
            if !tails_ok(f.tail_in_v(c).eventual_sign()) {
                tail_fail = Some((c, grid.v_cap, format!("{name} has the wrong sign as v grows at u = {c}")));
                break;
            }
        }
        if tail_fail.is_none() {
            for (a, b) in ray_fan(RAY_FAN) {
                if !tails_ok(f.tail_on_ray(a, b).eventual_sign()) {
                    tail_fail = Some((
                        a * grid.v_cap,
                        b * grid.v_cap,
                        format!("{name} has the wrong sign along the ray ({a:.4}, {b:.4})"),
                    ));
                    break;
                }
            }
        }
        if let Some((mut u, mut v, detail)) = tail_fail {
            // push out until the sign failure is visible numerically
            let mut value = f.eval(u, v);
            let mut k = 0;
            while !fails(value) && k < 64 {
                u *= 2.0;
                v *= 2.0;
                value = f.eval(u, v);
                k += 1;
            }
            return PropertyReport::refuted(Property::P2, Witness { u, v, value }, detail).with_grid(meta);
        }
    }
    PropertyReport::verified(Property::P2, "all second-derivative sign conditions hold").with_grid(meta)
}

/// P3: `W → ∞` along every ray of the fan.
pub fn check_p3(llf: &Llf, v_cap: f64) -> PropertyReport {
    for (a, b) in ray_fan(RAY_FAN) {
        let limit = llf.w().tail_on_ray(a, b).limit();
        if limit != Limit::PosInf {
            let (u, v) = (a * v_cap, b * v_cap);
            return PropertyReport::refuted(
                Property::P3,
                Witness {
                    u,
                    v,
                    value: llf.eval(u, v),
                },
                format!("W has limit {limit:?} along the ray ({a:.4}, {b:.4})"),
            );
        }
    }
    PropertyReport::verified(Property::P3, format!("W diverges along all {RAY_FAN} rays"))
}

/// `sup |num/den|` over `den_var ≥ start` at a fixed other coordinate, with
/// the exact limit. `Err` carries a witness of divergence.
fn ratio_line_sup(
    num: &RationalTermFunction,
    den: &RationalTermFunction,
    fixed: f64,
    start: f64,
    cap: f64,
    swap: bool,
) -> Result<f64, Witness> {
    let at = |x: f64| if swap { (x, fixed) } else { (fixed, x) };
    let mut sup = 0.0f64;
    let samples = geometric_range(1e-9, cap, 256).into_iter().map(|o| start + o);
    for x in samples {
        let (u, v) = at(x);
        let r = (num.eval(u, v) / den.eval(u, v)).abs();
        if !r.is_finite() {
            return Err(Witness { u, v, value: r });
        }
        sup = sup.max(r);
    }
    let (tn, td) = if swap {
        (num.tail_in_u(fixed), den.tail_in_u(fixed))
    } else {
        (num.tail_in_v(fixed), den.tail_in_v(fixed))
    };
    match tn.ratio(&td).map(|a| a.limit()) {
        Some(Limit::Finite(l)) => Ok(sup.max(l.abs())),
        _ => {
            let (u, v) = at(cap.max(start) * 1e3);
            Err(Witness {
                u,
                v,
                value: (num.eval(u, v) / den.eval(u, v)).abs(),
            })
        }
    }
}

/// P4: `sup_{v ≥ v̲} |∂_uW/∂_vW| < ∞` for each `u`, and the mirrored condition.
pub fn check_p4(llf: &Llf, u_under: f64, v_under: f64, grid: &GridSettings) -> PropertyReport {
    let extent = grid.resolve_extent(u_under, v_under, 0.0);
    let fixed = line_samples(extent, grid.v_cap);
    let mut largest = (0.0f64, 0.0f64);
    for &c in &fixed {
        match ratio_line_sup(llf.wu(), llf.wv(), c, v_under, grid.v_cap, false) {
            Ok(s) => largest.0 = largest.0.max(s),
            Err(w) => {
                return PropertyReport::refuted(
                    Property::P4,
                    w,
                    format!("|dW/du / dW/dv| is unbounded in v at u = {c}"),
                )
            }
        }
        match ratio_line_sup(llf.wv(), llf.wu(), c, u_under, grid.v_cap, true) {
            Ok(s) => largest.1 = largest.1.max(s),
            Err(w) => {
                return PropertyReport::refuted(
                    Property::P4,
                    w,
                    format!("|dW/dv / dW/du| is unbounded in u at v = {c}"),
                )
            }
        }
    }
    PropertyReport::verified(
        Property::P4,
        format!(
            "largest sampled ratio sups: {:e} (in v), {:e} (in u)",
            largest.0, largest.1
        ),
    )
}

/// P5 in one direction: limits of the first derivative and the mixed
/// derivative as the variable grows, checked for the C4/C5 consequences.
fn p5_direction(
    first: &RationalTermFunction,
    mixed: &RationalTermFunction,
    lines: &[f64],
    in_u: bool,
) -> Result<String, (Witness, String)> {
    let var = if in_u { "u" } else { "v" };
    let other = if in_u { "v" } else { "u" };
    let tail = |f: &RationalTermFunction, c: f64| if in_u { f.tail_in_u(c) } else { f.tail_in_v(c) };
    let point = |c: f64| if in_u { (f64::INFINITY, c) } else { (c, f64::INFINITY) };
    let mut reference: Option<Limit> = None;
    for &c in lines {
        let l1 = tail(first, c).limit();
        let l2 = tail(mixed, c).limit();
        let (u, v) = point(c);
        let fail = |value: f64, why: String| Err((Witness { u, v, value }, why));
        if l1 == Limit::NegInf {
            return fail(f64::NEG_INFINITY, format!("first derivative tends to -inf as {var} grows at {other} = {c}"));
        }
        if l1.is_finite() && !l2.is_finite() {
            return fail(l2.as_f64(), format!("mixed derivative diverges as {var} grows at {other} = {c}"));
        }
        if let Some(prev) = reference {
            let same = match (prev, l1) {
                (Limit::Finite(a), Limit::Finite(b)) => (a - b).abs() <= LIMIT_REL_TOL * a.abs().max(b.abs()).max(1.0),
                (a, b) => a == b,
            };
            if !same {
                return fail(
                    l1.as_f64(),
                    format!("limit of the first derivative as {var} grows depends on {other}: {prev:?} vs {l1:?} at {other} = {c}"),
                );
            }
        } else {
            reference = Some(l1);
        }
        if let (Limit::Finite(_), Limit::Finite(m)) = (l1, l2) {
            if m.abs() > 1e-12 {
                return fail(m, format!("finite first-derivative limit but mixed derivative tends to {m} as {var} grows at {other} = {c}"));
            }
        }
    }
    Ok(format!("lim as {var} grows: {:?}", reference.unwrap_or(Limit::Finite(0.0))))
}

/// P5: the limits of `∂_uW` and `∂_uvW` as `u → ∞` are finite, or the first
/// diverges; mirrored in `v`.
pub fn check_p5(llf: &Llf, grid: &GridSettings) -> PropertyReport {
    let extent = grid.resolve_extent(0.0, 0.0, 0.0);
    let lines = line_samples(extent, grid.v_cap);
    let mut details = Vec::new();
    for in_u in [true, false] {
        let first = if in_u { llf.wu() } else { llf.wv() };
        match p5_direction(first, llf.wuv(), &lines, in_u) {
            Ok(d) => details.push(d),
            Err((w, why)) => return PropertyReport::refuted(Property::P5, w, why),
        }
    }
    PropertyReport::verified(Property::P5, details.join("; "))
}

/// Outcome of the separable promotion rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Promotion {
    /// P4 and P5 follow from separability and the supplied verdicts.
    Promoted,
    NotSeparable,
    /// One of P1, P2, P3 is not verified.
    MissingPrerequisite,
}

/// An additively separable `W = w₁(u) + w₂(v)` that satisfies P1–P3 also
/// satisfies P4 and P5.
pub fn promote_separable(
    w: &RationalTermFunction,
    p1: &PropertyReport,
    p2: &PropertyReport,
    p3: &PropertyReport,
) -> Promotion {
    if w.split_separable().is_none() {
        return Promotion::NotSeparable;
    }
    if [p1, p2, p3].iter().all(|r| r.verdict == Verdict::Verified) {
        Promotion::Promoted
    } else {
        Promotion::MissingPrerequisite
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{example_llf, schnakenberg_reactions};

    fn rtf(t: &[(f64, u32, u32, u32, u32)]) -> RationalTermFunction {
        RationalTermFunction::from_tuples(t).unwrap()
    }

    fn small_grid() -> GridSettings {
        GridSettings {
            extent: Some(20.0),
            spacing: 0.05,
            v_cap: 1e6,
        }
    }

    #[test]
    fn fan_contains_exact_axes() {
        let fan = ray_fan(RAY_FAN);
        assert_eq!(fan[0], (1.0, 0.0));
        assert_eq!(fan[RAY_FAN - 1], (0.0, 1.0));
    }

    #[test]
    fn p2_cases() {
        let llf = Llf::new(example_llf(43.0).unwrap());
        assert_eq!(check_p2(&llf, &small_grid()).verdict, Verdict::Verified);
        let r = check_p2(&Llf::new(rtf(&[(1.0, 1, 1, 0, 0)])), &small_grid());
        assert_eq!(r.verdict, Verdict::Refuted);
        assert_eq!(r.witness.unwrap().value, 0.0);
        let sq = Llf::new(rtf(&[(1.0, 2, 0, 0, 0), (1.0, 0, 2, 0, 0)]));
        assert_eq!(check_p2(&sq, &small_grid()).verdict, Verdict::Verified);
    }

    #[test]
    fn p3_cases() {
        assert_eq!(check_p3(&Llf::new(example_llf(43.0).unwrap()), 1e6).verdict, Verdict::Verified);
        let bounded = check_p3(&Llf::new(rtf(&[(1.0, 0, 0, 1, 0), (1.0, 0, 0, 0, 1)])), 1e6);
        assert_eq!(bounded.verdict, Verdict::Refuted);
        let lin = check_p3(&Llf::new(rtf(&[(1.0, 1, 0, 0, 0)])), 1e6);
        assert_eq!(lin.verdict, Verdict::Refuted);
        assert_eq!(lin.witness.unwrap().u, 0.0);
    }

    #[test]
    fn p4_cases() {
        let g = small_grid();
        assert_eq!(check_p4(&Llf::new(example_llf(43.0).unwrap()), 43f64.sqrt() - 1.0, 0.0, &g).verdict, Verdict::Verified);
        // W = u^4 + v^2: ratio 4u^3 / 2v tends to 0 in v
        let w = Llf::new(rtf(&[(1.0, 4, 0, 0, 0), (1.0, 0, 2, 0, 0)]));
        assert_eq!(check_p4(&w, 1e-3, 1e-3, &g).verdict, Verdict::Verified);
        // W = u^2 + v with u_ > 0
        let w = Llf::new(rtf(&[(1.0, 2, 0, 0, 0), (1.0, 0, 1, 0, 0)]));
        assert_eq!(check_p4(&w, 0.5, 0.0, &g).verdict, Verdict::Verified);
        // W = (u+1)^2 (v+1)^2: ratio (v+1)/(u+1) is unbounded in v
        let w = Llf::new(crate::catalog::weinberger_lyapunov());
        assert_eq!(check_p4(&w, 0.0, 0.0, &g).verdict, Verdict::Refuted);
    }

    #[test]
    fn p5_cases() {
        let g = small_grid();
        assert_eq!(check_p5(&Llf::new(example_llf(43.0).unwrap()), &g).verdict, Verdict::Verified);
        let sq = Llf::new(rtf(&[(1.0, 2, 0, 0, 0), (1.0, 0, 2, 0, 0)]));
        assert_eq!(check_p5(&sq, &g).verdict, Verdict::Verified);
        // W = u + u/(v+1) + v^2
        let w = Llf::new(rtf(&[(1.0, 1, 0, 0, 0), (1.0, 1, 0, 0, 1), (1.0, 0, 2, 0, 0)]));
        assert_eq!(check_p5(&w, &g).verdict, Verdict::Refuted);
    }

    #[test]
    fn p1_on_schnakenberg_small_grid() {
        let llf = Llf::new(example_llf(43.0).unwrap());
        let r = schnakenberg_reactions(0.1, 1.0).unwrap();
        let out = check_p1(&llf, &r, &small_grid(), 43f64.sqrt() - 1.0, 0.0);
        assert_eq!(out.report.verdict, Verdict::Verified, "{}", out.report.detail);
        assert!(out.k_underbar.unwrap() <= 23.6 + 94.4);
    }

    #[test]
    fn p1_refutes_growing_kinetics() {
        // f = u, g = v with W = u + v: dot = u + v > 0
        let llf = Llf::new(rtf(&[(1.0, 1, 0, 0, 0), (1.0, 0, 1, 0, 0)]));
        let r = ReactionPair::new(rtf(&[(1.0, 1, 0, 0, 0)]), rtf(&[(1.0, 0, 1, 0, 0)]));
        let out = check_p1(&llf, &r, &small_grid(), 0.0, 0.0);
        assert_eq!(out.report.verdict, Verdict::Refuted);
        assert!(out.report.witness.unwrap().value > P1_TOL);
    }

    #[test]
    fn promotion_rules() {
        let ok = PropertyReport::verified(Property::P1, "");
        let sep = rtf(&[(2.0, 2, 0, 0, 0), (3.0, 0, 3, 0, 0)]);
        assert_eq!(promote_separable(&sep, &ok, &ok, &ok), Promotion::Promoted);
        let cross = rtf(&[(1.0, 2, 0, 0, 0), (1.0, 1, 1, 0, 0)]);
        assert_eq!(promote_separable(&cross, &ok, &ok, &ok), Promotion::NotSeparable);
        let bad = PropertyReport::inconclusive(Property::P2, "");
        assert_eq!(promote_separable(&sep, &ok, &bad, &ok), Promotion::MissingPrerequisite);
    }
}
