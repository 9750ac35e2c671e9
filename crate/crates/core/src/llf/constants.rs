use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use super::properties::{check_p1, check_p2, check_p3, check_p4, check_p5};
use super::search::{
    bisect_threshold, expand_until, geometric_range, golden_max, golden_min, level_line_max,
    triangle_max,
};
use super::{GridSettings, Llf, PropertyReport, Verdict, SAFETY_FACTOR};
use crate::error::LlfError;
use crate::model::{Limit, RationalTermFunction, ReactionPair};

/// Rays used for the level-set extent.
pub const LEVEL_SET_RAYS: usize = 1024;
const RAY_SAMPLES: usize = 2000;
const SEARCH_CAP: f64 = 1e12;
const K_VALIDATION_SAMPLES: usize = 20;

/// `W` together with the thresholds that make it an LLF.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlfCandidate {
    pub w: RationalTermFunction,
    pub k_underbar: f64,
    pub u_underbar: f64,
    pub v_underbar: f64,
    pub k: f64,
}

impl LlfCandidate {
    pub fn new(
        w: RationalTermFunction,
        k_underbar: f64,
        u_underbar: f64,
        v_underbar: f64,
        k: f64,
    ) -> Result<Self, LlfError> {
        if !(k_underbar > 0.0) {
            return Err(LlfError::Precondition(format!(
                "K_underbar must be positive, got {k_underbar}"
            )));
        }
        if !(k >= k_underbar.max(u_underbar).max(v_underbar)) {
            return Err(LlfError::Precondition(format!(
                "K = {k} is below max(K_underbar, u_underbar, v_underbar)"
            )));
        }
        Ok(Self {
            w,
            k_underbar,
            u_underbar,
            v_underbar,
            k,
        })
    }

    pub fn llf(&self) -> Llf {
        Llf::new(self.w.clone())
    }
}

/// Smallest `x ≥ 0` with `pred(x)`, for a predicate monotone in `x`.
fn first_positive(pred: impl Fn(f64) -> bool, what: &str) -> Result<f64, LlfError> {
    if pred(0.0) {
        return Ok(0.0);
    }
    let hi = expand_until(&pred, 1.0, SEARCH_CAP).ok_or_else(|| {
        LlfError::Inconclusive(format!("{what} not found below {SEARCH_CAP:e}"))
    })?;
    let lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    let x = bisect_threshold(pred, lo, hi);
    // positive on every u > 0: the infimum is the origin itself
    Ok(if x <= 1e-8 { 0.0 } else { x })
}

/// `(u̲, v̲)`: first points where `∂_uW(·, 0) > 0` and `∂_vW(0, ·) > 0`.
pub fn find_underbars(llf: &Llf) -> Result<(f64, f64), LlfError> {
    let u = first_positive(|x| llf.wu().eval(x, 0.0) > 0.0, "u_underbar")?;
    let v = first_positive(|x| llf.wv().eval(0.0, x) > 0.0, "v_underbar")?;
    Ok((u, v))
}

/// Intermediate values of the `K` construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KConstruction {
    pub m_hat: f64,
    pub u_tilde: f64,
    pub v_tilde: f64,
    pub k: f64,
    /// `(L, M^(L))` at the sampled `L < K`.
    pub validation: Vec<(f64, f64)>,
    pub m_k: f64,
}

fn min_on(f: impl Fn(f64) -> f64, hi: f64) -> f64 {
    if hi <= 0.0 {
        return f(0.0);
    }
    let (_, m) = golden_min(&f, 0.0, hi);
    m.min(f(0.0)).min(f(hi))
}

/// Threshold beyond which `min W` over the short side exceeds `m_hat`.
fn tilde(side_min: impl Fn(f64) -> f64, start: f64, m_hat: f64, what: &str) -> Result<f64, LlfError> {
    let pred = |x: f64| side_min(x) > m_hat;
    if pred(start) {
        return Ok(start);
    }
    let hi = expand_until(pred, (2.0 * start).max(1.0), SEARCH_CAP)
        .ok_or_else(|| LlfError::Inconclusive(format!("{what} not found below {SEARCH_CAP:e}")))?;
    Ok(bisect_threshold(pred, start.max(hi / 2.0), hi))
}

/// `K = max{K̲, ũ + ṽ}` where `W > M̂ := max_{u+v ≤ u̲+v̲} W` beyond `ũ`
/// (resp. `ṽ`) on the short side; validated by sampling `M^(L) < M^(K)`.
pub fn find_k(llf: &Llf, k_underbar: f64, u_under: f64, v_under: f64) -> Result<KConstruction, LlfError> {
    if !(k_underbar > 0.0) {
        return Err(LlfError::Precondition(format!(
            "K_underbar must be positive, got {k_underbar}"
        )));
    }
    let w = llf.w();
    let s = u_under + v_under;
    let m_hat = triangle_max(|u, v| w.eval(u, v), s);
    let u_tilde = tilde(|u| min_on(|v| w.eval(u, v), v_under), s, m_hat, "u_tilde")?;
    let v_tilde = tilde(|v| min_on(|u| w.eval(u, v), u_under), s, m_hat, "v_tilde")?;
    let k = k_underbar.max(u_tilde + v_tilde).max(u_under).max(v_under);
    let m_k = level_line_max(w, k);
    let mut validation = Vec::with_capacity(K_VALIDATION_SAMPLES);
    for j in 1..=K_VALIDATION_SAMPLES {
        let l = k * j as f64 / (K_VALIDATION_SAMPLES + 1) as f64;
        let m_l = level_line_max(w, l);
        if !(m_l < m_k) {
            return Err(LlfError::Inconclusive(format!(
                "M^(L) = {m_l} at L = {l} is not below M^(K) = {m_k}"
            )));
        }
        validation.push((l, m_l));
    }
    Ok(KConstruction {
        m_hat,
        u_tilde,
        v_tilde,
        k,
        validation,
        m_k,
    })
}

/// Directions spanning the quadrant with exact axes at both ends.
fn ray_angle(k: usize, count: usize) -> f64 {
    FRAC_PI_2 * k as f64 / (count - 1) as f64
}

fn direction(theta: f64) -> (f64, f64) {
    if theta <= 0.0 {
        (1.0, 0.0)
    } else if theta >= FRAC_PI_2 {
        (0.0, 1.0)
    } else {
        (theta.cos(), theta.sin())
    }
}

/// Outermost `t` on the ray `t·(a, b)` where `W` crosses `level`, or `None`
/// when the ray starts outside the sublevel set.
fn outermost_crossing(w: &RationalTermFunction, level: f64, a: f64, b: f64) -> Result<Option<f64>, LlfError> {
    if w.tail_on_ray(a, b).limit() != Limit::PosInf {
        return Err(LlfError::Inconclusive(format!(
            "W stays bounded along the ray ({a}, {b}); the level set may be unbounded"
        )));
    }
    let f = |t: f64| w.eval(a * t, b * t) - level;
    let mut cap = 1.0;
    while f(cap) <= 0.0 {
        cap *= 10.0;
        if cap > 1e300 {
            return Err(LlfError::Inconclusive(format!(
                "no crossing of level {level} along the ray ({a}, {b})"
            )));
        }
    }
    let mut ts = vec![0.0];
    ts.extend(geometric_range(cap * 1e-12, cap, RAY_SAMPLES));
    let Some(j) = ts.iter().rposition(|&t| f(t) <= 0.0) else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (ts[j], ts[j + 1]);
    while hi - lo > 1e-8 * hi.max(1.0) {
        let mid = 0.5 * (lo + hi);
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(hi))
}

/// `max (u + v)` over the sublevel set `{W ≤ level}` from a ray scan with
/// golden refinement of the best direction; no safety factor.
pub fn level_set_extent(w: &RationalTermFunction, level: f64, rays: usize) -> Result<f64, LlfError> {
    let reach = |theta: f64| -> Result<f64, LlfError> {
        let (a, b) = direction(theta);
        Ok(outermost_crossing(w, level, a, b)?.map_or(0.0, |t| t * (a + b)))
    };
    let mut best = (0usize, f64::NEG_INFINITY);
    for k in 0..rays {
        let r = reach(ray_angle(k, rays))?;
        if r > best.1 {
            best = (k, r);
        }
    }
    let lo = ray_angle(best.0.saturating_sub(1), rays);
    let hi = ray_angle((best.0 + 1).min(rays - 1), rays);
    let (_, refined) = golden_max(|th| reach(th).unwrap_or(f64::NEG_INFINITY), lo, hi);
    Ok(best.1.max(refined))
}

/// `B^(K)`: level-set extent at `M^(K)` times the safety factor.
pub fn compute_b_k(llf: &Llf, m_k: f64) -> Result<f64, LlfError> {
    Ok(SAFETY_FACTOR * level_set_extent(llf.w(), m_k, LEVEL_SET_RAYS)?)
}

fn strip_sup(
    num: &RationalTermFunction,
    den: &RationalTermFunction,
    l: f64,
    start: f64,
    cap: f64,
    swap: bool,
) -> Result<f64, LlfError> {
    let at = |fixed: f64, x: f64| if swap { (x, fixed) } else { (fixed, x) };
    let offsets = geometric_range(1e-9, cap.max(10.0 * l), 256);
    let mut sup = 0.0f64;
    for fixed in super::search::axis_samples(l, 256, 64) {
        for &o in &offsets {
            let (u, v) = at(fixed, start + o);
            let r = (num.eval(u, v) / den.eval(u, v)).abs();
            if !r.is_finite() {
                return Err(LlfError::Inconclusive(format!("derivative ratio is not finite at ({u}, {v})")));
            }
            sup = sup.max(r);
        }
        let (tn, td) = if swap {
            (num.tail_in_u(fixed), den.tail_in_u(fixed))
        } else {
            (num.tail_in_v(fixed), den.tail_in_v(fixed))
        };
        match tn.ratio(&td).map(|a| a.limit()) {
            Some(Limit::Finite(x)) => sup = sup.max(x.abs()),
            _ => {
                return Err(LlfError::Inconclusive(format!(
                    "derivative ratio diverges along the line through fixed coordinate {fixed}"
                )))
            }
        }
    }
    Ok(sup)
}

/// `(R_{u,L}, R_{v,L})` with the safety factor applied.
pub fn ratio_sup(llf: &Llf, l: f64, u_under: f64, v_under: f64, v_cap: f64) -> Result<(f64, f64), LlfError> {
    let r_u = strip_sup(llf.wu(), llf.wv(), l, v_under, v_cap, false)?;
    let r_v = strip_sup(llf.wv(), llf.wu(), l, u_under, v_cap, true)?;
    Ok((SAFETY_FACTOR * r_u, SAFETY_FACTOR * r_v))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSample {
    pub l: f64,
    pub m: f64,
    pub m_u: f64,
    pub m_v: f64,
}

impl LevelSample {
    pub fn at(llf: &Llf, l: f64) -> Self {
        Self {
            l,
            m: level_line_max(llf.w(), l),
            m_u: level_line_max(llf.wu(), l),
            m_v: level_line_max(llf.wv(), l),
        }
    }
}

/// Level-set constants at `K` plus optional samples at other levels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetConstants {
    pub k: f64,
    pub m_k: f64,
    pub m_u_k: f64,
    pub m_v_k: f64,
    pub m_u_inf: Limit,
    pub m_v_inf: Limit,
    pub b_k: f64,
    /// `R_{u,B^(K)}`, `R_{v,B^(K)}`.
    pub r_u_bk: f64,
    pub r_v_bk: f64,
    pub samples: Vec<LevelSample>,
}

impl LevelSetConstants {
    pub fn compute(cand: &LlfCandidate, v_cap: f64, levels: &[f64]) -> Result<Self, LlfError> {
        let llf = cand.llf();
        let at_k = LevelSample::at(&llf, cand.k);
        let b_k = compute_b_k(&llf, at_k.m)?;
        let (r_u_bk, r_v_bk) = ratio_sup(&llf, b_k, cand.u_underbar, cand.v_underbar, v_cap)?;
        Ok(Self {
            k: cand.k,
            m_k: at_k.m,
            m_u_k: at_k.m_u,
            m_v_k: at_k.m_v,
            m_u_inf: llf.wu().tail_in_u(0.0).limit(),
            m_v_inf: llf.wv().tail_in_v(0.0).limit(),
            b_k,
            r_u_bk,
            r_v_bk,
            samples: levels.iter().map(|&l| LevelSample::at(&llf, l)).collect(),
        })
    }
}

/// Everything `verify-llf` produces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LlfCertification {
    pub verdict: Verdict,
    pub reports: Vec<PropertyReport>,
    pub underbars: Option<(f64, f64)>,
    pub construction: Option<KConstruction>,
    pub candidate: Option<LlfCandidate>,
    pub constants: Option<LevelSetConstants>,
    pub notes: Vec<String>,
}

/// Runs P1–P5 and, when all are verified, the `K` construction and the
/// level-set constants.
pub fn certify(w: &RationalTermFunction, reactions: &ReactionPair, grid: &GridSettings) -> LlfCertification {
    let llf = Llf::new(w.clone());
    let mut notes = Vec::new();
    let p3 = check_p3(&llf, grid.v_cap);
    let underbars = match find_underbars(&llf) {
        Ok(x) => Some(x),
        Err(e) => {
            notes.push(e.to_string());
            None
        }
    };
    let (u_, v_) = underbars.unwrap_or((0.0, 0.0));
    let p1 = check_p1(&llf, reactions, grid, u_, v_);
    let resolved = GridSettings {
        extent: Some(p1.extent),
        ..*grid
    };
    let p2 = check_p2(&llf, &resolved);
    let p4 = match underbars {
        Some(_) => check_p4(&llf, u_, v_, &resolved),
        None => PropertyReport::inconclusive(super::Property::P4, "u_underbar/v_underbar unavailable"),
    };
    let p5 = check_p5(&llf, &resolved);
    let reports = vec![p1.report.clone(), p2, p3, p4, p5];
    let mut verdict = reports.iter().fold(Verdict::Verified, |acc, r| acc.combine(r.verdict));
    let mut construction = None;
    let mut candidate = None;
    let mut constants = None;
    if verdict == Verdict::Verified {
        let built = (|| -> Result<_, LlfError> {
            let k_under = p1
                .k_underbar
                .ok_or_else(|| LlfError::Inconclusive("P1 produced no threshold".into()))?;
            let kc = find_k(&llf, k_under, u_, v_)?;
            let cand = LlfCandidate::new(w.clone(), k_under, u_, v_, kc.k)?;
            let consts = LevelSetConstants::compute(&cand, grid.v_cap, &[])?;
            Ok((kc, cand, consts))
        })();
        match built {
            Ok((kc, cand, consts)) => {
                construction = Some(kc);
                candidate = Some(cand);
                constants = Some(consts);
            }
            Err(e) => {
                notes.push(e.to_string());
                verdict = Verdict::Inconclusive;
            }
        }
    }
    LlfCertification {
        verdict,
        reports,
        underbars,
        construction,
        candidate,
        constants,
        notes,
    }
}
