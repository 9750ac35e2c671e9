use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::BoundsError;
use crate::llf::search::{bisect_threshold, expand_until, rect_max_abs, triangle_max_abs};
use crate::llf::{
    level_line_argmax, level_line_max, level_set_extent, ratio_sup, LevelSetConstants, Llf, LlfCandidate,
    LEVEL_SET_RAYS, SAFETY_FACTOR,
};
use crate::model::DiscretizedSystem;

const MIN_M_TILDE: f64 = 1e-6;
const L_TILDE_CANDIDATES: usize = 64;

fn finite(field: &'static str, step: Option<usize>, x: f64) -> Result<f64, BoundsError> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(BoundsError::NonFinite { field, step })
    }
}

/// `u*`, `v*` and `F_max` with the two rectangle maxima.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FMax {
    pub u_star: f64,
    pub v_star: f64,
    pub max_wu: f64,
    pub max_wv: f64,
    pub f_max: f64,
}

/// `u* = B(1 + d R_v)`, `v* = B(d + R_u)/d`,
/// `F_max = B(max_{u≤B, v≤v*} |∂_uW| + d max_{u≤u*, v≤B} |∂_vW|)`, with `B = B^(K)`.
pub fn compute_f_max(llf: &Llf, b_k: f64, r_u: f64, r_v: f64, d: f64) -> Result<FMax, BoundsError> {
    if !(b_k > 0.0 && d > 0.0) {
        return Err(BoundsError::InvalidInput(format!(
            "F_max needs B_K > 0 and d > 0, got {b_k}, {d}"
        )));
    }
    let u_star = finite("u_star", None, b_k * (1.0 + d * r_v))?;
    let v_star = finite("v_star", None, b_k * (d + r_u) / d)?;
    let max_wu = SAFETY_FACTOR * rect_max_abs(llf.wu(), b_k, v_star);
    let max_wv = SAFETY_FACTOR * rect_max_abs(llf.wv(), u_star, b_k);
    let f_max = finite("F_max", None, b_k * (max_wu + d * max_wv))?;
    Ok(FMax {
        u_star,
        v_star,
        max_wu,
        max_wv,
        f_max,
    })
}

/// One of `G_u` or `G_v` with its intermediate constants.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxThreshold {
    pub l: f64,
    pub l_tilde: f64,
    /// `M_u^(L)` (resp. `M_v^(L)`).
    pub m_l: f64,
    pub m_l_tilde: f64,
    /// `ũ` (resp. `ṽ`).
    pub tilde: f64,
    /// `R_{v,L}` (resp. `R_{u,L}`).
    pub ratio: f64,
    /// `C₁` (resp. `C₃`).
    pub c_lin: f64,
    /// `C₂` (resp. `C₄`).
    pub c_off: f64,
    pub g: f64,
}

/// First `x` with `g(x) ≥ m`, for `g` increasing where it is positive.
fn solve_increasing(g: impl Fn(f64) -> f64, m: f64) -> Option<f64> {
    let pred = |x: f64| g(x) >= m;
    if pred(0.0) {
        return Some(0.0);
    }
    let hi = expand_until(pred, 1.0, f64::MAX / 4.0)?;
    let lo = if hi > 1.0 { hi / 2.0 } else { 0.0 };
    Some(bisect_threshold(pred, lo, hi))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Axis {
    U,
    V,
}

impl Axis {
    fn field(self) -> &'static str {
        match self {
            Axis::U => "G_u",
            Axis::V => "G_v",
        }
    }
}

/// Shared construction of `G_u` and `G_v`. `L̃` runs over `2L, 4L, …` and the
/// candidate with the smallest threshold is kept.
fn flux_threshold(
    llf: &Llf,
    cand: &LlfCandidate,
    a: f64,
    l: f64,
    d: f64,
    v_cap: f64,
    axis: Axis,
) -> Result<FluxThreshold, BoundsError> {
    if !(a > 0.0 && l > 0.0 && d > 0.0) {
        return Err(BoundsError::InvalidInput(format!(
            "G needs A > 0, L > 0 and d > 0, got A = {a}, L = {l}, d = {d}"
        )));
    }
    let (own, other) = match axis {
        Axis::U => (llf.wu(), llf.wv()),
        Axis::V => (llf.wv(), llf.wu()),
    };
    let (r_u, r_v) = ratio_sup(llf, l, cand.u_underbar, cand.v_underbar, v_cap)?;
    let ratio = if axis == Axis::U { r_v } else { r_u };
    let max_other = SAFETY_FACTOR * triangle_max_abs(other, l);
    let (x_l, m_l) = level_line_argmax(own, l);
    let at_l = (x_l, l - x_l);
    let on_axis = |x: f64| match axis {
        Axis::U => own.eval(x, 0.0),
        Axis::V => own.eval(0.0, x),
    };

    let mut best: Option<FluxThreshold> = None;
    let mut l_tilde = 2.0 * l;
    for _ in 0..L_TILDE_CANDIDATES {
        if !l_tilde.is_finite() {
            break;
        }
        let (x_t, m) = level_line_argmax(own, l_tilde);
        let c_lin = own.eval_diff((x_t, l_tilde - x_t), at_l) / m;
        if m >= MIN_M_TILDE && c_lin > 0.0 {
            let Some(tilde) = solve_increasing(on_axis, m) else { break };
            if best.is_some_and(|b| tilde + l >= b.g) {
                break;
            }
            let c_off = (ratio + max_other / m) * l;
            let g = match axis {
                Axis::U => (tilde + l).max((a + d * m * c_off) / (m * c_lin)),
                Axis::V => (tilde + l).max((a + m * c_off) / (d * m * c_lin)),
            };
            if g.is_finite() && best.is_none_or(|b| g < b.g) {
                best = Some(FluxThreshold {
                    l,
                    l_tilde,
                    m_l,
                    m_l_tilde: m,
                    tilde,
                    ratio,
                    c_lin,
                    c_off,
                    g,
                });
            }
        }
        l_tilde *= 2.0;
    }
    best.ok_or(BoundsError::NonFinite {
        field: axis.field(),
        step: None,
    })
}

/// `G_u = max{ũ + L, (A + d M_u^(L̃) C₂) / (M_u^(L̃) C₁)}`.
pub fn compute_g_u(llf: &Llf, cand: &LlfCandidate, a: f64, l: f64, d: f64, v_cap: f64) -> Result<FluxThreshold, BoundsError> {
    flux_threshold(llf, cand, a, l, d, v_cap, Axis::U)
}

/// `G_v = max{ṽ + L, (A + M_v^(L̃) C₄) / (d M_v^(L̃) C₃)}`.
pub fn compute_g_v(llf: &Llf, cand: &LlfCandidate, a: f64, l: f64, d: f64, v_cap: f64) -> Result<FluxThreshold, BoundsError> {
    flux_threshold(llf, cand, a, l, d, v_cap, Axis::V)
}

/// `G = max{2G_u, 2G_v, B^(K)}`.
pub fn compute_g(g_u: f64, g_v: f64, b_k: f64) -> f64 {
    (2.0 * g_u).max(2.0 * g_v).max(b_k)
}

/// One link `L_i = G_i + L_{i−1}` of the threshold chain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub index: usize,
    pub l_prev: f64,
    pub g_u: FluxThreshold,
    pub g_v: FluxThreshold,
    pub g: f64,
    pub l: f64,
}

/// Compensated (Neumaier) sum.
fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Chain of length `n − 1` starting at `L_0 = B^(K)`; returns the steps and
/// `C = B^(K) + Σ G_i`.
pub fn compute_c(
    llf: &Llf,
    cand: &LlfCandidate,
    b_k: f64,
    a: f64,
    n: usize,
    d: f64,
    v_cap: f64,
) -> Result<(Vec<ChainStep>, f64), BoundsError> {
    if n < 2 {
        return Err(BoundsError::InvalidInput(format!("chain needs n >= 2, got {n}")));
    }
    let mut steps = Vec::with_capacity(n - 1);
    let mut l_prev = b_k;
    for i in 1..n {
        let wrap = |e: BoundsError| match e {
            BoundsError::NonFinite { field, .. } => BoundsError::NonFinite { field, step: Some(i) },
            other => other,
        };
        let g_u = compute_g_u(llf, cand, a, l_prev, d, v_cap).map_err(wrap)?;
        let g_v = compute_g_v(llf, cand, a, l_prev, d, v_cap).map_err(wrap)?;
        let g = finite("G", Some(i), compute_g(g_u.g, g_v.g, b_k))?;
        let l = finite("L", Some(i), g + l_prev)?;
        steps.push(ChainStep {
            index: i,
            l_prev,
            g_u,
            g_v,
            g,
            l,
        });
        l_prev = l;
    }
    let c = neumaier(std::iter::once(b_k).chain(steps.iter().map(|s| s.g)));
    Ok((steps, finite("C", None, c)?))
}

/// `C̲ = max{max_i ‖(u_{i,0}, v_{i,0})‖, C}`.
pub fn compute_c_underbar(c: f64, u0: &[f64], v0: &[f64]) -> f64 {
    u0.iter().zip(v0).map(|(u, v)| u + v).fold(c, f64::max)
}

/// `(M^(C̲), B)` where `B` bounds `u + v` on `{W ≤ n M^(C̲)}`.
pub fn compute_b(llf: &Llf, c_underbar: f64, n: usize) -> Result<(f64, f64), BoundsError> {
    let m_c = finite("M_C_underbar", None, level_line_max(llf.w(), c_underbar))?;
    let level = n as f64 * m_c;
    let b = SAFETY_FACTOR * level_set_extent(llf.w(), level, LEVEL_SET_RAYS)?;
    Ok((m_c, finite("B", None, b)?))
}

/// One flat ledger entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub value: f64,
    pub prerequisites: Vec<String>,
    pub method: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstantLedger {
    pub n: usize,
    pub d: f64,
    pub gamma: f64,
    pub k_underbar: f64,
    pub u_underbar: f64,
    pub v_underbar: f64,
    pub k: f64,
    pub m_k: f64,
    pub b_k: f64,
    pub r_u_bk: f64,
    pub r_v_bk: f64,
    pub f_max: FMax,
    pub a: f64,
    pub chain: Vec<ChainStep>,
    pub c: f64,
    pub max_initial_norm: f64,
    pub c_underbar: f64,
    pub m_c_underbar: f64,
    pub b: f64,
    pub safety_factor: f64,
    /// Whether `C̲ > K`, which the bound's proof uses.
    pub c_underbar_exceeds_k: bool,
}

fn entry(map: &mut BTreeMap<String, LedgerEntry>, name: impl Into<String>, value: f64, prereq: &[&str], method: &str) {
    map.insert(
        name.into(),
        LedgerEntry {
            value,
            prerequisites: prereq.iter().map(|s| s.to_string()).collect(),
            method: method.to_string(),
        },
    );
}

impl ConstantLedger {
    /// Flat `field → {value, prerequisites, method}` map.
    pub fn entries(&self) -> BTreeMap<String, LedgerEntry> {
        let mut m = BTreeMap::new();
        let e = &mut m;
        entry(e, "n", self.n as f64, &[], "system");
        entry(e, "d", self.d, &[], "system");
        entry(e, "gamma", self.gamma, &[], "system");
        entry(e, "K_underbar", self.k_underbar, &[], "grid scan of the orbital derivative with exact tails");
        entry(e, "u_underbar", self.u_underbar, &[], "bisection on dW/du(u, 0) > 0");
        entry(e, "v_underbar", self.v_underbar, &[], "bisection on dW/dv(0, v) > 0");
        entry(e, "K", self.k, &["K_underbar", "u_underbar", "v_underbar"], "max{K_underbar, u_tilde + v_tilde}");
        entry(e, "M_K", self.m_k, &["K"], "level-line maximization");
        entry(e, "B_K", self.b_k, &["M_K"], "ray scan of the level set, times safety factor");
        entry(e, "R_u_BK", self.r_u_bk, &["B_K", "v_underbar"], "strip sup with exact tail, times safety factor");
        entry(e, "R_v_BK", self.r_v_bk, &["B_K", "u_underbar"], "strip sup with exact tail, times safety factor");
        entry(e, "u_star", self.f_max.u_star, &["B_K", "R_v_BK", "d"], "B_K (1 + d R_v)");
        entry(e, "v_star", self.f_max.v_star, &["B_K", "R_u_BK", "d"], "B_K (d + R_u) / d");
        entry(e, "F_max", self.f_max.f_max, &["B_K", "u_star", "v_star", "d"], "rectangle maxima of |dW|, times safety factor");
        entry(e, "A", self.a, &["n", "F_max"], "n F_max");
        entry(e, "L_0", self.b_k, &["B_K"], "chain start");
        let mut g_names = vec!["B_K".to_string()];
        for s in &self.chain {
            let i = s.index;
            let prev = format!("L_{}", i - 1);
            let gu = format!("G_u_{i}");
            let gv = format!("G_v_{i}");
            let g = format!("G_{i}");
            entry(e, format!("L_tilde_u_{i}"), s.g_u.l_tilde, &[&prev], "doubling from 2L minimizing G_u");
            entry(e, format!("L_tilde_v_{i}"), s.g_v.l_tilde, &[&prev], "doubling from 2L minimizing G_v");
            entry(e, format!("C1_{i}"), s.g_u.c_lin, &[&prev], "1 - M_u^(L) / M_u^(L_tilde)");
            entry(e, format!("C2_{i}"), s.g_u.c_off, &[&prev], "(R_v,L + max|dW/dv| / M_u^(L_tilde)) L");
            entry(e, format!("C3_{i}"), s.g_v.c_lin, &[&prev], "1 - M_v^(L) / M_v^(L_tilde)");
            entry(e, format!("C4_{i}"), s.g_v.c_off, &[&prev], "L (R_u,L + max|dW/du| / M_v^(L_tilde))");
            entry(e, gu.clone(), s.g_u.g, &["A", &prev, "d"], "max{u_tilde + L, (A + d M C2) / (M C1)}");
            entry(e, gv.clone(), s.g_v.g, &["A", &prev, "d"], "max{v_tilde + L, (A + M C4) / (d M C3)}");
            entry(e, g.clone(), s.g, &[&gu, &gv, "B_K"], "max{2 G_u, 2 G_v, B_K}");
            entry(e, format!("L_{i}"), s.l, &[&g, &prev], "G_i + L_{i-1}");
            g_names.push(g);
        }
        let refs: Vec<&str> = g_names.iter().map(String::as_str).collect();
        entry(e, "C", self.c, &refs, "B_K + sum of G_i (compensated)");
        entry(e, "max_initial_norm", self.max_initial_norm, &[], "initial data");
        entry(e, "C_underbar", self.c_underbar, &["C", "max_initial_norm"], "max{max initial norm, C}");
        entry(e, "M_C_underbar", self.m_c_underbar, &["C_underbar"], "level-line maximization");
        entry(e, "B", self.b, &["M_C_underbar", "n"], "ray scan of {W <= n M_C_underbar}, times safety factor");
        entry(e, "safety_factor", self.safety_factor, &[], "policy");
        m
    }

    pub fn to_flat_json(&self) -> serde_json::Value {
        serde_json::to_value(self.entries()).expect("finite ledger values serialize")
    }

    /// Reads one value from a flat ledger map.
    pub fn flat_value(map: &serde_json::Value, field: &str) -> Option<f64> {
        map.get(field)?.get("value")?.as_f64()
    }
}

/// Stepwise ledger construction with enforced order
/// `F_max → C → C̲ → B`.
#[derive(Clone, Debug)]
pub struct LedgerBuilder {
    llf: Llf,
    cand: LlfCandidate,
    consts: LevelSetConstants,
    n: usize,
    d: f64,
    gamma: f64,
    u0: Vec<f64>,
    v0: Vec<f64>,
    v_cap: f64,
    f_max: Option<FMax>,
    chain: Option<(Vec<ChainStep>, f64)>,
    c_underbar: Option<f64>,
    b: Option<(f64, f64)>,
}

impl LedgerBuilder {
    pub fn new(cand: LlfCandidate, consts: LevelSetConstants, sys: &DiscretizedSystem, v_cap: f64) -> Self {
        Self {
            llf: cand.llf(),
            cand,
            consts,
            n: sys.n(),
            d: sys.d(),
            gamma: sys.gamma(),
            u0: sys.u0().to_vec(),
            v0: sys.v0().to_vec(),
            v_cap,
            f_max: None,
            chain: None,
            c_underbar: None,
            b: None,
        }
    }

    pub fn f_max(&mut self) -> Result<FMax, BoundsError> {
        let f = compute_f_max(&self.llf, self.consts.b_k, self.consts.r_u_bk, self.consts.r_v_bk, self.d)?;
        self.f_max = Some(f);
        Ok(f)
    }

    pub fn c(&mut self) -> Result<f64, BoundsError> {
        let f = self.f_max.ok_or(BoundsError::PipelineOrder {
            field: "C",
            missing: "F_max",
        })?;
        let a = finite("A", None, self.n as f64 * f.f_max)?;
        let (steps, c) = compute_c(&self.llf, &self.cand, self.consts.b_k, a, self.n, self.d, self.v_cap)?;
        self.chain = Some((steps, c));
        Ok(c)
    }

    pub fn c_underbar(&mut self) -> Result<f64, BoundsError> {
        let (_, c) = self.chain.as_ref().ok_or(BoundsError::PipelineOrder {
            field: "C_underbar",
            missing: "C",
        })?;
        let cu = compute_c_underbar(*c, &self.u0, &self.v0);
        self.c_underbar = Some(cu);
        Ok(cu)
    }

    pub fn b(&mut self) -> Result<f64, BoundsError> {
        let cu = self.c_underbar.ok_or(BoundsError::PipelineOrder {
            field: "B",
            missing: "C_underbar",
        })?;
        let (m_c, b) = compute_b(&self.llf, cu, self.n)?;
        self.b = Some((m_c, b));
        Ok(b)
    }

    pub fn finish(self) -> Result<ConstantLedger, BoundsError> {
        let (m_c, b) = self.b.ok_or(BoundsError::PipelineOrder {
            field: "ledger",
            missing: "B",
        })?;
        let f = self.f_max.expect("B implies F_max");
        let (chain, c) = self.chain.expect("B implies C");
        let c_underbar = self.c_underbar.expect("B implies C_underbar");
        Ok(ConstantLedger {
            n: self.n,
            d: self.d,
            gamma: self.gamma,
            k_underbar: self.cand.k_underbar,
            u_underbar: self.cand.u_underbar,
            v_underbar: self.cand.v_underbar,
            k: self.cand.k,
            m_k: self.consts.m_k,
            b_k: self.consts.b_k,
            r_u_bk: self.consts.r_u_bk,
            r_v_bk: self.consts.r_v_bk,
            a: self.n as f64 * f.f_max,
            f_max: f,
            chain,
            c,
            max_initial_norm: compute_c_underbar(0.0, &self.u0, &self.v0),
            c_underbar,
            m_c_underbar: m_c,
            b,
            safety_factor: SAFETY_FACTOR,
            c_underbar_exceeds_k: c_underbar > self.cand.k,
        })
    }

    /// Runs every step in order.
    pub fn run(cand: LlfCandidate, consts: LevelSetConstants, sys: &DiscretizedSystem, v_cap: f64) -> Result<ConstantLedger, BoundsError> {
        let mut b = Self::new(cand, consts, sys, v_cap);
        b.f_max()?;
        b.c()?;
        b.c_underbar()?;
        b.b()?;
        b.finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RationalTermFunction;

    fn sq() -> Llf {
        Llf::new(RationalTermFunction::from_tuples(&[(1.0, 2, 0, 0, 0), (1.0, 0, 2, 0, 0)]).unwrap())
    }

    fn sq_cand() -> LlfCandidate {
        LlfCandidate::new(sq().w().clone(), 1.0, 0.0, 0.0, 1.0).unwrap()
    }

    #[test]
    fn neumaier_recovers_small_terms() {
        let s = neumaier([1e16, 1.0, -1e16, 1.0]);
        assert_eq!(s, 2.0);
    }

    #[test]
    fn c_underbar_cases() {
        assert_eq!(compute_c_underbar(5.0, &[0.0, 0.0], &[0.0, 0.0]), 5.0);
        assert_eq!(compute_c_underbar(5.0, &[0.8, 2.0], &[0.1, 70.0]), 72.0);
    }

    #[test]
    fn g_takes_the_stated_max() {
        assert_eq!(compute_g(1.0, 3.0, 2.0), 6.0);
        assert_eq!(compute_g(1.0, 0.5, 9.0), 9.0);
    }

    #[test]
    fn b_for_quarter_disc() {
        let (m, b) = compute_b(&sq(), 2.0, 1).unwrap();
        assert!((m - 4.0).abs() < 1e-12);
        assert!((b - SAFETY_FACTOR * 2.0 * 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn symmetric_w_gives_symmetric_thresholds() {
        let gu = compute_g_u(&sq(), &sq_cand(), 1.0, 1.0, 1.0, 1e6).unwrap();
        let gv = compute_g_v(&sq(), &sq_cand(), 1.0, 1.0, 1.0, 1e6).unwrap();
        assert!((gu.g - gv.g).abs() <= 1e-9 * gu.g);
        assert!(compute_g_u(&sq(), &sq_cand(), 0.0, 1.0, 1.0, 1e6).is_err());
    }

    #[test]
    fn chain_of_two_compartments_has_one_step() {
        let (steps, c) = compute_c(&sq(), &sq_cand(), 2.0, 1.0, 2, 1.0, 1e6).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(c, 2.0 + steps[0].g);
    }
}
