//! Partition of compartments into `Y` / `Y^C`, flux-effect terms and the
//! lemma assertions evaluated at each monitor frame.
//!
//! Compartment and edge indices are zero-based: edge `i` joins compartments
//! `i` and `i + 1`.

use serde::{Deserialize, Serialize};

use crate::bounds::ConstantLedger;
use crate::llf::Llf;
use crate::model::{apply_diffusion, DiscretizedSystem, StateVector};

/// Tolerance of the sign assertions, scaled by `1 + |magnitude of the terms|`.
pub const LEMMA_TOL: f64 = 1e-8;
/// Relative tolerance of the flux decomposition identity.
pub const DECOMPOSITION_TOL: f64 = 1e-10;

/// Membership of each compartment in `Ω_K = {W < M^(K)}` and the edge classes.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSnapshot {
    pub in_y: Vec<bool>,
    /// `n_i = 1_Y(i+1) − 1_Y(i)` for each edge.
    pub edge_n: Vec<i8>,
    pub z_bdy: Vec<usize>,
    pub z_int: Vec<usize>,
}

impl PartitionSnapshot {
    pub fn from_membership(in_y: Vec<bool>) -> Self {
        let edge_n: Vec<i8> = in_y
            .windows(2)
            .map(|w| w[1] as i8 - w[0] as i8)
            .collect();
        let z_bdy = (0..edge_n.len()).filter(|&i| edge_n[i] != 0).collect();
        let z_int = (0..edge_n.len())
            .filter(|&i| edge_n[i] == 0 && !in_y[i])
            .collect();
        Self {
            in_y,
            edge_n,
            z_bdy,
            z_int,
        }
    }

    pub fn n(&self) -> usize {
        self.in_y.len()
    }

    /// `n_t = |Y|`.
    pub fn n_t(&self) -> usize {
        self.in_y.iter().filter(|&&b| b).count()
    }

    pub fn y(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.in_y[i]).collect()
    }

    pub fn y_c(&self) -> Vec<usize> {
        (0..self.n()).filter(|&i| !self.in_y[i]).collect()
    }
}

/// Points with `W = M^(K)` exactly belong to `Y^C`.
pub fn snapshot_partition(state: &StateVector, llf: &Llf, m_k: f64) -> PartitionSnapshot {
    let in_y = state
        .u
        .iter()
        .zip(&state.v)
        .map(|(&u, &v)| llf.eval(u, v) < m_k)
        .collect();
    PartitionSnapshot::from_membership(in_y)
}

/// Flux-effect terms of one state and the two evaluations of `W_{Y^C,D}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluxEffects {
    /// `(edge, F_bdy,i)` for `i ∈ Z_bdy`.
    pub f_bdy: Vec<(usize, f64)>,
    /// `(edge, F_int,i)` for `i ∈ Z_int`.
    pub f_int: Vec<(usize, f64)>,
    /// Sum of the flux-effect terms.
    pub w_yc_d: f64,
    /// `∇_u W_{Y^C} D u + d ∇_v W_{Y^C} D v`.
    pub w_yc_d_direct: f64,
}

impl FluxEffects {
    /// Relative gap between the edge-sum and direct forms.
    pub fn decomposition_gap(&self) -> f64 {
        let scale = self
            .f_bdy
            .iter()
            .chain(&self.f_int)
            .map(|(_, x)| x.abs())
            .sum::<f64>()
            .max(self.w_yc_d_direct.abs())
            .max(f64::MIN_POSITIVE);
        (self.w_yc_d - self.w_yc_d_direct).abs() / scale
    }
}

/// Evaluates `F_bdy,i`, `F_int,i` and `W_{Y^C,D}` with the unscaled operator `D`.
pub fn flux_effects(state: &StateVector, llf: &Llf, partition: &PartitionSnapshot, d: f64) -> FluxEffects {
    let n = state.u.len();
    let (wu, wv): (Vec<f64>, Vec<f64>) = (0..n).map(|i| llf.grad(state.u[i], state.v[i])).unzip();
    let du = |i: usize| state.u[i + 1] - state.u[i];
    let dv = |i: usize| state.v[i + 1] - state.v[i];

    let f_bdy: Vec<(usize, f64)> = partition
        .z_bdy
        .iter()
        .map(|&i| {
            let ni = partition.edge_n[i];
            let k = if ni == 1 { i } else { i + 1 };
            (i, ni as f64 * (wu[k] * du(i) + d * wv[k] * dv(i)))
        })
        .collect();
    let f_int: Vec<(usize, f64)> = partition
        .z_int
        .iter()
        .map(|&i| (i, -((wu[i + 1] - wu[i]) * du(i) + d * (wv[i + 1] - wv[i]) * dv(i))))
        .collect();
    let w_yc_d = f_bdy.iter().chain(&f_int).map(|(_, x)| x).sum();

    let lu = apply_diffusion(&state.u).expect("n >= 2");
    let lv = apply_diffusion(&state.v).expect("n >= 2");
    let w_yc_d_direct = (0..n)
        .filter(|&i| !partition.in_y[i])
        .map(|i| wu[i] * lu[i] + d * wv[i] * lv[i])
        .sum();
    FluxEffects {
        f_bdy,
        f_int,
        w_yc_d,
        w_yc_d_direct,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// From `Ω_K^C` into `Ω_K`.
    In,
    Out,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Crossing {
    pub compartment: usize,
    pub direction: Direction,
}

pub fn detect_crossings(prev: &PartitionSnapshot, next: &PartitionSnapshot) -> Vec<Crossing> {
    prev.in_y
        .iter()
        .zip(&next.in_y)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, (_, &b))| Crossing {
            compartment: i,
            direction: if b { Direction::In } else { Direction::Out },
        })
        .collect()
}

/// Ledger values the monitors compare against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorLimits {
    pub m_k: f64,
    pub f_max: f64,
    pub c_underbar: f64,
    pub b: f64,
}

impl From<&ConstantLedger> for MonitorLimits {
    fn from(l: &ConstantLedger) -> Self {
        Self {
            m_k: l.m_k,
            f_max: l.f_max.f_max,
            c_underbar: l.c_underbar,
            b: l.b,
        }
    }
}

/// LLF and ledger values evaluated along a trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Monitor {
    pub llf: Llf,
    pub limits: MonitorLimits,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonitorFrame {
    pub t: f64,
    /// System LLF `Σ_i W(u_i, v_i)`.
    pub w_n: f64,
    pub w_yc: f64,
    pub w_yc_r: f64,
    pub w_yc_d: f64,
    pub w_yc_d_direct: f64,
    /// `dW_{Y^C}/dt = γ W_{Y^C,R} + W_{Y^C,D}/h²` along the scaled system.
    pub dw_yc_dt: f64,
    pub f_bdy: Vec<(usize, f64)>,
    pub f_int: Vec<(usize, f64)>,
    /// `𝒲 = n_t M^(K) + W_{Y^C}`.
    pub mathcal_w: f64,
    pub max_norm: f64,
    pub n_t: usize,
    pub partition: PartitionSnapshot,
    /// Membership changes since the previous frame.
    pub crossings: Vec<Crossing>,
}

impl Monitor {
    pub fn new(llf: Llf, limits: MonitorLimits) -> Self {
        Self { llf, limits }
    }

    pub fn frame(&self, sys: &DiscretizedSystem, state: &StateVector, prev: Option<&MonitorFrame>) -> MonitorFrame {
        let partition = snapshot_partition(state, &self.llf, self.limits.m_k);
        let fx = flux_effects(state, &self.llf, &partition, sys.d());
        let r = sys.reactions();
        let (mut w_n, mut w_yc, mut w_yc_r) = (0.0, 0.0, 0.0);
        for i in 0..state.u.len() {
            let (u, v) = (state.u[i], state.v[i]);
            let w = self.llf.eval(u, v);
            w_n += w;
            if !partition.in_y[i] {
                let (wu, wv) = self.llf.grad(u, v);
                w_yc += w;
                w_yc_r += wu * r.f.eval(u, v) + wv * r.g.eval(u, v);
            }
        }
        let crossings = prev
            .map(|p| detect_crossings(&p.partition, &partition))
            .unwrap_or_default();
        let n_t = partition.n_t();
        MonitorFrame {
            t: state.t,
            w_n,
            w_yc,
            w_yc_r,
            w_yc_d: fx.w_yc_d,
            w_yc_d_direct: fx.w_yc_d_direct,
            dw_yc_dt: sys.gamma() * w_yc_r + sys.inv_h2() * fx.w_yc_d,
            f_bdy: fx.f_bdy,
            f_int: fx.f_int,
            mathcal_w: n_t as f64 * self.limits.m_k + w_yc,
            max_norm: state.max_norm(),
            n_t,
            partition,
            crossings,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaId {
    /// `W_{Y^C,D} ≤ 0` once a compartment exceeds `C̲`.
    DiffusiveNonPositive,
    /// `dW_{Y^C}/dt ≤ 0` once a compartment exceeds `C̲`.
    EvolutionNonIncreasing,
    /// `𝒲` non-increasing between frames above `C̲` without crossings.
    SystemBoundMonotone,
    /// `F_bdy,i ≤ F_max`.
    BoundaryFlux,
    /// `F_int,i ≤ 0`.
    InteriorFlux,
    /// `W_N ≤ 𝒲`.
    SystemBound,
    /// Edge-sum and direct forms of `W_{Y^C,D}` agree.
    Decomposition,
    /// `max_i ‖(u_i, v_i)‖ ≤ B`.
    TrajectoryBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub lemma: LemmaId,
    pub t: f64,
    /// Amount by which the assertion failed.
    pub magnitude: f64,
}

fn tol(scale: f64) -> f64 {
    LEMMA_TOL * (1.0 + scale.abs())
}

/// Checks every lemma against `frame`; never aborts, only reports.
pub fn assert_lemmas(frame: &MonitorFrame, prev: Option<&MonitorFrame>, limits: &MonitorLimits) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut check = |lemma: LemmaId, excess: f64, scale: f64| {
        if excess > tol(scale) {
            out.push(Violation {
                lemma,
                t: frame.t,
                magnitude: excess,
            });
        }
    };
    let flux_scale: f64 = frame.f_bdy.iter().chain(&frame.f_int).map(|(_, x)| x.abs()).sum();
    let above = frame.max_norm >= limits.c_underbar;
    if above {
        check(LemmaId::DiffusiveNonPositive, frame.w_yc_d, flux_scale);
        check(LemmaId::EvolutionNonIncreasing, frame.dw_yc_dt, frame.dw_yc_dt);
        if let Some(p) = prev {
            if p.max_norm >= limits.c_underbar && frame.crossings.is_empty() {
                check(LemmaId::SystemBoundMonotone, frame.mathcal_w - p.mathcal_w, p.mathcal_w);
            }
        }
    }
    for &(_, f) in &frame.f_bdy {
        check(LemmaId::BoundaryFlux, f - limits.f_max, limits.f_max);
    }
    for &(_, f) in &frame.f_int {
        check(LemmaId::InteriorFlux, f, f);
    }
    check(LemmaId::SystemBound, frame.w_n - frame.mathcal_w, frame.mathcal_w);
    let gap = (frame.w_yc_d - frame.w_yc_d_direct).abs();
    let scale = flux_scale.max(frame.w_yc_d_direct.abs());
    if gap > DECOMPOSITION_TOL * scale.max(f64::MIN_POSITIVE) && gap > f64::EPSILON {
        out.push(Violation {
            lemma: LemmaId::Decomposition,
            t: frame.t,
            magnitude: gap,
        });
    }
    if frame.max_norm > limits.b {
        out.push(Violation {
            lemma: LemmaId::TrajectoryBound,
            t: frame.t,
            magnitude: frame.max_norm - limits.b,
        });
    }
    out
}
