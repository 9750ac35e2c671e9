//! Lyapunov-like function candidates: property checks P1–P5, the secondary
//! constants and the level-set geometry.

mod constants;
mod properties;
pub mod search;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{RationalTermFunction, ReactionPair};

pub use constants::{
    certify, compute_b_k, find_k, find_underbars, level_set_extent, ratio_sup, KConstruction,
    LevelSample, LevelSetConstants, LlfCandidate, LlfCertification, LEVEL_SET_RAYS,
};
pub use properties::{
    check_p1, check_p2, check_p3, check_p4, check_p5, promote_separable, P1Outcome, Promotion,
};
pub use search::{level_line_argmax, level_line_max};

/// Safety factor applied to numerically estimated suprema.
pub const SAFETY_FACTOR: f64 = 1.05;
/// Acceptance tolerance for the orbital derivative in P1.
pub const P1_TOL: f64 = 1e-10;

/// A candidate `W` with its first and second symbolic derivatives cached.
#[derive(Clone, Debug, PartialEq)]
pub struct Llf {
    w: RationalTermFunction,
    wu: RationalTermFunction,
    wv: RationalTermFunction,
    wuu: RationalTermFunction,
    wuv: RationalTermFunction,
    wvv: RationalTermFunction,
}

impl Llf {
    pub fn new(w: RationalTermFunction) -> Self {
        let wu = w.d_u();
        let wv = w.d_v();
        let wuu = wu.d_u();
        let wuv = wu.d_v();
        let wvv = wv.d_v();
        Self {
            w,
            wu,
            wv,
            wuu,
            wuv,
            wvv,
        }
    }

    pub fn w(&self) -> &RationalTermFunction {
        &self.w
    }

    pub fn wu(&self) -> &RationalTermFunction {
        &self.wu
    }

    pub fn wv(&self) -> &RationalTermFunction {
        &self.wv
    }

    pub fn wuu(&self) -> &RationalTermFunction {
        &self.wuu
    }

    pub fn wuv(&self) -> &RationalTermFunction {
        &self.wuv
    }

    pub fn wvv(&self) -> &RationalTermFunction {
        &self.wvv
    }

    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.w.eval(u, v)
    }

    pub fn grad(&self, u: f64, v: f64) -> (f64, f64) {
        (self.wu.eval(u, v), self.wv.eval(u, v))
    }

    /// `(∂_uu W, ∂_uv W, ∂_vv W)`.
    pub fn hessian(&self, u: f64, v: f64) -> (f64, f64, f64) {
        (self.wuu.eval(u, v), self.wuv.eval(u, v), self.wvv.eval(u, v))
    }

    /// `∇W · (f, g)` as a function in the grammar.
    pub fn orbital(&self, reactions: &ReactionPair) -> RationalTermFunction {
        self.wu.mul(&reactions.f).add(&self.wv.mul(&reactions.g))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Property {
    P1,
    P2,
    P3,
    P4,
    P5,
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Verified,
    Refuted,
    Inconclusive,
}

impl Verdict {
    /// Refuted dominates inconclusive, which dominates verified.
    pub fn combine(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Refuted, _) | (_, Refuted) => Refuted,
            (Inconclusive, _) | (_, Inconclusive) => Inconclusive,
            _ => Verified,
        }
    }
}

/// Point at which a property inequality fails; coordinates may be infinite
/// when the failure is in a symbolic limit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub u: f64,
    pub v: f64,
    pub value: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    pub extent: f64,
    pub spacing: f64,
    pub points: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PropertyReport {
    pub property: Property,
    pub verdict: Verdict,
    pub witness: Option<Witness>,
    pub grid: Option<GridMeta>,
    pub detail: String,
}

impl PropertyReport {
    pub(crate) fn verified(property: Property, detail: impl Into<String>) -> Self {
        Self {
            property,
            verdict: Verdict::Verified,
            witness: None,
            grid: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn refuted(property: Property, witness: Witness, detail: impl Into<String>) -> Self {
        Self {
            property,
            verdict: Verdict::Refuted,
            witness: Some(witness),
            grid: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn inconclusive(property: Property, detail: impl Into<String>) -> Self {
        Self {
            property,
            verdict: Verdict::Inconclusive,
            witness: None,
            grid: None,
            detail: detail.into(),
        }
    }

    pub(crate) fn with_grid(mut self, grid: GridMeta) -> Self {
        self.grid = Some(grid);
        self
    }
}

/// Verification grid; `extent: None` selects `3(u̲ + v̲ + K̲ + 10)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSettings {
    pub extent: Option<f64>,
    pub spacing: f64,
    pub v_cap: f64,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            extent: None,
            spacing: 0.01,
            v_cap: 1e6,
        }
    }
}

impl GridSettings {
    pub fn resolve_extent(&self, u_under: f64, v_under: f64, k_under: f64) -> f64 {
        self.extent
            .unwrap_or(3.0 * (u_under + v_under + k_under + 10.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::example_llf;

    #[test]
    fn cached_derivatives_match_grammar() {
        let llf = Llf::new(example_llf(43.0).unwrap());
        let (wu, wv) = llf.grad(1.0, 2.0);
        assert!((wu - (1.0 - 43.0 / 4.0)).abs() < 1e-12);
        assert!((wv - (2.0 - 1.0 / 9.0)).abs() < 1e-12);
        let (uu, uv, vv) = llf.hessian(1.0, 2.0);
        assert!((uu - 86.0 / 8.0).abs() < 1e-12);
        assert_eq!(uv, 0.0);
        assert!((vv - 2.0 / 27.0).abs() < 1e-12);
        assert_eq!(llf.grad(1.0, 2.0), llf.w().grad(1.0, 2.0));
    }

    #[test]
    fn verdict_combination() {
        use Verdict::*;
        assert_eq!(Verified.combine(Inconclusive), Inconclusive);
        assert_eq!(Inconclusive.combine(Refuted), Refuted);
        assert_eq!(Verified.combine(Verified), Verified);
    }
}
