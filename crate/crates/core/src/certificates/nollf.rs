use serde::{Deserialize, Serialize};

use crate::catalog::MutualismParams;
use crate::model::{Asymptote, ReactionPair};

/// Fixed coordinates probed by the ratio test.
const PROBES: [f64; 9] = [0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoLlfCondition {
    /// `liminf_{u→∞} f > 0` and `|f/g| → ∞` at some fixed `v`.
    RatioDivergenceU,
    /// `liminf_{v→∞} g > 0` and `|g/f| → ∞` at some fixed `u`.
    RatioDivergenceV,
    /// Positive quadratic growth of `f` along `v = (b₂/c₂) u`.
    MutualismRay,
}

/// Evidence that no Lyapunov-like function exists for a reaction pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoLlfCertificate {
    pub condition: NoLlfCondition,
    /// Fixed coordinate for the ratio tests, ray slope `v/u` for the mutualism ray.
    pub witness: f64,
    /// Leading behaviour of the growing reaction term.
    pub growth: Asymptote,
    /// Leading behaviour of the ratio, when defined.
    pub ratio: Option<Asymptote>,
}

fn diverges(growth: &Asymptote, other: &Asymptote) -> Option<Asymptote> {
    // liminf > 0 needs a positive coefficient without decay
    if !(growth.coef > 0.0 && growth.exponent >= 0) {
        return None;
    }
    let r = growth.ratio(other)?;
    (r.exponent > 0).then_some(r)
}

/// Checks the two ratio conditions on each probe coordinate using exact
/// leading terms.
pub fn no_llf_ratio_test(reactions: &ReactionPair) -> Option<NoLlfCertificate> {
    for &v in &PROBES {
        let f = reactions.f.tail_in_u(v);
        let g = reactions.g.tail_in_u(v);
        if let Some(r) = diverges(&f, &g) {
            return Some(NoLlfCertificate {
                condition: NoLlfCondition::RatioDivergenceU,
                witness: v,
                growth: f,
                ratio: Some(r),
            });
        }
    }
    for &u in &PROBES {
        let f = reactions.f.tail_in_v(u);
        let g = reactions.g.tail_in_v(u);
        if let Some(r) = diverges(&g, &f) {
            return Some(NoLlfCertificate {
                condition: NoLlfCondition::RatioDivergenceV,
                witness: u,
                growth: g,
                ratio: Some(r),
            });
        }
    }
    None
}

/// Fires iff `b₂c₁ > b₁c₂`; along `v = (b₂/c₂) u` then
/// `f = u(a₁ + (c₁b₂/c₂ − b₁) u)` grows quadratically.
pub fn no_llf_mutualism_test(p: &MutualismParams) -> Option<NoLlfCertificate> {
    if !(p.b2 * p.c1 > p.b1 * p.c2) || !(p.c2 > 0.0) {
        return None;
    }
    let slope = p.b2 / p.c2;
    Some(NoLlfCertificate {
        condition: NoLlfCondition::MutualismRay,
        witness: slope,
        growth: Asymptote {
            exponent: 2,
            coef: p.c1 * slope - p.b1,
        },
        ratio: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn weinberger_fires_at_fixed_v() {
        let c = no_llf_ratio_test(&catalog::weinberger_reactions(10.0).unwrap()).unwrap();
        assert_eq!(c.condition, NoLlfCondition::RatioDivergenceU);
        // v = 0 gives f = -δu, so the first witness is positive
        assert!(c.witness > 0.0);
        assert_eq!(c.growth.exponent, 3);
        assert_eq!(c.ratio.unwrap().exponent, 1);
    }

    #[test]
    fn schnakenberg_and_identical_pairs_do_not_fire() {
        assert!(no_llf_ratio_test(&catalog::schnakenberg_reactions(0.1, 1.0).unwrap()).is_none());
        let f = catalog::weinberger_reactions(10.0).unwrap().f;
        assert!(no_llf_ratio_test(&ReactionPair::new(f.clone(), f)).is_none());
    }

    #[test]
    fn mutualism_condition_is_strict() {
        let mut p = MutualismParams::default();
        let c = no_llf_mutualism_test(&p).unwrap();
        assert_eq!(c.witness, 2.0);
        assert_eq!(c.growth.coef, 1.0);
        p.b2 = 1.0;
        assert!(no_llf_mutualism_test(&p).is_none());
        p.b2 = 0.5;
        assert!(no_llf_mutualism_test(&p).is_none());
    }
}
