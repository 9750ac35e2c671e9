use serde::{Deserialize, Serialize};

use super::diffusion::apply_diffusion_into;
use super::rational::RationalTermFunction;
use crate::error::ModelError;

/// Number of geometric samples used for the quasi-positivity check.
pub const QUASI_POSITIVITY_SAMPLES: usize = 10_000;
/// Upper end of the quasi-positivity sampling range.
pub const QUASI_POSITIVITY_CAP: f64 = 1e6;
const QUASI_POSITIVITY_TOL: f64 = 1e-12;

/// Reaction kinetics `(f, g)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReactionPair {
    pub f: RationalTermFunction,
    pub g: RationalTermFunction,
}

impl ReactionPair {
    pub fn new(f: RationalTermFunction, g: RationalTermFunction) -> Self {
        Self { f, g }
    }

    /// Checks `f(0, v) ≥ 0` and `g(u, 0) ≥ 0` on geometric samples in
    /// `[0, 1e6]` and through the exact leading term as the argument grows.
    pub fn check_quasi_positivity(&self) -> Result<(), ModelError> {
        let samples = geometric_samples(QUASI_POSITIVITY_CAP, QUASI_POSITIVITY_SAMPLES);
        for &x in &samples {
            let fv = self.f.eval(0.0, x);
            if !(fv >= -QUASI_POSITIVITY_TOL) {
                return Err(ModelError::QuasiPositivity {
                    which: "f",
                    u: 0.0,
                    v: x,
                    value: fv,
                });
            }
            let gv = self.g.eval(x, 0.0);
            if !(gv >= -QUASI_POSITIVITY_TOL) {
                return Err(ModelError::QuasiPositivity {
                    which: "g",
                    u: x,
                    v: 0.0,
                    value: gv,
                });
            }
        }
        if self.f.tail_in_v(0.0).eventual_sign() < 0 {
            return Err(ModelError::QuasiPositivity {
                which: "f",
                u: 0.0,
                v: f64::INFINITY,
                value: f64::NEG_INFINITY,
            });
        }
        if self.g.tail_in_u(0.0).eventual_sign() < 0 {
            return Err(ModelError::QuasiPositivity {
                which: "g",
                u: f64::INFINITY,
                v: 0.0,
                value: f64::NEG_INFINITY,
            });
        }
        Ok(())
    }
}

/// `count` points in `[0, cap]`: zero followed by a geometric progression from
/// `cap · 1e-12` to `cap`.
pub(crate) fn geometric_samples(cap: f64, count: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(count);
    out.push(0.0);
    let lo = (cap * 1e-12).ln();
    let hi = cap.ln();
    let m = count - 1;
    for k in 0..m {
        out.push((lo + (hi - lo) * k as f64 / (m - 1) as f64).exp());
    }
    out
}

/// Concentrations of both species in every compartment at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub t: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl StateVector {
    pub fn new(t: f64, u: Vec<f64>, v: Vec<f64>) -> Self {
        Self { t, u, v }
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    /// Total species concentration `u_i + v_i` in compartment `i`.
    pub fn norm(&self, i: usize) -> f64 {
        self.u[i] + self.v[i]
    }

    pub fn max_norm(&self) -> f64 {
        (0..self.n()).map(|i| self.norm(i)).fold(0.0, f64::max)
    }
}

/// `n` compartments of width `1/n` on the unit interval with Neumann ends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedSystem {
    n: usize,
    gamma: f64,
    d: f64,
    reactions: ReactionPair,
    u0: Vec<f64>,
    v0: Vec<f64>,
}

impl DiscretizedSystem {
    pub fn new(
        gamma: f64,
        d: f64,
        reactions: ReactionPair,
        u0: Vec<f64>,
        v0: Vec<f64>,
    ) -> Result<Self, ModelError> {
        let n = u0.len();
        if n < 2 {
            return Err(ModelError::InvalidSystem(format!(
                "need at least 2 compartments, got {n}"
            )));
        }
        if v0.len() != n {
            return Err(ModelError::InvalidSystem(format!(
                "u0 has {n} entries but v0 has {}",
                v0.len()
            )));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(ModelError::InvalidSystem(format!("gamma must be > 0, got {gamma}")));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(ModelError::InvalidSystem(format!("d must be > 0, got {d}")));
        }
        if let Some(i) = u0
            .iter()
            .chain(&v0)
            .position(|x| !(x.is_finite() && *x >= 0.0))
        {
            return Err(ModelError::InvalidSystem(format!(
                "initial entry {i} is negative or non-finite"
            )));
        }
        Ok(Self {
            n,
            gamma,
            d,
            reactions,
            u0,
            v0,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Compartment width, always `1/n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `1/h² = n²`, exact.
    pub fn inv_h2(&self) -> f64 {
        (self.n * self.n) as f64
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn reactions(&self) -> &ReactionPair {
        &self.reactions
    }

    pub fn u0(&self) -> &[f64] {
        &self.u0
    }

    pub fn v0(&self) -> &[f64] {
        &self.v0
    }

    pub fn initial_state(&self) -> StateVector {
        StateVector::new(0.0, self.u0.clone(), self.v0.clone())
    }

    /// Largest initial total concentration over compartments.
    pub fn max_initial_norm(&self) -> f64 {
        self.u0
            .iter()
            .zip(&self.v0)
            .map(|(u, v)| u + v)
            .fold(0.0, f64::max)
    }

    /// Same system with different initial data.
    pub fn with_initial(&self, u0: Vec<f64>, v0: Vec<f64>) -> Result<Self, ModelError> {
        Self::new(self.gamma, self.d, self.reactions.clone(), u0, v0)
    }

    /// `du/dt = γ f + (1/h²) D u`, `dv/dt = γ g + (d/h²) D v`.
    pub fn rhs(&self, state: &StateVector) -> Result<(Vec<f64>, Vec<f64>), ModelError> {
        let mut du = vec![0.0; self.n];
        let mut dv = vec![0.0; self.n];
        self.rhs_into(&state.u, &state.v, &mut du, &mut dv)?;
        Ok((du, dv))
    }

    pub fn rhs_into(
        &self,
        u: &[f64],
        v: &[f64],
        du: &mut [f64],
        dv: &mut [f64],
    ) -> Result<(), ModelError> {
        if u.len() != self.n || v.len() != self.n || du.len() != self.n || dv.len() != self.n {
            return Err(ModelError::InvalidSystem(format!(
                "state vectors must have length {}",
                self.n
            )));
        }
        apply_diffusion_into(u, du)?;
        apply_diffusion_into(v, dv)?;
        let ku = self.inv_h2();
        let kv = self.d * ku;
        for i in 0..self.n {
            du[i] = self.gamma * self.reactions.f.eval(u[i], v[i]) + ku * du[i];
            dv[i] = self.gamma * self.reactions.g.eval(u[i], v[i]) + kv * dv[i];
            if !(du[i].is_finite() && dv[i].is_finite()) {
                return Err(ModelError::NonFinite { compartment: i });
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn width_is_derived_from_n() {
        let sys = catalog::schnakenberg_system(&catalog::SchnakenbergParams::default()).unwrap();
        assert_eq!(sys.h() * sys.n() as f64, 1.0);
        assert_eq!(sys.inv_h2(), 4.0);
    }

    #[test]
    fn rejects_bad_systems() {
        let r = catalog::schnakenberg_reactions(0.1, 1.0).unwrap();
        assert!(DiscretizedSystem::new(1.0, 1.0, r.clone(), vec![1.0], vec![1.0]).is_err());
        assert!(DiscretizedSystem::new(1.0, 1.0, r.clone(), vec![1.0, -1.0], vec![1.0, 1.0]).is_err());
        assert!(DiscretizedSystem::new(0.0, 1.0, r.clone(), vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(DiscretizedSystem::new(1.0, 1.0, r, vec![1.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn quasi_positivity_of_catalog() {
        catalog::schnakenberg_reactions(0.1, 1.0)
            .unwrap()
            .check_quasi_positivity()
            .unwrap();
        catalog::mutualism_reactions(&catalog::MutualismParams::default())
            .unwrap()
            .check_quasi_positivity()
            .unwrap();
        catalog::weinberger_reactions(10.0)
            .unwrap()
            .check_quasi_positivity()
            .unwrap();
    }

    #[test]
    fn quasi_positivity_violation_is_reported() {
        // f(0, v) = -v
        let f = RationalTermFunction::from_tuples(&[(-1.0, 0, 1, 0, 0)]).unwrap();
        let pair = ReactionPair::new(f, RationalTermFunction::zero());
        assert!(matches!(
            pair.check_quasi_positivity(),
            Err(ModelError::QuasiPositivity { which: "f", .. })
        ));
    }

    #[test]
    fn non_finite_rhs_names_compartment() {
        let f = RationalTermFunction::from_tuples(&[(1.0, 300, 0, 0, 0)]).unwrap();
        let pair = ReactionPair::new(f, RationalTermFunction::zero());
        let sys = DiscretizedSystem::new(1.0, 1.0, pair, vec![0.0, 1e10], vec![0.0, 0.0]).unwrap();
        assert_eq!(
            sys.rhs(&sys.initial_state()),
            Err(ModelError::NonFinite { compartment: 1 })
        );
    }
}
