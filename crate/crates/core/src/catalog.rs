//! The three example systems with their reference parameter sets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;
use crate::model::{DiscretizedSystem, RationalTermFunction, ReactionPair};

/// Built-in example systems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Schnakenberg,
    Mutualism,
    Weinberger,
}

impl Example {
    pub const ALL: [Example; 3] = [Example::Schnakenberg, Example::Mutualism, Example::Weinberger];

    pub fn name(&self) -> &'static str {
        match self {
            Example::Schnakenberg => "schnakenberg",
            Example::Mutualism => "mutualism",
            Example::Weinberger => "weinberger",
        }
    }

    /// Parameter names accepted as overrides, in emission order.
    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            Example::Schnakenberg => &["a", "b", "c"],
            Example::Mutualism => &["a1", "a2", "b1", "b2", "c1", "c2"],
            Example::Weinberger => &["delta"],
        }
    }

    pub fn default_params(&self) -> Vec<(&'static str, f64)> {
        match self {
            Example::Schnakenberg => {
                let p = SchnakenbergParams::default();
                vec![("a", p.a), ("b", p.b), ("c", p.c)]
            }
            Example::Mutualism => {
                let p = MutualismParams::default();
                vec![
                    ("a1", p.a1),
                    ("a2", p.a2),
                    ("b1", p.b1),
                    ("b2", p.b2),
                    ("c1", p.c1),
                    ("c2", p.c2),
                ]
            }
            Example::Weinberger => vec![("delta", WeinbergerParams::default().delta)],
        }
    }

    /// `(gamma, d, u0, v0)` used for the reference two-compartment runs.
    pub fn default_setup(&self) -> (f64, f64, Vec<f64>, Vec<f64>) {
        match self {
            Example::Schnakenberg => (150.0, 30.0, vec![0.8, 2.0], vec![0.1, 0.7]),
            Example::Mutualism => (1.0, 1.0, vec![3.0, 0.001], vec![0.001, 3.0]),
            Example::Weinberger => (1.0, 1.0, vec![2.0, 4.0], vec![4.0, 2.0]),
        }
    }

    /// Whether the example is expected to diverge; those runs enable step halving.
    pub fn expects_blowup(&self) -> bool {
        !matches!(self, Example::Schnakenberg)
    }

    /// Reactions for a full parameter map (missing entries fall back to defaults).
    pub fn reactions(&self, params: &[(String, f64)]) -> Result<ReactionPair, ModelError> {
        let get = |name: &str| -> f64 {
            params
                .iter()
                .find(|(k, _)| k == name)
                .map(|(_, v)| *v)
                .unwrap_or_else(|| {
                    self.default_params()
                        .into_iter()
                        .find(|(k, _)| *k == name)
                        .map(|(_, v)| v)
                        .expect("known parameter")
                })
        };
        match self {
            Example::Schnakenberg => schnakenberg_reactions(get("a"), get("b")),
            Example::Mutualism => mutualism_reactions(&MutualismParams {
                a1: get("a1"),
                a2: get("a2"),
                b1: get("b1"),
                b2: get("b2"),
                c1: get("c1"),
                c2: get("c2"),
            }),
            Example::Weinberger => weinberger_reactions(get("delta")),
        }
    }

    /// Candidate Lyapunov-like function shipped with the example, if any.
    pub fn llf_candidate(&self, params: &[(String, f64)]) -> Option<RationalTermFunction> {
        match self {
            Example::Schnakenberg => {
                let c = params
                    .iter()
                    .find(|(k, _)| k == "c")
                    .map(|(_, v)| *v)
                    .unwrap_or(SchnakenbergParams::default().c);
                example_llf(c).ok()
            }
            Example::Mutualism => None,
            Example::Weinberger => Some(weinberger_lyapunov()),
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Example {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Example::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown example `{s}` (expected schnakenberg, mutualism or weinberger)"))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SchnakenbergParams {
    pub a: f64,
    pub b: f64,
    /// LLF parameter; must exceed [`schnakenberg_min_c`].
    pub c: f64,
    pub gamma: f64,
    pub d: f64,
    pub u0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl Default for SchnakenbergParams {
    fn default() -> Self {
        Self {
            a: 0.1,
            b: 1.0,
            c: 43.0,
            gamma: 150.0,
            d: 30.0,
            u0: vec![0.8, 2.0],
            v0: vec![0.1, 0.7],
        }
    }
}

/// `f = a - u + u²v`, `g = b - u²v`.
pub fn schnakenberg_reactions(a: f64, b: f64) -> Result<ReactionPair, ModelError> {
    Ok(ReactionPair::new(
        RationalTermFunction::from_tuples(&[(a, 0, 0, 0, 0), (-1.0, 1, 0, 0, 0), (1.0, 2, 1, 0, 0)])?,
        RationalTermFunction::from_tuples(&[(b, 0, 0, 0, 0), (-1.0, 2, 1, 0, 0)])?,
    ))
}

pub fn schnakenberg_system(p: &SchnakenbergParams) -> Result<DiscretizedSystem, ModelError> {
    DiscretizedSystem::new(
        p.gamma,
        p.d,
        schnakenberg_reactions(p.a, p.b)?,
        p.u0.clone(),
        p.v0.clone(),
    )
}

/// `W = u + 2v + c/(u+1) + 1/(v+1)`.
pub fn example_llf(c: f64) -> Result<RationalTermFunction, ModelError> {
    RationalTermFunction::from_tuples(&[
        (1.0, 1, 0, 0, 0),
        (2.0, 0, 1, 0, 0),
        (c, 0, 0, 1, 0),
        (1.0, 0, 0, 0, 1),
    ])
}

/// Lower bound that `c` must strictly exceed for the example LLF to decrease
/// along the kinetics at large concentration.
pub fn schnakenberg_min_c(a: f64, b: f64) -> f64 {
    ((2.0 * a + 4.0 * b) / a).max(2.0 * a + 4.0 * b)
}

/// Analytic thresholds `(ũ, ṽ)` beyond which `∇W·(f, g) < 0` for the example LLF.
pub fn schnakenberg_thresholds(a: f64, b: f64, c: f64) -> (f64, f64) {
    let u_t = a + 2.0 * b + c / 2.0;
    let v_t = (4.0 * a + 8.0 * b + 2.0 * c)
        .max((6.0 * a + 12.0 * b + c) / (a * c))
        .max((a + 2.0 * b) / c);
    (u_t, v_t)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MutualismParams {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Default for MutualismParams {
    fn default() -> Self {
        Self {
            a1: -1.0,
            a2: 1.0,
            b1: 1.0,
            b2: 2.0,
            c1: 1.0,
            c2: 1.0,
        }
    }
}

/// `f = u(a1 - b1 u + c1 v)`, `g = v(a2 + b2 u - c2 v)`.
pub fn mutualism_reactions(p: &MutualismParams) -> Result<ReactionPair, ModelError> {
    Ok(ReactionPair::new(
        RationalTermFunction::from_tuples(&[(p.a1, 1, 0, 0, 0), (-p.b1, 2, 0, 0, 0), (p.c1, 1, 1, 0, 0)])?,
        RationalTermFunction::from_tuples(&[(p.a2, 0, 1, 0, 0), (p.b2, 1, 1, 0, 0), (-p.c2, 0, 2, 0, 0)])?,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WeinbergerParams {
    pub delta: f64,
}

impl Default for WeinbergerParams {
    fn default() -> Self {
        Self { delta: 10.0 }
    }
}

/// `f = uv(u - v)(u + 1) - δu`, `g = uv(v - u)(v + 1) - δv`, expanded.
pub fn weinberger_reactions(delta: f64) -> Result<ReactionPair, ModelError> {
    Ok(ReactionPair::new(
        RationalTermFunction::from_tuples(&[
            (1.0, 3, 1, 0, 0),
            (1.0, 2, 1, 0, 0),
            (-1.0, 2, 2, 0, 0),
            (-1.0, 1, 2, 0, 0),
            (-delta, 1, 0, 0, 0),
        ])?,
        RationalTermFunction::from_tuples(&[
            (1.0, 1, 3, 0, 0),
            (1.0, 1, 2, 0, 0),
            (-1.0, 2, 2, 0, 0),
            (-1.0, 2, 1, 0, 0),
            (-delta, 0, 1, 0, 0),
        ])?,
    ))
}

/// Global Lyapunov function `V = (u+1)²(v+1)²` of the kinetics, expanded.
pub fn weinberger_lyapunov() -> RationalTermFunction {
    let mut terms = Vec::with_capacity(9);
    let binom = [(1.0, 0u32), (2.0, 1), (1.0, 2)];
    for &(cu, pu) in &binom {
        for &(cv, pv) in &binom {
            terms.push((cu * cv, pu, pv, 0, 0));
        }
    }
    RationalTermFunction::from_tuples(&terms).expect("finite coefficients")
}

/// System for `example` with the given parameter overrides and setup.
pub fn build_system(
    example: Example,
    params: &[(String, f64)],
    gamma: f64,
    d: f64,
    u0: Vec<f64>,
    v0: Vec<f64>,
) -> Result<DiscretizedSystem, ModelError> {
    DiscretizedSystem::new(gamma, d, example.reactions(params)?, u0, v0)
}
