//! Rational-term functions on the nonnegative quadrant.
//!
//! A function is a finite sum of terms `coef · u^p · v^q · (u+1)^(-r) · (v+1)^(-s)`.
//! The family is closed under differentiation, addition and multiplication, and
//! the restriction of any member to a line `(u0 + a·t, v0 + b·t)` is a univariate
//! rational function of `t`. That last fact gives exact leading-order behaviour
//! as `t → ∞`, which is what the tail checks in [`crate::llf`] rely on.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ModelError;

/// One term `coef · u^p · v^q / ((u+1)^r (v+1)^s)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub coef: f64,
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub s: u32,
}

impl Term {
    pub const fn new(coef: f64, p: u32, q: u32, r: u32, s: u32) -> Self {
        Self { coef, p, q, r, s }
    }

    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        let mut x = self.coef;
        if self.p > 0 {
            x *= u.powi(self.p as i32);
        }
        if self.q > 0 {
            x *= v.powi(self.q as i32);
        }
        if self.r > 0 {
            x /= (u + 1.0).powi(self.r as i32);
        }
        if self.s > 0 {
            x /= (v + 1.0).powi(self.s as i32);
        }
        x
    }

    fn exponents(&self) -> (u32, u32, u32, u32) {
        (self.p, self.q, self.r, self.s)
    }

    fn depends_on_u(&self) -> bool {
        self.p > 0 || self.r > 0
    }

    fn depends_on_v(&self) -> bool {
        self.q > 0 || self.s > 0
    }
}

/// Sum of [`Term`]s kept in canonical form: like monomials merged, zero
/// coefficients dropped, terms sorted by exponent tuple.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RationalTermFunction {
    terms: Vec<Term>,
}

impl RationalTermFunction {
    pub fn new(terms: impl IntoIterator<Item = Term>) -> Result<Self, ModelError> {
        let terms: Vec<Term> = terms.into_iter().collect();
        if let Some(t) = terms.iter().find(|t| !t.coef.is_finite()) {
            return Err(ModelError::InvalidTerm(format!(
                "non-finite coefficient {} on u^{} v^{} (u+1)^-{} (v+1)^-{}",
                t.coef, t.p, t.q, t.r, t.s
            )));
        }
        Ok(Self::canonical(terms))
    }

    /// Builds from `(coef, p, q, r, s)` tuples.
    pub fn from_tuples(tuples: &[(f64, u32, u32, u32, u32)]) -> Result<Self, ModelError> {
        Self::new(tuples.iter().map(|&(c, p, q, r, s)| Term::new(c, p, q, r, s)))
    }

    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::canonical(vec![Term::new(c, 0, 0, 0, 0)])
    }

    fn canonical(mut terms: Vec<Term>) -> Self {
        terms.sort_by_key(Term::exponents);
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exponents() == t.exponents() => last.coef += t.coef,
                _ => merged.push(t),
            }
        }
        merged.retain(|t| t.coef != 0.0);
        Self { terms: merged }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    #[inline]
    pub fn eval(&self, u: f64, v: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(u, v)).sum()
    }

    /// `F(a) − F(b)` summed term by term, so shared constant parts cancel exactly.
    pub fn eval_diff(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        self.terms.iter().map(|t| t.eval(a.0, a.1) - t.eval(b.0, b.1)).sum()
    }

    /// `(∂_u F, ∂_v F)` from the symbolic derivatives.
    pub fn grad(&self, u: f64, v: f64) -> (f64, f64) {
        (self.d_u().eval(u, v), self.d_v().eval(u, v))
    }

    /// `(∂_uu F, ∂_uv F, ∂_vv F)` from the symbolic derivatives.
    pub fn hessian(&self, u: f64, v: f64) -> (f64, f64, f64) {
        let fu = self.d_u();
        let fv = self.d_v();
        (fu.d_u().eval(u, v), fu.d_v().eval(u, v), fv.d_v().eval(u, v))
    }

    pub fn d_u(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.p > 0 {
                out.push(Term::new(t.coef * t.p as f64, t.p - 1, t.q, t.r, t.s));
            }
            if t.r > 0 {
                out.push(Term::new(-t.coef * t.r as f64, t.p, t.q, t.r + 1, t.s));
            }
        }
        Self::canonical(out)
    }

    pub fn d_v(&self) -> Self {
        let mut out = Vec::with_capacity(2 * self.terms.len());
        for t in &self.terms {
            if t.q > 0 {
                out.push(Term::new(t.coef * t.q as f64, t.p, t.q - 1, t.r, t.s));
            }
            if t.s > 0 {
                out.push(Term::new(-t.coef * t.s as f64, t.p, t.q, t.r, t.s + 1));
            }
        }
        Self::canonical(out)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self::canonical(
            self.terms
                .iter()
                .map(|t| Term { coef: t.coef * k, ..*t })
                .collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::canonical(self.terms.iter().chain(&other.terms).copied().collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() * other.terms.len());
        for a in &self.terms {
            for b in &other.terms {
                out.push(Term::new(
                    a.coef * b.coef,
                    a.p + b.p,
                    a.q + b.q,
                    a.r + b.r,
                    a.s + b.s,
                ));
            }
        }
        Self::canonical(out)
    }

    pub fn depends_on_u(&self) -> bool {
        self.terms.iter().any(Term::depends_on_u)
    }

    pub fn depends_on_v(&self) -> bool {
        self.terms.iter().any(Term::depends_on_v)
    }

    /// True when no term mixes `u` and `v`, i.e. `W = w1(u) + w2(v)`.
    pub fn is_separable(&self) -> bool {
        !self
            .terms
            .iter()
            .any(|t| t.depends_on_u() && t.depends_on_v())
    }

    /// Splits a separable function into `(w1(u), w2(v))`; constants go to `w1`.
    pub fn split_separable(&self) -> Option<(Self, Self)> {
        if !self.is_separable() {
            return None;
        }
        let (w2, w1): (Vec<Term>, Vec<Term>) =
            self.terms.iter().partition(|t| t.depends_on_v());
        Some((Self::canonical(w1), Self::canonical(w2)))
    }

    /// Restriction to the line `u = u0 + a·t`, `v = v0 + b·t` as a ratio of
    /// polynomials in `t`. Requires `u0, v0 ≥ 0` and `a, b ≥ 0`.
    pub fn along_line(&self, u0: f64, a: f64, v0: f64, b: f64) -> LineRestriction {
        let r_max = self.terms.iter().map(|t| t.r).max().unwrap_or(0);
        let s_max = self.terms.iter().map(|t| t.s).max().unwrap_or(0);
        let lin_u = Poly::linear(u0, a);
        let lin_v = Poly::linear(v0, b);
        let lin_u1 = Poly::linear(u0 + 1.0, a);
        let lin_v1 = Poly::linear(v0 + 1.0, b);
        let max_p = self.terms.iter().map(|t| t.p).max().unwrap_or(0);
        let max_q = self.terms.iter().map(|t| t.q).max().unwrap_or(0);
        let pow_u = lin_u.powers(max_p);
        let pow_v = lin_v.powers(max_q);
        let pow_u1 = lin_u1.powers(r_max);
        let pow_v1 = lin_v1.powers(s_max);

        let mut num = Poly::zero();
        for t in &self.terms {
            let mut term = Poly::constant(t.coef);
            term = term.mul(&pow_u[t.p as usize]);
            term = term.mul(&pow_v[t.q as usize]);
            term = term.mul(&pow_u1[(r_max - t.r) as usize]);
            term = term.mul(&pow_v1[(s_max - t.s) as usize]);
            num.add_assign(&term);
        }
        let den = pow_u1[r_max as usize].mul(&pow_v1[s_max as usize]);
        LineRestriction { num, den }
    }

    /// Leading behaviour of `u ↦ F(u, v)` as `u → ∞`.
    pub fn tail_in_u(&self, v: f64) -> Asymptote {
        self.along_line(0.0, 1.0, v, 0.0).asymptote()
    }

    /// Leading behaviour of `v ↦ F(u, v)` as `v → ∞`.
    pub fn tail_in_v(&self, u: f64) -> Asymptote {
        self.along_line(u, 0.0, 0.0, 1.0).asymptote()
    }

    /// Leading behaviour along the ray `t·(a, b)` from the origin.
    pub fn tail_on_ray(&self, a: f64, b: f64) -> Asymptote {
        self.along_line(0.0, a, 0.0, b).asymptote()
    }
}

impl fmt::Display for RationalTermFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let sign = if t.coef < 0.0 { "-" } else { "+" };
            if i == 0 {
                if t.coef < 0.0 {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            write!(f, "{}", t.coef.abs())?;
            for (name, e) in [("u", t.p), ("v", t.q)] {
                match e {
                    0 => {}
                    1 => write!(f, "·{name}")?,
                    _ => write!(f, "·{name}^{e}")?,
                }
            }
            for (name, e) in [("(u+1)", t.r), ("(v+1)", t.s)] {
                if e > 0 {
                    write!(f, "/{name}^{e}")?;
                }
            }
        }
        Ok(())
    }
}

/// Relative size below which a polynomial coefficient is treated as an exact
/// cancellation.
const CANCEL_TOL: f64 = 1e-10;

/// Polynomial in `t` that tracks, per coefficient, the sum of absolute values
/// of the contributions that produced it. A coefficient much smaller than its
/// magnitude is a cancellation, not a genuine leading term.
#[derive(Clone, Debug)]
pub(crate) struct Poly {
    c: Vec<f64>,
    mag: Vec<f64>,
}

impl Poly {
    fn zero() -> Self {
        Self {
            c: Vec::new(),
            mag: Vec::new(),
        }
    }

    fn constant(x: f64) -> Self {
        Self {
            c: vec![x],
            mag: vec![x.abs()],
        }
    }

    fn linear(c0: f64, c1: f64) -> Self {
        Self {
            c: vec![c0, c1],
            mag: vec![c0.abs(), c1.abs()],
        }
    }

    fn powers(&self, k: u32) -> Vec<Poly> {
        let mut out = vec![Poly::constant(1.0)];
        for i in 0..k as usize {
            let next = out[i].mul(self);
            out.push(next);
        }
        out
    }

    fn mul(&self, other: &Self) -> Self {
        if self.c.is_empty() || other.c.is_empty() {
            return Self::zero();
        }
        let len = self.c.len() + other.c.len() - 1;
        let mut c = vec![0.0; len];
        let mut mag = vec![0.0; len];
        for (i, (&a, &ma)) in self.c.iter().zip(&self.mag).enumerate() {
            for (j, (&b, &mb)) in other.c.iter().zip(&other.mag).enumerate() {
                c[i + j] += a * b;
                mag[i + j] += ma * mb;
            }
        }
        Self { c, mag }
    }

    fn add_assign(&mut self, other: &Self) {
        if other.c.len() > self.c.len() {
            self.c.resize(other.c.len(), 0.0);
            self.mag.resize(other.c.len(), 0.0);
        }
        for (i, (&b, &mb)) in other.c.iter().zip(&other.mag).enumerate() {
            self.c[i] += b;
            self.mag[i] += mb;
        }
    }

    /// Highest-degree coefficient that survives cancellation.
    fn leading(&self) -> Option<(usize, f64)> {
        (0..self.c.len()).rev().find_map(|k| {
            let (c, m) = (self.c[k], self.mag[k]);
            (m > 0.0 && c.abs() > CANCEL_TOL * m).then_some((k, c))
        })
    }
}

/// `F(u0 + a t, v0 + b t) = num(t) / den(t)`.
#[derive(Clone, Debug)]
pub struct LineRestriction {
    num: Poly,
    den: Poly,
}

impl LineRestriction {
    pub fn asymptote(&self) -> Asymptote {
        let (dn, cn) = match self.num.leading() {
            Some(x) => x,
            None => return Asymptote::ZERO,
        };
        let (dd, cd) = self
            .den
            .leading()
            .expect("denominator is a product of nonzero linear factors");
        Asymptote {
            exponent: dn as i32 - dd as i32,
            coef: cn / cd,
        }
    }
}

/// `F(t) ~ coef · t^exponent` as `t → ∞`; `coef == 0` means identically zero.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub exponent: i32,
    pub coef: f64,
}

impl Asymptote {
    pub const ZERO: Asymptote = Asymptote {
        exponent: 0,
        coef: 0.0,
    };

    pub fn is_zero(&self) -> bool {
        self.coef == 0.0
    }

    pub fn limit(&self) -> Limit {
        if self.is_zero() {
            return Limit::Finite(0.0);
        }
        match self.exponent.cmp(&0) {
            Ordering::Greater if self.coef > 0.0 => Limit::PosInf,
            Ordering::Greater => Limit::NegInf,
            Ordering::Equal => Limit::Finite(self.coef),
            Ordering::Less => Limit::Finite(0.0),
        }
    }

    /// Eventual sign of the function: `1`, `-1`, or `0` when identically zero.
    pub fn eventual_sign(&self) -> i32 {
        if self.coef > 0.0 {
            1
        } else if self.coef < 0.0 {
            -1
        } else {
            0
        }
    }

    /// Asymptote of `self / other`; `None` when `other` is identically zero.
    pub fn ratio(&self, other: &Asymptote) -> Option<Asymptote> {
        if other.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Asymptote::ZERO);
        }
        Some(Asymptote {
            exponent: self.exponent - other.exponent,
            coef: self.coef / other.coef,
        })
    }
}

/// Limit value that may be infinite.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Limit {
    Finite(f64),
    PosInf,
    NegInf,
}

impl Limit {
    pub fn is_finite(&self) -> bool {
        matches!(self, Limit::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Limit::Finite(x) => Some(x),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> f64 {
        match *self {
            Limit::Finite(x) => x,
            Limit::PosInf => f64::INFINITY,
            Limit::NegInf => f64::NEG_INFINITY,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_llf(c: f64) -> RationalTermFunction {
        RationalTermFunction::from_tuples(&[
            (1.0, 1, 0, 0, 0),
            (2.0, 0, 1, 0, 0),
            (c, 0, 0, 1, 0),
            (1.0, 0, 0, 0, 1),
        ])
        .unwrap()
    }

    #[test]
    fn example_llf_at_origin() {
        assert_eq!(example_llf(43.0).eval(0.0, 0.0), 44.0);
    }

    #[test]
    fn derivative_of_example_llf_tends_to_one() {
        let wu = example_llf(43.0).d_u();
        let u = 3.0;
        assert!((wu.eval(u, 7.0) - (1.0 - 43.0 / 16.0)).abs() < 1e-14);
        assert_eq!(wu.tail_in_u(0.0).limit(), Limit::Finite(1.0));
        assert_eq!(example_llf(43.0).d_v().tail_in_v(5.0).limit(), Limit::Finite(2.0));
    }

    #[test]
    fn like_terms_merge_and_cancel() {
        let f = RationalTermFunction::from_tuples(&[(1.0, 2, 0, 0, 0), (-1.0, 2, 0, 0, 0)]).unwrap();
        assert!(f.is_zero());
        assert_eq!(f.tail_in_u(1.0), Asymptote::ZERO);
    }

    #[test]
    fn cancellation_between_distinct_terms_is_detected() {
        // u/(u+1) - 1 = -1/(u+1)
        let f = RationalTermFunction::from_tuples(&[(1.0, 1, 0, 1, 0), (-1.0, 0, 0, 0, 0)]).unwrap();
        let a = f.tail_in_u(0.0);
        assert_eq!(a.exponent, -1);
        assert!((a.coef + 1.0).abs() < 1e-14);
    }

    #[test]
    fn ray_tail_of_bounded_function_is_finite() {
        let f = RationalTermFunction::from_tuples(&[(1.0, 0, 0, 1, 0), (1.0, 0, 0, 0, 1)]).unwrap();
        assert_eq!(f.tail_on_ray(1.0, 0.0).limit(), Limit::Finite(1.0));
        assert_eq!(f.tail_on_ray(0.0, 1.0).limit(), Limit::Finite(1.0));
        assert_eq!(f.tail_on_ray(0.6, 0.8).limit(), Limit::Finite(0.0));
    }

    #[test]
    fn rejects_non_finite_coefficients() {
        assert!(RationalTermFunction::from_tuples(&[(f64::NAN, 0, 0, 0, 0)]).is_err());
    }

    #[test]
    fn separability() {
        assert!(example_llf(1.0).is_separable());
        let (w1, w2) = example_llf(2.0).split_separable().unwrap();
        assert!(!w1.depends_on_v() && !w2.depends_on_u());
        let cross = RationalTermFunction::from_tuples(&[(1.0, 1, 1, 0, 0)]).unwrap();
        assert!(!cross.is_separable());
    }
}
