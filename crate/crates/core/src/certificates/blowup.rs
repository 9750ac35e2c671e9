use serde::{Deserialize, Serialize};

use crate::catalog::weinberger_reactions;
use crate::error::CertificateError;
use crate::model::DiscretizedSystem;
use crate::sim::{integrate_ode, IntegratorSettings, OdeRun, OdeSystem};

/// Reference value of the admissible `δ` bound, reported next to the recomputed one.
pub const REFERENCE_DELTA_BOUND: f64 = 0.13;
const EPS_MARGIN: f64 = 1e-6;
const GRONWALL_TOL: f64 = 1e-8;

/// Symmetric two-compartment reduction of the Weinberger system with
/// `γ = d = 1`: `u = u₁ = v₂`, `v = u₂ = v₁`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReducedSystem {
    pub delta: f64,
    pub u0: f64,
    pub v0: f64,
}

impl ReducedSystem {
    pub fn new(delta: f64, u0: f64, v0: f64) -> Self {
        Self { delta, u0, v0 }
    }
}

impl OdeSystem for ReducedSystem {
    fn dim(&self) -> usize {
        2
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) -> bool {
        let (u, v) = (x[0], x[1]);
        let uv = u * v;
        dx[0] = uv * (u - v) * (u + 1.0) - self.delta * u + 4.0 * (v - u);
        dx[1] = uv * (v - u) * (v + 1.0) - self.delta * v + 4.0 * (u - v);
        dx[0].is_finite() && dx[1].is_finite()
    }

    fn size(&self, x: &[f64]) -> f64 {
        x[0] + x[1]
    }
}

/// Reduces a Weinberger system with symmetric initial data to [`ReducedSystem`].
pub fn reduce_symmetric(sys: &DiscretizedSystem) -> Result<ReducedSystem, CertificateError> {
    let na = |m: String| Err(CertificateError::ReductionNotApplicable(m));
    if sys.n() != 2 {
        return na(format!("needs n = 2, got n = {}", sys.n()));
    }
    if sys.gamma() != 1.0 || sys.d() != 1.0 {
        return na(format!("needs γ = d = 1, got γ = {}, d = {}", sys.gamma(), sys.d()));
    }
    let (u0, v0) = (sys.u0(), sys.v0());
    if u0[0] != v0[1] || u0[1] != v0[0] {
        return na(format!("initial data {u0:?}, {v0:?} is not of the form u₁ = v₂, u₂ = v₁"));
    }
    let r = sys.reactions();
    let delta = -r
        .f
        .terms()
        .iter()
        .filter(|t| (t.p, t.q, t.r, t.s) == (1, 0, 0, 0))
        .map(|t| t.coef)
        .sum::<f64>();
    let w = weinberger_reactions(delta).map_err(|e| CertificateError::ReductionNotApplicable(e.to_string()))?;
    let probes = [0.0, 0.5, 1.0, 2.0, 7.0];
    for &u in &probes {
        for &v in &probes {
            let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()));
            if !close(r.f.eval(u, v), w.f.eval(u, v)) || !close(r.g.eval(u, v), w.g.eval(u, v)) {
                return na("reactions are not of Weinberger form".into());
            }
        }
    }
    Ok(ReducedSystem::new(delta, u0[0], u0[1]))
}

/// `h(u, v) = uv(u + v + 2) − (8 + δ)`; `(u − v)' = (u − v)·h`.
pub fn h(delta: f64, u: f64, v: f64) -> f64 {
    u * v * (u + v + 2.0) - (8.0 + delta)
}

/// The branch `v > 0` of `h = ε` over `u > 0`.
pub fn level_curve_v(delta: f64, eps: f64, u: f64) -> f64 {
    let k = 8.0 + delta + eps;
    (1.0 + u + 0.25 * u * u + k / u).sqrt() - 1.0 - 0.5 * u
}

/// Positive root of `C³ + 2C² − 32 = 0`, by bisection on `[2, 3]`.
pub fn c_root() -> f64 {
    let p = |c: f64| c * c * c + 2.0 * c * c - 32.0;
    let (mut lo, mut hi) = (2.0_f64, 3.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if p(lo).abs() <= p(hi).abs() {
        lo
    } else {
        hi
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    CertifiedBlowUp,
    NotCertified,
    Inapplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlowupCertificate {
    pub delta: f64,
    pub u0: f64,
    pub v0: f64,
    pub c_root: f64,
    pub c_root_residual: f64,
    pub a_cert: f64,
    /// `2A / (27 − 2A)`.
    pub delta_bound_a: f64,
    /// `(4C − 1) / 27`.
    pub delta_bound_c: f64,
    pub delta_bound: f64,
    pub reference_delta_bound: f64,
    pub h0: f64,
    pub epsilon: Option<f64>,
    pub verdict: Verdict,
    pub reasons: Vec<String>,
}

impl BlowupCertificate {
    /// Sign of `u − v` that grows: `1` when `u₀ > v₀`.
    pub fn orientation(&self) -> f64 {
        if self.u0 >= self.v0 {
            1.0
        } else {
            -1.0
        }
    }
}

/// Sufficient condition for finite-time blow-up of the reduced system.
pub fn blowup_certificate(delta: f64, u0: f64, v0: f64) -> BlowupCertificate {
    let c = c_root();
    let a = 8.0 / (36.0 / ((c + 1.0) * (c + 2.0)) + 3.0);
    let bound_a = 2.0 * a / (27.0 - 2.0 * a);
    let bound_c = (4.0 * c - 1.0) / 27.0;
    let bound = bound_a.min(bound_c);
    let h0 = h(delta, u0, v0);
    let mut reasons = Vec::new();
    let mut epsilon = None;
    let verdict = if !(delta > 0.0) || !(u0 >= 0.0 && v0 >= 0.0) || !h0.is_finite() {
        reasons.push("needs δ > 0 and non-negative finite initial data".to_string());
        Verdict::Inapplicable
    } else if u0 == v0 {
        reasons.push("u₀ = v₀ is invariant; no growing difference".to_string());
        Verdict::Inapplicable
    } else {
        if !(delta < bound) {
            reasons.push(format!("δ = {delta} is not below {bound}"));
        }
        if !(h0 > 0.0) {
            reasons.push(format!("h(u₀, v₀) = {h0} is not positive"));
        }
        let eps = (0.9 * h0).min(1.0 - delta - EPS_MARGIN);
        if eps > 0.0 {
            epsilon = Some(eps);
        } else {
            reasons.push("no ε > 0 with ε < h(u₀, v₀) and δ + ε < 1".to_string());
        }
        if reasons.is_empty() {
            Verdict::CertifiedBlowUp
        } else {
            Verdict::NotCertified
        }
    };
    BlowupCertificate {
        delta,
        u0,
        v0,
        c_root: c,
        c_root_residual: c * c * c + 2.0 * c * c - 32.0,
        a_cert: a,
        delta_bound_a: bound_a,
        delta_bound_c: bound_c,
        delta_bound: bound,
        reference_delta_bound: REFERENCE_DELTA_BOUND,
        h0,
        epsilon,
        verdict,
        reasons,
    }
}

/// Reduced trajectory samples `(t, u, v)`.
pub type ReducedSamples = Vec<(f64, f64, f64)>;

pub fn simulate_reduced(
    sys: &ReducedSystem,
    settings: &IntegratorSettings,
) -> Result<(OdeRun, ReducedSamples), CertificateError> {
    let mut samples = Vec::new();
    let run = integrate_ode(sys, &[sys.u0, sys.v0], settings, |t, x| samples.push((t, x[0], x[1])))?;
    Ok((run, samples))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GronwallReport {
    pub checked: usize,
    /// Smallest `(u − v)·s − (u₀ − v₀)·s·e^{εt}` with `s` the orientation.
    pub min_margin: f64,
    pub min_h: f64,
    pub first_failure: Option<f64>,
    pub holds: bool,
}

/// Checks `|u − v| ≥ |u₀ − v₀| e^{εt}` and `h ≥ ε` along samples.
pub fn verify_gronwall(
    cert: &BlowupCertificate,
    samples: &[(f64, f64, f64)],
) -> Result<GronwallReport, CertificateError> {
    let eps = match (cert.verdict, cert.epsilon) {
        (Verdict::CertifiedBlowUp, Some(e)) => e,
        _ => {
            return Err(CertificateError::Precondition(
                "Grönwall check needs a certified blow-up verdict".into(),
            ))
        }
    };
    let s = cert.orientation();
    let gap0 = s * (cert.u0 - cert.v0);
    let mut report = GronwallReport {
        checked: 0,
        min_margin: f64::INFINITY,
        min_h: f64::INFINITY,
        first_failure: None,
        holds: true,
    };
    for &(t, u, v) in samples {
        let lower = gap0 * (eps * t).exp();
        let margin = s * (u - v) - lower;
        let hv = h(cert.delta, u, v);
        report.checked += 1;
        report.min_margin = report.min_margin.min(margin);
        report.min_h = report.min_h.min(hv);
        let ok = margin >= -GRONWALL_TOL * (1.0 + lower) && hv >= eps - GRONWALL_TOL;
        if !ok && report.first_failure.is_none() {
            report.first_failure = Some(t);
            report.holds = false;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{build_system, Example};
    use crate::sim::Termination;

    #[test]
    fn constants() {
        let c = c_root();
        assert!((c * c * c + 2.0 * c * c - 32.0).abs() < 1e-10);
        assert!((2.62..2.64).contains(&c));
        let cert = blowup_certificate(0.1, 4.0, 2.0);
        assert!((cert.a_cert - 1.556).abs() < 1e-3);
        assert!((cert.delta_bound_a - 0.130).abs() < 1e-3);
        assert!((cert.delta_bound_c - 0.352).abs() < 1e-3);
        assert_eq!(cert.verdict, Verdict::CertifiedBlowUp);
        assert!((cert.epsilon.unwrap() - (0.9 - 1e-6)).abs() < 1e-12);
    }

    #[test]
    fn verdicts() {
        assert_eq!(blowup_certificate(10.0, 2.0, 4.0).verdict, Verdict::NotCertified);
        assert_eq!(blowup_certificate(0.1, 0.5, 0.4).verdict, Verdict::NotCertified);
        assert_eq!(blowup_certificate(0.1, 3.0, 3.0).verdict, Verdict::Inapplicable);
        assert_eq!(blowup_certificate(-1.0, 4.0, 2.0).verdict, Verdict::Inapplicable);
    }

    #[test]
    fn level_curve_lies_outside_c_root() {
        let (delta, eps) = (0.1, 0.5);
        let c = c_root();
        for k in 0..100 {
            let u = 0.01 * 1.1_f64.powi(k);
            let v = level_curve_v(delta, eps, u);
            assert!((h(delta, u, v) - eps).abs() < 1e-8 * (1.0 + u * u * v));
            assert!(u + v >= c, "u + v = {} at u = {u}", u + v);
        }
    }

    #[test]
    fn reduction_requirements() {
        let sys = build_system(Example::Weinberger, &[], 1.0, 1.0, vec![2.0, 4.0], vec![4.0, 2.0]).unwrap();
        let r = reduce_symmetric(&sys).unwrap();
        assert_eq!((r.delta, r.u0, r.v0), (10.0, 2.0, 4.0));
        let asym = sys.with_initial(vec![2.0, 4.0], vec![4.0, 2.5]).unwrap();
        assert!(matches!(reduce_symmetric(&asym), Err(CertificateError::ReductionNotApplicable(_))));
        let scaled = build_system(Example::Weinberger, &[], 2.0, 1.0, vec![2.0, 4.0], vec![4.0, 2.0]).unwrap();
        assert!(reduce_symmetric(&scaled).is_err());
        let other = build_system(Example::Mutualism, &[], 1.0, 1.0, vec![2.0, 4.0], vec![4.0, 2.0]).unwrap();
        assert!(reduce_symmetric(&other).is_err());
    }

    #[test]
    fn reduced_matches_full_system() {
        let sys = build_system(Example::Weinberger, &[], 1.0, 1.0, vec![0.5, 0.3], vec![0.3, 0.5]).unwrap();
        let red = reduce_symmetric(&sys).unwrap();
        let settings = IntegratorSettings {
            t_end: 1.0,
            dt: 1e-3,
            monitor_every: 1e-2,
            ..Default::default()
        };
        let (_, reduced) = simulate_reduced(&red, &settings).unwrap();
        let mut full = Vec::new();
        integrate_ode(&sys, &[0.5, 0.3, 0.3, 0.5], &settings, |t, x| full.push((t, x.to_vec()))).unwrap();
        assert_eq!(full.len(), reduced.len());
        for ((t, x), (tr, u, v)) in full.iter().zip(&reduced) {
            assert_eq!(t, tr);
            for (a, b) in [(x[0], *u), (x[3], *u), (x[1], *v), (x[2], *v)] {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gronwall_holds_up_to_blowup() {
        let cert = blowup_certificate(0.1, 4.0, 2.0);
        let settings = IntegratorSettings {
            t_end: 1.0,
            dt: 1e-5,
            monitor_every: 1e-3,
            halving: true,
            ..Default::default()
        };
        let (run, samples) = simulate_reduced(&ReducedSystem::new(0.1, 4.0, 2.0), &settings).unwrap();
        assert_eq!(run.status, Termination::BlowUpDetected);
        let rep = verify_gronwall(&cert, &samples).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(rep.checked > 10);
        assert!(verify_gronwall(&blowup_certificate(10.0, 2.0, 4.0), &samples).is_err());
    }
}
