use serde::{Deserialize, Serialize};

use super::monitor::{assert_lemmas, Monitor, MonitorFrame, Violation};
use crate::error::SimError;
use crate::model::{DiscretizedSystem, StateVector};

/// Entries in `[−CLIP_TOL, 0)` are set to zero after each step.
pub const CLIP_TOL: f64 = 1e-12;
/// Runs stop once some compartment exceeds this total concentration.
pub const BLOWUP_GUARD: f64 = 1e6;
const HALVING_FLOOR: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub t_end: f64,
    pub dt: f64,
    /// Time between monitor frames and recorded states; a multiple of `dt`.
    pub monitor_every: f64,
    /// Split a step in two while some stage increment exceeds
    /// `halving_threshold · max(|x_i|, 1e-8)` in its component.
    pub halving: bool,
    pub halving_threshold: f64,
    pub max_halvings: u32,
    pub blowup_guard: f64,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self {
            t_end: 10.0,
            dt: 1e-4,
            monitor_every: 1e-2,
            halving: false,
            halving_threshold: 0.05,
            max_halvings: 60,
            blowup_guard: BLOWUP_GUARD,
        }
    }
}

impl IntegratorSettings {
    /// `(total steps, steps per frame)`.
    fn step_counts(&self) -> Result<(u64, u64), SimError> {
        let bad = |m: String| Err(SimError::InvalidSettings(m));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad(format!("dt must be > 0, got {}", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad(format!("t_end must be > 0, got {}", self.t_end));
        }
        if !(self.blowup_guard > 0.0) || !(self.halving_threshold > 0.0) {
            return bad("blow-up guard and halving threshold must be > 0".into());
        }
        let multiple = |x: f64, what: &str| -> Result<u64, SimError> {
            let k = (x / self.dt).round();
            if k < 1.0 || (k * self.dt - x).abs() > 1e-9 * x.max(self.dt) {
                return Err(SimError::InvalidSettings(format!(
                    "{what} = {x} is not a positive multiple of dt = {}",
                    self.dt
                )));
            }
            Ok(k as u64)
        };
        Ok((multiple(self.t_end, "t_end")?, multiple(self.monitor_every, "monitor_every")?))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    BlowUpDetected,
    PositivityViolation,
    StepFailure,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    /// States at `t = 0`, at every monitor time and at termination.
    pub states: Vec<StateVector>,
    /// One frame per recorded state when a monitor is attached.
    pub frames: Vec<MonitorFrame>,
    pub status: Termination,
    pub violations: Vec<Violation>,
    /// Frames at which some compartment reached `C̲`.
    pub frames_above_threshold: usize,
    pub steps: u64,
    /// Extra substeps introduced by halving.
    pub halvings: u64,
}

impl TrajectoryRecord {
    pub fn final_state(&self) -> &StateVector {
        self.states.last().expect("initial state is always recorded")
    }

    /// Largest total concentration over all recorded states.
    pub fn max_norm(&self) -> f64 {
        self.states.iter().map(StateVector::max_norm).fold(0.0, f64::max)
    }

    /// Whether every lemma assertion held only because the threshold was
    /// never reached.
    pub fn vacuous(&self) -> bool {
        self.frames_above_threshold == 0
    }
}

/// An autonomous ODE on a flat state vector.
pub trait OdeSystem {
    fn dim(&self) -> usize;
    /// Writes `dx/dt`; returns `false` when the evaluation is not finite.
    fn rhs(&self, x: &[f64], dx: &mut [f64]) -> bool;
    /// Quantity compared against the blow-up guard.
    fn size(&self, x: &[f64]) -> f64;
}

/// State layout `[u_1..u_n, v_1..v_n]`; size is the largest compartment norm.
impl OdeSystem for DiscretizedSystem {
    fn dim(&self) -> usize {
        2 * self.n()
    }

    fn rhs(&self, x: &[f64], dx: &mut [f64]) -> bool {
        let n = self.n();
        let (u, v) = x.split_at(n);
        let (du, dv) = dx.split_at_mut(n);
        self.rhs_into(u, v, du, dv).is_ok()
    }

    fn size(&self, x: &[f64]) -> f64 {
        let (u, v) = x.split_at(self.n());
        u.iter().zip(v).map(|(a, b)| a + b).fold(0.0, f64::max)
    }
}

enum StepStatus {
    Continue,
    Stop(Termination),
}

struct Stepper<'a, S: OdeSystem> {
    sys: &'a S,
    settings: &'a IntegratorSettings,
    k: [Vec<f64>; 4],
    tmp: Vec<f64>,
    next: Vec<f64>,
    halvings: u64,
    /// Time reached inside the current macro step.
    t: f64,
}

impl<'a, S: OdeSystem> Stepper<'a, S> {
    fn new(sys: &'a S, settings: &'a IntegratorSettings) -> Self {
        let m = sys.dim();
        Self {
            sys,
            settings,
            k: [vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]],
            tmp: vec![0.0; m],
            next: vec![0.0; m],
            halvings: 0,
            t: 0.0,
        }
    }

    /// Classical RK4 candidate written to `self.next`.
    fn rk4(&mut self, x: &[f64], dt: f64) -> bool {
        const STAGE: [f64; 3] = [0.5, 0.5, 1.0];
        if !self.sys.rhs(x, &mut self.k[0]) {
            return false;
        }
        for s in 1..4 {
            let c = STAGE[s - 1] * dt;
            for ((t, xi), ki) in self.tmp.iter_mut().zip(x.iter()).zip(&self.k[s - 1]) {
                *t = xi + c * ki;
            }
            if !self.sys.rhs(&self.tmp, &mut self.k[s]) {
                return false;
            }
        }
        let w = dt / 6.0;
        let k = &self.k;
        for i in 0..x.len() {
            self.next[i] = x[i] + w * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
        self.next.iter().all(|x| x.is_finite())
    }

    /// Whether some stage increment `dt·k_s` exceeds
    /// `halving_threshold · max(|x_i|, HALVING_FLOOR)` in its own component.
    fn too_large(&self, x: &[f64], dt: f64) -> bool {
        let thr = self.settings.halving_threshold;
        self.k.iter().any(|k| {
            k.iter()
                .zip(x)
                .any(|(ki, xi)| !((dt * ki).abs() <= thr * xi.abs().max(HALVING_FLOOR)))
        })
    }

    fn advance(&mut self, x: &mut [f64], dt: f64, depth: u32) -> StepStatus {
        let ok = self.rk4(x, dt);
        let can_halve = self.settings.halving && depth < self.settings.max_halvings;
        if can_halve && (!ok || self.too_large(x, dt)) {
            self.halvings += 1;
            if let StepStatus::Stop(s) = self.advance(x, 0.5 * dt, depth + 1) {
                return StepStatus::Stop(s);
            }
            return self.advance(x, 0.5 * dt, depth + 1);
        }
        if !ok {
            return StepStatus::Stop(Termination::StepFailure);
        }
        x.copy_from_slice(&self.next);
        self.t += dt;
        for xi in x.iter_mut() {
            if *xi < 0.0 {
                if *xi < -CLIP_TOL {
                    return StepStatus::Stop(Termination::PositivityViolation);
                }
                *xi = 0.0;
            }
        }
        if self.sys.size(x) > self.settings.blowup_guard {
            return StepStatus::Stop(Termination::BlowUpDetected);
        }
        StepStatus::Continue
    }
}

/// Summary of an [`integrate_ode`] run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OdeRun {
    pub status: Termination,
    pub steps: u64,
    pub halvings: u64,
}

/// Fixed-step RK4 on a generic system. `sample(t, x)` is called at `t = 0`,
/// every `monitor_every`, at `t_end` and at a blow-up.
pub fn integrate_ode<S: OdeSystem>(
    sys: &S,
    x0: &[f64],
    settings: &IntegratorSettings,
    mut sample: impl FnMut(f64, &[f64]),
) -> Result<OdeRun, SimError> {
    let (total, stride) = settings.step_counts()?;
    if x0.len() != sys.dim() {
        return Err(SimError::InvalidSettings(format!(
            "initial state has {} entries, expected {}",
            x0.len(),
            sys.dim()
        )));
    }
    let mut x = x0.to_vec();
    sample(0.0, &x);
    let mut stepper = Stepper::new(sys, settings);
    let mut run = OdeRun {
        status: Termination::Completed,
        steps: 0,
        halvings: 0,
    };
    for k in 1..=total {
        stepper.t = (k - 1) as f64 * settings.dt;
        let status = stepper.advance(&mut x, settings.dt, 0);
        run.steps = k;
        match status {
            StepStatus::Continue => {
                if k % stride == 0 || k == total {
                    sample(k as f64 * settings.dt, &x);
                }
            }
            StepStatus::Stop(s) => {
                run.status = s;
                if s == Termination::BlowUpDetected {
                    sample(stepper.t, &x);
                }
                break;
            }
        }
    }
    run.halvings = stepper.halvings;
    Ok(run)
}

/// Integrates the system from its initial data. With a monitor attached,
/// every recorded state gets a [`MonitorFrame`] and the lemma assertions.
pub fn integrate(
    sys: &DiscretizedSystem,
    monitor: Option<&Monitor>,
    settings: &IntegratorSettings,
) -> Result<TrajectoryRecord, SimError> {
    let mut rec = TrajectoryRecord {
        states: Vec::new(),
        frames: Vec::new(),
        status: Termination::Completed,
        violations: Vec::new(),
        frames_above_threshold: 0,
        steps: 0,
        halvings: 0,
    };
    let n = sys.n();
    let x0: Vec<f64> = sys.u0().iter().chain(sys.v0()).copied().collect();
    let run = integrate_ode(sys, &x0, settings, |t, x| {
        let state = StateVector::new(t, x[..n].to_vec(), x[n..].to_vec());
        if let Some(m) = monitor {
            let frame = m.frame(sys, &state, rec.frames.last());
            if frame.max_norm >= m.limits.c_underbar {
                rec.frames_above_threshold += 1;
            }
            rec.violations
                .extend(assert_lemmas(&frame, rec.frames.last(), &m.limits));
            rec.frames.push(frame);
        }
        rec.states.push(state);
    })?;
    rec.status = run.status;
    rec.steps = run.steps;
    rec.halvings = run.halvings;
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::model::{RationalTermFunction, ReactionPair};

    fn settings(t_end: f64, dt: f64) -> IntegratorSettings {
        IntegratorSettings {
            t_end,
            dt,
            monitor_every: t_end,
            ..Default::default()
        }
    }

    #[test]
    fn rejects_bad_settings() {
        let sys = catalog::schnakenberg_system(&Default::default()).unwrap();
        for s in [
            settings(1.0, 0.0),
            settings(-1.0, 0.1),
            IntegratorSettings {
                monitor_every: 0.015,
                ..settings(1.0, 0.01)
            },
        ] {
            assert!(matches!(integrate(&sys, None, &s), Err(SimError::InvalidSettings(_))));
        }
    }

    #[test]
    fn pure_diffusion_conserves_mass() {
        let zero = ReactionPair::new(RationalTermFunction::zero(), RationalTermFunction::zero());
        let u0 = vec![3.0, 0.0, 1.0, 0.5];
        let v0 = vec![0.0, 2.0, 0.0, 4.0];
        let sys = DiscretizedSystem::new(1.0, 2.0, zero, u0.clone(), v0.clone()).unwrap();
        let rec = integrate(&sys, None, &settings(1.0, 1e-4)).unwrap();
        assert_eq!(rec.status, Termination::Completed);
        let end = rec.final_state();
        let (su, sv): (f64, f64) = (end.u.iter().sum(), end.v.iter().sum());
        assert!((su - u0.iter().sum::<f64>()).abs() < 1e-9);
        assert!((sv - v0.iter().sum::<f64>()).abs() < 1e-9);
        // relaxes to the mean
        assert!(end.u.iter().all(|x| (x - su / 4.0).abs() < 1e-3));
    }

    #[test]
    fn uniform_steady_state_is_fixed() {
        let (a, b) = (0.1, 1.0);
        let (us, vs) = (a + b, b / ((a + b) * (a + b)));
        let sys = DiscretizedSystem::new(
            150.0,
            30.0,
            catalog::schnakenberg_reactions(a, b).unwrap(),
            vec![us; 3],
            vec![vs; 3],
        )
        .unwrap();
        let rec = integrate(&sys, None, &settings(0.1, 1e-4)).unwrap();
        let end = rec.final_state();
        assert!(end.u.iter().all(|x| (x - us).abs() < 1e-10));
    }

    #[test]
    fn growth_past_guard_is_a_status() {
        // u' = u², finite-time blow-up at t = 1
        let f = RationalTermFunction::from_tuples(&[(1.0, 2, 0, 0, 0)]).unwrap();
        let sys = DiscretizedSystem::new(
            1.0,
            1.0,
            ReactionPair::new(f, RationalTermFunction::zero()),
            vec![1.0, 1.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let s = IntegratorSettings {
            halving: true,
            ..settings(2.0, 1e-3)
        };
        let rec = integrate(&sys, None, &s).unwrap();
        assert_eq!(rec.status, Termination::BlowUpDetected);
        assert!(rec.final_state().max_norm() > BLOWUP_GUARD);
        assert!(rec.final_state().t <= 1.0 + 1e-3);
    }

    #[test]
    fn negative_drift_is_a_positivity_violation() {
        // u' = -1 leaves the quadrant
        let f = RationalTermFunction::constant(-1.0);
        let sys = DiscretizedSystem::new(
            1.0,
            1.0,
            ReactionPair::new(f, RationalTermFunction::zero()),
            vec![0.0, 0.0],
            vec![0.0, 0.0],
        )
        .unwrap();
        let rec = integrate(&sys, None, &settings(1.0, 0.1)).unwrap();
        assert_eq!(rec.status, Termination::PositivityViolation);
        assert_eq!(rec.steps, 1);
    }
}
