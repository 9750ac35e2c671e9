//! One test per acceptance criterion. Each prints a single PASS/FAIL line to
//! stderr (uncaptured) with the measured evidence and runtime.

mod common;

use std::io::Write;
use std::time::{Duration, Instant};

use rand::Rng;
use rdllf::bounds::{ConstantLedger, LedgerBuilder};
use rdllf::catalog::{self, Example, MutualismParams};
use rdllf::certificates::{
    blowup_certificate, c_root, no_llf_mutualism_test, simulate_reduced, verify_gronwall, NoLlfCondition,
    ReducedSystem, Verdict as BlowupVerdict,
};
use rdllf::cli::{cmd_bounds, cmd_simulate, RunConfig};
use rdllf::llf::{level_line_max, Llf, Verdict};
use rdllf::model::{apply_diffusion, StateVector};
use rdllf::sim::{
    flux_effects, integrate, snapshot_partition, IntegratorSettings, LemmaId, Monitor, MonitorLimits,
    Termination, TrajectoryRecord,
};

use common::*;

type Outcome = Result<String, String>;

fn criterion(id: u32, name: &str, budget: Duration, body: impl FnOnce() -> Outcome) {
    let start = Instant::now();
    let result = body();
    let elapsed = start.elapsed();
    let result = match result {
        Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget {budget:?}")),
        r => r,
    };
    let (tag, detail) = match &result {
        Ok(d) => ("PASS", d),
        Err(d) => ("FAIL", d),
    };
    let line = format!("[acceptance] {tag} {id} {name}: {detail} ({:.2}s)\n", elapsed.as_secs_f64());
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    if let Err(e) = result {
        panic!("criterion {id} failed: {e}");
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn schnakenberg_ledger() -> ConstantLedger {
    let (cand, consts) = schnakenberg_candidate();
    LedgerBuilder::run(cand, consts, &schnakenberg_system(), 1e6).unwrap()
}

fn monitored_schnakenberg_run(ledger: &ConstantLedger) -> TrajectoryRecord {
    let monitor = Monitor::new(Llf::new(schnakenberg_llf()), MonitorLimits::from(ledger));
    let settings = IntegratorSettings {
        t_end: 10.0,
        dt: 1e-4,
        ..Default::default()
    };
    integrate(&schnakenberg_system(), Some(&monitor), &settings).unwrap()
}

/// Random `n`-compartment states; each compartment is drawn inside `Ω_K`
/// or from a wider box with equal probability.
fn random_states(count: usize, n: usize, llf: &Llf, m_k: f64, b_k: f64) -> Vec<StateVector> {
    let mut rng = rng();
    (0..count)
        .map(|_| {
            let (mut u, mut v) = (Vec::with_capacity(n), Vec::with_capacity(n));
            for _ in 0..n {
                let (a, b) = if rng.gen_bool(0.5) {
                    loop {
                        let (a, b) = (rng.gen_range(0.0..b_k), rng.gen_range(0.0..b_k));
                        if llf.eval(a, b) < m_k {
                            break (a, b);
                        }
                    }
                } else {
                    (rng.gen_range(0.0..5.0 * b_k), rng.gen_range(0.0..5.0 * b_k))
                };
                u.push(a);
                v.push(b);
            }
            StateVector::new(0.0, u, v)
        })
        .collect()
}

#[test]
fn criterion_1_diffusion_identities() {
    criterion(1, "diffusion operator identities", Duration::from_secs(1), || {
        let mut rng = rng();
        let mut worst_sum = 0.0f64;
        for n in [2usize, 8, 64] {
            for _ in 0..100 {
                let w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..1.0)).collect();
                let dw = apply_diffusion(&w).map_err(|e| e.to_string())?;
                let s: f64 = dw.iter().sum();
                worst_sum = worst_sum.max(s.abs());
                check(s.abs() <= 1e-13, || format!("n = {n}: sum {s}"))?;
                for (i, dwi) in dw.iter().enumerate() {
                    let mut acc = 0.0;
                    for (j, wj) in w.iter().enumerate() {
                        let a = match i.abs_diff(j) {
                            0 if i == 0 || i == n - 1 => -1.0,
                            0 => -2.0,
                            1 => 1.0,
                            _ => 0.0,
                        };
                        acc += a * wj;
                    }
                    check(acc == *dwi, || format!("n = {n}, row {i}: dense {acc} vs {dwi}"))?;
                }
            }
        }
        Ok(format!("300 vectors, max |sum| = {worst_sum:.1e}, dense rows bit-identical"))
    });
}

#[test]
fn criterion_2_flux_decomposition() {
    criterion(2, "flux decomposition identity", Duration::from_secs(5), || {
        let llf = Llf::new(schnakenberg_llf());
        let (_, consts) = schnakenberg_candidate();
        let states = random_states(1000, 8, &llf, consts.m_k, consts.b_k);
        let mut worst = 0.0f64;
        let mut mixed = 0;
        for s in &states {
            let p = snapshot_partition(s, &llf, consts.m_k);
            if !p.z_bdy.is_empty() {
                mixed += 1;
            }
            let gap = flux_effects(s, &llf, &p, 30.0).decomposition_gap();
            worst = worst.max(gap);
            check(gap <= 1e-10, || format!("relative gap {gap}"))?;
        }
        Ok(format!("1000 states ({mixed} with boundary edges), max relative gap {worst:.1e}"))
    });
}

#[test]
fn criterion_3_schnakenberg_llf() {
    criterion(3, "Schnakenberg LLF certification", Duration::from_secs(60), || {
        let r = catalog::schnakenberg_reactions(0.1, 1.0).unwrap();
        let cert = rdllf::llf::certify(&schnakenberg_llf(), &r, &rdllf::llf::GridSettings::default());
        for rep in &cert.reports {
            check(rep.verdict == Verdict::Verified, || format!("{}: {}", rep.property, rep.detail))?;
        }
        let (a, b, c): (f64, f64, f64) = (0.1, 1.0, 43.0);
        let u_t = a + 2.0 * b + c / 2.0;
        let v_t = (4.0 * a + 8.0 * b + 2.0 * c)
            .max((6.0 * a + 12.0 * b + c) / (a * c))
            .max((a + 2.0 * b) / c);
        let k_under = cert.candidate.as_ref().ok_or("no candidate")?.k_underbar;
        check(k_under <= u_t + v_t, || format!("K_underbar {k_under} > {}", u_t + v_t))?;
        Ok(format!("P1-P5 verified, K_underbar = {k_under:.4} <= u~ + v~ = {}", u_t + v_t))
    });
}

#[test]
fn criterion_4_end_to_end_boundedness() {
    criterion(4, "end-to-end boundedness", Duration::from_secs(120), || {
        let ledger = schnakenberg_ledger();
        check(ledger.b >= ledger.c_underbar && ledger.c_underbar >= ledger.c && ledger.c >= ledger.b_k, || {
            "ledger ordering B >= C_underbar >= C >= B_K fails".into()
        })?;
        let rec = monitored_schnakenberg_run(&ledger);
        check(rec.status == Termination::Completed, || format!("status {:?}", rec.status))?;
        for f in &rec.frames {
            check(f.max_norm <= ledger.b, || format!("max norm {} > B at t = {}", f.max_norm, f.t))?;
        }
        check(rec.violations.is_empty(), || format!("{} monitor violations", rec.violations.len()))?;
        Ok(format!(
            "{} frames, max norm {} <= B = {:.3e}, 0 violations",
            rec.frames.len(),
            rec.max_norm(),
            ledger.b
        ))
    });
}

#[test]
fn criterion_5_mutualism_blowup() {
    criterion(5, "mutualism blow-up", Duration::from_secs(30), || {
        let ex = Example::Mutualism;
        let (g, d, u0, v0) = ex.default_setup();
        let sys = catalog::build_system(ex, &[], g, d, u0, v0).unwrap();
        let settings = IntegratorSettings {
            halving: true,
            ..Default::default()
        };
        let rec = integrate(&sys, None, &settings).unwrap();
        check(rec.status == Termination::BlowUpDetected, || format!("status {:?}", rec.status))?;
        let p = MutualismParams::default();
        let cert = no_llf_mutualism_test(&p).ok_or("mutualism-ray test did not fire")?;
        check(cert.condition == NoLlfCondition::MutualismRay, || format!("{:?}", cert.condition))?;
        Ok(format!(
            "blow-up at t = {:.4}, b2c1 = {} > b1c2 = {}",
            rec.final_state().t,
            p.b2 * p.c1,
            p.b1 * p.c2
        ))
    });
}

#[test]
fn criterion_6_weinberger_certificate() {
    criterion(6, "Weinberger blow-up certificate", Duration::from_secs(30), || {
        let c = c_root();
        let residual = c * c * c + 2.0 * c * c - 32.0;
        check(residual.abs() < 1e-10, || format!("C_root residual {residual}"))?;
        let cert = blowup_certificate(0.1, 4.0, 2.0);
        check(cert.verdict == BlowupVerdict::CertifiedBlowUp, || format!("{:?}", cert.reasons))?;
        let eps = cert.epsilon.ok_or("no epsilon")?;
        let settings = IntegratorSettings {
            dt: 1e-5,
            monitor_every: 1e-5,
            halving: true,
            ..Default::default()
        };
        let (run, samples) = simulate_reduced(&ReducedSystem::new(0.1, 4.0, 2.0), &settings).unwrap();
        check(run.status == Termination::BlowUpDetected, || format!("reduced run {:?}", run.status))?;
        for &(t, u, v) in &samples {
            let bound = 2.0 * (eps * t).exp() - 1e-8;
            check(u - v >= bound, || format!("u - v = {} < {bound} at t = {t}", u - v))?;
        }
        let report = verify_gronwall(&cert, &samples).map_err(|e| e.to_string())?;
        check(report.holds, || format!("{report:?}"))?;

        let ex = Example::Weinberger;
        let (g, d, u0, v0) = ex.default_setup();
        let sys = catalog::build_system(ex, &[], g, d, u0, v0).unwrap();
        let rec = integrate(&sys, None, &IntegratorSettings { halving: true, ..Default::default() }).unwrap();
        check(rec.status == Termination::BlowUpDetected, || format!("delta = 10 run {:?}", rec.status))?;
        // reduced coordinates u = u_1, v = u_2
        let reference_run = blowup_certificate(10.0, sys.u0()[0], sys.u0()[1]);
        check(reference_run.verdict == BlowupVerdict::NotCertified, || format!("delta = 10 verdict {:?}", reference_run.verdict))?;
        Ok(format!(
            "certified with eps = {eps}, delta bound {:.4} (reference {}), Gronwall on {} samples to t = {:.4}; delta = 10 blows up at t = {:.4}, not certified",
            cert.delta_bound,
            cert.reference_delta_bound,
            samples.len(),
            samples.last().map_or(0.0, |s| s.0),
            rec.final_state().t
        ))
    });
}

fn rk4_error(dt: f64, reference: &StateVector) -> f64 {
    let settings = IntegratorSettings {
        t_end: 0.1,
        dt,
        monitor_every: 0.1,
        ..Default::default()
    };
    let rec = integrate(&schnakenberg_system(), None, &settings).unwrap();
    let s = rec.final_state();
    s.u.iter()
        .chain(&s.v)
        .zip(reference.u.iter().chain(&reference.v))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

#[test]
fn criterion_7_numerical_hygiene() {
    criterion(7, "numerical hygiene", Duration::from_secs(60), || {
        let mut rng = rng();
        let mut worst = 0.0f64;
        for llf in [Llf::new(schnakenberg_llf()), Llf::new(catalog::weinberger_lyapunov())] {
            for _ in 0..100 {
                let (u, v): (f64, f64) = (rng.gen_range(0.05..30.0), rng.gen_range(0.05..30.0));
                let (hu, hv) = (1e-5 * (1.0 + u), 1e-5 * (1.0 + v));
                let g = llf.grad(u, v);
                let h = llf.hessian(u, v);
                let pairs = [
                    (g.0, (llf.eval(u + hu, v) - llf.eval(u - hu, v)) / (2.0 * hu)),
                    (g.1, (llf.eval(u, v + hv) - llf.eval(u, v - hv)) / (2.0 * hv)),
                    (h.0, (llf.grad(u + hu, v).0 - llf.grad(u - hu, v).0) / (2.0 * hu)),
                    (h.1, (llf.grad(u, v + hv).0 - llf.grad(u, v - hv).0) / (2.0 * hv)),
                    (h.2, (llf.grad(u, v + hv).1 - llf.grad(u, v - hv).1) / (2.0 * hv)),
                ];
                for (exact, fd) in pairs {
                    let e = (exact - fd).abs() / exact.abs().max(1.0);
                    worst = worst.max(e);
                    check(e < 1e-6, || format!("derivative error {e} at ({u}, {v})"))?;
                }
            }
        }

        let reference = {
            let settings = IntegratorSettings {
                t_end: 0.1,
                dt: 1e-5,
                monitor_every: 0.1,
                ..Default::default()
            };
            integrate(&schnakenberg_system(), None, &settings).unwrap().final_state().clone()
        };
        let errs: Vec<f64> = [5e-4, 2.5e-4, 1.25e-4].iter().map(|&dt| rk4_error(dt, &reference)).collect();
        let ratios: Vec<f64> = errs.windows(2).map(|w| w[0] / w[1]).collect();
        for r in &ratios {
            check((12.0..=20.0).contains(r), || format!("RK4 ratio {r}"))?;
        }

        let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
        let mut outputs = Vec::new();
        for run in ["a", "b"] {
            let mut cfg = RunConfig::parse("system.example = schnakenberg\nintegrator.t_end = 1\n")?;
            cfg.out = Some(tmp.path().join(run));
            let sim = cmd_simulate(&cfg).map_err(|e| e.to_string())?;
            let bounds = cmd_bounds(&cfg, true).map_err(|e| e.to_string())?;
            let mut bytes = Vec::new();
            for f in sim.files.iter().chain(&bounds.files) {
                bytes.push(std::fs::read(f).map_err(|e| e.to_string())?);
            }
            outputs.push(bytes);
        }
        check(outputs[0] == outputs[1], || "CLI outputs differ between runs".into())?;
        Ok(format!(
            "max derivative error {worst:.1e}, RK4 ratios {:.2}/{:.2}, {} output files byte-identical",
            ratios[0],
            ratios[1],
            outputs[0].len()
        ))
    });
}

#[test]
fn criterion_8_property_batteries() {
    criterion(8, "property batteries", Duration::from_secs(120), || {
        let mut rng = rng();
        let mut notes = Vec::new();
        // LLFs in the catalog that pass P2
        for (name, llf) in [
            ("schnakenberg W", Llf::new(schnakenberg_llf())),
            ("weinberger V", Llf::new(catalog::weinberger_lyapunov())),
        ] {
            let (u_, v_) = rdllf::llf::find_underbars(&llf).map_err(|e| e.to_string())?;
            for _ in 0..100 {
                let l1: f64 = rng.gen_range(0.0..500.0);
                let l2 = l1 + rng.gen_range(1e-3..500.0);
                check(level_line_max(llf.wu(), l1) < level_line_max(llf.wu(), l2), || {
                    format!("{name}: M_u not increasing on [{l1}, {l2}]")
                })?;
                check(level_line_max(llf.wv(), l1) < level_line_max(llf.wv(), l2), || {
                    format!("{name}: M_v not increasing on [{l1}, {l2}]")
                })?;
                let (a, b) = (rng.gen_range(0.0..1e3), rng.gen_range(0.0..1e3));
                check(llf.grad(u_ + a, b).0 > 0.0, || format!("{name}: W_u <= 0 at ({}, {b})", u_ + a))?;
                check(llf.grad(a, v_ + b).1 > 0.0, || format!("{name}: W_v <= 0 at ({a}, {})", v_ + b))?;
            }
            for (axis, wd) in [("u", llf.wu()), ("v", llf.wv())] {
                let tail = |x: f64| if axis == "u" { wd.tail_in_u(x) } else { wd.tail_in_v(x) };
                let limits: Vec<_> = [0.0, 0.5, 1.0, 7.0, 100.0, 1e4].iter().map(|&x| tail(x).limit()).collect();
                if let Some(m_inf) = limits[0].finite() {
                    check(limits.iter().all(|l| *l == limits[0]), || format!("{name}: M_{axis}^inf depends on the other coordinate"))?;
                    for l in [0.0, 1.0, 10.0, 1e3, 1e6] {
                        check(level_line_max(wd, l) < m_inf, || format!("{name}: M_{axis}^({l}) >= M_{axis}^inf"))?;
                    }
                    notes.push(format!("{name} M_{axis}^inf = {m_inf}"));
                }
            }
        }
        let cert = schnakenberg_certification();
        let kc = cert.construction.as_ref().ok_or("no K construction")?;
        check(kc.validation.len() >= 20, || format!("{} validation levels", kc.validation.len()))?;
        let w = schnakenberg_llf();
        let m_k = level_line_max(&w, kc.k);
        for &(l, m) in &kc.validation {
            check(l < kc.k && m < kc.m_k && level_line_max(&w, l) < m_k, || format!("M^({l}) >= M^(K)"))?;
        }

        let ledger = schnakenberg_ledger();
        let llf = Llf::new(w);
        let states = random_states(1000, 8, &llf, ledger.m_k, ledger.b_k);
        let (mut n_int, mut n_bdy) = (0usize, 0usize);
        for s in &states {
            let p = snapshot_partition(s, &llf, ledger.m_k);
            let fx = flux_effects(s, &llf, &p, ledger.d);
            for &(i, f) in &fx.f_int {
                let moved = s.u[i + 1] != s.u[i] || s.v[i + 1] != s.v[i];
                check(f < 0.0 || (!moved && f == 0.0), || format!("F_int,{i} = {f}"))?;
                n_int += 1;
            }
            for &(i, f) in &fx.f_bdy {
                check(f <= ledger.f_max.f_max, || format!("F_bdy,{i} = {f} > F_max"))?;
                n_bdy += 1;
            }
        }

        let rec = monitored_schnakenberg_run(&ledger);
        let monotone = rec.violations.iter().filter(|v| v.lemma == LemmaId::SystemBoundMonotone).count();
        let bdy = rec.violations.iter().filter(|v| v.lemma == LemmaId::BoundaryFlux).count();
        check(monotone == 0 && bdy == 0, || format!("{monotone} monotonicity and {bdy} boundary-flux violations"))?;
        let monotone_note = if rec.vacuous() {
            format!("W monotonicity vacuous (no frame reaches C_underbar = {:.2e})", ledger.c_underbar)
        } else {
            format!("W monotone on {} frames above C_underbar", rec.frames_above_threshold)
        };
        Ok(format!(
            "C1/C2 on 2 LLFs, C3 on {} levels, C4/C5 ({}), {n_int} interior and {n_bdy} boundary fluxes, {monotone_note}",
            kc.validation.len(),
            notes.join(", ")
        ))
    });
}
