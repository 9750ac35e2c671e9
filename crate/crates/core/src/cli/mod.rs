//! Command-line front end.
//!
//! Exit codes: 0 ok, 1 usage or configuration error, 2 blow-up detected,
//! 3 refuted, 4 inconclusive.

mod config;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use crate::bounds::{ConstantLedger, LedgerBuilder};
use crate::catalog::{Example, MutualismParams};
use crate::certificates::{
    blowup_certificate, no_llf_mutualism_test, no_llf_ratio_test, reduce_symmetric, simulate_reduced,
    verify_gronwall, Verdict as BlowupVerdict,
};
use crate::error::{BoundsError, Error};
use crate::llf::{certify, Llf, LlfCertification, Verdict};
use crate::model::{DiscretizedSystem, RationalTermFunction, ReactionPair};
use crate::sim::{
    integrate, write_monitors_csv, write_trajectory_csv, Monitor, MonitorLimits, Termination,
};

pub use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_BLOWUP: i32 = 2;
pub const EXIT_REFUTED: i32 = 3;
pub const EXIT_INCONCLUSIVE: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "rdllf", version, about = "Simulate and certify discretized reaction-diffusion systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the system and monitor the bound along the trajectory.
    Simulate(CommonArgs),
    /// Check the candidate Lyapunov-like function.
    VerifyLlf(CommonArgs),
    /// Compute the constant ledger up to the bound B.
    Bounds(CommonArgs),
    /// Run the no-LLF tests and the blow-up certificate.
    Certify(CommonArgs),
}

#[derive(clap::Args, Debug)]
struct CommonArgs {
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    d: Option<f64>,
    /// Run `bounds` without a prior successful `verify-llf`.
    #[arg(long)]
    force: bool,
    /// Extra `key=value` config assignment, applied last.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl CommonArgs {
    fn to_config(&self) -> Result<RunConfig, Error> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::parse(&text).map_err(Error::Config)?
            }
            None => RunConfig::default(),
        };
        let mut pairs: Vec<(&str, String)> = Vec::new();
        if let Some(e) = &self.example {
            pairs.push(("system.example", e.clone()));
        }
        let nums = [
            ("system.gamma", self.gamma),
            ("system.d", self.d),
            ("integrator.t_end", self.t_end),
            ("integrator.dt", self.dt),
        ];
        pairs.extend(nums.iter().filter_map(|(k, v)| v.map(|v| (*k, v.to_string()))));
        if let Some(n) = self.n {
            pairs.push(("system.n", n.to_string()));
        }
        if let Some(o) = &self.out {
            pairs.push(("output.dir", o.display().to_string()));
        }
        for (k, v) in pairs {
            cfg.set(k, &v).map_err(Error::Config)?;
        }
        for s in &self.set {
            let (k, v) = s
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got `{s}`")))?;
            cfg.set(k.trim(), v.trim()).map_err(Error::Config)?;
        }
        Ok(cfg)
    }
}

/// Result of a command: exit code, one-line message and files written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub message: String,
    pub files: Vec<PathBuf>,
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, Error> {
    let dir = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json(path: &Path, value: &Value) -> Result<(), Error> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn reactions(cfg: &RunConfig) -> Result<ReactionPair, Error> {
    if !cfg.f_terms.is_empty() || !cfg.g_terms.is_empty() {
        if cfg.f_terms.is_empty() || cfg.g_terms.is_empty() {
            return Err(Error::Config("both `reaction.f` and `reaction.g` are required".into()));
        }
        let f = RationalTermFunction::new(cfg.f_terms.iter().copied())?;
        let g = RationalTermFunction::new(cfg.g_terms.iter().copied())?;
        return Ok(ReactionPair::new(f, g));
    }
    let ex = cfg
        .example
        .ok_or_else(|| Error::Config("set `system.example` or give `reaction.f`/`reaction.g`".into()))?;
    Ok(ex.reactions(&cfg.params)?)
}

fn tile(base: &[f64], n: usize) -> Vec<f64> {
    base.iter().copied().cycle().take(n).collect()
}

/// Builds the system. Example initial data is tiled cyclically when `n`
/// differs from its length.
pub fn resolve_system(cfg: &RunConfig) -> Result<DiscretizedSystem, Error> {
    let r = reactions(cfg)?;
    let explicit = !cfg.f_terms.is_empty();
    let (gamma0, d0, u_def, v_def) = match (explicit, cfg.example) {
        (false, Some(e)) => {
            let (g, d, u, v) = e.default_setup();
            (g, d, Some(u), Some(v))
        }
        _ => (1.0, 1.0, None, None),
    };
    let n = cfg
        .n
        .or(cfg.u0.as_ref().map(Vec::len))
        .or(u_def.as_ref().map(Vec::len))
        .ok_or_else(|| Error::Config("set `system.n` or `init.u`/`init.v`".into()))?;
    let init = |given: &Option<Vec<f64>>, def: &Option<Vec<f64>>, key: &str| -> Result<Vec<f64>, Error> {
        match (given, def) {
            (Some(x), _) if x.len() == n => Ok(x.clone()),
            (Some(x), _) => Err(Error::Config(format!("`{key}` has {} entries, expected n = {n}", x.len()))),
            (None, Some(d)) => Ok(tile(d, n)),
            (None, None) => Err(Error::Config(format!("`{key}` is required"))),
        }
    };
    let u0 = init(&cfg.u0, &u_def, "init.u")?;
    let v0 = init(&cfg.v0, &v_def, "init.v")?;
    Ok(DiscretizedSystem::new(
        cfg.gamma.unwrap_or(gamma0),
        cfg.d.unwrap_or(d0),
        r,
        u0,
        v0,
    )?)
}

/// Config text without output and integrator keys; ties a verification
/// report to the system it covers.
fn fingerprint(cfg: &RunConfig) -> String {
    RunConfig {
        out: None,
        t_end: None,
        dt: None,
        monitor_every: None,
        halving: None,
        ..cfg.clone()
    }
    .emit()
}

fn verdict_code(v: Verdict) -> i32 {
    match v {
        Verdict::Verified => EXIT_OK,
        Verdict::Refuted => EXIT_REFUTED,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn run_certification(cfg: &RunConfig, r: &ReactionPair) -> Result<LlfCertification, Error> {
    let w = cfg
        .candidate()
        .map_err(Error::Config)?
        .ok_or_else(|| Error::Config("no LLF candidate: set `llf.w` or pick an example that ships one".into()))?;
    Ok(certify(&w, r, &cfg.grid()))
}

fn build_ledger(cfg: &RunConfig, sys: &DiscretizedSystem, cert: &LlfCertification) -> Result<ConstantLedger, Error> {
    match (&cert.candidate, &cert.constants) {
        (Some(c), Some(k)) if cert.verdict == Verdict::Verified => {
            Ok(LedgerBuilder::run(c.clone(), k.clone(), sys, cfg.grid().v_cap)?)
        }
        _ => Err(Error::Bounds(BoundsError::PipelineOrder {
            field: "ledger",
            missing: "a verified LLF",
        })),
    }
}

pub fn cmd_verify_llf(cfg: &RunConfig) -> Result<Outcome, Error> {
    let r = reactions(cfg)?;
    let cert = run_certification(cfg, &r)?;
    let dir = out_dir(cfg)?;
    let path = dir.join("report.json");
    write_json(
        &path,
        &json!({ "config": fingerprint(cfg), "verdict": cert.verdict, "certification": cert }),
    )?;
    let failing: Vec<String> = cert
        .reports
        .iter()
        .filter(|p| p.verdict != Verdict::Verified)
        .map(|p| format!("{}: {}", p.property, p.detail))
        .collect();
    let message = if failing.is_empty() {
        format!("LLF verdict {:?}", cert.verdict)
    } else {
        format!("LLF verdict {:?}; {}", cert.verdict, failing.join("; "))
    };
    Ok(Outcome {
        code: verdict_code(cert.verdict),
        message,
        files: vec![path],
    })
}

fn prior_verification(dir: &Path, cfg: &RunConfig) -> Result<(), String> {
    let path = dir.join("report.json");
    let text = fs::read_to_string(&path).map_err(|_| format!("{} not found", path.display()))?;
    let v: Value = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if v["config"].as_str() != Some(fingerprint(cfg).as_str()) {
        return Err(format!("{} was produced for a different system", path.display()));
    }
    if v["verdict"].as_str() != Some("verified") {
        return Err(format!("{} does not record a verified LLF", path.display()));
    }
    Ok(())
}

pub fn cmd_bounds(cfg: &RunConfig, force: bool) -> Result<Outcome, Error> {
    let dir = out_dir(cfg)?;
    if !force {
        if let Err(why) = prior_verification(&dir, cfg) {
            return Ok(Outcome {
                code: EXIT_USAGE,
                message: format!("pipeline order: bounds requires a successful verify-llf first ({why}); use --force to verify inline"),
                files: vec![],
            });
        }
    }
    let sys = resolve_system(cfg)?;
    let cert = run_certification(cfg, sys.reactions())?;
    if cert.verdict != Verdict::Verified {
        return Ok(Outcome {
            code: verdict_code(cert.verdict),
            message: format!("LLF verdict {:?}; no ledger", cert.verdict),
            files: vec![],
        });
    }
    let ledger = match build_ledger(cfg, &sys, &cert) {
        Ok(l) => l,
        Err(Error::Bounds(e @ BoundsError::NonFinite { .. })) => {
            return Ok(Outcome {
                code: EXIT_INCONCLUSIVE,
                message: format!("ledger overflow: {e}"),
                files: vec![],
            })
        }
        Err(e) => return Err(e),
    };
    let path = dir.join("ledger.json");
    write_json(&path, &ledger.to_flat_json())?;
    Ok(Outcome {
        code: EXIT_OK,
        message: format!(
            "B_K = {:.6e}, C = {:.6e}, C_underbar = {:.6e}, B = {:.6e}",
            ledger.b_k, ledger.c, ledger.c_underbar, ledger.b
        ),
        files: vec![path],
    })
}

pub fn cmd_simulate(cfg: &RunConfig) -> Result<Outcome, Error> {
    let sys = resolve_system(cfg)?;
    let settings = cfg.integrator();
    let mut ledger_note = None;
    let mut monitor = None;
    let mut ledger = None;
    match cfg.candidate().map_err(Error::Config)? {
        None => ledger_note = Some("no LLF candidate".to_string()),
        Some(_) => {
            let cert = run_certification(cfg, sys.reactions())?;
            if cert.verdict != Verdict::Verified {
                ledger_note = Some(format!("LLF verdict {:?}", cert.verdict));
            } else {
                match build_ledger(cfg, &sys, &cert) {
                    Ok(l) => {
                        let w = cert.candidate.as_ref().expect("verified").w.clone();
                        monitor = Some(Monitor::new(Llf::new(w), MonitorLimits::from(&l)));
                        ledger = Some(l);
                    }
                    Err(e) => ledger_note = Some(e.to_string()),
                }
            }
        }
    }
    let rec = integrate(&sys, monitor.as_ref(), &settings)?;
    let dir = out_dir(cfg)?;
    let traj = dir.join("trajectory.csv");
    let mons = dir.join("monitors.csv");
    let summ = dir.join("summary.json");
    write_trajectory_csv(&rec, fs::File::create(&traj)?).map_err(|e| Error::Config(e.to_string()))?;
    write_monitors_csv(&rec, fs::File::create(&mons)?).map_err(|e| Error::Config(e.to_string()))?;

    let max_norm = rec.max_norm();
    let mut by_lemma = serde_json::Map::new();
    for v in &rec.violations {
        let key = serde_json::to_value(v.lemma)?.as_str().unwrap_or_default().to_string();
        let slot = by_lemma.entry(key).or_insert(json!(0));
        *slot = json!(slot.as_u64().unwrap_or(0) + 1);
    }
    let asserted = ledger.as_ref().map(|l| {
        vec![json!({
            "quantity": "max_norm",
            "ledger_field": "B",
            "bound": l.b,
            "observed": max_norm,
            "holds": max_norm <= l.b,
        })]
    });
    let summary = json!({
        "status": rec.status,
        "t_final": rec.final_state().t,
        "steps": rec.steps,
        "halvings": rec.halvings,
        "max_norm": max_norm,
        "final_max_norm": rec.final_state().max_norm(),
        "ledger_available": ledger.is_some(),
        "ledger_note": ledger_note,
        "ledger_fields": ledger.as_ref().map(|l| json!({
            "M_K": l.m_k, "F_max": l.f_max.f_max, "C_underbar": l.c_underbar, "B": l.b,
        })),
        "asserted_bounds": asserted.unwrap_or_default(),
        "monitor": monitor.as_ref().map(|_| json!({
            "frames": rec.frames.len(),
            "threshold_field": "C_underbar",
            "frames_above_threshold": rec.frames_above_threshold,
            "vacuous": rec.vacuous(),
            "violations": rec.violations.len(),
            "violations_by_lemma": by_lemma,
            "first_violations": rec.violations.iter().take(20).collect::<Vec<_>>(),
        })),
    });
    write_json(&summ, &summary)?;
    let files = vec![traj, mons, summ];
    let t = rec.final_state().t;
    let (code, message) = match rec.status {
        Termination::Completed => (EXIT_OK, format!("completed at t = {t}, max norm {max_norm}")),
        Termination::BlowUpDetected => (EXIT_BLOWUP, format!("blow-up detected at t = {t}")),
        Termination::PositivityViolation => (EXIT_USAGE, format!("positivity violation at t = {t}")),
        Termination::StepFailure => (EXIT_USAGE, format!("non-finite state at t = {t}")),
    };
    Ok(Outcome { code, message, files })
}

fn mutualism_params(cfg: &RunConfig) -> MutualismParams {
    let mut p = MutualismParams::default();
    for (k, v) in &cfg.params {
        let slot = match k.as_str() {
            "a1" => &mut p.a1,
            "a2" => &mut p.a2,
            "b1" => &mut p.b1,
            "b2" => &mut p.b2,
            "c1" => &mut p.c1,
            "c2" => &mut p.c2,
            _ => continue,
        };
        *slot = *v;
    }
    p
}

pub fn cmd_certify(cfg: &RunConfig) -> Result<Outcome, Error> {
    let sys = resolve_system(cfg)?;
    let ratio = no_llf_ratio_test(sys.reactions());
    let explicit = !cfg.f_terms.is_empty();
    let mutualism = match (explicit, cfg.example) {
        (false, Some(Example::Mutualism)) => no_llf_mutualism_test(&mutualism_params(cfg)),
        _ => None,
    };
    let mut fired = Vec::new();
    if let Some(c) = &ratio {
        fired.push(format!("no-LLF {:?}", c.condition));
    }
    if let Some(c) = &mutualism {
        fired.push(format!("no-LLF {:?}", c.condition));
    }
    let blowup = match reduce_symmetric(&sys) {
        Err(e) => json!({ "reduction": Value::Null, "note": e.to_string() }),
        Ok(red) => {
            let cert = blowup_certificate(red.delta, red.u0, red.v0);
            let mut settings = cfg.integrator();
            settings.halving = cfg.halving.unwrap_or(true);
            if cfg.monitor_every.is_none() {
                settings.monitor_every = settings.dt;
            }
            let (run, samples) = simulate_reduced(&red, &settings)?;
            let gronwall = verify_gronwall(&cert, &samples).ok();
            if cert.verdict == BlowupVerdict::CertifiedBlowUp && gronwall.as_ref().is_some_and(|g| g.holds) {
                fired.push("certified blow-up".into());
            }
            json!({
                "reduction": red,
                "certificate": cert,
                "simulation": {
                    "status": run.status,
                    "t_final": samples.last().map(|s| s.0),
                    "steps": run.steps,
                    "halvings": run.halvings,
                },
                "gronwall": gronwall,
            })
        }
    };
    let dir = out_dir(cfg)?;
    let path = dir.join("certificate.json");
    write_json(
        &path,
        &json!({
            "config": fingerprint(cfg),
            "no_llf": { "ratio": ratio, "mutualism": mutualism },
            "blowup": blowup,
        }),
    )?;
    let (code, message) = if fired.is_empty() {
        (EXIT_INCONCLUSIVE, "no certificate applies".to_string())
    } else {
        (EXIT_OK, fired.join(", "))
    };
    Ok(Outcome {
        code,
        message,
        files: vec![path],
    })
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let result = match &cli.command {
        Command::Simulate(a) => a.to_config().and_then(|c| cmd_simulate(&c)),
        Command::VerifyLlf(a) => a.to_config().and_then(|c| cmd_verify_llf(&c)),
        Command::Bounds(a) => a.to_config().and_then(|c| cmd_bounds(&c, a.force)),
        Command::Certify(a) => a.to_config().and_then(|c| cmd_certify(&c)),
    };
    match result {
        Ok(o) => {
            if o.code == EXIT_OK || o.code == EXIT_BLOWUP {
                println!("{}", o.message);
            } else {
                eprintln!("{}", o.message);
            }
            for f in &o.files {
                println!("wrote {}", f.display());
            }
            o.code
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
