//! Flat `key = value` run configuration.
//!
//! Scalar keys appear at most once. The term-table keys `reaction.f`,
//! `reaction.g` and `llf.w` may repeat; each line adds one term
//! `coef,p,q,r,s`. Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::catalog::Example;
use crate::llf::GridSettings;
use crate::model::{RationalTermFunction, Term};
use crate::sim::IntegratorSettings;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunConfig {
    pub example: Option<Example>,
    /// Overrides of the example parameters, in first-seen order.
    pub params: Vec<(String, f64)>,
    pub f_terms: Vec<Term>,
    pub g_terms: Vec<Term>,
    pub w_terms: Vec<Term>,
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub d: Option<f64>,
    pub u0: Option<Vec<f64>>,
    pub v0: Option<Vec<f64>>,
    pub t_end: Option<f64>,
    pub dt: Option<f64>,
    pub monitor_every: Option<f64>,
    pub halving: Option<bool>,
    pub grid_spacing: Option<f64>,
    pub grid_extent: Option<f64>,
    pub grid_v_cap: Option<f64>,
    pub out: Option<PathBuf>,
}

fn parse_f64(key: &str, s: &str) -> Result<f64, String> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| format!("key `{key}`: `{s}` is not a finite number"))
}

fn parse_list(key: &str, s: &str) -> Result<Vec<f64>, String> {
    s.split(',').map(|x| parse_f64(key, x)).collect()
}

fn parse_term(key: &str, s: &str) -> Result<Term, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(format!("key `{key}`: term `{s}` must be `coef,p,q,r,s`"));
    }
    let exp = |x: &str| {
        x.parse::<u32>()
            .map_err(|_| format!("key `{key}`: exponent `{x}` is not a non-negative integer"))
    };
    Ok(Term::new(
        parse_f64(key, parts[0])?,
        exp(parts[1])?,
        exp(parts[2])?,
        exp(parts[3])?,
        exp(parts[4])?,
    ))
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<String> = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("line {}: expected `key = value`, got `{line}`", lineno + 1))?;
            let (key, value) = (key.trim(), value.trim());
            let repeatable = matches!(key, "reaction.f" | "reaction.g" | "llf.w");
            if !repeatable {
                if seen.iter().any(|k| k == key) {
                    return Err(format!("key `{key}` given twice"));
                }
                seen.push(key.to_string());
            }
            cfg.set(key, value)?;
        }
        Ok(cfg)
    }

    /// Applies one assignment; also used for `--set key=value`.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let num = || parse_f64(key, value);
        match key {
            "system.example" => self.example = Some(value.parse()?),
            "system.n" => {
                let n = value
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n >= 2)
                    .ok_or_else(|| format!("key `{key}`: `{value}` is not an integer ≥ 2"))?;
                self.n = Some(n);
            }
            "system.gamma" => self.gamma = Some(num()?),
            "system.d" => self.d = Some(num()?),
            "init.u" => self.u0 = Some(parse_list(key, value)?),
            "init.v" => self.v0 = Some(parse_list(key, value)?),
            "integrator.t_end" => self.t_end = Some(num()?),
            "integrator.dt" => self.dt = Some(num()?),
            "integrator.monitor_every" => self.monitor_every = Some(num()?),
            "integrator.halving" => {
                self.halving = Some(
                    value
                        .parse::<bool>()
                        .map_err(|_| format!("key `{key}`: `{value}` is not true/false"))?,
                )
            }
            "grid.spacing" => self.grid_spacing = Some(num()?),
            "grid.extent" => self.grid_extent = Some(num()?),
            "grid.v_cap" => self.grid_v_cap = Some(num()?),
            "output.dir" => self.out = Some(PathBuf::from(value)),
            "reaction.f" => self.f_terms.push(parse_term(key, value)?),
            "reaction.g" => self.g_terms.push(parse_term(key, value)?),
            "llf.w" => self.w_terms.push(parse_term(key, value)?),
            _ => {
                let Some(name) = key.strip_prefix("param.") else {
                    return Err(format!("unknown key `{key}`"));
                };
                let ex = self
                    .example
                    .ok_or_else(|| format!("key `{key}` needs `system.example` to be set first"))?;
                if !ex.param_names().contains(&name) {
                    return Err(format!("unknown key `{key}` for example {ex}"));
                }
                let v = num()?;
                match self.params.iter_mut().find(|(k, _)| k == name) {
                    Some(slot) => slot.1 = v,
                    None => self.params.push((name.to_string(), v)),
                }
            }
        }
        Ok(())
    }

    /// Canonical text form; `parse(emit())` reproduces the config.
    pub fn emit(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        if let Some(e) = self.example {
            kv("system.example", e.name().to_string());
        }
        for (k, v) in &self.params {
            kv(&format!("param.{k}"), v.to_string());
        }
        if let Some(n) = self.n {
            kv("system.n", n.to_string());
        }
        if let Some(x) = self.gamma {
            kv("system.gamma", x.to_string());
        }
        if let Some(x) = self.d {
            kv("system.d", x.to_string());
        }
        if let Some(x) = &self.u0 {
            kv("init.u", fmt_list(x));
        }
        if let Some(x) = &self.v0 {
            kv("init.v", fmt_list(x));
        }
        for (k, x) in [
            ("integrator.t_end", self.t_end),
            ("integrator.dt", self.dt),
            ("integrator.monitor_every", self.monitor_every),
        ] {
            if let Some(x) = x {
                kv(k, x.to_string());
            }
        }
        if let Some(h) = self.halving {
            kv("integrator.halving", h.to_string());
        }
        for (k, x) in [
            ("grid.spacing", self.grid_spacing),
            ("grid.extent", self.grid_extent),
            ("grid.v_cap", self.grid_v_cap),
        ] {
            if let Some(x) = x {
                kv(k, x.to_string());
            }
        }
        if let Some(p) = &self.out {
            kv("output.dir", p.display().to_string());
        }
        for (k, terms) in [("reaction.f", &self.f_terms), ("reaction.g", &self.g_terms), ("llf.w", &self.w_terms)] {
            for t in terms {
                kv(k, format!("{},{},{},{},{}", t.coef, t.p, t.q, t.r, t.s));
            }
        }
        s
    }

    pub fn integrator(&self) -> IntegratorSettings {
        let base = IntegratorSettings::default();
        IntegratorSettings {
            t_end: self.t_end.unwrap_or(base.t_end),
            dt: self.dt.unwrap_or(base.dt),
            monitor_every: self.monitor_every.unwrap_or(base.monitor_every),
            halving: self
                .halving
                .unwrap_or_else(|| self.example.is_some_and(|e| e.expects_blowup())),
            ..base
        }
    }

    pub fn grid(&self) -> GridSettings {
        let base = GridSettings::default();
        GridSettings {
            extent: self.grid_extent.or(base.extent),
            spacing: self.grid_spacing.unwrap_or(base.spacing),
            v_cap: self.grid_v_cap.unwrap_or(base.v_cap),
        }
    }

    pub fn candidate(&self) -> Result<Option<RationalTermFunction>, String> {
        if !self.w_terms.is_empty() {
            return RationalTermFunction::new(self.w_terms.iter().copied())
                .map(Some)
                .map_err(|e| e.to_string());
        }
        Ok(self.example.and_then(|e| e.llf_candidate(&self.params)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let text = "\
# comment
system.example = weinberger
param.delta = 0.1
system.gamma = 1
system.d = 1
init.u = 4,2
init.v = 2,4
integrator.t_end = 0.5
integrator.halving = true
grid.spacing = 0.02
llf.w = 1,2,0,0,0
llf.w = 0.5,0,2,0,1
";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.params, vec![("delta".to_string(), 0.1)]);
        assert_eq!(cfg.w_terms.len(), 2);
        let again = RunConfig::parse(&cfg.emit()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.emit(), cfg.emit());
    }

    #[test]
    fn rejects_bad_input() {
        let err = RunConfig::parse("system.gama = 1").unwrap_err();
        assert!(err.contains("system.gama"));
        assert!(RunConfig::parse("system.d = 1\nsystem.d = 2").is_err());
        assert!(RunConfig::parse("param.delta = 1").is_err());
        assert!(RunConfig::parse("system.example = weinberger\nparam.a = 1").is_err());
        assert!(RunConfig::parse("reaction.f = 1,2,3").is_err());
        assert!(RunConfig::parse("system.n = 1").is_err());
        assert!(RunConfig::parse("init.u = 1,nan").is_err());
        assert!(RunConfig::parse("no equals sign").is_err());
    }

    #[test]
    fn halving_defaults_follow_example() {
        let mut cfg = RunConfig::default();
        assert!(!cfg.integrator().halving);
        cfg.example = Some(Example::Mutualism);
        assert!(cfg.integrator().halving);
        cfg.halving = Some(false);
        assert!(!cfg.integrator().halving);
    }
}
