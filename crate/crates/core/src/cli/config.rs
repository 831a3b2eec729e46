//! Flat `section.key = value` experiment configuration. Lines may also be
//! grouped under a `[section]` header; `#` starts a comment; lists are comma
//! separated, and `logspace(a, b, n)` expands to `n` log-spaced values.

use std::collections::BTreeMap;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Phase, PhaseSet, Profile};
use crate::multiphase::TwoPhaseCase;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeKind {
    Wlf,
    Wcn,
    TwoPhase(TwoPhaseCase),
    MultiphaseLf,
    MultiphaseCn,
    StandardLf,
    StandardCn,
}

impl SchemeKind {
    pub fn label(&self) -> String {
        match self {
            SchemeKind::Wlf => "wlf".into(),
            SchemeKind::Wcn => "wcn".into(),
            SchemeKind::TwoPhase(c) => format!("two_phase_case{}", *c as u8),
            SchemeKind::MultiphaseLf => "multiphase_lf".into(),
            SchemeKind::MultiphaseCn => "multiphase_cn".into(),
            SchemeKind::StandardLf => "standard_lf".into(),
            SchemeKind::StandardCn => "standard_cn".into(),
        }
    }

    pub fn is_leapfrog(&self) -> bool {
        matches!(self, SchemeKind::Wlf | SchemeKind::TwoPhase(_) | SchemeKind::MultiphaseLf | SchemeKind::StandardLf)
    }

    pub fn is_single_phase(&self) -> bool {
        matches!(self, SchemeKind::Wlf | SchemeKind::Wcn)
    }
}

/// Argument of `gamma` in the CFL time step rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GammaArg {
    /// `gamma(beta)` with `beta = max |kappa_r| h / eps`.
    Beta,
    /// `gamma(3 beta)`, the two-phase correction wave number.
    ThreeBeta,
    /// Maximum of `gamma(beta_mu)` over all saturated and correction wave numbers.
    MaxMu,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TauRule {
    Fixed(f64),
    HalfH,
    /// `min(h/2, h^2 / (2 eps gamma))`.
    Cfl(GammaArg),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceKind {
    Oracle,
    Mfe,
    ClosedForm,
    /// Oracle above the per-kind epsilon threshold, modulated Fourier expansion below.
    Auto,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceConfig {
    pub kind: ReferenceKind,
    pub oracle_min_epsilon: f64,
    pub oracle_min_epsilon_multiphase: f64,
    pub oracle_steps: usize,
    pub oracle_tol: f64,
    pub oracle_max_doublings: usize,
    pub mfe_m: usize,
    pub mfe_steps: usize,
}

impl Default for ReferenceConfig {
    fn default() -> Self {
        Self {
            kind: ReferenceKind::Auto,
            oracle_min_epsilon: 2e-4,
            oracle_min_epsilon_multiphase: 1e-2,
            oracle_steps: 32,
            oracle_tol: 1e-8,
            oracle_max_doublings: 8,
            mfe_m: 256,
            mfe_steps: 2048,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProfileSpec {
    Gaussian { center: f64, width: f64, amplitude: f64 },
    Constant(f64),
}

impl ProfileSpec {
    pub fn to_profile(&self) -> Profile {
        match *self {
            ProfileSpec::Gaussian { center, width, amplitude } => {
                Profile::Gaussian { center, width, amplitude: Complex64::new(amplitude, 0.0) }
            }
            ProfileSpec::Constant(c) => Profile::Constant(Complex64::new(c, 0.0)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub csv: String,
    pub svg: String,
    /// Write measured runtimes; off by default so that output bytes are reproducible.
    pub record_runtime: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub epsilons: Vec<f64>,
    pub lambda: f64,
    pub x_left: f64,
    pub length: f64,
    pub t_final: f64,
    pub kappas: Vec<f64>,
    pub profiles: Vec<ProfileSpec>,
    pub scheme: SchemeKind,
    pub check_stability: bool,
    pub fp_tol: f64,
    pub fp_maxit: usize,
    pub hs: Vec<f64>,
    pub tau_rule: TauRule,
    pub chi_c: f64,
    pub reference: ReferenceConfig,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    /// Input phases with the configured (unadjusted) wave numbers.
    pub fn phase_set(&self) -> Result<PhaseSet> {
        PhaseSet::new(
            self.kappas
                .iter()
                .zip(&self.profiles)
                .map(|(&kappa, p)| Phase { kappa, profile: p.to_profile() })
                .collect(),
        )
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }
}

fn cfg_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

fn parse_f64(key: &str, s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| cfg_err(format!("{key}: cannot parse number '{}'", s.trim())))
}

/// Comma list or `logspace(a, b, n)`.
pub fn parse_list(key: &str, s: &str) -> Result<Vec<f64>> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("logspace(").and_then(|r| r.strip_suffix(')')) {
        let parts: Vec<&str> = inner.split(',').collect();
        if parts.len() != 3 {
            return Err(cfg_err(format!("{key}: logspace needs (start, stop, count)")));
        }
        let (a, b) = (parse_f64(key, parts[0])?, parse_f64(key, parts[1])?);
        let n: usize = parts[2].trim().parse().map_err(|_| cfg_err(format!("{key}: bad logspace count")))?;
        if !(a > 0.0 && b > 0.0) || n == 0 {
            return Err(cfg_err(format!("{key}: logspace needs positive bounds and count")));
        }
        if n == 1 {
            return Ok(vec![a]);
        }
        let (la, lb) = (a.log10(), b.log10());
        return Ok((0..n).map(|i| 10f64.powf(la + (lb - la) * i as f64 / (n - 1) as f64)).collect());
    }
    let v = s.split(',').map(|p| parse_f64(key, p)).collect::<Result<Vec<_>>>()?;
    if v.is_empty() {
        return Err(cfg_err(format!("{key}: empty list")));
    }
    Ok(v)
}

fn parse_bool(key: &str, s: &str) -> Result<bool> {
    match s.trim() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(cfg_err(format!("{key}: expected a boolean, got '{other}'"))),
    }
}

fn parse_scheme(s: &str, case: Option<&str>) -> Result<SchemeKind> {
    Ok(match s.trim() {
        "wlf" => SchemeKind::Wlf,
        "wcn" => SchemeKind::Wcn,
        "two_phase_case" => {
            let c = case.ok_or_else(|| cfg_err("scheme.case is required for two_phase_case"))?;
            let i: u8 = c.trim().parse().map_err(|_| cfg_err("scheme.case must be 0..=3"))?;
            SchemeKind::TwoPhase(TwoPhaseCase::from_index(i).map_err(|e| cfg_err(e.to_string()))?)
        }
        "multiphase_lf" => SchemeKind::MultiphaseLf,
        "multiphase_cn" => SchemeKind::MultiphaseCn,
        "standard_lf" => SchemeKind::StandardLf,
        "standard_cn" => SchemeKind::StandardCn,
        other => return Err(cfg_err(format!("unknown scheme '{other}'"))),
    })
}

fn parse_tau_rule(s: &str, tau: Option<&str>, gamma: Option<&str>) -> Result<TauRule> {
    Ok(match s.trim() {
        "fixed" => {
            let t = tau.ok_or_else(|| cfg_err("discretization.tau is required for the fixed rule"))?;
            let t = parse_f64("discretization.tau", t)?;
            if !(t > 0.0) {
                return Err(cfg_err("discretization.tau must be positive"));
            }
            TauRule::Fixed(t)
        }
        "half_h" => TauRule::HalfH,
        "cfl" => TauRule::Cfl(match gamma.map(str::trim).unwrap_or("beta") {
            "beta" => GammaArg::Beta,
            "three_beta" => GammaArg::ThreeBeta,
            "max_mu" => GammaArg::MaxMu,
            other => return Err(cfg_err(format!("unknown gamma argument '{other}'"))),
        }),
        other => return Err(cfg_err(format!("unknown tau rule '{other}'"))),
    })
}

const KEYS: &[&str] = &[
    "equation.epsilon",
    "equation.lambda",
    "equation.x_left",
    "equation.length",
    "equation.t_final",
    "phases.kappa",
    "phases.profile",
    "phases.center",
    "phases.width",
    "phases.amplitude",
    "scheme.name",
    "scheme.case",
    "scheme.check_stability",
    "scheme.fp_tol",
    "scheme.fp_maxit",
    "discretization.h",
    "discretization.tau_rule",
    "discretization.tau",
    "discretization.gamma",
    "chi.c",
    "reference.kind",
    "reference.oracle_min_epsilon",
    "reference.oracle_min_epsilon_multiphase",
    "reference.oracle_steps",
    "reference.oracle_tol",
    "reference.oracle_max_doublings",
    "reference.mfe_m",
    "reference.mfe_steps",
    "output.csv",
    "output.svg",
    "output.record_runtime",
];

/// Raw `key -> value` pairs, with section headers expanded.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    let mut section = String::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            section = name.trim().to_string();
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| cfg_err(format!("line {}: expected 'key = value'", lineno + 1)))?;
        let k = k.trim();
        let key = if section.is_empty() || k.contains('.') { k.to_string() } else { format!("{section}.{k}") };
        if !KEYS.contains(&key.as_str()) {
            return Err(cfg_err(format!("line {}: unknown key '{key}'", lineno + 1)));
        }
        if out.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(cfg_err(format!("line {}: duplicate key '{key}'", lineno + 1)));
        }
    }
    Ok(out)
}

/// Per-phase values: one entry applies to all phases.
fn per_phase(key: &str, raw: Option<&String>, n: usize, default: f64) -> Result<Vec<f64>> {
    let Some(raw) = raw else { return Ok(vec![default; n]) };
    let v = parse_list(key, raw)?;
    match v.len() {
        1 => Ok(vec![v[0]; n]),
        l if l == n => Ok(v),
        l => Err(cfg_err(format!("{key}: {l} values for {n} phases"))),
    }
}

impl std::str::FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        let p = parse_pairs(text)?;
        let get = |k: &str| p.get(k);
        let req = |k: &str| get(k).ok_or_else(|| cfg_err(format!("missing key '{k}'")));
        let num = |k: &str, d: f64| get(k).map_or(Ok(d), |v| parse_f64(k, v));
        let count = |k: &str, d: usize| {
            get(k).map_or(Ok(d), |v| v.trim().parse::<usize>().map_err(|_| cfg_err(format!("{k}: expected a count"))))
        };

        let epsilons = parse_list("equation.epsilon", req("equation.epsilon")?)?;
        if epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
            return Err(cfg_err("equation.epsilon values must lie in (0, 1]"));
        }
        let kappas = parse_list("phases.kappa", req("phases.kappa")?)?;
        let n = kappas.len();
        let kinds: Vec<String> = match get("phases.profile") {
            None => vec!["gaussian".into(); n],
            Some(s) => {
                let v: Vec<String> = s.split(',').map(|x| x.trim().to_string()).collect();
                match v.len() {
                    1 => vec![v[0].clone(); n],
                    l if l == n => v,
                    l => return Err(cfg_err(format!("phases.profile: {l} values for {n} phases"))),
                }
            }
        };
        let centers = per_phase("phases.center", get("phases.center"), n, 0.0)?;
        let widths = per_phase("phases.width", get("phases.width"), n, 1.0)?;
        let amps = per_phase("phases.amplitude", get("phases.amplitude"), n, 1.0)?;
        let profiles = (0..n)
            .map(|i| match kinds[i].as_str() {
                "gaussian" => Ok(ProfileSpec::Gaussian { center: centers[i], width: widths[i], amplitude: amps[i] }),
                "constant" => Ok(ProfileSpec::Constant(amps[i])),
                other => Err(cfg_err(format!("unknown profile '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;

        let scheme = parse_scheme(req("scheme.name")?, get("scheme.case").map(String::as_str))?;
        if scheme.is_single_phase() && n != 1 {
            return Err(cfg_err(format!("scheme {} needs exactly one phase", scheme.label())));
        }
        if matches!(scheme, SchemeKind::TwoPhase(_)) && (n != 2 || kappas[0] != -kappas[1]) {
            return Err(cfg_err("two_phase_case needs phases.kappa = k, -k"));
        }
        let hs = parse_list("discretization.h", req("discretization.h")?)?;
        if hs.iter().any(|&h| !(h > 0.0)) {
            return Err(cfg_err("discretization.h values must be positive"));
        }
        let tau_rule = parse_tau_rule(
            get("discretization.tau_rule").map_or("cfl", String::as_str),
            get("discretization.tau").map(String::as_str),
            get("discretization.gamma").map(String::as_str),
        )?;

        let mut reference = ReferenceConfig::default();
        if let Some(k) = get("reference.kind") {
            reference.kind = match k.as_str() {
                "oracle" => ReferenceKind::Oracle,
                "mfe" => ReferenceKind::Mfe,
                "closed_form" => ReferenceKind::ClosedForm,
                "auto" => ReferenceKind::Auto,
                other => return Err(cfg_err(format!("unknown reference '{other}'"))),
            };
        }
        reference.oracle_min_epsilon = num("reference.oracle_min_epsilon", reference.oracle_min_epsilon)?;
        reference.oracle_min_epsilon_multiphase =
            num("reference.oracle_min_epsilon_multiphase", reference.oracle_min_epsilon_multiphase)?;
        reference.oracle_steps = count("reference.oracle_steps", reference.oracle_steps)?;
        reference.oracle_tol = num("reference.oracle_tol", reference.oracle_tol)?;
        reference.oracle_max_doublings = count("reference.oracle_max_doublings", reference.oracle_max_doublings)?;
        reference.mfe_m = count("reference.mfe_m", reference.mfe_m)?;
        reference.mfe_steps = count("reference.mfe_steps", reference.mfe_steps)?;
        if reference.oracle_steps == 0 || reference.mfe_m < 4 || reference.mfe_steps == 0 {
            return Err(cfg_err("reference step counts must be positive and mfe_m >= 4"));
        }

        let cfg = ExperimentConfig {
            epsilons,
            lambda: num("equation.lambda", 1.0)?,
            x_left: num("equation.x_left", -6.0)?,
            length: num("equation.length", 12.0)?,
            t_final: num("equation.t_final", 0.5)?,
            kappas,
            profiles,
            scheme,
            check_stability: get("scheme.check_stability").map_or(Ok(true), |v| parse_bool("scheme.check_stability", v))?,
            fp_tol: num("scheme.fp_tol", 1e-12)?,
            fp_maxit: count("scheme.fp_maxit", 50)?,
            hs,
            tau_rule,
            chi_c: num("chi.c", 5.0)?,
            reference,
            output: OutputConfig {
                csv: get("output.csv").cloned().unwrap_or_else(|| "errors.csv".into()),
                svg: get("output.svg").cloned().unwrap_or_else(|| "errors.svg".into()),
                record_runtime: get("output.record_runtime")
                    .map_or(Ok(false), |v| parse_bool("output.record_runtime", v))?,
            },
        };
        if !(cfg.length > 0.0) || !(cfg.t_final > 0.0) || !cfg.lambda.is_finite() {
            return Err(cfg_err("equation.length and equation.t_final must be positive"));
        }
        cfg.phase_set().map_err(|e| cfg_err(e.to_string()))?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SINGLE_PHASE: &str = "
# single phase
[equation]
epsilon = logspace(1e-4, 1e-1, 4)
lambda = 1
[phases]
kappa = 1
profile = gaussian
[scheme]
name = wlf
[discretization]
h = 0.1, 0.05, 0.025
tau_rule = cfl
";

    #[test]
    fn parses_sections_and_defaults() {
        let c: ExperimentConfig = SINGLE_PHASE.parse().unwrap();
        assert_eq!(c.epsilons.len(), 4);
        assert!((c.epsilons[0] - 1e-4).abs() < 1e-18 && (c.epsilons[3] - 1e-1).abs() < 1e-15);
        assert!((c.epsilons[1] - 1e-3).abs() < 1e-15);
        assert_eq!(c.hs, vec![0.1, 0.05, 0.025]);
        assert_eq!(c.tau_rule, TauRule::Cfl(GammaArg::Beta));
        assert_eq!((c.x_left, c.length, c.t_final), (-6.0, 12.0, 0.5));
        assert_eq!(c.profiles[0], ProfileSpec::Gaussian { center: 0.0, width: 1.0, amplitude: 1.0 });
        assert_eq!(c.reference.kind, ReferenceKind::Auto);
        assert!(!c.output.record_runtime);
    }

    #[test]
    fn flat_keys_and_two_phase() {
        let c: ExperimentConfig = "equation.epsilon = 1e-4\nphases.kappa = 1, -1\nphases.amplitude = 0.5\n\
             scheme.name = two_phase_case\nscheme.case = 3\ndiscretization.h = 0.05\n\
             discretization.tau_rule = fixed\ndiscretization.tau = 0.025\nscheme.check_stability = false"
            .parse()
            .unwrap();
        assert_eq!(c.scheme, SchemeKind::TwoPhase(TwoPhaseCase::SecondOrder));
        assert_eq!(c.tau_rule, TauRule::Fixed(0.025));
        assert!(!c.check_stability);
        assert_eq!(c.profiles.len(), 2);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = [
            "equation.epsilon = 0.1\nphases.kappa = 1\nscheme.name = wlf\ndiscretization.h = 0.1\nfoo.bar = 1",
            "equation.epsilon = 0.1\nphases.kappa = 1, -1\nscheme.name = wlf\ndiscretization.h = 0.1",
            "equation.epsilon = 2\nphases.kappa = 1\nscheme.name = wlf\ndiscretization.h = 0.1",
            "equation.epsilon = 0.1\nphases.kappa = 1\nscheme.name = wlf\ndiscretization.h = 0.1\ndiscretization.tau_rule = fixed",
            "equation.epsilon = 0.1\nphases.kappa = 1\nscheme.name = nope\ndiscretization.h = 0.1",
            "phases.kappa = 1\nscheme.name = wlf\ndiscretization.h = 0.1",
            "equation.epsilon = 0.1\nequation.epsilon = 0.2\nphases.kappa = 1\nscheme.name = wlf\ndiscretization.h = 0.1",
        ];
        for b in bad {
            assert!(matches!(b.parse::<ExperimentConfig>(), Err(Error::Config(_))), "{b}");
        }
    }
}
