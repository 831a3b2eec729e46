//! Sweep execution: per-epsilon reference solutions and per-cell scheme runs.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ExperimentConfig, GammaArg, ReferenceKind, SchemeKind, TauRule};
use super::report::{ErrorReport, Row};
use crate::error::{Error, Result};
use crate::grid::{carrier, make_initial_data, ComplexField, PhaseSet, Profile, SchemeParams, TimeGrid, TorusGrid};
use crate::multiphase::{chi_switch, two_phase_coupling, Coupling, MultiphaseCn, MultiphaseLeapfrog, MultiphaseSystem};
use crate::reference::{
    assemble_mfe, cache_key, oracle_grid, oracle::splitstep_adaptive, solve_modulation, ModulationConfig,
    ModulationSolution, ReferenceCache,
};
use crate::resonance::{saturate, ResonanceStructure, WaveVector, DEFAULT_MAX_ROUNDS};
use crate::single_phase::{CnState, LeapfrogState};
use crate::spectral::{gamma_of_beta, max_mode_mu, stability_check, wiener_norm};

/// Reference actually used for one epsilon.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReferenceSource {
    Oracle,
    Mfe,
    ClosedForm,
}

impl ReferenceSource {
    pub fn label(self) -> &'static str {
        match self {
            ReferenceSource::Oracle => "oracle",
            ReferenceSource::Mfe => "mfe",
            ReferenceSource::ClosedForm => "closed_form",
        }
    }
}

/// The mesh grid of the domain for mesh size `h`; `L / h` must be integral.
pub fn mesh_grid(cfg: &ExperimentConfig, h: f64) -> Result<TorusGrid> {
    let m = (cfg.length / h).round();
    if m < 1.0 || (m * h - cfg.length).abs() > 1e-9 * cfg.length {
        return Err(Error::Config(format!("h = {h} does not divide the domain length {}", cfg.length)));
    }
    TorusGrid::new(cfg.x_left, cfg.length, m as usize)
}

/// Input phases with wave numbers moved onto the grid-periodic lattice for `epsilon`.
pub fn adjusted_phases(cfg: &ExperimentConfig, epsilon: f64) -> Result<PhaseSet> {
    let g = TorusGrid::new(cfg.x_left, cfg.length, 1)?;
    cfg.phase_set()?.adjusted(epsilon, &g)
}

fn structure(phases: &PhaseSet) -> Result<ResonanceStructure> {
    let input: Vec<WaveVector> = phases.kappas().into_iter().map(WaveVector::scalar).collect();
    saturate(&input, DEFAULT_MAX_ROUNDS)
}

/// Largest time step allowed by the configured rule.
pub fn tau_max(cfg: &ExperimentConfig, phases: &PhaseSet, epsilon: f64, h: f64) -> Result<f64> {
    let beta = |k: f64| k.abs() * h / epsilon;
    let kmax = phases.kappas().iter().fold(0.0f64, |m, k| m.max(k.abs()));
    Ok(match cfg.tau_rule {
        TauRule::Fixed(t) => t,
        TauRule::HalfH => 0.5 * h,
        TauRule::Cfl(arg) => {
            let gamma = if matches!(cfg.scheme, SchemeKind::StandardLf | SchemeKind::StandardCn) {
                gamma_of_beta(0.0)
            } else {
                match arg {
                    GammaArg::Beta => gamma_of_beta(beta(kmax)),
                    GammaArg::ThreeBeta => gamma_of_beta(3.0 * beta(kmax)),
                    GammaArg::MaxMu => {
                        let rs = structure(phases)?;
                        rs.kappas_1d()?
                            .into_iter()
                            .chain(rs.n.iter().map(|nu| nu.kappa.components[0]))
                            .map(|k| gamma_of_beta(beta(k)))
                            .fold(0.0, f64::max)
                    }
                }
            };
            (0.5 * h).min(h * h / (2.0 * epsilon * gamma))
        }
    })
}

/// Reference data shared by all cells of one epsilon.
pub struct EpsContext {
    pub epsilon: f64,
    pub phases: PhaseSet,
    pub source: ReferenceSource,
    oracle: Vec<ComplexField>,
    mfe: Option<ModulationSolution>,
}

fn choose_source(cfg: &ExperimentConfig, phases: &PhaseSet, epsilon: f64) -> ReferenceSource {
    match cfg.reference.kind {
        ReferenceKind::Oracle => ReferenceSource::Oracle,
        ReferenceKind::Mfe => ReferenceSource::Mfe,
        ReferenceKind::ClosedForm => ReferenceSource::ClosedForm,
        ReferenceKind::Auto => {
            let limit = if phases.len() == 1 {
                cfg.reference.oracle_min_epsilon
            } else {
                cfg.reference.oracle_min_epsilon_multiphase
            };
            if epsilon >= limit {
                ReferenceSource::Oracle
            } else {
                ReferenceSource::Mfe
            }
        }
    }
}

fn describe(cfg: &ExperimentConfig, phases: &PhaseSet, epsilon: f64, what: &str) -> String {
    format!(
        "v1;{what};eps={epsilon:e};lambda={:e};x={:e};L={:e};T={:e};kappa={:?};profiles={:?};ref={:?}",
        cfg.lambda,
        cfg.x_left,
        cfg.length,
        cfg.t_final,
        phases.kappas(),
        cfg.profiles,
        cfg.reference
    )
}

fn cached(
    cache: Option<&ReferenceCache>,
    key: String,
    t: f64,
    compute: impl FnOnce() -> Result<ComplexField>,
) -> Result<ComplexField> {
    if let Some(c) = cache {
        if let Some((tc, f)) = c.load(&key)? {
            if tc == t {
                return Ok(f);
            }
        }
        let f = compute()?;
        c.store(&key, t, &f)?;
        return Ok(f);
    }
    compute()
}

impl EpsContext {
    pub fn new(cfg: &ExperimentConfig, epsilon: f64, cache: Option<&ReferenceCache>) -> Result<Self> {
        let phases = adjusted_phases(cfg, epsilon)?;
        let source = choose_source(cfg, &phases, epsilon);
        let mut ctx = Self { epsilon, phases, source, oracle: Vec::new(), mfe: None };
        match source {
            ReferenceSource::Oracle => {
                // one fine grid per distinct requirement; coarser mesh grids reuse a finer one
                let mut grids: Vec<TorusGrid> = Vec::new();
                for &h in &cfg.hs {
                    let base = mesh_grid(cfg, h)?;
                    if grids.iter().any(|g| base.is_subgrid_of(g) && g.h() <= epsilon / 8.0 * (1.0 + 1e-12)) {
                        continue;
                    }
                    let g = oracle_grid(&base, epsilon)?;
                    grids.retain(|o| !o.is_subgrid_of(&g));
                    grids.push(g);
                }
                for g in grids {
                    let u0 = make_initial_data(&ctx.phases, epsilon, &g)?;
                    let key = cache_key(&format!("{};oracle;m={}", describe(cfg, &ctx.phases, epsilon, "oracle"), g.m));
                    let r = &cfg.reference;
                    let field = cached(cache, key, cfg.t_final, || {
                        splitstep_adaptive(&u0, epsilon, cfg.lambda, cfg.t_final, r.oracle_steps, r.oracle_tol, r.oracle_max_doublings)
                            .map(|(f, _, _)| f)
                    })?;
                    ctx.oracle.push(field);
                }
            }
            ReferenceSource::Mfe => {
                let rs = structure(&ctx.phases)?;
                let domain = TorusGrid::new(cfg.x_left, cfg.length, cfg.reference.mfe_m)?;
                let mc = ModulationConfig { m_mod: cfg.reference.mfe_m, steps: cfg.reference.mfe_steps, ..Default::default() };
                ctx.mfe = Some(solve_modulation(&rs, &ctx.phases, &domain, epsilon, cfg.lambda, cfg.t_final, &mc)?);
            }
            ReferenceSource::ClosedForm => {
                closed_form(cfg, &ctx.phases, epsilon, &TorusGrid::new(cfg.x_left, cfg.length, 1)?)?;
            }
        }
        Ok(ctx)
    }

    /// Reference solution at the final time sampled on `grid`.
    pub fn reference_on(&self, cfg: &ExperimentConfig, grid: &TorusGrid) -> Result<ComplexField> {
        match self.source {
            ReferenceSource::Oracle => {
                let fine = self
                    .oracle
                    .iter()
                    .find(|f| grid.is_subgrid_of(&f.grid))
                    .ok_or_else(|| Error::GridMismatch("no oracle grid contains the mesh grid".into()))?;
                fine.restrict_to(grid)
            }
            ReferenceSource::Mfe => assemble_mfe(self.mfe.as_ref().expect("solved"), cfg.t_final, grid, self.epsilon),
            ReferenceSource::ClosedForm => closed_form(cfg, &self.phases, self.epsilon, grid),
        }
    }
}

/// Exact solution for constant profiles: a single phase `c e^{-i lambda |c|^2 t}`
/// times its carrier, or any superposition when `lambda = 0`.
fn closed_form(cfg: &ExperimentConfig, phases: &PhaseSet, epsilon: f64, grid: &TorusGrid) -> Result<ComplexField> {
    if phases.len() > 1 && cfg.lambda != 0.0 {
        return Err(Error::Config("closed-form reference needs one phase or lambda = 0".into()));
    }
    let t = cfg.t_final;
    let mut out = ComplexField::zeros(*grid);
    for p in phases.phases() {
        let Profile::Constant(c) = p.profile else {
            return Err(Error::Config("closed-form reference needs constant profiles".into()));
        };
        let a = c * Complex64::cis(-cfg.lambda * c.norm_sqr() * t);
        let car = carrier(grid, p.kappa, 0.5 * p.kappa * p.kappa, epsilon, t);
        for (o, z) in out.values.iter_mut().zip(&car.values) {
            *o += a * z;
        }
    }
    Ok(out)
}

/// Numerical solution at the final time with its stability margin and switch value.
pub struct CellSolution {
    pub u: ComplexField,
    pub tau: f64,
    pub theta: f64,
    pub chi: Option<u8>,
}

fn single_theta(p: &SchemeParams, g: &TorusGrid) -> f64 {
    stability_check(p).theta.max(max_mode_mu(p, g))
}

/// Runs the configured scheme for one `(epsilon, h)` cell.
pub fn solve_cell(cfg: &ExperimentConfig, phases: &PhaseSet, epsilon: f64, h: f64) -> Result<CellSolution> {
    let grid = mesh_grid(cfg, h)?;
    let time = TimeGrid::with_max_step(cfg.t_final, tau_max(cfg, phases, epsilon, h)?)?;
    let tau = time.tau();
    let n = time.n;
    let u0 = make_initial_data(phases, epsilon, &grid)?;
    let kappa0 = phases.kappas()[0];
    let single = |kappa: f64| SchemeParams::new(epsilon, cfg.lambda, kappa, tau, grid.h());
    let multi = |coupling: Coupling| MultiphaseSystem::new(phases, epsilon, cfg.lambda, tau, grid, coupling);
    let lf = |sys: MultiphaseSystem| -> Result<CellSolution> {
        let theta = sys.lf_theta();
        let chi = Some(sys.chi());
        let mut s = MultiphaseLeapfrog::start(sys, phases, cfg.check_stability)?;
        s.advance_to(n);
        Ok(CellSolution { u: s.assemble(), tau, theta, chi })
    };
    let cn = |sys: MultiphaseSystem| -> Result<CellSolution> {
        let theta = sys.lf_theta();
        let chi = Some(sys.chi());
        let mut s = MultiphaseCn::with_tolerance(sys, phases, cfg.fp_tol, cfg.fp_maxit)?;
        s.advance_to(n)?;
        Ok(CellSolution { u: s.assemble(), tau, theta, chi })
    };
    let switched = || Coupling::Filtered { chi: chi_switch(grid.h(), epsilon, cfg.chi_c), corrections: true };
    match cfg.scheme {
        SchemeKind::Wlf | SchemeKind::StandardLf => {
            let p = if cfg.scheme == SchemeKind::Wlf { single(kappa0)? } else { single(0.0)? };
            let theta = single_theta(&p, &grid);
            let mut s = if cfg.check_stability {
                LeapfrogState::start(u0, p)?
            } else {
                LeapfrogState::start_unchecked(u0, p)?
            };
            s.advance_to(n);
            Ok(CellSolution { u: s.u_curr, tau, theta, chi: None })
        }
        SchemeKind::Wcn | SchemeKind::StandardCn => {
            let p = if cfg.scheme == SchemeKind::Wcn { single(kappa0)? } else { single(0.0)? };
            let theta = single_theta(&p, &grid);
            let mut s = CnState::with_tolerance(u0, p, cfg.fp_tol, cfg.fp_maxit)?;
            s.advance_to(n)?;
            Ok(CellSolution { u: s.u_curr, tau, theta, chi: None })
        }
        SchemeKind::TwoPhase(case) => lf(multi(two_phase_coupling(case))?),
        SchemeKind::MultiphaseLf => lf(multi(switched())?),
        SchemeKind::MultiphaseCn => cn(multi(switched())?),
    }
}

fn failed_row(cfg: &ExperimentConfig, epsilon: f64, h: f64, e: &Error) -> Row {
    Row {
        epsilon,
        h,
        tau: f64::NAN,
        scheme: cfg.scheme.label(),
        reference: format!("failed: {}", e.to_string().replace([',', '\n'], ";")),
        linf_error: f64::NAN,
        wiener_error: f64::NAN,
        runtime_seconds: 0.0,
        stability_theta: f64::NAN,
        chi: None,
    }
}

/// One cell against the reference of its epsilon.
pub fn run_cell(cfg: &ExperimentConfig, ctx: &EpsContext, h: f64) -> Result<Row> {
    let start = Instant::now();
    let sol = solve_cell(cfg, &ctx.phases, ctx.epsilon, h)?;
    let runtime = start.elapsed().as_secs_f64();
    if !sol.u.is_finite() {
        return Err(Error::InvalidParameter("solution is not finite".into()));
    }
    let reference = ctx.reference_on(cfg, &sol.u.grid)?;
    let diff = sol.u.sub(&reference)?;
    Ok(Row {
        epsilon: ctx.epsilon,
        h,
        tau: sol.tau,
        scheme: cfg.scheme.label(),
        reference: ctx.source.label().into(),
        linf_error: diff.max_abs(),
        wiener_error: wiener_norm(&diff),
        runtime_seconds: if cfg.output.record_runtime { runtime } else { 0.0 },
        stability_theta: sol.theta,
        chi: sol.chi,
    })
}

/// Runs every `(epsilon, h)` cell. Failed cells are recorded in their rows;
/// rows are ordered by epsilon, then h, as listed in the config.
pub fn run(cfg: &ExperimentConfig, jobs: usize) -> Result<ErrorReport> {
    for &h in &cfg.hs {
        mesh_grid(cfg, h)?;
    }
    let cache = ReferenceCache::from_env();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<Vec<Row>> = pool.install(|| {
        cfg.epsilons
            .par_iter()
            .map(|&eps| match EpsContext::new(cfg, eps, cache.as_ref()) {
                Ok(ctx) => cfg
                    .hs
                    .par_iter()
                    .map(|&h| run_cell(cfg, &ctx, h).unwrap_or_else(|e| failed_row(cfg, eps, h, &e)))
                    .collect(),
                Err(e) => cfg.hs.iter().map(|&h| failed_row(cfg, eps, h, &e)).collect(),
            })
            .collect()
    });
    Ok(ErrorReport { rows: rows.into_iter().flatten().collect() })
}
