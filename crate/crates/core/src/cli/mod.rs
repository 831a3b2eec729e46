//! Command line harness: error sweeps, stability and resonance reports and
//! defect scaling tables.

pub mod config;
pub mod report;
pub mod runner;

use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::{Profile, SchemeParams};
use crate::resonance::{saturate, WaveVector, DEFAULT_MAX_ROUNDS};
use crate::single_phase::{compute_defect, ConstantProfileSolution};
use crate::spectral::{mode_analyses, wiener_norm};
use config::ExperimentConfig;
use runner::{adjusted_phases, mesh_grid, tau_max};

#[derive(Parser, Debug)]
#[command(name = "oscidiff", version, about = "Weighted finite difference experiments for the semiclassical NLS")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run an (epsilon, h) error sweep; writes CSV and SVG.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Per-mode linear stability report of the leapfrog scheme.
    Stability {
        #[arg(long)]
        config: PathBuf,
    },
    /// Saturated wave numbers and nonresonant triples.
    Resonance {
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        kappas: Vec<f64>,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Defect table under simultaneous (tau, h) halving.
    Defect {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 4)]
        levels: usize,
    },
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn stability_csv(cfg: &ExperimentConfig) -> Result<String> {
    let mut s = String::from("epsilon,h,tau,kappa,k,gamma_k,mu_k,abs_lambda_plus,abs_lambda_minus,cond\n");
    for &eps in &cfg.epsilons {
        let phases = adjusted_phases(cfg, eps)?;
        for &h in &cfg.hs {
            let grid = mesh_grid(cfg, h)?;
            let tau = crate::grid::TimeGrid::with_max_step(cfg.t_final, tau_max(cfg, &phases, eps, h)?)?.tau();
            for kappa in phases.kappas() {
                let p = SchemeParams::new(eps, cfg.lambda, kappa, tau, grid.h())?;
                for a in mode_analyses(&p, &grid) {
                    let _ = writeln!(
                        s,
                        "{eps:e},{h},{tau:e},{kappa},{},{:e},{:e},{:.15},{:.15},{:e}",
                        a.k,
                        a.gamma_k,
                        a.mu_k,
                        a.lambda_plus.norm(),
                        a.lambda_minus.norm(),
                        a.condition_number()
                    );
                }
            }
        }
    }
    Ok(s)
}

#[derive(Serialize)]
struct ResonanceJson {
    k: Vec<Vec<f64>>,
    omega: Vec<f64>,
    n: Vec<TripleJson>,
}

#[derive(Serialize)]
struct TripleJson {
    indices: [usize; 3],
    kappa: Vec<f64>,
    omega: f64,
    omega_star: f64,
    delta: f64,
}

pub fn resonance_report(kappas: &[f64], dim: usize, json: bool) -> Result<String> {
    if dim == 0 || kappas.is_empty() || kappas.len() % dim != 0 {
        return Err(Error::Config(format!("{} components do not form vectors of dimension {dim}", kappas.len())));
    }
    let input = kappas.chunks(dim).map(|c| WaveVector::new(c.to_vec())).collect::<Result<Vec<_>>>()?;
    let rs = saturate(&input, DEFAULT_MAX_ROUNDS)?;
    if json {
        let doc = ResonanceJson {
            k: rs.k.iter().map(|v| v.components.clone()).collect(),
            omega: rs.omegas.clone(),
            n: rs
                .n
                .iter()
                .map(|t| TripleJson {
                    indices: [t.indices.0, t.indices.1, t.indices.2],
                    kappa: t.kappa.components.clone(),
                    omega: t.omega,
                    omega_star: t.omega_star,
                    delta: t.delta,
                })
                .collect(),
        };
        return serde_json::to_string_pretty(&doc).map_err(|e| Error::Io(std::io::Error::other(e)));
    }
    let vec = |v: &WaveVector| v.components.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(";");
    let mut s = String::from("kind,index,kappa,omega,omega_star,delta\n");
    for (i, (v, w)) in rs.k.iter().zip(&rs.omegas).enumerate() {
        let _ = writeln!(s, "K,{i},{},{w},{},0", vec(v), v.omega());
    }
    for t in &rs.n {
        let (i, j, k) = t.indices;
        let _ = writeln!(s, "N,{i};{j};{k},{},{},{},{}", vec(&t.kappa), t.omega, t.omega_star, t.delta);
    }
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectRow {
    pub epsilon: f64,
    pub h: f64,
    pub tau: f64,
    pub linf: f64,
    pub wiener: f64,
}

/// Defect of the exact constant-profile solution at `t = T/2` over
/// `levels` simultaneous halvings of `(tau, h)`, for every epsilon.
pub fn defect_table(cfg: &ExperimentConfig, levels: usize) -> Result<Vec<DefectRow>> {
    if cfg.kappas.len() != 1 {
        return Err(Error::Config("defect table needs one phase".into()));
    }
    let mut rows = Vec::new();
    for &eps in &cfg.epsilons {
        let phases = adjusted_phases(cfg, eps)?;
        let phase = &phases.phases()[0];
        let Profile::Constant(c) = phase.profile else {
            return Err(Error::Config("defect table needs a constant profile".into()));
        };
        let a = ConstantProfileSolution { amplitude: c, lambda: cfg.lambda };
        let h0 = cfg.hs[0];
        let tau0 = tau_max(cfg, &phases, eps, h0)?;
        for l in 0..levels {
            let s = 0.5f64.powi(l as i32);
            let grid = mesh_grid(cfg, h0 * s)?;
            let p = SchemeParams::new(eps, cfg.lambda, phase.kappa, tau0 * s, grid.h())?;
            let d = compute_defect(&a, &p, &grid, 0.5 * cfg.t_final);
            rows.push(DefectRow { epsilon: eps, h: grid.h(), tau: p.tau, linf: d.max_abs(), wiener: wiener_norm(&d) });
        }
    }
    Ok(rows)
}

/// Fitted orders (max norm, Wiener norm) of the rows of one epsilon under the
/// simultaneous halving: slopes of `log |d|` against `log sqrt(tau^2 + h^2)`.
pub fn defect_orders(rows: &[DefectRow]) -> (f64, f64) {
    let x: Vec<f64> = rows.iter().map(|r| r.tau.hypot(r.h)).collect();
    let a: Vec<f64> = rows.iter().map(|r| r.linf).collect();
    let b: Vec<f64> = rows.iter().map(|r| r.wiener).collect();
    (loglog_slope(&x, &a), loglog_slope(&x, &b))
}

pub fn defect_csv(rows: &[DefectRow]) -> String {
    let mut s = String::from("epsilon,h,tau,linf_defect,wiener_defect,linf_over_epsilon\n");
    for r in rows {
        let _ = writeln!(s, "{:e},{},{:e},{:e},{:e},{:e}", r.epsilon, r.h, r.tau, r.linf, r.wiener, r.linf / r.epsilon);
    }
    s
}

fn config_exit(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(1)
}

fn load(path: &PathBuf) -> std::result::Result<ExperimentConfig, ExitCode> {
    ExperimentConfig::from_file(path).map_err(|e| config_exit(&e))
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(s: &str) {
    use std::io::Write;
    let _ = std::io::stdout().write_all(s.as_bytes());
}

/// Executes a parsed command line; returns the process exit code.
pub fn execute(cli: Cli) -> ExitCode {
    match cli.command {
        Command::Run { config, out, jobs } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            let report = match runner::run(&cfg, jobs.max(1)) {
                Ok(r) => r,
                Err(e) => return config_exit(&e),
            };
            let written = std::fs::create_dir_all(&out)
                .map_err(Error::from)
                .and_then(|_| report::emit_csv(&report, &out.join(&cfg.output.csv)))
                .and_then(|_| report::emit_svg(&report, &out.join(&cfg.output.svg)));
            if let Err(e) = written {
                return config_exit(&e);
            }
            let failed = report.failures();
            if failed > 0 {
                eprintln!("{failed} of {} cells failed", report.rows.len());
                return ExitCode::from(2);
            }
            ExitCode::SUCCESS
        }
        Command::Stability { config } => match load(&config).map(|c| stability_csv(&c)) {
            Ok(Ok(s)) => {
                emit(&s);
                ExitCode::SUCCESS
            }
            Ok(Err(e)) => config_exit(&e),
            Err(code) => code,
        },
        Command::Resonance { kappas, dim, json } => match resonance_report(&kappas, dim, json) {
            Ok(s) => {
                emit(&format!("{}\n", s.trim_end()));
                ExitCode::SUCCESS
            }
            Err(e) => config_exit(&e),
        },
        Command::Defect { config, levels } => {
            let cfg = match load(&config) {
                Ok(c) => c,
                Err(code) => return code,
            };
            match defect_table(&cfg, levels.max(2)) {
                Ok(rows) => {
                    emit(&defect_csv(&rows));
                    for eps in &cfg.epsilons {
                        let sub: Vec<DefectRow> = rows.iter().copied().filter(|r| r.epsilon == *eps).collect();
                        let (a, b) = defect_orders(&sub);
                        eprintln!("epsilon {eps:e}: order {a:.3} (max), {b:.3} (Wiener)");
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => config_exit(&e),
            }
        }
    }
}
