use num_complex::Complex64;

use super::{Coupling, MultiphaseSystem};
use crate::error::{Error, Result};
use crate::grid::{ComplexField, PhaseSet};
use crate::single_phase::CnOperator;

type Fields = Vec<Vec<Complex64>>;

/// State of the extended one-step weighted Crank–Nicolson scheme.
#[derive(Clone)]
pub struct MultiphaseCn {
    pub sys: MultiphaseSystem,
    pub u: Fields,
    pub ws: Fields,
    pub w: Fields,
    pub n: usize,
    pub fp_tol: f64,
    pub fp_maxit: usize,
    u_ops: Vec<CnOperator>,
    ws_ops: Vec<CnOperator>,
}

impl MultiphaseCn {
    pub fn start(sys: MultiphaseSystem, phases: &PhaseSet) -> Result<Self> {
        Self::with_tolerance(sys, phases, 1e-12, 50)
    }

    pub fn with_tolerance(sys: MultiphaseSystem, phases: &PhaseSet, fp_tol: f64, fp_maxit: usize) -> Result<Self> {
        if !(fp_tol > 0.0) || fp_maxit == 0 {
            return Err(Error::InvalidParameter("fixed-point tolerance and iteration cap must be positive".into()));
        }
        let (u, ws, w) = sys.initial_components(phases)?;
        let g = sys.grid;
        let op = |p: &crate::grid::SchemeParams| CnOperator::new(&g, p.omega, p.kappa, p.epsilon, p.tau);
        let u_ops = sys.u_params.iter().map(op).collect();
        let ws_ops = sys.ws_params.iter().map(op).collect();
        Ok(Self { sys, u, ws, w, n: 0, fp_tol, fp_maxit, u_ops, ws_ops })
    }

    pub fn step(&mut self) -> Result<()> {
        extended_cn_step(self)
    }

    pub fn advance_to(&mut self, n: usize) -> Result<()> {
        while self.n < n {
            self.step()?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.sys.tau
    }

    pub fn assemble(&self) -> ComplexField {
        self.sys.assemble(&self.u, &self.ws, &self.w)
    }
}

/// `(e^{ia} new + e^{-ia} old) / 2` with `a` half the component's weight angle.
fn tilde(old: &[Complex64], new: &[Complex64], half_alpha: f64) -> Vec<Complex64> {
    let e = Complex64::cis(half_alpha);
    old.iter().zip(new).map(|(o, n)| 0.5 * (e * n + e.conj() * o)).collect()
}

fn max_change(a: &Fields, b: &Fields) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y))
        .fold(0.0, |m, (p, q)| m.max((p - q).norm()))
}

impl MultiphaseCn {
    /// Right-hand sides of all `u_r` and `w*_nu` for the iterate `(u1, ws1)`:
    /// products of averaged fields, with modulus averages for `|u_k|^2`.
    fn implicit_rhs(&self, u1: &Fields, ws1: &Fields) -> (Fields, Fields) {
        let sys = &self.sys;
        let m = sys.grid.m;
        let lam = sys.lambda;
        let ut: Fields = (0..sys.r()).map(|r| tilde(&self.u[r], &u1[r], self.u_ops[r].half_alpha())).collect();
        let q: Vec<Vec<f64>> = (0..sys.r())
            .map(|r| self.u[r].iter().zip(&u1[r]).map(|(a, b)| 0.5 * (a.norm_sqr() + b.norm_sqr())).collect())
            .collect();
        let mut gu = vec![vec![Complex64::new(0.0, 0.0); m]; sys.r()];
        let mut gws = vec![vec![Complex64::new(0.0, 0.0); m]; sys.n_len()];
        match sys.coupling {
            Coupling::Naive => {
                for j in 0..m {
                    let total: Complex64 = ut.iter().map(|f| f[j]).sum();
                    for r in 0..sys.r() {
                        gu[r][j] = lam * (total.norm_sqr() * ut[r][j]);
                    }
                }
            }
            Coupling::Filtered { chi, .. } => {
                let corr = sys.has_corrections();
                let wt: Fields = if corr {
                    let w1 = sys.slaved(u1);
                    (0..sys.n_len())
                        .map(|nu| tilde(&self.w[nu], &w1[nu], 0.5 * sys.w_alpha[nu]))
                        .collect()
                } else {
                    Vec::new()
                };
                for j in 0..m {
                    for (r, t) in sys.tables.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for &(k, l, mm) in &t.resonant {
                            acc += if l == k {
                                q[k][j] * ut[mm][j]
                            } else if l == mm {
                                q[mm][j] * ut[k][j]
                            } else {
                                ut[k][j] * ut[l][j].conj() * ut[mm][j]
                            };
                        }
                        if chi == 1 {
                            for &(k, l) in &t.chi_terms {
                                acc += ut[k][j] * ut[l][j].conj() * ut[r][j];
                            }
                        }
                        if corr {
                            for &(nu, p, qq) in &t.w_direct {
                                acc += 2.0 * wt[nu][j] * ut[p][j].conj() * ut[qq][j];
                            }
                            for &(p, nu, qq) in &t.w_conj {
                                acc += ut[p][j] * wt[nu][j].conj() * ut[qq][j];
                            }
                        }
                        gu[r][j] = lam * acc;
                    }
                }
                if corr {
                    for nu in 0..sys.n_len() {
                        let wst = tilde(&self.ws[nu], &ws1[nu], self.ws_ops[nu].half_alpha());
                        for j in 0..m {
                            let mod2: f64 = q.iter().map(|f| f[j]).sum();
                            gws[nu][j] = 2.0 * lam * mod2 * wst[j];
                        }
                    }
                }
            }
        }
        (gu, gws)
    }
}

/// One step of the extended weighted Crank–Nicolson scheme. The coupled
/// implicit system is solved by Picard iteration over all components; each
/// sweep inverts every component's weighted stencil per Fourier mode.
pub fn extended_cn_step(state: &mut MultiphaseCn) -> Result<()> {
    let corr = state.sys.has_corrections();
    let vu: Fields = state.u.iter().zip(&state.u_ops).map(|(f, op)| op.weighted_old(f)).collect();
    let vws: Fields = state.ws.iter().zip(&state.ws_ops).map(|(f, op)| op.weighted_old(f)).collect();
    let mut u1 = state.u.clone();
    let mut ws1 = state.ws.clone();
    let mut residual = f64::INFINITY;
    for _ in 0..state.fp_maxit {
        let (gu, gws) = state.implicit_rhs(&u1, &ws1);
        let u_new: Fields =
            (0..u1.len()).map(|r| state.u_ops[r].unweight_new(&state.u_ops[r].solve(&vu[r], &gu[r]))).collect();
        let ws_new: Fields = if corr {
            (0..ws1.len())
                .map(|nu| state.ws_ops[nu].unweight_new(&state.ws_ops[nu].solve(&vws[nu], &gws[nu])))
                .collect()
        } else {
            ws1.clone()
        };
        residual = max_change(&u_new, &u1).max(max_change(&ws_new, &ws1));
        u1 = u_new;
        ws1 = ws_new;
        if residual <= state.fp_tol {
            state.w = state.sys.slaved(&u1);
            state.u = u1;
            state.ws = ws1;
            state.n += 1;
            return Ok(());
        }
    }
    Err(Error::FixedPointNonConvergence { iterations: state.fp_maxit, residual })
}
