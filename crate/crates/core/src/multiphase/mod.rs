//! Multiphase weighted schemes: one weighted component per wave number of the
//! saturated set, plus the `O(eps)` correction components carried by the
//! nonresonant triples.

mod crank_nicolson;
mod leapfrog;
mod two_phase;

pub use crank_nicolson::{extended_cn_step, MultiphaseCn};
pub use leapfrog::{extended_lf_step, MultiphaseLeapfrog};
pub use two_phase::{two_phase_coupling, two_phase_rhs_printed, two_phase_step_case, TwoPhaseCase};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{make_initial_data, reduced_angle, ComplexField, Phase, PhaseSet, SchemeParams, TorusGrid};
use crate::resonance::{check_assumption2, saturate, ResonanceStructure, WaveVector, DEFAULT_MAX_ROUNDS, TOL_RES};
use crate::single_phase::WeightedStencil;
use crate::spectral::{max_mode_mu, stability_check};

/// `chi = 1` iff `h^2 <= c eps^5`.
pub fn chi_switch(h: f64, epsilon: f64, c: f64) -> u8 {
    u8::from(h * h <= c * epsilon.powi(5))
}

/// Weighted leapfrog operator `D_LF^{alpha,beta}` on three consecutive levels.
pub fn dlf_apply(
    prev: &ComplexField,
    curr: &ComplexField,
    next: &ComplexField,
    alpha: f64,
    beta: f64,
    params: &SchemeParams,
) -> Result<ComplexField> {
    prev.check_same_grid(curr)?;
    curr.check_same_grid(next)?;
    let stencil = WeightedStencil::new(beta);
    let (eps, tau, h) = (params.epsilon, params.tau, params.h);
    let ea = Complex64::cis(alpha);
    let i = Complex64::i();
    let values = (0..curr.len())
        .map(|j| {
            i * eps * (ea * next.values[j] - ea.conj() * prev.values[j]) / (2.0 * tau)
                + 0.5 * eps * eps * stencil.at(&curr.values, j) / (h * h)
        })
        .collect();
    Ok(ComplexField { grid: curr.grid, values })
}

/// How the cubic nonlinearity is distributed over the components.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// Every component sees `|sum_s u_s|^2 u_r`.
    Naive,
    /// Resonant interactions per component, the nonresonant triples switched
    /// by `chi`, and optionally the correction components `w`, `w*`.
    Filtered { chi: u8, corrections: bool },
}

/// Per-component interaction lists.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TermTable {
    /// Resonant `(k, l, m)` with `kappa_k - kappa_l + kappa_m = kappa_r`.
    pub resonant: Vec<(usize, usize, usize)>,
    /// `(k, l)` with `(k, l, r)` nonresonant.
    pub chi_terms: Vec<(usize, usize)>,
    /// `(nu, p, q)`: `2 w_nu conj(u_p) u_q`.
    pub w_direct: Vec<(usize, usize, usize)>,
    /// `(p, nu, q)`: `u_p conj(w_nu) u_q`.
    pub w_conj: Vec<(usize, usize, usize)>,
}

fn close(a: f64, b: f64, scale: f64) -> bool {
    (a - b).abs() <= TOL_RES * scale.max(1.0)
}

/// Interaction tables for every `r`. The `w` channels are restricted to
/// combinations resonant with `u_r`, i.e. matching both `kappa_r` and `omega_r`.
pub fn term_tables(rs: &ResonanceStructure) -> Result<Vec<TermTable>> {
    let kap = rs.kappas_1d()?;
    let om = &rs.omegas;
    let r_len = kap.len();
    let mut tables = vec![TermTable::default(); r_len];
    for (r, table) in tables.iter_mut().enumerate() {
        table.resonant = rs.resonant_triples_for(r);
        table.chi_terms = rs
            .n
            .iter()
            .filter(|nu| nu.indices.2 == r)
            .map(|nu| (nu.indices.0, nu.indices.1))
            .collect();
        for (idx, nu) in rs.n.iter().enumerate() {
            let kn = nu.kappa.components[0];
            for p in 0..r_len {
                for q in 0..r_len {
                    let scale = kn.abs() + kap[p].abs() + kap[q].abs() + nu.omega.abs() + om[p] + om[q];
                    if close(kn - kap[p] + kap[q], kap[r], scale) && close(nu.omega - om[p] + om[q], om[r], scale) {
                        table.w_direct.push((idx, p, q));
                    }
                    if close(kap[p] - kn + kap[q], kap[r], scale) && close(om[p] - nu.omega + om[q], om[r], scale) {
                        table.w_conj.push((p, idx, q));
                    }
                }
            }
        }
    }
    Ok(tables)
}

/// Parameters, interaction tables and coefficients shared by the multiphase steppers.
#[derive(Clone, Debug)]
pub struct MultiphaseSystem {
    pub grid: TorusGrid,
    pub epsilon: f64,
    pub lambda: f64,
    pub tau: f64,
    pub rs: ResonanceStructure,
    pub coupling: Coupling,
    pub tables: Vec<TermTable>,
    /// `(alpha_r, beta_r)` of the components `u_r`.
    pub u_params: Vec<SchemeParams>,
    /// `(alpha*_nu, beta_nu)` of the components `w*_nu`.
    pub ws_params: Vec<SchemeParams>,
    /// `alpha_nu = omega_nu tau / eps` of the slaved components `w_nu`.
    pub w_alpha: Vec<f64>,
    /// `(1 - chi) eps lambda / delta_nu`, zero without corrections.
    pub w_coeff: Vec<f64>,
}

impl MultiphaseSystem {
    /// Saturates the wave numbers of `phases` (which must be grid periodic for
    /// `epsilon`) and checks the nonresonance condition.
    pub fn new(phases: &PhaseSet, epsilon: f64, lambda: f64, tau: f64, grid: TorusGrid, coupling: Coupling) -> Result<Self> {
        let input: Vec<WaveVector> = phases.kappas().into_iter().map(WaveVector::scalar).collect();
        let rs = saturate(&input, DEFAULT_MAX_ROUNDS)?;
        let (ok, violations) = check_assumption2(&rs);
        if !ok {
            return Err(Error::InvalidParameter(format!(
                "nonresonance condition violated ({} cases, first {:?})",
                violations.len(),
                violations[0]
            )));
        }
        Self::from_structure(rs, epsilon, lambda, tau, grid, coupling)
    }

    pub fn from_structure(
        rs: ResonanceStructure,
        epsilon: f64,
        lambda: f64,
        tau: f64,
        grid: TorusGrid,
        coupling: Coupling,
    ) -> Result<Self> {
        let h = grid.h();
        let tables = term_tables(&rs)?;
        let u_params = rs
            .kappas_1d()?
            .into_iter()
            .map(|k| SchemeParams::new(epsilon, lambda, k, tau, h))
            .collect::<Result<Vec<_>>>()?;
        let ws_params = rs
            .n
            .iter()
            .map(|nu| SchemeParams::new(epsilon, lambda, nu.kappa.components[0], tau, h))
            .collect::<Result<Vec<_>>>()?;
        let w_alpha = rs.n.iter().map(|nu| reduced_angle(nu.omega, tau, epsilon)).collect();
        let w_coeff = rs
            .n
            .iter()
            .map(|nu| match coupling {
                Coupling::Filtered { chi: 0, corrections: true } => epsilon * lambda / nu.delta,
                _ => 0.0,
            })
            .collect();
        Ok(Self { grid, epsilon, lambda, tau, rs, coupling, tables, u_params, ws_params, w_alpha, w_coeff })
    }

    pub fn r(&self) -> usize {
        self.u_params.len()
    }

    pub fn n_len(&self) -> usize {
        self.ws_params.len()
    }

    pub fn chi(&self) -> u8 {
        match self.coupling {
            Coupling::Filtered { chi, .. } => chi,
            Coupling::Naive => 0,
        }
    }

    /// Whether the `w`, `w*` components can be nonzero.
    pub fn has_corrections(&self) -> bool {
        self.w_coeff.iter().any(|&c| c != 0.0)
    }

    fn lf_components(&self) -> impl Iterator<Item = (usize, &SchemeParams, &'static str)> {
        let ws: &[SchemeParams] = if self.has_corrections() { &self.ws_params } else { &[] };
        self.u_params
            .iter()
            .enumerate()
            .map(|(i, p)| (i, p, "u"))
            .chain(ws.iter().enumerate().map(|(i, p)| (i, p, "w*")))
    }

    fn component_theta(&self, p: &SchemeParams) -> f64 {
        stability_check(p).theta.max(max_mode_mu(p, &self.grid))
    }

    /// Largest leapfrog stability margin over the active components.
    pub fn lf_theta(&self) -> f64 {
        self.lf_components().map(|(_, p, _)| self.component_theta(p)).fold(0.0, f64::max)
    }

    /// Leapfrog stability of every component; returns the largest margin.
    pub fn lf_stability(&self) -> Result<f64> {
        for (i, p, name) in self.lf_components() {
            let theta = self.component_theta(p);
            if theta >= 1.0 {
                return Err(Error::StabilityViolation { theta, component: format!("{name}[{i}] kappa = {}", p.kappa) });
            }
        }
        Ok(self.lf_theta())
    }

    /// `(u_r(0), w*_nu(0), w_nu(0))` from the input profiles.
    pub fn initial_components(&self, phases: &PhaseSet) -> Result<(Vec<Vec<Complex64>>, Vec<Vec<Complex64>>, Vec<Vec<Complex64>>)> {
        let m = self.grid.m;
        let mut u = vec![vec![Complex64::new(0.0, 0.0); m]; self.r()];
        for (r, phase) in phases.phases().iter().enumerate() {
            let single = PhaseSet::new(vec![Phase { kappa: phase.kappa, profile: phase.profile.clone() }])?;
            u[r] = make_initial_data(&single, self.epsilon, &self.grid)?.values;
        }
        let w = self.slaved(&u);
        let ws = w.iter().map(|f| f.iter().map(|z| -z).collect()).collect();
        Ok((u, ws, w))
    }

    /// `w_nu = (1 - chi) (eps lambda / delta_nu) u_k conj(u_l) u_m`.
    pub fn slaved(&self, u: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
        self.rs
            .n
            .iter()
            .zip(&self.w_coeff)
            .map(|(nu, &c)| {
                let (k, l, mm) = nu.indices;
                if c == 0.0 {
                    return vec![Complex64::new(0.0, 0.0); self.grid.m];
                }
                (0..self.grid.m).map(|j| c * (u[k][j] * u[l][j].conj() * u[mm][j])).collect()
            })
            .collect()
    }

    /// Right-hand sides `g` (with `D u = eps g`) of all `u_r` and `w*_nu` from
    /// pointwise values, used by the explicit scheme.
    pub fn explicit_rhs(
        &self,
        u: &[Vec<Complex64>],
        ws: &[Vec<Complex64>],
        w: &[Vec<Complex64>],
    ) -> (Vec<Vec<Complex64>>, Vec<Vec<Complex64>>) {
        let m = self.grid.m;
        let lam = self.lambda;
        let mut gu = vec![vec![Complex64::new(0.0, 0.0); m]; self.r()];
        let mut gws = vec![vec![Complex64::new(0.0, 0.0); m]; self.n_len()];
        match self.coupling {
            Coupling::Naive => {
                for j in 0..m {
                    let total: Complex64 = u.iter().map(|f| f[j]).sum();
                    let mod2 = total.norm_sqr();
                    for r in 0..self.r() {
                        gu[r][j] = lam * (mod2 * u[r][j]);
                    }
                }
            }
            Coupling::Filtered { chi, .. } => {
                let corr = self.has_corrections();
                for j in 0..m {
                    for (r, t) in self.tables.iter().enumerate() {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for &(k, l, mm) in &t.resonant {
                            acc += if l == k {
                                u[k][j].norm_sqr() * u[mm][j]
                            } else if l == mm {
                                u[mm][j].norm_sqr() * u[k][j]
                            } else {
                                u[k][j] * u[l][j].conj() * u[mm][j]
                            };
                        }
                        if chi == 1 {
                            for &(k, l) in &t.chi_terms {
                                acc += u[k][j] * u[l][j].conj() * u[r][j];
                            }
                        }
                        if corr {
                            for &(nu, p, q) in &t.w_direct {
                                acc += 2.0 * w[nu][j] * u[p][j].conj() * u[q][j];
                            }
                            for &(p, nu, q) in &t.w_conj {
                                acc += u[p][j] * w[nu][j].conj() * u[q][j];
                            }
                        }
                        gu[r][j] = lam * acc;
                    }
                    if corr {
                        let mod2: f64 = u.iter().map(|f| f[j].norm_sqr()).sum();
                        for (nu, g) in gws.iter_mut().enumerate() {
                            g[j] = 2.0 * lam * mod2 * ws[nu][j];
                        }
                    }
                }
            }
        }
        (gu, gws)
    }

    /// `sum_r u_r + sum_nu w*_nu + sum_nu w_nu`.
    pub fn assemble(&self, u: &[Vec<Complex64>], ws: &[Vec<Complex64>], w: &[Vec<Complex64>]) -> ComplexField {
        let mut out = vec![Complex64::new(0.0, 0.0); self.grid.m];
        for f in u.iter().chain(ws).chain(w) {
            for (o, z) in out.iter_mut().zip(f) {
                *o += z;
            }
        }
        ComplexField { grid: self.grid, values: out }
    }
}

/// Pointwise sum of component fields.
pub fn assemble_solution(components: &[ComplexField]) -> Result<ComplexField> {
    let first = components.first().ok_or_else(|| Error::InvalidParameter("no components".into()))?;
    let mut out = ComplexField::zeros(first.grid);
    for c in components {
        out = out.add(c)?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{adjust_wavenumber, carrier, Profile};
    use crate::resonance::nonresonant_triples;

    #[test]
    fn chi_switch_examples() {
        assert_eq!(chi_switch(0.05, 0.5, 5.0), 1);
        assert_eq!(chi_switch(0.05, 0.01, 5.0), 0);
        // h^2 = c eps^5 exactly: h = 1, eps = 1, c = 1
        assert_eq!(chi_switch(1.0, 1.0, 1.0), 1);
    }

    #[test]
    fn dlf_of_zero_and_plane_wave() {
        let g = TorusGrid::new(-6.0, 12.0, 120).unwrap();
        let eps = 0.01;
        let k = adjust_wavenumber(1.0, eps, &g);
        let p = SchemeParams::new(eps, 0.0, k, 0.01, g.h()).unwrap();
        let z = ComplexField::zeros(g);
        assert_eq!(dlf_apply(&z, &z, &z, p.alpha, p.beta, &p).unwrap().max_abs(), 0.0);
        let f = |t: f64| carrier(&g, k, p.omega, eps, t);
        let d = dlf_apply(&f(0.0), &f(p.tau), &f(2.0 * p.tau), p.alpha, p.beta, &p).unwrap();
        assert!(d.max_abs() < 1e-13, "{}", d.max_abs());
    }

    #[test]
    fn two_phase_tables_match_printed_scheme() {
        let g = TorusGrid::new(-6.0, 12.0, 64).unwrap();
        let k = adjust_wavenumber(1.0, 0.1, &g);
        let rs = saturate(&[WaveVector::scalar(k), WaveVector::scalar(-k)], 8).unwrap();
        let t = term_tables(&rs).unwrap();
        // r = 0 (kappa): |u0|^2 u0 + 2 |u1|^2 u0
        assert_eq!(t[0].resonant, vec![(0, 0, 0), (0, 1, 1), (1, 1, 0)]);
        assert_eq!(t[0].chi_terms, vec![(0, 1)]);
        // N = [(0,1,0) -> 3k, (1,0,1) -> -3k]; 2 w_3 conj(u_1) u_{-1} and u_{-1} conj(w_{-3}) u_{-1}
        assert_eq!(t[0].w_direct, vec![(0, 0, 1)]);
        assert_eq!(t[0].w_conj, vec![(1, 1, 1)]);
        assert_eq!(t[1].w_direct, vec![(1, 1, 0)]);
        assert_eq!(t[1].w_conj, vec![(0, 0, 0)]);
    }

    #[test]
    fn chi_one_rhs_sums_to_full_cubic() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let g = TorusGrid::new(-6.0, 12.0, 32).unwrap();
        for kappas in [vec![1.0, -1.0], vec![1.0, -2.0, 3.5]] {
            let input: Vec<WaveVector> = kappas.iter().map(|&x| WaveVector::scalar(x)).collect();
            let rs = saturate(&input, 8).unwrap();
            let sys = MultiphaseSystem::from_structure(rs, 0.5, 1.3, 0.01, g, Coupling::Filtered { chi: 1, corrections: true })
                .unwrap();
            assert!(!sys.has_corrections());
            let u: Vec<Vec<Complex64>> = (0..sys.r())
                .map(|_| (0..g.m).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
                .collect();
            let zeros = vec![vec![Complex64::new(0.0, 0.0); g.m]; sys.n_len()];
            let (gu, _) = sys.explicit_rhs(&u, &zeros, &zeros);
            for j in 0..g.m {
                let total: Complex64 = u.iter().map(|f| f[j]).sum();
                let sum: Complex64 = gu.iter().map(|f| f[j]).sum();
                assert!((sum - 1.3 * total.norm_sqr() * total).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn slaved_w_satisfies_detuning_relation() {
        let g = TorusGrid::new(-6.0, 12.0, 48).unwrap();
        let eps = 0.05;
        let k = adjust_wavenumber(1.0, eps, &g);
        let phases = PhaseSet::new(vec![
            Phase { kappa: k, profile: Profile::Gaussian { center: 0.0, width: 1.0, amplitude: Complex64::new(0.5, 0.0) } },
            Phase { kappa: -k, profile: Profile::Gaussian { center: 0.5, width: 1.0, amplitude: Complex64::new(0.5, 0.1) } },
        ])
        .unwrap();
        let sys = MultiphaseSystem::new(&phases, eps, 1.0, 0.01, g, Coupling::Filtered { chi: 0, corrections: true }).unwrap();
        let (u, ws, w) = sys.initial_components(&phases).unwrap();
        for (idx, nu) in sys.rs.n.iter().enumerate() {
            let (a, b, c) = nu.indices;
            for j in 0..g.m {
                let lhs = nu.delta * w[idx][j];
                let rhs = eps * u[a][j] * u[b][j].conj() * u[c][j];
                assert!((lhs - rhs).norm() < 1e-15);
                assert_eq!(ws[idx][j], -w[idx][j]);
            }
        }
        let total = sys.assemble(&u, &ws, &w);
        let direct = make_initial_data(&phases, eps, &g).unwrap();
        assert!(crate::grid::linf_error(&total, &direct).unwrap() < 1e-15);
        let n = nonresonant_triples(&sys.rs.k).unwrap();
        assert_eq!(n.len(), 2);
    }
}
