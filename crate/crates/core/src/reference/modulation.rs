//! Modulated Fourier expansion reference: the advected modulation system for
//! `a_r` and `b*_nu` solved by split-step Fourier on a coarse grid, and the
//! reassembly of `u_MFE` on any grid of the same interval.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{carrier, ComplexField, PhaseSet, TorusGrid};
use crate::multiphase::{term_tables, TermTable};
use crate::reference::oracle::Splitting;
use crate::resonance::ResonanceStructure;
use crate::spectral::FourierTransform;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModulationConfig {
    pub m_mod: usize,
    pub steps: usize,
    pub splitting: Splitting,
    /// Abort when some `|a_r|` exceeds this.
    pub blowup_cap: f64,
}

impl Default for ModulationConfig {
    fn default() -> Self {
        Self { m_mod: 256, steps: 2048, splitting: Splitting::TripleJump, blowup_cap: 1e3 }
    }
}

/// Nonlinear part of the modulation system.
#[derive(Clone, Debug)]
pub enum ModulationRhs {
    /// Index tables of the general system with slaved `b_nu`.
    General(Vec<TermTable>),
    /// The two-phase system written out by hand; needs `K = [kappa, -kappa]`.
    TwoPhase,
}

#[derive(Clone, Debug)]
pub struct ModulationSolution {
    pub grid: TorusGrid,
    pub epsilon: f64,
    pub lambda: f64,
    pub rs: ResonanceStructure,
    pub kappas: Vec<f64>,
    pub t_final: f64,
    pub steps: usize,
    /// `snapshots[n][c]`: component `c` (the `a_r`, then the `b*_nu`) at `t = n tau`.
    pub snapshots: Vec<Vec<Vec<Complex64>>>,
}

struct System<'a> {
    rs: &'a ResonanceStructure,
    rhs: &'a ModulationRhs,
    epsilon: f64,
    lambda: f64,
}

impl System<'_> {
    fn r(&self) -> usize {
        self.rs.k.len()
    }

    /// `d/dt` of the pointwise state `[a_0.., b*_0..]` under the nonlinear terms.
    fn eval(&self, y: &[Complex64], dy: &mut [Complex64]) {
        let (lam, eps) = (self.lambda, self.epsilon);
        let r_len = self.r();
        let (a, bs) = y.split_at(r_len);
        let mod2: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        match self.rhs {
            ModulationRhs::General(tables) => {
                let b: Vec<Complex64> = self
                    .rs
                    .n
                    .iter()
                    .map(|nu| {
                        let (i, j, k) = nu.indices;
                        a[i] * a[j].conj() * a[k] / nu.delta
                    })
                    .collect();
                for (r, t) in tables.iter().enumerate() {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &(k, l, m) in &t.resonant {
                        acc += a[k] * a[l].conj() * a[m];
                    }
                    let mut corr = Complex64::new(0.0, 0.0);
                    for &(nu, p, q) in &t.w_direct {
                        corr += 2.0 * b[nu] * a[p].conj() * a[q];
                    }
                    for &(p, nu, q) in &t.w_conj {
                        corr += a[p] * b[nu].conj() * a[q];
                    }
                    dy[r] = -I * lam * (acc + eps * lam * corr);
                }
            }
            ModulationRhs::TwoPhase => {
                let delta = self.rs.n[0].delta;
                let b3 = a[0] * a[1].conj() * a[0] / delta;
                let bm3 = a[1] * a[0].conj() * a[1] / delta;
                dy[0] = -I
                    * lam
                    * ((a[0].norm_sqr() + 2.0 * a[1].norm_sqr()) * a[0]
                        + eps * lam * (2.0 * a[1] * a[0].conj() * b3 + a[1] * bm3.conj() * a[1]));
                dy[1] = -I
                    * lam
                    * ((a[1].norm_sqr() + 2.0 * a[0].norm_sqr()) * a[1]
                        + eps * lam * (2.0 * a[0] * a[1].conj() * bm3 + a[0] * b3.conj() * a[0]));
            }
        }
        for (d, z) in dy[r_len..].iter_mut().zip(bs) {
            *d = -2.0 * I * lam * mod2 * z;
        }
    }

    /// One classical Runge–Kutta step of the pointwise nonlinear flow.
    fn rk4(&self, y: &mut [Complex64], dt: f64) {
        let n = y.len();
        let mut k1 = vec![Complex64::new(0.0, 0.0); n];
        let mut k2 = k1.clone();
        let mut k3 = k1.clone();
        let mut k4 = k1.clone();
        let mut tmp = k1.clone();
        self.eval(y, &mut k1);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k1[i];
        }
        self.eval(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = y[i] + 0.5 * dt * k2[i];
        }
        self.eval(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = y[i] + dt * k3[i];
        }
        self.eval(&tmp, &mut k4);
        for i in 0..n {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
    }
}

/// Solves the modulation system with the general index machinery.
pub fn solve_modulation(
    rs: &ResonanceStructure,
    phases: &PhaseSet,
    domain: &TorusGrid,
    epsilon: f64,
    lambda: f64,
    t_final: f64,
    cfg: &ModulationConfig,
) -> Result<ModulationSolution> {
    let rhs = ModulationRhs::General(term_tables(rs)?);
    solve_modulation_with(rs, &rhs, phases, domain, epsilon, lambda, t_final, cfg)
}

#[allow(clippy::too_many_arguments)]
pub fn solve_modulation_with(
    rs: &ResonanceStructure,
    rhs: &ModulationRhs,
    phases: &PhaseSet,
    domain: &TorusGrid,
    epsilon: f64,
    lambda: f64,
    t_final: f64,
    cfg: &ModulationConfig,
) -> Result<ModulationSolution> {
    if !(epsilon >= 0.0) || cfg.steps == 0 || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter("modulation solve needs eps >= 0, t_final >= 0 and steps > 0".into()));
    }
    let kappas = rs.kappas_1d()?;
    if phases.len() != rs.m_input || phases.kappas().iter().zip(&kappas).any(|(a, b)| a != b) {
        return Err(Error::InvalidParameter("profiles do not match the leading wave numbers".into()));
    }
    if matches!(rhs, ModulationRhs::TwoPhase) && (kappas.len() != 2 || kappas[0] != -kappas[1] || rs.n.len() != 2) {
        return Err(Error::InvalidParameter("dedicated two-phase system needs K = [kappa, -kappa]".into()));
    }
    let grid = TorusGrid::new(domain.x_left, domain.length, cfg.m_mod)?;
    let sys = System { rs, rhs, epsilon, lambda };
    let r_len = kappas.len();
    let speeds: Vec<f64> = kappas.iter().copied().chain(rs.n.iter().map(|nu| nu.kappa.components[0])).collect();
    let n_comp = speeds.len();

    // initial data: a_r = a_r^0 (zero beyond the inputs), b*_nu = -b_nu
    let mut state: Vec<Vec<Complex64>> = vec![vec![Complex64::new(0.0, 0.0); grid.m]; n_comp];
    for (r, ph) in phases.phases().iter().enumerate() {
        state[r] = ph.profile.sample(&grid).values;
    }
    for (idx, nu) in rs.n.iter().enumerate() {
        let (i, j, k) = nu.indices;
        state[r_len + idx] = (0..grid.m).map(|x| -(state[i][x] * state[j][x].conj() * state[k][x]) / nu.delta).collect();
    }

    let tau = t_final / cfg.steps as f64;
    let fractions = cfg.splitting.fractions();
    let ft = FourierTransform::new(grid.m);
    // linear propagators exp((-i kappa xi - i eps xi^2 / 2) c tau) per substep and component
    let linear: Vec<Vec<Vec<Complex64>>> = fractions
        .iter()
        .map(|&c| {
            speeds
                .iter()
                .map(|&kap| {
                    (0..grid.m)
                        .map(|idx| {
                            let xi = grid.angular_wavenumber(idx);
                            Complex64::cis(-(kap * xi + 0.5 * epsilon * xi * xi) * c * tau)
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let nonlinear = |state: &mut Vec<Vec<Complex64>>, dt: f64| {
        let mut y = vec![Complex64::new(0.0, 0.0); n_comp];
        for x in 0..grid.m {
            for c in 0..n_comp {
                y[c] = state[c][x];
            }
            sys.rk4(&mut y, dt);
            for c in 0..n_comp {
                state[c][x] = y[c];
            }
        }
    };

    let mut snapshots = Vec::with_capacity(cfg.steps + 1);
    snapshots.push(state.clone());
    for n in 0..cfg.steps {
        let mut pending = 0.5 * fractions[0];
        for (s, props) in linear.iter().enumerate() {
            nonlinear(&mut state, pending * tau);
            for (field, prop) in state.iter_mut().zip(props) {
                ft.forward_in_place(field);
                for (z, p) in field.iter_mut().zip(prop) {
                    *z *= p;
                }
                ft.inverse_in_place(field);
            }
            let next = fractions.get(s + 1).copied().unwrap_or(0.0);
            pending = 0.5 * (fractions[s] + next);
        }
        nonlinear(&mut state, pending * tau);
        let amp = state[..r_len].iter().flatten().fold(0.0f64, |m, z| m.max(z.norm()));
        if !amp.is_finite() || amp > cfg.blowup_cap {
            return Err(Error::ModulationBlowUp { t: (n + 1) as f64 * tau, amplitude: amp });
        }
        snapshots.push(state.clone());
    }
    Ok(ModulationSolution {
        grid,
        epsilon,
        lambda,
        rs: rs.clone(),
        kappas,
        t_final,
        steps: cfg.steps,
        snapshots,
    })
}

/// Evaluates the trigonometric interpolant of `values` (samples on `grid`) at `xs`.
pub fn trig_interpolate(values: &[Complex64], grid: &TorusGrid, xs: &[f64]) -> Vec<Complex64> {
    let m = grid.m;
    let ft = FourierTransform::new(m);
    let c = ft.forward(values);
    let half = m / 2;
    xs.iter()
        .map(|&x| {
            let theta = 2.0 * std::f64::consts::PI * (x - grid.x_left) / grid.length;
            let z = Complex64::cis(theta);
            // sum_{k=-half+1}^{half-1} c_k z^k plus the split Nyquist term
            let mut acc = c[0];
            let mut zp = Complex64::new(1.0, 0.0);
            for k in 1..half.max(1) {
                zp *= z;
                if k < m - k {
                    acc += c[k] * zp + c[m - k] * zp.conj();
                }
            }
            if m % 2 == 0 && m >= 2 {
                acc += c[half] * (half as f64 * theta).cos();
            } else if m >= 3 {
                zp *= z;
                acc += c[half] * zp + c[m - half] * zp.conj();
            }
            acc
        })
        .collect()
}

impl ModulationSolution {
    pub fn tau(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    fn step_index(&self, t: f64) -> Result<usize> {
        if t > self.t_final * (1.0 + 1e-12) + 1e-15 || t < 0.0 {
            return Err(Error::Extrapolation { t, t_final: self.t_final });
        }
        let n = (t / self.tau()).round();
        if (n * self.tau() - t).abs() > 1e-9 * self.t_final.max(1e-300) {
            return Err(Error::InvalidParameter(format!("t = {t} is not a stored modulation time")));
        }
        Ok(n as usize)
    }

    /// `a_r` at stored time `t` on the modulation grid.
    pub fn a(&self, t: f64, r: usize) -> Result<&[Complex64]> {
        Ok(&self.snapshots[self.step_index(t)?][r])
    }

    /// `b*_nu` at stored time `t` on the modulation grid.
    pub fn b_star(&self, t: f64, nu: usize) -> Result<&[Complex64]> {
        Ok(&self.snapshots[self.step_index(t)?][self.kappas.len() + nu])
    }

    /// `b_nu = a_i conj(a_j) a_k / delta_nu` at stored time `t` on the modulation grid.
    pub fn b(&self, t: f64, nu: usize) -> Result<Vec<Complex64>> {
        let snap = &self.snapshots[self.step_index(t)?];
        let n = &self.rs.n[nu];
        let (i, j, k) = n.indices;
        Ok((0..self.grid.m).map(|x| snap[i][x] * snap[j][x].conj() * snap[k][x] / n.delta).collect())
    }
}

/// `u_MFE(t)` sampled on `grid` (same interval as the modulation grid).
pub fn assemble_mfe(ms: &ModulationSolution, t: f64, grid: &TorusGrid, epsilon: f64) -> Result<ComplexField> {
    if (grid.x_left - ms.grid.x_left).abs() > 1e-12 || (grid.length - ms.grid.length).abs() > 1e-12 * grid.length {
        return Err(Error::GridMismatch("target grid and modulation grid cover different intervals".into()));
    }
    let snap = &ms.snapshots[ms.step_index(t)?];
    let xs: Vec<f64> = grid.nodes().collect();
    let r_len = ms.kappas.len();
    let a: Vec<Vec<Complex64>> = (0..r_len).map(|r| trig_interpolate(&snap[r], &ms.grid, &xs)).collect();
    let mut out = vec![Complex64::new(0.0, 0.0); grid.m];
    for (r, ar) in a.iter().enumerate() {
        let kap = ms.kappas[r];
        let c = carrier(grid, kap, 0.5 * kap * kap, epsilon, t);
        for j in 0..grid.m {
            out[j] += ar[j] * c.values[j];
        }
    }
    let el = epsilon * ms.lambda;
    for (idx, nu) in ms.rs.n.iter().enumerate() {
        let kap = nu.kappa.components[0];
        let bs = trig_interpolate(&snap[r_len + idx], &ms.grid, &xs);
        let c_star = carrier(grid, kap, nu.omega_star, epsilon, t);
        let c_nu = carrier(grid, kap, nu.omega, epsilon, t);
        let (i, j2, k) = nu.indices;
        for j in 0..grid.m {
            let b = a[i][j] * a[j2][j].conj() * a[k][j] / nu.delta;
            out[j] += el * (bs[j] * c_star.values[j] + b * c_nu.values[j]);
        }
    }
    Ok(ComplexField { grid: *grid, values: out })
}

/// Largest change of the final modulation state when the step count is doubled.
pub fn modulation_self_convergence(
    rs: &ResonanceStructure,
    phases: &PhaseSet,
    domain: &TorusGrid,
    epsilon: f64,
    lambda: f64,
    t_final: f64,
    cfg: &ModulationConfig,
) -> Result<f64> {
    let a = solve_modulation(rs, phases, domain, epsilon, lambda, t_final, cfg)?;
    let fine_cfg = ModulationConfig { steps: 2 * cfg.steps, ..*cfg };
    let b = solve_modulation(rs, phases, domain, epsilon, lambda, t_final, &fine_cfg)?;
    let (sa, sb) = (a.snapshots.last().unwrap(), b.snapshots.last().unwrap());
    Ok(sa.iter().flatten().zip(sb.iter().flatten()).fold(0.0, |m, (x, y)| m.max((x - y).norm())))
}
