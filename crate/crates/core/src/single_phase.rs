//! Single-phase exponentially weighted leapfrog and Crank–Nicolson steppers,
//! the weighted Euler starting step and the defect evaluator.
//!
//! Every scheme here is written as `D u = eps * g`, where `D` is the weighted
//! difference operator and `g` the (already divided by `eps`) right-hand side,
//! so that multiphase components can reuse the same update kernels.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{carrier_step_angle, reduced_angle, ComplexField, SchemeParams, TorusGrid};
use crate::spectral::{max_mode_mu, stability_check, FourierTransform};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Weighted second-difference stencil
/// `e^{-i b}(1 + i b) u_{j+1} - 2 u_j + e^{i b}(1 - i b) u_{j-1}`.
#[derive(Clone, Copy, Debug)]
pub struct WeightedStencil {
    plus: Complex64,
    minus: Complex64,
}

impl WeightedStencil {
    pub fn new(beta: f64) -> Self {
        Self::with_angle(beta, beta)
    }

    /// Stencil whose exponential weights use `angle`, equal to `beta` modulo `2 pi`.
    pub fn with_angle(beta: f64, angle: f64) -> Self {
        Self {
            plus: Complex64::cis(-angle) * Complex64::new(1.0, beta),
            minus: Complex64::cis(angle) * Complex64::new(1.0, -beta),
        }
    }

    /// Stencil for carrier wave number `kappa` on `grid`, with the exponential
    /// weights matching the sampled carrier to roundoff.
    pub fn for_carrier(kappa: f64, epsilon: f64, grid: &TorusGrid) -> Self {
        Self::with_angle(kappa * grid.h() / epsilon, carrier_step_angle(kappa, epsilon, grid))
    }

    #[inline]
    pub fn at(&self, u: &[Complex64], j: usize) -> Complex64 {
        let m = u.len();
        let jp = if j + 1 == m { 0 } else { j + 1 };
        let jm = if j == 0 { m - 1 } else { j - 1 };
        self.plus * u[jp] - 2.0 * u[j] + self.minus * u[jm]
    }

    pub fn apply(&self, u: &[Complex64]) -> Vec<Complex64> {
        (0..u.len()).map(|j| self.at(u, j)).collect()
    }
}

/// `|u|^2 u` scaled by `lambda`.
pub fn cubic(lambda: f64, u: &[Complex64]) -> Vec<Complex64> {
    u.iter().map(|z| lambda * z.norm_sqr() * z).collect()
}

/// Explicit weighted leapfrog update for `D_LF^{alpha,beta} u = eps g`:
/// `u^{n+1} = e^{-ia}[e^{-ia} u^{n-1} + (i tau eps / h^2) S u^n - 2 i tau g]`.
pub fn lf_update(
    prev: &[Complex64],
    curr: &[Complex64],
    g: &[Complex64],
    alpha: f64,
    stencil: &WeightedStencil,
    epsilon: f64,
    tau: f64,
    h: f64,
) -> Vec<Complex64> {
    let e = Complex64::cis(-alpha);
    let cs = I * (tau * epsilon / (h * h));
    let cg = I * (2.0 * tau);
    (0..curr.len())
        .map(|j| e * (e * prev[j] + cs * stencil.at(curr, j) - cg * g[j]))
        .collect()
}

/// Weighted explicit Euler starting step:
/// `u^1 = e^{-ia}[u^0 + (i tau eps / (2 h^2)) S u^0 - i tau g]`.
pub fn euler_update(
    u0: &[Complex64],
    g: &[Complex64],
    alpha: f64,
    stencil: &WeightedStencil,
    epsilon: f64,
    tau: f64,
    h: f64,
) -> Vec<Complex64> {
    let e = Complex64::cis(-alpha);
    let cs = I * (tau * epsilon / (2.0 * h * h));
    let cg = I * tau;
    (0..u0.len()).map(|j| e * (u0[j] + cs * stencil.at(u0, j) - cg * g[j])).collect()
}

/// One new level of the weighted leapfrog scheme.
pub fn wlf_step(state: &LeapfrogState) -> ComplexField {
    let p = &state.params;
    let g = cubic(p.lambda, &state.u_curr.values);
    let grid = state.u_curr.grid;
    let stencil = WeightedStencil::for_carrier(p.kappa, p.epsilon, &grid);
    ComplexField {
        grid,
        values: lf_update(&state.u_prev.values, &state.u_curr.values, &g, p.rotation(), &stencil, p.epsilon, p.tau, p.h),
    }
}

/// Level 1 from level 0 by one weighted explicit Euler step.
pub fn wlf_start(u0: &ComplexField, params: &SchemeParams) -> ComplexField {
    let g = cubic(params.lambda, &u0.values);
    let stencil = WeightedStencil::for_carrier(params.kappa, params.epsilon, &u0.grid);
    ComplexField {
        grid: u0.grid,
        values: euler_update(&u0.values, &g, params.rotation(), &stencil, params.epsilon, params.tau, params.h),
    }
}

fn check_params_grid(params: &SchemeParams, grid: &TorusGrid) -> Result<()> {
    if (params.h - grid.h()).abs() > 1e-12 * grid.h() {
        return Err(Error::GridMismatch(format!("params.h = {} but grid.h = {}", params.h, grid.h())));
    }
    Ok(())
}

/// Two-level state `(u^{n-1}, u^n)` of the weighted leapfrog scheme.
#[derive(Clone, Debug)]
pub struct LeapfrogState {
    pub u_prev: ComplexField,
    pub u_curr: ComplexField,
    pub n: usize,
    pub params: SchemeParams,
}

impl LeapfrogState {
    /// Builds `(u^0, u^1)` with the weighted Euler start. Rejects parameters
    /// violating `eps tau gamma < h^2` or leaving some grid mode with `|mu_k| >= 1`.
    pub fn start(u0: ComplexField, params: SchemeParams) -> Result<Self> {
        let report = stability_check(&params);
        let mu = max_mode_mu(&params, &u0.grid);
        if !report.stable || mu >= 1.0 {
            return Err(Error::StabilityViolation { theta: report.theta.max(mu), component: "single phase".into() });
        }
        Self::start_unchecked(u0, params)
    }

    /// Like [`LeapfrogState::start`] but without the stability check; used to
    /// probe the instability of the scheme.
    pub fn start_unchecked(u0: ComplexField, params: SchemeParams) -> Result<Self> {
        check_params_grid(&params, &u0.grid)?;
        let u1 = wlf_start(&u0, &params);
        Ok(Self { u_prev: u0, u_curr: u1, n: 1, params })
    }

    pub fn step(&mut self) {
        let next = wlf_step(self);
        self.u_prev = std::mem::replace(&mut self.u_curr, next);
        self.n += 1;
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.n < n {
            self.step();
        }
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.params.tau
    }
}

/// Frozen per-mode factors of the half-step weighted Crank–Nicolson solve.
#[derive(Clone)]
pub struct CnOperator {
    ft: FourierTransform,
    numer: Vec<Complex64>,
    denom_inv: Vec<Complex64>,
    /// `alpha / 2`: the one-step form uses the scheme with `tau -> tau / 2`.
    half_alpha: f64,
    tau: f64,
}

impl CnOperator {
    /// Operator for carrier frequency `omega` and wave number `kappa`.
    pub fn new(grid: &TorusGrid, omega: f64, kappa: f64, epsilon: f64, tau: f64) -> Self {
        let h = grid.h();
        let beta = kappa * h / epsilon;
        let angle = carrier_step_angle(kappa, epsilon, grid);
        let ft = FourierTransform::new(grid.m);
        let mut numer = Vec::with_capacity(grid.m);
        let mut denom_inv = Vec::with_capacity(grid.m);
        for idx in 0..grid.m {
            let phi = angle - grid.angular_wavenumber(idx) * h;
            let nu = epsilon * tau * (phi.cos() + beta * phi.sin() - 1.0) / (2.0 * h * h);
            numer.push(Complex64::new(1.0, nu));
            denom_inv.push(Complex64::new(1.0, -nu).inv());
        }
        Self { ft, numer, denom_inv, half_alpha: 0.5 * reduced_angle(omega, tau, epsilon), tau }
    }

    pub fn half_alpha(&self) -> f64 {
        self.half_alpha
    }

    /// `v = e^{-i alpha/2} u^n`.
    pub fn weighted_old(&self, u: &[Complex64]) -> Vec<Complex64> {
        let e = Complex64::cis(-self.half_alpha);
        u.iter().map(|z| e * z).collect()
    }

    /// Solves `w - v - i (eps tau / 2h^2) S((w + v)/2) = -i tau g` for
    /// `w = e^{i alpha/2} u^{n+1}` given `v` and a frozen right-hand side `g`.
    pub fn solve(&self, v: &[Complex64], g: &[Complex64]) -> Vec<Complex64> {
        let mut vh = v.to_vec();
        self.ft.forward_in_place(&mut vh);
        let mut gh = g.to_vec();
        self.ft.forward_in_place(&mut gh);
        let mut w: Vec<Complex64> = (0..vh.len())
            .map(|k| (self.numer[k] * vh[k] - I * self.tau * gh[k]) * self.denom_inv[k])
            .collect();
        self.ft.inverse_in_place(&mut w);
        w
    }

    /// `u^{n+1} = e^{-i alpha/2} w`.
    pub fn unweight_new(&self, w: &[Complex64]) -> Vec<Complex64> {
        let e = Complex64::cis(-self.half_alpha);
        w.iter().map(|z| e * z).collect()
    }
}

/// State of the one-step weighted Crank–Nicolson scheme.
#[derive(Clone)]
pub struct CnState {
    pub u_curr: ComplexField,
    pub n: usize,
    pub params: SchemeParams,
    pub fp_tol: f64,
    pub fp_maxit: usize,
    op: CnOperator,
}

impl CnState {
    pub fn new(u0: ComplexField, params: SchemeParams) -> Result<Self> {
        Self::with_tolerance(u0, params, 1e-12, 50)
    }

    pub fn with_tolerance(u0: ComplexField, params: SchemeParams, fp_tol: f64, fp_maxit: usize) -> Result<Self> {
        if !(fp_tol > 0.0) || fp_maxit == 0 {
            return Err(Error::InvalidParameter("fixed-point tolerance and iteration cap must be positive".into()));
        }
        check_params_grid(&params, &u0.grid)?;
        let op = CnOperator::new(&u0.grid, params.omega, params.kappa, params.epsilon, params.tau);
        Ok(Self { u_curr: u0, n: 0, params, fp_tol, fp_maxit, op })
    }

    pub fn step(&mut self) -> Result<()> {
        let next = wcn_step(self)?;
        self.u_curr = next;
        self.n += 1;
        Ok(())
    }

    pub fn advance_to(&mut self, n: usize) -> Result<()> {
        while self.n < n {
            self.step()?;
        }
        Ok(())
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.params.tau
    }
}

/// Solves the implicit weighted Crank–Nicolson step by Picard iteration on the
/// nonlinear term, each sweep inverting the stencil exactly per Fourier mode.
pub fn wcn_step(state: &CnState) -> Result<ComplexField> {
    let op = &state.op;
    let lambda = state.params.lambda;
    let v = op.weighted_old(&state.u_curr.values);
    // initial guess u^{n+1} = u^n
    let e = Complex64::cis(op.half_alpha);
    let mut w: Vec<Complex64> = state.u_curr.values.iter().map(|z| e * z).collect();
    let mut residual = f64::INFINITY;
    for _ in 0..state.fp_maxit {
        let g: Vec<Complex64> = v
            .iter()
            .zip(&w)
            .map(|(a, b)| lambda * 0.5 * (a.norm_sqr() + b.norm_sqr()) * 0.5 * (a + b))
            .collect();
        let w_new = op.solve(&v, &g);
        residual = w_new.iter().zip(&w).fold(0.0, |m, (a, b)| m.max((a - b).norm()));
        w = w_new;
        if residual <= state.fp_tol {
            return Ok(ComplexField { grid: state.u_curr.grid, values: op.unweight_new(&w) });
        }
    }
    Err(Error::FixedPointNonConvergence { iterations: state.fp_maxit, residual })
}

/// Exact modulation `a(t, x)` used to build the defect.
pub trait ModulationSampler {
    fn eval(&self, t: f64, x: f64) -> Complex64;
}

impl<F: Fn(f64, f64) -> Complex64> ModulationSampler for F {
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        self(t, x)
    }
}

/// `a(t, x) = c exp(-i lambda |c|^2 t)`: exact solution for a constant profile.
#[derive(Clone, Copy, Debug)]
pub struct ConstantProfileSolution {
    pub amplitude: Complex64,
    pub lambda: f64,
}

impl ModulationSampler for ConstantProfileSolution {
    fn eval(&self, t: f64, _x: f64) -> Complex64 {
        self.amplitude * Complex64::cis(-self.lambda * self.amplitude.norm_sqr() * t)
    }
}

/// Linear (`lambda = 0`) modulation `exp(i p (x - x0)) exp(-i (kappa p + eps p^2 / 2) t)`.
#[derive(Clone, Copy, Debug)]
pub struct LinearModeSolution {
    pub p: f64,
    pub x0: f64,
    pub kappa: f64,
    pub epsilon: f64,
}

impl ModulationSampler for LinearModeSolution {
    fn eval(&self, t: f64, x: f64) -> Complex64 {
        let freq = self.kappa * self.p + 0.5 * self.epsilon * self.p * self.p;
        Complex64::cis(self.p * (x - self.x0) - freq * t)
    }
}

/// Residual of `u = a e^{i(kappa x - omega t)/eps}` in the weighted leapfrog scheme at time `t`.
pub fn compute_defect(
    a: &dyn ModulationSampler,
    params: &SchemeParams,
    grid: &TorusGrid,
    t: f64,
) -> ComplexField {
    let p = params;
    let u = |s: f64, x: f64| a.eval(s, x) * Complex64::cis((p.kappa * x - p.omega * s) / p.epsilon);
    let stencil = WeightedStencil::new(p.beta);
    let ea = Complex64::cis(p.alpha);
    let values = grid
        .nodes()
        .map(|x| {
            let uc = u(t, x);
            let time = I * p.epsilon * (ea * u(t + p.tau, x) - ea.conj() * u(t - p.tau, x)) / (2.0 * p.tau);
            let space = stencil.plus * u(t, x + p.h) - 2.0 * uc + stencil.minus * u(t, x - p.h);
            time + 0.5 * p.epsilon * p.epsilon * space / (p.h * p.h) - p.epsilon * p.lambda * uc.norm_sqr() * uc
        })
        .collect();
    ComplexField { grid: *grid, values }
}

/// Standard leapfrog for the advected NLS `a_t + kappa a_x - (i eps/2) a_xx = -i lambda |a|^2 a`.
pub fn advected_rhs(a: &[Complex64], params: &SchemeParams) -> Vec<Complex64> {
    let m = a.len();
    let h = params.h;
    (0..m)
        .map(|j| {
            let ap = a[(j + 1) % m];
            let am = a[(j + m - 1) % m];
            let d1 = (ap - am) / (2.0 * h);
            let d2 = (ap - 2.0 * a[j] + am) / (h * h);
            -params.kappa * d1 + 0.5 * I * params.epsilon * d2 - I * params.lambda * a[j].norm_sqr() * a[j]
        })
        .collect()
}

/// Leapfrog and explicit-Euler start applied directly to the modulation equation.
#[derive(Clone, Debug)]
pub struct AdvectedLeapfrog {
    pub a_prev: Vec<Complex64>,
    pub a_curr: Vec<Complex64>,
    pub n: usize,
    pub params: SchemeParams,
}

impl AdvectedLeapfrog {
    pub fn start(a0: Vec<Complex64>, params: SchemeParams) -> Self {
        let f = advected_rhs(&a0, &params);
        let a1 = a0.iter().zip(&f).map(|(a, d)| a + params.tau * d).collect();
        Self { a_prev: a0, a_curr: a1, n: 1, params }
    }

    pub fn step(&mut self) {
        let f = advected_rhs(&self.a_curr, &self.params);
        let next = self.a_prev.iter().zip(&f).map(|(a, d)| a + 2.0 * self.params.tau * d).collect();
        self.a_prev = std::mem::replace(&mut self.a_curr, next);
        self.n += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{adjust_wavenumber, carrier, demodulate, linf_error, make_initial_data, PhaseSet, Profile};
    use crate::spectral::{dft, max_stable_tau, triple_norm, wiener_norm};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(eps: f64, m: usize) -> (TorusGrid, f64) {
        let g = TorusGrid::new(-6.0, 12.0, m).unwrap();
        (g, adjust_wavenumber(1.0, eps, &g))
    }

    fn exact_plane(g: &TorusGrid, p: &SchemeParams, t: f64) -> ComplexField {
        carrier(g, p.kappa, p.omega, p.epsilon, t).scale(Complex64::cis(-p.lambda * t))
    }

    #[test]
    fn linear_plane_wave_is_exact_for_leapfrog() {
        let (g, k) = setup(1e-3, 120);
        let h = g.h();
        let tau = 0.5 * max_stable_tau(1e-3, h, k * h / 1e-3);
        let p = SchemeParams::new(1e-3, 0.0, k, tau, h).unwrap();
        let u0 = carrier(&g, k, p.omega, 1e-3, 0.0);
        let u1 = wlf_start(&u0, &p);
        let shift = u0.scale(Complex64::cis(-p.alpha));
        let e1 = linf_error(&u1, &shift).unwrap();
        assert!(e1 < 1e-12, "{e1}");
        let mut s = LeapfrogState::start(u0, p).unwrap();
        s.advance_to(40);
        assert!(linf_error(&s.u_curr, &carrier(&g, k, p.omega, 1e-3, s.time())).unwrap() < 1e-12);
    }

    #[test]
    fn zero_field_stays_zero() {
        let (g, k) = setup(0.01, 64);
        let p = SchemeParams::new(0.01, 1.0, k, 0.001, g.h()).unwrap();
        assert_eq!(wlf_start(&ComplexField::zeros(g), &p).max_abs(), 0.0);
    }

    fn constant_profile_error_lf(eps: f64, tau: f64) -> f64 {
        let (g, k) = setup(eps, 60);
        let t_final = 0.5;
        let n = (t_final / tau).round() as usize;
        let p = SchemeParams::new(eps, 1.0, k, t_final / n as f64, g.h()).unwrap();
        let mut s = LeapfrogState::start(carrier(&g, k, p.omega, eps, 0.0), p).unwrap();
        s.advance_to(n);
        linf_error(&s.u_curr, &exact_plane(&g, &p, t_final)).unwrap()
    }

    #[test]
    fn constant_profile_leapfrog_is_second_order() {
        let e1 = constant_profile_error_lf(0.01, 0.01);
        let e2 = constant_profile_error_lf(0.01, 0.005);
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn euler_start_local_error_is_second_order() {
        let (g, k) = setup(0.01, 60);
        let err = |tau: f64| {
            let p = SchemeParams::new(0.01, 1.0, k, tau, g.h()).unwrap();
            let u1 = wlf_start(&carrier(&g, k, p.omega, 0.01, 0.0), &p);
            linf_error(&u1, &exact_plane(&g, &p, tau)).unwrap()
        };
        let ratio = err(0.02) / err(0.01);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn cn_linear_mode_moduli_are_conserved() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (g, k) = setup(1e-3, 128);
        let p = SchemeParams::new(1e-3, 0.0, k, 0.05, g.h()).unwrap();
        let u0 = ComplexField { grid: g, values: (0..g.m).map(|_| c(rng.gen(), rng.gen())).collect() };
        let mut s = CnState::new(u0, p).unwrap();
        for _ in 0..20 {
            let before = dft(&s.u_curr);
            s.step().unwrap();
            let after = dft(&s.u_curr);
            for (a, b) in before.iter().zip(&after) {
                assert!((a.norm() - b.norm()).abs() <= 1e-13 * a.norm().max(1e-3));
            }
        }
    }

    #[test]
    fn cn_plane_wave_and_constant_profile() {
        let (g, k) = setup(1e-3, 120);
        let lin = SchemeParams::new(1e-3, 0.0, k, 0.05, g.h()).unwrap();
        let mut s = CnState::new(carrier(&g, k, lin.omega, 1e-3, 0.0), lin).unwrap();
        s.advance_to(10).unwrap();
        let e0 = linf_error(&s.u_curr, &carrier(&g, k, lin.omega, 1e-3, 0.5)).unwrap();
        assert!(e0 < 1e-12, "{e0}");

        let err = |n: usize| {
            let p = SchemeParams::new(1e-3, 1.0, k, 0.5 / n as f64, g.h()).unwrap();
            let mut s = CnState::new(carrier(&g, k, p.omega, 1e-3, 0.0), p).unwrap();
            s.advance_to(n).unwrap();
            linf_error(&s.u_curr, &exact_plane(&g, &p, 0.5)).unwrap()
        };
        let ratio = err(20) / err(40);
        assert!((ratio - 4.0).abs() < 0.4, "ratio {ratio}");
    }

    #[test]
    fn cn_reports_non_convergence() {
        let (g, k) = setup(0.1, 32);
        let p = SchemeParams::new(0.1, 50.0, k, 0.5, g.h()).unwrap();
        let u0 = carrier(&g, k, p.omega, 0.1, 0.0).scale(c(3.0, 0.0));
        let s = CnState::with_tolerance(u0, p, 1e-12, 5).unwrap();
        assert!(matches!(wcn_step(&s), Err(Error::FixedPointNonConvergence { .. })));
    }

    #[test]
    fn defect_vanishes_for_linear_plane_wave() {
        let (g, k) = setup(0.01, 120);
        let p = SchemeParams::new(0.01, 0.0, k, 0.02, g.h()).unwrap();
        let a = ConstantProfileSolution { amplitude: c(1.0, 0.0), lambda: 0.0 };
        assert!(compute_defect(&a, &p, &g, 0.3).max_abs() < 1e-12);
    }

    #[test]
    fn defect_scales_like_eps_tau2_h2() {
        let eps = 0.01;
        let (g0, k) = setup(eps, 60);
        let p_mode = 2.0 * std::f64::consts::PI * 2.0 / g0.length;
        let sampler = LinearModeSolution { p: p_mode, x0: g0.x_left, kappa: k, epsilon: eps };
        let mut prev = None;
        for level in 0..3 {
            let m = 60 << level;
            let g = TorusGrid::new(-6.0, 12.0, m).unwrap();
            let p = SchemeParams::new(eps, 0.0, k, g.h() / 2.0, g.h()).unwrap();
            let d = compute_defect(&sampler, &p, &g, 0.25);
            let dmax = d.max_abs();
            let dw = wiener_norm(&d);
            assert!(dmax <= dw * (1.0 + 1e-12));
            if let Some((pm, pw)) = prev {
                let rm: f64 = pm / dmax;
                let rw: f64 = pw / dw;
                assert!((rm - 4.0).abs() < 0.6, "max ratio {rm}");
                assert!((rw - 4.0).abs() < 0.6, "wiener ratio {rw}");
            }
            prev = Some((dmax, dw));
        }
    }

    #[test]
    fn linear_leapfrog_conserves_triple_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (g, k) = setup(1e-2, 64);
        let beta = k * g.h() / 1e-2;
        let p = SchemeParams::new(1e-2, 0.0, k, 0.7 * max_stable_tau(1e-2, g.h(), beta), g.h()).unwrap();
        let u0 = ComplexField { grid: g, values: (0..g.m).map(|_| c(rng.gen(), rng.gen())).collect() };
        let mut s = LeapfrogState::start(u0, p).unwrap();
        let n0 = triple_norm(&s.u_curr, &s.u_prev, &p).unwrap();
        for _ in 0..1000 {
            s.step();
        }
        let n1 = triple_norm(&s.u_curr, &s.u_prev, &p).unwrap();
        assert!((n1 - n0).abs() / n0 < 1e-10);
    }

    #[test]
    fn leapfrog_blows_up_beyond_stability_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (g, k) = setup(0.05, 64);
        let beta = k * g.h() / 0.05;
        let p = SchemeParams::new(0.05, 0.0, k, 1.05 * max_stable_tau(0.05, g.h(), beta), g.h()).unwrap();
        assert!(LeapfrogState::start(ComplexField::zeros(g), p).is_err());
        let u0 = ComplexField { grid: g, values: (0..g.m).map(|_| c(rng.gen(), rng.gen())).collect() };
        let m0 = u0.max_abs();
        let mut s = LeapfrogState::start_unchecked(u0, p).unwrap();
        let mut grew = false;
        for _ in 0..500 {
            s.step();
            if s.u_curr.max_abs() > 10.0 * m0 {
                grew = true;
                break;
            }
        }
        assert!(grew);
    }

    #[test]
    fn weighted_leapfrog_equals_advected_leapfrog() {
        let eps = 0.05;
        let (g, k) = setup(eps, 96);
        let beta = k * g.h() / eps;
        let p = SchemeParams::new(eps, 1.0, k, 0.5 * max_stable_tau(eps, g.h(), beta), g.h()).unwrap();
        let profile = Profile::Gaussian { center: 0.3, width: 1.2, amplitude: c(0.8, 0.3) };
        let u0 = make_initial_data(&PhaseSet::single(k, profile.clone()).unwrap(), eps, &g).unwrap();
        let mut weighted = LeapfrogState::start(u0, p).unwrap();
        let mut plain = AdvectedLeapfrog::start(profile.sample(&g).values, p);
        for _ in 0..200 {
            weighted.step();
            plain.step();
        }
        let a = demodulate(&weighted.u_curr, &p, weighted.time());
        let diff = a.values.iter().zip(&plain.a_curr).fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
        assert!(diff < 1e-12, "diff {diff}");
    }
}
