//! Discrete Fourier transforms, the (grid-truncated) Wiener algebra norm and
//! the per-mode linear stability analysis of the weighted leapfrog scheme.
//!
//! Forward transforms carry the `1/M` factor, so coefficient 0 is the mean and
//! the Wiener norm of a constant `c` is `|c|`. The Wiener norm is the `l1` norm
//! of the `M` discrete coefficients, i.e. the norm of the trigonometric
//! interpolant; the infinite series is truncated by the grid.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{signed_mode, ComplexField, SchemeParams, TorusGrid};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Planned forward/inverse transforms for one size.
#[derive(Clone)]
pub struct FourierTransform {
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FourierTransform {
    pub fn new(m: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self { m, forward: planner.plan_fft_forward(m), inverse: planner.plan_fft_inverse(m) }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// In-place forward transform with `1/M` normalization.
    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.m);
        self.forward.process(buf);
        let s = 1.0 / self.m as f64;
        buf.iter_mut().for_each(|z| *z *= s);
    }

    /// In-place inverse transform (no normalization).
    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        debug_assert_eq!(buf.len(), self.m);
        self.inverse.process(buf);
    }

    pub fn forward(&self, values: &[Complex64]) -> Vec<Complex64> {
        let mut buf = values.to_vec();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn inverse(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        let mut buf = coeffs.to_vec();
        self.inverse_in_place(&mut buf);
        buf
    }
}

/// Coefficient `k` multiplies `exp(2 pi i k (x - x_left) / L)`.
pub fn dft(u: &ComplexField) -> Vec<Complex64> {
    FourierTransform::new(u.len()).forward(&u.values)
}

pub fn idft(grid: &TorusGrid, coeffs: &[Complex64]) -> Result<ComplexField> {
    if coeffs.len() != grid.m {
        return Err(Error::GridMismatch(format!("{} coefficients for {} nodes", coeffs.len(), grid.m)));
    }
    Ok(ComplexField { grid: *grid, values: FourierTransform::new(grid.m).inverse(coeffs) })
}

/// Sum of the moduli of the discrete Fourier coefficients.
pub fn wiener_norm(u: &ComplexField) -> f64 {
    dft(u).iter().map(|z| z.norm()).sum()
}

/// `gamma(beta) = 1 + max(|beta|, 1)`.
pub fn gamma_of_beta(beta: f64) -> f64 {
    1.0 + beta.abs().max(1.0)
}

/// Sharp bound `max_xi |gamma_k| = 1 + sqrt(1 + beta^2)`, which exceeds
/// [`gamma_of_beta`] whenever `beta != 0`.
pub fn sharp_gamma(beta: f64) -> f64 {
    1.0 + beta.hypot(1.0)
}

/// Stencil symbol of the weighted second difference: the weighted stencil maps
/// `exp(i xi x)` to `2 gamma_k exp(i xi x)`, with
/// `gamma_k = cos(beta - xi h) + beta sin(beta - xi h) - 1`.
/// On the `2 pi` torus, `xi` is the integer mode number.
pub fn gamma_k(beta: f64, xi: f64, h: f64) -> f64 {
    let phi = beta - xi * h;
    phi.cos() + beta * phi.sin() - 1.0
}

/// Linear stability data of one Fourier mode of the weighted leapfrog scheme.
#[derive(Clone, Copy, Debug)]
pub struct ModeAnalysis {
    pub k: i64,
    pub gamma_k: f64,
    pub mu_k: f64,
    pub lambda_plus: Complex64,
    pub lambda_minus: Complex64,
    /// `(||P_k||_2, ||P_k^{-1}||_2)` of the eigenvector matrix `P_k = [[l+, l-], [1, 1]]`.
    pub cond_factors: (f64, f64),
    pub stable: bool,
}

impl ModeAnalysis {
    pub fn condition_number(&self) -> f64 {
        self.cond_factors.0 * self.cond_factors.1
    }
}

/// The 2x2 amplification matrix `G_k` acting on `(u_k^n, u_k^{n-1})`.
pub fn g_matrix(alpha: f64, mu: f64) -> [[Complex64; 2]; 2] {
    let e = Complex64::cis(-alpha);
    [[2.0 * I * mu * e, e * e], [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]]
}

/// Roots `(i mu +- sqrt(1 - mu^2)) exp(-i alpha)` of the characteristic polynomial.
pub fn characteristic_roots(alpha: f64, mu: f64) -> (Complex64, Complex64) {
    let s = Complex64::new(1.0 - mu * mu, 0.0).sqrt();
    let e = Complex64::cis(-alpha);
    ((I * mu + s) * e, (I * mu - s) * e)
}

/// Singular values (largest, smallest) of a 2x2 complex matrix.
fn singular_values(a: [[Complex64; 2]; 2]) -> (f64, f64) {
    // eigenvalues of the Hermitian matrix A^* A
    let p = a[0][0].norm_sqr() + a[1][0].norm_sqr();
    let q = a[0][1].norm_sqr() + a[1][1].norm_sqr();
    let r = a[0][0].conj() * a[0][1] + a[1][0].conj() * a[1][1];
    let mean = 0.5 * (p + q);
    let disc = (0.25 * (p - q) * (p - q) + r.norm_sqr()).sqrt();
    ((mean + disc).sqrt(), (mean - disc).max(0.0).sqrt())
}

/// Per-mode analysis for Fourier mode `k` of `grid`.
pub fn amplification_matrix(params: &SchemeParams, grid: &TorusGrid, k: i64) -> ModeAnalysis {
    let xi = 2.0 * std::f64::consts::PI * k as f64 / grid.length;
    let g = gamma_k(params.beta, xi, params.h);
    let mu = params.epsilon * params.tau / (params.h * params.h) * g;
    let (lp, lm) = characteristic_roots(params.alpha, mu);
    let (smax, smin) = singular_values([[lp, lm], [Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]]);
    ModeAnalysis {
        k,
        gamma_k: g,
        mu_k: mu,
        lambda_plus: lp,
        lambda_minus: lm,
        cond_factors: (smax, if smin > 0.0 { 1.0 / smin } else { f64::INFINITY }),
        stable: mu.abs() < 1.0,
    }
}

/// Analysis of every discrete mode of `grid`, in FFT index order.
pub fn mode_analyses(params: &SchemeParams, grid: &TorusGrid) -> Vec<ModeAnalysis> {
    (0..grid.m).map(|idx| amplification_matrix(params, grid, signed_mode(idx, grid.m))).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityReport {
    pub stable: bool,
    /// `theta = eps tau gamma / h^2`; the leapfrog scheme is stable iff `theta < 1`.
    pub theta: f64,
    pub gamma: f64,
}

pub fn stability_check(params: &SchemeParams) -> StabilityReport {
    let gamma = gamma_of_beta(params.beta);
    let theta = params.epsilon * params.tau * gamma / (params.h * params.h);
    StabilityReport { stable: theta < 1.0, theta, gamma }
}

/// `max_k |mu_k|` over the discrete modes of `grid`; the leapfrog scheme is
/// stable on `grid` iff this is below one.
pub fn max_mode_mu(params: &SchemeParams, grid: &TorusGrid) -> f64 {
    (0..grid.m)
        .map(|idx| gamma_k(params.beta, grid.angular_wavenumber(idx), params.h).abs())
        .fold(0.0, f64::max)
        * params.epsilon
        * params.tau
        / (params.h * params.h)
}

/// Largest stable leapfrog step for the given `(eps, h)` and `beta`.
pub fn max_stable_tau(epsilon: f64, h: f64, beta: f64) -> f64 {
    h * h / (epsilon * gamma_of_beta(beta))
}

fn inverse_eigvecs_apply(lp: Complex64, lm: Complex64, y: (Complex64, Complex64)) -> (Complex64, Complex64) {
    let det = lp - lm;
    ((y.0 - lm * y.1) / det, (-y.0 + lp * y.1) / det)
}

/// Conserved norm of the linear weighted leapfrog scheme:
/// `sum_k |P_k^{-1} (u_k^{n+1}, u_k^n)|_2`.
pub fn triple_norm(u_next: &ComplexField, u_curr: &ComplexField, params: &SchemeParams) -> Result<f64> {
    u_next.check_same_grid(u_curr)?;
    let grid = u_next.grid;
    let ft = FourierTransform::new(grid.m);
    let a = ft.forward(&u_next.values);
    let b = ft.forward(&u_curr.values);
    let mut sum = 0.0;
    for idx in 0..grid.m {
        let mode = amplification_matrix(params, &grid, signed_mode(idx, grid.m));
        if !mode.stable {
            return Err(Error::UnstableMode { k: mode.k, mu: mode.mu_k.abs() });
        }
        let (p, q) = inverse_eigvecs_apply(mode.lambda_plus, mode.lambda_minus, (a[idx], b[idx]));
        sum += (p.norm_sqr() + q.norm_sqr()).sqrt();
    }
    Ok(sum)
}

/// `sum_k |(u_k^{n+1}, u_k^n)|_2`, the product norm the triple norm is
/// equivalent to.
pub fn product_norm(u_next: &ComplexField, u_curr: &ComplexField) -> Result<f64> {
    u_next.check_same_grid(u_curr)?;
    let ft = FourierTransform::new(u_next.len());
    let a = ft.forward(&u_next.values);
    let b = ft.forward(&u_curr.values);
    Ok(a.iter().zip(&b).map(|(p, q)| (p.norm_sqr() + q.norm_sqr()).sqrt()).sum())
}
