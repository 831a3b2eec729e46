//! Fine-grid split-step Fourier solver for the full equation
//! `u_t = (i eps / 2) u_xx - i lambda |u|^2 u`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{linf_error, ComplexField, TorusGrid};
use crate::spectral::FourierTransform;

/// Node cap of the oracle grid.
pub const MAX_ORACLE_NODES: usize = 1 << 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Splitting {
    /// Second-order Strang splitting.
    Strang,
    /// Fourth-order triple-jump composition of Strang steps.
    #[default]
    TripleJump,
}

impl Splitting {
    /// Fractions of the step taken by the successive Strang substeps.
    pub(crate) fn fractions(self) -> Vec<f64> {
        match self {
            Splitting::Strang => vec![1.0],
            Splitting::TripleJump => {
                let c = 2f64.powf(1.0 / 3.0);
                let w1 = 1.0 / (2.0 - c);
                vec![w1, 1.0 - 2.0 * w1, w1]
            }
        }
    }
}

/// Smallest grid `base.m * 2^p` over the same interval with
/// `h <= min(eps / 8, base.h / 4)`, so that `base` is a subgrid.
pub fn oracle_grid(base: &TorusGrid, epsilon: f64) -> Result<TorusGrid> {
    let limit = (epsilon / 8.0).min(base.h() / 4.0);
    let mut m = base.m;
    while base.length / m as f64 > limit {
        m *= 2;
        if m > MAX_ORACLE_NODES {
            return Err(Error::UnresolvedGrid { h_fine: base.length / m as f64, limit });
        }
    }
    TorusGrid::new(base.x_left, base.length, m)
}

/// Split-step solution at `t_final` after `steps` steps.
pub fn splitstep_oracle(u0: &ComplexField, epsilon: f64, lambda: f64, t_final: f64, steps: usize) -> Result<ComplexField> {
    splitstep_oracle_with(u0, epsilon, lambda, t_final, steps, Splitting::default())
}

pub fn splitstep_oracle_with(
    u0: &ComplexField,
    epsilon: f64,
    lambda: f64,
    t_final: f64,
    steps: usize,
    method: Splitting,
) -> Result<ComplexField> {
    let grid = u0.grid;
    if grid.h() > epsilon / 8.0 * (1.0 + 1e-12) {
        return Err(Error::UnresolvedGrid { h_fine: grid.h(), limit: epsilon / 8.0 });
    }
    if steps == 0 || !(t_final >= 0.0) {
        return Err(Error::InvalidParameter("oracle needs a positive step count and t_final >= 0".into()));
    }
    let tau = t_final / steps as f64;
    let ft = FourierTransform::new(grid.m);
    let fractions = method.fractions();
    // distinct linear propagators exp(-i eps xi^2 c tau / 2)
    let linear: Vec<Vec<Complex64>> = fractions
        .iter()
        .map(|&c| {
            (0..grid.m)
                .map(|idx| {
                    let xi = grid.angular_wavenumber(idx);
                    Complex64::cis(-0.5 * epsilon * xi * xi * c * tau)
                })
                .collect()
        })
        .collect();
    let nonlinear = |u: &mut [Complex64], dt: f64| {
        for z in u.iter_mut() {
            *z *= Complex64::cis(-lambda * z.norm_sqr() * dt);
        }
    };
    let mut u = u0.values.clone();
    for _ in 0..steps {
        let mut pending = 0.5 * fractions[0];
        for (s, prop) in linear.iter().enumerate() {
            nonlinear(&mut u, pending * tau);
            ft.forward_in_place(&mut u);
            for (z, p) in u.iter_mut().zip(prop) {
                *z *= p;
            }
            ft.inverse_in_place(&mut u);
            let next = fractions.get(s + 1).copied().unwrap_or(0.0);
            pending = 0.5 * (fractions[s] + next);
        }
        nonlinear(&mut u, pending * tau);
    }
    Ok(ComplexField { grid, values: u })
}

/// Oracle with `steps` and `2 steps`; fails if the two differ by more than `tol`.
/// Returns the finer solution and the observed change.
pub fn splitstep_self_converged(
    u0: &ComplexField,
    epsilon: f64,
    lambda: f64,
    t_final: f64,
    steps: usize,
    tol: f64,
) -> Result<(ComplexField, f64)> {
    let coarse = splitstep_oracle(u0, epsilon, lambda, t_final, steps)?;
    let fine = splitstep_oracle(u0, epsilon, lambda, t_final, 2 * steps)?;
    let change = linf_error(&coarse, &fine)?;
    if change > tol {
        return Err(Error::SelfConvergence { change, tol });
    }
    Ok((fine, change))
}

/// Doubles the step count from `steps` until two successive solutions agree to `tol`.
pub fn splitstep_adaptive(
    u0: &ComplexField,
    epsilon: f64,
    lambda: f64,
    t_final: f64,
    mut steps: usize,
    tol: f64,
    max_doublings: usize,
) -> Result<(ComplexField, usize, f64)> {
    let mut prev = splitstep_oracle(u0, epsilon, lambda, t_final, steps)?;
    let mut change = f64::INFINITY;
    for _ in 0..max_doublings {
        steps *= 2;
        let next = splitstep_oracle(u0, epsilon, lambda, t_final, steps)?;
        change = linf_error(&prev, &next)?;
        prev = next;
        if change <= tol {
            return Ok((prev, steps, change));
        }
    }
    Err(Error::SelfConvergence { change, tol })
}
