//! Grids, complex grid functions, scheme parameters and the pieces of the
//! problem setup shared by every solver: wave-number adjustment, initial data,
//! demodulation and error metrics.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Uniform periodic grid on `[x_left, x_left + length)` with `m` cells.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TorusGrid {
    pub x_left: f64,
    pub length: f64,
    pub m: usize,
}

impl TorusGrid {
    pub fn new(x_left: f64, length: f64, m: usize) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() || !x_left.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid period must be positive and finite, got {length}"
            )));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("grid needs at least one cell".into()));
        }
        Ok(Self { x_left, length, m })
    }

    /// Grid with mesh size as close as possible to `h` (rounded cell count).
    pub fn with_mesh_size(x_left: f64, length: f64, h: f64) -> Result<Self> {
        if !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("mesh size must be positive, got {h}")));
        }
        let m = (length / h).round().max(1.0) as usize;
        Self::new(x_left, length, m)
    }

    #[inline]
    pub fn h(&self) -> f64 {
        self.length / self.m as f64
    }

    #[inline]
    pub fn x(&self, j: usize) -> f64 {
        self.x_left + j as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.m).map(move |j| self.x(j))
    }

    /// Periodic index `j + offset` wrapped into `0..m`.
    #[inline]
    pub fn wrap(&self, j: usize, offset: isize) -> usize {
        (j as isize + offset).rem_euclid(self.m as isize) as usize
    }

    /// Angular wave number of the discrete Fourier coefficient stored at `idx`
    /// (FFT ordering: non-negative modes first, then negative ones).
    pub fn angular_wavenumber(&self, idx: usize) -> f64 {
        2.0 * PI * signed_mode(idx, self.m) as f64 / self.length
    }

    /// True if `fine` refines `self` by an integer factor with aligned nodes.
    pub fn is_subgrid_of(&self, fine: &TorusGrid) -> bool {
        fine.m % self.m == 0 && self.x_left == fine.x_left && self.length == fine.length
    }
}

/// Signed mode number for FFT index `idx` on `m` points.
#[inline]
pub fn signed_mode(idx: usize, m: usize) -> i64 {
    if idx <= m / 2 {
        idx as i64
    } else {
        idx as i64 - m as i64
    }
}

/// Uniform time grid `t_n = n * tau`, `tau = T / N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeGrid {
    pub t_final: f64,
    pub n: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, n: usize) -> Result<Self> {
        if !(t_final > 0.0) || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "time grid needs T > 0 and N >= 1, got T = {t_final}, N = {n}"
            )));
        }
        Ok(Self { t_final, n })
    }

    /// Smallest number of steps whose step size does not exceed `tau_max`.
    pub fn with_max_step(t_final: f64, tau_max: f64) -> Result<Self> {
        if !(tau_max > 0.0) {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {tau_max}")));
        }
        let n = (t_final / tau_max * (1.0 - 1e-12)).ceil().max(1.0) as usize;
        Self::new(t_final, n)
    }

    #[inline]
    pub fn tau(&self) -> f64 {
        self.t_final / self.n as f64
    }

    #[inline]
    pub fn t(&self, n: usize) -> f64 {
        n as f64 * self.tau()
    }
}

/// Complex grid function: one time level of one solution component.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    pub grid: TorusGrid,
    pub values: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.m] }
    }

    pub fn from_values(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.m {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} nodes",
                values.len(),
                grid.m
            )));
        }
        if values.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter("field contains non-finite entries".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Self { grid, values: grid.nodes().map(f).collect() }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    /// Discrete L2 norm `sqrt(h * sum |u_j|^2)`.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.h() * self.values.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn check_same_grid(&self, other: &ComplexField) -> Result<()> {
        if self.grid != other.grid || self.values.len() != other.values.len() {
            return Err(Error::GridMismatch(format!("{:?} vs {:?}", self.grid, other.grid)));
        }
        Ok(())
    }

    /// Pointwise sum; grids must agree.
    pub fn add(&self, other: &ComplexField) -> Result<ComplexField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect();
        Ok(ComplexField { grid: self.grid, values })
    }

    pub fn sub(&self, other: &ComplexField) -> Result<ComplexField> {
        self.check_same_grid(other)?;
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect();
        Ok(ComplexField { grid: self.grid, values })
    }

    pub fn scale(&self, c: Complex64) -> ComplexField {
        ComplexField { grid: self.grid, values: self.values.iter().map(|z| z * c).collect() }
    }

    /// Restrict to a coarser grid whose nodes are a subset of this grid's nodes.
    pub fn restrict_to(&self, coarse: &TorusGrid) -> Result<ComplexField> {
        if !coarse.is_subgrid_of(&self.grid) {
            return Err(Error::GridMismatch(format!(
                "{coarse:?} is not a subgrid of {:?}",
                self.grid
            )));
        }
        let stride = self.grid.m / coarse.m;
        Ok(ComplexField {
            grid: *coarse,
            values: (0..coarse.m).map(|j| self.values[j * stride]).collect(),
        })
    }
}

/// Parameters of one weighted stencil.
///
/// `omega`, `alpha` and `beta` are derived in the constructor and are never
/// set independently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchemeParams {
    pub epsilon: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub omega: f64,
    pub tau: f64,
    pub h: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl SchemeParams {
    pub fn new(epsilon: f64, lambda: f64, kappa: f64, tau: f64, h: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
        }
        if !(tau > 0.0) || !(h > 0.0) {
            return Err(Error::InvalidParameter(format!("tau and h must be positive, got {tau}, {h}")));
        }
        if !lambda.is_finite() || !kappa.is_finite() {
            return Err(Error::InvalidParameter("lambda and kappa must be finite".into()));
        }
        let omega = 0.5 * kappa * kappa;
        Ok(Self {
            epsilon,
            lambda,
            kappa,
            omega,
            tau,
            h,
            alpha: omega * tau / epsilon,
            beta: kappa * h / epsilon,
        })
    }

    /// Same parameters for another wave number.
    pub fn with_kappa(&self, kappa: f64) -> Self {
        Self::new(self.epsilon, self.lambda, kappa, self.tau, self.h)
            .expect("parameters already validated")
    }

    /// Same parameters with a different time step.
    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        Self::new(self.epsilon, self.lambda, self.kappa, tau, self.h)
    }

    /// `alpha` reduced modulo `4 pi` (so `alpha / 2` stays valid modulo `2 pi`),
    /// for use as a rotation angle.
    pub fn rotation(&self) -> f64 {
        reduced_angle(self.omega, self.tau, self.epsilon)
    }

    /// Unweighted limit: `kappa = 0`, hence `alpha = beta = 0`.
    pub fn unweighted(&self) -> Self {
        self.with_kappa(0.0)
    }
}

/// Profile of one initial phase, evaluated at grid nodes.
#[derive(Clone)]
pub enum Profile {
    Constant(Complex64),
    /// `amplitude * exp(-((x - center) / width)^2)`
    Gaussian { center: f64, width: f64, amplitude: Complex64 },
    Custom(Arc<dyn Fn(f64) -> Complex64 + Send + Sync>),
}

impl Profile {
    pub fn eval(&self, x: f64) -> Complex64 {
        match self {
            Profile::Constant(c) => *c,
            Profile::Gaussian { center, width, amplitude } => {
                let s = (x - center) / width;
                amplitude * (-s * s).exp()
            }
            Profile::Custom(f) => f(x),
        }
    }

    pub fn sample(&self, grid: &TorusGrid) -> ComplexField {
        ComplexField::from_fn(*grid, |x| self.eval(x))
    }
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant(c) => write!(f, "Constant({c})"),
            Profile::Gaussian { center, width, amplitude } => {
                write!(f, "Gaussian {{ center: {center}, width: {width}, amplitude: {amplitude} }}")
            }
            Profile::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Phase {
    pub kappa: f64,
    pub profile: Profile,
}

/// Initial phases: pairwise distinct, nonzero wave numbers with profiles.
#[derive(Clone, Debug, Default)]
pub struct PhaseSet {
    phases: Vec<Phase>,
}

impl PhaseSet {
    pub fn new(phases: Vec<Phase>) -> Result<Self> {
        for (i, p) in phases.iter().enumerate() {
            if p.kappa == 0.0 || !p.kappa.is_finite() {
                return Err(Error::InvalidParameter(format!("phase {i} has wave number {}", p.kappa)));
            }
            if phases[..i].iter().any(|q| q.kappa == p.kappa) {
                return Err(Error::InvalidParameter(format!("duplicate wave number {}", p.kappa)));
            }
        }
        Ok(Self { phases })
    }

    pub fn single(kappa: f64, profile: Profile) -> Result<Self> {
        Self::new(vec![Phase { kappa, profile }])
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.phases.iter().map(|p| p.kappa).collect()
    }

    /// Copy with every wave number moved onto the grid-periodic lattice.
    pub fn adjusted(&self, epsilon: f64, grid: &TorusGrid) -> Result<Self> {
        Self::new(
            self.phases
                .iter()
                .map(|p| Phase { kappa: adjust_wavenumber(p.kappa, epsilon, grid), profile: p.profile.clone() })
                .collect(),
        )
    }
}

/// Nearest wave number `k'` with `k' L / (2 pi eps)` integral.
pub fn adjust_wavenumber(kappa: f64, epsilon: f64, grid: &TorusGrid) -> f64 {
    let spacing = 2.0 * PI * epsilon / grid.length;
    spacing * (kappa / spacing).round()
}

/// Number of carrier oscillations `kappa L / (2 pi eps)` over one period.
pub fn winding_number(kappa: f64, epsilon: f64, grid: &TorusGrid) -> f64 {
    kappa * grid.length / (2.0 * PI * epsilon)
}

pub fn is_grid_periodic(kappa: f64, epsilon: f64, grid: &TorusGrid) -> bool {
    let w = winding_number(kappa, epsilon, grid);
    (w - w.round()).abs() <= 1e-9 * w.abs().max(1.0)
}

/// `kappa x_j / eps` with the node-dependent part reduced exactly modulo `2 pi`
/// when the carrier is grid periodic, so that carriers with thousands of
/// oscillations keep their phase to roundoff.
pub fn carrier_phase(kappa: f64, epsilon: f64, grid: &TorusGrid, j: usize) -> f64 {
    let w = winding_number(kappa, epsilon, grid);
    if is_grid_periodic(kappa, epsilon, grid) && w.abs() < 1e15 {
        let n = w.round() as i128;
        let m = grid.m as i128;
        let r = (n * j as i128).rem_euclid(m);
        reduced_angle(kappa, grid.x_left, epsilon) + 2.0 * PI * (r as f64 / grid.m as f64)
    } else {
        reduced_angle(kappa, grid.x(j), epsilon)
    }
}

/// Carrier phase increment `kappa h / eps` between neighbouring nodes, reduced
/// exactly to `2 pi n / M` modulo `2 pi` when the carrier is grid periodic.
pub fn carrier_step_angle(kappa: f64, epsilon: f64, grid: &TorusGrid) -> f64 {
    let w = winding_number(kappa, epsilon, grid);
    if is_grid_periodic(kappa, epsilon, grid) && w.abs() < 1e15 {
        let m = grid.m as i128;
        let mut r = (w.round() as i128).rem_euclid(m);
        if 2 * r > m {
            r -= m;
        }
        2.0 * PI * (r as f64 / grid.m as f64)
    } else {
        kappa * grid.h() / epsilon
    }
}

/// `u(0, x_j) = sum_m a_m(x_j) exp(i kappa_m x_j / eps)`.
pub fn make_initial_data(phases: &PhaseSet, epsilon: f64, grid: &TorusGrid) -> Result<ComplexField> {
    let mut u = ComplexField::zeros(*grid);
    for p in phases.phases() {
        if !is_grid_periodic(p.kappa, epsilon, grid) {
            return Err(Error::NonPeriodicPhase {
                kappa: p.kappa,
                epsilon,
                winding: winding_number(p.kappa, epsilon, grid),
            });
        }
        for (j, v) in u.values.iter_mut().enumerate() {
            *v += p.profile.eval(grid.x(j)) * Complex64::cis(carrier_phase(p.kappa, epsilon, grid, j));
        }
    }
    Ok(u)
}

const FOUR_PI_HI: f64 = 4.0 * PI;
const FOUR_PI_LO: f64 = 4.898587196589413e-16;

fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// `(hi + lo) / c` modulo `4 pi` for a double-double numerator.
fn reduce_dd(hi: f64, lo: f64, c: f64) -> f64 {
    let q = hi / c;
    let qe = ((-q).mul_add(c, hi) + lo) / c;
    let k = (q / FOUR_PI_HI).round();
    (-k).mul_add(FOUR_PI_HI, q) - k * FOUR_PI_LO + qe
}

/// `a b / c` modulo `4 pi`, evaluated in double-double arithmetic. Phases like
/// `omega t / eps` reach thousands of radians for small `eps`; a plain product
/// would lose their fractional part to roundoff.
pub fn reduced_angle(a: f64, b: f64, c: f64) -> f64 {
    let (p, e) = two_prod(a, b);
    reduce_dd(p, e, c)
}

/// `omega n tau / eps` modulo `4 pi` without rounding `n tau` first.
pub fn step_angle(omega: f64, tau: f64, n: usize, epsilon: f64) -> f64 {
    let (p, e) = two_prod(omega, tau);
    let nf = n as f64;
    let (q, qe) = two_prod(p, nf);
    reduce_dd(q, qe + e * nf, epsilon)
}

/// Grid samples of the carrier `exp(i (kappa x - omega t) / eps)`.
pub fn carrier(grid: &TorusGrid, kappa: f64, omega: f64, epsilon: f64, t: f64) -> ComplexField {
    let time = Complex64::cis(-reduced_angle(omega, t, epsilon));
    let values = (0..grid.m).map(|j| Complex64::cis(carrier_phase(kappa, epsilon, grid, j)) * time).collect();
    ComplexField { grid: *grid, values }
}

fn strip_carrier(u: &ComplexField, params: &SchemeParams, time_angle: f64) -> ComplexField {
    let time = Complex64::cis(-time_angle);
    let values = u
        .values
        .iter()
        .enumerate()
        .map(|(j, z)| z * (Complex64::cis(carrier_phase(params.kappa, params.epsilon, &u.grid, j)) * time).conj())
        .collect();
    ComplexField { grid: u.grid, values }
}

/// Strip the carrier of `params` at time `t`: returns the modulation samples.
pub fn demodulate(u: &ComplexField, params: &SchemeParams, t: f64) -> ComplexField {
    strip_carrier(u, params, reduced_angle(params.omega, t, params.epsilon))
}

/// [`demodulate`] at time level `n`, i.e. `t = n tau` taken exactly.
pub fn demodulate_step(u: &ComplexField, params: &SchemeParams, n: usize) -> ComplexField {
    strip_carrier(u, params, step_angle(params.omega, params.tau, n, params.epsilon))
}

/// Inverse of [`demodulate`].
pub fn modulate(a: &ComplexField, params: &SchemeParams, t: f64) -> ComplexField {
    let time = Complex64::cis(-reduced_angle(params.omega, t, params.epsilon));
    let values = a
        .values
        .iter()
        .enumerate()
        .map(|(j, z)| z * Complex64::cis(carrier_phase(params.kappa, params.epsilon, &a.grid, j)) * time)
        .collect();
    ComplexField { grid: a.grid, values }
}

/// Discrete maximum-norm distance.
pub fn linf_error(u: &ComplexField, v: &ComplexField) -> Result<f64> {
    u.check_same_grid(v)?;
    Ok(u.values.iter().zip(&v.values).fold(0.0, |m, (a, b)| m.max((a - b).norm())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mesh_size_and_nodes() {
        let g = TorusGrid::new(-6.0, 12.0, 120).unwrap();
        assert!((g.h() * g.m as f64 - g.length).abs() <= f64::EPSILON * g.length);
        assert_eq!(g.x(0), -6.0);
        assert_eq!(g.wrap(119, 1), 0);
        assert_eq!(g.wrap(0, -1), 119);
        assert_eq!(g.wrap(5, 120), 5);
        assert!(TorusGrid::new(0.0, -1.0, 4).is_err());
        assert!(TorusGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn time_grid_respects_max_step() {
        let tg = TimeGrid::with_max_step(0.5, 0.03).unwrap();
        assert_eq!(tg.n, 17);
        assert!(tg.tau() <= 0.03);
        let exact = TimeGrid::with_max_step(0.5, 0.025).unwrap();
        assert_eq!(exact.n, 20);
        assert!((exact.tau() * exact.n as f64 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn reduced_angle_keeps_fraction_of_large_phases() {
        // references from 50-digit arithmetic
        assert!((reduced_angle(0.845, 0.5, 1e-4) - 2.6994735753175516).abs() < 1e-14);
        assert!((reduced_angle(0.8450000000000001, 0.018518518518518517, 1e-4) - 5.685034109171405).abs() < 1e-14);
        let r = reduced_angle(2.0, 0.1, 0.01);
        assert!(r.abs() <= 2.0 * PI && (Complex64::cis(r) - Complex64::cis(20.0)).norm() < 1e-14);
        assert_eq!(reduced_angle(0.0, 0.3, 0.1), 0.0);
        let (w, tau) = (0.8450000000000001, 0.018518518518518517);
        assert!((step_angle(w, tau, 1, 1e-4) - reduced_angle(w, tau, 1e-4)).abs() < 1e-15);
        let z = Complex64::cis(step_angle(w, tau, 27, 1e-4)) - Complex64::cis(27.0 * reduced_angle(w, tau, 1e-4));
        assert!(z.norm() < 1e-13);
    }

    #[test]
    fn scheme_params_are_consistent() {
        let p = SchemeParams::new(0.01, 1.0, 2.0, 0.1, 0.05).unwrap();
        assert_eq!(p.omega, 2.0);
        assert_eq!(p.alpha, 2.0 * 0.1 / 0.01);
        assert_eq!(p.beta, 2.0 * 0.05 / 0.01);
        assert!(SchemeParams::new(0.0, 1.0, 1.0, 0.1, 0.1).is_err());
        assert!(SchemeParams::new(1.5, 1.0, 1.0, 0.1, 0.1).is_err());
        let u = p.unweighted();
        assert_eq!((u.alpha, u.beta), (0.0, 0.0));
    }

    #[test]
    fn adjust_wavenumber_examples() {
        let g = TorusGrid::new(0.0, 2.0 * PI, 64).unwrap();
        let eps = 1.0 / 7.0;
        assert!((adjust_wavenumber(1.0, eps, &g) - 1.0).abs() < 1e-15);

        let g12 = TorusGrid::new(-6.0, 12.0, 120).unwrap();
        let k = adjust_wavenumber(1.0, 0.3, &g12);
        assert!((k - 0.942_477_796_076_938).abs() < 1e-12);
        let w = winding_number(k, 0.3, &g12);
        assert!((w - w.round()).abs() < 1e-12);

        assert_eq!(adjust_wavenumber(0.0, 0.3, &g12), 0.0);
    }

    #[test]
    fn initial_data_single_and_two_phase() {
        let g = TorusGrid::new(-6.0, 12.0, 240).unwrap();
        let eps = 0.05;
        let k = adjust_wavenumber(1.0, eps, &g);
        let single = PhaseSet::single(k, Profile::Constant(c(1.0, 0.0))).unwrap();
        let u = make_initial_data(&single, eps, &g).unwrap();
        for (j, z) in u.values.iter().enumerate() {
            assert!((z.norm() - 1.0).abs() < 1e-14);
            assert!((z - Complex64::cis(k * g.x(j) / eps)).norm() < 1e-12);
        }

        let half = Profile::Gaussian { center: 0.0, width: 1.0, amplitude: c(0.5, 0.0) };
        let two = PhaseSet::new(vec![
            Phase { kappa: k, profile: half.clone() },
            Phase { kappa: -k, profile: half },
        ])
        .unwrap();
        let u = make_initial_data(&two, eps, &g).unwrap();
        for (j, z) in u.values.iter().enumerate() {
            let x = g.x(j);
            assert!(z.im.abs() < 1e-14);
            assert!((z.re - (-x * x).exp() * (k * x / eps).cos()).abs() < 1e-12);
        }

        let empty = make_initial_data(&PhaseSet::default(), eps, &g).unwrap();
        assert_eq!(empty.max_abs(), 0.0);
    }

    #[test]
    fn initial_data_rejects_non_periodic_phase() {
        let g = TorusGrid::new(-6.0, 12.0, 120).unwrap();
        let p = PhaseSet::single(1.0, Profile::Constant(c(1.0, 0.0))).unwrap();
        assert!(matches!(make_initial_data(&p, 0.3, &g), Err(Error::NonPeriodicPhase { .. })));
    }

    #[test]
    fn phase_set_validation() {
        let p = Profile::Constant(c(1.0, 0.0));
        assert!(PhaseSet::single(0.0, p.clone()).is_err());
        assert!(PhaseSet::new(vec![
            Phase { kappa: 1.0, profile: p.clone() },
            Phase { kappa: 1.0, profile: p }
        ])
        .is_err());
    }

    #[test]
    fn demodulate_plane_wave() {
        let g = TorusGrid::new(-6.0, 12.0, 96).unwrap();
        let eps = 0.02;
        let params = SchemeParams::new(eps, 1.0, adjust_wavenumber(1.0, eps, &g), 0.01, g.h()).unwrap();
        let t = 0.37;
        let amp = c(2.0, 3.0);
        let u = carrier(&g, params.kappa, params.omega, eps, t).scale(amp);
        let a = demodulate(&u, &params, t);
        for z in &a.values {
            assert!((z - amp).norm() < 1e-12);
        }
    }

    #[test]
    fn linf_error_basics() {
        let g = TorusGrid::new(0.0, 1.0, 8).unwrap();
        let u = ComplexField::from_fn(g, |x| c(x, -x));
        assert_eq!(linf_error(&u, &u).unwrap(), 0.0);
        let mut v = u.clone();
        v.values[3] += c(1e-3, 0.0);
        assert!((linf_error(&u, &v).unwrap() - 1e-3).abs() < 1e-15);
        let other = ComplexField::zeros(TorusGrid::new(0.0, 1.0, 9).unwrap());
        assert!(matches!(linf_error(&u, &other), Err(Error::GridMismatch(_))));
    }

    proptest! {
        #[test]
        fn reduced_angle_matches_direct_phase(a in -3.0f64..3.0, b in 0.0f64..2.0, c in 0.05f64..1.0) {
            let r = reduced_angle(a, b, c);
            prop_assert!(r.abs() <= 2.0 * PI * (1.0 + 1e-15));
            prop_assert!((Complex64::cis(r) - Complex64::cis(a * b / c)).norm() < 1e-13);
        }

        #[test]
        fn adjusted_wavenumber_is_periodic_and_close(
            kappa in -5.0f64..5.0, eps in 1e-4f64..1.0, length in 0.5f64..50.0
        ) {
            let g = TorusGrid::new(0.0, length, 16).unwrap();
            let k = adjust_wavenumber(kappa, eps, &g);
            prop_assert!((k - kappa).abs() <= PI * eps / length * (1.0 + 1e-12));
            prop_assert!(is_grid_periodic(k, eps, &g));
        }

        #[test]
        fn modulate_demodulate_round_trip(
            seed in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 32),
            eps in 1e-3f64..1.0, t in 0.0f64..1.0
        ) {
            let g = TorusGrid::new(-6.0, 12.0, 32).unwrap();
            let u = ComplexField::from_values(g, seed.iter().map(|&(a, b)| c(a, b)).collect()).unwrap();
            let p = SchemeParams::new(eps, 1.0, adjust_wavenumber(1.3, eps, &g), 0.01, g.h()).unwrap();
            let back = modulate(&demodulate(&u, &p, t), &p, t);
            let scale = u.max_abs().max(1e-300);
            prop_assert!(linf_error(&u, &back).unwrap() / scale <= 1e-13);
        }

        #[test]
        fn periodic_shift_by_m_is_identity(j in 0usize..200, m in 1usize..64) {
            let g = TorusGrid::new(0.0, 1.0, m).unwrap();
            let j = j % m;
            prop_assert_eq!(g.wrap(j, m as isize), j);
            prop_assert_eq!(g.wrap(j, -(m as isize)), j);
        }
    }
}
