use num_complex::Complex64;

use super::MultiphaseSystem;
use crate::error::Result;
use crate::grid::{ComplexField, PhaseSet};
use crate::single_phase::{euler_update, lf_update, WeightedStencil};

type Fields = Vec<Vec<Complex64>>;

/// Two-level state of the extended weighted leapfrog scheme.
#[derive(Clone, Debug)]
pub struct MultiphaseLeapfrog {
    pub sys: MultiphaseSystem,
    pub u_prev: Fields,
    pub u_curr: Fields,
    pub ws_prev: Fields,
    pub ws_curr: Fields,
    pub w_curr: Fields,
    pub n: usize,
    u_stencils: Vec<WeightedStencil>,
    ws_stencils: Vec<WeightedStencil>,
}

impl MultiphaseLeapfrog {
    /// Initial data and the weighted Euler start of every component. With
    /// `check_stability` the step is rejected unless every component is stable.
    pub fn start(sys: MultiphaseSystem, phases: &PhaseSet, check_stability: bool) -> Result<Self> {
        if check_stability {
            sys.lf_stability()?;
        }
        let (u0, ws0, w0) = sys.initial_components(phases)?;
        let g = &sys.grid;
        let u_stencils: Vec<_> =
            sys.u_params.iter().map(|p| WeightedStencil::for_carrier(p.kappa, p.epsilon, g)).collect();
        let ws_stencils: Vec<_> =
            sys.ws_params.iter().map(|p| WeightedStencil::for_carrier(p.kappa, p.epsilon, g)).collect();
        let (gu, gws) = sys.explicit_rhs(&u0, &ws0, &w0);
        let u1: Fields = (0..sys.r())
            .map(|r| {
                let p = &sys.u_params[r];
                euler_update(&u0[r], &gu[r], p.rotation(), &u_stencils[r], p.epsilon, p.tau, p.h)
            })
            .collect();
        let ws1: Fields = if sys.has_corrections() {
            (0..sys.n_len())
                .map(|nu| {
                    let p = &sys.ws_params[nu];
                    euler_update(&ws0[nu], &gws[nu], p.rotation(), &ws_stencils[nu], p.epsilon, p.tau, p.h)
                })
                .collect()
        } else {
            ws0.clone()
        };
        let w1 = sys.slaved(&u1);
        Ok(Self { sys, u_prev: u0, u_curr: u1, ws_prev: ws0, ws_curr: ws1, w_curr: w1, n: 1, u_stencils, ws_stencils })
    }

    pub fn step(&mut self) {
        extended_lf_step(self);
    }

    pub fn advance_to(&mut self, n: usize) {
        while self.n < n {
            self.step();
        }
    }

    pub fn time(&self) -> f64 {
        self.n as f64 * self.sys.tau
    }

    pub fn assemble(&self) -> ComplexField {
        self.sys.assemble(&self.u_curr, &self.ws_curr, &self.w_curr)
    }

    pub fn u_component(&self, r: usize) -> ComplexField {
        ComplexField { grid: self.sys.grid, values: self.u_curr[r].clone() }
    }
}

/// One step of the extended weighted leapfrog scheme: every `u_r` and `w*_nu`
/// advanced explicitly, then the slaved `w_nu` recomputed at the new level.
pub fn extended_lf_step(state: &mut MultiphaseLeapfrog) {
    let sys = &state.sys;
    let (gu, gws) = sys.explicit_rhs(&state.u_curr, &state.ws_curr, &state.w_curr);
    let u_next: Fields = (0..sys.r())
        .map(|r| {
            let p = &sys.u_params[r];
            lf_update(&state.u_prev[r], &state.u_curr[r], &gu[r], p.rotation(), &state.u_stencils[r], p.epsilon, p.tau, p.h)
        })
        .collect();
    if sys.has_corrections() {
        let ws_next: Fields = (0..sys.n_len())
            .map(|nu| {
                let p = &sys.ws_params[nu];
                lf_update(&state.ws_prev[nu], &state.ws_curr[nu], &gws[nu], p.rotation(), &state.ws_stencils[nu], p.epsilon, p.tau, p.h)
            })
            .collect();
        state.ws_prev = std::mem::replace(&mut state.ws_curr, ws_next);
    }
    state.w_curr = sys.slaved(&u_next);
    state.u_prev = std::mem::replace(&mut state.u_curr, u_next);
    state.n += 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{adjust_wavenumber, Phase, Profile, SchemeParams, TorusGrid};
    use crate::multiphase::Coupling;
    use crate::single_phase::LeapfrogState;
    use crate::spectral::{max_stable_tau, triple_norm};

    fn gauss(amp: f64) -> Profile {
        Profile::Gaussian { center: 0.0, width: 1.0, amplitude: Complex64::new(amp, 0.0) }
    }

    #[test]
    fn single_phase_specialization_matches() {
        let g = TorusGrid::new(-6.0, 12.0, 120).unwrap();
        let eps = 0.01;
        let k = adjust_wavenumber(1.0, eps, &g);
        let tau = 0.5 * max_stable_tau(eps, g.h(), k * g.h() / eps);
        let phases = PhaseSet::single(k, gauss(1.0)).unwrap();
        let sys = MultiphaseSystem::new(&phases, eps, 1.0, tau, g, Coupling::Filtered { chi: 0, corrections: true }).unwrap();
        assert_eq!((sys.r(), sys.n_len()), (1, 0));
        let mut multi = MultiphaseLeapfrog::start(sys, &phases, true).unwrap();
        let p = SchemeParams::new(eps, 1.0, k, tau, g.h()).unwrap();
        let u0 = crate::grid::make_initial_data(&phases, eps, &g).unwrap();
        let mut single = LeapfrogState::start(u0, p).unwrap();
        for _ in 0..100 {
            multi.step();
            single.step();
        }
        let d = crate::grid::linf_error(&multi.assemble(), &single.u_curr).unwrap();
        assert!(d <= 1e-14, "{d}");
    }

    #[test]
    fn linear_components_conserve_triple_norm() {
        let g = TorusGrid::new(-6.0, 12.0, 64).unwrap();
        let eps = 0.05;
        let k = adjust_wavenumber(1.0, eps, &g);
        let tau = 0.5 * max_stable_tau(eps, g.h(), 3.0 * k * g.h() / eps);
        let phases = PhaseSet::new(vec![Phase { kappa: k, profile: gauss(0.5) }, Phase { kappa: -k, profile: gauss(0.5) }])
            .unwrap();
        let sys = MultiphaseSystem::new(&phases, eps, 0.0, tau, g, Coupling::Filtered { chi: 0, corrections: true }).unwrap();
        let mut s = MultiphaseLeapfrog::start(sys, &phases, true).unwrap();
        let norms = |s: &MultiphaseLeapfrog| -> Vec<f64> {
            (0..s.sys.r())
                .map(|r| {
                    let a = ComplexField { grid: g, values: s.u_curr[r].clone() };
                    let b = ComplexField { grid: g, values: s.u_prev[r].clone() };
                    triple_norm(&a, &b, &s.sys.u_params[r]).unwrap()
                })
                .collect()
        };
        let before = norms(&s);
        s.advance_to(300);
        for (a, b) in before.iter().zip(norms(&s)) {
            assert!((a - b).abs() / a < 1e-10);
        }
    }

    #[test]
    fn unstable_correction_component_is_rejected() {
        let g = TorusGrid::new(-6.0, 12.0, 240).unwrap();
        let eps = 1e-4;
        let k = adjust_wavenumber(1.0, eps, &g);
        let phases = PhaseSet::new(vec![Phase { kappa: k, profile: gauss(0.5) }, Phase { kappa: -k, profile: gauss(0.5) }])
            .unwrap();
        let sys = MultiphaseSystem::new(&phases, eps, 1.0, 0.025, g, Coupling::Filtered { chi: 0, corrections: true }).unwrap();
        assert!(MultiphaseLeapfrog::start(sys.clone(), &phases, true).is_err());
        assert!(MultiphaseLeapfrog::start(sys, &phases, false).is_ok());
    }
}
