//! Reference solutions: the fine-grid split-step oracle, the modulation
//! (multiphase expansion) solver and an on-disk cache for both.

pub mod cache;
pub mod modulation;
pub mod oracle;

pub use modulation::{assemble_mfe, solve_modulation, ModulationConfig, ModulationSolution};
pub use cache::{cache_key, ReferenceCache};
pub use oracle::{oracle_grid, splitstep_oracle, splitstep_self_converged, Splitting};

use crate::grid::{ComplexField, SchemeParams};
use crate::single_phase::LeapfrogState;

/// Standard (unweighted) leapfrog step: the weighted scheme with `kappa = 0`.
pub fn standard_fd_step(state: &mut LeapfrogState) {
    if state.params.kappa != 0.0 {
        state.params = state.params.unweighted();
    }
    state.step();
}

/// Standard leapfrog started from `u0`, without the weighting.
pub fn standard_fd_start(u0: ComplexField, params: &SchemeParams) -> crate::Result<LeapfrogState> {
    LeapfrogState::start_unchecked(u0, params.unweighted())
}
