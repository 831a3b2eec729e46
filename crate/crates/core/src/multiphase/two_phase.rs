use super::{extended_lf_step, Coupling, MultiphaseLeapfrog};
use crate::error::{Error, Result};

/// The four two-phase schemes for `u(0) = a_1 e^{i kappa x/eps} + a_{-1} e^{-i kappa x/eps}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TwoPhaseCase {
    /// Case 0: fully coupled nonlinearity `|u_1 + u_{-1}|^2 u_1`.
    Naive,
    /// Case 1: separated interactions plus the oscillatory mixed term.
    Separated,
    /// Case 2: resonant interactions only.
    FirstOrder,
    /// Case 3: resonant interactions plus the `w`, `w*` corrections.
    SecondOrder,
}

impl TwoPhaseCase {
    pub fn from_index(i: u8) -> Result<Self> {
        match i {
            0 => Ok(Self::Naive),
            1 => Ok(Self::Separated),
            2 => Ok(Self::FirstOrder),
            3 => Ok(Self::SecondOrder),
            _ => Err(Error::InvalidParameter(format!("two-phase case must be 0..=3, got {i}"))),
        }
    }
}

pub fn two_phase_coupling(case: TwoPhaseCase) -> Coupling {
    match case {
        TwoPhaseCase::Naive => Coupling::Naive,
        TwoPhaseCase::Separated => Coupling::Filtered { chi: 1, corrections: true },
        TwoPhaseCase::FirstOrder => Coupling::Filtered { chi: 0, corrections: false },
        TwoPhaseCase::SecondOrder => Coupling::Filtered { chi: 0, corrections: true },
    }
}

/// Advances a two-phase leapfrog state built for `case` by one step.
pub fn two_phase_step_case(case: TwoPhaseCase, state: &mut MultiphaseLeapfrog) -> Result<()> {
    if state.sys.r() != 2 {
        return Err(Error::InvalidParameter(format!("two-phase case needs 2 wave numbers, got {}", state.sys.r())));
    }
    if state.sys.coupling != two_phase_coupling(case) {
        return Err(Error::InvalidParameter(format!("state was built for {:?}, not {case:?}", state.sys.coupling)));
    }
    extended_lf_step(state);
    Ok(())
}

/// Right-hand sides `g_{+-1}` (with `D u = eps g`) of the printed two-phase
/// extended leapfrog scheme, written out term by term.
pub fn two_phase_rhs_printed(
    u1: num_complex::Complex64,
    um1: num_complex::Complex64,
    w3: num_complex::Complex64,
    wm3: num_complex::Complex64,
    chi: u8,
    lambda: f64,
) -> (num_complex::Complex64, num_complex::Complex64) {
    let c = f64::from(chi);
    let g1 = (u1.norm_sqr() + 2.0 * um1.norm_sqr() + c * u1 * um1.conj()) * u1
        + 2.0 * um1 * u1.conj() * w3
        + um1 * wm3.conj() * um1;
    let gm1 = (um1.norm_sqr() + 2.0 * u1.norm_sqr() + c * um1 * u1.conj()) * um1
        + 2.0 * u1 * um1.conj() * wm3
        + u1 * w3.conj() * u1;
    (lambda * g1, lambda * gm1)
}
