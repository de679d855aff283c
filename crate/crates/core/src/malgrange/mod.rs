//! Factorisation of a chart as `F = G o H`: `H` is found by continuation so
//! that the coefficient `B` of `G` is divergence free, then `B` is read off.

mod ops;
mod solve;

pub(crate) use ops::inverse_derivatives;
pub use ops::{gtilde, phi, phi_psi, psi, LINEARIZATION_SIGN, MAX_CONDITION};
pub use solve::{
    continuation, extract_b, homotopy_member, newton_solve, psi_split, BExtraction, Continuation,
    ContinuationConfig, ContinuationFailure, HomotopyKind, NewtonRecord, SolveTrace, StepRecord,
    DILATION_WINDOW,
};
