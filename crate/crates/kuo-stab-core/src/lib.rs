//! Linear barotropic stability of beta-plane shear flows in a channel.
//!
//! The library computes eigenvalues of the Rayleigh-Kuo problem
//!
//!   -phi'' + alpha^2 phi - (beta - U'')/(U - c) phi = 0,  phi(y1) = phi(y2) = 0,
//!
//! for class-K+ profiles, together with the Sinus flow's closed-form
//! spectrum, the sharp stability boundary in the (alpha^2, beta) plane,
//! unstable dispersion roots, a neutral-mode census, and Hamiltonian
//! index counts.

pub mod closedform;
pub mod error;
pub mod profiles;
pub mod slsolver;
pub mod specfun;
pub mod stability;

pub use error::{Error, Result};
pub use profiles::{sinus_profile, tanh_profile, FlowProfile, KPlusReport};
pub use slsolver::{
    dlambda_dbeta, dlambda_dc, eigenfunction, eigenvalues, eigenvalues_with_errors, EigenPair,
    ResolvedSpeed, SlProblem, Speed,
};
pub use specfun::Extended;
pub use stability::{
    boundary_sweep, capital_lambda, count_unstable, dispersion, find_beta_minus,
    find_unstable_mode, index_counts, lambda_beta_profile, n_minus_l_alpha,
    neutral_nonresonant_census, quadratic_form, semicircle_slack, verify_mode_identities,
    BoundaryCase,
    BoundaryPoint, CensusEntry, IndexCount, Mode, ModeIdentities, ModeKind, QuadraticForm, Side,
};
