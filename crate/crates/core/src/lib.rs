//! Completion of degenerate quasihomogeneous polynomials, Milnor numbers,
//! and the orbifold Jacobian algebra of a `Z/2` resolution.

pub mod complete;
pub mod error;
pub mod graphs;
pub mod groebner;
pub mod hochschild;
mod linalg;
pub mod nondegen;
pub mod orbifold;
pub mod poly;

pub use complete::{
    build_completion, loop_admissible, AdmissibleCollection, Completion, CompletionOptions,
    EpsilonPolicy,
};
pub use error::{Error, Result};
pub use graphs::{build_f_kappa, solve_weights, ChoiceGraph, PowerAssignment, WeightSystem};
pub use groebner::{
    certified_dimension, groebner, jacobian_ideal, milnor_number, milnor_number_exact,
    GroebnerBasis, Milnor,
};
pub use hochschild::{verify_psi, OrbifoldAlgebra, SectorElement, ThetaTensor};
pub use nondegen::{failing_sets, predicts_nondegenerate, support, IndexSet, SupportSet};
pub use orbifold::{
    build_bar_f, build_orbifold_input, iterate_resolution, resolve_charts, GroupElement,
    OrbifoldInput, Pipeline, Resolution,
};
pub use poly::{rat, ratio, Exponent, Polynomial, Rational};
