//! Weighted fractional Gagliardo energies on uniform grids, their local
//! Dirichlet limits, the associated Laplacians and gradient flows, and
//! numerical checks of the inequalities that tie them together.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod energy;
pub mod error;
pub mod flows;
pub mod function;
pub mod grid;
pub mod operators;
pub mod params;
pub mod quadrature;
pub mod verify;
pub mod weight;

pub use energy::{
    dirichlet_energy, fractional_seminorm, restricted_pair_energy, kdp_closed_form, kdp_quadrature, seminorm_bilinear,
    Breakdown, SeminormResult,
};
pub use error::{Error, Result};
pub use flows::{run, stability_experiment, step, Flow, FlowKind, FlowProblem, Trajectory};
pub use function::{
    discrete_gradient, shift, weighted_lp_norm, weighted_total_variation, GridFunction,
    VectorField,
};
pub use grid::{Domain, Grid};
pub use operators::{
    first_variation_check, local_first_variation_check, weighted_fractional_laplacian,
    weighted_laplacian, OperatorHandle,
};
pub use params::{DiagMode, FractionalParams};
pub use verify::{
    bbm_sweep, hardy_check, mollify, recovery_sequence, translation_estimate_check,
    weight_stability_gap, SweepResult,
};
pub use weight::{Perturbation, Rate, Weight, WeightFamily, WeightPreset};
