//! Forward-rate fields with linear volatility driven by Lévy noise.
//!
//! The forward curve `f(t, T)` on the triangle `0 <= t <= T <= T*` solves
//!
//! ```text
//! f(t, T) = a(t, T) · exp( ∫_0^t J'( ∫_s^T λ(s, u) f(s, u) du ) λ(s, T) ds )
//! ```
//!
//! where `J` is the Laplace exponent of the driving Lévy process `L`, `λ` the deterministic
//! volatility coefficient and `a` the stochastic-exponential field built from one path of `L`.
//!
//! The crate is organised along the workflow:
//!
//! * [`levy_model`] describes the noise and checks the standing assumptions;
//! * [`laplace_exponent`] evaluates `J`, `J'`, `J''` and classifies the growth of `J'`;
//! * [`existence_classifier`] decides whether a bounded solution exists;
//! * [`levy_path`] simulates the noise and builds `a(t, T)` on a [`grid::TriangularGrid`];
//! * [`field_solver`] runs the monotone fixed-point construction and the blow-up minorant;
//! * [`martingale_verifier`] checks the drift condition and discounted bond prices.

pub mod curves;
pub mod error;
pub mod existence_classifier;
pub mod field_solver;
pub mod fixtures;
pub mod grid;
pub mod laplace_exponent;
pub mod levy_model;
pub mod levy_path;
pub mod martingale_verifier;
pub mod quadrature;
pub mod special;

pub use curves::{InitialCurve, ScalarFn, VolatilitySurface};
pub use error::{Error, Result};
pub use existence_classifier::{classify, estimate_rho, ClassifierOptions, ExistenceVerdict, Verdict};
pub use field_solver::{
    apply_a, bound_constant_c, solve_fixed_point, solve_fixed_point_from, verify_minorant_dominance, DominanceReport,
    MinorantParams, OperatorA, SolveOutcome, SolveStatus, SolverOptions,
};
pub use grid::{AField, ForwardField, GridField, TriangularGrid};
pub use laplace_exponent::{
    growth_classify, Exponent, GrowthKind, GrowthOptions, GrowthVerdict, LaplaceExponent, Scaled, UserExponent,
};
pub use levy_model::{validate_assumptions, LevyMeasureSpec, LevyModel};
pub use levy_path::{a_field, simulate_path, JumpPath, PathSimulator};
pub use martingale_verifier::{
    bond_price, discounted_bond, drift_consistency, martingale_test, MartingaleOptions, MartingaleReport,
};
pub use quadrature::Moment;
