//! Structure-preserving integration for Birkhoffian systems.
//!
//! A Birkhoffian system is a first-order ODE of the form
//!
//! ```text
//! K(z, t) ż = ∇B(z, t) + ∂F/∂t (z, t),    K_ij = ∂F_j/∂z_i − ∂F_i/∂z_j
//! ```
//!
//! which generalizes Hamilton's equations to time-dependent antisymmetric
//! structure matrices and covers nonconservative dynamics such as damped
//! oscillators. Its phase flow preserves `K` in the sense
//! `Mᵀ K(ẑ, t) M = K(z, t₀)`; this crate builds one-step schemes with the
//! same property by truncating the power series of a generating function.
//!
//! Module map:
//!
//! * [`system`]: the continuous problem, its vector field and regularity.
//! * [`selfadjoint`]: variational self-adjointness checks and recovery of
//!   `F` and `B` from a raw system `K ż + D = 0`.
//! * [`transform`]: the α coordinate change on `R^{4n}`, the fractional
//!   transform σ_α and transversality tests.
//! * [`genscheme`]: generating-function coefficients and the truncated
//!   gradient ψ that defines a scheme.
//! * [`stepper`]: Newton solution of the implicit step and trajectories.
//! * [`oscillator`]: the damped oscillator with closed-form schemes.
//! * [`diagnostics`]: symplectic residuals, convergence orders, comparisons.
//! * [`cli`]: the `birkhoff` command-line front end.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod fd;
pub mod genscheme;
pub mod oscillator;
pub mod quadrature;
pub mod selfadjoint;
pub mod stepper;
pub mod system;
pub mod transform;

pub use nalgebra;

pub use error::{Error, Result};
pub use genscheme::{
    a_functional, assemble_psi, coefficients, hj_rhs, identity_generating, CoefficientProvider, CoefficientSet,
    GeneratingScheme, RecursiveCoefficients,
};
pub use stepper::{integrate, step, step_jacobian, GeneratingStepper, OneStepMap, Trajectory};
pub use system::{k_from_f, regularity, vector_field, BirkhoffSystem, PhasePoint, SystemKind};
pub use transform::{alpha_verify, sigma, AlphaTransform, Blocks, ScaledCanonicalAlpha};

/// Dense column vector used for phase points and generating gradients.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used for structure matrices and Jacobians.
pub type Matrix = nalgebra::DMatrix<f64>;
