//! One-step maps and trajectories.
//!
//! A [`GeneratingScheme`] defines the step `z ↦ ẑ` implicitly through
//!
//! ```text
//! α₁(ẑ, z, t_k + τ, t_k) = ψ_w(α₂(ẑ, z, t_k + τ, t_k), τ)
//! ```
//!
//! which [`step`] solves by Newton's method from an explicit Euler predictor.

use std::fmt;

use thiserror::Error as ThisError;

use crate::genscheme::GeneratingScheme;
use crate::system::vector_field;
use crate::{fd, BirkhoffSystem, Error, Matrix, PhasePoint, Result, Vector};

pub const STEP_TOL: f64 = 1e-12;
pub const STEP_MAX_ITER: usize = 50;

/// Anything that advances a state by one step of size `τ` from time `t`.
pub trait OneStepMap: Send + Sync {
    fn dim(&self) -> usize;
    fn step(&self, z: &Vector, t: f64, tau: f64) -> Result<Vector>;
}

/// Solves the implicit relation of `scheme` for one step.
pub fn step(sys: &BirkhoffSystem, scheme: &GeneratingScheme, z: &Vector, t_k: f64, tau: f64) -> Result<Vector> {
    sys.check_dim(z, "step")?;
    if !tau.is_finite() || tau < 0.0 {
        return Err(Error::Argument(format!(
            "step size must be finite and non-negative, got {tau}"
        )));
    }
    let alpha = scheme.alpha();
    let t_next = t_k + tau;
    let residual = |zh: &Vector| -> Result<Vector> {
        let (wh, w) = alpha.forward(zh, z, t_next, t_k)?;
        Ok(wh - scheme.psi_w_at(&w, t_k, tau)?)
    };

    let mut zh = z + vector_field(sys, &PhasePoint::new(z.clone(), t_k))? * tau;
    let tol = STEP_TOL * z.amax().max(1.0);
    let mut norm = f64::INFINITY;
    for _ in 0..STEP_MAX_ITER {
        let r = residual(&zh)?;
        norm = r.amax();
        if norm <= tol {
            return Ok(zh);
        }
        let jac = fd::jacobian(residual, &zh)?;
        match fd::solve(&jac, &r) {
            Some(delta) => zh -= delta,
            None => {
                return Err(Error::StepFailure {
                    last_iterate: zh,
                    residual: norm,
                    iterations: STEP_MAX_ITER,
                })
            }
        }
    }
    let r = residual(&zh)?;
    if r.amax() <= tol {
        return Ok(zh);
    }
    norm = norm.min(r.amax());
    Err(Error::StepFailure {
        last_iterate: zh,
        residual: norm,
        iterations: STEP_MAX_ITER,
    })
}

/// A Birkhoffian system paired with a generating scheme.
#[derive(Debug, Clone)]
pub struct GeneratingStepper {
    pub sys: BirkhoffSystem,
    pub scheme: GeneratingScheme,
}

impl GeneratingStepper {
    pub fn new(sys: BirkhoffSystem, scheme: GeneratingScheme) -> Self {
        Self { sys, scheme }
    }
}

impl OneStepMap for GeneratingStepper {
    fn dim(&self) -> usize {
        self.sys.dim()
    }

    fn step(&self, z: &Vector, t: f64, tau: f64) -> Result<Vector> {
        step(&self.sys, &self.scheme, z, t, tau)
    }
}

/// A linear one-step map `z ↦ A(τ) z`.
pub struct LinearStepMap<F> {
    dim: usize,
    transition: F,
}

impl<F> LinearStepMap<F>
where
    F: Fn(f64) -> Matrix + Send + Sync,
{
    pub fn new(dim: usize, transition: F) -> Self {
        Self { dim, transition }
    }
}

impl<F> fmt::Debug for LinearStepMap<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LinearStepMap").field("dim", &self.dim).finish()
    }
}

impl<F> OneStepMap for LinearStepMap<F>
where
    F: Fn(f64) -> Matrix + Send + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn step(&self, z: &Vector, _t: f64, tau: f64) -> Result<Vector> {
        if z.len() != self.dim {
            return Err(Error::Dimension {
                context: "linear step",
                expected: self.dim,
                got: z.len(),
            });
        }
        Ok((self.transition)(tau) * z)
    }
}

/// States on the uniform grid `t_k = t₀ + kτ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub t0: f64,
    pub tau: f64,
    /// `z⁰ … z^N`.
    pub states: Vec<Vector>,
    /// Per-step symplectic residuals; empty until filled by diagnostics.
    pub residuals: Vec<f64>,
}

impl Trajectory {
    pub fn new(t0: f64, tau: f64, z0: Vector) -> Self {
        Self {
            t0,
            tau,
            states: vec![z0],
            residuals: Vec::new(),
        }
    }

    /// Number of completed steps.
    pub fn steps(&self) -> usize {
        self.states.len() - 1
    }

    pub fn time(&self, k: usize) -> f64 {
        (k as f64).mul_add(self.tau, self.t0)
    }

    pub fn last(&self) -> &Vector {
        self.states.last().expect("trajectory holds the initial state")
    }
}

/// A failed integration, carrying everything computed before the failure.
#[derive(Debug, ThisError)]
#[error("integration aborted at step {step}: {source}")]
pub struct IntegrationError {
    pub partial: Trajectory,
    pub step: usize,
    #[source]
    pub source: Error,
}

impl From<IntegrationError> for Error {
    fn from(e: IntegrationError) -> Self {
        Error::AtStep {
            index: e.step,
            source: Box::new(e.source),
        }
    }
}

/// Applies `map` `n` times from `z0` at `t0`.
pub fn integrate(
    map: &dyn OneStepMap,
    z0: &Vector,
    t0: f64,
    tau: f64,
    n: usize,
) -> std::result::Result<Trajectory, IntegrationError> {
    let mut traj = Trajectory::new(t0, tau, z0.clone());
    let fail = |traj: Trajectory, step: usize, source: Error| IntegrationError {
        partial: traj,
        step,
        source,
    };
    if n == 0 {
        return Err(fail(
            traj,
            0,
            Error::Argument("number of steps must be at least 1".into()),
        ));
    }
    if !tau.is_finite() || tau <= 0.0 {
        return Err(fail(
            traj,
            0,
            Error::Argument(format!("step size must be positive, got {tau}")),
        ));
    }
    if z0.len() != map.dim() {
        let source = Error::Dimension {
            context: "initial state",
            expected: map.dim(),
            got: z0.len(),
        };
        return Err(fail(traj, 0, source));
    }
    for k in 0..n {
        let t_k = traj.time(k);
        match map.step(traj.last(), t_k, tau) {
            Ok(next) => traj.states.push(next),
            Err(e) => return Err(fail(traj, k, e)),
        }
    }
    Ok(traj)
}

/// `∂ẑ/∂z` of one step by the fourth-order central stencil, re-solving at each
/// stencil point.
pub fn step_jacobian(map: &dyn OneStepMap, z: &Vector, t_k: f64, tau: f64) -> Result<Matrix> {
    fd::jacobian4(|x| map.step(x, t_k, tau), z)
}
