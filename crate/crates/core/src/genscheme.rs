//! Generating-function coefficients and truncated generating gradients.
//!
//! The exact flow corresponds, through α, to a gradient map
//! `ŵ = φ_w(w, t, t₀)` whose time evolution is
//!
//! ```text
//! ∂φ_w/∂t = 𝒜(φ_w, w, φ_ww, t, t₀)
//! 𝒜(ŵ, w, S, t, t₀) = (A_α − S C_α) K⁻¹(∇B + ∂F/∂t)(ẑ, t) + ∂α₁/∂t − S ∂α₂/∂t
//! ```
//!
//! with `(ẑ, z) = α⁻¹(ŵ, w)`. Expanding `φ_w = Σ (t − t₀)^k φ_w^(k)` gives
//!
//! ```text
//! φ_w^(0) = f(w, t₀, t₀)
//! φ_w^(1) = 𝒜(φ_w^(0), w, φ_ww^(0), t₀, t₀)
//! φ_w^(2) = ½ (∂_ŵ𝒜 · φ_w^(1) + ∂_S𝒜 · φ_ww^(1) + ∂_t𝒜)
//! ```
//!
//! and `ψ_w^(m)(w, τ) = Σ_{i ≤ m} τ^i φ_w^(i)(w)` defines an m-th order
//! `K`-symplectic scheme. The recursive path here stops at `m = 2`; a
//! [`CoefficientProvider`] with closed forms can go further.

use std::fmt;
use std::sync::Arc;

use crate::fd;
use crate::system::vector_field;
use crate::transform::{sigma, AlphaTransform};
use crate::{BirkhoffSystem, Error, Matrix, PhasePoint, Result, SystemKind, Vector};

/// Highest order produced by [`RecursiveCoefficients`].
pub const MAX_RECURSIVE_ORDER: usize = 2;

const NEWTON_MAX_ITER: usize = 50;
const IDENTITY_TOL: f64 = 1e-13;

/// Source of coefficient gradients `φ_w^(k)(w, t₀)`.
pub trait CoefficientProvider: Send + Sync {
    /// Highest `k` available.
    fn max_order(&self) -> usize;

    fn coefficient(&self, k: usize, w: &Vector, t0: f64) -> Result<Vector>;

    /// `φ_ww^(k)`; central differences unless overridden.
    fn coefficient_jacobian(&self, k: usize, w: &Vector, t0: f64) -> Result<Matrix> {
        fd::jacobian(|x| self.coefficient(k, x, t0), w)
    }
}

/// `φ_w^(0)(w) = f(w, t₀, t₀)`: solve `α₂(z, z, t₀, t₀) = w`, return `α₁(z, z, t₀, t₀)`.
pub fn identity_generating(alpha: &dyn AlphaTransform, w: &Vector, t0: f64) -> Result<Vector> {
    identity_generating_from(alpha, w, t0, None)
}

/// [`identity_generating`] with an explicit Newton starting point.
pub fn identity_generating_from(
    alpha: &dyn AlphaTransform,
    w: &Vector,
    t0: f64,
    guess: Option<&Vector>,
) -> Result<Vector> {
    Ok(identity_point(alpha, w, t0, guess)?.1)
}

/// The fixed point `z` with `α₂(z, z) = w`, together with `α₁(z, z)`.
fn identity_point(alpha: &dyn AlphaTransform, w: &Vector, t0: f64, guess: Option<&Vector>) -> Result<(Vector, Vector)> {
    let dim = 2 * alpha.n();
    if w.len() != dim {
        return Err(Error::Dimension {
            context: "identity_generating",
            expected: dim,
            got: w.len(),
        });
    }
    let mut z = guess.cloned().unwrap_or_else(|| Vector::zeros(dim));
    let tol = IDENTITY_TOL * w.amax().max(1.0);
    let mut residual = f64::INFINITY;
    for _ in 0..=NEWTON_MAX_ITER {
        let (wh, w_at) = alpha.forward(&z, &z, t0, t0)?;
        let r = w_at - w;
        residual = r.amax();
        if residual <= tol {
            return Ok((z, wh));
        }
        let blocks = alpha.blocks(&z, &z, t0, t0)?;
        let jac = blocks.c + blocks.d;
        let delta = fd::solve(&jac, &r).ok_or(Error::Transversality {
            det: fd::normalized_det(&jac),
        })?;
        z -= delta;
    }
    Err(Error::Convergence {
        context: "identity_generating",
        iterations: NEWTON_MAX_ITER,
        residual,
    })
}

/// `𝒜(ŵ, w, S, t, t₀)`, evaluated through `(ẑ, z) = α⁻¹(ŵ, w, t, t₀)`.
pub fn a_functional(
    sys: &BirkhoffSystem,
    alpha: &dyn AlphaTransform,
    wh: &Vector,
    w: &Vector,
    s: &Matrix,
    t: f64,
    t0: f64,
) -> Result<Vector> {
    let (zh, z) = alpha.inverse(wh, w, t, t0)?;
    let v = vector_field(sys, &PhasePoint::new(zh.clone(), t))?;
    let blocks = alpha.blocks(&zh, &z, t, t0)?;
    let (a1_t, a2_t) = alpha.time_partials(&zh, &z, t, t0)?;
    Ok((blocks.a - s * blocks.c) * v + a1_t - s * a2_t)
}

/// Coefficients computed from the system and α by the recursion.
#[derive(Clone)]
pub struct RecursiveCoefficients {
    sys: BirkhoffSystem,
    alpha: Arc<dyn AlphaTransform>,
    order: usize,
}

impl fmt::Debug for RecursiveCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RecursiveCoefficients")
            .field("sys", &self.sys)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl RecursiveCoefficients {
    pub fn new(sys: BirkhoffSystem, alpha: Arc<dyn AlphaTransform>, order: usize) -> Result<Self> {
        if order > MAX_RECURSIVE_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        if alpha.n() != sys.n() {
            return Err(Error::Dimension {
                context: "alpha vs system",
                expected: sys.n(),
                got: alpha.n(),
            });
        }
        Ok(Self { sys, alpha, order })
    }

    fn a(&self, wh: &Vector, w: &Vector, s: &Matrix, t: f64, t0: f64) -> Result<Vector> {
        a_functional(&self.sys, self.alpha.as_ref(), wh, w, s, t, t0)
    }

    fn second(&self, w: &Vector, t0: f64) -> Result<Vector> {
        let phi0 = self.coefficient(0, w, t0)?;
        let s0 = self.coefficient_jacobian(0, w, t0)?;
        let phi1 = self.coefficient(1, w, t0)?;
        let s1 = self.coefficient_jacobian(1, w, t0)?;

        let along_wh = fd::directional4(|x| self.a(x, w, &s0, t0, t0), &phi0, &phi1)?;

        // 𝒜 is affine in S, so ∂_S𝒜 · S₁ = −S₁ (C_α v + ∂α₂/∂t).
        let alpha = self.alpha.as_ref();
        let (zh, z) = alpha.inverse(&phi0, w, t0, t0)?;
        let v = vector_field(&self.sys, &PhasePoint::new(zh.clone(), t0))?;
        let c = alpha.blocks(&zh, &z, t0, t0)?.c;
        let (_, a2_t) = alpha.time_partials(&zh, &z, t0, t0)?;
        let along_s = -(&s1 * (c * v + a2_t));

        let along_t = fd::derivative4(|t| self.a(&phi0, w, &s0, t, t0), t0)?;
        Ok((along_wh + along_s + along_t) * 0.5)
    }
}

impl CoefficientProvider for RecursiveCoefficients {
    fn max_order(&self) -> usize {
        self.order
    }

    fn coefficient(&self, k: usize, w: &Vector, t0: f64) -> Result<Vector> {
        match k {
            0 => identity_generating(self.alpha.as_ref(), w, t0),
            1 => {
                let phi0 = self.coefficient(0, w, t0)?;
                let s0 = self.coefficient_jacobian(0, w, t0)?;
                self.a(&phi0, w, &s0, t0, t0)
            }
            2 => self.second(w, t0),
            _ => Err(Error::UnsupportedOrder(k)),
        }
    }

    /// `φ_ww^(0) = σ_α(I)` exactly; higher orders by the fourth-order stencil.
    fn coefficient_jacobian(&self, k: usize, w: &Vector, t0: f64) -> Result<Matrix> {
        if k == 0 {
            let (z, _) = identity_point(self.alpha.as_ref(), w, t0, None)?;
            let blocks = self.alpha.blocks(&z, &z, t0, t0)?;
            let identity = Matrix::identity(w.len(), w.len());
            return sigma(&blocks, &identity);
        }
        if k > self.order {
            return Err(Error::UnsupportedOrder(k));
        }
        fd::jacobian4(|x| self.coefficient(k, x, t0), w)
    }
}

/// Coefficients `φ_w^(0..=m)` frozen at a base time `t₀`.
#[derive(Clone)]
pub struct CoefficientSet {
    pub t0: f64,
    order: usize,
    provider: Arc<dyn CoefficientProvider>,
}

impl fmt::Debug for CoefficientSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientSet")
            .field("t0", &self.t0)
            .field("order", &self.order)
            .finish_non_exhaustive()
    }
}

impl CoefficientSet {
    pub fn new(provider: Arc<dyn CoefficientProvider>, t0: f64, order: usize) -> Result<Self> {
        if order == 0 || order > provider.max_order() {
            return Err(Error::UnsupportedOrder(order));
        }
        Ok(Self { t0, order, provider })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn provider(&self) -> &Arc<dyn CoefficientProvider> {
        &self.provider
    }

    /// `φ_w^(k)(w)`.
    pub fn phi_w(&self, k: usize, w: &Vector) -> Result<Vector> {
        if k > self.order {
            return Err(Error::UnsupportedOrder(k));
        }
        self.provider.coefficient(k, w, self.t0)
    }

    /// `φ_ww^(k)(w)`.
    pub fn phi_ww(&self, k: usize, w: &Vector) -> Result<Matrix> {
        if k > self.order {
            return Err(Error::UnsupportedOrder(k));
        }
        self.provider.coefficient_jacobian(k, w, self.t0)
    }
}

/// Recursive coefficients of order `m ∈ {1, 2}` at `t₀`.
pub fn coefficients(sys: &BirkhoffSystem, alpha: Arc<dyn AlphaTransform>, t0: f64, m: usize) -> Result<CoefficientSet> {
    if m == 0 {
        return Err(Error::Argument("scheme order must be at least 1".into()));
    }
    let provider = RecursiveCoefficients::new(sys.clone(), alpha, m)?;
    CoefficientSet::new(Arc::new(provider), t0, m)
}

/// A truncated generating gradient `ψ_w^(m)` together with its α.
///
/// Coefficients depend on the base time, so stepping re-evaluates them at
/// each `t_k` through [`GeneratingScheme::psi_w_at`].
#[derive(Clone)]
pub struct GeneratingScheme {
    alpha: Arc<dyn AlphaTransform>,
    coefficients: CoefficientSet,
}

impl fmt::Debug for GeneratingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GeneratingScheme")
            .field("coefficients", &self.coefficients)
            .finish_non_exhaustive()
    }
}

/// Builds `ψ_w(w, τ) = Σ_{i=0}^{m} τ^i φ_w^(i)(w)`.
pub fn assemble_psi(cs: &CoefficientSet, alpha: Arc<dyn AlphaTransform>) -> GeneratingScheme {
    GeneratingScheme {
        alpha,
        coefficients: cs.clone(),
    }
}

impl GeneratingScheme {
    pub fn order(&self) -> usize {
        self.coefficients.order()
    }

    pub fn alpha(&self) -> &dyn AlphaTransform {
        self.alpha.as_ref()
    }

    pub fn coefficients(&self) -> &CoefficientSet {
        &self.coefficients
    }

    /// `ψ_w(w, τ)` at the coefficient set's base time.
    pub fn psi_w(&self, w: &Vector, tau: f64) -> Result<Vector> {
        self.psi_w_at(w, self.coefficients.t0, tau)
    }

    /// `ψ_w(w, τ)` with coefficients evaluated at base time `t0`.
    pub fn psi_w_at(&self, w: &Vector, t0: f64, tau: f64) -> Result<Vector> {
        let provider = self.coefficients.provider();
        let mut acc = provider.coefficient(0, w, t0)?;
        if tau == 0.0 {
            return Ok(acc);
        }
        let mut power = 1.0;
        for i in 1..=self.order() {
            power *= tau;
            acc += provider.coefficient(i, w, t0)? * power;
        }
        Ok(acc)
    }
}

/// Right-hand side of the Hamilton–Jacobi equation `∂φ/∂t = −B(ẑ(φ_w, w), t)`
/// for autonomous and semi-autonomous systems with a time-free α.
pub fn hj_rhs(sys: &BirkhoffSystem, alpha: &dyn AlphaTransform, w: &Vector, phi_w: &Vector, t: f64) -> Result<f64> {
    if sys.kind() == SystemKind::Nonautonomous {
        return Err(Error::Kind);
    }
    let (zh, _) = alpha.inverse(phi_w, w, t, t)?;
    Ok(-sys.b(&zh, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transform::ScaledCanonicalAlpha;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    fn harmonic() -> BirkhoffSystem {
        BirkhoffSystem::new(
            1,
            SystemKind::Autonomous,
            |z, _| v(&[0.5 * z[1], -0.5 * z[0]]),
            |z, _| 0.5 * z.norm_squared(),
        )
        .unwrap()
        .with_k(|_, _| Matrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]))
    }

    #[test]
    fn order_above_cap_is_rejected() {
        let alpha: Arc<dyn AlphaTransform> = Arc::new(ScaledCanonicalAlpha::exponential(0.0, 1).unwrap());
        assert!(matches!(
            coefficients(&harmonic(), alpha, 0.0, 3),
            Err(Error::UnsupportedOrder(3))
        ));
    }

    #[test]
    fn identity_generating_vanishes_for_unit_scale() {
        let alpha = crate::transform::scaled_canonical_alpha(|_| 1.0, 1).unwrap();
        let phi0 = identity_generating(&alpha, &v(&[0.4, -2.0]), 0.7).unwrap();
        assert!(phi0.amax() <= 1e-12);
    }

    #[test]
    fn hj_rhs_evaluates_minus_b() {
        let sys = harmonic();
        let alpha = ScaledCanonicalAlpha::exponential(0.0, 1).unwrap();
        // ŵ = 0 and w = (1, 0) recover ẑ = (1, 0).
        let r = hj_rhs(&sys, &alpha, &v(&[1.0, 0.0]), &v(&[0.0, 0.0]), 0.0).unwrap();
        assert!((r + 0.5).abs() < 1e-15);
    }

    #[test]
    fn hj_rhs_semi_autonomous() {
        let sys = BirkhoffSystem::new(
            1,
            SystemKind::SemiAutonomous,
            |z, _| v(&[0.5 * z[1], -0.5 * z[0]]),
            |z, t| t * 0.5 * z.norm_squared(),
        )
        .unwrap();
        let alpha = ScaledCanonicalAlpha::exponential(0.0, 1).unwrap();
        // ŵ = 0, w = (1, −1) gives ẑ = (1, 1).
        let r = hj_rhs(&sys, &alpha, &v(&[1.0, -1.0]), &v(&[0.0, 0.0]), 2.0).unwrap();
        assert!((r + 2.0).abs() < 1e-15);
    }

    #[test]
    fn hj_rhs_zero_birkhoffian() {
        let sys = BirkhoffSystem::new(
            1,
            SystemKind::Autonomous,
            |z, _| v(&[0.5 * z[1], -0.5 * z[0]]),
            |_, _| 0.0,
        )
        .unwrap();
        let alpha = ScaledCanonicalAlpha::exponential(0.0, 1).unwrap();
        assert_eq!(
            hj_rhs(&sys, &alpha, &v(&[0.3, 0.1]), &v(&[0.2, 0.0]), 0.0).unwrap(),
            0.0
        );
    }

    #[test]
    fn hj_rhs_rejects_nonautonomous() {
        let sys = BirkhoffSystem::new(
            1,
            SystemKind::Nonautonomous,
            |z, _| v(&[0.5 * z[1], -0.5 * z[0]]),
            |_, _| 0.0,
        )
        .unwrap();
        let alpha = ScaledCanonicalAlpha::exponential(0.0, 1).unwrap();
        assert!(matches!(
            hj_rhs(&sys, &alpha, &v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 0.0),
            Err(Error::Kind)
        ));
    }

    #[test]
    fn psi_at_zero_step_is_phi0() {
        let alpha: Arc<dyn AlphaTransform> = Arc::new(ScaledCanonicalAlpha::exponential(0.0, 1).unwrap());
        let cs = coefficients(&harmonic(), alpha.clone(), 0.0, 2).unwrap();
        let scheme = assemble_psi(&cs, alpha);
        let w = v(&[0.3, -0.8]);
        assert_eq!(scheme.psi_w(&w, 0.0).unwrap(), cs.phi_w(0, &w).unwrap());
    }

    #[test]
    fn time_independent_alpha_with_zero_field_gives_zero_a() {
        let sys = harmonic();
        let alpha = ScaledCanonicalAlpha::exponential(0.0, 1).unwrap();
        // ŵ = w = 0 recovers ẑ = 0, the equilibrium.
        let a = a_functional(
            &sys,
            &alpha,
            &Vector::zeros(2),
            &Vector::zeros(2),
            &Matrix::zeros(2, 2),
            0.3,
            0.0,
        )
        .unwrap();
        assert_eq!(a, Vector::zeros(2));
    }
}
