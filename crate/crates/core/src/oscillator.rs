//! The linear damped oscillator `r̈ + ν ṙ + r = 0`.
//!
//! With `p = ṙ` it has the Birkhoffian representation
//!
//! ```text
//! K = [[0, −e^{νt}], [e^{νt}, 0]]
//! F = (½ e^{νt} p, −½ e^{νt} r)
//! B = ½ e^{νt} (r² + ν r p + p²)
//! ```
//!
//! The cross term `ν r p` is what makes `K ż = ∇B + ∂F/∂t` reproduce the
//! oscillator for every ν; the form `r² + r p + p²` is its `ν = 1` case.
//!
//! The second-order matrix uses `8b` in its lower-left entry. With `8a` in
//! both off-diagonal slots the transition fails `Aᵀ K(t+τ) A = K(t)` for
//! `ν ≠ 0`; with the `8a / 8b` split it holds exactly because
//! `(16 − ab)² + 64ab = (16 + ab)²`.

use std::sync::Arc;

use crate::genscheme::CoefficientProvider;
use crate::selfadjoint::RawFirstOrderSystem;
use crate::stepper::LinearStepMap;
use crate::transform::{AlphaTransform, ScaledCanonicalAlpha};
use crate::{BirkhoffSystem, Error, Matrix, Result, SystemKind, Vector};

/// Damping coefficient of `r̈ + ν ṙ + r = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DampedOscillator {
    pub nu: f64,
}

impl DampedOscillator {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(Error::Argument(format!(
                "damping must be finite and non-negative, got {nu}"
            )));
        }
        Ok(Self { nu })
    }

    pub fn system(&self) -> BirkhoffSystem {
        let nu = self.nu;
        let kind = if nu == 0.0 {
            SystemKind::Autonomous
        } else {
            SystemKind::Nonautonomous
        };
        BirkhoffSystem::new(
            1,
            kind,
            move |z, t| {
                let e = (nu * t).exp();
                Vector::from_vec(vec![0.5 * e * z[1], -0.5 * e * z[0]])
            },
            move |z, t| 0.5 * (nu * t).exp() * (z[0] * z[0] + nu * z[0] * z[1] + z[1] * z[1]),
        )
        .expect("n = 1 is valid")
        .with_k(move |_, t| structure_matrix(nu, t))
        .with_d(move |z, t| raw_d(nu, 0.0, z, t))
        .with_grad_b(move |z, t| {
            let e = (nu * t).exp();
            Vector::from_vec(vec![e * (z[0] + 0.5 * nu * z[1]), e * (z[1] + 0.5 * nu * z[0])])
        })
    }

    /// `K ż + D = 0` with `D₂` shifted by `perturb · r`; `perturb = 0`
    /// is the self-adjoint oscillator.
    pub fn raw(&self, perturb: f64) -> RawFirstOrderSystem {
        let nu = self.nu;
        RawFirstOrderSystem::new(
            1,
            move |_, t| structure_matrix(nu, t),
            move |z, t| raw_d(nu, perturb, z, t),
        )
        .expect("n = 1 is valid")
    }

    /// The transformation `R̂ = e^{νt} p̂ − e^{νt₀} p`, `P̂ = r̂ − r`,
    /// `R = (r̂ + r)/2`, `P = −(e^{νt} p̂ + e^{νt₀} p)/2`.
    pub fn alpha(&self) -> ScaledCanonicalAlpha {
        ScaledCanonicalAlpha::exponential(self.nu, 1).expect("n = 1 is valid")
    }

    pub fn alpha_arc(&self) -> Arc<dyn AlphaTransform> {
        Arc::new(self.alpha())
    }
}

fn structure_matrix(nu: f64, t: f64) -> Matrix {
    let e = (nu * t).exp();
    Matrix::from_row_slice(2, 2, &[0.0, -e, e, 0.0])
}

fn raw_d(nu: f64, perturb: f64, z: &Vector, t: f64) -> Vector {
    let e = (nu * t).exp();
    Vector::from_vec(vec![-e * (nu * z[1] + z[0]), -e * z[1] + perturb * z[0]])
}

/// The oscillator's Birkhoffian system.
pub fn oscillator_system(nu: f64) -> Result<BirkhoffSystem> {
    Ok(DampedOscillator::new(nu)?.system())
}

/// First-order transition matrix from `ψ = τ φ^(1)`.
pub fn scheme_first_order(nu: f64, tau: f64) -> Matrix {
    let den = 4.0 + tau * tau;
    let e = (-nu * tau).exp();
    let diag = (4.0 - tau * tau) / den;
    let off = 4.0 * tau / den;
    Matrix::from_row_slice(2, 2, &[diag, off, -off * e, diag * e])
}

/// Second-order transition matrix from `ψ = τ φ^(1) + τ² φ^(2)`, with
/// `a = 2τ − ντ²`, `b = 2τ + ντ²`.
pub fn scheme_second_order(nu: f64, tau: f64) -> Matrix {
    let a = 2.0 * tau - nu * tau * tau;
    let b = 2.0 * tau + nu * tau * tau;
    let den = 16.0 + a * b;
    let e = (-nu * tau).exp();
    let diag = (16.0 - a * b) / den;
    Matrix::from_row_slice(2, 2, &[diag, 8.0 * a / den, -8.0 * b * e / den, diag * e])
}

/// Implicit midpoint (Euler centre) rule applied directly to `ṙ = p`,
/// `ṗ = −νp − r`. Not `K`-symplectic for `ν > 0`.
pub fn euler_center(nu: f64, tau: f64) -> Matrix {
    let den = tau * tau + 2.0 * nu * tau + 4.0;
    Matrix::from_row_slice(
        2,
        2,
        &[
            (-tau * tau + 2.0 * nu * tau + 4.0) / den,
            4.0 * tau / den,
            -4.0 * tau / den,
            (-tau * tau - 2.0 * nu * tau + 4.0) / den,
        ],
    )
}

/// Closed-form step maps, usable wherever a [`crate::OneStepMap`] is expected.
pub fn closed_first_map(nu: f64) -> LinearStepMap<impl Fn(f64) -> Matrix + Send + Sync> {
    LinearStepMap::new(2, move |tau| scheme_first_order(nu, tau))
}

pub fn closed_second_map(nu: f64) -> LinearStepMap<impl Fn(f64) -> Matrix + Send + Sync> {
    LinearStepMap::new(2, move |tau| scheme_second_order(nu, tau))
}

pub fn euler_center_map(nu: f64) -> LinearStepMap<impl Fn(f64) -> Matrix + Send + Sync> {
    LinearStepMap::new(2, move |tau| euler_center(nu, tau))
}

/// Exact `(r(t), p(t))` from `(r₀, p₀)` at time 0, underdamped branch.
pub fn exact_solution(nu: f64, r0: f64, p0: f64, t: f64) -> Result<(f64, f64)> {
    if !(0.0..2.0).contains(&nu) {
        return Err(Error::UnsupportedBranch(nu));
    }
    let omega = (1.0 - nu * nu / 4.0).sqrt();
    let c = (p0 + 0.5 * nu * r0) / omega;
    let decay = (-0.5 * nu * t).exp();
    let (s, co) = (omega * t).sin_cos();
    let r = decay * (r0 * co + c * s);
    let p = -0.5 * nu * r + decay * omega * (c * co - r0 * s);
    Ok((r, p))
}

/// Closed-form coefficients `φ_w^(k)` for the oscillator under [`DampedOscillator::alpha`],
/// available up to `k = 4`. With `w = (R, P)` and `e = e^{νt₀}`:
///
/// ```text
/// φ^(0) = 0
/// φ^(1) = (−e R, −P/e)
/// φ^(2) = (−(ν/2) e R, (ν/2) P/e)
/// φ^(3) = (−(ν²/6 + 1/12) e R + (ν/6) P, (ν/6) R − (2ν² + 1)/12 · P/e)
/// φ^(4) = (−ν(ν² + 1)/24 · e R, ν(ν² + 1)/24 · P/e)
/// ```
#[derive(Debug, Clone, Copy)]
pub struct OscillatorCoefficients {
    pub nu: f64,
}

impl OscillatorCoefficients {
    pub const MAX_ORDER: usize = 4;

    fn matrix(&self, k: usize, t0: f64) -> Result<Matrix> {
        let nu = self.nu;
        let e = (nu * t0).exp();
        let m = match k {
            0 => [0.0, 0.0, 0.0, 0.0],
            1 => [-e, 0.0, 0.0, -1.0 / e],
            2 => [-0.5 * nu * e, 0.0, 0.0, 0.5 * nu / e],
            3 => [
                -(nu * nu / 6.0 + 1.0 / 12.0) * e,
                nu / 6.0,
                nu / 6.0,
                -(2.0 * nu * nu + 1.0) / 12.0 / e,
            ],
            4 => {
                let c = nu * (nu * nu + 1.0) / 24.0;
                [-c * e, 0.0, 0.0, c / e]
            }
            _ => return Err(Error::UnsupportedOrder(k)),
        };
        Ok(Matrix::from_row_slice(2, 2, &m))
    }
}

impl CoefficientProvider for OscillatorCoefficients {
    fn max_order(&self) -> usize {
        Self::MAX_ORDER
    }

    fn coefficient(&self, k: usize, w: &Vector, t0: f64) -> Result<Vector> {
        if w.len() != 2 {
            return Err(Error::Dimension {
                context: "oscillator coefficient",
                expected: 2,
                got: w.len(),
            });
        }
        Ok(self.matrix(k, t0)? * w)
    }

    fn coefficient_jacobian(&self, k: usize, _w: &Vector, t0: f64) -> Result<Matrix> {
        self.matrix(k, t0)
    }
}

/// `n` oscillators `q̈ + ν q̇ + W q = 0` coupled through a symmetric
/// stiffness `W`, in the same Birkhoffian form with `K = e^{νt} [[0, −I], [I, 0]]`
/// and `B = ½ e^{νt} (qᵀWq + ν qᵀp + pᵀp)`.
pub fn coupled_oscillators(nu: f64, stiffness: Matrix) -> Result<BirkhoffSystem> {
    DampedOscillator::new(nu)?;
    let n = stiffness.nrows();
    if n == 0 || stiffness.ncols() != n {
        return Err(Error::Argument("stiffness must be a non-empty square matrix".into()));
    }
    if (&stiffness - stiffness.transpose()).amax() > 0.0 {
        return Err(Error::Argument("stiffness must be symmetric".into()));
    }
    let w_b = stiffness.clone();
    let w_d = stiffness;
    let split = move |z: &Vector| (z.rows(0, n).into_owned(), z.rows(n, n).into_owned());
    let kind = if nu == 0.0 {
        SystemKind::Autonomous
    } else {
        SystemKind::Nonautonomous
    };
    Ok(BirkhoffSystem::new(
        n,
        kind,
        move |z, t| {
            let (q, p) = split(z);
            crate::transform::stack(&(p * 0.5), &(q * -0.5)) * (nu * t).exp()
        },
        move |z, t| {
            let (q, p) = split(z);
            0.5 * (nu * t).exp() * (q.dot(&(&w_b * &q)) + nu * q.dot(&p) + p.dot(&p))
        },
    )?
    .with_k(move |_, t| {
        let e = (nu * t).exp();
        let mut k = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            k[(i, n + i)] = -e;
            k[(n + i, i)] = e;
        }
        k
    })
    .with_d(move |z, t| {
        let (q, p) = split(z);
        let top = &w_d * &q + &p * nu;
        crate::transform::stack(&top, &p) * -(nu * t).exp()
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn negative_damping_rejected() {
        assert!(oscillator_system(-0.1).is_err());
        assert!(DampedOscillator::new(f64::NAN).is_err());
    }

    #[test]
    fn overdamped_exact_solution_unsupported() {
        assert!(matches!(
            exact_solution(2.0, 1.0, 0.0, 1.0),
            Err(Error::UnsupportedBranch(_))
        ));
    }

    #[test]
    fn coefficient_matrices_are_symmetric() {
        let c = OscillatorCoefficients { nu: 0.7 };
        for k in 0..=4 {
            let m = c.matrix(k, 0.9).unwrap();
            assert_eq!(m[(0, 1)], m[(1, 0)]);
        }
        assert!(c.matrix(5, 0.0).is_err());
    }

    #[test]
    fn coupled_rejects_asymmetric_stiffness() {
        let w = Matrix::from_row_slice(2, 2, &[2.0, -1.0, 0.0, 2.0]);
        assert!(coupled_oscillators(0.1, w).is_err());
    }
}
