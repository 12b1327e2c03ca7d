//! The α coordinate change on `R^{4n}` and the fractional transform σ_α.
//!
//! α maps a pair `(ẑ, z)` (end and start of a step) to `(ŵ, w)`. A valid α
//! satisfies `α_*ᵀ J_{4n} α_* = K̃(ẑ, z, t, t₀)`, which makes it carry graphs
//! of `K`-symplectic maps to graphs of gradient maps. Jacobian blocks are
//! named
//!
//! ```text
//! α_*    = [[A_α, B_α], [C_α, D_α]]     (∂(ŵ, w)/∂(ẑ, z))
//! α_*⁻¹  = [[A^α, B^α], [C^α, D^α]]     (∂(ẑ, z)/∂(ŵ, w))
//! ```

use std::fmt;
use std::sync::Arc;

use crate::fd::{self, ensure_finite_vec};
use crate::{BirkhoffSystem, Error, Matrix, Result, Vector};

/// Threshold on the normalized determinant in transversality tests.
pub const TRANSVERSALITY_THRESHOLD: f64 = 1e-12;

/// The four `2n × 2n` blocks of a `4n × 4n` Jacobian.
#[derive(Debug, Clone, PartialEq)]
pub struct Blocks {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d: Matrix,
}

impl Blocks {
    pub fn identity(dim: usize) -> Self {
        Self {
            a: Matrix::identity(dim, dim),
            b: Matrix::zeros(dim, dim),
            c: Matrix::zeros(dim, dim),
            d: Matrix::identity(dim, dim),
        }
    }

    /// Splits a square matrix of even size into quadrants.
    pub fn from_full(m: &Matrix) -> Self {
        let h = m.nrows() / 2;
        Self {
            a: m.view((0, 0), (h, h)).into_owned(),
            b: m.view((0, h), (h, h)).into_owned(),
            c: m.view((h, 0), (h, h)).into_owned(),
            d: m.view((h, h), (h, h)).into_owned(),
        }
    }

    pub fn to_full(&self) -> Matrix {
        let h = self.a.nrows();
        let mut m = Matrix::zeros(2 * h, 2 * h);
        m.view_mut((0, 0), (h, h)).copy_from(&self.a);
        m.view_mut((0, h), (h, h)).copy_from(&self.b);
        m.view_mut((h, 0), (h, h)).copy_from(&self.c);
        m.view_mut((h, h), (h, h)).copy_from(&self.d);
        m
    }
}

/// A two-parameter coordinate change `(ẑ, z) ↦ (ŵ, w)` on `R^{4n}`.
///
/// Only `forward` and `inverse` are required; Jacobian blocks and time
/// partials default to central differences.
pub trait AlphaTransform: Send + Sync {
    fn n(&self) -> usize;

    /// `(α₁, α₂)(ẑ, z, t, t₀)`.
    fn forward(&self, zh: &Vector, z: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)>;

    /// `(α¹, α²)(ŵ, w, t, t₀)`.
    fn inverse(&self, wh: &Vector, w: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)>;

    /// `(A_α, B_α, C_α, D_α)` at `(ẑ, z, t, t₀)`.
    fn blocks(&self, zh: &Vector, z: &Vector, t: f64, t0: f64) -> Result<Blocks> {
        let x = stack(zh, z);
        let dim = zh.len();
        let jac = fd::jacobian(
            |v| {
                let (a, b) = self.forward(&v.rows(0, dim).into_owned(), &v.rows(dim, dim).into_owned(), t, t0)?;
                Ok(stack(&a, &b))
            },
            &x,
        )?;
        Ok(Blocks::from_full(&jac))
    }

    /// `(A^α, B^α, C^α, D^α)` at `(ŵ, w, t, t₀)`.
    fn inverse_blocks(&self, wh: &Vector, w: &Vector, t: f64, t0: f64) -> Result<Blocks> {
        let x = stack(wh, w);
        let dim = wh.len();
        let jac = fd::jacobian(
            |v| {
                let (a, b) = self.inverse(&v.rows(0, dim).into_owned(), &v.rows(dim, dim).into_owned(), t, t0)?;
                Ok(stack(&a, &b))
            },
            &x,
        )?;
        Ok(Blocks::from_full(&jac))
    }

    /// `(∂α₁/∂t, ∂α₂/∂t)` with `ẑ`, `z` and `t₀` held fixed.
    fn time_partials(&self, zh: &Vector, z: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)> {
        let dim = zh.len();
        let d = fd::derivative(
            |s| {
                let (a, b) = self.forward(zh, z, s, t0)?;
                Ok(stack(&a, &b))
            },
            t,
        )?;
        Ok((d.rows(0, dim).into_owned(), d.rows(dim, dim).into_owned()))
    }
}

pub(crate) fn stack(a: &Vector, b: &Vector) -> Vector {
    let mut v = Vector::zeros(a.len() + b.len());
    v.rows_mut(0, a.len()).copy_from(a);
    v.rows_mut(a.len(), b.len()).copy_from(b);
    v
}

/// Constant structure matrices `J_{2n}`, `J_{4n}`, `J̃_{4n}` and `K̃`.
pub struct StructureMatrices;

impl StructureMatrices {
    /// `[[0, I_n], [−I_n, 0]]`.
    pub fn j2n(n: usize) -> Matrix {
        let mut j = Matrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i, n + i)] = 1.0;
            j[(n + i, i)] = -1.0;
        }
        j
    }

    /// `[[0, I_{2n}], [−I_{2n}, 0]]`.
    pub fn j4n(n: usize) -> Matrix {
        Self::j2n(2 * n)
    }

    /// `diag(J_{2n}, −J_{2n})`.
    pub fn j_tilde_4n(n: usize) -> Matrix {
        let j = Self::j2n(n);
        block_diag(&j, &(-&j))
    }

    /// `diag(K(ẑ, t), −K(z, t₀))`.
    pub fn k_tilde(sys: &BirkhoffSystem, zh: &Vector, z: &Vector, t: f64, t0: f64) -> Result<Matrix> {
        Ok(block_diag(&sys.k(zh, t)?, &(-sys.k(z, t0)?)))
    }
}

fn block_diag(a: &Matrix, b: &Matrix) -> Matrix {
    let (ra, rb) = (a.nrows(), b.nrows());
    let mut m = Matrix::zeros(ra + rb, ra + rb);
    m.view_mut((0, 0), (ra, ra)).copy_from(a);
    m.view_mut((ra, ra), (rb, rb)).copy_from(b);
    m
}

/// `‖α_*ᵀ J_{4n} α_* − K̃(ẑ, z, t, t₀)‖∞`.
pub fn alpha_verify(
    alpha: &dyn AlphaTransform,
    sys: &BirkhoffSystem,
    zh: &Vector,
    z: &Vector,
    t: f64,
    t0: f64,
) -> Result<f64> {
    let jac = alpha.blocks(zh, z, t, t0)?.to_full();
    let lhs = jac.transpose() * StructureMatrices::j4n(alpha.n()) * &jac;
    let k_tilde = StructureMatrices::k_tilde(sys, zh, z, t, t0)?;
    Ok(fd::inf_norm(&(lhs - k_tilde)))
}

/// `N = (A M + B)(C M + D)⁻¹`.
pub fn sigma(blocks: &Blocks, m: &Matrix) -> Result<Matrix> {
    let num = &blocks.a * m + &blocks.b;
    let den = &blocks.c * m + &blocks.d;
    let det = fd::normalized_det(&den);
    if det.abs() <= TRANSVERSALITY_THRESHOLD {
        return Err(Error::Transversality { det });
    }
    let inv = den.try_inverse().ok_or(Error::Transversality { det })?;
    Ok(num * inv)
}

fn nonsingular(m: &Matrix) -> bool {
    fd::normalized_det(m).abs() > TRANSVERSALITY_THRESHOLD
}

/// Truth of the four equivalent transversality conditions
///
/// `|C_α M + D_α| ≠ 0`, `|M C^α − A^α| ≠ 0`, `|C^α N + D^α| ≠ 0`,
/// `|N C_α − A_α| ≠ 0`, with the inverse blocks taken at `α(ẑ, z)`.
pub fn transversality_equivalents(
    alpha: &dyn AlphaTransform,
    m: &Matrix,
    n: &Matrix,
    zh: &Vector,
    z: &Vector,
    t: f64,
    t0: f64,
) -> Result<[bool; 4]> {
    let fwd = alpha.blocks(zh, z, t, t0)?;
    let (wh, w) = alpha.forward(zh, z, t, t0)?;
    let inv = alpha.inverse_blocks(&wh, &w, t, t0)?;
    Ok([
        nonsingular(&(&fwd.c * m + &fwd.d)),
        nonsingular(&(m * &inv.c - &inv.a)),
        nonsingular(&(&inv.c * n + &inv.d)),
        nonsingular(&(n * &fwd.c - &fwd.a)),
    ])
}

type ScaleFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Midpoint-type α for structure matrices `K(z, t) = λ(t)·[[0, −I], [I, 0]]`.
///
/// With `z = (q, p)` split `n + n`:
///
/// ```text
/// ŵ = (λ(t) p̂ − λ(t₀) p,  q̂ − q)
/// w = ((q̂ + q)/2,  −(λ(t) p̂ + λ(t₀) p)/2)
/// ```
#[derive(Clone)]
pub struct ScaledCanonicalAlpha {
    n: usize,
    lambda: ScaleFn,
    dlambda: Option<ScaleFn>,
}

impl fmt::Debug for ScaledCanonicalAlpha {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScaledCanonicalAlpha")
            .field("n", &self.n)
            .field("analytic_derivative", &self.dlambda.is_some())
            .finish()
    }
}

/// Builds [`ScaledCanonicalAlpha`]; `λ'` is taken by central differences.
pub fn scaled_canonical_alpha<L>(lambda: L, n: usize) -> Result<ScaledCanonicalAlpha>
where
    L: Fn(f64) -> f64 + Send + Sync + 'static,
{
    ScaledCanonicalAlpha::new(lambda, None::<fn(f64) -> f64>, n)
}

impl ScaledCanonicalAlpha {
    pub fn new<L, DL>(lambda: L, dlambda: Option<DL>, n: usize) -> Result<Self>
    where
        L: Fn(f64) -> f64 + Send + Sync + 'static,
        DL: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::Argument("half dimension n must be positive".into()));
        }
        let alpha = Self {
            n,
            lambda: Arc::new(lambda),
            dlambda: dlambda.map(|d| Arc::new(d) as ScaleFn),
        };
        alpha.scale(0.0)?;
        Ok(alpha)
    }

    /// λ(t) = e^{νt} with exact derivative.
    pub fn exponential(nu: f64, n: usize) -> Result<Self> {
        Self::new(move |t: f64| (nu * t).exp(), Some(move |t: f64| nu * (nu * t).exp()), n)
    }

    fn scale(&self, t: f64) -> Result<f64> {
        let l = (self.lambda)(t);
        if !l.is_finite() || l <= 0.0 {
            return Err(Error::Argument(format!("scale λ({t}) = {l} must be positive")));
        }
        Ok(l)
    }

    fn scale_rate(&self, t: f64) -> Result<f64> {
        match &self.dlambda {
            Some(d) => fd::ensure_finite(d(t), "λ'"),
            None => fd::derivative_scalar(|s| self.scale(s), t),
        }
    }

    fn check(&self, a: &Vector, b: &Vector) -> Result<()> {
        for v in [a, b] {
            if v.len() != 2 * self.n {
                return Err(Error::Dimension {
                    context: "alpha argument",
                    expected: 2 * self.n,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    fn split(&self, v: &Vector) -> (Vector, Vector) {
        (v.rows(0, self.n).into_owned(), v.rows(self.n, self.n).into_owned())
    }
}

impl AlphaTransform for ScaledCanonicalAlpha {
    fn n(&self) -> usize {
        self.n
    }

    fn forward(&self, zh: &Vector, z: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)> {
        self.check(zh, z)?;
        let (l1, l0) = (self.scale(t)?, self.scale(t0)?);
        let (qh, ph) = self.split(zh);
        let (q, p) = self.split(z);
        let wh = stack(&(&ph * l1 - &p * l0), &(&qh - &q));
        let w = stack(&((&qh + &q) * 0.5), &((&ph * l1 + &p * l0) * -0.5));
        Ok((ensure_finite_vec(wh, "alpha")?, ensure_finite_vec(w, "alpha")?))
    }

    fn inverse(&self, wh: &Vector, w: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)> {
        self.check(wh, w)?;
        let (l1, l0) = (self.scale(t)?, self.scale(t0)?);
        let (rh, ph) = self.split(wh);
        let (r, p) = self.split(w);
        let zh = stack(&(&r + &ph * 0.5), &((&rh * 0.5 - &p) / l1));
        let z = stack(&(&r - &ph * 0.5), &((&rh * -0.5 - &p) / l0));
        Ok((
            ensure_finite_vec(zh, "alpha inverse")?,
            ensure_finite_vec(z, "alpha inverse")?,
        ))
    }

    fn blocks(&self, zh: &Vector, z: &Vector, t: f64, t0: f64) -> Result<Blocks> {
        self.check(zh, z)?;
        let (l1, l0) = (self.scale(t)?, self.scale(t0)?);
        let n = self.n;
        let i = Matrix::identity(n, n);
        let o = Matrix::zeros(n, n);
        Ok(Blocks {
            a: quad(&o, &(&i * l1), &i, &o),
            b: quad(&o, &(&i * -l0), &(-&i), &o),
            c: quad(&(&i * 0.5), &o, &o, &(&i * (-0.5 * l1))),
            d: quad(&(&i * 0.5), &o, &o, &(&i * (-0.5 * l0))),
        })
    }

    fn inverse_blocks(&self, wh: &Vector, w: &Vector, t: f64, t0: f64) -> Result<Blocks> {
        self.check(wh, w)?;
        let (l1, l0) = (self.scale(t)?, self.scale(t0)?);
        let n = self.n;
        let i = Matrix::identity(n, n);
        let o = Matrix::zeros(n, n);
        Ok(Blocks {
            a: quad(&o, &(&i * 0.5), &(&i * (0.5 / l1)), &o),
            b: quad(&i, &o, &o, &(&i * (-1.0 / l1))),
            c: quad(&o, &(&i * -0.5), &(&i * (-0.5 / l0)), &o),
            d: quad(&i, &o, &o, &(&i * (-1.0 / l0))),
        })
    }

    fn time_partials(&self, zh: &Vector, z: &Vector, t: f64, _t0: f64) -> Result<(Vector, Vector)> {
        self.check(zh, z)?;
        let rate = self.scale_rate(t)?;
        let (_, ph) = self.split(zh);
        let zero = Vector::zeros(self.n);
        Ok((stack(&(&ph * rate), &zero), stack(&zero, &(&ph * (-0.5 * rate)))))
    }
}

fn quad(a: &Matrix, b: &Matrix, c: &Matrix, d: &Matrix) -> Matrix {
    Blocks {
        a: a.clone(),
        b: b.clone(),
        c: c.clone(),
        d: d.clone(),
    }
    .to_full()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_column_slice(x)
    }

    #[test]
    fn j2n_squares_to_minus_identity() {
        for n in 1..4 {
            let j = StructureMatrices::j2n(n);
            assert_eq!(&j * &j, -Matrix::identity(2 * n, 2 * n));
        }
    }

    #[test]
    fn j_tilde_layout() {
        let jt = StructureMatrices::j_tilde_4n(1);
        assert_eq!(jt[(0, 1)], 1.0);
        assert_eq!(jt[(2, 3)], -1.0);
        assert_eq!(jt[(0, 2)], 0.0);
    }

    #[test]
    fn sigma_identity_blocks() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let n = sigma(&Blocks::identity(2), &m).unwrap();
        assert!((n - m).amax() < 1e-15);
    }

    #[test]
    fn sigma_forced_singularity() {
        let swap = Blocks {
            a: Matrix::zeros(2, 2),
            b: Matrix::identity(2, 2),
            c: Matrix::identity(2, 2),
            d: Matrix::zeros(2, 2),
        };
        assert!(matches!(
            sigma(&swap, &Matrix::zeros(2, 2)),
            Err(Error::Transversality { .. })
        ));
    }

    #[test]
    fn round_trip_through_forward_and_inverse() {
        let alpha = ScaledCanonicalAlpha::exponential(0.7, 2).unwrap();
        let zh = v(&[0.1, -0.4, 1.3, 0.2]);
        let z = v(&[-0.5, 0.9, 0.0, 2.0]);
        let (wh, w) = alpha.forward(&zh, &z, 0.8, 0.3).unwrap();
        let (zh2, z2) = alpha.inverse(&wh, &w, 0.8, 0.3).unwrap();
        assert!((zh2 - zh).amax() < 1e-14);
        assert!((z2 - z).amax() < 1e-14);
    }

    #[test]
    fn analytic_blocks_match_finite_differences() {
        let alpha = ScaledCanonicalAlpha::exponential(0.5, 1).unwrap();
        let fd_alpha = scaled_canonical_alpha(|t| (0.5 * t).exp(), 1).unwrap();
        struct Generic<'a>(&'a ScaledCanonicalAlpha);
        impl AlphaTransform for Generic<'_> {
            fn n(&self) -> usize {
                self.0.n()
            }
            fn forward(&self, a: &Vector, b: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)> {
                self.0.forward(a, b, t, t0)
            }
            fn inverse(&self, a: &Vector, b: &Vector, t: f64, t0: f64) -> Result<(Vector, Vector)> {
                self.0.inverse(a, b, t, t0)
            }
        }
        let g = Generic(&fd_alpha);
        let (zh, z) = (v(&[0.3, 1.1]), v(&[-0.2, 0.5]));
        let exact = alpha.blocks(&zh, &z, 0.4, 0.1).unwrap().to_full();
        let approx = g.blocks(&zh, &z, 0.4, 0.1).unwrap().to_full();
        assert!((exact - approx).amax() < 1e-6);
        let (wh, w) = alpha.forward(&zh, &z, 0.4, 0.1).unwrap();
        let exact = alpha.inverse_blocks(&wh, &w, 0.4, 0.1).unwrap().to_full();
        let approx = g.inverse_blocks(&wh, &w, 0.4, 0.1).unwrap().to_full();
        assert!((exact - approx).amax() < 1e-6);
        let (a1, a2) = alpha.time_partials(&zh, &z, 0.4, 0.1).unwrap();
        let (b1, b2) = g.time_partials(&zh, &z, 0.4, 0.1).unwrap();
        assert!((a1 - b1).amax() < 1e-8 && (a2 - b2).amax() < 1e-8);
    }

    #[test]
    fn non_positive_scale_rejected() {
        assert!(scaled_canonical_alpha(|_| -1.0, 1).is_err());
        let alpha = scaled_canonical_alpha(|t| 1.0 - t, 1).unwrap();
        assert!(alpha.forward(&v(&[0.0, 0.0]), &v(&[0.0, 0.0]), 2.0, 0.0).is_err());
    }
}
