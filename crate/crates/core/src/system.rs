//! The continuous Birkhoffian problem.
//!
//! Orientation used throughout the crate:
//!
//! ```text
//! K(z, t) ż = ∇B + ∂F/∂t,       D = −(∇B + ∂F/∂t),   so K ż + D = 0.
//! ```

use std::fmt;
use std::sync::Arc;

use crate::fd::{self, ensure_finite, ensure_finite_mat, ensure_finite_vec};
use crate::{Error, Matrix, Result, Vector};

/// `|det K|` at or below this value marks a point as degenerate.
pub const REGULARITY_THRESHOLD: f64 = 1e-10;

pub(crate) type VectorFn = Arc<dyn Fn(&Vector, f64) -> Vector + Send + Sync>;
pub(crate) type ScalarFn = Arc<dyn Fn(&Vector, f64) -> f64 + Send + Sync>;
pub(crate) type MatrixFn = Arc<dyn Fn(&Vector, f64) -> Matrix + Send + Sync>;

/// A phase-space point `z ∈ R^{2n}` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub z: Vector,
    pub t: f64,
}

impl PhasePoint {
    pub fn new(z: Vector, t: f64) -> Self {
        Self { z, t }
    }

    pub fn from_slice(z: &[f64], t: f64) -> Self {
        Self::new(Vector::from_column_slice(z), t)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.z.iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    /// `F` and `B` free of explicit time.
    Autonomous,
    /// `F` free of time, `B` time-dependent.
    SemiAutonomous,
    /// Both `F` and `B` depend on time.
    Nonautonomous,
}

/// Birkhoffian data `(n, F, B, K, D)`.
///
/// `F` and `B` are required. `K` and `D` are optional analytic callables;
/// when absent they are derived from `F` and `B` by finite differences. An
/// analytic `∇B` may also be registered and is preferred over differencing.
#[derive(Clone)]
pub struct BirkhoffSystem {
    n: usize,
    kind: SystemKind,
    f: VectorFn,
    b: ScalarFn,
    k: Option<MatrixFn>,
    d: Option<VectorFn>,
    grad_b: Option<VectorFn>,
}

impl fmt::Debug for BirkhoffSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BirkhoffSystem")
            .field("n", &self.n)
            .field("kind", &self.kind)
            .field("analytic_k", &self.k.is_some())
            .field("analytic_d", &self.d.is_some())
            .field("analytic_grad_b", &self.grad_b.is_some())
            .finish()
    }
}

impl BirkhoffSystem {
    pub fn new<F, B>(n: usize, kind: SystemKind, f: F, b: B) -> Result<Self>
    where
        F: Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
        B: Fn(&Vector, f64) -> f64 + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::Argument("half dimension n must be positive".into()));
        }
        Ok(Self {
            n,
            kind,
            f: Arc::new(f),
            b: Arc::new(b),
            k: None,
            d: None,
            grad_b: None,
        })
    }

    /// Registers an analytic structure matrix.
    pub fn with_k<K>(mut self, k: K) -> Self
    where
        K: Fn(&Vector, f64) -> Matrix + Send + Sync + 'static,
    {
        self.k = Some(Arc::new(k));
        self
    }

    /// Registers an analytic `D = −(∇B + ∂F/∂t)`.
    pub fn with_d<D>(mut self, d: D) -> Self
    where
        D: Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    {
        self.d = Some(Arc::new(d));
        self
    }

    pub fn with_grad_b<G>(mut self, g: G) -> Self
    where
        G: Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    {
        self.grad_b = Some(Arc::new(g));
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Phase dimension `2n`.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn kind(&self) -> SystemKind {
        self.kind
    }

    pub fn has_analytic_k(&self) -> bool {
        self.k.is_some()
    }

    pub fn has_analytic_d(&self) -> bool {
        self.d.is_some()
    }

    pub(crate) fn check_dim(&self, z: &Vector, context: &'static str) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Dimension {
                context,
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    /// Birkhoffian functions `F(z, t)`.
    pub fn f(&self, z: &Vector, t: f64) -> Result<Vector> {
        self.check_dim(z, "F argument")?;
        let v = (self.f)(z, t);
        if v.len() != self.dim() {
            return Err(Error::Dimension {
                context: "F value",
                expected: self.dim(),
                got: v.len(),
            });
        }
        ensure_finite_vec(v, "F")
    }

    /// The Birkhoffian `B(z, t)`.
    pub fn b(&self, z: &Vector, t: f64) -> Result<f64> {
        self.check_dim(z, "B argument")?;
        ensure_finite((self.b)(z, t), "B")
    }

    /// Structure matrix: analytic if registered, otherwise from `F`.
    pub fn k(&self, z: &Vector, t: f64) -> Result<Matrix> {
        match &self.k {
            Some(k) => {
                self.check_dim(z, "K argument")?;
                let m = k(z, t);
                if m.nrows() != self.dim() || m.ncols() != self.dim() {
                    return Err(Error::Dimension {
                        context: "K value",
                        expected: self.dim(),
                        got: m.nrows().max(m.ncols()),
                    });
                }
                ensure_finite_mat(m, "K")
            }
            None => k_from_f(self, &PhasePoint::new(z.clone(), t)),
        }
    }

    /// `∇B`, analytic if registered.
    pub fn grad_b(&self, z: &Vector, t: f64) -> Result<Vector> {
        match &self.grad_b {
            Some(g) => {
                self.check_dim(z, "grad B argument")?;
                ensure_finite_vec(g(z, t), "grad B")
            }
            None => fd::gradient(|x| self.b(x, t), z),
        }
    }

    /// `∂F/∂t` by central differences.
    pub fn f_t(&self, z: &Vector, t: f64) -> Result<Vector> {
        fd::derivative(|s| self.f(z, s), t)
    }

    /// Right-hand side `∇B + ∂F/∂t`.
    pub fn force(&self, z: &Vector, t: f64) -> Result<Vector> {
        match &self.d {
            Some(d) => {
                self.check_dim(z, "D argument")?;
                Ok(-ensure_finite_vec(d(z, t), "D")?)
            }
            None => Ok(self.grad_b(z, t)? + self.f_t(z, t)?),
        }
    }

    /// `D(z, t) = −(∇B + ∂F/∂t)`.
    pub fn d(&self, z: &Vector, t: f64) -> Result<Vector> {
        Ok(-self.force(z, t)?)
    }

    /// The `D` derived from `B` and `F` even when an analytic `D` exists.
    pub fn derived_d(&self, z: &Vector, t: f64) -> Result<Vector> {
        Ok(-(self.grad_b(z, t)? + self.f_t(z, t)?))
    }
}

/// `K_ij = ∂F_j/∂z_i − ∂F_i/∂z_j` by central differences, antisymmetrized.
pub fn k_from_f(sys: &BirkhoffSystem, p: &PhasePoint) -> Result<Matrix> {
    sys.check_dim(&p.z, "k_from_f")?;
    // jac[(j, i)] = ∂F_j/∂z_i
    let jac = fd::jacobian(|z| sys.f(z, p.t), &p.z)?;
    let raw = jac.transpose() - &jac;
    Ok((&raw - raw.transpose()) * 0.5)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Regularity {
    pub det: f64,
    pub regular: bool,
}

/// Determinant of `K` and whether it clears [`REGULARITY_THRESHOLD`].
pub fn regularity(sys: &BirkhoffSystem, p: &PhasePoint) -> Result<Regularity> {
    let det = sys.k(&p.z, p.t)?.determinant();
    Ok(Regularity {
        det,
        regular: det.abs() > REGULARITY_THRESHOLD,
    })
}

/// `ż = K⁻¹(∇B + ∂F/∂t)`.
pub fn vector_field(sys: &BirkhoffSystem, p: &PhasePoint) -> Result<Vector> {
    let k = sys.k(&p.z, p.t)?;
    let det = k.determinant();
    if det.abs() <= REGULARITY_THRESHOLD {
        return Err(Error::Singular { det });
    }
    let rhs = sys.force(&p.z, p.t)?;
    let v = fd::solve(&k, &rhs).ok_or(Error::Singular { det })?;
    ensure_finite_vec(v, "vector field")
}
