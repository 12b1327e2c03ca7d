//! Variational self-adjointness of `K ż + D = 0` and recovery of `(F, B)`.
//!
//! A regular first-order system is of Birkhoffian type exactly when
//!
//! ```text
//! K_ij + K_ji = 0
//! ∂K_ij/∂z_k + ∂K_jk/∂z_i + ∂K_ki/∂z_j = 0
//! ∂K_ij/∂t = ∂D_i/∂z_j − ∂D_j/∂z_i
//! ```
//!
//! On a star-shaped domain the Birkhoffian data are then recovered by ray
//! integrals from the origin:
//!
//! ```text
//! F_i = ∫₀¹ λ z_j K_ji(λz, t) dλ
//! B   = −∫₀¹ z_i (D_i + ∂F_i/∂t)(λz, t) dλ
//! ```
//!
//! For `K` independent of `z` the first reduces to `F = ½ Kᵀ z`. The weight
//! `λ` matters as soon as `K` varies along the ray: without it the curl of `F`
//! is not `K`.
//!
//! The sign on `B` is the one for which `−∇B = D + ∂F/∂t`; every call to
//! [`reconstruct_b`] confirms it with a gradient check at the query point.
//! Star-shapedness of the domain is the caller's responsibility.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::fd::{self, ensure_finite_mat, ensure_finite_vec};
use crate::quadrature;
use crate::system::{MatrixFn, VectorFn};
use crate::{BirkhoffSystem, Error, Matrix, PhasePoint, Result, Vector};

pub const DEFAULT_QUAD_NODES: usize = 32;

/// Relative tolerance of the gradient check inside [`reconstruct_b`].
pub const GRADIENT_CHECK_TOL: f64 = 1e-6;

/// Above this phase dimension the closure condition is checked on a random
/// subset of index triples instead of all of them.
pub const EXHAUSTIVE_CLOSURE_MAX_DIM: usize = 8;
const SAMPLED_TRIPLES: usize = 64;

/// A raw system `K(z, t) ż + D(z, t) = 0`.
#[derive(Clone)]
pub struct RawFirstOrderSystem {
    n: usize,
    k: MatrixFn,
    d: VectorFn,
}

impl std::fmt::Debug for RawFirstOrderSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RawFirstOrderSystem")
            .field("n", &self.n)
            .finish_non_exhaustive()
    }
}

impl RawFirstOrderSystem {
    pub fn new<K, D>(n: usize, k: K, d: D) -> Result<Self>
    where
        K: Fn(&Vector, f64) -> Matrix + Send + Sync + 'static,
        D: Fn(&Vector, f64) -> Vector + Send + Sync + 'static,
    {
        if n == 0 {
            return Err(Error::Argument("half dimension n must be positive".into()));
        }
        Ok(Self {
            n,
            k: Arc::new(k),
            d: Arc::new(d),
        })
    }

    /// The `(K, D)` pair of a Birkhoffian system.
    pub fn from_birkhoff(sys: &BirkhoffSystem) -> Self {
        let (ks, ds) = (sys.clone(), sys.clone());
        Self {
            n: sys.n(),
            k: Arc::new(move |z, t| ks.k(z, t).unwrap_or_else(|_| nan_matrix(z.len()))),
            d: Arc::new(move |z, t| ds.d(z, t).unwrap_or_else(|_| nan_vector(z.len()))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n
    }

    fn check(&self, z: &Vector) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::Dimension {
                context: "raw system argument",
                expected: self.dim(),
                got: z.len(),
            });
        }
        Ok(())
    }

    pub fn k(&self, z: &Vector, t: f64) -> Result<Matrix> {
        self.check(z)?;
        ensure_finite_mat((self.k)(z, t), "K")
    }

    pub fn d(&self, z: &Vector, t: f64) -> Result<Vector> {
        self.check(z)?;
        ensure_finite_vec((self.d)(z, t), "D")
    }
}

fn nan_matrix(dim: usize) -> Matrix {
    Matrix::from_element(dim, dim, f64::NAN)
}

fn nan_vector(dim: usize) -> Vector {
    Vector::from_element(dim, f64::NAN)
}

/// Per-condition violations over a sample set.
#[derive(Debug, Clone)]
pub struct SelfAdjointReport {
    /// max ‖K + Kᵀ‖∞
    pub antisymmetry_violation: f64,
    /// max |∂_k K_ij + ∂_i K_jk + ∂_j K_ki|
    pub closure_violation: f64,
    /// max |∂_t K_ij − (∂_j D_i − ∂_i D_j)|
    pub time_curl_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub samples: Vec<PhasePoint>,
}

impl SelfAdjointReport {
    /// Re-evaluates the verdict at another tolerance.
    pub fn passes_at(&self, tol: f64) -> bool {
        self.antisymmetry_violation <= tol && self.closure_violation <= tol && self.time_curl_violation <= tol
    }
}

/// Evaluates the three self-adjointness conditions at every sample.
pub fn check_self_adjointness(
    raw: &RawFirstOrderSystem,
    samples: &[PhasePoint],
    tol: f64,
) -> Result<SelfAdjointReport> {
    if samples.is_empty() {
        return Err(Error::Argument(
            "self-adjointness check needs at least one sample".into(),
        ));
    }
    if tol.is_nan() || tol < 0.0 {
        return Err(Error::Argument(format!("tolerance must be non-negative, got {tol}")));
    }
    let dim = raw.dim();
    let triples = closure_triples(dim);
    let (mut anti, mut closure, mut curl) = (0.0f64, 0.0f64, 0.0f64);

    for p in samples {
        if !p.is_finite() {
            return Err(Error::NonFinite("sample point"));
        }
        let k = raw.k(&p.z, p.t)?;
        anti = anti.max(fd::inf_norm(&(&k + k.transpose())));

        // dk[m][(i, j)] = ∂K_ij/∂z_m
        let mut dk = Vec::with_capacity(dim);
        let mut probe = p.z.clone();
        for m in 0..dim {
            let h = fd::central_step(p.z[m]);
            probe[m] = p.z[m] + h;
            let up = raw.k(&probe, p.t)?;
            probe[m] = p.z[m] - h;
            let down = raw.k(&probe, p.t)?;
            probe[m] = p.z[m];
            dk.push((up - down) / (2.0 * h));
        }
        for &(i, j, m) in &triples {
            let c = dk[m][(i, j)] + dk[i][(j, m)] + dk[j][(m, i)];
            closure = closure.max(c.abs());
        }

        let k_t = fd::derivative(|s| raw.k(&p.z, s), p.t)?;
        // dd[(i, j)] = ∂D_i/∂z_j
        let dd = fd::jacobian(|z| raw.d(z, p.t), &p.z)?;
        for i in 0..dim {
            for j in 0..dim {
                let c = k_t[(i, j)] - (dd[(i, j)] - dd[(j, i)]);
                curl = curl.max(c.abs());
            }
        }
    }

    Ok(SelfAdjointReport {
        antisymmetry_violation: anti,
        closure_violation: closure,
        time_curl_violation: curl,
        tolerance: tol,
        passed: anti <= tol && closure <= tol && curl <= tol,
        samples: samples.to_vec(),
    })
}

/// Index triples `i < j < k` for the closure condition. The cyclic sum is
/// invariant under permutation of the triple (given antisymmetry) and
/// vanishes when indices repeat, so these cover every case.
fn closure_triples(dim: usize) -> Vec<(usize, usize, usize)> {
    let mut all = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            for k in j + 1..dim {
                all.push((i, j, k));
            }
        }
    }
    if dim <= EXHAUSTIVE_CLOSURE_MAX_DIM {
        return all;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(dim as u64);
    (0..SAMPLED_TRIPLES)
        .map(|_| all[rng.random_range(0..all.len())])
        .collect()
}

/// `F_i = ∫₀¹ λ z_j K_ji(λz, t) dλ` by Gauss–Legendre quadrature.
pub fn reconstruct_f(raw: &RawFirstOrderSystem, p: &PhasePoint, quad_nodes: usize) -> Result<Vector> {
    raw.check(&p.z)?;
    let (nodes, weights) = quadrature::gauss_legendre(quad_nodes)?;
    let mut acc = Vector::zeros(raw.dim());
    for (lambda, w) in nodes.iter().zip(&weights) {
        let k = raw.k(&(&p.z * *lambda), p.t)?;
        acc += k.tr_mul(&p.z) * (*w * *lambda);
    }
    Ok(acc)
}

/// `B` without the gradient check.
pub fn reconstruct_b_unchecked(raw: &RawFirstOrderSystem, p: &PhasePoint, quad_nodes: usize) -> Result<f64> {
    raw.check(&p.z)?;
    let rule = quadrature::gauss_legendre(quad_nodes)?;
    quadrature::integrate(&rule, |lambda| {
        let at = &p.z * lambda;
        let d = raw.d(&at, p.t)?;
        let f_t = fd::derivative4(|s| reconstruct_f(raw, &PhasePoint::new(at.clone(), s), quad_nodes), p.t)?;
        Ok(-p.z.dot(&(d + f_t)))
    })
}

/// `∂F/∂t` of the reconstructed `F`.
pub fn reconstructed_f_t(raw: &RawFirstOrderSystem, p: &PhasePoint, quad_nodes: usize) -> Result<Vector> {
    fd::derivative4(
        |s| reconstruct_f(raw, &PhasePoint::new(p.z.clone(), s), quad_nodes),
        p.t,
    )
}

/// Residual `‖∇B + D + ∂F/∂t‖∞` at `p`, relative to `max(1, ‖D + ∂F/∂t‖∞)`.
pub fn gradient_residual(raw: &RawFirstOrderSystem, p: &PhasePoint, quad_nodes: usize) -> Result<f64> {
    let grad = fd::gradient4(
        |z| reconstruct_b_unchecked(raw, &PhasePoint::new(z.clone(), p.t), quad_nodes),
        &p.z,
    )?;
    let target = raw.d(&p.z, p.t)? + reconstructed_f_t(raw, p, quad_nodes)?;
    Ok((grad + &target).amax() / target.amax().max(1.0))
}

/// `B = −∫₀¹ z·(D + ∂F/∂t)(λz, t) dλ`, confirmed by a gradient check.
pub fn reconstruct_b(raw: &RawFirstOrderSystem, p: &PhasePoint, quad_nodes: usize) -> Result<f64> {
    let b = reconstruct_b_unchecked(raw, p, quad_nodes)?;
    let residual = gradient_residual(raw, p, quad_nodes)?;
    if residual > GRADIENT_CHECK_TOL {
        return Err(Error::Inconsistent { residual });
    }
    Ok(b)
}

/// The bordered matrix `[[0, −Dᵀ], [D, K]]` of size `2n + 1`.
pub fn contact_matrix(raw: &RawFirstOrderSystem, p: &PhasePoint) -> Result<Matrix> {
    let k = raw.k(&p.z, p.t)?;
    let d = raw.d(&p.z, p.t)?;
    let dim = raw.dim();
    let mut m = Matrix::zeros(dim + 1, dim + 1);
    for i in 0..dim {
        m[(0, i + 1)] = -d[i];
        m[(i + 1, 0)] = d[i];
    }
    // Antisymmetric part of K so that the output is exactly antisymmetric.
    for i in 0..dim {
        for j in 0..dim {
            m[(i + 1, j + 1)] = 0.5 * (k[(i, j)] - k[(j, i)]);
        }
    }
    Ok(m)
}

/// Deterministic uniform samples in `[−half_width, half_width]^{2n} × [t_lo, t_hi]`.
pub fn sample_box(n: usize, count: usize, half_width: f64, t_range: (f64, f64), seed: u64) -> Vec<PhasePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let z = Vector::from_fn(2 * n, |_, _| rng.random_range(-half_width..=half_width));
            let t = if t_range.1 > t_range.0 {
                rng.random_range(t_range.0..=t_range.1)
            } else {
                t_range.0
            };
            PhasePoint::new(z, t)
        })
        .collect()
}
