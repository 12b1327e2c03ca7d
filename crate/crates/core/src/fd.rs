//! Finite-difference derivatives and small dense-matrix helpers.
//!
//! Central differences use `h = ε^{1/3} · max(1, |x|)`. The fourth-order
//! variants use `h = ε^{1/5} · max(1, |x|)` and are reserved for places where
//! a finite-differenced quantity is differentiated a second time.

use nalgebra::{allocator::Allocator, DefaultAllocator, Dim, OMatrix};

use crate::{Error, Matrix, Result, Vector};

/// Step for second-order central differences at `x`.
pub fn central_step(x: f64) -> f64 {
    f64::EPSILON.cbrt() * x.abs().max(1.0)
}

/// Step for fourth-order central differences at `x`.
pub fn central4_step(x: f64) -> f64 {
    f64::EPSILON.powf(0.2) * x.abs().max(1.0)
}

/// Derivative of a vector- or matrix-valued function of one real variable.
pub fn derivative<R, C, F>(f: F, x: f64) -> Result<OMatrix<f64, R, C>>
where
    R: Dim,
    C: Dim,
    DefaultAllocator: Allocator<R, C>,
    F: Fn(f64) -> Result<OMatrix<f64, R, C>>,
{
    let h = central_step(x);
    let (lo, hi) = (x - h, x + h);
    Ok((f(hi)? - f(lo)?) / (hi - lo))
}

/// Fourth-order derivative of a vector- or matrix-valued function.
pub fn derivative4<R, C, F>(f: F, x: f64) -> Result<OMatrix<f64, R, C>>
where
    R: Dim,
    C: Dim,
    DefaultAllocator: Allocator<R, C>,
    F: Fn(f64) -> Result<OMatrix<f64, R, C>>,
{
    let h = central4_step(x);
    let f1 = f(x + h)? - f(x - h)?;
    let f2 = f(x + 2.0 * h)? - f(x - 2.0 * h)?;
    Ok((f1 * 8.0 - f2) / (12.0 * h))
}

/// Scalar derivative, second order.
pub fn derivative_scalar<F>(f: F, x: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let h = central_step(x);
    let (lo, hi) = (x - h, x + h);
    Ok((f(hi)? - f(lo)?) / (hi - lo))
}

/// Gradient of a scalar field by central differences.
pub fn gradient<F>(f: F, x: &Vector) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let mut g = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = central_step(x[i]);
        probe[i] = x[i] + h;
        let up = f(&probe)?;
        probe[i] = x[i] - h;
        let down = f(&probe)?;
        probe[i] = x[i];
        g[i] = (up - down) / (2.0 * h);
    }
    Ok(g)
}

/// Gradient of a scalar field by the fourth-order central stencil.
pub fn gradient4<F>(f: F, x: &Vector) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<f64>,
{
    let mut g = Vector::zeros(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let h = central4_step(x[i]);
        let mut at = |offset: f64| -> Result<f64> {
            probe[i] = x[i] + offset;
            let v = f(&probe);
            probe[i] = x[i];
            v
        };
        let f1 = at(h)? - at(-h)?;
        let f2 = at(2.0 * h)? - at(-2.0 * h)?;
        g[i] = (8.0 * f1 - f2) / (12.0 * h);
    }
    Ok(g)
}

/// Jacobian `∂f_i/∂x_j` of a vector field by central differences.
pub fn jacobian<F>(f: F, x: &Vector) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = central_step(x[j]);
        probe[j] = x[j] + h;
        let up = f(&probe)?;
        probe[j] = x[j] - h;
        let down = f(&probe)?;
        probe[j] = x[j];
        columns.push((up - down) / (2.0 * h));
    }
    if columns.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    Ok(Matrix::from_columns(&columns))
}

/// Jacobian by the fourth-order central stencil.
pub fn jacobian4<F>(f: F, x: &Vector) -> Result<Matrix>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let mut probe = x.clone();
    let mut columns = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = central4_step(x[j]);
        let mut at = |offset: f64| -> Result<Vector> {
            probe[j] = x[j] + offset;
            let v = f(&probe);
            probe[j] = x[j];
            v
        };
        let f1 = at(h)? - at(-h)?;
        let f2 = at(2.0 * h)? - at(-2.0 * h)?;
        columns.push((f1 * 8.0 - f2) / (12.0 * h));
    }
    if columns.is_empty() {
        return Ok(Matrix::zeros(0, 0));
    }
    Ok(Matrix::from_columns(&columns))
}

/// Derivative of `f` at `x` in direction `dir`; zero for a zero direction.
pub fn directional<F>(f: F, x: &Vector, dir: &Vector) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let norm = dir.amax();
    if norm == 0.0 {
        let probe = f(x)?;
        return Ok(Vector::zeros(probe.len()));
    }
    let h = central_step(x.amax()) / norm;
    Ok((f(&(x + dir * h))? - f(&(x - dir * h))?) / (2.0 * h))
}

/// [`directional`] with the fourth-order stencil.
pub fn directional4<F>(f: F, x: &Vector, dir: &Vector) -> Result<Vector>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    let norm = dir.amax();
    if norm == 0.0 {
        let probe = f(x)?;
        return Ok(Vector::zeros(probe.len()));
    }
    let h = central4_step(x.amax()) / norm;
    let f1 = f(&(x + dir * h))? - f(&(x - dir * h))?;
    let f2 = f(&(x + dir * (2.0 * h)))? - f(&(x - dir * (2.0 * h)))?;
    Ok((f1 * 8.0 - f2) / (12.0 * h))
}

/// Induced infinity norm (maximum absolute row sum).
pub fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub(crate) fn ensure_finite_vec(v: Vector, what: &'static str) -> Result<Vector> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite_mat(m: Matrix, what: &'static str) -> Result<Matrix> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(m)
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn ensure_finite(x: f64, what: &'static str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Determinant scaled by the largest entry, so thresholds are relative.
pub fn normalized_det(m: &Matrix) -> f64 {
    let scale = m.amax();
    if scale == 0.0 {
        return 0.0;
    }
    (m / scale).determinant()
}

/// Solves `m x = rhs` with LU and partial pivoting.
pub fn solve(m: &Matrix, rhs: &Vector) -> Option<Vector> {
    m.clone().lu().solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &Vector| Ok(x[0] * x[0] + 3.0 * x[0] * x[1]);
        let g = gradient(f, &Vector::from_vec(vec![1.0, 2.0])).unwrap();
        assert!((g[0] - 8.0).abs() < 1e-9);
        assert!((g[1] - 3.0).abs() < 1e-9);
        let g4 = gradient4(f, &Vector::from_vec(vec![1.0, 2.0])).unwrap();
        assert!((g4[0] - 8.0).abs() < 1e-11);
    }

    #[test]
    fn fourth_order_beats_second_on_exp() {
        let f = |t: f64| Ok(Vector::from_element(1, (2.0 * t).exp()));
        let exact = 2.0 * 1.5f64.exp().powi(2);
        let e2 = (derivative(f, 1.5).unwrap()[0] - exact).abs();
        let e4 = (derivative4(f, 1.5).unwrap()[0] - exact).abs();
        assert!(e4 < e2, "{e4} vs {e2}");
        assert!(e4 / exact < 1e-12);
    }

    #[test]
    fn jacobian_of_linear_map_is_the_matrix() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
        let j = jacobian(|x| Ok(&a * x), &Vector::from_vec(vec![0.3, -7.0])).unwrap();
        assert!((j - a).amax() < 1e-10);
    }

    #[test]
    fn inf_norm_is_max_row_sum() {
        let m = Matrix::from_row_slice(2, 2, &[1.0, -2.0, 0.5, 0.5]);
        assert_eq!(inf_norm(&m), 3.0);
    }

    #[test]
    fn zero_direction_gives_zero() {
        let d = directional(|x| Ok(x * 2.0), &Vector::from_vec(vec![1.0]), &Vector::zeros(1)).unwrap();
        assert_eq!(d[0], 0.0);
    }
}
