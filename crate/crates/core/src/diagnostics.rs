//! Symplectic residuals, convergence orders and scheme comparisons.

use std::time::{Duration, Instant};

use crate::fd;
use crate::stepper::{integrate, step_jacobian, OneStepMap, Trajectory};
use crate::{BirkhoffSystem, Error, Matrix, Result, Vector};

/// `‖Mᵀ K(ẑ, t₁) M − K(z, t₀)‖∞`.
pub fn symplectic_residual(sys: &BirkhoffSystem, m: &Matrix, z: &Vector, t0: f64, zh: &Vector, t1: f64) -> Result<f64> {
    let dim = sys.dim();
    if m.nrows() != dim || m.ncols() != dim {
        return Err(Error::Dimension {
            context: "symplectic_residual matrix",
            expected: dim,
            got: if m.nrows() != dim { m.nrows() } else { m.ncols() },
        });
    }
    let k1 = sys.k(zh, t1)?;
    let k0 = sys.k(z, t0)?;
    Ok(fd::inf_norm(&(m.transpose() * k1 * m - k0)))
}

/// Fills `traj.residuals` with the per-step residual of a finite-difference
/// step Jacobian.
pub fn fill_residuals(sys: &BirkhoffSystem, map: &dyn OneStepMap, traj: &mut Trajectory) -> Result<()> {
    let mut residuals = Vec::with_capacity(traj.steps());
    for k in 0..traj.steps() {
        let (t0, t1) = (traj.time(k), traj.time(k + 1));
        let m = step_jacobian(map, &traj.states[k], t0, traj.tau)?;
        residuals.push(symplectic_residual(
            sys,
            &m,
            &traj.states[k],
            t0,
            &traj.states[k + 1],
            t1,
        )?);
    }
    traj.residuals = residuals;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub tau_values: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log error` against `log τ`.
    pub slope: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
    }
    sxy / sxx
}

/// Number of steps `T/τ`, rejecting grids where it is not an integer.
pub fn steps_for(t_final: f64, tau: f64) -> Result<usize> {
    let ratio = t_final / tau;
    let n = ratio.round();
    if tau.is_nan() || tau <= 0.0 || n < 1.0 || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
        return Err(Error::Argument(format!(
            "T/τ must be a positive integer (T = {t_final}, τ = {tau})"
        )));
    }
    Ok(n as usize)
}

/// Global max-norm error at `t0 + t_final` for each step size, and the fitted order.
pub fn convergence_order(
    map: &dyn OneStepMap,
    reference: &dyn Fn(f64) -> Result<Vector>,
    z0: &Vector,
    t0: f64,
    t_final: f64,
    tau_values: &[f64],
) -> Result<ConvergenceReport> {
    if tau_values.len() < 3 {
        return Err(Error::Argument(
            "convergence study needs at least three step sizes".into(),
        ));
    }
    if tau_values.windows(2).any(|w| w[1].is_nan() || w[1] >= w[0]) {
        return Err(Error::Argument("step sizes must be strictly decreasing".into()));
    }
    let target = reference(t0 + t_final)?;
    let mut errors = Vec::with_capacity(tau_values.len());
    for &tau in tau_values {
        let n = steps_for(t_final, tau)?;
        let traj = integrate(map, z0, t0, tau, n)?;
        errors.push((traj.last() - &target).amax());
    }
    if errors.iter().any(|e| e.is_nan() || *e <= 0.0) {
        return Err(Error::Argument(
            "zero or non-finite global error; cannot fit an order".into(),
        ));
    }
    let lx: Vec<f64> = tau_values.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    Ok(ConvergenceReport {
        tau_values: tau_values.to_vec(),
        slope: fit_slope(&lx, &ly),
        errors,
    })
}

#[derive(Debug, Clone)]
pub struct CompareRow {
    pub name: String,
    /// Max-norm error at the final time, when a reference is given.
    pub final_error: Option<f64>,
    pub max_residual: Option<f64>,
    pub runtime: Duration,
    /// Failure message for schemes that did not complete.
    pub failure: Option<String>,
}

/// Runs every scheme on the same grid, one thread per scheme.
pub fn compare(
    sys: &BirkhoffSystem,
    schemes: &[(&str, &dyn OneStepMap)],
    reference: Option<&(dyn Fn(f64) -> Result<Vector> + Sync)>,
    z0: &Vector,
    t0: f64,
    tau: f64,
    n: usize,
) -> Vec<CompareRow> {
    let run = |name: &str, map: &dyn OneStepMap| -> CompareRow {
        let start = Instant::now();
        let outcome = (|| -> Result<(Option<f64>, f64)> {
            let mut traj = integrate(map, z0, t0, tau, n)?;
            fill_residuals(sys, map, &mut traj)?;
            let max_residual = traj.residuals.iter().copied().fold(0.0, f64::max);
            let final_error = match reference {
                Some(r) => Some((traj.last() - r(traj.time(n))?).amax()),
                None => None,
            };
            Ok((final_error, max_residual))
        })();
        let runtime = start.elapsed();
        match outcome {
            Ok((final_error, max_residual)) => CompareRow {
                name: name.to_string(),
                final_error,
                max_residual: Some(max_residual),
                runtime,
                failure: None,
            },
            Err(e) => CompareRow {
                name: name.to_string(),
                final_error: None,
                max_residual: None,
                runtime,
                failure: Some(e.to_string()),
            },
        }
    };
    let run = &run;
    std::thread::scope(|scope| {
        let handles: Vec<_> = schemes
            .iter()
            .map(|(name, map)| scope.spawn(move || run(name, *map)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("scheme thread panicked"))
            .collect()
    })
}

/// Renders comparison rows as CSV with header
/// `scheme,final_error,max_residual,runtime_s,failure`.
pub fn rows_to_csv(rows: &[CompareRow]) -> String {
    let num = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
    let mut out = String::from("scheme,final_error,max_residual,runtime_s,failure\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.6},{}\n",
            r.name,
            num(r.final_error),
            num(r.max_residual),
            r.runtime.as_secs_f64(),
            r.failure.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        ));
    }
    out
}
