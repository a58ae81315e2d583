use crate::error::{Error, Result};
use crate::linalg::{norm_inf, Lu, Matrix};
use crate::scalar::Real;

/// Stopping rule and Jacobian policy of a Newton solve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions<T> {
    /// Absolute tolerance relative to the problem scale.
    pub atol: T,
    /// Tolerance relative to the initial residual.
    pub rtol: T,
    pub max_iter: usize,
    /// Keep factorized Jacobians across iterations and solves while they
    /// still contract; refresh otherwise.
    pub reuse_jacobian: bool,
}

impl<T: Real> Default for NewtonOptions<T> {
    fn default() -> Self {
        Self {
            atol: T::lit(1e-10),
            rtol: T::lit(1e-8),
            max_iter: 25,
            reuse_jacobian: false,
        }
    }
}

/// Convergence history of one solve.
#[derive(Clone, Debug, PartialEq)]
pub struct NewtonReport<T> {
    pub iterations: usize,
    pub jacobian_evals: usize,
    /// `‖R‖_∞` before each update and after the last one.
    pub residuals: Vec<T>,
}

impl<T: Real> NewtonReport<T> {
    pub fn final_residual(&self) -> T {
        *self.residuals.last().expect("at least one residual")
    }
}

/// Cached factorization tagged with the step size it was built for.
#[derive(Clone, Debug, Default)]
pub struct JacobianCache<T> {
    lu: Option<(Lu<T>, T)>,
}

impl<T: Real> JacobianCache<T> {
    pub fn clear(&mut self) {
        self.lu = None;
    }
}

/// The nonlinear system `R(x) = 0` with its Jacobian.
pub trait System<T> {
    fn residual(&mut self, x: &[T]) -> Result<Vec<T>>;
    fn jacobian(&mut self, x: &[T]) -> Result<Matrix<T>>;
}

/// Damped Newton with optional lagged Jacobians. `scale` sets the
/// absolute tolerance `atol · scale`; `tag` identifies the operator for
/// cache validity (the step size).
pub fn solve<T: Real, S: System<T>>(
    sys: &mut S,
    x0: Vec<T>,
    scale: T,
    opts: &NewtonOptions<T>,
    cache: &mut JacobianCache<T>,
    tag: T,
    stage: &'static str,
) -> Result<(Vec<T>, NewtonReport<T>)> {
    let mut x = x0;
    let mut r = sys.residual(&x)?;
    let mut rn = norm_inf(&r);
    let tol = (opts.atol * scale).max(opts.rtol * rn);
    let mut report = NewtonReport {
        iterations: 0,
        jacobian_evals: 0,
        residuals: vec![rn],
    };
    if !opts.reuse_jacobian {
        cache.clear();
    }
    if let Some((_, t)) = &cache.lu {
        if *t != tag {
            cache.clear();
        }
    }
    let mut fresh = false;
    let fail = |it: usize, res: T| Error::NonlinearSolveFailure {
        stage,
        iterations: it,
        residual: res.to_f64_lossy(),
    };
    while !(rn <= tol) {
        if !rn.is_finite() || report.iterations >= opts.max_iter {
            return Err(fail(report.iterations, rn));
        }
        if cache.lu.is_none() || !opts.reuse_jacobian {
            let jac = sys.jacobian(&x)?;
            report.jacobian_evals += 1;
            cache.lu = Some((Lu::factor(&jac)?, tag));
            fresh = true;
        }
        let dx = cache.lu.as_ref().expect("factorized").0.solve(&r);
        let mut step = T::one();
        let mut accepted = None;
        for _ in 0..8 {
            let trial: Vec<T> = x.iter().zip(&dx).map(|(&a, &d)| a - step * d).collect();
            let rt = sys.residual(&trial)?;
            let rtn = norm_inf(&rt);
            if rtn.is_finite() && (rtn < rn || rtn <= tol) {
                accepted = Some((trial, rt, rtn));
                break;
            }
            if !fresh {
                break;
            }
            step = step * T::half();
        }
        report.iterations += 1;
        match accepted {
            Some((xt, rt, rtn)) => {
                let slow = rtn > rn * T::lit(0.25);
                x = xt;
                r = rt;
                rn = rtn;
                report.residuals.push(rn);
                if slow && !fresh {
                    cache.clear();
                }
                fresh = false;
            }
            None if !fresh => {
                cache.clear();
            }
            None => return Err(fail(report.iterations, rn)),
        }
        if norm_inf(&dx) * step <= T::epsilon() * T::lit(16.0) * (T::one() + norm_inf(&x))
            && rn <= tol * T::lit(1e3)
        {
            break;
        }
    }
    Ok((x, report))
}
