//! Damped Newton iteration with a finite-difference Jacobian.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};

#[derive(Debug, Clone)]
pub struct RootOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Maximum number of step halvings per iteration.
    pub max_halvings: usize,
    /// When set, every component is kept at or above this bound and the
    /// starting point must be strictly positive.
    pub lower_bound: Option<f64>,
}

impl Default for RootOptions {
    fn default() -> Self {
        RootOptions { tol: 1e-12, max_iter: 100, max_halvings: 40, lower_bound: None }
    }
}

#[derive(Debug, Clone)]
pub struct Root {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Solves `F(x) = 0` from `x0`.
pub fn find_root<F>(f: F, x0: &[f64], opts: &RootOptions) -> Result<Root>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::Parameter("empty starting point".into()));
    }
    if opts.lower_bound.is_some() && x0.iter().any(|&v| v <= 0.0) {
        return Err(Error::Precondition(format!(
            "starting point {x0:?} has a non-positive component"
        )));
    }
    let project = |x: &mut [f64]| {
        if let Some(lb) = opts.lower_bound {
            for v in x.iter_mut() {
                if *v < lb {
                    *v = lb;
                }
            }
        }
    };
    let mut x = x0.to_vec();
    let mut fx = f(&x)?;
    if fx.len() != n {
        return Err(Error::Parameter("residual dimension differs from unknowns".into()));
    }
    let mut res = norm(&fx);
    for iter in 0..opts.max_iter {
        if res <= opts.tol {
            return Ok(Root { x, residual: res, iterations: iter });
        }
        let jac = jacobian(&f, &x, &fx, opts.lower_bound)?;
        let rhs = DVector::from_iterator(n, fx.iter().map(|v| -v));
        let lu = jac.clone().lu();
        let step = match lu.solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => return Err(Error::Singular(x.clone())),
        };
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            project(&mut trial);
            if let Ok(ft) = f(&trial) {
                let rt = norm(&ft);
                if rt.is_finite() && rt < res {
                    x = trial;
                    fx = ft;
                    res = rt;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(Error::NonConvergence { iterate: x, residual: res, iterations: iter + 1 });
        }
    }
    if res <= opts.tol {
        return Ok(Root { x, residual: res, iterations: opts.max_iter });
    }
    Err(Error::NonConvergence { iterate: x, residual: res, iterations: opts.max_iter })
}

fn jacobian<F>(f: &F, x: &[f64], fx: &[f64], lower: Option<f64>) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut jac = DMatrix::zeros(n, n);
    let base = f64::EPSILON.cbrt();
    for j in 0..n {
        let h = base * x[j].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[j] += h;
        xm[j] -= h;
        let central = lower.is_none_or(|lb| xm[j] >= lb);
        let fp = f(&xp)?;
        if central {
            let fm = f(&xm)?;
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
            }
        } else {
            for i in 0..n {
                jac[(i, j)] = (fp[i] - fx[i]) / h;
            }
        }
    }
    Ok(jac)
}

/// Scalar root on a bracket by safeguarded Newton (secant fallback to bisection).
pub fn bracketed_root<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> Result<f64> {
    let mut flo = f(lo);
    let fhi = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::Precondition(format!("root not bracketed in [{lo}, {hi}]")));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        if (hi - lo).abs() <= tol * (1.0 + x.abs()) {
            return Ok(0.5 * (lo + hi));
        }
        // Secant through the bracket end with the same sign, guarded by bisection.
        let fh = f(hi);
        let sec = hi - fh * (hi - lo) / (fh - flo);
        let mid = 0.5 * (lo + hi);
        x = if sec.is_finite() && sec > lo && sec < hi && (sec - mid).abs() < 0.45 * (hi - lo) {
            sec
        } else {
            mid
        };
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_two() {
        let r = find_root(|x| Ok(vec![x[0] * x[0] - 2.0]), &[1.0], &RootOptions::default()).unwrap();
        assert!((r.x[0] - 2f64.sqrt()).abs() < 1e-12);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn two_dimensional_system() {
        let f = |x: &[f64]| Ok(vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]]);
        let r = find_root(f, &[1.0, 0.5], &RootOptions::default()).unwrap();
        assert!((r.x[0] - 2f64.sqrt()).abs() < 1e-10);
        assert!((r.x[1] - 2f64.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn positivity_precondition() {
        let opts = RootOptions { lower_bound: Some(1e-8), ..Default::default() };
        let err = find_root(|x| Ok(vec![x[0] - 1.0, x[1] - 1.0]), &[0.5, -0.1], &opts).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn singular_jacobian() {
        let err = find_root(|x| Ok(vec![x[0] * 0.0 + 1.0]), &[1.0], &RootOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Singular(_)));
    }

    #[test]
    fn bracketed_scalar() {
        let r = bracketed_root(|x| x.powi(3) - 5.0, 0.0, 3.0, 1e-15).unwrap();
        assert!((r - 5f64.cbrt()).abs() < 1e-13);
    }
}
