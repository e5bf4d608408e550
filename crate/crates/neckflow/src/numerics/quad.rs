//! Globally adaptive Gauss-Kronrod quadrature on finite and infinite intervals.

use super::gauss::gk15;
use crate::error::{Error, Result};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

/// Bisection budget used by [`integrate_line`].
pub const MAX_SUBDIVISIONS: usize = 2000;

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .partial_cmp(&other.error)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.a.partial_cmp(&self.a).unwrap_or(Ordering::Equal))
    }
}

/// Integrates `f` over `(lo, hi)`; either limit may be infinite.
///
/// Infinite limits go through `y = tan(u)`, so `f` only needs to decay fast
/// enough that `f(tan u) sec^2 u` stays bounded.
pub fn integrate_line<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<Quadrature> {
    if !(tol > 0.0) {
        return Err(Error::Parameter(format!("tolerance must be positive, got {tol}")));
    }
    if lo.is_nan() || hi.is_nan() {
        return Err(Error::Parameter("NaN integration limit".into()));
    }
    if lo == hi {
        return Ok(Quadrature { value: 0.0, error: 0.0, evaluations: 0 });
    }
    if lo > hi {
        let q = integrate_line(f, hi, lo, tol)?;
        return Ok(Quadrature { value: -q.value, ..q });
    }
    if lo.is_finite() && hi.is_finite() {
        return adaptive(&f, lo, hi, tol);
    }
    let ua = if lo.is_finite() { lo.atan() } else { -FRAC_PI_2 };
    let ub = if hi.is_finite() { hi.atan() } else { FRAC_PI_2 };
    let g = |u: f64| {
        let c = u.cos();
        f(u.tan()) / (c * c)
    };
    adaptive(&g, ua, ub, tol)
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> Result<Quadrature> {
    let mut evals = 0usize;
    let mut wrapped = |x: f64| {
        evals += 1;
        f(x)
    };
    let (v, e) = gk15(&mut wrapped, a, b);
    let mut heap = BinaryHeap::new();
    heap.push(Panel { a, b, value: v, error: e });
    let mut total = v;
    let mut err = e;
    let mut splits = 0usize;
    loop {
        let floor = 50.0 * f64::EPSILON * total.abs();
        if err <= tol.max(floor) {
            break;
        }
        if splits >= MAX_SUBDIVISIONS {
            return Err(Error::Divergence { value: total, error: err });
        }
        let worst = heap.pop().expect("heap never empties");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            return Err(Error::Divergence { value: total, error: err });
        }
        let (v1, e1) = gk15(&mut wrapped, worst.a, mid);
        let (v2, e2) = gk15(&mut wrapped, mid, worst.b);
        total += v1 + v2 - worst.value;
        err += e1 + e2 - worst.error;
        heap.push(Panel { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, error: e2 });
        splits += 1;
        if splits.is_multiple_of(64) {
            // Refresh the running sums to keep cancellation drift out of the test.
            total = heap.iter().map(|p| p.value).sum();
            err = heap.iter().map(|p| p.error).sum();
        }
    }
    if !total.is_finite() {
        return Err(Error::Divergence { value: total, error: err });
    }
    Ok(Quadrature { value: total, error: err, evaluations: evals })
}

/// Composite fixed-order Gauss-Legendre integration, used as an independent check.
pub fn composite_gauss<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, panels: usize, order: usize) -> f64 {
    let gl = super::gauss::GaussLegendre::new(order);
    let (ua, ub, subst) = match (lo.is_finite(), hi.is_finite()) {
        (true, true) => (lo, hi, false),
        _ => (
            if lo.is_finite() { lo.atan() } else { -FRAC_PI_2 },
            if hi.is_finite() { hi.atan() } else { FRAC_PI_2 },
            true,
        ),
    };
    let h = (ub - ua) / panels as f64;
    let mut s = 0.0;
    for k in 0..panels {
        let a = ua + k as f64 * h;
        s += gl.integrate(a, a + h, |u| {
            if subst {
                let c = u.cos();
                f(u.tan()) / (c * c)
            } else {
                f(u)
            }
        });
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn gaussian_over_the_line() {
        let q = integrate_line(|y| (-y * y).exp(), f64::NEG_INFINITY, f64::INFINITY, 1e-10).unwrap();
        assert!((q.value - PI.sqrt()).abs() < 1e-10, "{}", q.value);
    }

    #[test]
    fn constant_on_unit_interval() {
        let q = integrate_line(|_| 1.0, 0.0, 1.0, 1e-12).unwrap();
        assert!((q.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn half_lines_and_reversed_limits() {
        let q = integrate_line(|y| 1.0 / (1.0 + y * y), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((q.value - PI / 2.0).abs() < 1e-12);
        let r = integrate_line(|y| 1.0 / (1.0 + y * y), f64::INFINITY, 0.0, 1e-12).unwrap();
        assert!((r.value + PI / 2.0).abs() < 1e-12);
        let s = integrate_line(|y| y.exp(), f64::NEG_INFINITY, 0.0, 1e-12).unwrap();
        assert!((s.value - 1.0).abs() < 1e-11);
    }

    #[test]
    fn divergent_integrand_reports_partial_value() {
        let err = integrate_line(|y: f64| 1.0 / y.abs().sqrt().max(1e-300) / y.abs().sqrt().max(1e-300), -1.0, 1.0, 1e-12)
            .unwrap_err();
        assert!(matches!(err, Error::Divergence { .. }));
    }

    #[test]
    fn nonpositive_tolerance_rejected() {
        assert!(integrate_line(|y| y, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn composite_rule_agrees() {
        let f = |y: f64| 1.0 / (1.0 + y.powi(4));
        let a = integrate_line(f, f64::NEG_INFINITY, f64::INFINITY, 1e-13).unwrap().value;
        let b = composite_gauss(f, f64::NEG_INFINITY, f64::INFINITY, 64, 20);
        assert!((a - b).abs() < 1e-12);
        assert!((a - PI / 2f64.sqrt()).abs() < 1e-12);
    }
}
