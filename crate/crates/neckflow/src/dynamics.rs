//! The neck scale eps(t): the balancing ODE d(eps^2)/dt + c eps^m = 0, its closed
//! form, the perturbed schedule driven by h(t), the validator for the growth and
//! Hoelder bounds on eps, and blow-up rate fits.

use crate::error::{Error, Result};
use crate::numerics::{bracketed_root, integrate_line, integrate_ode, loglog_slope, OdeOptions, OdePath};
use serde::Serialize;
use std::fmt;
use std::sync::Arc;

/// c = (A / c_L)(1/V1 + 1/V2).
pub fn ode_coefficient(area: f64, c_l: f64, v1: f64, v2: f64) -> f64 {
    area / c_l * (1.0 / v1 + 1.0 / v2)
}

/// The perturbation h(t).
#[derive(Clone, Default)]
pub enum HSpec {
    #[default]
    Zero,
    Const(f64),
    /// Samples (t_i, h_i) with monotone cubic interpolation, constant beyond the ends.
    Samples(MonotoneCubic),
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for HSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HSpec::Zero => write!(f, "Zero"),
            HSpec::Const(k) => write!(f, "Const({k})"),
            HSpec::Samples(s) => write!(f, "Samples({} points)", s.x.len()),
            HSpec::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl HSpec {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            HSpec::Zero => 0.0,
            HSpec::Const(k) => *k,
            HSpec::Samples(s) => s.eval(t),
            HSpec::Custom(f) => f(t),
        }
    }

    /// Integral of h over [a, b].
    pub fn integral(&self, a: f64, b: f64) -> Result<f64> {
        match self {
            HSpec::Zero => Ok(0.0),
            HSpec::Const(k) => Ok(k * (b - a)),
            _ if b == a => Ok(0.0),
            _ => Ok(integrate_line(|t| self.eval(t), a, b, 1e-13 * (1.0 + (b - a).abs()))?.value),
        }
    }
}

/// Fritsch-Carlson monotone cubic interpolant.
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 2 || y.len() != n {
            return Err(Error::Parameter("monotone cubic needs at least two (t, h) samples of equal length".into()));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("sample times must be strictly increasing".into()));
        }
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / (x[k + 1] - x[k])).collect();
        let mut d = vec![0.0; n];
        d[0] = delta[0];
        d[n - 1] = delta[n - 2];
        for k in 1..n - 1 {
            if delta[k - 1] * delta[k] <= 0.0 {
                d[k] = 0.0;
            } else {
                let h0 = x[k] - x[k - 1];
                let h1 = x[k + 1] - x[k];
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
            }
        }
        Ok(MonotoneCubic { x, y, d })
    }

    pub fn eval(&self, t: f64) -> f64 {
        let n = self.x.len();
        if t <= self.x[0] {
            return self.y[0];
        }
        if t >= self.x[n - 1] {
            return self.y[n - 1];
        }
        let k = self.x.partition_point(|v| *v <= t) - 1;
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }
}

/// eps(t) = [(m-2)/2 c t + int_Lambda^t h]^{-1/(m-2)} for t >= Lambda.
#[derive(Debug, Clone)]
pub struct NeckSchedule {
    pub m: usize,
    pub lambda: f64,
    pub c: f64,
    pub h: HSpec,
}

impl NeckSchedule {
    pub fn new(m: usize, lambda: f64, c: f64, h: HSpec) -> Result<Self> {
        if m < 3 {
            return Err(Error::Parameter(format!("m must be at least 3, got {m}")));
        }
        if !(c > 0.0) {
            return Err(Error::Parameter(format!("ODE coefficient must be positive, got {c}")));
        }
        if !(lambda > 0.0) {
            return Err(Error::Parameter(format!("Lambda must be positive, got {lambda}")));
        }
        Ok(NeckSchedule { m, lambda, c, h })
    }

    /// The schedule whose value at t = Lambda is eps0 when h = 0.
    pub fn from_eps0(m: usize, eps0: f64, c: f64, h: HSpec) -> Result<Self> {
        if !(eps0 > 0.0) {
            return Err(Error::Parameter(format!("eps0 must be positive, got {eps0}")));
        }
        NeckSchedule::new(m, lambda_for_eps0(m, eps0, c), c, h)
    }

    fn k(&self) -> f64 {
        self.m as f64 - 2.0
    }

    fn bracket(&self, t: f64) -> Result<f64> {
        if t < self.lambda {
            return Err(Error::Precondition(format!("schedule is defined for t >= Lambda = {}, got {t}", self.lambda)));
        }
        let b = 0.5 * self.k() * self.c * t + self.h.integral(self.lambda, t)?;
        if !(b > 0.0) {
            return Err(Error::Precondition(format!(
                "bracket is non-positive ({b}) at t = {t}: Lambda is too small for this h"
            )));
        }
        Ok(b)
    }

    /// eps(t).
    pub fn eps(&self, t: f64) -> Result<f64> {
        Ok(self.bracket(t)?.powf(-1.0 / self.k()))
    }

    /// (eps, d eps / dt) at t.
    pub fn eps_and_derivative(&self, t: f64) -> Result<(f64, f64)> {
        let e = self.eps(t)?;
        let db = 0.5 * self.k() * self.c + self.h.eval(t);
        Ok((e, -e.powi(self.m as i32 - 1) * db / self.k()))
    }

    /// d(eps^2)/dt.
    pub fn deps2(&self, t: f64) -> Result<f64> {
        let (e, de) = self.eps_and_derivative(t)?;
        Ok(2.0 * e * de)
    }

    /// Time at which the unperturbed schedule reaches eps.
    pub fn time_of_eps(&self, eps: f64) -> f64 {
        2.0 * eps.powf(-self.k()) / (self.k() * self.c)
    }

    /// First time t >= Lambda with eps(t) = eps.
    pub fn time_of(&self, eps: f64) -> Result<f64> {
        let start = self.eps(self.lambda)?;
        if !(eps > 0.0 && eps <= start) {
            return Err(Error::Precondition(format!("eps = {eps} is not reached after Lambda (eps(Lambda) = {start})")));
        }
        if let HSpec::Zero = self.h {
            return Ok(self.time_of_eps(eps));
        }
        let f = |t: f64| self.eps(t).map(|e| e.ln() - eps.ln()).unwrap_or(f64::NAN);
        let mut hi = self.time_of_eps(eps).max(2.0 * self.lambda);
        for _ in 0..200 {
            if f(hi) <= 0.0 {
                return bracketed_root(f, self.lambda, hi, 1e-14);
            }
            hi *= 2.0;
        }
        Err(Error::NonConvergence { iterate: vec![hi], residual: f(hi), iterations: 200 })
    }

    /// Samples eps on n log-spaced times in [t0, t1] as a path with derivatives.
    pub fn sample_path(&self, t0: f64, t1: f64, n: usize) -> Result<OdePath> {
        sample_function_path(|t| self.eps_and_derivative(t), t0, t1, n)
    }

    /// d(eps^2)/dt + c eps^m + (2/(m-2)) eps^m h(t), evaluated from the explicit formula.
    pub fn ode_residual(&self, t: f64) -> Result<f64> {
        let (e, _) = self.eps_and_derivative(t)?;
        let em = e.powi(self.m as i32);
        Ok(self.deps2(t)? + self.c * em + 2.0 / self.k() * em * self.h.eval(t))
    }
}

/// Lambda such that the unperturbed schedule equals eps0 at t = Lambda.
pub fn lambda_for_eps0(m: usize, eps0: f64, c: f64) -> f64 {
    let k = m as f64 - 2.0;
    2.0 * eps0.powf(-k) / (k * c)
}

/// Value at t = Lambda of the unperturbed schedule.
pub fn eps0_for_lambda(m: usize, lambda: f64, c: f64) -> f64 {
    let k = m as f64 - 2.0;
    (0.5 * k * c * lambda).powf(-1.0 / k)
}

/// eps_0(t) = (eps0^{2-m} + (c/2)(m-2) t)^{-1/(m-2)}.
pub fn closed_form(m: usize, eps0: f64, c: f64, t: f64) -> f64 {
    let k = m as f64 - 2.0;
    (eps0.powf(-k) + 0.5 * c * k * t).powf(-1.0 / k)
}

/// d/dt of the closed form.
pub fn closed_form_derivative(m: usize, eps0: f64, c: f64, t: f64) -> f64 {
    let e = closed_form(m, eps0, c, t);
    -0.5 * c * e.powi(m as i32 - 1)
}

/// Samples a scalar function with derivative on n log-spaced times.
pub fn sample_function_path<F: Fn(f64) -> Result<(f64, f64)>>(f: F, t0: f64, t1: f64, n: usize) -> Result<OdePath> {
    if !(t1 > t0 && t0 > 0.0) || n < 2 {
        return Err(Error::Parameter(format!("need 0 < t0 < t1 and n >= 2, got [{t0}, {t1}], n = {n}")));
    }
    let (l0, l1) = (t0.ln(), t1.ln());
    let mut path = OdePath { times: Vec::new(), values: Vec::new(), derivatives: Vec::new(), error_estimate: 0.0 };
    for k in 0..n {
        let t = match k {
            0 => t0,
            k if k == n - 1 => t1,
            k => (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp().clamp(t0, t1),
        };
        let (v, d) = f(t)?;
        path.times.push(t);
        path.values.push(vec![v]);
        path.derivatives.push(vec![d]);
    }
    Ok(path)
}

/// Integrates d(eps^2)/dt = -c eps^m - (2/(m-2)) eps^m h(t) numerically from
/// (t0, eps_start) to t1; values and derivatives of the path are eps and eps'.
pub fn integrate_balancing(m: usize, c: f64, h: &HSpec, t0: f64, eps_start: f64, t1: f64, tol: f64) -> Result<OdePath> {
    if !(eps_start > 0.0) {
        return Err(Error::Parameter(format!("eps_start must be positive, got {eps_start}")));
    }
    let k = m as f64 - 2.0;
    let half_m = 0.5 * m as f64;
    // The state is u = eps^2 / eps_start^2, so the tolerance acts relatively.
    let scale = eps_start.powf(k);
    let rhs = |t: f64, y: &[f64]| vec![-(c + 2.0 / k * h.eval(t)) * scale * y[0].max(0.0).powf(half_m)];
    let opts = OdeOptions { tol, ..Default::default() };
    let p = integrate_ode(rhs, t0, &[1.0], t1, &opts)?;
    let values: Vec<Vec<f64>> = p.values.iter().map(|v| vec![eps_start * v[0].sqrt()]).collect();
    let derivatives = p
        .derivatives
        .iter()
        .zip(&values)
        .map(|(d, e)| vec![eps_start * eps_start * d[0] / (2.0 * e[0])])
        .collect();
    Ok(OdePath { times: p.times, values, derivatives, error_estimate: p.error_estimate })
}

/// Relative growth of a running constant over the second half of the range that
/// still counts as stable.
pub const STABILITY_TOL: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub name: &'static str,
    /// Value of the local constant at the first time.
    pub at_start: f64,
    /// Supremum over the first half (in log time) of the path.
    pub sup_half: f64,
    /// Supremum over the whole path.
    pub sup: f64,
    pub finite: bool,
    pub stable: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AssumptionReport {
    pub m: usize,
    pub alpha: f64,
    pub t_start: f64,
    pub t_end: f64,
    pub bounds: Vec<BoundReport>,
    pub passes: bool,
    /// Name of the first bound that failed.
    pub failed: Option<&'static str>,
}

fn hermite_derivative(path: &OdePath, t: f64) -> f64 {
    let n = path.times.len();
    let k = path.times.partition_point(|v| *v <= t).clamp(1, n - 1) - 1;
    let (t0, t1) = (path.times[k], path.times[k + 1]);
    let h = t1 - t0;
    let s = ((t - t0) / h).clamp(0.0, 1.0);
    let (y0, y1) = (path.values[k][0], path.values[k + 1][0]);
    let (d0, d1) = (path.derivatives[k][0], path.derivatives[k + 1][0]);
    let dh00 = 6.0 * s * s - 6.0 * s;
    let dh10 = 3.0 * s * s - 4.0 * s + 1.0;
    let dh01 = -6.0 * s * s + 6.0 * s;
    let dh11 = 3.0 * s * s - 2.0 * s;
    (dh00 * y0 + dh01 * y1) / h + dh10 * d0 + dh11 * d1
}

/// Best constants for the growth, derivative and Hoelder bounds on eps(t) along a
/// sampled path, and whether they stay finite and stable as the horizon grows.
pub fn validate_assumption(path: &OdePath, m: usize, alpha: f64) -> Result<AssumptionReport> {
    if path.times.len() < 4 {
        return Err(Error::Parameter("validator needs at least four path samples".into()));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("Hoelder exponent must lie in (0, 1), got {alpha}")));
    }
    let k = m as f64 - 2.0;
    let n = path.times.len();
    let t_start = path.times[0];
    let t_end = path.times[n - 1];
    let t_half = (t_start * t_end).sqrt();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut deriv = Vec::with_capacity(n);
    let mut holder = Vec::new();
    for i in 0..n {
        let t = path.times[i];
        let e = path.values[i][0];
        let de = path.derivatives[i][0];
        let scaled = e * t.powf(1.0 / k);
        upper.push((t, scaled));
        lower.push((t, 1.0 / scaled));
        deriv.push((t, de.abs() * t.powf((m as f64 - 1.0) / k)));
        // Hoelder quotient over pairs in [t, 2t] at the largest admissible separation.
        if 2.0 * t <= t_end {
            let window = t.powf(-2.0 / k) * (1.0 - 1e-9);
            let weight = t.powf((1.0 - m as f64 + 2.0 * alpha) / k);
            let mut q = 0.0f64;
            let probes = 16;
            for p in 0..probes {
                let t1 = t + (t - window).max(0.0) * p as f64 / (probes - 1) as f64;
                let t2 = (t1 + window).min(2.0 * t);
                if t2 <= t1 {
                    continue;
                }
                let diff = (hermite_derivative(path, t1) - hermite_derivative(path, t2)).abs();
                q = q.max(diff / (t2 - t1).powf(alpha));
            }
            holder.push((t, q / weight));
        }
    }
    let summarize = |name: &'static str, v: &[(f64, f64)]| -> BoundReport {
        let sup = v.iter().map(|x| x.1).fold(0.0, f64::max);
        let sup_half = v.iter().filter(|x| x.0 <= t_half).map(|x| x.1).fold(0.0, f64::max);
        let at_start = v.first().map(|x| x.1).unwrap_or(f64::NAN);
        let finite = sup.is_finite() && at_start.is_finite();
        BoundReport { name, at_start, sup_half, sup, finite, stable: finite && sup <= (1.0 + STABILITY_TOL) * sup_half }
    };
    let bounds = vec![
        summarize("lower", &lower),
        summarize("upper", &upper),
        summarize("derivative", &deriv),
        summarize("holder", &holder),
    ];
    let failed = bounds.iter().find(|b| !(b.finite && b.stable)).map(|b| b.name);
    Ok(AssumptionReport { m, alpha, t_start, t_end, passes: failed.is_none(), failed, bounds })
}

/// Least-squares slope of log sup|A| against log t.
pub fn blowup_rate(series: &[(f64, f64)]) -> Result<f64> {
    if series.len() < 4 {
        return Err(Error::Parameter(format!("blow-up fit needs at least 4 samples, got {}", series.len())));
    }
    if series.iter().any(|(t, a)| !(*t > 0.0 && *a > 0.0)) {
        return Err(Error::Parameter("blow-up fit needs positive times and curvatures".into()));
    }
    let tmin = series.iter().map(|x| x.0).fold(f64::INFINITY, f64::min);
    let tmax = series.iter().map(|x| x.0).fold(0.0, f64::max);
    if tmax < 10.0 * tmin * (1.0 - 1e-12) {
        return Err(Error::Parameter(format!("blow-up fit needs samples spanning a decade, got [{tmin}, {tmax}]")));
    }
    let t: Vec<f64> = series.iter().map(|x| x.0).collect();
    let a: Vec<f64> = series.iter().map(|x| x.1).collect();
    Ok(loglog_slope(&t, &a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_basics() {
        assert_eq!(closed_form(3, 0.1, 2.0, 0.0), 0.1);
        let e = closed_form(3, 0.1, 2.0, 5.0);
        assert!((e - 1.0 / (10.0 + 5.0)).abs() < 1e-15);
        for k in 0..50 {
            let t = k as f64 * 0.7;
            let h = 1e-4;
            let d = (closed_form(4, 0.2, 1.3, t + h).powi(2) - closed_form(4, 0.2, 1.3, t - h).powi(2)) / (2.0 * h);
            assert!((d + 1.3 * closed_form(4, 0.2, 1.3, t).powi(4)).abs() < 1e-10);
        }
    }

    #[test]
    fn matched_normalization() {
        let s = NeckSchedule::from_eps0(3, 0.05, 0.8, HSpec::Zero).unwrap();
        assert!((s.eps(s.lambda).unwrap() - 0.05).abs() < 1e-15);
        for &f in &[1.0, 3.0, 10.0, 100.0] {
            let t = f * s.lambda;
            let cf = closed_form(3, 0.05, 0.8, t - s.lambda);
            assert!((s.eps(t).unwrap() - cf).abs() < 1e-10 * cf);
        }
    }

    #[test]
    fn constant_perturbation_satisfies_ode() {
        let s = NeckSchedule::new(4, 10.0, 1.0, HSpec::Const(0.3)).unwrap();
        for k in 0..100 {
            let t = 11.0 + k as f64;
            let h = 1e-3;
            let d = (s.eps(t + h).unwrap().powi(2) - s.eps(t - h).unwrap().powi(2)) / (2.0 * h);
            let e = s.eps(t).unwrap();
            assert!((d + e.powi(4) + e.powi(4) * 0.3).abs() < 1e-8);
        }
    }

    #[test]
    fn negative_bracket_rejected() {
        let s = NeckSchedule::new(3, 1.0, 1.0, HSpec::Const(-2.0)).unwrap();
        assert!(matches!(s.eps(10.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn monotone_interpolant() {
        let c = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 2.0]).unwrap();
        let mut prev = -1.0;
        for k in 0..=300 {
            let v = c.eval(k as f64 / 100.0);
            assert!(v >= prev - 1e-15);
            prev = v;
        }
        assert_eq!(c.eval(1.5), 1.0);
    }

    #[test]
    fn power_laws_in_validator() {
        let good = sample_function_path(|t| Ok((1.0 / t, -1.0 / (t * t))), 10.0, 1000.0, 400).unwrap();
        let r = validate_assumption(&good, 3, 0.01).unwrap();
        assert!(r.passes, "{r:?}");
        assert!((r.bounds[1].sup - 1.0).abs() < 1e-12);
        let bad = sample_function_path(|t| Ok((t.powi(-2), -2.0 * t.powi(-3))), 10.0, 1000.0, 400).unwrap();
        let r = validate_assumption(&bad, 3, 0.01).unwrap();
        assert!(!r.passes);
        assert_eq!(r.failed, Some("lower"));
    }

    #[test]
    fn blowup_fits() {
        let s: Vec<(f64, f64)> = (0..6).map(|k| (10f64.powf(k as f64 * 0.4), 3.0)).collect();
        assert!(blowup_rate(&s).unwrap().abs() < 1e-12);
        let s: Vec<(f64, f64)> = (0..6).map(|k| {
            let t = 10f64.powf(k as f64 * 0.4);
            (t, t.sqrt())
        }).collect();
        assert!((blowup_rate(&s).unwrap() - 0.5).abs() < 1e-10);
        assert!(blowup_rate(&s[..3]).is_err());
    }
}
