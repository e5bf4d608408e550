//! Dormand-Prince 5(4) integrator with cubic Hermite dense output.

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub tol: f64,
    /// Initial step; chosen from the right-hand side when `None`.
    pub h0: Option<f64>,
    pub max_steps: usize,
    /// Absolute cap on any state component; exceeding it is reported as blow-up.
    pub cap: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions { tol: 1e-10, h0: None, max_steps: 1_000_000, cap: 1e100 }
    }
}

/// Accepted steps of an integration, with derivatives for dense output.
#[derive(Debug, Clone)]
pub struct OdePath {
    pub times: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub derivatives: Vec<Vec<f64>>,
    /// Largest accepted local error estimate (scaled units).
    pub error_estimate: f64,
}

impl OdePath {
    pub fn final_value(&self) -> &[f64] {
        self.values.last().expect("path has at least one point")
    }

    /// Cubic Hermite interpolation between accepted steps.
    pub fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.times.len();
        if t <= self.times[0] {
            return self.values[0].clone();
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1].clone();
        }
        let k = match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.values[i].clone(),
            Err(i) => i - 1,
        };
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        (0..self.values[k].len())
            .map(|i| {
                h00 * self.values[k][i]
                    + h10 * h * self.derivatives[k][i]
                    + h01 * self.values[k + 1][i]
                    + h11 * h * self.derivatives[k + 1][i]
            })
            .collect()
    }
}

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates `y' = rhs(t, y)` from `t0` to `t1`.
pub fn integrate_ode<F>(rhs: F, t0: f64, y0: &[f64], t1: f64, opts: &OdeOptions) -> Result<OdePath>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    if !(t1 > t0) {
        return Err(Error::Parameter(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Parameter("tolerance must be positive".into()));
    }
    let n = y0.len();
    let mut t = t0;
    let mut y = y0.to_vec();
    let mut f0 = rhs(t, &y);
    let mut path = OdePath {
        times: vec![t],
        values: vec![y.clone()],
        derivatives: vec![f0.clone()],
        error_estimate: 0.0,
    };
    let span = t1 - t0;
    let mut h = opts.h0.unwrap_or_else(|| {
        let ynorm = y.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-10);
        let fnorm = f0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if fnorm > 0.0 {
            (0.01 * ynorm / fnorm).min(span)
        } else {
            span
        }
    });
    h = h.min(span).max(span * 1e-14);
    let mut k = vec![vec![0.0; n]; 7];
    let mut steps = 0usize;
    while t < t1 {
        if steps >= opts.max_steps {
            return Err(Error::NonConvergence {
                iterate: y.clone(),
                residual: path.error_estimate,
                iterations: steps,
            });
        }
        steps += 1;
        if t + h > t1 {
            h = t1 - t;
        }
        k[0].clone_from(&f0);
        let mut ytmp = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = y[i];
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += h * A[s][j] * kj[i];
                }
                ytmp[i] = acc;
            }
            k[s] = rhs(t + C[s] * h, &ytmp);
        }
        // ytmp holds the fifth-order solution (FSAL stage 7 evaluated there).
        let mut err = 0.0f64;
        for i in 0..n {
            let mut e = 0.0;
            for s in 0..7 {
                e += E[s] * k[s][i];
            }
            let scale = opts.tol * (1.0 + y[i].abs().max(ytmp[i].abs()));
            err = err.max((h * e).abs() / scale);
        }
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= 1.0 {
            t += h;
            y.clone_from(&ytmp);
            f0.clone_from(&k[6]);
            if y.iter().any(|v| !v.is_finite() || v.abs() > opts.cap) {
                return Err(Error::Explosion { t });
            }
            path.times.push(t);
            path.values.push(y.clone());
            path.derivatives.push(f0.clone());
            path.error_estimate = path.error_estimate.max(err * opts.tol);
        }
        let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= factor;
        if h < span * 1e-15 {
            return Err(Error::NonConvergence { iterate: y, residual: err, iterations: steps });
        }
    }
    Ok(path)
}
