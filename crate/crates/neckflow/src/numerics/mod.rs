//! Shared numerical kernels: quadrature, root finding, ODE integration, sphere rules.

pub mod gauss;
mod ode;
mod quad;
mod root;
mod sphere;

pub use gauss::GaussLegendre;
pub use ode::{integrate_ode, OdeOptions, OdePath};
pub use quad::{composite_gauss, integrate_line, Quadrature, MAX_SUBDIVISIONS};
pub use root::{bracketed_root, find_root, Root, RootOptions};
pub use sphere::{sphere_area, sphere_rule, QuadratureRule};

/// Sum with a fixed pairwise reduction tree, independent of thread scheduling.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    match v.len() {
        0 => 0.0,
        1 => v[0],
        n if n <= 16 => v.iter().sum(),
        n => {
            let (a, b) = v.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    linear_slope(&lx, &ly)
}

/// Least-squares slope of `y` against `x`.
pub fn linear_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
