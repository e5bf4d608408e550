//! Quadrature rules on the unit sphere S^{m-1}.

use super::gauss::GaussLegendre;
use crate::error::{Error, Result};
use std::f64::consts::PI;

/// Nodes and positive weights of a quadrature rule on S^{m-1}.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub dim: usize,
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub declared_tolerance: f64,
    /// True for the deterministic product rule, false for quasi-Monte Carlo.
    pub exact: bool,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(x)).sum()
    }

    /// Standard error of the equal-weight mean, meaningful for the Monte Carlo branch.
    pub fn standard_error<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        if self.exact {
            return 0.0;
        }
        let n = self.len() as f64;
        let area = sphere_area(self.dim);
        let vals: Vec<f64> = self.nodes.iter().map(|x| f(x)).collect();
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        area * (var / n).sqrt()
    }
}

/// Area of the unit sphere S^{m-1} in R^m.
pub fn sphere_area(m: usize) -> f64 {
    match m {
        0 => 0.0,
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI / (m as f64 - 2.0) * sphere_area(m - 2),
    }
}

/// Product rule for m = 3 (exact through degree 2*level - 1); Halton points otherwise.
pub fn sphere_rule(m: usize, level: usize) -> Result<QuadratureRule> {
    if m < 3 {
        return Err(Error::Parameter(format!("sphere rules need m >= 3, got {m}")));
    }
    if level < 1 {
        return Err(Error::Parameter("sphere rule level must be at least 1".into()));
    }
    if m == 3 {
        let gl = GaussLegendre::new(level);
        let na = 2 * level;
        let dphi = 2.0 * PI / na as f64;
        let mut nodes = Vec::with_capacity(level * na);
        let mut weights = Vec::with_capacity(level * na);
        for (z, w) in gl.nodes.iter().zip(&gl.weights) {
            let rho = (1.0 - z * z).max(0.0).sqrt();
            for k in 0..na {
                let phi = (k as f64 + 0.5) * dphi;
                nodes.push(vec![rho * phi.cos(), rho * phi.sin(), *z]);
                weights.push(w * dphi);
            }
        }
        return Ok(QuadratureRule { dim: 3, nodes, weights, declared_tolerance: 1e-12, exact: true });
    }
    let n = 64 * level * level;
    let area = sphere_area(m);
    let pairs = m.div_ceil(2);
    let primes = first_primes(2 * pairs);
    let mut nodes = Vec::with_capacity(n);
    for i in 1..=n {
        let mut v = Vec::with_capacity(2 * pairs);
        for p in 0..pairs {
            let u1 = halton(i, primes[2 * p]);
            let u2 = halton(i, primes[2 * p + 1]);
            let r = (-2.0 * u1.ln()).sqrt();
            v.push(r * (2.0 * PI * u2).cos());
            v.push(r * (2.0 * PI * u2).sin());
        }
        v.truncate(m);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        nodes.push(v.into_iter().map(|x| x / norm).collect());
    }
    let weights = vec![area / n as f64; n];
    Ok(QuadratureRule { dim: m, nodes, weights, declared_tolerance: area / (n as f64).sqrt(), exact: false })
}

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

fn first_primes(k: usize) -> Vec<usize> {
    let mut out = Vec::with_capacity(k);
    let mut c = 2;
    while out.len() < k {
        if (2..c).take_while(|d| d * d <= c).all(|d| c % d != 0) {
            out.push(c);
        }
        c += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_rule_area_and_moments() {
        for level in 1..8 {
            let r = sphere_rule(3, level).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 4.0 * PI).abs() < 1e-12);
            assert!(r.weights.iter().all(|w| *w > 0.0));
        }
        let r = sphere_rule(3, 3).unwrap();
        let x2 = r.integrate(|x| x[0] * x[0]);
        assert!((x2 - 4.0 * PI / 3.0).abs() < 1e-12);
        // degree 5 monomials integrate exactly at level 3
        let x4 = r.integrate(|x| x[0].powi(4));
        assert!((x4 - 4.0 * PI / 5.0).abs() < 1e-12);
    }

    #[test]
    fn areas() {
        assert!((sphere_area(3) - 4.0 * PI).abs() < 1e-14);
        assert!((sphere_area(4) - 2.0 * PI * PI).abs() < 1e-13);
        let r = sphere_rule(4, 2).unwrap();
        assert!((r.integrate(|_| 1.0) - 2.0 * PI * PI).abs() < 1e-12);
        let x2 = r.integrate(|x| x[0] * x[0]);
        assert!((x2 - PI * PI / 2.0).abs() < 5.0 * r.standard_error(|x| x[0] * x[0]) + 1e-3);
    }

    #[test]
    fn level_zero_rejected() {
        assert!(sphere_rule(3, 0).is_err());
        assert!(sphere_rule(2, 3).is_err());
    }
}
