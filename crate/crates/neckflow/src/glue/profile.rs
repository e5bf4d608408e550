//! The cutoff chi, the gluing profile (R1, R2, hbar, tau, eps), the radial
//! reparametrization kappa_eps and the weight rho_eps.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

fn bump(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

fn bump_d(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0, 0.0)
    } else {
        let f = (-1.0 / t).exp();
        let t2 = t * t;
        let d1 = f / t2;
        let d2 = f * (1.0 - 2.0 * t) / (t2 * t2);
        (f, d1, d2)
    }
}

/// chi(y) = f(y - 1) / (f(y - 1) + f(2 - y)) with f(t) = exp(-1/t) for t > 0.
pub fn cutoff_chi(y: f64) -> f64 {
    if y <= 1.0 {
        0.0
    } else if y >= 2.0 {
        1.0
    } else {
        let a = bump(y - 1.0);
        let b = bump(2.0 - y);
        a / (a + b)
    }
}

/// (chi, chi', chi'') at y.
pub fn cutoff_jet(y: f64) -> (f64, f64, f64) {
    if y <= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    if y >= 2.0 {
        return (1.0, 0.0, 0.0);
    }
    let (a, a1, a2) = bump_d(y - 1.0);
    let (b, b1, b2) = bump_d(2.0 - y);
    // b as a function of y has derivatives -b1 and b2.
    let s = a + b;
    let s1 = a1 - b1;
    let s2 = a2 + b2;
    let chi = a / s;
    let d1 = (a1 * s - a * s1) / (s * s);
    let d2 = (a2 * s - a * s2) / (s * s) - 2.0 * s1 * (a1 * s - a * s1) / (s * s * s);
    (chi, d1, d2)
}

/// Sup norms of chi' and chi'' on [1, 2], from a dense grid.
pub fn cutoff_derivative_bounds() -> (f64, f64) {
    let n = 20000;
    let mut d1 = 0.0f64;
    let mut d2 = 0.0f64;
    for k in 1..n {
        let (_, a, b) = cutoff_jet(1.0 + k as f64 / n as f64);
        d1 = d1.max(a.abs());
        d2 = d2.max(b.abs());
    }
    (d1, d2)
}

/// Gluing parameters in the dimension m.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GlueProfile {
    pub m: usize,
    #[serde(rename = "R1")]
    pub r1: f64,
    #[serde(rename = "R2")]
    pub r2: f64,
    pub hbar: f64,
    pub tau: f64,
    pub eps: f64,
}

impl GlueProfile {
    /// m = 3, R1 = 1, R2 = 4, hbar = 1/100, tau = 1/10.
    pub fn standard(eps: f64) -> Self {
        GlueProfile { m: 3, r1: 1.0, r2: 4.0, hbar: 0.01, tau: 0.1, eps }
    }

    /// Upper end of the admissible scale range.
    pub fn eps_max(&self) -> f64 {
        let a = ((1.0 + self.hbar) * self.r1).powf(-1.0 / (1.0 - self.tau));
        let b = ((1.0 - self.hbar) * self.r2 / 2.0).powf(1.0 / self.tau);
        1f64.min(a).min(b)
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        GlueProfile { eps, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 3 {
            return Err(Error::Parameter(format!("m must be at least 3, got {}", self.m)));
        }
        if !(self.hbar > 0.0 && self.hbar <= 0.01) {
            return Err(Error::Parameter(format!("hbar must lie in (0, 1/100], got {}", self.hbar)));
        }
        if !(self.tau > 0.0 && self.tau < 0.5) {
            return Err(Error::Parameter(format!("tau must lie in (0, 1/2), got {}", self.tau)));
        }
        if !(self.r1 > 0.0) || (1.0 + 2.0 * self.hbar) * self.r1 > (1.0 - self.hbar) * self.r2 {
            return Err(Error::Parameter(format!(
                "radii violate (1 + 2 hbar) R1 <= (1 - hbar) R2: R1 = {}, R2 = {}",
                self.r1, self.r2
            )));
        }
        let max = self.eps_max();
        if !(self.eps > 0.0 && self.eps < max) {
            return Err(Error::Range { eps: self.eps, max });
        }
        Ok(())
    }

    fn inner_cut(&self, r: f64) -> (f64, f64) {
        let w = self.hbar * self.r1;
        let (c, d, _) = cutoff_jet((r - self.r1) / w);
        (c, d / w)
    }

    /// kappa_eps(r) for r in (R1, R2).
    pub fn kappa(&self, r: f64) -> Result<f64> {
        if !(r > self.r1 && r < self.r2) {
            return Err(Error::Precondition(format!("kappa is defined on ({}, {}), got r = {r}", self.r1, self.r2)));
        }
        Ok(self.kappa_unchecked(r))
    }

    pub(crate) fn kappa_unchecked(&self, r: f64) -> f64 {
        let (c, _) = self.inner_cut(r);
        (1.0 - c) * self.eps * r + c * r
    }

    /// d kappa / dr.
    pub fn dkappa(&self, r: f64) -> f64 {
        let (c, dc) = self.inner_cut(r);
        (1.0 - c) * self.eps + c + dc * r * (1.0 - self.eps)
    }

    /// Inverse of kappa: the intrinsic radius over the ambient radius in (eps R1, R2).
    pub fn kappa_inverse(&self, rr: f64) -> Result<f64> {
        let lo_amb = self.eps * self.r1;
        if !(rr > lo_amb && rr < self.r2) {
            return Err(Error::Precondition(format!("ambient radius {rr} outside ({lo_amb}, {})", self.r2)));
        }
        if rr <= self.eps * (1.0 + self.hbar) * self.r1 {
            return Ok(rr / self.eps);
        }
        if rr >= (1.0 + 2.0 * self.hbar) * self.r1 {
            return Ok(rr);
        }
        let mut lo = (1.0 + self.hbar) * self.r1;
        let mut hi = (1.0 + 2.0 * self.hbar) * self.r1;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.kappa_unchecked(mid) < rr {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// The interpolation factor eta = 1 - chi(eps^{-tau} rr) of the intermediate potential
    /// and its first two radial derivatives.
    pub fn eta_jet(&self, rr: f64) -> (f64, f64, f64) {
        let k = self.eps.powf(-self.tau);
        let (c, d1, d2) = cutoff_jet(k * rr);
        (1.0 - c, -k * d1, -k * k * d2)
    }

    /// eps^tau, the inner edge of the transition band.
    pub fn band_inner(&self) -> f64 {
        self.eps.powf(self.tau)
    }

    /// Tip weight profile rho_hat(n) for the distance n from the origin on L.
    pub fn rho_hat(&self, n: f64) -> f64 {
        let c = cutoff_chi(2.0 * n / self.r1);
        (n * n + (1.0 - c) * self.r1 * self.r1).sqrt().max(1.0)
    }

    /// Weight on the intermediate region at the intrinsic radius r.
    pub fn rho_intermediate(&self, r: f64) -> f64 {
        let c = cutoff_chi((self.r2 - r) / (self.hbar * self.r2));
        self.kappa_unchecked(r) + (self.r2 - r) * (1.0 - c)
    }

    /// Weight on the tip at a point of L at distance n from the origin.
    pub fn rho_tip(&self, n: f64) -> f64 {
        self.eps * self.rho_hat(n)
    }

    /// Weight on the outer region.
    pub fn rho_outer(&self) -> f64 {
        self.r2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cutoff_values() {
        assert_eq!(cutoff_chi(0.5), 0.0);
        assert_eq!(cutoff_chi(1.0), 0.0);
        assert_eq!(cutoff_chi(3.0), 1.0);
        assert!((cutoff_chi(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 0.0;
        for k in 0..10000 {
            let v = cutoff_chi(0.5 + 2.0 * k as f64 / 10000.0);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn cutoff_derivatives_match_differences() {
        let h = 1e-5;
        for &y in &[1.1, 1.3, 1.5, 1.77, 1.95] {
            let (_, d1, d2) = cutoff_jet(y);
            let fd1 = (cutoff_chi(y + h) - cutoff_chi(y - h)) / (2.0 * h);
            let fd2 = (cutoff_jet(y + h).1 - cutoff_jet(y - h).1) / (2.0 * h);
            assert!((fd1 - d1).abs() < 1e-8);
            assert!((fd2 - d2).abs() < 1e-6);
        }
    }

    #[test]
    fn kappa_properties() {
        let p = GlueProfile::standard(0.05);
        let r = p.r1 * (1.0 + p.hbar / 2.0);
        assert_eq!(p.kappa(r).unwrap(), p.eps * r);
        let r = p.r2 * (1.0 - p.hbar / 2.0);
        assert_eq!(p.kappa(r).unwrap(), r);
        assert!(p.kappa(p.r1).is_err());
        let n = 20000;
        for k in 1..n {
            let r = p.r1 + (p.r2 - p.r1) * k as f64 / n as f64;
            assert!(p.dkappa(r) >= p.eps - 1e-10);
            let rr = p.kappa(r).unwrap();
            assert!((p.kappa_inverse(rr).unwrap() - r).abs() < 1e-12 * r);
        }
    }

    #[test]
    fn eps_range() {
        let p = GlueProfile::standard(0.05);
        assert!(p.validate().is_ok());
        assert!(matches!(p.with_eps(0.995).validate(), Err(Error::Range { .. })));
        assert!(p.with_eps(0.0).validate().is_err());
    }

    #[test]
    fn weights() {
        let p = GlueProfile::standard(0.05);
        assert_eq!(p.rho_outer(), 4.0);
        let r = 2.0;
        assert_eq!(p.rho_intermediate(r), p.kappa(r).unwrap());
        assert!(p.rho_hat(0.0) >= 1.0);
        assert!((p.rho_tip(0.0) - p.eps * p.rho_hat(0.0)).abs() < 1e-16);
    }
}
