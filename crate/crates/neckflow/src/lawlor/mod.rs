//! Lawlor necks: the profile functions, the phase map (a) -> (phi, A) and its
//! inverse, the constant c_+, the Liouville potential beta and the end potentials.

mod cache;
mod end;
mod frames;

pub use cache::PhaseCache;
pub use end::{end_potential, End, EndJet};
pub use frames::{
    analytic_frame, end_flux, fd_frame, filling_volume, lagrangian_angle_of_frame, omega0, special_check,
    sphere_tangent_basis, FillingVolume, SpecialReport,
};
pub(crate) use frames::local_map;

use crate::error::{Error, Result};
use crate::numerics::{find_root, integrate_line, sphere_area, RootOptions};
use nalgebra::Complex;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance used for the phase integrals.
pub const PHASE_TOL: f64 = 1e-13;

/// Lawlor parameters a_1..a_m.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeckParams {
    pub a: Vec<f64>,
}

impl NeckParams {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.len() < 3 {
            return Err(Error::Parameter(format!("need m >= 3 parameters, got {}", a.len())));
        }
        if let Some(bad) = a.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::Parameter(format!("Lawlor parameters must be positive, got {bad}")));
        }
        Ok(NeckParams { a })
    }

    pub fn symmetric(m: usize) -> Self {
        NeckParams { a: vec![1.0; m] }
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// Parameters of the dilated neck eps * L, i.e. a / eps^2.
    pub fn dilated(&self, eps: f64) -> Self {
        NeckParams { a: self.a.iter().map(|v| v / (eps * eps)).collect() }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        NeckParams { a: self.a.iter().map(|v| v * lambda).collect() }
    }
}

/// Angles phi_j and the volume-type constant A of a neck.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseData {
    pub phi: Vec<f64>,
    #[serde(rename = "A")]
    pub area: f64,
}

impl PhaseData {
    /// Checks the type-1 angle condition.
    pub fn validate(&self) -> Result<()> {
        if self.phi.len() < 3 {
            return Err(Error::Parameter("need at least three angles".into()));
        }
        if let Some(p) = self.phi.iter().find(|p| !(**p > 0.0 && **p < PI)) {
            return Err(Error::Precondition(format!("angle {p} outside (0, pi)")));
        }
        let sum: f64 = self.phi.iter().sum();
        if (sum - PI).abs() > 1e-9 {
            return Err(Error::Precondition(format!(
                "type-1 condition violated: sum of angles is {sum}, expected pi"
            )));
        }
        if !(self.area > 0.0) {
            return Err(Error::Precondition(format!("A must be positive, got {}", self.area)));
        }
        Ok(())
    }
}

/// The constant c_+ (with c_- = 0) and the decay rate of the ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeckAsymptotics {
    pub c_plus: f64,
    pub c_minus: f64,
    pub gamma: f64,
}

/// A point of L: (z_1(s) x_1, ..., z_m(s) x_m).
#[derive(Debug, Clone)]
pub struct NeckPoint {
    pub s: f64,
    pub x: Vec<f64>,
    pub z: Vec<Complex<f64>>,
    /// Real parts followed by imaginary parts.
    pub point: Vec<f64>,
}

/// P_a(y) = (prod(1 + a_j y^2) - 1) / y^2, equal to sum a_j at y = 0.
pub fn p_poly(params: &NeckParams, y: f64) -> f64 {
    cache::p_from_esym(&cache::elementary_symmetric(&params.a), y)
}

/// phi_j by adaptive quadrature and A = omega_m (prod a_j)^{-1/2}.
pub fn phases_from_params(params: &NeckParams) -> Result<PhaseData> {
    let esym = cache::elementary_symmetric(&params.a);
    let mut phi = Vec::with_capacity(params.m());
    for &aj in &params.a {
        let f = |y: f64| aj / ((1.0 + aj * y * y) * cache::p_from_esym(&esym, y).sqrt());
        // Even integrand: twice the half line.
        let q = integrate_line(f, f64::NEG_INFINITY, 0.0, PHASE_TOL)?;
        phi.push(2.0 * q.value);
    }
    Ok(PhaseData { phi, area: area_constant(params) })
}

pub fn area_constant(params: &NeckParams) -> f64 {
    let prod: f64 = params.a.iter().product();
    sphere_area(params.m()) / prod.sqrt()
}

/// c_+ = integral of 1 / (2 sqrt(P_a)) over the line.
pub fn neck_constant(params: &NeckParams) -> Result<NeckAsymptotics> {
    let esym = cache::elementary_symmetric(&params.a);
    let f = |y: f64| 0.5 / cache::p_from_esym(&esym, y).sqrt();
    let q = integrate_line(f, f64::NEG_INFINITY, 0.0, PHASE_TOL)?;
    Ok(NeckAsymptotics { c_plus: 2.0 * q.value, c_minus: 0.0, gamma: 2.0 - params.m() as f64 })
}

/// Inverts the phase map with damped Newton, falling back to continuation in
/// the angles from the symmetric neck.
pub fn params_from_phases(target: &PhaseData) -> Result<NeckParams> {
    target.validate()?;
    let m = target.phi.len();
    let lambda = (sphere_area(m) / target.area).powf(2.0 / m as f64);
    let start = vec![lambda; m];
    match solve_phases(target, &start) {
        Ok(p) => Ok(p),
        Err(_) => {
            let sym = PI / m as f64;
            let mut x = start;
            let steps = 16;
            for k in 1..=steps {
                let t = k as f64 / steps as f64;
                let phi: Vec<f64> = target.phi.iter().map(|p| (1.0 - t) * sym + t * p).collect();
                let stage = PhaseData { phi, area: target.area };
                x = solve_phases(&stage, &x)?.a;
            }
            Ok(NeckParams { a: x })
        }
    }
}

fn solve_phases(target: &PhaseData, x0: &[f64]) -> Result<NeckParams> {
    let m = target.phi.len();
    let log_area = target.area.ln();
    let residual = |a: &[f64]| -> Result<Vec<f64>> {
        let p = phases_from_params(&NeckParams { a: a.to_vec() })?;
        let mut r: Vec<f64> = (0..m - 1).map(|j| p.phi[j] - target.phi[j]).collect();
        r.push(p.area.ln() - log_area);
        Ok(r)
    };
    let opts = RootOptions { tol: 1e-11, max_iter: 60, max_halvings: 40, lower_bound: Some(1e-8) };
    let root = find_root(residual, x0, &opts)?;
    Ok(NeckParams { a: root.x })
}

/// Lawlor data together with its tabulated phases.
#[derive(Debug, Clone)]
pub struct Neck {
    pub params: NeckParams,
    pub cache: PhaseCache,
    pub phi: Vec<f64>,
    pub c_plus: f64,
    pub area: f64,
}

impl Neck {
    pub fn new(params: NeckParams) -> Self {
        let cache = PhaseCache::new(&params.a);
        let phi = cache.half_phases().iter().map(|v| 2.0 * v).collect();
        let c_plus = 2.0 * cache.half_constant();
        let area = area_constant(&params);
        Neck { params, cache, phi, c_plus, area }
    }

    pub fn m(&self) -> usize {
        self.params.m()
    }

    pub fn p(&self, y: f64) -> f64 {
        self.cache.p_poly(y)
    }

    /// psi_j(s).
    pub fn psi(&self, s: f64) -> Vec<f64> {
        self.cache.eval(s).0
    }

    /// d psi_j / ds = a_j / ((1 + a_j s^2) sqrt(P(s))).
    pub fn dpsi(&self, s: f64) -> Vec<f64> {
        let rp = self.p(s).sqrt();
        self.params.a.iter().map(|a| a / ((1.0 + a * s * s) * rp)).collect()
    }

    /// beta_L(s).
    pub fn beta(&self, s: f64) -> f64 {
        self.cache.eval(s).1
    }

    pub fn z(&self, s: f64) -> Vec<Complex<f64>> {
        let psi = self.psi(s);
        self.params
            .a
            .iter()
            .zip(psi)
            .map(|(a, p)| Complex::from_polar((1.0 / a + s * s).sqrt(), p))
            .collect()
    }

    /// dz_j / ds.
    pub fn dz(&self, s: f64) -> Vec<Complex<f64>> {
        let psi = self.psi(s);
        let dpsi = self.dpsi(s);
        (0..self.m())
            .map(|j| {
                let r = (1.0 / self.params.a[j] + s * s).sqrt();
                let e = Complex::from_polar(1.0, psi[j]);
                e * Complex::new(s / r, r * dpsi[j])
            })
            .collect()
    }

    pub fn point(&self, s: f64, x: &[f64]) -> Result<NeckPoint> {
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-9 || x.len() != self.m() {
            return Err(Error::Precondition(format!("x must be a unit vector in R^{}, |x| = {norm}", self.m())));
        }
        let z = self.z(s);
        Ok(NeckPoint { s, x: x.to_vec(), point: embed(&z, x), z })
    }

    pub fn phase_data(&self) -> PhaseData {
        PhaseData { phi: self.phi.clone(), area: self.area }
    }

    pub fn asymptotics(&self) -> NeckAsymptotics {
        NeckAsymptotics { c_plus: self.c_plus, c_minus: 0.0, gamma: 2.0 - self.m() as f64 }
    }
}

/// (z_j x_j)_j as real parts followed by imaginary parts.
pub(crate) fn embed(z: &[Complex<f64>], x: &[f64]) -> Vec<f64> {
    let m = z.len();
    let mut out = vec![0.0; 2 * m];
    for j in 0..m {
        out[j] = z[j].re * x[j];
        out[m + j] = z[j].im * x[j];
    }
    out
}

pub fn neck_point(neck: &Neck, s: f64, x: &[f64]) -> Result<NeckPoint> {
    neck.point(s, x)
}

pub fn beta_potential(neck: &Neck, s: f64) -> f64 {
    neck.beta(s)
}

/// JSON descriptor {m, a, phi, A, c_plus}.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NeckDescriptor {
    pub m: usize,
    pub a: Vec<f64>,
    pub phi: Vec<f64>,
    #[serde(rename = "A")]
    pub area: f64,
    pub c_plus: f64,
}

impl NeckDescriptor {
    pub fn new(params: &NeckParams) -> Result<Self> {
        let ph = phases_from_params(params)?;
        let c = neck_constant(params)?;
        Ok(NeckDescriptor { m: params.m(), a: params.a.clone(), phi: ph.phi, area: ph.area, c_plus: c.c_plus })
    }
}
