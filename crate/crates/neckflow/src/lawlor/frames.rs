//! Tangent frames of L, the symplectic and holomorphic volume forms on them, the
//! filling volume of the neck and the flux of the end potential.

use super::{embed, End, Neck, NeckPoint};
use crate::error::{Error, Result};
use crate::numerics::{GaussLegendre, QuadratureRule};
use nalgebra::{Complex, DMatrix};
use serde::Serialize;

/// omega_0(u, v) for vectors of C^m stored as real parts followed by imaginary parts.
pub fn omega0(u: &[f64], v: &[f64]) -> f64 {
    let m = u.len() / 2;
    (0..m).map(|j| u[j] * v[m + j] - u[m + j] * v[j]).sum()
}

/// Orthonormal basis v_1..v_{m-1} of the tangent space of S^{m-1} at x with
/// det[x, v_1, ..., v_{m-1}] = +1.
pub fn sphere_tangent_basis(x: &[f64]) -> Vec<Vec<f64>> {
    let m = x.len();
    let mut basis: Vec<Vec<f64>> = vec![x.to_vec()];
    // Coordinate vectors in order of increasing overlap with x keep Gram-Schmidt stable.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|a, b| x[*a].abs().partial_cmp(&x[*b].abs()).unwrap());
    for &k in &order {
        if basis.len() == m {
            break;
        }
        let mut v = vec![0.0; m];
        v[k] = 1.0;
        for _ in 0..2 {
            for b in &basis {
                let d: f64 = b.iter().zip(&v).map(|(p, q)| p * q).sum();
                for i in 0..m {
                    v[i] -= d * b[i];
                }
            }
        }
        let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if n > 1e-8 {
            basis.push(v.into_iter().map(|c| c / n).collect());
        }
    }
    let det = DMatrix::from_fn(m, m, |i, k| basis[k][i]).determinant();
    if det < 0.0 {
        let last = basis.last_mut().unwrap();
        last.iter_mut().for_each(|c| *c = -*c);
    }
    basis.remove(0);
    basis
}

/// arg det_C of m vectors of C^m.
pub fn lagrangian_angle_of_frame(frame: &[Vec<Complex<f64>>]) -> f64 {
    let m = frame.len();
    DMatrix::from_fn(m, m, |i, k| frame[k][i]).determinant().arg()
}

/// Analytic frame of L at (s, x): the inward radial field -dz/ds . x followed by
/// z . v_k for the oriented tangent basis of the sphere.
pub fn analytic_frame(neck: &Neck, s: f64, x: &[f64]) -> Vec<Vec<Complex<f64>>> {
    let z = neck.z(s);
    let dz = neck.dz(s);
    let mut frame = vec![dz.iter().zip(x).map(|(d, xj)| -d * *xj).collect::<Vec<_>>()];
    for v in sphere_tangent_basis(x) {
        frame.push(z.iter().zip(&v).map(|(zj, vj)| zj * *vj).collect());
    }
    frame
}

impl Neck {
    /// Induced metric of L in the coordinates (s, t) with x(t) = normalize(x + sum t_k v_k).
    pub fn metric(&self, s: f64, x: &[f64]) -> DMatrix<f64> {
        let frame = analytic_frame(self, s, x);
        let m = self.m();
        DMatrix::from_fn(m, m, |a, b| (0..m).map(|j| (frame[a][j].conj() * frame[b][j]).re).sum())
    }

    /// Lagrangian angle of L at (s, x) from the analytic frame.
    pub fn angle(&self, s: f64, x: &[f64]) -> f64 {
        lagrangian_angle_of_frame(&analytic_frame(self, s, x))
    }
}

/// Outcome of the finite-difference special Lagrangian check.
#[derive(Debug, Clone, Serialize)]
pub struct SpecialReport {
    pub samples: usize,
    pub step: f64,
    pub max_omega: f64,
    pub angle_mean: f64,
    pub angle_spread: f64,
    pub max_condition: f64,
}

/// Largest admissible condition number of a sampled frame metric.
pub const FRAME_CONDITION_CAP: f64 = 1e12;

pub(crate) fn local_map(neck: &Neck, s: f64, x: &[f64], basis: &[Vec<f64>], t: &[f64]) -> Vec<f64> {
    let m = x.len();
    let mut y: Vec<f64> = x.to_vec();
    for (k, v) in basis.iter().enumerate() {
        for i in 0..m {
            y[i] += t[k] * v[i];
        }
    }
    let n = y.iter().map(|c| c * c).sum::<f64>().sqrt();
    y.iter_mut().for_each(|c| *c /= n);
    embed(&neck.z(s), &y)
}

/// Central-difference frame of L at a sample, columns as real 2m-vectors.
pub fn fd_frame(neck: &Neck, s: f64, x: &[f64], h: f64) -> Vec<Vec<f64>> {
    let m = x.len();
    let basis = sphere_tangent_basis(x);
    let zero = vec![0.0; m - 1];
    let mut cols = Vec::with_capacity(m);
    let plus = local_map(neck, s + h, x, &basis, &zero);
    let minus = local_map(neck, s - h, x, &basis, &zero);
    cols.push(plus.iter().zip(&minus).map(|(a, b)| -(a - b) / (2.0 * h)).collect());
    for k in 0..m - 1 {
        let mut tp = zero.clone();
        let mut tm = zero.clone();
        tp[k] = h;
        tm[k] = -h;
        let plus = local_map(neck, s, x, &basis, &tp);
        let minus = local_map(neck, s, x, &basis, &tm);
        cols.push(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect());
    }
    cols
}

/// Builds central-difference frames at every sample and reports the largest
/// omega_0 residual and the spread of the Lagrangian angle.
pub fn special_check(neck: &Neck, samples: &[NeckPoint], h: f64) -> Result<SpecialReport> {
    if samples.is_empty() {
        return Err(Error::Parameter("special_check needs at least one sample".into()));
    }
    if !(h > 0.0) {
        return Err(Error::Parameter(format!("finite-difference step must be positive, got {h}")));
    }
    let m = neck.m();
    let mut max_omega = 0.0f64;
    let mut max_cond = 0.0f64;
    let mut angles = Vec::with_capacity(samples.len());
    for p in samples {
        let cols = fd_frame(neck, p.s, &p.x, h);
        for a in 0..m {
            for b in a + 1..m {
                max_omega = max_omega.max(omega0(&cols[a], &cols[b]).abs());
            }
        }
        let g = DMatrix::from_fn(m, m, |a, b| cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum::<f64>());
        let eig = g.symmetric_eigen().eigenvalues;
        let lo = eig.min();
        let hi = eig.max();
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if cond > FRAME_CONDITION_CAP {
            return Err(Error::Discretization(format!(
                "degenerate frame at s = {}: condition number {cond:e}",
                p.s
            )));
        }
        max_cond = max_cond.max(cond);
        let frame: Vec<Vec<Complex<f64>>> =
            cols.iter().map(|c| (0..m).map(|j| Complex::new(c[j], c[m + j])).collect()).collect();
        angles.push(lagrangian_angle_of_frame(&frame));
    }
    let mean = angles.iter().sum::<f64>() / angles.len() as f64;
    let lo = angles.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = angles.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(SpecialReport {
        samples: samples.len(),
        step: h,
        max_omega,
        angle_mean: mean,
        angle_spread: hi - lo,
        max_condition: max_cond,
    })
}

/// Integral of Im Omega_0 over the disk {z(0) . x : |x| <= 1} and its ratio to A.
#[derive(Debug, Clone, Serialize)]
pub struct FillingVolume {
    pub volume: f64,
    #[serde(rename = "A")]
    pub area: f64,
    pub ratio: f64,
}

pub fn filling_volume(neck: &Neck, rule: &QuadratureRule) -> Result<FillingVolume> {
    let m = neck.m();
    if rule.dim != m {
        return Err(Error::Parameter(format!("sphere rule of dimension {} for a neck with m = {m}", rule.dim)));
    }
    let z0 = neck.z(0.0);
    let gl = GaussLegendre::new(8);
    // Pullback of Omega_0 under x -> z(0) . x in polar coordinates (r, sigma):
    // the Jacobian is diag(z(0)), so the density is r^{m-1} prod z_j(0).
    let density = |_sigma: &[f64], r: f64| -> f64 {
        let prod = z0.iter().fold(Complex::new(1.0, 0.0), |acc, z| acc * z);
        prod.im * r.powi(m as i32 - 1)
    };
    let volume = rule.integrate(|sigma| gl.integrate(0.0, 1.0, |r| density(sigma, r)));
    Ok(FillingVolume { volume, area: neck.area, ratio: volume / neck.area })
}

/// Flux of grad F through the sphere |q| = r of the given end.
pub fn end_flux(neck: &Neck, end: End, r: f64, rule: &QuadratureRule) -> Result<f64> {
    let m = neck.m();
    let mut total = 0.0;
    for (sigma, w) in rule.nodes.iter().zip(&rule.weights) {
        let q: Vec<f64> = sigma.iter().map(|v| v * r).collect();
        let jet = neck.end_jet(end, &q)?;
        let radial: f64 = jet.grad.iter().zip(sigma).map(|(g, s)| g * s).sum();
        total += w * radial * r.powi(m as i32 - 1);
    }
    Ok(total)
}
