//! The two ends of a Lawlor neck as graphs over their asymptotic planes.
//!
//! Write z_j(s) = |z_j| e^{i psi_j}. Over the plane R^m the lower end (s <= 0) is the
//! graph q + i p(q) with q_j = rho_j(s) x_j, rho_j = |z_j| cos psi_j and
//! p_j = q_j tan psi_j. The potential F with grad F = p is F = q.p / 2 - beta(s),
//! which vanishes at infinity. The upper end, rotated by e^{-i phi}, is the complex
//! conjugate of the lower end reflected in s, so its potential is the negative of
//! the lower one.

use super::Neck;
use crate::error::{Error, Result};
use nalgebra::DMatrix;

/// Which asymptotic plane: `Minus` is R^m, `Plus` is e^{i phi} R^m.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
pub enum End {
    Minus,
    Plus,
}

impl End {
    pub fn sign(self) -> f64 {
        match self {
            End::Minus => -1.0,
            End::Plus => 1.0,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            End::Minus => "-",
            End::Plus => "+",
        }
    }
}

/// Value, gradient and Hessian of an end potential at a point q of the plane,
/// together with the neck coordinates (s, x) of the corresponding point of L.
#[derive(Debug, Clone)]
pub struct EndJet {
    pub end: End,
    pub s: f64,
    pub x: Vec<f64>,
    pub value: f64,
    pub grad: Vec<f64>,
    pub hessian: DMatrix<f64>,
    /// beta_L at the neck point.
    pub beta: f64,
}

struct LowerProfile {
    psi: Vec<f64>,
    beta: f64,
    rho: Vec<f64>,
    drho: Vec<f64>,
    root_p: f64,
}

fn lower_profile(neck: &Neck, s: f64) -> LowerProfile {
    let (psi, beta) = neck.cache.eval(s);
    let root_p = neck.p(s).sqrt();
    let m = neck.m();
    let mut rho = Vec::with_capacity(m);
    let mut drho = Vec::with_capacity(m);
    for j in 0..m {
        let a = neck.params.a[j];
        let modz = (1.0 / a + s * s).sqrt();
        let dpsi = 1.0 / (modz * modz * root_p);
        let (sp, cp) = psi[j].sin_cos();
        rho.push(modz * cp);
        drho.push(s / modz * cp - modz * sp * dpsi);
    }
    LowerProfile { psi, beta, rho, drho, root_p }
}

/// Solves sum q_j^2 / rho_j(s)^2 = 1 for s <= 0.
fn locate(neck: &Neck, q: &[f64]) -> Result<f64> {
    let qn2: f64 = q.iter().map(|v| v * v).sum();
    if qn2 == 0.0 {
        return Err(Error::Geometry("the end chart is not defined at the origin; use a larger R1".into()));
    }
    let g = |s: f64| -> (f64, f64) {
        let pr = lower_profile(neck, s);
        let mut val = 0.0;
        let mut dval = 0.0;
        for j in 0..q.len() {
            let t = q[j] * q[j] / (pr.rho[j] * pr.rho[j]);
            val += t;
            dval += -2.0 * t * pr.drho[j] / pr.rho[j];
        }
        // log form: G(s) = ln g(s), G' = g'/g
        (val.ln(), dval / val)
    };
    let (g0, _) = g(0.0);
    if g0 < 0.0 {
        return Err(Error::Geometry(format!(
            "end chart not graphical at |q| = {:.6}: the point lies inside the neck; use a larger R1",
            qn2.sqrt()
        )));
    }
    let min_cos = neck.phi.iter().map(|p| (0.5 * p).cos()).fold(f64::INFINITY, f64::min);
    let mut lo = -(qn2.sqrt() / min_cos + 1.0);
    let mut hi = 0.0;
    // Initial guess from the conical asymptote rho ~ |s|.
    let mut s = (-qn2.sqrt()).clamp(lo, hi);
    for _ in 0..200 {
        let (val, dval) = g(s);
        if val.abs() < 1e-15 {
            return Ok(s);
        }
        if val > 0.0 {
            hi = s;
        } else {
            lo = s;
        }
        let mut next = s - val / dval;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = 0.5 * (lo + hi);
        }
        if (next - s).abs() <= 1e-15 * s.abs().max(1.0) {
            return Ok(next);
        }
        s = next;
    }
    if hi - lo < 1e-12 * s.abs().max(1.0) {
        return Ok(s);
    }
    Err(Error::NonConvergence { iterate: vec![s], residual: g(s).0, iterations: 200 })
}

fn lower_jet(neck: &Neck, q: &[f64]) -> Result<EndJet> {
    let m = neck.m();
    let s = locate(neck, q)?;
    let pr = lower_profile(neck, s);
    let x: Vec<f64> = (0..m).map(|j| q[j] / pr.rho[j]).collect();
    let tan: Vec<f64> = pr.psi.iter().map(|p| p.tan()).collect();
    let grad: Vec<f64> = (0..m).map(|j| q[j] * tan[j]).collect();
    let qp: f64 = (0..m).map(|j| q[j] * grad[j]).sum();
    let value = 0.5 * qp - pr.beta;
    let u: Vec<f64> = (0..m).map(|j| x[j] / pr.rho[j]).collect();
    let d: f64 = (0..m).map(|j| x[j] * x[j] * pr.drho[j] / pr.rho[j]).sum();
    let scale = 1.0 / (pr.root_p * d);
    let hessian = DMatrix::from_fn(m, m, |i, k| {
        let diag = if i == k { tan[i] } else { 0.0 };
        diag + scale * u[i] * u[k]
    });
    Ok(EndJet { end: End::Minus, s, x, value, grad, hessian, beta: pr.beta })
}

impl Neck {
    /// Jet of the end potential at q in the plane of `end` (rotated to R^m for `Plus`).
    pub fn end_jet(&self, end: End, q: &[f64]) -> Result<EndJet> {
        if q.len() != self.m() {
            return Err(Error::Precondition(format!("expected a point of R^{}, got {} coordinates", self.m(), q.len())));
        }
        let mut jet = lower_jet(self, q)?;
        if end == End::Plus {
            jet.end = End::Plus;
            jet.s = -jet.s;
            jet.value = -jet.value;
            jet.grad.iter_mut().for_each(|v| *v = -*v);
            jet.hessian = -jet.hessian;
            jet.beta = self.c_plus - jet.beta;
        }
        Ok(jet)
    }

    /// Ambient point of L over q in the plane of `end`, real parts then imaginary parts.
    pub fn end_point(&self, end: End, q: &[f64], grad: &[f64]) -> Vec<f64> {
        let m = self.m();
        let mut out = vec![0.0; 2 * m];
        for j in 0..m {
            match end {
                End::Minus => {
                    out[j] = q[j];
                    out[m + j] = grad[j];
                }
                End::Plus => {
                    let (sp, cp) = self.phi[j].sin_cos();
                    out[j] = cp * q[j] - sp * grad[j];
                    out[m + j] = sp * q[j] + cp * grad[j];
                }
            }
        }
        out
    }

    /// Value of the end potential on the sphere of radius r through a path
    /// integral of grad F: radially along `sigma0` from `r0` to `r`, then along
    /// the great circle from `sigma0` to `sigma` (`radial_first`), or in the
    /// other order. The starting value is the closed-form value at (sigma0, r0).
    pub fn end_potential_by_path(
        &self,
        end: End,
        sigma0: &[f64],
        r0: f64,
        sigma: &[f64],
        r: f64,
        radial_first: bool,
        tol: f64,
    ) -> Result<f64> {
        let start: Vec<f64> = sigma0.iter().map(|v| v * r0).collect();
        let mut value = self.end_jet(end, &start)?.value;
        let radial = |dir: &[f64], ra: f64, rb: f64| -> Result<f64> {
            let f = |t: f64| {
                let q: Vec<f64> = dir.iter().map(|v| v * t).collect();
                match self.end_jet(end, &q) {
                    Ok(j) => j.grad.iter().zip(dir).map(|(g, d)| g * d).sum(),
                    Err(_) => f64::NAN,
                }
            };
            let lo = ra.min(rb);
            let hi = ra.max(rb);
            let q = crate::numerics::integrate_line(f, lo, hi, tol)?;
            Ok(if rb >= ra { q.value } else { -q.value })
        };
        let arc = |radius: f64| -> Result<f64> {
            let cosang: f64 = sigma0.iter().zip(sigma).map(|(a, b)| a * b).sum::<f64>().clamp(-1.0, 1.0);
            let ang = cosang.acos();
            if ang == 0.0 {
                return Ok(0.0);
            }
            let perp: Vec<f64> = sigma.iter().zip(sigma0).map(|(b, a)| b - cosang * a).collect();
            let pn = perp.iter().map(|v| v * v).sum::<f64>().sqrt();
            let e2: Vec<f64> = perp.iter().map(|v| v / pn).collect();
            let f = |t: f64| {
                let (st, ct) = t.sin_cos();
                let q: Vec<f64> = (0..sigma0.len()).map(|k| radius * (ct * sigma0[k] + st * e2[k])).collect();
                let tangent: Vec<f64> = (0..sigma0.len()).map(|k| radius * (-st * sigma0[k] + ct * e2[k])).collect();
                match self.end_jet(end, &q) {
                    Ok(j) => j.grad.iter().zip(&tangent).map(|(g, d)| g * d).sum(),
                    Err(_) => f64::NAN,
                }
            };
            Ok(crate::numerics::integrate_line(f, 0.0, ang, tol)?.value)
        };
        if radial_first {
            value += radial(sigma0, r0, r)?;
            value += arc(r)?;
        } else {
            value += arc(r0)?;
            value += radial(sigma, r0, r)?;
        }
        Ok(value)
    }
}

/// The end potential ptl(sigma, r) of the chosen end.
pub fn end_potential(neck: &Neck, end: End, sigma: &[f64], r: f64) -> Result<f64> {
    let norm = sigma.iter().map(|v| v * v).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(Error::Precondition(format!("sigma must be a unit vector, |sigma| = {norm}")));
    }
    let q: Vec<f64> = sigma.iter().map(|v| v * r).collect();
    Ok(neck.end_jet(end, &q)?.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lawlor::NeckParams;

    fn neck() -> Neck {
        Neck::new(NeckParams::new(vec![0.8, 1.0, 1.5]).unwrap())
    }

    #[test]
    fn jet_reproduces_neck_point() {
        let n = neck();
        let q = [1.3, -0.7, 2.2];
        for end in [End::Minus, End::Plus] {
            let jet = n.end_jet(end, &q).unwrap();
            let p = n.point(jet.s, &jet.x).unwrap();
            let amb = n.end_point(end, &q, &jet.grad);
            for k in 0..6 {
                assert!((p.point[k] - amb[k]).abs() < 1e-12, "{end:?} {k}: {} vs {}", p.point[k], amb[k]);
            }
        }
    }

    #[test]
    fn gradient_and_hessian_match_differences() {
        let n = neck();
        let q = [1.1, 0.9, -1.7];
        let h = 1e-5;
        for end in [End::Minus, End::Plus] {
            let jet = n.end_jet(end, &q).unwrap();
            for k in 0..3 {
                let mut qp = q;
                let mut qm = q;
                qp[k] += h;
                qm[k] -= h;
                let jp = n.end_jet(end, &qp).unwrap();
                let jm = n.end_jet(end, &qm).unwrap();
                let fd = (jp.value - jm.value) / (2.0 * h);
                assert!((fd - jet.grad[k]).abs() < 1e-8, "grad {k}: {fd} vs {}", jet.grad[k]);
                for i in 0..3 {
                    let fdh = (jp.grad[i] - jm.grad[i]) / (2.0 * h);
                    assert!((fdh - jet.hessian[(i, k)]).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn neck_is_special_in_graph_chart() {
        let n = neck();
        let q = [0.4, 1.9, 0.2];
        let jet = n.end_jet(End::Minus, &q).unwrap();
        let eig = jet.hessian.clone().symmetric_eigen().eigenvalues;
        let theta: f64 = eig.iter().map(|v| v.atan()).sum();
        assert!(theta.abs() < 1e-12, "theta = {theta}");
    }

    #[test]
    fn inside_neck_rejected() {
        let n = neck();
        assert!(matches!(n.end_jet(End::Minus, &[0.01, 0.0, 0.0]), Err(Error::Geometry(_))));
    }

    #[test]
    fn path_independence() {
        let n = neck();
        let s0 = [1.0, 0.0, 0.0];
        let s1 = [0.0, 0.6, 0.8];
        let a = n.end_potential_by_path(End::Minus, &s0, 20.0, &s1, 5.0, true, 1e-12).unwrap();
        let b = n.end_potential_by_path(End::Minus, &s0, 20.0, &s1, 5.0, false, 1e-12).unwrap();
        let exact = end_potential(&n, End::Minus, &s1, 5.0).unwrap();
        assert!((a - b).abs() < 1e-10);
        assert!((a - exact).abs() < 1e-10);
    }
}
