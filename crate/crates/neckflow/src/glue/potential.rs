//! The intermediate potential Q_eps(q) = eta(|q|) eps^2 F(q / eps) over each plane,
//! with eta = 1 - chi(eps^{-tau} |q|), and its gradient and Hessian.

use super::GlueProfile;
use crate::error::Result;
use crate::lawlor::{End, EndJet, Neck};
use nalgebra::DMatrix;

/// Value, gradient and Hessian of Q_eps at a point of a plane.
#[derive(Debug, Clone)]
pub struct PotentialJet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hessian: DMatrix<f64>,
    /// The neck jet at q / eps, present where Q does not vanish identically.
    pub neck: Option<EndJet>,
}

impl PotentialJet {
    fn zero(m: usize) -> Self {
        PotentialJet { value: 0.0, grad: vec![0.0; m], hessian: DMatrix::zeros(m, m), neck: None }
    }
}

/// Jet of Q_eps at q (ambient plane coordinates, |q| > eps R1).
pub fn q_jet(profile: &GlueProfile, neck: &Neck, end: End, q: &[f64]) -> Result<PotentialJet> {
    let m = q.len();
    let rr = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rr >= 2.0 * profile.band_inner() {
        return Ok(PotentialJet::zero(m));
    }
    let eps = profile.eps;
    let u: Vec<f64> = q.iter().map(|v| v / eps).collect();
    let jet = neck.end_jet(end, &u)?;
    // g(q) = eps^2 F(q / eps): grad g = eps p, Hess g = H.
    let g = eps * eps * jet.value;
    let dg: Vec<f64> = jet.grad.iter().map(|p| eps * p).collect();
    let (eta, d1, d2) = profile.eta_jet(rr);
    if d1 == 0.0 && d2 == 0.0 {
        let grad = dg.iter().map(|v| eta * v).collect();
        let hessian = &jet.hessian * eta;
        return Ok(PotentialJet { value: eta * g, grad, hessian, neck: Some(jet) });
    }
    let sigma: Vec<f64> = q.iter().map(|v| v / rr).collect();
    let deta: Vec<f64> = sigma.iter().map(|s| d1 * s).collect();
    let grad: Vec<f64> = (0..m).map(|i| eta * dg[i] + g * deta[i]).collect();
    let hessian = DMatrix::from_fn(m, m, |i, k| {
        let proj = if i == k { 1.0 } else { 0.0 } - sigma[i] * sigma[k];
        let hess_eta = d2 * sigma[i] * sigma[k] + d1 * proj / rr;
        eta * jet.hessian[(i, k)] + deta[i] * dg[k] + dg[i] * deta[k] + g * hess_eta
    });
    Ok(PotentialJet { value: eta * g, grad, hessian, neck: Some(jet) })
}

/// Q_eps(sigma, rr) for the plane of `end`.
pub fn q_potential(profile: &GlueProfile, neck: &Neck, end: End, sigma: &[f64], rr: f64) -> Result<f64> {
    let q: Vec<f64> = sigma.iter().map(|s| s * rr).collect();
    Ok(q_jet(profile, neck, end, &q)?.value)
}

/// d Q_eps / d eps at fixed ambient q by a central difference with step 1e-4 eps.
pub fn q_eps_derivative(profile: &GlueProfile, neck: &Neck, end: End, q: &[f64]) -> Result<f64> {
    let rr = q.iter().map(|v| v * v).sum::<f64>().sqrt();
    let de = 1e-4 * profile.eps;
    let hi = profile.with_eps(profile.eps + de);
    if rr >= 2.0 * hi.band_inner() {
        return Ok(0.0);
    }
    let lo = profile.with_eps(profile.eps - de);
    let vp = q_jet(&hi, neck, end, q)?.value;
    let vm = q_jet(&lo, neck, end, q)?.value;
    Ok((vp - vm) / (2.0 * de))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lawlor::NeckParams;

    fn setup() -> (GlueProfile, Neck) {
        (GlueProfile::standard(0.05), Neck::new(NeckParams::new(vec![0.9, 1.0, 1.2]).unwrap()))
    }

    #[test]
    fn jet_matches_differences_in_band() {
        let (p, n) = setup();
        let band = p.band_inner();
        let sigma = [0.48, 0.6, 0.64];
        for end in [End::Minus, End::Plus] {
            for &f in &[0.6, 1.3, 1.7] {
                let q: Vec<f64> = sigma.iter().map(|s| s * f * band).collect();
                let jet = q_jet(&p, &n, end, &q).unwrap();
                let h = 1e-6;
                for k in 0..3 {
                    let mut qp = q.clone();
                    let mut qm = q.clone();
                    qp[k] += h;
                    qm[k] -= h;
                    let jp = q_jet(&p, &n, end, &qp).unwrap();
                    let jm = q_jet(&p, &n, end, &qm).unwrap();
                    let g = (jp.value - jm.value) / (2.0 * h);
                    assert!((g - jet.grad[k]).abs() < 1e-9 * (1.0 + jet.grad[k].abs()), "grad: {g} {}", jet.grad[k]);
                    for i in 0..3 {
                        let hh = (jp.grad[i] - jm.grad[i]) / (2.0 * h);
                        assert!((hh - jet.hessian[(i, k)]).abs() < 1e-6, "hess: {hh} {}", jet.hessian[(i, k)]);
                    }
                }
            }
        }
    }

    #[test]
    fn vanishes_outside_band() {
        let (p, n) = setup();
        let v = q_potential(&p, &n, End::Minus, &[1.0, 0.0, 0.0], 3.0 * p.band_inner()).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn dilated_neck_inside_band() {
        let (p, n) = setup();
        let rr = 0.5 * p.band_inner();
        let sigma = [0.0, 0.6, 0.8];
        let v = q_potential(&p, &n, End::Plus, &sigma, rr).unwrap();
        let ptl = crate::lawlor::end_potential(&n, End::Plus, &sigma, rr / p.eps).unwrap();
        assert!((v - p.eps * p.eps * ptl).abs() < 1e-16);
    }

    #[test]
    fn eps_derivative_in_pure_neck() {
        let (p, n) = setup();
        let q = [0.2, 0.1, -0.15];
        for end in [End::Minus, End::Plus] {
            let d = q_eps_derivative(&p, &n, end, &q).unwrap();
            let jet = q_jet(&p, &n, end, &q).unwrap().neck.unwrap();
            let exact = match end {
                End::Minus => -2.0 * p.eps * jet.beta,
                End::Plus => -2.0 * p.eps * (jet.beta - n.c_plus),
            };
            assert!((d - exact).abs() < 1e-8, "{end:?}: {d} vs {exact}");
        }
    }
}
