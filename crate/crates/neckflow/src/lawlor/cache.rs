//! Running phases psi_j(s) and the Liouville potential beta(s), tabulated once per neck.
//!
//! The integrals are taken in the variable v = atan2(1, -s) in [0, pi/2] (s <= 0),
//! where both integrands are analytic up to the endpoints. Knot values on a uniform
//! v-grid are accumulated with Gauss-Legendre panels; an evaluation adds the partial
//! panel with the same rule, so the tabulated functions are smooth in s. Values for
//! s > 0 follow from the evenness of the integrands.

use crate::numerics::GaussLegendre;
use std::f64::consts::FRAC_PI_2;

const PANELS: usize = 128;
const ORDER: usize = 16;

#[derive(Debug, Clone)]
pub struct PhaseCache {
    a: Vec<f64>,
    esym: Vec<f64>,
    gl: GaussLegendre,
    dv: f64,
    /// cum[k] = (psi_1..psi_m, beta) at v = k * dv.
    cum: Vec<Vec<f64>>,
}

/// Elementary symmetric polynomials e_1..e_m of `a`.
pub(crate) fn elementary_symmetric(a: &[f64]) -> Vec<f64> {
    let m = a.len();
    let mut e = vec![0.0; m + 1];
    e[0] = 1.0;
    for &ai in a {
        for k in (1..=m).rev() {
            e[k] += ai * e[k - 1];
        }
    }
    e[1..].to_vec()
}

impl PhaseCache {
    pub fn new(a: &[f64]) -> Self {
        let esym = elementary_symmetric(a);
        let gl = GaussLegendre::new(ORDER);
        let dv = FRAC_PI_2 / PANELS as f64;
        let m = a.len();
        let mut cache = PhaseCache { a: a.to_vec(), esym, gl, dv, cum: Vec::with_capacity(PANELS + 1) };
        let mut acc = vec![0.0; m + 1];
        cache.cum.push(acc.clone());
        for k in 0..PANELS {
            let v0 = k as f64 * dv;
            let part = cache.panel(v0, v0 + dv);
            for (s, p) in acc.iter_mut().zip(part) {
                *s += p;
            }
            cache.cum.push(acc.clone());
        }
        cache
    }

    pub fn m(&self) -> usize {
        self.a.len()
    }

    /// Integrands in v: psi_j for j < m, beta at index m.
    fn integrands(&self, v: f64, out: &mut [f64]) {
        let m = self.a.len();
        let (sv, cv) = v.sin_cos();
        let s2 = sv * sv;
        let c2 = cv * cv;
        // S(v) = sum_k e_k cos^{2k-2} sin^{2m-2k}
        let mut big_s = 0.0;
        let mut cpow = 1.0;
        for k in 1..=m {
            big_s += self.esym[k - 1] * cpow * s2.powi((m - k) as i32);
            cpow *= c2;
        }
        let root = big_s.sqrt();
        let sm1 = sv.powi(m as i32 - 1);
        for j in 0..m {
            let aj = self.a[j];
            out[j] = aj * sm1 / ((s2 + aj * c2) * root);
        }
        out[m] = sv.powi(m as i32 - 3) / (2.0 * root);
    }

    fn panel(&self, v0: f64, v1: f64) -> Vec<f64> {
        let m = self.a.len();
        let mut out = vec![0.0; m + 1];
        let mut buf = vec![0.0; m + 1];
        for (v, w) in self.gl.mapped(v0, v1) {
            self.integrands(v, &mut buf);
            for (o, b) in out.iter_mut().zip(&buf) {
                *o += w * b;
            }
        }
        out
    }

    /// (psi_1..psi_m, beta) for s <= 0.
    fn lower(&self, s: f64) -> Vec<f64> {
        debug_assert!(s <= 0.0);
        let v = 1f64.atan2(-s);
        let k = ((v / self.dv).floor() as usize).min(PANELS - 1);
        let v0 = k as f64 * self.dv;
        let mut out = self.cum[k].clone();
        if v > v0 {
            for (o, p) in out.iter_mut().zip(self.panel(v0, v)) {
                *o += p;
            }
        }
        out
    }

    /// Half of each total phase, psi_j(0).
    pub fn half_phases(&self) -> Vec<f64> {
        self.cum[PANELS][..self.a.len()].to_vec()
    }

    /// beta(0), half of c_+.
    pub fn half_constant(&self) -> f64 {
        self.cum[PANELS][self.a.len()]
    }

    /// (psi(s), beta(s)) for any real s.
    pub fn eval(&self, s: f64) -> (Vec<f64>, f64) {
        let m = self.a.len();
        if s <= 0.0 {
            let mut v = self.lower(s);
            let b = v.pop().unwrap();
            (v, b)
        } else {
            let mirrored = self.lower(-s);
            let half = &self.cum[PANELS];
            let psi = (0..m).map(|j| 2.0 * half[j] - mirrored[j]).collect();
            (psi, 2.0 * half[m] - mirrored[m])
        }
    }

    /// psi_j(s) - phi_j for s >= 0 without cancellation (equals -psi_j(-s)).
    pub fn upper_deficit(&self, s: f64) -> (Vec<f64>, f64) {
        let mut v = self.lower(-s.abs());
        let b = v.pop().unwrap();
        (v.into_iter().map(|x| -x).collect(), -b)
    }

    /// P_a(y) through elementary symmetric polynomials.
    pub fn p_poly(&self, y: f64) -> f64 {
        p_from_esym(&self.esym, y)
    }
}

pub(crate) fn p_from_esym(esym: &[f64], y: f64) -> f64 {
    let y2 = y * y;
    let mut acc = 0.0;
    for e in esym.iter().rev() {
        acc = acc * y2 + e;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_line;

    #[test]
    fn cached_phases_match_adaptive_quadrature() {
        let a = [0.7, 1.3, 2.1];
        let cache = PhaseCache::new(&a);
        for &s in &[-50.0, -3.0, -0.4, 0.0, 0.2, 1.7, 30.0] {
            let (psi, beta) = cache.eval(s);
            for j in 0..3 {
                let aj = a[j];
                let f = |y: f64| aj / ((1.0 + aj * y * y) * cache.p_poly(y).sqrt());
                let q = integrate_line(f, f64::NEG_INFINITY, s, 1e-14).unwrap().value;
                assert!((psi[j] - q).abs() < 1e-13, "s={s} j={j}: {} vs {}", psi[j], q);
            }
            let g = |y: f64| 0.5 / cache.p_poly(y).sqrt();
            let qb = integrate_line(g, f64::NEG_INFINITY, s, 1e-14).unwrap().value;
            assert!((beta - qb).abs() < 1e-13);
        }
    }

    #[test]
    fn elementary_symmetric_values() {
        let e = elementary_symmetric(&[1.0, 2.0, 3.0]);
        assert_eq!(e, vec![6.0, 11.0, 6.0]);
    }
}
