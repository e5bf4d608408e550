//! The lattice Gamma of C^m = R^{2m} generated by a basis of the plane R^m and a
//! basis of the plane e^{i phi} R^m, and reduction of points modulo Gamma.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct TorusLattice {
    pub m: usize,
    pub side1: f64,
    pub side2: f64,
    pub phi: Vec<f64>,
    /// Generators as 2m-vectors (real parts then imaginary parts).
    pub generators: Vec<Vec<f64>>,
    #[serde(skip)]
    inverse: DMatrix<f64>,
}

impl TorusLattice {
    /// Generators side1 e_j of the first plane and side2 e^{i phi_j} e_j of the second.
    pub fn new(phi: &[f64], side1: f64, side2: f64) -> Result<Self> {
        let m = phi.len();
        if !(side1 > 0.0 && side2 > 0.0) {
            return Err(Error::Lattice(format!("lattice sides must be positive, got {side1}, {side2}")));
        }
        let mut generators = Vec::with_capacity(2 * m);
        for j in 0..m {
            let mut g = vec![0.0; 2 * m];
            g[j] = side1;
            generators.push(g);
        }
        for (j, p) in phi.iter().enumerate() {
            let mut g = vec![0.0; 2 * m];
            g[j] = side2 * p.cos();
            g[m + j] = side2 * p.sin();
            generators.push(g);
        }
        let basis = DMatrix::from_fn(2 * m, 2 * m, |i, k| generators[k][i]);
        let det = basis.determinant();
        if det.abs() < 1e-12 * side1.powi(m as i32) * side2.powi(m as i32) {
            return Err(Error::Lattice(
                "the two planes do not span C^m: every angle must lie strictly inside (0, pi)".into(),
            ));
        }
        let inverse = basis.try_inverse().ok_or_else(|| Error::Lattice("singular lattice basis".into()))?;
        Ok(TorusLattice { m, side1, side2, phi: phi.to_vec(), generators, inverse })
    }

    /// Volume of the first torus (the image of R^m).
    pub fn volume1(&self) -> f64 {
        self.side1.powi(self.m as i32)
    }

    /// Volume of the second torus (the image of e^{i phi} R^m).
    pub fn volume2(&self) -> f64 {
        self.side2.powi(self.m as i32)
    }

    /// Representative of y modulo Gamma in the fundamental parallelepiped.
    pub fn reduce(&self, y: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(y);
        let c = &self.inverse * v;
        let frac: Vec<f64> = c.iter().map(|x| x - x.floor()).collect();
        let n = 2 * self.m;
        (0..n).map(|i| (0..n).map(|k| self.generators[k][i] * frac[k]).sum()).collect()
    }

    /// Monte Carlo estimate of the volume of the fundamental domain of one of the
    /// two planar lattices: uniform points of a box in the plane are mapped into
    /// C^m and counted when their coordinates in the full generator basis lie in
    /// the unit cell of that plane.
    pub fn monte_carlo_volume(&self, component: usize, samples: usize, seed: u64) -> f64 {
        let m = self.m;
        let side = if component == 1 { self.side1 } else { self.side2 };
        let (lo, hi) = (-0.25 * side, 1.25 * side);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut hits = 0usize;
        for _ in 0..samples {
            let q: Vec<f64> = (0..m).map(|_| rng.gen_range(lo..hi)).collect();
            let mut y = DVector::zeros(2 * m);
            for j in 0..m {
                if component == 1 {
                    y[j] = q[j];
                } else {
                    y[j] = q[j] * self.phi[j].cos();
                    y[m + j] = q[j] * self.phi[j].sin();
                }
            }
            let c = &self.inverse * y;
            let offset = if component == 1 { 0 } else { m };
            if (0..m).all(|j| (0.0..1.0).contains(&c[offset + j])) {
                hits += 1;
            }
        }
        (hi - lo).powi(m as i32) * hits as f64 / samples as f64
    }
}
