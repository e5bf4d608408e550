//! The graph of outer components and intersection points: incidence matrix, Gram
//! matrix B^T V^{-1} B, tree test and the time-dependent matching constants C_b.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Largest admissible condition number of the Gram matrix.
pub const GRAM_CONDITION_CAP: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub volume: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub id: String,
    pub tail: String,
    pub head: String,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DesingGraph {
    pub vertices: Vec<Vertex>,
    pub edges: Vec<Edge>,
}

/// Gram matrix with its symmetry defect and smallest eigenvalue.
#[derive(Debug, Clone)]
pub struct Gram {
    pub matrix: DMatrix<f64>,
    pub asymmetry: f64,
    pub min_eigenvalue: f64,
    pub condition: f64,
}

impl DesingGraph {
    /// Two tori of volumes V1, V2 meeting at one point with constant c, edge from v1 to v2.
    pub fn torus(v1: f64, v2: f64, c: f64) -> Self {
        DesingGraph {
            vertices: vec![Vertex { id: "v1".into(), volume: v1 }, Vertex { id: "v2".into(), volume: v2 }],
            edges: vec![Edge { id: "e1".into(), tail: "v1".into(), head: "v2".into(), c }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.vertices.is_empty() {
            return Err(Error::Parameter("graph has no vertices".into()));
        }
        for v in &self.vertices {
            if !(v.volume > 0.0) {
                return Err(Error::Parameter(format!("vertex {} has non-positive volume {}", v.id, v.volume)));
            }
        }
        for e in &self.edges {
            if !(e.c > 0.0) {
                return Err(Error::Parameter(format!("edge {} has non-positive constant {}", e.id, e.c)));
            }
            self.index(&e.tail)?;
            self.index(&e.head)?;
        }
        Ok(())
    }

    fn index(&self, id: &str) -> Result<usize> {
        self.vertices
            .iter()
            .position(|v| v.id == id)
            .ok_or_else(|| Error::Parameter(format!("edge refers to unknown vertex {id}")))
    }

    /// B_{bj} = +1 if b is the head of j, -1 if b is its tail (a self-loop gives 0).
    pub fn incidence(&self) -> Result<DMatrix<f64>> {
        self.validate()?;
        let mut b = DMatrix::zeros(self.vertices.len(), self.edges.len());
        for (j, e) in self.edges.iter().enumerate() {
            b[(self.index(&e.head)?, j)] += 1.0;
            b[(self.index(&e.tail)?, j)] -= 1.0;
        }
        Ok(b)
    }

    /// B^T V^{-1} B.
    pub fn gram(&self) -> Result<Gram> {
        let b = self.incidence()?;
        let vinv = DMatrix::from_diagonal(&DVector::from_iterator(
            self.vertices.len(),
            self.vertices.iter().map(|v| 1.0 / v.volume),
        ));
        let g = b.transpose() * vinv * &b;
        let asymmetry = (&g - g.transpose()).abs().max();
        let eig = g.clone().symmetric_eigen().eigenvalues;
        let (lo, hi) = if eig.is_empty() { (0.0, 0.0) } else { (eig.min(), eig.max()) };
        let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        Ok(Gram { matrix: g, asymmetry, min_eigenvalue: lo, condition })
    }

    /// True iff the underlying undirected graph is connected and acyclic.
    pub fn is_tree(&self) -> bool {
        let n = self.vertices.len();
        if n == 0 || self.edges.len() + 1 != n {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let next = p[y];
                p[y] = r;
                y = next;
            }
            r
        }
        for e in &self.edges {
            let (Ok(a), Ok(b)) = (self.index(&e.tail), self.index(&e.head)) else {
                return false;
            };
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra == rb {
                return false;
            }
            parent[ra] = rb;
        }
        true
    }

    /// C = V^{-1} B (B^T V^{-1} B)^{-1} (c_j rate_j)_j.
    pub fn solve_constants(&self, rates: &[f64]) -> Result<Vec<f64>> {
        if rates.len() != self.edges.len() {
            return Err(Error::Parameter(format!("expected {} rates, got {}", self.edges.len(), rates.len())));
        }
        let gram = self.gram()?;
        if !(gram.condition < GRAM_CONDITION_CAP) {
            return Err(Error::Obstruction(format!(
                "B^T V^-1 B is singular (condition {:e}): every tip region must connect to two different components",
                gram.condition
            )));
        }
        let rhs = DVector::from_iterator(self.edges.len(), self.edges.iter().zip(rates).map(|(e, r)| e.c * r));
        let chol = gram
            .matrix
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Obstruction("Gram matrix is not positive definite".into()))?;
        let y = chol.solve(&rhs);
        let b = self.incidence()?;
        let by = b * y;
        Ok(self.vertices.iter().zip(by.iter()).map(|(v, x)| x / v.volume).collect())
    }

    /// B^T C - (c_j rate_j)_j, the residual of the matching equations.
    pub fn matching_residual(&self, constants: &[f64], rates: &[f64]) -> Result<Vec<f64>> {
        let b = self.incidence()?;
        let c = DVector::from_column_slice(constants);
        let lhs = b.transpose() * c;
        Ok(lhs.iter().zip(self.edges.iter().zip(rates)).map(|(l, (e, r))| l - e.c * r).collect())
    }
}
