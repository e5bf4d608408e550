//! The sampled immersion of N^eps: the dilated neck on the tip, graphs of Q_eps over
//! the two planes on the intermediate region, and the flat tori outside the balls of
//! radius R2, all reduced modulo the lattice.

use super::potential::q_jet;
use super::{GlueProfile, TorusLattice};
use crate::error::{Error, Result};
use crate::lawlor::{fd_frame, lagrangian_angle_of_frame, local_map, sphere_tangent_basis, End, Neck};
use crate::numerics::{bracketed_root, sphere_area, sphere_rule, GaussLegendre};
use nalgebra::{Complex, DMatrix};
use rayon::prelude::*;
use serde::Serialize;
use std::sync::Arc;

/// Region tags: the tip P, the intermediate annuli over each plane and the outer tori.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Region {
    P,
    #[serde(rename = "Q-")]
    QMinus,
    #[serde(rename = "Q+")]
    QPlus,
    O1,
    O2,
}

impl Region {
    pub fn label(self) -> &'static str {
        match self {
            Region::P => "P",
            Region::QMinus => "Q-",
            Region::QPlus => "Q+",
            Region::O1 => "O1",
            Region::O2 => "O2",
        }
    }

    pub fn intermediate(end: End) -> Self {
        match end {
            End::Minus => Region::QMinus,
            End::Plus => Region::QPlus,
        }
    }

    pub fn outer(end: End) -> Self {
        match end {
            End::Minus => Region::O1,
            End::Plus => Region::O2,
        }
    }
}

/// Local chart of a sample, used by the finite-difference evaluators.
#[derive(Debug, Clone)]
pub enum Chart {
    /// Neck coordinates (s, x) of the undilated neck.
    Tip { s: f64, x: Vec<f64> },
    /// Ambient coordinates q of the plane of `end` (rotated to R^m for the upper end).
    Graph { end: End, q: Vec<f64> },
    /// A point of the plane of `end` outside the ball of radius R2.
    Outer { end: End, q: Vec<f64> },
}

#[derive(Debug, Clone)]
pub struct Sample {
    pub tag: Region,
    /// Tip: (s, x); intermediate: (sigma, r) with r the intrinsic radius; outer: plane coordinates.
    pub coords: Vec<f64>,
    pub chart: Chart,
    /// Ambient point reduced modulo the lattice.
    pub point: Vec<f64>,
    /// Induced metric in the chart coordinates, row-major.
    pub metric: Vec<f64>,
    pub theta: f64,
    pub norm_a: f64,
    pub rho: f64,
    /// Quadrature weight for dV of the induced metric (zero for outer samples).
    pub weight: f64,
    /// Ambient distance from the intersection point, measured in the plane chart
    /// (tip samples use eps times the distance on L).
    pub radius: f64,
    /// beta_L at the neck point when the sample lies on the neck or its exact graph.
    pub beta: Option<f64>,
}

/// Sampling density of a mesh.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Resolution {
    /// Level of the sphere rule used on every sphere factor.
    pub sphere_level: usize,
    /// Gauss-Legendre order on each radial panel.
    pub radial_order: usize,
    /// Panels per unit of log radius on the intermediate region.
    pub panels_per_log: f64,
    pub tip_panels: usize,
    pub tip_order: usize,
    /// Representative samples per outer torus.
    pub outer_samples: usize,
    /// Relative finite-difference step for the curvature of graph samples.
    pub fd_step: f64,
    /// Finite-difference step in neck coordinates for the curvature of tip samples.
    pub tip_step: f64,
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution {
            sphere_level: 8,
            radial_order: 16,
            panels_per_log: 1.5,
            tip_panels: 4,
            tip_order: 16,
            outer_samples: 8,
            fd_step: 1e-4,
            tip_step: 1e-3,
        }
    }
}

impl Resolution {
    /// A light resolution for quick runs and tests.
    pub fn coarse() -> Self {
        Resolution { sphere_level: 4, radial_order: 8, panels_per_log: 1.0, tip_panels: 2, tip_order: 8, ..Default::default() }
    }
}

#[derive(Debug, Clone)]
pub struct MeshedImmersion {
    pub profile: GlueProfile,
    pub neck: Arc<Neck>,
    pub lattice: TorusLattice,
    pub resolution: Resolution,
    pub samples: Vec<Sample>,
    /// V1, V2: volumes of the two flat tori.
    pub volumes: [f64; 2],
    /// Volumes of the outer regions O1, O2 (the tori minus the balls of radius R2).
    pub outer_volumes: [f64; 2],
    /// Number of sphere nodes and radial nodes per intermediate annulus.
    pub sphere_nodes: usize,
    pub radial_nodes: usize,
    pub tip_nodes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeshSummary {
    pub eps: f64,
    pub sup_theta: f64,
    #[serde(rename = "sup_normA")]
    pub sup_norm_a: f64,
    #[serde(rename = "V1")]
    pub v1: f64,
    #[serde(rename = "V2")]
    pub v2: f64,
    pub samples: usize,
    pub volume: f64,
}

impl MeshedImmersion {
    pub fn m(&self) -> usize {
        self.profile.m
    }

    /// sup |theta| and sup |A| over all samples.
    pub fn summary(&self) -> MeshSummary {
        let sup_theta = self.samples.iter().map(|s| s.theta.abs()).fold(0.0, f64::max);
        let sup_a = self.samples.iter().map(|s| s.norm_a).fold(0.0, f64::max);
        MeshSummary {
            eps: self.profile.eps,
            sup_theta,
            sup_norm_a: sup_a,
            v1: self.volumes[0],
            v2: self.volumes[1],
            samples: self.samples.len(),
            volume: self.volume(),
        }
    }

    /// Volume of N^eps: mesh quadrature plus the exact outer volumes.
    pub fn volume(&self) -> f64 {
        let w: Vec<f64> = self.samples.iter().map(|s| s.weight).collect();
        crate::numerics::pairwise_sum(&w) + self.outer_volumes[0] + self.outer_volumes[1]
    }

    /// Largest |A| on each region.
    pub fn region_sup(&self, tag: Region, f: impl Fn(&Sample) -> f64) -> f64 {
        self.samples.iter().filter(|s| s.tag == tag).map(|s| f(s).abs()).fold(0.0, f64::max)
    }

    /// Sum of the quadrature weights of one region.
    pub fn region_volume(&self, tag: Region) -> f64 {
        let w: Vec<f64> = self.samples.iter().filter(|s| s.tag == tag).map(|s| s.weight).collect();
        crate::numerics::pairwise_sum(&w)
    }

    /// Ambient point of the sample before reduction modulo the lattice.
    pub fn unreduced_point(&self, chart: &Chart) -> Result<Vec<f64>> {
        match chart {
            Chart::Tip { s, x } => {
                let p = self.neck.point(*s, x)?;
                Ok(p.point.iter().map(|v| v * self.profile.eps).collect())
            }
            Chart::Graph { end, q } => {
                let jet = q_jet(&self.profile, &self.neck, *end, q)?;
                Ok(self.neck.end_point(*end, q, &jet.grad))
            }
            Chart::Outer { end, q } => Ok(self.neck.end_point(*end, q, &vec![0.0; q.len()])),
        }
    }
}

/// |A| from the Jacobian columns and second derivatives of an immersion into R^{2m}.
pub fn second_fundamental_norm(jac: &[Vec<f64>], second: &[Vec<Vec<f64>>]) -> Result<f64> {
    let m = jac.len();
    let n = jac[0].len();
    let g = DMatrix::from_fn(m, m, |a, b| jac[a].iter().zip(&jac[b]).map(|(u, v)| u * v).sum::<f64>());
    let ginv = g
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Discretization("degenerate Jacobian in the curvature evaluation".into()))?;
    // Normal components: A_ij = B_ij - J g^{-1} J^T B_ij.
    let mut normal = vec![vec![vec![0.0; n]; m]; m];
    for i in 0..m {
        for j in 0..m {
            let b = &second[i][j];
            let coef: Vec<f64> = (0..m).map(|a| jac[a].iter().zip(b).map(|(u, v)| u * v).sum()).collect();
            let sol: Vec<f64> = (0..m).map(|a| (0..m).map(|c| ginv[(a, c)] * coef[c]).sum()).collect();
            for k in 0..n {
                let tang: f64 = (0..m).map(|a| sol[a] * jac[a][k]).sum();
                normal[i][j][k] = b[k] - tang;
            }
        }
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                for l in 0..m {
                    let w = ginv[(i, k)] * ginv[(j, l)];
                    if w == 0.0 {
                        continue;
                    }
                    let dot: f64 = normal[i][j].iter().zip(&normal[k][l]).map(|(u, v)| u * v).sum();
                    total += w * dot;
                }
            }
        }
    }
    Ok(total.max(0.0).sqrt())
}

/// |A| of a map R^m -> R^{2m} at a point by central differences with step h.
pub fn fd_second_fundamental<F: Fn(&[f64]) -> Vec<f64>>(map: F, at: &[f64], h: f64) -> Result<f64> {
    let m = at.len();
    let center = map(at);
    let shifted = |d: &[(usize, f64)]| {
        let mut y = at.to_vec();
        for (k, v) in d {
            y[*k] += v;
        }
        map(&y)
    };
    let mut jac = Vec::with_capacity(m);
    let mut plus = Vec::with_capacity(m);
    let mut minus = Vec::with_capacity(m);
    for k in 0..m {
        let p = shifted(&[(k, h)]);
        let q = shifted(&[(k, -h)]);
        jac.push(p.iter().zip(&q).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<f64>>());
        plus.push(p);
        minus.push(q);
    }
    let n = center.len();
    let mut second = vec![vec![vec![0.0; n]; m]; m];
    for i in 0..m {
        second[i][i] = (0..n).map(|k| (plus[i][k] - 2.0 * center[k] + minus[i][k]) / (h * h)).collect();
        for j in i + 1..m {
            let pp = shifted(&[(i, h), (j, h)]);
            let pm = shifted(&[(i, h), (j, -h)]);
            let mp = shifted(&[(i, -h), (j, h)]);
            let mm = shifted(&[(i, -h), (j, -h)]);
            let v: Vec<f64> = (0..n).map(|k| (pp[k] - pm[k] - mp[k] + mm[k]) / (4.0 * h * h)).collect();
            second[i][j] = v.clone();
            second[j][i] = v;
        }
    }
    second_fundamental_norm(&jac, &second)
}

/// Central-difference Jacobian of a map R^m -> R^{2m}; returns the metric J^T J.
pub fn fd_metric<F: Fn(&[f64]) -> Vec<f64>>(map: F, at: &[f64], h: f64) -> DMatrix<f64> {
    let m = at.len();
    let cols: Vec<Vec<f64>> = (0..m)
        .map(|k| {
            let mut p = at.to_vec();
            let mut q = at.to_vec();
            p[k] += h;
            q[k] -= h;
            let a = map(&p);
            let b = map(&q);
            a.iter().zip(&b).map(|(x, y)| (x - y) / (2.0 * h)).collect()
        })
        .collect();
    DMatrix::from_fn(m, m, |a, b| cols[a].iter().zip(&cols[b]).map(|(u, v)| u * v).sum::<f64>())
}

fn sym_angle(h: &DMatrix<f64>) -> f64 {
    h.clone().symmetric_eigen().eigenvalues.iter().map(|v| v.atan()).sum()
}

/// Lagrangian angle of the graph of grad Q_eps over the plane of `end` at q:
/// the sum of arctan of the Hessian eigenvalues, zero where Q vanishes.
pub fn graph_angle(profile: &GlueProfile, neck: &Neck, end: End, q: &[f64]) -> Result<f64> {
    let jet = q_jet(profile, neck, end, q)?;
    Ok(if jet.neck.is_some() { sym_angle(&jet.hessian) } else { 0.0 })
}

fn flatten(g: &DMatrix<f64>) -> Vec<f64> {
    let m = g.nrows();
    (0..m * m).map(|k| g[(k / m, k % m)]).collect()
}

/// Half-length S(x) of the tip: the neck parameter at which the lower end chart
/// reaches |q| = R1.
pub fn tip_half_length(neck: &Neck, r1: f64, x: &[f64]) -> Result<f64> {
    let radius2 = |s: f64| -> f64 {
        let z = neck.z(s);
        z.iter().zip(x).map(|(zj, xj)| (zj.re * xj).powi(2)).sum()
    };
    if radius2(0.0) >= r1 * r1 {
        return Err(Error::Geometry(format!(
            "the neck waist reaches |q| = {:.6} >= R1 = {r1}: the tip does not fit, use a larger R1",
            radius2(0.0).sqrt()
        )));
    }
    let min_cos = neck.phi.iter().map(|p| (0.5 * p).cos()).fold(f64::INFINITY, f64::min);
    let hi = r1 / min_cos + 1.0;
    bracketed_root(|s| radius2(-s) - r1 * r1, 0.0, hi, 1e-15)
}

fn tip_norm_a(neck: &Neck, eps: f64, s: f64, x: &[f64], h: f64) -> Result<f64> {
    let basis = sphere_tangent_basis(x);
    let map = |c: &[f64]| -> Vec<f64> {
        local_map(neck, c[0], x, &basis, &c[1..]).into_iter().map(|v| v * eps).collect()
    };
    let mut at = vec![0.0; x.len()];
    at[0] = s;
    fd_second_fundamental(map, &at, h)
}

/// |A| of the graph of grad Q at q: Jacobian (I, Hess Q) and second derivatives
/// (0, d_k Hess Q) from central differences of the Hessian.
fn graph_norm_a(profile: &GlueProfile, neck: &Neck, end: End, q: &[f64], hess: &DMatrix<f64>, h: f64) -> Result<f64> {
    let m = q.len();
    let mut third = Vec::with_capacity(m);
    for k in 0..m {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[k] += h;
        qm[k] -= h;
        let hp = q_jet(profile, neck, end, &qp)?.hessian;
        let hm = q_jet(profile, neck, end, &qm)?.hessian;
        third.push((hp - hm) / (2.0 * h));
    }
    let jac: Vec<Vec<f64>> = (0..m)
        .map(|a| {
            let mut v = vec![0.0; 2 * m];
            v[a] = 1.0;
            for i in 0..m {
                v[m + i] = hess[(i, a)];
            }
            v
        })
        .collect();
    let second: Vec<Vec<Vec<f64>>> = (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let mut v = vec![0.0; 2 * m];
                    for i in 0..m {
                        v[m + i] = third[b][(i, a)];
                    }
                    v
                })
                .collect()
        })
        .collect();
    second_fundamental_norm(&jac, &second)
}

/// Ambient radii bounding the radial panels of the intermediate region.
pub fn radial_breakpoints(profile: &GlueProfile) -> Vec<f64> {
    let e = profile.eps;
    let band = profile.band_inner();
    let mut b = vec![
        e * profile.r1,
        e * (1.0 + profile.hbar) * profile.r1,
        0.5 * band,
        band,
        2.0 * band,
        (1.0 - 2.0 * profile.hbar) * profile.r2,
        profile.r2,
    ];
    b.retain(|v| *v >= e * profile.r1 && *v <= profile.r2);
    b.sort_by(|a, c| a.partial_cmp(c).unwrap());
    b.dedup_by(|a, c| (*a - *c).abs() < 1e-14);
    b
}

fn radial_nodes(profile: &GlueProfile, res: &Resolution) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(res.radial_order);
    let br = radial_breakpoints(profile);
    let mut nodes = Vec::new();
    for w in br.windows(2) {
        let (la, lb) = (w[0].ln(), w[1].ln());
        let panels = ((lb - la) * res.panels_per_log).ceil().max(1.0) as usize;
        let dl = (lb - la) / panels as f64;
        for p in 0..panels {
            let a = la + p as f64 * dl;
            for (l, wt) in gl.mapped(a, a + dl) {
                let r = l.exp();
                nodes.push((r, wt * r));
            }
        }
    }
    nodes
}

/// Builds the sampled immersion at the scale of `profile`.
pub fn build_mesh(profile: &GlueProfile, neck: Arc<Neck>, lattice: &TorusLattice, res: &Resolution) -> Result<MeshedImmersion> {
    profile.validate()?;
    let m = profile.m;
    if neck.m() != m || lattice.m != m {
        return Err(Error::Parameter(format!(
            "dimension mismatch: profile m = {m}, neck m = {}, lattice m = {}",
            neck.m(),
            lattice.m
        )));
    }
    for (a, b) in neck.phi.iter().zip(&lattice.phi) {
        if (a - b).abs() > 1e-9 {
            return Err(Error::Lattice("the second lattice plane must be the plane of the neck angles".into()));
        }
    }
    if 2.0 * profile.r2 >= lattice.side1.min(lattice.side2) {
        return Err(Error::Lattice(format!(
            "the balls of radius R2 = {} must embed in the tori (sides {}, {})",
            profile.r2, lattice.side1, lattice.side2
        )));
    }
    let rule = sphere_rule(m, res.sphere_level)?;
    let eps = profile.eps;
    let gl_tip = GaussLegendre::new(res.tip_order);

    // Tip samples.
    let tip: Vec<Vec<Sample>> = rule
        .nodes
        .par_iter()
        .zip(&rule.weights)
        .map(|(x, wx)| -> Result<Vec<Sample>> {
            let half = tip_half_length(&neck, profile.r1, x)?;
            let mut out = Vec::with_capacity(res.tip_panels * res.tip_order);
            let ds = 2.0 * half / res.tip_panels as f64;
            for p in 0..res.tip_panels {
                let a = -half + p as f64 * ds;
                for (s, ws) in gl_tip.mapped(a, a + ds) {
                    let np = neck.point(s, x)?;
                    let g_l = neck.metric(s, x);
                    let det = g_l.determinant();
                    if !(det > 0.0) {
                        return Err(Error::Discretization(format!("degenerate neck metric at s = {s}")));
                    }
                    let g = &g_l * (eps * eps);
                    let amb: Vec<f64> = np.point.iter().map(|v| v * eps).collect();
                    let n = np.point.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let (_, beta) = neck.cache.eval(s);
                    let mut coords = vec![s];
                    coords.extend_from_slice(x);
                    out.push(Sample {
                        tag: Region::P,
                        coords,
                        chart: Chart::Tip { s, x: x.clone() },
                        point: lattice.reduce(&amb),
                        metric: flatten(&g),
                        theta: neck.angle(s, x),
                        norm_a: tip_norm_a(&neck, eps, s, x, res.tip_step)?,
                        rho: profile.rho_tip(n),
                        weight: eps.powi(m as i32) * det.sqrt() * ws * wx,
                        radius: eps * n,
                        beta: Some(beta),
                    });
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    // Intermediate samples.
    let radial = radial_nodes(profile, res);
    let jobs: Vec<(End, usize)> =
        [End::Minus, End::Plus].iter().flat_map(|e| (0..rule.len()).map(move |k| (*e, k))).collect();
    let inter: Vec<Vec<Sample>> = jobs
        .par_iter()
        .map(|(end, k)| -> Result<Vec<Sample>> {
            let sigma = &rule.nodes[*k];
            let wsig = rule.weights[*k];
            let mut out = Vec::with_capacity(radial.len());
            for &(rr, wr) in &radial {
                let q: Vec<f64> = sigma.iter().map(|s| s * rr).collect();
                let jet = q_jet(profile, &neck, *end, &q)?;
                let h = &jet.hessian;
                let g = DMatrix::identity(m, m) + h * h;
                let det = g.determinant();
                let theta = if jet.neck.is_some() { sym_angle(h) } else { 0.0 };
                let norm_a = if jet.neck.is_some() {
                    graph_norm_a(profile, &neck, *end, &q, h, res.fd_step * rr)?
                } else {
                    0.0
                };
                let r = profile.kappa_inverse(rr)?;
                let amb = neck.end_point(*end, &q, &jet.grad);
                let mut coords = sigma.clone();
                coords.push(r);
                out.push(Sample {
                    tag: Region::intermediate(*end),
                    coords,
                    chart: Chart::Graph { end: *end, q },
                    point: lattice.reduce(&amb),
                    metric: flatten(&g),
                    theta,
                    norm_a,
                    rho: profile.rho_intermediate(r),
                    weight: det.sqrt() * rr.powi(m as i32 - 1) * wr * wsig,
                    radius: rr,
                    beta: jet.neck.as_ref().map(|j| j.beta),
                });
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    // Representative outer samples.
    let mut outer = Vec::new();
    for end in [End::Minus, End::Plus] {
        let side = if end == End::Minus { lattice.side1 } else { lattice.side2 };
        for k in 0..res.outer_samples {
            let frac = (k as f64 + 0.5) / res.outer_samples as f64;
            let rr = profile.r2 + frac * (0.5 * side - profile.r2);
            let sigma = &rule.nodes[(k * 7) % rule.len()];
            let q: Vec<f64> = sigma.iter().map(|s| s * rr).collect();
            let amb = neck.end_point(end, &q, &vec![0.0; m]);
            outer.push(Sample {
                tag: Region::outer(end),
                coords: q.clone(),
                chart: Chart::Outer { end, q },
                point: lattice.reduce(&amb),
                metric: flatten(&DMatrix::identity(m, m)),
                theta: 0.0,
                norm_a: 0.0,
                rho: profile.rho_outer(),
                weight: 0.0,
                radius: rr,
                beta: None,
            });
        }
    }

    let ball = sphere_area(m) * profile.r2.powi(m as i32) / m as f64;
    let volumes = [lattice.volume1(), lattice.volume2()];
    let samples: Vec<Sample> = tip.into_iter().flatten().chain(inter.into_iter().flatten()).chain(outer).collect();
    Ok(MeshedImmersion {
        profile: *profile,
        neck,
        lattice: lattice.clone(),
        resolution: *res,
        samples,
        volumes,
        outer_volumes: [volumes[0] - ball, volumes[1] - ball],
        sphere_nodes: rule.len(),
        radial_nodes: radial.len(),
        tip_nodes: res.tip_panels * res.tip_order,
    })
}

/// Recomputes the metric of every sample from central-difference Jacobians of the
/// immersion in its chart coordinates with step h.
pub fn induced_metric(mesh: &mut MeshedImmersion, h: f64) -> Result<()> {
    let eps = mesh.profile.eps;
    let profile = mesh.profile;
    let neck = mesh.neck.clone();
    let metrics: Vec<Result<Vec<f64>>> = mesh
        .samples
        .par_iter()
        .map(|s| -> Result<Vec<f64>> {
            let m = profile.m;
            let g = match &s.chart {
                Chart::Tip { s: sv, x } => {
                    let basis = sphere_tangent_basis(x);
                    let map = |c: &[f64]| -> Vec<f64> {
                        local_map(&neck, c[0], x, &basis, &c[1..]).into_iter().map(|v| v * eps).collect()
                    };
                    let mut at = vec![0.0; m];
                    at[0] = *sv;
                    fd_metric(map, &at, h)
                }
                Chart::Graph { end, q } => {
                    let scale = h * q.iter().map(|v| v * v).sum::<f64>().sqrt();
                    let map = |c: &[f64]| -> Vec<f64> {
                        match q_jet(&profile, &neck, *end, c) {
                            Ok(j) => {
                                let mut v = c.to_vec();
                                v.extend(j.grad);
                                v
                            }
                            Err(_) => vec![f64::NAN; 2 * m],
                        }
                    };
                    fd_metric(map, q, scale)
                }
                Chart::Outer { .. } => DMatrix::identity(m, m),
            };
            let eig = g.clone().symmetric_eigen().eigenvalues;
            if !(eig.min() > 0.0) {
                return Err(Error::Discretization(format!("degenerate Jacobian on region {}", s.tag.label())));
            }
            Ok(flatten(&g))
        })
        .collect();
    for (s, g) in mesh.samples.iter_mut().zip(metrics) {
        s.metric = g?;
    }
    Ok(())
}

/// How the Lagrangian angle is evaluated.
#[derive(Debug, Clone, Copy)]
pub enum AngleMethod {
    /// Eigenvalues of the analytic Hessian on graphs, analytic frames on the tip.
    Analytic,
    /// Hessian by second central differences of Q and central-difference frames on the tip.
    FiniteDifference { h: f64 },
}

/// Recomputes theta at every sample; the branch is fixed by theta = 0 on the outer region.
pub fn lagrangian_angle(mesh: &mut MeshedImmersion, method: AngleMethod) -> Result<()> {
    let profile = mesh.profile;
    let neck = mesh.neck.clone();
    let thetas: Vec<Result<f64>> = mesh
        .samples
        .par_iter()
        .map(|s| -> Result<f64> {
            let m = profile.m;
            match (&s.chart, method) {
                (Chart::Outer { .. }, _) => Ok(0.0),
                (Chart::Tip { s: sv, x }, AngleMethod::Analytic) => Ok(neck.angle(*sv, x)),
                (Chart::Tip { s: sv, x }, AngleMethod::FiniteDifference { h }) => {
                    let cols = fd_frame(&neck, *sv, x, h);
                    let frame: Vec<Vec<Complex<f64>>> =
                        cols.iter().map(|c| (0..m).map(|j| Complex::new(c[j], c[m + j])).collect()).collect();
                    Ok(lagrangian_angle_of_frame(&frame))
                }
                (Chart::Graph { end, q }, AngleMethod::Analytic) => {
                    let jet = q_jet(&profile, &neck, *end, q)?;
                    Ok(if jet.neck.is_some() { sym_angle(&jet.hessian) } else { 0.0 })
                }
                (Chart::Graph { end, q }, AngleMethod::FiniteDifference { h }) => {
                    let rr = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if rr >= 2.0 * profile.band_inner() {
                        return Ok(0.0);
                    }
                    let step = h * rr;
                    let val = |d: &[(usize, f64)]| -> Result<f64> {
                        let mut y = q.clone();
                        for (k, v) in d {
                            y[*k] += v;
                        }
                        Ok(q_jet(&profile, &neck, *end, &y)?.value)
                    };
                    let c = val(&[])?;
                    let mut hess = DMatrix::zeros(m, m);
                    for i in 0..m {
                        hess[(i, i)] = (val(&[(i, step)])? - 2.0 * c + val(&[(i, -step)])?) / (step * step);
                        for j in i + 1..m {
                            let v = (val(&[(i, step), (j, step)])? - val(&[(i, step), (j, -step)])?
                                - val(&[(i, -step), (j, step)])?
                                + val(&[(i, -step), (j, -step)])?)
                                / (4.0 * step * step);
                            hess[(i, j)] = v;
                            hess[(j, i)] = v;
                        }
                    }
                    Ok(sym_angle(&hess))
                }
            }
        })
        .collect();
    for (s, t) in mesh.samples.iter_mut().zip(thetas) {
        s.theta = t?;
    }
    Ok(())
}

/// Recomputes |A| at every sample with finite-difference step h (relative to the
/// radius on graph samples).
pub fn second_fundamental(mesh: &mut MeshedImmersion, h: f64) -> Result<()> {
    let profile = mesh.profile;
    let neck = mesh.neck.clone();
    let vals: Vec<Result<f64>> = mesh
        .samples
        .par_iter()
        .map(|s| -> Result<f64> {
            match &s.chart {
                Chart::Outer { .. } => Ok(0.0),
                Chart::Tip { s: sv, x } => tip_norm_a(&neck, profile.eps, *sv, x, h),
                Chart::Graph { end, q } => {
                    let jet = q_jet(&profile, &neck, *end, q)?;
                    if jet.neck.is_none() {
                        return Ok(0.0);
                    }
                    let rr = q.iter().map(|v| v * v).sum::<f64>().sqrt();
                    graph_norm_a(&profile, &neck, *end, q, &jet.hessian, h * rr)
                }
            }
        })
        .collect();
    for (s, v) in mesh.samples.iter_mut().zip(vals) {
        s.norm_a = v?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lawlor::NeckParams;

    fn mesh(eps: f64) -> MeshedImmersion {
        let neck = Arc::new(Neck::new(NeckParams::symmetric(3)));
        let lattice = TorusLattice::new(&neck.phi, 10.0, 10.0).unwrap();
        build_mesh(&GlueProfile::standard(eps), neck, &lattice, &Resolution::coarse()).unwrap()
    }

    #[test]
    fn sample_count_contract() {
        let mesh = mesh(0.1);
        let res = mesh.resolution;
        let expected = mesh.sphere_nodes * (mesh.tip_nodes + 2 * mesh.radial_nodes) + 2 * res.outer_samples;
        assert_eq!(mesh.samples.len(), expected);
    }

    #[test]
    fn flat_regions() {
        let mesh = mesh(0.1);
        for s in &mesh.samples {
            if s.radius >= 2.0 * mesh.profile.band_inner() {
                assert_eq!(s.theta, 0.0);
                assert!(s.norm_a <= 1e-8);
            }
            let g = DMatrix::from_row_slice(3, 3, &s.metric);
            assert!(g.symmetric_eigen().eigenvalues.min() > 0.0);
        }
    }

    #[test]
    fn tip_metric_matches_dilated_neck() {
        let mut mesh = mesh(0.1);
        let before: Vec<Vec<f64>> = mesh.samples.iter().map(|s| s.metric.clone()).collect();
        induced_metric(&mut mesh, 1e-4).unwrap();
        for (s, g0) in mesh.samples.iter().zip(&before) {
            if s.tag == Region::P {
                let num: f64 = s.metric.iter().zip(g0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let den: f64 = g0.iter().map(|a| a * a).sum::<f64>().sqrt();
                assert!(num / den < 1e-6, "{}", num / den);
            }
        }
    }

    #[test]
    fn curvature_scales_under_dilation() {
        let a = mesh(0.1).region_sup(Region::P, |s| s.norm_a);
        let b = mesh(0.05).region_sup(Region::P, |s| s.norm_a);
        assert!((b / a - 2.0).abs() < 0.05 * 2.0, "{}", b / a);
    }

    #[test]
    fn second_fundamental_of_sphere() {
        // Unit sphere in R^3 via spherical coordinates: |A|^2 = 2.
        let map = |c: &[f64]| vec![c[0].sin() * c[1].cos(), c[0].sin() * c[1].sin(), c[0].cos()];
        let a = fd_second_fundamental(map, &[1.0, 0.3], 1e-4).unwrap();
        assert!((a - 2f64.sqrt()).abs() < 1e-6);
    }
}
