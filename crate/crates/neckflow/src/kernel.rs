//! The approximate kernel w_d on N^eps, its normalization against constants, the
//! zeroth-order field theta + xi(0), and the L^2 projections that yield the
//! balancing ODE.

use crate::dynamics::{ode_coefficient, NeckSchedule};
use crate::error::{Error, Result};
use crate::glue::{cutoff_chi, q_eps_derivative, Chart, GlueProfile, MeshedImmersion, Region, Sample};
use crate::graph::DesingGraph;
use crate::lawlor::{End, Neck};
use crate::numerics::pairwise_sum;
use rayon::prelude::*;
use serde::Serialize;

/// beta_L at the neck point underlying a sample.
fn sample_beta(profile: &GlueProfile, neck: &Neck, sample: &Sample) -> Result<f64> {
    if let Some(b) = sample.beta {
        return Ok(b);
    }
    match &sample.chart {
        Chart::Tip { s, .. } => Ok(neck.cache.eval(*s).1),
        Chart::Graph { end, q } => {
            let u: Vec<f64> = q.iter().map(|v| v / profile.eps).collect();
            Ok(neck.end_jet(*end, &u)?.beta)
        }
        Chart::Outer { .. } => Err(Error::Contract("beta_L is undefined on the outer region".into())),
    }
}

/// w_d at one sample for vertex values d = (d_1, d_2); the edge runs from v1 to v2.
pub fn kernel_fn(profile: &GlueProfile, neck: &Neck, d: &[f64], sample: &Sample) -> Result<f64> {
    if d.len() != 2 {
        return Err(Error::Parameter(format!("the torus graph has two vertices, got {} values", d.len())));
    }
    let (tail, head) = (d[0], d[1]);
    let c = neck.c_plus;
    match sample.tag {
        Region::O1 => Ok(tail),
        Region::O2 => Ok(head),
        Region::P => Ok(tail + (head - tail) * sample_beta(profile, neck, sample)? / c),
        Region::QMinus | Region::QPlus => {
            let chi = cutoff_chi(2.0 * profile.eps.powf(-profile.tau) * sample.radius);
            let near = if sample.tag == Region::QMinus { tail } else { head };
            if chi >= 1.0 {
                return Ok(near);
            }
            let interp = tail + (head - tail) * sample_beta(profile, neck, sample)? / c;
            Ok(near + (interp - near) * (1.0 - chi))
        }
    }
}

/// Samples of a kernel function over a mesh.
#[derive(Debug, Clone, Serialize)]
pub struct KernelElement {
    pub d: Vec<f64>,
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Volume-weighted mean over N^eps.
    pub mean: f64,
    #[serde(rename = "normL2")]
    pub norm_l2: f64,
}

impl KernelElement {
    pub fn sup(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

/// w_d sampled on the mesh, with its mean and L^2 norm.
pub fn kernel_element(mesh: &MeshedImmersion, d: &[f64]) -> Result<KernelElement> {
    let values = mesh
        .samples
        .par_iter()
        .map(|s| kernel_fn(&mesh.profile, &mesh.neck, d, s))
        .collect::<Result<Vec<_>>>()?;
    finish_element(mesh, d.to_vec(), values)
}

fn finish_element(mesh: &MeshedImmersion, d: Vec<f64>, values: Vec<f64>) -> Result<KernelElement> {
    let vol = mesh.volume();
    if !(vol > 0.0 && vol.is_finite()) {
        return Err(Error::Discretization(format!("degenerate mesh volume {vol}")));
    }
    let ones = vec![1.0; values.len()];
    let mean = project(mesh, &values, &ones)? / vol;
    let norm_l2 = project(mesh, &values, &values)?.sqrt();
    Ok(KernelElement { d, values, mean, norm_l2 })
}

/// Subtracts the volume-weighted mean, giving the element orthogonal to constants.
pub fn normalize_kernel(mesh: &MeshedImmersion, raw: &KernelElement) -> Result<KernelElement> {
    if raw.values.len() != mesh.samples.len() {
        return Err(Error::Contract(format!(
            "kernel has {} samples but the mesh has {}",
            raw.values.len(),
            mesh.samples.len()
        )));
    }
    let values = raw.values.iter().map(|v| v - raw.mean).collect();
    finish_element(mesh, raw.d.clone(), values)
}

/// The normalized element w = w_(0,1) - mean.
pub fn normalized_kernel(mesh: &MeshedImmersion) -> Result<KernelElement> {
    normalize_kernel(mesh, &kernel_element(mesh, &[0.0, 1.0])?)
}

/// int field * weight dV over N^eps: mesh quadrature on the tip and intermediate
/// regions plus exact outer volumes times the (constant) outer values.
pub fn project(mesh: &MeshedImmersion, field: &[f64], weight: &[f64]) -> Result<f64> {
    let n = mesh.samples.len();
    if field.len() != n || weight.len() != n {
        return Err(Error::Contract(format!(
            "sample sets differ: mesh {n}, field {}, weight {}",
            field.len(),
            weight.len()
        )));
    }
    let terms: Vec<f64> = (0..n).into_par_iter().map(|i| mesh.samples[i].weight * field[i] * weight[i]).collect();
    let mut total = pairwise_sum(&terms);
    for (b, tag) in [Region::O1, Region::O2].into_iter().enumerate() {
        let vals: Vec<f64> = (0..n).filter(|&i| mesh.samples[i].tag == tag).map(|i| field[i] * weight[i]).collect();
        let Some(&first) = vals.first() else {
            if mesh.outer_volumes[b] > 0.0 {
                return Err(Error::Contract(format!("no samples on the outer component {}", tag.label())));
            }
            continue;
        };
        if vals.iter().any(|v| (v - first).abs() > 1e-12 * (1.0 + first.abs())) {
            return Err(Error::Contract(format!("integrand is not constant on {}", tag.label())));
        }
        total += first * mesh.outer_volumes[b];
    }
    Ok(total)
}

/// int theta dV over the band Sigma x (eps^tau, 2 eps^tau) of one end.
pub fn band_theta_integral(mesh: &MeshedImmersion, end: End) -> f64 {
    let lo = mesh.profile.band_inner();
    let tag = Region::intermediate(end);
    let terms: Vec<f64> = mesh
        .samples
        .iter()
        .filter(|s| s.tag == tag && s.radius > lo && s.radius < 2.0 * lo)
        .map(|s| s.theta * s.weight)
        .collect();
    pairwise_sum(&terms)
}

/// The time-dependent constants C_P, C_{Q-}, C_{Q+}, C_{O1}, C_{O2}.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MatchingConstants {
    #[serde(rename = "C_P")]
    pub c_p: f64,
    #[serde(rename = "C_Q-")]
    pub c_qminus: f64,
    #[serde(rename = "C_Q+")]
    pub c_qplus: f64,
    #[serde(rename = "C_O1")]
    pub c_o1: f64,
    #[serde(rename = "C_O2")]
    pub c_o2: f64,
}

impl MatchingConstants {
    /// Constants from the graph solve with rate d(eps^2)/dt on the single edge.
    pub fn from_graph(c_l: f64, v1: f64, v2: f64, deps2: f64) -> Result<Self> {
        let c = DesingGraph::torus(v1, v2, c_l).solve_constants(&[deps2])?;
        Ok(MatchingConstants { c_p: c[0], c_qminus: c[0], c_qplus: c[1], c_o1: c[0], c_o2: c[1] })
    }

    /// |C_{Q-} - C_{O1}| + |C_{Q+} - C_{O2}|.
    pub fn outer_residual(&self) -> f64 {
        (self.c_qminus - self.c_o1).abs() + (self.c_qplus - self.c_o2).abs()
    }

    /// C_{Q+} - C_{Q-} - c_L d(eps^2)/dt.
    pub fn tip_residual(&self, c_l: f64, deps2: f64) -> f64 {
        self.c_qplus - self.c_qminus - c_l * deps2
    }
}

/// xi(0) at one sample, for d eps / dt = deps.
pub fn xi_zero(mesh: &MeshedImmersion, constants: &MatchingConstants, deps: f64, sample: &Sample) -> Result<f64> {
    let eps = mesh.profile.eps;
    let deps2 = 2.0 * eps * deps;
    match (&sample.tag, &sample.chart) {
        (Region::O1, _) => Ok(constants.c_o1),
        (Region::O2, _) => Ok(constants.c_o2),
        (Region::P, _) => Ok(deps2 * sample_beta(&mesh.profile, &mesh.neck, sample)? + constants.c_p),
        (Region::QMinus | Region::QPlus, Chart::Graph { end, q }) => {
            let c = if *end == End::Minus { constants.c_qminus } else { constants.c_qplus };
            if deps == 0.0 {
                return Ok(c);
            }
            Ok(c - deps * q_eps_derivative(&mesh.profile, &mesh.neck, *end, q)?)
        }
        _ => Err(Error::Contract(format!("sample on {} has the wrong chart", sample.tag.label()))),
    }
}

/// theta and xi(0) sampled on a mesh.
#[derive(Debug, Clone, Serialize)]
pub struct ZerothOrderField {
    pub eps: f64,
    pub deps: f64,
    pub deps2: f64,
    pub c_l: f64,
    pub constants: MatchingConstants,
    #[serde(skip)]
    pub theta: Vec<f64>,
    #[serde(skip)]
    pub xi: Vec<f64>,
}

impl ZerothOrderField {
    /// theta + xi(0) at every sample.
    pub fn total(&self) -> Vec<f64> {
        self.theta.iter().zip(&self.xi).map(|(a, b)| a + b).collect()
    }
}

pub fn zeroth_order_field(mesh: &MeshedImmersion, deps: f64) -> Result<ZerothOrderField> {
    let eps = mesh.profile.eps;
    let deps2 = 2.0 * eps * deps;
    let c_l = mesh.neck.c_plus;
    let constants = MatchingConstants::from_graph(c_l, mesh.volumes[0], mesh.volumes[1], deps2)?;
    let xi = mesh
        .samples
        .par_iter()
        .map(|s| xi_zero(mesh, &constants, deps, s))
        .collect::<Result<Vec<_>>>()?;
    let theta = mesh.samples.iter().map(|s| s.theta).collect();
    Ok(ZerothOrderField { eps, deps, deps2, c_l, constants, theta, xi })
}

/// Projections of theta + xi(0) at one scale.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionRow {
    pub eps: f64,
    pub t: Option<f64>,
    pub dteps2: f64,
    #[serde(rename = "Pi_w")]
    pub pi_w: f64,
    #[serde(rename = "Pi_1")]
    pub pi_1: f64,
    /// c_L V1 V2 / (V1 + V2) [d(eps^2)/dt + (A / c_L)(V1 + V2)/(V1 V2) eps^m].
    pub closed_form_value: f64,
    /// Pi_w - closed_form_value.
    pub residual: f64,
    /// |residual| / |previous residual|, for rows after the first.
    pub residual_ratio: Option<f64>,
    /// (eps / previous eps)^{(1 + tau) m}.
    pub expected_ratio: Option<f64>,
    /// |Pi_1| / |previous Pi_1|.
    pub pi_1_ratio: Option<f64>,
    /// residual / eps^{(1 + tau) m}.
    pub residual_constant: f64,
    /// int theta over the band of the lower and upper ends, divided by eps^m A.
    pub band_ratio: [f64; 2],
}

/// Pi_w and Pi_1 on one mesh with d eps / dt = deps.
pub fn projection_row(mesh: &MeshedImmersion, deps: f64) -> Result<ProjectionRow> {
    let field = zeroth_order_field(mesh, deps)?;
    let total = field.total();
    let w = normalized_kernel(mesh)?;
    let ones = vec![1.0; total.len()];
    let pi_w = project(mesh, &total, &w.values)?;
    let pi_1 = project(mesh, &total, &ones)?;
    let eps = mesh.profile.eps;
    let m = mesh.m() as i32;
    let (v1, v2) = (mesh.volumes[0], mesh.volumes[1]);
    let c_l = mesh.neck.c_plus;
    let area = mesh.neck.area;
    let em = eps.powi(m);
    let closed_form_value = c_l * v1 * v2 / (v1 + v2) * (field.deps2 + ode_coefficient(area, c_l, v1, v2) * em);
    let residual = pi_w - closed_form_value;
    let order = (1.0 + mesh.profile.tau) * m as f64;
    Ok(ProjectionRow {
        eps,
        t: None,
        dteps2: field.deps2,
        pi_w,
        pi_1,
        closed_form_value,
        residual,
        residual_ratio: None,
        expected_ratio: None,
        pi_1_ratio: None,
        residual_constant: residual / eps.powf(order),
        band_ratio: [
            band_theta_integral(mesh, End::Minus) / (em * area),
            band_theta_integral(mesh, End::Plus) / (em * area),
        ],
    })
}

/// Projection rows along a schedule, one per mesh, with residual ratios between
/// consecutive scales.
#[derive(Debug, Clone, Serialize)]
pub struct BalancingReport {
    pub order: f64,
    pub rows: Vec<ProjectionRow>,
}

/// Evaluates the projections with d eps / dt taken from the schedule at the time
/// the schedule reaches each mesh scale.
pub fn balancing_residual(schedule: &NeckSchedule, meshes: &[MeshedImmersion]) -> Result<BalancingReport> {
    if meshes.len() < 2 {
        return Err(Error::Parameter(format!("balancing report needs at least two meshes, got {}", meshes.len())));
    }
    let mut rows = Vec::with_capacity(meshes.len());
    for mesh in meshes {
        let t = schedule.time_of(mesh.profile.eps)?;
        let (_, deps) = schedule.eps_and_derivative(t)?;
        let mut row = projection_row(mesh, deps)?;
        row.t = Some(t);
        rows.push(row);
    }
    let order = (1.0 + meshes[0].profile.tau) * meshes[0].m() as f64;
    link_rows(&mut rows, order);
    Ok(BalancingReport { order, rows })
}

/// Projections with eps frozen (d eps / dt = 0) on each mesh.
pub fn frozen_projection(meshes: &[MeshedImmersion]) -> Result<BalancingReport> {
    let mut rows = meshes.iter().map(|m| projection_row(m, 0.0)).collect::<Result<Vec<_>>>()?;
    let order = meshes.first().map(|m| (1.0 + m.profile.tau) * m.m() as f64).unwrap_or(f64::NAN);
    link_rows(&mut rows, order);
    Ok(BalancingReport { order, rows })
}

fn link_rows(rows: &mut [ProjectionRow], order: f64) {
    for k in 1..rows.len() {
        let (prev, cur) = (rows[k - 1].clone(), &mut rows[k]);
        cur.residual_ratio = Some(cur.residual.abs() / prev.residual.abs());
        cur.pi_1_ratio = Some(cur.pi_1.abs() / prev.pi_1.abs());
        cur.expected_ratio = Some((cur.eps / prev.eps).powf(order));
    }
}
