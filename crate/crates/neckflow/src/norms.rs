//! Discrete weighted parabolic Hoelder norms of fields on N^eps along a neck
//! schedule, and the checker for the admissible constants (nu, alpha, tau, mu, zeta).

use crate::dynamics::NeckSchedule;
use crate::error::{Error, Result};
use crate::glue::{graph_angle, Chart, MeshedImmersion, Region, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Exponents of the weighted norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub mu: f64,
    pub nu: f64,
    pub alpha: f64,
    pub zeta: f64,
    #[serde(rename = "Lambda")]
    pub lambda: f64,
    pub tau: f64,
}

impl NormParams {
    /// nu = (3m - 8)/4, alpha = 1/100, tau = 1/(2(m + 2)), mu = 7(1 - tau)m / (8(m - 2)).
    pub fn example(m: usize, zeta: f64, lambda: f64) -> Self {
        let mf = m as f64;
        let tau = 1.0 / (2.0 * (mf + 2.0));
        NormParams {
            mu: 7.0 * (1.0 - tau) * mf / (8.0 * (mf - 2.0)),
            nu: (3.0 * mf - 8.0) / 4.0,
            alpha: 0.01,
            zeta,
            lambda,
            tau,
        }
    }

    /// The same exponents with nu shifted by k.
    pub fn with_nu_shift(&self, k: f64) -> Self {
        NormParams { nu: self.nu + k, ..*self }
    }
}

/// One inequality of the admissible system.
#[derive(Debug, Clone, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantsReport {
    pub m: usize,
    pub checks: Vec<InequalityCheck>,
    pub passes: bool,
    /// Name of the first inequality that fails.
    pub failed: Option<&'static str>,
}

/// Evaluates the open intervals
/// nu in (max(m/2 - 2, 0), m - 2), alpha in (0, 1/2),
/// tau in (2 alpha/(m + 1 + 2 alpha), 1/(m + 2)),
/// mu in ((nu + 2 + 2 alpha)/(m - 2), (tau(nu + 2) + (1 - tau)m)/(m - 2)),
/// zeta in (0, min(tau m/(m - 2), mu - (nu + 2 + 2 alpha)/(m - 2))).
pub fn check_constants(p: &NormParams, m: usize) -> Result<ConstantsReport> {
    if m < 3 {
        return Err(Error::Parameter(format!("m must be at least 3, got {m}")));
    }
    let mf = m as f64;
    let k = mf - 2.0;
    let mu_lo = (p.nu + 2.0 + 2.0 * p.alpha) / k;
    let bounds = [
        ("nu", p.nu, (0.5 * mf - 2.0).max(0.0), mf - 2.0),
        ("alpha", p.alpha, 0.0, 0.5),
        ("tau", p.tau, 2.0 * p.alpha / (mf + 1.0 + 2.0 * p.alpha), 1.0 / (mf + 2.0)),
        ("mu", p.mu, mu_lo, (p.tau * (p.nu + 2.0) + (1.0 - p.tau) * mf) / k),
        ("zeta", p.zeta, 0.0, (p.tau * mf / k).min(p.mu - mu_lo)),
    ];
    let checks: Vec<InequalityCheck> = bounds
        .iter()
        .map(|&(name, value, lower, upper)| InequalityCheck {
            name,
            value,
            lower,
            upper,
            ok: value > lower && value < upper,
        })
        .collect();
    let failed = checks.iter().find(|c| !c.ok).map(|c| c.name);
    Ok(ConstantsReport { m, passes: failed.is_none(), failed, checks })
}

/// A mesh of N^eps(t) at time t.
#[derive(Debug, Clone, Copy)]
pub struct TimeSlice<'a> {
    pub t: f64,
    pub mesh: &'a MeshedImmersion,
}

/// A time-dependent scalar field on N, evaluated at the abstract point of a mesh
/// sample and at a time near the slice time.
pub trait SpaceTimeField: Sync {
    fn eval(&self, slice: &TimeSlice, index: usize, t: f64) -> Result<f64>;
}

/// A field given by a closure of the sample and the time.
pub struct SampledField<F>(pub F);

impl<F: Fn(&Sample, f64) -> f64 + Sync> SpaceTimeField for SampledField<F> {
    fn eval(&self, slice: &TimeSlice, index: usize, t: f64) -> Result<f64> {
        Ok((self.0)(&slice.mesh.samples[index], t))
    }
}

/// The Lagrangian angle of N^eps(t) along a schedule.
pub struct AngleField<'s> {
    pub schedule: &'s NeckSchedule,
}

impl SpaceTimeField for AngleField<'_> {
    fn eval(&self, slice: &TimeSlice, index: usize, t: f64) -> Result<f64> {
        let sample = &slice.mesh.samples[index];
        if t == slice.t {
            return Ok(sample.theta);
        }
        angle_at_scale(slice.mesh, sample, self.schedule.eps(t)?)
    }
}

/// theta of N^eps at the abstract point of a sample: the same neck coordinates on
/// the tip, the same (sigma, r) on the intermediate region.
pub fn angle_at_scale(mesh: &MeshedImmersion, sample: &Sample, eps: f64) -> Result<f64> {
    let m = mesh.m();
    match &sample.chart {
        Chart::Tip { s, x } => Ok(mesh.neck.angle(*s, x)),
        Chart::Graph { end, .. } => {
            let profile = mesh.profile.with_eps(eps);
            let rr = profile.kappa_unchecked(sample.coords[m]);
            let q: Vec<f64> = sample.coords[..m].iter().map(|s| s * rr).collect();
            graph_angle(&profile, &mesh.neck, *end, &q)
        }
        Chart::Outer { .. } => Ok(0.0),
    }
}

/// rho_{eps_w} at the abstract point of a sample.
pub fn weight_at_scale(mesh: &MeshedImmersion, sample: &Sample, eps_w: f64) -> f64 {
    let m = mesh.m();
    let profile = mesh.profile.with_eps(eps_w);
    match sample.tag {
        Region::P => eps_w * profile.rho_hat(sample.radius / mesh.profile.eps),
        Region::QMinus | Region::QPlus => profile.rho_intermediate(sample.coords[m]),
        Region::O1 | Region::O2 => profile.rho_outer(),
    }
}

fn weight_scale(m: usize, t: f64) -> f64 {
    t.powf(-1.0 / (m as f64 - 2.0))
}

/// sup over slices and samples of t^mu rho^nu |T| with rho at scale t^{-1/(m-2)}.
pub fn weighted_sup(field: &dyn SpaceTimeField, slices: &[TimeSlice], p: &NormParams) -> Result<f64> {
    let mut sup = 0.0f64;
    for slice in slices {
        let ew = weight_scale(slice.mesh.m(), slice.t);
        let tm = slice.t.powf(p.mu);
        let local = (0..slice.mesh.samples.len())
            .into_par_iter()
            .map(|i| -> Result<f64> {
                let v = field.eval(slice, i, slice.t)?;
                let rho = weight_at_scale(slice.mesh, &slice.mesh.samples[i], ew);
                Ok(tm * rho.powf(p.nu) * v.abs())
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        sup = sup.max(local);
    }
    Ok(sup)
}

#[derive(Debug, Clone, Serialize)]
pub struct Seminorms {
    pub spatial: f64,
    pub temporal: f64,
    pub budget: usize,
    pub seed: u64,
    /// Admissible pairs found among the budget.
    pub spatial_pairs: usize,
    pub temporal_pairs: usize,
}

/// Report of one field: {sup, spatial_seminorm, temporal_seminorm, budget, seed}.
#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub sup: f64,
    pub spatial_seminorm: f64,
    pub temporal_seminorm: f64,
    pub budget: usize,
    pub seed: u64,
}

pub fn norm_report(field: &dyn SpaceTimeField, slices: &[TimeSlice], p: &NormParams, budget: usize, seed: u64) -> Result<NormReport> {
    let s = holder_seminorms(field, slices, p, budget, seed)?;
    Ok(NormReport {
        sup: weighted_sup(field, slices, p)?,
        spatial_seminorm: s.spatial,
        temporal_seminorm: s.temporal,
        budget,
        seed,
    })
}

/// Pairs of regions whose samples may be compared: equal or adjacent regions.
fn adjacent(a: Region, b: Region) -> bool {
    use Region::*;
    a == b || matches!((a, b), (P, QMinus) | (QMinus, P) | (P, QPlus) | (QPlus, P) | (QMinus, O1) | (O1, QMinus) | (QPlus, O2) | (O2, QPlus))
}

/// Sample positions near the intersection point kept near the origin.
fn centered_points(mesh: &MeshedImmersion) -> Vec<Vec<f64>> {
    let n = 2 * mesh.m();
    let center: Vec<f64> = (0..n).map(|i| 0.5 * mesh.lattice.generators.iter().map(|g| g[i]).sum::<f64>()).collect();
    mesh.samples
        .iter()
        .map(|s| {
            let shifted: Vec<f64> = s.point.iter().zip(&center).map(|(p, c)| p + c).collect();
            mesh.lattice.reduce(&shifted).iter().zip(&center).map(|(p, c)| p - c).collect()
        })
        .collect()
}

/// Spatial comparison radius: min(1, eps min_j a_j^{-1/2}), the smaller of 1 and
/// the radius of the thinnest neck circle.
pub fn pair_radius(mesh: &MeshedImmersion) -> f64 {
    let amax = mesh.neck.params.a.iter().cloned().fold(0.0, f64::max);
    (mesh.profile.eps / amax.sqrt()).min(1.0)
}

struct Grid {
    cell: f64,
    points: Vec<Vec<f64>>,
    cells: HashMap<Vec<i64>, Vec<usize>>,
}

impl Grid {
    fn new(points: Vec<Vec<f64>>, cell: f64) -> Self {
        let mut cells: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(key(p, cell)).or_default().push(i);
        }
        Grid { cell, points, cells }
    }

    /// Indices within distance `cell` of point i, excluding i, with distances.
    fn neighbours(&self, i: usize) -> Vec<(usize, f64)> {
        let base = key(&self.points[i], self.cell);
        let n = base.len();
        let mut out = Vec::new();
        let total = 3usize.pow(n as u32);
        let mut k = base.clone();
        for code in 0..total {
            let mut c = code;
            for d in 0..n {
                k[d] = base[d] + (c % 3) as i64 - 1;
                c /= 3;
            }
            if let Some(list) = self.cells.get(&k) {
                for &j in list {
                    if j == i {
                        continue;
                    }
                    let d = dist(&self.points[i], &self.points[j]);
                    if d > 0.0 && d < self.cell {
                        out.push((j, d));
                    }
                }
            }
        }
        out.sort_by_key(|x| x.0);
        out
    }
}

fn key(p: &[f64], cell: f64) -> Vec<i64> {
    p.iter().map(|v| (v / cell).floor() as i64).collect()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Largest weighted Hoelder quotients over a seeded random pair budget. Pair k
/// uses its own random stream and slice k mod (number of slices), so a larger
/// budget evaluates a superset of pairs and the estimates are non-decreasing in
/// the budget. Spatial distances are ambient chord lengths.
pub fn holder_seminorms(field: &dyn SpaceTimeField, slices: &[TimeSlice], p: &NormParams, budget: usize, seed: u64) -> Result<Seminorms> {
    if slices.is_empty() || budget == 0 {
        return Err(Error::Parameter("seminorms need at least one slice and a positive pair budget".into()));
    }
    let grids: Vec<Grid> = slices.iter().map(|s| Grid::new(centered_points(s.mesh), pair_radius(s.mesh))).collect();
    let ns = slices.len();
    let results = (0..budget)
        .into_par_iter()
        .map(|k| -> Result<(Option<f64>, Option<f64>)> {
            let slice = &slices[k % ns];
            let grid = &grids[k % ns];
            let mesh = slice.mesh;
            let m = mesh.m();
            let n = mesh.samples.len();
            let ew = weight_scale(m, slice.t);
            let tm = slice.t.powf(p.mu);

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2 * k as u64);
            let i = rng.gen_range(0..n);
            let si = &mesh.samples[i];
            let cands: Vec<(usize, f64)> =
                grid.neighbours(i).into_iter().filter(|(j, _)| adjacent(si.tag, mesh.samples[*j].tag)).collect();
            let spatial = if cands.is_empty() {
                None
            } else {
                let (j, d) = cands[rng.gen_range(0..cands.len())];
                let sj = &mesh.samples[j];
                let vi = field.eval(slice, i, slice.t)?;
                let vj = field.eval(slice, j, slice.t)?;
                let rho = weight_at_scale(mesh, si, ew).min(weight_at_scale(mesh, sj, ew));
                Some(tm * rho.powf(p.nu + 2.0 * p.alpha) * (vi - vj).abs() / d.powf(2.0 * p.alpha))
            };

            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(2 * k as u64 + 1);
            let i = rng.gen_range(0..n);
            let t = slice.t;
            let window = t.powf(-2.0 / (m as f64 - 2.0)).min(t);
            let t1 = t + rng.gen::<f64>() * (t - window);
            let dt = window * (1.0 - rng.gen::<f64>()) * (1.0 - 1e-12);
            let temporal = if dt > 0.0 {
                let v1 = field.eval(slice, i, t1)?;
                let v2 = field.eval(slice, i, t1 + dt)?;
                let rho = weight_at_scale(mesh, &mesh.samples[i], ew);
                Some(tm * rho.powf(p.nu + 2.0 * p.alpha) * (v1 - v2).abs() / dt.powf(p.alpha))
            } else {
                None
            };
            Ok((spatial, temporal))
        })
        .collect::<Result<Vec<_>>>()?;
    let spatial_vals: Vec<f64> = results.iter().filter_map(|r| r.0).collect();
    let temporal_vals: Vec<f64> = results.iter().filter_map(|r| r.1).collect();
    if spatial_vals.is_empty() {
        return Err(Error::Discretization("no admissible spatial pairs within the injectivity radius".into()));
    }
    if temporal_vals.is_empty() {
        return Err(Error::Discretization("no admissible temporal pairs".into()));
    }
    Ok(Seminorms {
        spatial: spatial_vals.iter().cloned().fold(0.0, f64::max),
        temporal: temporal_vals.iter().cloned().fold(0.0, f64::max),
        budget,
        seed,
        spatial_pairs: spatial_vals.len(),
        temporal_pairs: temporal_vals.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{ode_coefficient, HSpec};
    use crate::glue::{build_mesh, GlueProfile, Resolution, TorusLattice};
    use crate::lawlor::{Neck, NeckParams};
    use std::sync::{Arc, OnceLock};

    fn example() -> NormParams {
        NormParams::example(3, 0.05, 50.0)
    }

    #[test]
    fn example_tuple_passes() {
        let r = check_constants(&example(), 3).unwrap();
        assert!(r.passes, "{r:?}");
        assert!((example().mu - 2.3625).abs() < 1e-14);
    }

    #[test]
    fn boundary_violations_named() {
        let mut p = example();
        p.nu = 1.0;
        assert_eq!(check_constants(&p, 3).unwrap().failed, Some("nu"));
        let mut p = example();
        p.alpha = 0.6;
        assert_eq!(check_constants(&p, 3).unwrap().failed, Some("alpha"));
    }

    fn slices() -> &'static (NeckSchedule, Vec<(f64, MeshedImmersion)>) {
        static S: OnceLock<(NeckSchedule, Vec<(f64, MeshedImmersion)>)> = OnceLock::new();
        S.get_or_init(|| {
            let neck = Arc::new(Neck::new(NeckParams::symmetric(3)));
            let lattice = TorusLattice::new(&neck.phi, 10.0, 10.0).unwrap();
            let c = ode_coefficient(neck.area, neck.c_plus, 100.0, 100.0);
            let sched = NeckSchedule::from_eps0(3, 0.1, c, HSpec::Zero).unwrap();
            let meshes = [sched.lambda, 2.0 * sched.lambda]
                .iter()
                .map(|&t| {
                    let p = GlueProfile::standard(sched.eps(t).unwrap());
                    (t, build_mesh(&p, neck.clone(), &lattice, &Resolution::coarse()).unwrap())
                })
                .collect();
            (sched, meshes)
        })
    }

    fn as_slices(v: &[(f64, MeshedImmersion)]) -> Vec<TimeSlice<'_>> {
        v.iter().map(|(t, mesh)| TimeSlice { t: *t, mesh }).collect()
    }

    #[test]
    fn exact_cancellation_and_zero() {
        let (_, v) = slices();
        let s = as_slices(v);
        let p = example();
        let f = SampledField(|smp: &Sample, t: f64| {
            let mesh = &v.iter().find(|x| x.0 == t).unwrap().1;
            t.powf(-p.mu) * weight_at_scale(mesh, smp, t.powf(-1.0)).powf(-p.nu)
        });
        assert!((weighted_sup(&f, &s, &p).unwrap() - 1.0).abs() < 1e-12);
        let z = SampledField(|_: &Sample, _: f64| 0.0);
        assert_eq!(weighted_sup(&z, &s, &p).unwrap(), 0.0);
    }

    #[test]
    fn constant_and_time_only_fields() {
        let (_, v) = slices();
        let s = as_slices(v);
        let p = example();
        let c = holder_seminorms(&SampledField(|_: &Sample, _: f64| 3.0), &s, &p, 200, 7).unwrap();
        assert_eq!(c.spatial, 0.0);
        assert_eq!(c.temporal, 0.0);
        let f = holder_seminorms(&SampledField(|_: &Sample, t: f64| (t / 10.0).sin()), &s, &p, 200, 7).unwrap();
        assert_eq!(f.spatial, 0.0);
        assert!(f.temporal > 0.0);
    }

    #[test]
    fn angle_at_own_scale_matches_mesh() {
        let (_, v) = slices();
        let mesh = &v[0].1;
        for smp in mesh.samples.iter().filter(|s| s.theta != 0.0).step_by(97) {
            let th = angle_at_scale(mesh, smp, mesh.profile.eps).unwrap();
            assert!((th - smp.theta).abs() < 1e-9 * (1.0 + smp.theta.abs()), "{th} vs {}", smp.theta);
        }
    }

    #[test]
    fn budgets_nest() {
        let (sched, v) = slices();
        let s = as_slices(v);
        let p = example().with_nu_shift(2.0);
        let f = AngleField { schedule: sched };
        let a = holder_seminorms(&f, &s, &p, 100, 3).unwrap();
        let b = holder_seminorms(&f, &s, &p, 200, 3).unwrap();
        assert!(b.spatial >= a.spatial && b.temporal >= a.temporal);
        assert!(a.spatial_pairs > 0);
    }
}
