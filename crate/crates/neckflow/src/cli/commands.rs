//! Implementations of the subcommands.

use super::{Command, GeometryArgs, GlueArgs, GraphArgs, NeckArgs, NormsArgs, OdeArgs, ProjectArgs, ReportArgs, RunConfig};
use crate::dynamics::{
    closed_form, integrate_balancing, ode_coefficient, validate_assumption, HSpec, MonotoneCubic, NeckSchedule,
};
use crate::error::{Error, Result};
use crate::glue::{build_mesh, summary_table, write_mesh_jsonl, GlueProfile, MeshedImmersion, Resolution, TorusLattice};
use crate::graph::DesingGraph;
use crate::io::{to_json_pretty, write_json, CsvTable};
use crate::kernel::{balancing_residual, band_theta_integral, frozen_projection, BalancingReport};
use crate::lawlor::{
    neck_constant, params_from_phases, phases_from_params, End, Neck, NeckDescriptor, NeckParams, PhaseData,
};
use crate::norms::{check_constants, norm_report, weighted_sup, AngleField, NormParams, TimeSlice};
use crate::numerics::loglog_slope;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

pub(super) fn run(command: &Command, cfg: &RunConfig) -> Result<()> {
    match command {
        Command::Neck(_) => neck(&cfg.typed()?, cfg),
        Command::Glue(_) => glue(&cfg.typed()?, cfg),
        Command::Graph(_) => graph(&cfg.typed()?, cfg),
        Command::Ode(_) => ode(&cfg.typed()?, cfg),
        Command::Project(_) => project(&cfg.typed()?, cfg),
        Command::Norms(_) => norms(&cfg.typed()?, cfg),
        Command::Report(_) => report(&cfg.typed()?, cfg),
    }
}

fn provenance(operation: &str, parameters: Value) -> Value {
    json!({"operation": operation, "parameters": parameters})
}

fn emit(cfg: &RunConfig, report: &Value) -> Result<()> {
    write_json(&cfg.output_dir.join("report.json"), report)?;
    print!("{}", to_json_pretty(report)?);
    Ok(())
}

fn neck_params(m: Option<usize>, a: &Option<Vec<f64>>) -> Result<NeckParams> {
    match (m, a) {
        (Some(m), Some(a)) if a.len() != m => {
            Err(Error::Config(format!("m = {m} but {} Lawlor parameters were given", a.len())))
        }
        (_, Some(a)) => NeckParams::new(a.clone()),
        (Some(m), None) if m < 3 => Err(Error::Config(format!("m must be at least 3, got {m}"))),
        (Some(m), None) => Ok(NeckParams::symmetric(m)),
        (None, None) => Ok(NeckParams::symmetric(3)),
    }
}

fn neck(args: &NeckArgs, cfg: &RunConfig) -> Result<()> {
    let (params, source) = match (&args.phi, args.area) {
        (Some(phi), Some(area)) => {
            if args.a.is_some() {
                return Err(Error::Config("give either a or (phi, A), not both".into()));
            }
            let target = PhaseData { phi: phi.clone(), area };
            target.validate()?;
            (params_from_phases(&target)?, "lawlor::params_from_phases")
        }
        (Some(_), None) | (None, Some(_)) => return Err(Error::Config("the inverse map needs both phi and A".into())),
        (None, None) => (neck_params(args.m, &args.a)?, "input"),
    };
    let m = params.m();
    let desc = NeckDescriptor::new(&params)?;
    let asym = neck_constant(&params)?;
    let back = params_from_phases(&phases_from_params(&params)?)?;
    let roundtrip = params.a.iter().zip(&back.a).map(|(x, y)| ((x - y) / x).abs()).fold(0.0, f64::max);

    let instances = args.instances.unwrap_or(10);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let (mut dphi, mut darea, mut dc) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..instances {
        let lambda: f64 = rng.gen_range(0.5..2.0);
        let eps: f64 = rng.gen_range(0.05..0.5);
        let scaled = phases_from_params(&params.scaled(lambda))?;
        for (x, y) in scaled.phi.iter().zip(&desc.phi) {
            dphi = dphi.max((x - y).abs());
        }
        darea = darea.max((scaled.area / (lambda.powf(-0.5 * m as f64) * desc.area) - 1.0).abs());
        let dil = neck_constant(&params.dilated(eps))?.c_plus;
        dc = dc.max((dil / (eps * eps * desc.c_plus) - 1.0).abs());
    }
    let p = json!({"a": params.a, "m": m});
    let report = json!({
        "command": "neck",
        "m": m,
        "a": params.a,
        "phi": desc.phi,
        "A": desc.area,
        "c_plus": desc.c_plus,
        "c_minus": asym.c_minus,
        "gamma": asym.gamma,
        "roundtrip_error": roundtrip,
        "scaling": {
            "instances": instances,
            "seed": cfg.seed,
            "phi_invariance": dphi,
            "area_scaling": darea,
            "c_plus_dilation": dc,
        },
        "provenance": {
            "a": provenance(source, json!({"phi": args.phi, "A": args.area})),
            "phi": provenance("lawlor::phases_from_params", p.clone()),
            "A": provenance("lawlor::area_constant", p.clone()),
            "c_plus": provenance("lawlor::neck_constant", p.clone()),
            "roundtrip_error": provenance("lawlor::params_from_phases . lawlor::phases_from_params", p.clone()),
            "scaling": provenance("lawlor::phases_from_params, lawlor::neck_constant on a*lambda, a/eps^2; lambda in [0.5, 2), eps in [0.05, 0.5)", json!({"seed": cfg.seed, "instances": instances})),
        },
    });
    emit(cfg, &report)
}

struct Geometry {
    neck: Arc<Neck>,
    profile: GlueProfile,
    lattice: TorusLattice,
    resolution: Resolution,
}

impl Geometry {
    fn new(g: &GeometryArgs) -> Result<Self> {
        let params = neck_params(g.m, &g.a)?;
        let m = params.m();
        let neck = Arc::new(Neck::new(params));
        let base = GlueProfile::standard(0.1);
        let profile = GlueProfile {
            m,
            r1: g.r1.unwrap_or(base.r1),
            r2: g.r2.unwrap_or(base.r2),
            hbar: g.hbar.unwrap_or(base.hbar),
            tau: g.tau.unwrap_or(base.tau),
            eps: base.eps,
        };
        let lattice = TorusLattice::new(&neck.phi, g.side1.unwrap_or(10.0), g.side2.unwrap_or(10.0))?;
        let mut resolution = match g.resolution.as_deref() {
            None | Some("default") => Resolution::default(),
            Some("coarse") => Resolution::coarse(),
            Some(other) => return Err(Error::Config(format!("resolution must be `default` or `coarse`, got `{other}`"))),
        };
        if let Some(l) = g.sphere_level {
            resolution.sphere_level = l;
        }
        Ok(Geometry { neck, profile, lattice, resolution })
    }

    fn mesh(&self, eps: f64) -> Result<MeshedImmersion> {
        build_mesh(&self.profile.with_eps(eps), self.neck.clone(), &self.lattice, &self.resolution)
    }

    fn ode_coefficient(&self) -> f64 {
        ode_coefficient(self.neck.area, self.neck.c_plus, self.lattice.volume1(), self.lattice.volume2())
    }

    fn describe(&self) -> Value {
        json!({
            "m": self.profile.m,
            "a": self.neck.params.a,
            "R1": self.profile.r1,
            "R2": self.profile.r2,
            "hbar": self.profile.hbar,
            "tau": self.profile.tau,
            "side1": self.lattice.side1,
            "side2": self.lattice.side2,
            "resolution": self.resolution,
        })
    }
}

fn eps_list(eps: &Option<Vec<f64>>) -> Result<Vec<f64>> {
    let v = eps.clone().unwrap_or_else(|| vec![0.1, 0.05, 0.025]);
    if v.is_empty() {
        return Err(Error::Config("eps list is empty".into()));
    }
    Ok(v)
}

fn fit(x: &[f64], y: &[f64]) -> Option<f64> {
    let ok = x.len() >= 2 && x.iter().chain(y).all(|v| *v > 0.0 && v.is_finite());
    ok.then(|| loglog_slope(x, y))
}

fn glue(args: &GlueArgs, cfg: &RunConfig) -> Result<()> {
    let geo = Geometry::new(&args.geometry)?;
    let eps = eps_list(&args.eps)?;
    let mut summaries = Vec::new();
    let mut rows = Vec::new();
    let mut plot = CsvTable::new(&["eps", "log_eps", "sup_theta", "log_sup_theta", "sup_normA", "log_sup_normA"]);
    for (k, &e) in eps.iter().enumerate() {
        let mesh = geo.mesh(e)?;
        if k == 0 && args.mesh.unwrap_or(true) {
            let file = std::fs::File::create(cfg.output_dir.join("mesh.jsonl"))?;
            write_mesh_jsonl(&mesh, &mut BufWriter::new(file))?;
        }
        let s = mesh.summary();
        let scale = e.powi(geo.profile.m as i32) * geo.neck.area;
        plot.push(vec![e, e.ln(), s.sup_theta, s.sup_theta.ln(), s.sup_norm_a, s.sup_norm_a.ln()]);
        rows.push(json!({
            "eps": e,
            "sup_theta": s.sup_theta,
            "sup_normA": s.sup_norm_a,
            "V1": s.v1,
            "V2": s.v2,
            "samples": s.samples,
            "volume": s.volume,
            "band_theta_lower": band_theta_integral(&mesh, End::Minus) / scale,
            "band_theta_upper": band_theta_integral(&mesh, End::Plus) / scale,
        }));
        summaries.push(s);
    }
    summary_table(&summaries).write(&cfg.output_dir.join("summary.csv"))?;
    plot.write(&cfg.output_dir.join("plotdata_glue.csv"))?;
    let xs: Vec<f64> = summaries.iter().map(|s| s.eps).collect();
    let th: Vec<f64> = summaries.iter().map(|s| s.sup_theta).collect();
    let na: Vec<f64> = summaries.iter().map(|s| s.sup_norm_a).collect();
    let params = geo.describe();
    let report = json!({
        "command": "glue",
        "geometry": params,
        "meshes": rows,
        "theta_exponent": fit(&xs, &th),
        "theta_exponent_expected": geo.profile.m as f64 * (1.0 - geo.profile.tau),
        "curvature_exponent": fit(&xs, &na),
        "provenance": {
            "meshes": provenance("glue::build_mesh, MeshedImmersion::summary", json!({"eps": eps, "geometry": params})),
            "band_theta": provenance("kernel::band_theta_integral / (eps^m A)", json!({"eps": eps})),
            "theta_exponent": provenance("numerics::loglog_slope of sup_theta against eps", json!({"eps": eps})),
            "curvature_exponent": provenance("numerics::loglog_slope of sup_normA against eps", json!({"eps": eps})),
        },
    });
    emit(cfg, &report)
}

fn graph(args: &GraphArgs, cfg: &RunConfig) -> Result<()> {
    let g = match &args.file {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str::<DesingGraph>(&text)
                .map_err(|e| Error::Config(format!("{} is not a graph description: {e}", path.display())))?
        }
        None => DesingGraph::torus(args.v1.unwrap_or(100.0), args.v2.unwrap_or(100.0), args.c.unwrap_or(1.0)),
    };
    g.validate()?;
    let rates = match (&args.rates, args.rate) {
        (Some(_), Some(_)) => return Err(Error::Config("give either rate or rates".into())),
        (Some(r), None) => r.clone(),
        (None, r) => vec![r.unwrap_or(1.0); g.edges.len()],
    };
    let constants = g.solve_constants(&rates)?;
    let residual = g.matching_residual(&constants, &rates)?;
    let gram = g.gram()?;
    let weighted: f64 = g.vertices.iter().zip(&constants).map(|(v, c)| v.volume * c).sum();
    let mut table = CsvTable::new(&["vertex", "volume", "C"]);
    let vertices: Vec<Value> = g
        .vertices
        .iter()
        .zip(&constants)
        .enumerate()
        .map(|(k, (v, c))| {
            table.push(vec![k as f64, v.volume, *c]);
            json!({"id": v.id, "volume": v.volume, "C": c})
        })
        .collect();
    let edges: Vec<Value> = g
        .edges
        .iter()
        .zip(&rates)
        .map(|(e, r)| json!({"id": e.id, "tail": e.tail, "head": e.head, "c": e.c, "rate": r}))
        .collect();
    table.write(&cfg.output_dir.join("summary.csv"))?;
    let p = json!({"graph": g, "rates": rates});
    let report = json!({
        "command": "graph",
        "vertices": vertices,
        "edges": edges,
        "matching_residual": residual.iter().map(|v| v.abs()).fold(0.0, f64::max),
        "weighted_sum": weighted,
        "is_tree": g.is_tree(),
        "gram": {"condition": gram.condition, "min_eigenvalue": gram.min_eigenvalue, "asymmetry": gram.asymmetry},
        "provenance": {
            "C": provenance("graph::DesingGraph::solve_constants", p.clone()),
            "matching_residual": provenance("graph::DesingGraph::matching_residual", p.clone()),
            "weighted_sum": provenance("sum_b V_b C_b", Value::Null),
            "gram": provenance("graph::DesingGraph::gram", p),
        },
    });
    emit(cfg, &report)
}

fn ode(args: &OdeArgs, cfg: &RunConfig) -> Result<()> {
    let m = args.m.unwrap_or(3);
    if m < 3 {
        return Err(Error::Config(format!("m must be at least 3, got {m}")));
    }
    let (c, c_source) = match args.c {
        Some(c) => (c, json!({"c": c})),
        None => {
            let desc = NeckDescriptor::new(&NeckParams::symmetric(m))?;
            let area = args.area.unwrap_or(desc.area);
            let c_plus = args.c_plus.unwrap_or(desc.c_plus);
            let (v1, v2) = (args.v1.unwrap_or(100.0), args.v2.unwrap_or(100.0));
            (ode_coefficient(area, c_plus, v1, v2), json!({"A": area, "c_plus": c_plus, "V1": v1, "V2": v2}))
        }
    };
    let h = match (args.h, &args.h_times, &args.h_values) {
        (Some(_), Some(_), _) | (Some(_), _, Some(_)) => return Err(Error::Config("give either h or (h_times, h_values)".into())),
        (Some(k), None, None) => HSpec::Const(k),
        (None, Some(t), Some(v)) => HSpec::Samples(MonotoneCubic::new(t.clone(), v.clone())?),
        (None, Some(_), None) | (None, None, Some(_)) => {
            return Err(Error::Config("h samples need both h_times and h_values".into()))
        }
        (None, None, None) => HSpec::Zero,
    };
    let is_zero = matches!(h, HSpec::Zero);
    let schedule = match (args.lambda, args.eps0) {
        (Some(_), Some(_)) => return Err(Error::Config("give either lambda or eps0".into())),
        (Some(l), None) => NeckSchedule::new(m, l, c, h.clone())?,
        (None, e) => NeckSchedule::from_eps0(m, e.unwrap_or(0.1), c, h.clone())?,
    };
    let lambda = schedule.lambda;
    let horizon = args.horizon.unwrap_or(100.0);
    if !(horizon > 1.0) {
        return Err(Error::Config(format!("horizon must exceed 1, got {horizon}")));
    }
    let t_end = horizon * lambda;
    let n = args.samples.unwrap_or(400);
    let alpha = args.alpha.unwrap_or(0.01);
    let tol = args.tol.unwrap_or(1e-12);
    let path = schedule.sample_path(lambda, t_end, n)?;
    let e_start = schedule.eps(lambda)?;
    let numeric = integrate_balancing(m, c, &h, lambda, e_start, t_end, tol)?;
    let mut num_err = 0.0f64;
    let mut cf_err = 0.0f64;
    let mut res = 0.0f64;
    let mut table = CsvTable::new(&["t", "eps", "deps_dt"]);
    let mut plot = CsvTable::new(&["t", "eps", "deps_dt", "log_t", "log_eps"]);
    for (k, &t) in path.times.iter().enumerate() {
        let e = path.values[k][0];
        let de = path.derivatives[k][0];
        if is_zero {
            cf_err = cf_err.max((closed_form(m, e_start, c, t - lambda) / e - 1.0).abs());
        }
        res = res.max((schedule.ode_residual(t)? / (c * e.powi(m as i32))).abs());
        table.push(vec![t, e, de]);
        plot.push(vec![t, e, de, t.ln(), e.ln()]);
    }
    for (t, v) in numeric.times.iter().zip(&numeric.values) {
        num_err = num_err.max((v[0] / schedule.eps(*t)? - 1.0).abs());
    }
    table.write(&cfg.output_dir.join("summary.csv"))?;
    plot.write(&cfg.output_dir.join("plotdata_ode.csv"))?;
    let assumption = validate_assumption(&path, m, alpha)?;
    let stride = (n / 40).max(1);
    let sub: Vec<usize> = (0..n).step_by(stride).chain(std::iter::once(n - 1)).collect();
    let mut sub_idx = sub.clone();
    sub_idx.dedup();
    let params = json!({"m": m, "c": c, "c_from": c_source, "Lambda": lambda, "h": format!("{h:?}"), "horizon": horizon, "samples": n});
    let report = json!({
        "command": "ode",
        "m": m,
        "c": c,
        "Lambda": lambda,
        "eps0": e_start,
        "t_end": t_end,
        "h": format!("{h:?}"),
        "numeric_max_rel_error": num_err,
        "closed_form_max_rel_error": if is_zero { Some(cf_err) } else { None },
        "ode_residual_max": res,
        "assumption": assumption,
        "path": {
            "t": sub_idx.iter().map(|&k| path.times[k]).collect::<Vec<_>>(),
            "eps": sub_idx.iter().map(|&k| path.values[k][0]).collect::<Vec<_>>(),
        },
        "provenance": {
            "path": provenance("dynamics::NeckSchedule::sample_path", params.clone()),
            "numeric_max_rel_error": provenance("dynamics::integrate_balancing at its accepted steps against the explicit schedule", json!({"tol": tol})),
            "closed_form_max_rel_error": provenance("dynamics::closed_form(t - Lambda) against the explicit schedule", params.clone()),
            "ode_residual_max": provenance("dynamics::NeckSchedule::ode_residual / (c eps^m)", params.clone()),
            "assumption": provenance("dynamics::validate_assumption", json!({"alpha": alpha})),
        },
    });
    emit(cfg, &report)
}

fn balancing_table(r: &BalancingReport, dir: &Path) -> Result<()> {
    let mut table = CsvTable::new(&["eps", "dteps2", "Pi_w", "Pi_1", "closed_form_value", "residual", "residual_ratio"]);
    let mut plot = CsvTable::new(&["eps", "log_eps", "log_abs_residual", "log_abs_Pi_1", "log_abs_Pi_w"]);
    for row in &r.rows {
        table.push(vec![
            row.eps,
            row.dteps2,
            row.pi_w,
            row.pi_1,
            row.closed_form_value,
            row.residual,
            row.residual_ratio.unwrap_or(f64::NAN),
        ]);
        plot.push(vec![row.eps, row.eps.ln(), row.residual.abs().ln(), row.pi_1.abs().ln(), row.pi_w.abs().ln()]);
    }
    table.write(&dir.join("summary.csv"))?;
    plot.write(&dir.join("plotdata_project.csv"))
}

fn project(args: &ProjectArgs, cfg: &RunConfig) -> Result<()> {
    let geo = Geometry::new(&args.geometry)?;
    let eps = eps_list(&args.eps)?;
    let meshes = eps.iter().map(|&e| geo.mesh(e)).collect::<Result<Vec<_>>>()?;
    let c = geo.ode_coefficient();
    let eps0 = eps.iter().cloned().fold(0.0, f64::max);
    let schedule = NeckSchedule::from_eps0(geo.profile.m, eps0, c, HSpec::Zero)?;
    let frozen = args.frozen.unwrap_or(false);
    let r = if frozen { frozen_projection(&meshes)? } else { balancing_residual(&schedule, &meshes)? };
    balancing_table(&r, &cfg.output_dir)?;
    let params = geo.describe();
    let report = json!({
        "command": "project",
        "mode": if frozen { "frozen" } else { "closed_form" },
        "geometry": params,
        "schedule": {"c": c, "Lambda": schedule.lambda, "eps0": eps0},
        "order": r.order,
        "rows": r.rows,
        "provenance": {
            "rows": provenance(
                if frozen { "kernel::frozen_projection" } else { "kernel::balancing_residual" },
                json!({"eps": eps, "geometry": params}),
            ),
            "schedule": provenance("dynamics::NeckSchedule::from_eps0 with c = dynamics::ode_coefficient(A, c_plus, V1, V2)", Value::Null),
        },
    });
    emit(cfg, &report)
}

fn norms(args: &NormsArgs, cfg: &RunConfig) -> Result<()> {
    let geo = Geometry::new(&args.geometry)?;
    let m = geo.profile.m;
    let c = geo.ode_coefficient();
    let schedule = NeckSchedule::from_eps0(m, args.eps0.unwrap_or(0.05), c, HSpec::Zero)?;
    let lambda = schedule.lambda;
    let base = NormParams::example(m, 0.05, lambda);
    let p = NormParams {
        mu: args.mu.unwrap_or(base.mu),
        nu: args.nu.unwrap_or(base.nu),
        alpha: args.alpha.unwrap_or(base.alpha),
        zeta: args.zeta.unwrap_or(base.zeta),
        lambda,
        tau: args.norm_tau.unwrap_or(base.tau),
    };
    let constants = check_constants(&p, m)?;
    let shift = args.nu_shift.unwrap_or(2.0);
    let ps = p.with_nu_shift(shift);
    let n = args.slices.unwrap_or(3);
    if n == 0 {
        return Err(Error::Config("need at least one slice".into()));
    }
    let times: Vec<f64> = (0..n).map(|k| lambda * 2f64.powi(k as i32)).collect();
    let meshes = times.iter().map(|&t| geo.mesh(schedule.eps(t)?)).collect::<Result<Vec<_>>>()?;
    let slices: Vec<TimeSlice> = times.iter().zip(&meshes).map(|(t, mesh)| TimeSlice { t: *t, mesh }).collect();
    let field = AngleField { schedule: &schedule };
    let budget = args.budget.unwrap_or(4000);
    let norms = norm_report(&field, &slices, &ps, budget, cfg.seed)?;
    let mut table = CsvTable::new(&["t", "eps", "weighted_sup"]);
    let mut plot = CsvTable::new(&["t", "log_t", "weighted_sup", "log_weighted_sup"]);
    let mut per = Vec::new();
    for s in &slices {
        let v = weighted_sup(&field, std::slice::from_ref(s), &ps)?;
        table.push(vec![s.t, s.mesh.profile.eps, v]);
        plot.push(vec![s.t, s.t.ln(), v, v.ln()]);
        per.push(json!({"t": s.t, "eps": s.mesh.profile.eps, "weighted_sup": v}));
    }
    table.write(&cfg.output_dir.join("summary.csv"))?;
    plot.write(&cfg.output_dir.join("plotdata_norms.csv"))?;
    let exponent = if n >= 2 {
        let a = weighted_sup(&field, &slices[..n - 1], &ps)?;
        let b = weighted_sup(&field, &slices[1..], &ps)?;
        Some((b / a).log2())
    } else {
        None
    };
    let tau = geo.profile.tau;
    let expected = p.mu - (tau * (p.nu + 2.0) + (1.0 - tau) * m as f64) / (m as f64 - 2.0);
    let report = json!({
        "command": "norms",
        "params": p,
        "nu_shift": shift,
        "constants": constants,
        "norms": norms,
        "slices": per,
        "start_time_exponent": exponent,
        "start_time_exponent_expected": expected,
        "provenance": {
            "constants": provenance("norms::check_constants", json!({"params": p, "m": m})),
            "norms": provenance("norms::norm_report on the Lagrangian angle along the closed-form schedule", json!({"budget": budget, "seed": cfg.seed, "times": times, "nu": ps.nu})),
            "slices": provenance("norms::weighted_sup per slice", Value::Null),
            "start_time_exponent": provenance("log2 of weighted_sup from 2 Lambda over weighted_sup from Lambda", Value::Null),
        },
    });
    emit(cfg, &report)
}

fn log_rows(run: usize, xs: &[f64], ys: &[f64], table: &mut CsvTable) {
    for (x, y) in xs.iter().zip(ys) {
        table.push(vec![run as f64, x.ln(), y.abs().ln()]);
    }
}

fn numbers(v: &Value, key: &str) -> Vec<f64> {
    v.get(key).and_then(|x| x.as_array()).map(|a| a.iter().filter_map(|x| x.as_f64()).collect()).unwrap_or_default()
}

fn column(rows: &Value, key: &str) -> Vec<f64> {
    rows.as_array()
        .map(|a| a.iter().filter_map(|r| r.get(key).and_then(|x| x.as_f64())).collect())
        .unwrap_or_default()
}

fn report(args: &ReportArgs, cfg: &RunConfig) -> Result<()> {
    let root = args.root.clone().unwrap_or_else(|| cfg.output_dir.clone());
    let mut dirs: Vec<_> = std::fs::read_dir(&root)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", root.display())))?
        .filter_map(|d| d.ok())
        .filter(|d| d.path().join("report.json").is_file())
        .map(|d| d.file_name().to_string_lossy().into_owned())
        .collect();
    dirs.sort();
    let mut runs = Vec::new();
    let mut fits = Vec::new();
    let mut theta = CsvTable::new(&["run", "log_eps", "log_sup_theta"]);
    let mut curvature = CsvTable::new(&["run", "log_eps", "log_sup_normA"]);
    let mut residual = CsvTable::new(&["run", "log_eps", "log_abs_residual"]);
    let mut schedule = CsvTable::new(&["run", "log_t", "log_eps"]);
    let mut weighted = CsvTable::new(&["run", "log_t", "log_weighted_sup"]);
    for (k, name) in dirs.iter().enumerate() {
        let text = std::fs::read_to_string(root.join(name).join("report.json"))?;
        let v: Value = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{name}/report.json is not valid JSON: {e}")))?;
        let command = v.get("command").and_then(|c| c.as_str()).unwrap_or("unknown").to_string();
        let mut fit_of = |quantity: &str, xs: &[f64], ys: &[f64]| {
            let ys: Vec<f64> = ys.iter().map(|y| y.abs()).collect();
            fits.push(json!({"run": name, "quantity": quantity, "slope": fit(xs, &ys), "points": xs.len()}));
        };
        match command.as_str() {
            "glue" => {
                let rows = &v["meshes"];
                let (e, th, na) = (column(rows, "eps"), column(rows, "sup_theta"), column(rows, "sup_normA"));
                log_rows(k, &e, &th, &mut theta);
                log_rows(k, &e, &na, &mut curvature);
                fit_of("sup_theta vs eps", &e, &th);
                fit_of("sup_normA vs eps", &e, &na);
            }
            "project" => {
                let rows = &v["rows"];
                let (e, r) = (column(rows, "eps"), column(rows, "residual"));
                log_rows(k, &e, &r, &mut residual);
                fit_of("residual vs eps", &e, &r);
            }
            "ode" => {
                let (t, e) = (numbers(&v["path"], "t"), numbers(&v["path"], "eps"));
                log_rows(k, &t, &e, &mut schedule);
                fit_of("eps vs t", &t, &e);
            }
            "norms" => {
                let rows = &v["slices"];
                let (t, s) = (column(rows, "t"), column(rows, "weighted_sup"));
                log_rows(k, &t, &s, &mut weighted);
                fit_of("weighted_sup vs t", &t, &s);
            }
            _ => {}
        }
        runs.push(json!({"run": name, "command": command, "report": v}));
    }
    let root_out = cfg.output_dir.as_path();
    theta.write(&root_out.join("plotdata_theta.csv"))?;
    curvature.write(&root_out.join("plotdata_curvature.csv"))?;
    residual.write(&root_out.join("plotdata_residual.csv"))?;
    schedule.write(&root_out.join("plotdata_eps.csv"))?;
    weighted.write(&root_out.join("plotdata_norms.csv"))?;
    let report = json!({
        "command": "report",
        "runs": runs,
        "fits": fits,
        "provenance": {
            "runs": provenance("report.json of each subdirectory, in name order", json!({"root": root.display().to_string()})),
            "fits": provenance("numerics::loglog_slope", Value::Null),
        },
    });
    write_json(&root_out.join("report.json"), &report)?;
    print!("{}", to_json_pretty(&json!({"runs": dirs, "fits": report["fits"]}))?);
    Ok(())
}
