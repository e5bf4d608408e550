//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Reference values are recomputed here from closed forms and from raw mesh
//! samples rather than taken from the library's own summary routines.

use neckflow::dynamics::{integrate_balancing, ode_coefficient, validate_assumption, HSpec, NeckSchedule};
use neckflow::glue::{build_mesh, Chart, GlueProfile, MeshedImmersion, Region, Resolution, TorusLattice};
use neckflow::graph::{DesingGraph, Edge, Vertex};
use neckflow::kernel::{balancing_residual, kernel_element, normalized_kernel};
use neckflow::lawlor::{
    end_potential, neck_constant, params_from_phases, phases_from_params, special_check, End, Neck, NeckParams,
};
use neckflow::norms::{check_constants, NormParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

/// Criteria expected to fail; see the project notes for the analysis.
const KNOWN_FAIL: &[&str] = &["11b"];

const SEED: u64 = 20_261_014;

struct Outcome {
    id: &'static str,
    title: &'static str,
    pass: bool,
    detail: String,
}

fn outcome(id: &'static str, title: &'static str, pass: bool, detail: String) -> Outcome {
    Outcome { id, title, pass, detail }
}

fn slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.abs().ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / n).collect()
}

fn random_unit(rng: &mut ChaCha8Rng, m: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 0.1 && n < 1.0 {
            return unit(&v);
        }
    }
}

/// Meshes of the symmetric m = 3 glued torus, shared between criteria.
struct Meshes {
    neck: Arc<Neck>,
    lattice: TorusLattice,
    built: BTreeMap<u64, MeshedImmersion>,
}

impl Meshes {
    fn new() -> Self {
        let neck = Arc::new(Neck::new(NeckParams::symmetric(3)));
        let lattice = TorusLattice::new(&neck.phi, 10.0, 10.0).unwrap();
        Meshes { neck, lattice, built: BTreeMap::new() }
    }

    fn get(&mut self, eps: f64) -> neckflow::Result<&MeshedImmersion> {
        let key = eps.to_bits();
        if !self.built.contains_key(&key) {
            let mesh = build_mesh(&GlueProfile::standard(eps), self.neck.clone(), &self.lattice, &Resolution::default())?;
            self.built.insert(key, mesh);
        }
        Ok(&self.built[&key])
    }

    fn coefficient(&self) -> f64 {
        ode_coefficient(self.neck.area, self.neck.c_plus, self.lattice.volume1(), self.lattice.volume2())
    }
}

fn c1() -> neckflow::Result<Outcome> {
    let start = Instant::now();
    let ph = phases_from_params(&NeckParams::new(vec![1.0, 1.0, 1.0])?)?;
    let elapsed = start.elapsed().as_secs_f64();
    let dphi = ph.phi.iter().map(|p| (p - PI / 3.0).abs()).fold(0.0, f64::max);
    let darea = (ph.area - 4.0 * PI).abs();
    let pass = dphi <= 1e-8 && darea <= 1e-12 && elapsed < 1.0;
    Ok(outcome("1", "symmetric Lawlor phases", pass, format!("|phi - pi/3| = {dphi:.2e}, |A - 4 pi| = {darea:.2e}, {elapsed:.3} s")))
}

fn c2() -> neckflow::Result<Outcome> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let a: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
        let back = params_from_phases(&phases_from_params(&NeckParams::new(a.clone())?)?)?;
        for (x, y) in a.iter().zip(&back.a) {
            worst = worst.max((x - y).abs() / x);
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    Ok(outcome("2", "params -> phases -> params round trip", worst <= 1e-6 && elapsed < 10.0, format!("max rel error {worst:.2e} over 20 draws, {elapsed:.2} s")))
}

fn c3() -> neckflow::Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let (mut dphi, mut darea, mut dc) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..10 {
        let a: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
        let lambda: f64 = rng.gen_range(0.3..3.0);
        let eps: f64 = rng.gen_range(0.05..0.8);
        let base = NeckParams::new(a.clone())?;
        let p0 = phases_from_params(&base)?;
        let scaled = phases_from_params(&NeckParams::new(a.iter().map(|v| v * lambda).collect())?)?;
        for (x, y) in p0.phi.iter().zip(&scaled.phi) {
            dphi = dphi.max((x - y).abs());
        }
        darea = darea.max(rel(scaled.area, lambda.powf(-1.5) * p0.area));
        let dilated = NeckParams::new(a.iter().map(|v| v / (eps * eps)).collect())?;
        dc = dc.max(rel(neck_constant(&dilated)?.c_plus, eps * eps * neck_constant(&base)?.c_plus));
    }
    let pass = dphi <= 1e-8 && darea <= 1e-8 && dc <= 1e-8;
    Ok(outcome("3", "scaling laws of phi, A, c_plus", pass, format!("phi {dphi:.2e}, A {darea:.2e}, c_plus {dc:.2e}")))
}

fn c4() -> neckflow::Result<Outcome> {
    let neck = Neck::new(NeckParams::new(vec![0.8, 1.1, 1.6])?);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut samples = Vec::new();
    for k in 0..40 {
        let s = -3.0 + 6.0 * k as f64 / 39.0;
        samples.push(neck.point(s, &random_unit(&mut rng, 3))?);
    }
    let coarse = special_check(&neck, &samples, 2e-2)?;
    let fine = special_check(&neck, &samples, 1e-2)?;
    let small = special_check(&neck, &samples, 1e-3)?;
    let factor = coarse.max_omega / fine.max_omega;
    let pass = (2.5..=6.0).contains(&factor) && small.angle_spread <= 1e-4;
    Ok(outcome(
        "4",
        "special Lagrangian residual is O(h^2)",
        pass,
        format!("max|omega| {:.3e} -> {:.3e} (factor {factor:.3}), angle spread {:.2e} at h = 1e-3", coarse.max_omega, fine.max_omega, small.angle_spread),
    ))
}

fn c5() -> neckflow::Result<Outcome> {
    let r: Vec<f64> = (0..12).map(|k| 10.0 * 10f64.powf(k as f64 / 11.0)).collect();
    let mut worst = 0.0f64;
    let mut fits = Vec::new();
    for a in [vec![1.0, 1.0, 1.0], vec![0.7, 1.3, 2.0], vec![1.0, 1.0, 1.0, 1.0]] {
        let neck = Neck::new(NeckParams::new(a)?);
        let m = neck.m();
        let sigma = unit(&(0..m).map(|k| 1.0 + k as f64).collect::<Vec<_>>());
        for end in [End::Minus, End::Plus] {
            let v = r.iter().map(|&r| end_potential(&neck, end, &sigma, r)).collect::<neckflow::Result<Vec<_>>>()?;
            let s = slope(&r, &v);
            let expected = 2.0 - m as f64;
            worst = worst.max(rel(s, expected));
            fits.push(format!("m={m} {}: {s:.5}", end.label()));
        }
    }
    Ok(outcome("5", "end potential decays like r^(2-m)", worst <= 0.1, format!("{} (worst rel {worst:.2e})", fits.join(", "))))
}

fn c6(meshes: &mut Meshes) -> neckflow::Result<Outcome> {
    let eps = 0.05;
    let mesh = meshes.get(eps)?;
    let p = &mesh.profile;
    let neck = &mesh.neck;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let (mut tip_gap, mut outer_gap) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let sigma = random_unit(&mut rng, 3);
        for end in [End::Minus, End::Plus] {
            for f in [0.9, 1.0, 1.1] {
                let q: Vec<f64> = sigma.iter().map(|s| s * f * eps * p.r1).collect();
                let undilated: Vec<f64> = q.iter().map(|v| v / eps).collect();
                let jet = neck.end_jet(end, &undilated)?;
                let tip = mesh.unreduced_point(&Chart::Tip { s: jet.s, x: jet.x.clone() })?;
                let graph = mesh.unreduced_point(&Chart::Graph { end, q })?;
                tip_gap = tip_gap.max(tip.iter().zip(&graph).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
            for f in [0.95, 1.0, 1.05] {
                let q: Vec<f64> = sigma.iter().map(|s| s * f * p.r2).collect();
                let graph = mesh.unreduced_point(&Chart::Graph { end, q: q.clone() })?;
                let outer = mesh.unreduced_point(&Chart::Outer { end, q })?;
                outer_gap = outer_gap.max(graph.iter().zip(&outer).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
            }
        }
    }
    let (lo, hi) = (eps.powf(p.tau), 2.0 * eps.powf(p.tau));
    let mut outside = 0.0f64;
    let mut counted = 0usize;
    for s in &mesh.samples {
        if s.radius <= lo || s.radius >= hi {
            outside = outside.max(s.theta.abs());
            counted += 1;
        }
    }
    let pass = tip_gap <= 1e-8 && outer_gap <= 1e-8 && outside <= 1e-12 && counted > 0;
    Ok(outcome(
        "6",
        "gluing seams agree and theta vanishes off the band",
        pass,
        format!("tip/intermediate {tip_gap:.2e}, intermediate/outer {outer_gap:.2e}, max|theta| off band {outside:.2e} over {counted} samples"),
    ))
}

fn c7(meshes: &mut Meshes) -> neckflow::Result<Outcome> {
    let eps = [0.1, 0.05, 0.025];
    let mut sup = Vec::new();
    let mut largest = 0usize;
    for &e in &eps {
        let mesh = meshes.get(e)?;
        largest = largest.max(mesh.samples.len());
        sup.push(mesh.samples.iter().map(|s| s.theta.abs()).fold(0.0, f64::max));
    }
    let tau = GlueProfile::standard(0.1).tau;
    let expected = 3.0 * (1.0 - tau);
    let s = slope(&eps, &sup);
    let pass = rel(s, expected) <= 0.15 && largest <= 100_000;
    Ok(outcome("7", "sup|theta| scales like eps^(m(1-tau))", pass, format!("slope {s:.5} vs {expected:.3}, largest mesh {largest} samples")))
}

fn c8() -> neckflow::Result<Outcome> {
    let (v1, v2, c, rate) = (37.0, 61.0, 1.7, -0.45);
    let torus = DesingGraph::torus(v1, v2, c);
    let k = torus.solve_constants(&[rate])?;
    let exact = [-c * v2 / (v1 + v2) * rate, c * v1 / (v1 + v2) * rate];
    let torus_err = (k[0] - exact[0]).abs().max((k[1] - exact[1]).abs());

    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let volumes: Vec<f64> = (0..5).map(|_| rng.gen_range(0.5..20.0)).collect();
    let vertices = volumes.iter().enumerate().map(|(k, v)| Vertex { id: format!("v{k}"), volume: *v }).collect();
    let mut edges = Vec::new();
    let mut target = Vec::new();
    for k in 1..5 {
        let parent = rng.gen_range(0..k);
        let c: f64 = rng.gen_range(0.2..3.0);
        let r: f64 = rng.gen_range(-2.0..2.0);
        let (tail, head) = if rng.gen_bool(0.5) { (parent, k) } else { (k, parent) };
        edges.push(Edge { id: format!("e{k}"), tail: format!("v{tail}"), head: format!("v{head}"), c });
        target.push((tail, head, c, r));
    }
    let tree = DesingGraph { vertices, edges };
    let rates: Vec<f64> = target.iter().map(|t| t.3).collect();
    let k = tree.solve_constants(&rates)?;
    let tree_err = target.iter().map(|&(t, h, c, r)| (k[h] - k[t] - c * r).abs()).fold(0.0, f64::max);
    let sum: f64 = volumes.iter().zip(&k).map(|(v, c)| v * c).sum();
    let pass = torus_err <= 1e-12 && tree_err <= 1e-12 && sum.abs() <= 1e-12;
    Ok(outcome("8", "graph matching constants", pass, format!("torus {torus_err:.2e}, tree B^T C {tree_err:.2e}, sum V_b C_b {sum:.2e}")))
}

fn c9() -> neckflow::Result<Outcome> {
    let (m, c, eps0) = (3usize, 0.207, 0.1);
    let schedule = NeckSchedule::from_eps0(m, eps0, c, HSpec::Zero)?;
    let lambda = schedule.lambda;
    let k = m as f64 - 2.0;
    let exact = |t: f64| (eps0.powf(-k) + 0.5 * k * c * (t - lambda)).powf(-1.0 / k);
    let numeric = integrate_balancing(m, c, &HSpec::Zero, lambda, eps0, 100.0 * lambda, 1e-12)?;
    let err = numeric.times.iter().zip(&numeric.values).map(|(t, v)| rel(v[0], exact(*t))).fold(0.0, f64::max);
    let path = schedule.sample_path(lambda, 100.0 * lambda, 400)?;
    let report = validate_assumption(&path, m, 0.01)?;
    Ok(outcome(
        "9",
        "balancing ODE matches the closed form",
        err <= 1e-8 && report.passes,
        format!("max rel error {err:.2e} over [Lambda, 100 Lambda], validator passes = {}", report.passes),
    ))
}

fn c10(meshes: &mut Meshes) -> neckflow::Result<Outcome> {
    let schedule = NeckSchedule::from_eps0(3, 0.1, meshes.coefficient(), HSpec::Zero)?;
    let eps = [0.1, 0.05, 0.025, 0.0125, 0.01];
    let mut t = Vec::new();
    let mut sup = Vec::new();
    for &e in &eps {
        t.push(schedule.time_of_eps(e));
        sup.push(meshes.get(e)?.samples.iter().map(|s| s.norm_a).fold(0.0, f64::max));
    }
    let s = slope(&t, &sup);
    Ok(outcome("10", "sup|A| blows up like t^(1/(m-2))", rel(s, 1.0) <= 0.05, format!("slope {s:.5} vs 1 over t in [{:.1}, {:.1}]", t[0], t[4])))
}

fn c11(meshes: &mut Meshes) -> neckflow::Result<(Outcome, Outcome)> {
    let eps = [0.1, 0.05, 0.025];
    let schedule = NeckSchedule::from_eps0(3, 0.1, meshes.coefficient(), HSpec::Zero)?;
    let tau = GlueProfile::standard(0.1).tau;
    let expected = 2f64.powf(-(1.0 + tau) * 3.0);
    let list: Vec<MeshedImmersion> = eps.iter().map(|&e| meshes.get(e).cloned()).collect::<neckflow::Result<_>>()?;
    let report = balancing_residual(&schedule, &list)?;
    let ratios: Vec<f64> = report.rows.windows(2).map(|w| w[1].residual.abs() / w[0].residual.abs()).collect();
    let worst = ratios.iter().map(|r| rel(*r, expected)).fold(0.0, f64::max);
    let a = outcome(
        "11a",
        "projection residual ratio along the schedule",
        worst <= 0.3,
        format!("ratios {ratios:.5?} vs {expected:.5}"),
    );

    let mesh = meshes.get(0.05)?;
    let scale = 0.05f64.powi(3) * mesh.neck.area;
    let band = |tag: Region| -> f64 { mesh.samples.iter().filter(|s| s.tag == tag).map(|s| s.weight * s.theta).sum::<f64>() / scale };
    let (lower, upper) = (band(Region::QMinus), band(Region::QPlus));
    let signs = lower < 0.0 && upper > 0.0;
    let magnitude = rel(-lower, 1.0).max(rel(upper, 1.0));
    let b = outcome(
        "11b",
        "frozen tip integrals are -eps^m A and +eps^m A",
        signs && magnitude <= 0.2,
        format!("integral of theta / (eps^m A): lower {lower:.5}, upper {upper:.5}"),
    );
    Ok((a, b))
}

fn c12(meshes: &mut Meshes) -> neckflow::Result<Outcome> {
    let mesh = meshes.get(0.05)?;
    let mut exact = true;
    for k in [-2.0, 0.0, 0.5, 3.0] {
        let w = kernel_element(mesh, &[k, k])?;
        exact &= w.values.iter().all(|v| *v == k);
    }
    let w = normalized_kernel(mesh)?;
    let mut integral: f64 = mesh.samples.iter().zip(&w.values).map(|(s, v)| s.weight * v).sum();
    let mut volume: f64 = mesh.samples.iter().map(|s| s.weight).sum();
    for (b, tag) in [Region::O1, Region::O2].into_iter().enumerate() {
        let k = mesh.samples.iter().position(|s| s.tag == tag).expect("outer samples exist");
        integral += mesh.outer_volumes[b] * w.values[k];
        volume += mesh.outer_volumes[b];
    }
    let quad = integral / volume;
    let sup = w.values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let pass = exact && quad.abs() <= 1e-12 && sup <= 1.0 + 1e-9;
    Ok(outcome("12", "approximate kernel sanity", pass, format!("w_(k,k) == k: {exact}, quadrature mean {quad:.2e}, sup {sup:.12}")))
}

fn c13() -> neckflow::Result<Outcome> {
    let m = 3;
    let base = NormParams::example(m, 0.05, 100.0);
    let report = check_constants(&base, m)?;
    let mut named = Vec::new();
    let mut ok = report.passes;
    for check in &report.checks {
        let width = check.upper - check.lower;
        for value in [check.lower - 0.1 * width, check.lower, check.upper, check.upper + 0.1 * width] {
            let mut p = base;
            match check.name {
                "nu" => p.nu = value,
                "alpha" => p.alpha = value,
                "tau" => p.tau = value,
                "mu" => p.mu = value,
                "zeta" => p.zeta = value,
                other => panic!("unexpected inequality {other}"),
            }
            let r = check_constants(&p, m)?;
            let right = !r.passes && r.failed == Some(check.name);
            ok &= right;
            if !right {
                named.push(format!("{} = {value} reported {:?}", check.name, r.failed));
            }
        }
    }
    let detail = if named.is_empty() {
        format!("example passes; {} boundary violations each name their inequality", 4 * report.checks.len())
    } else {
        named.join("; ")
    };
    Ok(outcome("13", "norm constants checker", ok, detail))
}

fn main() {
    let mut meshes = Meshes::new();
    let mut results: Vec<Outcome> = Vec::new();
    let single = |r: neckflow::Result<Outcome>, id: &'static str| match r {
        Ok(o) => o,
        Err(e) => outcome(id, "did not run", false, format!("error: {e}")),
    };
    results.push(single(c1(), "1"));
    results.push(single(c2(), "2"));
    results.push(single(c3(), "3"));
    results.push(single(c4(), "4"));
    results.push(single(c5(), "5"));
    results.push(single(c6(&mut meshes), "6"));
    results.push(single(c7(&mut meshes), "7"));
    results.push(single(c8(), "8"));
    results.push(single(c9(), "9"));
    results.push(single(c10(&mut meshes), "10"));
    match c11(&mut meshes) {
        Ok((a, b)) => results.extend([a, b]),
        Err(e) => results.push(outcome("11", "did not run", false, format!("error: {e}"))),
    }
    results.push(single(c12(&mut meshes), "12"));
    results.push(single(c13(), "13"));

    let mut unexpected = 0;
    for r in &results {
        let known = KNOWN_FAIL.contains(&r.id);
        let status = match (r.pass, known) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        if !r.pass && !known {
            unexpected += 1;
        }
        println!("{status:<12} {:<4} {}: {}", r.id, r.title, r.detail);
    }
    let passed = results.iter().filter(|r| r.pass).count();
    println!("{passed}/{} passed, {unexpected} unexpected failures", results.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
