//! Weighted space-time norms of the Lagrangian angle along the balancing
//! schedule, and the constraints on the norm constants.
//!
//! Run with `cargo run --release --example weighted_norms`.

use neckflow::dynamics::{ode_coefficient, HSpec, NeckSchedule};
use neckflow::glue::{build_mesh, GlueProfile, Resolution, TorusLattice};
use neckflow::lawlor::{Neck, NeckParams};
use neckflow::norms::{check_constants, norm_report, AngleField, NormParams, TimeSlice};
use std::sync::Arc;

fn main() -> neckflow::Result<()> {
    let m = 3;
    let neck = Arc::new(Neck::new(NeckParams::symmetric(m)));
    let lattice = TorusLattice::new(&neck.phi, 10.0, 10.0)?;
    let c = ode_coefficient(neck.area, neck.c_plus, lattice.volume1(), lattice.volume2());
    let schedule = NeckSchedule::from_eps0(m, 0.05, c, HSpec::Zero)?;
    let p = NormParams::example(m, 0.05, schedule.lambda);

    let constants = check_constants(&p, m)?;
    for check in &constants.checks {
        println!("{:<6} {:>10.6} in ({:?}, {:?}): {}", check.name, check.value, check.lower, check.upper, check.ok);
    }
    let mut broken = p;
    broken.alpha = 0.9;
    println!("alpha = 0.9 violates: {:?}", check_constants(&broken, m)?.failed);

    let times: Vec<f64> = (0..3).map(|k| schedule.lambda * 2f64.powi(k)).collect();
    let meshes = times
        .iter()
        .map(|&t| build_mesh(&GlueProfile::standard(schedule.eps(t)?), neck.clone(), &lattice, &Resolution::coarse()))
        .collect::<neckflow::Result<Vec<_>>>()?;
    let slices: Vec<TimeSlice> = times.iter().zip(&meshes).map(|(t, mesh)| TimeSlice { t: *t, mesh }).collect();
    let report = norm_report(&AngleField { schedule: &schedule }, &slices, &p.with_nu_shift(2.0), 2000, 7)?;
    println!("sup = {:.6e}, spatial = {:.6e}, temporal = {:.6e}", report.sup, report.spatial_seminorm, report.temporal_seminorm);
    Ok(())
}
