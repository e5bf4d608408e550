//! Approximate kernel of the glued torus and the projection of the zeroth-order
//! error, both along the balancing schedule and with the neck size frozen.
//!
//! Run with `cargo run --release --example kernel_projection`.

use neckflow::dynamics::{ode_coefficient, HSpec, NeckSchedule};
use neckflow::glue::{build_mesh, GlueProfile, Resolution, TorusLattice};
use neckflow::kernel::{balancing_residual, frozen_projection, kernel_element, normalized_kernel};
use neckflow::lawlor::{Neck, NeckParams};
use std::sync::Arc;

fn main() -> neckflow::Result<()> {
    let neck = Arc::new(Neck::new(NeckParams::symmetric(3)));
    let lattice = TorusLattice::new(&neck.phi, 10.0, 10.0)?;
    let resolution = Resolution::coarse();
    let meshes = [0.1, 0.05, 0.025]
        .iter()
        .map(|&e| build_mesh(&GlueProfile::standard(e), neck.clone(), &lattice, &resolution))
        .collect::<neckflow::Result<Vec<_>>>()?;

    let constant = kernel_element(&meshes[0], &[2.0, 2.0])?;
    println!("w_(2,2): sup = {}, mean = {}", constant.sup(), constant.mean);
    let w = normalized_kernel(&meshes[0])?;
    println!("normalized kernel: mean = {:.3e}, sup = {:.12}", w.mean, w.sup());

    let c = ode_coefficient(neck.area, neck.c_plus, lattice.volume1(), lattice.volume2());
    let schedule = NeckSchedule::from_eps0(3, 0.1, c, HSpec::Zero)?;
    let report = balancing_residual(&schedule, &meshes)?;
    for row in &report.rows {
        println!("eps = {:<6} Pi_w = {:+.6e} ratio = {:?}", row.eps, row.pi_w, row.residual_ratio);
    }
    let frozen = frozen_projection(&meshes[1..2])?;
    let row = &frozen.rows[0];
    println!("frozen eps = {}: Pi_w = {:+.6e}, band integrals / (eps^m A) = {:?}", row.eps, row.pi_w, row.band_ratio);
    Ok(())
}
