//! Builds the glued desingularization of two flat special Lagrangian 3-tori
//! for several neck sizes and prints how the Lagrangian angle and the second
//! fundamental form scale.
//!
//! Run with `cargo run --release --example glued_torus`.

use neckflow::glue::{build_mesh, GlueProfile, Resolution, TorusLattice};
use neckflow::lawlor::{Neck, NeckParams};
use neckflow::numerics::loglog_slope;
use std::sync::Arc;

fn main() -> neckflow::Result<()> {
    let neck = Arc::new(Neck::new(NeckParams::symmetric(3)));
    let lattice = TorusLattice::new(&neck.phi, 10.0, 10.0)?;
    let resolution = Resolution::coarse();
    let eps = [0.1, 0.05, 0.025];
    let mut theta = Vec::new();
    let mut curvature = Vec::new();
    println!("{:>8} {:>10} {:>14} {:>14}", "eps", "samples", "sup|theta|", "sup|A|");
    for &e in &eps {
        let mesh = build_mesh(&GlueProfile::standard(e), neck.clone(), &lattice, &resolution)?;
        let s = mesh.summary();
        println!("{:>8} {:>10} {:>14.6e} {:>14.6e}", e, s.samples, s.sup_theta, s.sup_norm_a);
        theta.push(s.sup_theta);
        curvature.push(s.sup_norm_a);
    }
    let tau = GlueProfile::standard(0.1).tau;
    println!("sup|theta| ~ eps^{:.4} (m(1 - tau) = {:.4})", loglog_slope(&eps, &theta), 3.0 * (1.0 - tau));
    println!("sup|A|     ~ eps^{:.4}", loglog_slope(&eps, &curvature));
    Ok(())
}
