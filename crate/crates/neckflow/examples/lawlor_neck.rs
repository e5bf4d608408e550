//! Phases, area constant and asymptotics of Lawlor necks, plus the inverse map.
//!
//! Run with `cargo run --release --example lawlor_neck`.

use neckflow::lawlor::{neck_constant, params_from_phases, phases_from_params, NeckParams, PhaseData};
use std::f64::consts::PI;

fn main() -> neckflow::Result<()> {
    let sym = NeckParams::symmetric(3);
    let ph = phases_from_params(&sym)?;
    println!("a = (1,1,1): phi = {:?}, A = {:.15} (4 pi = {:.15})", ph.phi, ph.area, 4.0 * PI);

    let skew = NeckParams::new(vec![0.7, 1.3, 2.0])?;
    let ph = phases_from_params(&skew)?;
    let asym = neck_constant(&skew)?;
    println!("a = {:?}: phi = {:?}, sum = {:.15}", skew.a, ph.phi, ph.phi.iter().sum::<f64>());
    println!("  A = {:.12}, c_plus = {:.12}, gamma = {}", ph.area, asym.c_plus, asym.gamma);

    let back = params_from_phases(&ph)?;
    println!("  inverse map recovers a = {:?}", back.a);

    let target = PhaseData { phi: vec![0.5, 1.0, PI - 1.5], area: 3.0 };
    let a = params_from_phases(&target)?;
    println!("phi = {:?}, A = 3 comes from a = {:?}", target.phi, a.a);

    for lambda in [0.5, 2.0] {
        let s = phases_from_params(&skew.scaled(lambda))?;
        println!("  lambda = {lambda}: A(lambda a) / A(a) = {:.12}, lambda^(-3/2) = {:.12}", s.area / ph.area, lambda.powf(-1.5));
    }
    Ok(())
}
