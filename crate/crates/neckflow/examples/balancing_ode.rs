//! The neck-size balancing law d(eps^2)/dt = -c eps^m: closed form, numerical
//! integration, the validator for the assumed bounds, and a perturbed schedule.
//!
//! Run with `cargo run --release --example balancing_ode`.

use neckflow::dynamics::{integrate_balancing, validate_assumption, HSpec, NeckSchedule};

fn main() -> neckflow::Result<()> {
    let (m, c) = (3, 0.2);
    let schedule = NeckSchedule::from_eps0(m, 0.1, c, HSpec::Zero)?;
    let lambda = schedule.lambda;
    println!("Lambda = {lambda:.6}");
    let numeric = integrate_balancing(m, c, &HSpec::Zero, lambda, 0.1, 100.0 * lambda, 1e-12)?;
    let mut err = 0.0f64;
    for (t, v) in numeric.times.iter().zip(&numeric.values) {
        err = err.max((v[0] / schedule.eps(*t)? - 1.0).abs());
    }
    println!("numerical vs closed form over [Lambda, 100 Lambda]: {err:.3e}");

    let path = schedule.sample_path(lambda, 100.0 * lambda, 400)?;
    let report = validate_assumption(&path, m, 0.01)?;
    for b in &report.bounds {
        println!("  {:<10} sup = {:.6}  stable = {}", b.name, b.sup, b.stable);
    }
    println!("assumed bounds hold: {}", report.passes);

    let perturbed = NeckSchedule::new(m, lambda, c, HSpec::Const(0.02))?;
    for k in [1.0, 10.0, 100.0] {
        let t = k * lambda;
        println!("t = {:>5} Lambda: eps = {:.6}, perturbed eps = {:.6}", k, schedule.eps(t)?, perturbed.eps(t)?);
    }
    Ok(())
}
