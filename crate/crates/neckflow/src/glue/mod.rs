//! The glued desingularization N^eps of two special Lagrangian tori meeting at a point.

mod lattice;
mod mesh;
mod potential;
mod profile;

pub use lattice::TorusLattice;
pub use mesh::{
    build_mesh, fd_metric, graph_angle, fd_second_fundamental, induced_metric, lagrangian_angle, radial_breakpoints,
    second_fundamental, second_fundamental_norm, tip_half_length, AngleMethod, Chart, MeshSummary,
    MeshedImmersion, Region, Resolution, Sample,
};
pub use potential::{q_eps_derivative, q_jet, q_potential, PotentialJet};
pub use profile::{cutoff_chi, cutoff_derivative_bounds, cutoff_jet, GlueProfile};

use crate::error::Result;
use crate::io::{json_line, CsvTable};
use serde_json::json;
use std::io::Write;

/// Writes one JSON record per sample: {tag, coords, point, metric, theta, normA, rho}.
pub fn write_mesh_jsonl<W: Write>(mesh: &MeshedImmersion, out: &mut W) -> Result<()> {
    for s in &mesh.samples {
        let rec = json!({
            "tag": s.tag.label(),
            "coords": s.coords,
            "point": s.point,
            "metric": s.metric,
            "theta": s.theta,
            "normA": s.norm_a,
            "rho": s.rho,
        });
        out.write_all(json_line(&rec)?.as_bytes())?;
    }
    Ok(())
}

/// Summary table with one row per mesh: eps, sup_theta, sup_normA, V1, V2.
pub fn summary_table(summaries: &[MeshSummary]) -> CsvTable {
    let mut t = CsvTable::new(&["eps", "sup_theta", "sup_normA", "V1", "V2"]);
    for s in summaries {
        t.push(vec![s.eps, s.sup_theta, s.sup_norm_a, s.v1, s.v2]);
    }
    t
}
