//! Matching constants on the desingularization graph: the two-torus case and a
//! five-vertex tree.
//!
//! Run with `cargo run --release --example desing_graph`.

use neckflow::graph::{DesingGraph, Edge, Vertex};

fn main() -> neckflow::Result<()> {
    let torus = DesingGraph::torus(100.0, 50.0, 1.5);
    let c = torus.solve_constants(&[0.3])?;
    println!("torus: C = {c:?}");

    let volumes = [3.0, 1.0, 4.0, 1.5, 9.0];
    let vertices = volumes
        .iter()
        .enumerate()
        .map(|(k, v)| Vertex { id: format!("v{k}"), volume: *v })
        .collect();
    let links = [(0, 1, 0.8), (0, 2, 1.1), (2, 3, 0.4), (2, 4, 2.0)];
    let edges = links
        .iter()
        .enumerate()
        .map(|(k, (t, h, c))| Edge { id: format!("e{k}"), tail: format!("v{t}"), head: format!("v{h}"), c: *c })
        .collect();
    let tree = DesingGraph { vertices, edges };
    let rates = [1.0, 0.5, 2.0, 0.25];
    let c = tree.solve_constants(&rates)?;
    let residual = tree.matching_residual(&c, &rates)?;
    let weighted: f64 = volumes.iter().zip(&c).map(|(v, c)| v * c).sum();
    let gram = tree.gram()?;
    println!("tree: C = {c:?}");
    println!("  matching residual = {residual:?}");
    println!("  sum V_b C_b = {weighted:e}, Gram condition = {:.3}", gram.condition);
    Ok(())
}
