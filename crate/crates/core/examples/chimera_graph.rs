//! Builds Chimera layouts, with and without inoperative vertices, and
//! writes the graph text format.
//!
//!     cargo run --example chimera_graph

use gsdlab::io;
use gsdlab::topology::{build_chimera, ChimeraSpec, SAMPLE_DEAD_VERTICES};

fn main() -> gsdlab::Result<()> {
    let ideal = build_chimera(&ChimeraSpec::new(2, 2, 4))?;
    println!("2x2 cells: {} vertices, {} edges", ideal.vertex_count(), ideal.edge_count());
    for v in [0, 4] {
        println!("  vertex {v} neighbors {:?}", ideal.neighbors(v));
    }

    let fixture = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/data/dead_qubits.txt");
    let dead: Vec<usize> = std::fs::read_to_string(fixture)
        .expect("fixture readable")
        .lines()
        .filter(|l| !l.starts_with('#'))
        .flat_map(|l| l.split_whitespace().map(|t| t.parse().unwrap()))
        .collect();
    let damaged = build_chimera(&ChimeraSpec::new(3, 3, 4).with_dead(dead.clone()))?;
    println!("3x3 cells minus {dead:?}: {} vertices, {} edges", damaged.vertex_count(), damaged.edge_count());

    let full = build_chimera(&ChimeraSpec::new(8, 8, 4).with_dead(SAMPLE_DEAD_VERTICES.to_vec()))?;
    println!("8x8 cells minus 8: {} vertices, {} edges", full.vertex_count(), full.edge_count());

    let text = io::graph_to_string(&ideal);
    print!("{}", text.lines().take(5).collect::<Vec<_>>().join("\n"));
    println!("\n...");
    Ok(())
}
