//! Edge lists of the square graph and its sparse-cell extension, one edge per line.
//!
//! `cargo run --release --example aux_graph_dump -- [n] [r]`

use std::io::Write;

use rgg_hamilton::aux_graph::{build_g_double_prime, build_g_prime, dump_g_double_prime, dump_g_prime, spanning_tree};
use rgg_hamilton::tessellation::classify_cells;
use rgg_hamilton::{sample_uniform, LpExponent, Tessellation};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(60_000), |s| s.parse())?;
    let r: f64 = args.get(1).map_or(Ok(0.3), |s| s.parse())?;

    let vs = sample_uniform(n, 2);
    let t = Tessellation::new(r, LpExponent::TWO, 6)?;
    let cls = classify_cells(&t, &vs);
    let gp = build_g_prime(&t, &cls);
    let mut out = std::io::stdout().lock();
    writeln!(out, "# dense squares: {}, edges: {}", gp.node_count(), gp.edges.len())?;
    dump_g_prime(&mut out, &gp)?;

    match build_g_double_prime(&t, &cls, &gp) {
        Ok(g) => {
            writeln!(out, "# with sparse groups: {} nodes, {} edges", g.node_count(), g.edge_count())?;
            dump_g_double_prime(&mut out, &g)?;
            match spanning_tree(&g) {
                Ok(tree) => writeln!(out, "# spanning tree max degree {}", tree.max_degree())?,
                Err(e) => writeln!(out, "# {e}")?,
            }
        }
        Err(e) => writeln!(out, "# {e}")?,
    }
    Ok(())
}
