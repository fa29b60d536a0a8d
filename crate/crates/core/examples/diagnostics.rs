//! Cell densities and the structural checks for one instance, as JSON.
//!
//! `cargo run --release --example diagnostics -- [n] [r]`

use rgg_hamilton::pipeline::implied_epsilon;
use rgg_hamilton::tessellation::{choose_k, classify_cells, density_diagnostics, KSearch};
use rgg_hamilton::{
    find_hamiltonian_cycle, sample_uniform, structural_invariants, LpExponent, PipelineOptions, Tessellation,
};

fn main() -> rgg_hamilton::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(80_000), |s| s.parse()).expect("n");
    let r: f64 = args.get(1).map_or(Ok(0.21), |s| s.parse()).expect("r");
    let p = LpExponent::TWO;

    let vs = sample_uniform(n, 5);
    let eps = implied_epsilon(n, r, p);
    let choice = choose_k(r, p, eps, KSearch::default())?;
    println!(
        "eps = {eps:.4}, k = {} (K = {}, target {:.1}, met {})",
        choice.k, choice.k_count, choice.target, choice.satisfied
    );

    let t = Tessellation::new(r, p, choice.k)?;
    let cls = classify_cells(&t, &vs);
    let report = density_diagnostics(&t, &cls);
    println!("{}", serde_json::to_string_pretty(&report).expect("serializable"));

    let run = find_hamiltonian_cycle(&vs, r, p, PipelineOptions::default())?;
    let inv = structural_invariants(&run);
    println!("invariants ok = {}, every stage ran = {}", inv.ok(), inv.complete);
    println!("{inv:#?}");
    Ok(())
}
