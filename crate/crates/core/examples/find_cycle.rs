//! Builds and checks a Hamiltonian cycle on a dense instance.
//!
//! `cargo run --release --example find_cycle -- [n] [r] [p]`

use std::time::Instant;

use rgg_hamilton::{find_hamiltonian_cycle, sample_uniform, LpExponent, PipelineOptions};

fn main() -> rgg_hamilton::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(100_000), |s| s.parse()).expect("n");
    let r: f64 = args.get(1).map_or(Ok(0.2), |s| s.parse()).expect("r");
    let p: LpExponent = args.get(2).map_or(Ok(LpExponent::TWO), |s| s.parse())?;

    let vs = sample_uniform(n, 1);
    let start = Instant::now();
    let run = find_hamiltonian_cycle(&vs, r, p, PipelineOptions::default())?;
    let elapsed = start.elapsed();

    if let Some(t) = &run.tessellation {
        println!("m = {}, k = {}, cells = {}", t.m(), t.k(), t.cell_count());
    }
    match &run.outcome {
        Ok(built) => {
            println!(
                "cycle through {} vertices in {:.1} ms, verified = {}",
                built.cycle.0.len(),
                elapsed.as_secs_f64() * 1e3,
                run.verified()
            );
            println!("{:?}", built.stats);
        }
        Err(failure) => println!("no cycle: {failure}"),
    }
    Ok(())
}
