//! Success rate against the radius multiplier.
//!
//! `cargo run --release --example threshold_sweep -- [n] [trials]`

use rgg_hamilton::experiments::{sweep, SweepConfig};
use rgg_hamilton::tessellation::KSearch;
use rgg_hamilton::LpExponent;

fn main() -> rgg_hamilton::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n: usize = args.first().map_or(Ok(100_000), |s| s.parse()).expect("n");
    let trials: usize = args.get(1).map_or(Ok(10), |s| s.parse()).expect("trials");

    let cfg = SweepConfig {
        ns: vec![n],
        p: LpExponent::TWO,
        multipliers: vec![0.7, 1.0, 2.0, 10.0, 20.0, 30.0, 40.0],
        trials,
        base_seed: 0,
        workers: 0,
        k_search: KSearch::default(),
    };
    let report = sweep(&cfg)?;
    println!("{:>6} {:>10} {:>10} {:>10}  failures", "mult", "r", "connected", "cycles");
    for row in &report.rows {
        println!(
            "{:>6} {:>10.5} {:>10} {:>10}  {}",
            row.multiplier,
            row.r,
            format!("{}/{}", row.connected, row.trials),
            format!("{}/{}", row.cycle_verified, row.trials),
            row.failures_by_reason
        );
    }
    Ok(())
}
