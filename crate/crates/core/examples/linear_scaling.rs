//! Median pipeline time as n doubles, at a radius where the construction succeeds.
//!
//! `cargo run --release --example linear_scaling -- [multiplier]`

use rgg_hamilton::experiments::scaling_bench;
use rgg_hamilton::LpExponent;

fn main() -> rgg_hamilton::Result<()> {
    let mult: f64 = std::env::args().nth(1).map_or(Ok(40.0), |s| s.parse()).expect("multiplier");
    let table = scaling_bench(&[100_000, 200_000, 400_000, 800_000], LpExponent::TWO, mult, 5, 0)?;
    println!("multiplier {}, k = {}", table.multiplier, table.k);
    for row in &table.rows {
        println!(
            "n = {:>7}  r = {:.4}  cycles {}/{}  median {:.2} ms",
            row.n, row.r, row.cycle_verified, row.trials, row.median_ms
        );
    }
    println!("ratios {:.3?}", table.ratios);
    Ok(())
}
