//! Samples an instance and writes it as CSV.
//!
//! `cargo run --example generate_instance -- [n] [multiplier] [seed] [out.csv]`

use rgg_hamilton::io::write_points_file;
use rgg_hamilton::{is_connected, resolve_radius, sample_points, InstanceConfig, LpExponent, RadiusSpec};

fn main() -> rgg_hamilton::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().map_or(Ok(10_000), |s| s.parse()).expect("n");
    let mult = args.get(1).map_or(Ok(2.0), |s| s.parse()).expect("multiplier");
    let seed = args.get(2).map_or(Ok(0), |s| s.parse()).expect("seed");
    let out = args.get(3).cloned().unwrap_or_else(|| "points.csv".into());

    let p = LpExponent::TWO;
    let cfg = InstanceConfig::new(n, p, RadiusSpec::MultipleOfThreshold(mult), seed)?;
    let r = resolve_radius(&cfg)?;
    let vs = sample_points(&cfg)?;
    write_points_file(out.as_ref(), &vs)?;
    println!("{n} points, seed {seed}, r = {r:.6}, connected = {}", is_connected(&vs, r, p));
    println!("written to {out}");
    Ok(())
}
