//! Area of the unit lp ball and the connectivity radius for a few n.

use rgg_hamilton::{alpha_p, threshold_radius, LpExponent};

fn main() {
    let ps = ["1", "1.5", "2", "3", "4", "10", "inf"];
    println!("{:>6} {:>18} {:>12} {:>12} {:>12}", "p", "alpha_p", "r(1e4)", "r(1e5)", "r(1e6)");
    for s in ps {
        let p: LpExponent = s.parse().unwrap();
        println!(
            "{:>6} {:>18.15} {:>12.6} {:>12.6} {:>12.6}",
            s,
            alpha_p(p),
            threshold_radius(10_000, p),
            threshold_radius(100_000, p),
            threshold_radius(1_000_000, p)
        );
    }
}
