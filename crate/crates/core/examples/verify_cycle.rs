//! The verifier on a hand-made square and on a few broken variants of it.

use rgg_hamilton::{verify_cycle, LpExponent, Point2D, VertexSet};

fn main() {
    let vs = VertexSet::from_points(vec![
        Point2D::new(0.1, 0.1),
        Point2D::new(0.2, 0.1),
        Point2D::new(0.2, 0.2),
        Point2D::new(0.1, 0.2),
    ]);
    let p = LpExponent::TWO;
    let cases: [(&str, Vec<usize>, f64); 5] = [
        ("square", vec![0, 1, 2, 3], 0.11),
        ("diagonal edges", vec![0, 2, 1, 3], 0.11),
        ("same, larger radius", vec![0, 2, 1, 3], 0.15),
        ("repeated vertex", vec![0, 1, 1, 3], 0.11),
        ("missing vertex", vec![0, 1, 2], 0.11),
    ];
    for (name, cycle, r) in cases {
        let report = verify_cycle(&vs, r, p, &cycle, 0.0);
        println!("{name:<22} r = {r:<5} valid = {:<5} {:?}", report.valid, report.violation);
    }
}
