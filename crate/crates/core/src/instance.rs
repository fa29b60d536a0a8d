//! Random geometric graph instances: seeded sampling, radius selection and
//! a bucket-grid adjacency oracle. The edge set is never materialized.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{alpha_p, lp_distance, LpExponent, Point2D};

/// How the connection radius of an instance is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum RadiusSpec {
    Explicit(f64),
    /// `r = sqrt(log n / ((alpha_p - eps) n))`, above the threshold.
    EpsilonAbove(f64),
    /// `r = sqrt(log n / ((alpha_p + eps) n))`, below the threshold.
    EpsilonBelow(f64),
    /// `r = c * threshold_radius(n, p)`.
    MultipleOfThreshold(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InstanceConfig {
    pub n: usize,
    pub p: LpExponent,
    pub radius: RadiusSpec,
    pub seed: u64,
}

impl InstanceConfig {
    pub fn new(n: usize, p: LpExponent, radius: RadiusSpec, seed: u64) -> Result<Self> {
        let cfg = InstanceConfig { n, p, radius, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 {
            return Err(Error::InvalidConfig(format!("n = {} but at least 3 vertices are required", self.n)));
        }
        resolve_radius(self).map(|_| ())
    }
}

/// Sampled vertex set; vertex `i` is `points[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexSet {
    pub points: Vec<Point2D>,
    pub seed: Option<u64>,
}

impl VertexSet {
    pub fn from_points(points: Vec<Point2D>) -> Self {
        VertexSet { points, seed: None }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `sqrt(log n / (alpha_p n))` with the natural logarithm.
pub fn threshold_radius(n: usize, p: LpExponent) -> f64 {
    let n = n as f64;
    (n.ln() / (alpha_p(p) * n)).sqrt()
}

pub fn resolve_radius(cfg: &InstanceConfig) -> Result<f64> {
    let n = cfg.n as f64;
    let alpha = alpha_p(cfg.p);
    let r = match cfg.radius {
        RadiusSpec::Explicit(r) => r,
        RadiusSpec::EpsilonAbove(eps) => {
            if !(eps > 0.0 && eps < alpha) {
                return Err(Error::InvalidConfig(format!(
                    "epsilon-above needs 0 < eps < alpha_p = {alpha}, got {eps}"
                )));
            }
            (n.ln() / ((alpha - eps) * n)).sqrt()
        }
        RadiusSpec::EpsilonBelow(eps) => {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(Error::InvalidConfig(format!("epsilon-below needs eps > 0, got {eps}")));
            }
            (n.ln() / ((alpha + eps) * n)).sqrt()
        }
        RadiusSpec::MultipleOfThreshold(c) => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::InvalidConfig(format!("threshold multiplier must be positive, got {c}")));
            }
            c * threshold_radius(cfg.n, cfg.p)
        }
    };
    let r_max = std::f64::consts::SQRT_2 * cfg.p.unit_square_diameter();
    if !(r > 0.0 && r <= r_max) {
        return Err(Error::InvalidRadius(r));
    }
    Ok(r)
}

/// Draws `n` i.i.d. uniform points from a ChaCha8 stream seeded with `seed`,
/// `x` then `y` for each vertex in index order.
pub fn sample_points(cfg: &InstanceConfig) -> Result<VertexSet> {
    if cfg.n < 3 {
        return Err(Error::InvalidConfig(format!("n = {} but at least 3 vertices are required", cfg.n)));
    }
    Ok(sample_uniform(cfg.n, cfg.seed))
}

/// Same stream as [`sample_points`] without the configuration checks.
pub fn sample_uniform(n: usize, seed: u64) -> VertexSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| {
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            Point2D::new(x, y)
        })
        .collect();
    VertexSet { points, seed: Some(seed) }
}

/// Uniform bucket grid with bucket side `>= r`: points within distance `r`
/// share a bucket or sit in neighbouring buckets.
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    points: &'a [Point2D],
    side: usize,
    bucket_start: Vec<u32>,
    members: Vec<u32>,
    bucket_of: Vec<u32>,
}

impl<'a> SpatialIndex<'a> {
    pub fn new(vs: &'a VertexSet, r: f64) -> Self {
        let side = if r > 0.0 { ((1.0 / r).floor() as usize).clamp(1, 1 << 15) } else { 1 };
        let points = vs.points.as_slice();
        let bucket_of: Vec<u32> = points
            .iter()
            .map(|pt| {
                let cx = ((pt.x * side as f64) as usize).min(side - 1);
                let cy = ((pt.y * side as f64) as usize).min(side - 1);
                (cy * side + cx) as u32
            })
            .collect();

        let mut bucket_start = vec![0u32; side * side + 1];
        for &b in &bucket_of {
            bucket_start[b as usize + 1] += 1;
        }
        for i in 0..side * side {
            bucket_start[i + 1] += bucket_start[i];
        }
        let mut fill = bucket_start.clone();
        let mut members = vec![0u32; points.len()];
        for (v, &b) in bucket_of.iter().enumerate() {
            members[fill[b as usize] as usize] = v as u32;
            fill[b as usize] += 1;
        }
        SpatialIndex { points, side, bucket_start, members, bucket_of }
    }

    pub fn buckets_per_side(&self) -> usize {
        self.side
    }

    pub fn bucket(&self, v: usize) -> (usize, usize) {
        let b = self.bucket_of[v] as usize;
        (b % self.side, b / self.side)
    }

    pub fn bucket_members(&self, col: usize, row: usize) -> &[u32] {
        let b = row * self.side + col;
        &self.members[self.bucket_start[b] as usize..self.bucket_start[b + 1] as usize]
    }

    /// True iff `lp_distance(u, v) <= r`. Requires `r` no larger than the
    /// radius the index was built for.
    pub fn adjacent(&self, u: usize, v: usize, r: f64, p: LpExponent) -> bool {
        let (ux, uy) = self.bucket(u);
        let (vx, vy) = self.bucket(v);
        if ux.abs_diff(vx) > 1 || uy.abs_diff(vy) > 1 {
            return false;
        }
        lp_distance(p, self.points[u], self.points[v]) <= r
    }

    /// Calls `f` for every `w != v` with `lp_distance(v, w) <= r`.
    pub fn for_each_neighbor(&self, v: usize, r: f64, p: LpExponent, mut f: impl FnMut(usize)) {
        let (cx, cy) = self.bucket(v);
        let pv = self.points[v];
        for row in cy.saturating_sub(1)..=(cy + 1).min(self.side - 1) {
            for col in cx.saturating_sub(1)..=(cx + 1).min(self.side - 1) {
                for &w in self.bucket_members(col, row) {
                    let w = w as usize;
                    if w != v && lp_distance(p, pv, self.points[w]) <= r {
                        f(w);
                    }
                }
            }
        }
    }
}

/// `true` iff the geometric graph has exactly one component.
///
/// When a grid whose cells are cliques has at most a few cells per vertex,
/// cells are merged with union-find, checking point pairs only for cell pairs
/// that are neither certainly close nor certainly far and not yet merged.
/// Otherwise a plain BFS over a bucket grid is used.
pub fn is_connected(vs: &VertexSet, r: f64, p: LpExponent) -> bool {
    let n = vs.len();
    if n <= 1 {
        return true;
    }
    let mut g = (p.norm(1.0, 1.0) / r).ceil().max(1.0);
    while g <= 8.0 * n as f64 && p.norm(1.0 / g, 1.0 / g) > r * (1.0 - 1e-12) {
        g += 1.0;
    }
    if g * g > 8.0 * n as f64 {
        bfs_connected(vs, r, p)
    } else {
        clique_grid_connected(vs, r, p, g as usize)
    }
}

fn bfs_connected(vs: &VertexSet, r: f64, p: LpExponent) -> bool {
    let n = vs.len();
    let index = SpatialIndex::new(vs, r);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::with_capacity(n);
    seen[0] = true;
    queue.push_back(0usize);
    let mut reached = 1usize;
    while let Some(v) = queue.pop_front() {
        index.for_each_neighbor(v, r, p, |w| {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        });
    }
    reached == n
}

fn find(parent: &mut [u32], mut a: usize) -> usize {
    while parent[a] as usize != a {
        parent[a] = parent[parent[a] as usize];
        a = parent[a] as usize;
    }
    a
}

fn clique_grid_connected(vs: &VertexSet, r: f64, p: LpExponent, g: usize) -> bool {
    let cell_of = |pt: &Point2D| {
        let cx = ((pt.x * g as f64) as usize).min(g - 1);
        let cy = ((pt.y * g as f64) as usize).min(g - 1);
        cy * g + cx
    };
    let mut start = vec![0u32; g * g + 1];
    for pt in &vs.points {
        start[cell_of(pt) + 1] += 1;
    }
    for i in 0..g * g {
        start[i + 1] += start[i];
    }
    let mut fill = start.clone();
    let mut members = vec![0u32; vs.len()];
    for (v, pt) in vs.points.iter().enumerate() {
        let c = cell_of(pt);
        members[fill[c] as usize] = v as u32;
        fill[c] += 1;
    }
    let cell = |c: usize| &members[start[c] as usize..start[c + 1] as usize];
    let occupied: Vec<usize> = (0..g * g).filter(|&c| start[c + 1] > start[c]).collect();
    let mut parent: Vec<u32> = (0..(g * g) as u32).collect();
    let side = 1.0 / g as f64;
    // per-axis gaps between cells `d` apart, lower and upper bound
    let near = |d: usize| (d.saturating_sub(1)) as f64 * side;
    let far = |d: usize| (d + 1) as f64 * side;
    let window = (r / side).ceil() as usize + 1;

    // forward offsets, nearest first, so that far pairs are usually already merged
    let mut offsets: Vec<(usize, isize)> = (0..=window)
        .flat_map(|dy| (-(window as isize)..=window as isize).map(move |dx| (dy, dx)))
        .filter(|&(dy, dx)| dy > 0 || dx > 0)
        .filter(|&(dy, dx)| p.norm(near(dx.unsigned_abs()), near(dy)) <= r * (1.0 + 1e-12))
        .collect();
    offsets.sort_by(|a, b| {
        let da = p.norm(near(a.1.unsigned_abs()), near(a.0));
        let db = p.norm(near(b.1.unsigned_abs()), near(b.0));
        da.total_cmp(&db).then(a.cmp(b))
    });
    for pass in 0..2 {
        for &(dy, dx) in &offsets {
            let certain = p.norm(far(dx.unsigned_abs()), far(dy)) <= r * (1.0 - 1e-12);
            if (pass == 0) != certain {
                continue;
            }
            for &a in &occupied {
                let (ax, ay) = (a % g, a / g);
                let (bx, by) = (ax as isize + dx, ay + dy);
                if bx < 0 || bx >= g as isize || by >= g {
                    continue;
                }
                let b = by * g + bx as usize;
                if start[b + 1] == start[b] {
                    continue;
                }
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    continue;
                }
                let linked = certain
                    || cell(a).iter().any(|&u| {
                        cell(b).iter().any(|&w| lp_distance(p, vs.points[u as usize], vs.points[w as usize]) <= r)
                    });
                if linked {
                    parent[ra] = rb as u32;
                }
            }
        }
    }
    let root = find(&mut parent, occupied[0]);
    occupied.iter().all(|&c| find(&mut parent, c) == root)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_connected(vs: &VertexSet, r: f64, p: LpExponent) -> bool {
        let n = vs.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for (w, pt) in vs.points.iter().enumerate() {
                if !seen[w] && lp_distance(p, vs.points[v], *pt) <= r {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    #[test]
    fn threshold_values() {
        // mpmath, 30 digits
        assert!((threshold_radius(100, LpExponent::TWO) - 0.121_073_167_867_982).abs() < 1e-12);
        assert!((threshold_radius(100, LpExponent::INF) - 0.107_298_301_314_467).abs() < 1e-12);
        assert!((threshold_radius(3, LpExponent::ONE) - 0.427_904_251_102_220).abs() < 1e-12);
    }

    #[test]
    fn threshold_is_strictly_decreasing() {
        for p in [LpExponent::ONE, LpExponent::TWO, LpExponent::INF] {
            let mut prev = f64::INFINITY;
            for n in 3..2000 {
                let r = threshold_radius(n, p);
                assert!(r < prev, "n = {n}");
                prev = r;
            }
        }
    }

    #[test]
    fn radius_resolution() {
        let p = LpExponent::TWO;
        let above = InstanceConfig::new(100, p, RadiusSpec::EpsilonAbove(std::f64::consts::FRAC_PI_2), 0).unwrap();
        assert!((resolve_radius(&above).unwrap() - 0.171_223_316_038_375).abs() < 1e-12);

        let explicit = InstanceConfig::new(100, p, RadiusSpec::Explicit(0.25), 0).unwrap();
        assert_eq!(resolve_radius(&explicit).unwrap(), 0.25);

        let unit = InstanceConfig::new(100, p, RadiusSpec::MultipleOfThreshold(1.0), 0).unwrap();
        assert_eq!(resolve_radius(&unit).unwrap(), threshold_radius(100, p));

        let below = InstanceConfig::new(100, p, RadiusSpec::EpsilonBelow(1.0), 0).unwrap();
        assert!(resolve_radius(&below).unwrap() < threshold_radius(100, p));
    }

    #[test]
    fn radius_rejections() {
        let p = LpExponent::TWO;
        assert!(InstanceConfig::new(100, p, RadiusSpec::EpsilonAbove(std::f64::consts::PI), 0).is_err());
        assert!(InstanceConfig::new(100, p, RadiusSpec::EpsilonAbove(4.0), 0).is_err());
        assert!(InstanceConfig::new(100, p, RadiusSpec::Explicit(0.0), 0).is_err());
        assert!(InstanceConfig::new(100, p, RadiusSpec::MultipleOfThreshold(-1.0), 0).is_err());
        assert!(InstanceConfig::new(0, p, RadiusSpec::Explicit(0.1), 0).is_err());
        assert!(InstanceConfig::new(2, p, RadiusSpec::Explicit(0.1), 0).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        let cfg = InstanceConfig::new(1000, LpExponent::TWO, RadiusSpec::MultipleOfThreshold(2.0), 7).unwrap();
        let a = sample_points(&cfg).unwrap();
        let b = sample_points(&cfg).unwrap();
        assert_eq!(a, b);
        let other = sample_points(&InstanceConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(a.points, other.points);
    }

    #[test]
    fn sampling_million_points_is_uniform() {
        let cfg = InstanceConfig::new(1_000_000, LpExponent::TWO, RadiusSpec::MultipleOfThreshold(1.0), 3).unwrap();
        let vs = sample_points(&cfg).unwrap();
        assert_eq!(vs.len(), 1_000_000);
        assert!(vs.points.iter().all(Point2D::in_unit_square));
        let mx = vs.points.iter().map(|p| p.x).sum::<f64>() / 1e6;
        let my = vs.points.iter().map(|p| p.y).sum::<f64>() / 1e6;
        assert!((mx - 0.5).abs() < 0.01 && (my - 0.5).abs() < 0.01);
    }

    #[test]
    fn adjacency_boundary_is_inclusive() {
        let r = 0.1;
        let vs =
            VertexSet::from_points(vec![Point2D::new(0.0, 0.0), Point2D::new(0.0, r), Point2D::new(0.0, r + 1e-9)]);
        let idx = SpatialIndex::new(&vs, r);
        assert!(idx.adjacent(0, 1, r, LpExponent::TWO));
        assert!(!idx.adjacent(0, 2, r, LpExponent::TWO));
        assert_eq!(idx.adjacent(1, 0, r, LpExponent::TWO), idx.adjacent(0, 1, r, LpExponent::TWO));
    }

    #[test]
    fn connectivity_examples() {
        let one = VertexSet::from_points(vec![Point2D::new(0.5, 0.5)]);
        assert!(is_connected(&one, 0.01, LpExponent::TWO));

        let two = VertexSet::from_points(vec![Point2D::new(0.1, 0.1), Point2D::new(0.5, 0.5)]);
        assert!(!is_connected(&two, 0.2, LpExponent::TWO));

        let r = 0.2;
        let line = VertexSet::from_points(vec![
            Point2D::new(0.1, 0.5),
            Point2D::new(0.1 + r / 2.0, 0.5),
            Point2D::new(0.1 + r, 0.5),
        ]);
        assert!(is_connected(&line, r, LpExponent::TWO));
    }

    #[test]
    fn index_matches_direct_distance_for_small_instances() {
        for seed in 0..40u64 {
            let n = 20 + (seed as usize * 37) % 180;
            let vs = sample_uniform(n, seed);
            let p = [LpExponent::ONE, LpExponent::TWO, LpExponent::INF][seed as usize % 3];
            let r = threshold_radius(n, p) * (0.5 + (seed % 4) as f64 * 0.4);
            let idx = SpatialIndex::new(&vs, r);
            for u in 0..n {
                for v in 0..n {
                    if u != v {
                        let direct = lp_distance(p, vs.points[u], vs.points[v]) <= r;
                        assert_eq!(idx.adjacent(u, v, r, p), direct);
                    }
                }
            }
            assert_eq!(is_connected(&vs, r, p), naive_connected(&vs, r, p));
        }
    }

    #[test]
    fn both_connectivity_strategies_match_all_pairs() {
        let ps = [LpExponent::ONE, LpExponent::new(1.5).unwrap(), LpExponent::TWO, LpExponent::INF];
        for seed in 0..200u64 {
            let n = 3 + (seed as usize * 53) % 198;
            let vs = sample_uniform(n, 1000 + seed);
            let p = ps[seed as usize % 4];
            let r = 0.02 + (seed % 13) as f64 * 0.06;
            let expected = naive_connected(&vs, r, p);
            assert_eq!(is_connected(&vs, r, p), expected, "seed {seed}");
            assert_eq!(bfs_connected(&vs, r, p), expected, "seed {seed}");
        }
    }

    #[test]
    fn connectivity_of_a_large_dense_instance_is_fast() {
        let vs = sample_uniform(200_000, 3);
        assert!(is_connected(&vs, 0.4, LpExponent::ONE));
    }
}
