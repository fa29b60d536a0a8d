//! Cycle assembly along the traversal plan, and an independent verifier.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::aux_graph::{AugmentedGraph, SparseGroup, TraversalPlan};
use crate::geometry::{lp_distance, LpExponent};
use crate::instance::VertexSet;
use crate::tessellation::{CellClassification, CellId, SquareId, Tessellation, DENSE_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FailureReason {
    Disconnected,
    HookMissing,
    LedgerExhausted,
    EdgeTooLong,
    RadiusDegenerate,
}

impl FailureReason {
    pub const ALL: [FailureReason; 5] = [
        FailureReason::Disconnected,
        FailureReason::HookMissing,
        FailureReason::LedgerExhausted,
        FailureReason::EdgeTooLong,
        FailureReason::RadiusDegenerate,
    ];

    /// Process exit code used by the command-line tool, `10..=14`.
    pub fn exit_code(self) -> i32 {
        10 + self as i32
    }

    pub fn name(self) -> &'static str {
        match self {
            FailureReason::Disconnected => "Disconnected",
            FailureReason::HookMissing => "HookMissing",
            FailureReason::LedgerExhausted => "LedgerExhausted",
            FailureReason::EdgeTooLong => "EdgeTooLong",
            FailureReason::RadiusDegenerate => "RadiusDegenerate",
        }
    }
}

impl fmt::Display for FailureReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Why the construction gave up, with the square or cell where it happened.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionFailure {
    pub reason: FailureReason,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub square: Option<SquareId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell: Option<CellId>,
    pub detail: String,
}

impl ConstructionFailure {
    pub fn new(reason: FailureReason, detail: impl Into<String>) -> Self {
        ConstructionFailure { reason, square: None, cell: None, detail: detail.into() }
    }

    pub fn at_cell(mut self, t: &Tessellation, c: CellId) -> Self {
        self.cell = Some(c);
        self.square = Some(t.square_of(c));
        self
    }
}

impl fmt::Display for ConstructionFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.reason, self.detail)?;
        if let Some(c) = self.cell {
            write!(f, " (cell {c})")?;
        } else if let Some(s) = self.square {
            write!(f, " (square {s})")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConstructionFailure {}

/// Vertex order of a Hamiltonian cycle; the last vertex connects back to the first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HamCycle(pub Vec<usize>);

impl HamCycle {
    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

/// Per-cell queues of unused vertices. Every cell's bucket is consumed front
/// to back, so a cursor per cell is the whole state.
#[derive(Debug, Clone)]
pub struct UsageLedger<'a> {
    t: &'a Tessellation,
    cls: &'a CellClassification,
    cursor: Vec<u32>,
    withdrawals: Vec<u32>,
}

impl<'a> UsageLedger<'a> {
    pub fn new(t: &'a Tessellation, cls: &'a CellClassification) -> Self {
        let cursor = (0..t.cell_count()).map(|i| cls.bucket_range(t.cell_at(i)).0).collect();
        UsageLedger { t, cls, cursor, withdrawals: vec![0; t.cell_count()] }
    }

    fn unused(&self, c: CellId) -> &'a [u32] {
        let (_, end) = self.cls.bucket_range(c);
        &self.cls.members()[self.cursor[self.t.cell_index(c)] as usize..end as usize]
    }

    pub fn remaining(&self, c: CellId) -> usize {
        self.unused(c).len()
    }

    pub fn peek(&self, c: CellId) -> Option<usize> {
        self.unused(c).first().map(|&v| v as usize)
    }

    /// Vertices handed out one at a time from `c` so far.
    pub fn withdrawals(&self, c: CellId) -> usize {
        self.withdrawals[self.t.cell_index(c)] as usize
    }

    pub fn dequeue(&mut self, c: CellId) -> Option<usize> {
        let v = self.peek(c)?;
        let i = self.t.cell_index(c);
        self.cursor[i] += 1;
        self.withdrawals[i] += 1;
        Some(v)
    }

    /// Takes every unused vertex of `c`, ascending.
    pub fn drain(&mut self, c: CellId) -> &'a [u32] {
        let rest = self.unused(c);
        let i = self.t.cell_index(c);
        self.cursor[i] += rest.len() as u32;
        rest
    }

    pub fn max_dense_withdrawals(&self) -> usize {
        (0..self.t.cell_count())
            .filter(|&i| self.cls.is_dense(self.t.cell_at(i)))
            .map(|i| self.withdrawals[i] as usize)
            .max()
            .unwrap_or(0)
    }
}

/// How each vertex entered the cycle.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerStats {
    /// Vertices handed out one at a time: witness endpoints, hook endpoints and bridges.
    pub dequeued: usize,
    /// Vertices swept up when a square was left for the last time.
    pub stitched: usize,
    /// Vertices of sparse-cell groups.
    pub group_covered: usize,
    /// Dequeued vertices used only to step between two far cells of one square.
    pub bridges: usize,
    pub max_dense_withdrawals: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleConstruction {
    pub cycle: HamCycle,
    pub stats: LedgerStats,
}

/// Orders vertices by cell (row-major), then by index; `entry` goes first.
pub fn within_clique_path(cls: &CellClassification, vertices: &[usize], entry: Option<usize>) -> Vec<usize> {
    let mut path = vertices.to_vec();
    path.sort_by_key(|&v| (cls.cell_of_vertex(v), v));
    if let Some(e) = entry {
        if let Some(pos) = path.iter().position(|&v| v == e) {
            path[..=pos].rotate_right(1);
        }
    }
    path
}

/// Orders `pool` so that consecutive cells are close, the first cell is
/// close to `start` and the last is close to `end`.
///
/// Depth-first search that always tries the cell with the fewest unvisited
/// close cells first, ties broken by position in `pool`. Gives up after a
/// fixed number of expansions.
pub fn route_cells(
    t: &Tessellation,
    start: Option<CellId>,
    pool: &[CellId],
    end: Option<CellId>,
) -> Option<Vec<CellId>> {
    let n = pool.len();
    if n == 0 {
        return Some(Vec::new());
    }
    let near = |a: CellId, b: CellId| a == b || t.cells_close(a, b);
    let adj: Vec<Vec<usize>> = (0..n).map(|i| (0..n).filter(|&j| j != i && near(pool[i], pool[j])).collect()).collect();
    let mut deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];

    let fits_start = |i: usize| start.is_none_or(|s| near(s, pool[i]));
    let fits_end = |i: usize| end.is_none_or(|e| near(pool[i], e));
    if n == 1 {
        return (fits_start(0) && fits_end(0)).then(|| vec![pool[0]]);
    }
    // reserve a last cell when the walk has to finish next to `end`
    let last = match end {
        Some(e) => Some(match pool.iter().position(|&c| c == e) {
            Some(i) => i,
            None => (0..n).filter(|&i| fits_end(i)).max_by_key(|&i| (deg[i], std::cmp::Reverse(i)))?,
        }),
        None => None,
    };
    let order_by_degree = |cands: &mut Vec<usize>, deg: &[usize]| cands.sort_by_key(|&i| (deg[i], i));
    let take = |i: usize, visited: &mut [bool], deg: &mut [usize]| {
        visited[i] = true;
        for &j in &adj[i] {
            deg[j] -= 1;
        }
    };
    let give_back = |i: usize, visited: &mut [bool], deg: &mut [usize]| {
        visited[i] = false;
        for &j in &adj[i] {
            deg[j] += 1;
        }
    };
    if let Some(l) = last {
        take(l, &mut visited, &mut deg);
    }
    let goal = n - usize::from(last.is_some());

    let mut first: Vec<usize> = match start.and_then(|s| pool.iter().position(|&c| c == s)) {
        Some(i) if Some(i) != last => vec![i],
        _ => (0..n).filter(|&i| Some(i) != last && fits_start(i)).collect(),
    };
    order_by_degree(&mut first, &deg);
    first.reverse();

    let mut budget = 64 * n + 1024;
    let mut path: Vec<usize> = Vec::with_capacity(n);
    // candidate stacks, best candidate on top
    let mut stacks: Vec<Vec<usize>> = vec![first];
    while let Some(top) = stacks.last_mut() {
        let Some(i) = top.pop() else {
            stacks.pop();
            if let Some(done) = path.pop() {
                give_back(done, &mut visited, &mut deg);
            }
            continue;
        };
        if budget == 0 {
            return None;
        }
        budget -= 1;
        take(i, &mut visited, &mut deg);
        path.push(i);
        if path.len() == goal {
            if last.is_none_or(|l| near(pool[i], pool[l])) {
                let mut order: Vec<CellId> = path.iter().map(|&i| pool[i]).collect();
                order.extend(last.map(|l| pool[l]));
                return Some(order);
            }
            path.pop();
            give_back(i, &mut visited, &mut deg);
            continue;
        }
        let mut next: Vec<usize> = adj[i].iter().copied().filter(|&j| !visited[j]).collect();
        order_by_degree(&mut next, &deg);
        next.reverse();
        stacks.push(next);
    }
    None
}

#[derive(Debug, Clone, Copy)]
enum Step {
    Bridge,
    Stitch,
    Leave,
    Enter,
    Group,
}

impl Step {
    fn name(self) -> &'static str {
        match self {
            Step::Bridge => "bridging",
            Step::Stitch => "stitching",
            Step::Leave => "leaving",
            Step::Enter => "entering",
            Step::Group => "sparse-group",
        }
    }
}

struct Assembler<'a> {
    vs: &'a VertexSet,
    t: &'a Tessellation,
    cls: &'a CellClassification,
    ledger: UsageLedger<'a>,
    path: Vec<usize>,
    stats: LedgerStats,
    clique: bool,
}

impl<'a> Assembler<'a> {
    fn cell(&self, v: usize) -> CellId {
        self.cls.cell_of_vertex(v)
    }

    fn dist(&self, a: usize, b: usize) -> f64 {
        lp_distance(self.t.p(), self.vs.points[a], self.vs.points[b])
    }

    fn push(&mut self, v: usize, step: Step) -> Result<(), ConstructionFailure> {
        if let Some(&last) = self.path.last() {
            let d = self.dist(last, v);
            if d > self.t.r() {
                return Err(ConstructionFailure::new(
                    FailureReason::EdgeTooLong,
                    format!("{} edge {last} -> {v} has length {d} > r = {}", step.name(), self.t.r()),
                )
                .at_cell(self.t, self.cell(v)));
            }
        }
        self.path.push(v);
        Ok(())
    }

    fn withdraw(&mut self, c: CellId) -> Result<usize, ConstructionFailure> {
        if self.cls.is_dense(c) && self.ledger.withdrawals(c) >= DENSE_THRESHOLD {
            return Err(ConstructionFailure::new(
                FailureReason::LedgerExhausted,
                format!("dense cell already gave out {DENSE_THRESHOLD} vertices"),
            )
            .at_cell(self.t, c));
        }
        let v = self.ledger.dequeue(c).ok_or_else(|| {
            ConstructionFailure::new(FailureReason::LedgerExhausted, "no unused vertex left").at_cell(self.t, c)
        })?;
        self.stats.dequeued += 1;
        Ok(v)
    }

    /// Makes sure the path ends next to the next unused vertex of `target`,
    /// stepping through one vertex of `square` if the current end is too far.
    fn approach(&mut self, square: SquareId, target: CellId) -> Result<(), ConstructionFailure> {
        let Some(&last) = self.path.last() else { return Ok(()) };
        let from = self.cell(last);
        if self.t.cells_close(from, target) {
            return Ok(());
        }
        if let Some(next) = self.ledger.peek(target) {
            if self.dist(last, next) <= self.t.r() {
                return Ok(());
            }
        }
        let usable = |c: CellId| {
            c != target
                && self.ledger.remaining(c) > 0
                && !(self.cls.is_dense(c) && self.ledger.withdrawals(c) >= DENSE_THRESHOLD)
                && self.t.cells_close(from, c)
                && self.t.cells_close(c, target)
        };
        let cells = self.t.snake_cells(square);
        let bridge = cells
            .iter()
            .copied()
            .find(|&c| usable(c) && !self.cls.is_dense(c))
            .or_else(|| cells.iter().copied().find(|&c| usable(c)));
        let Some(b) = bridge else {
            return Err(ConstructionFailure::new(
                FailureReason::EdgeTooLong,
                format!("no unused vertex links cell {from} to cell {target}"),
            )
            .at_cell(self.t, target));
        };
        let v = self.withdraw(b)?;
        self.push(v, Step::Bridge)?;
        self.stats.bridges += 1;
        Ok(())
    }

    /// Appends every unused vertex of `square`, finishing next to cell `end`.
    fn stitch(&mut self, square: SquareId, end: Option<CellId>) -> Result<(), ConstructionFailure> {
        let pool: Vec<CellId> =
            self.t.snake_cells(square).into_iter().filter(|&c| self.ledger.remaining(c) > 0).collect();
        let start = self.path.last().map(|&v| self.cell(v));
        let order = if self.clique { None } else { route_cells(self.t, start, &pool, end) }
            .unwrap_or_else(|| ends_first_and_last(&pool, start, end));
        for c in order {
            for &v in self.ledger.drain(c) {
                self.push(v as usize, Step::Stitch)?;
                self.stats.stitched += 1;
            }
        }
        Ok(())
    }

    /// Vertex order for a sparse group.
    fn group_order(&self, group: &SparseGroup) -> Vec<usize> {
        let order = if self.clique { None } else { route_cells(self.t, None, &group.cells, None) };
        match order {
            Some(cells) => cells.iter().flat_map(|&c| self.cls.vertices(c).iter().map(|&v| v as usize)).collect(),
            None => {
                let all: Vec<usize> =
                    group.cells.iter().flat_map(|&c| self.cls.vertices(c).iter().map(|&v| v as usize)).collect();
                within_clique_path(self.cls, &all, None)
            }
        }
    }
}

/// `start`'s cell first, `end`'s cell last, the rest in the given order.
fn ends_first_and_last(pool: &[CellId], start: Option<CellId>, end: Option<CellId>) -> Vec<CellId> {
    let mut order = Vec::with_capacity(pool.len());
    if let Some(s) = start.filter(|s| pool.contains(s)) {
        order.push(s);
    }
    let tail = end.filter(|e| pool.contains(e) && !order.contains(e));
    order.extend(pool.iter().copied().filter(|c| Some(*c) != start && Some(*c) != tail));
    order.extend(tail);
    order
}

/// Builds the cycle by walking `plan` over the augmented graph.
///
/// Crossing a density-graph edge takes one unused vertex from each witness
/// cell. On the last visit of a square its remaining vertices are stitched
/// in before leaving. A detour to a sparse group enters and leaves through the
/// hook cells of the group's first and last cells.
pub fn construct_cycle(
    vs: &VertexSet,
    t: &Tessellation,
    cls: &CellClassification,
    aux: &AugmentedGraph,
    plan: &TraversalPlan,
) -> Result<CycleConstruction, ConstructionFailure> {
    let seq = &plan.sequence;
    let Some(&root) = seq.first() else {
        return Err(ConstructionFailure::new(FailureReason::Disconnected, "empty traversal"));
    };
    let mut last_visit = vec![usize::MAX; aux.node_count()];
    for (i, &v) in seq.iter().enumerate() {
        last_visit[v] = i;
    }
    let mut a = Assembler {
        vs,
        t,
        cls,
        ledger: UsageLedger::new(t, cls),
        path: Vec::with_capacity(vs.len()),
        stats: LedgerStats::default(),
        clique: t.square_is_clique(),
    };

    let mut i = 0;
    while i + 1 < seq.len() {
        let (cur, next) = (seq[i], seq[i + 1]);
        let square = aux.old_square(cur).expect("walk only stands on dense squares");
        if let Some(group) = aux.group(next) {
            let order = a.group_order(group);
            let (first, last) = (order[0], *order.last().expect("groups are nonempty"));
            let enter = aux.hooks[&a.cell(first)].cell;
            let leave = aux.hooks[&a.cell(last)].cell;
            a.approach(square, enter)?;
            let u = a.withdraw(enter)?;
            a.push(u, Step::Leave)?;
            for v in order {
                a.push(v, Step::Group)?;
                a.stats.group_covered += 1;
            }
            let v = a.withdraw(leave)?;
            a.push(v, Step::Enter)?;
            i += 2;
            continue;
        }
        let (cu, cv) = aux.density.witness(cur, next).expect("tree edges are density-graph edges");
        if last_visit[cur] == i {
            let u = a.withdraw(cu)?;
            a.stitch(square, Some(cu))?;
            a.push(u, Step::Leave)?;
        } else {
            a.approach(square, cu)?;
            let u = a.withdraw(cu)?;
            a.push(u, Step::Leave)?;
        }
        let v = a.withdraw(cv)?;
        a.push(v, Step::Enter)?;
        i += 1;
    }

    let root_square = aux.old_square(root).expect("root is a dense square");
    let head = a.path.first().map(|&v| a.cell(v));
    a.stitch(root_square, head)?;
    let (&first, &last) = (a.path.first().expect("nonempty"), a.path.last().expect("nonempty"));
    let d = a.dist(last, first);
    if a.path.len() > 1 && d > t.r() {
        return Err(ConstructionFailure::new(
            FailureReason::EdgeTooLong,
            format!("closing edge {last} -> {first} has length {d} > r = {}", t.r()),
        )
        .at_cell(t, a.cell(first)));
    }
    assert_eq!(a.path.len(), vs.len(), "every vertex lies in a dense square or a sparse group");
    a.stats.max_dense_withdrawals = a.ledger.max_dense_withdrawals();
    Ok(CycleConstruction { cycle: HamCycle(a.path), stats: a.stats })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ViolationKind {
    NotPermutation,
    EdgeTooLong,
    /// Fewer than three vertices cannot form a cycle.
    TooFewVertices,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    /// Index into the cycle; for an edge, the position of its first endpoint.
    pub position: usize,
    pub kind: ViolationKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub violation: Option<Violation>,
}

impl VerificationReport {
    fn reject(position: usize, kind: ViolationKind, distance: Option<f64>) -> Self {
        VerificationReport { valid: false, violation: Some(Violation { position, kind, distance }) }
    }
}

/// Checks that `cycle` is a permutation of the vertices and that every
/// consecutive pair, the closing pair included, is within `r + tolerance`.
pub fn verify_cycle(vs: &VertexSet, r: f64, p: LpExponent, cycle: &[usize], tolerance: f64) -> VerificationReport {
    let n = vs.len();
    if n < 3 {
        return VerificationReport::reject(0, ViolationKind::TooFewVertices, None);
    }
    let mut seen = vec![false; n];
    for (pos, &v) in cycle.iter().enumerate() {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return VerificationReport::reject(pos, ViolationKind::NotPermutation, None);
        }
    }
    if cycle.len() != n {
        return VerificationReport::reject(cycle.len(), ViolationKind::NotPermutation, None);
    }
    let limit = r + tolerance;
    for pos in 0..n {
        let (a, b) = (cycle[pos], cycle[(pos + 1) % n]);
        let d = lp_distance(p, vs.points[a], vs.points[b]);
        if d > limit || d.is_nan() {
            return VerificationReport::reject(pos, ViolationKind::EdgeTooLong, Some(d));
        }
    }
    VerificationReport { valid: true, violation: None }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aux_graph::{build_g_double_prime, build_g_prime, spanning_tree};
    use crate::geometry::Point2D;
    use crate::instance::sample_uniform;
    use crate::tessellation::classify_cells;
    use proptest::prelude::*;

    fn triangle(side: f64) -> VertexSet {
        let h = side * 3f64.sqrt() / 2.0;
        VertexSet::from_points(vec![
            Point2D::new(0.4, 0.4),
            Point2D::new(0.4 + side, 0.4),
            Point2D::new(0.4 + side / 2.0, 0.4 + h),
        ])
    }

    fn build(vs: &VertexSet, r: f64, p: LpExponent, k: usize) -> Result<CycleConstruction, ConstructionFailure> {
        let t = Tessellation::new(r, p, k).unwrap();
        let cls = classify_cells(&t, vs);
        let gp = build_g_prime(&t, &cls);
        let aux = build_g_double_prime(&t, &cls, &gp)?;
        let plan = TraversalPlan::new(spanning_tree(&aux)?);
        construct_cycle(vs, &t, &cls, &aux, &plan)
    }

    #[test]
    fn exit_codes_are_distinct() {
        let codes: Vec<i32> = FailureReason::ALL.iter().map(|r| r.exit_code()).collect();
        assert_eq!(codes, vec![10, 11, 12, 13, 14]);
    }

    #[test]
    fn verifier_accepts_a_small_triangle() {
        let vs = triangle(0.05);
        let report = verify_cycle(&vs, 0.1, LpExponent::TWO, &[0, 1, 2], 0.0);
        assert!(report.valid && report.violation.is_none());
    }

    #[test]
    fn verifier_rejects_duplicates_and_short_lists() {
        let vs = triangle(0.05);
        let dup = verify_cycle(&vs, 0.1, LpExponent::TWO, &[0, 1, 1], 0.0);
        assert_eq!(dup.violation.unwrap().kind, ViolationKind::NotPermutation);
        assert_eq!(dup.violation.unwrap().position, 2);
        let short = verify_cycle(&vs, 0.1, LpExponent::TWO, &[0, 1], 0.0);
        assert_eq!(short.violation.unwrap().kind, ViolationKind::NotPermutation);
        let out = verify_cycle(&vs, 0.1, LpExponent::TWO, &[0, 1, 3], 0.0);
        assert_eq!(out.violation.unwrap().kind, ViolationKind::NotPermutation);
        let two = VertexSet::from_points(vec![Point2D::new(0.1, 0.1), Point2D::new(0.2, 0.2)]);
        assert_eq!(
            verify_cycle(&two, 1.0, LpExponent::TWO, &[0, 1], 0.0).violation.unwrap().kind,
            ViolationKind::TooFewVertices
        );
    }

    #[test]
    fn verifier_reports_the_long_edge() {
        let mut pts =
            vec![Point2D::new(0.1, 0.1), Point2D::new(0.15, 0.1), Point2D::new(0.2, 0.1), Point2D::new(0.15, 0.12)];
        let vs = VertexSet::from_points(pts.clone());
        assert!(verify_cycle(&vs, 0.06, LpExponent::TWO, &[0, 1, 2, 3], 0.0).valid);
        pts[1] = Point2D::new(0.15, 0.1 + 0.07);
        let vs = VertexSet::from_points(pts);
        let report = verify_cycle(&vs, 0.06, LpExponent::TWO, &[0, 1, 2, 3], 0.0);
        let v = report.violation.unwrap();
        assert_eq!((v.kind, v.position), (ViolationKind::EdgeTooLong, 0));
        assert!(v.distance.unwrap() > 0.06);
    }

    #[test]
    fn verifier_tolerance_is_additive() {
        let vs = triangle(0.1);
        assert!(!verify_cycle(&vs, 0.0999, LpExponent::TWO, &[0, 1, 2], 0.0).valid);
        assert!(verify_cycle(&vs, 0.0999, LpExponent::TWO, &[0, 1, 2], 1e-3).valid);
    }

    #[test]
    fn clique_path_examples() {
        let vs = VertexSet::from_points(vec![Point2D::new(0.9, 0.9), Point2D::new(0.1, 0.1), Point2D::new(0.12, 0.1)]);
        let t = Tessellation::new(0.25, LpExponent::TWO, 4).unwrap();
        let cls = classify_cells(&t, &vs);
        assert_eq!(within_clique_path(&cls, &[0], None), vec![0]);
        assert_eq!(within_clique_path(&cls, &[0, 1, 2], None), vec![1, 2, 0]);
        assert_eq!(within_clique_path(&cls, &[0, 1, 2], Some(2)), vec![2, 1, 0]);
        assert_eq!(within_clique_path(&cls, &[2, 0, 1], Some(0)), within_clique_path(&cls, &[0, 1, 2], Some(0)));
    }

    #[test]
    fn routing_respects_start_and_end() {
        let t = Tessellation::new(0.3, LpExponent::ONE, 8).unwrap();
        let s = SquareId::new(1, 1);
        let pool = t.snake_cells(s);
        let start = pool[20];
        let end = pool[5];
        let order = route_cells(&t, Some(start), &pool, Some(end)).unwrap();
        assert_eq!(order.len(), pool.len());
        assert_eq!(order[0], start);
        assert_eq!(*order.last().unwrap(), end);
        for w in order.windows(2) {
            assert!(t.cells_close(w[0], w[1]));
        }
        let mut sorted = order.clone();
        sorted.sort();
        let mut expected = pool.clone();
        expected.sort();
        assert_eq!(sorted, expected);
    }

    #[test]
    fn unconstrained_route_covers_the_square() {
        for p in [LpExponent::ONE, LpExponent::TWO, LpExponent::INF] {
            let t = Tessellation::new(0.21, p, 4).unwrap();
            let pool = t.snake_cells(SquareId::new(2, 3));
            for w in pool.windows(2) {
                assert!(t.cells_close(w[0], w[1]));
            }
            let order = route_cells(&t, None, &pool, None).unwrap();
            for w in order.windows(2) {
                assert!(t.cells_close(w[0], w[1]));
            }
            let mut sorted = order;
            sorted.sort();
            let mut expected = pool.clone();
            expected.sort();
            assert_eq!(sorted, expected);
        }
    }

    #[test]
    fn single_dense_square_gives_a_valid_cycle() {
        // 60 points inside one cell of square (0,0); nothing else
        let t = Tessellation::new(0.25, LpExponent::TWO, 4).unwrap();
        let b = t.cell_rect(CellId::new(1, 1));
        let pts: Vec<Point2D> = (0..60)
            .map(|i| {
                let f = (i as f64 + 0.5) / 60.0;
                Point2D::new(b.x_lo + f * b.width(), b.y_lo + (1.0 - f) * b.height())
            })
            .collect();
        let vs = VertexSet::from_points(pts);
        let built = build(&vs, 0.25, LpExponent::TWO, 4).unwrap();
        assert!(verify_cycle(&vs, 0.25, LpExponent::TWO, built.cycle.as_slice(), 0.0).valid);
        let s = built.stats;
        assert_eq!(s.dequeued + s.stitched + s.group_covered, 60);
    }

    #[test]
    fn sparse_group_is_covered_consecutively() {
        let t = Tessellation::new(0.25, LpExponent::TWO, 4).unwrap();
        let mut pts = Vec::new();
        let mut fill = |c: CellId, n: usize| {
            let b = t.cell_rect(c);
            for i in 0..n {
                let f = (i as f64 + 0.5) / n as f64;
                pts.push(Point2D::new(b.x_lo + f * b.width(), b.y_lo + 0.5 * b.height()));
            }
        };
        fill(CellId::new(3, 1), 50);
        fill(CellId::new(2, 2), 50);
        fill(CellId::new(4, 1), 3);
        fill(CellId::new(5, 0), 2);
        let vs = VertexSet::from_points(pts);
        let built = build(&vs, 0.25, LpExponent::TWO, 4).unwrap();
        let cyc = built.cycle.as_slice();
        assert!(verify_cycle(&vs, 0.25, LpExponent::TWO, cyc, 0.0).valid);
        let sparse: Vec<usize> = (100..105).collect();
        let positions: Vec<usize> = sparse.iter().map(|v| cyc.iter().position(|x| x == v).unwrap()).collect();
        let (lo, hi) = (*positions.iter().min().unwrap(), *positions.iter().max().unwrap());
        assert_eq!(hi - lo, 4, "group vertices are consecutive");
        assert_eq!(built.stats.group_covered, 5);
    }

    #[test]
    fn dense_random_instances_for_each_norm() {
        for (p, seed) in
            [(LpExponent::ONE, 1u64), (LpExponent::TWO, 2), (LpExponent::INF, 3), (LpExponent::new(1.5).unwrap(), 4)]
        {
            let vs = sample_uniform(80_000, seed);
            let r = 0.21;
            let built = build(&vs, r, p, 4).unwrap_or_else(|e| panic!("p = {p}: {e}"));
            assert!(verify_cycle(&vs, r, p, built.cycle.as_slice(), 0.0).valid, "p = {p}");
            let s = built.stats;
            assert_eq!(s.dequeued + s.stitched + s.group_covered, vs.len());
            assert!(s.max_dense_withdrawals <= DENSE_THRESHOLD);
        }
    }

    #[test]
    fn disconnected_density_graph_fails_cleanly() {
        let vs = sample_uniform(2_000, 11);
        let err = build(&vs, 0.05, LpExponent::TWO, 4).unwrap_err();
        assert!(matches!(err.reason, FailureReason::Disconnected | FailureReason::HookMissing));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn duplicating_an_entry_is_never_a_permutation(seed in 0u64..1000, at in 0usize..50, from in 0usize..50) {
            let vs = sample_uniform(50, seed);
            let mut cyc: Vec<usize> = (0..50).collect();
            prop_assume!(at != from);
            cyc[at] = cyc[from];
            let report = verify_cycle(&vs, 2.0, LpExponent::TWO, &cyc, 0.0);
            prop_assert_eq!(report.violation.unwrap().kind, ViolationKind::NotPermutation);
        }
    }
}
