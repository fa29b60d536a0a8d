//! Square-level graphs that steer the cycle construction.
//!
//! The density graph has one node per dense square and an edge between two
//! friend squares whenever they contain a close pair of dense cells. The
//! augmented graph adds one leaf per group of sparse cells that share a hook
//! square. A spanning tree of the augmented graph, walked so that every tree
//! edge is crossed twice, fixes the order in which squares are visited.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use serde::Serialize;

use crate::hamiltonian::{ConstructionFailure, FailureReason};
use crate::tessellation::{
    first_dense_close_cell, CellClass, CellClassification, CellId, SquareClass, SquareId, Tessellation,
};

/// Edge of the density graph with the dense cells that witness it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DensityEdge {
    pub a: usize,
    pub b: usize,
    pub witness_a: CellId,
    pub witness_b: CellId,
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityGraph {
    /// Dense squares in row-major order; node `i` is `squares[i]`.
    pub squares: Vec<SquareId>,
    pub edges: Vec<DensityEdge>,
    #[serde(skip)]
    node_of_square: Vec<u32>,
    #[serde(skip)]
    m: usize,
    /// `(neighbor, edge index)` sorted by neighbor.
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl DensityGraph {
    fn from_parts(squares: Vec<SquareId>, edges: Vec<DensityEdge>, m: usize) -> Self {
        let mut node_of_square = vec![u32::MAX; m * m];
        for (i, s) in squares.iter().enumerate() {
            node_of_square[s.row as usize * m + s.col as usize] = i as u32;
        }
        let mut adjacency = vec![Vec::new(); squares.len()];
        for (e, edge) in edges.iter().enumerate() {
            adjacency[edge.a].push((edge.b, e));
            adjacency[edge.b].push((edge.a, e));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        DensityGraph { squares, edges, node_of_square, m, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.squares.len()
    }

    pub fn node_of(&self, s: SquareId) -> Option<usize> {
        let i = s.row as usize * self.m + s.col as usize;
        self.node_of_square.get(i).copied().filter(|&n| n != u32::MAX).map(|n| n as usize)
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[node].iter().map(|&(w, _)| w)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Witness cells of edge `{a, b}`, oriented as (cell in `a`, cell in `b`).
    pub fn witness(&self, a: usize, b: usize) -> Option<(CellId, CellId)> {
        let list = &self.adjacency[a];
        let pos = list.binary_search_by_key(&b, |&(w, _)| w).ok()?;
        let edge = &self.edges[list[pos].1];
        if edge.a == a {
            Some((edge.witness_a, edge.witness_b))
        } else {
            Some((edge.witness_b, edge.witness_a))
        }
    }
}

/// Builds the density graph. Witnesses are the first close dense-cell pair in
/// row-major order of the lower square, then of the higher one.
pub fn build_g_prime(t: &Tessellation, cls: &CellClassification) -> DensityGraph {
    let m = t.m();
    let squares: Vec<SquareId> =
        (0..t.square_count()).map(|i| t.square_at(i)).filter(|&s| cls.square_class(s) == SquareClass::Dense).collect();
    let dense_cells: Vec<Vec<CellId>> =
        squares.iter().map(|&s| t.cells_of_square(s).filter(|&c| cls.is_dense(c)).collect()).collect();
    let lookup = DensityGraph::from_parts(squares.clone(), Vec::new(), m);

    let mut edges = Vec::new();
    for (a, &s) in squares.iter().enumerate() {
        for f in t.friends_of(s).filter(|&f| f > s) {
            let Some(b) = lookup.node_of(f) else { continue };
            let witness = dense_cells[a]
                .iter()
                .flat_map(|&ca| dense_cells[b].iter().map(move |&cb| (ca, cb)))
                .find(|&(ca, cb)| t.cells_close(ca, cb));
            if let Some((witness_a, witness_b)) = witness {
                edges.push(DensityEdge { a, b, witness_a, witness_b });
            }
        }
    }
    DensityGraph::from_parts(squares, edges, m)
}

/// Hook of a sparse cell: a dense close cell and the square that holds it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Hook {
    pub cell: CellId,
    pub square: SquareId,
}

/// Hooks of all sparse cells that lie in sparse squares.
pub type HookAssignment = BTreeMap<CellId, Hook>;

/// Row-major smallest dense cell close to `c`.
pub fn find_hook_cell(t: &Tessellation, cls: &CellClassification, c: CellId) -> Result<CellId, ConstructionFailure> {
    first_dense_close_cell(t, cls, c).ok_or_else(|| {
        ConstructionFailure::new(FailureReason::HookMissing, format!("no dense cell is close to sparse cell {c}"))
            .at_cell(t, c)
    })
}

/// Sparse cells of one sparse square whose hooks lie in the same dense square.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SparseGroup {
    pub square: SquareId,
    pub label: SquareId,
    /// Row-major.
    pub cells: Vec<CellId>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AugmentedGraph {
    pub density: DensityGraph,
    pub groups: Vec<SparseGroup>,
    /// Density-graph node each group hangs from.
    pub group_parent: Vec<usize>,
    pub hooks: HookAssignment,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

impl AugmentedGraph {
    /// Old vertices are `0..old_count()`, new vertex of group `g` is `old_count() + g`.
    pub fn old_count(&self) -> usize {
        self.density.node_count()
    }

    pub fn node_count(&self) -> usize {
        self.old_count() + self.groups.len()
    }

    pub fn is_new(&self, node: usize) -> bool {
        node >= self.old_count()
    }

    pub fn group(&self, node: usize) -> Option<&SparseGroup> {
        node.checked_sub(self.old_count()).and_then(|g| self.groups.get(g))
    }

    pub fn old_square(&self, node: usize) -> Option<SquareId> {
        self.density.squares.get(node).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn edge_count(&self) -> usize {
        self.density.edges.len() + self.groups.len()
    }

    /// Largest number of groups formed in a single sparse square.
    pub fn max_groups_per_sparse_square(&self) -> usize {
        let mut per_square: BTreeMap<SquareId, usize> = BTreeMap::new();
        for g in &self.groups {
            *per_square.entry(g.square).or_default() += 1;
        }
        per_square.values().copied().max().unwrap_or(0)
    }

    pub fn max_old_degree(&self) -> usize {
        (0..self.old_count()).map(|v| self.adjacency[v].len()).max().unwrap_or(0)
    }

    /// Text label: `S:col,row` for a dense square, `N:col,row:col,row` for a group (square, label).
    pub fn node_label(&self, node: usize) -> String {
        match self.group(node) {
            Some(g) => format!("N:{}:{}", g.square, g.label),
            None => format!("S:{}", self.density.squares[node]),
        }
    }
}

/// Adds one leaf per (sparse square, hook square) group to the density graph.
pub fn build_g_double_prime(
    t: &Tessellation,
    cls: &CellClassification,
    gp: &DensityGraph,
) -> Result<AugmentedGraph, ConstructionFailure> {
    let mut groups = Vec::new();
    let mut group_parent = Vec::new();
    let mut hooks = HookAssignment::new();
    for idx in 0..t.square_count() {
        let s = t.square_at(idx);
        if cls.square_class(s) != SquareClass::Sparse {
            continue;
        }
        let mut by_label: BTreeMap<SquareId, Vec<CellId>> = BTreeMap::new();
        for c in t.cells_of_square(s).filter(|&c| cls.class(c) == CellClass::Sparse) {
            let cell = find_hook_cell(t, cls, c)?;
            let square = t.square_of(cell);
            hooks.insert(c, Hook { cell, square });
            by_label.entry(square).or_default().push(c);
        }
        for (label, cells) in by_label {
            let parent = gp.node_of(label).expect("hook cells lie in dense squares");
            groups.push(SparseGroup { square: s, label, cells });
            group_parent.push(parent);
        }
    }

    let old = gp.node_count();
    let mut adjacency: Vec<Vec<usize>> = (0..old).map(|v| gp.neighbors(v).collect()).collect();
    for (g, &parent) in group_parent.iter().enumerate() {
        adjacency[parent].push(old + g);
        adjacency.push(vec![parent]);
    }
    Ok(AugmentedGraph { density: gp.clone(), groups, group_parent, hooks, adjacency })
}

/// BFS reachability from node 0. An empty graph is not connected.
pub fn is_gpp_connected(g: &AugmentedGraph) -> bool {
    let n = g.node_count();
    if n == 0 {
        return false;
    }
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                reached += 1;
                queue.push_back(w);
            }
        }
    }
    reached == n
}

/// Undirected tree with sorted adjacency lists.
#[derive(Debug, Clone, Serialize)]
pub struct SpanningTree {
    pub root: usize,
    /// `(parent, child)` in discovery order.
    pub edges: Vec<(usize, usize)>,
    #[serde(skip)]
    adjacency: Vec<Vec<usize>>,
}

impl SpanningTree {
    /// Tree on `n` nodes from an edge list; panics unless the edges form a tree.
    pub fn from_edges(n: usize, root: usize, edges: Vec<(usize, usize)>) -> Self {
        assert!(n > 0 && edges.len() == n - 1, "a tree on {n} nodes has {} edges", n.saturating_sub(1));
        let mut adjacency = vec![Vec::new(); n];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        SpanningTree { root, edges, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }
}

/// BFS spanning tree rooted at node 0, the dense square with the smallest id.
pub fn spanning_tree(g: &AugmentedGraph) -> Result<SpanningTree, ConstructionFailure> {
    let n = g.node_count();
    if g.old_count() == 0 {
        return Err(ConstructionFailure::new(FailureReason::Disconnected, "the density graph has no vertices"));
    }
    let mut parent = vec![usize::MAX; n];
    let mut queue = VecDeque::from([0usize]);
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    parent[0] = 0;
    while let Some(v) = queue.pop_front() {
        for &w in g.neighbors(v) {
            if parent[w] == usize::MAX {
                parent[w] = v;
                edges.push((v, w));
                queue.push_back(w);
            }
        }
    }
    if let Some(missed) = parent.iter().position(|&p| p == usize::MAX) {
        let square = g.old_square(missed).or_else(|| g.group(missed).map(|grp| grp.square));
        let mut failure = ConstructionFailure::new(
            FailureReason::Disconnected,
            format!("{} of {n} auxiliary vertices reachable from the root", edges.len() + 1),
        );
        failure.square = square;
        return Err(failure);
    }
    Ok(SpanningTree::from_edges(n, 0, edges))
}

/// Rooted walk of a spanning tree that crosses every tree edge once in each direction.
#[derive(Debug, Clone, Serialize)]
pub struct TraversalPlan {
    pub tree: SpanningTree,
    pub sequence: Vec<usize>,
}

impl TraversalPlan {
    pub fn new(tree: SpanningTree) -> Self {
        let sequence = euler_traversal(&tree, tree.root);
        TraversalPlan { tree, sequence }
    }
}

/// Depth-first walk from `root`, children in ascending order. The result
/// starts and ends at `root` and has `2 (|V| - 1) + 1` entries.
pub fn euler_traversal(tree: &SpanningTree, root: usize) -> Vec<usize> {
    let mut sequence = Vec::with_capacity(2 * tree.edges.len() + 1);
    let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
    sequence.push(root);
    while let Some(top) = stack.last_mut() {
        let (v, parent, next) = *top;
        if let Some(&w) = tree.neighbors(v).get(next) {
            top.2 += 1;
            if w != parent {
                stack.push((w, v, 0));
                sequence.push(w);
            }
        } else {
            stack.pop();
            if let Some(&(u, _, _)) = stack.last() {
                sequence.push(u);
            }
        }
    }
    sequence
}

/// Writes the density graph as `S:col,row S:col,row` lines.
pub fn dump_g_prime<W: Write>(mut out: W, gp: &DensityGraph) -> std::io::Result<()> {
    for e in &gp.edges {
        writeln!(out, "S:{} S:{}", gp.squares[e.a], gp.squares[e.b])?;
    }
    Ok(())
}

/// Writes the augmented graph; group leaves appear as `N:square:label`.
pub fn dump_g_double_prime<W: Write>(mut out: W, g: &AugmentedGraph) -> std::io::Result<()> {
    dump_g_prime(&mut out, &g.density)?;
    for (grp, &parent) in g.group_parent.iter().enumerate() {
        let node = g.old_count() + grp;
        writeln!(out, "{} {}", g.node_label(parent), g.node_label(node))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{LpExponent, Point2D};
    use crate::instance::{sample_uniform, VertexSet};
    use crate::tessellation::{classify_cells, friends, DENSE_THRESHOLD, MAX_FRIENDS};

    /// `count` points spread inside cell `c`.
    fn fill(t: &Tessellation, c: CellId, count: usize, pts: &mut Vec<Point2D>) {
        let b = t.cell_rect(c);
        for i in 0..count {
            let f = (i as f64 + 0.5) / count as f64;
            pts.push(Point2D::new(b.x_lo + f * b.width(), b.y_lo + (0.25 + 0.5 * f) * b.height()));
        }
    }

    fn setup(r: f64, k: usize, cells: &[(CellId, usize)]) -> (Tessellation, CellClassification) {
        let t = Tessellation::new(r, LpExponent::TWO, k).unwrap();
        let mut pts = Vec::new();
        for &(c, n) in cells {
            fill(&t, c, n, &mut pts);
        }
        let cls = classify_cells(&t, &VertexSet::from_points(pts));
        (t, cls)
    }

    #[test]
    fn touching_dense_cells_give_an_edge() {
        // r = 0.25: m = 8, k = 4, 32 cells per side
        let (t, cls) = setup(0.25, 4, &[(CellId::new(3, 0), 48), (CellId::new(4, 0), 48)]);
        let gp = build_g_prime(&t, &cls);
        assert_eq!(gp.squares, vec![SquareId::new(0, 0), SquareId::new(1, 0)]);
        assert_eq!(gp.edges.len(), 1);
        assert_eq!(gp.witness(0, 1), Some((CellId::new(3, 0), CellId::new(4, 0))));
        assert_eq!(gp.witness(1, 0), Some((CellId::new(4, 0), CellId::new(3, 0))));
    }

    #[test]
    fn non_friend_squares_are_never_joined() {
        let (t, cls) = setup(0.25, 4, &[(CellId::new(0, 0), 48), (CellId::new(12, 0), 48)]);
        let gp = build_g_prime(&t, &cls);
        assert_eq!(gp.node_count(), 2);
        assert!(gp.edges.is_empty());
    }

    #[test]
    fn density_graph_on_random_instance() {
        let vs = sample_uniform(200_000, 5);
        let t = Tessellation::new(0.1, LpExponent::TWO, 4).unwrap();
        let cls = classify_cells(&t, &vs);
        let gp = build_g_prime(&t, &cls);
        assert!(gp.node_count() > 0);
        assert!(gp.max_degree() <= MAX_FRIENDS);
        for e in &gp.edges {
            let (sa, sb) = (gp.squares[e.a], gp.squares[e.b]);
            assert!(friends(sa, sb));
            assert!(cls.is_dense(e.witness_a) && cls.is_dense(e.witness_b));
            assert_eq!(t.square_of(e.witness_a), sa);
            assert_eq!(t.square_of(e.witness_b), sb);
            assert!(t.cells_close(e.witness_a, e.witness_b));
        }
        let again = build_g_prime(&t, &cls);
        assert_eq!(again.edges, gp.edges);
    }

    #[test]
    fn hooks_prefer_the_smallest_dense_close_cell() {
        let (t, cls) = setup(0.25, 4, &[(CellId::new(1, 1), 3), (CellId::new(2, 1), 48), (CellId::new(1, 2), 48)]);
        assert_eq!(find_hook_cell(&t, &cls, CellId::new(1, 1)).unwrap(), CellId::new(2, 1));
    }

    #[test]
    fn missing_hook_is_reported() {
        let (t, cls) = setup(0.25, 4, &[(CellId::new(1, 1), 3), (CellId::new(30, 30), 48)]);
        let err = find_hook_cell(&t, &cls, CellId::new(1, 1)).unwrap_err();
        assert_eq!(err.reason, FailureReason::HookMissing);
        let gp = build_g_prime(&t, &cls);
        assert_eq!(build_g_double_prime(&t, &cls, &gp).unwrap_err().reason, FailureReason::HookMissing);
    }

    #[test]
    fn sparse_cells_with_one_hook_square_form_one_group() {
        // square (1,0) holds three sparse cells, square (0,0) one dense cell near them
        let (t, cls) = setup(
            0.25,
            4,
            &[(CellId::new(3, 1), 48), (CellId::new(4, 0), 2), (CellId::new(4, 1), 5), (CellId::new(5, 2), 1)],
        );
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        assert_eq!(g.groups.len(), 1);
        assert_eq!(g.groups[0].square, SquareId::new(1, 0));
        assert_eq!(g.groups[0].label, SquareId::new(0, 0));
        assert_eq!(g.groups[0].cells.len(), 3);
        assert_eq!(g.neighbors(1), &[0]);
        assert!(is_gpp_connected(&g));
    }

    #[test]
    fn sparse_cells_with_two_hook_squares_form_two_groups() {
        // sparse square (1,0) between dense squares (0,0) and (2,0)
        let (t, cls) = setup(
            0.25,
            4,
            &[(CellId::new(0, 3), 48), (CellId::new(11, 3), 48), (CellId::new(4, 0), 1), (CellId::new(7, 0), 1)],
        );
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        assert_eq!(g.groups.len(), 2);
        let labels: Vec<_> = g.groups.iter().map(|grp| grp.label).collect();
        assert_eq!(labels, vec![SquareId::new(0, 0), SquareId::new(2, 0)]);
        assert!(g.max_groups_per_sparse_square() <= MAX_FRIENDS);
        for (c, hook) in &g.hooks {
            assert!(cls.is_dense(hook.cell) && t.cells_close(*c, hook.cell));
            assert!(friends(t.square_of(*c), hook.square));
        }
    }

    #[test]
    fn connectivity_of_tiny_graphs() {
        let (t, cls) = setup(0.25, 4, &[(CellId::new(0, 0), 48)]);
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        assert!(is_gpp_connected(&g));

        let (t, cls) = setup(0.25, 4, &[(CellId::new(0, 0), 48), (CellId::new(31, 31), 48)]);
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        assert!(!is_gpp_connected(&g));
        assert_eq!(spanning_tree(&g).unwrap_err().reason, FailureReason::Disconnected);

        let (t, cls) = setup(0.25, 4, &[]);
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        assert!(!is_gpp_connected(&g));
    }

    #[test]
    fn euler_walks_of_small_trees() {
        let path = SpanningTree::from_edges(3, 0, vec![(0, 1), (1, 2)]);
        assert_eq!(euler_traversal(&path, 0), vec![0, 1, 2, 1, 0]);
        let star = SpanningTree::from_edges(3, 0, vec![(0, 1), (0, 2)]);
        assert_eq!(euler_traversal(&star, 0), vec![0, 1, 0, 2, 0]);
        let single = SpanningTree::from_edges(1, 0, vec![]);
        assert_eq!(euler_traversal(&single, 0), vec![0]);
    }

    #[test]
    fn random_instance_tree_and_walk() {
        let vs = sample_uniform(120_000, 9);
        let t = Tessellation::new(0.2, LpExponent::TWO, 4).unwrap();
        let cls = classify_cells(&t, &vs);
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        let tree = spanning_tree(&g).unwrap();
        assert_eq!(tree.edges.len(), g.node_count() - 1);
        assert!(tree.max_degree() <= MAX_FRIENDS);
        for v in g.old_count()..g.node_count() {
            assert_eq!(tree.degree(v), 1);
        }
        let plan = TraversalPlan::new(tree);
        let seq = &plan.sequence;
        assert_eq!(seq.len(), 2 * plan.tree.edges.len() + 1);
        assert_eq!((seq[0], *seq.last().unwrap()), (0, 0));
        let mut visits = vec![0usize; g.node_count()];
        for &v in seq {
            visits[v] += 1;
        }
        for (v, &count) in visits.iter().enumerate() {
            let expected = plan.tree.degree(v) + usize::from(v == plan.tree.root);
            assert_eq!(count, expected, "node {v}");
        }
        let _ = DENSE_THRESHOLD;
    }

    #[test]
    fn edge_list_dump() {
        let (t, cls) = setup(0.25, 4, &[(CellId::new(3, 1), 48), (CellId::new(4, 1), 48), (CellId::new(10, 1), 2)]);
        let gp = build_g_prime(&t, &cls);
        let g = build_g_double_prime(&t, &cls, &gp).unwrap();
        let mut out = Vec::new();
        dump_g_double_prime(&mut out, &g).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, "S:0,0 S:1,0\nS:1,0 N:2,0:1,0\n");
    }
}
