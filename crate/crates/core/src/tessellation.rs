//! Two-level tessellation of the unit square.
//!
//! The coarse level has `m = floor(2 / r)` squares per side, each of side
//! `y = 1 / m`; every square is split into `k x k` cells. Cells are classified
//! by how many vertices they hold, and two cells are *close* when every pair of
//! their points is within distance `r`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{alpha_p, max_box_distance, LpExponent, Point2D, Rect};
use crate::instance::VertexSet;

/// A cell with at least this many vertices is dense.
pub const DENSE_THRESHOLD: usize = 48;
/// Friend squares lie within this Chebyshev distance in square indices.
pub const FRIEND_RADIUS: u32 = 2;
/// Upper bound on the number of friends of one square.
pub const MAX_FRIENDS: usize = 24;

pub const DEFAULT_MIN_K: usize = 4;
pub const DEFAULT_MAX_K: usize = 64;

/// Square of the initial tessellation. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SquareId {
    pub row: u32,
    pub col: u32,
}

impl SquareId {
    pub const fn new(col: u32, row: u32) -> Self {
        SquareId { row, col }
    }

    pub fn chebyshev(self, other: SquareId) -> u32 {
        self.col.abs_diff(other.col).max(self.row.abs_diff(other.row))
    }
}

impl fmt::Display for SquareId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.col, self.row)
    }
}

/// Cell of the fine tessellation. Ordering is row-major.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId {
    pub row: u32,
    pub col: u32,
}

impl CellId {
    pub const fn new(col: u32, row: u32) -> Self {
        CellId { row, col }
    }
}

impl fmt::Display for CellId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.col, self.row)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CellClass {
    Empty,
    Sparse,
    Dense,
}

impl CellClass {
    pub fn from_count(count: usize) -> Self {
        match count {
            0 => CellClass::Empty,
            c if c < DENSE_THRESHOLD => CellClass::Sparse,
            _ => CellClass::Dense,
        }
    }
}

/// A square is dense if one of its cells is dense, sparse if it holds
/// vertices but no dense cell, and empty otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SquareClass {
    Empty,
    Sparse,
    Dense,
}

#[derive(Debug, Clone, Serialize)]
pub struct Tessellation {
    r: f64,
    p: LpExponent,
    m: usize,
    k: usize,
    y: f64,
    cell_side: f64,
}

impl Tessellation {
    /// Builds the grid for radius `r` with `k x k` cells per square.
    pub fn new(r: f64, p: LpExponent, k: usize) -> Result<Self> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::InvalidTessellation(format!("radius {r} outside (0, 1]")));
        }
        if k < 2 {
            return Err(Error::InvalidTessellation(format!("k = {k}, need k >= 2")));
        }
        let m = (2.0 / r).floor() as usize;
        let mk = m
            .checked_mul(k)
            .filter(|&mk| mk <= u32::MAX as usize / 2)
            .ok_or_else(|| Error::InvalidTessellation(format!("grid of {m} x {k} cells per side is too large")))?;
        let t = Tessellation { r, p, m, k, y: 1.0 / m as f64, cell_side: 1.0 / mk as f64 };
        let origin = t.cell_rect(CellId::new(0, 0));
        if max_box_distance(p, &origin, &origin) > r {
            return Err(Error::InvalidTessellation(format!(
                "cells of side {} are not self-close at r = {r}",
                t.cell_side
            )));
        }
        Ok(t)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn p(&self) -> LpExponent {
        self.p
    }

    /// Squares per side, `floor(2 / r)`.
    pub fn m(&self) -> usize {
        self.m
    }

    /// Cells per square side.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Square side `1 / m`.
    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn cell_side(&self) -> f64 {
        self.cell_side
    }

    pub fn cells_per_side(&self) -> usize {
        self.m * self.k
    }

    pub fn cell_count(&self) -> usize {
        self.cells_per_side() * self.cells_per_side()
    }

    pub fn square_count(&self) -> usize {
        self.m * self.m
    }

    #[inline]
    pub fn cell_index(&self, c: CellId) -> usize {
        c.row as usize * self.cells_per_side() + c.col as usize
    }

    #[inline]
    pub fn cell_at(&self, idx: usize) -> CellId {
        let mk = self.cells_per_side();
        CellId::new((idx % mk) as u32, (idx / mk) as u32)
    }

    #[inline]
    pub fn square_index(&self, s: SquareId) -> usize {
        s.row as usize * self.m + s.col as usize
    }

    #[inline]
    pub fn square_at(&self, idx: usize) -> SquareId {
        SquareId::new((idx % self.m) as u32, (idx / self.m) as u32)
    }

    #[inline]
    pub fn square_of(&self, c: CellId) -> SquareId {
        let k = self.k as u32;
        SquareId::new(c.col / k, c.row / k)
    }

    fn cell_edge(&self, i: u32) -> f64 {
        i as f64 / self.cells_per_side() as f64
    }

    pub fn cell_rect(&self, c: CellId) -> Rect {
        Rect::new(self.cell_edge(c.col), self.cell_edge(c.col + 1), self.cell_edge(c.row), self.cell_edge(c.row + 1))
    }

    pub fn square_rect(&self, s: SquareId) -> Rect {
        let m = self.m as f64;
        Rect::new(s.col as f64 / m, (s.col + 1) as f64 / m, s.row as f64 / m, (s.row + 1) as f64 / m)
    }

    fn locate_axis(&self, v: f64) -> u32 {
        let mk = self.cells_per_side();
        let mut i = ((v * mk as f64).floor().max(0.0) as usize).min(mk - 1) as u32;
        // agree with cell_rect on half-open boundaries
        while i > 0 && v < self.cell_edge(i) {
            i -= 1;
        }
        while (i as usize) + 1 < mk && v >= self.cell_edge(i + 1) {
            i += 1;
        }
        i
    }

    /// Cell containing `pt`, half-open on interior boundaries; coordinate 1 maps to the last cell.
    pub fn locate(&self, pt: Point2D) -> CellId {
        CellId::new(self.locate_axis(pt.x), self.locate_axis(pt.y))
    }

    pub fn cells_close(&self, a: CellId, b: CellId) -> bool {
        max_box_distance(self.p, &self.cell_rect(a), &self.cell_rect(b)) <= self.r
    }

    /// Whether any two points of one square are within distance `r`.
    pub fn square_is_clique(&self) -> bool {
        self.p.norm(self.y, self.y) <= self.r
    }

    /// Cells of `s` in row-major order.
    pub fn cells_of_square(&self, s: SquareId) -> impl Iterator<Item = CellId> {
        let k = self.k as u32;
        let (c0, r0) = (s.col * k, s.row * k);
        (r0..r0 + k).flat_map(move |row| (c0..c0 + k).map(move |col| CellId::new(col, row)))
    }

    /// Cells of `s` in boustrophedon order: even local rows left to right, odd rows right to left.
    pub fn snake_cells(&self, s: SquareId) -> Vec<CellId> {
        let k = self.k as u32;
        let (c0, r0) = (s.col * k, s.row * k);
        let mut out = Vec::with_capacity(self.k * self.k);
        for lr in 0..k {
            if lr % 2 == 0 {
                out.extend((0..k).map(|lc| CellId::new(c0 + lc, r0 + lr)));
            } else {
                out.extend((0..k).rev().map(|lc| CellId::new(c0 + lc, r0 + lr)));
            }
        }
        out
    }

    /// True iff the cell lies at distance at least `r` from every side of the unit square.
    pub fn is_interior(&self, c: CellId) -> bool {
        let b = self.cell_rect(c);
        b.x_lo >= self.r && 1.0 - b.x_hi >= self.r && b.y_lo >= self.r && 1.0 - b.y_hi >= self.r
    }

    /// Half-width, in cells, of a window that contains every cell close to a given cell.
    pub fn close_window(&self) -> u32 {
        (self.r / self.cell_side).ceil() as u32
    }

    /// In-grid friends of `s`, row-major.
    pub fn friends_of(&self, s: SquareId) -> impl Iterator<Item = SquareId> + '_ {
        let m = self.m as u32;
        let rows = s.row.saturating_sub(FRIEND_RADIUS)..=(s.row + FRIEND_RADIUS).min(m - 1);
        rows.flat_map(move |row| {
            let cols = s.col.saturating_sub(FRIEND_RADIUS)..=(s.col + FRIEND_RADIUS).min(m - 1);
            cols.map(move |col| SquareId::new(col, row))
        })
        .filter(move |&t| t != s)
    }
}

/// Two distinct squares are friends if they share a corner or are both
/// adjacent to a common third square.
pub fn friends(a: SquareId, b: SquareId) -> bool {
    a != b && a.chebyshev(b) <= FRIEND_RADIUS
}

/// Per-cell vertex buckets and density classes.
#[derive(Debug, Clone)]
pub struct CellClassification {
    cells_per_side: usize,
    k: usize,
    cell_start: Vec<u32>,
    members: Vec<u32>,
    vertex_cell: Vec<u32>,
    square_class: Vec<SquareClass>,
}

impl CellClassification {
    pub fn vertex_count(&self) -> usize {
        self.vertex_cell.len()
    }

    fn idx(&self, c: CellId) -> usize {
        c.row as usize * self.cells_per_side + c.col as usize
    }

    /// Vertices of `c`, ascending.
    pub fn vertices(&self, c: CellId) -> &[u32] {
        let i = self.idx(c);
        &self.members[self.cell_start[i] as usize..self.cell_start[i + 1] as usize]
    }

    pub fn count(&self, c: CellId) -> usize {
        let i = self.idx(c);
        (self.cell_start[i + 1] - self.cell_start[i]) as usize
    }

    pub fn class(&self, c: CellId) -> CellClass {
        CellClass::from_count(self.count(c))
    }

    pub fn is_dense(&self, c: CellId) -> bool {
        self.count(c) >= DENSE_THRESHOLD
    }

    pub fn cell_of_vertex(&self, v: usize) -> CellId {
        let i = self.vertex_cell[v] as usize;
        CellId::new((i % self.cells_per_side) as u32, (i / self.cells_per_side) as u32)
    }

    pub fn square_class(&self, s: SquareId) -> SquareClass {
        let m = self.cells_per_side / self.k;
        self.square_class[s.row as usize * m + s.col as usize]
    }

    /// Offset of `c`'s bucket in the flat member array; used by the usage ledger.
    pub(crate) fn bucket_range(&self, c: CellId) -> (u32, u32) {
        let i = self.idx(c);
        (self.cell_start[i], self.cell_start[i + 1])
    }

    pub(crate) fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn class_counts(&self) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for w in self.cell_start.windows(2) {
            match CellClass::from_count((w[1] - w[0]) as usize) {
                CellClass::Empty => counts.empty += 1,
                CellClass::Sparse => counts.sparse += 1,
                CellClass::Dense => counts.dense += 1,
            }
        }
        counts
    }

    pub fn square_counts(&self) -> ClassCounts {
        let mut counts = ClassCounts::default();
        for c in &self.square_class {
            match c {
                SquareClass::Empty => counts.empty += 1,
                SquareClass::Sparse => counts.sparse += 1,
                SquareClass::Dense => counts.dense += 1,
            }
        }
        counts
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassCounts {
    pub dense: usize,
    pub sparse: usize,
    pub empty: usize,
}

/// Buckets every vertex into its cell with one counting pass; `O(n + cells)`.
pub fn classify_cells(t: &Tessellation, vs: &VertexSet) -> CellClassification {
    let cells = t.cell_count();
    let vertex_cell: Vec<u32> = vs.points.iter().map(|&pt| t.cell_index(t.locate(pt)) as u32).collect();

    let mut cell_start = vec![0u32; cells + 1];
    for &c in &vertex_cell {
        cell_start[c as usize + 1] += 1;
    }
    for i in 0..cells {
        cell_start[i + 1] += cell_start[i];
    }
    let mut fill = cell_start[..cells].to_vec();
    let mut members = vec![0u32; vertex_cell.len()];
    for (v, &c) in vertex_cell.iter().enumerate() {
        members[fill[c as usize] as usize] = v as u32;
        fill[c as usize] += 1;
    }

    let mut square_class = vec![SquareClass::Empty; t.square_count()];
    for idx in 0..cells {
        let count = (cell_start[idx + 1] - cell_start[idx]) as usize;
        if count == 0 {
            continue;
        }
        let s = t.square_index(t.square_of(t.cell_at(idx)));
        if count >= DENSE_THRESHOLD {
            square_class[s] = SquareClass::Dense;
        } else if square_class[s] == SquareClass::Empty {
            square_class[s] = SquareClass::Sparse;
        }
    }

    CellClassification { cells_per_side: t.cells_per_side(), k: t.k(), cell_start, members, vertex_cell, square_class }
}

/// Row-major first dense cell close to `c`, if any.
pub fn first_dense_close_cell(t: &Tessellation, cls: &CellClassification, c: CellId) -> Option<CellId> {
    let w = t.close_window();
    let last = t.cells_per_side() as u32 - 1;
    for row in c.row.saturating_sub(w)..=(c.row + w).min(last) {
        for col in c.col.saturating_sub(w)..=(c.col + w).min(last) {
            let b = CellId::new(col, row);
            if cls.is_dense(b) && t.cells_close(c, b) {
                return Some(b);
            }
        }
    }
    None
}

/// Number of cells close to `c` in the closed quadrant above and to the right of it, `c` excluded.
pub fn count_k_at(t: &Tessellation, c: CellId) -> Result<usize> {
    if !t.is_interior(c) {
        return Err(Error::NoInteriorCell { r: t.r(), k: t.k() });
    }
    let mk = t.cells_per_side() as u32;
    let mut total = 0usize;
    for col in c.col..mk {
        let mut column = 0usize;
        for row in c.row..mk {
            if !t.cells_close(c, CellId::new(col, row)) {
                break;
            }
            column += 1;
        }
        if column == 0 {
            break;
        }
        total += column;
    }
    Ok(total - 1)
}

/// `K` evaluated at the central cell of the grid.
pub fn count_k(t: &Tessellation) -> Result<usize> {
    let mid = (t.cells_per_side() / 2) as u32;
    count_k_at(t, CellId::new(mid, mid))
}

/// `K` on an unbounded lattice with the cell side implied by `(r, k)`;
/// matches [`count_k`] wherever an interior cell exists.
pub fn lattice_k_count(r: f64, p: LpExponent, k: usize) -> usize {
    let m = (2.0 / r).floor().max(1.0) as usize;
    let mk = (m * k) as f64;
    let edge = |i: usize| i as f64 / mk;
    let origin = Rect::new(0.0, edge(1), 0.0, edge(1));
    let mut total = 0usize;
    for i in 0.. {
        let mut column = 0usize;
        for j in 0.. {
            let b = Rect::new(edge(i), edge(i + 1), edge(j), edge(j + 1));
            if max_box_distance(p, &origin, &b) > r {
                break;
            }
            column += 1;
        }
        if column == 0 {
            break;
        }
        total += column;
    }
    total.saturating_sub(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KSearch {
    pub min_k: usize,
    pub max_k: usize,
}

impl Default for KSearch {
    fn default() -> Self {
        KSearch { min_k: DEFAULT_MIN_K, max_k: DEFAULT_MAX_K }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KChoice {
    pub k: usize,
    /// Smallest `K` over the radii the choice was made for.
    pub k_count: usize,
    pub eps: f64,
    /// `(alpha_p - eps / 2) k^2`.
    pub target: f64,
    /// False when no `k <= max_k` met the target and the cap was returned.
    pub satisfied: bool,
}

/// Smallest `k` in the search range with `K >= (alpha_p - eps/2) k^2` at radius `r`.
pub fn choose_k(r: f64, p: LpExponent, eps: f64, search: KSearch) -> Result<KChoice> {
    choose_k_for_radii(&[r], p, eps, search)
}

/// Like [`choose_k`], but the returned `k` meets the target at every radius in `radii`.
pub fn choose_k_for_radii(radii: &[f64], p: LpExponent, eps: f64, search: KSearch) -> Result<KChoice> {
    let alpha = alpha_p(p);
    if !(eps > 0.0 && eps < alpha) {
        return Err(Error::InvalidConfig(format!("k selection needs 0 < eps < alpha_p = {alpha}, got {eps}")));
    }
    if search.min_k < 2 || search.max_k < search.min_k {
        return Err(Error::InvalidConfig(format!("invalid k range {}..={}", search.min_k, search.max_k)));
    }
    if radii.is_empty() || radii.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
        return Err(Error::InvalidConfig("k selection needs radii in (0, 1]".into()));
    }
    let eval = |k: usize| {
        let target = (alpha - eps / 2.0) * (k * k) as f64;
        let k_count = radii.iter().map(|&r| lattice_k_count(r, p, k)).min().unwrap_or(0);
        (k_count, target)
    };
    for k in search.min_k..=search.max_k {
        let (k_count, target) = eval(k);
        if k_count as f64 >= target {
            return Ok(KChoice { k, k_count, eps, target, satisfied: true });
        }
    }
    let (k_count, target) = eval(search.max_k);
    Ok(KChoice { k: search.max_k, k_count, eps, target, satisfied: false })
}

/// Per-instance check of the density statements the construction relies on.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub r: f64,
    pub p: LpExponent,
    pub m: usize,
    pub k: usize,
    pub y: f64,
    pub cell_side: f64,
    pub dense_threshold: usize,
    pub friend_radius: u32,
    pub cells: ClassCounts,
    pub squares: ClassCounts,
    /// `K` at the central cell; absent when no cell is at distance `r` from the boundary.
    pub k_count: Option<usize>,
    /// Non-dense cells within `4y` of two sides.
    pub corner_violations: Vec<CellId>,
    /// Sparse cells with no dense close cell.
    pub hook_violations: Vec<CellId>,
}

impl DiagnosticsReport {
    pub fn violation_count(&self) -> usize {
        self.corner_violations.len() + self.hook_violations.len()
    }
}

pub fn density_diagnostics(t: &Tessellation, cls: &CellClassification) -> DiagnosticsReport {
    let band = 4.0 * t.y();
    let mut corner_violations = Vec::new();
    let mut hook_violations = Vec::new();
    for idx in 0..t.cell_count() {
        let c = t.cell_at(idx);
        let b = t.cell_rect(c);
        let near = [b.x_lo, 1.0 - b.x_hi, b.y_lo, 1.0 - b.y_hi].iter().filter(|&&d| d < band).count();
        if near >= 2 && !cls.is_dense(c) {
            corner_violations.push(c);
        }
        if cls.class(c) == CellClass::Sparse && first_dense_close_cell(t, cls, c).is_none() {
            hook_violations.push(c);
        }
    }
    DiagnosticsReport {
        r: t.r(),
        p: t.p(),
        m: t.m(),
        k: t.k(),
        y: t.y(),
        cell_side: t.cell_side(),
        dense_threshold: DENSE_THRESHOLD,
        friend_radius: FRIEND_RADIUS,
        cells: cls.class_counts(),
        squares: cls.square_counts(),
        k_count: count_k(t).ok(),
        corner_violations,
        hook_violations,
    }
}
