//! End-to-end search for a Hamiltonian cycle on a given point set.

use serde::Serialize;

use crate::aux_graph::{
    build_g_double_prime, build_g_prime, spanning_tree, AugmentedGraph, DensityGraph, TraversalPlan,
};
use crate::error::{Error, Result};
use crate::geometry::{alpha_p, lp_distance, LpExponent};
use crate::hamiltonian::{
    construct_cycle, verify_cycle, ConstructionFailure, CycleConstruction, FailureReason, HamCycle, LedgerStats,
    VerificationReport,
};
use crate::instance::VertexSet;
use crate::tessellation::{
    choose_k, classify_cells, count_k, lattice_k_count, CellClassification, KChoice, KSearch, Tessellation,
    DENSE_THRESHOLD, MAX_FRIENDS,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum KSelection {
    Fixed(usize),
    /// Smallest `k` in range whose close-cell count meets the target for the
    /// slack implied by `n` and `r`.
    Auto(KSearch),
}

impl Default for KSelection {
    fn default() -> Self {
        KSelection::Auto(KSearch::default())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct PipelineOptions {
    pub k: KSelection,
    /// Additive slack on the verifier's `<= r` test.
    pub verify_tolerance: f64,
}

/// `alpha_p - ln n / (n r^2)`: how far `r` sits above the connectivity threshold.
pub fn implied_epsilon(n: usize, r: f64, p: LpExponent) -> f64 {
    alpha_p(p) - (n as f64).ln() / (n as f64 * r * r)
}

/// Every artifact produced on the way to the cycle. Stages after a failure are `None`.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub n: usize,
    pub r: f64,
    pub p: LpExponent,
    pub eps: f64,
    pub k_choice: Option<KChoice>,
    pub tessellation: Option<Tessellation>,
    pub classification: Option<CellClassification>,
    pub density: Option<DensityGraph>,
    pub augmented: Option<AugmentedGraph>,
    pub plan: Option<TraversalPlan>,
    pub outcome: std::result::Result<CycleConstruction, ConstructionFailure>,
    pub verification: Option<VerificationReport>,
}

impl PipelineRun {
    pub fn cycle(&self) -> Option<&HamCycle> {
        self.outcome.as_ref().ok().map(|c| &c.cycle)
    }

    pub fn failure(&self) -> Option<&ConstructionFailure> {
        self.outcome.as_ref().err()
    }

    pub fn verified(&self) -> bool {
        self.verification.is_some_and(|v| v.valid)
    }
}

fn resolve_k(n: usize, r: f64, p: LpExponent, sel: KSelection) -> Result<(usize, f64, Option<KChoice>)> {
    let eps = implied_epsilon(n, r, p);
    match sel {
        KSelection::Fixed(k) => Ok((k, eps, None)),
        KSelection::Auto(search) if eps > 0.0 => {
            let choice = choose_k(r, p, eps, search)?;
            Ok((choice.k, eps, Some(choice)))
        }
        KSelection::Auto(search) => Ok((search.min_k, eps, None)),
    }
}

/// Runs tessellation, classification, graph building, traversal, assembly and
/// verification. Construction failures are part of the returned run; only
/// invalid input is an `Err`.
pub fn find_hamiltonian_cycle(vs: &VertexSet, r: f64, p: LpExponent, opts: PipelineOptions) -> Result<PipelineRun> {
    let n = vs.len();
    if n < 3 {
        return Err(Error::InvalidConfig(format!("a cycle needs at least 3 vertices, got {n}")));
    }
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidRadius(r));
    }
    if let Some(i) = vs.points.iter().position(|pt| !pt.in_unit_square()) {
        return Err(Error::Malformed(format!("vertex {i} lies outside the unit square")));
    }
    let mut run = PipelineRun {
        n,
        r,
        p,
        eps: implied_epsilon(n, r, p),
        k_choice: None,
        tessellation: None,
        classification: None,
        density: None,
        augmented: None,
        plan: None,
        outcome: Err(ConstructionFailure::new(FailureReason::RadiusDegenerate, "not run")),
        verification: None,
    };
    if r > 1.0 {
        run.outcome = angular_cycle(vs, r, p);
    } else {
        let (k, _, choice) = resolve_k(n, r, p, opts.k)?;
        run.k_choice = choice;
        let t = Tessellation::new(r, p, k)?;
        let cls = classify_cells(&t, vs);
        let gp = build_g_prime(&t, &cls);
        let staged = build_g_double_prime(&t, &cls, &gp).and_then(|aux| {
            let tree = spanning_tree(&aux)?;
            Ok((aux, TraversalPlan::new(tree)))
        });
        run.outcome = match staged {
            Ok((aux, plan)) => {
                let outcome = construct_cycle(vs, &t, &cls, &aux, &plan);
                run.augmented = Some(aux);
                run.plan = Some(plan);
                outcome
            }
            Err(e) => Err(e),
        };
        run.tessellation = Some(t);
        run.classification = Some(cls);
        run.density = Some(gp);
    }
    if let Ok(built) = &run.outcome {
        let report = verify_cycle(vs, r, p, built.cycle.as_slice(), opts.verify_tolerance);
        if !report.valid {
            run.outcome = Err(ConstructionFailure::new(
                FailureReason::EdgeTooLong,
                format!("verifier rejected the assembled cycle: {:?}", report.violation),
            ));
        }
        run.verification = Some(report);
    }
    Ok(run)
}

/// For radii above 1 the grid has a single square; visit the points by angle
/// around their centroid and keep the result only if every edge fits.
fn angular_cycle(vs: &VertexSet, r: f64, p: LpExponent) -> std::result::Result<CycleConstruction, ConstructionFailure> {
    let n = vs.len() as f64;
    let cx = vs.points.iter().map(|pt| pt.x).sum::<f64>() / n;
    let cy = vs.points.iter().map(|pt| pt.y).sum::<f64>() / n;
    let mut order: Vec<usize> = (0..vs.len()).collect();
    let angle = |i: usize| (vs.points[i].y - cy).atan2(vs.points[i].x - cx);
    order.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    let ok =
        (0..order.len()).all(|i| lp_distance(p, vs.points[order[i]], vs.points[order[(i + 1) % order.len()]]) <= r);
    if !ok {
        return Err(ConstructionFailure::new(
            FailureReason::RadiusDegenerate,
            format!("r = {r} exceeds 1 and the angular order has an edge longer than r"),
        ));
    }
    let stats = LedgerStats { stitched: order.len(), ..LedgerStats::default() };
    Ok(CycleConstruction { cycle: HamCycle(order), stats })
}

/// Structural facts the construction relies on, measured on one run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct InvariantReport {
    pub density_max_degree: usize,
    pub max_groups_per_sparse_square: usize,
    pub tree_max_degree: usize,
    pub traversal_doubles_tree: bool,
    pub max_dense_withdrawals: usize,
    pub k_count: Option<usize>,
    pub k_target: Option<f64>,
    /// False when the run stopped before the stage a check needs.
    pub complete: bool,
    pub violations: Vec<String>,
}

impl InvariantReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks degree bounds, the traversal, the withdrawal budget and the
/// close-cell count for whatever stages `run` reached.
pub fn structural_invariants(run: &PipelineRun) -> InvariantReport {
    let mut rep = InvariantReport::default();
    let mut violations = Vec::new();

    if let Some(gp) = &run.density {
        rep.density_max_degree = gp.max_degree();
        if rep.density_max_degree > MAX_FRIENDS {
            violations.push(format!("density graph degree {} > {MAX_FRIENDS}", rep.density_max_degree));
        }
    }
    if let Some(aux) = &run.augmented {
        rep.max_groups_per_sparse_square = aux.max_groups_per_sparse_square();
        if rep.max_groups_per_sparse_square > MAX_FRIENDS {
            violations.push(format!("{} groups in one sparse square", rep.max_groups_per_sparse_square));
        }
    }
    if let Some(plan) = &run.plan {
        rep.tree_max_degree = plan.tree.max_degree();
        if rep.tree_max_degree > MAX_FRIENDS {
            violations.push(format!("spanning tree degree {} > {MAX_FRIENDS}", rep.tree_max_degree));
        }
        rep.traversal_doubles_tree = traversal_doubles_tree(plan);
        if !rep.traversal_doubles_tree {
            violations.push("traversal does not cross each tree edge exactly twice".into());
        }
    }
    if let Ok(built) = &run.outcome {
        rep.max_dense_withdrawals = built.stats.max_dense_withdrawals;
        if rep.max_dense_withdrawals > DENSE_THRESHOLD {
            violations.push(format!("a dense cell gave out {} vertices", rep.max_dense_withdrawals));
        }
    }
    if let (Some(t), Some(choice)) = (&run.tessellation, &run.k_choice) {
        let k_count = count_k(t).unwrap_or_else(|_| lattice_k_count(t.r(), t.p(), t.k()));
        rep.k_count = Some(k_count);
        rep.k_target = Some(choice.target);
        if (k_count as f64) < choice.target {
            violations.push(format!("close-cell count {k_count} below target {}", choice.target));
        }
    }
    rep.complete = run.plan.is_some() && run.outcome.is_ok();
    rep.violations = violations;
    rep
}

/// Every tree edge appears exactly twice among consecutive pairs of the walk,
/// and no other pair appears.
pub fn traversal_doubles_tree(plan: &TraversalPlan) -> bool {
    use std::collections::HashMap;
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for w in plan.sequence.windows(2) {
        *counts.entry(key(w[0], w[1])).or_default() += 1;
    }
    counts.len() == plan.tree.edges.len() && plan.tree.edges.iter().all(|&(a, b)| counts.get(&key(a, b)) == Some(&2))
}
