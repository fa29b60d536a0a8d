//! Monte-Carlo trials, radius sweeps and runtime scaling.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{alpha_p, LpExponent};
use crate::hamiltonian::{FailureReason, LedgerStats};
use crate::instance::{is_connected, sample_uniform, threshold_radius, VertexSet};
use crate::pipeline::{find_hamiltonian_cycle, structural_invariants, InvariantReport, KSelection, PipelineOptions};
use crate::tessellation::{choose_k_for_radii, KSearch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrialOutcome {
    CycleVerified,
    Failure(FailureReason),
}

impl TrialOutcome {
    pub fn is_verified(self) -> bool {
        self == TrialOutcome::CycleVerified
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TrialResult {
    pub n: usize,
    pub seed: u64,
    pub r: f64,
    pub k: Option<usize>,
    pub outcome: TrialOutcome,
    pub connected: bool,
    /// Pipeline time from tessellation through verification.
    pub wall_ms: f64,
    pub stats: Option<LedgerStats>,
    pub invariants: InvariantReport,
}

impl TrialResult {
    /// Equality of everything except timing.
    pub fn same_result(&self, other: &TrialResult) -> bool {
        self.n == other.n
            && self.seed == other.seed
            && self.r == other.r
            && self.k == other.k
            && self.outcome == other.outcome
            && self.connected == other.connected
            && self.stats == other.stats
            && self.invariants == other.invariants
    }
}

fn timed_pipeline(
    vs: &VertexSet,
    r: f64,
    p: LpExponent,
    k: KSelection,
) -> (TrialOutcome, Option<usize>, Option<LedgerStats>, InvariantReport, f64) {
    let start = Instant::now();
    let run = find_hamiltonian_cycle(vs, r, p, PipelineOptions { k, verify_tolerance: 0.0 });
    let wall_ms = start.elapsed().as_secs_f64() * 1e3;
    match run {
        Ok(run) => {
            let outcome = match (&run.outcome, run.verified()) {
                (Ok(_), true) => TrialOutcome::CycleVerified,
                (Err(f), _) => TrialOutcome::Failure(f.reason),
                (Ok(_), false) => TrialOutcome::Failure(FailureReason::EdgeTooLong),
            };
            let k_used = run.tessellation.as_ref().map(|t| t.k());
            let stats = run.outcome.as_ref().ok().map(|c| c.stats);
            (outcome, k_used, stats, structural_invariants(&run), wall_ms)
        }
        Err(_) => {
            (TrialOutcome::Failure(FailureReason::RadiusDegenerate), None, None, InvariantReport::default(), wall_ms)
        }
    }
}

/// Samples `n` points with `seed`, runs the pipeline and records connectivity.
/// Sampling and the connectivity check are not timed.
pub fn run_trial(n: usize, p: LpExponent, r: f64, seed: u64, k: KSelection) -> TrialResult {
    let vs = sample_uniform(n, seed);
    let (outcome, k_used, stats, invariants, wall_ms) = timed_pipeline(&vs, r, p, k);
    let connected = is_connected(&vs, r, p);
    TrialResult { n, seed, r, k: k_used, outcome, connected, wall_ms, stats, invariants }
}

/// `k` shared by every `n` of a sweep at one multiplier. The slack
/// `alpha_p - ln n / (n r^2)` equals `alpha_p (1 - 1/c^2)` at `r = c * threshold`,
/// so it does not depend on `n`; at `c <= 1` there is no slack and the
/// smallest `k` is used.
pub fn k_for_multiplier(ns: &[usize], p: LpExponent, multiplier: f64, search: KSearch) -> Result<usize> {
    if multiplier <= 1.0 {
        return Ok(search.min_k);
    }
    let eps = alpha_p(p) * (1.0 - 1.0 / (multiplier * multiplier));
    let radii: Vec<f64> = ns.iter().map(|&n| multiplier * threshold_radius(n, p)).filter(|&r| r <= 1.0).collect();
    if radii.is_empty() {
        return Ok(search.min_k);
    }
    Ok(choose_k_for_radii(&radii, p, eps, search)?.k)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub ns: Vec<usize>,
    pub p: LpExponent,
    pub multipliers: Vec<f64>,
    pub trials: usize,
    pub base_seed: u64,
    /// Worker threads; 0 uses one per core.
    pub workers: usize,
    pub k_search: KSearch,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if let Some(&c) = self.multipliers.iter().find(|&&c| !(c.is_finite() && c > 0.0)) {
            return Err(Error::InvalidConfig(format!("multiplier {c} is not positive")));
        }
        if let Some(&n) = self.ns.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidConfig(format!("n = {n} is below 3")));
        }
        Ok(())
    }
}

/// One `(n, multiplier)` cell of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub p: String,
    pub multiplier: f64,
    pub r: f64,
    pub trials: usize,
    pub cycle_verified: usize,
    pub connected: usize,
    /// `Reason:count` pairs joined by `;`, empty when nothing failed.
    pub failures_by_reason: String,
    pub median_ms: f64,
    pub p90_ms: f64,
}

impl SweepRow {
    pub fn success_fraction(&self) -> f64 {
        self.cycle_verified as f64 / self.trials as f64
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub trials: Vec<TrialResult>,
}

impl SweepReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.rows.is_empty() {
            w.write_record([
                "n",
                "p",
                "multiplier",
                "r",
                "trials",
                "cycle_verified",
                "connected",
                "failures_by_reason",
                "median_ms",
                "p90_ms",
            ])?;
        }
        for row in &self.rows {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.rows)?)
    }

    /// Rows identical apart from timing columns.
    pub fn same_results(&self, other: &SweepReport) -> bool {
        let strip = |r: &SweepRow| SweepRow { median_ms: 0.0, p90_ms: 0.0, ..r.clone() };
        self.rows.len() == other.rows.len()
            && self.rows.iter().zip(&other.rows).all(|(a, b)| strip(a) == strip(b))
            && self.trials.len() == other.trials.len()
            && self.trials.iter().zip(&other.trials).all(|(a, b)| a.same_result(b))
    }
}

/// Median and 90th percentile (nearest rank) of `times`.
pub fn time_summary(times: &[f64]) -> (f64, f64) {
    if times.is_empty() {
        return (0.0, 0.0);
    }
    let mut t = times.to_vec();
    t.sort_by(f64::total_cmp);
    let n = t.len();
    let median = if n % 2 == 1 { t[n / 2] } else { 0.5 * (t[n / 2 - 1] + t[n / 2]) };
    let rank = ((0.9 * n as f64).ceil() as usize).clamp(1, n);
    (median, t[rank - 1])
}

fn in_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs every `(n, multiplier, trial)` combination. Trial number `i` in that
/// lexicographic order uses seed `base_seed + i`.
pub fn sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    cfg.validate()?;
    let ks: Vec<usize> =
        cfg.multipliers.iter().map(|&c| k_for_multiplier(&cfg.ns, cfg.p, c, cfg.k_search)).collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for &n in &cfg.ns {
        for (mi, &c) in cfg.multipliers.iter().enumerate() {
            let r = c * threshold_radius(n, cfg.p);
            for _ in 0..cfg.trials {
                let seed = cfg.base_seed.wrapping_add(jobs.len() as u64);
                jobs.push((n, mi, r, seed));
            }
        }
    }
    let p = cfg.p;
    let run = |&(n, mi, r, seed): &(usize, usize, f64, u64)| run_trial(n, p, r, seed, KSelection::Fixed(ks[mi]));
    let trials: Vec<TrialResult> = if cfg.workers == 1 {
        jobs.iter().map(run).collect()
    } else {
        in_pool(cfg.workers, || jobs.par_iter().map(run).collect())?
    };

    let mut rows = Vec::new();
    for (chunk, job) in trials.chunks(cfg.trials).zip(jobs.chunks(cfg.trials)) {
        let (n, mi, r, _) = job[0];
        let mut failures: BTreeMap<FailureReason, usize> = BTreeMap::new();
        for t in chunk {
            if let TrialOutcome::Failure(reason) = t.outcome {
                *failures.entry(reason).or_default() += 1;
            }
        }
        let times: Vec<f64> = chunk.iter().map(|t| t.wall_ms).collect();
        let (median_ms, p90_ms) = time_summary(&times);
        rows.push(SweepRow {
            n,
            p: cfg.p.to_string(),
            multiplier: cfg.multipliers[mi],
            r,
            trials: chunk.len(),
            cycle_verified: chunk.iter().filter(|t| t.outcome.is_verified()).count(),
            connected: chunk.iter().filter(|t| t.connected).count(),
            failures_by_reason: failures.iter().map(|(k, v)| format!("{k}:{v}")).collect::<Vec<_>>().join(";"),
            median_ms,
            p90_ms,
        });
    }
    Ok(SweepReport { rows, trials })
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingRow {
    pub n: usize,
    pub r: f64,
    pub trials: usize,
    pub cycle_verified: usize,
    pub median_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScalingTable {
    pub p: String,
    pub multiplier: f64,
    pub k: usize,
    pub rows: Vec<ScalingRow>,
    /// `median(n[i+1]) / median(n[i])`.
    pub ratios: Vec<f64>,
}

/// Median pipeline time per `n`, trials run one after another. `ns` must be
/// strictly ascending with every entry at least 1000.
pub fn scaling_bench(ns: &[usize], p: LpExponent, multiplier: f64, trials: usize, seed: u64) -> Result<ScalingTable> {
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig("n values must be strictly ascending".into()));
    }
    if let Some(&n) = ns.iter().find(|&&n| n < 1000) {
        return Err(Error::InvalidConfig(format!("n = {n} is below 1000")));
    }
    if trials == 0 || !(multiplier.is_finite() && multiplier > 0.0) {
        return Err(Error::InvalidConfig("need trials >= 1 and a positive multiplier".into()));
    }
    let k = k_for_multiplier(ns, p, multiplier, KSearch::default())?;
    let mut rows = Vec::new();
    let mut index = 0u64;
    for &n in ns {
        let r = multiplier * threshold_radius(n, p);
        let mut times = Vec::with_capacity(trials);
        let mut verified = 0;
        for _ in 0..trials {
            let vs = sample_uniform(n, seed.wrapping_add(index));
            index += 1;
            let (outcome, _, _, _, ms) = timed_pipeline(&vs, r, p, KSelection::Fixed(k));
            verified += usize::from(outcome.is_verified());
            times.push(ms);
        }
        rows.push(ScalingRow { n, r, trials, cycle_verified: verified, median_ms: time_summary(&times).0 });
    }
    let ratios = rows.windows(2).map(|w| w[1].median_ms / w[0].median_ms).collect();
    Ok(ScalingTable { p: p.to_string(), multiplier, k, rows, ratios })
}
