//! End-to-end discovery driver: sweeps parameter tuples with pruning, runs
//! the assemble → annihilate → extract → verify pipeline over keep-sets,
//! optionally couples the periodic-product scan, and persists verified hits
//! as JSON lines with deterministic, scheduling-independent final output.

use std::collections::HashSet;
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::contiguous::{
    count_equations, count_series, dilation_filter, feasible, lattice_steps, IndexBox,
};
use crate::euler::{product_scan, ScanHit};
use crate::series::SeriesParams;
use crate::solver::{
    assemble, extract_system, solve_annihilator, verify_system, verify_uniqueness,
    ExtractedSystem,
};
use crate::{Error, Result};

/// Version stamp written into every persisted record.
pub const SCHEMA_VERSION: u32 = 1;

/// How the sufficient-count inequality is used while sweeping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PruningMode {
    /// Gate: candidates failing the inequality are skipped (recorded, since
    /// the inequality is sufficient-only and skipping may lose systems).
    StrictFeasible,
    /// Order: feasible candidates are scheduled first but nothing is gated.
    Heuristic,
}

/// Full description of a sweep. All ranges are inclusive `(lo, hi)`.
///
/// The index box of each candidate is anchored at its seed pair: it spans
/// `[c1 + box1.0*d1, c1 + box1.1*d1] x [c2 + box2.0*d2, c2 + box2.1*d2]`
/// where `(d1, d2)` are the candidate's lattice steps, so the seed is always
/// a lattice point of its own box.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    pub b11: (i64, i64),
    pub b22: (i64, i64),
    pub b12: (i64, i64),
    pub d1: (i64, i64),
    pub d2: (i64, i64),
    pub k1: (i64, i64),
    pub k2: (i64, i64),
    pub gamma: (i64, i64),
    pub eps1: Vec<i64>,
    pub eps2: Vec<i64>,
    /// Seed pair ranges.
    pub c1: (i64, i64),
    pub c2: (i64, i64),
    /// Box extents in lattice steps relative to the seed (must straddle 0).
    pub box1: (i64, i64),
    pub box2: (i64, i64),
    /// Target system sizes (keep-set cardinalities).
    pub system_sizes: Vec<usize>,
    /// Skip candidates whose equation or series-occurrence count exceeds this.
    pub count_cap: i64,
    pub pruning: PruningMode,
    /// Maximum number of keep-sets tried per candidate and system size.
    pub keep_cap: usize,
    /// Drop extracted systems with rational (non-polynomial) coefficients.
    pub require_polynomial: bool,
    pub euler_scan: bool,
    pub euler_order: u32,
    pub euler_kmax: usize,
    /// `x = q^s` substitutions for the product scan; `0` means `x = 1`.
    pub euler_x_subs: Vec<u32>,
    /// Truncation order for residual and fixed-point verification.
    pub verify_order: u32,
    /// Worker threads; `0` reads `QFE_JOBS`, then the machine parallelism.
    pub workers: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            b11: (1, 8),
            b22: (1, 8),
            b12: (1, 8),
            d1: (1, 4),
            d2: (1, 4),
            k1: (1, 4),
            k2: (1, 4),
            gamma: (1, 4),
            eps1: vec![1, -1],
            eps2: vec![1, -1],
            c1: (-4, 1),
            c2: (-4, 1),
            box1: (-1, 1),
            box2: (-1, 1),
            system_sizes: vec![2, 3, 4],
            count_cap: 200,
            pruning: PruningMode::Heuristic,
            keep_cap: 64,
            require_polynomial: true,
            euler_scan: false,
            euler_order: 50,
            euler_kmax: 24,
            euler_x_subs: vec![0],
            verify_order: 20,
            workers: 0,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        let ranges = [
            ("b11", self.b11, 1),
            ("b22", self.b22, 1),
            ("b12", self.b12, 1),
            ("d1", self.d1, 1),
            ("d2", self.d2, 1),
            ("k1", self.k1, 1),
            ("k2", self.k2, 1),
            ("gamma", self.gamma, 1),
            ("c1", self.c1, i64::MIN),
            ("c2", self.c2, i64::MIN),
        ];
        for (name, (lo, hi), min) in ranges {
            if lo > hi {
                return Err(Error::InvalidParameter(format!("{name} range [{lo},{hi}] is empty")));
            }
            if lo < min {
                return Err(Error::InvalidParameter(format!("{name} must start at {min} or above")));
            }
        }
        for (name, choices) in [("eps1", &self.eps1), ("eps2", &self.eps2)] {
            if choices.is_empty() {
                return Err(Error::InvalidParameter(format!("{name} choices are empty")));
            }
            if choices.iter().any(|&e| e != 1 && e != -1) {
                return Err(Error::InvalidParameter(format!("{name} choices must be +1 or -1")));
            }
        }
        for (name, (lo, hi)) in [("box1", self.box1), ("box2", self.box2)] {
            if lo > 0 || hi < 0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} offsets [{lo},{hi}] must straddle 0 so the seed lies in its box"
                )));
            }
        }
        if self.system_sizes.is_empty() || self.system_sizes.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParameter("system sizes must be nonempty and positive".into()));
        }
        for (name, v) in [
            ("count_cap", self.count_cap),
            ("keep_cap", self.keep_cap as i64),
            ("euler_order", self.euler_order as i64),
            ("euler_kmax", self.euler_kmax as i64),
            ("verify_order", self.verify_order as i64),
        ] {
            if v < 1 {
                return Err(Error::InvalidParameter(format!("{name} must be positive")));
            }
        }
        Ok(())
    }

    /// Every parameter tuple in the configured ranges, sorted.
    pub fn tuples(&self) -> Vec<SeriesParams> {
        let mut out = Vec::new();
        for b11 in self.b11.0..=self.b11.1 {
            for b22 in self.b22.0..=self.b22.1 {
                for b12 in self.b12.0..=self.b12.1 {
                    for c1 in self.c1.0..=self.c1.1 {
                        for c2 in self.c2.0..=self.c2.1 {
                            for d1 in self.d1.0..=self.d1.1 {
                                for d2 in self.d2.0..=self.d2.1 {
                                    for k1 in self.k1.0..=self.k1.1 {
                                        for k2 in self.k2.0..=self.k2.1 {
                                            for g in self.gamma.0..=self.gamma.1 {
                                                for &e1 in &self.eps1 {
                                                    for &e2 in &self.eps2 {
                                                        if let Ok(p) = SeriesParams::new(
                                                            b11, b22, b12, c1, c2, d1, d2, k1,
                                                            k2, g, e1, e2,
                                                        ) {
                                                            out.push(p);
                                                        }
                                                    }
                                                }
                                            }
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn worker_count(&self) -> usize {
        if self.workers > 0 {
            return self.workers;
        }
        if let Ok(v) = std::env::var("QFE_JOBS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n > 0 {
                    return n;
                }
            }
        }
        thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    }
}

/// Pipeline stage at which a candidate was skipped or failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Dilation,
    CountCap,
    Feasibility,
    Solve,
    Extract,
    Verify,
    Uniqueness,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Stage::Dilation => "dilation",
            Stage::CountCap => "count-cap",
            Stage::Feasibility => "feasibility",
            Stage::Solve => "solve",
            Stage::Extract => "extract",
            Stage::Verify => "verify",
            Stage::Uniqueness => "uniqueness",
        };
        write!(f, "{name}")
    }
}

/// A verified system found by the sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitRecord {
    pub schema: u32,
    pub params: SeriesParams,
    pub bx: IndexBox,
    pub keep: Vec<(i64, i64)>,
    pub system: ExtractedSystem,
    /// Residuals vanish modulo `q^(residual_order + 1)`.
    pub residual_order: u32,
    /// Fixed-point iteration stabilized and matched direct evaluation.
    pub unique: bool,
    pub fixed_point_iterations: Option<usize>,
    pub product_hits: Vec<ScanHit>,
    /// Wall-clock milliseconds; nulled by the deterministic merge.
    pub timestamp_ms: Option<u64>,
}

/// A candidate that was skipped (pruned) or failed, with the stage. Skips are
/// recorded as unexplored, never as impossible.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub schema: u32,
    pub params: SeriesParams,
    pub keep: Option<Vec<(i64, i64)>>,
    pub stage: Stage,
    pub detail: String,
}

/// Totals reported by `run_search`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSummary {
    pub tuples_total: usize,
    /// Tuples already present in the ledger and not re-run.
    pub tuples_resumed: usize,
    pub tuples_processed: usize,
    pub hits: usize,
    pub failures: usize,
    /// Records in the merged hit file (all runs against this directory).
    pub merged_hits: usize,
}

/// File layout inside a search output directory.
#[derive(Debug, Clone)]
pub struct SearchPaths {
    /// Append-only hit stream, one JSON record per line.
    pub hits: PathBuf,
    /// Append-only failure/skip stream.
    pub failures: PathBuf,
    /// Completed parameter tuples, one per line; used to resume.
    pub ledger: PathBuf,
    /// Deterministically sorted, timestamp-free hit file.
    pub merged: PathBuf,
}

impl SearchPaths {
    pub fn in_dir(dir: &Path) -> Self {
        SearchPaths {
            hits: dir.join("hits.jsonl"),
            failures: dir.join("failures.jsonl"),
            ledger: dir.join("ledger.jsonl"),
            merged: dir.join("hits-merged.jsonl"),
        }
    }
}

fn now_ms() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis() as u64).unwrap_or(0)
}

/// All size-`d` subsets of `pairs` that contain `seed`, in lexicographic
/// order of the remaining elements, capped at `cap`. Each subset is sorted.
pub fn keep_subsets(
    pairs: &[(i64, i64)],
    seed: (i64, i64),
    d: usize,
    cap: usize,
) -> Vec<Vec<(i64, i64)>> {
    if d == 0 || cap == 0 || !pairs.contains(&seed) {
        return Vec::new();
    }
    let others: Vec<(i64, i64)> = pairs.iter().copied().filter(|&p| p != seed).collect();
    let k = d - 1;
    let n = others.len();
    if k > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let mut set: Vec<(i64, i64)> =
            std::iter::once(seed).chain(idx.iter().map(|&i| others[i])).collect();
        set.sort_unstable();
        out.push(set);
        if out.len() >= cap || k == 0 {
            return out;
        }
        // Advance to the next lexicographic index combination.
        let mut i = k - 1;
        while idx[i] == i + n - k {
            if i == 0 {
                return out;
            }
            i -= 1;
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The seed-anchored index box of a candidate tuple.
pub fn candidate_box(p: &SeriesParams, cfg: &SearchConfig) -> Result<IndexBox> {
    let (d1, d2) = lattice_steps(p);
    IndexBox::new(
        p.c1 + cfg.box1.0 * d1,
        p.c1 + cfg.box1.1 * d1,
        p.c2 + cfg.box2.0 * d2,
        p.c2 + cfg.box2.1 * d2,
        d1,
        d2,
    )
}

struct TupleOutcome {
    params: SeriesParams,
    hits: Vec<HitRecord>,
    failures: Vec<FailureRecord>,
}

fn process_tuple(p: &SeriesParams, cfg: &SearchConfig) -> TupleOutcome {
    let mut hits: Vec<HitRecord> = Vec::new();
    let mut failures: Vec<FailureRecord> = Vec::new();
    let fail = |stage, keep, detail: String, failures: &mut Vec<FailureRecord>| {
        failures.push(FailureRecord { schema: SCHEMA_VERSION, params: *p, keep, stage, detail });
    };

    if !dilation_filter(p) {
        fail(
            Stage::Dilation,
            None,
            "skipped: tuple is a dilation of a smaller one (common divisor of B11, B22, B12, K1, K2 exceeds 1)".into(),
            &mut failures,
        );
        return TupleOutcome { params: *p, hits, failures };
    }
    let bx = match candidate_box(p, cfg) {
        Ok(b) => b,
        Err(e) => {
            fail(Stage::Solve, None, format!("box construction failed: {e}"), &mut failures);
            return TupleOutcome { params: *p, hits, failures };
        }
    };
    let (dm1, dm2) = bx.span();
    // Spans are multiples of the lattice steps by construction.
    let n_eq = count_equations(p, dm1, dm2).expect("box spans are lattice-aligned");
    let n_ser = count_series(p, dm1, dm2).expect("box spans are lattice-aligned");
    if n_eq > cfg.count_cap || n_ser > cfg.count_cap {
        fail(
            Stage::CountCap,
            None,
            format!(
                "skipped: {n_eq} equations / {n_ser} series occurrences exceed cap {}",
                cfg.count_cap
            ),
            &mut failures,
        );
        return TupleOutcome { params: *p, hits, failures };
    }

    let scan: Vec<ScanHit> = if cfg.euler_scan {
        product_scan(p, cfg.euler_order, cfg.euler_kmax, &cfg.euler_x_subs)
    } else {
        Vec::new()
    };
    let mc = assemble(p, &bx);
    let pairs = bx.pairs();

    for &d in &cfg.system_sizes {
        if cfg.pruning == PruningMode::StrictFeasible {
            let ok = feasible(p, dm1, dm2, d as i64).expect("box spans are lattice-aligned");
            if !ok {
                fail(
                    Stage::Feasibility,
                    None,
                    format!(
                        "skipped: sufficient-count inequality unmet for {d}-series systems (unexplored, not impossible)"
                    ),
                    &mut failures,
                );
                continue;
            }
        }
        for keep in keep_subsets(&pairs, (p.c1, p.c2), d, cfg.keep_cap) {
            let basis = match solve_annihilator(&mc, &keep) {
                Ok(b) => b,
                Err(e) => {
                    fail(Stage::Solve, Some(keep), e.to_string(), &mut failures);
                    continue;
                }
            };
            if basis.dim() == 0 {
                fail(
                    Stage::Solve,
                    Some(keep),
                    "annihilator space is trivial".into(),
                    &mut failures,
                );
                continue;
            }
            let sys = match extract_system(&mc, &basis, &keep) {
                Ok(s) => s,
                Err(e) => {
                    fail(Stage::Extract, Some(keep), e.to_string(), &mut failures);
                    continue;
                }
            };
            if cfg.require_polynomial && !sys.all_polynomial {
                fail(
                    Stage::Extract,
                    Some(keep),
                    "system has rational coefficients (dropped by require_polynomial)".into(),
                    &mut failures,
                );
                continue;
            }
            let report = match verify_system(p, &sys, cfg.verify_order) {
                Ok(r) => r,
                Err(e) => {
                    fail(Stage::Verify, Some(keep), e.to_string(), &mut failures);
                    continue;
                }
            };
            if !report.pass() {
                fail(
                    Stage::Verify,
                    Some(keep),
                    format!("nonzero residuals; first failing q-orders {:?}", report.first_failure),
                    &mut failures,
                );
                continue;
            }
            let (unique, iterations) = match verify_uniqueness(p, &sys, cfg.verify_order) {
                Ok(u) => (true, Some(u.iterations)),
                Err(e) => {
                    fail(Stage::Uniqueness, Some(keep.clone()), e.to_string(), &mut failures);
                    (false, None)
                }
            };
            hits.push(HitRecord {
                schema: SCHEMA_VERSION,
                params: *p,
                bx,
                keep,
                system: sys,
                residual_order: report.order,
                unique,
                fixed_point_iterations: iterations,
                product_hits: scan.clone(),
                timestamp_ms: Some(now_ms()),
            });
        }
    }
    TupleOutcome { params: *p, hits, failures }
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut out = Vec::new();
    if !path.exists() {
        return Ok(out);
    }
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse(e.to_string()))?);
    }
    Ok(out)
}

/// Rebuilds the merged hit file from the append-only stream: timestamps are
/// nulled, records sorted by (parameter tuple, keep-set), and exact
/// (params, keep) duplicates from interrupted runs collapsed. The result is
/// byte-identical across reruns and worker counts.
pub fn merge_hits(paths: &SearchPaths) -> Result<usize> {
    let mut records: Vec<HitRecord> = read_jsonl(&paths.hits)?;
    for r in &mut records {
        r.timestamp_ms = None;
    }
    records.sort_by(|a, b| a.params.cmp(&b.params).then_with(|| a.keep.cmp(&b.keep)));
    records.dedup_by(|a, b| a.params == b.params && a.keep == b.keep);
    let mut w = BufWriter::new(fs::File::create(&paths.merged)?);
    for r in &records {
        serde_json::to_writer(&mut w, r).map_err(|e| Error::Parse(e.to_string()))?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(records.len())
}

/// Sweeps every tuple of `cfg` with a bounded worker pool, appending hits and
/// failures under `dir` and finishing with the deterministic merge. Tuples
/// recorded in the ledger from previous runs are skipped, making interrupted
/// sweeps resumable.
pub fn run_search(cfg: &SearchConfig, dir: &Path) -> Result<SearchSummary> {
    cfg.validate()?;
    fs::create_dir_all(dir)?;
    let paths = SearchPaths::in_dir(dir);

    let done: HashSet<SeriesParams> = read_jsonl(&paths.ledger)?.into_iter().collect();
    let all = cfg.tuples();
    let tuples_total = all.len();
    let mut tasks: Vec<SeriesParams> =
        all.into_iter().filter(|p| !done.contains(p)).collect();
    let tuples_resumed = tuples_total - tasks.len();

    if cfg.pruning == PruningMode::Heuristic {
        // Schedule plausible candidates first; emitted order is fixed later
        // by the merge, so this affects only wall-clock-limited runs.
        tasks.sort_by_key(|p| {
            let infeasible = candidate_box(p, cfg)
                .and_then(|bx| {
                    let (dm1, dm2) = bx.span();
                    Ok(cfg.system_sizes.iter().all(|&d| {
                        !feasible(p, dm1, dm2, d as i64).unwrap_or(false)
                    }))
                })
                .unwrap_or(true);
            (infeasible, *p)
        });
    }

    let mut hits_file = BufWriter::new(fs::OpenOptions::new().create(true).append(true).open(&paths.hits)?);
    let mut failures_file =
        BufWriter::new(fs::OpenOptions::new().create(true).append(true).open(&paths.failures)?);
    let mut ledger_file =
        BufWriter::new(fs::OpenOptions::new().create(true).append(true).open(&paths.ledger)?);

    let workers = cfg.worker_count().min(tasks.len().max(1));
    let next = AtomicUsize::new(0);
    let (tx, rx) = mpsc::channel::<TupleOutcome>();
    let tasks_ref = &tasks;
    let next_ref = &next;

    let mut hits = 0usize;
    let mut failures = 0usize;
    let mut tuples_processed = 0usize;

    thread::scope(|s| -> Result<()> {
        for _ in 0..workers {
            let tx = tx.clone();
            s.spawn(move || loop {
                let i = next_ref.fetch_add(1, Ordering::Relaxed);
                if i >= tasks_ref.len() {
                    break;
                }
                if tx.send(process_tuple(&tasks_ref[i], cfg)).is_err() {
                    break;
                }
            });
        }
        drop(tx);
        for outcome in rx {
            for h in &outcome.hits {
                serde_json::to_writer(&mut hits_file, h)
                    .map_err(|e| Error::Parse(e.to_string()))?;
                hits_file.write_all(b"\n")?;
            }
            for f in &outcome.failures {
                serde_json::to_writer(&mut failures_file, f)
                    .map_err(|e| Error::Parse(e.to_string()))?;
                failures_file.write_all(b"\n")?;
            }
            hits += outcome.hits.len();
            failures += outcome.failures.len();
            // The ledger entry lands only after the records are on disk, so a
            // crash can at worst duplicate a tuple, which the merge collapses.
            hits_file.flush()?;
            failures_file.flush()?;
            serde_json::to_writer(&mut ledger_file, &outcome.params)
                .map_err(|e| Error::Parse(e.to_string()))?;
            ledger_file.write_all(b"\n")?;
            ledger_file.flush()?;
            tuples_processed += 1;
        }
        Ok(())
    })?;

    let merged_hits = merge_hits(&paths)?;
    Ok(SearchSummary {
        tuples_total,
        tuples_resumed,
        tuples_processed,
        hits,
        failures,
        merged_hits,
    })
}

/// Exhaustively tries every size-`d` keep-set containing the seed of `p`
/// inside `bx` and returns the systems that extract, deduplicated up to
/// equation reordering (rows are canonically keyed by the sorted keep-set,
/// so identical systems serialize identically).
pub fn list_all_systems(p: &SeriesParams, bx: &IndexBox, d: usize) -> Vec<ExtractedSystem> {
    let mc = assemble(p, bx);
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for keep in keep_subsets(&bx.pairs(), (p.c1, p.c2), d, usize::MAX) {
        let Ok(basis) = solve_annihilator(&mc, &keep) else { continue };
        if basis.dim() == 0 {
            continue;
        }
        let Ok(sys) = extract_system(&mc, &basis, &keep) else { continue };
        let key = serde_json::to_string(&(&sys.keep, &sys.solved)).expect("serializable");
        if seen.insert(key) {
            out.push(sys);
        }
    }
    out
}
