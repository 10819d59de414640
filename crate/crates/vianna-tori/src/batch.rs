//! Batch front end shared by the `vianna-tori` binary and integration
//! tests: tree dumps, potential/polytope serialization, verification sweeps
//! with a worker pool, pairwise distinguishing, and an integrity-hashed
//! on-disk potential cache.

use std::collections::VecDeque;
use std::fmt;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::lattice::newton_polytope;
use crate::markov::{enumerate_tree, mutate_triple, MarkovError, MarkovNode, MarkovTriple};
use crate::potentials::{PotentialCache, PotentialError, PotentialRecord};
use crate::render::{render_triple, RenderError};
use crate::verify::{
    distinguish_with, verify_theorem_with, wall_crossing_check_with, DistinguishMatrix,
    VerificationReport, VerifyError, WallCrossingReport,
};

/// Environment variable overriding the output directory.
pub const OUT_DIR_ENV: &str = "VIANNA_TORI_OUT";

#[derive(Debug)]
pub enum BatchError {
    Io(io::Error),
    /// A cached file failed its integrity hash.
    Integrity { path: PathBuf },
    InvalidArgument(String),
    Markov(MarkovError),
    Potential(PotentialError),
    Verify(VerifyError),
    Render(RenderError),
    Json(serde_json::Error),
}

impl fmt::Display for BatchError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BatchError::Io(e) => write!(f, "io error: {e}"),
            BatchError::Integrity { path } => {
                write!(f, "integrity check failed for cache file {}", path.display())
            }
            BatchError::InvalidArgument(a) => write!(f, "invalid argument: {a}"),
            BatchError::Markov(e) => write!(f, "{e}"),
            BatchError::Potential(e) => write!(f, "{e}"),
            BatchError::Verify(e) => write!(f, "{e}"),
            BatchError::Render(e) => write!(f, "{e}"),
            BatchError::Json(e) => write!(f, "json error: {e}"),
        }
    }
}

impl std::error::Error for BatchError {}

impl From<io::Error> for BatchError {
    fn from(e: io::Error) -> Self {
        BatchError::Io(e)
    }
}

impl From<MarkovError> for BatchError {
    fn from(e: MarkovError) -> Self {
        BatchError::Markov(e)
    }
}

impl From<PotentialError> for BatchError {
    fn from(e: PotentialError) -> Self {
        BatchError::Potential(e)
    }
}

impl From<VerifyError> for BatchError {
    fn from(e: VerifyError) -> Self {
        BatchError::Verify(e)
    }
}

impl From<RenderError> for BatchError {
    fn from(e: RenderError) -> Self {
        BatchError::Render(e)
    }
}

impl From<serde_json::Error> for BatchError {
    fn from(e: serde_json::Error) -> Self {
        BatchError::Json(e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Table,
}

/// Resolved configuration of one batch invocation.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub max_entry: BigInt,
    pub dims: Vec<usize>,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), BatchError> {
        if self.max_entry < BigInt::one() {
            return Err(BatchError::InvalidArgument(
                "--max must be at least 1".into(),
            ));
        }
        if self.dims.is_empty() || self.dims.iter().any(|&n| n < 2) {
            return Err(BatchError::InvalidArgument(
                "--dims needs at least one value, all >= 2".into(),
            ));
        }
        if self.workers == 0 {
            return Err(BatchError::InvalidArgument("--workers must be positive".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Worker pool.
// ---------------------------------------------------------------------------

/// Run `f` over `jobs` on `workers` threads, preserving job order in the
/// results.
pub fn parallel_map<T, R, F>(jobs: Vec<T>, workers: usize, f: F) -> Vec<R>
where
    T: Send,
    R: Send,
    F: Fn(T) -> R + Sync,
{
    let queue: Mutex<VecDeque<(usize, T)>> = Mutex::new(jobs.into_iter().enumerate().collect());
    let total = queue.lock().unwrap().len();
    let results: Mutex<Vec<Option<R>>> = Mutex::new((0..total).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.max(1) {
            scope.spawn(|| loop {
                let job = queue.lock().unwrap().pop_front();
                match job {
                    Some((idx, job)) => {
                        let r = f(job);
                        results.lock().unwrap()[idx] = Some(r);
                    }
                    None => break,
                }
            });
        }
    });
    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("worker filled every slot"))
        .collect()
}

// ---------------------------------------------------------------------------
// On-disk potential cache with integrity hashes.
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CacheFile {
    sha256: String,
    record: PotentialRecord,
}

fn record_digest(record: &PotentialRecord) -> Result<String, BatchError> {
    let canonical = serde_json::to_string(record)?;
    let mut hasher = Sha256::new();
    hasher.update(canonical.as_bytes());
    Ok(format!("{:x}", hasher.finalize()))
}

fn cache_path(dir: &Path, t: &MarkovTriple, n: usize) -> PathBuf {
    let sorted = t.sorted();
    let e = sorted.entries();
    dir.join("cache")
        .join(format!("potential_{}_{}_{}_n{}.json", e[0], e[1], e[2], n))
}

/// Load a record from the disk cache; `Err(Integrity)` on hash mismatch.
pub fn load_cached(dir: &Path, t: &MarkovTriple, n: usize) -> Result<Option<PotentialRecord>, BatchError> {
    let path = cache_path(dir, t, n);
    let text = match fs::read_to_string(&path) {
        Ok(t) => t,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let file: CacheFile = serde_json::from_str(&text).map_err(|_| BatchError::Integrity {
        path: path.clone(),
    })?;
    if record_digest(&file.record)? != file.sha256 {
        return Err(BatchError::Integrity { path });
    }
    Ok(Some(file.record))
}

/// Write a record to the disk cache.
pub fn store_cached(dir: &Path, record: &PotentialRecord) -> Result<(), BatchError> {
    let path = cache_path(dir, &record.triple, record.dim);
    fs::create_dir_all(path.parent().expect("cache path has a parent"))?;
    let file = CacheFile {
        sha256: record_digest(record)?,
        record: record.clone(),
    };
    fs::write(&path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

/// Warm the in-memory cache from disk (verifying hashes) and persist any
/// newly computed record afterwards.
fn build_with_disk(
    cache: &PotentialCache,
    dir: Option<&Path>,
    t: &MarkovTriple,
    n: usize,
) -> Result<Arc<PotentialRecord>, BatchError> {
    if let Some(dir) = dir {
        if let Some(record) = load_cached(dir, t, n)? {
            let arc = Arc::new(record);
            cache.insert(arc.clone());
            return Ok(arc);
        }
    }
    let record = cache.get_or_build(t, n)?;
    if let Some(dir) = dir {
        store_cached(dir, &record)?;
    }
    Ok(record)
}

// ---------------------------------------------------------------------------
// Commands.
// ---------------------------------------------------------------------------

/// All tree nodes with maximum entry at most `max`, JSON-encoded.
pub fn tree_nodes(max: &BigInt) -> Result<Vec<MarkovNode>, BatchError> {
    if max < &BigInt::one() {
        return Err(BatchError::InvalidArgument("--max must be at least 1".into()));
    }
    Ok(enumerate_tree(max))
}

pub fn tree_table(nodes: &[MarkovNode]) -> String {
    let mut out = String::new();
    out.push_str("triple                 path\n");
    for node in nodes {
        let path: Vec<String> = node.path.iter().map(u8::to_string).collect();
        out.push_str(&format!(
            "{:<22} [{}]\n",
            node.triple.sorted().to_string(),
            path.join(",")
        ));
    }
    out
}

/// Construct (or load) the record for one triple.
pub fn potential_record(
    t: &MarkovTriple,
    n: usize,
    out: Option<&Path>,
) -> Result<PotentialRecord, BatchError> {
    let cache = PotentialCache::new();
    let record = build_with_disk(&cache, out, t, n)?;
    Ok((*record).clone())
}

/// The Newton polytope of one record, JSON-ready.
pub fn newton_json(t: &MarkovTriple, n: usize, out: Option<&Path>) -> Result<String, BatchError> {
    let record = potential_record(t, n, out)?;
    let polytope = newton_polytope(&record.poly).map_err(VerifyError::from)?;
    Ok(serde_json::to_string_pretty(&polytope)? + "\n")
}

/// Summary of one verification sweep.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifySummary {
    pub reports: Vec<VerificationReport>,
    pub wall_crossings: Vec<WallCrossingReport>,
    pub failures: usize,
}

impl VerifySummary {
    pub fn all_pass(&self) -> bool {
        self.failures == 0
    }
}

/// Verify every triple with maximum entry at most `cfg.max_entry` at every
/// requested dimension, plus the wall-crossing identity along every tree
/// edge. Results are aggregated deterministically by (sorted triple, dim).
pub fn run_verify(cfg: &RunConfig) -> Result<VerifySummary, BatchError> {
    cfg.validate()?;
    let nodes = enumerate_tree(&cfg.max_entry);
    let cache = PotentialCache::new();
    // Warm the shared cache sequentially from disk if requested, so workers
    // only compute what is missing.
    if let Some(dir) = cfg.out.as_deref() {
        for node in &nodes {
            for &n in &cfg.dims {
                if let Some(record) = load_cached(dir, &node.triple, n)? {
                    cache.insert(Arc::new(record));
                }
            }
        }
    }
    let mut jobs: Vec<(MarkovTriple, usize)> = Vec::new();
    for node in &nodes {
        for &n in &cfg.dims {
            jobs.push((node.triple.clone(), n));
        }
    }
    let report_results = parallel_map(jobs, cfg.workers, |(t, n)| {
        verify_theorem_with(&cache, &t, n)
    });
    let mut reports = Vec::with_capacity(report_results.len());
    for r in report_results {
        reports.push(r?);
    }
    reports.sort_by(|a, b| {
        (a.triple.entries(), a.dim).cmp(&(b.triple.entries(), b.dim))
    });

    // Tree edges: every non-root node against its parent.
    let mut edge_jobs: Vec<(MarkovTriple, MarkovTriple, usize)> = Vec::new();
    for node in &nodes {
        if node.path.is_empty() {
            continue;
        }
        let parent = {
            let mut t = MarkovTriple::root();
            for &k in &node.path[..node.path.len() - 1] {
                t = mutate_triple(&t, k as usize);
            }
            t
        };
        for &n in &cfg.dims {
            edge_jobs.push((parent.clone(), node.triple.clone(), n));
        }
    }
    let wall_results = parallel_map(edge_jobs, cfg.workers, |(p, c, n)| {
        wall_crossing_check_with(&cache, &p, &c, n)
    });
    let mut wall_crossings = Vec::with_capacity(wall_results.len());
    let mut failures = 0usize;
    for r in wall_results {
        match r {
            Ok(w) => wall_crossings.push(w),
            Err(VerifyError::IdentityFailed { .. }) => failures += 1,
            Err(e) => return Err(e.into()),
        }
    }
    wall_crossings.sort_by(|a, b| {
        (a.child.entries(), a.dim).cmp(&(b.child.entries(), b.dim))
    });
    failures += reports.iter().filter(|r| !r.pass()).count();

    if let Some(dir) = cfg.out.as_deref() {
        for node in &nodes {
            for &n in &cfg.dims {
                let record = cache.get_or_build(&node.triple, n)?;
                store_cached(dir, &record)?;
            }
        }
    }
    Ok(VerifySummary {
        reports,
        wall_crossings,
        failures,
    })
}

pub fn verify_table(summary: &VerifySummary) -> String {
    let mut out = String::new();
    out.push_str("triple                 dim  result  ms      clauses\n");
    for r in &summary.reports {
        let failing: Vec<&str> = r
            .clauses
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        out.push_str(&format!(
            "{:<22} {:<4} {:<7} {:<7} {}\n",
            r.triple.to_string(),
            r.dim,
            if r.pass() { "pass" } else { "FAIL" },
            r.elapsed_ms,
            if failing.is_empty() {
                format!("all {} pass", r.clauses.len())
            } else {
                format!("failing: {}", failing.join(","))
            }
        ));
    }
    out.push_str(&format!(
        "wall-crossing identities verified: {}\n",
        summary.wall_crossings.len()
    ));
    out.push_str(&format!(
        "overall: {}\n",
        if summary.all_pass() { "pass" } else { "FAIL" }
    ));
    out
}

/// Pairwise distinguishing over the same triple range at one dimension.
pub fn run_distinguish(cfg: &RunConfig, dim: usize) -> Result<DistinguishMatrix, BatchError> {
    if cfg.max_entry < BigInt::one() {
        return Err(BatchError::InvalidArgument("--max must be at least 1".into()));
    }
    let nodes = enumerate_tree(&cfg.max_entry);
    let triples: Vec<MarkovTriple> = nodes.iter().map(|n| n.triple.sorted()).collect();
    let cache = PotentialCache::new();
    // Build all records in parallel first; the pairwise scan is cheap.
    let build = parallel_map(triples.clone(), cfg.workers, |t| {
        cache.get_or_build(&t, dim).map(|_| ())
    });
    for r in build {
        r?;
    }
    Ok(distinguish_with(&cache, &triples, dim)?)
}

pub fn distinguish_table(matrix: &DistinguishMatrix) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "pairwise verdicts for {} triples at dimension {}\n",
        matrix.triples.len(),
        matrix.dim
    ));
    for i in 0..matrix.triples.len() {
        for j in i + 1..matrix.triples.len() {
            let verdict = match matrix.verdict(i, j) {
                crate::verify::PairVerdict::Equivalent { .. } => "equivalent".to_string(),
                crate::verify::PairVerdict::DistinctByEdgeLengths { left, right } => format!(
                    "distinct (edge lengths {:?} vs {:?})",
                    left, right
                ),
                crate::verify::PairVerdict::DistinctByExhaustion => {
                    "distinct (exhaustive search)".to_string()
                }
            };
            out.push_str(&format!(
                "{} vs {}: {}\n",
                matrix.triples[i], matrix.triples[j], verdict
            ));
        }
    }
    out.push_str(&format!(
        "certified: {}\n",
        matrix.all_distinct_pairs_certified()
    ));
    out
}

/// Render one figure.
pub fn run_render(t: &MarkovTriple, n: usize) -> Result<String, BatchError> {
    Ok(render_triple(t, n)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(a: u64, b: u64, c: u64) -> MarkovTriple {
        MarkovTriple::from_u64(a, b, c).unwrap()
    }

    #[test]
    fn parallel_map_preserves_order() {
        let jobs: Vec<usize> = (0..100).collect();
        let out = parallel_map(jobs, 7, |x| x * x);
        assert_eq!(out, (0..100).map(|x| x * x).collect::<Vec<_>>());
    }

    #[test]
    fn verify_sweep_small_range() {
        let cfg = RunConfig {
            max_entry: BigInt::from(5),
            dims: vec![2, 3],
            out: None,
            workers: 2,
            format: OutputFormat::Table,
        };
        let summary = run_verify(&cfg).unwrap();
        assert!(summary.all_pass());
        // Triples (1,1,1), (1,1,2), (1,2,5) at two dimensions each.
        assert_eq!(summary.reports.len(), 6);
        // Two tree edges at two dimensions each.
        assert_eq!(summary.wall_crossings.len(), 4);
    }

    #[test]
    fn disk_cache_round_trip_and_corruption() {
        let dir = std::env::temp_dir().join(format!("vianna-batch-{}", std::process::id()));
        let _ = fs::remove_dir_all(&dir);
        let record = potential_record(&triple(1, 1, 2), 3, Some(&dir)).unwrap();
        let loaded = load_cached(&dir, &triple(1, 1, 2), 3).unwrap().unwrap();
        assert_eq!(loaded, record);

        // Flip a byte: integrity failure.
        let path = cache_path(&dir, &triple(1, 1, 2), 3);
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, text.replace("\"dim\": 3", "\"dim\": 4")).unwrap();
        assert!(matches!(
            load_cached(&dir, &triple(1, 1, 2), 3),
            Err(BatchError::Integrity { .. })
        ));
        let _ = fs::remove_dir_all(&dir);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let cfg = RunConfig {
            max_entry: BigInt::from(0),
            dims: vec![2],
            out: None,
            workers: 1,
            format: OutputFormat::Json,
        };
        assert!(matches!(
            run_verify(&cfg),
            Err(BatchError::InvalidArgument(_))
        ));
    }
}
