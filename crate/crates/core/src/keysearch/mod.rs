//! Known-plaintext exhaustive key search.
//!
//! A [`KeyRange`] is split into contiguous, near-equal subranges, one per
//! worker thread. Each worker walks its subrange in ascending order, one
//! engine batch at a time: keys that map the first pair's ciphertext to its
//! plaintext are re-checked against every pair before being reported.
//!
//! Workers share an immutable engine, a stop signal polled once per batch,
//! and a result channel to the coordinator. The coordinator emits progress,
//! writes checkpoints, and assembles the [`SearchReport`] after every worker
//! has stopped.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{mpsc, Arc, Mutex};
use std::time::{Duration, Instant};

use crate::des::{self, Block, Key56, ParseError};
use crate::engines::{Engine, EngineKind};

mod checkpoint;

pub use checkpoint::{Checkpoint, Fingerprint, WorkerRecord};

pub const DEFAULT_PROGRESS_INTERVAL: f64 = 5.0;
pub const DEFAULT_CHECKPOINT_INTERVAL: f64 = 30.0;

#[derive(Debug, thiserror::Error)]
pub enum SearchError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("pairs line {line}: {message}")]
    PairsParse { line: usize, message: String },
    #[error("checkpoint line {line}: {message}")]
    CheckpointParse { line: usize, message: String },
    #[error("checkpoint belongs to a different search (fingerprint {found}, expected {expected})")]
    FingerprintMismatch { expected: String, found: String },
    #[error("checkpoint layout does not match the search range: {0}")]
    CheckpointLayout(String),
}

/// A known (plaintext, ciphertext) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PlainCipherPair {
    pub plaintext: Block,
    pub ciphertext: Block,
}

impl PlainCipherPair {
    pub fn new(plaintext: Block, ciphertext: Block) -> Self {
        PlainCipherPair {
            plaintext,
            ciphertext,
        }
    }

    /// Builds the pair produced by encrypting `plaintext` under `key`.
    pub fn from_key(plaintext: Block, key: Key56) -> Self {
        PlainCipherPair::new(plaintext, des::encrypt_block(plaintext, key))
    }
}

/// Parses the pairs file format: `<plaintext-hex16> <ciphertext-hex16>` per
/// line, `#` starts a comment, blank lines are ignored.
pub fn parse_pairs(text: &str) -> Result<Vec<PlainCipherPair>, SearchError> {
    let mut pairs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |message: String| SearchError::PairsParse {
            line: idx + 1,
            message,
        };
        let fields: Vec<&str> = content.split_whitespace().collect();
        let [p, c] = fields.as_slice() else {
            return Err(err(format!("expected two hex blocks, got {content:?}")));
        };
        let parse = |s: &str| Block::from_hex(s).map_err(|e: ParseError| err(e.to_string()));
        pairs.push(PlainCipherPair::new(parse(p)?, parse(c)?));
    }
    if pairs.is_empty() {
        return Err(SearchError::PairsParse {
            line: 0,
            message: "no pairs found".into(),
        });
    }
    Ok(pairs)
}

pub fn load_pairs(path: &Path) -> Result<Vec<PlainCipherPair>, SearchError> {
    let text = std::fs::read_to_string(path).map_err(|source| SearchError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_pairs(&text)
}

/// Half-open key interval `[start, end)` with `end <= 2^56`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct KeyRange {
    pub start: u64,
    pub end: u64,
}

impl KeyRange {
    pub fn new(start: u64, end: u64) -> Result<Self, SearchError> {
        if start > end || end > Key56::SPACE {
            return Err(SearchError::InvalidArgument(format!(
                "bad key range [{start:#x}, {end:#x})"
            )));
        }
        Ok(KeyRange { start, end })
    }

    pub fn full() -> Self {
        KeyRange {
            start: 0,
            end: Key56::SPACE,
        }
    }

    pub fn count(&self) -> u64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    pub fn contains(&self, key: Key56) -> bool {
        (self.start..self.end).contains(&key.value())
    }
}

impl fmt::Display for KeyRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:014x}, {:014x})", self.start, self.end)
    }
}

/// Splits `range` into `n` ordered, disjoint, contiguous subranges whose
/// sizes differ by at most one (the first `count % n` get the extra key).
pub fn partition(range: KeyRange, n: usize) -> Result<Vec<KeyRange>, SearchError> {
    if n == 0 {
        return Err(SearchError::InvalidArgument(
            "cannot partition into 0 parts".into(),
        ));
    }
    let n64 = n as u64;
    let base = range.count() / n64;
    let extra = range.count() % n64;
    let mut start = range.start;
    Ok((0..n64)
        .map(|i| {
            let len = base + u64::from(i < extra);
            let part = KeyRange {
                start,
                end: start + len,
            };
            start += len;
            part
        })
        .collect())
}

/// True iff `key` decrypts every pair's ciphertext to its plaintext.
pub fn verify_candidate(key: Key56, pairs: &[PlainCipherPair]) -> bool {
    assert!(
        !pairs.is_empty(),
        "verify_candidate needs at least one pair"
    );
    pairs
        .iter()
        .all(|pair| des::decrypt_block(pair.ciphertext, key) == pair.plaintext)
}

/// Polled once per batch; `next` is the first key of the batch about to run.
pub trait StopSignal: Sync {
    fn should_stop(&self, next: u64) -> bool;
}

impl StopSignal for AtomicBool {
    fn should_stop(&self, _next: u64) -> bool {
        self.load(Ordering::Relaxed)
    }
}

/// Receives one call per finished batch.
pub trait ProgressSink: Sync {
    /// `next` is the first untested key, `tested` the batch size and
    /// `verified` the keys of this batch that passed every pair.
    fn batch_done(&self, next: u64, tested: u64, verified: &[Key56]);
}

impl ProgressSink for () {
    fn batch_done(&self, _: u64, _: u64, _: &[Key56]) {}
}

impl ProgressSink for AtomicU64 {
    fn batch_done(&self, _next: u64, tested: u64, _verified: &[Key56]) {
        self.fetch_add(tested, Ordering::Relaxed);
    }
}

/// Tests every key of `range` in ascending order and returns those passing
/// all pairs. Stops early (between batches) once `stop` says so.
pub fn search_range(
    engine: &dyn Engine,
    pairs: &[PlainCipherPair],
    range: KeyRange,
    stop: &dyn StopSignal,
    progress: &dyn ProgressSink,
) -> Vec<Key56> {
    assert!(!pairs.is_empty(), "search_range needs at least one pair");
    let first = pairs[0];
    let batch = engine.batch_size() as u64;
    let mut candidates = Vec::new();
    let mut found = Vec::new();
    let mut next = range.start;
    while next < range.end {
        if stop.should_stop(next) {
            break;
        }
        let end = range.end.min(next + batch);
        candidates.clear();
        engine.scan(
            first.plaintext,
            first.ciphertext,
            next..end,
            &mut candidates,
        );
        candidates.retain(|&k| verify_candidate(k, pairs));
        progress.batch_done(end, end - next, &candidates);
        found.extend_from_slice(&candidates);
        next = end;
    }
    found
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopMode {
    /// Report the smallest matching key and stop as soon as no smaller key
    /// can still turn up.
    FirstMatch,
    /// Test every key and report all matches.
    Exhaustive,
}

#[derive(Debug, Clone)]
pub struct SearchConfig {
    pub pairs: Vec<PlainCipherPair>,
    pub range: KeyRange,
    pub workers: usize,
    pub engine: EngineKind,
    pub stop_mode: StopMode,
    /// Resume from this file if it exists; keep it updated while running.
    pub checkpoint_path: Option<PathBuf>,
    /// Seconds between progress callbacks; 0 disables them.
    pub progress_interval: f64,
    /// Seconds between checkpoint writes.
    pub checkpoint_interval: f64,
}

impl SearchConfig {
    pub fn new(pairs: Vec<PlainCipherPair>, range: KeyRange) -> Self {
        SearchConfig {
            pairs,
            range,
            workers: 1,
            engine: EngineKind::Bitsliced,
            stop_mode: StopMode::Exhaustive,
            checkpoint_path: None,
            progress_interval: DEFAULT_PROGRESS_INTERVAL,
            checkpoint_interval: DEFAULT_CHECKPOINT_INTERVAL,
        }
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let invalid = |m: &str| Err(SearchError::InvalidArgument(m.to_string()));
        if self.pairs.is_empty() {
            return invalid("at least one plaintext/ciphertext pair is required");
        }
        if self.workers == 0 {
            return invalid("workers must be at least 1");
        }
        if !(self.progress_interval >= 0.0 && self.progress_interval.is_finite()) {
            return invalid("progress interval must be a non-negative number of seconds");
        }
        if !(self.checkpoint_interval > 0.0 && self.checkpoint_interval.is_finite()) {
            return invalid("checkpoint interval must be positive");
        }
        KeyRange::new(self.range.start, self.range.end).map(|_| ())
    }

    pub fn fingerprint(&self) -> Fingerprint {
        Fingerprint::of(&self.pairs, self.range, self.engine)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchReport {
    /// Ascending, without duplicates.
    pub matches: Vec<Key56>,
    /// Keys tested over the whole search, including earlier sessions.
    pub keys_tested: u64,
    /// Seconds spent in this session.
    pub elapsed: f64,
    pub exhausted: bool,
    /// Keys tested in this session per second.
    pub keys_per_second: f64,
}

/// Snapshot handed to the progress callback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Progress {
    pub keys_tested: u64,
    pub total: u64,
    pub keys_per_second: f64,
    pub elapsed: f64,
}

impl Progress {
    pub fn fraction(&self) -> f64 {
        if self.total == 0 {
            1.0
        } else {
            self.keys_tested as f64 / self.total as f64
        }
    }

    /// Seconds until the remaining keys are tested at the current rate.
    pub fn eta(&self) -> f64 {
        let remaining = (self.total - self.keys_tested) as f64;
        if remaining == 0.0 {
            0.0
        } else if self.keys_per_second > 0.0 {
            remaining / self.keys_per_second
        } else {
            f64::INFINITY
        }
    }
}

impl fmt::Display for Progress {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "keys={} rate={:.0} done={:.2}% eta={:.0}",
            self.keys_tested,
            self.keys_per_second,
            100.0 * self.fraction(),
            self.eta()
        )
    }
}

/// Set-once cancellation shared with a running [`crack_with`].
#[derive(Debug, Clone, Default)]
pub struct CancelToken(Arc<AtomicBool>);

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn cancel(&self) {
        self.0.store(true, Ordering::Relaxed);
    }

    pub fn is_cancelled(&self) -> bool {
        self.0.load(Ordering::Relaxed)
    }
}

/// Stop rule for one worker: external cancellation, or (first-match mode) a
/// verified key at or below this worker's next untested key.
struct WorkerStop<'a> {
    cancel: &'a CancelToken,
    best: Option<&'a AtomicU64>,
}

impl StopSignal for WorkerStop<'_> {
    fn should_stop(&self, next: u64) -> bool {
        self.cancel.is_cancelled() || self.best.is_some_and(|b| b.load(Ordering::Relaxed) <= next)
    }
}

/// Per-worker published state, updated after every batch.
struct WorkerSlot<'a> {
    record: Mutex<(WorkerRecord, Vec<Key56>)>,
    session_tested: &'a AtomicU64,
    best: Option<&'a AtomicU64>,
}

impl ProgressSink for WorkerSlot<'_> {
    fn batch_done(&self, next: u64, tested: u64, verified: &[Key56]) {
        {
            let mut guard = self.record.lock().unwrap();
            guard.0.next = next;
            guard.1.extend_from_slice(verified);
        }
        self.session_tested.fetch_add(tested, Ordering::Relaxed);
        if let (Some(best), Some(first)) = (self.best, verified.first()) {
            best.fetch_min(first.value(), Ordering::Relaxed);
        }
    }
}

fn snapshot(fingerprint: Fingerprint, prior: &[Key56], slots: &[WorkerSlot<'_>]) -> Checkpoint {
    let mut matches = prior.to_vec();
    let workers = slots
        .iter()
        .map(|slot| {
            let guard = slot.record.lock().unwrap();
            matches.extend_from_slice(&guard.1);
            guard.0
        })
        .collect();
    matches.sort_unstable();
    matches.dedup();
    Checkpoint {
        fingerprint,
        workers,
        matches,
    }
}

/// Runs the search to completion. See [`crack_with`].
pub fn crack(config: &SearchConfig) -> Result<SearchReport, SearchError> {
    crack_with(config, &CancelToken::new(), |_| {})
}

/// Runs the search described by `config` on `config.workers` threads.
///
/// If `config.checkpoint_path` names an existing file, the search resumes
/// from it (its worker layout replaces `config.workers`) and is refused when
/// the file's fingerprint does not match `config`. Cancelling `cancel` stops
/// every worker after its current batch; the report then covers what was
/// tested and a final checkpoint is written.
pub fn crack_with(
    config: &SearchConfig,
    cancel: &CancelToken,
    mut on_progress: impl FnMut(&Progress),
) -> Result<SearchReport, SearchError> {
    config.validate()?;
    let fingerprint = config.fingerprint();
    let resumed = match &config.checkpoint_path {
        Some(path) if path.exists() => Some(Checkpoint::load_for(path, fingerprint, config.range)?),
        _ => None,
    };
    let (records, prior) = match resumed {
        Some(cp) => (cp.workers, cp.matches),
        None => (
            partition(config.range, config.workers)?
                .into_iter()
                .map(WorkerRecord::fresh)
                .collect(),
            Vec::new(),
        ),
    };
    let previously_tested: u64 = records.iter().map(WorkerRecord::tested).sum();

    let first_match = config.stop_mode == StopMode::FirstMatch;
    let best = AtomicU64::new(prior.first().map_or(u64::MAX, |k| k.value()));
    let best_ref = first_match.then_some(&best);
    let session_tested = AtomicU64::new(0);
    let slots: Vec<WorkerSlot<'_>> = records
        .iter()
        .map(|&r| WorkerSlot {
            record: Mutex::new((r, Vec::new())),
            session_tested: &session_tested,
            best: best_ref,
        })
        .collect();

    let engine = config.engine.build();
    let started = Instant::now();
    let progress_every =
        (config.progress_interval > 0.0).then(|| Duration::from_secs_f64(config.progress_interval));
    let checkpoint_every = Duration::from_secs_f64(config.checkpoint_interval);
    let tick = progress_every
        .map_or(checkpoint_every, |p| p.min(checkpoint_every))
        .min(Duration::from_millis(250));

    let progress_now = || {
        let session = session_tested.load(Ordering::Relaxed);
        let elapsed = started.elapsed().as_secs_f64();
        Progress {
            keys_tested: previously_tested + session,
            total: config.range.count(),
            keys_per_second: if elapsed > 0.0 {
                session as f64 / elapsed
            } else {
                0.0
            },
            elapsed,
        }
    };

    let mut checkpoint_error = None;
    std::thread::scope(|scope| {
        let (done_tx, done_rx) = mpsc::channel::<usize>();
        for (id, (slot, record)) in slots.iter().zip(&records).enumerate() {
            let done_tx = done_tx.clone();
            let engine = Arc::clone(&engine);
            let pairs = &config.pairs;
            scope.spawn(move || {
                let stop = WorkerStop {
                    cancel,
                    best: best_ref,
                };
                search_range(engine.as_ref(), pairs, record.remaining(), &stop, slot);
                let _ = done_tx.send(id);
            });
        }
        drop(done_tx);

        let mut running = records.len();
        let mut last_progress = Instant::now();
        let mut last_checkpoint = Instant::now();
        while running > 0 {
            match done_rx.recv_timeout(tick) {
                Ok(_) => running -= 1,
                Err(mpsc::RecvTimeoutError::Timeout) => {}
                Err(mpsc::RecvTimeoutError::Disconnected) => break,
            }
            if let Some(every) = progress_every {
                if last_progress.elapsed() >= every {
                    on_progress(&progress_now());
                    last_progress = Instant::now();
                }
            }
            if let Some(path) = &config.checkpoint_path {
                if last_checkpoint.elapsed() >= checkpoint_every {
                    if let Err(e) = snapshot(fingerprint, &prior, &slots).save(path) {
                        checkpoint_error = Some(e);
                        cancel.cancel();
                    }
                    last_checkpoint = Instant::now();
                }
            }
        }
    });
    if let Some(e) = checkpoint_error {
        return Err(e);
    }

    let elapsed = started.elapsed().as_secs_f64();
    let final_state = snapshot(fingerprint, &prior, &slots);
    if let Some(path) = &config.checkpoint_path {
        final_state.save(path)?;
    }
    if progress_every.is_some() {
        on_progress(&progress_now());
    }

    let keys_tested = final_state.keys_tested();
    let mut matches = final_state.matches;
    if first_match {
        matches.truncate(1);
    }
    let session = session_tested.load(Ordering::Relaxed);
    Ok(SearchReport {
        matches,
        keys_tested,
        elapsed,
        exhausted: keys_tested == config.range.count(),
        keys_per_second: if elapsed > 0.0 {
            session as f64 / elapsed
        } else {
            0.0
        },
    })
}
