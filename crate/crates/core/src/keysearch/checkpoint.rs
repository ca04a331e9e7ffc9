//! Resumable search state.
//!
//! Text format, one record per line:
//!
//! ```text
//! fingerprint <64 hex digits>
//! range <start> <end> next <next>
//! match <key>
//! ```
//!
//! Keys are 14 hex digits; the exclusive bound 2^56 is written as
//! `100000000000000`. There is one `range` line per worker and one `match`
//! line per verified key found so far.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::des::Key56;
use crate::engines::EngineKind;

use super::{KeyRange, PlainCipherPair, SearchError};

/// SHA-256 over the pairs, range and engine that produced a checkpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fingerprint(pub [u8; 32]);

impl Fingerprint {
    pub fn of(pairs: &[PlainCipherPair], range: KeyRange, engine: EngineKind) -> Self {
        let mut hasher = Sha256::new();
        for pair in pairs {
            hasher.update(format!("pair {} {}\n", pair.plaintext, pair.ciphertext));
        }
        hasher.update(format!("range {:x} {:x}\n", range.start, range.end));
        hasher.update(format!("engine {engine}\n"));
        Fingerprint(hasher.finalize().into())
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&hex::encode(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WorkerRecord {
    pub range: KeyRange,
    /// First key not yet tested; `range.end` once the worker is done.
    pub next: u64,
}

impl WorkerRecord {
    pub fn fresh(range: KeyRange) -> Self {
        WorkerRecord {
            range,
            next: range.start,
        }
    }

    pub fn tested(&self) -> u64 {
        self.next - self.range.start
    }

    pub fn remaining(&self) -> KeyRange {
        KeyRange {
            start: self.next,
            end: self.range.end,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Checkpoint {
    pub fingerprint: Fingerprint,
    pub workers: Vec<WorkerRecord>,
    /// Verified keys found in the already tested part of the range.
    pub matches: Vec<Key56>,
}

fn format_bound(value: u64) -> String {
    format!("{value:014x}")
}

fn parse_bound(text: &str, line: usize) -> Result<u64, SearchError> {
    let bad = |message: String| SearchError::CheckpointParse { line, message };
    if text.len() != 14 && text != "100000000000000" {
        return Err(bad(format!("expected 14 hex digits, got {text:?}")));
    }
    u64::from_str_radix(text, 16).map_err(|_| bad(format!("invalid hex {text:?}")))
}

impl Checkpoint {
    pub fn to_text(&self) -> String {
        let mut out = format!("fingerprint {}\n", self.fingerprint);
        for w in &self.workers {
            out.push_str(&format!(
                "range {} {} next {}\n",
                format_bound(w.range.start),
                format_bound(w.range.end),
                format_bound(w.next)
            ));
        }
        for k in &self.matches {
            out.push_str(&format!("match {k}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, SearchError> {
        let mut fingerprint = None;
        let mut workers = Vec::new();
        let mut matches = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let bad = |message: &str| SearchError::CheckpointParse {
                line,
                message: message.to_string(),
            };
            let fields: Vec<&str> = raw.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                ["fingerprint", digest] if line == 1 => {
                    let bytes = hex::decode(digest).map_err(|_| bad("fingerprint is not hex"))?;
                    let bytes: [u8; 32] = bytes
                        .try_into()
                        .map_err(|_| bad("fingerprint must be 32 bytes"))?;
                    fingerprint = Some(Fingerprint(bytes));
                }
                ["range", start, end, "next", next] => {
                    let range = KeyRange::new(parse_bound(start, line)?, parse_bound(end, line)?)
                        .map_err(|e| bad(&e.to_string()))?;
                    let next = parse_bound(next, line)?;
                    if !(range.start..=range.end).contains(&next) {
                        return Err(bad("next key outside its range"));
                    }
                    workers.push(WorkerRecord { range, next });
                }
                ["match", key] => {
                    matches.push(Key56::from_hex(key).map_err(|e| bad(&e.to_string()))?);
                }
                _ => return Err(bad(&format!("unrecognised line {raw:?}"))),
            }
        }
        let fingerprint = fingerprint.ok_or(SearchError::CheckpointParse {
            line: 1,
            message: "missing fingerprint line".into(),
        })?;
        if workers.is_empty() {
            return Err(SearchError::CheckpointParse {
                line: text.lines().count(),
                message: "no range records".into(),
            });
        }
        matches.sort_unstable();
        matches.dedup();
        Ok(Checkpoint {
            fingerprint,
            workers,
            matches,
        })
    }

    /// Writes to a sibling temporary file, syncs it, then renames over `path`.
    pub fn save(&self, path: &Path) -> Result<(), SearchError> {
        let io_err = |source| SearchError::Io {
            path: path.to_path_buf(),
            source,
        };
        let tmp = temp_path(path);
        let mut file = fs::File::create(&tmp).map_err(io_err)?;
        file.write_all(self.to_text().as_bytes()).map_err(io_err)?;
        file.sync_all().map_err(io_err)?;
        drop(file);
        fs::rename(&tmp, path).map_err(io_err)
    }

    pub fn load(path: &Path) -> Result<Self, SearchError> {
        let text = fs::read_to_string(path).map_err(|source| SearchError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Checkpoint::parse(&text)
    }

    /// Loads `path` and checks that it belongs to the search described by
    /// `expected` and `range`.
    pub fn load_for(
        path: &Path,
        expected: Fingerprint,
        range: KeyRange,
    ) -> Result<Self, SearchError> {
        let checkpoint = Checkpoint::load(path)?;
        if checkpoint.fingerprint != expected {
            return Err(SearchError::FingerprintMismatch {
                expected: expected.to_string(),
                found: checkpoint.fingerprint.to_string(),
            });
        }
        checkpoint.check_cover(range)?;
        Ok(checkpoint)
    }

    /// Worker ranges must tile `range` in order.
    fn check_cover(&self, range: KeyRange) -> Result<(), SearchError> {
        let mut cursor = range.start;
        for w in &self.workers {
            if w.range.start != cursor {
                return Err(SearchError::CheckpointLayout(format!(
                    "worker range {} does not start at {cursor:014x}",
                    w.range
                )));
            }
            cursor = w.range.end;
        }
        if cursor != range.end {
            return Err(SearchError::CheckpointLayout(format!(
                "worker ranges end at {cursor:014x}, search ends at {:014x}",
                range.end
            )));
        }
        Ok(())
    }

    pub fn keys_tested(&self) -> u64 {
        self.workers.iter().map(WorkerRecord::tested).sum()
    }
}

fn temp_path(path: &Path) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_default();
    name.push(".tmp");
    path.with_file_name(name)
}
