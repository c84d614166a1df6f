//! Verification reporting: named checks with values, references, gaps, and
//! a deterministic content hash used for reproducibility tests.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// One named check: a computed value against a reference, with the absolute
/// gap and the tolerance it was judged at. `method` records how the
/// reference was obtained (e.g. "closed-form", "monte-carlo", "stieltjes").
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportEntry {
    pub name: String,
    pub value: f64,
    pub reference: f64,
    pub gap: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub method: String,
}

impl ReportEntry {
    /// Build an entry from a value/reference pair; `pass` is `gap <= tolerance`.
    pub fn compare(
        name: impl Into<String>,
        value: f64,
        reference: f64,
        tolerance: f64,
        method: impl Into<String>,
    ) -> Self {
        let gap = (value - reference).abs();
        ReportEntry {
            name: name.into(),
            value,
            reference,
            gap,
            tolerance,
            pass: gap.is_finite() && gap <= tolerance,
            method: method.into(),
        }
    }

    /// Build an entry that records a raw statistic judged by a predicate
    /// already evaluated by the caller (e.g. a trend check).
    pub fn observed(
        name: impl Into<String>,
        value: f64,
        tolerance: f64,
        pass: bool,
        method: impl Into<String>,
    ) -> Self {
        ReportEntry {
            name: name.into(),
            value,
            reference: f64::NAN,
            gap: f64::NAN,
            tolerance,
            pass,
            method: method.into(),
        }
    }
}

/// A suite run: configuration identity plus the list of checks.
///
/// `started_unix_ms` is wall-clock metadata and deliberately excluded from
/// [`VerificationReport::content_hash`], which must be identical across
/// reruns and worker counts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub seed: u64,
    pub config_hash: String,
    pub entries: Vec<ReportEntry>,
    pub started_unix_ms: u128,
}

impl VerificationReport {
    pub fn new(suite: impl Into<String>, seed: u64, config_hash: impl Into<String>) -> Self {
        VerificationReport {
            suite: suite.into(),
            seed,
            config_hash: config_hash.into(),
            entries: Vec::new(),
            started_unix_ms: std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .map(|d| d.as_millis())
                .unwrap_or(0),
        }
    }

    pub fn push(&mut self, entry: ReportEntry) {
        self.entries.push(entry);
    }

    pub fn all_passed(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    /// SHA-256 over the canonical JSON of (suite, seed, config hash, entries).
    /// Timestamps are excluded so identical runs hash identically.
    pub fn content_hash(&self) -> String {
        #[derive(Serialize)]
        struct Canonical<'a> {
            suite: &'a str,
            seed: u64,
            config_hash: &'a str,
            entries: &'a [ReportEntry],
        }
        let canon = Canonical {
            suite: &self.suite,
            seed: self.seed,
            config_hash: &self.config_hash,
            entries: &self.entries,
        };
        let json = serde_json::to_string(&canon).expect("report serialization cannot fail");
        let mut h = Sha256::new();
        h.update(json.as_bytes());
        hex_string(&h.finalize())
    }
}

/// SHA-256 of an arbitrary string (used for config identity).
pub fn sha256_hex(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    hex_string(&h.finalize())
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
