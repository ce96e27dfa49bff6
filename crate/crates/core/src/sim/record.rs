use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Hex SHA-256 of a symbol sequence, each symbol as a little-endian `u32`.
pub fn sequence_digest(seq: &[usize]) -> String {
    let mut h = Sha256::new();
    for &s in seq {
        h.update((s as u32).to_le_bytes());
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

/// Compact trace of one simulated transmission, enough to regenerate and
/// re-decode it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub stream: u64,
    pub m: usize,
    /// Tag candidate, or the prefix decision `g` for codes.
    pub m_hat: usize,
    /// `ACCEPT`/`REJECT` for tags; a message index or `REJECT` for codes.
    pub output: String,
    pub x_digest: String,
    pub z_digest: String,
    pub s_digest: String,
    pub y_digest: String,
    /// Whether the trial counted as an error event.
    pub outcome: bool,
}

/// Keep a record for every hundredth trial.
pub(crate) fn spot_checked(trial: usize) -> bool {
    trial % 100 == 0
}
