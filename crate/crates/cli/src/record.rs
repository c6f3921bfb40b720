//! Run records: what was run, with which parameters, and a checksummed payload.

use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub command: String,
    pub parameters: Value,
    pub version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
    pub payload: Value,
    /// SHA-256 of the compact JSON encoding of `payload`, hex encoded.
    pub checksum: String,
}

pub fn checksum(payload: &Value) -> String {
    let bytes = serde_json::to_vec(payload).expect("JSON values serialize");
    hex::encode(Sha256::digest(bytes))
}

impl RunRecord {
    pub fn new(command: &str, parameters: Value, payload: Value) -> Self {
        let timestamp = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunRecord {
            command: command.to_string(),
            parameters,
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp,
            checksum: checksum(&payload),
            payload,
        }
    }

    pub fn checksum_matches(&self) -> bool {
        checksum(&self.payload) == self.checksum
    }
}
