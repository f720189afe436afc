//! Run manifest: a JSON sidecar identifying a run by a digest over its
//! inputs (tool version, command, seed, config, command parameters). Two
//! runs with equal digests must produce byte-identical data files, which is
//! why output files never embed timestamps; the manifest's creation time
//! sits outside the digested material.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use udnsim::config::NetworkConfig;
use udnsim::{Error, Result};

#[derive(Serialize)]
struct DigestedInputs<'a> {
    tool_version: &'a str,
    command: &'a str,
    seed: u64,
    config: &'a NetworkConfig,
    params: &'a BTreeMap<String, String>,
}

#[derive(Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest<'a> {
    pub tool_version: &'a str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a NetworkConfig,
    pub params: BTreeMap<String, String>,
    /// Hex SHA-256 over the canonical JSON of the fields above.
    pub digest: String,
    /// Informational only; not part of the digest.
    pub created_utc: String,
    pub outputs: Vec<OutputFile>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let h = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in h {
        s.push_str(&format!("{b:02x}"));
    }
    s
}

pub fn input_digest(
    tool_version: &str,
    command: &str,
    seed: u64,
    config: &NetworkConfig,
    params: &BTreeMap<String, String>,
) -> Result<String> {
    let canon = serde_json::to_string(&DigestedInputs {
        tool_version,
        command,
        seed,
        config,
        params,
    })
    .map_err(|e| Error::invalid(format!("cannot serialize manifest inputs: {e}")))?;
    Ok(sha256_hex(canon.as_bytes()))
}

impl<'a> RunManifest<'a> {
    pub fn new(
        command: &'a str,
        seed: u64,
        config: &'a NetworkConfig,
        params: BTreeMap<String, String>,
    ) -> Result<Self> {
        let tool_version = env!("CARGO_PKG_VERSION");
        let digest = input_digest(tool_version, command, seed, config, &params)?;
        Ok(RunManifest {
            tool_version,
            command,
            seed,
            config,
            params,
            digest,
            created_utc: utc_now_iso8601(),
            outputs: Vec::new(),
        })
    }

    /// Registers a data file that this run produced.
    pub fn add_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(OutputFile {
            path: path.to_string_lossy().into_owned(),
            sha256: sha256_hex(bytes),
        });
    }

    /// Writes `<stem>.manifest.json` next to the named data file.
    pub fn write_beside(&self, data_path: &Path) -> Result<PathBuf> {
        let stem = data_path.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
        let path = data_path.with_file_name(format!("{stem}.manifest.json"));
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::invalid(format!("cannot serialize manifest: {e}")))?;
        let mut f = std::fs::File::create(&path)
            .map_err(|e| Error::invalid(format!("cannot create {}: {e}", path.display())))?;
        f.write_all(json.as_bytes())
            .and_then(|_| f.write_all(b"\n"))
            .map_err(|e| Error::invalid(format!("cannot write {}: {e}", path.display())))?;
        Ok(path)
    }
}

/// ISO-8601 UTC timestamp from the system clock, no external dependencies.
fn utc_now_iso8601() -> String {
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = secs / 86_400;
    let (y, m, d) = civil_from_days(days as i64);
    let rem = secs % 86_400;
    format!(
        "{y:04}-{m:02}-{d:02}T{:02}:{:02}:{:02}Z",
        rem / 3600,
        (rem % 3600) / 60,
        rem % 60
    )
}

/// Gregorian date from days since 1970-01-01 (Howard Hinnant's algorithm).
fn civil_from_days(z: i64) -> (i64, u32, u32) {
    let z = z + 719_468;
    let era = if z >= 0 { z } else { z - 146_096 } / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = (doy - (153 * mp + 2) / 5 + 1) as u32;
    let m = if mp < 10 { mp + 3 } else { mp - 9 } as u32;
    (if m <= 2 { y + 1 } else { y }, m, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn known_dates_round() {
        assert_eq!(civil_from_days(0), (1970, 1, 1));
        assert_eq!(civil_from_days(19_723), (2024, 1, 1));
        assert_eq!(civil_from_days(11_016), (2000, 2, 29));
    }

    #[test]
    fn digest_is_hex_and_stable() {
        let a = sha256_hex(b"abc");
        assert_eq!(a, "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
