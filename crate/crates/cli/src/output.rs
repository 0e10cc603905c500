//! CSV emission: fixed column orders, a trailing config-hash comment, and
//! atomic file writes so a crashed run never leaves a truncated table.

use std::io::Write as _;
use std::path::Path;

use crate::Failure;

/// FNV-1a, used for the output provenance trailer. Stable across platforms
/// and builds, unlike the std hasher.
fn fnv1a(state: u64, bytes: &[u8]) -> u64 {
    let mut h = state;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;

/// Hash of the raw config bytes plus the effective seed, when the command
/// draws randomness. Identical (config, seed) pairs hash identically, so
/// byte-identical outputs carry byte-identical trailers.
pub fn config_hash(raw: &[u8], seed: Option<u64>) -> u64 {
    let h = fnv1a(FNV_OFFSET, raw);
    match seed {
        Some(s) => fnv1a(h, &s.to_le_bytes()),
        None => h,
    }
}

/// One CSV table: header, string rows, provenance hash.
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
    hash: u64,
}

/// Shortest-roundtrip decimal for a float; `inf`/`NaN` pass through. The
/// representation is deterministic, which the byte-identical-output contract
/// relies on.
pub fn num(v: f64) -> String {
    format!("{v}")
}

pub fn flag(v: bool) -> String {
    v.to_string()
}

impl Table {
    pub fn new<S: Into<String>>(header: Vec<S>, hash: u64) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new(), hash }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row).expect("in-memory write");
        }
        let mut buf = w.into_inner().expect("in-memory flush");
        buf.extend_from_slice(format!("# config_hash={:016x}\n", self.hash).as_bytes());
        buf
    }

    /// Write to `out`, or to stdout when no path is given. File writes go
    /// through a temp file in the target directory plus a rename.
    pub fn emit(&self, out: Option<&Path>) -> Result<(), Failure> {
        let bytes = self.to_bytes();
        match out {
            None => {
                std::io::stdout()
                    .write_all(&bytes)
                    .map_err(|e| Failure::Config(format!("stdout: {e}")))?;
            }
            Some(path) => {
                let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
                let mut tmp = tempfile::NamedTempFile::new_in(dir.unwrap_or(Path::new(".")))
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                tmp.write_all(&bytes)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
                tmp.persist(path)
                    .map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            }
        }
        Ok(())
    }
}
