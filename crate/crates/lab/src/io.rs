//! File formats and atomic output.
//!
//! Binary eigensystem layout (all little-endian):
//!
//! | bytes | content |
//! |---|---|
//! | 8 | magic `QPLEIG1\0` |
//! | 8 | `u64` dimension `N` |
//! | 8 | `i64` first site |
//! | 8 | `i64` trust radius |
//! | 8 | `u64` method (0 = QL, 1 = bisection) |
//! | 8N | `f64` diagonal |
//! | N·8(N+1) | per eigenvalue, ascending: `f64` eigenvalue, then `N` `f64` vector entries from the first site |

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use qplab_core::spectral::Method;
use qplab_core::{EigenSystem, PotentialSpec};

use crate::LabError;

const MAGIC: &[u8; 8] = b"QPLEIG1\0";

fn io_err(path: &Path, e: impl std::fmt::Display) -> LabError {
    LabError::Io(format!("{}: {e}", path.display()))
}

/// Writes to a sibling temp file, syncs, then renames over `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), LabError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    let name = path
        .file_name()
        .ok_or_else(|| io_err(path, "not a file path"))?;
    let mut tmp = PathBuf::from(path);
    tmp.set_file_name(format!(".{}.tmp", name.to_string_lossy()));
    let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
    f.write_all(bytes).map_err(|e| io_err(&tmp, e))?;
    f.sync_all().map_err(|e| io_err(&tmp, e))?;
    drop(f);
    fs::rename(&tmp, path).map_err(|e| io_err(path, e))
}

/// A CSV table held as strings so rendering is byte-stable.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Vec<u8> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        w.into_inner().expect("in-memory flush")
    }
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}

/// Reads a two-column `(n, g)` CSV with consecutive sites; a header line is optional.
pub fn load_potential_csv(path: &Path) -> Result<PotentialSpec, LabError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_potential_csv(&text).map_err(|m| io_err(path, m))
}

pub fn parse_potential_csv(text: &str) -> Result<PotentialSpec, String> {
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut first = None;
    let mut values = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| e.to_string())?;
        if rec.len() != 2 {
            return Err(format!(
                "line {}: expected 2 columns, found {}",
                i + 1,
                rec.len()
            ));
        }
        let n: i64 = match rec[0].parse() {
            Ok(n) => n,
            Err(_) if i == 0 => continue,
            Err(e) => return Err(format!("line {}: site `{}`: {e}", i + 1, &rec[0])),
        };
        let g: f64 = rec[1]
            .parse()
            .map_err(|e| format!("line {}: value `{}`: {e}", i + 1, &rec[1]))?;
        if !g.is_finite() {
            return Err(format!("line {}: value is not finite", i + 1));
        }
        let start = *first.get_or_insert(n);
        if n != start + values.len() as i64 {
            return Err(format!(
                "line {}: site {n} breaks the consecutive run from {start}",
                i + 1
            ));
        }
        values.push(g);
    }
    let first = first.ok_or("no data rows")?;
    Ok(PotentialSpec::table(first, values))
}

/// One row per eigenvalue: the eigenvalue, then the vector on the window.
pub fn eigensystem_csv(sys: &EigenSystem) -> Vec<u8> {
    let mut header = vec!["eigenvalue".to_string()];
    header.extend((sys.first_site()..=sys.last_site()).map(|n| format!("n={n}")));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header).expect("in-memory write");
    for s in 0..sys.dim() {
        let row =
            std::iter::once(num(sys.eigenvalues()[s])).chain(sys.vector(s).iter().map(|v| num(*v)));
        w.write_record(row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub fn eigensystem_binary(sys: &EigenSystem) -> Vec<u8> {
    let n = sys.dim();
    let mut out = Vec::with_capacity(40 + 8 * n * (n + 2));
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(n as u64).to_le_bytes());
    out.extend_from_slice(&sys.first_site().to_le_bytes());
    out.extend_from_slice(&sys.trust_region.to_le_bytes());
    let code: u64 = match sys.method {
        Method::Ql => 0,
        Method::Bisection => 1,
    };
    out.extend_from_slice(&code.to_le_bytes());
    for d in sys.diagonal() {
        out.extend_from_slice(&d.to_le_bytes());
    }
    for s in 0..n {
        out.extend_from_slice(&sys.eigenvalues()[s].to_le_bytes());
        for v in sys.vector(s) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub fn read_eigensystem_binary(bytes: &[u8]) -> Result<EigenSystem, String> {
    let mut pos = 0usize;
    let mut take8 = || -> Result<[u8; 8], String> {
        let chunk = bytes
            .get(pos..pos + 8)
            .ok_or("truncated eigensystem file")?;
        pos += 8;
        Ok(chunk.try_into().expect("8 bytes"))
    };
    if &take8()? != MAGIC {
        return Err("bad magic".into());
    }
    let n = u64::from_le_bytes(take8()?) as usize;
    let first = i64::from_le_bytes(take8()?);
    let trust = i64::from_le_bytes(take8()?);
    let method = match u64::from_le_bytes(take8()?) {
        0 => Method::Ql,
        1 => Method::Bisection,
        c => return Err(format!("unknown method code {c}")),
    };
    if bytes.len() != 40 + 8 * n * (n + 2) {
        return Err(format!(
            "length {} does not match dimension {n}",
            bytes.len()
        ));
    }
    let mut diagonal = Vec::with_capacity(n);
    for _ in 0..n {
        diagonal.push(f64::from_le_bytes(take8()?));
    }
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n * n);
    for _ in 0..n {
        values.push(f64::from_le_bytes(take8()?));
        for _ in 0..n {
            vectors.push(f64::from_le_bytes(take8()?));
        }
    }
    Ok(EigenSystem::from_parts(
        first, values, vectors, diagonal, trust, method,
    ))
}
