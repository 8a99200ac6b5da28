//! CSV tables, grids and run manifests.
//!
//! CSV: one header row, comma separated, floats with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64`. Manifests are JSON with keys
//! in a fixed order.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::CliError;

/// Environment variable that relocates relative output paths.
pub const OUT_DIR_ENV: &str = "CATASTROPHE_OUT_DIR";

pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// `lo:hi:count`, endpoints inclusive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.hi
                } else {
                    self.lo + i as f64 * step
                }
            })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, count] = parts.as_slice() else {
            return Err(format!("grid `{s}` is not of the form lo:hi:count"));
        };
        let lo: f64 = lo.parse().map_err(|_| format!("bad grid start `{lo}`"))?;
        let hi: f64 = hi.parse().map_err(|_| format!("bad grid end `{hi}`"))?;
        let count: usize = count.parse().map_err(|_| format!("bad grid count `{count}`"))?;
        if count == 0 {
            return Err("grid count must be positive".into());
        }
        if lo.is_nan() || hi.is_nan() || lo > hi || (count > 1 && lo == hi) {
            return Err(format!("grid needs lo < hi, got {lo}:{hi}"));
        }
        Ok(Grid { lo, hi, count })
    }
}

/// A CSV table held in memory before writing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CsvTable {
    header: Vec<String>,
    rows: Vec<String>,
}

impl CsvTable {
    pub fn new<S: AsRef<str>>(header: &[S]) -> Self {
        CsvTable {
            header: header.iter().map(|h| h.as_ref().to_owned()).collect(),
            rows: Vec::new(),
        }
    }

    /// Appends a row of already formatted cells.
    pub fn push_cells(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.header.len(), "row width must match header");
        self.rows.push(cells.join(","));
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        let cells: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
        self.push_cells(&cells);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::with_capacity(32 * (self.rows.len() + 1));
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{row}");
        }
        out
    }
}

/// Applies the output-directory override to relative paths.
pub fn resolve_path(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_ENV) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(io_err)?;
    }
    let mut file = fs::File::create(path).map_err(io_err)?;
    file.write_all(contents.as_bytes()).map_err(io_err)
}

/// Reproducibility record written next to every output file set.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub params: BTreeMap<String, serde_json::Value>,
    pub generator: String,
    pub code_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catastrophes: Option<CatastropheRecord>,
    pub results: BTreeMap<String, serde_json::Value>,
    pub outputs: Vec<String>,
}

/// Realized renewal structure of a run.
#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CatastropheRecord {
    pub times: Vec<u64>,
    /// `T_{N(t)}` at the final time, 0 if no catastrophe occurred.
    pub last: u64,
    /// `t + 1 - T_{N(t)}`.
    pub age: u64,
    /// `t - T_{N(t)}`, steps taken since the last catastrophe.
    pub steps_since_last: u64,
}

impl CatastropheRecord {
    pub fn from_trace(trace: &catastrophe_core::env::RenewalTrace) -> Self {
        let t = trace.horizon();
        let last = trace.last_catastrophe(t).expect("horizon is in range");
        CatastropheRecord {
            times: trace.times().to_vec(),
            last,
            age: t + 1 - last,
            steps_since_last: t - last,
        }
    }
}

impl RunManifest {
    pub fn new(command: &[String]) -> Self {
        RunManifest {
            command: command.to_vec(),
            params: BTreeMap::new(),
            generator: catastrophe_core::env::GENERATOR_NAME.to_owned(),
            code_version: env!("CARGO_PKG_VERSION").to_owned(),
            catastrophes: None,
            results: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Self {
        self.params.insert(
            key.to_owned(),
            serde_json::to_value(value).expect("manifest values serialize"),
        );
        self
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(
            key.to_owned(),
            serde_json::to_value(value).expect("manifest values serialize"),
        );
    }

    pub fn to_json(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `tables` and a manifest naming them; returns the written paths.
pub fn write_outputs(
    manifest: &mut RunManifest,
    manifest_path: &Path,
    tables: &[(PathBuf, &CsvTable)],
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for (path, table) in tables {
        let path = resolve_path(path);
        write_file(&path, &table.render())?;
        manifest.outputs.push(path.display().to_string());
        written.push(path);
    }
    let manifest_path = resolve_path(manifest_path);
    write_file(&manifest_path, &manifest.to_json()?)?;
    written.push(manifest_path);
    Ok(written)
}

/// `<prefix>.<suffix>` without touching any extension in the prefix.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(suffix);
    PathBuf::from(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.3, 1.0 / 3.0, 1e-300, 0.107684375, f64::MIN_POSITIVE] {
            let s = fmt_float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        }
    }

    #[test]
    fn grid_parsing() {
        let g: Grid = "0.001:0.999:999".parse().unwrap();
        let pts = g.points();
        assert_eq!(pts.len(), 999);
        assert_eq!(pts[0], 0.001);
        assert_eq!(pts[998], 0.999);
        assert!((pts[499] - 0.5).abs() < 1e-12);
        assert_eq!("0.5:0.5:1".parse::<Grid>().unwrap().points(), vec![0.5]);
        for bad in ["0:1", "a:1:3", "0:1:0", "1:0:5", "0.5:0.5:3"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn csv_layout() {
        let mut t = CsvTable::new(&["u", "phi"]);
        t.push_floats(&[0.5, 0.25]);
        assert_eq!(t.render(), "u,phi\n5.0000000000000000e-1,2.5000000000000000e-1\n");
    }

    #[test]
    fn manifest_keys_are_stable() {
        let m = RunManifest::new(&["simulate".into()]).param("seed", 3).param("p", 0.9);
        let json = m.to_json().unwrap();
        let p_pos = json.find("\"p\"").unwrap();
        let seed_pos = json.find("\"seed\"").unwrap();
        assert!(p_pos < seed_pos);
        assert!(json.find("\"command\"").unwrap() < json.find("\"generator\"").unwrap());
    }

    #[test]
    fn suffix_keeps_prefix_dots() {
        assert_eq!(with_suffix(Path::new("out/run.v2"), "field.csv"), PathBuf::from("out/run.v2.field.csv"));
    }
}
