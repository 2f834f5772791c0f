//! File emission: header blocks, CSV/JSON encoding and atomic writes.

use crate::error::CliError;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TOOL: &str = env!("CARGO_PKG_NAME");
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const NORM_NOTE: &str =
    "|c|_M = sqrt(c^T M c) is the L2 norm of the relative fluid velocity; |Ia| is Euclidean";

/// Carried by every emitted file.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub scenario_hash: String,
    pub generator_convention: String,
    pub norms: String,
}

impl Header {
    pub fn new(scenario_hash: &str) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            scenario_hash: scenario_hash.into(),
            generator_convention: spinfluid_core::spectrum::GENERATOR_CONVENTION.into(),
            norms: NORM_NOTE.into(),
        }
    }

    /// `# key: value` comment lines for CSV files.
    pub fn comment_block(&self) -> String {
        format!(
            "# tool: {} {}\n# scenario: {}\n# generator: {}\n# norms: {}\n",
            self.tool, self.version, self.scenario_hash, self.generator_convention, self.norms
        )
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory and a
/// rename, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp-{}", std::process::id()));
    let result = fs::File::create(&tmp)
        .and_then(|mut f| {
            f.write_all(bytes)?;
            f.sync_all()
        })
        .and_then(|_| fs::rename(&tmp, path));
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(CliError::io(path, e));
    }
    Ok(())
}

#[derive(Serialize)]
struct WithHeader<'a, T: Serialize> {
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

pub fn json_string<T: Serialize>(header: &Header, body: &T) -> String {
    let mut text = serde_json::to_string_pretty(&WithHeader { header, body })
        .expect("report types always serialise");
    text.push('\n');
    text
}

pub fn write_json<T: Serialize>(path: &Path, header: &Header, body: &T) -> Result<(), CliError> {
    write_atomic(path, json_string(header, body).as_bytes())
}

/// Column-oriented table emitted as CSV (with a comment header) or JSON
/// (`{"header": …, "columns": […], "rows": [[…], …]}`).
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // shortest representation that round-trips
            Cell::Num(v) => format!("{v:?}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self, header: &Header) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            writer
                .write_record(row.iter().map(Cell::render))
                .expect("in-memory write");
        }
        let body = String::from_utf8(writer.into_inner().expect("in-memory flush"))
            .expect("CSV of UTF-8 cells is UTF-8");
        format!("{}{body}", header.comment_block())
    }

    pub fn write(&self, dir: &Path, stem: &str, format: crate::config::Format, header: &Header) -> Result<PathBuf, CliError> {
        use crate::config::Format;
        let (path, text) = match format {
            Format::Csv => (dir.join(format!("{stem}.csv")), self.to_csv(header)),
            Format::Json => (dir.join(format!("{stem}.json")), json_string(header, self)),
        };
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Parses a CSV produced by [`Table::to_csv`], skipping comment lines.
pub fn read_csv(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>), csv::Error> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(text.as_bytes());
    let columns = reader.headers()?.iter().map(str::to_string).collect();
    let rows = reader
        .records()
        .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
        .collect::<Result<_, _>>()?;
    Ok((columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_with_header() {
        let header = Header::new("abc");
        let mut t = Table::new(&["t", "value", "tag"]);
        t.push(vec![0.1.into(), 3usize.into(), "kernel".into()]);
        t.push(vec![1e-300.into(), 0usize.into(), "a,b".into()]);
        let text = t.to_csv(&header);
        assert!(text.starts_with("# tool: spinfluid"));
        let (cols, rows) = read_csv(&text).unwrap();
        assert_eq!(cols, ["t", "value", "tag"]);
        assert_eq!(rows[1][0].parse::<f64>().unwrap(), 1e-300);
        assert_eq!(rows[1][2], "a,b");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
