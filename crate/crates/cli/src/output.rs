//! Tabular output with a provenance header, written all-or-nothing.

use std::fs;
use std::path::{Path, PathBuf};

use hoiem::format::fmt_num;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub config_sha256: String,
    pub seed: u64,
    pub command: String,
}

impl Provenance {
    fn header(&self) -> String {
        format!(
            "# {} {}\n# config-sha256: {}\n# seed: {}\n# command: {}\n",
            self.tool, self.version, self.config_sha256, self.seed, self.command
        )
    }
}

/// One cell: numbers are rendered with nine significant digits.
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or_else(|| Cell::Text("NA".into()), Cell::Num)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Int(v.into())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Text(s) => s.replace(['\t', '\n', '\r'], " "),
            Cell::Num(v) => fmt_num(*v),
            Cell::Int(v) => v.to_string(),
        }
    }
}

#[macro_export]
macro_rules! row {
    ($($c:expr),* $(,)?) => { vec![$($crate::output::Cell::from($c)),*] };
}

pub struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    fn render(&self, p: &Provenance) -> String {
        let mut out = p.header();
        out.push_str(&self.columns.join("\t"));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(Cell::render).collect();
            out.push_str(&cells.join("\t"));
            out.push('\n');
        }
        out
    }
}

/// Files produced by one command; nothing touches the disk until
/// [`Outputs::commit`].
pub struct Outputs {
    provenance: Provenance,
    files: Vec<(String, String)>,
}

impl Outputs {
    pub fn new(provenance: Provenance) -> Self {
        Self {
            provenance,
            files: Vec::new(),
        }
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn table(&mut self, name: &str, t: &Table) {
        let body = t.render(&self.provenance);
        self.files.push((name.to_string(), body));
    }

    /// Markdown or other free text; the provenance goes in an HTML comment.
    pub fn text(&mut self, name: &str, body: &str) {
        let p = &self.provenance;
        let head = format!(
            "<!-- {} {} | config-sha256: {} | seed: {} | command: {} -->\n",
            p.tool, p.version, p.config_sha256, p.seed, p.command
        );
        self.files.push((name.to_string(), head + body));
    }

    pub fn json<T: Serialize>(&mut self, name: &str, payload: &T) {
        #[derive(Serialize)]
        struct Report<'a, T> {
            provenance: &'a Provenance,
            #[serde(flatten)]
            payload: &'a T,
        }
        let body = serde_json::to_string_pretty(&Report {
            provenance: &self.provenance,
            payload,
        })
        .expect("report serializes");
        self.files.push((name.to_string(), body + "\n"));
    }

    /// Write every file to a temporary name first and rename only once all
    /// writes succeeded.
    pub fn commit(self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CliError::Output { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let mut staged = Vec::new();
        for (name, body) in &self.files {
            let tmp = dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, body) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(io(&tmp)(e));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, fin) in staged {
            fs::rename(&tmp, &fin).map_err(io(&fin))?;
            written.push(fin);
        }
        Ok(written)
    }
}
