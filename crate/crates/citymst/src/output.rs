//! CSV tables, point and tree files, and the `.meta.json` sidecar.
//!
//! Floats are written with Rust's `Display`, which emits the shortest
//! decimal string that parses back to the same binary64 value.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use citymst_core::{Point2, WeightedTree};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: expected header `{expected}`, found `{found}`")]
    Header {
        path: PathBuf,
        expected: String,
        found: String,
    },
    #[error("{path}, row {row}: {message}")]
    Field { path: PathBuf, row: usize, message: String },
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

/// A header plus rows of already formatted cells.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.headers.len(), "row width does not match header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    /// Column `name` parsed as floats.
    pub fn floats(&self, name: &str) -> Option<Vec<f64>> {
        let c = self.column(name)?;
        self.rows.iter().map(|r| r[c].parse().ok()).collect()
    }

    pub fn write(&self, path: &Path) -> Result<(), OutputError> {
        create_parent(path)?;
        let csv_err = |source| OutputError::Csv {
            path: path.to_owned(),
            source,
        };
        let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
        w.write_record(&self.headers).map_err(csv_err)?;
        for row in &self.rows {
            w.write_record(row).map_err(csv_err)?;
        }
        w.flush().map_err(|source| OutputError::Io {
            path: path.to_owned(),
            source,
        })
    }

    pub fn read(path: &Path) -> Result<Self, OutputError> {
        let csv_err = |source| OutputError::Csv {
            path: path.to_owned(),
            source,
        };
        let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = r.headers().map_err(csv_err)?.iter().map(str::to_owned).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            rows.push(rec.map_err(csv_err)?.iter().map(str::to_owned).collect());
        }
        Ok(Self { headers, rows })
    }
}

pub(crate) fn create_parent(path: &Path) -> Result<(), OutputError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| OutputError::Io {
            path: dir.to_owned(),
            source,
        })?;
    }
    Ok(())
}

pub const POINT_HEADER: [&str; 3] = ["idx", "x", "y"];
pub const TREE_HEADER: [&str; 3] = ["i", "j", "len"];

pub fn points_table(points: &[Point2]) -> Table {
    let mut t = Table::new(&POINT_HEADER);
    for (i, p) in points.iter().enumerate() {
        t.push(vec![i.to_string(), fmt_f64(p.x), fmt_f64(p.y)]);
    }
    t
}

pub fn tree_table(tree: &WeightedTree) -> Table {
    let mut t = Table::new(&TREE_HEADER);
    for e in &tree.edges {
        t.push(vec![e.i.to_string(), e.j.to_string(), fmt_f64(e.len)]);
    }
    t
}

fn expect_header(t: &Table, path: &Path, expected: &[&str]) -> Result<(), OutputError> {
    if t.headers != expected {
        return Err(OutputError::Header {
            path: path.to_owned(),
            expected: expected.join(","),
            found: t.headers.join(","),
        });
    }
    Ok(())
}

/// Reads an `idx,x,y` file. Rows must be numbered `0, 1, 2, ...`.
pub fn read_points(path: &Path) -> Result<Vec<Point2>, OutputError> {
    let t = Table::read(path)?;
    expect_header(&t, path, &POINT_HEADER)?;
    let field = |row: usize, message: String| OutputError::Field {
        path: path.to_owned(),
        row,
        message,
    };
    t.rows
        .iter()
        .enumerate()
        .map(|(row, r)| {
            let idx: usize = r[0].parse().map_err(|e| field(row, format!("idx: {e}")))?;
            if idx != row {
                return Err(field(row, format!("idx {idx} out of sequence")));
            }
            let x: f64 = r[1].parse().map_err(|e| field(row, format!("x: {e}")))?;
            let y: f64 = r[2].parse().map_err(|e| field(row, format!("y: {e}")))?;
            Ok(Point2::new(x, y))
        })
        .collect()
}

pub fn write_points(path: &Path, points: &[Point2]) -> Result<(), OutputError> {
    points_table(points).write(path)
}

pub fn write_tree(path: &Path, tree: &WeightedTree) -> Result<(), OutputError> {
    tree_table(tree).write(path)
}

/// `dir/stem.ext` -> `dir/stem{suffix}`.
pub fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), OutputError> {
    create_parent(path)?;
    let text = serde_json::to_string_pretty(value).expect("json value serializes");
    fs::write(path, text + "\n").map_err(|source| OutputError::Io {
        path: path.to_owned(),
        source,
    })
}
