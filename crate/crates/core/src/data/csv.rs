use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use super::Dataset;
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Which column holds the class label.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelColumn {
    /// Zero-based column index.
    Index(usize),
    /// Header name; requires a header row.
    Name(String),
    Last,
}

impl std::str::FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    /// Integers select by index, `last` the final column, anything else by name.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s.trim() {
            "last" => LabelColumn::Last,
            t => t
                .parse()
                .map(LabelColumn::Index)
                .unwrap_or_else(|_| LabelColumn::Name(t.to_string())),
        })
    }
}

/// Reads a comma-separated file. Rows and columns in errors are 1-based and
/// count the header line.
pub fn load_csv(path: impl AsRef<Path>, label_column: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut ds = read_csv(file, label_column, has_header)?;
    ds.source = format!("{}; {}", path.display(), ds.source);
    Ok(ds)
}

pub fn read_csv<R: Read>(reader: R, label_column: &LabelColumn, has_header: bool) -> Result<Dataset> {
    let mut rdr = ::csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(::csv::Trim::All)
        .from_reader(reader);

    let mut records = rdr.records();
    let mut line = 0usize;
    let mut next = |line: &mut usize| -> Option<Result<::csv::StringRecord>> {
        records.next().map(|r| {
            *line += 1;
            r.map_err(|e| Error::Parse {
                row: e.position().map_or(*line, |p| p.line() as usize),
                column: 0,
                message: e.to_string(),
            })
        })
    };

    let header = if has_header {
        match next(&mut line) {
            Some(r) => Some(r?.iter().map(str::to_string).collect::<Vec<_>>()),
            None => return Err(Error::Parse { row: 1, column: 0, message: "missing header row".into() }),
        }
    } else {
        None
    };

    let mut width = header.as_ref().map(Vec::len);
    let mut rows: Vec<(usize, ::csv::StringRecord)> = Vec::new();
    while let Some(rec) = next(&mut line) {
        let rec = rec?;
        if rec.len() == 1 && rec[0].is_empty() {
            continue;
        }
        let w = *width.get_or_insert(rec.len());
        if rec.len() != w {
            return Err(Error::Parse {
                row: line,
                column: rec.len().min(w) + 1,
                message: format!("expected {w} fields, found {}", rec.len()),
            });
        }
        rows.push((line, rec));
    }
    let width = width.unwrap_or(0);
    if rows.is_empty() {
        return Err(Error::Parse { row: line.max(1), column: 0, message: "no data rows".into() });
    }

    let label_idx = match label_column {
        LabelColumn::Last => width - 1,
        LabelColumn::Index(i) => *i,
        LabelColumn::Name(name) => header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .ok_or_else(|| Error::Parse {
                row: 1,
                column: 0,
                message: format!("no column named {name:?}"),
            })?,
    };
    if label_idx >= width || width < 2 {
        return Err(Error::Parse {
            row: 1,
            column: label_idx + 1,
            message: format!("label column {label_idx} missing from {width}-column data"),
        });
    }

    let mut classes: Vec<String> = Vec::new();
    let mut labels = Vec::with_capacity(rows.len());
    let mut data = Vec::with_capacity(rows.len() * (width - 1));
    for (line, rec) in &rows {
        for (col, cell) in rec.iter().enumerate() {
            if col == label_idx {
                let id = match classes.iter().position(|c| c == cell) {
                    Some(id) => id,
                    None => {
                        classes.push(cell.to_string());
                        classes.len() - 1
                    }
                };
                labels.push(id);
                continue;
            }
            let v: f64 = cell.parse().ok().filter(|v: &f64| v.is_finite()).ok_or_else(|| Error::Parse {
                row: *line,
                column: col + 1,
                message: format!("non-numeric value {cell:?}"),
            })?;
            data.push(v);
        }
    }

    let mapping = classes
        .iter()
        .enumerate()
        .map(|(i, c)| format!("{c}={i}"))
        .collect::<Vec<_>>()
        .join(",");
    let n = rows.len();
    let num_classes = classes.len().max(2);
    let mut ds = Dataset::new(
        Matrix::from_vec(n, width - 1, data)?,
        labels,
        num_classes,
        format!("labels[{mapping}]"),
    )?;
    ds.feature_names = header.map(|h| {
        h.into_iter()
            .enumerate()
            .filter(|&(i, _)| i != label_idx)
            .map(|(_, c)| c)
            .collect()
    });
    Ok(ds)
}

/// Writes features followed by a `label` column, with a header row.
/// Values use the shortest round-trip representation.
pub fn write_csv(ds: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let names: Vec<String> = match &ds.feature_names {
        Some(n) if n.len() == ds.dim() => n.clone(),
        _ => (0..ds.dim()).map(|i| format!("x{i}")).collect(),
    };
    let io = |e| Error::io(path, e);
    writeln!(w, "{},label", names.join(",")).map_err(io)?;
    for (row, &label) in ds.features.iter_rows().zip(&ds.labels) {
        for v in row {
            write!(w, "{v},").map_err(io)?;
        }
        writeln!(w, "{label}").map_err(io)?;
    }
    w.flush().map_err(io)
}
