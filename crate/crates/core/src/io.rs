//! Readers for the plain-text input formats shared by several modules.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{}:{line}: {message}", source_name.as_deref().unwrap_or("<input>"))]
    Parse {
        source_name: Option<String>,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl DataError {
    pub(crate) fn at(line: usize, message: impl Into<String>) -> Self {
        DataError::Parse {
            source_name: None,
            line,
            message: message.into(),
        }
    }

    /// Attaches a file name to a parse error.
    pub fn in_file(self, path: &Path) -> Self {
        match self {
            DataError::Parse { line, message, .. } => DataError::Parse {
                source_name: Some(path.display().to_string()),
                line,
                message,
            },
            other => other,
        }
    }
}

pub fn read_to_string(path: &Path) -> Result<String, DataError> {
    fs::read_to_string(path).map_err(|source| DataError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), DataError> {
    let io_err = |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    };
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err)?;
    }
    let tmp = path.with_extension(format!(
        "{}.tmp",
        path.extension().and_then(|e| e.to_str()).unwrap_or("")
    ));
    let mut f = fs::File::create(&tmp).map_err(io_err)?;
    f.write_all(contents).map_err(io_err)?;
    f.sync_all().map_err(io_err)?;
    fs::rename(&tmp, path).map_err(io_err)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

/// Two-column TSV rows `a<TAB>b`. Extra columns are ignored.
pub fn parse_pairs_tsv(text: &str) -> Result<Vec<(String, String)>, DataError> {
    content_lines(text)
        .map(|(n, line)| {
            let mut cols = line.split('\t');
            match (cols.next(), cols.next()) {
                (Some(a), Some(b)) if !a.trim().is_empty() && !b.trim().is_empty() => {
                    Ok((a.trim().to_string(), b.trim().to_string()))
                }
                _ => Err(DataError::at(n, "expected two tab-separated columns")),
            }
        })
        .collect()
}

/// `key<TAB>value` rows grouped into sets.
pub fn parse_set_tsv(text: &str) -> Result<BTreeMap<String, BTreeSet<String>>, DataError> {
    let mut out: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
    for (k, v) in parse_pairs_tsv(text)? {
        out.entry(k).or_default().insert(v);
    }
    Ok(out)
}

/// Weighted edge list: `a<TAB>b[<TAB>weight]`.
pub fn parse_edges_tsv(text: &str) -> Result<Vec<(String, String, f64)>, DataError> {
    content_lines(text)
        .map(|(n, line)| {
            let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
            if cols.len() < 2 || cols[0].is_empty() || cols[1].is_empty() {
                return Err(DataError::at(n, "expected `a<TAB>b[<TAB>weight]`"));
            }
            let w = match cols.get(2) {
                Some(s) if !s.is_empty() => s
                    .parse::<f64>()
                    .map_err(|_| DataError::at(n, format!("bad edge weight `{s}`")))?,
                _ => 1.0,
            };
            Ok((cols[0].to_string(), cols[1].to_string(), w))
        })
        .collect()
}

/// FASTA records as `(id, sequence)`; the id is the first word of the header.
pub fn parse_fasta(text: &str) -> Result<Vec<(String, String)>, DataError> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with(';') {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("");
            if id.is_empty() {
                return Err(DataError::at(i + 1, "empty FASTA header"));
            }
            out.push((id.to_string(), String::new()));
        } else {
            match out.last_mut() {
                Some((_, seq)) => seq.push_str(line),
                None => return Err(DataError::at(i + 1, "sequence data before first header")),
            }
        }
    }
    Ok(out)
}

/// CSV matrix with the row id in the first column. A first row whose value
/// columns are not all numeric is taken as a header and skipped.
pub fn parse_labeled_rows_csv(text: &str) -> Result<Vec<(String, Vec<f64>)>, DataError> {
    let mut out = Vec::new();
    let mut width = None;
    for (idx, (n, line)) in content_lines(text).enumerate() {
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed: Result<Vec<f64>, _> = cols[1..].iter().map(|c| c.parse::<f64>()).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if idx == 0 => continue,
            Err(_) => return Err(DataError::at(n, "non-numeric value")),
        };
        if cols[0].is_empty() || values.is_empty() {
            return Err(DataError::at(n, "expected `id,value[,value...]`"));
        }
        match width {
            None => width = Some(values.len()),
            Some(w) if w != values.len() => {
                return Err(DataError::at(
                    n,
                    format!("expected {w} values, found {}", values.len()),
                ))
            }
            _ => {}
        }
        out.push((cols[0].to_string(), values));
    }
    Ok(out)
}
