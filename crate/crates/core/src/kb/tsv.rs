//! Sorted tab-separated persistence shared by the count stores.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Field placeholder for an absent value (empty argument, no connective).
pub(crate) const NONE_FIELD: &str = "-";

pub(crate) fn clean(field: &str) -> String {
    if field.is_empty() {
        NONE_FIELD.to_string()
    } else {
        field.replace(['\t', '\n', '\r'], " ")
    }
}

pub(crate) fn unclean(field: &str) -> String {
    if field == NONE_FIELD {
        String::new()
    } else {
        field.to_string()
    }
}

pub(crate) fn write_rows<I>(path: &Path, rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for row in rows {
        writeln!(w, "{}", row.join("\t")).map_err(|e| Error::io(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads rows of exactly `width` fields; the last field must parse as a count.
pub(crate) fn read_rows(path: &Path, width: usize) -> Result<Vec<(Vec<String>, u64)>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != width {
            return Err(Error::Parse {
                line: i + 1,
                message: format!(
                    "{}: expected {width} tab-separated fields, found {}",
                    path.display(),
                    fields.len()
                ),
            });
        }
        let count: u64 = fields[width - 1].parse().map_err(|_| Error::Parse {
            line: i + 1,
            message: format!("{}: bad count `{}`", path.display(), fields[width - 1]),
        })?;
        rows.push((
            fields[..width - 1].iter().map(|f| f.to_string()).collect(),
            count,
        ));
    }
    Ok(rows)
}
