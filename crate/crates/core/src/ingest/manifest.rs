use std::collections::HashSet;
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

use super::{LabeledCollection, LabeledItem, SourceRef};
use crate::{Error, Result};

/// Reads a `path,label` CSV. Relative image paths resolve against the
/// manifest's directory.
pub fn load_labels(path: impl AsRef<Path>) -> Result<LabeledCollection> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let mut coll = load_labels_from_reader(file, &path.display().to_string())?;
    for item in &mut coll.items {
        if let SourceRef::Path(p) = &mut item.source {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(coll)
}

pub fn load_labels_from_reader<R: Read>(reader: R, name: &str) -> Result<LabeledCollection> {
    parse(reader, name, "path", |field| {
        Ok(SourceRef::Path(PathBuf::from(field)))
    })
}

/// Reads a `row,label` CSV whose rows index into a raw matrix file.
pub fn load_row_labels(path: impl AsRef<Path>) -> Result<LabeledCollection> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse(file, &path.display().to_string(), "row", |field| {
        field
            .parse::<usize>()
            .map(SourceRef::Row)
            .map_err(|_| format!("row index {field:?} is not a non-negative integer"))
    })
}

fn parse<R: Read>(
    reader: R,
    name: &str,
    source_column: &str,
    parse_source: impl Fn(&str) -> std::result::Result<SourceRef, String>,
) -> Result<LabeledCollection> {
    let malformed = |line: u64, reason: String| Error::MalformedManifest {
        path: name.to_string(),
        line,
        reason,
    };

    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| malformed(1, format!("unreadable header: {e}")))?
        .clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(malformed(1, "missing header".into()));
    }
    if headers.len() != 2 || &headers[0] != source_column || &headers[1] != "label" {
        return Err(malformed(
            1,
            format!(
                "expected header `{source_column},label`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut items = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(malformed(
                line,
                format!("expected 2 fields, got {}", rec.len()),
            ));
        }
        let source = parse_source(&rec[0]).map_err(|r| malformed(line, r))?;
        let label = match &rec[1] {
            "0" => 0,
            "1" => 1,
            other => return Err(malformed(line, format!("label {other:?} is not 0 or 1"))),
        };
        if !seen.insert(source.clone()) {
            return Err(malformed(line, format!("duplicate source {source}")));
        }
        items.push(LabeledItem { source, label });
    }

    Ok(LabeledCollection {
        name: name.to_string(),
        origin: format!("manifest {name}"),
        items,
    })
}
