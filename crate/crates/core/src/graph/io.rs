use std::collections::HashMap;
use std::io::BufRead;

use super::{GraphError, Label};

fn parse_field(field: Option<&str>, line: usize, what: &str) -> Result<u64, GraphError> {
    let field = field.ok_or_else(|| GraphError::Parse {
        line,
        reason: format!("missing {what}"),
    })?;
    field.parse::<u64>().map_err(|e| GraphError::Parse {
        line,
        reason: format!("bad {what} {field:?}: {e}"),
    })
}

fn data_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String), GraphError>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(GraphError::Io(e))),
            Ok(l) => {
                let t = l.trim();
                if t.is_empty() || t.starts_with('#') || t.starts_with('%') {
                    None
                } else {
                    Some(Ok((i + 1, t.to_string())))
                }
            }
        })
}

/// Parses a whitespace-separated `u v` edge list, one edge per line.
///
/// Blank lines and lines starting with `#` or `%` are skipped. The result is
/// the raw multiset of edges with original ids: self-loops and duplicates are
/// kept and only removed by [`preprocess`](super::preprocess).
pub fn load_edge_list<R: BufRead>(reader: R) -> Result<Vec<(u64, u64)>, GraphError> {
    let mut edges = Vec::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let mut fields = text.split_whitespace();
        let u = parse_field(fields.next(), line, "source")?;
        let v = parse_field(fields.next(), line, "target")?;
        if fields.next().is_some() {
            return Err(GraphError::Parse {
                line,
                reason: "expected exactly two fields".into(),
            });
        }
        edges.push((u, v));
    }
    if edges.is_empty() {
        return Err(GraphError::Empty);
    }
    Ok(edges)
}

/// Parses a `v label` file keyed by original vertex id.
pub fn load_labels<R: BufRead>(reader: R) -> Result<HashMap<u64, Label>, GraphError> {
    let mut labels = HashMap::new();
    for item in data_lines(reader) {
        let (line, text) = item?;
        let mut fields = text.split_whitespace();
        let v = parse_field(fields.next(), line, "vertex")?;
        let l = parse_field(fields.next(), line, "label")?;
        let l = Label::try_from(l).map_err(|_| GraphError::Parse {
            line,
            reason: format!("label {l} out of range"),
        })?;
        labels.insert(v, l);
    }
    Ok(labels)
}
