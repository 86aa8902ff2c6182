//! Small helpers shared by the tab-separated readers and writers.

use std::io::BufRead;

/// Marker written for missing scores.
pub(crate) const MISSING: &str = "NA";

/// Yields `(line_number, fields)` for every non-blank, non-comment line.
/// Line numbers are 1-based.
pub(crate) fn records<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = std::io::Result<(usize, Vec<String>)>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(e)),
            Ok(line) => {
                let line = line.trim_end_matches(['\r', '\n']);
                if line.trim().is_empty() || line.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, line.split('\t').map(str::to_owned).collect())))
                }
            }
        })
}

pub(crate) fn is_missing(field: &str) -> bool {
    let f = field.trim();
    f.is_empty() || f == MISSING || f == "_" || f.eq_ignore_ascii_case("nan")
}

/// Shortest representation that parses back to the same `f64`.
pub(crate) fn fmt_score(x: Option<f64>) -> String {
    match x {
        Some(v) => format!("{v}"),
        None => MISSING.to_owned(),
    }
}
