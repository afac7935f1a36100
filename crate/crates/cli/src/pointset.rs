//! Text format for cubature point sets.
//!
//! One node per line, `x y z w` separated by whitespace: a unit vector and a
//! weight in steradians. Lines starting with `#` are comments, except that a
//! comment of the form `# degree: t` declares the exactness degree. Without
//! the header the degree is found by testing exactness.

use std::io::{BufRead, Write};

use sphdeconv_core::CubatureSet;

#[derive(Debug, thiserror::Error)]
pub enum PointSetError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Invalid(#[from] sphdeconv_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_error(line: usize, message: impl Into<String>) -> PointSetError {
    PointSetError::Parse {
        line,
        message: message.into(),
    }
}

/// Raw nodes and the declared degree, without validation.
pub fn parse_nodes<R: BufRead>(reader: R) -> Result<(Vec<[f64; 4]>, Option<usize>), PointSetError> {
    let mut nodes = Vec::new();
    let mut degree = None;
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if let Some(comment) = text.strip_prefix('#') {
            if let Some(value) = comment.trim().strip_prefix("degree:") {
                let t: usize = value
                    .trim()
                    .parse()
                    .map_err(|_| parse_error(lineno, format!("bad degree `{}`", value.trim())))?;
                if degree.replace(t).is_some_and(|old| old != t) {
                    return Err(parse_error(lineno, "conflicting degree headers"));
                }
            }
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_error(lineno, format!("expected 4 fields, found {}", fields.len())));
        }
        let mut node = [0.0; 4];
        for (slot, field) in node.iter_mut().zip(&fields) {
            *slot = field
                .parse()
                .map_err(|_| parse_error(lineno, format!("not a number: `{field}`")))?;
            if !f64::is_finite(*slot) {
                return Err(parse_error(lineno, format!("non-finite value `{field}`")));
            }
        }
        nodes.push(node);
    }
    Ok((nodes, degree))
}

pub fn read_pointset<R: BufRead>(reader: R) -> Result<CubatureSet, PointSetError> {
    let (nodes, degree) = parse_nodes(reader)?;
    Ok(CubatureSet::from_nodes(&nodes, degree)?)
}

pub fn parse_pointset(text: &str) -> Result<CubatureSet, PointSetError> {
    read_pointset(text.as_bytes())
}

/// Writes `set` with its degree header. Values use the shortest decimal form
/// that parses back to the same `f64`.
pub fn write_pointset<W: Write>(mut out: W, set: &CubatureSet) -> std::io::Result<()> {
    writeln!(out, "# degree: {}", set.degree())?;
    for (p, w) in set.nodes().iter().zip(set.weights()) {
        let [x, y, z] = p.xyz();
        writeln!(out, "{x:?} {y:?} {z:?} {w:?}")?;
    }
    Ok(())
}
