//! Canonical line-oriented trace files.
//!
//! ```text
//! layered-trace v1 n=<n> l=<l>
//! # optional comment lines
//! <layer> <expert>
//! ...
//! ```
//!
//! Blank lines and lines starting with `#` are ignored everywhere.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::{layer_of_position, LayeredTrace, ModelShape, PageId, Violation};

const MAGIC: &str = "layered-trace";
const VERSION: &str = "v1";

#[derive(Debug, Error)]
pub enum TraceFileError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing `{MAGIC} {VERSION}` header")]
    MissingHeader,
    #[error("line {line}: {violation}")]
    Violation { line: usize, violation: Violation },
}

fn syntax(line: usize, message: impl Into<String>) -> TraceFileError {
    TraceFileError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<ModelShape, TraceFileError> {
    let mut fields = line.split_whitespace();
    if fields.next() != Some(MAGIC) {
        return Err(TraceFileError::MissingHeader);
    }
    match fields.next() {
        Some(VERSION) => {}
        Some(other) => return Err(syntax(line_no, format!("unsupported version `{other}`"))),
        None => return Err(syntax(line_no, "header lacks a version")),
    }
    let mut n = None;
    let mut l = None;
    for field in fields {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| syntax(line_no, format!("malformed header field `{field}`")))?;
        let value: u32 = value
            .parse()
            .map_err(|_| syntax(line_no, format!("`{key}` is not a non-negative integer")))?;
        match key {
            "n" => n = Some(value),
            "l" => l = Some(value),
            _ => return Err(syntax(line_no, format!("unknown header field `{key}`"))),
        }
    }
    let (n, l) = match (n, l) {
        (Some(n), Some(l)) => (n, l),
        _ => return Err(syntax(line_no, "header needs both n= and l=")),
    };
    ModelShape::new(n, l).map_err(|e| syntax(line_no, e.to_string()))
}

/// Parses a canonical trace file, rejecting any body that breaks the
/// header's shape. Errors carry the 1-based line number.
pub fn read_trace<R: BufRead>(reader: R) -> Result<LayeredTrace, TraceFileError> {
    let mut shape = None;
    let mut requests = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let Some(shape) = shape else {
            shape = Some(parse_header(line_no, text)?);
            continue;
        };
        let mut fields = text.split_whitespace();
        let mut next_u32 = |what: &str| -> Result<u32, TraceFileError> {
            fields
                .next()
                .ok_or_else(|| syntax(line_no, format!("missing {what}")))?
                .parse()
                .map_err(|_| syntax(line_no, format!("{what} is not a non-negative integer")))
        };
        let layer = next_u32("layer")?;
        let expert = next_u32("expert")?;
        if fields.next().is_some() {
            return Err(syntax(line_no, "expected exactly `<layer> <expert>`"));
        }
        let position = requests.len() as u64 + 1;
        let expected_layer = layer_of_position(position, shape.layers());
        let violation = if layer != expected_layer {
            Some(Violation::WrongLayer {
                position,
                expected_layer,
                found_layer: layer,
            })
        } else if !(1..=shape.experts()).contains(&expert) {
            Some(Violation::ExpertOutOfRange {
                position,
                expert,
                experts: shape.experts(),
            })
        } else {
            None
        };
        if let Some(violation) = violation {
            return Err(TraceFileError::Violation {
                line: line_no,
                violation,
            });
        }
        requests.push(PageId::new(layer, expert));
    }
    let shape = shape.ok_or(TraceFileError::MissingHeader)?;
    Ok(LayeredTrace { shape, requests })
}

/// Writes a trace in canonical form. Each entry of `comments` becomes one
/// `# ` line right after the header.
pub fn write_trace<W: Write>(
    mut writer: W,
    trace: &LayeredTrace,
    comments: &[String],
) -> io::Result<()> {
    let shape = trace.shape();
    writeln!(
        writer,
        "{MAGIC} {VERSION} n={} l={}",
        shape.experts(),
        shape.layers()
    )?;
    for c in comments {
        writeln!(writer, "# {c}")?;
    }
    for p in trace.requests() {
        writeln!(writer, "{} {}", p.layer, p.expert)?;
    }
    writer.flush()
}
