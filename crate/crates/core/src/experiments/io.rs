//! Trace CSV files and binary PGM images.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::problem::{Trace, TraceRecord};

pub const CSV_COLUMNS: [&str; 7] = [
    "outer_iter",
    "inner_iters",
    "cum_cost",
    "objective",
    "min_objective_so_far",
    "avg_objective",
    "bound",
];

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

/// Renders a trace as CSV. `meta` pairs become `# key=value` lines above the
/// header. Floats use the shortest representation that parses back exactly.
pub fn trace_to_csv(trace: &Trace, meta: &[(String, String)]) -> String {
    let mut out = String::new();
    for (k, v) in meta {
        let _ = writeln!(out, "# {k}={v}");
    }
    out.push_str(&CSV_COLUMNS.join(","));
    out.push('\n');
    for (r, best) in trace.records.iter().zip(trace.min_so_far()) {
        let bound = r.bound_value.map(|b| format!("{b:?}")).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{:?},{:?},{:?},{:?},{}",
            r.outer_index, r.inner_used, r.cum_cost, r.objective, best, r.avg_objective, bound
        );
    }
    out
}

pub fn write_trace_csv(path: &Path, trace: &Trace, meta: &[(String, String)]) -> Result<()> {
    fs::write(path, trace_to_csv(trace, meta)).map_err(|e| io_err(path, e))
}

/// Parses a trace CSV back, returning the `# key=value` metadata as well.
pub fn read_trace_csv(path: &Path) -> Result<(Vec<(String, String)>, Trace)> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_trace_csv(&text).map_err(|reason| parse_err(path, reason))
}

fn parse_trace_csv(text: &str) -> std::result::Result<(Vec<(String, String)>, Trace), String> {
    let mut meta = Vec::new();
    let mut trace = Trace::default();
    let mut seen_header = false;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !seen_header {
            if line != CSV_COLUMNS.join(",") {
                return Err(format!("line {}: unexpected header '{line}'", lineno + 1));
            }
            seen_header = true;
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != CSV_COLUMNS.len() {
            return Err(format!(
                "line {}: expected {} fields, got {}",
                lineno + 1,
                CSV_COLUMNS.len(),
                fields.len()
            ));
        }
        let num = |i: usize| -> std::result::Result<f64, String> {
            fields[i]
                .parse::<f64>()
                .map_err(|_| format!("line {}: bad number '{}'", lineno + 1, fields[i]))
        };
        let int = |i: usize| -> std::result::Result<usize, String> {
            fields[i]
                .parse::<usize>()
                .map_err(|_| format!("line {}: bad integer '{}'", lineno + 1, fields[i]))
        };
        trace.records.push(TraceRecord {
            outer_index: int(0)?,
            inner_used: int(1)?,
            cum_cost: num(2)?,
            objective: num(3)?,
            avg_objective: num(5)?,
            bound_value: if fields[6].is_empty() {
                None
            } else {
                Some(num(6)?)
            },
        });
    }
    if !seen_header {
        return Err("missing header row".into());
    }
    Ok((meta, trace))
}

/// Grayscale image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<f64>,
}

/// Reads an 8- or 16-bit binary PGM (`P5`), scaling to `[0, 1]`.
pub fn read_pgm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    parse_pgm(&bytes).map_err(|reason| parse_err(path, reason))
}

fn parse_pgm(bytes: &[u8]) -> std::result::Result<Image, String> {
    let mut pos = 0;
    let mut tokens = Vec::new();
    while tokens.len() < 4 {
        // Skip whitespace and comments.
        while pos < bytes.len() {
            if bytes[pos].is_ascii_whitespace() {
                pos += 1;
            } else if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                break;
            }
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err("truncated header".into());
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
    }
    if tokens[0] != "P5" {
        return Err(format!("not a binary PGM (magic '{}')", tokens[0]));
    }
    let parse = |s: &str| {
        s.parse::<usize>()
            .map_err(|_| format!("bad header field '{s}'"))
    };
    let (width, height, maxval) = (parse(&tokens[1])?, parse(&tokens[2])?, parse(&tokens[3])?);
    if width == 0 || height == 0 || maxval == 0 || maxval > 65535 {
        return Err(format!(
            "unsupported dimensions {width}x{height}, maxval {maxval}"
        ));
    }
    pos += 1; // single whitespace after maxval
    let bpp = if maxval < 256 { 1 } else { 2 };
    let need = width * height * bpp;
    let data = bytes.get(pos..pos + need).ok_or("truncated pixel data")?;
    let pixels = if bpp == 1 {
        data.iter().map(|&b| b as f64 / maxval as f64).collect()
    } else {
        data.chunks_exact(2)
            .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 / maxval as f64)
            .collect()
    };
    Ok(Image {
        width,
        height,
        pixels,
    })
}

/// Writes an 8-bit binary PGM; values are clamped to `[0, 1]`.
pub fn write_pgm(path: &Path, image: &Image) -> Result<()> {
    let mut out = format!("P5\n{} {}\n255\n", image.width, image.height).into_bytes();
    out.extend(
        image
            .pixels
            .iter()
            .map(|v| (v.clamp(0.0, 1.0) * 255.0).round() as u8),
    );
    fs::write(path, out).map_err(|e| io_err(path, e))
}
