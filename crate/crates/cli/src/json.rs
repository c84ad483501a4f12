//! JSON and CSV writers with a fixed float format.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};

use crate::error::{CliError, CliResult};

/// 17 significant digits in scientific notation, with `-0` folded to `0`.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{:.16e}", v + 0.0)
    } else {
        v.to_string()
    }
}

#[derive(Default)]
struct FixedFloat(CompactFormatter);

impl Formatter for FixedFloat {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
}

/// Serializes `value` followed by a newline.
pub fn to_json<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedFloat::default());
    value
        .serialize(&mut ser)
        .map_err(|e| CliError::new(crate::error::exit::INTERNAL, e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Comma-separated table with a header row.
pub fn to_csv(header: &[String], rows: &[Vec<String>]) -> Vec<u8> {
    let mut out = header.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&r.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}
