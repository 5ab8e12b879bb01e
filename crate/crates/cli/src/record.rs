//! Result records and their JSON/CSV encodings.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::Formatter;

use crate::config::RunConfig;

#[derive(Debug, Clone, Serialize)]
pub struct ErrorInfo {
    pub kind: String,
    pub message: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub wall_time_s: f64,
}

/// Everything a run produced. Only `timestamp` and `timing` change between
/// repeated runs of the same configuration with the same worker count.
#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub version: String,
    pub timestamp: String,
    pub task: String,
    pub status: String,
    pub workers: usize,
    pub config: RunConfig,
    pub outputs: serde_json::Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorInfo>,
    pub warnings: Vec<String>,
    pub timing: Timing,
}

/// Writes floats with 17 significant digits.
struct Digits17;

impl Formatter for Digits17 {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            write!(w, "{}", format_f64(value))
        } else {
            w.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

/// `d.dddddddddddddddde±x`, 17 significant digits.
pub fn format_f64(value: f64) -> String {
    format!("{value:.16e}")
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17);
    value.serialize(&mut ser).expect("record serializes");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// CSV text with a header row and LF line endings.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV is UTF-8")
}
