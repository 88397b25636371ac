//! Versioned JSON documents with fixed 17-significant-digit floats.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use sha2::{Digest, Sha256};

use crate::boardman::{BoardmanSymbol, MinorCount};
use crate::scan::RegionMap;
use crate::solver::CatastropheReport;

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "catafind";

/// `{:.16e}`: 17 significant digits, round-trips every finite double.
pub fn format_real(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Find { variables: Vec<String>, parameters: Vec<String>, reports: Vec<CatastropheReport> },
    Check { variables: Vec<String>, parameters: Vec<String>, verdict: String, report: CatastropheReport },
    Scan { region: RegionMap },
    CountMinors { minors: MinorCount, bg_conditions: usize },
    Boardman { point: Vec<f64>, boardman: BoardmanSymbol },
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub schema: u32,
    pub tool: &'static str,
    pub version: &'static str,
    /// SHA-256 of the field definition text, absent for commands without one.
    pub input_sha256: Option<String>,
    pub command: Vec<String>,
    pub warnings: Vec<String>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl ReportDocument {
    pub fn new(input_sha256: Option<String>, command: Vec<String>, payload: Payload) -> Self {
        ReportDocument {
            schema: SCHEMA,
            tool: TOOL,
            version: env!("CARGO_PKG_VERSION"),
            input_sha256,
            command,
            warnings: Vec::new(),
            payload,
        }
    }

    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

/// Pretty JSON where every float is written with `{:.16e}`; non-finite
/// floats become `null`.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Fixed17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("in-memory serialization cannot fail");
    out.push(b'\n');
    String::from_utf8(out).expect("serde_json writes UTF-8")
}

struct Fixed17<'a>(PrettyFormatter<'a>);

impl Formatter for Fixed17<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(format_real(v).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}
