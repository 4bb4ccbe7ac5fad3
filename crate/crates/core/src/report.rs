//! Machine-readable output: JSON documents, JSON Lines and CSV, with every
//! floating-point numeral written at 17 significant digits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::ser::{CompactFormatter, Formatter, PrettyFormatter};
use thiserror::Error;

use crate::sweep::{SweepRecord, SweepSummary};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{}: {source}", path.display())]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
}

/// `v` in scientific notation with 17 significant digits.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Wraps a serde_json formatter so that floats come out via [`sig17`].
struct Sig17<F>(F);

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        if value.is_finite() {
            writer.write_all(sig17(value).as_bytes())
        } else {
            writer.write_all(b"null")
        }
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

/// Pretty-printed JSON document.
pub fn to_json_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Single-line JSON, as used for JSON Lines records.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Sig17(CompactFormatter));
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Column order of the record CSV.
pub const CSV_HEADER: [&str; 22] = [
    "case",
    "theorem",
    "param",
    "function",
    "a",
    "b",
    "p",
    "q",
    "hypothesis_function",
    "hypothesis_verdict",
    "hypothesis_violation",
    "f_a",
    "f_b",
    "bound",
    "integral",
    "integral_error",
    "slack",
    "tightness",
    "holds",
    "holds_for_abs_integral",
    "violation",
    "error",
];

fn opt_num(v: Option<f64>) -> String {
    v.map(sig17).unwrap_or_default()
}

fn opt_bool(v: Option<bool>) -> String {
    v.map(|b| b.to_string()).unwrap_or_default()
}

fn record_row(r: &SweepRecord) -> Vec<String> {
    vec![
        r.case.to_string(),
        r.theorem.name().to_string(),
        opt_num(r.param),
        r.function.clone(),
        sig17(r.a),
        sig17(r.b),
        sig17(r.p),
        sig17(r.q),
        r.hypothesis_function.clone().unwrap_or_default(),
        r.hypothesis_verdict
            .map(|v| match v {
                crate::convexity::Verdict::NoCounterexample => "no_counterexample".to_string(),
                crate::convexity::Verdict::Counterexample => "counterexample".to_string(),
            })
            .unwrap_or_default(),
        opt_num(r.hypothesis_violation),
        opt_num(r.f_a),
        opt_num(r.f_b),
        opt_num(r.bound),
        opt_num(r.integral),
        opt_num(r.integral_error),
        opt_num(r.slack),
        opt_num(r.tightness),
        opt_bool(r.holds),
        opt_bool(r.holds_for_abs_integral),
        opt_bool(r.violation),
        r.error.clone().unwrap_or_default(),
    ]
}

/// Writes records as CSV (header always present).
pub fn write_records_csv<W: Write>(out: W, records: &[SweepRecord]) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record(record_row(r))?;
    }
    w.flush()?;
    Ok(())
}

/// Writes records as JSON Lines.
pub fn write_records_jsonl<W: Write>(mut out: W, records: &[SweepRecord]) -> io::Result<()> {
    for r in records {
        writeln!(out, "{}", to_json_line(r))?;
    }
    out.flush()
}

fn parse_opt<T: std::str::FromStr>(s: &str) -> Result<Option<T>, String> {
    if s.is_empty() {
        Ok(None)
    } else {
        s.parse()
            .map(Some)
            .map_err(|_| format!("cannot parse `{s}`"))
    }
}

/// Reads records back from the CSV produced by [`write_records_csv`].
pub fn read_records_csv<R: io::Read>(input: R) -> Result<Vec<SweepRecord>, String> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers().map_err(|e| e.to_string())?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(format!("unexpected header {header:?}"));
    }
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(|e| e.to_string())?;
        let get = |i: usize| row.get(i).unwrap_or("");
        let num = |i: usize| -> Result<f64, String> {
            get(i)
                .parse()
                .map_err(|_| format!("cannot parse `{}`", get(i)))
        };
        let text = |i: usize| (!get(i).is_empty()).then(|| get(i).to_string());
        out.push(SweepRecord {
            case: get(0)
                .parse()
                .map_err(|_| format!("bad case id `{}`", get(0)))?,
            theorem: get(1).parse()?,
            param: parse_opt(get(2))?,
            function: get(3).to_string(),
            a: num(4)?,
            b: num(5)?,
            p: num(6)?,
            q: num(7)?,
            hypothesis_function: text(8),
            hypothesis_verdict: match get(9) {
                "" => None,
                "no_counterexample" => Some(crate::convexity::Verdict::NoCounterexample),
                "counterexample" => Some(crate::convexity::Verdict::Counterexample),
                other => return Err(format!("unknown verdict `{other}`")),
            },
            hypothesis_violation: parse_opt(get(10))?,
            f_a: parse_opt(get(11))?,
            f_b: parse_opt(get(12))?,
            bound: parse_opt(get(13))?,
            integral: parse_opt(get(14))?,
            integral_error: parse_opt(get(15))?,
            slack: parse_opt(get(16))?,
            tightness: parse_opt(get(17))?,
            holds: parse_opt(get(18))?,
            holds_for_abs_integral: parse_opt(get(19))?,
            violation: parse_opt(get(20))?,
            error: text(21),
        });
    }
    Ok(out)
}

/// Reads records back from JSON Lines.
pub fn read_records_jsonl(input: &str) -> Result<Vec<SweepRecord>, serde_json::Error> {
    input
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Paths written by [`emit_report`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmittedFiles {
    pub summary: PathBuf,
    pub records: PathBuf,
}

/// Writes `summary.json` and `records.jsonl` / `records.csv` into `dir`.
pub fn emit_report(
    summary: &SweepSummary,
    records: &[SweepRecord],
    dir: &Path,
    format: Format,
) -> Result<EmittedFiles, ReportError> {
    fs::create_dir_all(dir).map_err(|source| ReportError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let summary_path = dir.join("summary.json");
    let mut doc = to_json_pretty(summary);
    doc.push('\n');
    fs::write(&summary_path, doc).map_err(|source| ReportError::Io {
        path: summary_path.clone(),
        source,
    })?;

    let records_path = match format {
        Format::Json => dir.join("records.jsonl"),
        Format::Csv => dir.join("records.csv"),
    };
    let file = fs::File::create(&records_path).map_err(|source| ReportError::Io {
        path: records_path.clone(),
        source,
    })?;
    let out = io::BufWriter::new(file);
    match format {
        Format::Json => write_records_jsonl(out, records).map_err(|source| ReportError::Io {
            path: records_path.clone(),
            source,
        })?,
        Format::Csv => write_records_csv(out, records).map_err(|source| ReportError::Csv {
            path: records_path.clone(),
            source,
        })?,
    }
    Ok(EmittedFiles {
        summary: summary_path,
        records: records_path,
    })
}

/// Reads a summary written by [`emit_report`].
pub fn read_summary(path: &Path) -> Result<SweepSummary, ReportError> {
    let text = fs::read_to_string(path).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| ReportError::Json {
        path: path.to_path_buf(),
        source,
    })
}
