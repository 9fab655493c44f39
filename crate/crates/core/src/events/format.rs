//! Event file reading and writing.
//!
//! Delimited text: one record per line,
//! `index, herald(+1|-1), a(0|1), b(0|1), x(+1|-1), y(+1|-1)[, timestamp_ns]`.
//! Commas, tabs, semicolons or runs of spaces all work as delimiters. Blank
//! lines and lines starting with `#` are skipped, as is a leading header line
//! whose first field is `index`.
//!
//! JSON lines: one object per line with the same field names, e.g.
//! `{"index":1,"herald":1,"a":0,"b":1,"x":1,"y":-1,"timestamp_ns":1200}`.

use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Choice, Herald, Outcome, TrialRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventFormat {
    Delimited,
    JsonLines,
}

impl EventFormat {
    /// Guess from the file extension; anything but `.jsonl`/`.ndjson` is
    /// treated as delimited text.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => EventFormat::JsonLines,
            _ => EventFormat::Delimited,
        }
    }
}

impl FromStr for EventFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" | "delimited" | "text" => Ok(EventFormat::Delimited),
            "jsonl" | "json-lines" | "ndjson" => Ok(EventFormat::JsonLines),
            other => Err(Error::Validation(format!("unknown event format `{other}`"))),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct JsonRecord {
    index: u64,
    herald: i64,
    a: u8,
    b: u8,
    x: i64,
    y: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp_ns: Option<u64>,
}

impl From<&TrialRecord> for JsonRecord {
    fn from(r: &TrialRecord) -> Self {
        JsonRecord {
            index: r.index,
            herald: r.herald.tag() as i64,
            a: r.a.bit(),
            b: r.b.bit(),
            x: r.x.value() as i64,
            y: r.y.value() as i64,
            timestamp_ns: r.timestamp_ns,
        }
    }
}

pub fn read_events_path(path: &Path, format: Option<EventFormat>) -> Result<Vec<TrialRecord>> {
    let format = format.unwrap_or_else(|| EventFormat::from_path(path));
    let file = std::fs::File::open(path)?;
    read_events(std::io::BufReader::new(file), format)
}

pub fn read_events<R: BufRead>(reader: R, format: EventFormat) -> Result<Vec<TrialRecord>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let rec = match format {
            EventFormat::Delimited => {
                if out.is_empty() && is_header(trimmed) {
                    continue;
                }
                parse_delimited(trimmed, lineno)?
            }
            EventFormat::JsonLines => parse_json(trimmed, lineno)?,
        };
        out.push(rec);
    }
    Ok(out)
}

fn is_header(line: &str) -> bool {
    split_fields(line)
        .first()
        .is_some_and(|f| f.eq_ignore_ascii_case("index"))
}

fn split_fields(line: &str) -> Vec<&str> {
    if line.contains([',', ';', '\t']) {
        line.split([',', ';', '\t']).map(str::trim).collect()
    } else {
        line.split_whitespace().collect()
    }
}

fn parse_int(field: &str, name: &str, line: usize) -> Result<i64> {
    let f = field.strip_prefix('+').unwrap_or(field);
    f.parse::<i64>()
        .map_err(|_| Error::parse(line, name, format!("not an integer: `{field}`")))
}

fn parse_delimited(line: &str, lineno: usize) -> Result<TrialRecord> {
    let fields = split_fields(line);
    if fields.len() != 6 && fields.len() != 7 {
        return Err(Error::parse(
            lineno,
            "record",
            format!("expected 6 or 7 fields, found {}", fields.len()),
        ));
    }
    let index = parse_int(fields[0], "index", lineno)?;
    let herald = parse_int(fields[1], "herald", lineno)?;
    let a = parse_int(fields[2], "a", lineno)?;
    let b = parse_int(fields[3], "b", lineno)?;
    let x = parse_int(fields[4], "x", lineno)?;
    let y = parse_int(fields[5], "y", lineno)?;
    let ts = match fields.get(6) {
        Some(f) if !f.is_empty() => Some(parse_int(f, "timestamp_ns", lineno)?),
        _ => None,
    };
    build(index, herald, a, b, x, y, ts, lineno)
}

fn parse_json(line: &str, lineno: usize) -> Result<TrialRecord> {
    let v: serde_json::Value = serde_json::from_str(line)
        .map_err(|e| Error::parse(lineno, "record", format!("invalid JSON: {e}")))?;
    let get = |name: &str| -> Result<i64> {
        v.get(name)
            .ok_or_else(|| Error::parse(lineno, name, "missing"))?
            .as_i64()
            .ok_or_else(|| Error::parse(lineno, name, "not an integer"))
    };
    let ts = match v.get("timestamp_ns") {
        None | Some(serde_json::Value::Null) => None,
        Some(t) => Some(
            t.as_i64()
                .ok_or_else(|| Error::parse(lineno, "timestamp_ns", "not an integer"))?,
        ),
    };
    build(
        get("index")?,
        get("herald")?,
        get("a")?,
        get("b")?,
        get("x")?,
        get("y")?,
        ts,
        lineno,
    )
}

#[allow(clippy::too_many_arguments)]
fn build(
    index: i64,
    herald: i64,
    a: i64,
    b: i64,
    x: i64,
    y: i64,
    ts: Option<i64>,
    line: usize,
) -> Result<TrialRecord> {
    if index < 1 {
        return Err(Error::parse(line, "index", "index must be >= 1"));
    }
    let herald =
        Herald::from_tag(herald).ok_or_else(|| Error::parse(line, "herald", "herald must be ±1"))?;
    let choice = |v: i64, name: &str| {
        u8::try_from(v)
            .ok()
            .and_then(Choice::from_bit)
            .ok_or_else(|| Error::parse(line, name, "setting must be 0 or 1"))
    };
    let outcome = |v: i64, name: &str| {
        Outcome::from_value(v).ok_or_else(|| Error::parse(line, name, "outcome must be ±1"))
    };
    let timestamp_ns = match ts {
        Some(t) if t < 0 => {
            return Err(Error::parse(line, "timestamp_ns", "timestamp must be >= 0"))
        }
        Some(t) => Some(t as u64),
        None => None,
    };
    Ok(TrialRecord {
        index: index as u64,
        herald,
        a: choice(a, "a")?,
        b: choice(b, "b")?,
        x: outcome(x, "x")?,
        y: outcome(y, "y")?,
        timestamp_ns,
    })
}

pub fn write_events<W: Write>(
    mut w: W,
    records: &[TrialRecord],
    format: EventFormat,
) -> Result<()> {
    match format {
        EventFormat::Delimited => {
            writeln!(w, "index,herald,a,b,x,y,timestamp_ns")?;
            for r in records {
                let ts = r.timestamp_ns.map(|t| t.to_string()).unwrap_or_default();
                writeln!(
                    w,
                    "{},{:+},{},{},{:+},{:+},{}",
                    r.index,
                    r.herald.tag(),
                    r.a.bit(),
                    r.b.bit(),
                    r.x.value(),
                    r.y.value(),
                    ts
                )?;
            }
        }
        EventFormat::JsonLines => {
            for r in records {
                let line = serde_json::to_string(&JsonRecord::from(r))
                    .map_err(|e| Error::Io(std::io::Error::other(e)))?;
                writeln!(w, "{line}")?;
            }
        }
    }
    Ok(())
}
