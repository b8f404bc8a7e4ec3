//! Record tables and their CSV / JSON renderings, plus the run ledger.

use std::fs::OpenOptions;
use std::io::{self, Write};
use std::time::SystemTime;

use num_rational::BigRational;
use serde::Serialize;
use serde_json::{Map, Number, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// One cell. CSV prints `text`; JSON carries the value it denotes.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    /// Decimal integer of any size.
    Int(String),
    /// Decimal number as printed.
    Num(String),
    Text(String),
    Bool(bool),
    Null,
}

impl Field {
    pub fn int(x: impl ToString) -> Field {
        Field::Int(x.to_string())
    }

    /// Shortest text that round-trips.
    pub fn float(x: f64) -> Field {
        Field::Num(format!("{x}"))
    }

    pub fn fixed(x: f64, places: usize) -> Field {
        Field::Num(format!("{x:.places$}"))
    }

    pub fn text(s: impl Into<String>) -> Field {
        Field::Text(s.into())
    }

    pub fn opt_int<T: ToString>(x: Option<T>) -> Field {
        x.map_or(Field::Null, Field::int)
    }

    fn csv(&self) -> String {
        match self {
            Field::Int(s) | Field::Num(s) | Field::Text(s) => s.clone(),
            Field::Bool(b) => b.to_string(),
            Field::Null => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Field::Int(s) => {
                if let Ok(v) = s.parse::<i64>() {
                    Value::from(v)
                } else if let Ok(v) = s.parse::<u64>() {
                    Value::from(v)
                } else {
                    Value::String(s.clone())
                }
            }
            Field::Num(s) => s
                .parse::<f64>()
                .ok()
                .and_then(Number::from_f64)
                .map_or_else(|| Value::String(s.clone()), Value::Number),
            Field::Text(s) => Value::String(s.clone()),
            Field::Bool(b) => Value::Bool(*b),
            Field::Null => Value::Null,
        }
    }
}

/// An ordered record.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record(pub Vec<(String, Field)>);

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn push(&mut self, key: impl Into<String>, value: Field) -> &mut Self {
        self.0.push((key.into(), value));
        self
    }

    /// `key_numerator`, `key_denominator` and a decimal `key`.
    pub fn rational(&mut self, key: &str, r: &BigRational, places: usize) -> &mut Self {
        self.push(
            key,
            Field::Num(cubespec_core::montecarlo::format_rational(r, places)),
        );
        self.push(format!("{key}_numerator"), Field::int(r.numer()));
        self.push(format!("{key}_denominator"), Field::int(r.denom()))
    }

    fn json(&self) -> Value {
        Value::Object(
            self.0
                .iter()
                .map(|(k, v)| (k.clone(), v.json()))
                .collect::<Map<_, _>>(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// The records of a run as the JSON payload.
pub fn payload(command: &str, records: &[Record]) -> Value {
    let mut m = Map::new();
    m.insert("schema_version".into(), SCHEMA_VERSION.into());
    m.insert("command".into(), command.into());
    m.insert(
        "records".into(),
        Value::Array(records.iter().map(Record::json).collect()),
    );
    Value::Object(m)
}

pub fn write_records(
    out: &mut dyn Write,
    format: Format,
    command: &str,
    records: &[Record],
) -> io::Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &payload(command, records))?;
            writeln!(out)
        }
        Format::Csv => {
            // a change of keys starts a new header block
            let mut start = 0;
            while start < records.len() {
                let keys: Vec<&str> = records[start].0.iter().map(|(k, _)| k.as_str()).collect();
                let len = records[start..]
                    .iter()
                    .take_while(|r| r.0.iter().map(|(k, _)| k.as_str()).eq(keys.iter().copied()))
                    .count();
                if start > 0 {
                    out.write_all(b"\n")?;
                }
                let mut w = csv::Writer::from_writer(&mut *out);
                w.write_record(&keys)?;
                for r in &records[start..start + len] {
                    w.write_record(r.0.iter().map(|(_, v)| v.csv()))?;
                }
                w.flush()?;
                start += len;
            }
            Ok(())
        }
    }
}

/// One ledger line.
#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub schema_version: u32,
    pub timestamp: String,
    pub command: &'a str,
    pub parameters: Value,
    pub result: Value,
    pub wall_time: f64,
}

pub fn now_rfc3339() -> String {
    humantime::format_rfc3339_seconds(SystemTime::now()).to_string()
}

pub fn append_ledger(path: &std::path::Path, record: &RunRecord<'_>) -> io::Result<()> {
    let mut line = serde_json::to_string(record)?;
    line.push('\n');
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    f.write_all(line.as_bytes())
}
