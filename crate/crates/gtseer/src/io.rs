//! Check-in log parsing and model file IO.
//!
//! Log format: UTF-8, one check-in per line,
//! `user_id<TAB>poi_id<TAB>lat<TAB>lon<TAB>timestamp`, where the timestamp
//! is RFC 3339. Blank lines and lines starting with `#` are skipped.

use std::fs;
use std::path::Path;

use chrono::{DateTime, SecondsFormat};
use gtseer_core::model::codec::{self, ModelFile};
use gtseer_core::Checkin;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("line {line}: expected 5 tab-separated fields, found {found}")]
    FieldCount { line: usize, found: usize },
    #[error("line {line}: bad latitude {text:?}")]
    BadLat { line: usize, text: String },
    #[error("line {line}: bad longitude {text:?}")]
    BadLon { line: usize, text: String },
    #[error("line {line}: bad timestamp {text:?}")]
    BadTimestamp { line: usize, text: String },
    #[error("line {line}: empty {what} field")]
    EmptyField { line: usize, what: &'static str },
}

/// One parse failure, kept so lenient mode can report what it skipped.
pub struct ParseOutcome {
    pub checkins: Vec<Checkin>,
    pub skipped: Vec<LogError>,
}

fn parse_line(line_no: usize, line: &str) -> Result<Checkin, LogError> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 5 {
        return Err(LogError::FieldCount { line: line_no, found: fields.len() });
    }
    if fields[0].is_empty() {
        return Err(LogError::EmptyField { line: line_no, what: "user id" });
    }
    if fields[1].is_empty() {
        return Err(LogError::EmptyField { line: line_no, what: "poi id" });
    }
    let lat: f64 = fields[2]
        .parse()
        .map_err(|_| LogError::BadLat { line: line_no, text: fields[2].into() })?;
    let lon: f64 = fields[3]
        .parse()
        .map_err(|_| LogError::BadLon { line: line_no, text: fields[3].into() })?;
    let ts = DateTime::parse_from_rfc3339(fields[4])
        .map_err(|_| LogError::BadTimestamp { line: line_no, text: fields[4].into() })?
        .timestamp();
    Ok(Checkin {
        user_id: fields[0].to_string(),
        poi_id: fields[1].to_string(),
        timestamp: ts,
        lat,
        lon,
    })
}

/// Parses a log. In strict mode the first malformed line is an error; in
/// lenient mode malformed lines are collected in `skipped`.
pub fn parse_checkin_log(text: &str, strict: bool) -> Result<ParseOutcome, LogError> {
    let mut checkins = Vec::new();
    let mut skipped = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim_end_matches('\r');
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match parse_line(i + 1, line) {
            Ok(c) => checkins.push(c),
            Err(e) if strict => return Err(e),
            Err(e) => skipped.push(e),
        }
    }
    Ok(ParseOutcome { checkins, skipped })
}

pub fn read_checkin_log(path: &Path, strict: bool) -> anyhow::Result<ParseOutcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    Ok(parse_checkin_log(&text, strict)?)
}

pub fn format_checkin_log(checkins: &[Checkin]) -> String {
    let mut out = String::new();
    for c in checkins {
        let ts = DateTime::from_timestamp(c.timestamp, 0)
            .expect("timestamp in range")
            .to_rfc3339_opts(SecondsFormat::Secs, true);
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            c.user_id, c.poi_id, c.lat, c.lon, ts
        ));
    }
    out
}

pub fn write_checkin_log(path: &Path, checkins: &[Checkin]) -> anyhow::Result<()> {
    fs::write(path, format_checkin_log(checkins))
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

pub fn save_model(path: &Path, file: &ModelFile) -> anyhow::Result<()> {
    fs::write(path, codec::encode(file))
        .map_err(|e| anyhow::anyhow!("cannot write {}: {e}", path.display()))
}

pub fn load_model(path: &Path) -> anyhow::Result<ModelFile> {
    let bytes = fs::read(path)
        .map_err(|e| anyhow::anyhow!("cannot read {}: {e}", path.display()))?;
    codec::decode(&bytes).map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))
}
