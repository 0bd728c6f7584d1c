use std::collections::HashSet;
use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{normalize_skill_set, violation, ProjectRecord, ProjectTable, RowError};
use crate::{Error, Result};

pub const CSV_HEADER: [&str; 7] = [
    "project_id",
    "worker_id",
    "year",
    "hourly_wage",
    "occupation",
    "worker_experience",
    "skills",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Jsonl,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "jsonl" | "ndjson" => Ok(Format::Jsonl),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseOptions {
    /// Inclusive range of accepted years.
    pub years: (i32, i32),
    /// Fraction of rejected rows above which the whole input is refused.
    pub max_reject_fraction: f64,
    pub provenance: String,
}

impl Default for ParseOptions {
    fn default() -> Self {
        Self {
            years: (2014, 2021),
            max_reject_fraction: 0.5,
            provenance: "<stream>".into(),
        }
    }
}

#[derive(Deserialize)]
struct JsonRow {
    project_id: String,
    worker_id: String,
    year: i64,
    hourly_wage: f64,
    occupation: String,
    worker_experience: i64,
    skills: Vec<String>,
}

#[derive(Serialize)]
struct JsonRowOut<'a> {
    project_id: &'a str,
    worker_id: &'a str,
    year: i32,
    hourly_wage: f64,
    occupation: &'a str,
    worker_experience: u32,
    skills: &'a [String],
}

/// Parses a CSV or JSONL project stream.
///
/// Invalid rows are collected in `row_errors`; the call only fails outright
/// on unreadable input, a bad header, or when more than
/// `max_reject_fraction` of the rows are rejected.
pub fn parse_projects<R: Read>(
    mut source: R,
    format: Format,
    opts: &ParseOptions,
) -> Result<ProjectTable> {
    let mut bytes = Vec::new();
    source.read_to_end(&mut bytes)?;
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding(e.to_string()))?;

    let rows = match format {
        Format::Csv => csv_rows(&text)?,
        Format::Jsonl => jsonl_rows(&text),
    };

    let total = rows.len();
    let mut records = Vec::with_capacity(total);
    let mut row_errors = Vec::new();
    let mut ids = HashSet::new();
    for (line, row) in rows {
        let checked = row.and_then(|r| match violation(&r, Some(opts.years)) {
            Some(reason) => Err(reason),
            None if !ids.insert(r.project_id.clone()) => {
                Err(format!("duplicate project_id `{}`", r.project_id))
            }
            None => Ok(r),
        });
        match checked {
            Ok(r) => records.push(r),
            Err(reason) => row_errors.push(RowError { line, reason }),
        }
    }

    if total > 0 && row_errors.len() as f64 / total as f64 > opts.max_reject_fraction {
        return Err(Error::CorruptInput {
            rejected: row_errors.len(),
            total,
            threshold: opts.max_reject_fraction,
        });
    }
    if !row_errors.is_empty() {
        tracing::warn!(rejected = row_errors.len(), total, "rows rejected during parse");
    }

    Ok(ProjectTable {
        records,
        provenance: opts.provenance.clone(),
        row_errors,
    })
}

type Row = (usize, std::result::Result<ProjectRecord, String>);

fn csv_rows(text: &str) -> Result<Vec<Row>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let header = rdr.headers()?.clone();
    let mut index = [usize::MAX; 7];
    for (pos, name) in header.iter().enumerate() {
        let name = name.trim();
        match CSV_HEADER.iter().position(|h| *h == name) {
            Some(slot) if index[slot] == usize::MAX => index[slot] = pos,
            Some(_) => return Err(Error::Header(format!("duplicate column `{name}`"))),
            None => return Err(Error::Header(format!("unexpected column `{name}`"))),
        }
    }
    if let Some(missing) = index.iter().position(|&i| i == usize::MAX) {
        return Err(Error::Header(format!("missing column `{}`", CSV_HEADER[missing])));
    }

    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let field = |slot: usize| rec.get(index[slot]).map(str::trim);
        let parsed = (|| {
            if rec.len() != header.len() {
                return Err(format!("expected {} fields, found {}", header.len(), rec.len()));
            }
            let year = field(2)
                .unwrap_or_default()
                .parse::<i32>()
                .map_err(|_| "invalid year".to_string())?;
            let hourly_wage = field(3)
                .unwrap_or_default()
                .parse::<f64>()
                .map_err(|_| "invalid hourly_wage".to_string())?;
            let worker_experience = parse_experience(
                field(5)
                    .unwrap_or_default()
                    .parse::<i64>()
                    .map_err(|_| "invalid worker_experience".to_string())?,
            )?;
            Ok(ProjectRecord {
                project_id: field(0).unwrap_or_default().to_string(),
                worker_id: field(1).unwrap_or_default().to_string(),
                year,
                hourly_wage,
                occupation: field(4).unwrap_or_default().to_string(),
                worker_experience,
                skills: normalize_skill_set(field(6).unwrap_or_default().split(';')),
            })
        })();
        rows.push((line, parsed));
    }
    Ok(rows)
}

fn jsonl_rows(text: &str) -> Vec<Row> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let parsed = serde_json::from_str::<JsonRow>(l)
                .map_err(|e| format!("invalid json: {e}"))
                .and_then(|r| {
                    Ok(ProjectRecord {
                        project_id: r.project_id,
                        worker_id: r.worker_id,
                        year: i32::try_from(r.year).map_err(|_| "invalid year".to_string())?,
                        hourly_wage: r.hourly_wage,
                        occupation: r.occupation,
                        worker_experience: parse_experience(r.worker_experience)?,
                        skills: normalize_skill_set(r.skills.iter().map(String::as_str)),
                    })
                });
            (i + 1, parsed)
        })
        .collect()
}

fn parse_experience(v: i64) -> std::result::Result<u32, String> {
    u32::try_from(v).map_err(|_| "negative worker_experience".to_string())
}

/// Writes the table in the CSV interchange format (skills `;`-joined).
pub fn write_csv<W: Write>(table: &ProjectTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in &table.records {
        w.write_record([
            r.project_id.as_str(),
            r.worker_id.as_str(),
            &r.year.to_string(),
            &r.hourly_wage.to_string(),
            r.occupation.as_str(),
            &r.worker_experience.to_string(),
            &r.skills.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes one JSON object per record.
pub fn write_jsonl<W: Write>(table: &ProjectTable, mut out: W) -> Result<()> {
    for r in &table.records {
        let row = JsonRowOut {
            project_id: &r.project_id,
            worker_id: &r.worker_id,
            year: r.year,
            hourly_wage: r.hourly_wage,
            occupation: &r.occupation,
            worker_experience: r.worker_experience,
            skills: &r.skills,
        };
        serde_json::to_writer(&mut out, &row)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
