//! Project-level records: schema, parsing and synthetic corpora.
//!
//! A [`ProjectTable`] is the only input every estimator consumes. Records are
//! validated on the way in; anything violating the record invariants lands in
//! [`ProjectTable::row_errors`] instead of the table.

mod parse;
mod synth;

pub use parse::{parse_projects, write_csv, write_jsonl, Format, ParseOptions, CSV_HEADER};
pub use synth::{
    generate_factorial, generate_synthetic, Assignment, FactorialConfig, GroundTruth,
    SynthConfig, SyntheticCorpus, TrendShift, PLATFORM_OCCUPATIONS,
};

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

/// One completed freelance project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectRecord {
    pub project_id: String,
    pub worker_id: String,
    pub year: i32,
    pub hourly_wage: f64,
    pub occupation: String,
    pub worker_experience: u32,
    /// Normalized slugs, sorted and free of duplicates.
    pub skills: Vec<String>,
}

impl ProjectRecord {
    pub fn has_skill(&self, slug: &str) -> bool {
        self.skills.binary_search_by(|s| s.as_str().cmp(slug)).is_ok()
    }
}

/// A rejected input row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RowError {
    /// 1-based line number in the source (the CSV header is line 1).
    pub line: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ProjectTable {
    pub records: Vec<ProjectRecord>,
    pub provenance: String,
    pub row_errors: Vec<RowError>,
}

impl ProjectTable {
    /// Builds a table from records that are already known to be valid.
    ///
    /// Skill lists are normalized; duplicate project ids are an error.
    pub fn from_records(
        provenance: impl Into<String>,
        records: Vec<ProjectRecord>,
    ) -> crate::Result<Self> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(records.len());
        for mut r in records {
            if !seen.insert(r.project_id.clone()) {
                return Err(crate::Error::Config(format!(
                    "duplicate project_id `{}`",
                    r.project_id
                )));
            }
            r.skills = normalize_skill_set(r.skills.iter().map(String::as_str));
            if let Some(reason) = violation(&r, None) {
                return Err(crate::Error::Config(format!("{}: {reason}", r.project_id)));
            }
            out.push(r);
        }
        Ok(Self {
            records: out,
            provenance: provenance.into(),
            row_errors: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Sub-table of the records satisfying `keep`, order preserved.
    pub fn filter(&self, keep: impl Fn(&ProjectRecord) -> bool) -> ProjectTable {
        ProjectTable {
            records: self.records.iter().filter(|r| keep(r)).cloned().collect(),
            provenance: self.provenance.clone(),
            row_errors: Vec::new(),
        }
    }

    /// Records whose year falls in `[start, end]`.
    pub fn window(&self, start: i32, end: i32) -> ProjectTable {
        self.filter(|r| r.year >= start && r.year <= end)
    }
}

/// Lowercases a skill label and joins whitespace-separated words with `-`.
pub fn normalize_slug(raw: &str) -> String {
    raw.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join("-")
}

pub(crate) fn normalize_skill_set<'a>(raw: impl IntoIterator<Item = &'a str>) -> Vec<String> {
    let mut skills: Vec<String> = raw
        .into_iter()
        .map(normalize_slug)
        .filter(|s| !s.is_empty())
        .collect();
    skills.sort();
    skills.dedup();
    skills
}

/// First invariant the record violates, if any.
pub(crate) fn violation(r: &ProjectRecord, years: Option<(i32, i32)>) -> Option<String> {
    if r.project_id.is_empty() {
        return Some("empty project_id".into());
    }
    if r.worker_id.is_empty() {
        return Some("empty worker_id".into());
    }
    if !r.hourly_wage.is_finite() || r.hourly_wage <= 0.0 {
        return Some("non-positive wage".into());
    }
    if let Some((lo, hi)) = years {
        if r.year < lo || r.year > hi {
            return Some(format!("year {} outside {lo}-{hi}", r.year));
        }
    }
    if r.skills.is_empty() {
        return Some("empty skill set".into());
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_lowercased_and_hyphenated() {
        assert_eq!(normalize_slug("Intellectual Property  Law"), "intellectual-property-law");
        assert_eq!(normalize_slug("  python "), "python");
        assert_eq!(normalize_slug("C++"), "c++");
    }

    #[test]
    fn skill_sets_are_deduplicated() {
        let s = normalize_skill_set(["Python", "python", "SQL", ""]);
        assert_eq!(s, vec!["python".to_string(), "sql".to_string()]);
    }

    #[test]
    fn from_records_rejects_duplicate_ids() {
        let r = ProjectRecord {
            project_id: "p1".into(),
            worker_id: "w1".into(),
            year: 2019,
            hourly_wage: 10.0,
            occupation: "Legal".into(),
            worker_experience: 0,
            skills: vec!["a".into()],
        };
        assert!(ProjectTable::from_records("t", vec![r.clone(), r]).is_err());
    }
}
