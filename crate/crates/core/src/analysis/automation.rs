//! Skill-level automation risk from occupation-level probabilities.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::ingest::ProjectTable;
use crate::{Error, Result};

/// Occupation → probability of computerisation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AutomationTable {
    pub probabilities: BTreeMap<String, f64>,
    pub provenance: String,
}

impl AutomationTable {
    pub fn new(probabilities: BTreeMap<String, f64>, provenance: impl Into<String>) -> Result<Self> {
        if let Some((occ, p)) = probabilities.iter().find(|(_, p)| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Config(format!("probability {p} for `{occ}` outside [0, 1]")));
        }
        Ok(Self { probabilities, provenance: provenance.into() })
    }

    /// Reads `occupation,probability` CSV.
    pub fn from_csv(reader: impl Read, provenance: impl Into<String>) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            occupation: String,
            probability: f64,
        }
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut map = BTreeMap::new();
        for (i, row) in rdr.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::Config(format!("automation table line {}: {e}", i + 2)))?;
            if map.insert(row.occupation.clone(), row.probability).is_some() {
                return Err(Error::Config(format!("occupation `{}` listed twice", row.occupation)));
            }
        }
        Self::new(map, provenance)
    }

    pub fn get(&self, occupation: &str) -> Option<f64> {
        self.probabilities.get(occupation).copied()
    }
}

/// How occupation probabilities are combined for a skill.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AutomationFormula {
    /// Mean over occupations weighted by the share of the skill's projects
    /// listed under each.
    #[default]
    ShareWeighted,
    /// `sum_j prob_j / n_j`, with `n_j` the skill's project count under
    /// occupation `j`. Kept for comparison; not bounded by 1.
    PerOccupationCount,
}

/// Automation probability of `skill`.
pub fn automation_probability(
    skill: &str,
    projects: &ProjectTable,
    table: &AutomationTable,
    formula: AutomationFormula,
) -> Result<f64> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for r in projects.records.iter().filter(|r| r.has_skill(skill)) {
        *counts.entry(r.occupation.as_str()).or_default() += 1;
    }
    if counts.is_empty() {
        return Err(Error::UnknownSkill(skill.to_string()));
    }
    let total: usize = counts.values().sum();
    let mut out = 0.0;
    for (occ, n) in counts {
        let p = table.get(occ).ok_or_else(|| Error::UnknownOccupation(occ.to_string()))?;
        out += match formula {
            AutomationFormula::ShareWeighted => n as f64 / total as f64 * p,
            AutomationFormula::PerOccupationCount => p / n as f64,
        };
    }
    Ok(out)
}

/// [`automation_probability`] for each of `skills`.
pub fn automation_all<'a>(
    skills: impl IntoIterator<Item = &'a str>,
    projects: &ProjectTable,
    table: &AutomationTable,
    formula: AutomationFormula,
) -> Result<BTreeMap<String, f64>> {
    skills
        .into_iter()
        .map(|s| Ok((s.to_string(), automation_probability(s, projects, table, formula)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ProjectRecord;

    fn table(rows: &[(&str, &[&str])]) -> ProjectTable {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, (occ, skills))| ProjectRecord {
                project_id: format!("p{i}"),
                worker_id: "w".into(),
                year: 2016,
                hourly_wage: 10.0,
                occupation: occ.to_string(),
                worker_experience: 0,
                skills: skills.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        ProjectTable::from_records("t", records).unwrap()
    }

    fn probs(pairs: &[(&str, f64)]) -> AutomationTable {
        AutomationTable::new(pairs.iter().map(|(o, p)| (o.to_string(), *p)).collect(), "test").unwrap()
    }

    #[test]
    fn share_weighted_example() {
        let t = table(&[("A", &["x"]), ("A", &["x"]), ("A", &["x", "y"]), ("B", &["x"])]);
        let occ = probs(&[("A", 0.2), ("B", 0.6)]);
        let p = automation_probability("x", &t, &occ, AutomationFormula::ShareWeighted).unwrap();
        assert_eq!(p, 0.75 * 0.2 + 0.25 * 0.6);
        assert!((p - 0.30).abs() < 1e-15);
        assert_eq!(automation_probability("y", &t, &occ, AutomationFormula::ShareWeighted).unwrap(), 0.2);
        let literal = automation_probability("x", &t, &occ, AutomationFormula::PerOccupationCount).unwrap();
        assert!((literal - (0.2 / 3.0 + 0.6)).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        let t = table(&[("A", &["x"]), ("C", &["x"])]);
        let occ = probs(&[("A", 0.2)]);
        assert!(matches!(
            automation_probability("x", &t, &occ, AutomationFormula::ShareWeighted),
            Err(Error::UnknownOccupation(o)) if o == "C"
        ));
        assert!(matches!(
            automation_probability("nope", &t, &occ, AutomationFormula::ShareWeighted),
            Err(Error::UnknownSkill(_))
        ));
        assert!(AutomationTable::new([("A".to_string(), 1.5)].into(), "t").is_err());
    }

    #[test]
    fn csv_round() {
        let csv = "occupation,probability\nLegal,0.35\nWriting, 0.2\n";
        let t = AutomationTable::from_csv(csv.as_bytes(), "inline").unwrap();
        assert_eq!(t.get("Writing"), Some(0.2));
        assert!(AutomationTable::from_csv("occupation,probability\nLegal,x\n".as_bytes(), "bad").is_err());
    }
}
