use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ols::{ols_fit, Design};
use crate::ingest::ProjectTable;
use crate::skillgraph::compute_skill_stats;
use crate::{Error, Result};

/// Controls of the per-skill log-wage regression.
///
/// The model is `ln(wage) = b0 + year dummies + occupation dummies +
/// b3 * experience + b4 * skill`. Each dummy set gets one reference level:
/// the configured one when it occurs in the data, otherwise the earliest year
/// and the most frequent occupation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriceSpec {
    pub reference_year: i32,
    pub reference_occupation: String,
}

impl Default for PriceSpec {
    fn default() -> Self {
        Self {
            reference_year: 2014,
            reference_occupation: "Web, Mobile & Software Dev".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillPrice {
    pub skill: String,
    /// Log-wage coefficient of the skill dummy.
    pub coefficient: f64,
    pub std_error: f64,
    /// `exp(coefficient)`: wage multiplier attached to the skill.
    pub factor: f64,
    /// `(factor - 1) * baseline_wage`, in USD/hour.
    pub additive: f64,
    /// Mean hourly wage over all projects.
    pub baseline_wage: f64,
    pub n_obs: usize,
}

/// Control columns shared by every skill regression on one table.
#[derive(Debug, Clone)]
pub struct ControlDesign {
    columns: Vec<(String, Vec<f64>)>,
    log_wage: Vec<f64>,
    baseline_wage: f64,
}

impl ControlDesign {
    pub fn new(projects: &ProjectTable, spec: &PriceSpec) -> Result<Self> {
        if projects.is_empty() {
            return Err(Error::InsufficientData("empty project table".into()));
        }
        let n = projects.len();
        let mut years: Vec<i32> = projects.records.iter().map(|r| r.year).collect();
        years.sort_unstable();
        years.dedup();
        let ref_year = if years.contains(&spec.reference_year) {
            spec.reference_year
        } else {
            years[0]
        };

        let mut occ_counts: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &projects.records {
            *occ_counts.entry(&r.occupation).or_default() += 1;
        }
        let ref_occ = if occ_counts.contains_key(spec.reference_occupation.as_str()) {
            spec.reference_occupation.clone()
        } else {
            // most frequent, ties to the alphabetically first
            let mut best = ("", 0);
            for (&o, &c) in &occ_counts {
                if c > best.1 {
                    best = (o, c);
                }
            }
            best.0.to_string()
        };

        let mut columns = vec![("(intercept)".to_string(), vec![1.0; n])];
        for &y in years.iter().filter(|&&y| y != ref_year) {
            let col = projects.records.iter().map(|r| f64::from(u8::from(r.year == y))).collect();
            columns.push((format!("year[{y}]"), col));
        }
        for &o in occ_counts.keys().filter(|&&o| o != ref_occ) {
            let col = projects.records.iter().map(|r| f64::from(u8::from(r.occupation == o))).collect();
            columns.push((format!("occupation[{o}]"), col));
        }
        columns.push((
            "experience".to_string(),
            projects.records.iter().map(|r| f64::from(r.worker_experience)).collect(),
        ));

        let baseline_wage = projects.records.iter().map(|r| r.hourly_wage).sum::<f64>() / n as f64;
        Ok(Self {
            columns,
            log_wage: projects.records.iter().map(|r| r.hourly_wage.ln()).collect(),
            baseline_wage,
        })
    }

    pub fn term_names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.0.as_str()).collect()
    }

    fn price(&self, skill: &str, projects: &ProjectTable) -> Result<SkillPrice> {
        let dummy: Vec<f64> = projects.records.iter().map(|r| f64::from(u8::from(r.has_skill(skill)))).collect();
        if !dummy.contains(&1.0) {
            return Err(Error::UnknownSkill(skill.to_string()));
        }
        let term = format!("skill[{skill}]");
        let mut columns = self.columns.clone();
        columns.push((term.clone(), dummy));
        let fit = ols_fit(&Design::from_columns(columns)?, &self.log_wage)?;
        let (Some(coefficient), Some(std_error)) = (fit.coefficient(&term), fit.std_error(&term)) else {
            return Err(Error::PriceUnidentifiable(skill.to_string()));
        };
        let factor = coefficient.exp();
        Ok(SkillPrice {
            skill: skill.to_string(),
            coefficient,
            std_error,
            factor,
            additive: (factor - 1.0) * self.baseline_wage,
            baseline_wage: self.baseline_wage,
            n_obs: fit.n_obs,
        })
    }
}

/// Regression-adjusted price of `skill`.
pub fn price(skill: &str, projects: &ProjectTable, spec: &PriceSpec) -> Result<SkillPrice> {
    ControlDesign::new(projects, spec)?.price(skill, projects)
}

/// [`price`] for every skill requested by at least `min_projects` projects.
/// Unidentifiable prices are skipped with a warning.
pub fn price_all(
    projects: &ProjectTable,
    min_projects: usize,
    spec: &PriceSpec,
) -> Result<BTreeMap<String, SkillPrice>> {
    let controls = ControlDesign::new(projects, spec)?;
    let skills: Vec<String> = compute_skill_stats(projects)
        .into_values()
        .filter(|s| s.demand >= min_projects)
        .map(|s| s.skill)
        .collect();
    Ok(skills
        .par_iter()
        .filter_map(|s| match controls.price(s, projects) {
            Ok(p) => Some((s.clone(), p)),
            Err(e) => {
                tracing::warn!(skill = %s, "price skipped: {e}");
                None
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{generate_factorial, Assignment, FactorialConfig, ProjectRecord};

    fn factorial(effects: &[(&str, f64)], noise: f64, assignment: Assignment) -> ProjectTable {
        let cfg = FactorialConfig {
            planted_skill_effects: effects.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            noise_sigma: noise,
            assignment,
            seed: 3,
            ..Default::default()
        };
        generate_factorial(&cfg).unwrap().table
    }

    #[test]
    fn noiseless_coefficient_is_recovered() {
        let t = factorial(&[("a", 0.3), ("b", -0.2), ("c", 0.0)], 0.0, Assignment::Balanced { replicates: 1 });
        let spec = PriceSpec::default();
        let a = price("a", &t, &spec).unwrap();
        assert!((a.coefficient - 0.3).abs() < 1e-10);
        assert!((a.factor - 1.349_858_807_576_003).abs() < 1e-9);
        let c = price("c", &t, &spec).unwrap();
        assert!(c.coefficient.abs() < 1e-10);
        assert!((c.factor - 1.0).abs() < 1e-10);
        assert!(c.additive.abs() < 1e-8);
    }

    #[test]
    fn factor_invariant_under_wage_rescaling() {
        let t = factorial(&[("a", 0.3), ("b", 0.1)], 0.1, Assignment::Bernoulli { n_projects: 400, probability: 0.4 });
        let mut scaled = t.clone();
        for r in &mut scaled.records {
            r.hourly_wage *= 3.7;
        }
        let spec = PriceSpec::default();
        let (p, q) = (price("a", &t, &spec).unwrap(), price("a", &scaled, &spec).unwrap());
        assert!((p.factor - q.factor).abs() < 1e-10);
        assert!((q.additive - 3.7 * p.additive).abs() < 1e-8);
    }

    #[test]
    fn skill_collinear_with_occupation_is_unidentifiable() {
        let records = (0..12)
            .map(|i| ProjectRecord {
                project_id: format!("p{i}"),
                worker_id: "w".into(),
                year: 2015 + i % 3,
                hourly_wage: 10.0 + i as f64,
                occupation: if i % 2 == 0 { "Legal".into() } else { "Writing".into() },
                worker_experience: i as u32,
                skills: vec![if i % 2 == 0 { "contract-law".into() } else { "copywriting".into() }],
            })
            .collect();
        let t = ProjectTable::from_records("t", records).unwrap();
        assert!(matches!(
            price("contract-law", &t, &PriceSpec::default()),
            Err(Error::PriceUnidentifiable(_))
        ));
        assert!(price_all(&t, 1, &PriceSpec::default()).unwrap().is_empty());
    }

    #[test]
    fn reference_levels_fall_back_to_data() {
        let t = factorial(&[("a", 0.3)], 0.0, Assignment::Balanced { replicates: 1 });
        let spec = PriceSpec { reference_year: 1990, reference_occupation: "Nope".into() };
        let names: Vec<String> = ControlDesign::new(&t, &spec).unwrap().term_names().iter().map(|s| s.to_string()).collect();
        assert!(!names.contains(&"year[2014]".to_string()));
        assert!(names.contains(&"year[2015]".to_string()));
        assert_eq!(names.iter().filter(|n| n.starts_with("occupation[")).count(), 2);
    }
}
