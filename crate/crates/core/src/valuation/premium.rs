use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::ProjectTable;
use crate::skillgraph::compute_skill_stats;
use crate::{Error, Result};

/// Mean-wage premium of a skill.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillPremium {
    pub skill: String,
    /// `mean_with / mean_without - 1`, as a fraction (1.5 means +150%).
    pub premium: f64,
    pub n_with: usize,
    pub n_without: usize,
    pub mean_with: f64,
    pub mean_without: f64,
}

impl SkillPremium {
    pub fn percent(&self) -> f64 {
        100.0 * self.premium
    }
}

/// Ratio of the mean hourly wage of projects requiring `skill` to the mean
/// of projects that do not, minus one. Means are unweighted over projects
/// and accumulated in table order.
pub fn premium(skill: &str, projects: &ProjectTable) -> Result<SkillPremium> {
    let (mut sum_with, mut n_with) = (0.0, 0usize);
    let (mut sum_without, mut n_without) = (0.0, 0usize);
    for r in &projects.records {
        if r.has_skill(skill) {
            sum_with += r.hourly_wage;
            n_with += 1;
        } else {
            sum_without += r.hourly_wage;
            n_without += 1;
        }
    }
    if n_with == 0 {
        return Err(Error::UnknownSkill(skill.to_string()));
    }
    if n_without == 0 {
        return Err(Error::NoComplementSet(skill.to_string()));
    }
    let mean_with = sum_with / n_with as f64;
    let mean_without = sum_without / n_without as f64;
    Ok(SkillPremium {
        skill: skill.to_string(),
        premium: mean_with / mean_without - 1.0,
        n_with,
        n_without,
        mean_with,
        mean_without,
    })
}

/// [`premium`] for every skill requested by at least `min_projects`
/// projects. Skills whose premium is undefined are skipped with a warning.
pub fn premium_all(projects: &ProjectTable, min_projects: usize) -> BTreeMap<String, SkillPremium> {
    let skills: Vec<String> = compute_skill_stats(projects)
        .into_values()
        .filter(|s| s.demand >= min_projects)
        .map(|s| s.skill)
        .collect();
    skills
        .par_iter()
        .filter_map(|s| match premium(s, projects) {
            Ok(p) => Some((s.clone(), p)),
            Err(e) => {
                tracing::warn!(skill = %s, "premium skipped: {e}");
                None
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::ingest::ProjectRecord;

    fn table(rows: &[(f64, &[&str])]) -> ProjectTable {
        let records = rows
            .iter()
            .enumerate()
            .map(|(i, (wage, skills))| ProjectRecord {
                project_id: format!("p{i}"),
                worker_id: format!("w{i}"),
                year: 2019,
                hourly_wage: *wage,
                occupation: "Writing".into(),
                worker_experience: 0,
                skills: skills.iter().map(|s| s.to_string()).collect(),
            })
            .collect();
        ProjectTable::from_records("test", records).unwrap()
    }

    #[test]
    fn three_project_example() {
        let t = table(&[(20.0, &["a"]), (30.0, &["a", "b"]), (10.0, &["b"])]);
        let p = premium("a", &t).unwrap();
        assert_eq!(p.mean_with, 25.0);
        assert_eq!(p.mean_without, 10.0);
        assert_eq!(p.premium, 1.5);
        assert_eq!((p.n_with, p.n_without), (2, 1));
    }

    #[test]
    fn equal_wages_give_zero_premium() {
        let t = table(&[(12.0, &["a"]), (12.0, &["a", "b"]), (12.0, &["b", "c"])]);
        for p in premium_all(&t, 1).values() {
            assert_eq!(p.premium, 0.0);
        }
    }

    #[test]
    fn undefined_premia() {
        let t = table(&[(20.0, &["a"]), (30.0, &["a", "b"])]);
        assert!(matches!(premium("a", &t), Err(Error::NoComplementSet(_))));
        assert!(matches!(premium("zzz", &t), Err(Error::UnknownSkill(_))));
        let all = premium_all(&t, 1);
        assert!(!all.contains_key("a"));
        assert!(all.contains_key("b"));
    }

    #[test]
    fn threshold_excludes_rare_skills() {
        let t = table(&[(20.0, &["a", "rare"]), (30.0, &["a", "b"]), (10.0, &["b"]), (11.0, &["c"])]);
        let all = premium_all(&t, 2);
        assert_eq!(all.keys().cloned().collect::<Vec<_>>(), vec!["a", "b"]);
        assert_eq!(all["a"], premium("a", &t).unwrap());
    }

    proptest! {
        #[test]
        fn invariant_under_wage_rescaling(
            rows in prop::collection::vec((1.0f64..100.0, prop::collection::btree_set(0usize..4, 1..3)), 3..30),
            scale in 0.1f64..50.0
        ) {
            let mk = |k: f64| {
                let records = rows.iter().enumerate().map(|(i, (w, s))| ProjectRecord {
                    project_id: format!("p{i}"), worker_id: "w".into(), year: 2019,
                    hourly_wage: w * k, occupation: "x".into(), worker_experience: 0,
                    skills: s.iter().map(|v| format!("s{v}")).collect(),
                }).collect();
                ProjectTable::from_records("t", records).unwrap()
            };
            let (a, b) = (premium_all(&mk(1.0), 1), premium_all(&mk(scale), 1));
            prop_assert_eq!(a.len(), b.len());
            for (k, p) in &a {
                prop_assert!((p.premium - b[k].premium).abs() < 1e-12 * (1.0 + p.premium.abs()));
            }
        }
    }
}
