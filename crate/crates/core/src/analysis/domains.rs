//! Worker domains and the domain × community premium matrix.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ingest::ProjectTable;
use crate::skillgraph::CommunityPartition;
use crate::valuation::premium;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkerDomain {
    pub worker_id: String,
    pub domain: usize,
    /// Share of the worker's distinct partitioned skills in `domain`.
    pub share: f64,
    pub n_skills: usize,
}

/// The community holding the largest number of `skills`, ties to the lowest
/// id, with its share. Skills outside the partition are ignored; `None` when
/// none is partitioned.
pub fn infer_domain<'a>(
    skills: impl IntoIterator<Item = &'a str>,
    partition: &CommunityPartition,
) -> Option<(usize, f64, usize)> {
    let distinct: BTreeSet<&str> = skills.into_iter().collect();
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for s in &distinct {
        if let Some(c) = partition.community_of(s) {
            *counts.entry(c).or_default() += 1;
        }
    }
    let total: usize = counts.values().sum();
    // BTreeMap iterates ids ascending, so the first maximum is the lowest id.
    let (&domain, &best) = counts
        .iter()
        .fold(None, |acc: Option<(&usize, &usize)>, (c, n)| match acc {
            Some((_, m)) if m >= n => acc,
            _ => Some((c, n)),
        })?;
    Some((domain, best as f64 / total as f64, total))
}

/// Attributes every worker to the community supplying most of their
/// distinct skills across all their projects.
pub fn assign_worker_domains(projects: &ProjectTable, partition: &CommunityPartition) -> Vec<WorkerDomain> {
    let mut skills: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    let mut unpartitioned: BTreeSet<&str> = BTreeSet::new();
    for r in &projects.records {
        let set = skills.entry(r.worker_id.as_str()).or_default();
        for s in &r.skills {
            set.insert(s);
            if partition.community_of(s).is_none() {
                unpartitioned.insert(s);
            }
        }
    }
    if !unpartitioned.is_empty() {
        tracing::warn!(count = unpartitioned.len(), "skills outside the partition ignored");
    }
    skills
        .into_iter()
        .filter_map(|(worker, set)| match infer_domain(set.iter().copied(), partition) {
            Some((domain, share, n_skills)) => Some(WorkerDomain {
                worker_id: worker.to_string(),
                domain,
                share,
                n_skills,
            }),
            None => {
                tracing::warn!(worker, "worker has no partitioned skills; excluded");
                None
            }
        })
        .collect()
}

/// Fraction of workers whose domain share is at least `threshold`.
pub fn concentration_share(domains: &[WorkerDomain], threshold: f64) -> f64 {
    if domains.is_empty() {
        return 0.0;
    }
    domains.iter().filter(|d| d.share >= threshold).count() as f64 / domains.len() as f64
}

/// Which projects form the comparison group of a domain-restricted premium.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComplementScope {
    /// Projects of the same domain without the skill.
    #[default]
    Domain,
    /// All projects without the skill.
    Global,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainPremiumMatrix {
    /// Worker domains, ascending.
    pub rows: Vec<usize>,
    /// Skill communities, ascending.
    pub cols: Vec<usize>,
    /// `cells[r][c]`; `None` when no skill of the community reaches
    /// `min_obs` projects within the domain.
    pub cells: Vec<Vec<Option<f64>>>,
    pub min_obs: usize,
    pub scope: ComplementScope,
    /// Per domain, the skill premia that entered the cells.
    pub skill_premia: BTreeMap<usize, BTreeMap<String, f64>>,
}

impl DomainPremiumMatrix {
    pub fn cell(&self, domain: usize, community: usize) -> Option<f64> {
        let r = self.rows.iter().position(|&d| d == domain)?;
        let c = self.cols.iter().position(|&d| d == community)?;
        self.cells[r][c]
    }

    /// Premium of `skill` among projects of `domain` workers, if it passed
    /// the threshold.
    pub fn skill_premium(&self, domain: usize, skill: &str) -> Option<f64> {
        self.skill_premia.get(&domain)?.get(skill).copied()
    }
}

/// For each worker domain, the premium of every skill over that domain's
/// projects; a cell is the demand-weighted mean of those premia over the
/// skills of one community. Skills used in fewer than `min_obs` of the
/// domain's projects are left out.
pub fn domain_premium_matrix(
    projects: &ProjectTable,
    domains: &[WorkerDomain],
    partition: &CommunityPartition,
    min_obs: usize,
    scope: ComplementScope,
) -> DomainPremiumMatrix {
    let domain_of: BTreeMap<&str, usize> = domains.iter().map(|d| (d.worker_id.as_str(), d.domain)).collect();
    let rows: Vec<usize> = domain_of.values().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let cols = partition.community_ids();

    let mut cells = Vec::with_capacity(rows.len());
    let mut skill_premia = BTreeMap::new();
    for &d in &rows {
        let sub = projects.filter(|r| domain_of.get(r.worker_id.as_str()) == Some(&d));
        let mut demand: BTreeMap<&str, usize> = BTreeMap::new();
        for r in &sub.records {
            for s in &r.skills {
                *demand.entry(s.as_str()).or_default() += 1;
            }
        }
        // community -> (weighted sum, weight)
        let mut acc: BTreeMap<usize, (f64, f64)> = BTreeMap::new();
        let mut kept = BTreeMap::new();
        for (&s, &n) in &demand {
            let Some(c) = partition.community_of(s) else { continue };
            if n < min_obs {
                continue;
            }
            let value = match scope {
                ComplementScope::Domain => premium(s, &sub).map(|p| p.premium),
                ComplementScope::Global => restricted_with_global_complement(s, &sub, projects),
            };
            let Ok(v) = value else { continue };
            let e = acc.entry(c).or_insert((0.0, 0.0));
            e.0 += n as f64 * v;
            e.1 += n as f64;
            kept.insert(s.to_string(), v);
        }
        cells.push(
            cols.iter()
                .map(|c| acc.get(c).map(|&(sum, w)| sum / w))
                .collect(),
        );
        skill_premia.insert(d, kept);
    }
    DomainPremiumMatrix { rows, cols, cells, min_obs, scope, skill_premia }
}

fn restricted_with_global_complement(skill: &str, with: &ProjectTable, all: &ProjectTable) -> crate::Result<f64> {
    let with_skill: Vec<f64> = with.records.iter().filter(|r| r.has_skill(skill)).map(|r| r.hourly_wage).collect();
    let without: Vec<f64> = all.records.iter().filter(|r| !r.has_skill(skill)).map(|r| r.hourly_wage).collect();
    if with_skill.is_empty() {
        return Err(crate::Error::UnknownSkill(skill.to_string()));
    }
    if without.is_empty() {
        return Err(crate::Error::NoComplementSet(skill.to_string()));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Ok(mean(&with_skill) / mean(&without) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::ProjectRecord;

    fn partition(pairs: &[(&str, usize)]) -> CommunityPartition {
        CommunityPartition {
            assignment: pairs.iter().map(|(s, c)| (s.to_string(), *c)).collect(),
            labels: BTreeMap::new(),
            modularity: 0.0,
            seed: 0,
            resolution: 1.0,
        }
    }

    fn record(id: usize, worker: &str, wage: f64, skills: &[&str]) -> ProjectRecord {
        ProjectRecord {
            project_id: format!("p{id}"),
            worker_id: worker.into(),
            year: 2018,
            hourly_wage: wage,
            occupation: "Writing".into(),
            worker_experience: 0,
            skills: skills.iter().map(|s| s.to_string()).collect(),
        }
    }

    #[test]
    fn majority_and_tie_break() {
        let p = partition(&[("a", 1), ("b", 1), ("c", 2), ("d", 2)]);
        assert_eq!(infer_domain(["a", "b", "c"], &p), Some((1, 2.0 / 3.0, 3)));
        assert_eq!(infer_domain(["c", "d", "a", "b"], &p), Some((1, 0.5, 4)));
        assert_eq!(infer_domain(["zzz"], &p), None);
    }

    #[test]
    fn duplicated_projects_do_not_change_domains() {
        let p = partition(&[("a", 0), ("b", 1), ("c", 1)]);
        let base = vec![record(0, "w", 10.0, &["a", "b"]), record(1, "w", 10.0, &["c"])];
        let mut doubled = base.clone();
        doubled.extend(base.iter().enumerate().map(|(i, r)| ProjectRecord { project_id: format!("q{i}"), ..r.clone() }));
        let t1 = ProjectTable::from_records("t", base).unwrap();
        let t2 = ProjectTable::from_records("t", doubled).unwrap();
        assert_eq!(assign_worker_domains(&t1, &p), assign_worker_domains(&t2, &p));
        assert_eq!(assign_worker_domains(&t1, &p)[0].domain, 1);
    }

    #[test]
    fn single_domain_matrix_equals_weighted_global_premia() {
        let p = partition(&[("a", 0), ("b", 0), ("c", 1)]);
        let records = vec![
            record(0, "w1", 10.0, &["a"]),
            record(1, "w1", 20.0, &["a", "b"]),
            record(2, "w2", 30.0, &["b", "a"]),
            record(3, "w2", 15.0, &["c", "a"]),
            record(4, "w1", 12.0, &["b"]),
        ];
        let t = ProjectTable::from_records("t", records).unwrap();
        let domains = assign_worker_domains(&t, &p);
        assert!(domains.iter().all(|d| d.domain == 0));
        let m = domain_premium_matrix(&t, &domains, &p, 1, ComplementScope::Domain);
        assert_eq!(m.rows, vec![0]);
        let pa = premium("a", &t).unwrap().premium;
        let pb = premium("b", &t).unwrap().premium;
        let pc = premium("c", &t).unwrap().premium;
        let expected = (4.0 * pa + 3.0 * pb) / 7.0;
        assert!((m.cell(0, 0).unwrap() - expected).abs() < 1e-12);
        assert_eq!(m.cell(0, 1), Some(pc));
        let strict = domain_premium_matrix(&t, &domains, &p, 2, ComplementScope::Domain);
        assert_eq!(strict.cell(0, 1), None);
    }
}
