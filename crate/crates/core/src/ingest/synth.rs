//! Seeded corpus generators with a known ground truth.
//!
//! [`generate_synthetic`] plants skill communities, community wage levels and
//! per-skill log-wage effects into a worker/project population.
//! [`generate_factorial`] produces a design in which skill dummies are
//! independent of each other and of the controls, so that every estimator has
//! a closed-form target.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{ProjectRecord, ProjectTable};
use crate::{Error, Result};

/// The twelve platform occupation categories used as controls in the price
/// regression.
pub const PLATFORM_OCCUPATIONS: [&str; 12] = [
    "Sales & Marketing",
    "Web, Mobile & Software Dev",
    "Writing",
    "Design & Creative",
    "Translation",
    "IT & Networking",
    "Data Science & Analytics",
    "Admin Support",
    "Customer Service",
    "Legal",
    "Accounting & Consulting",
    "Engineering & Architecture",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendShift {
    /// First year in which planted effects are scaled.
    pub from_year: i32,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_workers: usize,
    pub n_projects: usize,
    pub n_skills: usize,
    pub n_communities: usize,
    /// Multiplicative wage factor per community (by worker home community).
    /// Empty means 1.0 everywhere.
    pub community_wage_offsets: Vec<f64>,
    /// Log-wage effect per skill slug: a project carrying the skill earns
    /// `exp(effect)` times its counterfactual wage.
    pub planted_skill_effects: BTreeMap<String, f64>,
    /// Skills without an explicit effect draw one uniformly from this range;
    /// `None` leaves them at zero.
    pub effect_range: Option<(f64, f64)>,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Probability that a skill draw comes from the worker's home community.
    pub concentration: f64,
    pub skills_per_project: (usize, usize),
    pub years: (i32, i32),
    pub base_wage: f64,
    /// Log-wage effect of one prior project.
    pub experience_effect: f64,
    /// Multiplier on a skill's effect when the worker's home community is
    /// the skill's own community.
    pub same_domain_boost: f64,
    pub trend_shift: Option<TrendShift>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_workers: 60,
            n_projects: 600,
            n_skills: 40,
            n_communities: 4,
            community_wage_offsets: Vec::new(),
            planted_skill_effects: BTreeMap::new(),
            effect_range: Some((-0.2, 0.6)),
            noise_sigma: 0.1,
            seed: 7,
            concentration: 0.9,
            skills_per_project: (2, 4),
            years: (2014, 2021),
            base_wage: 30.0,
            experience_effect: 0.001,
            same_domain_boost: 1.0,
            trend_shift: None,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_workers == 0 || self.n_projects == 0 || self.n_skills == 0 || self.n_communities == 0
        {
            return bad("all counts must be at least 1");
        }
        if self.n_communities > self.n_skills {
            return bad("n_communities exceeds n_skills");
        }
        if self.n_projects < self.n_skills {
            return bad("n_projects must be at least n_skills so every skill is used");
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad("noise_sigma must be a finite non-negative number");
        }
        if !(0.0..=1.0).contains(&self.concentration) {
            return bad("concentration must lie in [0, 1]");
        }
        let (lo, hi) = self.skills_per_project;
        if lo == 0 || lo > hi {
            return bad("skills_per_project must satisfy 1 <= min <= max");
        }
        if self.years.0 > self.years.1 {
            return bad("empty year range");
        }
        if !(self.base_wage > 0.0) {
            return bad("base_wage must be positive");
        }
        if !self.community_wage_offsets.is_empty() {
            if self.community_wage_offsets.len() != self.n_communities {
                return bad("community_wage_offsets needs one factor per community");
            }
            if self.community_wage_offsets.iter().any(|f| !(*f > 0.0)) {
                return bad("community wage factors must be positive");
            }
        }
        if let Some((a, b)) = self.effect_range {
            if a > b {
                return bad("effect_range is empty");
            }
        }
        let known: BTreeSet<String> = (0..self.n_skills).map(|k| self.skill_slug(k)).collect();
        if let Some(s) = self.planted_skill_effects.keys().find(|s| !known.contains(*s)) {
            return Err(Error::Config(format!("planted effect for unknown skill `{s}`")));
        }
        Ok(())
    }

    /// Planted community of skill `k` (contiguous blocks).
    pub fn skill_community(&self, k: usize) -> usize {
        k * self.n_communities / self.n_skills
    }

    pub fn skill_slug(&self, k: usize) -> String {
        format!("c{}-skill-{k:03}", self.skill_community(k))
    }

    /// Occupation label attached to projects of workers from `community`.
    pub fn community_occupation(community: usize) -> &'static str {
        PLATFORM_OCCUPATIONS[community % PLATFORM_OCCUPATIONS.len()]
    }
}

/// The ground-truth sidecar written next to a synthetic corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub planted_effects: BTreeMap<String, f64>,
    pub planted_partition: BTreeMap<String, usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCorpus {
    pub table: ProjectTable,
    pub truth: GroundTruth,
    /// Planted home community of every worker.
    pub worker_home: BTreeMap<String, usize>,
}

/// Generates a seeded worker/project corpus with planted communities and
/// skill effects.
///
/// Project `i < n_skills` is forced to carry skill `i`, so every skill in the
/// sidecar occurs at least once.
pub fn generate_synthetic(config: &SynthConfig) -> Result<SyntheticCorpus> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n_comm = config.n_communities;

    let slugs: Vec<String> = (0..config.n_skills).map(|k| config.skill_slug(k)).collect();
    let community: Vec<usize> = (0..config.n_skills).map(|k| config.skill_community(k)).collect();
    let effects: Vec<f64> = slugs
        .iter()
        .map(|s| match (config.planted_skill_effects.get(s), config.effect_range) {
            (Some(e), _) => *e,
            (None, Some((lo, hi))) if hi > lo => rng.random_range(lo..hi),
            (None, Some((lo, _))) => lo,
            (None, None) => 0.0,
        })
        .collect();
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_comm];
    for (k, &c) in community.iter().enumerate() {
        members[c].push(k);
    }

    let home: Vec<usize> = (0..config.n_workers)
        .map(|_| rng.random_range(0..n_comm))
        .collect();
    let mut workers_of: Vec<Vec<usize>> = vec![Vec::new(); n_comm];
    for (w, &c) in home.iter().enumerate() {
        workers_of[c].push(w);
    }
    let worker_ids: Vec<String> = (0..config.n_workers).map(|w| format!("w{w:05}")).collect();
    let mut experience = vec![0u32; config.n_workers];

    let noise = Normal::new(0.0, config.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(e.to_string()))?;
    let occupations: Vec<&str> = (0..n_comm).map(SynthConfig::community_occupation).collect();
    let (lo, hi) = config.skills_per_project;

    let mut records = Vec::with_capacity(config.n_projects);
    for i in 0..config.n_projects {
        let forced = (i < config.n_skills).then_some(i);
        let worker = match forced {
            Some(k) if !workers_of[community[k]].is_empty() => {
                *workers_of[community[k]].choose(&mut rng).expect("non-empty")
            }
            _ => rng.random_range(0..config.n_workers),
        };
        let h = home[worker];

        let want = rng.random_range(lo..=hi).min(config.n_skills);
        let mut skills: BTreeSet<usize> = forced.into_iter().collect();
        let mut attempts = 0;
        while skills.len() < want {
            let pool = if attempts < 1000 && rng.random::<f64>() < config.concentration {
                &members[h]
            } else {
                &members[rng.random_range(0..n_comm)]
            };
            skills.insert(*pool.choose(&mut rng).expect("communities are non-empty"));
            attempts += 1;
        }

        let year = rng.random_range(config.years.0..=config.years.1);
        let occupation = if rng.random::<f64>() < 0.85 {
            occupations[h]
        } else {
            occupations[rng.random_range(0..n_comm)]
        };

        let scale = match config.trend_shift {
            Some(t) if year >= t.from_year => t.scale,
            _ => 1.0,
        };
        let mut log_wage = config.base_wage.ln()
            + config.experience_effect * f64::from(experience[worker]);
        if let Some(f) = config.community_wage_offsets.get(h) {
            log_wage += f.ln();
        }
        for &k in &skills {
            let boost = if community[k] == h { config.same_domain_boost } else { 1.0 };
            log_wage += effects[k] * boost * scale;
        }
        if config.noise_sigma > 0.0 {
            log_wage += noise.sample(&mut rng);
        }

        records.push(ProjectRecord {
            project_id: format!("p{i:06}"),
            worker_id: worker_ids[worker].clone(),
            year,
            hourly_wage: log_wage.exp(),
            occupation: occupation.to_string(),
            worker_experience: experience[worker],
            skills: skills.iter().map(|&k| slugs[k].clone()).collect(),
        });
        experience[worker] += 1;
    }

    let truth = GroundTruth {
        planted_effects: slugs.iter().cloned().zip(effects.iter().copied()).collect(),
        planted_partition: slugs.iter().cloned().zip(community.iter().copied()).collect(),
        seed: config.seed,
    };
    let worker_home = worker_ids.iter().cloned().zip(home.iter().copied()).collect();
    let table = ProjectTable::from_records(format!("synthetic(seed={})", config.seed), records)?;
    Ok(SyntheticCorpus { table, truth, worker_home })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Assignment {
    /// Every subset of the planted skills crossed with every control cell,
    /// repeated `replicates` times. Skill dummies are then exactly orthogonal
    /// to each other and to the controls.
    Balanced { replicates: usize },
    /// Each planted skill enters each project independently with
    /// `probability`; controls are drawn uniformly.
    Bernoulli { n_projects: usize, probability: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorialConfig {
    pub planted_skill_effects: BTreeMap<String, f64>,
    pub years: (i32, i32),
    pub occupations: Vec<String>,
    pub experience_levels: u32,
    pub assignment: Assignment,
    pub noise_sigma: f64,
    pub seed: u64,
    pub base_wage: f64,
}

impl Default for FactorialConfig {
    fn default() -> Self {
        Self {
            planted_skill_effects: BTreeMap::new(),
            years: (2014, 2021),
            occupations: PLATFORM_OCCUPATIONS[..3].iter().map(|s| s.to_string()).collect(),
            experience_levels: 3,
            assignment: Assignment::Balanced { replicates: 1 },
            noise_sigma: 0.0,
            seed: 0,
            base_wage: 25.0,
        }
    }
}

/// Skill attached to projects whose planted subset is empty, so that every
/// record has at least one skill. It carries no wage effect.
pub const FILLER_SKILL: &str = "general-task";

/// Generates a factorial corpus: log-wage is an additive function of year,
/// occupation, experience and the planted skill effects.
pub fn generate_factorial(config: &FactorialConfig) -> Result<SyntheticCorpus> {
    let p = config.planted_skill_effects.len();
    if p == 0 || p > 16 {
        return Err(Error::Config("factorial design needs 1 to 16 planted skills".into()));
    }
    if config.occupations.is_empty() || config.experience_levels == 0 || config.years.0 > config.years.1 {
        return Err(Error::Config("empty control dimension".into()));
    }
    if !(config.noise_sigma >= 0.0) || !(config.base_wage > 0.0) {
        return Err(Error::Config("noise_sigma must be >= 0 and base_wage > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let skills: Vec<(&String, f64)> = config.planted_skill_effects.iter().map(|(k, v)| (k, *v)).collect();
    let years: Vec<i32> = (config.years.0..=config.years.1).collect();
    let occ_effect: Vec<f64> = config.occupations.iter().map(|_| rng.random_range(-0.3..0.3)).collect();
    let noise = Normal::new(0.0, config.noise_sigma.max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Config(e.to_string()))?;

    let n_subsets = 1usize << p;
    let n_cells = years.len() * config.occupations.len() * config.experience_levels as usize;
    let n_projects = match config.assignment {
        Assignment::Balanced { replicates } => {
            if replicates == 0 {
                return Err(Error::Config("replicates must be at least 1".into()));
            }
            n_subsets * n_cells * replicates
        }
        Assignment::Bernoulli { n_projects, probability } => {
            if n_projects == 0 || !(0.0..=1.0).contains(&probability) {
                return Err(Error::Config("invalid Bernoulli assignment".into()));
            }
            n_projects
        }
    };

    let mut records = Vec::with_capacity(n_projects);
    for i in 0..n_projects {
        let (subset, year_idx, occ_idx, exp) = match config.assignment {
            Assignment::Balanced { .. } => {
                let subset = i % n_subsets;
                let cell = (i / n_subsets) % n_cells;
                let y = cell % years.len();
                let o = (cell / years.len()) % config.occupations.len();
                let e = cell / (years.len() * config.occupations.len());
                (subset, y, o, e as u32)
            }
            Assignment::Bernoulli { probability, .. } => {
                let mut subset = 0usize;
                for b in 0..p {
                    if rng.random::<f64>() < probability {
                        subset |= 1 << b;
                    }
                }
                (
                    subset,
                    rng.random_range(0..years.len()),
                    rng.random_range(0..config.occupations.len()),
                    rng.random_range(0..config.experience_levels),
                )
            }
        };
        let mut log_wage = config.base_wage.ln()
            + 0.04 * year_idx as f64
            + occ_effect[occ_idx]
            + 0.02 * f64::from(exp);
        let mut names = Vec::new();
        for (b, (slug, effect)) in skills.iter().enumerate() {
            if subset & (1 << b) != 0 {
                log_wage += effect;
                names.push((*slug).clone());
            }
        }
        if names.is_empty() {
            names.push(FILLER_SKILL.to_string());
        }
        if config.noise_sigma > 0.0 {
            log_wage += noise.sample(&mut rng);
        }
        names.sort();
        records.push(ProjectRecord {
            project_id: format!("p{i:06}"),
            worker_id: format!("w{i:06}"),
            year: years[year_idx],
            hourly_wage: log_wage.exp(),
            occupation: config.occupations[occ_idx].clone(),
            worker_experience: exp,
            skills: names,
        });
    }

    let truth = GroundTruth {
        planted_effects: config.planted_skill_effects.clone(),
        planted_partition: config.planted_skill_effects.keys().map(|k| (k.clone(), 0)).collect(),
        seed: config.seed,
    };
    let worker_home = records.iter().map(|r| (r.worker_id.clone(), 0)).collect();
    let table = ProjectTable::from_records(format!("factorial(seed={})", config.seed), records)?;
    Ok(SyntheticCorpus { table, truth, worker_home })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::write_csv;

    #[test]
    fn fixed_seed_is_byte_identical() {
        let cfg = SynthConfig::default();
        let (a, b) = (generate_synthetic(&cfg).unwrap(), generate_synthetic(&cfg).unwrap());
        let (mut x, mut y) = (Vec::new(), Vec::new());
        write_csv(&a.table, &mut x).unwrap();
        write_csv(&b.table, &mut y).unwrap();
        assert_eq!(x, y);
        assert_eq!(a.truth, b.truth);
        let other = generate_synthetic(&SynthConfig { seed: 8, ..cfg }).unwrap();
        assert_ne!(other.table.records, a.table.records);
    }

    #[test]
    fn single_community_gives_trivial_partition() {
        let cfg = SynthConfig { n_communities: 1, ..Default::default() };
        let c = generate_synthetic(&cfg).unwrap();
        assert!(c.truth.planted_partition.values().all(|&v| v == 0));
    }

    #[test]
    fn every_sidecar_skill_occurs() {
        let cfg = SynthConfig { n_projects: 50, n_skills: 50, ..Default::default() };
        let c = generate_synthetic(&cfg).unwrap();
        assert_eq!(c.truth.planted_effects.len(), 50);
        for slug in c.truth.planted_effects.keys() {
            assert!(c.table.records.iter().any(|r| r.has_skill(slug)), "{slug} unused");
        }
    }

    #[test]
    fn noiseless_effect_is_exact_multiplier() {
        let mut effects = BTreeMap::new();
        effects.insert("c0-skill-000".to_string(), 0.5);
        let cfg = SynthConfig {
            planted_skill_effects: effects,
            effect_range: None,
            noise_sigma: 0.0,
            experience_effect: 0.0,
            ..Default::default()
        };
        let c = generate_synthetic(&cfg).unwrap();
        for r in &c.table.records {
            let expected = if r.has_skill("c0-skill-000") { 30.0 * 0.5f64.exp() } else { 30.0 };
            assert!((r.hourly_wage - expected).abs() < 1e-9);
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        for cfg in [
            SynthConfig { n_workers: 0, ..Default::default() },
            SynthConfig { noise_sigma: -1.0, ..Default::default() },
            SynthConfig { n_projects: 3, ..Default::default() },
            SynthConfig { community_wage_offsets: vec![1.0], ..Default::default() },
        ] {
            assert!(matches!(generate_synthetic(&cfg), Err(Error::Config(_))));
        }
        let mut effects = BTreeMap::new();
        effects.insert("nope".to_string(), 1.0);
        let cfg = SynthConfig { planted_skill_effects: effects, ..Default::default() };
        assert!(generate_synthetic(&cfg).is_err());
    }

    #[test]
    fn balanced_factorial_has_full_crossing() {
        let mut effects = BTreeMap::new();
        effects.insert("a".to_string(), 0.1);
        effects.insert("b".to_string(), 0.2);
        let cfg = FactorialConfig { planted_skill_effects: effects, ..Default::default() };
        let c = generate_factorial(&cfg).unwrap();
        assert_eq!(c.table.len(), 4 * 8 * 3 * 3);
        let with_a = c.table.records.iter().filter(|r| r.has_skill("a")).count();
        assert_eq!(with_a * 2, c.table.len());
        assert!(c.table.records.iter().all(|r| !r.skills.is_empty()));
    }
}
