//! Pipeline stages. Each stage reads and extends a [`ModelArtifact`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::advisor::VerdictWeights;
use crate::analysis::{
    assign_worker_domains, automation_all, build_feature_rows, cohort_compare, cohort_split,
    concentration_share, domain_premium_matrix, fit_premium_models, out_of_sample_r2, AutomationFormula,
    AutomationTable, ComplementScope,
};
use crate::artifact::{ModelArtifact, ModelSummary};
use crate::complementarity::{pagerank, value_weighted_pagerank, PageRankConfig, ValueSource};
use crate::ingest::ProjectTable;
use crate::skillgraph::{build_graph, detect_communities};
use crate::valuation::{premium_all, price_all, validate_windows, windowed_premium, PriceSpec, DEFAULT_WINDOWS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub seed: u64,
    pub min_projects: usize,
    pub resolution: f64,
    /// Label per community id; ids beyond the list keep `community-k`.
    pub community_labels: Vec<String>,
    /// Community used as the dummy reference; falls back to the largest.
    pub reference_community: String,
    pub pagerank: PageRankConfig,
    pub windows: Vec<(i32, i32)>,
    pub price: PriceSpec,
    pub min_obs: usize,
    pub complement_scope: ComplementScope,
    pub automation_formula: AutomationFormula,
    pub cv_folds: usize,
    pub verdict: VerdictWeights,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            min_projects: 20,
            resolution: 1.0,
            community_labels: Vec::new(),
            reference_community: "Software & Tech".into(),
            pagerank: PageRankConfig::default(),
            windows: DEFAULT_WINDOWS.to_vec(),
            price: PriceSpec::default(),
            min_obs: 20,
            complement_scope: ComplementScope::Domain,
            automation_formula: AutomationFormula::ShareWeighted,
            cv_folds: 5,
            verdict: VerdictWeights::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.pagerank.validate()?;
        validate_windows(&self.windows)?;
        if self.min_projects == 0 {
            return Err(Error::Config("min_projects must be at least 1".into()));
        }
        if self.cv_folds < 2 {
            return Err(Error::Config("cv_folds must be at least 2".into()));
        }
        Ok(())
    }
}

/// Graph and communities.
pub fn build(projects: &ProjectTable, config: &PipelineConfig, build_timestamp: i64) -> Result<ModelArtifact> {
    config.validate()?;
    let graph = build_graph(projects, config.min_projects)?;
    let mut partition = detect_communities(&graph, config.seed, config.resolution)?;
    let labels = config
        .community_labels
        .iter()
        .enumerate()
        .map(|(i, l)| (i, l.clone()))
        .collect();
    partition.relabel(&labels);
    Ok(ModelArtifact::new(
        config.clone(),
        build_timestamp,
        projects.provenance.clone(),
        projects.len(),
        graph,
        partition,
    ))
}

fn check_table(artifact: &ModelArtifact, projects: &ProjectTable) -> Result<()> {
    if artifact.n_projects != projects.len() {
        return Err(Error::Artifact(format!(
            "artifact was built from {} projects but the input has {}",
            artifact.n_projects,
            projects.len()
        )));
    }
    Ok(())
}

/// Premia, prices and windowed trends for every graph skill.
pub fn value(artifact: &mut ModelArtifact, projects: &ProjectTable) -> Result<()> {
    check_table(artifact, projects)?;
    let cfg = &artifact.config;
    artifact.premia = premium_all(projects, cfg.min_projects);
    artifact.prices = price_all(projects, cfg.min_projects, &cfg.price)?;
    artifact.trends = artifact
        .graph
        .nodes()
        .iter()
        .map(|n| Ok((n.skill.clone(), windowed_premium(&n.skill, projects, &cfg.windows)?)))
        .collect::<Result<_>>()?;
    for n in artifact.graph.nodes() {
        if !artifact.premia.contains_key(&n.skill) {
            artifact.warnings.push(format!("no premium for `{}`", n.skill));
        }
        if !artifact.prices.contains_key(&n.skill) {
            artifact.warnings.push(format!("no price for `{}`", n.skill));
        }
    }
    Ok(())
}

/// Plain and value-weighted PageRank. Skills without a premium or price
/// enter the weighting with a neutral value (premium 0, factor 1).
pub fn complement(artifact: &mut ModelArtifact) -> Result<()> {
    if artifact.premia.is_empty() && artifact.prices.is_empty() {
        return Err(Error::Artifact("valuation stage has not been run".into()));
    }
    let cfg = artifact.config.pagerank;
    let slugs: Vec<String> = artifact.graph.nodes().iter().map(|n| n.skill.clone()).collect();
    let premium_values: BTreeMap<String, f64> = slugs
        .iter()
        .map(|s| (s.clone(), artifact.premia.get(s).map_or(0.0, |p| p.premium)))
        .collect();
    let price_values: BTreeMap<String, f64> = slugs
        .iter()
        .map(|s| (s.clone(), artifact.prices.get(s).map_or(1.0, |p| p.factor)))
        .collect();
    let plain = pagerank(&artifact.graph, &cfg)?;
    let by_premium = value_weighted_pagerank(&artifact.graph, &premium_values, ValueSource::Premium, &cfg)?;
    let by_price = value_weighted_pagerank(&artifact.graph, &price_values, ValueSource::Price, &cfg)?;
    for s in [&plain, &by_premium, &by_price] {
        if !s.converged {
            artifact.warnings.push(format!(
                "{} pagerank did not converge in {} iterations",
                s.variant.as_str(),
                s.iterations_used
            ));
        }
    }
    artifact.pagerank = Some(plain);
    artifact.wpr_premium = Some(by_premium);
    artifact.wpr_price = Some(by_price);
    Ok(())
}

/// Regressions, worker domains, the domain matrix, automation risk and the
/// AI cohort tests.
pub fn analyze(
    artifact: &mut ModelArtifact,
    projects: &ProjectTable,
    automation: Option<&AutomationTable>,
    ai_skills: &BTreeSet<String>,
) -> Result<()> {
    check_table(artifact, projects)?;
    let (Some(wpr_premium), Some(wpr_price)) = (&artifact.wpr_premium, &artifact.wpr_price) else {
        return Err(Error::Artifact("complementarity stage has not been run".into()));
    };
    let cfg = artifact.config.clone();
    let mut warnings = Vec::new();

    let features = build_feature_rows(
        &artifact.graph,
        &artifact.partition,
        &artifact.premia,
        &artifact.prices,
        wpr_premium,
        wpr_price,
    );
    let reference = artifact
        .partition
        .id_for_label(&cfg.reference_community)
        .or_else(|| largest_community(artifact))
        .unwrap_or(0);
    let mut models = BTreeMap::new();
    match fit_premium_models(&features, reference) {
        Ok(fits) => {
            for (m, fit) in fits {
                let oos = match out_of_sample_r2(&features, m, reference, cfg.cv_folds, cfg.seed) {
                    Ok(v) => Some(v),
                    Err(e) => {
                        warnings.push(format!("{}: out-of-sample R² unavailable: {e}", m.name()));
                        None
                    }
                };
                models.insert(
                    m.name().to_string(),
                    ModelSummary { target: m.target().to_string(), fit, out_of_sample_r2: oos },
                );
            }
        }
        Err(e) => warnings.push(format!("premium models skipped: {e}")),
    }

    let domains = assign_worker_domains(projects, &artifact.partition);
    let matrix = domain_premium_matrix(projects, &domains, &artifact.partition, cfg.min_obs, cfg.complement_scope);

    let slugs: Vec<&str> = artifact.graph.nodes().iter().map(|n| n.skill.as_str()).collect();
    let automation_probs = match automation {
        Some(table) => automation_all(slugs.iter().copied(), projects, table, cfg.automation_formula)?,
        None => BTreeMap::new(),
    };

    let present_ai: BTreeSet<String> = ai_skills.iter().filter(|s| artifact.graph.contains(s)).cloned().collect();
    let mut cohorts = BTreeMap::new();
    let premium_map: BTreeMap<String, f64> = artifact.premia.iter().map(|(k, v)| (k.clone(), v.premium)).collect();
    for (metric, values) in [
        ("premium", &premium_map),
        ("complementarity", &wpr_premium.scores),
        ("automation_probability", &automation_probs),
    ] {
        let (ai, rest) = cohort_split(values, &present_ai);
        match cohort_compare(&ai, &rest) {
            Ok(t) if t.t.is_finite() => {
                cohorts.insert(metric.to_string(), t);
            }
            Ok(_) => warnings.push(format!("{metric} cohort test has an infinite statistic")),
            Err(e) if !values.is_empty() => warnings.push(format!("{metric} cohort test skipped: {e}")),
            Err(_) => {}
        }
    }

    artifact.features = features;
    artifact.models = models;
    artifact.domain_concentration = Some(concentration_share(&domains, 0.5));
    artifact.domain_matrix = Some(matrix);
    artifact.automation = automation_probs;
    artifact.ai_skills = present_ai;
    artifact.cohorts = cohorts;
    artifact.warnings.extend(warnings);
    Ok(())
}

fn largest_community(artifact: &ModelArtifact) -> Option<usize> {
    artifact
        .partition
        .members()
        .into_iter()
        .max_by(|a, b| a.1.len().cmp(&b.1.len()).then(b.0.cmp(&a.0)))
        .map(|(id, _)| id)
}

/// All stages in order.
pub fn run_all(
    projects: &ProjectTable,
    config: &PipelineConfig,
    build_timestamp: i64,
    automation: Option<&AutomationTable>,
    ai_skills: &BTreeSet<String>,
) -> Result<ModelArtifact> {
    let mut artifact = build(projects, config, build_timestamp)?;
    value(&mut artifact, projects)?;
    complement(&mut artifact)?;
    analyze(&mut artifact, projects, automation, ai_skills)?;
    Ok(artifact)
}
