//! The persisted model: graph, partition, valuations, scores and the
//! analysis results, written as one versioned JSON document.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::{DomainPremiumMatrix, SkillFeatureRow, WelchTest};
use crate::complementarity::ComplementarityScores;
use crate::pipeline::PipelineConfig;
use crate::skillgraph::{CommunityPartition, SkillGraph};
use crate::valuation::{RegressionFit, SkillPremium, SkillPrice, TrendSeries};
use crate::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSummary {
    pub target: String,
    pub fit: RegressionFit,
    pub out_of_sample_r2: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub schema_version: u32,
    /// Unix seconds.
    pub build_timestamp: i64,
    pub config: PipelineConfig,
    pub provenance: String,
    pub n_projects: usize,
    pub graph: SkillGraph,
    pub partition: CommunityPartition,
    #[serde(default)]
    pub premia: BTreeMap<String, SkillPremium>,
    #[serde(default)]
    pub prices: BTreeMap<String, SkillPrice>,
    #[serde(default)]
    pub trends: BTreeMap<String, TrendSeries>,
    #[serde(default)]
    pub pagerank: Option<ComplementarityScores>,
    #[serde(default)]
    pub wpr_premium: Option<ComplementarityScores>,
    #[serde(default)]
    pub wpr_price: Option<ComplementarityScores>,
    #[serde(default)]
    pub domain_matrix: Option<DomainPremiumMatrix>,
    /// Fraction of workers with at least half their skills in their domain.
    #[serde(default)]
    pub domain_concentration: Option<f64>,
    #[serde(default)]
    pub automation: BTreeMap<String, f64>,
    #[serde(default)]
    pub ai_skills: BTreeSet<String>,
    #[serde(default)]
    pub features: Vec<SkillFeatureRow>,
    #[serde(default)]
    pub models: BTreeMap<String, ModelSummary>,
    /// AI cohort against the rest, per metric.
    #[serde(default)]
    pub cohorts: BTreeMap<String, WelchTest>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

/// Everything known about one skill.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillValuation {
    pub skill: String,
    pub demand: usize,
    pub supply: usize,
    pub degree: usize,
    pub community: usize,
    pub community_label: String,
    pub premium: Option<f64>,
    pub price_factor: Option<f64>,
    pub price_additive: Option<f64>,
    pub price_std_error: Option<f64>,
    pub pagerank: Option<f64>,
    /// Premium-weighted PageRank.
    pub complementarity: Option<f64>,
    pub complementarity_price: Option<f64>,
    pub automation_probability: Option<f64>,
    pub is_ai: bool,
}

impl ModelArtifact {
    /// A fresh artifact holding only the graph stage.
    pub fn new(
        config: PipelineConfig,
        build_timestamp: i64,
        provenance: String,
        n_projects: usize,
        graph: SkillGraph,
        partition: CommunityPartition,
    ) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            build_timestamp,
            config,
            provenance,
            n_projects,
            graph,
            partition,
            premia: BTreeMap::new(),
            prices: BTreeMap::new(),
            trends: BTreeMap::new(),
            pagerank: None,
            wpr_premium: None,
            wpr_price: None,
            domain_matrix: None,
            domain_concentration: None,
            automation: BTreeMap::new(),
            ai_skills: BTreeSet::new(),
            features: Vec::new(),
            models: BTreeMap::new(),
            cohorts: BTreeMap::new(),
            warnings: Vec::new(),
        }
    }

    /// Reads an artifact, rejecting other schema versions and inconsistent
    /// contents.
    pub fn load(mut reader: impl Read) -> Result<Self> {
        let mut text = String::new();
        reader.read_to_string(&mut text)?;
        #[derive(Deserialize)]
        struct Version {
            schema_version: Option<u64>,
        }
        match serde_json::from_str::<Version>(&text)?.schema_version {
            Some(v) if v == u64::from(SCHEMA_VERSION) => {}
            Some(v) => {
                return Err(Error::Artifact(format!(
                    "schema version {v} is not supported (expected {SCHEMA_VERSION})"
                )))
            }
            None => return Err(Error::Artifact("missing schema_version".into())),
        }
        let artifact: Self = serde_json::from_str(&text)?;
        artifact.validate()?;
        Ok(artifact)
    }

    /// Pretty JSON with a trailing newline. Maps are ordered, so equal
    /// artifacts serialize to equal bytes.
    pub fn save(&self, mut writer: impl Write) -> Result<()> {
        serde_json::to_writer_pretty(&mut writer, self)?;
        writer.write_all(b"\n")?;
        Ok(())
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.save(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
    }

    /// Every per-skill entry refers to a graph node and every node has a
    /// community.
    pub fn validate(&self) -> Result<()> {
        let unknown = |what: &str, slug: &str| Error::Artifact(format!("{what} entry `{slug}` is not in the graph"));
        for s in self.premia.keys().chain(self.prices.keys()).chain(self.trends.keys()).chain(self.automation.keys()) {
            if !self.graph.contains(s) {
                return Err(unknown("valuation", s));
            }
        }
        for scores in [&self.pagerank, &self.wpr_premium, &self.wpr_price].into_iter().flatten() {
            if let Some(s) = scores.scores.keys().find(|s| !self.graph.contains(s)) {
                return Err(unknown("score", s));
            }
        }
        for node in self.graph.nodes() {
            if self.partition.community_of(&node.skill).is_none() {
                return Err(Error::Artifact(format!("skill `{}` has no community", node.skill)));
            }
        }
        if self.partition.assignment.len() != self.graph.node_count() {
            return Err(Error::Artifact("partition covers skills outside the graph".into()));
        }
        Ok(())
    }

    pub fn valuation(&self, slug: &str) -> Option<SkillValuation> {
        let i = self.graph.index_of(slug)?;
        let node = &self.graph.nodes()[i];
        let community = self.partition.community_of(slug)?;
        let score = |s: &Option<ComplementarityScores>| s.as_ref().and_then(|s| s.scores.get(slug).copied());
        let price = self.prices.get(slug);
        Some(SkillValuation {
            skill: slug.to_string(),
            demand: node.demand,
            supply: node.supply,
            degree: self.graph.neighbors(i).len(),
            community,
            community_label: self.partition.label(community),
            premium: self.premia.get(slug).map(|p| p.premium),
            price_factor: price.map(|p| p.factor),
            price_additive: price.map(|p| p.additive),
            price_std_error: price.map(|p| p.std_error),
            pagerank: score(&self.pagerank),
            complementarity: score(&self.wpr_premium),
            complementarity_price: score(&self.wpr_price),
            automation_probability: self.automation.get(slug).copied(),
            is_ai: self.ai_skills.contains(slug),
        })
    }

    /// Valuations of all skills, in slug order.
    pub fn valuations(&self) -> Vec<SkillValuation> {
        self.graph
            .nodes()
            .iter()
            .filter_map(|n| self.valuation(&n.skill))
            .collect()
    }

    /// Slugs closest to `slug` by edit distance, best first.
    pub fn suggestions(&self, slug: &str, limit: usize) -> Vec<String> {
        let mut scored: Vec<(f64, &str)> = self
            .graph
            .nodes()
            .iter()
            .map(|n| (strsim::normalized_damerau_levenshtein(slug, &n.skill), n.skill.as_str()))
            .filter(|(sim, _)| *sim >= 0.5)
            .collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(b.1)));
        scored.into_iter().take(limit).map(|(_, s)| s.to_string()).collect()
    }

    /// Error for an unknown slug, carrying suggestions.
    pub fn unknown_slug(&self, slug: &str) -> Error {
        Error::UnknownSlug {
            slug: slug.to_string(),
            suggestions: self.suggestions(slug, 5),
        }
    }
}
