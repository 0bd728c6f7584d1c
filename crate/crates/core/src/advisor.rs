//! What-if and recommendation queries against a built artifact.
//!
//! The verdict for adding a candidate skill to a bundle is
//!
//! ```text
//! verdict = w_p * z(premium) + w_c * z(complementarity) - w_a * z(automation)
//! ```
//!
//! where each `z` standardizes against the mean and standard deviation of
//! that metric over all skills in the artifact. The premium is the
//! (inferred domain, candidate community) cell of the domain matrix; when
//! the cell is missing the candidate's global premium is used and `fallback`
//! is set. Without automation data the automation term is zero.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::analysis::infer_domain;
use crate::artifact::ModelArtifact;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerdictWeights {
    pub premium: f64,
    pub complementarity: f64,
    pub automation: f64,
}

impl Default for VerdictWeights {
    fn default() -> Self {
        Self { premium: 1.0, complementarity: 1.0, automation: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WhatIfResult {
    pub bundle: Vec<String>,
    pub inferred_domain: usize,
    pub inferred_domain_label: String,
    pub domain_share: f64,
    pub candidate: String,
    pub candidate_community: usize,
    /// Matrix cell for (inferred domain, candidate community).
    pub candidate_premium_in_domain: Option<f64>,
    /// Premium entering the verdict: the matrix cell, or the global premium
    /// when `fallback` is set.
    pub premium_used: f64,
    pub fallback: bool,
    pub candidate_complementarity: f64,
    pub automation_probability: Option<f64>,
    /// Mean shortest-path hops from the bundle skills to the candidate,
    /// over the reachable ones.
    pub distance: Option<f64>,
    pub verdict_score: f64,
    /// The candidate is already in the bundle.
    pub no_op: bool,
}

#[derive(Debug, Clone, Copy)]
struct Standardizer {
    mean: f64,
    sd: f64,
}

impl Standardizer {
    fn fit<'a>(values: impl Iterator<Item = &'a f64>) -> Self {
        let v: Vec<f64> = values.copied().collect();
        if v.is_empty() {
            return Self { mean: 0.0, sd: 0.0 };
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        Self { mean, sd }
    }

    fn z(&self, x: f64) -> f64 {
        if self.sd > 0.0 {
            (x - self.mean) / self.sd
        } else {
            0.0
        }
    }
}

/// Query engine over one artifact.
#[derive(Debug, Clone)]
pub struct Advisor<'a> {
    artifact: &'a ModelArtifact,
    weights: VerdictWeights,
    premium: Standardizer,
    complementarity: Standardizer,
    automation: Standardizer,
}

/// Validated bundle with its inferred domain.
struct Bundle {
    slugs: Vec<String>,
    indices: Vec<usize>,
    domain: usize,
    share: f64,
}

impl<'a> Advisor<'a> {
    pub fn new(artifact: &'a ModelArtifact) -> Result<Self> {
        Self::with_weights(artifact, artifact.config.verdict)
    }

    pub fn with_weights(artifact: &'a ModelArtifact, weights: VerdictWeights) -> Result<Self> {
        let wpr = artifact
            .wpr_premium
            .as_ref()
            .ok_or_else(|| Error::Artifact("complementarity stage has not been run".into()))?;
        Ok(Self {
            artifact,
            weights,
            premium: Standardizer::fit(artifact.premia.values().map(|p| &p.premium)),
            complementarity: Standardizer::fit(wpr.scores.values()),
            automation: Standardizer::fit(artifact.automation.values()),
        })
    }

    /// Verdict from the three inputs.
    pub fn verdict(&self, premium: f64, complementarity: f64, automation: Option<f64>) -> f64 {
        let w = self.weights;
        w.premium * self.premium.z(premium) + w.complementarity * self.complementarity.z(complementarity)
            - automation.map_or(0.0, |a| w.automation * self.automation.z(a))
    }

    fn bundle(&self, bundle: &[String]) -> Result<Bundle> {
        let mut seen = BTreeSet::new();
        let mut slugs = Vec::new();
        let mut indices = Vec::new();
        for s in bundle {
            let i = self.artifact.graph.index_of(s).ok_or_else(|| self.artifact.unknown_slug(s))?;
            if seen.insert(s.as_str()) {
                slugs.push(s.clone());
                indices.push(i);
            }
        }
        if slugs.is_empty() {
            return Err(Error::EmptyBundle);
        }
        let (domain, share, _) = infer_domain(slugs.iter().map(String::as_str), &self.artifact.partition)
            .ok_or(Error::EmptyBundle)?;
        Ok(Bundle { slugs, indices, domain, share })
    }

    pub fn whatif(&self, bundle: &[String], candidate: &str) -> Result<WhatIfResult> {
        let b = self.bundle(bundle)?;
        self.evaluate(&b, &self.hops(&b), candidate)
    }

    /// The `k` best candidates outside the bundle, by verdict, ties by slug.
    pub fn recommend(&self, bundle: &[String], k: i64) -> Result<Vec<WhatIfResult>> {
        if k <= 0 {
            return Err(Error::Config("k must be positive".into()));
        }
        let b = self.bundle(bundle)?;
        let hops = self.hops(&b);
        let in_bundle: BTreeSet<&str> = b.slugs.iter().map(String::as_str).collect();
        let mut out = Vec::new();
        for node in self.artifact.graph.nodes() {
            if in_bundle.contains(node.skill.as_str()) || !self.artifact.premia.contains_key(&node.skill) {
                continue;
            }
            out.push(self.evaluate(&b, &hops, &node.skill)?);
        }
        out.sort_by(|a, b| {
            b.verdict_score
                .partial_cmp(&a.verdict_score)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.candidate.cmp(&b.candidate))
        });
        out.truncate(usize::try_from(k).unwrap_or(usize::MAX));
        Ok(out)
    }

    fn hops(&self, b: &Bundle) -> Vec<Vec<Option<usize>>> {
        b.indices.iter().map(|&i| self.artifact.graph.hop_distances(i)).collect()
    }

    fn evaluate(&self, b: &Bundle, hops: &[Vec<Option<usize>>], candidate: &str) -> Result<WhatIfResult> {
        let art = self.artifact;
        let ci = art.graph.index_of(candidate).ok_or_else(|| art.unknown_slug(candidate))?;
        let community = art.partition.community_of(candidate).ok_or_else(|| art.unknown_slug(candidate))?;
        let cell = art.domain_matrix.as_ref().and_then(|m| m.cell(b.domain, community));
        let (premium_used, fallback) = match cell {
            Some(v) => (v, false),
            None => (
                art.premia
                    .get(candidate)
                    .ok_or_else(|| Error::MissingValue(format!("premium of `{candidate}`")))?
                    .premium,
                true,
            ),
        };
        let complementarity = art
            .wpr_premium
            .as_ref()
            .and_then(|s| s.scores.get(candidate).copied())
            .ok_or_else(|| Error::MissingValue(format!("complementarity of `{candidate}`")))?;
        let automation = art.automation.get(candidate).copied();
        let reachable: Vec<usize> = hops.iter().filter_map(|h| h[ci]).collect();
        let distance = (!reachable.is_empty())
            .then(|| reachable.iter().sum::<usize>() as f64 / reachable.len() as f64);
        Ok(WhatIfResult {
            bundle: b.slugs.clone(),
            inferred_domain: b.domain,
            inferred_domain_label: art.partition.label(b.domain),
            domain_share: b.share,
            candidate: candidate.to_string(),
            candidate_community: community,
            candidate_premium_in_domain: cell,
            premium_used,
            fallback,
            candidate_complementarity: complementarity,
            automation_probability: automation,
            distance,
            verdict_score: self.verdict(premium_used, complementarity, automation),
            no_op: b.slugs.iter().any(|s| s == candidate),
        })
    }
}
