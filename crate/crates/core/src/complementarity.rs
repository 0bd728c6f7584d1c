//! PageRank over the skill graph, plain and value-weighted.
//!
//! The undirected graph is walked in both directions; node `j` passes its
//! score to neighbor `i` in proportion to `w_ij / c_j`, where `c_j` is the
//! weighted degree of `j`. The value-weighted variant additionally scales
//! what `j` passes on by its normalized economic value `v_j`:
//!
//! ```text
//! PR_i = (1 - d) / n + d * sum_j PR_j * v_j * w_ij / c_j
//! ```
//!
//! Skills without edges spread their (weighted) score uniformly. The score
//! vector is renormalized to sum 1 after every sweep, since the weighted
//! update does not conserve mass.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::skillgraph::SkillGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PageRankConfig {
    pub damping: f64,
    /// Convergence threshold on the L1 change between sweeps.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Lower end of the range values are normalized into.
    pub value_floor: f64,
}

impl Default for PageRankConfig {
    fn default() -> Self {
        Self {
            damping: 0.85,
            tolerance: 1e-12,
            max_iterations: 10_000,
            value_floor: 0.01,
        }
    }
}

impl PageRankConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.damping > 0.0 && self.damping < 1.0) {
            return Err(Error::Config("damping must lie in (0, 1)".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        if !(self.value_floor > 0.0 && self.value_floor <= 1.0) {
            return Err(Error::Config("value_floor must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Plain,
    ValueWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueSource {
    Premium,
    Price,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Plain => "plain",
            Variant::ValueWeighted => "value_weighted",
        }
    }
}

impl ValueSource {
    pub fn as_str(self) -> &'static str {
        match self {
            ValueSource::Premium => "premium",
            ValueSource::Price => "price",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplementarityScores {
    pub scores: BTreeMap<String, f64>,
    pub variant: Variant,
    /// `None` for the plain variant.
    pub value_source: Option<ValueSource>,
    pub iterations_used: usize,
    pub converged: bool,
}

impl ComplementarityScores {
    /// Scores multiplied by 10^4 for display.
    pub fn display_scaled(&self) -> BTreeMap<String, f64> {
        self.scores.iter().map(|(k, v)| (k.clone(), v * 1e4)).collect()
    }
}

pub fn pagerank(graph: &SkillGraph, config: &PageRankConfig) -> Result<ComplementarityScores> {
    config.validate()?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let ones = vec![1.0; graph.node_count()];
    Ok(finish(graph, power_iteration(graph, &ones, config), Variant::Plain, None))
}

/// Value-weighted PageRank. `values` must cover every node; they are
/// min-max mapped into `[value_floor, 1]` (all-equal values map to 1, which
/// reproduces the plain variant).
pub fn value_weighted_pagerank(
    graph: &SkillGraph,
    values: &BTreeMap<String, f64>,
    source: ValueSource,
    config: &PageRankConfig,
) -> Result<ComplementarityScores> {
    config.validate()?;
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let raw = (0..graph.node_count())
        .map(|i| {
            let slug = graph.slug(i);
            match values.get(slug) {
                Some(v) if v.is_finite() => Ok(*v),
                Some(_) => Err(Error::Config(format!("non-finite value for `{slug}`"))),
                None => Err(Error::MissingValue(slug.to_string())),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    let v = normalize_values(&raw, config.value_floor);
    Ok(finish(
        graph,
        power_iteration(graph, &v, config),
        Variant::ValueWeighted,
        Some(source),
    ))
}

/// Min-max maps `raw` into `[floor, 1]`.
pub fn normalize_values(raw: &[f64], floor: f64) -> Vec<f64> {
    let lo = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return vec![1.0; raw.len()];
    }
    raw.iter()
        .map(|x| floor + (1.0 - floor) * (x - lo) / (hi - lo))
        .collect()
}

struct Iterate {
    scores: Vec<f64>,
    iterations: usize,
    converged: bool,
}

fn power_iteration(graph: &SkillGraph, values: &[f64], config: &PageRankConfig) -> Iterate {
    let n = graph.node_count();
    let nf = n as f64;
    let d = config.damping;
    let degree: Vec<f64> = (0..n).map(|j| graph.weighted_degree(j)).collect();
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    let mut share = vec![0.0; n];

    for it in 1..=config.max_iterations {
        let mut dangling = 0.0;
        for j in 0..n {
            if degree[j] > 0.0 {
                share[j] = d * x[j] * values[j] / degree[j];
            } else {
                share[j] = 0.0;
                dangling += x[j] * values[j];
            }
        }
        let base = (1.0 - d) / nf + d * dangling / nf;
        for (i, out) in next.iter_mut().enumerate() {
            *out = base + graph.neighbors(i).iter().map(|&(j, w)| w * share[j]).sum::<f64>();
        }
        let total: f64 = next.iter().sum();
        for s in next.iter_mut() {
            *s /= total;
        }
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff < config.tolerance {
            return Iterate { scores: x, iterations: it, converged: true };
        }
    }
    tracing::warn!(max_iterations = config.max_iterations, "pagerank did not converge");
    Iterate {
        scores: x,
        iterations: config.max_iterations,
        converged: false,
    }
}

fn finish(graph: &SkillGraph, it: Iterate, variant: Variant, source: Option<ValueSource>) -> ComplementarityScores {
    ComplementarityScores {
        scores: it
            .scores
            .iter()
            .enumerate()
            .map(|(i, &s)| (graph.slug(i).to_string(), s))
            .collect(),
        variant,
        value_source: source,
        iterations_used: it.iterations,
        converged: it.converged,
    }
}
