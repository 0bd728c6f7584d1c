//! The skill space: per-skill demand/supply counts, the co-occurrence
//! projection of the worker/skill bipartite structure, and its communities.

mod louvain;

pub use louvain::{
    adjusted_rand_index, detect_communities, modularity, modularity_with_resolution,
    CommunityPartition,
};

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ingest::ProjectTable;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkillStats {
    pub skill: String,
    /// Projects requesting the skill.
    pub demand: usize,
    /// Distinct workers commanding the skill.
    pub supply: usize,
}

/// Demand and supply for every skill that occurs in `projects`.
pub fn compute_skill_stats(projects: &ProjectTable) -> BTreeMap<String, SkillStats> {
    let mut demand: BTreeMap<&str, usize> = BTreeMap::new();
    let mut workers: HashMap<&str, BTreeSet<&str>> = HashMap::new();
    for r in &projects.records {
        for s in &r.skills {
            *demand.entry(s).or_default() += 1;
            workers.entry(s).or_default().insert(&r.worker_id);
        }
    }
    demand
        .into_iter()
        .map(|(s, d)| {
            let stats = SkillStats {
                skill: s.to_string(),
                demand: d,
                supply: workers[s].len(),
            };
            (s.to_string(), stats)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeRecord {
    pub skill_a: String,
    pub skill_b: String,
    pub weight: u64,
}

#[derive(Serialize, Deserialize)]
struct GraphData {
    min_projects: usize,
    nodes: Vec<SkillStats>,
    edges: Vec<EdgeRecord>,
}

/// Weighted undirected co-occurrence network over skills.
///
/// Nodes are kept sorted by slug; node indices are positions in that order.
/// Edge weights count the projects in which both skills occur.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphData", into = "GraphData")]
pub struct SkillGraph {
    nodes: Vec<SkillStats>,
    /// `(a, b, weight)` with `a < b`, sorted.
    edges: Vec<(usize, usize, u64)>,
    min_projects: usize,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl TryFrom<GraphData> for SkillGraph {
    type Error = Error;

    fn try_from(d: GraphData) -> Result<Self> {
        let index: HashMap<&str, usize> = d
            .nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.skill.as_str(), i))
            .collect();
        let mut edges = Vec::with_capacity(d.edges.len());
        for e in &d.edges {
            let (Some(&a), Some(&b)) = (index.get(e.skill_a.as_str()), index.get(e.skill_b.as_str()))
            else {
                return Err(Error::Artifact(format!(
                    "edge {}-{} references an unknown node",
                    e.skill_a, e.skill_b
                )));
            };
            edges.push((a, b, e.weight));
        }
        SkillGraph::from_parts(d.nodes, edges, d.min_projects)
    }
}

impl From<SkillGraph> for GraphData {
    fn from(g: SkillGraph) -> Self {
        let edges = g
            .edges
            .iter()
            .map(|&(a, b, weight)| EdgeRecord {
                skill_a: g.nodes[a].skill.clone(),
                skill_b: g.nodes[b].skill.clone(),
                weight,
            })
            .collect();
        GraphData {
            min_projects: g.min_projects,
            nodes: g.nodes,
            edges,
        }
    }
}

impl SkillGraph {
    /// Assembles a graph from node stats and index-based edges, enforcing the
    /// graph invariants (no self-loops, positive weights, no duplicate
    /// pairs). Nodes are re-sorted by slug.
    pub fn from_parts(
        nodes: Vec<SkillStats>,
        edges: Vec<(usize, usize, u64)>,
        min_projects: usize,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| nodes[a].skill.cmp(&nodes[b].skill));
        let mut new_pos = vec![0; n];
        for (pos, &old) in order.iter().enumerate() {
            new_pos[old] = pos;
        }
        let sorted_nodes: Vec<SkillStats> = order.iter().map(|&i| nodes[i].clone()).collect();
        if sorted_nodes.windows(2).any(|w| w[0].skill == w[1].skill) {
            return Err(Error::Config("duplicate node".into()));
        }

        let mut canon = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a >= n || b >= n {
                return Err(Error::Config(format!("edge ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::Config(format!("self-loop on `{}`", nodes[a].skill)));
            }
            if w == 0 {
                return Err(Error::Config("edge weight must be at least 1".into()));
            }
            let (x, y) = (new_pos[a], new_pos[b]);
            canon.push((x.min(y), x.max(y), w));
        }
        canon.sort_unstable();
        if canon.windows(2).any(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::Config("duplicate edge".into()));
        }

        let mut adjacency = vec![Vec::new(); n];
        for &(a, b, w) in &canon {
            adjacency[a].push((b, w as f64));
            adjacency[b].push((a, w as f64));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(j, _)| j);
        }
        let index = sorted_nodes
            .iter()
            .enumerate()
            .map(|(i, s)| (s.skill.clone(), i))
            .collect();
        Ok(Self {
            nodes: sorted_nodes,
            edges: canon,
            min_projects,
            index,
            adjacency,
        })
    }

    /// Convenience constructor for hand-made graphs: node stats are set to
    /// one project / one worker.
    pub fn from_weighted_edges(names: &[&str], edges: &[(&str, &str, u64)]) -> Result<Self> {
        let nodes: Vec<SkillStats> = names
            .iter()
            .map(|s| SkillStats {
                skill: s.to_string(),
                demand: 1,
                supply: 1,
            })
            .collect();
        let pos: HashMap<&str, usize> = names.iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let mut idx = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            let (Some(&x), Some(&y)) = (pos.get(a), pos.get(b)) else {
                return Err(Error::UnknownSkill(format!("{a}/{b}")));
            };
            idx.push((x, y, *w));
        }
        Self::from_parts(nodes, idx, 1)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn min_projects(&self) -> usize {
        self.min_projects
    }

    pub fn nodes(&self) -> &[SkillStats] {
        &self.nodes
    }

    pub fn slug(&self, i: usize) -> &str {
        &self.nodes[i].skill
    }

    pub fn index_of(&self, slug: &str) -> Option<usize> {
        self.index.get(slug).copied()
    }

    pub fn contains(&self, slug: &str) -> bool {
        self.index.contains_key(slug)
    }

    pub fn stats(&self, slug: &str) -> Option<&SkillStats> {
        self.index_of(slug).map(|i| &self.nodes[i])
    }

    /// Neighbors of node `i` with edge weights, ordered by neighbor index.
    pub fn neighbors(&self, i: usize) -> &[(usize, f64)] {
        &self.adjacency[i]
    }

    /// Index-based edges `(a, b, weight)` with `a < b`.
    pub fn edges(&self) -> &[(usize, usize, u64)] {
        &self.edges
    }

    pub fn edge_weight(&self, a: &str, b: &str) -> Option<u64> {
        let (x, y) = (self.index_of(a)?, self.index_of(b)?);
        let key = (x.min(y), x.max(y));
        self.edges
            .binary_search_by(|&(p, q, _)| (p, q).cmp(&key))
            .ok()
            .map(|pos| self.edges[pos].2)
    }

    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.adjacency[i].iter().map(|&(_, w)| w).sum()
    }

    /// Sum of all edge weights, each undirected edge counted once.
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|&(_, _, w)| w as f64).sum()
    }

    /// Top-`k` neighbors of `slug` by edge weight, ties broken by slug.
    pub fn top_neighbors(&self, slug: &str, k: usize) -> Option<Vec<(String, u64)>> {
        let i = self.index_of(slug)?;
        let mut out: Vec<(String, u64)> = self.adjacency[i]
            .iter()
            .map(|&(j, w)| (self.nodes[j].skill.clone(), w as u64))
            .collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        out.truncate(k);
        Some(out)
    }

    /// Unweighted hop counts from `from` to every node (`None` if unreachable).
    pub fn hop_distances(&self, from: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        let mut queue = VecDeque::new();
        dist[from] = Some(0);
        queue.push_back(from);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("visited");
            for &(v, _) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Projects the project/skill incidence onto the skills occurring in at
/// least `min_projects` projects.
///
/// Each project adds one to the weight of every unordered pair of retained
/// skills it requests. Skills below the threshold are removed before pairs are
/// enumerated.
pub fn build_graph(projects: &ProjectTable, min_projects: usize) -> Result<SkillGraph> {
    if min_projects == 0 {
        return Err(Error::Config("min_projects must be at least 1".into()));
    }
    let stats = compute_skill_stats(projects);
    let nodes: Vec<SkillStats> = stats
        .into_values()
        .filter(|s| s.demand >= min_projects)
        .collect();
    if nodes.is_empty() {
        return Err(Error::NoSkillsAboveThreshold(min_projects));
    }
    let index: HashMap<&str, usize> = nodes
        .iter()
        .enumerate()
        .map(|(i, s)| (s.skill.as_str(), i))
        .collect();

    let counts = projects
        .records
        .par_chunks(4096)
        .fold(HashMap::new, |mut acc: HashMap<(usize, usize), u64>, chunk| {
            for r in chunk {
                let kept: Vec<usize> = r
                    .skills
                    .iter()
                    .filter_map(|s| index.get(s.as_str()).copied())
                    .collect();
                for (x, &a) in kept.iter().enumerate() {
                    for &b in &kept[x + 1..] {
                        *acc.entry((a.min(b), a.max(b))).or_default() += 1;
                    }
                }
            }
            acc
        })
        .reduce(HashMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_default() += v;
            }
            a
        });

    let edges = counts.into_iter().map(|((a, b), w)| (a, b, w)).collect();
    SkillGraph::from_parts(nodes, edges, min_projects)
}

/// Number of incident edges per skill.
pub fn degree_centrality(graph: &SkillGraph) -> BTreeMap<String, f64> {
    (0..graph.node_count())
        .map(|i| (graph.slug(i).to_string(), graph.neighbors(i).len() as f64))
        .collect()
}

/// Sum of incident edge weights per skill.
pub fn weighted_degree_centrality(graph: &SkillGraph) -> BTreeMap<String, f64> {
    (0..graph.node_count())
        .map(|i| (graph.slug(i).to_string(), graph.weighted_degree(i)))
        .collect()
}
