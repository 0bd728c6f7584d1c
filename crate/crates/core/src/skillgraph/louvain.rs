//! Louvain modularity optimization (local moving + aggregation).

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::SkillGraph;
use crate::{Error, Result};

const MAX_PASSES: usize = 10_000;
const MAX_LEVELS: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommunityPartition {
    pub assignment: BTreeMap<String, usize>,
    pub labels: BTreeMap<usize, String>,
    pub modularity: f64,
    pub seed: u64,
    pub resolution: f64,
}

impl CommunityPartition {
    /// Wraps an externally supplied assignment (e.g. a planted partition).
    pub fn from_assignment(graph: &SkillGraph, assignment: BTreeMap<String, usize>) -> Result<Self> {
        let mut p = Self {
            labels: default_labels(assignment.values().copied()),
            assignment,
            modularity: 0.0,
            seed: 0,
            resolution: 1.0,
        };
        p.modularity = modularity(graph, &p)?;
        Ok(p)
    }

    pub fn community_of(&self, slug: &str) -> Option<usize> {
        self.assignment.get(slug).copied()
    }

    pub fn community_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self.assignment.values().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    pub fn label(&self, id: usize) -> String {
        self.labels
            .get(&id)
            .cloned()
            .unwrap_or_else(|| format!("community-{id}"))
    }

    /// Members of each community, slugs in sorted order.
    pub fn members(&self) -> BTreeMap<usize, Vec<String>> {
        let mut out: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        for (s, &c) in &self.assignment {
            out.entry(c).or_default().push(s.clone());
        }
        out
    }

    /// Replaces labels for the given ids; other ids keep theirs.
    pub fn relabel(&mut self, labels: &BTreeMap<usize, String>) {
        for (id, l) in labels {
            if self.labels.contains_key(id) {
                self.labels.insert(*id, l.clone());
            }
        }
    }

    /// Community id carrying `label`, if any.
    pub fn id_for_label(&self, label: &str) -> Option<usize> {
        self.labels.iter().find(|(_, l)| l.as_str() == label).map(|(id, _)| *id)
    }
}

fn default_labels(ids: impl Iterator<Item = usize>) -> BTreeMap<usize, String> {
    ids.map(|c| (c, format!("community-{c}"))).collect()
}

/// Weighted graph at one aggregation level.
struct Level {
    adj: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl Level {
    fn degree(&self, i: usize) -> f64 {
        2.0 * self.self_loops[i] + self.adj[i].iter().map(|&(_, w)| w).sum::<f64>()
    }
}

/// Partitions the skill graph with the Louvain method.
///
/// The node visiting order at each level is a seeded shuffle, then fixed.
/// A node only leaves its community for a strictly better gain; among equal
/// challengers the lowest community id wins. Final ids are ordered by
/// community size (largest first), ties by smallest member slug.
pub fn detect_communities(graph: &SkillGraph, seed: u64, resolution: f64) -> Result<CommunityPartition> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !(resolution > 0.0) {
        return Err(Error::Config("resolution must be positive".into()));
    }
    let n = graph.node_count();
    let mut membership: Vec<usize> = (0..n).collect();

    if graph.edge_count() == 0 {
        tracing::warn!("edgeless graph: every skill forms its own community");
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut level = Level {
            adj: (0..n).map(|i| graph.neighbors(i).to_vec()).collect(),
            self_loops: vec![0.0; n],
        };
        for _ in 0..MAX_LEVELS {
            let Some(local) = move_nodes(&level, resolution, &mut rng) else {
                break;
            };
            let (renumbered, count) = renumber(&local);
            for m in membership.iter_mut() {
                *m = renumbered[*m];
            }
            level = aggregate(&level, &renumbered, count);
        }
    }

    let membership = canonical_ids(graph, &membership);
    let assignment: BTreeMap<String, usize> = membership
        .iter()
        .enumerate()
        .map(|(i, &c)| (graph.slug(i).to_string(), c))
        .collect();
    let q = modularity_of(graph, &membership, resolution);
    Ok(CommunityPartition {
        labels: default_labels(membership.iter().copied()),
        assignment,
        modularity: q,
        seed,
        resolution,
    })
}

/// One local-moving phase. Returns `None` when no node moved.
fn move_nodes(level: &Level, resolution: f64, rng: &mut ChaCha8Rng) -> Option<Vec<usize>> {
    let n = level.adj.len();
    let degree: Vec<f64> = (0..n).map(|i| level.degree(i)).collect();
    let m2: f64 = degree.iter().sum();
    let eps = 1e-12 * m2.max(1.0);
    let mut community: Vec<usize> = (0..n).collect();
    let mut tot = degree.clone();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);

    let mut moved_any = false;
    let mut links: BTreeMap<usize, f64> = BTreeMap::new();
    for _ in 0..MAX_PASSES {
        let mut moved = false;
        for &i in &order {
            let k = degree[i];
            let current = community[i];
            links.clear();
            links.insert(current, 0.0);
            for &(j, w) in &level.adj[i] {
                *links.entry(community[j]).or_default() += w;
            }
            tot[current] -= k;
            let gain = |c: usize, w: f64| w - resolution * tot[c] * k / m2;
            let mut best = current;
            let mut best_gain = gain(current, links[&current]);
            for (&c, &w) in &links {
                let g = gain(c, w);
                if g > best_gain + eps {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += k;
            if best != current {
                community[i] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
        moved_any = true;
    }
    moved_any.then_some(community)
}

/// Dense ids in order of first appearance.
fn renumber(community: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let ids = community
        .iter()
        .map(|&c| {
            let next = map.len();
            *map.entry(c).or_insert(next)
        })
        .collect();
    (ids, map.len())
}

fn aggregate(level: &Level, community: &[usize], count: usize) -> Level {
    let mut self_loops = vec![0.0; count];
    let mut weights: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); count];
    for (i, nbrs) in level.adj.iter().enumerate() {
        let ci = community[i];
        self_loops[ci] += level.self_loops[i];
        for &(j, w) in nbrs {
            let cj = community[j];
            if ci == cj {
                // each internal edge is seen from both ends
                self_loops[ci] += w / 2.0;
            } else {
                *weights[ci].entry(cj).or_default() += w;
            }
        }
    }
    Level {
        adj: weights.into_iter().map(|m| m.into_iter().collect()).collect(),
        self_loops,
    }
}

fn canonical_ids(graph: &SkillGraph, membership: &[usize]) -> Vec<usize> {
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &c) in membership.iter().enumerate() {
        groups.entry(c).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = groups.into_values().collect();
    // nodes are slug-sorted, so the first member index is the smallest slug
    blocks.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
    let mut out = vec![0; graph.node_count()];
    for (id, block) in blocks.iter().enumerate() {
        for &i in block {
            out[i] = id;
        }
    }
    out
}

fn modularity_of(graph: &SkillGraph, membership: &[usize], resolution: f64) -> f64 {
    let m = graph.total_weight();
    if m == 0.0 {
        return 0.0;
    }
    let m2 = 2.0 * m;
    let mut internal: HashMap<usize, f64> = HashMap::new();
    let mut total: HashMap<usize, f64> = HashMap::new();
    for &(a, b, w) in graph.edges() {
        if membership[a] == membership[b] {
            *internal.entry(membership[a]).or_default() += 2.0 * w as f64;
        }
    }
    for (i, &c) in membership.iter().enumerate() {
        *total.entry(c).or_default() += graph.weighted_degree(i);
    }
    let mut ids: Vec<usize> = total.keys().copied().collect();
    ids.sort_unstable();
    ids.iter()
        .map(|c| {
            let t = total[c] / m2;
            internal.get(c).copied().unwrap_or(0.0) / m2 - resolution * t * t
        })
        .sum()
}

/// Weighted Newman–Girvan modularity of `partition` on `graph`.
pub fn modularity(graph: &SkillGraph, partition: &CommunityPartition) -> Result<f64> {
    modularity_with_resolution(graph, partition, 1.0)
}

pub fn modularity_with_resolution(
    graph: &SkillGraph,
    partition: &CommunityPartition,
    resolution: f64,
) -> Result<f64> {
    let membership = (0..graph.node_count())
        .map(|i| {
            partition
                .community_of(graph.slug(i))
                .ok_or_else(|| Error::PartitionMissingNode(graph.slug(i).to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(modularity_of(graph, &membership, resolution))
}

/// Adjusted Rand index between two labelings of the same items.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> f64 {
    assert_eq!(a.len(), b.len(), "labelings must have equal length");
    let n = a.len() as f64;
    let choose2 = |x: f64| x * (x - 1.0) / 2.0;
    let mut table: HashMap<(usize, usize), f64> = HashMap::new();
    let mut rows: HashMap<usize, f64> = HashMap::new();
    let mut cols: HashMap<usize, f64> = HashMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *table.entry((x, y)).or_default() += 1.0;
        *rows.entry(x).or_default() += 1.0;
        *cols.entry(y).or_default() += 1.0;
    }
    let index: f64 = table.values().map(|&v| choose2(v)).sum();
    let sum_a: f64 = rows.values().map(|&v| choose2(v)).sum();
    let sum_b: f64 = cols.values().map(|&v| choose2(v)).sum();
    let expected = sum_a * sum_b / choose2(n);
    let max = (sum_a + sum_b) / 2.0;
    if max == expected {
        return 1.0;
    }
    (index - expected) / (max - expected)
}
