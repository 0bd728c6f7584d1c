//! Response payloads shared by the HTTP API and the CLI.

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};
use skillprice_core::{Advisor, ModelArtifact, SkillValuation};

use crate::diag::{CliResult, Failure};

#[derive(Debug, Clone, Deserialize)]
pub struct WhatIfRequest {
    pub bundle: Vec<String>,
    pub candidate: String,
}

#[derive(Debug, Clone, Deserialize)]
pub struct RecommendRequest {
    pub bundle: Vec<String>,
    pub k: i64,
}

/// Adds `schema_version` and `build_timestamp` to a JSON object payload.
pub fn envelope(art: &ModelArtifact, payload: impl Serialize) -> Value {
    let mut obj = Map::new();
    obj.insert("schema_version".into(), json!(art.schema_version));
    obj.insert("build_timestamp".into(), json!(art.build_timestamp));
    match serde_json::to_value(payload).expect("payloads serialize") {
        Value::Object(m) => obj.extend(m),
        other => {
            obj.insert("data".into(), other);
        }
    }
    Value::Object(obj)
}

pub fn meta(art: &ModelArtifact) -> Value {
    envelope(
        art,
        json!({
            "provenance": art.provenance,
            "counts": {
                "projects": art.n_projects,
                "skills": art.graph.node_count(),
                "edges": art.graph.edge_count(),
                "communities": art.partition.community_ids().len(),
                "models": art.models.len(),
            },
            "modularity": art.partition.modularity,
            "domain_concentration": art.domain_concentration,
            "config": art.config,
            "warnings": art.warnings.len(),
        }),
    )
}

#[derive(Debug, Clone, Default, Deserialize)]
pub struct SkillsQuery {
    /// Community id or label.
    pub community: Option<String>,
    pub sort: Option<String>,
    pub limit: Option<usize>,
}

pub fn skills(art: &ModelArtifact, q: &SkillsQuery) -> CliResult<Value> {
    let mut rows = art.valuations();
    if let Some(c) = &q.community {
        let id = c
            .parse::<usize>()
            .ok()
            .or_else(|| art.partition.id_for_label(c))
            .ok_or_else(|| Failure::validation("unknown_community", format!("no community `{c}`")))?;
        rows.retain(|v| v.community == id);
    }
    let key: fn(&SkillValuation) -> Option<f64> = match q.sort.as_deref().unwrap_or("skill") {
        "skill" => |_| None,
        "premium" => |v| v.premium,
        "price" => |v| v.price_additive,
        "complementarity" => |v| v.complementarity,
        "automation" => |v| v.automation_probability,
        "demand" => |v| Some(v.demand as f64),
        other => {
            return Err(Failure::validation(
                "invalid_query",
                format!("unknown sort key `{other}` (skill, premium, price, complementarity, automation, demand)"),
            ))
        }
    };
    if q.sort.as_deref().is_some_and(|s| s != "skill") {
        // descending, missing values last, ties by slug
        rows.sort_by(|a, b| match (key(a), key(b)) {
            (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.skill.cmp(&b.skill)),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => a.skill.cmp(&b.skill),
        });
    }
    if let Some(limit) = q.limit {
        rows.truncate(limit);
    }
    Ok(envelope(art, json!({ "skills": rows })))
}

fn known(art: &ModelArtifact, slug: &str) -> CliResult<()> {
    if art.graph.contains(slug) {
        Ok(())
    } else {
        Err(art.unknown_slug(slug).into())
    }
}

pub fn skill(art: &ModelArtifact, slug: &str) -> CliResult<Value> {
    let v = art.valuation(slug).ok_or_else(|| Failure::from(art.unknown_slug(slug)))?;
    Ok(envelope(
        art,
        json!({
            "skill": v,
            "premium_detail": art.premia.get(slug),
            "price_detail": art.prices.get(slug),
            "trend": art.trends.get(slug),
        }),
    ))
}

pub fn neighbors(art: &ModelArtifact, slug: &str, k: usize) -> CliResult<Value> {
    known(art, slug)?;
    let top = art.graph.top_neighbors(slug, k).unwrap_or_default();
    let list: Vec<Value> = top.into_iter().map(|(s, w)| json!({ "skill": s, "weight": w })).collect();
    Ok(envelope(art, json!({ "skill": slug, "neighbors": list })))
}

pub fn communities(art: &ModelArtifact) -> Value {
    let list: Vec<Value> = art
        .partition
        .members()
        .into_iter()
        .map(|(id, members)| {
            let premia: Vec<f64> = members.iter().filter_map(|s| art.premia.get(s).map(|p| p.premium)).collect();
            let mean = (!premia.is_empty()).then(|| premia.iter().sum::<f64>() / premia.len() as f64);
            json!({
                "id": id,
                "label": art.partition.label(id),
                "size": members.len(),
                "mean_premium": mean,
                "members": members,
            })
        })
        .collect();
    envelope(art, json!({ "modularity": art.partition.modularity, "communities": list }))
}

pub fn trend(art: &ModelArtifact, slug: &str) -> CliResult<Value> {
    known(art, slug)?;
    let t = art
        .trends
        .get(slug)
        .ok_or_else(|| Failure::validation("missing_value", format!("no trend series for `{slug}`")))?;
    Ok(envelope(art, t))
}

pub fn whatif(art: &ModelArtifact, req: &WhatIfRequest) -> CliResult<Value> {
    let adv = Advisor::new(art)?;
    Ok(envelope(art, adv.whatif(&req.bundle, &req.candidate)?))
}

pub fn recommend(art: &ModelArtifact, req: &RecommendRequest) -> CliResult<Value> {
    let adv = Advisor::new(art)?;
    Ok(envelope(art, json!({ "results": adv.recommend(&req.bundle, req.k)? })))
}
