//! Tabular exports of an artifact.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::artifact::ModelArtifact;
use crate::complementarity::ComplementarityScores;
use crate::{Error, Result};

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w)
}

/// `skill_a,skill_b,weight`
pub fn write_edges_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["skill_a", "skill_b", "weight"])?;
    for &(a, b, weight) in art.graph.edges() {
        out.write_record([art.graph.slug(a), art.graph.slug(b), &weight.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// `skill,demand,supply,community`
pub fn write_nodes_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["skill", "demand", "supply", "community"])?;
    for n in art.graph.nodes() {
        let c = art.partition.community_of(&n.skill).map(|c| c.to_string()).unwrap_or_default();
        out.write_record([n.skill.clone(), n.demand.to_string(), n.supply.to_string(), c])?;
    }
    out.flush()?;
    Ok(())
}

/// `{assignment, modularity, seed}`
pub fn write_partition_json(art: &ModelArtifact, mut w: impl Write) -> Result<()> {
    #[derive(Serialize)]
    struct Partition<'a> {
        assignment: &'a std::collections::BTreeMap<String, usize>,
        modularity: f64,
        seed: u64,
    }
    let p = &art.partition;
    serde_json::to_writer_pretty(
        &mut w,
        &Partition { assignment: &p.assignment, modularity: p.modularity, seed: p.seed },
    )?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `skill,premium,price_factor,price_additive,demand,supply,community`
pub fn write_valuation_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["skill", "premium", "price_factor", "price_additive", "demand", "supply", "community"])?;
    for v in art.valuations() {
        out.write_record([
            v.skill,
            opt(v.premium),
            opt(v.price_factor),
            opt(v.price_additive),
            v.demand.to_string(),
            v.supply.to_string(),
            v.community.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// `skill,window_start,window_end,premium,demand,supply`
pub fn write_trends_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["skill", "window_start", "window_end", "premium", "demand", "supply"])?;
    for t in art.trends.values() {
        for (i, (start, end)) in t.windows.iter().enumerate() {
            out.write_record([
                t.skill.clone(),
                start.to_string(),
                end.to_string(),
                opt(t.premium_per_window[i]),
                t.demand_per_window[i].to_string(),
                t.supply_per_window[i].to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// `skill,score,variant,value_source,converged` for every computed variant.
pub fn write_scores_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let mut out = csv_writer(w);
    out.write_record(["skill", "score", "variant", "value_source", "converged"])?;
    let all: Vec<&ComplementarityScores> =
        [&art.pagerank, &art.wpr_premium, &art.wpr_price].into_iter().flatten().collect();
    for s in all {
        let source = s.value_source.map(|v| v.as_str()).unwrap_or("");
        for (skill, score) in &s.scores {
            out.write_record([
                skill.as_str(),
                &score.to_string(),
                s.variant.as_str(),
                source,
                &s.converged.to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Fitted models with coefficients, standard errors and R² values.
pub fn write_models_json(art: &ModelArtifact, mut w: impl Write) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, &art.models)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// `domain,domain_label,community,community_label,premium`; the premium is
/// empty for missing cells.
pub fn write_domain_matrix_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let m = art
        .domain_matrix
        .as_ref()
        .ok_or_else(|| Error::Artifact("analysis stage has not been run".into()))?;
    let mut out = csv_writer(w);
    out.write_record(["domain", "domain_label", "community", "community_label", "premium"])?;
    for (r, d) in m.rows.iter().enumerate() {
        for (c, col) in m.cols.iter().enumerate() {
            out.write_record([
                d.to_string(),
                art.partition.label(*d),
                col.to_string(),
                art.partition.label(*col),
                opt(m.cells[r][c]),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// One row per skill ranked by premium (skills without one last, by slug).
pub fn write_skill_table_csv(art: &ModelArtifact, w: impl Write) -> Result<()> {
    let mut rows = art.valuations();
    rows.sort_by(|a, b| match (a.premium, b.premium) {
        (Some(x), Some(y)) => y.total_cmp(&x).then_with(|| a.skill.cmp(&b.skill)),
        (Some(_), None) => std::cmp::Ordering::Less,
        (None, Some(_)) => std::cmp::Ordering::Greater,
        (None, None) => a.skill.cmp(&b.skill),
    });
    let mut out = csv_writer(w);
    out.write_record([
        "rank",
        "skill",
        "community",
        "premium",
        "price_factor",
        "price_additive",
        "complementarity",
        "automation_probability",
    ])?;
    for (i, v) in rows.into_iter().enumerate() {
        out.write_record([
            (i + 1).to_string(),
            v.skill,
            v.community_label,
            opt(v.premium),
            opt(v.price_factor),
            opt(v.price_additive),
            opt(v.complementarity),
            opt(v.automation_probability),
        ])?;
    }
    out.flush()?;
    Ok(())
}

type Writer = fn(&ModelArtifact, BufWriter<File>) -> Result<()>;

/// Writes every table whose stage has run into `dir`; returns the paths.
pub fn export_all(art: &ModelArtifact, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut tables: Vec<(&str, Writer)> = vec![
        ("edges.csv", |a, w| write_edges_csv(a, w)),
        ("nodes.csv", |a, w| write_nodes_csv(a, w)),
        ("partition.json", |a, w| write_partition_json(a, w)),
    ];
    if !art.premia.is_empty() || !art.prices.is_empty() {
        tables.push(("valuation.csv", |a, w| write_valuation_csv(a, w)));
        tables.push(("trends.csv", |a, w| write_trends_csv(a, w)));
    }
    if art.pagerank.is_some() {
        tables.push(("scores.csv", |a, w| write_scores_csv(a, w)));
        tables.push(("skill_table.csv", |a, w| write_skill_table_csv(a, w)));
    }
    if art.domain_matrix.is_some() {
        tables.push(("models.json", |a, w| write_models_json(a, w)));
        tables.push(("domain_matrix.csv", |a, w| write_domain_matrix_csv(a, w)));
    }
    let mut written = Vec::new();
    for (name, write) in tables {
        let path = dir.join(name);
        write(art, BufWriter::new(File::create(&path)?))?;
        written.push(path);
    }
    Ok(written)
}
