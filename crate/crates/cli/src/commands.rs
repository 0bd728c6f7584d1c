//! Subcommands. Each reads inputs, runs one stage and writes its outputs.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;
use serde_json::{json, Value};
use skillprice_core::analysis::{default_ai_skills, parse_skill_list, AutomationTable};
use skillprice_core::export::export_all;
use skillprice_core::ingest::{
    generate_synthetic, parse_projects, write_csv, write_jsonl, Format, ParseOptions, ProjectTable, SynthConfig,
};
use skillprice_core::pipeline;
use skillprice_core::valuation::parse_windows;
use skillprice_core::{ModelArtifact, PipelineConfig};

use crate::api::{self, RecommendRequest, WhatIfRequest};
use crate::diag::{CliResult, Failure};

#[derive(Debug, Parser)]
#[command(name = "skillprice", version, about = "Price skills from project records and explain them through the skill network")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct GlobalArgs {
    /// TOML file with `[pipeline]` and `[synth]` tables.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub min_projects: Option<usize>,
    #[arg(long, global = true)]
    pub damping: Option<f64>,
    /// Year windows, e.g. `2014-2017,2018-2021`.
    #[arg(long, global = true)]
    pub windows: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a project file and optionally convert it.
    Ingest {
        #[arg(long)]
        input: PathBuf,
        /// `csv` or `jsonl`; inferred from the extension by default.
        #[arg(long)]
        format: Option<String>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        output_format: Option<String>,
    },
    /// Write a seeded synthetic corpus and its ground truth.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        n_projects: Option<usize>,
        #[arg(long)]
        n_workers: Option<usize>,
        #[arg(long)]
        n_skills: Option<usize>,
        #[arg(long)]
        n_communities: Option<usize>,
    },
    /// Build the skill graph and its communities into a new artifact.
    Build {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: PathBuf,
        /// Build time in Unix seconds (default: SOURCE_DATE_EPOCH, else 0).
        #[arg(long)]
        timestamp: Option<i64>,
    },
    /// Premia, prices and windowed trends.
    Value {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        io: ArtifactArgs,
    },
    /// Plain and value-weighted PageRank.
    Complement {
        #[command(flatten)]
        io: ArtifactArgs,
    },
    /// Regressions, worker domains, domain matrix, automation, AI cohort.
    Analyze {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        io: ArtifactArgs,
        /// `occupation,probability` CSV.
        #[arg(long)]
        automation: Option<PathBuf>,
        /// One slug per line (default: the built-in AI skill list).
        #[arg(long)]
        ai_skills: Option<PathBuf>,
    },
    /// What-if and recommendation queries.
    Recommend {
        #[arg(long)]
        artifact: PathBuf,
        /// Comma-separated skill slugs.
        #[arg(long, value_delimiter = ',')]
        bundle: Vec<String>,
        #[arg(long, default_value_t = 10, allow_negative_numbers = true)]
        k: i64,
        /// Evaluate one candidate instead of ranking.
        #[arg(long)]
        candidate: Option<String>,
        /// JSON lines of `{"bundle": [...], "k": n}`; one result line each.
        #[arg(long, conflicts_with_all = ["bundle", "candidate"])]
        batch: Option<PathBuf>,
    },
    /// Serve the read-only HTTP API.
    Serve {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
    },
    /// Write CSV/JSON tables.
    Export {
        #[arg(long)]
        artifact: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Project file (CSV or JSONL).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct ArtifactArgs {
    #[arg(long)]
    pub artifact: PathBuf,
    /// Where to write the updated artifact (default: in place).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ConfigFile {
    pipeline: PipelineConfig,
    synth: SynthConfig,
}

fn read_config(global: &GlobalArgs) -> CliResult<ConfigFile> {
    let Some(path) = &global.config else {
        return Ok(ConfigFile::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| input_error(path, e))?;
    toml::from_str(&text).map_err(|e| Failure::validation("invalid_config", format!("{}: {e}", path.display())))
}

/// Applies command-line overrides on top of `config`.
fn apply_overrides(config: &mut PipelineConfig, global: &GlobalArgs) -> CliResult<()> {
    if let Some(s) = global.seed {
        config.seed = s;
    }
    if let Some(m) = global.min_projects {
        config.min_projects = m;
    }
    if let Some(d) = global.damping {
        config.pagerank.damping = d;
    }
    if let Some(w) = &global.windows {
        config.windows = parse_windows(w)?;
    }
    config.validate()?;
    Ok(())
}

fn input_error(path: &Path, e: std::io::Error) -> Failure {
    Failure::validation("unreadable_input", format!("{}: {e}", path.display()))
}

fn output_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::internal("io", format!("{}: {e}", path.display()))
}

fn format_for(path: &Path, explicit: Option<&str>) -> CliResult<Format> {
    let name = match explicit {
        Some(f) => f.to_string(),
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") | Some("ndjson") => "jsonl".into(),
            _ => "csv".into(),
        },
    };
    Ok(name.parse::<Format>()?)
}

fn read_projects(path: &Path, format: Option<&str>) -> CliResult<ProjectTable> {
    let fmt = format_for(path, format)?;
    let file = File::open(path).map_err(|e| input_error(path, e))?;
    let opts = ParseOptions {
        provenance: path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned()),
        ..Default::default()
    };
    let table = parse_projects(BufReader::new(file), fmt, &opts)?;
    if !table.row_errors.is_empty() {
        tracing::warn!(rejected = table.row_errors.len(), "rows rejected");
    }
    Ok(table)
}

pub fn load_artifact(path: &Path) -> CliResult<ModelArtifact> {
    let file = File::open(path).map_err(|e| input_error(path, e))?;
    ModelArtifact::load(BufReader::new(file)).map_err(|e| match e {
        skillprice_core::Error::Json(j) => Failure::validation("artifact", format!("{}: {j}", path.display())),
        other => other.into(),
    })
}

fn save_artifact(art: &ModelArtifact, path: &Path) -> CliResult<()> {
    let tmp = path.with_extension("json.tmp");
    let file = File::create(&tmp).map_err(|e| output_error(&tmp, e))?;
    let mut w = BufWriter::new(file);
    art.save(&mut w)?;
    w.flush().map_err(|e| output_error(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| output_error(path, e))?;
    Ok(())
}

fn timestamp(explicit: Option<i64>) -> CliResult<i64> {
    if let Some(t) = explicit {
        return Ok(t);
    }
    match std::env::var("SOURCE_DATE_EPOCH") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::validation("invalid_config", format!("SOURCE_DATE_EPOCH `{v}` is not an integer"))),
        Err(_) => Ok(0),
    }
}

fn print_json(value: &Value) {
    let line = serde_json::to_string(value).expect("values serialize");
    // a closed stdout (e.g. piped into `head`) is not an error of ours
    let _ = writeln!(std::io::stdout().lock(), "{line}");
}

/// Runs one parsed command line.
pub fn run(cli: Cli) -> CliResult<()> {
    let global = cli.global;
    let file = read_config(&global)?;
    match cli.command {
        Command::Ingest { input, format, output, output_format } => {
            let table = read_projects(&input, format.as_deref())?;
            if let Some(out) = &output {
                let fmt = format_for(out, output_format.as_deref())?;
                let f = File::create(out).map_err(|e| output_error(out, e))?;
                let mut w = BufWriter::new(f);
                match fmt {
                    Format::Csv => write_csv(&table, &mut w)?,
                    Format::Jsonl => write_jsonl(&table, &mut w)?,
                }
                w.flush().map_err(|e| output_error(out, e))?;
            }
            print_json(&json!({
                "records": table.len(),
                "rejected": table.row_errors.len(),
                "row_errors": table.row_errors,
            }));
        }
        Command::Synth { out, truth, n_projects, n_workers, n_skills, n_communities } => {
            let mut cfg = file.synth;
            if let Some(s) = global.seed {
                cfg.seed = s;
            }
            cfg.n_projects = n_projects.unwrap_or(cfg.n_projects);
            cfg.n_workers = n_workers.unwrap_or(cfg.n_workers);
            cfg.n_skills = n_skills.unwrap_or(cfg.n_skills);
            cfg.n_communities = n_communities.unwrap_or(cfg.n_communities);
            let corpus = generate_synthetic(&cfg)?;
            let fmt = format_for(&out, None)?;
            let f = File::create(&out).map_err(|e| output_error(&out, e))?;
            let mut w = BufWriter::new(f);
            match fmt {
                Format::Csv => write_csv(&corpus.table, &mut w)?,
                Format::Jsonl => write_jsonl(&corpus.table, &mut w)?,
            }
            w.flush().map_err(|e| output_error(&out, e))?;
            if let Some(path) = &truth {
                let text = serde_json::to_string_pretty(&corpus.truth).expect("truth serializes");
                std::fs::write(path, text + "\n").map_err(|e| output_error(path, e))?;
            }
            print_json(&json!({ "projects": corpus.table.len(), "seed": cfg.seed }));
        }
        Command::Build { data, out, timestamp: ts } => {
            let mut config = file.pipeline;
            apply_overrides(&mut config, &global)?;
            let table = read_projects(&data.data, data.format.as_deref())?;
            let art = pipeline::build(&table, &config, timestamp(ts)?)?;
            save_artifact(&art, &out)?;
            print_json(&json!({
                "skills": art.graph.node_count(),
                "edges": art.graph.edge_count(),
                "communities": art.partition.community_ids().len(),
                "modularity": art.partition.modularity,
            }));
        }
        Command::Value { data, io } => {
            let mut art = load_artifact(&io.artifact)?;
            apply_overrides(&mut art.config, &global)?;
            let table = read_projects(&data.data, data.format.as_deref())?;
            pipeline::value(&mut art, &table)?;
            save_artifact(&art, io.out.as_ref().unwrap_or(&io.artifact))?;
            print_json(&json!({ "premia": art.premia.len(), "prices": art.prices.len(), "trends": art.trends.len() }));
        }
        Command::Complement { io } => {
            let mut art = load_artifact(&io.artifact)?;
            apply_overrides(&mut art.config, &global)?;
            pipeline::complement(&mut art)?;
            save_artifact(&art, io.out.as_ref().unwrap_or(&io.artifact))?;
            let converged = [&art.pagerank, &art.wpr_premium, &art.wpr_price]
                .into_iter()
                .flatten()
                .all(|s| s.converged);
            print_json(&json!({ "converged": converged }));
        }
        Command::Analyze { data, io, automation, ai_skills } => {
            let mut art = load_artifact(&io.artifact)?;
            apply_overrides(&mut art.config, &global)?;
            let table = read_projects(&data.data, data.format.as_deref())?;
            let automation = match &automation {
                Some(p) => {
                    let f = File::open(p).map_err(|e| input_error(p, e))?;
                    let name = p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
                    Some(AutomationTable::from_csv(BufReader::new(f), name)?)
                }
                None => None,
            };
            let ai: BTreeSet<String> = match &ai_skills {
                Some(p) => parse_skill_list(&std::fs::read_to_string(p).map_err(|e| input_error(p, e))?),
                None => default_ai_skills(),
            };
            pipeline::analyze(&mut art, &table, automation.as_ref(), &ai)?;
            save_artifact(&art, io.out.as_ref().unwrap_or(&io.artifact))?;
            print_json(&json!({
                "models": art.models.len(),
                "domain_concentration": art.domain_concentration,
                "automation": art.automation.len(),
                "cohorts": art.cohorts.keys().collect::<Vec<_>>(),
                "warnings": art.warnings.len(),
            }));
        }
        Command::Recommend { artifact, bundle, k, candidate, batch } => {
            let art = load_artifact(&artifact)?;
            if let Some(path) = batch {
                let f = File::open(&path).map_err(|e| input_error(&path, e))?;
                for (i, line) in BufReader::new(f).lines().enumerate() {
                    let line = line.map_err(|e| input_error(&path, e))?;
                    if line.trim().is_empty() {
                        continue;
                    }
                    let req: RecommendRequest = serde_json::from_str(&line).map_err(|e| {
                        Failure::validation("malformed_request", format!("{} line {}: {e}", path.display(), i + 1))
                    })?;
                    print_json(&api::recommend(&art, &req)?);
                }
            } else if let Some(candidate) = candidate {
                print_json(&api::whatif(&art, &WhatIfRequest { bundle, candidate })?);
            } else {
                print_json(&api::recommend(&art, &RecommendRequest { bundle, k })?);
            }
        }
        Command::Serve { artifact, bind } => {
            let art = load_artifact(&artifact)?;
            let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::internal("runtime", e.to_string()))?;
            rt.block_on(crate::server::serve(art, bind))
                .map_err(|e| Failure::internal("io", format!("{bind}: {e}")))?;
        }
        Command::Export { artifact, out_dir } => {
            let art = load_artifact(&artifact)?;
            let files = export_all(&art, &out_dir)?;
            print_json(&json!({ "files": files.iter().map(|p| p.display().to_string()).collect::<Vec<_>>() }));
        }
    }
    Ok(())
}
