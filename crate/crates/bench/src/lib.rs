//! Shared corpora for the benchmarks.

use skillprice_core::ingest::{generate_synthetic, ProjectTable, SynthConfig};

/// Seeded synthetic corpus of `n_projects` projects over 200 skills.
pub fn corpus(n_projects: usize) -> ProjectTable {
    generate_synthetic(&SynthConfig {
        n_workers: n_projects / 10,
        n_projects,
        n_skills: 200,
        n_communities: 8,
        seed: 7,
        ..Default::default()
    })
    .expect("valid config")
    .table
}
