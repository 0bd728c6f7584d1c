//! Prices individual skills from project-level labour-market records and
//! explains those prices through the structure of the skill co-occurrence
//! network.
//!
//! The crate is organised as a pipeline:
//!
//! - [`ingest`]: project records, parsing, synthetic corpora.
//! - [`skillgraph`]: demand/supply, the co-occurrence graph, communities.
//! - [`valuation`]: premia, regression prices, windowed trends, OLS.
//! - [`complementarity`]: plain and value-weighted PageRank.
//! - [`analysis`]: the premium regressions, worker domains, the
//!   domain × community premium matrix, automation risk, cohort tests.
//! - [`pipeline`]: the build / value / complement / analyze stages.
//! - [`artifact`] / [`advisor`]: the persisted model and the what-if and
//!   recommendation queries served from it.
//! - [`export`]: CSV and JSON tables written from an artifact.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod advisor;
pub mod analysis;
pub mod artifact;
pub mod complementarity;
pub mod error;
pub mod export;
pub mod ingest;
pub mod pipeline;
pub mod skillgraph;
pub mod valuation;

pub use advisor::{Advisor, VerdictWeights, WhatIfResult};
pub use artifact::{ModelArtifact, SkillValuation, SCHEMA_VERSION};
pub use error::{Error, Result};
pub use pipeline::PipelineConfig;
