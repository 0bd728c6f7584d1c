//! Command-line driver and HTTP service for skillprice models.

pub mod api;
pub mod commands;
pub mod diag;
pub mod server;
