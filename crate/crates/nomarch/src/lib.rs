//! Ingest, file formats, plotting and the command-line pipeline for nominal
//! archetypoid analysis. The numerical work lives in [`nomarch_core`].

pub mod cli;
pub mod config;
pub mod formats;
pub mod ingest;
pub mod pipeline;
pub mod svg;
