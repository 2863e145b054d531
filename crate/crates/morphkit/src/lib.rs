//! File formats, parallel distance matrices, pipelines and the command
//! line for `morphkit-core`.

pub mod cli;
pub mod compute;
pub mod config;
pub mod distfile;
pub mod error;
pub mod export;
pub mod fetch;
pub mod image;
pub mod pipeline;
pub mod provenance;
pub mod shapes;
pub mod svg;

pub use error::{Error, ExitKind, Result};
pub use morphkit_core as core;
