//! File formats, command line and HTTP service.

pub mod cli;
pub mod document;
pub mod inline;
pub mod pipeline;
pub mod server;
pub mod tables;

pub use document::{digest, ExpertEntry, PriorSetDocument, ReportDocument, SpecDocument};
pub use inline::{format_spec, parse_spec};
pub use pipeline::{rank, FitMethod, RankRequest};
