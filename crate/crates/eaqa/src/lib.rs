//! File formats, the completion client and the command-line pipeline built
//! on `eaqa-core`.

pub mod augment_io;
pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod error;
pub mod extract;
pub mod io;
pub mod llm;
pub mod manifest;
pub mod profile;
pub mod qa_io;
pub mod questions_io;
pub mod scoring_io;

pub use error::{Error, Result};
