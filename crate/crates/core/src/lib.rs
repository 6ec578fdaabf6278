//! Core algorithms for casting document-level event argument extraction as
//! extractive question answering.
//!
//! The crate is `no_std` and only needs an allocator. Everything that touches
//! the filesystem, the network, or a terminal lives in the `eaqa` crate; this
//! one is pure data transformation:
//!
//! - [`corpus`]: documents, events, arguments, ontology, coreference chains,
//!   validation and sentence-distance statistics.
//! - [`questiongen`]: template questions, LLM-derived question banks, the
//!   question-generation prompts, and the weak-supervision QG training set.
//! - [`augment`]: argument relocation (simple/verbose swapping, coreference
//!   replacement, paraphrase re-alignment).
//! - [`qadata`]: QA instance assembly under a train/test mixing policy.
//! - [`extraction`]: zero/few-shot extraction prompts, completion parsing,
//!   answer-to-span mapping.
//! - [`scoring`]: strict and lenient P/R/F1, breakdowns, role confusion and
//!   the error taxonomy.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod augment;
pub mod corpus;
pub mod extraction;
pub mod prompt;
pub mod qadata;
pub mod questiongen;
pub mod rng;
pub mod scoring;
pub mod span;
pub mod text;

pub use corpus::{
    AnnotatedDocument, ArgumentAnnotation, CorefChain, CorpusError, CorpusStats, Document,
    EventInstance, Mention, Ontology, Violation, ViolationKind,
};
pub use questiongen::{Question, QuestionStrategy};
pub use rng::SeededRng;
pub use span::Span;
