//! Augmentation side files: provenance, skipped arguments and paraphrase input.

use std::path::Path;

use eaqa_core::augment::{AugmentedInstance, ParaphraseScope, Skipped};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::io;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MovedRecord {
    pub event_index: usize,
    pub argument_index: usize,
    pub role: String,
    pub original_distance: i64,
    pub new_distance: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProvenanceRecord {
    pub doc_id: String,
    pub method: String,
    pub source_doc_id: String,
    pub seed: Option<u64>,
    pub moved: Vec<MovedRecord>,
    pub notes: Vec<String>,
}

impl From<&AugmentedInstance> for ProvenanceRecord {
    fn from(x: &AugmentedInstance) -> Self {
        ProvenanceRecord {
            doc_id: x.item.doc_id().to_string(),
            method: x.provenance.method.as_str().to_string(),
            source_doc_id: x.provenance.source_doc_id.clone(),
            seed: x.provenance.seed,
            moved: x
                .provenance
                .moved
                .iter()
                .map(|m| MovedRecord {
                    event_index: m.event_index,
                    argument_index: m.argument_index,
                    role: m.role.clone(),
                    original_distance: m.original_distance,
                    new_distance: m.new_distance,
                })
                .collect(),
            notes: x.notes.clone(),
        }
    }
}

pub fn provenance_to_string(items: &[AugmentedInstance]) -> String {
    io::to_jsonl(items.iter().map(ProvenanceRecord::from))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SkippedRecord {
    pub doc_id: String,
    pub event_index: usize,
    pub argument_index: usize,
    pub reason: String,
}

pub fn skipped_to_string(items: &[Skipped]) -> String {
    io::to_jsonl(items.iter().map(|s| SkippedRecord {
        doc_id: s.doc_id.clone(),
        event_index: s.event_index,
        argument_index: s.argument_index,
        reason: s.reason.to_string(),
    }))
}

/// One externally produced paraphrase. `sentence` absent means the text
/// replaces the whole document.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaphraseRecord {
    pub doc_id: String,
    #[serde(default)]
    pub sentence: Option<usize>,
    pub text: String,
}

impl ParaphraseRecord {
    pub fn scope(&self) -> ParaphraseScope {
        match self.sentence {
            Some(i) => ParaphraseScope::Sentence(i),
            None => ParaphraseScope::Document,
        }
    }
}

pub fn read_paraphrases(path: &Path) -> Result<Vec<ParaphraseRecord>> {
    Ok(io::read_jsonl(path)?.into_iter().map(|(_, r)| r).collect())
}
