//! QA dataset JSONL: a `{schema_version}` header line, then one instance
//! per line in canonical field order.

use std::path::Path;

use eaqa_core::qadata::{check_instance, CharSpan, QAInstance, QaDataset, Split, SCHEMA_VERSION};
use eaqa_core::{Question, QuestionStrategy, Span};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::questions_io::strategy_name;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub schema_version: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Offsets {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    pub multi_instance: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceRecord {
    pub instance_id: String,
    pub doc_id: String,
    pub event_index: usize,
    pub role: String,
    #[serde(with = "strategy_name")]
    pub strategy: QuestionStrategy,
    pub split: String,
    pub question: String,
    pub event_type: String,
    pub trigger: String,
    pub context_tokens: Vec<String>,
    /// Inclusive token offsets.
    pub answer: Option<Offsets>,
    /// Character offsets, end exclusive.
    pub char_answer: Option<Offsets>,
    pub flags: Flags,
}

impl From<&QAInstance> for InstanceRecord {
    fn from(i: &QAInstance) -> Self {
        InstanceRecord {
            instance_id: i.instance_id.clone(),
            doc_id: i.doc_id.clone(),
            event_index: i.event_index,
            role: i.role.clone(),
            strategy: i.question.strategy,
            split: i.split.as_str().to_string(),
            question: i.question.text.clone(),
            event_type: i.question.event_type.clone(),
            trigger: i.question.trigger_text.clone(),
            context_tokens: i.context.clone(),
            answer: i.answer.map(|s| Offsets { start: s.start, end: s.end }),
            char_answer: i.char_answer.map(|c| Offsets { start: c.start, end: c.end }),
            flags: Flags {
                multi_instance: i.multi_instance,
            },
        }
    }
}

impl InstanceRecord {
    pub fn into_instance(self) -> std::result::Result<QAInstance, String> {
        let split: Split = self.split.parse().map_err(|e: eaqa_core::qadata::QaError| e.to_string())?;
        let question = if self.strategy.is_contextualized() {
            Question::contextualized(self.question, self.strategy, &self.doc_id, &self.event_type, &self.trigger, &self.role)
        } else {
            Question::uncontextualized(self.question, self.strategy, &self.event_type, &self.trigger, &self.role)
        };
        if let Some(a) = self.answer {
            if a.start > a.end {
                return Err("answer: start after end".into());
            }
        }
        let inst = QAInstance {
            instance_id: self.instance_id,
            doc_id: self.doc_id,
            event_index: self.event_index,
            role: self.role,
            question,
            context: self.context_tokens,
            answer: self.answer.map(|a| Span::new(a.start, a.end)),
            char_answer: self.char_answer.map(|c| CharSpan { start: c.start, end: c.end }),
            split,
            multi_instance: self.flags.multi_instance,
        };
        check_instance(&inst).map_err(|e| e.to_string())?;
        Ok(inst)
    }
}

pub fn dataset_to_string(dataset: &QaDataset) -> String {
    let mut out = io::to_jsonl([Header {
        schema_version: dataset.schema_version,
    }]);
    out.push_str(&io::to_jsonl(dataset.instances.iter().map(InstanceRecord::from)));
    out
}

pub fn write_dataset(path: &Path, dataset: &QaDataset) -> Result<()> {
    dataset.validate().map_err(Error::data)?;
    io::write_atomic(path, dataset_to_string(dataset).as_bytes())
}

/// Parses and re-checks every instance; policy violations are rejected
/// with their line number.
pub fn parse_dataset_str(path: &Path, text: &str) -> Result<QaDataset> {
    let mut lines = io::lines(text);
    let record_err = |line: usize, message: String| Error::Record {
        path: path.to_path_buf(),
        line,
        message,
    };
    let (hline, htext) = lines.next().ok_or_else(|| record_err(1, "missing schema_version header".into()))?;
    let header: Header = io::parse_line(path, hline, htext)?;
    if header.schema_version != SCHEMA_VERSION {
        return Err(record_err(
            hline,
            format!("schema_version {} (supported: {SCHEMA_VERSION})", header.schema_version),
        ));
    }
    let mut instances = Vec::new();
    for (line, raw) in lines {
        let rec: InstanceRecord = io::parse_line(path, line, raw)?;
        instances.push(rec.into_instance().map_err(|m| record_err(line, m))?);
    }
    Ok(QaDataset {
        schema_version: header.schema_version,
        instances,
    })
}

pub fn read_dataset(path: &Path) -> Result<QaDataset> {
    parse_dataset_str(path, &io::read_to_string(path)?)
}
