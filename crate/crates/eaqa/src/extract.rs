//! Prompted extraction over a corpus: build prompts, call the endpoint,
//! parse and map answers to prediction records.

use eaqa_core::extraction::{
    build_few_shot_prompt, build_zero_shot_prompt, parse_completion, pick_exemplars, predictions_from_answers,
    ExtractionPromptBundle, FewShotExemplar, ParseWarning, PromptWarning,
};
use eaqa_core::prompt::PromptAssets;
use eaqa_core::questiongen::{generate_template_question, instantiate_bank_question, RoleQuestionBank, WhLexicon};
use eaqa_core::scoring::PredictionRecord;
use eaqa_core::{AnnotatedDocument, Ontology, Question, SeededRng};
use eaqa_core::augment::doc_key;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::llm::{Client, Transport};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    Zero,
    Few,
}

/// Where extraction questions come from.
#[derive(Debug, Clone, Copy)]
pub enum QuestionSource<'a> {
    Template(&'a WhLexicon),
    Bank(&'a RoleQuestionBank),
}

impl QuestionSource<'_> {
    pub fn questions(&self, item: &AnnotatedDocument, event_index: usize, ontology: &Ontology) -> Result<Vec<Question>> {
        let event = &item.events[event_index];
        let roles = ontology
            .roles_for(&event.event_type)
            .ok_or_else(|| Error::Data(format!("event type {} not in ontology", event.event_type)))?;
        let trigger = item.document.span_text(event.trigger);
        roles
            .iter()
            .map(|role| match self {
                QuestionSource::Template(lex) => Ok(generate_template_question(&trigger, role, &event.event_type, lex)),
                QuestionSource::Bank(bank) => {
                    instantiate_bank_question(bank, &trigger, role, &event.event_type).map_err(Error::data)
                }
            })
            .collect()
    }
}

pub struct ExtractionRun<'a> {
    pub ontology: &'a Ontology,
    pub source: QuestionSource<'a>,
    pub assets: &'a PromptAssets,
    pub shots: Shots,
    /// Training events offered as few-shot exemplars.
    pub exemplar_pool: &'a [(&'a AnnotatedDocument, usize)],
    pub seed: u64,
    pub one_per_call: bool,
    pub system_id: &'a str,
}

/// One prompt with its position in the corpus.
#[derive(Debug, Clone)]
pub struct PlannedPrompt {
    pub doc_index: usize,
    pub event_index: usize,
    pub bundle: ExtractionPromptBundle,
}

impl ExtractionRun<'_> {
    /// Every prompt the run will send, in corpus order.
    pub fn plan(&self, corpus: &[AnnotatedDocument]) -> Result<Vec<PlannedPrompt>> {
        let mut out = Vec::new();
        for (d, item) in corpus.iter().enumerate() {
            for (e, event) in item.events.iter().enumerate() {
                let questions = self.source.questions(item, e, self.ontology)?;
                let exemplars = match self.shots {
                    Shots::Zero => Vec::new(),
                    Shots::Few => {
                        let mut rng = SeededRng::derive(self.seed, &[doc_key(item.doc_id()), e as u64]);
                        let pool: Vec<&(&AnnotatedDocument, usize)> = self
                            .exemplar_pool
                            .iter()
                            .filter(|(doc, ei)| !(doc.doc_id() == item.doc_id() && *ei == e))
                            .collect();
                        let picked = pick_exemplars(&pool, &mut rng).map_err(Error::data)?;
                        picked
                            .iter()
                            .map(|(doc, ei)| {
                                let qs = self.source.questions(doc, *ei, self.ontology)?;
                                FewShotExemplar::from_gold(doc, *ei, &qs).map_err(Error::data)
                            })
                            .collect::<Result<Vec<_>>>()?
                    }
                };
                let groups: Vec<Vec<Question>> = if self.one_per_call {
                    questions.into_iter().map(|q| vec![q]).collect()
                } else {
                    vec![questions]
                };
                for qs in groups {
                    let bundle = match self.shots {
                        Shots::Zero => build_zero_shot_prompt(&item.document, event, &qs, self.assets),
                        Shots::Few => build_few_shot_prompt(&item.document, event, &qs, &exemplars, self.assets),
                    }
                    .map_err(Error::data)?;
                    for w in &bundle.warnings {
                        if *w == PromptWarning::NoUnanswerableExemplar {
                            tracing::warn!(stage = "llm-extract", doc_id = item.doc_id(), event = e, "exemplars have no unanswerable question");
                        }
                    }
                    out.push(PlannedPrompt {
                        doc_index: d,
                        event_index: e,
                        bundle,
                    });
                }
            }
        }
        Ok(out)
    }

    /// Sends every planned prompt (in parallel on the current rayon pool)
    /// and returns predictions in plan order.
    pub fn execute<T: Transport>(
        &self,
        corpus: &[AnnotatedDocument],
        client: &Client<T>,
    ) -> Result<(Vec<PredictionRecord>, Vec<ParseWarning>)> {
        let plan = self.plan(corpus)?;
        let completions: Vec<std::result::Result<String, crate::llm::ClientError>> =
            plan.par_iter().map(|p| client.complete(&p.bundle.prompt)).collect();
        let mut preds = Vec::new();
        let mut warnings = Vec::new();
        for (p, completion) in plan.iter().zip(completions) {
            let text = completion?;
            let item = &corpus[p.doc_index];
            let parsed = parse_completion(&text, &p.bundle.roles());
            for w in &parsed.warnings {
                tracing::warn!(stage = "llm-extract", doc_id = item.doc_id(), event = p.event_index, warning = ?w, "completion parse");
            }
            warnings.extend(parsed.warnings.iter().cloned());
            preds.extend(predictions_from_answers(item, p.event_index, &parsed, self.system_id));
        }
        Ok((preds, warnings))
    }
}

/// Every (document, event) of a corpus, as an exemplar pool.
pub fn exemplar_pool(corpus: &[AnnotatedDocument]) -> Vec<(&AnnotatedDocument, usize)> {
    corpus
        .iter()
        .flat_map(|d| (0..d.events.len()).map(move |e| (d, e)))
        .collect()
}
