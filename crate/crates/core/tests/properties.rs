use std::collections::{BTreeMap, BTreeSet};

use eaqa_core::augment::{
    augment_document, candidate_positions, doc_key, simple_swap, verbose_sentence, AugmentMethod, AugmentPlan,
    SwapOptions,
};
use eaqa_core::corpus::corpus_stats;
use eaqa_core::extraction::{map_answer_to_spans, parse_completion, Answer};
use eaqa_core::qadata::{build_qa_dataset, MixPolicy, QuestionSources, Split, SplitCorpus};
use eaqa_core::questiongen::{
    generate_template_question, instantiate_bank_question, QuestionError, RoleQuestionBank, WhLexicon,
};
use eaqa_core::scoring::{score_strict, PredictionRecord};
use eaqa_core::text::{tokenize, MatchMode};
use eaqa_core::{
    AnnotatedDocument, ArgumentAnnotation, Document, EventInstance, Ontology, QuestionStrategy, SeededRng, Span,
};
use proptest::prelude::*;
use rand::Rng;

const WORDS: &[&str] = &["Iran", "iran", "the", "deal", "oil", "said", "Turkey", "men", "of", "city"];

fn ontology() -> Ontology {
    let mut roles = BTreeMap::new();
    roles.insert("attack".to_string(), vec!["attacker".into(), "target".into(), "place".into()]);
    roles.insert("transfer".to_string(), vec!["giver".into(), "artifact".into(), "place".into()]);
    Ontology::new(roles).unwrap()
}

/// A document with pairwise disjoint annotations, derived from `seed`.
fn document(seed: u64, doc_id: &str, ontology: &Ontology) -> AnnotatedDocument {
    let mut r = SeededRng::new(seed);
    let sentences: Vec<Vec<&str>> = (0..r.gen_range(1..=5))
        .map(|_| {
            let mut s: Vec<&str> = (0..r.gen_range(2..=7)).map(|_| WORDS[r.gen_range(0..WORDS.len())]).collect();
            s.push(".");
            s
        })
        .collect();
    let doc = Document::from_sentences(doc_id, &sentences);
    let n = doc.token_count();
    let mut used = vec![false; n];
    let mut claim = |r: &mut SeededRng, len: usize| -> Option<Span> {
        for _ in 0..10 {
            let start = r.gen_range(0..n);
            let span = Span::new(start, (start + len - 1).min(n - 1));
            let same_sentence = doc.sentence_of(span.start).ok() == doc.sentence_of(span.end).ok();
            if same_sentence && span.to_range().all(|i| !used[i]) {
                span.to_range().for_each(|i| used[i] = true);
                return Some(span);
            }
        }
        None
    };
    let types: Vec<&str> = ontology.event_types().collect();
    let mut events = Vec::new();
    for _ in 0..r.gen_range(1..=2) {
        let event_type = types[r.gen_range(0..types.len())];
        let Some(trigger) = claim(&mut r, 1) else { continue };
        let mut arguments = Vec::new();
        for role in ontology.roles_for(event_type).unwrap() {
            for _ in 0..r.gen_range(0..=2) {
                let len = r.gen_range(1..=2);
                if let Some(span) = claim(&mut r, len) {
                    arguments.push(ArgumentAnnotation::new(role.clone(), span));
                }
            }
        }
        events.push(EventInstance::new(event_type, trigger, arguments));
    }
    AnnotatedDocument::new(doc, events)
}

fn corpus(seed: u64, prefix: &str, ontology: &Ontology) -> Vec<AnnotatedDocument> {
    let n = (seed % 4 + 1) as usize;
    (0..n)
        .map(|i| document(seed.wrapping_mul(31).wrapping_add(i as u64), &format!("{prefix}{i}"), ontology))
        .collect()
}

fn bank(strategy: QuestionStrategy, ontology: &Ontology) -> RoleQuestionBank {
    let entries = ontology
        .all_roles()
        .into_iter()
        .map(|r| (r.to_string(), format!("Which {r} does [X] involve?")))
        .collect();
    RoleQuestionBank::from_entries(strategy, entries, ontology).unwrap().0
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn span_distance_is_antisymmetric_sentence_difference(seed in any::<u64>(), a in 0usize..64, b in 0usize..64) {
        let item = document(seed, "d", &ontology());
        let doc = &item.document;
        let n = doc.token_count();
        let (x, y) = (Span::single(a % n), Span::single(b % n));
        let dxy = doc.span_distance(x, y).unwrap();
        prop_assert_eq!(dxy, -doc.span_distance(y, x).unwrap());
        let expected = doc.sentence_of(y.start).unwrap() as i64 - doc.sentence_of(x.start).unwrap() as i64;
        prop_assert_eq!(dxy, expected);
    }

    #[test]
    fn stats_partition_arguments(seed in any::<u64>()) {
        let o = ontology();
        let c = corpus(seed, "s", &o);
        let stats = corpus_stats(&c, Some(&o));
        let total: usize = c.iter().map(|d| d.events.iter().map(|e| e.arguments.len()).sum::<usize>()).sum();
        prop_assert_eq!(stats.arguments, total);
        prop_assert_eq!(stats.by_distance.values().sum::<usize>(), total);
        prop_assert_eq!(stats.intra_sentential + stats.inter_sentential, total);
        prop_assert_eq!(stats.intra_sentential, stats.by_distance.get(&0).copied().unwrap_or(0));
    }

    #[test]
    fn template_questions_follow_the_grammar(trigger in "[a-z]{1,12}( [a-z]{1,8})?", role in "[a-z]{1,15}") {
        let re = regex::Regex::new(r"^(What|Where|Who|How) is the .+ of the event .+\?$").unwrap();
        let q = generate_template_question(&trigger, &role, "t", &WhLexicon::default());
        prop_assert!(re.is_match(&q.text), "{}", q.text);
        let tail = format!("the {role} of the event {trigger}?");
        prop_assert!(q.text.contains(&tail), "{}", q.text);
        prop_assert!(q.is_consistent());
    }

    #[test]
    fn banks_must_cover_every_role(drop in 0usize..5) {
        let o = ontology();
        let roles: Vec<&str> = o.all_roles().into_iter().collect();
        let dropped = roles[drop % roles.len()];
        let entries = roles
            .iter()
            .filter(|r| **r != dropped)
            .map(|r| (r.to_string(), format!("Which {r} in [X]?")))
            .collect();
        let err = RoleQuestionBank::from_entries(QuestionStrategy::PromptZero, entries, &o).unwrap_err();
        prop_assert_eq!(err, QuestionError::MissingRole(dropped.to_string()));
        let full = bank(QuestionStrategy::PromptFew, &o);
        for r in &roles {
            let q = instantiate_bank_question(&full, "seized", r, "attack").unwrap();
            prop_assert_eq!(q.text, format!("Which {r} does seized involve?"));
        }
    }

    #[test]
    fn qa_build_covers_every_role_without_leaking(seed in any::<u64>(), few in any::<bool>(), window in prop::option::of(1usize..4)) {
        let o = ontology();
        let train = corpus(seed, "tr", &o);
        let test = corpus(seed ^ 0x5555, "te", &o);
        let extra = if few { QuestionStrategy::PromptFew } else { QuestionStrategy::PromptZero };
        let mut sources = QuestionSources::default();
        sources.banks.insert(extra, bank(extra, &o));
        let policy = MixPolicy {
            train_strategies: [QuestionStrategy::Template, extra].into_iter().collect(),
            test_strategy: extra,
            context_window: window,
            ..MixPolicy::default()
        };
        let ds = build_qa_dataset(
            &[SplitCorpus { split: Split::Train, documents: &train }, SplitCorpus { split: Split::Test, documents: &test }],
            &o,
            &sources,
            &policy,
        ).unwrap();
        ds.validate().unwrap();
        let expected = |docs: &[AnnotatedDocument], strategies: usize| -> usize {
            docs.iter().map(|d| d.events.iter().map(|e| o.roles_for(&e.event_type).unwrap().len()).sum::<usize>()).sum::<usize>() * strategies
        };
        let count = |split| ds.instances.iter().filter(|i| i.split == split).count();
        prop_assert_eq!(count(Split::Train), expected(&train, 2));
        prop_assert_eq!(count(Split::Test), expected(&test, 1));
        let all: Vec<&AnnotatedDocument> = train.iter().chain(&test).collect();
        for inst in &ds.instances {
            prop_assert!(inst.split == Split::Train || inst.question.strategy == extra);
            let item = all.iter().find(|d| d.doc_id() == inst.doc_id && (inst.split == Split::Train) == inst.doc_id.starts_with("tr")).unwrap();
            let event = &item.events[inst.event_index];
            let gold: Vec<Span> = event.spans_for(&inst.role).collect();
            prop_assert_eq!(inst.multi_instance, gold.len() > 1);
            match inst.answer {
                Some(a) => {
                    let text = inst.context[a.to_range()].join(" ");
                    prop_assert_eq!(text, item.document.span_text(gold[0]));
                }
                None => prop_assert!(gold.is_empty() || window.is_some()),
            }
        }
    }

    #[test]
    fn parse_completion_is_total(text in "\\PC{0,200}", n in 0usize..5) {
        let roles = ["giver", "artifact", "place", "target", "attacker"];
        let expected = &roles[..n];
        let parsed = parse_completion(&text, expected);
        let keys: BTreeSet<&str> = parsed.answers.keys().map(String::as_str).collect();
        prop_assert_eq!(keys, expected.iter().copied().collect::<BTreeSet<_>>());
        for a in parsed.answers.values() {
            if let Answer::Text(t) = a {
                prop_assert!(!t.trim().is_empty());
            }
        }
    }

    #[test]
    fn labeled_completions_round_trip(answers in prop::collection::vec(prop::option::of("[A-Za-z][a-z]{0,6}( [a-z]{1,6}){0,2}"), 3)) {
        let roles = ["giver", "artifact", "place"];
        let text: String = roles
            .iter()
            .zip(&answers)
            .enumerate()
            .map(|(i, (r, a))| format!("{}. {r}: {}\n", i + 1, a.as_deref().unwrap_or("None")))
            .collect();
        let parsed = parse_completion(&text, &roles);
        prop_assert!(parsed.is_clean(), "{:?}", parsed.warnings);
        for (r, a) in roles.iter().zip(&answers) {
            let expected = match a.as_deref() {
                Some(t) if !matches!(t.to_lowercase().as_str(), "none" | "na" | "unknown") => Answer::Text(t.to_string()),
                _ => Answer::NoAnswer,
            };
            prop_assert_eq!(&parsed.answers[*r], &expected);
        }
    }

    #[test]
    fn mapped_spans_spell_the_answer(seed in any::<u64>(), start in 0usize..40, len in 1usize..4) {
        let item = document(seed, "m", &ontology());
        let doc = &item.document;
        let n = doc.token_count();
        let s = start % n;
        let span = Span::new(s, (s + len - 1).min(n - 1));
        let answer = doc.span_text(span).to_uppercase();
        let needle = tokenize(&answer);
        let (spans, mode) = map_answer_to_spans(doc, &answer);
        prop_assert!(!spans.is_empty());
        for sp in &spans {
            let got = doc.span_tokens(*sp);
            match mode {
                MatchMode::Exact => prop_assert_eq!(got, &needle[..]),
                MatchMode::CaseInsensitive => prop_assert_eq!(
                    got.iter().map(|t| t.to_lowercase()).collect::<Vec<_>>(),
                    needle.iter().map(|t| t.to_lowercase()).collect::<Vec<_>>()
                ),
            }
        }
    }

    #[test]
    fn swaps_keep_every_other_annotation(seed in any::<u64>(), swap_seed in any::<u64>()) {
        let item = document(seed, "w", &ontology());
        for method in [AugmentMethod::SimpleSwap, AugmentMethod::VerboseSwap] {
            let plan = AugmentPlan { method, seed: swap_seed, options: SwapOptions::default(), chains: None };
            let (made, _) = augment_document(&item, &plan);
            for inst in made {
                let m = &inst.provenance.moved[0];
                let d = &inst.item;
                for (a, b) in item.events.iter().zip(&d.events) {
                    prop_assert_eq!(item.document.span_text(a.trigger), d.document.span_text(b.trigger));
                    for (x, y) in a.arguments.iter().zip(&b.arguments) {
                        prop_assert_eq!(item.document.span_text(x.span), d.document.span_text(y.span));
                    }
                }
                let new_span = d.events[m.event_index].arguments[m.argument_index].span;
                prop_assert_eq!(d.document.span_distance(d.events[m.event_index].trigger, new_span).unwrap(), m.new_distance);
                prop_assert!(d.validate(None).is_empty(), "{:?}", d.validate(None));
            }
        }
    }

    #[test]
    fn strict_inter_never_leaves_an_argument_in_place(seed in any::<u64>(), swap_seed in any::<u64>()) {
        let item = document(seed, "x", &ontology());
        let plan = AugmentPlan {
            method: AugmentMethod::SimpleSwap,
            seed: swap_seed,
            options: SwapOptions { strict_inter: true },
            chains: None,
        };
        for inst in augment_document(&item, &plan).0 {
            prop_assert_ne!(inst.provenance.moved[0].new_distance, 0);
        }
    }

    #[test]
    fn gold_scores_perfectly_against_itself(seed in any::<u64>()) {
        let o = ontology();
        let mut gold = corpus(seed, "g", &o);
        for d in &mut gold {
            for e in &mut d.events {
                let mut seen = BTreeSet::new();
                e.arguments.retain(|a| seen.insert(a.role.clone()));
            }
        }
        let preds: Vec<PredictionRecord> = gold
            .iter()
            .flat_map(|d| d.events.iter().enumerate().flat_map(move |(e, ev)| {
                ev.arguments.iter().map(move |a| PredictionRecord::new(d.doc_id(), e, &a.role, Some(a.span), "g"))
            }))
            .collect();
        let report = score_strict(&preds, &gold).unwrap();
        prop_assert_eq!(report.counts().correct, report.counts().gold);
        prop_assert_eq!(report.counts().correct, report.counts().predicted);
    }
}

#[test]
fn candidate_positions_are_all_boundaries() {
    let doc = Document::from_sentences(
        "b",
        &[vec!["A", "met", "B", "."], vec!["C", "left", "."], vec!["D", "."], vec!["E", "."]],
    );
    let item = AnnotatedDocument::new(
        doc,
        vec![EventInstance::new("meet", Span::single(1), vec![ArgumentAnnotation::new("who", Span::single(2))])],
    );
    let positions = candidate_positions(&item, 0, 0, SwapOptions::default()).unwrap();
    assert_eq!(positions.len(), 5);
    let strict = candidate_positions(&item, 0, 0, SwapOptions { strict_inter: true }).unwrap();
    assert!(strict.len() < 5);
    let out = simple_swap(&item, 0, 0, &mut SeededRng::new(3), SwapOptions::default()).unwrap();
    assert_eq!(out.item.document.span_text(out.item.events[0].arguments[0].span), "B");
}

#[test]
fn verbose_sentence_matches_the_worked_example() {
    let words = |s: &str| s.split(' ').map(String::from).collect::<Vec<_>>();
    let (tokens, offset) = verbose_sentence("violator", &words("agreement"), &words("Clinton"));
    assert_eq!(tokens.join(" "), "The violator of the event agreement is Clinton .");
    assert_eq!(tokens.len(), 9);
    assert_eq!(&tokens[offset], "Clinton");
}

#[test]
fn derived_streams_are_stable_and_independent() {
    let draw = |path: &[u64]| {
        let mut r = SeededRng::derive(9, path);
        (0..8).map(|_| r.index(1000)).collect::<Vec<_>>()
    };
    let k = doc_key("doc-1");
    assert_eq!(draw(&[k, 0, 0]), draw(&[k, 0, 0]));
    assert_ne!(draw(&[k, 0, 0]), draw(&[k, 0, 1]));
    assert_ne!(draw(&[k, 0, 0]), draw(&[doc_key("doc-2"), 0, 0]));
}
