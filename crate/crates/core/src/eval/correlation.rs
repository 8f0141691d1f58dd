//! Verb disambiguation and transitive sentence similarity.

use std::collections::HashMap;
use std::hash::Hash;

use rayon::prelude::*;

use crate::composition::{CompositionMethod, SvoComposer, TripleStore};
use crate::error::{Error, Result};
use crate::space::{LookupPolicy, SemanticSpace};
use crate::stats::spearman;
use crate::tensor::{cosine, cosine_slices};

use super::datasets::{DisambigItem, SentencePairItem, Svo};
use super::report::{EvaluationReport, ItemScore, Task};

/// Groups rows by key in first-appearance order and averages their scores.
fn average_by_key<K: Clone + Eq + Hash>(rows: impl IntoIterator<Item = (K, f64)>) -> Vec<(K, f64)> {
    let mut order: Vec<K> = Vec::new();
    let mut sums: HashMap<K, (f64, usize)> = HashMap::new();
    for (k, v) in rows {
        let e = sums.entry(k.clone()).or_insert_with(|| {
            order.push(k);
            (0.0, 0)
        });
        e.0 += v;
        e.1 += 1;
    }
    order
        .into_iter()
        .map(|k| {
            let (s, n) = sums[&k];
            (k, s / n as f64)
        })
        .collect()
}

fn finish(
    task: Task,
    method: CompositionMethod,
    scored: Vec<(String, f64, Option<f64>)>,
) -> Result<EvaluationReport> {
    let mut report = EvaluationReport::new(task, method.name());
    for (key, human, model) in scored {
        match model {
            Some(model) => report.items.push(ItemScore { key, human, model }),
            None => report.excluded += 1,
        }
    }
    report.evaluated = report.items.len();
    if report.evaluated < 2 {
        return Err(Error::InsufficientData(format!(
            "{} unique entries could be scored ({} excluded for missing words); need at least 2",
            report.evaluated, report.excluded
        )));
    }
    let human: Vec<f64> = report.items.iter().map(|i| i.human).collect();
    let model: Vec<f64> = report.items.iter().map(|i| i.model).collect();
    let rho = spearman(&human, &model)?;
    report.push_metric("rho", rho);
    Ok(report)
}

fn word_cosine(space: &SemanticSpace, lookup: &LookupPolicy, a: &str, b: &str) -> Result<Option<f64>> {
    match (lookup.resolve(space, a), lookup.resolve(space, b)) {
        (Some(x), Some(y)) => cosine_slices(x, y).map(Some),
        _ => Ok(None),
    }
}

fn svo_cosine(composer: &SvoComposer<'_>, a: &Svo, b: &Svo) -> Result<Option<f64>> {
    let x = composer.compose(&a.subject, &a.verb, &a.object)?;
    let y = composer.compose(&b.subject, &b.verb, &b.object)?;
    match (x, y) {
        (Some(x), Some(y)) => cosine(&x, &y).map(Some),
        _ => Ok(None),
    }
}

/// Spearman ρ between averaged human judgements and
/// `cos(verb sentence, landmark sentence)` per unique
/// (verb, subject, object, landmark). Entries with any word missing from
/// the space are excluded and counted.
pub fn eval_disambiguation(
    items: &[DisambigItem],
    space: &SemanticSpace,
    method: CompositionMethod,
    triples: Option<&TripleStore>,
    lookup: &LookupPolicy,
) -> Result<EvaluationReport> {
    if items.is_empty() {
        return Err(Error::InsufficientData("disambiguation dataset is empty".into()));
    }
    let entries = average_by_key(items.iter().map(|it| {
        (
            (it.verb.as_str(), it.subject.as_str(), it.object.as_str(), it.landmark.as_str()),
            it.judgement,
        )
    }));
    let mut composer = SvoComposer::new(method, space, lookup, triples)?;
    if method != CompositionMethod::VerbOnly {
        composer.prepare(entries.iter().flat_map(|((v, _, _, l), _)| [*v, *l]));
    }
    let scored = entries
        .par_iter()
        .map(|&((verb, sbj, obj, landmark), human)| {
            let model = if method == CompositionMethod::VerbOnly {
                word_cosine(space, lookup, verb, landmark)?
            } else {
                svo_cosine(&composer, &Svo::new(sbj, verb, obj), &Svo::new(sbj, landmark, obj))?
            };
            Ok((format!("{verb}|{sbj}|{obj}|{landmark}"), human, model))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(Task::Disambiguation, method, scored)
}

/// Spearman ρ between averaged human judgements and the cosine of the two
/// composed sentences per unique sentence pair.
pub fn eval_sentence_similarity(
    items: &[SentencePairItem],
    space: &SemanticSpace,
    method: CompositionMethod,
    triples: Option<&TripleStore>,
    lookup: &LookupPolicy,
) -> Result<EvaluationReport> {
    if items.is_empty() {
        return Err(Error::InsufficientData("sentence similarity dataset is empty".into()));
    }
    let entries = average_by_key(items.iter().map(|it| ((&it.first, &it.second), it.judgement)));
    let mut composer = SvoComposer::new(method, space, lookup, triples)?;
    if method != CompositionMethod::VerbOnly {
        composer.prepare(entries.iter().flat_map(|((a, b), _)| [a.verb.as_str(), b.verb.as_str()]));
    }
    let scored = entries
        .par_iter()
        .map(|&((a, b), human)| {
            let model = if method == CompositionMethod::VerbOnly {
                word_cosine(space, lookup, &a.verb, &b.verb)?
            } else {
                svo_cosine(&composer, a, b)?
            };
            let key = format!(
                "{}|{}|{}|{}|{}|{}",
                a.subject, a.verb, a.object, b.subject, b.verb, b.object
            );
            Ok((key, human, model))
        })
        .collect::<Result<Vec<_>>>()?;
    finish(Task::SentenceSimilarity, method, scored)
}
