//! Dialogue-act tagging with a k-nearest-neighbour classifier over composed
//! utterance vectors.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use rayon::prelude::*;

use crate::composition::{compose_sequence, CompositionMethod};
use crate::error::{Error, Result};
use crate::space::{LookupPolicy, SemanticSpace};
use crate::svd::truncated_svd;
use crate::tensor::{dot, euclidean_sq, Matrix};

use super::datasets::DialogueRecord;
use super::report::{EvaluationReport, Task};

/// Tag carried by the continuation segments of an interrupted utterance.
pub const CONTINUATION_TAG: &str = "+";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Utterance {
    pub dialogue_id: String,
    pub turn_id: String,
    pub tokens: Vec<String>,
    pub act_tag: String,
}

#[derive(Debug, Clone)]
pub struct DialogueOptions {
    pub k: usize,
    /// `None` keeps the composed vectors at full dimension.
    pub svd_dim: Option<usize>,
    /// Disfluency markers, compared case-insensitively.
    pub markers: HashSet<String>,
}

impl Default for DialogueOptions {
    fn default() -> Self {
        DialogueOptions {
            k: 5,
            svd_dim: Some(50),
            markers: ["uh", "um", "uh-huh"].into_iter().map(String::from).collect(),
        }
    }
}

fn is_annotation(token: &str) -> bool {
    const BRACKETS: &str = "{}[]()<>+/#-";
    token.chars().all(|c| BRACKETS.contains(c))
        || (token.starts_with('{') && token.len() == 2)
        || (token.starts_with('<') && token.ends_with('>'))
}

/// Concatenates segments in order, then drops disfluency markers,
/// transcription brackets and commas.
pub fn clean_tokens(segments: &[&str], markers: &HashSet<String>) -> Vec<String> {
    segments
        .iter()
        .flat_map(|s| s.split_whitespace())
        .filter(|t| !is_annotation(t))
        .map(|t| t.replace(',', ""))
        .filter(|t| !t.is_empty() && !markers.contains(&t.to_lowercase()))
        .collect()
}

/// Builds one utterance from its segments. The tag is the first tag that is
/// not a continuation marker.
pub fn preprocess_utterance(segments: &[&DialogueRecord], options: &DialogueOptions) -> Utterance {
    let texts: Vec<&str> = segments.iter().map(|r| r.text.as_str()).collect();
    let tag = segments
        .iter()
        .map(|r| r.act_tag.as_str())
        .find(|t| *t != CONTINUATION_TAG)
        .unwrap_or(CONTINUATION_TAG);
    let first = segments.first();
    Utterance {
        dialogue_id: first.map(|r| r.dialogue_id.clone()).unwrap_or_default(),
        turn_id: first.map(|r| r.turn_id.clone()).unwrap_or_default(),
        tokens: clean_tokens(&texts, &options.markers),
        act_tag: tag.to_string(),
    }
}

fn speaker(turn_id: &str) -> &str {
    turn_id.split('.').next().unwrap_or(turn_id)
}

/// Groups rows into utterances. Rows sharing (dialogue, turn) are segments
/// of one utterance. A group tagged only with the continuation marker is
/// appended to the previous utterance of the same speaker in its dialogue
/// (the previous utterance of the dialogue when the speaker has none).
pub fn group_utterances(records: &[DialogueRecord], options: &DialogueOptions) -> Vec<Utterance> {
    let mut groups: Vec<Vec<&DialogueRecord>> = Vec::new();
    let mut by_key: HashMap<(&str, &str), usize> = HashMap::new();
    for r in records {
        let next = groups.len();
        let g = *by_key.entry((&r.dialogue_id, &r.turn_id)).or_insert(next);
        if g == next {
            groups.push(Vec::new());
        }
        groups[g].push(r);
    }

    let mut merged: Vec<Vec<&DialogueRecord>> = Vec::new();
    for group in groups {
        let continuation = group.iter().all(|r| r.act_tag == CONTINUATION_TAG);
        let target = continuation
            .then(|| {
                let (dialogue, who) = (&group[0].dialogue_id, speaker(&group[0].turn_id));
                let same_dialogue = |g: &&Vec<&DialogueRecord>| g[0].dialogue_id == *dialogue;
                let mut earlier = merged.iter().enumerate().rev().filter(|(_, g)| same_dialogue(g));
                let fallback = earlier.clone().next().map(|(i, _)| i);
                earlier
                    .find(|(_, g)| speaker(&g[0].turn_id) == who)
                    .map(|(i, _)| i)
                    .or(fallback)
            })
            .flatten();
        match target {
            Some(i) => merged[i].extend(group),
            None => merged.push(group),
        }
    }
    merged.iter().map(|g| preprocess_utterance(g, options)).collect()
}

/// Splits utterances by dialogue id. Utterances in neither list are dropped.
pub fn split_by_dialogue(
    utterances: Vec<Utterance>,
    train_ids: &HashSet<String>,
    test_ids: &HashSet<String>,
) -> (Vec<Utterance>, Vec<Utterance>) {
    let mut train = Vec::new();
    let mut test = Vec::new();
    for u in utterances {
        if test_ids.contains(&u.dialogue_id) {
            test.push(u);
        } else if train_ids.contains(&u.dialogue_id) {
            train.push(u);
        }
    }
    (train, test)
}

/// The `k` training rows closest to `query` by Euclidean distance, as
/// `(squared distance, row)` sorted by distance then row.
pub fn nearest_neighbours(train: &[f64], dim: usize, query: &[f64], k: usize) -> Vec<(f64, usize)> {
    let mut all: Vec<(f64, usize)> = train
        .chunks_exact(dim.max(1))
        .enumerate()
        .map(|(i, row)| (euclidean_sq(row, query), i))
        .collect();
    let by_dist = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    let k = k.min(all.len());
    if k == 0 {
        return Vec::new();
    }
    if k < all.len() {
        all.select_nth_unstable_by(k - 1, by_dist);
        all.truncate(k);
    }
    all.sort_by(by_dist);
    all
}

/// Majority vote; among tied classes the one owning the nearest neighbour
/// wins.
pub fn majority_vote(neighbours: &[(f64, usize)], labels: &[usize]) -> Option<usize> {
    let mut votes: HashMap<usize, usize> = HashMap::new();
    for &(_, i) in neighbours {
        *votes.entry(labels[i]).or_default() += 1;
    }
    let top = votes.values().copied().max()?;
    neighbours
        .iter()
        .map(|&(_, i)| labels[i])
        .find(|l| votes[l] == top)
}

/// F averaged over every class that occurs in the gold or predicted labels.
pub fn macro_fscore(predicted: &[usize], gold: &[usize]) -> f64 {
    let classes: BTreeSet<usize> = predicted.iter().chain(gold).copied().collect();
    if classes.is_empty() {
        return 0.0;
    }
    let total: f64 = classes
        .iter()
        .map(|&c| {
            let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
            for (&p, &g) in predicted.iter().zip(gold) {
                match (p == c, g == c) {
                    (true, true) => tp += 1.0,
                    (true, false) => fp += 1.0,
                    (false, true) => fn_ += 1.0,
                    _ => {}
                }
            }
            let p = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
            let r = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
            if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            }
        })
        .sum();
    total / classes.len() as f64
}

fn utterance_matrix(
    utterances: &[Utterance],
    space: &SemanticSpace,
    method: CompositionMethod,
    lookup: &LookupPolicy,
) -> Result<(Vec<f64>, usize)> {
    let rows = utterances
        .par_iter()
        .map(|u| {
            if u.tokens.is_empty() {
                return Ok((vec![0.0; space.dim()], true));
            }
            let tokens: Vec<&str> = u.tokens.iter().map(String::as_str).collect();
            let c = compose_sequence(method, space, &tokens, None, lookup)?;
            Ok((c.representation.into_vec(), c.resolved == 0))
        })
        .collect::<Result<Vec<_>>>()?;
    let empty = rows.iter().filter(|(_, e)| *e).count();
    Ok((rows.into_iter().flat_map(|(r, _)| r).collect(), empty))
}

/// Rows of `data` (`n × vt.cols()`) projected onto the rows of `vt`.
fn project(data: &[f64], vt: &Matrix) -> Vec<f64> {
    data.par_chunks(vt.cols().max(1))
        .flat_map_iter(|row| (0..vt.rows()).map(move |j| dot(row, vt.row(j))))
        .collect()
}

/// Composes every utterance, optionally reduces with an SVD fitted on the
/// training vectors only, and tags each test utterance by k-NN vote.
pub fn eval_dialogue_acts(
    train: &[Utterance],
    test: &[Utterance],
    space: &SemanticSpace,
    method: CompositionMethod,
    lookup: &LookupPolicy,
    options: &DialogueOptions,
) -> Result<EvaluationReport> {
    if !method.is_sequential() || method == CompositionMethod::VerbOnly {
        return Err(Error::InvalidArgument(format!(
            "dialogue-act tagging composes whole utterances with addition or multiplication; '{method}' is not supported"
        )));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::InsufficientData(
            "dialogue-act tagging needs non-empty train and test sets".into(),
        ));
    }
    if options.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if let Some(d) = options.svd_dim {
        let limit = train.len().min(space.dim());
        if d == 0 || d > limit {
            return Err(Error::InvalidArgument(format!(
                "svd dimension {d} must be between 1 and min(train size, space dim) = {limit}"
            )));
        }
    }

    let mut tag_ids: BTreeMap<&str, usize> = BTreeMap::new();
    for u in train.iter().chain(test) {
        let next = tag_ids.len();
        tag_ids.entry(u.act_tag.as_str()).or_insert(next);
    }
    let train_labels: Vec<usize> = train.iter().map(|u| tag_ids[u.act_tag.as_str()]).collect();
    let gold: Vec<usize> = test.iter().map(|u| tag_ids[u.act_tag.as_str()]).collect();

    let (train_x, train_empty) = utterance_matrix(train, space, method, lookup)?;
    let (test_x, test_empty) = utterance_matrix(test, space, method, lookup)?;
    let (train_x, test_x, dim) = match options.svd_dim {
        Some(d) => {
            // fitted on training rows only; X V_k maps both sides into the same basis
            let x = Matrix::new(train.len(), space.dim(), train_x)?;
            let vt = truncated_svd(&x, d)?.vt;
            (project(x.as_slice(), &vt), project(&test_x, &vt), d)
        }
        None => (train_x, test_x, space.dim()),
    };

    let predicted: Vec<usize> = test_x
        .par_chunks(dim.max(1))
        .map(|q| {
            let nn = nearest_neighbours(&train_x, dim, q, options.k);
            majority_vote(&nn, &train_labels).unwrap_or(0)
        })
        .collect();
    let correct = predicted.iter().zip(&gold).filter(|(p, g)| p == g).count();

    let mut report = EvaluationReport::new(Task::DialogueActs, method.name());
    report.push_metric("accuracy", correct as f64 / test.len() as f64);
    report.push_metric("fscore", macro_fscore(&predicted, &gold));
    report.push_hyper("k", options.k);
    report.push_hyper(
        "svd_dim",
        options.svd_dim.map_or_else(|| "none".to_string(), |d| d.to_string()),
    );
    report.push_hyper("n_train", train.len());
    report.push_hyper("classes", tag_ids.len());
    report.push_hyper("empty_utterances", train_empty + test_empty);
    report.evaluated = test.len();
    report.correct = Some(correct as u64);
    report.n_test = Some(test.len() as u64);
    Ok(report)
}
