//! Paraphrase detection by thresholding the cosine of composed sentences.

use rayon::prelude::*;

use crate::composition::{compose_sequence, CompositionMethod};
use crate::error::{Error, Result};
use crate::space::{LookupPolicy, SemanticSpace};
use crate::tensor::cosine_slices;

use super::datasets::ParaphrasePair;
use super::report::{EvaluationReport, Task};

/// Size of the development split taken from the head of the training set.
pub const DEV_SIZE: usize = 2000;

/// Splits on whitespace and trims surrounding punctuation. A trailing period
/// is kept on tokens that contain another period (`U.S.`). Tokens with no
/// alphanumeric character are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .filter_map(|raw| {
            let start = raw.len() - raw.trim_start_matches(|c: char| !c.is_alphanumeric()).len();
            let core = raw[start..].trim_end_matches(|c: char| !c.is_alphanumeric());
            if core.is_empty() {
                return None;
            }
            let abbreviation = core.contains('.') && raw[start + core.len()..].starts_with('.');
            Some(if abbreviation { format!("{core}.") } else { core.to_string() })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct BinaryScores {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub fscore: f64,
    pub correct: u64,
}

/// F = 2PR/(P+R), with the paraphrase class as positive. Undefined
/// precision, recall or F are reported as 0.
pub fn binary_scores(predicted: &[bool], gold: &[bool]) -> BinaryScores {
    let (mut tp, mut fp, mut fn_, mut tn) = (0u64, 0u64, 0u64, 0u64);
    for (&p, &g) in predicted.iter().zip(gold) {
        match (p, g) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
            (false, false) => tn += 1,
        }
    }
    let ratio = |a: u64, b: u64| if b == 0 { 0.0 } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let fscore = if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    BinaryScores {
        accuracy: ratio(tp + tn, tp + fp + fn_ + tn),
        precision,
        recall,
        fscore,
        correct: tp + tn,
    }
}

/// The threshold grid 0.00, 0.01, …, 1.00.
pub fn threshold_grid() -> impl Iterator<Item = f64> {
    (0..=100).map(|i| i as f64 / 100.0)
}

/// A pair is a paraphrase iff its cosine is at least the threshold.
pub fn classify(cosines: &[f64], threshold: f64) -> Vec<bool> {
    cosines.iter().map(|&c| c >= threshold).collect()
}

/// Grid threshold with the highest accuracy; ties go to the lowest.
pub fn best_threshold(cosines: &[f64], gold: &[bool]) -> (f64, f64) {
    let mut best = (0.0, f64::NEG_INFINITY);
    for t in threshold_grid() {
        let acc = binary_scores(&classify(cosines, t), gold).accuracy;
        if acc > best.1 {
            best = (t, acc);
        }
    }
    best
}

#[derive(Debug, Default)]
struct PairCosines {
    cosines: Vec<f64>,
    oov_tokens: usize,
    empty_sentences: usize,
}

fn pair_cosines(
    pairs: &[ParaphrasePair],
    space: &SemanticSpace,
    method: CompositionMethod,
    lookup: &LookupPolicy,
) -> Result<PairCosines> {
    let per_pair = pairs
        .par_iter()
        .map(|p| {
            let a: Vec<&str> = p.sentence1.iter().map(String::as_str).collect();
            let b: Vec<&str> = p.sentence2.iter().map(String::as_str).collect();
            let x = compose_sequence(method, space, &a, None, lookup)?;
            let y = compose_sequence(method, space, &b, None, lookup)?;
            let empty = usize::from(x.resolved == 0) + usize::from(y.resolved == 0);
            let cos = cosine_slices(x.representation.as_slice(), y.representation.as_slice())?;
            Ok((cos, x.missing + y.missing, empty))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = PairCosines::default();
    for (cos, oov, empty) in per_pair {
        out.cosines.push(cos);
        out.oov_tokens += oov;
        out.empty_sentences += empty;
    }
    Ok(out)
}

/// Chooses the threshold on the first [`DEV_SIZE`] training pairs (all of
/// train when smaller; the report says so) and applies it once to `test`.
/// Out-of-vocabulary tokens are skipped during composition; no pair is
/// dropped, and a sentence with no known word composes to the zero vector
/// (cosine 0).
pub fn eval_paraphrase(
    train: &[ParaphrasePair],
    test: &[ParaphrasePair],
    space: &SemanticSpace,
    method: CompositionMethod,
    lookup: &LookupPolicy,
) -> Result<EvaluationReport> {
    if !method.is_sequential() || method == CompositionMethod::VerbOnly {
        return Err(Error::InvalidArgument(format!(
            "paraphrase detection composes whole sentences with addition or multiplication; '{method}' is not supported"
        )));
    }
    if test.is_empty() {
        return Err(Error::InsufficientData("paraphrase test set is empty".into()));
    }
    if train.is_empty() {
        return Err(Error::InsufficientData("paraphrase training set is empty".into()));
    }
    let (dev, dev_split) = if train.len() >= DEV_SIZE {
        (&train[..DEV_SIZE], "first-2000")
    } else {
        (train, "all-train")
    };
    let dev_cos = pair_cosines(dev, space, method, lookup)?;
    let dev_gold: Vec<bool> = dev.iter().map(|p| p.label).collect();
    let (threshold, dev_accuracy) = best_threshold(&dev_cos.cosines, &dev_gold);

    let test_cos = pair_cosines(test, space, method, lookup)?;
    let test_gold: Vec<bool> = test.iter().map(|p| p.label).collect();
    let scores = binary_scores(&classify(&test_cos.cosines, threshold), &test_gold);

    let mut report = EvaluationReport::new(Task::Paraphrase, method.name());
    report.push_metric("accuracy", scores.accuracy);
    report.push_metric("precision", scores.precision);
    report.push_metric("recall", scores.recall);
    report.push_metric("fscore", scores.fscore);
    report.push_metric("dev_accuracy", dev_accuracy);
    report.push_hyper("threshold", format!("{threshold:.2}"));
    report.push_hyper("dev_split", dev_split);
    report.push_hyper("dev_size", dev.len());
    report.push_hyper("oov_tokens", test_cos.oov_tokens);
    report.push_hyper("empty_sentences", test_cos.empty_sentences);
    report.evaluated = test.len();
    report.correct = Some(scores.correct);
    report.n_test = Some(test.len() as u64);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokenizer() {
        assert_eq!(
            tokenize("Amrozi accused his brother, whom he called \"the witness\", of lying."),
            vec!["Amrozi", "accused", "his", "brother", "whom", "he", "called", "the", "witness", "of", "lying"]
        );
        assert_eq!(tokenize("the U.S. said -- ok"), vec!["the", "U.S.", "said", "ok"]);
        assert_eq!(tokenize("$5 (approx.)"), vec!["5", "approx"]);
        assert!(tokenize(" , . ").is_empty());
    }

    #[test]
    fn f_score_edge_cases() {
        let s = binary_scores(&[false, false], &[true, false]);
        assert_eq!((s.precision, s.recall, s.fscore), (0.0, 0.0, 0.0));
        assert_eq!(s.accuracy, 0.5);
        let s = binary_scores(&[true, true, false], &[true, false, true]);
        // P = 1/2, R = 1/2
        assert!((s.fscore - 0.5).abs() < 1e-15);
    }

    #[test]
    fn all_positive_low_threshold_has_full_recall() {
        let cos = [0.3, 0.5, 0.9];
        let gold = [true, true, true];
        for t in threshold_grid().filter(|&t| t <= 0.3) {
            assert_eq!(binary_scores(&classify(&cos, t), &gold).recall, 1.0);
        }
    }

    #[test]
    fn ties_choose_lowest_threshold() {
        // every threshold in (0.2, 0.8] separates perfectly
        let (t, acc) = best_threshold(&[0.2, 0.8], &[false, true]);
        assert_eq!(acc, 1.0);
        assert_eq!(t, 0.21);
    }
}
