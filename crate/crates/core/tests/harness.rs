mod common;

use common::checks::{
    chi_square_error, chi_square_oracle, knn_mismatches, monotone_disambiguation_fixture, separable_paraphrase_fixture,
};
use common::*;
use compdist::eval::dialogue::{majority_vote, macro_fscore, nearest_neighbours};
use compdist::eval::paraphrase::{best_threshold, binary_scores, classify, threshold_grid};
use compdist::eval::significance::compare_reports;
use compdist::eval::{
    chi_square_accuracy_test, correlation_difference_test, eval_dialogue_acts, eval_disambiguation, eval_paraphrase,
    eval_sentence_similarity, DialogueOptions, EvaluationReport, SentencePairItem, Svo, Utterance,
};
use compdist::{CompositionMethod, LookupPolicy, Provenance, SemanticSpace};
use proptest::prelude::*;
use rand::Rng;

fn lookup() -> LookupPolicy {
    LookupPolicy::default()
}

#[test]
fn monotone_fixture_gives_rho_one() {
    let (items, space) = monotone_disambiguation_fixture();
    for method in [CompositionMethod::VerbOnly, CompositionMethod::Addition] {
        let report = eval_disambiguation(&items, &space, method, None, &lookup()).unwrap();
        assert_eq!(report.metric("rho"), Some(1.0), "{method}");
        assert_eq!(report.evaluated, 12);
    }
}

#[test]
fn duplicated_rows_leave_metrics_unchanged() {
    let (items, space) = monotone_disambiguation_fixture();
    let doubled: Vec<_> = items.iter().chain(&items).cloned().collect();
    let a = eval_disambiguation(&items, &space, CompositionMethod::Addition, None, &lookup()).unwrap();
    let b = eval_disambiguation(&doubled, &space, CompositionMethod::Addition, None, &lookup()).unwrap();
    assert_eq!(a.metrics, b.metrics);

    let (train, pspace) = separable_paraphrase_fixture(40, 1);
    let (test, _) = separable_paraphrase_fixture(20, 2);
    let twice = |v: &[compdist::eval::ParaphrasePair]| v.iter().chain(v).cloned().collect::<Vec<_>>();
    let a = eval_paraphrase(&train, &test, &pspace, CompositionMethod::Addition, &lookup()).unwrap();
    let b = eval_paraphrase(&twice(&train), &twice(&test), &pspace, CompositionMethod::Addition, &lookup()).unwrap();
    for key in ["accuracy", "precision", "recall", "fscore", "dev_accuracy"] {
        assert_eq!(a.metric(key), b.metric(key), "{key}");
    }
}

fn noisy_space(seed: u64, words: &[&str], dim: usize) -> SemanticSpace {
    let mut r = rng(seed);
    SemanticSpace::new(
        words.iter().map(|w| w.to_string()).collect(),
        dim,
        random_vec(&mut r, words.len() * dim),
        Provenance::Neural,
    )
    .unwrap()
}

#[test]
fn scaling_the_space_leaves_rho_unchanged() {
    let words = ["dog", "cat", "bites", "chases", "man", "ball", "kicks"];
    let space = noisy_space(3, &words, 6);
    let mut r = rng(4);
    let pick = |r: &mut rand_chacha::ChaCha8Rng| words[r.random_range(0..words.len())];
    let items: Vec<SentencePairItem> = (0..30)
        .map(|_| SentencePairItem {
            first: Svo::new(pick(&mut r), pick(&mut r), pick(&mut r)),
            second: Svo::new(pick(&mut r), pick(&mut r), pick(&mut r)),
            judgement: r.random_range(1.0..7.0),
        })
        .collect();
    for method in [CompositionMethod::Addition, CompositionMethod::Multiplication, CompositionMethod::VerbOnly] {
        let base = eval_sentence_similarity(&items, &space, method, None, &lookup()).unwrap();
        let scaled = eval_sentence_similarity(&items, &space.scaled(3.7), method, None, &lookup()).unwrap();
        let (a, b) = (base.metric("rho").unwrap(), scaled.metric("rho").unwrap());
        assert!((a - b).abs() < 1e-12, "{method}: {a} vs {b}");
    }
}

#[test]
fn separable_paraphrases_are_classified_perfectly() {
    let (train, space) = separable_paraphrase_fixture(60, 5);
    let (test, _) = separable_paraphrase_fixture(30, 6);
    let report = eval_paraphrase(&train, &test, &space, CompositionMethod::Addition, &lookup()).unwrap();
    assert_eq!(report.metric("accuracy"), Some(1.0));
    assert_eq!(report.metric("dev_accuracy"), Some(1.0));
    assert_eq!(report.metric("fscore"), Some(1.0));
    assert_eq!(report.hyperparameter("dev_split"), Some("all-train"));
    assert_eq!((report.correct, report.n_test), (Some(30), Some(30)));
}

proptest! {
    #[test]
    fn chosen_threshold_matches_exhaustive_scan(
        pairs in prop::collection::vec((-1.0f64..1.0, any::<bool>()), 1..60)
    ) {
        let (cosines, gold): (Vec<f64>, Vec<bool>) = pairs.into_iter().unzip();
        let (t, acc) = best_threshold(&cosines, &gold);
        let scan: Vec<(f64, f64)> = threshold_grid()
            .map(|t| {
                let correct = cosines.iter().zip(&gold).filter(|(c, g)| (**c >= t) == **g).count();
                (t, correct as f64 / gold.len() as f64)
            })
            .collect();
        let best = scan.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
        let first = scan.iter().find(|s| s.1 == best).unwrap();
        prop_assert_eq!((t, acc), *first);
        prop_assert_eq!(binary_scores(&classify(&cosines, t), &gold).accuracy, acc);
    }

    #[test]
    fn binary_metrics_stay_in_range(pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..50)) {
        let (p, g): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let s = binary_scores(&p, &g);
        for m in [s.accuracy, s.precision, s.recall, s.fscore] {
            prop_assert!((0.0..=1.0).contains(&m));
        }
    }

    #[test]
    fn macro_f_in_range(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..40)) {
        let (p, g): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let f = macro_fscore(&p, &g);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(macro_fscore(&g, &g), 1.0);
    }

    #[test]
    fn chi_square_matches_direct_formula(na in 1u64..500, nb in 1u64..500, fa in 0.0f64..=1.0, fb in 0.0f64..=1.0) {
        let (ca, cb) = ((na as f64 * fa) as u64, (nb as f64 * fb) as u64);
        prop_assume!(ca + cb > 0 && ca + cb < na + nb);
        let got = chi_square_accuracy_test(ca, na, cb, nb).unwrap();
        let (stat, p) = chi_square_oracle(ca, na, cb, nb);
        prop_assert!((got.p_value - p).abs() < 1e-10);
        prop_assert!((got.statistic - stat).abs() <= 1e-9 * stat.max(1.0));
    }
}

#[test]
fn chi_square_oracle_agreement() {
    assert!(chi_square_error(500, 15) < 1e-10);
    let r = chi_square_accuracy_test(90, 100, 50, 100).unwrap();
    assert!((r.statistic - 38.095_238_095).abs() < 1e-8);
}

#[test]
fn knn_matches_exhaustive_search() {
    assert_eq!(knn_mismatches(200, 16), 0);
}

#[test]
fn vote_matches_brute_force() {
    let mut r = rng(17);
    for _ in 0..200 {
        let train: Vec<Vec<f64>> = (0..30).map(|_| random_vec(&mut r, 3)).collect();
        let labels: Vec<usize> = (0..30).map(|_| r.random_range(0..4)).collect();
        let flat: Vec<f64> = train.iter().flatten().copied().collect();
        let q = random_vec(&mut r, 3);
        let nn = nearest_neighbours(&flat, 3, &q, 5);
        let oracle = brute_force_knn(&train, &q, 5);
        assert_eq!(nn.iter().map(|n| n.1).collect::<Vec<_>>(), oracle);
        assert_eq!(majority_vote(&nn, &labels), Some(brute_force_vote(&oracle, &labels)));
    }
}

fn utterance(id: &str, words: &[&str], tag: &str) -> Utterance {
    Utterance {
        dialogue_id: id.into(),
        turn_id: "A.1".into(),
        tokens: words.iter().map(|w| w.to_string()).collect(),
        act_tag: tag.into(),
    }
}

#[test]
fn dialogue_acts_on_separable_utterances() {
    let space = SemanticSpace::new(
        ["yes", "yeah", "what", "why", "okay"].iter().map(|w| w.to_string()).collect(),
        3,
        vec![1.0, 0.0, 0.0, 0.9, 0.1, 0.0, 0.0, 1.0, 0.0, 0.1, 0.9, 0.0, 0.0, 0.0, 1.0],
        Provenance::Neural,
    )
    .unwrap();
    let train: Vec<Utterance> = (0..10)
        .flat_map(|i| {
            let id = format!("d{i}");
            [
                utterance(&id, &["yes", "yeah"], "aa"),
                utterance(&id, &["what", "why"], "qw"),
                utterance(&id, &["okay"], "b"),
            ]
        })
        .collect();
    let test = vec![
        utterance("t", &["yeah", "yes", "yes"], "aa"),
        utterance("t", &["why", "what", "what"], "qw"),
        utterance("t", &["okay", "okay"], "b"),
    ];
    for svd_dim in [None, Some(2)] {
        let options = DialogueOptions { k: 3, svd_dim, ..DialogueOptions::default() };
        let report = eval_dialogue_acts(&train, &test, &space, CompositionMethod::Addition, &lookup(), &options).unwrap();
        assert_eq!(report.metric("accuracy"), Some(1.0), "{svd_dim:?}");
        assert_eq!(report.metric("fscore"), Some(1.0));
    }
}

#[test]
fn bootstrap_separates_a_clear_winner() {
    let mut r = rng(18);
    let human: Vec<f64> = (0..60).map(|i| i as f64).collect();
    let good: Vec<f64> = human.iter().map(|h| h + r.random_range(-3.0..3.0)).collect();
    let poor: Vec<f64> = human.iter().map(|h| h + r.random_range(-60.0..60.0)).collect();
    let clear = correlation_difference_test(&human, &good, &poor, 2000, 1).unwrap();
    assert!(clear.observed_delta > 0.0 && clear.p_value < 0.05, "{clear:?}");
    let same = correlation_difference_test(&human, &good, &good, 500, 1).unwrap();
    assert_eq!(same.p_value, 1.0);
    assert_eq!(same.valid_resamples, 500);
}

#[test]
fn report_round_trips_and_compares() {
    let (items, space) = monotone_disambiguation_fixture();
    let report = eval_disambiguation(&items, &space, CompositionMethod::Addition, None, &lookup())
        .unwrap()
        .with_space_id("toy space");
    let back = EvaluationReport::parse(&report.to_key_value()).unwrap();
    assert_eq!(back, report);
    let verb_only = eval_disambiguation(&items, &space, CompositionMethod::VerbOnly, None, &lookup()).unwrap();
    let cmp = compare_reports(&report, &verb_only, 200, 1).unwrap();
    assert_eq!(cmp.items, 12);
    assert!(!cmp.significant(0.05));
}
