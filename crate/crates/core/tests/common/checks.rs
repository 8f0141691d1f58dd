//! One function per acceptance criterion. Each returns a one-line summary,
//! `Ok` when the criterion holds.
#![allow(dead_code)]

use std::collections::HashSet;
use std::time::Instant;

use compdist::composition::{compose_svo, fold_vectors, VerbArg};
use compdist::cooccurrence::{weight_lmi, weight_ppmi, CooccurrenceMatrix};
use compdist::embeddings::{read_word2vec_binary, write_word2vec_binary};
use compdist::eval::dialogue::nearest_neighbours;
use compdist::eval::{
    chi_square_accuracy_test, eval_disambiguation, eval_paraphrase, DisambigItem, ParaphrasePair,
};
use compdist::sgns::{pair_loss_vectors, train, SgnsConfig};
use compdist::svd::truncated_svd;
use compdist::{
    CompositionMethod, LookupPolicy, Matrix, Provenance, SemanticSpace, Vector, VerbRepresentation,
};
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::*;

pub type Outcome = std::result::Result<String, String>;

const IDENTITY_TOL: f64 = 1e-10;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn vector(r: &mut rand_chacha::ChaCha8Rng, d: usize) -> Vector {
    Vector::new(random_vec(r, d)).unwrap()
}

fn matrix(r: &mut rand_chacha::ChaCha8Rng, rows: usize, cols: usize) -> Matrix {
    Matrix::new(rows, cols, random_vec(r, rows * cols)).unwrap()
}

fn flat(method: CompositionMethod, verb: VerbArg<'_>, s: &Vector, o: &Vector) -> Vec<f64> {
    compose_svo(method, verb, s, o).unwrap().flatten().into_owned()
}

/// Worst error of each composition identity over `instances` random draws.
pub fn identity_errors(instances: usize, seed: u64) -> Vec<(&'static str, f64)> {
    use CompositionMethod::*;
    let mut r = rng(seed);
    let mut worst = [
        ("frobenius-add = copy-subject + copy-object", 0.0f64),
        ("frobenius-mult = copy-subject * copy-object", 0.0),
        ("frobenius-outer = copy-object (x) copy-subject", 0.0),
        ("kronecker = (v (x) v) * (s (x) o)", 0.0),
        ("relational = M * (s (x) o)", 0.0),
        ("copy-subject(M,s,o) = copy-object(M^T,o,s)", 0.0),
        ("addition permutation invariance", 0.0),
        ("multiplication permutation invariance", 0.0),
    ];
    for _ in 0..instances {
        let d = r.random_range(1..=16);
        let (s, o, v) = (vector(&mut r, d), vector(&mut r, d), vector(&mut r, d));
        let m = matrix(&mut r, d, d);
        let rel = VerbRepresentation::Relational(m.clone());
        let rel_t = VerbRepresentation::Relational(m.transpose());
        let verb = VerbArg::Tensor(&rel);

        let cs = flat(CopySubject, verb, &s, &o);
        let co = flat(CopyObject, verb, &s, &o);
        let sum: Vec<f64> = cs.iter().zip(&co).map(|(a, b)| a + b).collect();
        let prod: Vec<f64> = cs.iter().zip(&co).map(|(a, b)| a * b).collect();
        let outer: Vec<f64> = co.iter().flat_map(|a| cs.iter().map(move |b| a * b)).collect();
        let (sv, ov, vv) = (s.as_slice(), o.as_slice(), v.as_slice());
        let kron: Vec<f64> = (0..d)
            .flat_map(|i| (0..d).map(move |j| vv[i] * vv[j] * sv[i] * ov[j]))
            .collect();
        let relational: Vec<f64> = (0..d)
            .flat_map(|i| (0..d).map(move |j| (i, j)))
            .map(|(i, j)| m.get(i, j) * sv[i] * ov[j])
            .collect();
        let kv = VerbRepresentation::Kronecker(v.clone());

        let errors = [
            max_abs_diff(&flat(FrobeniusAdd, verb, &s, &o), &sum),
            max_abs_diff(&flat(FrobeniusMult, verb, &s, &o), &prod),
            max_abs_diff(&flat(FrobeniusOuter, verb, &s, &o), &outer),
            max_abs_diff(&flat(Kronecker, VerbArg::Tensor(&kv), &s, &o), &kron),
            max_abs_diff(&flat(Relational, verb, &s, &o), &relational),
            max_abs_diff(&cs, &flat(CopyObject, VerbArg::Tensor(&rel_t), &o, &s)),
            permutation_error(Addition, [sv, vv, ov], d),
            permutation_error(Multiplication, [sv, vv, ov], d),
        ];
        for (w, e) in worst.iter_mut().zip(errors) {
            w.1 = w.1.max(e);
        }
    }
    worst.to_vec()
}

fn permutation_error(method: CompositionMethod, words: [&[f64]; 3], d: usize) -> f64 {
    const ORDERS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let base = fold_vectors(method, &words, d).unwrap();
    ORDERS
        .iter()
        .map(|p| {
            let permuted = [words[p[0]], words[p[1]], words[p[2]]];
            max_abs_diff(base.as_slice(), fold_vectors(method, &permuted, d).unwrap().as_slice())
        })
        .fold(0.0, f64::max)
}

pub fn criterion_identities() -> Outcome {
    let start = Instant::now();
    let errors = identity_errors(1000, 11);
    let elapsed = start.elapsed().as_secs_f64();
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    let summary = format!("8 identities x 1000 instances, max error {worst:.2e}, {elapsed:.2}s");
    if let Some((name, e)) = errors.iter().find(|e| e.1.is_nan() || e.1 >= IDENTITY_TOL) {
        return Err(format!("{summary}; {name} off by {e:.2e}"));
    }
    if elapsed >= 10.0 {
        return Err(format!("{summary}; over the 10 s budget"));
    }
    Ok(summary)
}

/// Worst |library − brute force| for PPMI and LMI on one count matrix.
pub fn weighting_error(counts: &[Vec<u64>]) -> f64 {
    let targets: Vec<String> = (0..counts.len()).map(|i| format!("t{i}")).collect();
    let contexts: Vec<String> = (0..counts[0].len()).map(|i| format!("c{i}")).collect();
    let m = CooccurrenceMatrix::from_dense(targets, contexts, counts, 2).unwrap();
    let mut worst = 0.0f64;
    for (space, lmi) in [(weight_ppmi(&m).unwrap(), false), (weight_lmi(&m).unwrap(), true)] {
        let oracle: Vec<f64> = dense_weighting(counts, lmi).into_iter().flatten().collect();
        worst = worst.max(max_abs_diff(space.as_flat(), &oracle));
    }
    worst
}

pub fn table1_counts() -> Vec<Vec<u64>> {
    TABLE1.iter().map(|r| r.to_vec()).collect()
}

pub fn random_counts(r: &mut rand_chacha::ChaCha8Rng) -> Vec<Vec<u64>> {
    let (rows, cols) = (r.random_range(1..=20), r.random_range(1..=20));
    let mut counts: Vec<Vec<u64>> = (0..rows)
        .map(|_| {
            (0..cols)
                .map(|_| if r.random_bool(0.4) { 0 } else { r.random_range(1..1000) })
                .collect()
        })
        .collect();
    // at least one count so the weighting is defined
    counts[0][0] += 1;
    counts
}

pub fn criterion_weighting() -> Outcome {
    let table = table1_counts();
    let mut worst = weighting_error(&table);
    let mut r = rng(22);
    for _ in 0..100 {
        worst = worst.max(weighting_error(&random_counts(&mut r)));
    }
    let m = CooccurrenceMatrix::from_dense(
        TABLE1_ROWS.iter().map(|w| w.to_string()).collect(),
        TABLE1_COLS.iter().map(|w| w.to_string()).collect(),
        &table,
        2,
    )
    .unwrap();
    let spot = weight_ppmi(&m).unwrap().row("idea").unwrap()[0];
    let oracle = dense_weighting(&table, false)[4][0];
    let summary = format!("101 matrices, max error {worst:.2e}, PPMI(idea, philosophy) = {spot:.6}");
    if worst.is_nan() || worst >= 1e-12 || (spot - oracle).abs() >= 1e-12 || (spot - 1.3889).abs() >= 5e-5 {
        return Err(summary);
    }
    Ok(summary)
}

/// (singular value error, reconstruction bound error) for one matrix and
/// every rank k.
pub fn svd_errors(rows: usize, cols: usize, values: Vec<f64>) -> (f64, f64) {
    let oracle = gram_singular_values(&values, rows, cols);
    let m = Matrix::new(rows, cols, values).unwrap();
    let kmax = rows.min(cols);
    let full = truncated_svd(&m, kmax).unwrap();
    let sv_err = max_abs_diff(full.s.as_slice(), &oracle[..kmax]);
    let mut bound_err = 0.0f64;
    for k in 1..=kmax {
        let approx = truncated_svd(&m, k).unwrap().reconstruct();
        let residual: f64 = m
            .as_slice()
            .iter()
            .zip(approx.as_slice())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let bound = full.s.as_slice()[k..].iter().map(|s| s * s).sum::<f64>().sqrt();
        bound_err = bound_err.max((residual - bound).abs());
    }
    (sv_err, bound_err)
}

pub fn criterion_svd() -> Outcome {
    let mut r = rng(33);
    let (mut sv, mut bound) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let (rows, cols) = (r.random_range(1..=10), r.random_range(1..=8));
        let (a, b) = svd_errors(rows, cols, random_vec(&mut r, rows * cols));
        sv = sv.max(a);
        bound = bound.max(b);
    }
    let summary = format!("200 matrices, singular value error {sv:.2e}, reconstruction bound error {bound:.2e}");
    if sv < 1e-8 && bound < 1e-8 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

/// Worst norm-relative gradient error over `points` random SGNS examples.
pub fn sgns_gradient_error(points: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    for _ in 0..points {
        let d = r.random_range(2..=12);
        let k = r.random_range(1..=6);
        let t = random_vec(&mut r, d);
        let c = random_vec(&mut r, d);
        let negs: Vec<Vec<f64>> = (0..k).map(|_| random_vec(&mut r, d)).collect();
        let neg_refs: Vec<&[f64]> = negs.iter().map(Vec::as_slice).collect();
        let analytic = pair_loss_vectors(&t, &c, &neg_refs);

        let h = 1e-5;
        let gt = numeric_gradient(&t, h, |x| sgns_loss(x, &c, &negs));
        let gc = numeric_gradient(&c, h, |x| sgns_loss(&t, x, &negs));
        worst = worst
            .max(relative_error(&analytic.grad_target, &gt))
            .max(relative_error(&analytic.grad_context, &gc));
        for j in 0..k {
            let gn = numeric_gradient(&negs[j], h, |x| {
                let mut n = negs.clone();
                n[j] = x.to_vec();
                sgns_loss(&t, &c, &n)
            });
            worst = worst.max(relative_error(&analytic.grad_negatives[j], &gn));
        }
        let loss_err = (analytic.loss - sgns_loss(&t, &c, &negs)).abs() / analytic.loss.abs().max(1.0);
        worst = worst.max(loss_err);
    }
    worst
}

pub fn two_cluster_config(seed: u64) -> SgnsConfig {
    SgnsConfig {
        dim: 20,
        window: 2,
        negatives: 5,
        epochs: 5,
        learning_rate: 0.025,
        seed,
        ..SgnsConfig::default()
    }
}

pub fn criterion_sgns() -> Outcome {
    let start = Instant::now();
    let grad = sgns_gradient_error(100, 44);
    let run = train(&two_cluster_corpus(400, 10, 45), &two_cluster_config(46)).map_err(|e| e.to_string())?;
    let space = run.space();
    let (within, across) = cluster_cosines(|w| space.row(w).unwrap().to_vec());
    let elapsed = start.elapsed().as_secs_f64();
    let summary = format!(
        "gradient relative error {grad:.2e}, within-cluster cosine {within:.3} vs cross-cluster {across:.3}, {elapsed:.2}s"
    );
    if grad < 1e-5 && within > across && elapsed < 60.0 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

/// Twelve landmarks at growing angles from the verb, judged in decreasing
/// order of similarity.
pub fn monotone_disambiguation_fixture() -> (Vec<DisambigItem>, SemanticSpace) {
    let mut words = vec!["run".to_string(), "man".to_string(), "company".to_string()];
    let mut data = vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.1, 0.0, 0.0, 0.1];
    let mut items = Vec::new();
    for i in 0..12 {
        let theta = (8.0 * i as f64).to_radians();
        let landmark = format!("sense{i}");
        words.push(landmark.clone());
        data.extend([theta.cos(), theta.sin(), 0.0]);
        for offset in [0.0, 0.5] {
            items.push(DisambigItem {
                verb: "run".into(),
                subject: "man".into(),
                object: "company".into(),
                landmark: landmark.clone(),
                judgement: 7.0 - 0.5 * i as f64 - offset,
            });
        }
    }
    (items, SemanticSpace::new(words, 3, data, Provenance::Neural).unwrap())
}

/// Sentences over four mutually orthogonal word groups: paraphrases share a
/// group, non-paraphrases do not.
pub fn separable_paraphrase_fixture(pairs: usize, seed: u64) -> (Vec<ParaphrasePair>, SemanticSpace) {
    let groups: Vec<Vec<String>> = (0..4)
        .map(|g| (0..5).map(|i| format!("g{g}w{i}")).collect())
        .collect();
    let mut words = Vec::new();
    let mut data = Vec::new();
    for (g, group) in groups.iter().enumerate() {
        for w in group {
            words.push(w.clone());
            data.extend((0..4).map(|j| if j == g { 1.0 } else { 0.0 }));
        }
    }
    let space = SemanticSpace::new(words, 4, data, Provenance::Neural).unwrap();
    let mut r = rng(seed);
    let sentence = |g: usize, r: &mut rand_chacha::ChaCha8Rng| -> Vec<String> {
        (0..r.random_range(2..6)).map(|_| groups[g][r.random_range(0..5)].clone()).collect()
    };
    let out = (0..pairs)
        .map(|i| {
            let g = r.random_range(0..4);
            let label = i % 2 == 0;
            let h = if label { g } else { (g + 1 + r.random_range(0..3)) % 4 };
            ParaphrasePair {
                sentence1: sentence(g, &mut r),
                sentence2: sentence(h, &mut r),
                label,
            }
        })
        .collect();
    (out, space)
}

pub fn knn_mismatches(points: usize, seed: u64) -> usize {
    let mut r = rng(seed);
    let dim = 4;
    // coarse grid values so exact distance ties occur
    let grid = |r: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..dim).map(|_| r.random_range(-3..=3) as f64).collect()
    };
    let train: Vec<Vec<f64>> = (0..points).map(|_| grid(&mut r)).collect();
    let flat: Vec<f64> = train.iter().flatten().copied().collect();
    let mut mismatches = 0;
    for k in [1, 5, 17] {
        for _ in 0..points {
            let q = grid(&mut r);
            let got: Vec<usize> = nearest_neighbours(&flat, dim, &q, k).into_iter().map(|n| n.1).collect();
            if got != brute_force_knn(&train, &q, k) {
                mismatches += 1;
            }
        }
    }
    mismatches
}

/// Direct 2×2 Pearson statistic without continuity correction.
pub fn chi_square_oracle(ca: u64, na: u64, cb: u64, nb: u64) -> (f64, f64) {
    let (a, b) = (ca as f64, (na - ca) as f64);
    let (c, d) = (cb as f64, (nb - cb) as f64);
    let n = a + b + c + d;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    let stat = n * (a * d - b * c).powi(2) / denom;
    (stat, ChiSquared::new(1.0).unwrap().sf(stat))
}

pub fn chi_square_error(cases: usize, seed: u64) -> f64 {
    let mut r = rng(seed);
    let mut worst = 0.0f64;
    let mut done = 0;
    while done < cases {
        let (na, nb) = (r.random_range(1..3000u64), r.random_range(1..3000u64));
        let (ca, cb) = (r.random_range(0..=na), r.random_range(0..=nb));
        if ca + cb == 0 || ca + cb == na + nb {
            continue;
        }
        let got = chi_square_accuracy_test(ca, na, cb, nb).unwrap();
        let (stat, p) = chi_square_oracle(ca, na, cb, nb);
        worst = worst
            .max((got.p_value - p).abs())
            .max((got.statistic - stat).abs() / stat.max(1.0));
        done += 1;
    }
    worst
}

pub fn criterion_harness() -> Outcome {
    let lookup = LookupPolicy::default();
    let (items, space) = monotone_disambiguation_fixture();
    let mut rhos = Vec::new();
    for method in [CompositionMethod::VerbOnly, CompositionMethod::Addition] {
        let report = eval_disambiguation(&items, &space, method, None, &lookup).map_err(|e| e.to_string())?;
        rhos.push(report.metric("rho").unwrap());
    }
    let (train_pairs, pspace) = separable_paraphrase_fixture(60, 55);
    let (test_pairs, _) = separable_paraphrase_fixture(30, 56);
    let report = eval_paraphrase(&train_pairs, &test_pairs, &pspace, CompositionMethod::Addition, &lookup)
        .map_err(|e| e.to_string())?;
    let (dev_acc, test_acc) = (report.metric("dev_accuracy").unwrap(), report.metric("accuracy").unwrap());
    let knn = knn_mismatches(200, 57);
    let chi = chi_square_error(500, 58);
    let summary = format!(
        "rho {rhos:?}, paraphrase dev/test accuracy {dev_acc}/{test_acc}, k-NN mismatches {knn}, chi-square error {chi:.2e}"
    );
    if rhos.iter().all(|&r| r == 1.0) && dev_acc == 1.0 && test_acc == 1.0 && knn == 0 && chi < 1e-10 {
        Ok(summary)
    } else {
        Err(summary)
    }
}

const ALPHABET: [&str; 10] = ["a", "z", "é", "ß", "ж", "語", "日本", "ü", "🦀", "ñ"];

pub fn random_space(r: &mut rand_chacha::ChaCha8Rng) -> SemanticSpace {
    let n = r.random_range(1..40);
    let dim = r.random_range(1..24);
    let mut seen = HashSet::new();
    let mut words = Vec::with_capacity(n);
    while words.len() < n {
        let len = r.random_range(1..6);
        let w: String = (0..len).map(|_| ALPHABET[r.random_range(0..ALPHABET.len())]).collect();
        if seen.insert(w.clone()) {
            words.push(w);
        }
    }
    let data = (0..n * dim)
        .map(|_| {
            let mag: f64 = r.random_range(-30.0..30.0);
            r.random_range(-1.0..1.0) * mag.exp2()
        })
        .collect();
    SemanticSpace::new(words, dim, data, Provenance::Neural).unwrap()
}

/// `None` when the space survives write∘read at the `f32` level and a second
/// write is byte-identical; otherwise what went wrong.
pub fn round_trip_failure(space: &SemanticSpace) -> Option<String> {
    let mut bytes = Vec::new();
    write_word2vec_binary(space, &mut bytes).ok()?;
    let back = match read_word2vec_binary(bytes.as_slice()) {
        Ok(b) => b,
        Err(e) => return Some(e.to_string()),
    };
    if back.words() != space.words() || back.dim() != space.dim() {
        return Some("vocabulary or dimension changed".into());
    }
    let bits_match = space
        .as_flat()
        .iter()
        .zip(back.as_flat())
        .all(|(&a, &b)| (a as f32).to_bits() == (b as f32).to_bits() && b == (b as f32) as f64);
    if !bits_match {
        return Some("values differ at 32-bit level".into());
    }
    let mut again = Vec::new();
    write_word2vec_binary(&back, &mut again).ok()?;
    (again != bytes).then(|| "second write differs".into())
}

pub fn criterion_word2vec() -> Outcome {
    let mut r = rng(66);
    for i in 0..50 {
        let space = random_space(&mut r);
        if let Some(why) = round_trip_failure(&space) {
            return Err(format!("space {i}: {why}"));
        }
    }
    Ok("50 random spaces round-trip bit-exactly at f32".into())
}
