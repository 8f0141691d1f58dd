//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

pub mod checks;

use compdist::corpus::{Token, TokenStream};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Eigenvalues of a symmetric matrix (row-major `n × n`) by cyclic Jacobi
/// rotations, sorted descending.
pub fn symmetric_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (m[k * n + p], m[k * n + q]);
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (m[p * n + k], m[q * n + k]);
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// Singular values from the eigenvalues of the smaller Gram matrix.
pub fn gram_singular_values(a: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let (n, gram): (usize, Vec<f64>) = if cols <= rows {
        let mut g = vec![0.0; cols * cols];
        for i in 0..cols {
            for j in 0..cols {
                g[i * cols + j] = (0..rows).map(|r| a[r * cols + i] * a[r * cols + j]).sum();
            }
        }
        (cols, g)
    } else {
        let mut g = vec![0.0; rows * rows];
        for i in 0..rows {
            for j in 0..rows {
                g[i * rows + j] = (0..cols).map(|c| a[i * cols + c] * a[j * cols + c]).sum();
            }
        }
        (rows, g)
    };
    symmetric_eigenvalues(&gram, n)
        .into_iter()
        .map(|l| l.max(0.0).sqrt())
        .collect()
}

/// Dense PMI weighting straight from the definition.
pub fn dense_weighting(counts: &[Vec<u64>], lmi: bool) -> Vec<Vec<f64>> {
    let total: f64 = counts.iter().flatten().map(|&n| n as f64).sum();
    let cols = counts.first().map_or(0, Vec::len);
    let col_sum: Vec<f64> = (0..cols)
        .map(|c| counts.iter().map(|r| r[c] as f64).sum())
        .collect();
    counts
        .iter()
        .map(|row| {
            let row_sum: f64 = row.iter().map(|&n| n as f64).sum();
            row.iter()
                .enumerate()
                .map(|(c, &n)| {
                    if n == 0 {
                        return 0.0;
                    }
                    let pmi = ((n as f64 / row_sum) / (col_sum[c] / total)).ln();
                    if lmi {
                        n as f64 * pmi
                    } else {
                        pmi.max(0.0)
                    }
                })
                .collect()
        })
        .collect()
}

pub const TABLE1_ROWS: [&str; 5] = ["Mary", "John", "girl", "boy", "idea"];
pub const TABLE1_COLS: [&str; 3] = ["philosophy", "book", "school"];
pub const TABLE1: [[u64; 3]; 5] = [[0, 10, 22], [4, 60, 59], [0, 19, 93], [0, 12, 164], [10, 47, 39]];

/// SGNS loss for one (target, context, negatives) example, written out
/// directly from its definition.
pub fn sgns_loss(t: &[f64], c: &[f64], negs: &[Vec<f64>]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let log_sigmoid = |x: f64| -(1.0 + (-x).exp()).ln();
    -log_sigmoid(dot(c, t)) - negs.iter().map(|n| log_sigmoid(-dot(n, t))).sum::<f64>()
}

/// Central finite-difference gradient of `f` at `x`.
pub fn numeric_gradient(x: &[f64], h: f64, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            let mut up = x.to_vec();
            let mut down = x.to_vec();
            up[i] += h;
            down[i] -= h;
            (f(&up) - f(&down)) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖)`, 0 when both vanish.
pub fn relative_error(a: &[f64], b: &[f64]) -> f64 {
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let diff: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let scale = norm(a).max(norm(b));
    if scale == 0.0 {
        0.0
    } else {
        norm(&diff) / scale
    }
}

pub const FRUIT: [&str; 6] = ["apple", "banana", "cherry", "grape", "mango", "peach"];
pub const TOOLS: [&str; 6] = ["hammer", "wrench", "saw", "drill", "chisel", "pliers"];

/// Sentences drawn from one of two disjoint vocabularies.
pub fn two_cluster_corpus(sentences: usize, length: usize, seed: u64) -> TokenStream {
    let mut r = rng(seed);
    let doc: Vec<Vec<Token>> = (0..sentences)
        .map(|i| {
            let vocab: &[&str] = if i % 2 == 0 { &FRUIT } else { &TOOLS };
            (0..length)
                .map(|_| Token::new(vocab[r.random_range(0..vocab.len())]))
                .collect()
        })
        .collect();
    TokenStream::new(vec![doc])
}

pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    dot / (na * nb)
}

/// Mean within-cluster and cross-cluster cosine of a word → vector lookup.
pub fn cluster_cosines(vector: impl Fn(&str) -> Vec<f64>) -> (f64, f64) {
    let mut within = (0.0, 0.0);
    let mut across = (0.0, 0.0);
    for group in [&FRUIT, &TOOLS] {
        for i in 0..group.len() {
            for j in i + 1..group.len() {
                within.0 += cosine(&vector(group[i]), &vector(group[j]));
                within.1 += 1.0;
            }
        }
    }
    for a in FRUIT {
        for b in TOOLS {
            across.0 += cosine(&vector(a), &vector(b));
            across.1 += 1.0;
        }
    }
    (within.0 / within.1, across.0 / across.1)
}

/// k nearest rows by checking every pair, ordered by (distance, index).
pub fn brute_force_knn(train: &[Vec<f64>], query: &[f64], k: usize) -> Vec<usize> {
    let mut d: Vec<(f64, usize)> = train
        .iter()
        .enumerate()
        .map(|(i, row)| (row.iter().zip(query).map(|(a, b)| (a - b) * (a - b)).sum(), i))
        .collect();
    d.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    d.into_iter().take(k).map(|(_, i)| i).collect()
}

/// Majority label of the given neighbours; ties go to the class seen first.
pub fn brute_force_vote(neighbours: &[usize], labels: &[usize]) -> usize {
    let mut counts = std::collections::BTreeMap::new();
    for &n in neighbours {
        *counts.entry(labels[n]).or_insert(0usize) += 1;
    }
    let best = *counts.values().max().unwrap();
    neighbours.iter().map(|&n| labels[n]).find(|l| counts[l] == best).unwrap()
}
