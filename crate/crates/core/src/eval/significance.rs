//! Significance tests for comparing two systems.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::stats::spearman;

use super::report::EvaluationReport;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// Pearson χ² (1 d.o.f., no continuity correction) on the 2×2
/// correct/incorrect table of two classifiers. Degenerate margins give p = 1.
pub fn chi_square_accuracy_test(correct_a: u64, n_a: u64, correct_b: u64, n_b: u64) -> Result<ChiSquareResult> {
    if n_a == 0 || n_b == 0 {
        return Err(Error::InvalidArgument("both systems need at least one item".into()));
    }
    if correct_a > n_a || correct_b > n_b {
        return Err(Error::InvalidArgument("correct count exceeds item count".into()));
    }
    let (a, b) = (correct_a as f64, (n_a - correct_a) as f64);
    let (c, d) = (correct_b as f64, (n_b - correct_b) as f64);
    let total = a + b + c + d;
    let right = a + c;
    let wrong = b + d;
    if right == 0.0 || wrong == 0.0 {
        return Ok(ChiSquareResult {
            statistic: 0.0,
            p_value: 1.0,
        });
    }
    let cross = a * d - b * c;
    let statistic = total * cross * cross / (n_a as f64 * n_b as f64 * right * wrong);
    // survival function of χ²₁
    let p_value = erfc((statistic / 2.0).sqrt()).min(1.0);
    Ok(ChiSquareResult { statistic, p_value })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationDifference {
    /// ρ(human, a) − ρ(human, b) on the full data.
    pub observed_delta: f64,
    /// Mean of the resampled differences.
    pub mean_delta: f64,
    pub p_value: f64,
    /// Resamples that produced a defined ρ for both systems.
    pub valid_resamples: usize,
}

/// Paired bootstrap over items for the difference between two Spearman
/// correlations with the same human scores. Two-sided:
/// `p = min(1, 2 · min(P(Δ ≤ 0), P(Δ ≥ 0)))`.
pub fn correlation_difference_test(
    human: &[f64],
    model_a: &[f64],
    model_b: &[f64],
    iterations: usize,
    seed: u64,
) -> Result<CorrelationDifference> {
    let n = human.len();
    if model_a.len() != n || model_b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: if model_a.len() != n { model_a.len() } else { model_b.len() },
        });
    }
    if n < 10 {
        return Err(Error::InsufficientData(format!(
            "correlation difference test needs at least 10 items, got {n}"
        )));
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    let observed_delta = spearman(human, model_a)? - spearman(human, model_b)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut h, mut a, mut b) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let (mut le, mut ge, mut valid) = (0usize, 0usize, 0usize);
    let mut sum = 0.0;
    for _ in 0..iterations {
        for i in 0..n {
            let j = rng.random_range(0..n);
            h[i] = human[j];
            a[i] = model_a[j];
            b[i] = model_b[j];
        }
        // resamples with a constant column have no defined ρ
        let (Ok(ra), Ok(rb)) = (spearman(&h, &a), spearman(&h, &b)) else {
            continue;
        };
        let delta = ra - rb;
        valid += 1;
        sum += delta;
        if delta <= 0.0 {
            le += 1;
        }
        if delta >= 0.0 {
            ge += 1;
        }
    }
    if valid == 0 {
        return Err(Error::Numerical("no bootstrap resample had a defined correlation".into()));
    }
    let tail = le.min(ge) as f64 / valid as f64;
    Ok(CorrelationDifference {
        observed_delta,
        mean_delta: sum / valid as f64,
        p_value: (2.0 * tail).min(1.0),
        valid_resamples: valid,
    })
}

/// Significance level used for verdicts.
pub const ALPHA: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub test: &'static str,
    /// χ² statistic, or the observed Δρ for correlation tasks.
    pub statistic: f64,
    pub p_value: f64,
    pub items: usize,
}

impl Comparison {
    pub fn significant(&self, alpha: f64) -> bool {
        self.p_value < alpha
    }
}

/// Runs the test that fits the reports' task: χ² on accuracy counts for
/// classification tasks, a paired bootstrap over the shared items for
/// correlation tasks.
pub fn compare_reports(
    a: &EvaluationReport,
    b: &EvaluationReport,
    iterations: usize,
    seed: u64,
) -> Result<Comparison> {
    if a.task != b.task {
        return Err(Error::InvalidArgument(format!(
            "cannot compare a {} report with a {} report",
            a.task, b.task
        )));
    }
    if a.task.is_correlation() {
        let by_key: std::collections::HashMap<&str, (f64, f64)> =
            b.items.iter().map(|i| (i.key.as_str(), (i.human, i.model))).collect();
        let (mut human, mut ma, mut mb) = (Vec::new(), Vec::new(), Vec::new());
        for item in &a.items {
            if let Some(&(h, m)) = by_key.get(item.key.as_str()) {
                if h != item.human {
                    return Err(Error::InvalidArgument(format!(
                        "item '{}' has different human scores in the two reports",
                        item.key
                    )));
                }
                human.push(h);
                ma.push(item.model);
                mb.push(m);
            }
        }
        let r = correlation_difference_test(&human, &ma, &mb, iterations, seed)?;
        Ok(Comparison {
            test: "paired-bootstrap",
            statistic: r.observed_delta,
            p_value: r.p_value,
            items: human.len(),
        })
    } else {
        let counts = |r: &EvaluationReport| match (r.correct, r.n_test) {
            (Some(c), Some(n)) => Ok((c, n)),
            _ => Err(Error::InvalidArgument(format!(
                "{} report lacks 'correct' and 'n_test' counts",
                r.task
            ))),
        };
        let ((ca, na), (cb, nb)) = (counts(a)?, counts(b)?);
        let r = chi_square_accuracy_test(ca, na, cb, nb)?;
        Ok(Comparison {
            test: "chi-square",
            statistic: r.statistic,
            p_value: r.p_value,
            items: (na + nb) as usize,
        })
    }
}
