//! Skip-gram with negative sampling.
//!
//! For an observed pair (target `t`, context `c`) and noise words `c'`, the
//! per-pair loss is
//!
//! ```text
//! L = -ln σ(v_c · v_t) - Σ_{c'} ln σ(-v_{c'} · v_t)
//! ```
//!
//! with separate target and context tables. Training walks every position of
//! every sentence, pairs it with each neighbour inside the window, and takes a
//! plain SGD step with a linearly decaying learning rate. The exported space
//! is the target table.
//!
//! Parameters live in `AtomicU64` cells holding `f64` bits. Single-threaded
//! runs are fully deterministic; the optional parallel mode lets workers race
//! on shared rows (Hogwild-style) and gives up bit reproducibility.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cooccurrence::frequency_ranking;
use crate::corpus::{TokenField, TokenStream};
use crate::error::{Error, Result};
use crate::space::{Provenance, SemanticSpace};

#[derive(Debug, Clone, PartialEq)]
pub struct SgnsConfig {
    pub dim: usize,
    pub window: usize,
    pub negatives: usize,
    pub epochs: usize,
    /// Initial rate; decays linearly towards `learning_rate * 1e-4`.
    pub learning_rate: f64,
    pub noise_power: f64,
    pub seed: u64,
    /// Words rarer than this are dropped from the vocabulary.
    pub min_count: u64,
    /// Frequent-word subsampling threshold; `None` disables it.
    pub subsample: Option<f64>,
    /// Racy multi-threaded updates. Voids determinism.
    pub parallel: bool,
    pub workers: usize,
    pub field: TokenField,
}

impl Default for SgnsConfig {
    fn default() -> Self {
        SgnsConfig {
            dim: 50,
            window: 5,
            negatives: 5,
            epochs: 5,
            learning_rate: 0.025,
            noise_power: 0.75,
            seed: 1,
            min_count: 1,
            subsample: None,
            parallel: false,
            workers: 1,
            field: TokenField::Surface,
        }
    }
}

impl SgnsConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dim", self.dim),
            ("window", self.window),
            ("negatives", self.negatives),
            ("epochs", self.epochs),
            ("workers", self.workers),
        ] {
            if v == 0 {
                return Err(Error::InvalidArgument(format!("{name} must be at least 1")));
            }
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::InvalidArgument("learning_rate must be positive".into()));
        }
        if !self.noise_power.is_finite() {
            return Err(Error::InvalidArgument("noise_power must be finite".into()));
        }
        Ok(())
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-ln σ(-x)`, computed without overflow.
fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

fn load_row(table: &[AtomicU64], row: usize, dim: usize, out: &mut [f64]) {
    for (o, cell) in out.iter_mut().zip(&table[row * dim..(row + 1) * dim]) {
        *o = f64::from_bits(cell.load(Ordering::Relaxed));
    }
}

fn axpy_row(table: &[AtomicU64], row: usize, dim: usize, alpha: f64, x: &[f64]) {
    for (cell, &xi) in table[row * dim..(row + 1) * dim].iter().zip(x) {
        let v = f64::from_bits(cell.load(Ordering::Relaxed)) + alpha * xi;
        cell.store(v.to_bits(), Ordering::Relaxed);
    }
}

fn snapshot(table: &[AtomicU64]) -> Vec<f64> {
    table.iter().map(|c| f64::from_bits(c.load(Ordering::Relaxed))).collect()
}

fn atomics(values: &[f64]) -> Vec<AtomicU64> {
    values.iter().map(|v| AtomicU64::new(v.to_bits())).collect()
}

/// Loss of one observed pair plus its noise draws, and the gradient with
/// respect to every vector involved.
#[derive(Debug, Clone, PartialEq)]
pub struct PairLoss {
    pub loss: f64,
    pub grad_target: Vec<f64>,
    pub grad_context: Vec<f64>,
    /// One gradient per entry of the `negatives` list, in order.
    pub grad_negatives: Vec<Vec<f64>>,
}

/// Loss and gradients from raw vectors.
pub fn pair_loss_vectors(target: &[f64], context: &[f64], negatives: &[&[f64]]) -> PairLoss {
    let dim = target.len();
    let x = dot(context, target);
    let mut loss = softplus(-x);
    let g = sigmoid(x) - 1.0;
    let mut grad_target: Vec<f64> = context.iter().map(|v| g * v).collect();
    let grad_context: Vec<f64> = target.iter().map(|v| g * v).collect();
    let mut grad_negatives = Vec::with_capacity(negatives.len());
    for n in negatives {
        let xn = dot(n, target);
        loss += softplus(xn);
        let s = sigmoid(xn);
        for d in 0..dim {
            grad_target[d] += s * n[d];
        }
        grad_negatives.push(target.iter().map(|v| s * v).collect());
    }
    PairLoss {
        loss,
        grad_target,
        grad_context,
        grad_negatives,
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Draws from the unigram distribution raised to `power`.
#[derive(Debug, Clone)]
pub struct NoiseDistribution {
    index: WeightedIndex<f64>,
}

impl NoiseDistribution {
    pub fn new(counts: &[u64], power: f64) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidArgument("noise distribution over an empty vocabulary".into()));
        }
        let weights: Vec<f64> = counts.iter().map(|&c| (c as f64).powf(power)).collect();
        let index = WeightedIndex::new(&weights)
            .map_err(|e| Error::InvalidArgument(format!("noise weights: {e}")))?;
        Ok(NoiseDistribution { index })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.index.sample(rng)
    }
}

/// `k` i.i.d. vocabulary indices from `counts^noise_power`.
pub fn sample_negatives<R: Rng + ?Sized>(counts: &[u64], noise_power: f64, k: usize, rng: &mut R) -> Result<Vec<usize>> {
    let noise = NoiseDistribution::new(counts, noise_power)?;
    Ok((0..k).map(|_| noise.sample(rng)).collect())
}

#[derive(Debug)]
pub struct SgnsModel {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, usize>,
    dim: usize,
    target: Vec<AtomicU64>,
    context: Vec<AtomicU64>,
}

impl Clone for SgnsModel {
    fn clone(&self) -> Self {
        SgnsModel {
            words: self.words.clone(),
            counts: self.counts.clone(),
            index: self.index.clone(),
            dim: self.dim,
            target: atomics(&snapshot(&self.target)),
            context: atomics(&snapshot(&self.context)),
        }
    }
}

impl SgnsModel {
    /// Model with explicit parameter tables (row-major, one row per word).
    pub fn from_parts(
        words: Vec<String>,
        counts: Vec<u64>,
        dim: usize,
        target: Vec<f64>,
        context: Vec<f64>,
    ) -> Result<Self> {
        if counts.len() != words.len() || target.len() != words.len() * dim || context.len() != target.len() {
            return Err(Error::ShapeMismatch("inconsistent SGNS tables".into()));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word '{w}'")));
            }
        }
        Ok(SgnsModel {
            words,
            counts,
            index,
            dim,
            target: atomics(&target),
            context: atomics(&context),
        })
    }

    /// Targets uniform in `±0.5/dim`, contexts zero.
    pub fn initialize(words: Vec<String>, counts: Vec<u64>, dim: usize, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 0.5 / dim as f64;
        let target: Vec<f64> = (0..words.len() * dim)
            .map(|_| rng.random_range(-scale..scale))
            .collect();
        let context = vec![0.0; target.len()];
        SgnsModel::from_parts(words, counts, dim, target, context)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn id(&self, word: &str) -> Result<usize> {
        self.index
            .get(word)
            .copied()
            .ok_or_else(|| Error::UnknownWord(word.to_owned()))
    }

    pub fn target_vector(&self, word: &str) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        load_row(&self.target, self.id(word)?, self.dim, &mut out);
        Ok(out)
    }

    pub fn context_vector(&self, word: &str) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        load_row(&self.context, self.id(word)?, self.dim, &mut out);
        Ok(out)
    }

    pub fn pair_loss(&self, target: &str, context: &str, negatives: &[&str]) -> Result<PairLoss> {
        let t = self.target_vector(target)?;
        let c = self.context_vector(context)?;
        let ns = negatives
            .iter()
            .map(|n| self.context_vector(n))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&[f64]> = ns.iter().map(Vec::as_slice).collect();
        Ok(pair_loss_vectors(&t, &c, &refs))
    }

    /// The target table as a space.
    pub fn target_space(&self) -> SemanticSpace {
        SemanticSpace::new(self.words.clone(), self.dim, snapshot(&self.target), Provenance::Neural)
            .expect("model tables are consistent")
    }

    /// One SGD step on the pair `(t, c)` with noise words `negs`; returns the
    /// loss before the update.
    fn step(&self, t: usize, c: usize, negs: &[usize], lr: f64, buf: &mut StepBuffers) -> f64 {
        let dim = self.dim;
        load_row(&self.target, t, dim, &mut buf.target);
        load_row(&self.context, c, dim, &mut buf.context);
        let x = dot(&buf.context, &buf.target);
        let mut loss = softplus(-x);
        let g = sigmoid(x) - 1.0;
        for d in 0..dim {
            buf.grad_target[d] = g * buf.context[d];
        }
        axpy_row(&self.context, c, dim, -lr * g, &buf.target);
        for &n in negs {
            load_row(&self.context, n, dim, &mut buf.noise);
            let xn = dot(&buf.noise, &buf.target);
            loss += softplus(xn);
            let s = sigmoid(xn);
            for d in 0..dim {
                buf.grad_target[d] += s * buf.noise[d];
            }
            axpy_row(&self.context, n, dim, -lr * s, &buf.target);
        }
        axpy_row(&self.target, t, dim, -lr, &buf.grad_target);
        loss
    }
}

struct StepBuffers {
    target: Vec<f64>,
    context: Vec<f64>,
    noise: Vec<f64>,
    grad_target: Vec<f64>,
}

impl StepBuffers {
    fn new(dim: usize) -> Self {
        StepBuffers {
            target: vec![0.0; dim],
            context: vec![0.0; dim],
            noise: vec![0.0; dim],
            grad_target: vec![0.0; dim],
        }
    }
}

/// A finished training run.
#[derive(Debug, Clone)]
pub struct SgnsRun {
    pub model: SgnsModel,
    /// Mean pair loss of each epoch, measured before each update.
    pub epoch_losses: Vec<f64>,
}

impl SgnsRun {
    pub fn space(&self) -> SemanticSpace {
        self.model.target_space()
    }
}

struct Shared<'a> {
    model: &'a SgnsModel,
    noise: &'a NoiseDistribution,
    keep_prob: &'a [f64],
    config: &'a SgnsConfig,
    total_positions: f64,
}

impl Shared<'_> {
    /// Trains over `sentences`; `done` is the global position count at the
    /// start. Returns `(loss sum, pair count)`.
    fn run(&self, sentences: &[Vec<usize>], mut done: u64, rng: &mut ChaCha8Rng) -> (f64, u64) {
        let cfg = self.config;
        let mut buf = StepBuffers::new(self.model.dim);
        let mut negs = Vec::with_capacity(cfg.negatives);
        let mut kept = Vec::new();
        let (mut loss_sum, mut pairs) = (0.0, 0u64);
        for sentence in sentences {
            kept.clear();
            if cfg.subsample.is_some() {
                kept.extend(
                    sentence
                        .iter()
                        .copied()
                        .filter(|&w| self.keep_prob[w] >= 1.0 || rng.random::<f64>() < self.keep_prob[w]),
                );
            } else {
                kept.extend_from_slice(sentence);
            }
            for i in 0..kept.len() {
                let progress = done as f64 / self.total_positions;
                let lr = cfg.learning_rate * (1.0 - progress).max(1e-4);
                done += 1;
                let t = kept[i];
                let lo = i.saturating_sub(cfg.window);
                let hi = (i + cfg.window).min(kept.len() - 1);
                for (j, &c) in kept.iter().enumerate().take(hi + 1).skip(lo) {
                    if j == i {
                        continue;
                    }
                    negs.clear();
                    for _ in 0..cfg.negatives {
                        let n = self.noise.sample(rng);
                        // a draw equal to the observed context is not noise
                        if n != c {
                            negs.push(n);
                        }
                    }
                    loss_sum += self.model.step(t, c, &negs, lr, &mut buf);
                    pairs += 1;
                }
            }
        }
        (loss_sum, pairs)
    }
}

/// Trains skip-gram vectors on `stream`.
pub fn train(stream: &TokenStream, config: &SgnsConfig) -> Result<SgnsRun> {
    config.validate()?;
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let ranked: Vec<(String, u64)> = frequency_ranking(stream.sentences().flatten().map(|t| t.form(config.field)))
        .into_iter()
        .filter(|(_, c)| *c >= config.min_count)
        .collect();
    if ranked.is_empty() {
        return Err(Error::InsufficientData(format!(
            "no word occurs at least {} times",
            config.min_count
        )));
    }
    let (words, counts): (Vec<String>, Vec<u64>) = ranked.into_iter().unzip();
    let model = SgnsModel::initialize(words, counts, config.dim, config.seed)?;

    let sentences: Vec<Vec<usize>> = stream
        .sentences()
        .map(|s| s.iter().filter_map(|t| model.index.get(t.form(config.field)).copied()).collect::<Vec<_>>())
        .filter(|s: &Vec<usize>| s.len() > 1)
        .collect();
    let total_tokens: u64 = model.counts.iter().sum();
    let keep_prob: Vec<f64> = match config.subsample {
        Some(threshold) => model
            .counts
            .iter()
            .map(|&c| {
                let ratio = threshold * total_tokens as f64 / c as f64;
                (ratio.sqrt() + ratio).min(1.0)
            })
            .collect(),
        None => vec![1.0; model.counts.len()],
    };
    let noise = NoiseDistribution::new(&model.counts, config.noise_power)?;
    let positions_per_epoch: u64 = sentences.iter().map(|s| s.len() as u64).sum();
    let shared = Shared {
        model: &model,
        noise: &noise,
        keep_prob: &keep_prob,
        config,
        total_positions: (positions_per_epoch * config.epochs as u64).max(1) as f64,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed.wrapping_add(0x9e37_79b9_7f4a_7c15));
    let mut epoch_losses = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let start = epoch as u64 * positions_per_epoch;
        let (loss, pairs) = if config.parallel && config.workers > 1 {
            let chunk = sentences.len().div_ceil(config.workers).max(1);
            let mut offsets = Vec::new();
            let mut acc = start;
            for part in sentences.chunks(chunk) {
                offsets.push(acc);
                acc += part.iter().map(|s| s.len() as u64).sum::<u64>();
            }
            let seeds: Vec<u64> = (0..offsets.len()).map(|_| rng.random()).collect();
            std::thread::scope(|scope| {
                let handles: Vec<_> = sentences
                    .chunks(chunk)
                    .zip(offsets.iter().zip(&seeds))
                    .map(|(part, (&offset, &seed))| {
                        let shared = &shared;
                        scope.spawn(move || {
                            let mut local = ChaCha8Rng::seed_from_u64(seed);
                            shared.run(part, offset, &mut local)
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("worker panicked"))
                    .fold((0.0, 0), |(l, p), (l2, p2)| (l + l2, p + p2))
            })
        } else {
            shared.run(&sentences, start, &mut rng)
        };
        epoch_losses.push(if pairs == 0 { 0.0 } else { loss / pairs as f64 });
    }
    Ok(SgnsRun { model, epoch_losses })
}
