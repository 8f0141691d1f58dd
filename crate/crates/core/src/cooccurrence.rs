//! Count-based space construction: basis selection, windowed counting,
//! PPMI / LMI weighting and SVD projection.

use std::collections::{HashMap, HashSet};

use rayon::prelude::*;

use crate::corpus::{Pos, Sentence, TokenField, TokenStream};
use crate::error::{Error, Result};
use crate::space::{Provenance, SemanticSpace};
use crate::svd::truncated_svd;
use crate::tensor::Matrix;

/// Which words make up the context basis.
#[derive(Debug, Clone)]
pub struct BasisSpec {
    pub size: usize,
    /// Only tokens with one of these tags count; `None` keeps every tag.
    pub pos_filter: Option<HashSet<Pos>>,
    pub stop_words: HashSet<String>,
    /// Drop this many of the most frequent surviving words first.
    pub skip_top: usize,
    pub field: TokenField,
}

impl BasisSpec {
    pub fn new(size: usize) -> Self {
        BasisSpec {
            size,
            pos_filter: None,
            stop_words: HashSet::new(),
            skip_top: 0,
            field: TokenField::Surface,
        }
    }
}

/// Word frequencies in `(count desc, word asc)` order.
pub fn frequency_ranking<'a, I>(tokens: I) -> Vec<(String, u64)>
where
    I: IntoIterator<Item = &'a str>,
{
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_default() += 1;
    }
    let mut ranked: Vec<(String, u64)> = counts.into_iter().map(|(w, c)| (w.to_owned(), c)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    ranked
}

/// Ordered context basis: the `spec.size` most frequent words left after the
/// POS filter, the stop-word list and the `skip_top` most frequent survivors
/// are removed.
pub fn select_basis(stream: &TokenStream, spec: &BasisSpec) -> Result<Vec<String>> {
    if stream.is_empty() {
        return Err(Error::EmptyStream);
    }
    let tokens = stream
        .sentences()
        .flatten()
        .filter(|t| spec.pos_filter.as_ref().is_none_or(|f| f.contains(&t.pos)))
        .map(|t| t.form(spec.field))
        .filter(|w| !spec.stop_words.contains(*w));
    let ranked = frequency_ranking(tokens);
    if spec.skip_top >= ranked.len() {
        return Err(Error::InsufficientData(format!(
            "skip_top {} leaves no candidates out of {}",
            spec.skip_top,
            ranked.len()
        )));
    }
    let survivors = ranked.len() - spec.skip_top;
    if survivors < spec.size {
        return Err(Error::InsufficientData(format!(
            "basis needs {} words but only {survivors} survive filtering ({} short)",
            spec.size,
            spec.size - survivors
        )));
    }
    Ok(ranked
        .into_iter()
        .skip(spec.skip_top)
        .take(spec.size)
        .map(|(w, _)| w)
        .collect())
}

/// Sparse target × context counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CooccurrenceMatrix {
    targets: Vec<String>,
    contexts: Vec<String>,
    window: usize,
    /// Per target, `(context index, count)` sorted by context index, no zeros.
    rows: Vec<Vec<(u32, u64)>>,
    target_totals: Vec<u64>,
    context_totals: Vec<u64>,
    grand_total: u64,
}

impl CooccurrenceMatrix {
    fn from_rows(targets: Vec<String>, contexts: Vec<String>, window: usize, rows: Vec<Vec<(u32, u64)>>) -> Self {
        let mut context_totals = vec![0u64; contexts.len()];
        let target_totals: Vec<u64> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&(c, n)| {
                        context_totals[c as usize] += n;
                        n
                    })
                    .sum()
            })
            .collect();
        let grand_total = target_totals.iter().sum();
        CooccurrenceMatrix {
            targets,
            contexts,
            window,
            rows,
            target_totals,
            context_totals,
            grand_total,
        }
    }

    /// Builds a matrix from dense counts (`counts[t][c]`).
    pub fn from_dense(targets: Vec<String>, contexts: Vec<String>, counts: &[Vec<u64>], window: usize) -> Result<Self> {
        if counts.len() != targets.len() || counts.iter().any(|r| r.len() != contexts.len()) {
            return Err(Error::ShapeMismatch(format!(
                "counts must be {}x{}",
                targets.len(),
                contexts.len()
            )));
        }
        let rows = counts
            .iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, &n)| n > 0)
                    .map(|(c, &n)| (c as u32, n))
                    .collect()
            })
            .collect();
        Ok(CooccurrenceMatrix::from_rows(targets, contexts, window, rows))
    }

    pub fn targets(&self) -> &[String] {
        &self.targets
    }

    pub fn contexts(&self) -> &[String] {
        &self.contexts
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn count(&self, target: usize, context: usize) -> u64 {
        let row = &self.rows[target];
        row.binary_search_by_key(&(context as u32), |&(c, _)| c)
            .map_or(0, |i| row[i].1)
    }

    pub fn row_entries(&self, target: usize) -> &[(u32, u64)] {
        &self.rows[target]
    }

    pub fn target_total(&self, target: usize) -> u64 {
        self.target_totals[target]
    }

    pub fn context_total(&self, context: usize) -> u64 {
        self.context_totals[context]
    }

    pub fn grand_total(&self) -> u64 {
        self.grand_total
    }

    /// Number of stored non-zero cells.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Sums two count matrices over the same index and window.
    pub fn merge(&self, other: &CooccurrenceMatrix) -> Result<CooccurrenceMatrix> {
        if self.targets != other.targets || self.contexts != other.contexts || self.window != other.window {
            return Err(Error::InvalidArgument(
                "can only merge matrices with identical targets, contexts and window".into(),
            ));
        }
        let rows = self
            .rows
            .iter()
            .zip(&other.rows)
            .map(|(a, b)| merge_sorted(a, b))
            .collect();
        Ok(CooccurrenceMatrix::from_rows(
            self.targets.clone(),
            self.contexts.clone(),
            self.window,
            rows,
        ))
    }
}

fn merge_sorted(a: &[(u32, u64)], b: &[(u32, u64)]) -> Vec<(u32, u64)> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                out.push((a[i].0, a[i].1 + b[j].1));
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

type Shard = HashMap<(u32, u32), u64>;

fn count_sentence(
    sentence: &Sentence,
    field: TokenField,
    target_ids: &HashMap<&str, u32>,
    context_ids: &HashMap<&str, u32>,
    window: usize,
    ids: &mut Vec<(Option<u32>, Option<u32>)>,
    acc: &mut Shard,
) {
    ids.clear();
    ids.extend(sentence.iter().map(|t| {
        let w = t.form(field);
        (target_ids.get(w).copied(), context_ids.get(w).copied())
    }));
    for (i, &(target, _)) in ids.iter().enumerate() {
        let Some(t) = target else { continue };
        let lo = i.saturating_sub(window);
        let hi = (i + window).min(ids.len() - 1);
        for (j, &(_, context)) in ids.iter().enumerate().take(hi + 1).skip(lo) {
            if j == i {
                continue;
            }
            if let Some(c) = context {
                *acc.entry((t, c)).or_default() += 1;
            }
        }
    }
}

/// Counts, for each target token, the context tokens within `window`
/// positions on either side. Windows stop at sentence boundaries.
pub fn count_cooccurrences(
    stream: &TokenStream,
    targets: &[String],
    contexts: &[String],
    window: usize,
    field: TokenField,
) -> Result<CooccurrenceMatrix> {
    if window == 0 {
        return Err(Error::InvalidArgument("window must be at least 1".into()));
    }
    let target_ids = index_words(targets)?;
    let context_ids = index_words(contexts)?;
    let sentences: Vec<&Sentence> = stream.sentences().collect();

    let merged: Shard = sentences
        .par_chunks(256)
        .fold(
            || (Shard::new(), Vec::new()),
            |(mut acc, mut ids), chunk| {
                for s in chunk {
                    count_sentence(s, field, &target_ids, &context_ids, window, &mut ids, &mut acc);
                }
                (acc, ids)
            },
        )
        .map(|(acc, _)| acc)
        .reduce(Shard::new, |mut a, b| {
            let (mut big, small) = if a.len() >= b.len() { (a, b) } else { (b, std::mem::take(&mut a)) };
            for (k, v) in small {
                *big.entry(k).or_default() += v;
            }
            big
        });

    let mut rows: Vec<Vec<(u32, u64)>> = vec![Vec::new(); targets.len()];
    for ((t, c), n) in merged {
        rows[t as usize].push((c, n));
    }
    rows.iter_mut().for_each(|r| r.sort_unstable_by_key(|&(c, _)| c));
    Ok(CooccurrenceMatrix::from_rows(targets.to_vec(), contexts.to_vec(), window, rows))
}

fn index_words(words: &[String]) -> Result<HashMap<&str, u32>> {
    let mut ids = HashMap::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        if ids.insert(w.as_str(), i as u32).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate word '{w}' in index")));
        }
    }
    Ok(ids)
}

fn weighted(m: &CooccurrenceMatrix, cell: impl Fn(u64, f64) -> f64 + Sync) -> Result<SemanticSpace> {
    if m.grand_total == 0 {
        return Err(Error::InsufficientData("co-occurrence matrix has no counts".into()));
    }
    let dim = m.contexts.len();
    let grand = m.grand_total as f64;
    let mut data = vec![0.0; m.targets.len() * dim];
    if dim > 0 {
        data.par_chunks_mut(dim).enumerate().for_each(|(t, out)| {
            let row_total = m.target_totals[t] as f64;
            for &(c, n) in &m.rows[t] {
                let p_c_given_t = n as f64 / row_total;
                let p_c = m.context_totals[c as usize] as f64 / grand;
                out[c as usize] = cell(n, (p_c_given_t / p_c).ln());
            }
        });
    }
    SemanticSpace::new(m.targets.clone(), dim, data, Provenance::Count)
}

/// `max(0, ln(p(c|t) / p(c)))`, zero for unseen pairs.
pub fn weight_ppmi(m: &CooccurrenceMatrix) -> Result<SemanticSpace> {
    weighted(m, |_, pmi| pmi.max(0.0))
}

/// `count(t,c) · ln(p(c|t) / p(c))`, zero for unseen pairs. Not clamped.
pub fn weight_lmi(m: &CooccurrenceMatrix) -> Result<SemanticSpace> {
    weighted(m, |n, pmi| n as f64 * pmi)
}

/// Reduces a space to `k` dimensions. Rows are optionally L2-normalized
/// first; each output row is the word's row of `U_k Σ_k`.
pub fn project_space(space: &SemanticSpace, k: usize, normalize_first: bool) -> Result<SemanticSpace> {
    if k == 0 || k > space.len().min(space.dim()) {
        return Err(Error::InvalidArgument(format!(
            "projection to {k} dims needs 1 <= k <= min(vocab {}, dim {})",
            space.len(),
            space.dim()
        )));
    }
    let input = if normalize_first { space.normalized() } else { space.clone() };
    let svd = truncated_svd(&input.to_matrix(), k)?;
    let mut rows = svd.u.as_slice().to_vec();
    for row in rows.chunks_mut(k) {
        for (x, s) in row.iter_mut().zip(svd.s.as_slice()) {
            *x *= s;
        }
    }
    let projected = Matrix::from_raw(space.len(), k, rows);
    Ok(SemanticSpace::from_matrix(space.words().to_vec(), &projected, Provenance::Svd)?
        .with_lemmatized(space.is_lemmatized()))
}
