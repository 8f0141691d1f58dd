//! Immutable word → vector spaces.

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::tensor::{self, Matrix, Vector};

/// How a space was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    Count,
    Svd,
    Neural,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Count => "count",
            Provenance::Svd => "svd",
            Provenance::Neural => "neural",
        })
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "count" => Ok(Provenance::Count),
            "svd" => Ok(Provenance::Svd),
            "neural" => Ok(Provenance::Neural),
            other => Err(Error::InvalidArgument(format!(
                "unknown provenance '{other}' (expected count, svd or neural)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SemanticSpace {
    words: Vec<String>,
    index: HashMap<String, usize>,
    dim: usize,
    data: Vec<f64>,
    provenance: Provenance,
    lemmatized: bool,
}

impl SemanticSpace {
    /// `data` holds one row of `dim` values per word, in vocabulary order.
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if data.len() != words.len() * dim {
            return Err(Error::ShapeMismatch(format!(
                "{} words x {dim} dims needs {} values, got {}",
                words.len(),
                words.len() * dim,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "component {} of '{}'",
                i % dim.max(1),
                words[i / dim.max(1)]
            )));
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate word '{w}'")));
            }
        }
        Ok(SemanticSpace {
            words,
            index,
            dim,
            data,
            provenance,
            lemmatized: false,
        })
    }

    pub fn from_matrix(words: Vec<String>, matrix: &Matrix, provenance: Provenance) -> Result<Self> {
        if matrix.rows() != words.len() {
            return Err(Error::DimensionMismatch {
                expected: words.len(),
                actual: matrix.rows(),
            });
        }
        SemanticSpace::new(words, matrix.cols(), matrix.as_slice().to_vec(), provenance)
    }

    pub fn empty(dim: usize, provenance: Provenance) -> Self {
        SemanticSpace {
            words: Vec::new(),
            index: HashMap::new(),
            dim,
            data: Vec::new(),
            provenance,
            lemmatized: false,
        }
    }

    pub fn with_lemmatized(mut self, lemmatized: bool) -> Self {
        self.lemmatized = lemmatized;
        self
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn is_lemmatized(&self) -> bool {
        self.lemmatized
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn contains(&self, word: &str) -> bool {
        self.index.contains_key(word)
    }

    pub fn row_at(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn row(&self, word: &str) -> Option<&[f64]> {
        self.index_of(word).map(|i| self.row_at(i))
    }

    /// Exact-match lookup.
    pub fn vector(&self, word: &str) -> Option<Vector> {
        self.row(word).map(|r| Vector::from_raw(r.to_vec()))
    }

    /// Surface lookup, retrying with the lemma when the surface form is absent.
    pub fn lookup(&self, token: &str, lemma_map: Option<&LemmaMap>) -> Option<Vector> {
        LookupPolicy {
            lemma_map: lemma_map.cloned(),
            ..LookupPolicy::default()
        }
        .resolve(self, token)
        .map(|r| Vector::from_raw(r.to_vec()))
    }

    /// The whole space as a `len × dim` matrix.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_raw(self.len(), self.dim, self.data.clone())
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Every vector multiplied by `alpha`.
    pub fn scaled(&self, alpha: f64) -> SemanticSpace {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= alpha);
        out
    }

    /// Every row scaled to unit L2 norm (zero rows stay zero).
    pub fn normalized(&self) -> SemanticSpace {
        let mut out = self.clone();
        if self.dim > 0 {
            out.data.chunks_mut(self.dim).for_each(tensor::l2_normalize_in_place);
        }
        out
    }

    #[cfg(test)]
    pub(crate) fn poison_for_test(&mut self) {
        self.data[0] = f64::NAN;
    }
}

/// Surface → lemma mapping supplied by an external lemmatizer.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LemmaMap {
    map: HashMap<String, String>,
}

impl LemmaMap {
    pub fn new() -> Self {
        LemmaMap::default()
    }

    pub fn insert(&mut self, surface: impl Into<String>, lemma: impl Into<String>) {
        self.map.insert(surface.into(), lemma.into());
    }

    pub fn get(&self, surface: &str) -> Option<&str> {
        self.map.get(surface).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Reads `surface<TAB>lemma` lines; blank lines are skipped.
    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut out = LemmaMap::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split('\t');
            match (parts.next(), parts.next()) {
                (Some(s), Some(l)) if !s.is_empty() && !l.is_empty() => out.insert(s, l),
                _ => return Err(Error::parse(i + 1, "expected surface<TAB>lemma")),
            }
        }
        Ok(out)
    }
}

/// How tokens are resolved against a space. Absence is a normal outcome.
#[derive(Debug, Clone, Default)]
pub struct LookupPolicy {
    pub lemma_map: Option<LemmaMap>,
    /// Replace tokens by their lemma before looking them up (lemmatized-corpus runs).
    pub lemmatize: bool,
    /// Retry with the lowercased token as a last resort.
    pub case_fold: bool,
}

impl LookupPolicy {
    pub fn resolve<'s>(&self, space: &'s SemanticSpace, token: &str) -> Option<&'s [f64]> {
        let lemma = self.lemma_map.as_ref().and_then(|m| m.get(token));
        if self.lemmatize {
            if let Some(row) = lemma.and_then(|l| space.row(l)) {
                return Some(row);
            }
        }
        if let Some(row) = space.row(token) {
            return Some(row);
        }
        if let Some(row) = lemma.and_then(|l| space.row(l)) {
            return Some(row);
        }
        if self.case_fold {
            let lower = token.to_lowercase();
            if lower != token {
                return space.row(&lower);
            }
        }
        None
    }

    pub fn resolve_vector(&self, space: &SemanticSpace, token: &str) -> Option<Vector> {
        self.resolve(space, token).map(|r| Vector::from_raw(r.to_vec()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_words() -> SemanticSpace {
        SemanticSpace::new(
            vec!["run".into(), "Dog".into()],
            2,
            vec![1.0, 2.0, 3.0, 4.0],
            Provenance::Neural,
        )
        .unwrap()
    }

    #[test]
    fn lookup_examples() {
        let space = two_words();
        assert_eq!(space.lookup("run", None).unwrap().as_slice(), &[1.0, 2.0]);
        assert!(space.lookup("ran", None).is_none());
        let mut lemmas = LemmaMap::new();
        lemmas.insert("ran", "run");
        assert_eq!(space.lookup("ran", Some(&lemmas)).unwrap().as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn case_fold_is_opt_in() {
        let space = SemanticSpace::new(vec!["dog".into()], 1, vec![1.0], Provenance::Count).unwrap();
        let strict = LookupPolicy::default();
        assert!(strict.resolve(&space, "Dog").is_none());
        let folding = LookupPolicy {
            case_fold: true,
            ..LookupPolicy::default()
        };
        assert!(folding.resolve(&space, "Dog").is_some());
    }

    #[test]
    fn lemmatize_prefers_lemma() {
        let space = SemanticSpace::new(
            vec!["runs".into(), "run".into()],
            1,
            vec![1.0, 2.0],
            Provenance::Neural,
        )
        .unwrap();
        let mut lemmas = LemmaMap::new();
        lemmas.insert("runs", "run");
        let policy = LookupPolicy {
            lemma_map: Some(lemmas),
            lemmatize: true,
            case_fold: false,
        };
        assert_eq!(policy.resolve(&space, "runs"), Some(&[2.0][..]));
    }

    #[test]
    fn rejects_duplicates_and_bad_shapes() {
        assert!(SemanticSpace::new(vec!["a".into(), "a".into()], 1, vec![1.0, 2.0], Provenance::Count).is_err());
        assert!(SemanticSpace::new(vec!["a".into()], 2, vec![1.0], Provenance::Count).is_err());
        assert!(SemanticSpace::new(vec!["a".into()], 1, vec![f64::NAN], Provenance::Count).is_err());
    }

    #[test]
    fn lemma_map_reader() {
        let map = LemmaMap::read("ran\trun\n\ndogs\tdog\n".as_bytes()).unwrap();
        assert_eq!(map.get("dogs"), Some("dog"));
        assert!(matches!(
            LemmaMap::read("ok\tfine\nbroken\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }
}
