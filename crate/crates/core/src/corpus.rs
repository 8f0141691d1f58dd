//! Tokenized corpora.
//!
//! On disk a token stream is UTF-8 with one token per line,
//! `surface<TAB>lemma<TAB>pos`, where lemma and pos may be empty or missing.
//! A blank line ends a sentence and a `#DOC` line starts a new document.

use std::collections::HashSet;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Coarse part-of-speech tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum Pos {
    Noun,
    Verb,
    Adj,
    Adv,
    #[default]
    Other,
}

impl Pos {
    /// Nouns, verbs, adjectives and adverbs.
    pub fn content() -> HashSet<Pos> {
        [Pos::Noun, Pos::Verb, Pos::Adj, Pos::Adv].into_iter().collect()
    }
}

impl FromStr for Pos {
    type Err = Error;

    /// Accepts the coarse names, universal tags and Penn-style tags (`NN*`,
    /// `VB*`, `JJ*`, `RB*`). Any other tag is `Other`.
    fn from_str(s: &str) -> Result<Self> {
        let tag = s.trim().to_ascii_uppercase();
        Ok(match tag.as_str() {
            "NOUN" | "PROPN" => Pos::Noun,
            "VERB" => Pos::Verb,
            "ADJ" => Pos::Adj,
            "ADV" => Pos::Adv,
            t if t.starts_with("NN") => Pos::Noun,
            t if t.starts_with("VB") => Pos::Verb,
            t if t.starts_with("JJ") => Pos::Adj,
            t if t.starts_with("RB") => Pos::Adv,
            _ => Pos::Other,
        })
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Pos::Noun => "NOUN",
            Pos::Verb => "VERB",
            Pos::Adj => "ADJ",
            Pos::Adv => "ADV",
            Pos::Other => "OTHER",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub surface: String,
    pub lemma: Option<String>,
    pub pos: Pos,
}

impl Token {
    pub fn new(surface: impl Into<String>) -> Self {
        Token {
            surface: surface.into(),
            lemma: None,
            pos: Pos::Other,
        }
    }

    pub fn with_lemma(mut self, lemma: impl Into<String>) -> Self {
        self.lemma = Some(lemma.into());
        self
    }

    pub fn with_pos(mut self, pos: Pos) -> Self {
        self.pos = pos;
        self
    }

    pub fn form(&self, field: TokenField) -> &str {
        match field {
            TokenField::Surface => &self.surface,
            TokenField::Lemma => self.lemma.as_deref().unwrap_or(&self.surface),
        }
    }
}

/// Which token field a space is built over. Lemma falls back to surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TokenField {
    #[default]
    Surface,
    Lemma,
}

pub type Sentence = Vec<Token>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TokenStream {
    documents: Vec<Vec<Sentence>>,
}

impl TokenStream {
    pub fn new(documents: Vec<Vec<Sentence>>) -> Self {
        let documents = documents
            .into_iter()
            .map(|d| d.into_iter().filter(|s| !s.is_empty()).collect::<Vec<_>>())
            .filter(|d| !d.is_empty())
            .collect();
        TokenStream { documents }
    }

    /// One document; each line is a sentence of whitespace-separated surfaces.
    pub fn from_plain_text(text: &str) -> Self {
        let sentences = text
            .lines()
            .map(|l| l.split_whitespace().map(Token::new).collect())
            .collect();
        TokenStream::new(vec![sentences])
    }

    pub fn documents(&self) -> &[Vec<Sentence>] {
        &self.documents
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flatten()
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(Vec::len).sum()
    }

    pub fn token_count(&self) -> usize {
        self.sentences().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut documents: Vec<Vec<Sentence>> = Vec::new();
        let mut doc: Vec<Sentence> = Vec::new();
        let mut sentence: Sentence = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line == "#DOC" {
                if !sentence.is_empty() {
                    doc.push(std::mem::take(&mut sentence));
                }
                if !doc.is_empty() {
                    documents.push(std::mem::take(&mut doc));
                }
                continue;
            }
            if line.trim().is_empty() {
                if !sentence.is_empty() {
                    doc.push(std::mem::take(&mut sentence));
                }
                continue;
            }
            let mut fields = line.split('\t');
            let surface = fields.next().unwrap_or_default();
            if surface.is_empty() {
                return Err(Error::parse(i + 1, "empty surface form"));
            }
            let lemma = fields.next().filter(|l| !l.is_empty()).map(str::to_owned);
            let pos = match fields.next() {
                Some(p) => p.parse().map_err(|e: Error| Error::parse(i + 1, e.to_string()))?,
                None => Pos::Other,
            };
            sentence.push(Token {
                surface: surface.to_owned(),
                lemma,
                pos,
            });
        }
        if !sentence.is_empty() {
            doc.push(sentence);
        }
        if !doc.is_empty() {
            documents.push(doc);
        }
        Ok(TokenStream { documents })
    }
}

/// One word per line; blank lines ignored.
pub fn read_word_list<R: BufRead>(reader: R) -> Result<HashSet<String>> {
    let mut out = HashSet::new();
    for line in reader.lines() {
        let line = line?;
        let w = line.trim();
        if !w.is_empty() {
            out.insert(w.to_owned());
        }
    }
    Ok(out)
}
