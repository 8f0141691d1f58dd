//! Dataset records and loaders.
//!
//! Every loader accepts the canonical tab-separated layout. The
//! disambiguation and sentence-pair loaders also accept a whitespace
//! separated file whose first line names its columns, which is how the
//! public distributions ship.

use std::collections::HashSet;
use std::io::{BufRead, Read};

use crate::error::{Error, Result};

use super::paraphrase::tokenize;

#[derive(Debug, Clone, PartialEq)]
pub struct DisambigItem {
    pub verb: String,
    pub subject: String,
    pub object: String,
    pub landmark: String,
    pub judgement: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Svo {
    pub subject: String,
    pub verb: String,
    pub object: String,
}

impl Svo {
    pub fn new(subject: impl Into<String>, verb: impl Into<String>, object: impl Into<String>) -> Self {
        Svo {
            subject: subject.into(),
            verb: verb.into(),
            object: object.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SentencePairItem {
    pub first: Svo,
    pub second: Svo,
    pub judgement: f64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParaphrasePair {
    pub sentence1: Vec<String>,
    pub sentence2: Vec<String>,
    pub label: bool,
}

/// One row of a dialogue-act file; a row may be one segment of an
/// interrupted utterance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DialogueRecord {
    pub dialogue_id: String,
    pub turn_id: String,
    pub act_tag: String,
    pub text: String,
}

fn content_lines<R: BufRead>(reader: R) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) if l.trim().is_empty() => None,
        Ok(l) => Some(Ok((i + 1, l))),
        Err(e) => Some(Err(e.into())),
    })
}

fn judgement(field: &str, line: usize) -> Result<f64> {
    match field.trim().parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::parse(line, format!("judgement '{}' is not a finite number", field.trim()))),
    }
}

fn column(header: &[&str], names: &[&str]) -> Option<usize> {
    header
        .iter()
        .position(|h| names.iter().any(|n| h.eq_ignore_ascii_case(n)))
}

/// Column positions resolved from a named header.
struct Columns(Vec<usize>);

impl Columns {
    fn resolve(header: &[&str], wanted: &[&[&str]]) -> Option<Columns> {
        wanted.iter().map(|names| column(header, names)).collect::<Option<Vec<_>>>().map(Columns)
    }

    fn pick<'a>(&self, fields: &[&'a str], line: usize) -> Result<Vec<&'a str>> {
        self.0
            .iter()
            .map(|&c| {
                fields
                    .get(c)
                    .copied()
                    .ok_or_else(|| Error::parse(line, format!("expected at least {} columns", c + 1)))
            })
            .collect()
    }
}

const JUDGEMENT_NAMES: &[&str] = &["judgement", "judgment", "input", "score", "rating"];

/// `verb<TAB>subject<TAB>object<TAB>landmark<TAB>judgement`, one row per
/// annotator judgement.
pub fn read_disambiguation<R: BufRead>(reader: R) -> Result<Vec<DisambigItem>> {
    let wanted: [&[&str]; 5] = [&["verb"], &["subject"], &["object"], &["landmark"], JUDGEMENT_NAMES];
    let mut named: Option<Columns> = None;
    let mut out = Vec::new();
    for (n, entry) in content_lines(reader).enumerate() {
        let (line, text) = entry?;
        if n == 0 {
            let header: Vec<&str> = text.split_whitespace().collect();
            if let Some(cols) = Columns::resolve(&header, &wanted) {
                named = Some(cols);
                continue;
            }
        }
        let fields: Vec<&str> = match &named {
            Some(cols) => cols.pick(&text.split_whitespace().collect::<Vec<_>>(), line)?,
            None => text.split('\t').map(str::trim).collect(),
        };
        if fields.len() != 5 || fields[..4].iter().any(|f| f.is_empty()) {
            return Err(Error::parse(
                line,
                "expected verb, subject, object, landmark and judgement",
            ));
        }
        out.push(DisambigItem {
            verb: fields[0].to_string(),
            subject: fields[1].to_string(),
            object: fields[2].to_string(),
            landmark: fields[3].to_string(),
            judgement: judgement(fields[4], line)?,
        });
    }
    Ok(out)
}

fn svo_field(field: &str, line: usize) -> Result<Svo> {
    let words: Vec<&str> = field.split_whitespace().collect();
    match words[..] {
        [s, v, o] => Ok(Svo::new(s, v, o)),
        _ => Err(Error::parse(line, format!("'{field}' is not a 'subject verb object' triple"))),
    }
}

/// `sbj1 verb1 obj1<TAB>sbj2 verb2 obj2<TAB>judgement`.
pub fn read_sentence_pairs<R: BufRead>(reader: R) -> Result<Vec<SentencePairItem>> {
    let wanted: [&[&str]; 7] = [
        &["subject1", "sbj1"],
        &["verb1"],
        &["object1", "obj1"],
        &["subject2", "sbj2"],
        &["verb2"],
        &["object2", "obj2"],
        JUDGEMENT_NAMES,
    ];
    let mut named: Option<Columns> = None;
    let mut out = Vec::new();
    for (n, entry) in content_lines(reader).enumerate() {
        let (line, text) = entry?;
        if n == 0 {
            let header: Vec<&str> = text.split_whitespace().collect();
            if let Some(cols) = Columns::resolve(&header, &wanted) {
                named = Some(cols);
                continue;
            }
        }
        let item = match &named {
            Some(cols) => {
                let f = cols.pick(&text.split_whitespace().collect::<Vec<_>>(), line)?;
                SentencePairItem {
                    first: Svo::new(f[0], f[1], f[2]),
                    second: Svo::new(f[3], f[4], f[5]),
                    judgement: judgement(f[6], line)?,
                }
            }
            None => {
                let fields: Vec<&str> = text.split('\t').collect();
                if fields.len() != 3 {
                    return Err(Error::parse(line, "expected three tab-separated fields"));
                }
                SentencePairItem {
                    first: svo_field(fields[0], line)?,
                    second: svo_field(fields[1], line)?,
                    judgement: judgement(fields[2], line)?,
                }
            }
        };
        out.push(item);
    }
    Ok(out)
}

/// MSRP layout: `label<TAB>id1<TAB>id2<TAB>sentence1<TAB>sentence2` after a
/// header line. A first line whose label is not 0 or 1 is taken as the
/// header.
pub fn read_paraphrase<R: BufRead>(reader: R) -> Result<Vec<ParaphrasePair>> {
    let mut out = Vec::new();
    for (n, entry) in content_lines(reader).enumerate() {
        let (line, text) = entry?;
        let fields: Vec<&str> = text.splitn(5, '\t').collect();
        let label = match fields[0].trim() {
            "1" => true,
            "0" => false,
            _ if n == 0 => continue,
            other => return Err(Error::parse(line, format!("label '{other}' is not 0 or 1"))),
        };
        if fields.len() != 5 {
            return Err(Error::parse(line, "expected label, two ids and two sentences"));
        }
        let (s1, s2) = (tokenize(fields[3]), tokenize(fields[4]));
        if s1.is_empty() || s2.is_empty() {
            return Err(Error::parse(line, "empty sentence"));
        }
        out.push(ParaphrasePair {
            sentence1: s1,
            sentence2: s2,
            label,
        });
    }
    Ok(out)
}

/// `dialogue_id,turn_id,act_tag,text`. A header naming these columns may
/// list them in any order and carry extra columns.
pub fn read_dialogue_csv<R: Read>(reader: R) -> Result<Vec<DialogueRecord>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let wanted: [&[&str]; 4] = [&["dialogue_id"], &["turn_id"], &["act_tag"], &["text"]];
    let mut cols = Columns(vec![0, 1, 2, 3]);
    let mut out = Vec::new();
    for (n, rec) in csv.records().enumerate() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(n + 1, |p| p.line() as usize);
        let fields: Vec<&str> = rec.iter().collect();
        if n == 0 {
            if let Some(c) = Columns::resolve(&fields, &wanted) {
                cols = c;
                continue;
            }
        }
        if fields.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        let f = cols.pick(&fields, line)?;
        if f[0].is_empty() || f[1].is_empty() || f[2].is_empty() {
            return Err(Error::parse(line, "dialogue id, turn id and act tag must be non-empty"));
        }
        out.push(DialogueRecord {
            dialogue_id: f[0].to_string(),
            turn_id: f[1].to_string(),
            act_tag: f[2].trim().to_string(),
            text: f[3].to_string(),
        });
    }
    Ok(out)
}

/// One dialogue id per line.
pub fn read_id_list<R: BufRead>(reader: R) -> Result<HashSet<String>> {
    let mut out = HashSet::new();
    for entry in content_lines(reader) {
        let (_, text) = entry?;
        out.insert(text.trim().to_string());
    }
    Ok(out)
}

/// Checks every judgement lies in `[lo, hi]`.
pub fn check_scale<'a, I: IntoIterator<Item = &'a f64>>(judgements: I, lo: f64, hi: f64) -> Result<()> {
    for (i, &j) in judgements.into_iter().enumerate() {
        if !(lo..=hi).contains(&j) {
            return Err(Error::InvalidArgument(format!(
                "judgement {j} of item {} is outside the scale [{lo}, {hi}]",
                i + 1
            )));
        }
    }
    Ok(())
}
