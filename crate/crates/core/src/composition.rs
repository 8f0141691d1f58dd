//! Compositional operators.
//!
//! Simple models fold word vectors (`+` or `⊙`) over any token sequence. The
//! tensor-based models take a subject–verb–object triple and a verb matrix,
//! which is either *relational* (`Σ_i sbj_i ⊗ obj_i` over the verb's corpus
//! arguments) or *Kronecker* (`v ⊗ v`, kept implicit as `v`).
//!
//! | method          | result                          |
//! |-----------------|---------------------------------|
//! | relational      | `V̄ ⊙ (s ⊗ o)`                   |
//! | kronecker       | `(v ⊗ v) ⊙ (s ⊗ o) = (v⊙s) ⊗ (v⊙o)` |
//! | copy-object     | `s ⊙ (V̄ o)`                     |
//! | copy-subject    | `o ⊙ (V̄ᵀ s)`                    |
//! | frobenius-add   | copy-object + copy-subject      |
//! | frobenius-mult  | copy-object ⊙ copy-subject      |
//! | frobenius-outer | copy-object ⊗ copy-subject      |

use std::collections::HashMap;
use std::fmt;
use std::io::BufRead;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::space::{LookupPolicy, SemanticSpace};
use crate::tensor::{self, matvec, outer, pointwise_mult, Matrix, Representation, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompositionMethod {
    VerbOnly,
    Addition,
    Multiplication,
    Relational,
    Kronecker,
    CopySubject,
    CopyObject,
    FrobeniusAdd,
    FrobeniusMult,
    FrobeniusOuter,
}

impl CompositionMethod {
    pub const ALL: [CompositionMethod; 10] = [
        CompositionMethod::VerbOnly,
        CompositionMethod::Addition,
        CompositionMethod::Multiplication,
        CompositionMethod::Relational,
        CompositionMethod::Kronecker,
        CompositionMethod::CopySubject,
        CompositionMethod::CopyObject,
        CompositionMethod::FrobeniusAdd,
        CompositionMethod::FrobeniusMult,
        CompositionMethod::FrobeniusOuter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CompositionMethod::VerbOnly => "verb-only",
            CompositionMethod::Addition => "addition",
            CompositionMethod::Multiplication => "multiplication",
            CompositionMethod::Relational => "relational",
            CompositionMethod::Kronecker => "kronecker",
            CompositionMethod::CopySubject => "copy-subject",
            CompositionMethod::CopyObject => "copy-object",
            CompositionMethod::FrobeniusAdd => "frobenius-add",
            CompositionMethod::FrobeniusMult => "frobenius-mult",
            CompositionMethod::FrobeniusOuter => "frobenius-outer",
        }
    }

    /// Accepts token sequences of any length.
    pub fn is_sequential(self) -> bool {
        matches!(
            self,
            CompositionMethod::VerbOnly | CompositionMethod::Addition | CompositionMethod::Multiplication
        )
    }

    /// Needs a verb matrix built from argument triples.
    pub fn needs_relational_verb(self) -> bool {
        matches!(
            self,
            CompositionMethod::Relational
                | CompositionMethod::CopySubject
                | CompositionMethod::CopyObject
                | CompositionMethod::FrobeniusAdd
                | CompositionMethod::FrobeniusMult
                | CompositionMethod::FrobeniusOuter
        )
    }

    /// Produces an order-2 sentence representation.
    pub fn yields_matrix(self) -> bool {
        matches!(
            self,
            CompositionMethod::Relational | CompositionMethod::Kronecker | CompositionMethod::FrobeniusOuter
        )
    }

    pub fn valid_names() -> String {
        CompositionMethod::ALL.map(|m| m.name()).join(", ")
    }
}

impl fmt::Display for CompositionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CompositionMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('_', "-");
        CompositionMethod::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "unknown composition method '{s}'; valid methods: {}",
                    CompositionMethod::valid_names()
                ))
            })
    }
}

/// Order-2 verb representation.
#[derive(Debug, Clone, PartialEq)]
pub enum VerbRepresentation {
    /// `Σ_i sbj_i ⊗ obj_i`.
    Relational(Matrix),
    /// `v ⊗ v`, stored as `v`.
    Kronecker(Vector),
}

impl VerbRepresentation {
    pub fn dim(&self) -> usize {
        match self {
            VerbRepresentation::Relational(m) => m.rows(),
            VerbRepresentation::Kronecker(v) => v.dim(),
        }
    }

    /// The explicit `d × d` matrix.
    pub fn materialize(&self) -> Matrix {
        match self {
            VerbRepresentation::Relational(m) => m.clone(),
            VerbRepresentation::Kronecker(v) => outer(v, v),
        }
    }
}

/// Relational verb matrix from `(subject, object)` argument pairs.
pub fn build_relational_verb(pairs: &[(Vector, Vector)]) -> Result<VerbRepresentation> {
    build_relational_verb_weighted(pairs.iter().map(|(s, o)| (s.as_slice(), o.as_slice(), 1)))
}

/// Like [`build_relational_verb`], with each pair added `count` times.
pub fn build_relational_verb_weighted<'a, I>(pairs: I) -> Result<VerbRepresentation>
where
    I: IntoIterator<Item = (&'a [f64], &'a [f64], u64)>,
{
    let mut acc: Option<(usize, Vec<f64>)> = None;
    for (s, o, count) in pairs {
        if s.len() != o.len() {
            return Err(Error::DimensionMismatch {
                expected: s.len(),
                actual: o.len(),
            });
        }
        let (dim, values) = acc.get_or_insert_with(|| (s.len(), vec![0.0; s.len() * s.len()]));
        if s.len() != *dim {
            return Err(Error::DimensionMismatch {
                expected: *dim,
                actual: s.len(),
            });
        }
        let w = count as f64;
        for (i, &si) in s.iter().enumerate() {
            let coef = w * si;
            if coef == 0.0 {
                continue;
            }
            for (dst, &oj) in values[i * *dim..(i + 1) * *dim].iter_mut().zip(o) {
                *dst += coef * oj;
            }
        }
    }
    let (dim, values) =
        acc.ok_or_else(|| Error::InsufficientData("verb has no argument pairs to build a matrix from".into()))?;
    Ok(VerbRepresentation::Relational(Matrix::from_raw(dim, dim, values)))
}

pub fn build_kronecker_verb(verb: Vector) -> VerbRepresentation {
    VerbRepresentation::Kronecker(verb)
}

/// Folds `+` or `⊙` over word vectors. `VerbOnly` is not a fold.
pub fn fold_vectors(method: CompositionMethod, vectors: &[&[f64]], dim: usize) -> Result<Vector> {
    let mut acc = match method {
        CompositionMethod::Addition => vec![0.0; dim],
        CompositionMethod::Multiplication => match vectors.first() {
            Some(_) => vec![1.0; dim],
            None => return Ok(Vector::zeros(dim)),
        },
        other => {
            return Err(Error::InvalidArgument(format!("'{other}' is not a sequence fold")));
        }
    };
    for v in vectors {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                actual: v.len(),
            });
        }
        match method {
            CompositionMethod::Addition => acc.iter_mut().zip(*v).for_each(|(a, x)| *a += x),
            _ => acc.iter_mut().zip(*v).for_each(|(a, x)| *a *= x),
        }
    }
    Ok(Vector::from_raw(acc))
}

/// Result of composing a token sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct ComposedSequence {
    pub representation: Vector,
    pub resolved: usize,
    pub missing: usize,
}

/// Composes a token sequence with a simple model. Out-of-vocabulary tokens
/// are skipped; a sequence with nothing resolvable composes to the zero
/// vector. `VerbOnly` returns the vector of `tokens[head_verb]`.
pub fn compose_sequence(
    method: CompositionMethod,
    space: &SemanticSpace,
    tokens: &[&str],
    head_verb: Option<usize>,
    lookup: &LookupPolicy,
) -> Result<ComposedSequence> {
    if tokens.is_empty() {
        return Err(Error::InvalidArgument("cannot compose an empty token sequence".into()));
    }
    if method == CompositionMethod::VerbOnly {
        let idx = head_verb
            .filter(|&i| i < tokens.len())
            .ok_or_else(|| Error::InvalidArgument("verb-only composition needs a designated verb token".into()))?;
        return Ok(match lookup.resolve(space, tokens[idx]) {
            Some(row) => ComposedSequence {
                representation: Vector::from_raw(row.to_vec()),
                resolved: 1,
                missing: 0,
            },
            None => ComposedSequence {
                representation: Vector::zeros(space.dim()),
                resolved: 0,
                missing: 1,
            },
        });
    }
    if !method.is_sequential() {
        return Err(Error::InvalidArgument(format!(
            "'{method}' needs a subject-verb-object triple, not a token sequence"
        )));
    }
    let rows: Vec<&[f64]> = tokens.iter().filter_map(|t| lookup.resolve(space, t)).collect();
    let missing = tokens.len() - rows.len();
    Ok(ComposedSequence {
        representation: fold_vectors(method, &rows, space.dim())?,
        resolved: rows.len(),
        missing,
    })
}

/// The verb argument of [`compose_svo`].
#[derive(Debug, Clone, Copy)]
pub enum VerbArg<'a> {
    Vector(&'a Vector),
    Tensor(&'a VerbRepresentation),
}

fn relational_matrix<'a>(method: CompositionMethod, verb: VerbArg<'a>) -> Result<&'a Matrix> {
    match verb {
        VerbArg::Tensor(VerbRepresentation::Relational(m)) => Ok(m),
        _ => Err(Error::InvalidArgument(format!("'{method}' needs a relational verb matrix"))),
    }
}

fn verb_vector<'a>(method: CompositionMethod, verb: VerbArg<'a>) -> Result<&'a Vector> {
    match verb {
        VerbArg::Vector(v) => Ok(v),
        _ => Err(Error::InvalidArgument(format!("'{method}' needs the verb's vector"))),
    }
}

fn check_square(m: &Matrix, dim: usize) -> Result<()> {
    if m.rows() != dim || m.cols() != dim {
        return Err(Error::ShapeMismatch(format!(
            "verb matrix is {}x{}, arguments have dimension {dim}",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn copy_object(m: &Matrix, sbj: &Vector, obj: &Vector) -> Result<Vector> {
    pointwise_mult(sbj, &matvec(m, obj, false)?)
}

fn copy_subject(m: &Matrix, sbj: &Vector, obj: &Vector) -> Result<Vector> {
    pointwise_mult(obj, &matvec(m, sbj, true)?)
}

/// Composes a transitive sentence `sbj verb obj`.
pub fn compose_svo(method: CompositionMethod, verb: VerbArg<'_>, sbj: &Vector, obj: &Vector) -> Result<Representation> {
    if sbj.dim() != obj.dim() {
        return Err(Error::DimensionMismatch {
            expected: sbj.dim(),
            actual: obj.dim(),
        });
    }
    let dim = sbj.dim();
    match method {
        CompositionMethod::VerbOnly => {
            let v = verb_vector(method, verb)?;
            check_len(v, dim)?;
            Ok(v.clone().into())
        }
        CompositionMethod::Addition | CompositionMethod::Multiplication => {
            let v = verb_vector(method, verb)?;
            check_len(v, dim)?;
            Ok(fold_vectors(method, &[sbj.as_slice(), v.as_slice(), obj.as_slice()], dim)?.into())
        }
        CompositionMethod::Kronecker => {
            let v = match verb {
                VerbArg::Tensor(VerbRepresentation::Kronecker(v)) => v,
                _ => return Err(Error::InvalidArgument("'kronecker' needs a Kronecker verb".into())),
            };
            check_len(v, dim)?;
            Ok(Representation::Outer(pointwise_mult(v, sbj)?, pointwise_mult(v, obj)?))
        }
        CompositionMethod::Relational => {
            let m = relational_matrix(method, verb)?;
            check_square(m, dim)?;
            let mut out = m.clone();
            let cols = dim;
            for (i, row) in out.as_mut_slice().chunks_mut(cols.max(1)).enumerate() {
                let si = sbj[i];
                row.iter_mut().zip(obj.as_slice()).for_each(|(x, oj)| *x *= si * oj);
            }
            Ok(out.into())
        }
        CompositionMethod::CopyObject => {
            let m = relational_matrix(method, verb)?;
            check_square(m, dim)?;
            Ok(copy_object(m, sbj, obj)?.into())
        }
        CompositionMethod::CopySubject => {
            let m = relational_matrix(method, verb)?;
            check_square(m, dim)?;
            Ok(copy_subject(m, sbj, obj)?.into())
        }
        CompositionMethod::FrobeniusAdd | CompositionMethod::FrobeniusMult | CompositionMethod::FrobeniusOuter => {
            let m = relational_matrix(method, verb)?;
            check_square(m, dim)?;
            let co = copy_object(m, sbj, obj)?;
            let cs = copy_subject(m, sbj, obj)?;
            Ok(match method {
                CompositionMethod::FrobeniusAdd => tensor::add(&co, &cs)?.into(),
                CompositionMethod::FrobeniusMult => pointwise_mult(&co, &cs)?.into(),
                _ => Representation::Outer(co, cs),
            })
        }
    }
}

fn check_len(v: &Vector, dim: usize) -> Result<()> {
    if v.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            actual: v.dim(),
        });
    }
    Ok(())
}

/// Verb argument triples: `verb → [(subject, object, count)]`.
///
/// File format: `verb<TAB>subject<TAB>object<TAB>count` with `count >= 1`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripleStore {
    by_verb: HashMap<String, Vec<(String, String, u64)>>,
}

impl TripleStore {
    pub fn new() -> Self {
        TripleStore::default()
    }

    pub fn add(&mut self, verb: impl Into<String>, subject: impl Into<String>, object: impl Into<String>, count: u64) {
        self.by_verb
            .entry(verb.into())
            .or_default()
            .push((subject.into(), object.into(), count));
    }

    pub fn read<R: BufRead>(reader: R) -> Result<Self> {
        let mut store = TripleStore::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 4 || fields[..3].iter().any(|f| f.is_empty()) {
                return Err(Error::parse(i + 1, "expected verb<TAB>subject<TAB>object<TAB>count"));
            }
            let count: u64 = fields[3]
                .trim()
                .parse()
                .map_err(|_| Error::parse(i + 1, format!("bad count {:?}", fields[3])))?;
            if count == 0 {
                return Err(Error::parse(i + 1, "count must be at least 1"));
            }
            store.add(fields[0], fields[1], fields[2], count);
        }
        Ok(store)
    }

    pub fn verbs(&self) -> impl Iterator<Item = &str> {
        self.by_verb.keys().map(String::as_str)
    }

    pub fn triples(&self, verb: &str) -> &[(String, String, u64)] {
        self.by_verb.get(verb).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.by_verb.is_empty()
    }

    /// The verb's relational matrix over the arguments resolvable in `space`;
    /// `None` when no triple survives.
    pub fn relational_verb(&self, verb: &str, space: &SemanticSpace, lookup: &LookupPolicy) -> Option<VerbRepresentation> {
        let pairs = self.triples(verb).iter().filter_map(|(s, o, n)| {
            let s = lookup.resolve(space, s)?;
            let o = lookup.resolve(space, o)?;
            Some((s, o, *n))
        });
        build_relational_verb_weighted(pairs).ok()
    }
}

/// Composes subject–verb–object items against one space with one method,
/// resolving words through a lookup policy. Verb matrices are built once in
/// [`SvoComposer::prepare`].
#[derive(Debug)]
pub struct SvoComposer<'a> {
    method: CompositionMethod,
    space: &'a SemanticSpace,
    lookup: &'a LookupPolicy,
    triples: Option<&'a TripleStore>,
    verbs: HashMap<String, Option<VerbRepresentation>>,
}

impl<'a> SvoComposer<'a> {
    pub fn new(
        method: CompositionMethod,
        space: &'a SemanticSpace,
        lookup: &'a LookupPolicy,
        triples: Option<&'a TripleStore>,
    ) -> Result<Self> {
        if method.needs_relational_verb() && triples.is_none() {
            return Err(Error::InvalidArgument(format!(
                "'{method}' needs a verb triple file to build relational matrices"
            )));
        }
        Ok(SvoComposer {
            method,
            space,
            lookup,
            triples,
            verbs: HashMap::new(),
        })
    }

    pub fn method(&self) -> CompositionMethod {
        self.method
    }

    /// Builds verb representations for `verbs` (in parallel when many).
    pub fn prepare<'v, I: IntoIterator<Item = &'v str>>(&mut self, verbs: I) {
        let mut todo: Vec<&str> = verbs.into_iter().filter(|v| !self.verbs.contains_key(*v)).collect();
        todo.sort_unstable();
        todo.dedup();
        let built: Vec<(String, Option<VerbRepresentation>)> = todo
            .par_iter()
            .map(|v| (v.to_string(), self.build_verb(v)))
            .collect();
        self.verbs.extend(built);
    }

    fn build_verb(&self, verb: &str) -> Option<VerbRepresentation> {
        match self.method {
            m if m.needs_relational_verb() => self.triples?.relational_verb(verb, self.space, self.lookup),
            CompositionMethod::Kronecker => self
                .lookup
                .resolve_vector(self.space, verb)
                .map(build_kronecker_verb),
            _ => None,
        }
    }

    /// `Ok(None)` when any constituent cannot be resolved.
    pub fn compose(&self, sbj: &str, verb: &str, obj: &str) -> Result<Option<Representation>> {
        let (Some(s), Some(o)) = (
            self.lookup.resolve_vector(self.space, sbj),
            self.lookup.resolve_vector(self.space, obj),
        ) else {
            return Ok(None);
        };
        if self.method.needs_relational_verb() || self.method == CompositionMethod::Kronecker {
            let rep = match self.verbs.get(verb) {
                Some(r) => r.clone(),
                None => self.build_verb(verb),
            };
            match rep {
                Some(rep) => compose_svo(self.method, VerbArg::Tensor(&rep), &s, &o).map(Some),
                None => Ok(None),
            }
        } else {
            match self.lookup.resolve_vector(self.space, verb) {
                Some(v) => compose_svo(self.method, VerbArg::Vector(&v), &s, &o).map(Some),
                None => Ok(None),
            }
        }
    }
}
