//! Word vector spaces and compositional operators for sentence meaning.
//!
//! The crate builds count-based spaces (PPMI or LMI weighting, optional SVD
//! projection) and skip-gram spaces, reads pretrained word2vec files, composes
//! word vectors into phrase and sentence representations with simple and
//! tensor-based operators, and runs the standard evaluation tasks: verb
//! disambiguation, transitive sentence similarity, paraphrase detection and
//! dialogue-act tagging.

pub mod composition;
pub mod cooccurrence;
pub mod corpus;
pub mod embeddings;
mod error;
pub mod eval;
pub mod sgns;
pub mod space;
pub mod stats;
pub mod svd;
pub mod tensor;

pub use composition::{CompositionMethod, TripleStore, VerbRepresentation};
pub use corpus::{Pos, Token, TokenField, TokenStream};
pub use error::{Error, Result};
pub use space::{LemmaMap, LookupPolicy, Provenance, SemanticSpace};
pub use tensor::{Matrix, Representation, Vector};
