//! Repairs erroneous output of general-purpose speech recognizers for a
//! specific domain.
//!
//! Two mechanisms are provided. The two-stage repair in [`evo`] replaces
//! transcript spans by phonetically and lexically close domain-ontology
//! terms, then applies declarative linguistic rules. The learned repair in
//! [`ml`] classifies oracle-marked erroneous spans into correction strings
//! with a Naive Bayes model. [`text`] supplies the shared substrate:
//! tokenization, word-level alignment, the accuracy metric, and mispair
//! extraction. [`harness`] generates seeded noisy corpora and evaluates
//! either repair end to end.

pub mod corpus;
pub mod error;
pub mod evo;
pub mod harness;
pub mod ml;
pub mod ontology;
pub mod phonetic;
pub mod rules;
pub mod tagger;
pub mod text;

pub use error::{Error, Result};
pub use evo::{repair, FitnessConfig, RepairResult};
pub use ml::{classify, train, NaiveBayesModel};
pub use ontology::Ontology;
pub use tagger::TagLexicon;
pub use text::{accuracy, align, tokenize, TokenSequence};
