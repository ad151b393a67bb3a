//! Referent disambiguation for German first-person-plural pronouns
//! (*wir*, *uns*, *unser-*) in parliamentary debates.
//!
//! The crate covers the whole pipeline: reading parsed debate corpora,
//! extracting pronoun instances, agreement statistics over manual
//! annotations, dependency-pattern labeling functions aggregated by a
//! generative label model, three baseline classifiers with a shared
//! cross-validation harness, and per-party/per-speaker analyses with PCA.

pub mod analysis;
pub mod annotation;
pub mod corpus;
pub mod dataset;
pub mod depmatch;
pub mod error;
pub mod eval;
pub mod features;
pub mod models;
pub mod weaksup;

pub use annotation::{ConfusionMatrix, RefClass, NUM_CLASSES};
pub use corpus::{PronounInstance, Segment, Sentence, Token};
pub use error::{Error, Result};
