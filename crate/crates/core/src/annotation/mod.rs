//! The referent schema, annotation stores, and inter-annotator agreement.

mod agreement;
mod schema;
mod store;

pub use agreement::{
    agreement_report, alpha_nominal, confusion, krippendorff_alpha, pairwise_f1, percent_agreement,
    AgreementReport, AlphaDetails, ClassF1, PairwiseF1,
};
pub use schema::{ConfusionMatrix, RefClass, NUM_CLASSES};
pub(crate) use store::read_jsonl;
pub use store::{
    adjudicate, read_annotations, read_gold, read_resolutions, write_gold, AnnotationRecord,
    GoldEntry, GoldStore, Provenance,
};
