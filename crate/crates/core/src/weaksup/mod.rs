//! Weak supervision: patterns as labeling functions, vote aggregation, and
//! silver-corpus handling.

mod label_model;
mod matrix;
mod silver;
pub mod synthetic;

pub use label_model::{fit_label_model, label_votes, predict_silver, EmOptions, LabelModelParams};
pub use matrix::{build_matrix, read_matrix, LabelMatrix};
pub use silver::{
    argmax_class, downsample, majority_vote, read_silver, sample_for_review, write_silver,
    ReviewRow, ReviewSheet, SilverLabel, SilverSource,
};
