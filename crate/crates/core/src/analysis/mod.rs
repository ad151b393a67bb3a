//! Per-group class rates and principal components over group profiles.

mod biplot;
mod pca;
mod profiles;

pub use biplot::{emit_biplot, render_biplot};
pub use pca::{jacobi_eigen, pca, PcaResult};
pub use profiles::{build_profiles, ProfileMatrix};
