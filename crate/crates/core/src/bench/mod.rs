//! Case-study models, the JSON model format and the experiment matrix.

pub mod matrix;
pub mod model_file;
pub mod models;

pub use model_file::ModelFile;
pub use models::{build, build_2pc, build_2pc_without, build_abp, build_abp_without, CaseStudy, Variant};
