//! Adequacy measurement and suite generation for metamorphic testing under
//! the k-MR coverage criterion.

pub mod adequacy;
pub mod bundled;
pub mod cli;
pub mod condition;
pub mod coverage;
pub mod exec;
pub mod execution;
pub mod generation;
pub mod model;
pub mod process;
pub mod project;
pub mod suite_file;
pub mod value;
