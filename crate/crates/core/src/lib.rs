pub mod affordance;
pub mod bench;
pub mod cli;
pub mod error;
pub mod mldepth;
pub mod pipeline;
pub mod pose;
pub mod refine;
pub mod scene;

pub use error::{Error, Result};
