//! Aggregates many sampled chain-of-thought completions into one reasoning
//! chain. Fragments become binary variables of a higher-order polynomial whose
//! low-energy states mark a coherent, non-redundant subset of reasons.

pub mod bench;
pub mod ensemble;
pub mod error;
pub mod hubo;
pub mod llm_client;
pub mod pipeline;
pub mod reason_pool;
pub mod solvers;

pub use error::{Error, Result};
