//! Runlength-dependent deletion channels: samplers and exact oracles,
//! capacity lower bounds, inner/outer codes and the concatenated
//! single- and multi-trace coding schemes built from them.

pub mod bitseq;
pub mod channels;
pub mod error;
pub mod harness;
pub mod infotheory;
pub mod inner_codes;
pub mod outer_codes;
pub mod par;
pub mod rng;
pub mod schemes;

pub use bitseq::{BitString, RunList, Segmentation};
pub use error::{Error, Result};
pub use par::Exec;
