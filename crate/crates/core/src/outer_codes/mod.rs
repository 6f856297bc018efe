//! Outer layer: synchronization strings, LCS position matching, a
//! Reed–Solomon substitution/erasure code, and the insdel code that
//! combines them.

mod insdel;
mod rs;
mod sync;

pub use insdel::{InsdelCode, InsdelReport, OuterPair};
pub use rs::{next_prime, SubCode};
pub use sync::{
    build_sync_string, build_sync_string_with, match_sync, verify_sync_string, verify_sync_string_with, Matching,
    SyncString,
};
