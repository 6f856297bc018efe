//! End-to-end concatenated schemes: single-trace (inner codewords split by
//! 0-buffers) and multi-trace (payload/sync halves split by 0- and
//! 1-buffers, aligned per trace, reconstructed across traces).

mod multi;
mod params;
mod single;

pub use multi::{good_pairs, mt_align, AlignedTraces, MtReport, MultiTraceScheme};
pub use params::{asymptotic_defaults, scheme_rate, window_below_cutoff, SchemeKind, SchemeParams};
pub use single::{SingleTraceScheme, StReport};
