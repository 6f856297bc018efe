use serde::Serialize;

use super::params::{SchemeKind, SchemeParams};
use crate::bitseq::{identify_buffers, BitString};
use crate::channels::{ChannelSpec, TrimMode};
use crate::error::{Error, Result};
use crate::inner_codes::{build_dense_codebook, MlDecoder};
use crate::outer_codes::{build_sync_string, InsdelCode, InsdelReport, OuterPair, SubCode};
use crate::par::Exec;

#[derive(Debug, Clone)]
pub struct SingleTraceScheme {
    pub params: SchemeParams,
    pub inner: MlDecoder,
    pub outer: InsdelCode,
}

#[derive(Debug, Clone, Serialize)]
pub struct StReport {
    /// Inner decode of each segment between detected buffers.
    pub segments: Vec<Option<OuterPair>>,
    pub outer: InsdelReport,
    pub msg: Option<Vec<u64>>,
    pub error: Option<String>,
}

impl SingleTraceScheme {
    /// Builds the sync string, the outer code and a dense inner codebook
    /// with one codeword per (payload, sync) pair.
    pub fn build(mut params: SchemeParams, channel: &ChannelSpec) -> Result<Self> {
        let (inner, outer) = Self::parts(Exec::default(), &mut params, channel)?;
        Ok(SingleTraceScheme { params, inner, outer })
    }

    fn parts(exec: Exec, params: &mut SchemeParams, channel: &ChannelSpec) -> Result<(MlDecoder, InsdelCode)> {
        let sub = SubCode::new(params.n_out, params.delta_out, 0)?;
        let sync = build_sync_string(params.n_out, params.eta, params.sync_alphabet)?;
        let outer = InsdelCode::new(sync, sub)?;
        let book = build_dense_codebook(
            params.m,
            outer.pair_alphabet(),
            params.zeta,
            params.gamma,
            Some(1),
            Some(1),
            params.seed,
        )?;
        let inner = MlDecoder::new_with(exec, book, channel.clone().with_trim(TrimMode::Trim00).with_traces(1))?;
        params.r_in = (outer.sub.p as f64).log2() / params.m as f64;
        params.r_out = outer.k() as f64 / params.n_out as f64;
        params.d_m = channel.d_m();
        Ok((inner, outer))
    }

    pub fn message_len(&self) -> usize {
        self.outer.k()
    }

    pub fn field_size(&self) -> u64 {
        self.outer.sub.p
    }

    pub fn message_bits(&self) -> f64 {
        self.message_len() as f64 * (self.field_size() as f64).log2()
    }

    pub fn outer_pairs(&self, msg: &[u64]) -> Result<Vec<OuterPair>> {
        self.outer.encode(msg)
    }

    pub fn encode(&self, msg: &[u64]) -> Result<BitString> {
        let pairs = self.outer.encode(msg)?;
        let buffer = BitString::repeat(0, self.params.b);
        let mut out = BitString::new();
        for (i, p) in pairs.iter().enumerate() {
            if i > 0 {
                out.extend_from(&buffer);
            }
            out.extend_from(self.inner.book.codeword(self.outer.pair_to_symbol(*p))?);
        }
        debug_assert_eq!(out.len(), self.params.codeword_len(SchemeKind::Single));
        Ok(out)
    }

    /// Buffer detection, per-segment ML decoding, then insdel decoding.
    pub fn decode_report(&self, y: &BitString) -> StReport {
        let seg = identify_buffers(y, 0, self.params.zero_cutoff);
        let segments: Vec<Option<OuterPair>> = seg
            .segments
            .iter()
            .map(|s| {
                let t = TrimMode::Trim00.apply(s);
                self.inner.decode(&t).map(|sym| self.outer.symbol_to_pair(sym))
            })
            .collect();
        let (res, outer) = self.outer.decode_report(&segments);
        let (msg, error) = match res {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        };
        StReport {
            segments,
            outer,
            msg,
            error,
        }
    }

    pub fn decode(&self, y: &BitString) -> Result<Vec<u64>> {
        let r = self.decode_report(y);
        r.msg.ok_or_else(|| Error::DecodeFailure(r.error.unwrap_or_default()))
    }
}
