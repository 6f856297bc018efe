use serde::Serialize;

use super::params::{SchemeKind, SchemeParams};
use crate::bitseq::{identify_buffers, BitString};
use crate::channels::{ChannelSpec, TraceSet, TrimMode};
use crate::error::{Error, Result};
use crate::inner_codes::{build_dense_codebook, MlDecoder};
use crate::outer_codes::{build_sync_string, match_sync, SubCode, SyncString};
use crate::par::{self, Exec};
use crate::rng::subseed;

#[derive(Debug, Clone)]
pub struct MultiTraceScheme {
    pub params: SchemeParams,
    /// Payload code C_R (codewords 0…1), decoded under 10-trimming.
    pub payload: MlDecoder,
    /// Sync code C_S (codewords 1…0), decoded under 01-trimming.
    pub sync_code: MlDecoder,
    pub sync: SyncString,
    pub sub: SubCode,
}

/// Per trace, the payload-half candidate aligned to each outer position.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AlignedTraces {
    pub per_trace: Vec<Vec<Option<BitString>>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MtReport {
    pub aligned: Vec<usize>,
    pub erasures: usize,
    pub msg: Option<Vec<u64>>,
    pub error: Option<String>,
}

/// Splits one between-1-buffers segment at its unique interior 0-buffer.
fn split_pair(s: &BitString, zero_cutoff: usize) -> Option<(usize, usize)> {
    let z = identify_buffers(s, 0, zero_cutoff);
    match z.buffer_spans.as_slice() {
        [(a, b)] if *a > 0 && *b < s.len() => Some((*a, *b)),
        _ => None,
    }
}

impl MultiTraceScheme {
    pub fn build(mut params: SchemeParams, channel: &ChannelSpec) -> Result<Self> {
        let sub = SubCode::new(params.n_out, params.delta_out, 0)?;
        let sync = build_sync_string(params.n_out, params.eta, params.sync_alphabet)?;
        let c_r = build_dense_codebook(
            params.m,
            sub.p as usize,
            params.zeta,
            params.gamma,
            Some(0),
            Some(1),
            params.seed,
        )?;
        let c_s = build_dense_codebook(
            params.n_s,
            params.sync_alphabet,
            params.zeta_s,
            params.gamma,
            Some(1),
            Some(0),
            subseed(params.seed, 1),
        )?;
        let one = channel.clone().with_traces(1);
        let payload = MlDecoder::new(c_r, one.clone().with_trim(TrimMode::Trim10))?;
        let sync_code = MlDecoder::new(c_s, one.with_trim(TrimMode::Trim01))?;
        params.r_in = (sub.p as f64).log2() / params.m as f64;
        params.r_out = sub.k as f64 / params.n_out as f64;
        params.d_m = channel.d_m();
        Ok(MultiTraceScheme {
            params,
            payload,
            sync_code,
            sync,
            sub,
        })
    }

    pub fn message_len(&self) -> usize {
        self.sub.k
    }

    pub fn message_bits(&self) -> f64 {
        self.sub.k as f64 * (self.sub.p as f64).log2()
    }

    pub fn encode(&self, msg: &[u64]) -> Result<BitString> {
        let cw = self.sub.encode(msg)?;
        let zeros = BitString::repeat(0, self.params.b);
        let ones = BitString::repeat(1, self.params.b);
        let mut out = BitString::new();
        for (r, &s) in cw.iter().zip(&self.sync.symbols) {
            out.extend_from(self.payload.book.codeword(*r as usize)?);
            out.extend_from(&zeros);
            out.extend_from(self.sync_code.book.codeword(s as usize)?);
            out.extend_from(&ones);
        }
        debug_assert_eq!(out.len(), self.params.codeword_len(SchemeKind::Multi));
        Ok(out)
    }

    pub fn align(&self, z: &BitString) -> Vec<Option<BitString>> {
        mt_align(&self.params, &self.sync, &self.sync_code, z)
    }

    pub fn align_all(&self, ts: &TraceSet) -> AlignedTraces {
        AlignedTraces {
            per_trace: ts.traces.iter().map(|z| self.align(z)).collect(),
        }
    }

    pub fn decode_report(&self, ts: &TraceSet) -> MtReport {
        let aligned = self.align_all(ts);
        let word: Vec<Option<u64>> = par::map_range(Exec::Seq, self.params.n_out, |i| {
            let column: Vec<Option<BitString>> = aligned.per_trace.iter().map(|t| t[i].clone()).collect();
            self.payload.decode_traces(&column).map(|s| s as u64)
        });
        let erasures = word.iter().filter(|w| w.is_none()).count();
        let counts = aligned.per_trace.iter().map(|t| t.iter().flatten().count()).collect();
        let (msg, error) = match self.sub.decode(&word) {
            Ok(m) => (Some(m), None),
            Err(e) => (None, Some(e.to_string())),
        };
        MtReport {
            aligned: counts,
            erasures,
            msg,
            error,
        }
    }

    pub fn decode(&self, ts: &TraceSet) -> Result<Vec<u64>> {
        let r = self.decode_report(ts);
        r.msg.ok_or_else(|| Error::DecodeFailure(r.error.unwrap_or_default()))
    }
}

/// Cuts one trace at 1-buffers, splits each piece at its single 0-buffer,
/// reads the sync half, and positions the payload halves by matching the
/// decoded sync marks against the sync string. Unmatched positions are ⊥.
pub fn mt_align(params: &SchemeParams, sync: &SyncString, book_s: &MlDecoder, z: &BitString) -> Vec<Option<BitString>> {
    let mut halves = Vec::new();
    let mut marks = Vec::new();
    for s in identify_buffers(z, 1, params.one_cutoff).segments {
        let Some((a, b)) = split_pair(&s, params.zero_cutoff) else {
            continue;
        };
        let sync_half = TrimMode::Trim01.apply(&s.slice(b, s.len()));
        halves.push(TrimMode::Trim10.apply(&s.slice(0, a)));
        marks.push(book_s.decode(&sync_half).map(|v| v as u16));
    }
    let mut out = vec![None; sync.len()];
    for (i, j) in match_sync(&sync.symbols, &marks).pairs() {
        out[i] = Some(halves[j].clone());
    }
    out
}

/// Number of segments of the received trace whose halves come only from
/// one payload codeword and its own sync codeword. `kept` lists the
/// surviving input positions, as returned by the channel sampler.
pub fn good_pairs(params: &SchemeParams, kept: &[usize], x: &BitString) -> usize {
    let block = params.m + 2 * params.b + params.n_s;
    // 0 payload, 1 zero buffer, 2 sync, 3 one buffer
    let part = |p: usize| {
        let off = p % block;
        let kind = if off < params.m {
            0
        } else if off < params.m + params.b {
            1
        } else if off < params.m + params.b + params.n_s {
            2
        } else {
            3
        };
        (p / block, kind)
    };
    let z = BitString::from_bits(kept.iter().map(|&i| x.bits()[i]).collect());
    let seg = identify_buffers(&z, 1, params.one_cutoff);
    let mut good = 0;
    for (s, &(start, _)) in seg.segments.iter().zip(&seg.segment_spans) {
        let Some((a, b)) = split_pair(s, params.zero_cutoff) else {
            continue;
        };
        let origin = |r: std::ops::Range<usize>| r.map(|k| part(kept[start + k])).collect::<Vec<_>>();
        let left = origin(0..a);
        let right = origin(b..s.len());
        let blk = left[0].0;
        if left.iter().all(|&p| p == (blk, 0)) && right.iter().all(|&p| p == (blk, 2)) {
            good += 1;
        }
    }
    good
}
