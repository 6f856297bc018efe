use serde::{Deserialize, Serialize};

use super::rs::SubCode;
use super::sync::{match_sync, SyncString};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OuterPair {
    pub payload: u64,
    pub sync: u16,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InsdelReport {
    pub matched: usize,
    pub erasures: usize,
}

/// Sync-string indexing on top of a substitution/erasure code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InsdelCode {
    pub sync: SyncString,
    pub sub: SubCode,
}

impl InsdelCode {
    pub fn new(sync: SyncString, sub: SubCode) -> Result<Self> {
        if sync.len() != sub.n {
            return Err(Error::InvalidParameter(format!(
                "sync length {} != n = {}",
                sync.len(),
                sub.n
            )));
        }
        if !sync.verified {
            return Err(Error::InvalidParameter("sync string not verified".into()));
        }
        Ok(InsdelCode { sync, sub })
    }

    pub fn n(&self) -> usize {
        self.sub.n
    }

    pub fn k(&self) -> usize {
        self.sub.k
    }

    /// Size of the (payload, sync) alphabet seen by the inner code.
    pub fn pair_alphabet(&self) -> usize {
        self.sub.p as usize * self.sync.alphabet_size
    }

    pub fn pair_to_symbol(&self, p: OuterPair) -> usize {
        p.payload as usize * self.sync.alphabet_size + p.sync as usize
    }

    pub fn symbol_to_pair(&self, s: usize) -> OuterPair {
        let q = self.sync.alphabet_size;
        OuterPair {
            payload: (s / q) as u64,
            sync: (s % q) as u16,
        }
    }

    pub fn encode(&self, msg: &[u64]) -> Result<Vec<OuterPair>> {
        let cw = self.sub.encode(msg)?;
        Ok(cw
            .into_iter()
            .zip(&self.sync.symbols)
            .map(|(payload, &sync)| OuterPair { payload, sync })
            .collect())
    }

    /// Positions the received payloads by matching their sync marks, then
    /// decodes with unmatched positions erased.
    pub fn decode_report(&self, received: &[Option<OuterPair>]) -> (Result<Vec<u64>>, InsdelReport) {
        let marks: Vec<Option<u16>> = received.iter().map(|r| r.map(|p| p.sync)).collect();
        let m = match_sync(&self.sync.symbols, &marks);
        let mut word: Vec<Option<u64>> = vec![None; self.n()];
        for (i, j) in m.pairs() {
            word[i] = received[j].map(|p| p.payload);
        }
        let report = InsdelReport {
            matched: m.len(),
            erasures: self.n() - m.len(),
        };
        (self.sub.decode(&word), report)
    }

    pub fn decode(&self, received: &[Option<OuterPair>]) -> Result<Vec<u64>> {
        self.decode_report(received).0
    }
}
