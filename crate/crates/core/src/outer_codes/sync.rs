use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{self, Exec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyncString {
    pub symbols: Vec<u16>,
    pub eta: f64,
    pub alphabet_size: usize,
    pub verified: bool,
}

impl SyncString {
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `n eta alphabet verified` header, then the symbol indices.
    pub fn to_text(&self) -> String {
        let body: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        format!(
            "n={} eta={} alphabet_size={} verified={}\n{}\n",
            self.len(),
            self.eta,
            self.alphabet_size,
            self.verified,
            body.join(" ")
        )
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty sync string".into()))?;
        let field = |k: &str| {
            header
                .split_whitespace()
                .find_map(|t| t.strip_prefix(k).and_then(|v| v.strip_prefix('=')))
                .ok_or_else(|| Error::Parse(format!("missing {k}")))
        };
        let bad = |k: &str| Error::Parse(format!("bad {k}"));
        let n: usize = field("n")?.parse().map_err(|_| bad("n"))?;
        let eta: f64 = field("eta")?.parse().map_err(|_| bad("eta"))?;
        let alphabet_size: usize = field("alphabet_size")?.parse().map_err(|_| bad("alphabet_size"))?;
        let verified: bool = field("verified")?.parse().map_err(|_| bad("verified"))?;
        let symbols: Vec<u16> = lines
            .flat_map(|l| l.split_whitespace())
            .map(|t| t.parse().map_err(|_| bad("symbol")))
            .collect::<Result<_>>()?;
        if symbols.len() != n {
            return Err(Error::Parse(format!("expected {n} symbols, got {}", symbols.len())));
        }
        Ok(SyncString {
            symbols,
            eta,
            alphabet_size,
            verified,
        })
    }
}

/// LCS(S[i..j), S[j..k)) for every i < j, as a vector indexed by i.
fn lcs_left_all(s: &[u16], j: usize, k: usize) -> Vec<usize> {
    // rows: prefixes of rev(S[0..j)); columns: rev(S[j..k))
    let b: Vec<u16> = s[j..k].iter().rev().copied().collect();
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut out = vec![0usize; j];
    for a in 1..=j {
        let x = s[j - a];
        for (c, &y) in b.iter().enumerate() {
            cur[c + 1] = if x == y { prev[c] + 1 } else { prev[c + 1].max(cur[c]) };
        }
        std::mem::swap(&mut prev, &mut cur);
        out[j - a] = prev[b.len()];
    }
    out
}

/// All triples ending at `k` satisfy ED > (1 − η)(k − i).
fn ok_at(s: &[u16], k: usize, eta: f64) -> bool {
    (1..k).rev().all(|j| {
        lcs_left_all(s, j, k).iter().enumerate().all(|(i, &l)| {
            let len = (k - i) as f64;
            let ed = len - 2.0 * l as f64;
            ed > (1.0 - eta) * len
        })
    })
}

pub fn verify_sync_string(s: &[u16], eta: f64) -> bool {
    verify_sync_string_with(Exec::default(), s, eta)
}

pub fn verify_sync_string_with(exec: Exec, s: &[u16], eta: f64) -> bool {
    par::all_range(exec, s.len() + 1, |k| ok_at(s, k, eta))
}

pub const SYNC_LIMIT: usize = 256;
const BACKTRACK_BUDGET: usize = 200_000;

pub fn build_sync_string(n: usize, eta: f64, alphabet_size: usize) -> Result<SyncString> {
    build_sync_string_with(Exec::default(), n, eta, alphabet_size)
}

/// Symbols ordered least recently used first.
fn lru_order(s: &[u16], q: usize) -> Vec<u16> {
    let mut last = vec![-1isize; q];
    for (i, &c) in s.iter().enumerate() {
        last[c as usize] = i as isize;
    }
    let mut order: Vec<u16> = (0..q as u16).collect();
    order.sort_by_key(|&c| (last[c as usize], c));
    order
}

/// Symbol-by-symbol greedy extension with backtracking; each new prefix is
/// checked on every triple that ends at its last position.
pub fn build_sync_string_with(exec: Exec, n: usize, eta: f64, alphabet_size: usize) -> Result<SyncString> {
    if n > SYNC_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: n,
            limit: SYNC_LIMIT,
        });
    }
    if alphabet_size < 4 || alphabet_size > u16::MAX as usize || !(eta > 0.0 && eta < 1.0) {
        return Err(Error::InvalidParameter(format!("alphabet {alphabet_size}, eta {eta}")));
    }
    let mut s: Vec<u16> = Vec::with_capacity(n);
    // stack[i] = (candidate symbols for position i, next candidate to try)
    let mut stack: Vec<(Vec<u16>, usize)> = Vec::new();
    let mut steps = 0usize;
    while s.len() < n {
        if stack.len() == s.len() {
            stack.push((lru_order(&s, alphabet_size), 0));
        }
        let (cands, idx) = stack.last_mut().expect("nonempty stack");
        if *idx >= cands.len() {
            stack.pop();
            if s.pop().is_none() {
                return Err(Error::ConstructionFailed(0));
            }
            continue;
        }
        steps += 1;
        if steps > BACKTRACK_BUDGET {
            return Err(Error::ConstructionFailed(s.len()));
        }
        s.push(cands[*idx]);
        *idx += 1;
        if !ok_at(&s, s.len(), eta) {
            s.pop();
        }
    }
    let verified = verify_sync_string_with(exec, &s, eta);
    if !verified {
        return Err(Error::ConstructionFailed(n));
    }
    Ok(SyncString {
        symbols: s,
        eta,
        alphabet_size,
        verified,
    })
}

/// Monotone matching of positions, 0-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.left.len()
    }

    pub fn is_empty(&self) -> bool {
        self.left.is_empty()
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.left.iter().copied().zip(self.right.iter().copied()).collect()
    }
}

/// Maximum LCS alignment of `s` with `received`; `None` entries never
/// match. Ties resolve toward the smallest indices.
pub fn match_sync(s: &[u16], received: &[Option<u16>]) -> Matching {
    let (n, m) = (s.len(), received.len());
    // f[i][j] = LCS(s[i..], received[j..])
    let w = m + 1;
    let mut f = vec![0u32; (n + 1) * w];
    for i in (0..n).rev() {
        for j in (0..m).rev() {
            f[i * w + j] = if received[j] == Some(s[i]) {
                f[(i + 1) * w + j + 1] + 1
            } else {
                f[(i + 1) * w + j].max(f[i * w + j + 1])
            };
        }
    }
    let mut out = Matching::default();
    let (mut i, mut j) = (0, 0);
    while i < n && j < m {
        if received[j] == Some(s[i]) && f[i * w + j] == f[(i + 1) * w + j + 1] + 1 {
            out.left.push(i);
            out.right.push(j);
            i += 1;
            j += 1;
        } else if f[i * w + j + 1] == f[i * w + j] {
            j += 1;
        } else {
            i += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_examples() {
        assert!(verify_sync_string(&[0, 1, 2], 0.01));
        assert!(verify_sync_string(&[5], 0.5));
        assert!(verify_sync_string(&[1, 2], 0.5));
        assert!(!verify_sync_string(&[0, 0], 0.5));
        assert!(!verify_sync_string(&[0, 0], 0.999));
    }

    #[test]
    fn build_small() {
        let s = build_sync_string(24, 0.8, 4).unwrap();
        assert_eq!(s.len(), 24);
        assert!(verify_sync_string(&s.symbols, 0.8));
        // four symbols cannot reach eta = 0.5: every window of 4 must be
        // distinct, forcing a period-4 string whose halves coincide
        assert!(build_sync_string(24, 0.5, 4).is_err());
        assert_eq!(SyncString::from_text(&s.to_text()).unwrap(), s);
    }

    #[test]
    fn match_examples() {
        let s = [0u16, 1, 2];
        let full: Vec<_> = s.iter().map(|&c| Some(c)).collect();
        assert_eq!(match_sync(&s, &full).pairs(), vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(match_sync(&s, &[Some(0), Some(2)]).pairs(), vec![(0, 0), (2, 1)]);
        assert!(match_sync(&s, &[]).is_empty());
        assert!(match_sync(&s, &[None, None]).is_empty());
    }
}
