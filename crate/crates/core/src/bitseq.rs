use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Binary string stored one bit per byte (values 0 or 1).
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new() -> Self {
        BitString(Vec::new())
    }

    /// Panics if any entry is not 0 or 1.
    pub fn from_bits(bits: Vec<u8>) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "bits must be 0 or 1");
        BitString(bits)
    }

    pub fn repeat(bit: u8, n: usize) -> Self {
        BitString::from_bits(vec![bit; n])
    }

    /// The `n`-bit big-endian encoding of `v`.
    pub fn from_index(v: u64, n: usize) -> Self {
        BitString((0..n).rev().map(|i| ((v >> i) & 1) as u8).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn into_bits(self) -> Vec<u8> {
        self.0
    }

    pub fn push(&mut self, bit: u8) {
        assert!(bit <= 1);
        self.0.push(bit);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.0.extend_from_slice(&other.0);
    }

    pub fn concat<'a, I: IntoIterator<Item = &'a BitString>>(parts: I) -> Self {
        let mut out = BitString::new();
        for p in parts {
            out.extend_from(p);
        }
        out
    }

    pub fn slice(&self, start: usize, end: usize) -> BitString {
        BitString(self.0[start..end].to_vec())
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn first(&self) -> Option<u8> {
        self.0.first().copied()
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    /// All strings of length `n`, in lexicographic order.
    pub fn all_of_len(n: usize) -> impl Iterator<Item = BitString> {
        assert!(n < 64);
        (0..1u64 << n).map(move |v| BitString::from_index(v, n))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        s.trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Parse(format!("invalid bit {c:?}"))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(BitString)
    }
}

impl From<BitString> for String {
    fn from(b: BitString) -> String {
        b.to_string()
    }
}

impl TryFrom<String> for BitString {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

/// Shorthand used heavily in tests: panics on malformed input.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("bit literal")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Run {
    pub bit: u8,
    pub len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunList {
    pub runs: Vec<Run>,
}

impl RunList {
    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    pub fn to_bits(&self) -> BitString {
        let mut v = Vec::new();
        for r in &self.runs {
            v.extend(std::iter::repeat_n(r.bit, r.len));
        }
        BitString(v)
    }

    pub fn pairs(&self) -> Vec<(u8, usize)> {
        self.runs.iter().map(|r| (r.bit, r.len)).collect()
    }
}

pub fn runs(s: &BitString) -> RunList {
    let mut out: Vec<Run> = Vec::new();
    for &b in s.bits() {
        match out.last_mut() {
            Some(r) if r.bit == b => r.len += 1,
            _ => out.push(Run { bit: b, len: 1 }),
        }
    }
    RunList { runs: out }
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Insertion/deletion distance.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.len() + b.len() - 2 * lcs_len(a, b)
}

pub fn is_subsequence(y: &BitString, x: &BitString) -> bool {
    let mut it = x.bits().iter();
    y.bits().iter().all(|b| it.any(|c| c == b))
}

pub const EXHAUSTIVE_LIMIT: usize = 20;

/// Distinct subsequences of `s` obtained by deleting exactly `ell` bits.
pub fn enumerate_subsequences(s: &BitString, ell: usize) -> Result<BTreeSet<BitString>> {
    if s.len() > EXHAUSTIVE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: s.len(),
            limit: EXHAUSTIVE_LIMIT,
        });
    }
    if ell > s.len() {
        return Err(Error::InvalidParameter(format!("ell {ell} > |s| {}", s.len())));
    }
    let mut level: BTreeSet<BitString> = BTreeSet::from([s.clone()]);
    for _ in 0..ell {
        let mut next = BTreeSet::new();
        for t in &level {
            // deleting any bit of a run gives the same result; one per run
            let mut pos = 0;
            for r in runs(t).runs {
                let mut v = t.bits().to_vec();
                v.remove(pos);
                next.insert(BitString(v));
                pos += r.len;
            }
        }
        level = next;
    }
    Ok(level)
}

pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Number of length-`n` strings containing `y` as a subsequence.
pub fn supersequence_count(n: usize, y: &BitString) -> Result<u128> {
    if n < y.len() {
        return Err(Error::InvalidParameter(format!("n {n} < |y| {}", y.len())));
    }
    Ok((0..=(n - y.len()) as u64).map(|i| binom(n as u64, i)).sum())
}

/// Every window of length ⌊ζn⌋ has weight in [γw, (1−γ)w].
pub fn density_ok(c: &BitString, zeta: f64, gamma: f64) -> bool {
    let n = c.len();
    let w = (zeta * n as f64).floor() as usize;
    if w == 0 || w > n {
        return false;
    }
    let lo = gamma * w as f64;
    let hi = (1.0 - gamma) * w as f64;
    let b = c.bits();
    let mut wt: usize = b[..w].iter().map(|&x| x as usize).sum();
    for i in 0..=n - w {
        if i > 0 {
            wt = wt + b[i + w - 1] as usize - b[i - 1] as usize;
        }
        let f = wt as f64;
        if f < lo - 1e-12 || f > hi + 1e-12 {
            return false;
        }
    }
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Segmentation {
    pub segments: Vec<BitString>,
    /// Half-open `[start, end)` position of each segment in the source.
    pub segment_spans: Vec<(usize, usize)>,
    pub buffer_spans: Vec<(usize, usize)>,
}

/// Splits `s` at maximal runs of `symbol` of length at least `threshold`.
pub fn identify_buffers(s: &BitString, symbol: u8, threshold: usize) -> Segmentation {
    let threshold = threshold.max(1);
    let mut seg = Segmentation::default();
    let mut start = 0;
    let mut pos = 0;
    for r in runs(s).runs {
        if r.bit == symbol && r.len >= threshold {
            if pos > start {
                seg.segments.push(s.slice(start, pos));
                seg.segment_spans.push((start, pos));
            }
            seg.buffer_spans.push((pos, pos + r.len));
            start = pos + r.len;
        }
        pos += r.len;
    }
    if pos > start {
        seg.segments.push(s.slice(start, pos));
        seg.segment_spans.push((start, pos));
    }
    seg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn runs_examples() {
        assert_eq!(runs(&bs("00110")).pairs(), vec![(0, 2), (1, 2), (0, 1)]);
        assert!(runs(&bs("")).is_empty());
        assert_eq!(runs(&bs("0101")).pairs(), vec![(0, 1), (1, 1), (0, 1), (1, 1)]);
    }

    #[test]
    fn edit_distance_examples() {
        let s = bs("0110");
        assert_eq!(edit_distance(s.bits(), s.bits()), 0);
        assert_eq!(edit_distance(bs("01").bits(), bs("0").bits()), 1);
        assert_eq!(edit_distance(bs("0011").bits(), bs("0101").bits()), 2);
    }

    #[test]
    fn subsequence_examples() {
        assert!(is_subsequence(&bs(""), &bs("0110")));
        assert!(is_subsequence(&bs("01"), &bs("0011")));
        assert!(!is_subsequence(&bs("10"), &bs("0011")));
    }

    #[test]
    fn enumerate_examples() {
        let got = enumerate_subsequences(&bs("0101"), 1).unwrap();
        let want: BTreeSet<_> = ["101", "001", "011", "010"].iter().map(|s| bs(s)).collect();
        assert_eq!(got, want);
        assert_eq!(binom(4, 1), 4);
        let s = bs("0011");
        assert_eq!(enumerate_subsequences(&s, 0).unwrap(), BTreeSet::from([s.clone()]));
        assert!(enumerate_subsequences(&BitString::repeat(0, 21), 1).is_err());
    }

    #[test]
    fn supersequence_examples() {
        assert_eq!(supersequence_count(3, &bs("011")).unwrap(), 1);
        assert_eq!(supersequence_count(2, &bs("0")).unwrap(), 3);
        assert_eq!(supersequence_count(3, &bs("01")).unwrap(), 4);
    }

    #[test]
    fn density_examples() {
        assert!(!density_ok(&BitString::repeat(0, 10), 0.5, 0.1));
        assert!(!density_ok(&BitString::repeat(1, 10), 0.5, 0.1));
        assert!(density_ok(&bs("0101010101"), 0.4, 0.4));
    }

    #[test]
    fn buffer_examples() {
        let s = identify_buffers(&bs("1110000111"), 0, 3);
        assert_eq!(s.segments, vec![bs("111"), bs("111")]);
        assert_eq!(s.buffer_spans, vec![(3, 7)]);
        let s = identify_buffers(&bs("1110000111"), 0, 5);
        assert_eq!(s.segments, vec![bs("1110000111")]);
        assert!(s.buffer_spans.is_empty());
        let s = identify_buffers(&bs("0001"), 0, 3);
        assert_eq!(s.segments, vec![bs("1")]);
    }
}
