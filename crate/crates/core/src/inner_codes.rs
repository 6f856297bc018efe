use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt::Write as _;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bitseq::{density_ok, runs, BitString, Run, RunList};
use crate::channels::{transition_dist, ChannelSpec, Dist};
use crate::error::{Error, Result};
use crate::par::{self, Exec};
use crate::rng::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CodebookMeta {
    Dense {
        zeta: f64,
        gamma: f64,
        prefix_bit: Option<u8>,
        suffix_bit: Option<u8>,
    },
    Greedy {
        beta: Vec<f64>,
        tau: usize,
        delta_n: usize,
        m: usize,
    },
}

/// Symbol `i` maps to `entries[i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub entries: Vec<BitString>,
    pub n: usize,
    pub meta: CodebookMeta,
}

impl Codebook {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn codeword(&self, symbol: usize) -> Result<&BitString> {
        self.entries.get(symbol).ok_or(Error::SymbolOutOfAlphabet {
            symbol,
            size: self.entries.len(),
        })
    }

    pub fn symbol_of(&self, c: &BitString) -> Option<usize> {
        self.entries.iter().position(|e| e == c)
    }

    pub fn rate(&self) -> f64 {
        if self.n == 0 || self.entries.is_empty() {
            return 0.0;
        }
        (self.entries.len() as f64).log2() / self.n as f64
    }

    /// Text form: header `n=<n> kind=... key=value...`, then `index bits` lines.
    pub fn to_text(&self) -> String {
        let mut s = format!("n={} {}\n", self.n, meta_header(&self.meta));
        for (i, e) in self.entries.iter().enumerate() {
            let _ = writeln!(s, "{i} {e}");
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty codebook".into()))?;
        let (n_part, meta_part) = header.split_once(' ').unwrap_or((header, ""));
        let n: usize = n_part
            .strip_prefix("n=")
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        let meta = parse_meta(meta_part)?;
        let mut entries = Vec::new();
        for (k, line) in lines.enumerate() {
            let mut it = line.split_whitespace();
            let idx: usize = it
                .next()
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Parse(line.into()))?;
            if idx != k {
                return Err(Error::Parse(format!("expected index {k}, got {idx}")));
            }
            let bits: BitString = it.next().unwrap_or("").parse()?;
            if bits.len() != n {
                return Err(Error::Parse(format!("codeword {k} has length {}", bits.len())));
            }
            entries.push(bits);
        }
        Ok(Codebook { entries, n, meta })
    }
}

fn fmt_opt(b: Option<u8>) -> String {
    b.map_or("-".into(), |v| v.to_string())
}

fn meta_header(meta: &CodebookMeta) -> String {
    match meta {
        CodebookMeta::Dense {
            zeta,
            gamma,
            prefix_bit,
            suffix_bit,
        } => format!(
            "kind=dense zeta={zeta} gamma={gamma} prefix={} suffix={}",
            fmt_opt(*prefix_bit),
            fmt_opt(*suffix_bit)
        ),
        CodebookMeta::Greedy { beta, tau, delta_n, m } => {
            let b: Vec<String> = beta.iter().map(|x| x.to_string()).collect();
            format!("kind=greedy tau={tau} delta_n={delta_n} M={m} beta={}", b.join(";"))
        }
    }
}

fn parse_meta(s: &str) -> Result<CodebookMeta> {
    let kv: HashMap<&str, &str> = s.split_whitespace().filter_map(|t| t.split_once('=')).collect();
    let get = |k: &str| kv.get(k).copied().ok_or_else(|| Error::Parse(format!("missing {k}")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| Error::Parse(k.into())) };
    let int = |k: &str| -> Result<usize> { get(k)?.parse().map_err(|_| Error::Parse(k.into())) };
    let bit = |k: &str| -> Result<Option<u8>> {
        match get(k)? {
            "-" => Ok(None),
            v => v.parse().map(Some).map_err(|_| Error::Parse(k.into())),
        }
    };
    match get("kind")? {
        "dense" => Ok(CodebookMeta::Dense {
            zeta: num("zeta")?,
            gamma: num("gamma")?,
            prefix_bit: bit("prefix")?,
            suffix_bit: bit("suffix")?,
        }),
        "greedy" => Ok(CodebookMeta::Greedy {
            beta: get("beta")?
                .split(';')
                .map(|v| v.parse().map_err(|_| Error::Parse("beta".into())))
                .collect::<Result<_>>()?,
            tau: int("tau")?,
            delta_n: int("delta_n")?,
            m: int("M")?,
        }),
        k => Err(Error::Parse(format!("unknown codebook kind {k}"))),
    }
}

fn dense_accept(c: &BitString, zeta: f64, gamma: f64, prefix: Option<u8>, suffix: Option<u8>) -> bool {
    prefix.is_none_or(|b| c.first() == Some(b))
        && suffix.is_none_or(|b| c.last() == Some(b))
        && density_ok(c, zeta, gamma)
}

/// Distinct i.i.d. uniform codewords filtered by the density window and
/// the boundary-bit constraints.
pub fn build_dense_codebook(
    n: usize,
    num_codewords: usize,
    zeta: f64,
    gamma: f64,
    prefix_bit: Option<u8>,
    suffix_bit: Option<u8>,
    seed: u64,
) -> Result<Codebook> {
    if n == 0 || !(zeta > 0.0 && zeta < 1.0) || !(gamma > 0.0 && gamma < 0.5) || zeta * (n as f64) < 1.0 {
        return Err(Error::InvalidParameter(format!("n={n}, zeta={zeta}, gamma={gamma}")));
    }
    if n <= 20 {
        let feasible = BitString::all_of_len(n)
            .filter(|c| dense_accept(c, zeta, gamma, prefix_bit, suffix_bit))
            .count();
        if feasible < num_codewords {
            return Err(Error::FeasibilityExhausted {
                attempts: 0,
                found: feasible,
            });
        }
    }
    let mut r = rng(seed);
    let mut seen = HashSet::new();
    let mut entries = Vec::with_capacity(num_codewords);
    let budget = 1_000_000usize.max(1000 * num_codewords);
    let mut attempts = 0;
    while entries.len() < num_codewords {
        if attempts >= budget {
            return Err(Error::FeasibilityExhausted {
                attempts,
                found: entries.len(),
            });
        }
        attempts += 1;
        let c = BitString::from_bits((0..n).map(|_| r.gen_range(0..2u8)).collect());
        if dense_accept(&c, zeta, gamma, prefix_bit, suffix_bit) && seen.insert(c.clone()) {
            entries.push(c);
        }
    }
    Ok(Codebook {
        entries,
        n,
        meta: CodebookMeta::Dense {
            zeta,
            gamma,
            prefix_bit,
            suffix_bit,
        },
    })
}

/// Codebook paired with the exact channel law of every codeword, computed
/// once and shared by all decode calls.
#[derive(Debug, Clone)]
pub struct MlDecoder {
    pub book: Codebook,
    pub spec: ChannelSpec,
    dists: Vec<Dist<BitString>>,
}

impl MlDecoder {
    pub fn new(book: Codebook, spec: ChannelSpec) -> Result<Self> {
        Self::new_with(Exec::default(), book, spec)
    }

    pub fn new_with(exec: Exec, book: Codebook, spec: ChannelSpec) -> Result<Self> {
        let dists = par::map_slice(exec, &book.entries, |c| transition_dist(&spec, c))
            .into_iter()
            .collect::<Result<Vec<_>>>()?;
        Ok(MlDecoder { book, spec, dists })
    }

    pub fn likelihood(&self, symbol: usize, y: &BitString) -> f64 {
        self.dists[symbol].prob(y)
    }

    /// Most likely symbol, `None` when every codeword has likelihood 0.
    pub fn decode(&self, y: &BitString) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in self.dists.iter().enumerate() {
            let p = d.prob(y);
            if p > 0.0 && best.is_none_or(|(_, b)| p > b) {
                best = Some((i, p));
            }
        }
        best.map(|(i, _)| i)
    }

    /// Product-likelihood decoding over several traces; `None` entries are
    /// erased traces and are skipped.
    pub fn decode_traces(&self, traces: &[Option<BitString>]) -> Option<usize> {
        let present: Vec<&BitString> = traces.iter().flatten().collect();
        if present.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64)> = None;
        for (i, d) in self.dists.iter().enumerate() {
            let mut ll = 0.0;
            for y in &present {
                let p = d.prob(y);
                if p <= 0.0 {
                    ll = f64::NEG_INFINITY;
                    break;
                }
                ll += p.ln();
            }
            if ll > f64::NEG_INFINITY && best.is_none_or(|(_, b)| ll > b) {
                best = Some((i, ll));
            }
        }
        best.map(|(i, _)| i)
    }
}

pub fn ml_decode_single(book: &Codebook, spec: &ChannelSpec, y: &BitString) -> Result<Option<usize>> {
    Ok(MlDecoder::new_with(Exec::Seq, book.clone(), spec.clone())?.decode(y))
}

pub fn ml_decode_traces(book: &Codebook, spec: &ChannelSpec, traces: &[Option<BitString>]) -> Result<Option<usize>> {
    Ok(MlDecoder::new_with(Exec::Seq, book.clone(), spec.clone())?.decode_traces(traces))
}

pub const GREEDY_LIMIT: usize = 14;

/// Number of runs of each length 1..=τ (β_i·N), checked for integrality.
pub fn run_counts(n: usize, beta: &[f64]) -> Result<Vec<usize>> {
    let mut counts = Vec::with_capacity(beta.len());
    for &b in beta {
        let k = b * n as f64;
        if b < 0.0 || (k - k.round()).abs() > 1e-9 {
            return Err(Error::NonIntegral(format!("beta*N = {k}")));
        }
        counts.push(k.round() as usize);
    }
    let total: usize = counts.iter().enumerate().map(|(i, k)| (i + 1) * k).sum();
    if total != n {
        return Err(Error::NonIntegral(format!("sum i*beta_i*N = {total} != N = {n}")));
    }
    Ok(counts)
}

fn run_orders(counts: &mut [usize], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if counts.iter().all(|&k| k == 0) {
        out.push(cur.clone());
        return;
    }
    for i in 0..counts.len() {
        if counts[i] > 0 {
            counts[i] -= 1;
            cur.push(i + 1);
            run_orders(counts, cur, out);
            cur.pop();
            counts[i] += 1;
        }
    }
}

fn from_run_lengths(first: u8, lens: &[usize]) -> BitString {
    let runs = lens
        .iter()
        .enumerate()
        .map(|(i, &len)| Run {
            bit: first ^ (i % 2) as u8,
            len,
        })
        .collect();
    RunList { runs }.to_bits()
}

/// All strings with exactly β_i·N runs of length i, sorted.
pub fn enumerate_s_beta(n: usize, tau: usize, beta: &[f64]) -> Result<BTreeSet<BitString>> {
    if n > GREEDY_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: n,
            limit: GREEDY_LIMIT,
        });
    }
    if beta.len() != tau {
        return Err(Error::InvalidParameter(format!("expected {tau} betas")));
    }
    let mut counts = run_counts(n, beta)?;
    let mut orders = Vec::new();
    run_orders(&mut counts, &mut Vec::new(), &mut orders);
    let mut out = BTreeSet::new();
    for lens in &orders {
        for first in 0..2u8 {
            out.insert(from_run_lengths(first, lens));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RestrictedBall {
    pub center: BitString,
    pub budget: usize,
    pub members: BTreeSet<BitString>,
}

/// Strings reachable with at most `budget` deletions, allowed only in runs
/// of length τ and in the run right after one.
pub fn restricted_deletion_ball(c: &BitString, budget: usize, tau: usize) -> Result<RestrictedBall> {
    if c.len() > crate::channels::ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: c.len(),
            limit: crate::channels::ORACLE_LIMIT,
        });
    }
    let rl = runs(c).runs;
    let caps: Vec<usize> = (0..rl.len())
        .map(|i| {
            if rl[i].len == tau || (i > 0 && rl[i - 1].len == tau) {
                rl[i].len
            } else {
                0
            }
        })
        .collect();
    let mut members = BTreeSet::new();
    let mut dels = vec![0usize; rl.len()];
    fn rec(i: usize, left: usize, rl: &[Run], caps: &[usize], dels: &mut Vec<usize>, out: &mut BTreeSet<BitString>) {
        if i == rl.len() {
            let mut v = Vec::new();
            for (r, k) in rl.iter().zip(dels.iter()) {
                v.extend(std::iter::repeat_n(r.bit, r.len - k));
            }
            out.insert(BitString::from_bits(v));
            return;
        }
        for k in 0..=caps[i].min(left) {
            dels[i] = k;
            rec(i + 1, left - k, rl, caps, dels, out);
        }
        dels[i] = 0;
    }
    rec(0, budget, &rl, &caps, &mut dels, &mut members);
    Ok(RestrictedBall {
        center: c.clone(),
        budget,
        members,
    })
}

pub fn delta_budget(n: usize, delta: f64) -> usize {
    (delta * n as f64 + 1e-9).floor() as usize
}

/// Greedy packing over S_β in ascending order: keep a candidate iff its
/// restricted ball misses every ball kept so far.
pub fn build_greedy_code(n: usize, tau: usize, beta: &[f64], delta: f64) -> Result<Codebook> {
    let candidates = enumerate_s_beta(n, tau, beta)?;
    if candidates.is_empty() {
        return Err(Error::EmptyCode);
    }
    let budget = delta_budget(n, delta);
    let mut covered: HashSet<BitString> = HashSet::new();
    let mut entries = Vec::new();
    for c in candidates {
        let ball = restricted_deletion_ball(&c, budget, tau)?;
        if ball.members.iter().all(|m| !covered.contains(m)) {
            covered.extend(ball.members);
            entries.push(c);
        }
    }
    Ok(Codebook {
        entries,
        n,
        meta: CodebookMeta::Greedy {
            beta: beta.to_vec(),
            tau,
            delta_n: budget,
            m: tau,
        },
    })
}

fn remap_runs(s: &BitString, f: impl Fn(usize) -> usize) -> BitString {
    let rl = runs(s);
    RunList {
        runs: rl
            .runs
            .iter()
            .map(|r| Run {
                bit: r.bit,
                len: f(r.len),
            })
            .collect(),
    }
    .to_bits()
}

/// Every run of length exactly τ becomes a run of length M.
pub fn blow_up(book: &Codebook, tau: usize, m: usize) -> Result<Codebook> {
    if m < tau {
        return Err(Error::InvalidParameter(format!("M = {m} < tau = {tau}")));
    }
    let entries: Vec<BitString> = book
        .entries
        .iter()
        .map(|c| remap_runs(c, |l| if l == tau { m } else { l }))
        .collect();
    let n = entries.first().map_or(book.n, |e| e.len());
    let meta = match &book.meta {
        CodebookMeta::Greedy { beta, tau, delta_n, .. } => CodebookMeta::Greedy {
            beta: beta.clone(),
            tau: *tau,
            delta_n: *delta_n,
            m,
        },
        other => other.clone(),
    };
    Ok(Codebook { entries, n, meta })
}

/// Shortens every run longer than τ to τ.
pub fn collapse(y: &BitString, tau: usize) -> BitString {
    remap_runs(y, |l| l.min(tau))
}

/// Ball-membership index over a pre-blowup code.
#[derive(Debug, Clone)]
pub struct ThresholdDecoder {
    pub tau: usize,
    pub m: usize,
    index: HashMap<BitString, Vec<usize>>,
}

impl ThresholdDecoder {
    pub fn new(pre_blowup: &Codebook, tau: usize, m: usize, delta_n: usize) -> Result<Self> {
        if m < tau {
            return Err(Error::InvalidParameter(format!("M = {m} < tau = {tau}")));
        }
        let mut index: HashMap<BitString, Vec<usize>> = HashMap::new();
        for (i, c) in pre_blowup.entries.iter().enumerate() {
            for y in restricted_deletion_ball(c, delta_n, tau)?.members {
                index.entry(y).or_default().push(i);
            }
        }
        Ok(ThresholdDecoder { tau, m, index })
    }

    pub fn decode(&self, y: &BitString) -> Result<usize> {
        match self.index.get(&collapse(y, self.tau)).map(|v| v.as_slice()) {
            None | Some([]) => Err(Error::NoCandidate),
            Some([i]) => Ok(*i),
            Some(v) => Err(Error::Ambiguous(v.len())),
        }
    }
}

pub fn threshold_decode(pre_blowup: &Codebook, tau: usize, m: usize, delta_n: usize, y: &BitString) -> Result<usize> {
    ThresholdDecoder::new(pre_blowup, tau, m, delta_n)?.decode(y)
}
