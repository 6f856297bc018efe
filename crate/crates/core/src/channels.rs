use std::collections::{BTreeMap, HashMap};
use std::hash::Hash;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bitseq::{runs, BitString};
use crate::error::{Error, Result};
use crate::rng::{rng, subseed, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrimMode {
    #[default]
    None,
    Trim00,
    Trim01,
    Trim10,
    Trim11,
}

impl TrimMode {
    /// (leading symbol, trailing symbol) removed by this mode.
    pub fn symbols(self) -> Option<(u8, u8)> {
        match self {
            TrimMode::None => None,
            TrimMode::Trim00 => Some((0, 0)),
            TrimMode::Trim01 => Some((0, 1)),
            TrimMode::Trim10 => Some((1, 0)),
            TrimMode::Trim11 => Some((1, 1)),
        }
    }

    /// Index range `[start, end)` of `y` that survives trimming.
    pub fn keep_range(self, y: &[u8]) -> (usize, usize) {
        let Some((a, b)) = self.symbols() else {
            return (0, y.len());
        };
        let start = y.iter().position(|&c| c != a).unwrap_or(y.len());
        let end = y[start..]
            .iter()
            .rposition(|&c| c != b)
            .map_or(start, |p| start + p + 1);
        (start, end)
    }

    pub fn apply(self, y: &BitString) -> BitString {
        let (s, e) = self.keep_range(y.bits());
        y.slice(s, e)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub d_table: Vec<f64>,
    pub mu: f64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(default)]
    pub trim_mode: TrimMode,
    #[serde(default = "one")]
    pub traces: usize,
}

fn one() -> usize {
    1
}

pub fn make_runlength_channel(
    d_table: Vec<f64>,
    mu: f64,
    m: usize,
    trim_mode: TrimMode,
    traces: usize,
) -> Result<ChannelSpec> {
    let spec = ChannelSpec {
        d_table,
        mu,
        m,
        trim_mode,
        traces,
    };
    spec.validate()?;
    Ok(spec)
}

/// BDC-Thr(τ, d): runs shorter than τ pass untouched, longer runs lose
/// each bit with probability d.
pub fn make_threshold_channel(tau: usize, d: f64) -> Result<ChannelSpec> {
    if tau == 0 {
        return Err(Error::InvalidParameter("tau must be >= 1".into()));
    }
    if !(0.0..1.0).contains(&d) {
        return Err(Error::InvalidParameter(format!("d = {d} outside [0, 1)")));
    }
    let mut table = vec![0.0; tau];
    table[tau - 1] = d;
    make_runlength_channel(table, (1.0 - d) / 2.0, tau, TrimMode::None, 1)
}

impl ChannelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.d_table.len() != self.m {
            return Err(Error::InvalidParameter(format!(
                "d_table length {} must equal M = {}",
                self.d_table.len(),
                self.m
            )));
        }
        if self.d_table.iter().any(|d| !(0.0..=1.0).contains(d)) {
            return Err(Error::InvalidParameter(
                "deletion probabilities must lie in [0, 1]".into(),
            ));
        }
        if !(self.mu > 0.0 && self.mu < 1.0) {
            return Err(Error::InvalidParameter(format!("mu = {} outside (0, 1)", self.mu)));
        }
        if self.traces == 0 {
            return Err(Error::InvalidParameter("traces must be >= 1".into()));
        }
        if let Some(i) = self.d_table.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::Monotonicity(i + 1));
        }
        let d_m = self.d_m();
        if d_m >= 1.0 - self.mu {
            return Err(Error::Saturation {
                d_m,
                bound: 1.0 - self.mu,
            });
        }
        Ok(())
    }

    pub fn with_trim(mut self, mode: TrimMode) -> Self {
        self.trim_mode = mode;
        self
    }

    pub fn with_traces(mut self, t: usize) -> Self {
        self.traces = t;
        self
    }

    /// Deletion probability for a bit in a run of length `len`.
    pub fn d(&self, len: usize) -> f64 {
        self.d_table[len.clamp(1, self.m) - 1]
    }

    pub fn d_m(&self) -> f64 {
        self.d_table[self.m - 1]
    }

    pub fn noiseless() -> Self {
        ChannelSpec {
            d_table: vec![0.0],
            mu: 0.5,
            m: 1,
            trim_mode: TrimMode::None,
            traces: 1,
        }
    }

    fn bit_probs(&self, x: &BitString) -> Vec<f64> {
        let mut p = Vec::with_capacity(x.len());
        for r in runs(x).runs {
            p.extend(std::iter::repeat_n(self.d(r.len), r.len));
        }
        p
    }
}

/// Input positions that survive one channel use, after trimming.
pub fn sample_kept(spec: &ChannelSpec, x: &BitString, rng: &mut Rng) -> Vec<usize> {
    let probs = spec.bit_probs(x);
    let kept: Vec<usize> = probs
        .iter()
        .enumerate()
        .filter(|(_, &p)| !(p > 0.0 && rng.gen::<f64>() < p))
        .map(|(i, _)| i)
        .collect();
    let ys: Vec<u8> = kept.iter().map(|&i| x.bits()[i]).collect();
    let (s, e) = spec.trim_mode.keep_range(&ys);
    kept[s..e].to_vec()
}

pub fn transmit_rng(spec: &ChannelSpec, x: &BitString, rng: &mut Rng) -> BitString {
    let kept = sample_kept(spec, x, rng);
    BitString::from_bits(kept.iter().map(|&i| x.bits()[i]).collect())
}

pub fn transmit(spec: &ChannelSpec, x: &BitString, seed: u64) -> BitString {
    transmit_rng(spec, x, &mut rng(seed))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceSet {
    pub traces: Vec<BitString>,
    pub origin_length: usize,
}

pub fn transmit_multi(spec: &ChannelSpec, x: &BitString, seed: u64) -> TraceSet {
    let traces = (0..spec.traces)
        .map(|t| transmit(spec, x, subseed(seed, t as u64)))
        .collect();
    TraceSet {
        traces,
        origin_length: x.len(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dist<K: Eq + Hash> {
    pub support: HashMap<K, f64>,
}

impl<K: Eq + Hash + Clone + Ord> Dist<K> {
    pub fn prob(&self, k: &K) -> f64 {
        self.support.get(k).copied().unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.support.values().sum()
    }

    pub fn sorted(&self) -> BTreeMap<K, f64> {
        self.support.iter().map(|(k, v)| (k.clone(), *v)).collect()
    }

    /// Total-variation distance to another distribution.
    pub fn tv(&self, other: &Dist<K>) -> f64 {
        let mut s = 0.0;
        for (k, p) in &self.support {
            s += (p - other.prob(k)).abs();
        }
        for (k, q) in &other.support {
            if !self.support.contains_key(k) {
                s += q;
            }
        }
        s / 2.0
    }

    pub fn from_samples<I: IntoIterator<Item = K>>(samples: I) -> Self {
        let mut support = HashMap::new();
        let mut n = 0usize;
        for k in samples {
            *support.entry(k).or_insert(0.0) += 1.0;
            n += 1;
        }
        for v in support.values_mut() {
            *v /= n as f64;
        }
        Dist { support }
    }
}

pub const ORACLE_LIMIT: usize = 16;

/// Enumerates keep/delete patterns over the bits with 0 < p; `emit` gets
/// the probability and kept mask of each pattern.
fn enumerate_patterns(probs: &[f64], mut emit: impl FnMut(f64, &[bool])) {
    let free: Vec<usize> = (0..probs.len()).filter(|&i| probs[i] > 0.0).collect();
    let mut keep: Vec<bool> = probs.iter().map(|&p| p < 1.0).collect();
    for mask in 0u32..(1u32 << free.len()) {
        let mut pr = 1.0;
        for (j, &i) in free.iter().enumerate() {
            let del = mask >> j & 1 == 1;
            keep[i] = !del;
            pr *= if del { probs[i] } else { 1.0 - probs[i] };
        }
        if pr > 0.0 {
            emit(pr, &keep);
        }
    }
}

/// Exact output law of one channel use (after trimming).
pub fn transition_dist(spec: &ChannelSpec, x: &BitString) -> Result<Dist<BitString>> {
    if x.len() > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: x.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let probs = spec.bit_probs(x);
    let mut support: HashMap<BitString, f64> = HashMap::new();
    enumerate_patterns(&probs, |pr, keep| {
        let y: Vec<u8> = x.bits().iter().zip(keep).filter(|(_, &k)| k).map(|(&b, _)| b).collect();
        let (s, e) = spec.trim_mode.keep_range(&y);
        *support.entry(BitString::from_bits(y[s..e].to_vec())).or_insert(0.0) += pr;
    });
    Ok(Dist { support })
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct StarOutput {
    pub body: BitString,
    pub first_run_len: usize,
    pub last_run_len: usize,
}

/// Exact law of the star channel: first and last runs are kept intact and
/// their lengths revealed; interior runs follow the d-table.
pub fn star_transition_dist(spec: &ChannelSpec, x: &BitString) -> Result<Dist<StarOutput>> {
    if x.len() > ORACLE_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: x.len(),
            limit: ORACLE_LIMIT,
        });
    }
    let rl = runs(x).runs;
    let (first, last) = match (rl.first(), rl.last()) {
        (Some(f), Some(l)) => (f.len, l.len),
        _ => (0, 0),
    };
    let mut probs = spec.bit_probs(x);
    let n = x.len();
    for p in probs.iter_mut().take(first) {
        *p = 0.0;
    }
    for p in probs.iter_mut().skip(n - last) {
        *p = 0.0;
    }
    let mut support = HashMap::new();
    enumerate_patterns(&probs, |pr, keep| {
        let y: Vec<u8> = x.bits().iter().zip(keep).filter(|(_, &k)| k).map(|(&b, _)| b).collect();
        let out = StarOutput {
            body: BitString::from_bits(y),
            first_run_len: first,
            last_run_len: last,
        };
        *support.entry(out).or_insert(0.0) += pr;
    });
    Ok(Dist { support })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsiBoundary {
    /// Positions before the memory is filled see zero-padded history.
    #[default]
    ZeroPad,
    /// The first `memory` bits are copied through unchanged.
    Passthrough,
}

/// Finite-memory replacement channel: bit i becomes a random string drawn
/// from a law indexed by (x_i, x_{i-1}, ..., x_{i-memory}).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsiSpec {
    pub memory: usize,
    pub max_len: usize,
    pub law: BTreeMap<Vec<u8>, Vec<(BitString, f64)>>,
    #[serde(default)]
    pub boundary: IsiBoundary,
}

impl IsiSpec {
    pub fn new(
        memory: usize,
        max_len: usize,
        law: BTreeMap<Vec<u8>, Vec<(BitString, f64)>>,
        boundary: IsiBoundary,
    ) -> Result<Self> {
        if memory > 16 {
            return Err(Error::InstanceTooLarge {
                size: memory,
                limit: 16,
            });
        }
        for ctx in 0..1u64 << (memory + 1) {
            let key = BitString::from_index(ctx, memory + 1).into_bits();
            let Some(dist) = law.get(&key) else {
                return Err(Error::InvalidParameter(format!("missing context {key:?}")));
            };
            let s: f64 = dist.iter().map(|(_, p)| p).sum();
            if (s - 1.0).abs() > 1e-9 || dist.iter().any(|(_, p)| *p < 0.0) {
                return Err(Error::NotNormalized(s));
            }
            if dist.iter().any(|(y, _)| y.len() > max_len) {
                return Err(Error::InvalidParameter(format!("replacement longer than {max_len}")));
            }
        }
        Ok(IsiSpec {
            memory,
            max_len,
            law,
            boundary,
        })
    }

    /// Builds the law from a closure over contexts.
    pub fn from_fn(
        memory: usize,
        max_len: usize,
        boundary: IsiBoundary,
        f: impl Fn(&[u8]) -> Vec<(BitString, f64)>,
    ) -> Result<Self> {
        let law = (0..1u64 << (memory + 1))
            .map(|c| {
                let key = BitString::from_index(c, memory + 1).into_bits();
                let v = f(&key);
                (key, v)
            })
            .collect();
        IsiSpec::new(memory, max_len, law, boundary)
    }

    fn context(&self, x: &BitString, i: usize) -> Vec<u8> {
        (0..=self.memory)
            .map(|k| if i >= k { x.bits()[i - k] } else { 0 })
            .collect()
    }

    /// Σ_i E|y_i| for input `x`.
    pub fn expected_len(&self, x: &BitString) -> f64 {
        (0..x.len())
            .map(|i| {
                if self.boundary == IsiBoundary::Passthrough && i < self.memory {
                    return 1.0;
                }
                self.law[&self.context(x, i)]
                    .iter()
                    .map(|(y, p)| y.len() as f64 * p)
                    .sum::<f64>()
            })
            .sum()
    }
}

pub fn isi_transmit(isi: &IsiSpec, x: &BitString, seed: u64) -> BitString {
    let mut r = rng(seed);
    let mut out = BitString::new();
    for i in 0..x.len() {
        if isi.boundary == IsiBoundary::Passthrough && i < isi.memory {
            out.push(x.bits()[i]);
            continue;
        }
        let dist = &isi.law[&isi.context(x, i)];
        let u: f64 = r.gen();
        let mut acc = 0.0;
        let mut pick = &dist[dist.len() - 1].0;
        for (y, p) in dist {
            acc += p;
            if u < acc {
                pick = y;
                break;
            }
        }
        out.extend_from(pick);
    }
    out
}
