use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::bitseq::BitString;
use crate::channels::{star_transition_dist, transition_dist, ChannelSpec, Dist};
use crate::error::{Error, Result};
use crate::par::{self, Exec};

/// Binary entropy in bits, with h(0) = h(1) = 0.
pub fn h(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

fn plogp_sum(v: &[f64]) -> f64 {
    v.iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

pub fn entropy(v: &[f64]) -> Result<f64> {
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > 1e-9 || v.iter().any(|&x| x < 0.0) {
        return Err(Error::NotNormalized(s));
    }
    Ok(plogp_sum(v))
}

/// Input distribution together with the channel rows P(z | x).
#[derive(Debug, Clone)]
pub struct JointDist<K: Eq + Hash> {
    pub inputs: Vec<(BitString, f64)>,
    pub rows: Vec<Dist<K>>,
}

impl JointDist<BitString> {
    pub fn from_channel(inputs: Vec<(BitString, f64)>, spec: &ChannelSpec) -> Result<Self> {
        let rows = inputs
            .iter()
            .map(|(x, _)| transition_dist(spec, x))
            .collect::<Result<_>>()?;
        JointDist::from_rows(inputs, rows)
    }
}

impl<K: Eq + Hash + Clone + Ord> JointDist<K> {
    pub fn from_rows(inputs: Vec<(BitString, f64)>, rows: Vec<Dist<K>>) -> Result<Self> {
        let s: f64 = inputs.iter().map(|(_, p)| p).sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized(s));
        }
        if let Some(x) = inputs.first() {
            if inputs.iter().any(|(y, _)| y.len() != x.0.len()) {
                return Err(Error::InvalidParameter("inputs must share one length".into()));
            }
        }
        Ok(JointDist { inputs, rows })
    }

    pub fn output_marginal(&self) -> HashMap<K, f64> {
        let mut q = HashMap::new();
        for ((_, px), row) in self.inputs.iter().zip(&self.rows) {
            for (z, w) in &row.support {
                *q.entry(z.clone()).or_insert(0.0) += px * w;
            }
        }
        q
    }

    pub fn information_density(&self, x: &BitString, z: &K) -> Result<f64> {
        let i = self
            .inputs
            .iter()
            .position(|(y, _)| y == x)
            .ok_or(Error::ZeroProbability)?;
        let px = self.inputs[i].1;
        let w = self.rows[i].prob(z);
        let qz = self.output_marginal().get(z).copied().unwrap_or(0.0);
        if px <= 0.0 || w <= 0.0 || qz <= 0.0 {
            return Err(Error::ZeroProbability);
        }
        Ok((w / qz).log2())
    }

    pub fn mutual_information(&self) -> f64 {
        let q = self.output_marginal();
        let mut acc = 0.0;
        for ((_, px), row) in self.inputs.iter().zip(&self.rows) {
            for (z, w) in &row.support {
                if *px > 0.0 && *w > 0.0 {
                    acc += px * w * (w / q[z]).log2();
                }
            }
        }
        acc
    }
}

pub const CAPACITY_LIMIT: usize = 10;
pub const BA_MAX_ITER: usize = 10_000;

/// Sparse channel matrix: rows of (output index, probability).
pub type SparseRows = Vec<Vec<(usize, f64)>>;

fn index_rows<K: Eq + Hash + Clone>(dists: Vec<Dist<K>>) -> (SparseRows, usize) {
    let mut ids: HashMap<K, usize> = HashMap::new();
    let rows = dists
        .into_iter()
        .map(|d| {
            d.support
                .into_iter()
                .map(|(k, p)| {
                    let n = ids.len();
                    (*ids.entry(k).or_insert(n), p)
                })
                .collect()
        })
        .collect();
    (rows, ids.len())
}

/// Blahut–Arimoto with a duality-gap stop. Returns the capacity in bits.
pub fn blahut_arimoto(rows: &SparseRows, n_out: usize, tol: f64) -> Result<f64> {
    let n_in = rows.len();
    if n_in == 0 {
        return Ok(0.0);
    }
    let mut p = vec![1.0 / n_in as f64; n_in];
    let mut q = vec![0.0; n_out];
    let mut div = vec![0.0; n_in];
    let mut gap = f64::INFINITY;
    for _ in 0..BA_MAX_ITER {
        q.iter_mut().for_each(|v| *v = 0.0);
        for (px, row) in p.iter().zip(rows) {
            for &(z, w) in row {
                q[z] += px * w;
            }
        }
        for (dx, row) in div.iter_mut().zip(rows) {
            *dx = row
                .iter()
                .filter(|(_, w)| *w > 0.0)
                .map(|&(z, w)| w * (w / q[z]).log2())
                .sum();
        }
        let lower: f64 = p.iter().zip(&div).map(|(a, b)| a * b).sum();
        let upper = div.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        gap = upper - lower;
        if gap <= tol {
            return Ok(lower.max(0.0));
        }
        let mut norm = 0.0;
        for (px, dx) in p.iter_mut().zip(&div) {
            *px *= dx.exp2();
            norm += *px;
        }
        p.iter_mut().for_each(|v| *v /= norm);
    }
    Err(Error::NonConvergence {
        iterations: BA_MAX_ITER,
        gap,
    })
}

/// max over input laws on {0,1}^n of I(X; Z(X)).
pub fn capacity_small_n(spec: &ChannelSpec, n: usize, tol: f64) -> Result<f64> {
    if n > CAPACITY_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: n,
            limit: CAPACITY_LIMIT,
        });
    }
    let dists = BitString::all_of_len(n)
        .map(|x| transition_dist(spec, &x))
        .collect::<Result<Vec<_>>>()?;
    let (rows, n_out) = index_rows(dists);
    blahut_arimoto(&rows, n_out, tol)
}

/// Same as [`capacity_small_n`] for the star channel.
pub fn capacity_small_n_star(spec: &ChannelSpec, n: usize, tol: f64) -> Result<f64> {
    if n > CAPACITY_LIMIT {
        return Err(Error::InstanceTooLarge {
            size: n,
            limit: CAPACITY_LIMIT,
        });
    }
    let dists = BitString::all_of_len(n)
        .map(|x| star_transition_dist(spec, &x))
        .collect::<Result<Vec<_>>>()?;
    let (rows, n_out) = index_rows(dists);
    blahut_arimoto(&rows, n_out, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dg,
    Greedy,
    Baseline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub tau: usize,
    pub d: f64,
    pub rate: f64,
    pub beta: Vec<f64>,
    #[serde(rename = "M")]
    pub m: usize,
    pub method: Method,
}

pub fn dg_argument(tau: usize, d: f64) -> f64 {
    d * (tau as f64 + 1.0) / 2f64.powi(tau as i32)
}

pub fn dg_bound(tau: usize, d: f64) -> Result<f64> {
    if tau == 0 || !(0.0..=1.0).contains(&d) {
        return Err(Error::InvalidParameter(format!("tau = {tau}, d = {d}")));
    }
    let a = dg_argument(tau, d);
    if a > 0.5 {
        return Err(Error::HypothesisViolated(format!("d(tau+1)/2^tau = {a} > 1/2")));
    }
    Ok(1.0 - h(a))
}

fn binom_f64(n: usize, k: usize) -> f64 {
    crate::bitseq::binom(n as u64, k as u64) as f64
}

pub fn g_of_d(tau: usize, m: usize, d: f64) -> f64 {
    assert!(m >= tau && tau >= 1, "need M >= tau >= 1");
    let mut g = 2.0 * tau as f64 * d.powi(m as i32);
    for i in 1..=tau {
        g += (tau - i) as f64 * binom_f64(m, i) * (1.0 - d).powi(i as i32) * d.powi((m - i) as i32);
    }
    g
}

fn check_beta(beta: &[f64]) -> Result<()> {
    let s: f64 = beta.iter().enumerate().map(|(i, b)| (i + 1) as f64 * b).sum();
    if (s - 1.0).abs() > 1e-9 || beta.iter().any(|&b| b < 0.0) {
        return Err(Error::ConstraintViolated(s));
    }
    Ok(())
}

/// Rate of the blown-up greedy code family with run profile `beta`
/// (β_i = fraction of runs of length i per input bit).
pub fn greedy_rate(tau: usize, m: usize, d: f64, beta: &[f64]) -> Result<f64> {
    if beta.len() != tau || m < tau {
        return Err(Error::InvalidParameter(format!("need {tau} betas and M >= tau")));
    }
    check_beta(beta)?;
    Ok(greedy_rate_unchecked(m, d, beta, numerator_head(beta)))
}

fn numerator_head(beta: &[f64]) -> f64 {
    let b: f64 = beta.iter().sum();
    b * plogp_sum(&beta.iter().map(|x| x / b).collect::<Vec<_>>())
}

fn greedy_rate_unchecked(m: usize, d: f64, beta: &[f64], head: f64) -> f64 {
    let tau = beta.len();
    let bt = beta[tau - 1];
    let alpha = bt * g_of_d(tau, m, d);
    if alpha >= 1.0 {
        return 0.0;
    }
    let w = 2.0 * bt + alpha;
    let penalty = if w > 0.0 { w * h(alpha / w) } else { 0.0 };
    let num = head - penalty - h(alpha);
    let den = 1.0 - bt * tau as f64 + bt * m as f64;
    (num / den).max(0.0)
}

/// Grid points: β_1..β_{τ−1} are multiples of 1/steps, β_τ solves Σ iβ_i = 1.
pub fn beta_grid(tau: usize, steps: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    let mut ks = vec![0usize; tau.saturating_sub(1)];
    fn rec(i: usize, used: usize, steps: usize, tau: usize, ks: &mut Vec<usize>, out: &mut Vec<Vec<f64>>) {
        if i == ks.len() {
            let mut b: Vec<f64> = ks.iter().map(|&k| k as f64 / steps as f64).collect();
            b.push((steps - used) as f64 / (tau * steps) as f64);
            out.push(b);
            return;
        }
        let mut k = 0;
        while used + (i + 1) * k <= steps {
            ks[i] = k;
            rec(i + 1, used + (i + 1) * k, steps, tau, ks, out);
            k += 1;
        }
    }
    rec(0, 0, steps, tau, &mut ks, &mut out);
    out
}

fn steps_of(beta_step: f64) -> Result<usize> {
    let s = (1.0 / beta_step).round();
    if beta_step.is_nan() || beta_step <= 0.0 || (s * beta_step - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("beta_step {beta_step} must divide 1")));
    }
    Ok(s as usize)
}

pub fn greedy_search(tau: usize, d: f64, m_max: usize, beta_step: f64) -> Result<BoundResult> {
    greedy_search_with(Exec::default(), tau, d, m_max, beta_step)
}

/// Best greedy rate over the β grid and M ∈ [τ, m_max]; ties go to the
/// lexicographically smallest (M, β).
pub fn greedy_search_with(exec: Exec, tau: usize, d: f64, m_max: usize, beta_step: f64) -> Result<BoundResult> {
    if tau == 0 || m_max < tau {
        return Err(Error::EmptyGrid);
    }
    let grid = beta_grid(tau, steps_of(beta_step)?);
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let heads: Vec<f64> = grid.iter().map(|b| numerator_head(b)).collect();
    let per_m = par::map_range(exec, m_max - tau + 1, |k| {
        let m = tau + k;
        let mut best = (f64::NEG_INFINITY, 0usize);
        for (j, b) in grid.iter().enumerate() {
            let r = greedy_rate_unchecked(m, d, b, heads[j]);
            if r > best.0 {
                best = (r, j);
            }
        }
        (best, m)
    });
    let ((rate, j), m) =
        per_m.into_iter().fold(
            ((f64::NEG_INFINITY, 0), 0),
            |acc, cur| if cur.0 .0 > acc.0 .0 { cur } else { acc },
        );
    Ok(BoundResult {
        tau,
        d,
        rate,
        beta: grid[j].clone(),
        m,
        method: Method::Greedy,
    })
}

/// log2 of the growth rate of strings whose runs are all shorter than τ.
pub fn rll_baseline(tau: usize) -> f64 {
    assert!(tau >= 2, "tau must be >= 2");
    let f = |x: f64| x.powi(tau as i32 - 1) - (0..=tau - 2).map(|i| x.powi(i as i32)).sum::<f64>();
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    (0.5 * (lo + hi)).log2()
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveRow {
    pub d: f64,
    pub dg: Option<f64>,
    pub greedy: Option<BoundResult>,
    pub baseline: Option<f64>,
}

pub const DEFAULT_M_MAX: usize = 64;
pub const DEFAULT_BETA_STEP: f64 = 0.01;

pub fn emit_curve(tau: usize, d_grid: &[f64], methods: &[Method]) -> Result<Vec<CurveRow>> {
    emit_curve_with(Exec::default(), tau, d_grid, methods)
}

pub fn emit_curve_with(exec: Exec, tau: usize, d_grid: &[f64], methods: &[Method]) -> Result<Vec<CurveRow>> {
    if let Some(d) = d_grid.iter().find(|d| !(0.0..1.0).contains(*d)) {
        return Err(Error::InvalidParameter(format!("d = {d} outside [0, 1)")));
    }
    let base = (methods.contains(&Method::Baseline) && tau >= 2).then(|| rll_baseline(tau));
    d_grid
        .iter()
        .map(|&d| {
            let dg = if methods.contains(&Method::Dg) {
                dg_bound(tau, d).ok()
            } else {
                None
            };
            let greedy = if methods.contains(&Method::Greedy) {
                Some(greedy_search_with(exec, tau, d, DEFAULT_M_MAX, DEFAULT_BETA_STEP)?)
            } else {
                None
            };
            Ok(CurveRow {
                d,
                dg,
                greedy,
                baseline: base,
            })
        })
        .collect()
}

/// The default grid {0.00, 0.01, ..., 0.99}.
pub fn default_d_grid() -> Vec<f64> {
    (0..100).map(|i| i as f64 / 100.0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitseq::bs;
    use crate::channels::make_threshold_channel;
    use approx::assert_abs_diff_eq;

    #[test]
    fn entropy_examples() {
        assert_abs_diff_eq!(entropy(&[0.5, 0.5]).unwrap(), 1.0);
        assert_abs_diff_eq!(entropy(&[1.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(entropy(&[0.15, 0.85]).unwrap(), 0.60984, epsilon = 5e-6);
        assert!(entropy(&[0.3, 0.3]).is_err());
    }

    #[test]
    fn dg_examples() {
        assert_abs_diff_eq!(dg_bound(2, 0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(dg_bound(2, 0.2).unwrap(), 0.39016, epsilon = 5e-6);
        assert_abs_diff_eq!(dg_bound(3, 0.5).unwrap(), 0.18872, epsilon = 5e-6);
        assert!(dg_bound(2, 0.7).is_err());
    }

    #[test]
    fn g_examples() {
        assert_eq!(g_of_d(2, 3, 0.0), 0.0);
        assert_abs_diff_eq!(g_of_d(2, 2, 0.5), 1.5, epsilon = 1e-12);
    }

    #[test]
    fn greedy_rate_no_blowup() {
        let r = greedy_rate(2, 5, 0.7, &[1.0, 0.0]).unwrap();
        assert_eq!(r, 0.0);
        let r = greedy_rate(3, 3, 0.4, &[0.5, 0.25, 0.0]).unwrap();
        assert_abs_diff_eq!(
            r,
            0.75 * entropy(&[2.0 / 3.0, 1.0 / 3.0, 0.0]).unwrap(),
            epsilon = 1e-12
        );
        assert!(greedy_rate(2, 2, 0.1, &[0.5, 0.5]).is_err());
    }

    #[test]
    fn baseline_examples() {
        assert_abs_diff_eq!(rll_baseline(2), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rll_baseline(3), ((1.0 + 5f64.sqrt()) / 2.0).log2(), epsilon = 1e-12);
    }

    #[test]
    fn grid_shape() {
        let g = beta_grid(2, 100);
        assert_eq!(g.len(), 101);
        assert!(g.iter().all(|b| check_beta(b).is_ok()));
        assert_eq!(beta_grid(1, 100), vec![vec![1.0]]);
    }

    #[test]
    fn mutual_information_examples() {
        let inputs: Vec<_> = BitString::all_of_len(2).map(|x| (x, 0.25)).collect();
        let j = JointDist::from_channel(inputs.clone(), &ChannelSpec::noiseless()).unwrap();
        assert_abs_diff_eq!(j.mutual_information(), 2.0, epsilon = 1e-12);
        let rows = inputs
            .iter()
            .map(|_| Dist {
                support: HashMap::from([(bs(""), 1.0)]),
            })
            .collect();
        let j = JointDist::from_rows(inputs, rows).unwrap();
        assert_abs_diff_eq!(j.mutual_information(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bsc_toy() {
        let p = 0.11;
        let inputs = vec![(bs("0"), 0.5), (bs("1"), 0.5)];
        let rows = vec![
            Dist {
                support: HashMap::from([(bs("0"), 1.0 - p), (bs("1"), p)]),
            },
            Dist {
                support: HashMap::from([(bs("1"), 1.0 - p), (bs("0"), p)]),
            },
        ];
        let j = JointDist::from_rows(inputs, rows).unwrap();
        assert_abs_diff_eq!(j.mutual_information(), 0.50008, epsilon = 5e-6);
        assert_abs_diff_eq!(j.mutual_information(), 1.0 - h(p), epsilon = 1e-12);
    }

    #[test]
    fn density_examples() {
        let inputs = vec![(bs("0"), 0.5), (bs("1"), 0.5)];
        let j = JointDist::from_channel(inputs, &ChannelSpec::noiseless()).unwrap();
        assert_abs_diff_eq!(j.information_density(&bs("0"), &bs("0")).unwrap(), 1.0);
        assert!(j.information_density(&bs("0"), &bs("1")).is_err());
    }

    #[test]
    fn capacity_examples() {
        let c = make_threshold_channel(2, 0.6).unwrap();
        assert_abs_diff_eq!(capacity_small_n(&c, 1, 1e-9).unwrap(), 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(
            capacity_small_n(&ChannelSpec::noiseless(), 2, 1e-9).unwrap(),
            2.0,
            epsilon = 1e-8
        );
    }
}
