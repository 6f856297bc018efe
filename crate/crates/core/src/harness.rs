use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::channels::{sample_kept, transmit, transmit_multi, ChannelSpec};
use crate::error::{Error, Result};
use crate::infotheory::{emit_curve_with, Method};
use crate::par::{self, Exec};
use crate::rng::{rng, subseed};
use crate::schemes::{MultiTraceScheme, SchemeKind, SchemeParams, SingleTraceScheme};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trials: usize,
    pub failures: usize,
    pub wilson_ci: (f64, f64),
    pub seed: u64,
    pub wall_time: f64,
}

impl TrialReport {
    pub fn rate(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.failures as f64 / self.trials as f64
        }
    }
}

/// 95% Wilson score interval for `k` successes in `n` trials.
pub fn wilson_ci(k: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054_f64;
    let nf = n as f64;
    let p = k as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

/// Runs `fail(subseed(seed, i))` for i in 0..trials and tallies failures.
pub fn run_bernoulli<F>(exec: Exec, trials: usize, seed: u64, fail: F) -> TrialReport
where
    F: Fn(u64) -> bool + Sync + Send,
{
    let start = Instant::now();
    let failures = par::map_range(exec, trials, |i| fail(subseed(seed, i as u64)))
        .into_iter()
        .filter(|&f| f)
        .count();
    TrialReport {
        trials,
        failures,
        wilson_ci: wilson_ci(failures, trials),
        seed,
        wall_time: start.elapsed().as_secs_f64(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub channel: ChannelSpec,
    pub scheme: SchemeParams,
    pub kind: SchemeKind,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

pub fn random_message(k: usize, field: u64, seed: u64) -> Vec<u64> {
    let mut r = rng(seed);
    (0..k).map(|_| r.gen_range(0..field)).collect()
}

/// A built scheme of either kind behind one interface.
#[derive(Debug, Clone)]
pub enum Scheme {
    Single(SingleTraceScheme),
    Multi(MultiTraceScheme),
}

impl Scheme {
    pub fn build(kind: SchemeKind, params: SchemeParams, channel: &ChannelSpec) -> Result<Self> {
        match kind {
            SchemeKind::Single => SingleTraceScheme::build(params, channel).map(Scheme::Single),
            SchemeKind::Multi => MultiTraceScheme::build(params, channel).map(Scheme::Multi),
        }
    }

    pub fn message_len(&self) -> usize {
        match self {
            Scheme::Single(s) => s.message_len(),
            Scheme::Multi(s) => s.message_len(),
        }
    }

    pub fn field_size(&self) -> u64 {
        match self {
            Scheme::Single(s) => s.field_size(),
            Scheme::Multi(s) => s.sub.p,
        }
    }

    /// One encode/transmit/decode round; true when decoding fails.
    pub fn trial_fails(&self, channel: &ChannelSpec, seed: u64) -> bool {
        let msg = random_message(self.message_len(), self.field_size(), subseed(seed, 0));
        let ch_seed = subseed(seed, 1);
        match self {
            Scheme::Single(s) => {
                let Ok(x) = s.encode(&msg) else { return true };
                let y = transmit(&channel.clone().with_traces(1), &x, ch_seed);
                s.decode(&y).map_or(true, |m| m != msg)
            }
            Scheme::Multi(s) => {
                let Ok(x) = s.encode(&msg) else { return true };
                let ts = transmit_multi(&channel.clone().with_traces(s.params.traces), &x, ch_seed);
                s.decode(&ts).map_or(true, |m| m != msg)
            }
        }
    }
}

pub fn run_trials(cfg: &ExperimentConfig) -> Result<TrialReport> {
    run_trials_with(Exec::default(), cfg)
}

pub fn run_trials_with(exec: Exec, cfg: &ExperimentConfig) -> Result<TrialReport> {
    cfg.channel
        .validate()
        .map_err(|e| Error::InvalidParameter(format!("channel: {e}")))?;
    let start = Instant::now();
    let scheme = Scheme::build(cfg.kind, cfg.scheme.clone(), &cfg.channel)?;
    let mut rep = run_bernoulli(exec, cfg.trials, cfg.seed, |s| scheme.trial_fails(&cfg.channel, s));
    rep.wall_time = start.elapsed().as_secs_f64();
    if let Some(path) = &cfg.output {
        let text = format!(
            "trials,failures,ci_low,ci_high,seed,wall_time\n{},{},{},{},{},{}\n",
            rep.trials, rep.failures, rep.wilson_ci.0, rep.wilson_ci.1, rep.seed, rep.wall_time
        );
        std::fs::write(path, text)?;
    }
    Ok(rep)
}

/// Sample kept positions with a seeded channel draw (for ground-truth
/// instrumentation).
pub fn kept_positions(channel: &ChannelSpec, x: &crate::BitString, seed: u64) -> Vec<usize> {
    sample_kept(channel, x, &mut rng(seed))
}

pub const CSV_HEADER: [&str; 6] = ["d", "rate_dg", "rate_greedy", "rate_baseline", "best_M", "best_beta"];

/// Writes the bound curves for one τ as CSV.
pub fn sweep_bounds(tau: usize, d_grid: &[f64], out_path: &Path) -> Result<()> {
    sweep_bounds_with(Exec::default(), tau, d_grid, out_path)
}

pub fn sweep_bounds_with(exec: Exec, tau: usize, d_grid: &[f64], out_path: &Path) -> Result<()> {
    let rows = emit_curve_with(exec, tau, d_grid, &[Method::Dg, Method::Greedy, Method::Baseline])?;
    let mut w = csv::Writer::from_path(out_path)?;
    w.write_record(CSV_HEADER)?;
    let fmt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x:.6}"));
    for r in rows {
        let g = r.greedy.as_ref();
        w.write_record([
            format!("{:.2}", r.d),
            fmt(r.dg),
            fmt(g.map(|b| b.rate)),
            fmt(r.baseline),
            g.map_or(String::new(), |b| b.m.to_string()),
            g.map_or(String::new(), |b| {
                b.beta.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(";")
            }),
        ])?;
    }
    w.flush()?;
    Ok(())
}
