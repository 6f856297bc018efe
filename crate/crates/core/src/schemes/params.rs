use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SchemeKind {
    Single,
    Multi,
}

/// Constants binding encoder and decoder. `m` is the inner block length
/// (the payload block length in the multi-trace scheme).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub epsilon: f64,
    pub nu: f64,
    #[serde(rename = "B")]
    pub b: usize,
    pub m: usize,
    #[serde(default)]
    pub n_s: usize,
    pub n_out: usize,
    pub d_m: f64,
    #[serde(default = "one")]
    pub traces: usize,
    /// Shortest run of zeros accepted as a 0-buffer.
    pub zero_cutoff: usize,
    /// Shortest run of ones accepted as a 1-buffer (multi-trace only).
    #[serde(default)]
    pub one_cutoff: usize,
    pub delta_out: f64,
    /// Density window fraction of the payload (or single-trace inner) code.
    pub zeta: f64,
    /// Density window fraction of the sync inner code C_S.
    #[serde(default = "half")]
    pub zeta_s: f64,
    pub gamma: f64,
    pub eta: f64,
    pub sync_alphabet: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub r_in: f64,
    #[serde(default)]
    pub r_out: f64,
    /// Set when the values come from the asymptotic constant chain.
    #[serde(default)]
    pub asymptotic_only: bool,
}

fn one() -> usize {
    1
}

fn half() -> f64 {
    0.5
}

const GAMMA: f64 = 0.2;

/// Widest density window (as a fraction of `m`, at most 1/2) whose longest
/// admissible run, w − ⌈γw⌉, stays below `cutoff`.
pub fn window_below_cutoff(m: usize, gamma: f64, cutoff: usize) -> f64 {
    let longest = |w: usize| w - (gamma * w as f64 - 1e-9).ceil() as usize;
    let w = (1..=m / 2).rev().find(|&w| longest(w) < cutoff).unwrap_or(1);
    w as f64 / m as f64
}

fn check_d(d_m: f64) -> Result<()> {
    if !(0.0..1.0).contains(&d_m) {
        return Err(Error::InvalidParameter(format!("d(M) = {d_m} outside [0, 1)")));
    }
    Ok(())
}

impl SchemeParams {
    /// B = ⌈νm/(1−d(M))⌉, 0-buffer cutoff ⌈νm/2⌉, δ_out = ε/5, ζ = ν/3
    /// (capped at 1/2 and at least one bit).
    pub fn single(m: usize, n_out: usize, nu: f64, d_m: f64, epsilon: f64) -> Result<Self> {
        check_d(d_m)?;
        let b = (nu * m as f64 / (1.0 - d_m) - 1e-9).ceil() as usize;
        let zero_cutoff = ((nu * m as f64 / 2.0) - 1e-9).ceil().max(1.0) as usize;
        Ok(SchemeParams {
            epsilon,
            nu,
            b,
            m,
            n_s: 0,
            n_out,
            d_m,
            traces: 1,
            zero_cutoff,
            one_cutoff: 0,
            delta_out: epsilon / 5.0,
            zeta: (nu / 3.0).min(0.5).max(1.0 / m.max(1) as f64),
            zeta_s: 0.5,
            gamma: GAMMA,
            eta: 0.5,
            sync_alphabet: 4,
            seed: 0,
            r_in: 0.0,
            r_out: 0.0,
            asymptotic_only: false,
        })
    }

    /// Buffer length `b` given explicitly; buffers are runs longer than
    /// (1−d(M))B/2. δ_out = ε³/40. The payload density window is the widest
    /// one that keeps codeword runs shorter than the buffer cutoff.
    pub fn multi(m: usize, n_s: usize, n_out: usize, b: usize, d_m: f64, epsilon: f64, traces: usize) -> Result<Self> {
        check_d(d_m)?;
        let cutoff = ((1.0 - d_m) * b as f64 / 2.0).floor() as usize + 1;
        Ok(SchemeParams {
            epsilon,
            nu: 16.0 * (1.0 - d_m) * b as f64 / m as f64,
            b,
            m,
            n_s,
            n_out,
            d_m,
            traces,
            zero_cutoff: cutoff,
            one_cutoff: cutoff,
            delta_out: epsilon.powi(3) / 40.0,
            zeta: window_below_cutoff(m, GAMMA, cutoff),
            zeta_s: 0.5,
            gamma: GAMMA,
            eta: 0.5,
            sync_alphabet: 4,
            seed: 0,
            r_in: 0.0,
            r_out: 0.0,
            asymptotic_only: false,
        })
    }

    pub fn codeword_len(&self, kind: SchemeKind) -> usize {
        match kind {
            SchemeKind::Single => self.m * self.n_out + self.n_out.saturating_sub(1) * self.b,
            SchemeKind::Multi => (self.m + 2 * self.b + self.n_s) * self.n_out,
        }
    }
}

/// Message bits per channel bit: r_out · r_in · m · n_out / length.
pub fn scheme_rate(p: &SchemeParams, kind: SchemeKind) -> f64 {
    let len = p.codeword_len(kind);
    if len == 0 {
        return 0.0;
    }
    p.r_out * p.r_in * (p.m * p.n_out) as f64 / len as f64
}

/// The multi-trace constant chain as functions of ε. Only meaningful as
/// n_R grows without bound; desk-scale runs pass explicit values instead.
pub fn asymptotic_defaults(
    epsilon: f64,
    traces: usize,
    mu: f64,
    d_m: f64,
    n_r: usize,
    n_out: usize,
) -> Result<SchemeParams> {
    check_d(d_m)?;
    let nu = epsilon * mu;
    let b = (nu / (16.0 * (1.0 - d_m)) * n_r as f64).ceil().max(1.0) as usize;
    let n_s = (n_r as f64).log2().ceil() as usize;
    let mut p = SchemeParams::multi(n_r, n_s, n_out, b, d_m, epsilon, traces)?;
    p.nu = nu;
    p.zeta = (1.0 - d_m) * nu / 4.0;
    p.zeta_s = p.zeta;
    p.eta = epsilon.powi(8) / traces as f64;
    p.r_out = 1.0 - epsilon / 4.0;
    p.asymptotic_only = true;
    Ok(p)
}
