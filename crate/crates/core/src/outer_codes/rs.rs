use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub fn next_prime(n: u64) -> u64 {
    let is_prime = |v: u64| v >= 2 && (2..).take_while(|d| d * d <= v).all(|d| !v.is_multiple_of(d));
    (n.max(2)..).find(|&v| is_prime(v)).expect("prime")
}

type Poly = Vec<u64>;

fn trim(mut a: Poly) -> Poly {
    while a.last() == Some(&0) {
        a.pop();
    }
    a
}

fn deg(a: &Poly) -> isize {
    a.len() as isize - 1
}

/// Reed–Solomon code over GF(p): messages are polynomials of degree < k,
/// codewords their values at 0..n.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCode {
    pub p: u64,
    pub n: usize,
    pub k: usize,
}

impl SubCode {
    /// Distance D = ⌈δ·n⌉, so every pattern with e + 2t < δ·n is decodable.
    pub fn new(n: usize, delta_sub: f64, min_field: u64) -> Result<Self> {
        if n == 0 || !(delta_sub > 0.0 && delta_sub <= 1.0) {
            return Err(Error::InvalidParameter(format!("n = {n}, delta_sub = {delta_sub}")));
        }
        let dist = ((delta_sub * n as f64) - 1e-9).ceil().max(1.0) as usize;
        let k = n + 1 - dist.min(n);
        Self::with_dimension(n, k, min_field)
    }

    pub fn with_dimension(n: usize, k: usize, min_field: u64) -> Result<Self> {
        if k == 0 || k > n {
            return Err(Error::InvalidParameter(format!("dimension {k} for length {n}")));
        }
        let p = next_prime((n as u64).max(min_field));
        if p >= 1 << 31 {
            return Err(Error::InvalidParameter("field too large".into()));
        }
        Ok(SubCode { p, n, k })
    }

    pub fn distance(&self) -> usize {
        self.n - self.k + 1
    }

    fn add(&self, a: u64, b: u64) -> u64 {
        (a + b) % self.p
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.p - b) % self.p
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        a * b % self.p
    }

    fn inv(&self, a: u64) -> u64 {
        let (mut base, mut e, mut acc) = (a % self.p, self.p - 2, 1u64);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    fn eval(&self, f: &Poly, x: u64) -> u64 {
        f.iter().rev().fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    fn pmul(&self, a: &Poly, b: &Poly) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &x) in a.iter().enumerate() {
            for (j, &y) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(x, y));
            }
        }
        trim(out)
    }

    fn padd(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = vec![0; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0));
        }
        trim(out)
    }

    fn psub(&self, a: &Poly, b: &Poly) -> Poly {
        let mut out = vec![0; a.len().max(b.len())];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.sub(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0));
        }
        trim(out)
    }

    fn divrem(&self, a: &Poly, b: &Poly) -> (Poly, Poly) {
        let b = trim(b.clone());
        let mut r = trim(a.clone());
        if r.len() < b.len() {
            return (Vec::new(), r);
        }
        let lead_inv = self.inv(*b.last().expect("nonzero divisor"));
        let mut q = vec![0; r.len() - b.len() + 1];
        while r.len() >= b.len() && !r.is_empty() {
            let shift = r.len() - b.len();
            let c = self.mul(*r.last().unwrap(), lead_inv);
            q[shift] = c;
            for (i, &bi) in b.iter().enumerate() {
                r[shift + i] = self.sub(r[shift + i], self.mul(c, bi));
            }
            r = trim(r);
        }
        (trim(q), r)
    }

    fn interpolate(&self, xs: &[u64], ys: &[u64]) -> Poly {
        let mut out: Poly = Vec::new();
        for (i, (&xi, &yi)) in xs.iter().zip(ys).enumerate() {
            if yi == 0 {
                continue;
            }
            let mut basis: Poly = vec![1];
            let mut denom = 1;
            for (j, &xj) in xs.iter().enumerate() {
                if i != j {
                    basis = self.pmul(&basis, &vec![self.sub(0, xj), 1]);
                    denom = self.mul(denom, self.sub(xi, xj));
                }
            }
            let c = self.mul(yi, self.inv(denom));
            let scaled: Poly = basis.iter().map(|&b| self.mul(b, c)).collect();
            out = self.padd(&out, &scaled);
        }
        trim(out)
    }

    pub fn encode(&self, msg: &[u64]) -> Result<Vec<u64>> {
        if msg.len() != self.k {
            return Err(Error::InvalidParameter(format!(
                "message length {} != k = {}",
                msg.len(),
                self.k
            )));
        }
        if let Some(&s) = msg.iter().find(|&&s| s >= self.p) {
            return Err(Error::SymbolOutOfAlphabet {
                symbol: s as usize,
                size: self.p as usize,
            });
        }
        Ok((0..self.n as u64).map(|x| self.eval(&msg.to_vec(), x)).collect())
    }

    /// Gao decoding on the unerased positions. Succeeds whenever
    /// e + 2t < n − k + 1.
    pub fn decode(&self, word: &[Option<u64>]) -> Result<Vec<u64>> {
        if word.len() != self.n {
            return Err(Error::InvalidParameter(format!(
                "word length {} != n = {}",
                word.len(),
                self.n
            )));
        }
        let (xs, ys): (Vec<u64>, Vec<u64>) = word
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|y| (i as u64, y % self.p)))
            .unzip();
        let m = xs.len();
        if m < self.k {
            return Err(Error::DecodeFailure(format!("{} erasures", self.n - m)));
        }
        let mut g0: Poly = vec![1];
        for &x in &xs {
            g0 = self.pmul(&g0, &vec![self.sub(0, x), 1]);
        }
        let g1 = self.interpolate(&xs, &ys);
        // partial extended Euclid on (g0, g1)
        let (mut r0, mut r1) = (g0, g1);
        let (mut v0, mut v1): (Poly, Poly) = (Vec::new(), vec![1]);
        while 2 * deg(&r1) >= (m + self.k) as isize {
            let (q, r) = self.divrem(&r0, &r1);
            let v = self.psub(&v0, &self.pmul(&q, &v1));
            r0 = std::mem::replace(&mut r1, r);
            v0 = std::mem::replace(&mut v1, v);
        }
        if v1.is_empty() {
            return Err(Error::DecodeFailure("degenerate locator".into()));
        }
        let (f, rem) = self.divrem(&r1, &v1);
        if !rem.is_empty() || f.len() > self.k {
            return Err(Error::DecodeFailure("too many errors".into()));
        }
        let mut msg = f;
        msg.resize(self.k, 0);
        let errs = xs.iter().zip(&ys).filter(|(&x, &y)| self.eval(&msg, x) != y).count();
        if 2 * errs + self.k > m {
            return Err(Error::DecodeFailure("too many errors".into()));
        }
        Ok(msg)
    }
}
