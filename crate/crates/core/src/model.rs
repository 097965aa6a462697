//! Polynomial potentials, the polynomial exponent of the asymptotic (WKB)
//! tail and the parity channel.
//!
//! The potential is `V(x) = g_1 x^2 + g_2 x^4 + ... + g_{2q+1} x^{4q+2}` and
//! bound states are sought in the form
//!
//! ```text
//! psi(x) = exp(-P(x)) * sum_n h_n x^(2n+p),    P(x) = sum_k f_k x^(2k+2) / (2k+2).
//! ```
//!
//! Matching `[P'(x)]^2` against the `q+1` dominant couplings fixes the tail
//! coefficients `f_0..f_q`; the subdominant couplings are then outputs of the
//! quasi-exact construction.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::WaveVector;

/// Parity (or, after relabeling, angular momentum `ell = p - 1`) channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParityChannel {
    p: f64,
}

impl ParityChannel {
    /// Physical parity, `p` must be 0 (even) or 1 (odd).
    pub fn physical(p: f64) -> Result<Self> {
        if p == 0.0 || p == 1.0 {
            Ok(Self { p })
        } else {
            Err(Error::Domain(format!("physical parity must be 0 or 1, got {p}")))
        }
    }

    /// Real continuation of the channel used by large-`ell` expansions.
    pub fn large_ell(p: f64) -> Result<Self> {
        if p > 0.0 && p.is_finite() {
            Ok(Self { p })
        } else {
            Err(Error::Domain(format!("large-ell channel needs finite p > 0, got {p}")))
        }
    }

    pub fn even() -> Self {
        Self { p: 0.0 }
    }

    pub fn odd() -> Self {
        Self { p: 1.0 }
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn ell(&self) -> f64 {
        self.p - 1.0
    }
}

/// Coefficients `f_0..f_q` of the exponent polynomial `P(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WkbTail {
    f: Vec<f64>,
}

impl WkbTail {
    /// `f` holds `f_0..f_q`; the leading coefficient must be positive.
    pub fn new(f: Vec<f64>) -> Result<Self> {
        match f.last() {
            None => Err(Error::Contract("tail needs at least f_0".into())),
            Some(&lead) if !(lead > 0.0) => Err(Error::Domain(format!(
                "leading tail coefficient f_q must be positive, got {lead}"
            ))),
            Some(_) if f.iter().any(|v| !v.is_finite()) => {
                Err(Error::Domain("tail coefficients must be finite".into()))
            }
            Some(_) => Ok(Self { f }),
        }
    }

    pub fn q(&self) -> usize {
        self.f.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.f
    }

    /// `f_k`, zero beyond `q`.
    pub fn f(&self, k: usize) -> f64 {
        self.f.get(k).copied().unwrap_or(0.0)
    }

    pub fn leading(&self) -> f64 {
        self.f[self.q()]
    }

    /// `sum_{j=0}^{k-1} f_j f_{k-1-j}`, the coefficient of `x^{2k}` in `[P'(x)]^2`.
    pub fn square_coeff(&self, k: usize) -> f64 {
        (0..k).map(|j| self.f(j) * self.f(k - 1 - j)).sum()
    }

    /// `P(x)`.
    pub fn exponent(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut pow = x2;
        let mut acc = 0.0;
        for (k, fk) in self.f.iter().enumerate() {
            acc += fk * pow / (2 * k + 2) as f64;
            pow *= x2;
        }
        acc
    }

    /// `P'(x) = sum_k f_k x^(2k+1)`.
    pub fn exponent_d1(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut pow = x;
        let mut acc = 0.0;
        for fk in &self.f {
            acc += fk * pow;
            pow *= x2;
        }
        acc
    }

    /// `P''(x) = sum_k (2k+1) f_k x^(2k)`.
    pub fn exponent_d2(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut pow = 1.0;
        let mut acc = 0.0;
        for (k, fk) in self.f.iter().enumerate() {
            acc += (2 * k + 1) as f64 * fk * pow;
            pow *= x2;
        }
        acc
    }
}

/// Potential given by its couplings `g_1..g_{2q+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    q: usize,
    couplings: Vec<f64>,
}

impl PotentialSpec {
    /// `couplings[i]` is `g_{i+1}`, so exactly `2q+1` values are expected.
    pub fn new(q: usize, couplings: Vec<f64>) -> Result<Self> {
        if couplings.len() != 2 * q + 1 {
            return Err(Error::Contract(format!(
                "q = {q} needs {} couplings g_1..g_{}, got {}",
                2 * q + 1,
                2 * q + 1,
                couplings.len()
            )));
        }
        if !(couplings[2 * q] > 0.0) {
            return Err(Error::Domain(format!(
                "leading coupling g_{} must be positive, got {}",
                2 * q + 1,
                couplings[2 * q]
            )));
        }
        Ok(Self { q, couplings })
    }

    /// Builds a spec from the dominant couplings `g_{q+1}..g_{2q+1}` only, the
    /// subdominant ones set to zero.
    pub fn from_dominant(q: usize, dominant: &[f64]) -> Result<Self> {
        if dominant.len() != q + 1 {
            return Err(Error::Contract(format!(
                "q = {q} needs {} dominant couplings, got {}",
                q + 1,
                dominant.len()
            )));
        }
        let mut couplings = vec![0.0; 2 * q + 1];
        couplings[q..].copy_from_slice(dominant);
        Self::new(q, couplings)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    /// `g_k` for `k = 1..=2q+1`.
    pub fn g(&self, k: usize) -> f64 {
        assert!((1..=2 * self.q + 1).contains(&k), "coupling index {k} out of range");
        self.couplings[k - 1]
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    /// `g_{q+1}..g_{2q+1}`.
    pub fn dominant(&self) -> &[f64] {
        &self.couplings[self.q..]
    }

    pub fn potential(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut pow = x2;
        let mut acc = 0.0;
        for g in &self.couplings {
            acc += g * pow;
            pow *= x2;
        }
        acc
    }
}

/// Solves the coefficient matching `g_{s+1} = sum_{j+k=s} f_j f_k`,
/// `s = q..2q`, for the tail, descending from `f_q = sqrt(g_{2q+1})`.
pub fn solve_wkb_tail(spec: &PotentialSpec) -> Result<WkbTail> {
    let q = spec.q();
    let lead = spec.g(2 * q + 1);
    if !(lead > 0.0) {
        return Err(Error::Domain(format!("g_{} must be positive", 2 * q + 1)));
    }
    let mut f = vec![0.0; q + 1];
    f[q] = lead.sqrt();
    for m in 1..=q {
        let cross: f64 = (1..m).map(|j| f[q - j] * f[q - m + j]).sum();
        f[q - m] = (spec.g(2 * q + 1 - m) - cross) / (2.0 * f[q]);
    }
    WkbTail::new(f)
}

/// Dominant couplings `(g_{q+1}, ..., g_{2q+1})` generated by a tail.
pub fn tail_to_dominant(tail: &WkbTail) -> Vec<f64> {
    let q = tail.q();
    (q..=2 * q)
        .map(|s| {
            let lo = s.saturating_sub(q);
            (lo..=s.min(q)).map(|j| tail.f(j) * tail.f(s - j)).sum()
        })
        .collect()
}

/// The intermediate coupling `g_q` that makes the recurrence truncate after
/// degree `N`:
/// `g_q = -f_q (4N + 2q + 2p + 1) + sum_{j=0}^{q-1} f_j f_{q-1-j}`.
///
/// At `q = 0` this is `-f_0 (4N + 2p + 1)`, i.e. minus the harmonic energy.
pub fn truncation_coupling(tail: &WkbTail, n: usize, channel: ParityChannel) -> f64 {
    let q = tail.q();
    let p = channel.p();
    -tail.leading() * (4.0 * n as f64 + 2.0 * q as f64 + 2.0 * p + 1.0) + tail.square_coeff(q)
}

/// A tail plus truncation degree and channel; `g_q` is fixed on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiExactModel {
    tail: WkbTail,
    n: usize,
    channel: ParityChannel,
    g_q: f64,
}

impl QuasiExactModel {
    pub fn new(tail: WkbTail, n: usize, channel: ParityChannel) -> Self {
        let g_q = truncation_coupling(&tail, n, channel);
        Self { tail, n, channel, g_q }
    }

    pub fn tail(&self) -> &WkbTail {
        &self.tail
    }

    pub fn q(&self) -> usize {
        self.tail.q()
    }

    /// Truncation degree `N`; the wave polynomial has `N+1` coefficients.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn channel(&self) -> ParityChannel {
        self.channel
    }

    pub fn p(&self) -> f64 {
        self.channel.p()
    }

    pub fn g_q(&self) -> f64 {
        self.g_q
    }

    /// Full coupling list `g_1..g_{2q+1}` for the given eigenplet
    /// `(g_0, ..., g_{q-1})`; the entry `g_0` is not part of the potential.
    ///
    /// At `q = 0` the plet is empty and `g_1 = f_0^2`.
    pub fn couplings(&self, plet: &[f64]) -> Result<Vec<f64>> {
        let q = self.q();
        if plet.len() != q {
            return Err(Error::Contract(format!(
                "eigenplet must have {q} entries, got {}",
                plet.len()
            )));
        }
        let mut g = vec![0.0; 2 * q + 1];
        if q >= 1 {
            g[..q - 1].copy_from_slice(&plet[1..]);
            g[q - 1] = self.g_q;
        }
        for (i, v) in tail_to_dominant(&self.tail).into_iter().enumerate() {
            g[q + i] = v;
        }
        Ok(g)
    }

    /// Energy of a state with the given eigenplet, `E = -g_0`. For `q = 0`
    /// the energy is carried by the truncation coupling.
    pub fn energy(&self, plet: &[f64]) -> f64 {
        match plet.first() {
            Some(g0) if self.q() > 0 => -g0,
            _ => -self.g_q,
        }
    }

    pub fn potential(&self, plet: &[f64], x: f64) -> Result<f64> {
        let g = self.couplings(plet)?;
        Ok(PotentialSpec { q: self.q(), couplings: g }.potential(x))
    }
}

/// `x^e`, using integer powers when `e` is integral so negative `x` works
/// in the physical channels.
pub(crate) fn parity_pow(x: f64, e: f64) -> f64 {
    if e.fract() == 0.0 && e.abs() < i32::MAX as f64 {
        x.powi(e as i32)
    } else {
        x.powf(e)
    }
}

/// `psi(x) = exp(-P(x)) sum_{n=0}^N h_n x^(2n+p)`.
///
/// For non-integral `p` the power is only defined for `x >= 0`.
pub fn evaluate_wavefunction(model: &QuasiExactModel, h: &WaveVector, x: f64) -> f64 {
    let p = model.p();
    let poly: f64 = h
        .coeffs()
        .iter()
        .enumerate()
        .map(|(n, hn)| hn * parity_pow(x, 2.0 * n as f64 + p))
        .sum();
    (-model.tail().exponent(x)).exp() * poly
}
