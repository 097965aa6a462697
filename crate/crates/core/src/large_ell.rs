//! Large angular momentum (`p = ell + 1/2 -> infinity`) as a perturbation
//! problem.
//!
//! Two schemes are provided.
//!
//! * [`split_linear_p`]: every matrix element is affine in `p`, so
//!   `H = C + p D = (2p + c) [D/2 + lambda (C - c D/2)]` with
//!   `lambda = 1/(2p + c)`. Plets scale by `2p + c`.
//! * [`rescale_decadic`]: the `q = N = 2` decadic oscillator with
//!   `f = (f_0, f_1, 1)` after the energy and coupling shifts
//!   `E = 2p (f_0 + E')`, `g_1 = f_0^2 - 2p f_1 - 2p F'` and the diagonal
//!   similarity `diag(sigma^-(r+1) / 4p) (.) diag(1, sigma, sigma^2)` with
//!   `sigma = p^(-1/3)`. The result is a cubic pencil in `sigma` whose zero
//!   order has the two states `(1, 1)` and `(-2, -2)`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ParityChannel, QuasiExactModel, WkbTail};
use crate::perturbation::PerturbationProblem;
use crate::system::{element, EigenPlet, MagyariSystem, ShiftBasis, WaveVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Linear,
    Decadic,
}

/// A physical system at large `p` recast as `sum_k lambda^k H^(k)`.
#[derive(Debug, Clone)]
pub struct LargePExpansion {
    pub scheme: Scheme,
    pub p: f64,
    pub shift_c: f64,
    /// `1/(2p + c)` for the linear scheme, `sigma = p^(-1/3)` for the decadic one.
    pub lambda: f64,
    pub problem: PerturbationProblem,
    /// The physical model the expansion describes.
    pub model: QuasiExactModel,
}

/// Exponent of `p` in `sigma = p^SIGMA_EXPONENT` for the decadic scheme.
pub const SIGMA_EXPONENT: f64 = -1.0 / 3.0;

/// Linear split of a large-`p` system into `H^(0) = D/2` and
/// `H^(1) = C - c H^(0)`.
pub fn split_linear_p(system: &MagyariSystem, shift_c: f64) -> Result<LargePExpansion> {
    let model = system.model().clone();
    let p = model.p();
    let scale = 2.0 * p + shift_c;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::Domain(format!("2p + c must be positive, got {scale}")));
    }
    let shifts = *system.shifts();
    let (rows, cols) = (shifts.rows(), shifts.cols());
    let h0 = DMatrix::from_fn(rows, cols, |n, m| element(&model, n, m).slope / 2.0);
    let constant = DMatrix::from_fn(rows, cols, |n, m| element(&model, n, m).constant);
    let h1 = constant - &h0 * shift_c;
    Ok(LargePExpansion {
        scheme: Scheme::Linear,
        p,
        shift_c,
        lambda: 1.0 / scale,
        problem: PerturbationProblem::new(shifts, vec![h0, h1])?,
        model,
    })
}

fn entries(pairs: &[((usize, usize), f64)]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 3);
    for &((r, c), v) in pairs {
        m[(r, c)] = v;
    }
    m
}

/// The decadic `sigma`-expansion with `sigma = p^(-1/3)`; needs `p > 1`.
pub fn rescale_decadic(f0: f64, f1: f64, p: f64) -> Result<LargePExpansion> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::Domain(format!("decadic rescaling needs p > 1, got {p}")));
    }
    if !(f0.is_finite() && f1.is_finite()) {
        return Err(Error::Domain("f_0 and f_1 must be finite".into()));
    }
    let h0 = entries(&[((0, 1), 1.0), ((1, 2), 2.0), ((2, 0), 2.0), ((3, 1), 1.0)]);
    let h1 = entries(&[((1, 0), 3.0), ((2, 1), 7.0), ((3, 2), 11.0)]) * (-f1 / 4.0);
    let h2 = entries(&[((0, 0), 1.0), ((1, 1), 5.0), ((2, 2), 9.0)]) * (-f0 / 4.0);
    let h3 = entries(&[((0, 1), 0.5), ((1, 2), 3.0)]);
    let shifts = ShiftBasis::new(2, 2);
    let tail = WkbTail::new(vec![f0, f1, 1.0])?;
    Ok(LargePExpansion {
        scheme: Scheme::Decadic,
        p,
        shift_c: 0.0,
        lambda: p.powf(SIGMA_EXPONENT),
        problem: PerturbationProblem::new(shifts, vec![h0, h1, h2, h3])?,
        model: QuasiExactModel::new(tail, 2, ParityChannel::large_ell(p)?),
    })
}

impl LargePExpansion {
    /// Row and column similarity factors `(T, S)` with
    /// `T (H_phys - S_phys) S = sum_k sigma^k H^(k) - S_scaled`; decadic only.
    pub fn scaling(&self) -> Option<(DMatrix<f64>, DMatrix<f64>)> {
        (self.scheme == Scheme::Decadic).then(|| {
            let (sigma, p) = (self.lambda, self.p);
            let t = DMatrix::from_fn(4, 4, |r, c| if r == c { sigma.powi(-(r as i32 + 1)) / (4.0 * p) } else { 0.0 });
            let s = DMatrix::from_fn(3, 3, |r, c| if r == c { sigma.powi(r as i32) } else { 0.0 });
            (t, s)
        })
    }

    fn tail_f(&self) -> (f64, f64) {
        let tail = self.model.tail();
        (tail.f(0), tail.f(1))
    }

    /// Maps a scaled-problem solution to the physical plet and wave.
    pub fn recover_physical(&self, plet: &EigenPlet, wave: &WaveVector) -> Result<(EigenPlet, WaveVector)> {
        self.check_len(plet, wave)?;
        match self.scheme {
            Scheme::Linear => {
                let factor = 2.0 * self.p + self.shift_c;
                Ok((EigenPlet::new(plet.values().iter().map(|g| g * factor).collect()), wave.clone()))
            }
            Scheme::Decadic => {
                let (sigma, p) = (self.lambda, self.p);
                let (f0, f1) = self.tail_f();
                let (s, t) = (plet.values()[0], plet.values()[1]);
                let e_bar = -2.0 * sigma * s;
                let f_bar = -2.0 * sigma * sigma * t;
                let g0 = -2.0 * p * (f0 + e_bar);
                let g1 = f0 * f0 - 2.0 * p * f1 - 2.0 * p * f_bar;
                let h: Vec<f64> = wave.coeffs().iter().enumerate().map(|(m, h)| h * sigma.powi(m as i32)).collect();
                Ok((EigenPlet::new(vec![g0, g1]), WaveVector::normalized(&h)?))
            }
        }
    }

    /// Inverse of [`recover_physical`](Self::recover_physical).
    pub fn to_scaled(&self, plet: &EigenPlet, wave: &WaveVector) -> Result<(EigenPlet, WaveVector)> {
        self.check_len(plet, wave)?;
        match self.scheme {
            Scheme::Linear => {
                let factor = 2.0 * self.p + self.shift_c;
                Ok((EigenPlet::new(plet.values().iter().map(|g| g / factor).collect()), wave.clone()))
            }
            Scheme::Decadic => {
                let (sigma, p) = (self.lambda, self.p);
                let (f0, f1) = self.tail_f();
                let (g0, g1) = (plet.values()[0], plet.values()[1]);
                let e_bar = -g0 / (2.0 * p) - f0;
                let f_bar = (f0 * f0 - 2.0 * p * f1 - g1) / (2.0 * p);
                let s = -e_bar / (2.0 * sigma);
                let t = -f_bar / (2.0 * sigma * sigma);
                let h: Vec<f64> = wave.coeffs().iter().enumerate().map(|(m, h)| h / sigma.powi(m as i32)).collect();
                Ok((EigenPlet::new(vec![s, t]), WaveVector::normalized(&h)?))
            }
        }
    }

    fn check_len(&self, plet: &EigenPlet, wave: &WaveVector) -> Result<()> {
        let shifts = self.problem.shifts();
        if plet.len() != shifts.q() || wave.n() != shifts.n() {
            return Err(Error::Contract(format!(
                "expected a plet of length {} and a wave of degree {}, got {} and {}",
                shifts.q(),
                shifts.n(),
                plet.len(),
                wave.n()
            )));
        }
        Ok(())
    }
}
