//! The finite non-square Magyari system `[H - S(g_0, ..., g_{q-1})] h = 0`.
//!
//! Inserting the Taylor ansatz into the Schrodinger equation gives a banded
//! recurrence. Row `n` couples `h_{n-q}, ..., h_{n+1}`:
//!
//! ```text
//! H[n][n+1] = C_n = (2n+2)(2n+2p+1)
//! H[n][n-k] = -f_k (4n + 2p + 1 - 2k) + sum_{j<k} f_j f_{k-1-j}      (0 <= k < q)
//! H[n][n-q] = 4 f_q (N + q - n)                                      (g_q substituted)
//! ```
//!
//! and the eigenplet enters through `S = sum_xi g_{xi-1} J_xi`, where `J_xi`
//! carries ones at `(m + xi - 1, m)`. Truncating at degree `N` leaves
//! `N + q` rows and `N + 1` columns.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::QuasiExactModel;

/// The one-diagonal 0/1 matrices `J_1..J_q` of shape `(N+q) x (N+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShiftBasis {
    q: usize,
    n: usize,
}

impl ShiftBasis {
    pub fn new(q: usize, n: usize) -> Self {
        Self { q, n }
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> usize {
        self.n + self.q
    }

    pub fn cols(&self) -> usize {
        self.n + 1
    }

    /// Row index of the unit entry of `J_xi` in column `m`.
    pub fn row_of(&self, xi: usize, m: usize) -> usize {
        debug_assert!((1..=self.q).contains(&xi));
        m + xi - 1
    }

    /// Dense copy of `J_xi`, `xi = 1..=q`.
    pub fn dense(&self, xi: usize) -> DMatrix<f64> {
        assert!((1..=self.q).contains(&xi), "shift index {xi} out of 1..={}", self.q);
        let mut j = DMatrix::zeros(self.rows(), self.cols());
        for m in 0..self.cols() {
            j[(self.row_of(xi, m), m)] = 1.0;
        }
        j
    }

    /// `J_xi v` for a column vector of length `N+1`.
    pub fn apply(&self, xi: usize, v: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.rows());
        for m in 0..self.cols() {
            out[self.row_of(xi, m)] = v[m];
        }
        out
    }

    /// `w J_xi` for a row vector of length `N+q`, returned as a column.
    pub fn apply_left(&self, xi: usize, w: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(self.cols(), |m, _| w[self.row_of(xi, m)])
    }

    /// `S(plet) = sum_xi g_{xi-1} J_xi`.
    pub fn combine(&self, plet: &[f64]) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.rows(), self.cols());
        for (i, g) in plet.iter().enumerate() {
            for m in 0..self.cols() {
                s[(self.row_of(i + 1, m), m)] += g;
            }
        }
        s
    }
}

/// Generalized eigenvalue `(g_0, ..., g_{q-1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EigenPlet {
    g: Vec<f64>,
}

impl EigenPlet {
    pub fn new(g: Vec<f64>) -> Self {
        Self { g }
    }

    pub fn zeros(q: usize) -> Self {
        Self { g: vec![0.0; q] }
    }

    pub fn len(&self) -> usize {
        self.g.len()
    }

    pub fn is_empty(&self) -> bool {
        self.g.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.g
    }

    /// `E = -g_0`, absent for `q = 0`.
    pub fn energy(&self) -> Option<f64> {
        self.g.first().map(|g0| -g0)
    }

    pub fn max_abs_diff(&self, other: &EigenPlet) -> f64 {
        self.g.iter().zip(&other.g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

impl From<Vec<f64>> for EigenPlet {
    fn from(g: Vec<f64>) -> Self {
        Self::new(g)
    }
}

/// Taylor coefficients `h_0..h_N` normalized to `h_N = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WaveVector {
    h: Vec<f64>,
}

impl WaveVector {
    pub fn new(h: Vec<f64>) -> Result<Self> {
        match h.last() {
            Some(&last) if last == 1.0 => Ok(Self { h }),
            Some(&last) => Err(Error::Contract(format!("wave vector must end in h_N = 1, got {last}"))),
            None => Err(Error::Contract("wave vector is empty".into())),
        }
    }

    /// Rescales an arbitrary vector so that its last entry is one.
    pub fn normalized(v: &[f64]) -> Result<Self> {
        let last = *v.last().ok_or_else(|| Error::Contract("wave vector is empty".into()))?;
        if last == 0.0 || !last.is_finite() {
            return Err(Error::Domain("cannot normalize a wave vector with h_N = 0".into()));
        }
        let mut h: Vec<f64> = v.iter().map(|x| x / last).collect();
        *h.last_mut().unwrap() = 1.0;
        Ok(Self { h })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.h
    }

    pub fn n(&self) -> usize {
        self.h.len() - 1
    }

    pub fn to_dvector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.h)
    }
}

impl TryFrom<Vec<f64>> for WaveVector {
    type Error = Error;

    fn try_from(h: Vec<f64>) -> Result<Self> {
        Self::new(h)
    }
}

impl From<WaveVector> for Vec<f64> {
    fn from(w: WaveVector) -> Self {
        w.h
    }
}

/// A plet-independent matrix together with its shift basis: the generic
/// non-square eigenproblem `[H - S(g)] h = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pencil {
    pub matrix: DMatrix<f64>,
    pub shifts: ShiftBasis,
}

impl Pencil {
    pub fn new(matrix: DMatrix<f64>, shifts: ShiftBasis) -> Result<Self> {
        if matrix.shape() != (shifts.rows(), shifts.cols()) {
            return Err(Error::Contract(format!(
                "matrix shape {:?} does not match ({}, {})",
                matrix.shape(),
                shifts.rows(),
                shifts.cols()
            )));
        }
        Ok(Self { matrix, shifts })
    }

    pub fn q(&self) -> usize {
        self.shifts.q()
    }

    pub fn n(&self) -> usize {
        self.shifts.n()
    }

    /// `H - S(plet)`.
    pub fn apply(&self, plet: &[f64]) -> Result<DMatrix<f64>> {
        if plet.len() != self.q() {
            return Err(Error::Contract(format!(
                "eigenplet has {} entries, system needs {}",
                plet.len(),
                self.q()
            )));
        }
        Ok(&self.matrix - self.shifts.combine(plet))
    }

    /// `(H - S(plet)) h` without forming `S`.
    pub fn residual_raw(&self, plet: &[f64], h: &DVector<f64>) -> DVector<f64> {
        let mut r = &self.matrix * h;
        for (i, g) in plet.iter().enumerate() {
            for m in 0..self.shifts.cols() {
                r[self.shifts.row_of(i + 1, m)] -= g * h[m];
            }
        }
        r
    }

    /// `max_i |r_i| / max(1, max_i sum_j |A_ij h_j|)` with `A = H - S(plet)`:
    /// the residual relative to the size of the terms that cancel in it.
    pub fn scaled_residual(&self, plet: &[f64], h: &DVector<f64>) -> f64 {
        let r = self.residual_raw(plet, h);
        let mut mass = DVector::<f64>::zeros(self.shifts.rows());
        for m in 0..self.shifts.cols() {
            let hm = h[m].abs();
            for n in 0..self.shifts.rows() {
                mass[n] += self.matrix[(n, m)].abs() * hm;
            }
            for (i, g) in plet.iter().enumerate() {
                mass[self.shifts.row_of(i + 1, m)] += g.abs() * hm;
            }
        }
        r.amax() / mass.max().max(1.0)
    }

    /// Gershgorin-type bound `max_i sum_j |H_ij|`.
    pub fn row_norm(&self) -> f64 {
        self.matrix.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn residual(&self, plet: &EigenPlet, wave: &WaveVector) -> Result<Vec<f64>> {
        if plet.len() != self.q() || wave.coeffs().len() != self.shifts.cols() {
            return Err(Error::Contract("plet or wave does not fit the system".into()));
        }
        Ok(self.residual_raw(plet.values(), &wave.to_dvector()).iter().copied().collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.amax()
    }
}

/// An entry `constant + slope * p` of the recurrence matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Affine {
    pub constant: f64,
    pub slope: f64,
}

impl Affine {
    pub fn at(&self, p: f64) -> f64 {
        self.constant + self.slope * p
    }
}

/// Plet-independent matrix element of the untruncated recurrence at row `n`,
/// column `m`, as an affine function of the channel parameter `p`.
pub fn element(model: &QuasiExactModel, n: usize, m: usize) -> Affine {
    let tail = model.tail();
    let q = model.q();
    let nf = n as f64;
    if m == n + 1 {
        let c = 2.0 * nf + 2.0;
        return Affine { constant: c * (2.0 * nf + 1.0), slope: 2.0 * c };
    }
    if m > n || n - m > q {
        return Affine::default();
    }
    let k = n - m;
    if k == q {
        let nn = model.n() as f64;
        Affine { constant: 4.0 * tail.leading() * (nn + q as f64 - nf), slope: 0.0 }
    } else {
        let fk = tail.f(k);
        Affine {
            constant: -fk * (4.0 * nf + 1.0 - 2.0 * k as f64) + tail.square_coeff(k),
            slope: -2.0 * fk,
        }
    }
}

/// The truncated `(N+q) x (N+1)` system of a quasi-exact model.
#[derive(Debug, Clone, PartialEq)]
pub struct MagyariSystem {
    model: QuasiExactModel,
    pencil: Pencil,
}

impl MagyariSystem {
    pub fn model(&self) -> &QuasiExactModel {
        &self.model
    }

    pub fn pencil(&self) -> &Pencil {
        &self.pencil
    }

    /// The plet-independent matrix `H`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.pencil.matrix
    }

    pub fn shifts(&self) -> &ShiftBasis {
        &self.pencil.shifts
    }

    pub fn q(&self) -> usize {
        self.model.q()
    }

    pub fn n(&self) -> usize {
        self.model.n()
    }
}

pub fn build_system(model: &QuasiExactModel) -> MagyariSystem {
    let shifts = ShiftBasis::new(model.q(), model.n());
    let p = model.p();
    let matrix = DMatrix::from_fn(shifts.rows(), shifts.cols(), |n, m| element(model, n, m).at(p));
    MagyariSystem { model: model.clone(), pencil: Pencil { matrix, shifts } }
}

/// `H - sum_xi g_{xi-1} J_xi`.
pub fn apply(system: &MagyariSystem, plet: &EigenPlet) -> Result<DMatrix<f64>> {
    system.pencil.apply(plet.values())
}

/// `(H - S) h`, one entry per row.
pub fn residual(system: &MagyariSystem, plet: &EigenPlet, wave: &WaveVector) -> Result<Vec<f64>> {
    system.pencil.residual(plet, wave)
}
