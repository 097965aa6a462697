//! Non-perturbative solutions of the Magyari system.
//!
//! Closed forms cover the harmonic oscillator (`q = 0`), the lowest
//! truncation `N = 0` at any `q`, and the sextic oscillator (`q = 1`) where
//! the system is an ordinary square eigenproblem. Everything else goes
//! through a multistart Newton iteration on the bilinear system
//! `r(g, h) = (H - sum_xi g_{xi-1} J_xi) h = 0` with `h_N = 1`.

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{ParityChannel, QuasiExactModel, WkbTail};
use crate::system::{build_system, EigenPlet, MagyariSystem, Pencil, WaveVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    ClosedForm,
    Newton,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QesSolution {
    pub plet: EigenPlet,
    pub wave: WaveVector,
    /// Scaled residual of `(H - S) h`, see [`Pencil::scaled_residual`].
    pub residual_norm: f64,
    pub classification: Classification,
    /// Set when the Newton Jacobian is numerically singular at the root.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub singular_jacobian: bool,
}

/// Solutions plus whatever went wrong along the way.
#[derive(Debug, Clone, Default)]
pub struct SolveReport {
    pub solutions: Vec<QesSolution>,
    pub diagnostics: Vec<String>,
}

/// Residual threshold for accepting a solution.
pub const ACCEPT_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct NewtonOptions {
    pub starts: usize,
    pub seed: u64,
    /// Half-width of the start box; derived from the system when `None`.
    pub radius: Option<f64>,
    pub max_iter: usize,
    pub accept_tol: f64,
    /// Roots closer than `dedup_tol * max(1, |x|)` are merged.
    pub dedup_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { starts: 64, seed: 0, radius: None, max_iter: 100, accept_tol: ACCEPT_TOL, dedup_tol: 1e-8 }
    }
}

impl NewtonOptions {
    pub fn with_starts(starts: usize, seed: u64) -> Self {
        Self { starts, seed, ..Self::default() }
    }
}

fn accepted(pencil: &Pencil, plet: Vec<f64>, wave: WaveVector, classification: Classification) -> QesSolution {
    let residual_norm = pencil.scaled_residual(&plet, &wave.to_dvector());
    QesSolution { plet: EigenPlet::new(plet), wave, residual_norm, classification, singular_jacobian: false }
}

/// The harmonic level `m`: `E = f_0 (4m + 2p + 1)`, wave from the two-term
/// recurrence `h_n = -C_n h_{n+1} / B_n` down from `h_m = 1`.
pub fn solve_harmonic(f0: f64, channel: ParityChannel, m: usize) -> Result<QesSolution> {
    let tail = WkbTail::new(vec![f0])?;
    let model = QuasiExactModel::new(tail, m, channel);
    let system = build_system(&model);
    let p = channel.p();
    let mut h = vec![0.0; m + 1];
    h[m] = 1.0;
    for n in (0..m).rev() {
        let c = (2.0 * n as f64 + 2.0) * (2.0 * n as f64 + 2.0 * p + 1.0);
        let b = 4.0 * f0 * (m - n) as f64;
        h[n] = -c * h[n + 1] / b;
    }
    Ok(accepted(system.pencil(), vec![], WaveVector::new(h)?, Classification::ClosedForm))
}

/// Real eigenpairs of the square sextic system (`q = 1`, `f_1 = 1`).
///
/// Eigenvalues come from a Schur decomposition; each eigenvector is the
/// numerical null vector of `H - g_0`, normalized to `h_N = 1` and polished
/// by a few Newton steps.
pub fn solve_sextic(f0: f64, n: usize, channel: ParityChannel) -> Result<SolveReport> {
    let model = QuasiExactModel::new(WkbTail::new(vec![f0, 1.0])?, n, channel);
    let system = build_system(&model);
    let h = system.matrix();
    let mut report = SolveReport::default();
    let scale = h.amax().max(1.0);
    let mut eigen: Vec<f64> = Vec::new();
    for z in h.complex_eigenvalues().iter() {
        if z.im.abs() <= 1e-8 * scale {
            eigen.push(z.re);
        }
    }
    let dropped = n + 1 - eigen.len();
    if dropped > 0 {
        report.diagnostics.push(format!("{dropped} complex eigenvalue(s) dropped"));
    }
    eigen.sort_by(f64::total_cmp);
    let opts = NewtonOptions::default();
    for g0 in eigen {
        let shifted = h - DMatrix::identity(n + 1, n + 1) * g0;
        let svd = linalg::sorted_svd(&shifted);
        let v = svd.v.column(n);
        let start = match WaveVector::normalized(v.as_slice()) {
            Ok(w) => w,
            Err(_) => {
                report.diagnostics.push(format!("eigenvalue {g0}: eigenvector has h_N = 0"));
                continue;
            }
        };
        match newton_from(system.pencil(), &[g0], start.coeffs(), &opts) {
            Some(mut sol) => {
                sol.classification = Classification::ClosedForm;
                report.solutions.push(sol);
            }
            None => report.diagnostics.push(format!("eigenvalue {g0}: polish failed")),
        }
    }
    Ok(report)
}

/// Eigenplet at `N = 0`: row `k` of the single-column system reads
/// `-f_k (2k + 2p + 1) + sum_{j<k} f_j f_{k-1-j} - g_k = 0`.
pub fn n0_plet(tail: &WkbTail, channel: ParityChannel) -> Vec<f64> {
    let p = channel.p();
    (0..tail.q())
        .map(|k| tail.square_coeff(k) - tail.f(k) * (2.0 * k as f64 + 2.0 * p + 1.0))
        .collect()
}

pub fn solve_n0(tail: &WkbTail, channel: ParityChannel) -> Result<QesSolution> {
    let model = QuasiExactModel::new(tail.clone(), 0, channel);
    let system = build_system(&model);
    Ok(accepted(system.pencil(), n0_plet(tail, channel), WaveVector::new(vec![1.0])?, Classification::ClosedForm))
}

/// Half-width of the plet start box: `1 + max_i sum_j |H_ij|`, which bounds
/// the eigenvalues in the square `q = 1` case.
pub fn default_radius(pencil: &Pencil) -> f64 {
    1.0 + pencil.row_norm()
}

pub fn solve_newton(system: &MagyariSystem, opts: &NewtonOptions) -> SolveReport {
    solve_pencil(system.pencil(), opts)
}

/// Least-squares wave of `H - S(plet)`, or with `balanced` of the
/// equilibrated `R (H - S(plet)) D` mapped back through `D`.
///
/// The pencils are strongly non-normal. Unscaled smallest singular vectors
/// steer Newton towards the outermost roots; equilibrated ones reach the
/// interior roots but wash out the spectrum where the diagonal vanishes.
fn least_squares_wave(pencil: &Pencil, plet: &[f64], balanced: bool) -> Option<Vec<f64>> {
    let a = pencil.apply(plet).ok()?;
    if !balanced {
        let svd = linalg::sorted_svd(&a);
        return Some(svd.v.column(pencil.n()).iter().copied().collect());
    }
    let (r, d) = linalg::equilibrate(&a);
    let scaled = DMatrix::from_diagonal(&r) * a * DMatrix::from_diagonal(&d);
    let svd = linalg::sorted_svd(&scaled);
    Some(svd.v.column(pencil.n()).iter().zip(d.iter()).map(|(v, s)| v * s).collect())
}

/// Multistart Newton on a generic pencil.
///
/// Start plets form a Latin hypercube sample of the box of half-width
/// `opts.radius` (default [`default_radius`]); each is paired with a
/// least-squares wave of `H - S(plet)`, alternating between the plain and the
/// equilibrated matrix.
pub fn solve_pencil(pencil: &Pencil, opts: &NewtonOptions) -> SolveReport {
    let q = pencil.q();
    let radius = opts.radius.unwrap_or_else(|| default_radius(pencil));
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let count = opts.starts.max(1);
    // Latin hypercube per wave family: every coordinate of the plain and of
    // the equilibrated starts is spread evenly over the box
    let mut starts = vec![vec![0.0; q]; count];
    for family in 0..2 {
        let members: Vec<usize> = (family..count).step_by(2).collect();
        for k in 0..q {
            let mut strata: Vec<usize> = (0..members.len()).collect();
            strata.shuffle(&mut rng);
            for (&i, &stratum) in members.iter().zip(&strata) {
                let u = (stratum as f64 + rng.random::<f64>()) / members.len() as f64;
                starts[i][k] = radius * (2.0 * u - 1.0);
            }
        }
    }
    let found: Vec<Option<QesSolution>> = starts
        .par_iter()
        .enumerate()
        .map(|(i, plet)| newton_from(pencil, plet, &least_squares_wave(pencil, plet, i % 2 == 1)?, opts))
        .collect();

    let mut report = SolveReport::default();
    let mut failures = 0usize;
    for sol in found {
        match sol {
            Some(sol) => merge(&mut report.solutions, sol, opts.dedup_tol),
            None => failures += 1,
        }
    }
    if report.solutions.is_empty() {
        report.diagnostics.push(format!("no start out of {} converged", opts.starts.max(1)));
    } else if failures > 0 {
        report.diagnostics.push(format!("{failures} of {} starts did not converge", opts.starts.max(1)));
    }
    for s in report.solutions.iter().filter(|s| s.singular_jacobian) {
        report.diagnostics.push(format!("singular Jacobian at plet {:?}", s.plet.values()));
    }
    report.solutions.sort_by(compare_solutions);
    report
}

fn unknowns(sol: &QesSolution) -> impl Iterator<Item = f64> + '_ {
    sol.plet.values().iter().chain(sol.wave.coeffs()).copied()
}

fn merge(set: &mut Vec<QesSolution>, sol: QesSolution, tol: f64) {
    let size = unknowns(&sol).fold(1.0f64, |m, v| m.max(v.abs()));
    for existing in set.iter_mut() {
        let dist = unknowns(existing)
            .zip(unknowns(&sol))
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        if dist <= tol * size {
            if sol.residual_norm < existing.residual_norm {
                *existing = sol;
            }
            return;
        }
    }
    set.push(sol);
}

fn compare_solutions(a: &QesSolution, b: &QesSolution) -> std::cmp::Ordering {
    unknowns(a)
        .zip(unknowns(b))
        .map(|(x, y)| x.total_cmp(&y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

/// Jacobian of `r(g, h_0..h_{N-1})`: `-J_xi h` for the plet columns and the
/// first `N` columns of `H - S` for the wave.
pub(crate) fn jacobian(pencil: &Pencil, plet: &[f64], h: &DVector<f64>) -> DMatrix<f64> {
    let (q, n) = (pencil.q(), pencil.n());
    let shifted = &pencil.matrix - pencil.shifts.combine(plet);
    let mut jac = DMatrix::zeros(n + q, n + q);
    for xi in 1..=q {
        jac.column_mut(xi - 1).copy_from(&(-pencil.shifts.apply(xi, h)));
    }
    for m in 0..n {
        jac.column_mut(q + m).copy_from(&shifted.column(m));
    }
    jac
}

/// Jacobian of the bordered system `[(H - S(g)) h; c^T h - 1]` in the
/// unknowns `(g, h_0..h_N)`.
fn bordered_jacobian(pencil: &Pencil, plet: &[f64], h: &DVector<f64>, c: &DVector<f64>) -> DMatrix<f64> {
    let (q, n) = (pencil.q(), pencil.n());
    let shifted = &pencil.matrix - pencil.shifts.combine(plet);
    let mut jac = DMatrix::zeros(n + q + 1, n + q + 1);
    for xi in 1..=q {
        jac.view_mut((0, xi - 1), (n + q, 1)).copy_from(&(-pencil.shifts.apply(xi, h)));
    }
    jac.view_mut((0, q), (n + q, n + 1)).copy_from(&shifted);
    jac.view_mut((n + q, q), (1, n + 1)).copy_from(&c.transpose());
    jac
}

const POLISH_ITER: usize = 8;

/// The bordered iteration behind [`newton_from`]; `None` on a zero or
/// non-finite wave.
fn damped_newton(pencil: &Pencil, mut g: Vec<f64>, mut h: DVector<f64>, max_iter: usize) -> Option<(Vec<f64>, DVector<f64>)> {
    let (q, n) = (pencil.q(), pencil.n());
    let norm = h.norm();
    if !(norm > 0.0 && norm.is_finite()) {
        return None;
    }
    h /= norm;
    let c = h.clone();
    let mut r = pencil.residual_raw(&g, &h);
    let mut rnorm = r.norm();
    let scale = pencil.max_abs().max(1.0);

    for _ in 0..max_iter {
        let size = g.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        if rnorm <= 1e-15 * scale * size {
            break;
        }
        let jac = bordered_jacobian(pencil, &g, &h, &c);
        let rhs = DVector::from_iterator(n + q + 1, r.iter().map(|v| -v).chain([1.0 - c.dot(&h)]));
        let step = match jac.lu().solve(&rhs) {
            Some(s) if s.iter().all(|v| v.is_finite()) => s,
            _ => break,
        };
        let mut alpha = 1.0;
        let mut improved = false;
        for _ in 0..30 {
            let g_try: Vec<f64> = g.iter().enumerate().map(|(i, v)| v + alpha * step[i]).collect();
            let h_try = &h + step.rows(q, n + 1) * alpha;
            let r_try = pencil.residual_raw(&g_try, &h_try);
            let norm_try = r_try.norm();
            if norm_try < rnorm {
                g = g_try;
                h = h_try;
                r = r_try;
                rnorm = norm_try;
                improved = true;
                break;
            }
            alpha *= 0.5;
        }
        if !improved || step.amax() * alpha <= 1e-16 * size {
            break;
        }
    }

    Some((g, h))
}

/// Damped Newton from one start (`plet`, full wave of length `N + 1`).
///
/// The iteration fixes the scale of the wave by `c^T h = 1` with `c` the
/// normalized start wave, which keeps the unknowns of order one; the root is
/// rescaled to `h_N = 1` at the end. Returns the root when its scaled
/// residual passes `opts.accept_tol`.
pub fn newton_from(pencil: &Pencil, plet: &[f64], wave: &[f64], opts: &NewtonOptions) -> Option<QesSolution> {
    let (q, n) = (pencil.q(), pencil.n());
    assert_eq!(plet.len(), q);
    assert_eq!(wave.len(), n + 1);
    let (g, h) = damped_newton(pencil, plet.to_vec(), DVector::from_column_slice(wave), opts.max_iter)?;
    // a long damped path can stall short of the root; restarting with the
    // bordering vector taken at the current point restores quadratic steps
    let (g, h) = damped_newton(pencil, g, h, POLISH_ITER)?;

    if g.iter().chain(h.iter()).any(|v| !v.is_finite()) || h[n].abs() <= 1e-12 * h.amax() {
        return None;
    }
    let hn = h[n];
    let h = h / hn;
    let scaled = pencil.scaled_residual(&g, &h);
    if !(scaled <= opts.accept_tol) {
        return None;
    }
    let jac = jacobian(pencil, &g, &h);
    let singular_jacobian = n + q > 0 && linalg::condition_number(&jac) > 1e12;
    Some(QesSolution {
        plet: EigenPlet::new(g),
        wave: WaveVector::new(h.iter().copied().collect()).ok()?,
        residual_norm: scaled,
        classification: Classification::Newton,
        singular_jacobian,
    })
}

/// Fails with `NoSolution` if the report is empty.
pub fn require_solutions(report: SolveReport) -> Result<Vec<QesSolution>> {
    if report.solutions.is_empty() {
        Err(Error::NoSolution(report.diagnostics.join("; ")))
    } else {
        Ok(report.solutions)
    }
}
