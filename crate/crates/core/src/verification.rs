//! Independent checks of claimed quasi-exact solutions.
//!
//! [`recurrence_residual`] re-evaluates the Taylor recurrence including the
//! virtual closing row `N + q`, and [`ode_residual`] evaluates the
//! Schrodinger equation pointwise with analytic derivatives of
//! `psi = exp(-P) u`:
//!
//! ```text
//! -psi'' + (V - E) psi = exp(-P) [-u'' + 2P'u' + P''u - P'^2 u + (V - E) u].
//! ```

use serde::{Deserialize, Serialize};

use crate::direct::{solve_pencil, NewtonOptions};
use crate::error::{Error, Result};
use crate::model::{parity_pow, QuasiExactModel};
use crate::perturbation::{evaluate_truncated, run, PerturbationProblem, ZeroOrderSolution};
use crate::system::{build_system, element, EigenPlet, WaveVector};

fn check_shapes(model: &QuasiExactModel, plet: &EigenPlet, wave: &WaveVector) -> Result<()> {
    if plet.len() != model.q() || wave.n() != model.n() {
        return Err(Error::Contract(format!(
            "model (q = {}, N = {}) does not fit a plet of length {} and a wave of degree {}",
            model.q(),
            model.n(),
            plet.len(),
            wave.n()
        )));
    }
    Ok(())
}

/// Residuals of the recurrence rows `0..=N+q`. The last row lies beyond
/// the truncated system; its only in-range coefficient vanishes by
/// construction of `g_q`.
pub fn recurrence_residual(model: &QuasiExactModel, plet: &EigenPlet, wave: &WaveVector) -> Result<Vec<f64>> {
    check_shapes(model, plet, wave)?;
    let system = build_system(model);
    let mut rows = system.pencil().residual(plet, wave)?;
    let closing = model.n() + model.q();
    let p = model.p();
    rows.push(wave.coeffs().iter().enumerate().map(|(m, h)| element(model, closing, m).at(p) * h).sum());
    Ok(rows)
}

/// Largest recurrence residual relative to the terms that cancel in it,
/// see [`Pencil::scaled_residual`](crate::system::Pencil::scaled_residual).
pub fn recurrence_error(model: &QuasiExactModel, plet: &EigenPlet, wave: &WaveVector) -> Result<f64> {
    let rows = recurrence_residual(model, plet, wave)?;
    let system = build_system(model);
    let truncated = system.pencil().scaled_residual(plet.values(), &wave.to_dvector());
    let closing = rows[rows.len() - 1].abs();
    Ok(truncated.max(closing))
}

/// `(u, u', u'')` of `u(x) = sum_n h_n x^(2n+p)`, and the same sums taken
/// over `|h_n|`.
fn polynomial_derivatives(wave: &WaveVector, p: f64, x: f64) -> ([f64; 3], [f64; 3]) {
    let mut acc = [0.0; 3];
    let mut size = [0.0; 3];
    for (n, h) in wave.coeffs().iter().enumerate() {
        let e = 2.0 * n as f64 + p;
        let mut terms = [parity_pow(x, e), 0.0, 0.0];
        if e != 0.0 {
            terms[1] = e * parity_pow(x, e - 1.0);
        }
        if e != 0.0 && e != 1.0 {
            terms[2] = e * (e - 1.0) * parity_pow(x, e - 2.0);
        }
        for k in 0..3 {
            acc[k] += h * terms[k];
            size[k] += (h * terms[k]).abs();
        }
    }
    (acc, size)
}

/// Pointwise residual of `-psi'' + (V - E) psi = 0` at one point, relative
/// to `1 + |E psi|` plus the magnitude of the summed terms.
///
/// The summed-term scale makes this a backward error: exact solutions with
/// large Taylor coefficients cancel to a rounding floor far above
/// `1e-9 (1 + |E psi|)` where `psi` is small.
pub fn ode_residual_at(model: &QuasiExactModel, plet: &EigenPlet, wave: &WaveVector, x: f64) -> Result<f64> {
    check_shapes(model, plet, wave)?;
    let tail = model.tail();
    let energy = model.energy(plet.values());
    let v = model.potential(plet.values(), x)?;
    let ([u, du, d2u], [su, sdu, sd2u]) = polynomial_derivatives(wave, model.p(), x);
    let (dp, d2p) = (tail.exponent_d1(x), tail.exponent_d2(x));
    let weight = (-tail.exponent(x)).exp();
    let lhs = weight * (-d2u + 2.0 * dp * du + d2p * u - dp * dp * u + (v - energy) * u);
    let terms = weight * (sd2u + 2.0 * dp.abs() * sdu + (d2p.abs() + dp * dp + v.abs() + energy.abs()) * su);
    let psi = weight * u;
    Ok(lhs.abs() / (1.0 + (energy * psi).abs() + terms))
}

/// Maximum of [`ode_residual_at`] over the sample points.
pub fn ode_residual(model: &QuasiExactModel, plet: &EigenPlet, wave: &WaveVector, points: &[f64]) -> Result<f64> {
    points
        .iter()
        .map(|&x| ode_residual_at(model, plet, wave, x))
        .try_fold(0.0f64, |m, r| r.map(|r| m.max(r)))
}

/// Outermost `x > 0` with `V(x) <= E`, zero when the potential never dips
/// below the energy.
pub fn outer_turning_point(model: &QuasiExactModel, plet: &EigenPlet) -> Result<f64> {
    let g = model.couplings(plet.values())?;
    let energy = model.energy(plet.values());
    let top = g[g.len() - 1];
    let rest: f64 = g[..g.len() - 1].iter().map(|c| c.abs()).sum::<f64>() + energy.abs();
    // beyond `bound` the leading term dominates everything else
    let bound = 1.0 + (rest / top).sqrt();
    let steps = 4000;
    let mut turn = 0.0;
    for i in 1..=steps {
        let x = bound * i as f64 / steps as f64;
        if model.potential(plet.values(), x)? <= energy {
            turn = x;
        }
    }
    Ok(turn)
}

/// 16 Chebyshev points on `[0.1, x_turn + 1]`.
pub fn default_sample_points(model: &QuasiExactModel, plet: &EigenPlet) -> Result<Vec<f64>> {
    let (a, b) = (0.1, outer_turning_point(model, plet)? + 1.0);
    let count = 16;
    Ok((0..count)
        .map(|i| {
            let theta = (2 * i + 1) as f64 * std::f64::consts::PI / (2 * count) as f64;
            0.5 * (a + b) + 0.5 * (b - a) * theta.cos()
        })
        .rev()
        .collect())
}

/// Both residuals of one solution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub recurrence: f64,
    pub ode: f64,
    pub passed: bool,
}

/// Runs both checks at the default sample points.
pub fn verify(model: &QuasiExactModel, plet: &EigenPlet, wave: &WaveVector, tol: f64) -> Result<Verdict> {
    let recurrence = recurrence_error(model, plet, wave)?;
    let points = default_sample_points(model, plet)?;
    let ode = ode_residual(model, plet, wave, &points)?;
    Ok(Verdict { recurrence, ode, passed: recurrence <= tol && ode <= tol })
}

/// Errors of the truncated series against exact roots at a set of `sigma`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub sigma: f64,
    pub exact: EigenPlet,
    /// `errors[K]`: max-abs plet error of the series truncated after order `K`.
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Least-squares slope of `ln error` against `ln sigma`, per `K`.
    pub slopes: Vec<Option<f64>>,
    pub diagnostics: Vec<String>,
}

/// Compares partial sums of the series of `z` with multistart Newton roots of
/// `sum_k sigma^k H^(k)`, matched by nearest plet.
pub fn convergence_report(
    problem: &PerturbationProblem,
    z: &ZeroOrderSolution,
    k_max: usize,
    sigmas: &[f64],
    opts: &NewtonOptions,
) -> Result<ConvergenceReport> {
    let series = run(problem, z, k_max, false)?;
    let mut report = ConvergenceReport::default();
    for &sigma in sigmas {
        let (target, _) = evaluate_truncated(&series, z, sigma, k_max)?;
        let roots = solve_pencil(&problem.at(sigma), opts);
        let Some(exact) = roots
            .solutions
            .iter()
            .min_by(|a, b| a.plet.max_abs_diff(&target).total_cmp(&b.plet.max_abs_diff(&target)))
        else {
            report.diagnostics.push(format!("sigma = {sigma}: no Newton root ({})", roots.diagnostics.join("; ")));
            continue;
        };
        let errors = (0..=k_max)
            .map(|k| evaluate_truncated(&series, z, sigma, k).map(|(plet, _)| plet.max_abs_diff(&exact.plet)))
            .collect::<Result<Vec<f64>>>()?;
        report.rows.push(ConvergenceRow { sigma, exact: exact.plet.clone(), errors });
    }
    report.slopes = (0..=k_max)
        .map(|k| {
            let points: Vec<(f64, f64)> = report
                .rows
                .iter()
                .filter(|r| r.errors[k] > 0.0)
                .map(|r| (r.sigma.ln(), r.errors[k].ln()))
                .collect();
            fit_slope(&points)
        })
        .collect();
    Ok(report)
}

fn fit_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
