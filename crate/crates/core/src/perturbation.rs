//! Rayleigh-Schrodinger perturbation theory for non-square eigenproblems.
//!
//! Given `H(lambda) = H^(0) + lambda H^(1) + lambda^2 H^(2) + ...` and the
//! shift basis `J_xi`, the eigenplet and the right eigenvector are expanded
//! as `S(lambda) = sum_k lambda^k S^(k)` and `|psi> = sum_k lambda^k |k>`.
//! Order `k` reads
//!
//! ```text
//! [H^(0) - S^(0)] |k> = |known^(k-1)> + S^(k) |0>,
//! |known^(k-1)> = sum_{m=1}^{k-1} [S^(m) - H^(m)] |k-m> - H^(k) |0>.
//! ```
//!
//! The `(N+q) x (N+1)` zero-order operator has a `q`-dimensional left null
//! space. Projecting order `k` onto `q` independent left null rows
//! `<rho_j| Pi_j` removes `|k>` and leaves a `q x q` linear system for the
//! plet correction `S^(k)`:
//!
//! ```text
//! sum_xi F_{j,xi} g_{xi-1}^(k) = c_j,
//! F_{j,xi} = <rho_j| Pi_j J_xi |0>,   c_j = -<rho_j| Pi_j |known^(k-1)>.
//! ```
//!
//! The remaining `N` equations, restricted by the projector `Q_L` onto the
//! complement of those rows and by `Q_R` onto the complement of `|0>`, form an
//! invertible `N x N` system for `|k>`:
//!
//! ```text
//! |k> = Q_R [Q_L (H^(0) - S^(0)) Q_R]^(-1) Q_L (|known^(k-1)> + S^(k) |0>).
//! ```
//!
//! Each row `<rho_j| Pi_j` is chosen with as many zeros as possible: a window
//! `Pi_j = J_j^T` when that works, another window or an arbitrary
//! `(N+1)`-subset of positions otherwise.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::direct::{solve_pencil, NewtonOptions, QesSolution};
use crate::error::{Error, Result};
use crate::linalg;
use crate::system::{EigenPlet, Pencil, ShiftBasis, WaveVector};

/// Relative singular-value threshold for the left null space.
pub const NULL_SPACE_TOL: f64 = 1e-10;
/// Minimal `sigma_min / sigma_max` of an accepted set of reduction rows.
pub const INDEPENDENCE_TOL: f64 = 1e-8;
/// Largest accepted condition number of the restricted `N x N` operator.
pub const MAX_CONDITION: f64 = 1e12;

/// The stack `H^(0), H^(1), ...` sharing one shift basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationProblem {
    shifts: ShiftBasis,
    stack: Vec<DMatrix<f64>>,
}

impl PerturbationProblem {
    pub fn new(shifts: ShiftBasis, stack: Vec<DMatrix<f64>>) -> Result<Self> {
        if stack.is_empty() {
            return Err(Error::Contract("perturbation stack needs H^(0)".into()));
        }
        let shape = (shifts.rows(), shifts.cols());
        if let Some((k, m)) = stack.iter().enumerate().find(|(_, m)| m.shape() != shape) {
            return Err(Error::Contract(format!(
                "H^({k}) has shape {:?}, expected {shape:?}",
                m.shape()
            )));
        }
        Ok(Self { shifts, stack })
    }

    pub fn shifts(&self) -> &ShiftBasis {
        &self.shifts
    }

    pub fn q(&self) -> usize {
        self.shifts.q()
    }

    pub fn n(&self) -> usize {
        self.shifts.n()
    }

    pub fn stack(&self) -> &[DMatrix<f64>] {
        &self.stack
    }

    /// `H^(k)`, `None` beyond the stack (i.e. zero).
    pub fn order(&self, k: usize) -> Option<&DMatrix<f64>> {
        self.stack.get(k)
    }

    pub fn zero_order(&self) -> Pencil {
        Pencil { matrix: self.stack[0].clone(), shifts: self.shifts }
    }

    /// The full pencil `sum_k lambda^k H^(k)`.
    pub fn at(&self, lambda: f64) -> Pencil {
        let mut matrix = DMatrix::zeros(self.shifts.rows(), self.shifts.cols());
        let mut pow = 1.0;
        for h in &self.stack {
            matrix += h * pow;
            pow *= lambda;
        }
        Pencil { matrix, shifts: self.shifts }
    }
}

/// Positions of the `N+1` entries of `rho` inside a row of length `N+q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selection {
    /// Contiguous window starting at the offset, `Pi = J_{offset+1}^T`.
    Window(usize),
    /// Arbitrary increasing index subset.
    Subset(Vec<usize>),
}

impl Selection {
    pub fn indices(&self, n: usize) -> Vec<usize> {
        match self {
            Selection::Window(o) => (*o..=*o + n).collect(),
            Selection::Subset(idx) => idx.clone(),
        }
    }
}

/// A reduced left vector `<rho|` with its selection `Pi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionPair {
    pub selection: Selection,
    pub rho: Vec<f64>,
}

impl ReductionPair {
    /// `<rho| Pi` as a row of length `rows`.
    pub fn expanded(&self, rows: usize) -> DVector<f64> {
        let mut out = DVector::zeros(rows);
        for (idx, r) in self.selection.indices(self.rho.len() - 1).into_iter().zip(&self.rho) {
            out[idx] = *r;
        }
        out
    }
}

/// An unperturbed state with the left-side data the recursion needs.
#[derive(Debug, Clone)]
pub struct ZeroOrderSolution {
    pub plet0: EigenPlet,
    pub wave0: WaveVector,
    /// `H^(0) - S^(0)`.
    pub operator: DMatrix<f64>,
    /// Orthonormal rows spanning the left null space of `operator`.
    pub left_basis: DMatrix<f64>,
    pub reductions: Vec<ReductionPair>,
    /// Left null-space dimension in excess of `q` (zero in the generic case).
    pub excess_left_dim: usize,
}

impl ZeroOrderSolution {
    pub fn label(&self) -> String {
        let parts: Vec<String> = self.plet0.values().iter().map(|g| format!("{g:.6}")).collect();
        format!("({})", parts.join(", "))
    }

    /// The expanded reduction rows `<rho_j| Pi_j`, one per row.
    pub fn reduction_rows(&self) -> DMatrix<f64> {
        let rows = self.operator.nrows();
        let expanded: Vec<DVector<f64>> = self.reductions.iter().map(|r| r.expanded(rows)).collect();
        DMatrix::from_fn(expanded.len(), rows, |r, c| expanded[r][c])
    }
}

/// Orthonormal rows `Q_R` (complement of `|0>`) and `Q_L` (complement of the
/// reduction rows) plus the factorized restricted operator.
#[derive(Debug, Clone)]
pub struct ProjectorPair {
    pub right_basis: DMatrix<f64>,
    pub left_basis_q: DMatrix<f64>,
    /// `left_basis_q (H^(0) - S^(0)) right_basis^T`, `N x N`.
    pub restricted: DMatrix<f64>,
    pub condition: f64,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
}

impl ProjectorPair {
    /// Solves `Q_R [Q_L M Q_R]^(-1) Q_L rhs` for a column of length `N+q`.
    pub fn solve_right(&self, rhs: &DVector<f64>) -> DVector<f64> {
        if self.restricted.is_empty() {
            return DVector::zeros(self.right_basis.ncols());
        }
        let b = &self.left_basis_q * rhs;
        let y = self.lu.solve(&b).expect("restricted operator was checked to be regular");
        self.right_basis.transpose() * y
    }

    /// Solves `<row| Q_R [Q_L M Q_R]^(-1) Q_L` for a row of length `N+1`,
    /// returning a row of length `N+q`.
    pub fn solve_left(&self, row: &DVector<f64>) -> DVector<f64> {
        if self.restricted.is_empty() {
            return DVector::zeros(self.left_basis_q.ncols());
        }
        let z = &self.right_basis * row;
        let y = self
            .restricted
            .transpose()
            .lu()
            .solve(&z)
            .expect("restricted operator was checked to be regular");
        self.left_basis_q.transpose() * y
    }

    /// Applies `Q_L` to a column of length `N+q`.
    pub fn project_left(&self, v: &DVector<f64>) -> DVector<f64> {
        self.left_basis_q.transpose() * (&self.left_basis_q * v)
    }
}

/// One order of the series: the plet correction and the wave correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOrder {
    pub plet: EigenPlet,
    pub wave: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorrectionSeries {
    /// Orders `1..=K`.
    pub orders: Vec<CorrectionOrder>,
    /// Optional left-row corrections, orders `1..=K`, `q` rows each (as
    /// vectors of length `N+q`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub left_orders: Option<Vec<Vec<Vec<f64>>>>,
}

impl CorrectionSeries {
    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    /// `|k>` with `|0>` at `k = 0`.
    fn wave(&self, z: &ZeroOrderSolution, k: usize) -> DVector<f64> {
        if k == 0 {
            z.wave0.to_dvector()
        } else {
            DVector::from_column_slice(&self.orders[k - 1].wave)
        }
    }

    fn plet(&self, k: usize) -> &[f64] {
        self.orders[k - 1].plet.values()
    }
}

/// Zero-order states of the problem: multistart Newton on `H^(0)` followed by
/// the left-side construction for every real root.
pub fn solve_zero_order(problem: &PerturbationProblem, opts: &NewtonOptions) -> Result<Vec<ZeroOrderSolution>> {
    let report = solve_pencil(&problem.zero_order(), opts);
    if report.solutions.is_empty() {
        return Err(Error::NoSolution(format!(
            "zero-order problem has no real root: {}",
            report.diagnostics.join("; ")
        )));
    }
    report.solutions.iter().map(|s| zero_order_from(problem, s)).collect()
}

/// Builds the left null basis and reduction pairs for a known zero-order root.
pub fn zero_order_from(problem: &PerturbationProblem, root: &QesSolution) -> Result<ZeroOrderSolution> {
    let label = format!("{:?}", root.plet.values());
    if root.singular_jacobian {
        return Err(Error::Degenerate {
            state: label,
            reason: "colliding zero-order roots (singular Jacobian)".into(),
        });
    }
    let operator = problem.zero_order().apply(root.plet.values())?;
    let (q, n) = (problem.q(), problem.n());
    let left_basis = left_null_basis(&operator, q).map_err(|e| relabel(e, &label))?;
    let excess_left_dim = left_basis.nrows() - q;
    let reductions = reduce_left_vectors(&left_basis, q, n).map_err(|e| relabel(e, &label))?;
    Ok(ZeroOrderSolution {
        plet0: root.plet.clone(),
        wave0: root.wave.clone(),
        operator,
        left_basis,
        reductions,
        excess_left_dim,
    })
}

fn relabel(e: Error, state: &str) -> Error {
    match e {
        Error::Degenerate { reason, .. } => Error::Degenerate { state: state.to_string(), reason },
        Error::Singular { condition, .. } => Error::Singular { state: state.to_string(), condition },
        other => other,
    }
}

/// Orthonormal basis of the left null space of `H^(0) - S^(0)`; at least `q`
/// rows are required.
pub fn left_null_basis(operator: &DMatrix<f64>, q: usize) -> Result<DMatrix<f64>> {
    let basis = linalg::left_null_space(operator, NULL_SPACE_TOL);
    if basis.nrows() < q {
        return Err(Error::Degenerate {
            state: String::new(),
            reason: format!("left null space has dimension {} < q = {q}", basis.nrows()),
        });
    }
    Ok(basis)
}

struct Candidate {
    selection: Selection,
    row: DVector<f64>,
}

/// Rows of the span of `basis` that vanish outside `selection`.
fn candidates_for(basis: &DMatrix<f64>, selection: Selection, n: usize) -> Vec<Candidate> {
    let rows = basis.ncols();
    let inside = selection.indices(n);
    let outside: Vec<usize> = (0..rows).filter(|i| !inside.contains(i)).collect();
    // coefficients c with (c^T basis)_e = 0 for every excluded position e
    let constraint = DMatrix::from_fn(outside.len(), basis.nrows(), |r, c| basis[(c, outside[r])]);
    let null = if outside.is_empty() {
        DMatrix::identity(basis.nrows(), basis.nrows())
    } else {
        linalg::right_null_space(&constraint, NULL_SPACE_TOL)
    };
    null.column_iter()
        .map(|c| {
            let mut row = basis.transpose() * c;
            for &e in &outside {
                row[e] = 0.0;
            }
            canonical_sign(&mut row);
            Candidate { selection: selection.clone(), row }
        })
        .filter(|c| c.row.norm() > 0.5)
        .collect()
}

fn canonical_sign(row: &mut DVector<f64>) {
    let norm = row.norm();
    if norm > 0.0 {
        *row /= norm;
    }
    if let Some(first) = row.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            *row *= -1.0;
        }
    }
}

fn independence_with(chosen: &[DVector<f64>], extra: &DVector<f64>) -> f64 {
    let all: Vec<&DVector<f64>> = chosen.iter().chain(std::iter::once(extra)).collect();
    let m = DMatrix::from_fn(all.len(), extra.len(), |r, c| all[r][c]);
    linalg::independence(&m)
}

fn best<'a>(chosen: &[DVector<f64>], pool: impl Iterator<Item = &'a Candidate>) -> Option<(&'a Candidate, f64)> {
    pool.map(|c| (c, independence_with(chosen, &c.row)))
        .filter(|(_, s)| *s > INDEPENDENCE_TOL)
        .fold(None, |acc: Option<(&Candidate, f64)>, (c, s)| match acc {
            Some((_, best)) if best >= s => acc,
            _ => Some((c, s)),
        })
}

/// Upper bound on the number of index subsets tried by the fallback.
const MAX_SUBSETS: usize = 50_000;

/// Chooses `q` linearly independent reduced left vectors.
///
/// Row `j` prefers the window `Pi_j = J_j^T`. When that window admits no row
/// independent of the rows already chosen, the other windows are tried, then
/// arbitrary `(N+1)`-subsets, each time keeping the candidate that maximizes
/// the smallest singular value of the chosen set.
pub fn reduce_left_vectors(left_basis: &DMatrix<f64>, q: usize, n: usize) -> Result<Vec<ReductionPair>> {
    let rows = n + q;
    if left_basis.nrows() < q || left_basis.ncols() != rows {
        return Err(Error::Contract(format!(
            "left basis of shape {:?} cannot carry q = {q} reductions of length {rows}",
            left_basis.shape()
        )));
    }
    let windows: Vec<Vec<Candidate>> = (0..q).map(|o| candidates_for(left_basis, Selection::Window(o), n)).collect();
    let mut subsets: Option<Vec<Candidate>> = None;

    let mut chosen_rows: Vec<DVector<f64>> = Vec::new();
    let mut chosen: Vec<Candidate> = Vec::new();
    for j in 0..q {
        let pick = best(&chosen_rows, windows[j].iter())
            .or_else(|| best(&chosen_rows, windows.iter().enumerate().filter(|(o, _)| *o != j).flat_map(|(_, c)| c.iter())))
            .map(|(c, _)| (c.selection.clone(), c.row.clone()));
        let pick = match pick {
            Some(p) => Some(p),
            None => {
                let pool = subsets.get_or_insert_with(|| {
                    (0..rows)
                        .combinations(q - 1)
                        .filter(|excluded| !is_window(excluded, rows))
                        .take(MAX_SUBSETS)
                        .flat_map(|excluded| {
                            let inside: Vec<usize> = (0..rows).filter(|i| !excluded.contains(i)).collect();
                            candidates_for(left_basis, Selection::Subset(inside), n)
                        })
                        .collect()
                });
                best(&chosen_rows, pool.iter()).map(|(c, _)| (c.selection.clone(), c.row.clone()))
            }
        };
        match pick {
            Some((selection, row)) => {
                chosen_rows.push(row.clone());
                chosen.push(Candidate { selection, row });
            }
            None => {
                return Err(Error::Degenerate {
                    state: String::new(),
                    reason: format!("no reduced left vector independent of the first {j} found"),
                })
            }
        }
    }
    Ok(chosen
        .into_iter()
        .map(|c| {
            let rho = c.selection.indices(n).into_iter().map(|i| c.row[i]).collect();
            ReductionPair { selection: c.selection, rho }
        })
        .collect())
}

/// A set of excluded positions that leaves a contiguous window.
fn is_window(excluded: &[usize], rows: usize) -> bool {
    let k = excluded.len();
    (0..=k).any(|lead| {
        // `lead` exclusions at the start, the rest at the end
        excluded[..lead].iter().enumerate().all(|(i, &e)| e == i)
            && excluded[lead..].iter().enumerate().all(|(i, &e)| e == rows - (k - lead) + i)
    })
}

/// `Q_R`, `Q_L` and the restricted operator of a zero-order state.
pub fn build_projectors(z: &ZeroOrderSolution) -> Result<ProjectorPair> {
    let (rows, cols) = z.operator.shape();
    let n = cols - 1;
    let wave = z.wave0.to_dvector();
    let seed_right = DMatrix::from_row_slice(1, cols, (&wave / wave.norm()).as_slice());
    let right_basis = linalg::orthonormal_completion(&seed_right, cols);
    let seed_left = linalg::orthonormal_rows(&z.reduction_rows());
    let left_basis_q = linalg::orthonormal_completion(&seed_left, rows);
    debug_assert_eq!(right_basis.nrows(), n);
    debug_assert_eq!(left_basis_q.nrows(), n);
    let restricted = &left_basis_q * &z.operator * right_basis.transpose();
    let condition = linalg::condition_number(&restricted);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Singular { state: z.label(), condition });
    }
    let lu = restricted.clone().lu();
    Ok(ProjectorPair { right_basis, left_basis_q, restricted, condition, lu })
}

/// `sum_{m=1}^{k-1} [S^(m) - H^(m)] |k-m> - H^(k) |0>`.
pub fn known_vector(problem: &PerturbationProblem, series: &CorrectionSeries, z: &ZeroOrderSolution, k: usize) -> DVector<f64> {
    assert!(k >= 1 && series.len() >= k - 1, "orders below {k} must be known");
    let shifts = problem.shifts();
    let mut known = DVector::zeros(shifts.rows());
    for m in 1..k {
        let v = series.wave(z, k - m);
        known += shifts.combine(series.plet(m)) * &v;
        if let Some(h) = problem.order(m) {
            known -= h * &v;
        }
    }
    if let Some(h) = problem.order(k) {
        known -= h * z.wave0.to_dvector();
    }
    known
}

/// `F_{j,xi} = <rho_j| Pi_j J_xi |0>`.
pub fn coupling_matrix(z: &ZeroOrderSolution, shifts: &ShiftBasis) -> DMatrix<f64> {
    let rows = z.reduction_rows();
    let wave = z.wave0.to_dvector();
    let q = shifts.q();
    let columns: Vec<DVector<f64>> = (1..=q).map(|xi| shifts.apply(xi, &wave)).collect();
    DMatrix::from_fn(q, q, |j, xi| rows.row(j).transpose().dot(&columns[xi]))
}

/// Plet correction of the order whose known vector is given.
pub fn coupling_corrections(z: &ZeroOrderSolution, known: &DVector<f64>, shifts: &ShiftBasis) -> Result<EigenPlet> {
    solve_couplings(z, &coupling_matrix(z, shifts), known)
}

fn solve_couplings(z: &ZeroOrderSolution, f: &DMatrix<f64>, known: &DVector<f64>) -> Result<EigenPlet> {
    let rhs = -(z.reduction_rows() * known);
    let condition = linalg::condition_number(f);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Degenerate {
            state: z.label(),
            reason: format!("coupling matrix F is singular (condition {condition:.3e})"),
        });
    }
    let g = f.clone().lu().solve(&rhs).ok_or_else(|| Error::Degenerate {
        state: z.label(),
        reason: "coupling matrix F is singular".into(),
    })?;
    Ok(EigenPlet::new(g.iter().copied().collect()))
}

/// `|k> = Q_R [Q_L (H^(0) - S^(0)) Q_R]^(-1) Q_L (|known> + S^(k) |0>)`.
pub fn wave_correction(
    pp: &ProjectorPair,
    known: &DVector<f64>,
    plet_k: &EigenPlet,
    wave0: &WaveVector,
    shifts: &ShiftBasis,
) -> DVector<f64> {
    let rhs = known + shifts.combine(plet_k.values()) * wave0.to_dvector();
    pp.solve_right(&rhs)
}

/// Left-row corrections of order `k` for the zero-order rows `rows0`
/// (each in the left null space of `H^(0) - S^(0)`), given the lower orders
/// in `previous` (`previous[m-1]` holds order `m`).
pub fn left_corrections_for(
    problem: &PerturbationProblem,
    pp: &ProjectorPair,
    series: &CorrectionSeries,
    rows0: &[DVector<f64>],
    previous: &[Vec<DVector<f64>>],
    k: usize,
) -> Vec<DVector<f64>> {
    assert!(k >= 1 && previous.len() >= k - 1 && series.len() >= k);
    let shifts = problem.shifts();
    rows0
        .iter()
        .enumerate()
        .map(|(xi, row0)| {
            // <known| = sum_{m=0}^{k-1} <m| [S^(k-m) - H^(k-m)]
            let mut known = DVector::zeros(shifts.cols());
            for m in 0..k {
                let row = if m == 0 { row0 } else { &previous[m - 1][xi] };
                let mut op = shifts.combine(series.plet(k - m));
                if let Some(h) = problem.order(k - m) {
                    op -= h;
                }
                known += op.transpose() * row;
            }
            pp.solve_left(&known)
        })
        .collect()
}

/// Order-`k` corrections of the expanded reduction rows.
pub fn left_corrections(
    problem: &PerturbationProblem,
    z: &ZeroOrderSolution,
    pp: &ProjectorPair,
    series: &CorrectionSeries,
    k: usize,
) -> Vec<DVector<f64>> {
    let rows0: Vec<DVector<f64>> = z.reduction_rows().row_iter().map(|r| r.transpose()).collect();
    let previous: Vec<Vec<DVector<f64>>> = series
        .left_orders
        .as_ref()
        .map(|orders| orders.iter().map(|o| o.iter().map(|r| DVector::from_column_slice(r)).collect()).collect())
        .unwrap_or_default();
    left_corrections_for(problem, pp, series, &rows0, &previous, k)
}

/// Corrections of orders `1..=order`; with `with_left` the reduction rows
/// are corrected as well.
pub fn run(problem: &PerturbationProblem, z: &ZeroOrderSolution, order: usize, with_left: bool) -> Result<CorrectionSeries> {
    let pp = build_projectors(z)?;
    let shifts = problem.shifts();
    let f = coupling_matrix(z, shifts);
    let mut series = CorrectionSeries { orders: Vec::with_capacity(order), left_orders: with_left.then(Vec::new) };
    for k in 1..=order {
        let known = known_vector(problem, &series, z, k);
        let plet = solve_couplings(z, &f, &known)?;
        let wave = wave_correction(&pp, &known, &plet, &z.wave0, shifts);
        series.orders.push(CorrectionOrder { plet, wave: wave.iter().copied().collect() });
        if with_left {
            let rows = left_corrections(problem, z, &pp, &series, k);
            let rows = rows.into_iter().map(|r| r.iter().copied().collect()).collect();
            series.left_orders.as_mut().unwrap().push(rows);
        }
    }
    Ok(series)
}

/// Partial sums `plet0 + sum lambda^k plet_k` and the wave renormalized to
/// `h_N = 1`.
pub fn evaluate_series(series: &CorrectionSeries, z: &ZeroOrderSolution, lambda: f64) -> Result<(EigenPlet, WaveVector)> {
    evaluate_truncated(series, z, lambda, series.len())
}

/// As [`evaluate_series`] but summing only orders `1..=order`.
pub fn evaluate_truncated(series: &CorrectionSeries, z: &ZeroOrderSolution, lambda: f64, order: usize) -> Result<(EigenPlet, WaveVector)> {
    let mut plet: Vec<f64> = z.plet0.values().to_vec();
    let mut wave = z.wave0.to_dvector();
    let mut pow = 1.0;
    for o in series.orders.iter().take(order) {
        pow *= lambda;
        for (p, c) in plet.iter_mut().zip(o.plet.values()) {
            *p += pow * c;
        }
        wave += DVector::from_column_slice(&o.wave) * pow;
    }
    Ok((EigenPlet::new(plet), WaveVector::normalized(wave.as_slice())?))
}
