//! Dense two-phase primal simplex.
//!
//! Problems are given in standard form `min c·x  s.t.  Ax = b, x ≥ 0`. The
//! solver uses Bland's rule for both the entering and leaving variable, so it
//! terminates on degenerate problems (bounding-chain programs are heavily
//! degenerate). Redundant equality rows are detected at the end of phase one
//! and dropped; their dual value is reported as zero.

use nalgebra::DMatrix;

use crate::{Error, Result};

/// Default pivot / optimality tolerance.
pub const DEFAULT_TOL: f64 = 1e-9;

/// `min c·x  s.t.  Ax = b, x ≥ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardFormLp {
    a: DMatrix<f64>,
    b: Vec<f64>,
    c: Vec<f64>,
}

impl StandardFormLp {
    pub fn new(a: DMatrix<f64>, b: Vec<f64>, c: Vec<f64>) -> Result<Self> {
        if b.len() != a.nrows() {
            return Err(Error::Argument(format!(
                "constraint matrix has {} rows but b has {} entries",
                a.nrows(),
                b.len()
            )));
        }
        if c.len() != a.ncols() {
            return Err(Error::Argument(format!(
                "constraint matrix has {} columns but c has {} entries",
                a.ncols(),
                c.len()
            )));
        }
        if a.iter().chain(&b).chain(&c).any(|x| !x.is_finite()) {
            return Err(Error::Argument("linear program data must be finite".into()));
        }
        Ok(StandardFormLp { a, b, c })
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Primal vertex (meaningful when optimal).
    pub x: Vec<f64>,
    /// Dual multipliers, one per equality row (meaningful when optimal).
    pub y: Vec<f64>,
    pub objective: f64,
    /// Indices of the basic columns at termination.
    pub basis: Vec<usize>,
}

impl LpSolution {
    fn non_optimal(status: LpStatus, n: usize, m: usize) -> Self {
        LpSolution {
            status,
            x: vec![0.0; n],
            y: vec![0.0; m],
            objective: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            basis: Vec::new(),
        }
    }

    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

struct Tableau {
    width: usize,
    rows: Vec<Vec<f64>>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    /// Original constraint index each remaining row came from.
    origin: Vec<usize>,
    tol: f64,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self) -> usize {
        self.width - 1
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let piv = self.rows[p][q];
        let snap = self.tol * 1e-3;
        {
            let row = &mut self.rows[p];
            for v in row.iter_mut() {
                *v /= piv;
            }
            row[q] = 1.0;
        }
        let pivot_row = self.rows[p].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == p {
                continue;
            }
            let factor = row[q];
            if factor == 0.0 {
                continue;
            }
            for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
                if v.abs() < snap {
                    *v = 0.0;
                }
            }
            row[q] = 0.0;
        }
        let factor = self.obj[q];
        if factor != 0.0 {
            for (v, &pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= factor * pv;
            }
            self.obj[q] = 0.0;
        }
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// Runs Bland's-rule simplex iterations over columns `0..allowed`.
    /// Returns `false` when the problem is unbounded.
    fn optimize(&mut self, allowed: usize, max_pivots: usize) -> Result<bool> {
        let rhs = self.rhs();
        loop {
            let Some(q) = (0..allowed).find(|&j| self.obj[j] < -self.tol) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[q];
                if a <= self.tol {
                    continue;
                }
                let ratio = row[rhs].max(0.0) / a;
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let slack = self.tol * (1.0 + br.abs());
                        if ratio < br - slack
                            || (ratio <= br + slack && self.basis[i] < self.basis[bi])
                        {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((p, _)) = best else {
                return Ok(false);
            };
            if self.pivots >= max_pivots {
                return Err(Error::Solver(format!(
                    "simplex exceeded {max_pivots} pivots without converging"
                )));
            }
            self.pivot(p, q);
        }
    }
}

/// Solves a standard-form linear program.
///
/// On `Optimal`, `x` is a basic feasible solution and `y` satisfies
/// `c·x = b·y` and `c - Aᵀy ≥ -tol`. Output is a deterministic function of
/// the input.
pub fn solve(lp: &StandardFormLp, tol: f64) -> Result<LpSolution> {
    if !(tol > 0.0) {
        return Err(Error::Argument(format!("tolerance must be positive, got {tol}")));
    }
    let m = lp.rows();
    let n = lp.cols();
    let scale = lp.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
    let feas_tol = 1e3 * tol * scale;

    if m == 0 {
        // Only sign constraints: optimum at 0 unless some cost is negative.
        if lp.c.iter().any(|&c| c < 0.0) {
            return Ok(LpSolution::non_optimal(LpStatus::Unbounded, n, 0));
        }
        return Ok(LpSolution {
            status: LpStatus::Optimal,
            x: vec![0.0; n],
            y: Vec::new(),
            objective: 0.0,
            basis: Vec::new(),
        });
    }

    // Flip rows so the right-hand side is non-negative.
    let signs: Vec<f64> = lp.b.iter().map(|&b| if b < 0.0 { -1.0 } else { 1.0 }).collect();
    let width = n + m + 1;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let mut row = vec![0.0; width];
        for j in 0..n {
            row[j] = signs[i] * lp.a[(i, j)];
        }
        row[n + i] = 1.0;
        row[width - 1] = signs[i] * lp.b[i];
        rows.push(row);
    }

    // Phase one: minimize the sum of artificials.
    let mut obj = vec![0.0; width];
    for row in &rows {
        for j in 0..n {
            obj[j] -= row[j];
        }
        obj[width - 1] -= row[width - 1];
    }
    let mut t = Tableau {
        width,
        rows,
        obj,
        basis: (n..n + m).collect(),
        origin: (0..m).collect(),
        tol,
        pivots: 0,
    };
    let max_pivots = 50_000 + 200 * (n + m);
    t.optimize(n, max_pivots)?;
    let infeasibility = -t.obj[width - 1];
    if infeasibility > feas_tol {
        return Ok(LpSolution::non_optimal(LpStatus::Infeasible, n, m));
    }

    // Drive artificials out of the basis; rows where that is impossible are
    // linear combinations of the others.
    let mut redundant = Vec::new();
    for i in 0..t.rows.len() {
        if t.basis[i] < n {
            continue;
        }
        t.rows[i][width - 1] = 0.0;
        let mut best: Option<(usize, f64)> = None;
        for j in 0..n {
            let a = t.rows[i][j].abs();
            if a > tol && best.is_none_or(|(_, ba)| a > ba) {
                best = Some((j, a));
            }
        }
        match best {
            Some((q, _)) => t.pivot(i, q),
            None => redundant.push(i),
        }
    }
    for &i in redundant.iter().rev() {
        t.rows.remove(i);
        t.basis.remove(i);
        t.origin.remove(i);
    }

    // Phase two objective, with artificials priced at zero.
    let cost = |j: usize| if j < n { lp.c[j] } else { 0.0 };
    let mut obj = vec![0.0; width];
    for j in 0..width - 1 {
        obj[j] = cost(j);
    }
    for (row, &bj) in t.rows.iter().zip(&t.basis) {
        let cb = cost(bj);
        if cb == 0.0 {
            continue;
        }
        for (o, &v) in obj.iter_mut().zip(row) {
            *o -= cb * v;
        }
    }
    for &bj in &t.basis {
        obj[bj] = 0.0;
    }
    t.obj = obj;
    if !t.optimize(n, max_pivots)? {
        return Ok(LpSolution::non_optimal(LpStatus::Unbounded, n, m));
    }

    let mut x = vec![0.0; n];
    for (row, &bj) in t.rows.iter().zip(&t.basis) {
        if bj < n {
            x[bj] = row[width - 1];
        } else if row[width - 1].abs() > feas_tol {
            return Err(Error::Solver(format!(
                "artificial variable {} left basic at level {}",
                bj - n,
                row[width - 1]
            )));
        }
    }
    for v in x.iter_mut() {
        if *v < 0.0 {
            if *v < -feas_tol {
                return Err(Error::Solver(format!("primal entry {v} is negative")));
            }
            *v = 0.0;
        }
    }

    // y' = c_Bᵀ B⁻¹, read from the artificial columns; undo the row flips.
    let mut y = vec![0.0; m];
    for &orig in &t.origin {
        let col = n + orig;
        let mut acc = 0.0;
        for (row, &bj) in t.rows.iter().zip(&t.basis) {
            acc += cost(bj) * row[col];
        }
        y[orig] = signs[orig] * acc;
    }

    let residual = (0..m)
        .map(|i| {
            let ax: f64 = (0..n).map(|j| lp.a[(i, j)] * x[j]).sum();
            (ax - lp.b[i]).abs()
        })
        .fold(0.0, f64::max);
    if residual > feas_tol {
        return Err(Error::Solver(format!(
            "numerical breakdown: residual {residual:.3e} after {} pivots",
            t.pivots
        )));
    }

    let objective = lp.c.iter().zip(&x).map(|(c, x)| c * x).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x,
        y,
        objective,
        basis: t.basis,
    })
}

/// Result of [`solve_bounded_free`].
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedFreeSolution {
    /// Maximizer, with common positive/negative mass cancelled.
    pub f: Vec<f64>,
    pub objective: f64,
    /// Multiplier of each row of `C`: positive where the upper bound is
    /// tight, negative where the lower bound is tight, zero elsewhere. Together
    /// with `eq_duals` they satisfy `obj = Cᵀλ + Eᵀμ`.
    pub row_duals: Vec<f64>,
    pub eq_duals: Vec<f64>,
}

/// `max obj·f  s.t.  lo ≤ C f ≤ hi,  E f = 0`, with `f` free.
///
/// Splits `f = f⁺ − f⁻` and adds slack columns for both sides of every row of
/// `C`, then calls [`solve`].
pub fn solve_bounded_free(
    c_mat: &DMatrix<f64>,
    lo: &[f64],
    hi: &[f64],
    e_mat: &DMatrix<f64>,
    obj: &[f64],
    tol: f64,
) -> Result<BoundedFreeSolution> {
    let r = c_mat.nrows();
    let p = c_mat.ncols();
    let e = e_mat.nrows();
    if lo.len() != r || hi.len() != r || obj.len() != p || (e > 0 && e_mat.ncols() != p) {
        return Err(Error::Argument("inconsistent bounded-free program dimensions".into()));
    }
    if let Some(i) = (0..r).find(|&i| lo[i] > hi[i]) {
        return Err(Error::Argument(format!("row {i}: lower bound exceeds upper bound")));
    }

    // columns: f⁺ (p) | f⁻ (p) | upper slack (r) | lower surplus (r)
    let cols = 2 * p + 2 * r;
    let rows = 2 * r + e;
    let mut a = DMatrix::<f64>::zeros(rows, cols);
    let mut b = vec![0.0; rows];
    for i in 0..r {
        for j in 0..p {
            let v = c_mat[(i, j)];
            if v != 0.0 {
                a[(i, j)] = v;
                a[(i, p + j)] = -v;
                a[(r + i, j)] = v;
                a[(r + i, p + j)] = -v;
            }
        }
        a[(i, 2 * p + i)] = 1.0;
        b[i] = hi[i];
        a[(r + i, 2 * p + r + i)] = -1.0;
        b[r + i] = lo[i];
    }
    for i in 0..e {
        for j in 0..p {
            let v = e_mat[(i, j)];
            if v != 0.0 {
                a[(2 * r + i, j)] = v;
                a[(2 * r + i, p + j)] = -v;
            }
        }
    }
    let mut cost = vec![0.0; cols];
    for j in 0..p {
        cost[j] = -obj[j];
        cost[p + j] = obj[j];
    }

    let sol = solve(&StandardFormLp::new(a, b, cost)?, tol)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::Solver(
                "bounded-free program reported infeasible although the origin is feasible".into(),
            ))
        }
        LpStatus::Unbounded => {
            return Err(Error::Solver(
                "bounded-free program is unbounded; add equality constraints to bound it".into(),
            ))
        }
    }
    let f: Vec<f64> = (0..p).map(|j| sol.x[j] - sol.x[p + j]).collect();
    let objective = obj.iter().zip(&f).map(|(o, f)| o * f).sum();
    let row_duals = (0..r).map(|i| -(sol.y[i] + sol.y[r + i])).collect();
    let eq_duals = (0..e).map(|i| -sol.y[2 * r + i]).collect();
    Ok(BoundedFreeSolution { f, objective, row_duals, eq_duals })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lp(rows: &[&[f64]], b: &[f64], c: &[f64]) -> StandardFormLp {
        let m = rows.len();
        let n = c.len();
        let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
        StandardFormLp::new(a, b.to_vec(), c.to_vec()).unwrap()
    }

    #[test]
    fn single_variable() {
        let s = solve(&lp(&[&[1.0]], &[1.0], &[1.0]), DEFAULT_TOL).unwrap();
        assert!(s.is_optimal());
        assert_eq!(s.x, vec![1.0]);
        assert_eq!(s.objective, 1.0);
        assert_eq!(s.y, vec![1.0]);
    }

    #[test]
    fn zero_objective_returns_a_vertex() {
        let s = solve(&lp(&[&[1.0, 1.0]], &[1.0], &[0.0, 0.0]), DEFAULT_TOL).unwrap();
        assert!(s.is_optimal());
        assert_eq!(s.objective, 0.0);
        assert!(s.x == vec![1.0, 0.0] || s.x == vec![0.0, 1.0], "{:?}", s.x);
    }

    #[test]
    fn two_basic_solutions() {
        // basic solutions of x - y = 2: (2, 0) feasible, (0, -2) infeasible.
        let s = solve(&lp(&[&[1.0, -1.0]], &[2.0], &[1.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.x, vec![2.0, 0.0]);
        assert_eq!(s.objective, 2.0);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let s = solve(&lp(&[&[1.0, 1.0]], &[-1.0], &[1.0, 1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
        let s = solve(&lp(&[&[1.0, -1.0]], &[1.0], &[0.0, -1.0]), DEFAULT_TOL).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn redundant_rows_are_dropped() {
        let s = solve(
            &lp(&[&[1.0, 1.0], &[2.0, 2.0], &[1.0, 0.0]], &[1.0, 2.0, 0.25], &[0.0, 1.0]),
            DEFAULT_TOL,
        )
        .unwrap();
        assert!(s.is_optimal());
        assert!((s.objective - 0.75).abs() < 1e-12);
        let by: f64 = [1.0, 2.0, 0.25].iter().zip(&s.y).map(|(b, y)| b * y).sum();
        assert!((by - s.objective).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_shapes_and_tolerance() {
        let a = DMatrix::zeros(1, 2);
        assert!(StandardFormLp::new(a.clone(), vec![1.0, 2.0], vec![0.0, 0.0]).is_err());
        assert!(StandardFormLp::new(a.clone(), vec![1.0], vec![0.0]).is_err());
        assert!(StandardFormLp::new(a.clone(), vec![f64::NAN], vec![0.0, 0.0]).is_err());
        let p = StandardFormLp::new(a, vec![0.0], vec![0.0, 0.0]).unwrap();
        assert!(solve(&p, 0.0).is_err());
    }

    #[test]
    fn bounded_free_examples() {
        let empty = DMatrix::<f64>::zeros(0, 1);
        let c = DMatrix::from_element(1, 1, 1.0);
        let s = solve_bounded_free(&c, &[-1.0], &[1.0], &empty, &[1.0], DEFAULT_TOL).unwrap();
        assert_eq!(s.f, vec![1.0]);
        assert_eq!(s.objective, 1.0);
        assert_eq!(s.row_duals, vec![1.0]);

        let s = solve_bounded_free(&c, &[-1.0], &[1.0], &empty, &[0.0], DEFAULT_TOL).unwrap();
        assert_eq!(s.objective, 0.0);
        assert!(s.f[0].abs() <= 1.0);

        let id = DMatrix::<f64>::identity(2, 2);
        let empty = DMatrix::<f64>::zeros(0, 2);
        let s = solve_bounded_free(&id, &[-1.0, -2.0], &[1.0, 2.0], &empty, &[1.0, 1.0], DEFAULT_TOL)
            .unwrap();
        assert_eq!(s.objective, 3.0);
    }

    #[test]
    fn bounded_free_reports_unbounded() {
        // f1 - f2 bounded, f1 + f2 free direction.
        let c = DMatrix::from_row_slice(1, 2, &[1.0, -1.0]);
        let empty = DMatrix::<f64>::zeros(0, 2);
        let r = solve_bounded_free(&c, &[-1.0], &[1.0], &empty, &[1.0, 1.0], DEFAULT_TOL);
        assert!(matches!(r, Err(Error::Solver(_))));
        // Adding f1 + f2 = 0 bounds it.
        let e = DMatrix::from_row_slice(1, 2, &[1.0, 1.0]);
        let s = solve_bounded_free(&c, &[-1.0], &[1.0], &e, &[1.0, 1.0], DEFAULT_TOL).unwrap();
        assert!(s.objective.abs() < 1e-12);
    }
}
