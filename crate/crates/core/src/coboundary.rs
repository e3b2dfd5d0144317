//! Coboundary k-metrics and embeddings into them.
//!
//! A matrix `F` whose columns are `(k-2)`-chains induces the k-metric
//! `d(t) = ‖1_tᵀ δ_{k-2} F‖`. Strong k-metrics embed isometrically into the
//! ℓ∞ version ([`frechet_embed`]); ℓ2 versions can be compressed with a
//! Gaussian map ([`jl_reduce`]) or moved to ℓp ([`embed_l2_to_lp`]).

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::lp::{self, solve_bounded_free};
use crate::metric::{check_permutation, KMetric};
use crate::simplex::{
    boundary_of_simplex, face_index, face_sign, permute_chain, simplex_count, Chain,
    Combinations, SimplexKey,
};
use crate::{Error, Result};

/// Largest column count the dimension formulas may request.
pub const MAX_TARGET_COLUMNS: usize = 1_000_000;

/// Default constant in the random-projection target dimension.
pub const DEFAULT_CPRIME: f64 = 8.0;

/// An ℓp norm with `p ≥ 1`, or the max norm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Norm {
    P(f64),
    Inf,
}

impl Norm {
    /// `p = ∞` maps to [`Norm::Inf`].
    pub fn new(p: f64) -> Result<Norm> {
        if p == f64::INFINITY {
            Ok(Norm::Inf)
        } else if p.is_finite() && p >= 1.0 {
            Ok(Norm::P(p))
        } else {
            Err(Error::Argument(format!("norm exponent must be at least 1, got {p}")))
        }
    }

    pub fn p(&self) -> f64 {
        match *self {
            Norm::P(p) => p,
            Norm::Inf => f64::INFINITY,
        }
    }

    pub fn of(&self, xs: impl IntoIterator<Item = f64>) -> f64 {
        match *self {
            Norm::Inf => xs.into_iter().fold(0.0, |m, x| m.max(x.abs())),
            Norm::P(1.0) => xs.into_iter().map(f64::abs).sum(),
            // hypot keeps each step correctly rounded and never overflows
            Norm::P(2.0) => xs.into_iter().fold(0.0, f64::hypot),
            Norm::P(p) => xs.into_iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p),
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Norm::P(p) => write!(f, "{p}"),
            Norm::Inf => f.write_str("inf"),
        }
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Norm> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Ok(Norm::Inf),
            other => {
                let p: f64 = other
                    .parse()
                    .map_err(|_| Error::Argument(format!("cannot parse norm exponent {s:?}")))?;
                Norm::new(p)
            }
        }
    }
}

/// `C(n, k-1) × m` matrix whose columns are `(k-2)`-chains on `n` vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainMatrix {
    n: usize,
    k: usize,
    data: DMatrix<f64>,
}

impl ChainMatrix {
    pub fn new(n: usize, k: usize, data: DMatrix<f64>) -> Result<Self> {
        if k < 2 || n < k {
            return Err(Error::Argument(format!(
                "chain matrix needs n ≥ k ≥ 2, got n = {n}, k = {k}"
            )));
        }
        let rows = simplex_count(n, k - 2)?;
        simplex_count(n, k - 1)?;
        if data.nrows() != rows {
            return Err(Error::Argument(format!(
                "chain matrix for n = {n}, k = {k} needs {rows} rows, got {}",
                data.nrows()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::Argument("chain matrix entries must be finite".into()));
        }
        Ok(ChainMatrix { n, k, data })
    }

    pub fn zeros(n: usize, k: usize, m: usize) -> Result<Self> {
        let rows = if k >= 2 { simplex_count(n, k - 2)? } else { 0 };
        ChainMatrix::new(n, k, DMatrix::zeros(rows, m))
    }

    /// Stacks `(k-2)`-chains side by side.
    pub fn from_columns(n: usize, k: usize, columns: &[Chain]) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("arity must be at least 2, got {k}")));
        }
        if let Some(c) = columns.iter().find(|c| c.n() != n || c.dim() != k - 2) {
            return Err(Error::Argument(format!(
                "expected {}-chains on {n} vertices, got a {}-chain on {}",
                k - 2,
                c.dim(),
                c.n()
            )));
        }
        let rows = simplex_count(n, k - 2)?;
        let data = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j].coeffs()[i]);
        ChainMatrix::new(n, k, data)
    }

    /// Row-major constructor used by the file formats.
    pub fn from_row_major(n: usize, k: usize, m: usize, data: &[f64]) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("arity must be at least 2, got {k}")));
        }
        let rows = simplex_count(n, k - 2)?;
        if data.len() != rows * m {
            return Err(Error::Argument(format!(
                "expected {rows} × {m} = {} entries, got {}",
                rows * m,
                data.len()
            )));
        }
        ChainMatrix::new(n, k, DMatrix::from_row_slice(rows, m, data))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn m(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_data(self) -> DMatrix<f64> {
        self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        self.data.transpose().as_slice().to_vec()
    }

    pub fn column(&self, j: usize) -> Chain {
        Chain::new(self.n, self.k - 2, self.data.column(j).iter().copied().collect())
            .expect("column length matches the row count")
    }

    /// Relabels every column by `perm`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Result<ChainMatrix> {
        check_permutation(perm, self.n)?;
        let cols: Vec<Chain> =
            (0..self.m()).map(|j| permute_chain(&self.column(j), perm)).collect::<Result<_>>()?;
        ChainMatrix::from_columns(self.n, self.k, &cols)
    }

    /// Row of `δ_{k-2} F` at the sorted `(k-1)`-simplex `t`.
    pub fn coboundary_row(&self, t: &[usize]) -> Vec<f64> {
        let mut row = vec![0.0; self.m()];
        for pos in 0..t.len() {
            let r = face_index(t, pos, self.n);
            let sign = f64::from(face_sign(pos));
            for (acc, x) in row.iter_mut().zip(self.data.row(r).iter()) {
                *acc += sign * x;
            }
        }
        row
    }
}

/// `d(t) = ‖1_tᵀ δ_{k-2} F‖` for every `(k-1)`-simplex `t`.
pub fn eval_coboundary_metric(f: &ChainMatrix, norm: Norm) -> KMetric {
    let simplices: Vec<Vec<usize>> = Combinations::new(f.n, f.k).collect();
    let values = simplices.par_iter().map(|t| norm.of(f.coboundary_row(t))).collect();
    KMetric::new(f.n, f.k, values).expect("norms are finite and non-negative")
}

/// Rows of `∂_{k-2}` on `n` vertices as a dense matrix; for `k = 2` the single
/// augmentation row (all ones).
fn cycle_constraints(n: usize, k: usize) -> Result<DMatrix<f64>> {
    let cols = simplex_count(n, k - 2)?;
    if k == 2 {
        return Ok(DMatrix::from_element(1, cols, 1.0));
    }
    let rows = simplex_count(n, k - 3)?;
    let mut e = DMatrix::zeros(rows, cols);
    for (j, s) in Combinations::new(n, k - 1).enumerate() {
        for pos in 0..s.len() {
            e[(face_index(&s, pos, n), j)] = f64::from(face_sign(pos));
        }
    }
    Ok(e)
}

fn coboundary_matrix(n: usize, k: usize) -> Result<DMatrix<f64>> {
    let rows = simplex_count(n, k - 1)?;
    let cols = simplex_count(n, k - 2)?;
    let mut c = DMatrix::zeros(rows, cols);
    for (i, t) in Combinations::new(n, k).enumerate() {
        for pos in 0..t.len() {
            c[(i, face_index(&t, pos, n))] = f64::from(face_sign(pos));
        }
    }
    Ok(c)
}

/// Constraint data shared by every column of a Fréchet embedding.
struct FrechetProgram {
    c: DMatrix<f64>,
    e: DMatrix<f64>,
    lo: Vec<f64>,
}

impl FrechetProgram {
    fn new(d: &KMetric) -> Result<Self> {
        let (n, k) = (d.n(), d.k());
        Ok(FrechetProgram {
            c: coboundary_matrix(n, k)?,
            e: cycle_constraints(n, k)?,
            lo: d.values().iter().map(|v| -v).collect(),
        })
    }

    fn column(&self, d: &KMetric, t: &SimplexKey, tol: f64) -> Result<(Chain, f64)> {
        let n = d.n();
        let obj = boundary_of_simplex(n, t)?;
        let sol = solve_bounded_free(&self.c, &self.lo, d.values(), &self.e, obj.coeffs(), lp::DEFAULT_TOL)?;
        let f = Chain::new(n, d.k() - 2, sol.f)?;
        let target = d.value(t);
        let achieved = sol.objective;
        if achieved < target - tol * target.max(1.0) {
            return Err(Error::NotStrong { simplex: t.vertices().to_vec(), value: target, achieved });
        }
        Ok((f, achieved))
    }
}

/// `max 1_tᵀ δ f` over `(k-2)`-cycles `f` with `|δ f| ≤ d` entrywise.
///
/// For `k = 2` the cycle condition becomes `sum f = 0`, which only removes the
/// translation freedom of vertex labels.
pub fn frechet_column(d: &KMetric, t: &SimplexKey, tol: f64) -> Result<(Chain, f64)> {
    if t.len() != d.k() || t.vertices().iter().any(|&v| v >= d.n()) {
        return Err(Error::Argument(format!("{t:?} is not a simplex of the metric")));
    }
    FrechetProgram::new(d)?.column(d, t, tol)
}

/// One Fréchet column per `(k-1)`-simplex, in canonical order.
pub fn frechet_embed(d: &KMetric) -> Result<ChainMatrix> {
    frechet_embed_with(d, crate::metric::DEFAULT_METRIC_TOL)
}

pub fn frechet_embed_with(d: &KMetric, tol: f64) -> Result<ChainMatrix> {
    let program = FrechetProgram::new(d)?;
    let keys: Vec<SimplexKey> = Combinations::new(d.n(), d.k())
        .map(|s| SimplexKey::new(s, d.n()))
        .collect::<Result<_>>()?;
    let columns: Vec<Chain> = keys
        .par_iter()
        .map(|t| program.column(d, t, tol).map(|(f, _)| f))
        .collect::<Result<_>>()?;
    ChainMatrix::from_columns(d.n(), d.k(), &columns)
}

/// `E|Z|^p` to the power `1/p` for a standard normal `Z`.
pub fn normal_abs_moment(p: f64) -> f64 {
    let moment = 2f64.powf(p / 2.0) * gamma((p + 1.0) / 2.0) / std::f64::consts::PI.sqrt();
    moment.powf(1.0 / p)
}

/// A `rows × cols` matrix of independent normals, scaled so that `‖R x‖_p`
/// estimates `‖x‖_2` for the output norm.
pub fn gaussian_map(rows: usize, cols: usize, norm_out: Norm, seed: u64) -> Result<DMatrix<f64>> {
    if rows == 0 {
        return Err(Error::Argument("target dimension must be at least 1".into()));
    }
    let scale = match norm_out {
        Norm::P(2.0) => 1.0 / (rows as f64).sqrt(),
        Norm::P(p) => 1.0 / (normal_abs_moment(p) * (rows as f64).powf(1.0 / p)),
        Norm::Inf => {
            return Err(Error::Argument("random maps into the max norm are not supported".into()))
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = DMatrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let z: f64 = StandardNormal.sample(&mut rng);
            r[(i, j)] = scale * z;
        }
    }
    Ok(r)
}

/// `F Rᵀ` for an explicit map `R` with `F.m()` columns.
pub fn project_with(f: &ChainMatrix, r: &DMatrix<f64>) -> Result<ChainMatrix> {
    if r.ncols() != f.m() {
        return Err(Error::Argument(format!(
            "map reads {} coordinates but the chain matrix has {} columns",
            r.ncols(),
            f.m()
        )));
    }
    ChainMatrix::new(f.n, f.k, &f.data * r.transpose())
}

/// `F Rᵀ` with `R` drawn by [`gaussian_map`].
pub fn random_project(f: &ChainMatrix, m_target: usize, norm_out: Norm, seed: u64) -> Result<ChainMatrix> {
    let r = gaussian_map(m_target, f.m(), norm_out, seed)?;
    project_with(f, &r)
}

/// `⌈c' k ln n / ε²⌉`.
pub fn jl_target_dim(n: usize, k: usize, eps: f64, cprime: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(cprime > 0.0 && cprime.is_finite()) {
        return Err(Error::Argument(format!("c' must be positive, got {cprime}")));
    }
    let m = (cprime * k as f64 * (n as f64).ln() / (eps * eps)).ceil().max(1.0);
    if m > MAX_TARGET_COLUMNS as f64 {
        return Err(Error::Size(format!("target dimension {m} exceeds {MAX_TARGET_COLUMNS}")));
    }
    Ok(m as usize)
}

/// Output of a randomized embedding together with its measured distortion.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    pub chains: ChainMatrix,
    pub target_dim: usize,
    pub distortion: f64,
}

/// Random projection of an ℓ2 coboundary metric to `jl_target_dim` columns.
pub fn jl_reduce(f: &ChainMatrix, eps: f64, cprime: f64, seed: u64) -> Result<Embedding> {
    let target_dim = jl_target_dim(f.n, f.k, eps, cprime)?;
    let chains = random_project(f, target_dim, Norm::P(2.0), seed)?;
    let distortion =
        max_distortion(&eval_coboundary_metric(f, Norm::P(2.0)), &eval_coboundary_metric(&chains, Norm::P(2.0)))?;
    Ok(Embedding { chains, target_dim, distortion })
}

/// Column count for moving `m` ℓ2 coordinates into ℓp with distortion `eps`.
pub fn l2_to_lp_target_dim(m: usize, p: f64, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Argument(format!("eps must lie in (0, 1), got {eps}")));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Argument(format!("p must be finite and at least 1, got {p}")));
    }
    let m = m.max(1) as f64;
    let target = if p < 2.0 { m / (eps * eps) } else { (m / (eps * eps * p)).powf(p / 2.0) };
    let target = target.ceil().max(1.0);
    if target.is_nan() || target > MAX_TARGET_COLUMNS as f64 {
        return Err(Error::Size(format!("target dimension {target} exceeds {MAX_TARGET_COLUMNS}")));
    }
    Ok(target as usize)
}

/// Maps the ℓ2 coboundary metric of `f` to an ℓp coboundary metric.
pub fn embed_l2_to_lp(f: &ChainMatrix, p: f64, eps: f64, seed: u64) -> Result<Embedding> {
    let target_dim = l2_to_lp_target_dim(f.m(), p, eps)?;
    let norm = Norm::new(p)?;
    let chains = random_project(f, target_dim, norm, seed)?;
    let distortion =
        max_distortion(&eval_coboundary_metric(f, Norm::P(2.0)), &eval_coboundary_metric(&chains, norm))?;
    Ok(Embedding { chains, target_dim, distortion })
}

/// `max_t max(d1/d2, d2/d1) − 1`, with `0/0 = 0` and `x/0 = ∞`.
pub fn max_distortion(d1: &KMetric, d2: &KMetric) -> Result<f64> {
    if d1.n() != d2.n() || d1.k() != d2.k() {
        return Err(Error::Argument(format!(
            "metrics differ in shape: ({}, {}) vs ({}, {})",
            d1.n(),
            d1.k(),
            d2.n(),
            d2.k()
        )));
    }
    let mut worst: f64 = 0.0;
    for (&a, &b) in d1.values().iter().zip(d2.values()) {
        let ratio = match (a == 0.0, b == 0.0) {
            (true, true) => 1.0,
            (false, true) | (true, false) => f64::INFINITY,
            (false, false) => (a / b).max(b / a),
        };
        worst = worst.max(ratio - 1.0);
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplex::binomial;

    fn all_ones(n: usize) -> ChainMatrix {
        let rows = binomial(n, 2) as usize;
        ChainMatrix::new(n, 3, DMatrix::from_element(rows, 1, 1.0)).unwrap()
    }

    #[test]
    fn norm_parsing() {
        assert_eq!("inf".parse::<Norm>().unwrap(), Norm::Inf);
        assert_eq!("2".parse::<Norm>().unwrap(), Norm::P(2.0));
        assert!("0.5".parse::<Norm>().is_err());
        assert!("x".parse::<Norm>().is_err());
        assert_eq!(Norm::P(3.0).of([3.0, 4.0, 5.0]), 216f64.powf(1.0 / 3.0));
    }

    #[test]
    fn all_ones_chain_gives_discrete_metric() {
        for n in 3..7 {
            let d = eval_coboundary_metric(&all_ones(n), Norm::Inf);
            assert!(d.values().iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn zero_matrix_gives_zero_metric() {
        let d = eval_coboundary_metric(&ChainMatrix::zeros(5, 3, 2).unwrap(), Norm::P(2.0));
        assert!(d.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn shape_checks() {
        assert!(ChainMatrix::new(4, 3, DMatrix::zeros(5, 1)).is_err());
        assert!(ChainMatrix::new(4, 1, DMatrix::zeros(4, 1)).is_err());
        assert!(ChainMatrix::from_row_major(4, 3, 2, &[0.0; 11]).is_err());
        let f = ChainMatrix::from_row_major(3, 2, 2, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(f.data()[(1, 0)], 3.0);
        assert_eq!(f.to_row_major(), vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
    }

    #[test]
    fn two_point_frechet_column() {
        let d = KMetric::new(2, 2, vec![5.0]).unwrap();
        let t = SimplexKey::new(vec![0, 1], 2).unwrap();
        let (f, achieved) = frechet_column(&d, &t, 1e-6).unwrap();
        assert!((achieved - 5.0).abs() < 1e-9);
        assert!(((f.coeffs()[1] - f.coeffs()[0]).abs() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn discrete_frechet_columns_reach_one() {
        let d = KMetric::from_fn(4, 3, |_| 1.0).unwrap();
        for s in Combinations::new(4, 3) {
            let t = SimplexKey::new(s, 4).unwrap();
            let (_, achieved) = frechet_column(&d, &t, 1e-6).unwrap();
            assert!((achieved - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn non_strong_input_is_rejected() {
        let d = KMetric::from_fn(4, 3, |s| if s == [0, 1, 2] { 10.0 } else { 1.0 }).unwrap();
        assert!(matches!(frechet_embed(&d), Err(Error::NotStrong { .. })));
    }

    #[test]
    fn distortion_rules() {
        let a = KMetric::new(3, 2, vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(max_distortion(&a, &a).unwrap(), 0.0);
        assert_eq!(max_distortion(&a, &a.scaled(2.0).unwrap()).unwrap(), 1.0);
        let z = KMetric::new(3, 2, vec![1.0, 0.0, 3.0]).unwrap();
        assert_eq!(max_distortion(&a, &z).unwrap(), f64::INFINITY);
        let zz = KMetric::zeros(3, 2).unwrap();
        assert_eq!(max_distortion(&zz, &zz).unwrap(), 0.0);
        assert!(max_distortion(&a, &KMetric::zeros(4, 2).unwrap()).is_err());
    }

    #[test]
    fn identity_projection_is_exact() {
        let f = ChainMatrix::from_row_major(4, 2, 2, &[0.0, 1.0, 2.0, -1.0, 0.5, 0.5, 3.0, 0.0]).unwrap();
        let g = project_with(&f, &DMatrix::identity(2, 2)).unwrap();
        assert_eq!(f, g);
        assert!(project_with(&f, &DMatrix::identity(3, 3)).is_err());
    }

    #[test]
    fn projection_is_seeded() {
        let f = ChainMatrix::from_row_major(3, 2, 1, &[0.0, 1.0, 3.0]).unwrap();
        let a = random_project(&f, 5, Norm::P(1.0), 7).unwrap();
        let b = random_project(&f, 5, Norm::P(1.0), 7).unwrap();
        let c = random_project(&f, 5, Norm::P(1.0), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(random_project(&f, 5, Norm::Inf, 7).is_err());
        assert!(random_project(&f, 0, Norm::P(2.0), 7).is_err());
    }

    #[test]
    fn normal_moments() {
        assert!((normal_abs_moment(2.0) - 1.0).abs() < 1e-12);
        assert!((normal_abs_moment(1.0) - (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-12);
        // E Z^4 = 3
        assert!((normal_abs_moment(4.0) - 3f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn target_dimensions() {
        assert_eq!(jl_target_dim(30, 3, 0.25, 8.0).unwrap(), 1307);
        assert_eq!(l2_to_lp_target_dim(30, 1.0, 0.3).unwrap(), 334);
        assert_eq!(l2_to_lp_target_dim(4, 2.0, 0.5).unwrap(), 8);
        assert!(matches!(l2_to_lp_target_dim(1000, 8.0, 0.01), Err(Error::Size(_))));
        assert!(jl_target_dim(30, 3, 1.5, 8.0).is_err());
    }
}
