//! Simplex volumes of point clouds.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coboundary::{ChainMatrix, Norm};
use crate::linalg::determinant;
use crate::metric::KMetric;
use crate::simplex::{simplex_count, Combinations};
use crate::{Error, Result};

/// Determinants below this magnitude count as degenerate when reporting.
pub const DEGENERATE_TOL: f64 = 1e-12;

/// `n` points in `R^m`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    m: usize,
    points: Vec<Vec<f64>>,
}

impl PointCloud {
    pub fn new(m: usize, points: Vec<Vec<f64>>) -> Result<Self> {
        if m == 0 {
            return Err(Error::Argument("ambient dimension must be at least 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != m {
                return Err(Error::Argument(format!(
                    "point {i} has {} coordinates, expected {m}",
                    p.len()
                )));
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::Argument(format!("point {i} has a non-finite coordinate")));
            }
        }
        Ok(PointCloud { m, points })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    fn select(&self, s: &[usize]) -> Vec<&[f64]> {
        s.iter().map(|&i| self.points[i].as_slice()).collect()
    }
}

fn factorial(r: usize) -> f64 {
    (1..=r).map(|i| i as f64).product()
}

fn common_dim(points: &[&[f64]]) -> Result<usize> {
    let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::Argument("no points given".into()))?;
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::Argument("points have different dimensions".into()));
    }
    Ok(dim)
}

/// Columns `x_i − x_1` for `i ≥ 2`.
fn edge_matrix(points: &[&[f64]], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, points.len() - 1, |r, c| points[c + 1][r] - points[0][r])
}

/// `det(x_2 − x_1, ..., x_k − x_1) / (k−1)!` for `k` points in `R^{k−1}`.
pub fn signed_volume(points: &[&[f64]]) -> Result<f64> {
    let dim = common_dim(points)?;
    if dim + 1 != points.len() {
        return Err(Error::Argument(format!(
            "signed volume needs {} points in dimension {dim}, got {}",
            dim + 1,
            points.len()
        )));
    }
    Ok(determinant(edge_matrix(points, dim)) / factorial(dim))
}

/// Unsigned `(k−1)`-volume of `k` points in `R^m`, `sqrt(det(AᵀA)) / (k−1)!`.
///
/// The Gram determinant is taken as `det(R)²` from a QR factorization of `A`,
/// which avoids squaring the condition number.
pub fn gram_volume(points: &[&[f64]]) -> Result<f64> {
    let dim = common_dim(points)?;
    let r = points.len() - 1;
    if r > dim {
        return Err(Error::Argument(format!(
            "{} points span at most dimension {dim}",
            points.len()
        )));
    }
    if r == 0 {
        return Ok(1.0);
    }
    let qr = edge_matrix(points, dim).qr();
    let diag = qr.r();
    let prod: f64 = (0..r).map(|i| diag[(i, i)].abs()).product();
    Ok(prod / factorial(r))
}

/// `d(t)` = volume of the `k` points of `t`. Zero everywhere when `k > m + 1`.
pub fn volume_metric(cloud: &PointCloud, k: usize) -> Result<KMetric> {
    let n = cloud.n();
    if k < 2 || n < k {
        return Err(Error::Argument(format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")));
    }
    simplex_count(n, k - 1)?;
    if k > cloud.m + 1 {
        return KMetric::zeros(n, k);
    }
    let simplices: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let values = simplices
        .par_iter()
        .map(|s| gram_volume(&cloud.select(s)))
        .collect::<Result<Vec<f64>>>()?;
    KMetric::new(n, k, values)
}

/// Signed volumes of the projections onto every coordinate subspace of
/// dimension `k − 1`, subsets in lexicographic order.
pub fn projected_volume_vector(points: &[&[f64]]) -> Result<Vec<f64>> {
    let dim = common_dim(points)?;
    let r = points.len() - 1;
    if r > dim || r == 0 {
        return Err(Error::Argument(format!(
            "cannot project {} points in dimension {dim}",
            points.len()
        )));
    }
    let a = edge_matrix(points, dim);
    let scale = factorial(r);
    Ok(Combinations::new(dim, r)
        .map(|rows| determinant(a.select_rows(rows.iter())) / scale)
        .collect())
}

/// p-norm of [`projected_volume_vector`].
pub fn nu_kp(points: &[&[f64]], norm: Norm) -> Result<f64> {
    Ok(norm.of(projected_volume_vector(points)?))
}

/// One column per coordinate subset `I` of size `k − 1`: the `(k−2)`-simplex
/// `s` gets the signed volume of the cone from the origin over the
/// projection of `s` onto `I`.
pub fn volume_to_coboundary(cloud: &PointCloud, k: usize) -> Result<ChainMatrix> {
    let n = cloud.n();
    if k < 2 || n < k {
        return Err(Error::Argument(format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")));
    }
    let r = k - 1;
    if r > cloud.m {
        return Err(Error::Argument(format!(
            "arity {k} needs ambient dimension at least {r}, got {}",
            cloud.m
        )));
    }
    let rows = simplex_count(n, k - 2)?;
    let subsets: Vec<Vec<usize>> = Combinations::new(cloud.m, r).collect();
    let scale = factorial(r);
    let faces: Vec<Vec<usize>> = Combinations::new(n, k - 1).collect();
    let entries: Vec<Vec<f64>> = faces
        .par_iter()
        .map(|s| {
            let y = DMatrix::from_fn(cloud.m, r, |row, c| cloud.points[s[c]][row]);
            subsets.iter().map(|i| determinant(y.select_rows(i.iter())) / scale).collect()
        })
        .collect();
    let data = DMatrix::from_fn(rows, subsets.len(), |i, j| entries[i][j]);
    ChainMatrix::new(n, k, data)
}

/// `Σ_I det(A_I)²` over all square row selections of `a` (`rows ≥ cols`).
pub fn cauchy_binet_sum(a: &DMatrix<f64>) -> Result<f64> {
    let (m, k) = a.shape();
    if k > m {
        return Err(Error::Argument(format!("need at least as many rows as columns, got {m} × {k}")));
    }
    Ok(Combinations::new(m, k).map(|rows| determinant(a.select_rows(rows.iter())).powi(2)).sum())
}

/// Shortest side `μ⁻` of a triangle and the bound `2·area / μ⁺` it dominates.
pub fn min_max_side_bound_check(points: [&[f64]; 3]) -> Result<(f64, f64)> {
    common_dim(&points)?;
    let dist = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let sides = [dist(points[0], points[1]), dist(points[0], points[2]), dist(points[1], points[2])];
    let mu_minus = sides.iter().copied().fold(f64::INFINITY, f64::min);
    let mu_plus = sides.iter().copied().fold(0.0, f64::max);
    let area = gram_volume(&points)?;
    let lower = if mu_plus > 0.0 { 2.0 * area / mu_plus } else { 0.0 };
    assert!(mu_minus >= lower - 1e-9, "shortest side {mu_minus} below 2·area/longest side {lower}");
    Ok((mu_minus, lower))
}

/// Whether a determinant is small enough to report the simplex as degenerate.
pub fn is_degenerate(volume: f64) -> bool {
    volume.abs() < DEGENERATE_TOL
}
