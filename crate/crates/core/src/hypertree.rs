//! Weighted complexes, their minimum-bounding-chain k-metrics, and hypertrees.
//!
//! A [`WeightedComplex`] lists weighted `(k-1)`-simplices (facets) on top of
//! the complete `(k-2)`-skeleton. It is a hypertree when its facets carry no
//! cycle and every `(k-2)`-cycle bounds a facet chain; its k-metric is then
//! an ℓ1 coboundary metric.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::coboundary::ChainMatrix;
use crate::linalg::rank;
use crate::metric::{min_bounding_chain, KMetric};
use crate::simplex::{
    binomial, boundary_of_simplex, face_index, face_sign, simplex_count, Combinations, SimplexKey,
};
use crate::{Error, Result};

/// Pivot tolerance for the rank tests.
pub const RANK_TOL: f64 = 1e-9;

/// Largest accepted residual of a facet column of the ℓ1 construction.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedComplex {
    n: usize,
    k: usize,
    /// Sorted by canonical index.
    facets: Vec<(SimplexKey, f64)>,
}

impl WeightedComplex {
    pub fn new(n: usize, k: usize, mut facets: Vec<(SimplexKey, f64)>) -> Result<Self> {
        if k < 2 || n < k {
            return Err(Error::Argument(format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")));
        }
        simplex_count(n, k - 1)?;
        for (s, w) in &facets {
            if s.len() != k || s.vertices().iter().any(|&v| v >= n) {
                return Err(Error::Argument(format!(
                    "facet {:?} is not a {}-simplex on {n} vertices",
                    s.vertices(),
                    k - 1
                )));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(Error::Argument(format!(
                    "facet {:?} has weight {w}; weights must be positive",
                    s.vertices()
                )));
            }
        }
        facets.sort_by_key(|(s, _)| s.index(n));
        if let Some(w) = facets.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Argument(format!("facet {:?} listed twice", w[0].0.vertices())));
        }
        Ok(WeightedComplex { n, k, facets })
    }

    /// Every `(k-1)`-simplex with the weight `w(t)`.
    pub fn complete(n: usize, k: usize, mut w: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        if k < 2 || n < k {
            return Err(Error::Argument(format!("need n ≥ k ≥ 2, got n = {n}, k = {k}")));
        }
        simplex_count(n, k - 1)?;
        let facets = Combinations::new(n, k)
            .map(|s| {
                let weight = w(&s);
                (SimplexKey::from_sorted_unchecked(s), weight)
            })
            .collect();
        WeightedComplex::new(n, k, facets)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn facets(&self) -> &[(SimplexKey, f64)] {
        &self.facets
    }

    /// The same complex with `extra` added; fails if it is already a facet.
    pub fn with_facet(&self, extra: SimplexKey, w: f64) -> Result<Self> {
        let mut facets = self.facets.clone();
        facets.push((extra, w));
        WeightedComplex::new(self.n, self.k, facets)
    }

    /// Weights over all `(k-1)`-simplices (zero off the complex) and the
    /// membership mask.
    pub fn weights_and_mask(&self) -> (Vec<f64>, Vec<bool>) {
        let count = binomial(self.n, self.k) as usize;
        let mut weights = vec![0.0; count];
        let mut mask = vec![false; count];
        for (s, w) in &self.facets {
            let i = s.index(self.n);
            weights[i] = *w;
            mask[i] = true;
        }
        (weights, mask)
    }

    /// Boundary matrix restricted to the facets: rows are `(k-2)`-simplices,
    /// columns follow [`WeightedComplex::facets`].
    pub fn boundary_matrix(&self) -> DMatrix<f64> {
        let rows = binomial(self.n, self.k - 1) as usize;
        let mut b = DMatrix::zeros(rows, self.facets.len());
        for (j, (s, _)) in self.facets.iter().enumerate() {
            for pos in 0..s.len() {
                b[(face_index(s.vertices(), pos, self.n), j)] = f64::from(face_sign(pos));
            }
        }
        b
    }
}

/// `d(t)` = cheapest facet chain with boundary `∂ 1_t`, for every k-subset `t`.
pub fn mbc_metric(complex: &WeightedComplex) -> Result<KMetric> {
    let (n, k) = (complex.n, complex.k);
    let (weights, mask) = complex.weights_and_mask();
    let simplices: Vec<Vec<usize>> = Combinations::new(n, k).collect();
    let values = simplices
        .par_iter()
        .map(|s| {
            let key = SimplexKey::from_sorted_unchecked(s.clone());
            let target = boundary_of_simplex(n, &key)?;
            match min_bounding_chain(&weights, &target, Some(&mask)) {
                Ok(bc) => Ok(bc.cost),
                Err(Error::NotFillable(_)) => Err(Error::NotFillable(format!(
                    "complex does not fill all boundaries: no facet chain bounds ∂{s:?}"
                ))),
                Err(e) => Err(e),
            }
        })
        .collect::<Result<Vec<f64>>>()?;
    KMetric::new(n, k, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypertreeReport {
    pub facets: usize,
    pub rank: usize,
    /// Dimension of the `(k-2)`-cycle space of the complete skeleton (reduced
    /// for `k = 2`).
    pub cycle_dim: usize,
    pub acyclic: bool,
    pub fills_cycles: bool,
    pub is_hypertree: bool,
}

pub fn is_hypertree(complex: &WeightedComplex) -> HypertreeReport {
    let r = rank(&complex.boundary_matrix(), RANK_TOL);
    let facets = complex.facets.len();
    let cycle_dim = binomial(complex.n - 1, complex.k - 1) as usize;
    let acyclic = r == facets;
    let fills_cycles = r == cycle_dim;
    HypertreeReport { facets, rank: r, cycle_dim, acyclic, fills_cycles, is_hypertree: acyclic && fills_cycles }
}

/// `F` with one column per facet such that `1_τᵀ δ F = w(τ) 1_τ` on facets.
///
/// Every `∂ 1_t` is the boundary of a unique facet chain `α`, so row `t` of
/// `δ F` is `α ∘ w` and its ℓ1 norm is the bounding-chain cost.
pub fn hypertree_to_l1(complex: &WeightedComplex) -> Result<ChainMatrix> {
    let report = is_hypertree(complex);
    if !report.is_hypertree {
        return Err(Error::Argument(format!(
            "complex is not a hypertree (rank {}, {} facets, cycle dimension {})",
            report.rank, report.facets, report.cycle_dim
        )));
    }
    let b = complex.boundary_matrix();
    let gram = b.transpose() * &b;
    let w = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        complex.facets.len(),
        complex.facets.iter().map(|(_, w)| *w),
    ));
    let coeffs = gram
        .clone()
        .cholesky()
        .map(|c| c.solve(&w))
        .or_else(|| gram.lu().solve(&w))
        .ok_or_else(|| Error::Solver("facet Gram matrix is singular".into()))?;
    let f = &b * coeffs;
    let residual = b.transpose() * &f - &w;
    for (j, (s, wj)) in complex.facets.iter().enumerate() {
        let r = residual.column(j).amax();
        if r > RESIDUAL_TOL * wj.max(1.0) {
            return Err(Error::NotCoboundary { facet: s.vertices().to_vec(), residual: r });
        }
    }
    ChainMatrix::new(complex.n, complex.k, f)
}
