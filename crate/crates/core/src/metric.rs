//! The k-metric value table and its verification.
//!
//! Weak verification checks the simplex inequality directly. Strong
//! verification compares every value `d(t)` with the cost of a minimum
//! bounding chain of `∂ 1_t`, computed by linear programming.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::lp::{self, LpStatus, StandardFormLp};
use crate::simplex::{
    boundary_of_simplex, face_index, face_sign, orientation_sign, simplex_count,
    simplex_index, Chain, Combinations, SimplexKey,
};
use crate::{Error, Result};

/// Relative tolerance for metric comparisons.
pub const DEFAULT_METRIC_TOL: f64 = 1e-6;

/// A symmetric function on k-subsets of `[0, n)`, zero on tuples with repeats.
///
/// `values[i]` belongs to the `i`-th `(k-1)`-simplex in canonical order.
#[derive(Debug, Clone, PartialEq)]
pub struct KMetric {
    n: usize,
    k: usize,
    values: Vec<f64>,
}

impl KMetric {
    pub fn new(n: usize, k: usize, values: Vec<f64>) -> Result<Self> {
        if k < 2 {
            return Err(Error::Argument(format!("arity must be at least 2, got {k}")));
        }
        if n < k {
            return Err(Error::Argument(format!("need at least k = {k} points, got {n}")));
        }
        let expected = simplex_count(n, k - 1)?;
        if values.len() != expected {
            return Err(Error::Argument(format!(
                "a {k}-metric on {n} points needs {expected} values, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::Argument(format!("value {v} at index {i} is negative or not finite")));
        }
        Ok(KMetric { n, k, values })
    }

    /// Builds a table by evaluating `f` on every sorted k-subset.
    pub fn from_fn(n: usize, k: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        if k < 2 || n < k {
            return Err(Error::Argument(format!("invalid shape n = {n}, k = {k}")));
        }
        simplex_count(n, k - 1)?;
        let values = Combinations::new(n, k).map(|s| f(&s)).collect();
        KMetric::new(n, k, values)
    }

    pub fn zeros(n: usize, k: usize) -> Result<Self> {
        KMetric::from_fn(n, k, |_| 0.0)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value on an ordered tuple: zero when it repeats a vertex, otherwise the
    /// table entry of the sorted tuple.
    pub fn get(&self, tuple: &[usize]) -> f64 {
        assert_eq!(tuple.len(), self.k, "tuple length must equal the arity");
        let mut sorted = tuple.to_vec();
        sorted.sort_unstable();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return 0.0;
        }
        assert!(sorted[self.k - 1] < self.n, "vertex out of range");
        self.values[simplex_index(&sorted, self.n)]
    }

    pub fn value(&self, simplex: &SimplexKey) -> f64 {
        self.values[simplex.index(self.n)]
    }

    /// The canonical simplices paired with their values.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, f64)> + '_ {
        Combinations::new(self.n, self.k).zip(self.values.iter().copied())
    }

    pub fn scaled(&self, factor: f64) -> Result<KMetric> {
        KMetric::new(self.n, self.k, self.values.iter().map(|v| v * factor).collect())
    }

    /// Relabels vertices: the value of `s` moves to `perm(s)`.
    pub fn permute_vertices(&self, perm: &[usize]) -> Result<KMetric> {
        check_permutation(perm, self.n)?;
        let mut values = vec![0.0; self.values.len()];
        for (s, v) in self.entries() {
            let mut image: Vec<usize> = s.iter().map(|&x| perm[x]).collect();
            image.sort_unstable();
            values[simplex_index(&image, self.n)] = v;
        }
        KMetric::new(self.n, self.k, values)
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Argument(format!("permutation has length {} but n = {n}", perm.len())));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::Argument(format!("{perm:?} is not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    /// Relative tolerance for the simplex inequalities.
    pub tol: f64,
    /// Run every strong-inequality program instead of stopping at the first
    /// witness.
    pub exhaustive: bool,
    /// Pivot tolerance handed to the LP solver.
    pub lp_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { tol: DEFAULT_METRIC_TOL, exhaustive: false, lp_tol: lp::DEFAULT_TOL }
    }
}

/// `d(t) > sum_i d(t with x_i replaced by y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakViolation {
    pub simplex: SimplexKey,
    pub y: usize,
    pub value: f64,
    pub bound: f64,
}

/// A chain with the same boundary as `simplex` that is cheaper than `d(simplex)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongWitness {
    pub simplex: SimplexKey,
    pub chain: Chain,
    pub cost: f64,
    pub value: f64,
}

/// Minimum bounding-chain cost next to the metric value for one simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct StrongMargin {
    pub simplex: SimplexKey,
    pub value: f64,
    pub cost: f64,
}

impl StrongMargin {
    /// `cost - value`; negative when the strong inequality fails.
    pub fn margin(&self) -> f64 {
        self.cost - self.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub n: usize,
    pub k: usize,
    pub is_weak: bool,
    /// `None` unless strong verification ran.
    pub is_strong: Option<bool>,
    /// Distinct tuples with value zero (the metric is pseudo when non-empty).
    pub pseudo_violations: Vec<SimplexKey>,
    pub weak_violations: Vec<WeakViolation>,
    pub strong_witness: Option<StrongWitness>,
    /// One entry per strong-inequality program that was solved.
    pub strong_margins: Vec<StrongMargin>,
}

impl VerificationReport {
    pub fn is_pseudo(&self) -> bool {
        !self.pseudo_violations.is_empty()
    }

    pub fn min_margin(&self) -> Option<f64> {
        self.strong_margins.iter().map(StrongMargin::margin).reduce(f64::min)
    }
}

fn exceeds(value: f64, bound: f64, tol: f64) -> bool {
    value > bound + tol * value.abs().max(1.0)
}

/// Checks the simplex inequality for every k-subset and every other point.
pub fn check_weak(d: &KMetric) -> VerificationReport {
    check_weak_with(d, &VerifyOptions::default())
}

pub fn check_weak_with(d: &KMetric, opts: &VerifyOptions) -> VerificationReport {
    let (n, k) = (d.n, d.k);
    let mut pseudo_violations = Vec::new();
    let mut weak_violations = Vec::new();
    let mut replaced = vec![0usize; k];
    for (s, value) in d.entries() {
        if value == 0.0 {
            pseudo_violations.push(SimplexKey::from_sorted_unchecked(s.clone()));
        }
        for y in 0..n {
            // y inside t gives the trivial bound d(t) <= d(t).
            if s.binary_search(&y).is_ok() {
                continue;
            }
            let mut bound = 0.0;
            for i in 0..k {
                replaced.copy_from_slice(&s);
                replaced[i] = y;
                bound += d.get(&replaced);
            }
            if exceeds(value, bound, opts.tol) {
                weak_violations.push(WeakViolation {
                    simplex: SimplexKey::from_sorted_unchecked(s.clone()),
                    y,
                    value,
                    bound,
                });
            }
        }
    }
    VerificationReport {
        n,
        k,
        is_weak: weak_violations.is_empty(),
        is_strong: None,
        pseudo_violations,
        weak_violations,
        strong_witness: None,
        strong_margins: Vec::new(),
    }
}

/// A minimum-cost bounding chain.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundingChain {
    pub cost: f64,
    pub chain: Chain,
}

/// Minimum of `sum |α[τ]| w(τ)` over `(k-1)`-chains `α` supported on `mask`
/// with `∂α = target`, where `target` is a `(k-2)`-chain.
///
/// `weights` is indexed by canonical `(k-1)`-simplex; entries outside the mask
/// are ignored.
pub fn min_bounding_chain(
    weights: &[f64],
    target: &Chain,
    mask: Option<&[bool]>,
) -> Result<BoundingChain> {
    min_bounding_chain_with(weights, target, mask, lp::DEFAULT_TOL)
}

pub fn min_bounding_chain_with(
    weights: &[f64],
    target: &Chain,
    mask: Option<&[bool]>,
    lp_tol: f64,
) -> Result<BoundingChain> {
    let n = target.n();
    let dim = target.dim() + 1;
    if dim >= n {
        return Err(Error::Argument(format!(
            "no {dim}-simplices exist on {n} vertices to bound a {}-chain",
            target.dim()
        )));
    }
    let count = simplex_count(n, dim)?;
    if weights.len() != count {
        return Err(Error::Argument(format!(
            "expected {count} weights for {dim}-simplices, got {}",
            weights.len()
        )));
    }
    if let Some(m) = mask {
        if m.len() != count {
            return Err(Error::Argument(format!("mask needs {count} entries, got {}", m.len())));
        }
    }
    if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
        return Err(Error::Argument(format!("weights must be finite and non-negative, got {w}")));
    }

    let allowed: Vec<(usize, Vec<usize>)> = Combinations::new(n, dim + 1)
        .enumerate()
        .filter(|(i, _)| mask.is_none_or(|m| m[*i]))
        .collect();
    let rows = target.coeffs().len();
    let p = allowed.len();
    let mut a = DMatrix::<f64>::zeros(rows, 2 * p);
    let mut cost = vec![0.0; 2 * p];
    for (j, (idx, s)) in allowed.iter().enumerate() {
        for pos in 0..s.len() {
            let row = face_index(s, pos, n);
            let sign = f64::from(face_sign(pos));
            a[(row, j)] = sign;
            a[(row, p + j)] = -sign;
        }
        cost[j] = weights[*idx];
        cost[p + j] = weights[*idx];
    }
    let lp = StandardFormLp::new(a, target.coeffs().to_vec(), cost)?;
    let sol = lp::solve(&lp, lp_tol)?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => {
            return Err(Error::NotFillable(format!(
                "no chain on the allowed {dim}-simplices has the requested boundary"
            )))
        }
        LpStatus::Unbounded => {
            return Err(Error::Solver("bounding-chain program reported unbounded".into()))
        }
    }

    let mut coeffs = vec![0.0; count];
    for (j, (idx, _)) in allowed.iter().enumerate() {
        // α⁺ − α⁻ drops any mass common to both sides.
        coeffs[*idx] = sol.x[j] - sol.x[p + j];
    }
    let chain = Chain::new(n, dim, coeffs)?;
    let boundary = boundary_chain(&chain)?;
    let residual = boundary.max_abs_diff(target);
    if residual > 1e-6 {
        return Err(Error::Solver(format!("bounding chain misses its target by {residual:.3e}")));
    }
    let cost = chain.weighted_mass(weights);
    Ok(BoundingChain { cost, chain })
}

/// `∂c` computed face by face.
pub(crate) fn boundary_chain(c: &Chain) -> Result<Chain> {
    let n = c.n();
    let mut out = Chain::zeros(n, c.dim() - 1)?;
    for (s, &x) in Combinations::new(n, c.dim() + 1).zip(c.coeffs()) {
        if x == 0.0 {
            continue;
        }
        for pos in 0..s.len() {
            out.coeffs_mut()[face_index(&s, pos, n)] += f64::from(face_sign(pos)) * x;
        }
    }
    Ok(out)
}

fn strong_margin(d: &KMetric, index: usize, simplex: Vec<usize>, lp_tol: f64) -> Result<(StrongMargin, Chain)> {
    let key = SimplexKey::from_sorted_unchecked(simplex);
    let target = boundary_of_simplex(d.n, &key)?;
    let bc = min_bounding_chain_with(&d.values, &target, None, lp_tol)?;
    let margin = StrongMargin { simplex: key, value: d.values[index], cost: bc.cost };
    Ok((margin, bc.chain))
}

/// Strong verification: one bounding-chain program per `(k-1)`-simplex.
///
/// Programs run in parallel on the current rayon pool. Unless
/// `opts.exhaustive` is set, work proceeds in canonical-order batches and
/// stops after the first batch containing a violation; the reported witness
/// is always the violating simplex with the lowest canonical index.
pub fn check_strong(d: &KMetric, opts: &VerifyOptions) -> Result<VerificationReport> {
    let mut report = check_weak_with(d, opts);
    let simplices: Vec<(usize, Vec<usize>)> = Combinations::new(d.n, d.k).enumerate().collect();
    let batch = if opts.exhaustive { simplices.len().max(1) } else { 32 };
    let mut margins = Vec::with_capacity(simplices.len());
    let mut witness = None;
    for chunk in simplices.chunks(batch) {
        let results: Vec<(StrongMargin, Chain)> = chunk
            .par_iter()
            .map(|(i, s)| strong_margin(d, *i, s.clone(), opts.lp_tol))
            .collect::<Result<_>>()?;
        for (m, chain) in results {
            if witness.is_none() && exceeds(m.value, m.cost, opts.tol) {
                witness = Some(StrongWitness {
                    simplex: m.simplex.clone(),
                    chain,
                    cost: m.cost,
                    value: m.value,
                });
            }
            margins.push(m);
        }
        if witness.is_some() && !opts.exhaustive {
            break;
        }
    }
    report.is_strong = Some(witness.is_none());
    report.strong_witness = witness;
    report.strong_margins = margins;
    Ok(report)
}

/// The chain `sum_i 1_{t with x_i replaced by y}` (as oriented simplices),
/// whose boundary equals `∂ 1_t`.
pub fn replacement_chain(n: usize, simplex: &SimplexKey, y: usize) -> Result<Chain> {
    if simplex.contains(y) {
        return Err(Error::Argument(format!("{y} already belongs to {simplex:?}")));
    }
    let mut c = Chain::zeros(n, simplex.dim())?;
    for i in 0..simplex.len() {
        let mut seq = simplex.vertices().to_vec();
        seq[i] = y;
        let sign = orientation_sign(&seq)?;
        seq.sort_unstable();
        c.coeffs_mut()[simplex_index(&seq, n)] += f64::from(sign);
    }
    Ok(c)
}
