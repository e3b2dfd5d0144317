//! Simplices of the complete complex on `n` vertices, chains over them, and the
//! boundary / coboundary operators.
//!
//! Simplices of one dimension are indexed by the lexicographic order of their
//! sorted vertex tuples. That order is the canonical row/column order used by
//! every operator, chain and file format in the crate.

use nalgebra::DMatrix;
use smallvec::SmallVec;

use crate::{Error, Result};

/// Largest number of simplices of a single dimension we are willing to
/// materialize densely.
pub const MAX_SIMPLICES: u64 = 2_000_000;

/// Binomial coefficient `C(n, r)`, saturating at `u64::MAX`.
pub fn binomial(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
        if acc > u64::MAX as u128 {
            return u64::MAX;
        }
    }
    acc as u64
}

/// Number of `dim`-simplices of the complete complex on `n` vertices, checked
/// against [`MAX_SIMPLICES`].
pub fn simplex_count(n: usize, dim: usize) -> Result<usize> {
    let count = binomial(n, dim + 1);
    if count > MAX_SIMPLICES {
        return Err(Error::Size(format!(
            "C({n}, {}) = {count} simplices exceeds the dense limit of {MAX_SIMPLICES}",
            dim + 1
        )));
    }
    Ok(count as usize)
}

/// An unoriented simplex: a strictly increasing list of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplexKey(Vec<usize>);

impl SimplexKey {
    /// Builds a key from strictly increasing vertices, all below `n`.
    pub fn new(vertices: Vec<usize>, n: usize) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::Argument("a simplex needs at least one vertex".into()));
        }
        if vertices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Argument(format!(
                "simplex vertices {vertices:?} are not strictly increasing"
            )));
        }
        if let Some(&v) = vertices.last() {
            if v >= n {
                return Err(Error::Argument(format!("vertex {v} out of range for n = {n}")));
            }
        }
        Ok(SimplexKey(vertices))
    }

    /// Builds a key from any list of distinct vertices by sorting it.
    pub fn from_unsorted(mut vertices: Vec<usize>, n: usize) -> Result<Self> {
        vertices.sort_unstable();
        Self::new(vertices, n)
    }

    pub(crate) fn from_sorted_unchecked(vertices: Vec<usize>) -> Self {
        SimplexKey(vertices)
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.binary_search(&v).is_ok()
    }

    /// Position of this simplex in the canonical order of `dim`-simplices on
    /// `n` vertices.
    pub fn index(&self, n: usize) -> usize {
        simplex_index(&self.0, n)
    }

    /// The face obtained by deleting the vertex at position `i`.
    pub fn face(&self, i: usize) -> SimplexKey {
        let mut v = self.0.clone();
        v.remove(i);
        SimplexKey(v)
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

/// Lexicographic rank of a sorted `r`-subset of `[0, n)`.
///
/// Uses `rank = C(n, r) - 1 - sum_i C(n - 1 - c_i, r - i)`.
pub fn simplex_index(sorted: &[usize], n: usize) -> usize {
    let r = sorted.len();
    let total = binomial(n, r);
    let mut tail = 0u64;
    for (i, &c) in sorted.iter().enumerate() {
        tail += binomial(n - 1 - c, r - i);
    }
    (total - 1 - tail) as usize
}

/// An ordered vertex sequence together with its sign relative to the
/// standard (sorted) orientation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedSimplex {
    sequence: Vec<usize>,
    sign: i8,
}

impl OrientedSimplex {
    pub fn new(sequence: Vec<usize>) -> Result<Self> {
        let sign = orientation_sign(&sequence)?;
        Ok(OrientedSimplex { sequence, sign })
    }

    pub fn sequence(&self) -> &[usize] {
        &self.sequence
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    /// The underlying unoriented simplex.
    pub fn key(&self, n: usize) -> Result<SimplexKey> {
        SimplexKey::from_unsorted(self.sequence.clone(), n)
    }
}

/// Parity of the permutation that sorts `sequence`: `+1` for even, `-1` for odd.
///
/// Repeated vertices are rejected; callers that treat degenerate tuples as
/// zero-valued must check for repeats first.
pub fn orientation_sign(sequence: &[usize]) -> Result<i8> {
    // Count inversions; quadratic is fine for simplex-sized inputs.
    let mut inversions = 0usize;
    for i in 0..sequence.len() {
        for j in (i + 1)..sequence.len() {
            match sequence[i].cmp(&sequence[j]) {
                std::cmp::Ordering::Greater => inversions += 1,
                std::cmp::Ordering::Equal => {
                    return Err(Error::Argument(format!(
                        "repeated vertex {} in oriented simplex {sequence:?}",
                        sequence[i]
                    )))
                }
                std::cmp::Ordering::Less => {}
            }
        }
    }
    Ok(if inversions.is_multiple_of(2) { 1 } else { -1 })
}

/// Iterator over the sorted `r`-subsets of `[0, n)` in lexicographic order.
#[derive(Debug, Clone)]
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, r: usize) -> Self {
        let current = if r == 0 || r > n { None } else { Some((0..r).collect()) };
        Combinations { n, current }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let r = out.len();
        let mut next = out.clone();
        let mut i = r;
        loop {
            if i == 0 {
                self.current = None;
                break;
            }
            i -= 1;
            if next[i] < self.n - r + i {
                next[i] += 1;
                for j in (i + 1)..r {
                    next[j] = next[j - 1] + 1;
                }
                self.current = Some(next);
                break;
            }
        }
        Some(out)
    }
}

/// All `dim`-simplices of the complete complex on `n` vertices, in canonical
/// order.
pub fn enumerate_simplices(n: usize, dim: usize) -> Result<Vec<SimplexKey>> {
    if dim >= n {
        return Err(Error::Argument(format!(
            "simplex dimension {dim} out of range for {n} vertices"
        )));
    }
    simplex_count(n, dim)?;
    Ok(Combinations::new(n, dim + 1).map(SimplexKey).collect())
}

/// A real-valued chain over the `dim`-simplices of the complete complex.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    n: usize,
    dim: usize,
    coeffs: Vec<f64>,
}

impl Chain {
    pub fn new(n: usize, dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expected = binomial(n, dim + 1) as usize;
        if coeffs.len() != expected {
            return Err(Error::Argument(format!(
                "a {dim}-chain on {n} vertices needs {expected} coefficients, got {}",
                coeffs.len()
            )));
        }
        Ok(Chain { n, dim, coeffs })
    }

    pub fn zeros(n: usize, dim: usize) -> Result<Self> {
        let len = simplex_count(n, dim)?;
        Ok(Chain { n, dim, coeffs: vec![0.0; len] })
    }

    /// The chain that is one on `simplex` (standard orientation) and zero elsewhere.
    pub fn indicator(n: usize, simplex: &SimplexKey) -> Result<Self> {
        let mut c = Chain::zeros(n, simplex.dim())?;
        c.coeffs[simplex.index(n)] = 1.0;
        Ok(c)
    }

    /// Indicator of an oriented simplex: `±1` on its underlying simplex.
    pub fn oriented_indicator(n: usize, simplex: &OrientedSimplex) -> Result<Self> {
        let key = simplex.key(n)?;
        let mut c = Chain::zeros(n, key.dim())?;
        c.coeffs[key.index(n)] = f64::from(simplex.sign());
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn get(&self, simplex: &SimplexKey) -> f64 {
        self.coeffs[simplex.index(self.n)]
    }

    /// Value on an oriented simplex, honoring antisymmetry.
    pub fn get_oriented(&self, simplex: &OrientedSimplex) -> Result<f64> {
        let key = simplex.key(self.n)?;
        Ok(f64::from(simplex.sign()) * self.get(&key))
    }

    pub fn add_scaled(&mut self, other: &Chain, scale: f64) -> Result<()> {
        if self.n != other.n || self.dim != other.dim {
            return Err(Error::Argument("chain shapes differ".into()));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += scale * b;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Chain) -> f64 {
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Weighted ℓ1 mass `sum |c[t]| * w[t]`.
    pub fn weighted_mass(&self, weights: &[f64]) -> f64 {
        self.coeffs.iter().zip(weights).map(|(c, w)| c.abs() * w).sum()
    }
}

/// A dense operator between chain spaces of the complete complex, with
/// integer entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearChainOperator {
    pub(crate) src_n: usize,
    pub(crate) dst_n: usize,
    pub(crate) src_dim: usize,
    pub(crate) dst_dim: usize,
    pub(crate) matrix: DMatrix<i32>,
}

impl LinearChainOperator {
    pub(crate) fn from_parts(
        src_n: usize,
        src_dim: usize,
        dst_n: usize,
        dst_dim: usize,
        matrix: DMatrix<i32>,
    ) -> Self {
        debug_assert_eq!(matrix.nrows(), binomial(dst_n, dst_dim + 1) as usize);
        debug_assert_eq!(matrix.ncols(), binomial(src_n, src_dim + 1) as usize);
        LinearChainOperator { src_n, dst_n, src_dim, dst_dim, matrix }
    }

    /// Vertex count of the complex the operator reads from.
    pub fn src_n(&self) -> usize {
        self.src_n
    }

    /// Vertex count of the complex the operator writes to. Differs from
    /// `src_n` only for the apex lift and projection.
    pub fn dst_n(&self) -> usize {
        self.dst_n
    }

    pub fn src_dim(&self) -> usize {
        self.src_dim
    }

    pub fn dst_dim(&self) -> usize {
        self.dst_dim
    }

    pub fn matrix(&self) -> &DMatrix<i32> {
        &self.matrix
    }

    pub fn matrix_f64(&self) -> DMatrix<f64> {
        self.matrix.map(f64::from)
    }

    pub fn transpose(&self) -> LinearChainOperator {
        LinearChainOperator {
            src_n: self.dst_n,
            dst_n: self.src_n,
            src_dim: self.dst_dim,
            dst_dim: self.src_dim,
            matrix: self.matrix.transpose(),
        }
    }

    /// Composition `self ∘ rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &LinearChainOperator) -> Result<LinearChainOperator> {
        if rhs.dst_n != self.src_n || rhs.dst_dim != self.src_dim {
            return Err(Error::Argument(format!(
                "cannot compose: inner operator lands in {}-chains on {} vertices, outer reads {}-chains on {}",
                rhs.dst_dim, rhs.dst_n, self.src_dim, self.src_n
            )));
        }
        Ok(LinearChainOperator {
            src_n: rhs.src_n,
            dst_n: self.dst_n,
            src_dim: rhs.src_dim,
            dst_dim: self.dst_dim,
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|&x| x == 0)
    }
}

/// `∂_dim`: maps `dim`-chains to `(dim-1)`-chains. The column of the simplex
/// `(x_1, ..., x_{dim+1})` carries `(-1)^{i+1}` on the face omitting `x_i`.
pub fn boundary_operator(n: usize, dim: usize) -> Result<LinearChainOperator> {
    if dim == 0 {
        return Err(Error::Argument("the boundary of 0-chains is not defined".into()));
    }
    if dim >= n {
        return Err(Error::Argument(format!(
            "boundary dimension {dim} out of range for {n} vertices"
        )));
    }
    let rows = simplex_count(n, dim - 1)?;
    let cols = simplex_count(n, dim)?;
    let mut matrix = DMatrix::<i32>::zeros(rows, cols);
    for (col, simplex) in Combinations::new(n, dim + 1).enumerate() {
        for i in 0..simplex.len() {
            let row = face_index(&simplex, i, n);
            matrix[(row, col)] = face_sign(i);
        }
    }
    Ok(LinearChainOperator::from_parts(n, dim, n, dim - 1, matrix))
}

/// `δ_dim = ∂_{dim+1}^T`: maps `dim`-chains to `(dim+1)`-chains.
pub fn coboundary_operator(n: usize, dim: usize) -> Result<LinearChainOperator> {
    if dim + 1 >= n {
        return Err(Error::Argument(format!(
            "coboundary dimension {dim} out of range for {n} vertices"
        )));
    }
    Ok(boundary_operator(n, dim + 1)?.transpose())
}

/// Matrix–vector product of an operator with a chain.
pub fn apply(op: &LinearChainOperator, c: &Chain) -> Result<Chain> {
    if c.dim != op.src_dim || c.n != op.src_n {
        return Err(Error::Argument(format!(
            "operator reads {}-chains on {} vertices, got a {}-chain on {}",
            op.src_dim, op.src_n, c.dim, c.n
        )));
    }
    let mut out = vec![0.0; op.matrix.nrows()];
    for (col, &x) in c.coeffs.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        for (row, &a) in op.matrix.column(col).iter().enumerate() {
            if a != 0 {
                out[row] += f64::from(a) * x;
            }
        }
    }
    Chain::new(op.dst_n, op.dst_dim, out)
}

/// Sign `(-1)^{i+1}` of the face omitting the `i`-th vertex (1-based `i`),
/// written for a 0-based position.
#[inline]
pub(crate) fn face_sign(pos: usize) -> i32 {
    if pos.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Canonical index of the face of a sorted simplex obtained by removing the
/// vertex at `pos`.
#[inline]
pub(crate) fn face_index(sorted: &[usize], pos: usize, n: usize) -> usize {
    let face: SmallVec<[usize; 8]> = sorted
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != pos)
        .map(|(_, &v)| v)
        .collect();
    simplex_index(&face, n)
}

/// `∂ 1_t` for a sorted simplex `t` of dimension ≥ 1, as a chain.
pub fn boundary_of_simplex(n: usize, simplex: &SimplexKey) -> Result<Chain> {
    if simplex.dim() == 0 {
        return Err(Error::Argument("the boundary of a vertex is not defined".into()));
    }
    let mut c = Chain::zeros(n, simplex.dim() - 1)?;
    for i in 0..simplex.len() {
        c.coeffs[face_index(simplex.vertices(), i, n)] += f64::from(face_sign(i));
    }
    Ok(c)
}

/// Relabels a chain by a vertex permutation `perm` (vertex `v` becomes
/// `perm[v]`), tracking orientation signs.
pub fn permute_chain(c: &Chain, perm: &[usize]) -> Result<Chain> {
    if perm.len() != c.n {
        return Err(Error::Argument("permutation length must equal n".into()));
    }
    let mut out = Chain::zeros(c.n, c.dim)?;
    for (i, simplex) in Combinations::new(c.n, c.dim + 1).enumerate() {
        let image: Vec<usize> = simplex.iter().map(|&v| perm[v]).collect();
        let sign = orientation_sign(&image)?;
        let key = SimplexKey::from_unsorted(image, c.n)?;
        out.coeffs[key.index(c.n)] = f64::from(sign) * c.coeffs[i];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn keys(list: &[&[usize]]) -> Vec<SimplexKey> {
        list.iter().map(|v| SimplexKey(v.to_vec())).collect()
    }

    #[test]
    fn enumeration_is_lexicographic() {
        assert_eq!(enumerate_simplices(3, 1).unwrap(), keys(&[&[0, 1], &[0, 2], &[1, 2]]));
        assert_eq!(
            enumerate_simplices(4, 2).unwrap(),
            keys(&[&[0, 1, 2], &[0, 1, 3], &[0, 2, 3], &[1, 2, 3]])
        );
        assert_eq!(
            enumerate_simplices(5, 0).unwrap(),
            keys(&[&[0], &[1], &[2], &[3], &[4]])
        );
    }

    #[test]
    fn enumeration_rejects_out_of_range_dim() {
        assert!(matches!(enumerate_simplices(3, 3), Err(Error::Argument(_))));
    }

    #[test]
    fn index_round_trips() {
        for n in 1..=9 {
            for dim in 0..n.min(5) {
                for (i, s) in enumerate_simplices(n, dim).unwrap().iter().enumerate() {
                    assert_eq!(s.index(n), i, "n={n} dim={dim} {s:?}");
                }
            }
        }
    }

    #[test]
    fn size_guard() {
        assert!(matches!(simplex_count(200, 4), Err(Error::Size(_))));
        assert_eq!(simplex_count(200, 1).unwrap(), 19_900);
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(orientation_sign(&[0, 1, 2]).unwrap(), 1);
        assert_eq!(orientation_sign(&[1, 0, 2]).unwrap(), -1);
        assert_eq!(orientation_sign(&[2, 0, 1]).unwrap(), 1);
        assert!(matches!(orientation_sign(&[0, 1, 0]), Err(Error::Argument(_))));
    }

    #[test]
    fn simplex_key_validation() {
        assert!(SimplexKey::new(vec![0, 2, 1], 3).is_err());
        assert!(SimplexKey::new(vec![0, 3], 3).is_err());
        assert!(SimplexKey::new(vec![], 3).is_err());
        assert_eq!(SimplexKey::from_unsorted(vec![2, 0], 3).unwrap().vertices(), &[0, 2]);
    }

    #[test]
    fn boundary_column_signs() {
        let d2 = boundary_operator(3, 2).unwrap();
        // rows: (0,1), (0,2), (1,2)
        assert_eq!(d2.matrix().column(0).iter().copied().collect::<Vec<_>>(), vec![1, -1, 1]);
        let d1 = boundary_operator(2, 1).unwrap();
        // rows: (0), (1); ∂(0,1) = (1) - (0)
        assert_eq!(d1.matrix().column(0).iter().copied().collect::<Vec<_>>(), vec![-1, 1]);
        assert!(boundary_operator(3, 0).is_err());
    }

    #[test]
    fn boundary_squared_vanishes() {
        let d1 = boundary_operator(5, 1).unwrap();
        let d2 = boundary_operator(5, 2).unwrap();
        assert!(d1.compose(&d2).unwrap().is_zero());
    }

    #[test]
    fn coboundary_is_transpose() {
        let d = boundary_operator(3, 2).unwrap();
        let delta = coboundary_operator(3, 1).unwrap();
        assert_eq!(delta.matrix(), &d.matrix().transpose());
        assert_eq!((delta.src_dim(), delta.dst_dim()), (1, 2));
        let delta0 = coboundary_operator(5, 0).unwrap();
        let delta1 = coboundary_operator(5, 1).unwrap();
        assert!(delta1.compose(&delta0).unwrap().is_zero());
        assert!(coboundary_operator(3, 2).is_err());
    }

    #[test]
    fn coboundary_of_all_ones_edge_chain() {
        let ones = Chain::new(3, 1, vec![1.0; 3]).unwrap();
        let out = apply(&coboundary_operator(3, 1).unwrap(), &ones).unwrap();
        assert_eq!(out.coeffs(), &[1.0]);
    }

    #[test]
    fn apply_examples() {
        let t = SimplexKey::new(vec![0, 1, 2], 4).unwrap();
        let d2 = boundary_operator(4, 2).unwrap();
        let out = apply(&d2, &Chain::indicator(4, &t).unwrap()).unwrap();
        let expected = boundary_of_simplex(4, &t).unwrap();
        assert_eq!(out, expected);
        // edges on 4 vertices: (0,1) (0,2) (0,3) (1,2) (1,3) (2,3)
        assert_eq!(out.coeffs(), &[1.0, -1.0, 0.0, 1.0, 0.0, 0.0]);

        let d1 = boundary_operator(4, 1).unwrap();
        let zero = apply(&d1, &Chain::zeros(4, 1).unwrap()).unwrap();
        assert!(zero.coeffs().iter().all(|&x| x == 0.0));

        assert!(apply(&d1, &Chain::zeros(4, 2).unwrap()).is_err());
    }

    #[test]
    fn oriented_indicator_and_lookup() {
        let s = OrientedSimplex::new(vec![2, 0, 1]).unwrap();
        assert_eq!(s.sign(), 1);
        let s = OrientedSimplex::new(vec![1, 0]).unwrap();
        let c = Chain::oriented_indicator(3, &s).unwrap();
        assert_eq!(c.coeffs(), &[-1.0, 0.0, 0.0]);
        assert_eq!(c.get_oriented(&s).unwrap(), 1.0);
    }

    #[test]
    fn chain_length_checked() {
        assert!(Chain::new(4, 1, vec![0.0; 5]).is_err());
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(30, 3), 4060);
    }
}
