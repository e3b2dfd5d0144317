//! Apex extension.
//!
//! The extension of a k-metric on `n` points lives on `n + 1` points, the
//! last one being the apex `a`. It copies `d(t)` onto `(t, a)` and is zero on
//! apex-free tuples. At the chain level the projection `P_h` drops the apex
//! from h-simplices that contain it and kills the others; its transpose is the
//! lift `L_{h-1}`.

use nalgebra::DMatrix;

use crate::coboundary::ChainMatrix;
use crate::metric::KMetric;
use crate::simplex::{simplex_count, simplex_index, Combinations, LinearChainOperator};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ApexExtension {
    pub extended: KMetric,
    /// Always the original vertex count.
    pub apex_index: usize,
}

/// The (k+1)-metric on `n + 1` points described in the module docs.
pub fn apex_extend(d: &KMetric) -> Result<ApexExtension> {
    let (n, k) = (d.n(), d.k());
    let extended = KMetric::from_fn(n + 1, k + 1, |s| {
        if s[k] == n {
            d.get(&s[..k])
        } else {
            0.0
        }
    })?;
    Ok(ApexExtension { extended, apex_index: n })
}

/// `P_h`: h-chains on `n + 1` vertices to (h-1)-chains on `n` vertices.
pub fn project_operator(n: usize, h: usize) -> Result<LinearChainOperator> {
    if h == 0 || h > n {
        return Err(Error::Argument(format!("projection degree {h} out of range 1..={n}")));
    }
    let rows = simplex_count(n, h - 1)?;
    let cols = simplex_count(n + 1, h)?;
    let mut matrix = DMatrix::<i32>::zeros(rows, cols);
    for (col, s) in Combinations::new(n + 1, h + 1).enumerate() {
        // Sorted order puts the apex last, where removing it costs no sign.
        if s[h] == n {
            matrix[(simplex_index(&s[..h], n), col)] = 1;
        }
    }
    Ok(LinearChainOperator::from_parts(n + 1, h, n, h - 1, matrix))
}

/// `L_h = P_{h+1}ᵀ`: h-chains on `n` vertices to (h+1)-chains on `n + 1`
/// vertices, sending `1_s` to `1_{(s, a)}`.
pub fn lift_operator(n: usize, h: usize) -> Result<LinearChainOperator> {
    if h >= n {
        return Err(Error::Argument(format!("lift degree {h} out of range 0..{n}")));
    }
    Ok(project_operator(n, h + 1)?.transpose())
}

/// `F' = L_{k-2} F`; its coboundary metric is the apex extension of that of `F`
/// for every norm.
pub fn apex_extend_chain_matrix(f: &ChainMatrix) -> Result<ChainMatrix> {
    let (n, k) = (f.n(), f.k());
    let lift = lift_operator(n, k - 2)?.matrix_f64();
    ChainMatrix::new(n + 1, k + 1, lift * f.data())
}
