//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;

/// Rank by Gaussian elimination with partial pivoting. Pivots with magnitude
/// at most `tol` are treated as zero.
pub fn rank(m: &DMatrix<f64>, tol: f64) -> usize {
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let (p, best) = (r..rows)
            .map(|i| (i, a[(i, c)].abs()))
            .fold((r, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
        if best <= tol {
            continue;
        }
        a.swap_rows(r, p);
        let piv = a[(r, c)];
        for i in (r + 1)..rows {
            let factor = a[(i, c)] / piv;
            if factor != 0.0 {
                for j in c..cols {
                    let v = a[(r, j)];
                    a[(i, j)] -= factor * v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Determinant through an LU factorization with partial pivoting.
pub fn determinant(m: DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.lu().determinant()
}
