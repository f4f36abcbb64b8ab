//! Exact integer linear algebra: matrices, determinants, and the Smith and
//! Hermite normal forms.

mod diophantine;
mod hnf;
mod matrix;
mod snf;

pub use diophantine::solve_diophantine;
pub use hnf::{column_hnf, hnf, is_hermite, HnfDecomposition};
pub use matrix::{parse_matrix_list, IntMatrix, IntVector, RatVector};
pub use snf::{snf, SnfDecomposition};

use num_bigint::BigInt;
use num_traits::{One, Zero};

/// Exact determinant. Cofactor expansion up to 3x3, Bareiss elimination
/// beyond.
pub fn det(m: &IntMatrix) -> BigInt {
    assert!(m.is_square(), "determinant of a non-square matrix");
    match m.dim() {
        1 => m[(0, 0)].clone(),
        2 => &m[(0, 0)] * &m[(1, 1)] - &m[(0, 1)] * &m[(1, 0)],
        3 => {
            let e = |i, j| &m[(i, j)];
            e(0, 0) * (e(1, 1) * e(2, 2) - e(1, 2) * e(2, 1))
                - e(0, 1) * (e(1, 0) * e(2, 2) - e(1, 2) * e(2, 0))
                + e(0, 2) * (e(1, 0) * e(2, 1) - e(1, 1) * e(2, 0))
        }
        _ => det_bareiss(m),
    }
}

/// Fraction-free Gaussian elimination. Every intermediate division is exact.
pub fn det_bareiss(m: &IntMatrix) -> BigInt {
    assert!(m.is_square(), "determinant of a non-square matrix");
    let n = m.dim();
    let mut a = m.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[(k, k)].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !a[(i, k)].is_zero()) else {
                return BigInt::zero();
            };
            a.swap_rows(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[(i, j)] * &a[(k, k)] - &a[(i, k)] * &a[(k, j)]) / &prev;
                a[(i, j)] = v;
            }
        }
        prev = a[(k, k)].clone();
    }
    sign * &a[(n - 1, n - 1)]
}

/// Classical adjoint: `m * adjugate(m) = det(m) * I`.
pub fn adjugate(m: &IntMatrix) -> IntMatrix {
    assert!(m.is_square(), "adjugate of a non-square matrix");
    let n = m.dim();
    if n == 1 {
        return IntMatrix::identity(1);
    }
    let mut adj = IntMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let minor = minor(m, i, j);
            let c = det(&minor);
            // adj[j][i] is the (i, j) cofactor.
            adj[(j, i)] = if (i + j) % 2 == 0 { c } else { -c };
        }
    }
    adj
}

fn minor(m: &IntMatrix, row: usize, col: usize) -> IntMatrix {
    let n = m.dim();
    let mut data = Vec::with_capacity((n - 1) * (n - 1));
    for i in (0..n).filter(|&i| i != row) {
        for j in (0..n).filter(|&j| j != col) {
            data.push(m[(i, j)].clone());
        }
    }
    IntMatrix::new(n - 1, n - 1, data)
}

/// `|det(m)| == 1`
pub fn is_unimodular(m: &IntMatrix) -> bool {
    m.is_square() && {
        let d = det(m);
        d == BigInt::one() || d == -BigInt::one()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinants() {
        assert_eq!(det(&IntMatrix::identity(2)), BigInt::one());
        assert_eq!(det(&IntMatrix::from_rows(&[[3, 1], [2, 2]])), 4.into());
        assert_eq!(
            det(&IntMatrix::from_rows(&[[22, -17], [17, 22]])),
            773.into()
        );
        let m = IntMatrix::from_rows(&[[2, -1, 0, 3], [1, 4, 2, 0], [0, 5, -3, 1], [7, 0, 1, 1]]);
        // cofactor expansion along the first row of the 4x4
        let mut expected = BigInt::zero();
        for j in 0..4 {
            let c = &m[(0, j)] * det(&minor(&m, 0, j));
            expected += if j % 2 == 0 { c } else { -c };
        }
        assert_eq!(det(&m), expected);
    }

    #[test]
    fn bareiss_handles_zero_pivots() {
        let m = IntMatrix::from_rows(&[[0, 1, 2], [1, 0, 3], [4, -3, 8]]);
        assert_eq!(det_bareiss(&m), det(&m));
        let singular = IntMatrix::from_rows(&[[1, 2, 3], [2, 4, 6], [0, 1, 1]]);
        assert_eq!(det_bareiss(&singular), BigInt::zero());
    }

    #[test]
    fn adjugates() {
        assert_eq!(adjugate(&IntMatrix::identity(2)), IntMatrix::identity(2));
        let m = IntMatrix::from_rows(&[[3, 1], [2, 2]]);
        assert_eq!(adjugate(&m), IntMatrix::from_rows(&[[2, -1], [-2, 3]]));
        let m3 = IntMatrix::from_rows(&[[2, 0, 1], [1, 3, -2], [0, 5, 4]]);
        assert_eq!(&m3 * &adjugate(&m3), IntMatrix::scalar(3, det(&m3)));
    }
}
