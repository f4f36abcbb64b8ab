use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::{det, IntMatrix};
use crate::error::{Error, Result};

/// `M = h * u` with `h` lower triangular, positive diagonal, and
/// `0 <= h[i][j] < h[i][i]` for `j < i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HnfDecomposition {
    pub h: IntMatrix,
    pub u: IntMatrix,
}

/// Column-style Hermite normal form of a nonsingular square matrix.
///
/// `h` depends only on the lattice `L(m)`, so it is the canonical basis used
/// to compare gclds and lcrms.
pub fn hnf(m: &IntMatrix) -> Result<HnfDecomposition> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(
            "Hermite normal form requires a square matrix".into(),
        ));
    }
    if det(m).is_zero() {
        return Err(Error::SingularMatrix);
    }
    let (h, _) = column_hnf(m)?;
    let u = h
        .left_divide(m)?
        .expect("h^-1 m is integral when h spans the same lattice");
    Ok(HnfDecomposition { h, u })
}

/// Reduces a full-row-rank `r x c` matrix (`r <= c`) by unimodular column
/// operations to `(H 0)` with `H` in Hermite normal form.
///
/// Returns `(H 0)` and the unimodular `c x c` transform `v` with
/// `m * v = (H 0)`. The trailing `c - r` columns of `v` span the integer
/// kernel of `m`.
pub fn column_hnf(m: &IntMatrix) -> Result<(IntMatrix, IntMatrix)> {
    let rows = m.rows();
    let cols = m.cols();
    if rows > cols {
        return Err(Error::RankDeficient);
    }
    let mut h = m.clone();
    let mut v = IntMatrix::identity(cols);
    for i in 0..rows {
        // pivot: the entry in row i with the smallest nonzero magnitude
        if let Some(p) = (i..cols)
            .filter(|&j| !h[(i, j)].is_zero())
            .min_by(|&a, &b| h[(i, a)].abs().cmp(&h[(i, b)].abs()))
        {
            h.swap_cols(i, p);
            v.swap_cols(i, p);
        }
        for j in i + 1..cols {
            if h[(i, j)].is_zero() {
                continue;
            }
            let a = h[(i, i)].clone();
            let b = h[(i, j)].clone();
            let eg = a.extended_gcd(&b);
            let (g, x, y) = (eg.gcd, eg.x, eg.y);
            let bg = -(&b / &g);
            let ag = &a / &g;
            h.combine_cols(i, j, &x, &bg, &y, &ag);
            v.combine_cols(i, j, &x, &bg, &y, &ag);
        }
        if h[(i, i)].is_zero() {
            return Err(Error::RankDeficient);
        }
        if h[(i, i)].is_negative() {
            h.negate_col(i);
            v.negate_col(i);
        }
        let pivot = h[(i, i)].clone();
        for j in 0..i {
            let q = h[(i, j)].div_floor(&pivot);
            if !q.is_zero() {
                let k = -q;
                h.add_col_multiple(j, i, &k);
                v.add_col_multiple(j, i, &k);
            }
        }
    }
    Ok((h, v))
}

/// `h` satisfies the Hermite normal form conditions.
pub fn is_hermite(h: &IntMatrix) -> bool {
    let n = h.rows();
    h.is_square()
        && h.is_lower_triangular()
        && (0..n).all(|i| {
            let d = &h[(i, i)];
            d.is_positive() && (0..i).all(|j| !h[(i, j)].is_negative() && &h[(i, j)] < d)
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_unimodular;

    #[test]
    fn identity_is_its_own_hnf() {
        let d = hnf(&IntMatrix::identity(2)).unwrap();
        assert_eq!(d.h, IntMatrix::identity(2));
        assert_eq!(d.u, IntMatrix::identity(2));
    }

    #[test]
    fn hermite_bases_are_fixed_points() {
        let p = 13;
        for i in 0..p {
            let n = IntMatrix::from_rows(&[[1, 0], [i, p]]);
            assert_eq!(hnf(&n).unwrap().h, n);
        }
    }

    #[test]
    fn small_example_by_hand() {
        // columns (2,1) and (4,3): col2 - 2 col1 = (0,1); col1 - col2' = (2,0)
        // lattice = {(x,y): x even}; HNF [[2,0],[0,1]]
        let m = IntMatrix::from_rows(&[[2, 4], [1, 3]]);
        let d = hnf(&m).unwrap();
        assert_eq!(d.h, IntMatrix::from_rows(&[[2, 0], [0, 1]]));
        assert_eq!(&d.h * &d.u, m);
        assert!(is_unimodular(&d.u));
        assert!(is_hermite(&d.h));
    }

    #[test]
    fn singular_rejected() {
        let m = IntMatrix::from_rows(&[[1, 2], [2, 4]]);
        assert_eq!(hnf(&m), Err(Error::SingularMatrix));
    }

    #[test]
    fn rectangular_block_kernel() {
        let a = IntMatrix::from_rows(&[[3, 1, -2, -2], [2, 2, -1, -3]]);
        let (h, v) = column_hnf(&a).unwrap();
        assert_eq!(&a * &v, h);
        assert!(is_unimodular(&v));
        assert!(h.block(0, 2, 2, 4).is_zero());
        let k = v.block(0, 4, 2, 4);
        assert!((&a * &k).is_zero());
    }
}
