use num_integer::Integer;
use num_traits::Zero;

use super::{snf, IntMatrix, IntVector};
use crate::error::{Error, Result};

/// Finds an integer `x` with `a * x = b` for a `D x K` matrix `a` of rank `D`.
///
/// With `u a v = lambda`, the system becomes `lambda y = u b` for `y = v^-1 x`;
/// each row is a single scalar divisibility test. Returns `Ok(None)` when no
/// integer solution exists.
pub fn solve_diophantine(a: &IntMatrix, b: &IntVector) -> Result<Option<IntVector>> {
    if a.rows() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{} equations but right-hand side has {} entries",
            a.rows(),
            b.dim()
        )));
    }
    let d = snf(a);
    if d.rank() < a.rows() {
        return Err(Error::RankDeficient);
    }
    let c = d.u.mul_vec(b);
    let mut y = IntVector::zeros(a.cols());
    for i in 0..a.rows() {
        let delta = &d.lambda[(i, i)];
        let (q, r) = c[i].div_rem(delta);
        if !r.is_zero() {
            return Ok(None);
        }
        y[i] = q;
    }
    Ok(Some(d.v.mul_vec(&y)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_system() {
        let b = IntVector::from_i64(&[7, -3]);
        assert_eq!(
            solve_diophantine(&IntMatrix::identity(2), &b).unwrap(),
            Some(b)
        );
    }

    #[test]
    fn coprime_pair_always_solvable() {
        let m1 = IntMatrix::from_rows(&[[3, 1], [2, 2]]);
        let m2 = IntMatrix::from_rows(&[[2, 2], [1, 3]]);
        let a = m1.hstack(&-&m2).unwrap();
        for (x, y) in [(1, 0), (0, 1), (5, -7), (13, 2)] {
            let b = IntVector::from_i64(&[x, y]);
            let sol = solve_diophantine(&a, &b).unwrap().unwrap();
            assert_eq!(a.mul_vec(&sol), b);
        }
    }

    #[test]
    fn parity_obstruction() {
        let two = IntMatrix::scalar(2, 2);
        let a = two.hstack(&two).unwrap();
        let b = IntVector::from_i64(&[1, 1]);
        assert_eq!(solve_diophantine(&a, &b).unwrap(), None);
    }

    #[test]
    fn rank_deficient() {
        let a = IntMatrix::from_rows(&[[1, 2, 3], [2, 4, 6]]);
        assert_eq!(
            solve_diophantine(&a, &IntVector::from_i64(&[1, 2])),
            Err(Error::RankDeficient)
        );
    }
}
