use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::IntMatrix;

/// `u * m * v = lambda` with `u`, `v` unimodular and `lambda` diagonal,
/// nonnegative, each diagonal entry dividing the next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfDecomposition {
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub lambda: IntMatrix,
}

impl SnfDecomposition {
    /// Number of nonzero invariant factors.
    pub fn rank(&self) -> usize {
        self.lambda
            .diagonal()
            .iter()
            .take_while(|d| !d.is_zero())
            .count()
    }
}

/// Smith normal form of an arbitrary `r x c` integer matrix.
pub fn snf(m: &IntMatrix) -> SnfDecomposition {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut u = IntMatrix::identity(rows);
    let mut v = IntMatrix::identity(cols);

    for t in 0..rows.min(cols) {
        let Some((pi, pj)) = smallest_nonzero(&a, t) else {
            break;
        };
        a.swap_rows(t, pi);
        u.swap_rows(t, pi);
        a.swap_cols(t, pj);
        v.swap_cols(t, pj);

        loop {
            clear_column(&mut a, &mut u, t);
            clear_row(&mut a, &mut v, t);
            if (t + 1..rows).any(|i| !a[(i, t)].is_zero()) {
                continue;
            }
            // divisibility: fold an offending row into row t and go again
            let pivot = a[(t, t)].clone();
            let offender =
                (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !a[(i, j)].is_multiple_of(&pivot)));
            match offender {
                Some(i) => {
                    let one = num_bigint::BigInt::from(1);
                    a.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfDecomposition { u, v, lambda: a }
}

fn smallest_nonzero(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in t..a.rows() {
        for j in t..a.cols() {
            if a[(i, j)].is_zero() {
                continue;
            }
            match best {
                Some((bi, bj)) if a[(bi, bj)].abs() <= a[(i, j)].abs() => {}
                _ => best = Some((i, j)),
            }
        }
    }
    best
}

fn clear_column(a: &mut IntMatrix, u: &mut IntMatrix, t: usize) {
    for i in t + 1..a.rows() {
        if a[(i, t)].is_zero() {
            continue;
        }
        let p = a[(t, t)].clone();
        let q = a[(i, t)].clone();
        if q.is_multiple_of(&p) {
            let k = -(&q / &p);
            a.add_row_multiple(i, t, &k);
            u.add_row_multiple(i, t, &k);
            continue;
        }
        let eg = p.extended_gcd(&q);
        let (g, x, y) = (eg.gcd, eg.x, eg.y);
        let c = -(&q / &g);
        let d = &p / &g;
        a.combine_rows(t, i, &x, &y, &c, &d);
        u.combine_rows(t, i, &x, &y, &c, &d);
    }
}

fn clear_row(a: &mut IntMatrix, v: &mut IntMatrix, t: usize) {
    for j in t + 1..a.cols() {
        if a[(t, j)].is_zero() {
            continue;
        }
        let p = a[(t, t)].clone();
        let q = a[(t, j)].clone();
        if q.is_multiple_of(&p) {
            let k = -(&q / &p);
            a.add_col_multiple(j, t, &k);
            v.add_col_multiple(j, t, &k);
            continue;
        }
        let eg = p.extended_gcd(&q);
        let (g, x, y) = (eg.gcd, eg.x, eg.y);
        let b = -(&q / &g);
        let d = &p / &g;
        a.combine_cols(t, j, &x, &b, &y, &d);
        v.combine_cols(t, j, &x, &b, &y, &d);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::is_unimodular;

    fn check(m: &IntMatrix) -> SnfDecomposition {
        let d = snf(m);
        assert_eq!(&(&d.u * m) * &d.v, d.lambda);
        assert!(is_unimodular(&d.u));
        assert!(is_unimodular(&d.v));
        assert!(d.lambda.is_diagonal());
        let diag = d.lambda.diagonal();
        for w in diag.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        d
    }

    #[test]
    fn identity() {
        let d = check(&IntMatrix::identity(2));
        assert_eq!(d.lambda, IntMatrix::identity(2));
    }

    #[test]
    fn gcd_lcm_structure() {
        let d = check(&IntMatrix::diag(&[4, 6]));
        assert_eq!(d.lambda, IntMatrix::diag(&[2, 12]));
    }

    #[test]
    fn coprime_block() {
        let m = IntMatrix::from_rows(&[[3, 1, 2, 2], [2, 2, 1, 3]]);
        let d = check(&m);
        assert_eq!(
            d.lambda,
            IntMatrix::from_rows(&[[1, 0, 0, 0], [0, 1, 0, 0]])
        );
    }

    #[test]
    fn rank_deficient_and_tall() {
        let d = check(&IntMatrix::from_rows(&[[2, 4], [1, 2]]));
        assert_eq!(d.rank(), 1);
        let d = check(&IntMatrix::from_rows(&[[2], [4], [6]]));
        assert_eq!(d.lambda.diagonal(), vec![2.into()]);
        check(&IntMatrix::from_rows(&[[0, 0], [0, 0]]));
    }

    #[test]
    fn negative_entries() {
        let d = check(&IntMatrix::from_rows(&[
            [-6, 4, 0],
            [10, -2, 8],
            [0, 0, -3],
        ]));
        assert_eq!(d.rank(), 3);
    }
}
