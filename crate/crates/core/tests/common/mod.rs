//! Independent small-integer oracles shared by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::BTreeSet;

use mdcrt::{IntMatrix, IntVector};
use num_traits::ToPrimitive;

pub type Mat = Vec<Vec<i128>>;

pub fn to_small(m: &IntMatrix) -> Mat {
    (0..m.rows())
        .map(|i| {
            m.row(i)
                .iter()
                .map(|x| x.to_i128().expect("small entry"))
                .collect()
        })
        .collect()
}

pub fn vec_small(v: &IntVector) -> Vec<i128> {
    v.entries()
        .iter()
        .map(|x| x.to_i128().expect("small entry"))
        .collect()
}

pub fn from_small(m: &Mat) -> IntMatrix {
    IntMatrix::from_rows(m)
}

pub fn det(m: &Mat) -> i128 {
    let n = m.len();
    if n == 1 {
        return m[0][0];
    }
    (0..n)
        .map(|j| {
            let minor: Mat = m[1..]
                .iter()
                .map(|r| {
                    r.iter()
                        .enumerate()
                        .filter(|&(k, _)| k != j)
                        .map(|(_, &x)| x)
                        .collect()
                })
                .collect();
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * m[0][j] * det(&minor)
        })
        .sum()
}

pub fn mul(a: &Mat, b: &Mat) -> Mat {
    (0..a.len())
        .map(|i| {
            (0..b[0].len())
                .map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

pub fn mul_vec(a: &Mat, v: &[i128]) -> Vec<i128> {
    a.iter()
        .map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum())
        .collect()
}

pub fn adj(m: &Mat) -> Mat {
    let n = m.len();
    if n == 1 {
        return vec![vec![1]];
    }
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let minor: Mat = (0..n)
                        .filter(|&r| r != j)
                        .map(|r| (0..n).filter(|&c| c != i).map(|c| m[r][c]).collect())
                        .collect();
                    let s = if (i + j) % 2 == 0 { 1 } else { -1 };
                    s * det(&minor)
                })
                .collect()
        })
        .collect()
}

/// `m^-1 f` lies in `[0,1)^D`.
pub fn in_fpd(m: &Mat, f: &[i128]) -> bool {
    let d = det(m);
    let y = mul_vec(&adj(m), f);
    y.iter().all(|&v| {
        if d > 0 {
            0 <= v && v < d
        } else {
            d < v && v <= 0
        }
    })
}

/// `f - m floor(m^-1 f)`
pub fn remainder(m: &Mat, f: &[i128]) -> Vec<i128> {
    let d = det(m);
    let q: Vec<i128> = mul_vec(&adj(m), f)
        .into_iter()
        .map(|v| floor_div(v, d))
        .collect();
    let mq = mul_vec(m, &q);
    f.iter().zip(mq).map(|(a, b)| a - b).collect()
}

pub fn floor_div(a: i128, b: i128) -> i128 {
    let q = a / b;
    if (a % b != 0) && ((a < 0) != (b < 0)) {
        q - 1
    } else {
        q
    }
}

/// Integer points of the fundamental parallelepiped by scanning its bounding box.
pub fn fpd_points(m: &Mat) -> BTreeSet<Vec<i128>> {
    let n = m.len();
    let mut lo = vec![0i128; n];
    let mut hi = vec![0i128; n];
    for i in 0..n {
        for j in 0..n {
            if m[i][j] < 0 {
                lo[i] += m[i][j];
            } else {
                hi[i] += m[i][j];
            }
        }
    }
    let mut out = BTreeSet::new();
    let mut cur = lo.clone();
    loop {
        if in_fpd(m, &cur) {
            out.insert(cur.clone());
        }
        let mut k = 0;
        loop {
            if k == n {
                return out;
            }
            cur[k] += 1;
            if cur[k] <= hi[k] {
                break;
            }
            cur[k] = lo[k];
            k += 1;
        }
    }
}

/// Squared shortest nonzero length of the column lattice by brute force over
/// coefficients in `[-k, k]`.
pub fn lambda_sq(m: &Mat, k: i128) -> i128 {
    let n = m.len();
    let mut best = i128::MAX;
    let mut c = vec![-k; n];
    loop {
        if c.iter().any(|&x| x != 0) {
            let v = mul_vec(m, &c);
            best = best.min(v.iter().map(|x| x * x).sum());
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            c[i] += 1;
            if c[i] <= k {
                break;
            }
            c[i] = -k;
            i += 1;
        }
    }
}

/// Column-style Hermite form conditions, checked directly.
pub fn is_lower_hermite(h: &Mat) -> bool {
    let n = h.len();
    (0..n).all(|i| {
        h[i][i] > 0
            && (i + 1..n).all(|j| h[i][j] == 0)
            && (0..i).all(|j| 0 <= h[i][j] && h[i][j] < h[i][i])
    })
}

pub fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

pub fn in_lattice(m: &Mat, v: &[i128]) -> bool {
    let d = det(m);
    mul_vec(&adj(m), v).iter().all(|x| x % d == 0)
}

/// Lattice points of a 2-D lattice in the box `center +- r`.
pub fn lattice_points_2d(m: &Mat, center: &[i128], r: i128) -> Vec<Vec<i128>> {
    let mut out = Vec::new();
    for x in center[0] - r..=center[0] + r {
        for y in center[1] - r..=center[1] + r {
            if in_lattice(m, &[x, y]) {
                out.push(vec![x, y]);
            }
        }
    }
    out
}

pub fn isqrt_ceil(n: i128) -> i128 {
    let mut r = (n as f64).sqrt() as i128;
    while r * r < n {
        r += 1;
    }
    while r > 0 && (r - 1) * (r - 1) >= n {
        r -= 1;
    }
    r
}
