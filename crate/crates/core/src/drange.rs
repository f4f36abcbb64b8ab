//! Dynamic range of the MD-CRT under a cap on the moduli determinants.

use num_bigint::BigInt;
use num_traits::{One, Pow};

use crate::linalg::IntMatrix;
use crate::svp_search::is_prime;

/// Pairwise co-prime integers in `[1, cap]` with maximal product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoprimeSet {
    pub cap: u64,
    pub members: Vec<u64>,
    pub product: BigInt,
}

/// The largest power of each prime `r <= q`, in increasing order of `r`.
/// For `q = 1` the set is `{1}`.
pub fn max_coprime_set(q: u64) -> CoprimeSet {
    let mut members: Vec<u64> = (2..=q)
        .filter(|&r| is_prime(r))
        .map(|r| {
            let mut pw = r;
            while pw <= q / r {
                pw *= r;
            }
            pw
        })
        .collect();
    if members.is_empty() {
        members.push(1);
    }
    let product = members
        .iter()
        .fold(BigInt::one(), |acc, &m| acc * BigInt::from(m));
    CoprimeSet {
        cap: q,
        members,
        product,
    }
}

/// `lcm(1, ..., q)^d`
pub fn max_dynamic_range(q: u64, d: u32) -> BigInt {
    max_coprime_set(q).product.pow(d)
}

/// `D_{i,j}`: the identity with `q_i` at position `(j, j)`, for every member
/// `q_i > 1` of [`max_coprime_set`] and every axis `j`.
pub fn diagonal_moduli_construction(q: u64, d: usize) -> Vec<IntMatrix> {
    max_coprime_set(q)
        .members
        .iter()
        .filter(|&&m| m > 1)
        .flat_map(|&m| {
            (0..d).map(move |j| {
                let diag: Vec<u64> = (0..d).map(|k| if k == j { m } else { 1 }).collect();
                IntMatrix::diag(&diag)
            })
        })
        .collect()
}

/// Table row `q,members,product,range` with members separated by spaces.
pub fn table_row(q: u64, d: u32) -> String {
    let set = max_coprime_set(q);
    let members: Vec<String> = set.members.iter().map(u64::to_string).collect();
    format!(
        "{},{},{},{}",
        q,
        members.join(" "),
        set.product,
        max_dynamic_range(q, d)
    )
}

pub const TABLE_HEADER: &str = "q,members,product,range";

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crt::lcrm_many;

    #[test]
    fn small_sets() {
        assert_eq!(max_coprime_set(1).members, vec![1]);
        assert_eq!(max_coprime_set(1).product, BigInt::one());
        assert_eq!(max_coprime_set(4).members, vec![4, 3]);
        assert_eq!(max_coprime_set(4).product, BigInt::from(12));
        assert_eq!(max_coprime_set(10).members, vec![8, 9, 5, 7]);
        assert_eq!(max_coprime_set(10).product, BigInt::from(2520));
    }

    #[test]
    fn ranges() {
        assert_eq!(max_dynamic_range(1, 3), BigInt::one());
        assert_eq!(max_dynamic_range(4, 2), BigInt::from(144));
        assert_eq!(max_dynamic_range(10, 2), BigInt::from(2520 * 2520));
    }

    #[test]
    fn construction() {
        assert!(diagonal_moduli_construction(1, 2).is_empty());
        let ds = diagonal_moduli_construction(4, 2);
        assert_eq!(
            ds,
            vec![
                IntMatrix::diag(&[4, 1]),
                IntMatrix::diag(&[1, 4]),
                IntMatrix::diag(&[3, 1]),
                IntMatrix::diag(&[1, 3]),
            ]
        );
        assert_eq!(lcrm_many(&ds).unwrap(), IntMatrix::scalar(2, 12));
        assert_eq!(table_row(10, 2), "10,8 9 5 7,2520,6350400");
    }
}
