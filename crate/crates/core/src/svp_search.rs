//! Maximum shortest-vector length over the lattices `L(N_i)`,
//! `N_i = [[1,0],[i,p]]`, for a prime `p`.

use std::collections::BTreeSet;

use num_integer::Roots;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::{shortest_vector, LatticeBasis};
use crate::linalg::IntMatrix;

/// Largest squared minimum `d` and the indices `i` attaining it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchResult {
    pub p: u64,
    pub d: u64,
    pub achievers: BTreeSet<u64>,
}

impl SearchResult {
    pub fn sqrt_d(&self) -> f64 {
        (self.d as f64).sqrt()
    }

    /// CSV row `prime,d,sqrt_d_f,floor_sqrt_p,achiever_count,first_achiever`.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{:.6},{},{},{}",
            self.p,
            self.d,
            self.sqrt_d(),
            best_diagonal_svp(self.p),
            self.achievers.len(),
            self.achievers
                .iter()
                .next()
                .map_or(String::new(), u64::to_string)
        )
    }
}

pub const CSV_HEADER: &str = "prime,d,sqrt_d_f,floor_sqrt_p,achiever_count,first_achiever";

/// Inverse of `x` modulo `p` in `[1, p)`.
pub fn mod_inverse(x: i128, p: u64) -> Result<u64> {
    let m = p as i128;
    if p == 0 {
        return Err(Error::NotInvertible { x, p });
    }
    let a = x.rem_euclid(m);
    let (mut old_r, mut r) = (a, m);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r != 1 {
        return Err(Error::NotInvertible { x, p });
    }
    Ok(old_s.rem_euclid(m) as u64)
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin, exact for every `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'outer: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'outer;
            }
        }
        return false;
    }
    true
}

/// `floor(sqrt(p))`, the best shortest-vector length for diagonal moduli of
/// determinant `p`.
pub fn best_diagonal_svp(p: u64) -> u64 {
    p.sqrt()
}

/// Scans `d = 1, 2, ...`, collecting every index `i = y x^-1 mod p` with
/// `x^2 + y^2 = d`, until all `p` indices are seen. Returns the terminating
/// `d` and the indices first seen there.
pub fn search_max_svp(p: u64) -> Result<SearchResult> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let mut seen = vec![false; p as usize];
    let mut count = 0u64;
    let mut d = 0u64;
    loop {
        d += 1;
        let mut fresh = BTreeSet::new();
        for x in 1..=d.sqrt() {
            let y2 = d - x * x;
            let y = y2.sqrt();
            if y * y != y2 {
                continue;
            }
            let inv = mod_inverse(x as i128, p)?;
            let signs: &[i128] = if y == 0 { &[0] } else { &[1, -1] };
            for &sign in signs {
                let yy = (sign * y as i128).rem_euclid(p as i128) as u64;
                let a = mul_mod(yy, inv, p);
                if !seen[a as usize] {
                    seen[a as usize] = true;
                    count += 1;
                    fresh.insert(a);
                }
            }
        }
        if count == p {
            return Ok(SearchResult {
                p,
                d,
                achievers: fresh,
            });
        }
    }
}

/// `N_i = [[1,0],[i,p]]`
pub fn hermite_basis(i: u64, p: u64) -> IntMatrix {
    IntMatrix::from_rows(&[[1u64, 0], [i, p]])
}

/// `λ²` of `L(N_i)` via the lattice module.
pub fn lambda_sq(i: u64, p: u64) -> Result<u64> {
    let (len, _) = shortest_vector(&LatticeBasis::new(hermite_basis(i, p))?)?;
    Ok(u64::try_from(&len).expect("λ² < p² fits in u64"))
}

/// Recomputes `λ²` for every achiever and checks it equals `d`.
pub fn certify(result: &SearchResult) -> Result<bool> {
    for &i in &result.achievers {
        if lambda_sq(i, result.p)? != result.d {
            return Ok(false);
        }
    }
    Ok(true)
}

/// All primes in `[lo, hi)`.
pub fn primes_in(lo: u64, hi: u64) -> Vec<u64> {
    (lo..hi).filter(|&n| is_prime(n)).collect()
}

/// Searches every prime in `[lo, hi)` in parallel; results are in prime order.
pub fn search_range(lo: u64, hi: u64) -> Result<Vec<SearchResult>> {
    primes_in(lo, hi)
        .par_iter()
        .map(|&p| search_max_svp(p))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(2, 5).unwrap(), 3);
        assert_eq!(mod_inverse(-2, 5).unwrap(), 2);
        assert_eq!(
            mod_inverse(10, 5),
            Err(Error::NotInvertible { x: 10, p: 5 })
        );
    }

    #[test]
    fn primality() {
        let small: Vec<u64> = (0..50).filter(|&n| is_prime(n)).collect();
        assert_eq!(
            small,
            [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47]
        );
        assert!(is_prime(3257));
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn p_two() {
        let r = search_max_svp(2).unwrap();
        assert_eq!(r.d, 2);
        assert_eq!(r.achievers, [1].into());
        assert_eq!(lambda_sq(0, 2).unwrap(), 1);
        assert_eq!(lambda_sq(1, 2).unwrap(), 2);
    }

    #[test]
    fn p_3257() {
        let r = search_max_svp(3257).unwrap();
        assert_eq!(r.d, 3730);
        assert!(r.achievers.contains(&971));
        assert!(certify(&r).unwrap());
        assert_eq!(best_diagonal_svp(3257), 57);
    }

    #[test]
    fn not_prime() {
        assert_eq!(search_max_svp(9), Err(Error::NotPrime(9)));
    }

    #[test]
    fn diagonal_values() {
        assert_eq!(best_diagonal_svp(1), 1);
        assert_eq!(best_diagonal_svp(881), 29);
    }
}
