//! Matrix gcld/lcrm, coprimality and the error-free MD-CRT solver.

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::lattice::ModReducer;
use crate::linalg::{column_hnf, det, hnf, snf, IntMatrix, IntVector, SnfDecomposition};

/// `f = r mod modulus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Congruence {
    pub modulus: IntMatrix,
    pub remainder: IntVector,
}

impl Congruence {
    /// Builds a congruence, reducing `remainder` into `N(modulus)`.
    pub fn new(modulus: IntMatrix, remainder: IntVector) -> Result<Self> {
        let r = ModReducer::new(&modulus)?.remainder(&remainder);
        Ok(Congruence {
            modulus,
            remainder: r,
        })
    }
}

/// The unique `value` in `N(lcrm)` satisfying every congruence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrtSolution {
    pub value: IntVector,
    pub lcrm: IntMatrix,
}

fn check_pair(a: &IntMatrix, b: &IntMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} and {}x{} moduli",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(())
}

/// Greatest common left divisor in Hermite normal form.
pub fn gcld(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    check_pair(a, b)?;
    let (h, _) = column_hnf(&a.hstack(b)?)?;
    let n = a.dim();
    Ok(h.block(0, n, 0, n))
}

/// `true` iff the Smith form of `(a b)` is `(I 0)`.
pub fn is_coprime(a: &IntMatrix, b: &IntMatrix) -> Result<bool> {
    check_pair(a, b)?;
    let s = snf(&a.hstack(b)?);
    let unit = s.rank() == a.dim() && s.lambda.diagonal().iter().all(One::is_one);
    debug_assert!(
        s.rank() < a.dim() || unit == gcld(a, b).map(|g| det(&g).abs().is_one()).unwrap_or(false)
    );
    Ok(unit)
}

/// Least common right multiple in Hermite normal form: a basis of
/// `L(a) ∩ L(b)`, read off the integer kernel of `(a -b)`.
pub fn lcrm(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    check_pair(a, b)?;
    let n = a.dim();
    let (_, v) = column_hnf(&a.hstack(&-b)?)?;
    let p = v.block(0, n, n, 2 * n);
    Ok(hnf(&(a * &p))?.h)
}

/// Left fold of [`lcrm`] over the list.
pub fn lcrm_many(ms: &[IntMatrix]) -> Result<IntMatrix> {
    let (first, rest) = ms
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("empty moduli list".into()))?;
    let mut acc = hnf(first)?.h;
    for m in rest {
        acc = lcrm(&acc, m)?;
    }
    Ok(acc)
}

/// One pairwise combination step `(R, M)` with its precomputed Smith form.
#[derive(Clone, Debug)]
struct PairStep {
    left: IntMatrix,
    block: SnfDecomposition,
    combined: ModReducer,
}

impl PairStep {
    fn new(left: &IntMatrix, right: &IntMatrix) -> Result<Self> {
        check_pair(left, right)?;
        let block = snf(&left.hstack(&-right)?);
        let combined = ModReducer::new(&lcrm(left, right)?)?;
        Ok(PairStep {
            left: left.clone(),
            block,
            combined,
        })
    }

    /// Solves `x = r1 mod left`, `x = r2 mod right`; `None` if inconsistent.
    fn combine(&self, r1: &IntVector, r2: &IntVector) -> Option<IntVector> {
        let n = self.left.dim();
        let c = self.block.u.mul_vec(&(r2 - r1));
        let mut y = IntVector::zeros(2 * n);
        for i in 0..n {
            let d = &self.block.lambda[(i, i)];
            if d.is_zero() || !(&c[i] % d).is_zero() {
                return None;
            }
            y[i] = &c[i] / d;
        }
        let sol = self.block.v.mul_vec(&y);
        let a = IntVector::new(sol.entries()[..n].to_vec());
        let x = &self.left.mul_vec(&a) + r1;
        Some(self.combined.remainder(&x))
    }
}

/// A fixed list of moduli with all pairwise-fold data precomputed, for
/// solving many remainder tuples against the same moduli.
#[derive(Clone, Debug)]
pub struct CrtSystem {
    moduli: Vec<IntMatrix>,
    steps: Vec<PairStep>,
    lcrm: IntMatrix,
}

impl CrtSystem {
    pub fn new(moduli: &[IntMatrix]) -> Result<Self> {
        let (first, rest) = moduli
            .split_first()
            .ok_or_else(|| Error::InvalidArgument("empty moduli list".into()))?;
        let mut acc = hnf(first)?.h;
        let mut steps = Vec::with_capacity(rest.len());
        for m in rest {
            let step = PairStep::new(&acc, m)?;
            acc = step.combined.modulus().clone();
            steps.push(step);
        }
        Ok(CrtSystem {
            moduli: moduli.to_vec(),
            steps,
            lcrm: acc,
        })
    }

    pub fn moduli(&self) -> &[IntMatrix] {
        &self.moduli
    }

    /// HNF-normalized lcrm of all moduli.
    pub fn lcrm(&self) -> &IntMatrix {
        &self.lcrm
    }

    /// The unique solution in `N(lcrm)` for the given remainders, which need
    /// not be reduced.
    pub fn solve(&self, remainders: &[IntVector]) -> Result<IntVector> {
        if remainders.len() != self.moduli.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} remainders for {} moduli",
                remainders.len(),
                self.moduli.len()
            )));
        }
        let n = self.lcrm.dim();
        if let Some(r) = remainders.iter().find(|r| r.dim() != n) {
            return Err(Error::DimensionMismatch(format!(
                "remainder of length {} in dimension {n}",
                r.dim()
            )));
        }
        let mut x = ModReducer::new(&hnf(&self.moduli[0])?.h)?.remainder(&remainders[0]);
        for (step, r) in self.steps.iter().zip(&remainders[1..]) {
            x = step.combine(&x, r).ok_or(Error::Inconsistent)?;
        }
        Ok(x)
    }
}

/// Error-free MD-CRT: the unique vector in `N(R)` congruent to every
/// remainder, `R` the HNF lcrm of all moduli.
pub fn crt_solve(congruences: &[Congruence]) -> Result<CrtSolution> {
    let moduli: Vec<IntMatrix> = congruences.iter().map(|c| c.modulus.clone()).collect();
    let remainders: Vec<IntVector> = congruences.iter().map(|c| c.remainder.clone()).collect();
    let system = CrtSystem::new(&moduli)?;
    let value = system.solve(&remainders)?;
    Ok(CrtSolution {
        value,
        lcrm: system.lcrm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn m(rows: &[[i64; 2]]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    #[test]
    fn gcld_examples() {
        let a = m(&[[3, 1], [2, 2]]);
        assert_eq!(gcld(&a, &a).unwrap(), hnf(&a).unwrap().h);
        let g1 = m(&[[22, -17], [17, 22]]);
        let g2 = m(&[[22, 17], [-17, 22]]);
        assert!(det(&gcld(&g1, &g2).unwrap()).abs().is_one());
        assert!(is_coprime(&g1, &g2).unwrap());
    }

    #[test]
    fn coprimality() {
        assert!(is_coprime(&m(&[[3, 1], [2, 2]]), &IntMatrix::identity(2)).unwrap());
        assert!(!is_coprime(&IntMatrix::scalar(2, 2), &IntMatrix::scalar(2, 2)).unwrap());
        assert!(is_coprime(&IntMatrix::diag(&[4, 9]), &IntMatrix::diag(&[3, 5])).unwrap());
        assert!(!is_coprime(&IntMatrix::diag(&[4, 9]), &IntMatrix::diag(&[3, 6])).unwrap());
        assert!(matches!(
            is_coprime(&IntMatrix::identity(2), &IntMatrix::identity(3)),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn lcrm_examples() {
        let a = m(&[[3, 1], [2, 2]]);
        let b = m(&[[2, 2], [1, 3]]);
        assert_eq!(lcrm(&a, &b).unwrap(), IntMatrix::scalar(2, 4));
        assert_eq!(
            lcrm(&a, &IntMatrix::identity(2)).unwrap(),
            hnf(&a).unwrap().h
        );
        let ds = [
            IntMatrix::diag(&[3, 1]),
            IntMatrix::diag(&[1, 3]),
            IntMatrix::diag(&[4, 1]),
            IntMatrix::diag(&[1, 4]),
        ];
        assert_eq!(lcrm_many(&ds).unwrap(), IntMatrix::scalar(2, 12));
    }

    #[test]
    fn solve_examples() {
        let a = m(&[[3, 1], [2, 2]]);
        let b = m(&[[2, 2], [1, 3]]);
        let f = IntVector::from_i64(&[2, 1]);
        let cs = [
            Congruence::new(a.clone(), f.clone()).unwrap(),
            Congruence::new(b.clone(), f.clone()).unwrap(),
        ];
        let sol = crt_solve(&cs).unwrap();
        assert_eq!(sol.value, f);
        assert_eq!(sol.lcrm, IntMatrix::scalar(2, 4));

        let single = crt_solve(&[Congruence::new(a.clone(), f.clone()).unwrap()]).unwrap();
        assert_eq!(single.lcrm, hnf(&a).unwrap().h);

        let two = IntMatrix::scalar(2, 2);
        let bad = [
            Congruence::new(two.clone(), IntVector::zeros(2)).unwrap(),
            Congruence::new(two, IntVector::from_i64(&[1, 0])).unwrap(),
        ];
        assert_eq!(crt_solve(&bad), Err(Error::Inconsistent));
    }

    #[test]
    fn three_moduli_round_trip() {
        let ms = [
            IntMatrix::diag(&[2, 1]),
            m(&[[1, 0], [1, 3]]),
            IntMatrix::diag(&[1, 5]),
        ];
        let sys = CrtSystem::new(&ms).unwrap();
        let total = det(sys.lcrm()).abs();
        assert_eq!(total, BigInt::from(30));
        for f in crate::lattice::enumerate_fpd(sys.lcrm()).unwrap() {
            let rs: Vec<_> = ms
                .iter()
                .map(|mm| crate::lattice::reduce_mod(&f, mm).unwrap().1)
                .collect();
            assert_eq!(sys.solve(&rs).unwrap(), f);
        }
    }
}
