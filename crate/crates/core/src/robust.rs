//! Single-stage robust MD-CRT: anchor selection, the error bound, and the
//! five-step reconstruction (gcld table, CVP snapping, CRT, folds, average).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::crt::{gcld, CrtSystem};
use crate::error::{Error, Result};
use crate::lattice::{
    closest_vector_rational, shortest_vector, FpdUnionRegion, LatticeBasis, ModReducer,
    MAX_LATTICE_DIM,
};
use crate::linalg::{det, IntMatrix, IntVector, RatVector};

/// Precomputed data for robust reconstruction over a fixed set of moduli.
#[derive(Clone, Debug)]
pub struct RobustInstance {
    moduli: Vec<IntMatrix>,
    gclds: Vec<Vec<Option<IntMatrix>>>,
    gcld_lambda_sq: Vec<Vec<Option<BigInt>>>,
    anchor: usize,
    tau_bound_sq: BigRational,
    lattices: Vec<Option<LatticeBasis>>,
    crt: CrtSystem,
    lcrm: IntMatrix,
    designated: bool,
    region: FpdUnionRegion,
}

/// Averaged estimate and the recovered folds `M_i n_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RobustOutput {
    pub estimate: RatVector,
    pub folds: Vec<IntVector>,
}

/// Builds an instance choosing the anchor by the max-min rule (smallest
/// index on ties) and using the HNF lcrm of all moduli.
pub fn build_instance(moduli: &[IntMatrix]) -> Result<RobustInstance> {
    let (gclds, lambdas) = gcld_table(moduli)?;
    let l = moduli.len();
    let mut anchor = 0;
    let mut best: Option<BigInt> = None;
    for i in 0..l {
        let m = row_min(&lambdas, i);
        if best.as_ref().is_none_or(|b| m > *b) {
            best = Some(m);
            anchor = i;
        }
    }
    assemble(moduli, gclds, lambdas, anchor, None)
}

/// Builds an instance with a fixed anchor and optionally a designated lcrm
/// that fixes the robustly determinable region.
pub fn build_instance_with_anchor(
    moduli: &[IntMatrix],
    anchor: usize,
    designated_lcrm: Option<&IntMatrix>,
) -> Result<RobustInstance> {
    if anchor >= moduli.len() {
        return Err(Error::InvalidArgument(format!(
            "anchor {anchor} out of range for {} moduli",
            moduli.len()
        )));
    }
    let (gclds, lambdas) = gcld_table(moduli)?;
    assemble(moduli, gclds, lambdas, anchor, designated_lcrm)
}

type GcldTable = (Vec<Vec<Option<IntMatrix>>>, Vec<Vec<Option<BigInt>>>);

fn gcld_table(moduli: &[IntMatrix]) -> Result<GcldTable> {
    let l = moduli.len();
    if l < 2 {
        return Err(Error::InvalidArgument(
            "robust reconstruction needs at least two moduli".into(),
        ));
    }
    let d = moduli[0].rows();
    for m in moduli {
        if !m.is_square() || m.dim() != d {
            return Err(Error::DimensionMismatch(
                "moduli must share one square shape".into(),
            ));
        }
    }
    if d > MAX_LATTICE_DIM {
        return Err(Error::DimensionUnsupported(d));
    }
    for i in 0..l {
        for j in i + 1..l {
            if moduli[i] == moduli[j] {
                return Err(Error::DuplicateModuli(i, j));
            }
        }
    }
    let mut gclds = vec![vec![None; l]; l];
    let mut lambdas = vec![vec![None; l]; l];
    for i in 0..l {
        for j in i + 1..l {
            let g = gcld(&moduli[i], &moduli[j])?;
            let (len, _) = shortest_vector(&LatticeBasis::new(g.clone())?)?;
            gclds[i][j] = Some(g.clone());
            gclds[j][i] = Some(g);
            lambdas[i][j] = Some(len.clone());
            lambdas[j][i] = Some(len);
        }
    }
    Ok((gclds, lambdas))
}

fn row_min(lambdas: &[Vec<Option<BigInt>>], i: usize) -> BigInt {
    lambdas[i]
        .iter()
        .flatten()
        .min()
        .cloned()
        .expect("at least two moduli")
}

/// `designated` must be a common right multiple of every modulus with the
/// lcrm's determinant.
pub fn verify_lcrm(moduli: &[IntMatrix], designated: &IntMatrix, lcrm: &IntMatrix) -> Result<()> {
    if !designated.is_square() || designated.dim() != lcrm.dim() {
        return Err(Error::NotAnLcrm("shape differs from the moduli".into()));
    }
    for (i, m) in moduli.iter().enumerate() {
        if m.left_divide(designated)?.is_none() {
            return Err(Error::NotAnLcrm(format!(
                "not a right multiple of modulus {i}"
            )));
        }
    }
    if det(designated).abs() != det(lcrm).abs() {
        return Err(Error::NotAnLcrm(format!(
            "|det| is {} but the lcrm has {}",
            det(designated).abs(),
            det(lcrm).abs()
        )));
    }
    Ok(())
}

fn assemble(
    moduli: &[IntMatrix],
    gclds: Vec<Vec<Option<IntMatrix>>>,
    gcld_lambda_sq: Vec<Vec<Option<BigInt>>>,
    anchor: usize,
    designated: Option<&IntMatrix>,
) -> Result<RobustInstance> {
    let tau_bound_sq = BigRational::new(row_min(&gcld_lambda_sq, anchor), BigInt::from(16));
    let lattices = (0..moduli.len())
        .map(|j| match &gclds[anchor][j] {
            Some(g) => LatticeBasis::new(g.clone()).map(Some),
            None => Ok(None),
        })
        .collect::<Result<Vec<_>>>()?;
    let crt = CrtSystem::new(moduli)?;
    let lcrm = match designated {
        Some(r) => {
            verify_lcrm(moduli, r, crt.lcrm())?;
            r.clone()
        }
        None => crt.lcrm().clone(),
    };
    let region = FpdUnionRegion::new(&moduli[anchor], &lcrm)?;
    Ok(RobustInstance {
        moduli: moduli.to_vec(),
        gclds,
        gcld_lambda_sq,
        anchor,
        tau_bound_sq,
        lattices,
        crt,
        lcrm,
        designated: designated.is_some(),
        region,
    })
}

impl RobustInstance {
    pub fn moduli(&self) -> &[IntMatrix] {
        &self.moduli
    }

    pub fn len(&self) -> usize {
        self.moduli.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moduli.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.moduli[0].dim()
    }

    pub fn anchor(&self) -> usize {
        self.anchor
    }

    /// `G_{i,j}` in HNF, `None` on the diagonal.
    pub fn gcld(&self, i: usize, j: usize) -> Option<&IntMatrix> {
        self.gclds[i][j].as_ref()
    }

    /// `λ²` of `L(G_{i,j})`.
    pub fn gcld_lambda_sq(&self, i: usize, j: usize) -> Option<&BigInt> {
        self.gcld_lambda_sq[i][j].as_ref()
    }

    /// `(min_j λ(G_{l0,j}) / 4)²`
    pub fn tau_bound_sq(&self) -> &BigRational {
        &self.tau_bound_sq
    }

    /// `tau_sq < tau_bound_sq`
    pub fn guarantees(&self, tau_sq: &BigRational) -> bool {
        *tau_sq < self.tau_bound_sq
    }

    /// The lcrm used in Step 3: the designated one if given, else the HNF lcrm.
    pub fn lcrm(&self) -> &IntMatrix {
        &self.lcrm
    }

    pub fn has_designated_lcrm(&self) -> bool {
        self.designated
    }

    /// The region of vectors guaranteed to be reconstructed.
    pub fn region(&self) -> &FpdUnionRegion {
        &self.region
    }

    /// Error-free remainders `f mod M_i`.
    pub fn remainders_of(&self, f: &IntVector) -> Result<Vec<IntVector>> {
        self.moduli
            .iter()
            .map(|m| Ok(ModReducer::new(m)?.remainder(f)))
            .collect()
    }

    /// The exact folds `f - (f mod M_i)` a correct reconstruction recovers.
    pub fn true_folds(&self, f: &IntVector) -> Result<Vec<IntVector>> {
        Ok(self.remainders_of(f)?.into_iter().map(|r| f - &r).collect())
    }
}

/// Robust reconstruction from integer noisy remainders.
pub fn robust_reconstruct(inst: &RobustInstance, noisy: &[IntVector]) -> Result<RobustOutput> {
    let rat: Vec<RatVector> = noisy.iter().map(RatVector::from).collect();
    robust_reconstruct_rational(inst, &rat)
}

/// Robust reconstruction from rational noisy remainders. Rational inputs
/// arise when a previous stage's averaged estimate is fed forward.
pub fn robust_reconstruct_rational(
    inst: &RobustInstance,
    noisy: &[RatVector],
) -> Result<RobustOutput> {
    let l = inst.len();
    if noisy.len() != l {
        return Err(Error::DimensionMismatch(format!(
            "{} remainders for {l} moduli",
            noisy.len()
        )));
    }
    if let Some(r) = noisy.iter().find(|r| r.dim() != inst.dim()) {
        return Err(Error::DimensionMismatch(format!(
            "remainder of length {} in dimension {}",
            r.dim(),
            inst.dim()
        )));
    }
    let a = inst.anchor;

    // Step 2: snap remainder differences onto L(G_{l0,j})
    let mut v = vec![IntVector::zeros(inst.dim()); l];
    for j in (0..l).filter(|&j| j != a) {
        let lat = inst.lattices[j]
            .as_ref()
            .expect("gcld lattice off the anchor");
        v[j] = closest_vector_rational(lat, &(&noisy[j] - &noisy[a]))?;
    }

    // Step 3: M_{l0} n_{l0} = 0 mod M_{l0}, = v_j mod M_j, with n_{l0}
    // taken in N(M_{l0}^-1 R)
    let x = inst.crt.solve(&v)?;
    let (y, rest) = inst.region.decompose(&x);
    debug_assert!(rest.is_zero());
    let n0 = inst.region.reduce_shift(&y);
    let fold0 = inst.moduli[a].mul_vec(&n0);

    // Step 4
    let folds: Vec<IntVector> = (0..l)
        .map(|j| {
            if j == a {
                fold0.clone()
            } else {
                &fold0 - &v[j]
            }
        })
        .collect();

    // Step 5
    let mut sum = RatVector::zeros(inst.dim());
    for (fold, r) in folds.iter().zip(noisy) {
        sum = &(&sum + &RatVector::from(fold)) + r;
    }
    let estimate = sum.scale(&BigRational::new(BigInt::from(1), BigInt::from(l)));
    Ok(RobustOutput { estimate, folds })
}

/// Region `N(anchor) + anchor N(anchor^-1 R)` for a designated lcrm `R`.
pub fn robustly_determinable_region(
    inst: &RobustInstance,
    designated_lcrm: &IntMatrix,
) -> Result<FpdUnionRegion> {
    verify_lcrm(&inst.moduli, designated_lcrm, inst.crt.lcrm())?;
    FpdUnionRegion::new(&inst.moduli[inst.anchor], designated_lcrm)
}

/// `|estimate - f|²` as an exact rational.
pub fn error_norm_sq(estimate: &RatVector, f: &IntVector) -> BigRational {
    (estimate - &f.to_rational()).norm_sq()
}

/// `true` if every recovered fold equals the true fold.
pub fn folds_match(inst: &RobustInstance, out: &RobustOutput, f: &IntVector) -> Result<bool> {
    Ok(inst.true_folds(f)? == out.folds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[[i64; 2]]) -> IntMatrix {
        IntMatrix::from_rows(rows)
    }

    fn group1() -> Vec<IntMatrix> {
        let g = m(&[[22, -17], [17, 22]]);
        vec![
            g.clone(),
            &g * &m(&[[16, 0], [1, 16]]),
            &g * &m(&[[16, 1], [0, 16]]),
        ]
    }

    #[test]
    fn coprime_bound_is_a_quarter() {
        let inst = build_instance(&[IntMatrix::diag(&[3, 3]), IntMatrix::diag(&[5, 5])]).unwrap();
        assert_eq!(*inst.tau_bound_sq(), BigRational::new(1.into(), 16.into()));
        assert_eq!(inst.anchor(), 0);
    }

    #[test]
    fn shared_factor_bound() {
        let inst = build_instance(&group1()).unwrap();
        assert_eq!(
            *inst.tau_bound_sq(),
            BigRational::new(773.into(), 16.into())
        );
        assert_eq!(inst.anchor(), 0);
    }

    #[test]
    fn duplicate_rejected() {
        let a = m(&[[3, 1], [2, 2]]);
        assert_eq!(
            build_instance(&[a.clone(), a]).unwrap_err(),
            Error::DuplicateModuli(0, 1)
        );
    }

    #[test]
    fn noiseless_recovery() {
        let ms = group1();
        let r1 = &ms[0] * &IntMatrix::scalar(2, 256);
        let inst = build_instance_with_anchor(&ms, 0, Some(&r1)).unwrap();
        for f in [[0, 0], [1000, -3000], [5000, 5000], [-2, 7]] {
            let f = IntVector::from_i64(&f);
            let f = ModReducer::new(&r1).unwrap().remainder(&f);
            let rs = inst.remainders_of(&f).unwrap();
            let out = robust_reconstruct(&inst, &rs).unwrap();
            assert_eq!(out.estimate, f.to_rational());
            assert!(folds_match(&inst, &out, &f).unwrap());
        }
    }

    #[test]
    fn bounded_noise_recovery() {
        let ms = group1();
        let inst = build_instance(&ms).unwrap();
        let f = inst.region().point_nearest_centroid();
        let errs = [[6, 0], [-4, 4], [0, -5]];
        let noisy: Vec<IntVector> = inst
            .remainders_of(&f)
            .unwrap()
            .iter()
            .zip(errs)
            .map(|(r, e)| r + &IntVector::from_i64(&e))
            .collect();
        let out = robust_reconstruct(&inst, &noisy).unwrap();
        assert!(folds_match(&inst, &out, &f).unwrap());
        let sum = errs
            .iter()
            .fold(IntVector::zeros(2), |acc, e| &acc + &IntVector::from_i64(e));
        let expect = &f.to_rational()
            + &sum
                .to_rational()
                .scale(&BigRational::new(1.into(), 3.into()));
        assert_eq!(out.estimate, expect);
    }

    #[test]
    fn designated_lcrm_verified() {
        let ms = group1();
        let wrong = &ms[0] * &IntMatrix::scalar(2, 128);
        assert!(matches!(
            build_instance_with_anchor(&ms, 0, Some(&wrong)),
            Err(Error::NotAnLcrm(_))
        ));
        let inst = build_instance(&ms).unwrap();
        let r1 = &ms[0] * &IntMatrix::scalar(2, 256);
        let region = robustly_determinable_region(&inst, &r1).unwrap();
        assert_eq!(region.shift_count(), BigInt::from(65536));
        let r1_red = ModReducer::new(&r1).unwrap();
        for p in [[0, 0], [100, 200], [-5000, 123], [9999, -9999]] {
            let p = IntVector::from_i64(&p);
            assert_eq!(region.contains(&p), r1_red.contains(&p));
        }
    }
}
