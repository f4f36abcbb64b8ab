//! Lattice geometry: reduction into the fundamental parallelepiped (FPD),
//! FPD enumeration, exact shortest and closest vectors for small dimension,
//! and unions of shifted FPDs.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{adjugate, det, snf, IntMatrix, IntVector, RatVector};

/// Default limit on the number of points [`enumerate_fpd`] will materialize.
pub const DEFAULT_FPD_CAP: u64 = 1_000_000;

/// Environment variable overriding [`DEFAULT_FPD_CAP`].
pub const FPD_CAP_ENV: &str = "MDCRT_FPD_CAP";

/// Largest dimension supported by the exact SVP/CVP routines.
pub const MAX_LATTICE_DIM: usize = 4;

/// Current FPD enumeration cap, honoring `MDCRT_FPD_CAP`.
pub fn fpd_cap() -> u64 {
    std::env::var(FPD_CAP_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_FPD_CAP)
}

/// Precomputed `m^-1 = adj(m) / det(m)` for repeated reductions modulo `m`.
#[derive(Clone, Debug)]
pub struct ModReducer {
    m: IntMatrix,
    adj: IntMatrix,
    det: BigInt,
}

impl ModReducer {
    pub fn new(m: &IntMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch("modulus must be square".into()));
        }
        let d = det(m);
        if d.is_zero() {
            return Err(Error::SingularMatrix);
        }
        // keep the denominator positive so floor division is the plain one
        let (adj, d) = if d.is_negative() {
            (-&adjugate(m), -d)
        } else {
            (adjugate(m), d)
        };
        Ok(ModReducer {
            m: m.clone(),
            adj,
            det: d,
        })
    }

    pub fn modulus(&self) -> &IntMatrix {
        &self.m
    }

    /// `|det(m)|`
    pub fn abs_det(&self) -> &BigInt {
        &self.det
    }

    /// `(q, r)` with `f = m q + r`, `q = floor(m^-1 f)` and `r` in `N(m)`.
    pub fn reduce(&self, f: &IntVector) -> (IntVector, IntVector) {
        let num = self.adj.mul_vec(f);
        let q = IntVector::new(
            num.entries()
                .iter()
                .map(|x| x.div_floor(&self.det))
                .collect(),
        );
        let r = f - &self.m.mul_vec(&q);
        (q, r)
    }

    pub fn remainder(&self, f: &IntVector) -> IntVector {
        self.reduce(f).1
    }

    /// `floor(m^-1 t)` for a rational vector.
    pub fn floor_quotient_rational(&self, t: &RatVector) -> IntVector {
        let num = self.adj.mul_rat_vec(t);
        let d = BigRational::from_integer(self.det.clone());
        IntVector::new(
            num.entries()
                .iter()
                .map(|x| (x / &d).floor().to_integer())
                .collect(),
        )
    }

    /// `f` lies in `N(m)`.
    pub fn contains(&self, f: &IntVector) -> bool {
        self.reduce(f).0.is_zero()
    }

    /// `f` lies in the lattice `L(m)`.
    pub fn in_lattice(&self, f: &IntVector) -> bool {
        self.adj
            .mul_vec(f)
            .entries()
            .iter()
            .all(|x| x.is_multiple_of(&self.det))
    }
}

/// Division with remainder modulo a matrix: `f = m q + r` with `r` in `N(m)`.
pub fn reduce_mod(f: &IntVector, m: &IntMatrix) -> Result<(IntVector, IntVector)> {
    Ok(ModReducer::new(m)?.reduce(f))
}

/// All `|det(m)|` points of `N(m)`, using the default cap.
pub fn enumerate_fpd(m: &IntMatrix) -> Result<Vec<IntVector>> {
    enumerate_fpd_with_cap(m, fpd_cap())
}

/// All points of `N(m)`, ordered lexicographically by their Smith digits.
///
/// With `u m v = diag(d_1..d_D)`, the residues of `Z^D / L(m)` are
/// `u^-1 k` for digit vectors `0 <= k_i < d_i`; each is reduced into `N(m)`.
pub fn enumerate_fpd_with_cap(m: &IntMatrix, cap: u64) -> Result<Vec<IntVector>> {
    let reducer = ModReducer::new(m)?;
    let count = reducer.abs_det().clone();
    if count > BigInt::from(cap) {
        return Err(Error::CapExceeded {
            count: count.to_string(),
            cap,
        });
    }
    let n = m.dim();
    let s = snf(m);
    let u_inv = {
        let du = det(&s.u);
        &adjugate(&s.u).scale(&du)
    }
    .clone();
    let radices: Vec<BigInt> = s.lambda.diagonal();
    let total = count.to_usize().expect("bounded by cap");
    let mut out = Vec::with_capacity(total);
    let mut digits = vec![BigInt::zero(); n];
    for _ in 0..total {
        let k = u_inv.mul_vec(&IntVector::new(digits.clone()));
        out.push(reducer.remainder(&k));
        // odometer, last digit fastest
        for i in (0..n).rev() {
            digits[i] += 1;
            if digits[i] < radices[i] {
                break;
            }
            digits[i] = BigInt::zero();
        }
    }
    Ok(out)
}

/// A nonsingular lattice basis with its Gram matrix and a reduced basis.
#[derive(Clone, Debug)]
pub struct LatticeBasis {
    basis: IntMatrix,
    gram: IntMatrix,
    reduced: Option<IntMatrix>,
    gso: Option<Gso>,
}

/// Gram-Schmidt data of the reduced basis.
#[derive(Clone, Debug)]
struct Gso {
    /// `|b*_i|^2`
    norms: Vec<BigRational>,
    /// `mu[i][j] = <b_i, b*_j> / |b*_j|^2` for `j < i`
    mu: Vec<Vec<BigRational>>,
    /// `b*_i` themselves
    star: Vec<RatVector>,
}

impl LatticeBasis {
    pub fn new(basis: IntMatrix) -> Result<Self> {
        if !basis.is_square() {
            return Err(Error::DimensionMismatch(
                "lattice basis must be square".into(),
            ));
        }
        if det(&basis).is_zero() {
            return Err(Error::SingularMatrix);
        }
        let gram = &basis.transpose() * &basis;
        let (reduced, gso) = match basis.dim() {
            1 => (Some(basis.clone()), None),
            2 => {
                let r = lagrange_gauss(&basis);
                let g = gram_schmidt(&r);
                (Some(r), Some(g))
            }
            d if d <= MAX_LATTICE_DIM => {
                let r = lll(&basis);
                let g = gram_schmidt(&r);
                (Some(r), Some(g))
            }
            _ => (None, None),
        };
        Ok(LatticeBasis {
            basis,
            gram,
            reduced,
            gso,
        })
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn reduced(&self) -> Option<&IntMatrix> {
        self.reduced.as_ref()
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    fn check_dim(&self) -> Result<()> {
        if self.dim() > MAX_LATTICE_DIM {
            Err(Error::DimensionUnsupported(self.dim()))
        } else {
            Ok(())
        }
    }
}

/// Exact shortest nonzero vector: `(|v|^2, v)`.
///
/// Two-dimensional lattices use the first Lagrange-Gauss vector; three and
/// four dimensions enumerate the ellipsoid `|Bx|^2 <= min_i |b_i|^2` over an
/// LLL-reduced basis.
pub fn shortest_vector(l: &LatticeBasis) -> Result<(BigInt, IntVector)> {
    l.check_dim()?;
    let reduced = l
        .reduced
        .as_ref()
        .expect("reduced basis for supported dims");
    match l.dim() {
        1 => {
            let b = reduced.column(0);
            let w = if b[0].is_negative() { -&b } else { b };
            Ok((w.norm_sq(), w))
        }
        2 => {
            let b = reduced.column(0);
            Ok((b.norm_sq(), b))
        }
        _ => {
            let gso = l.gso.as_ref().expect("gso for supported dims");
            let n = l.dim();
            let (mut best_len, mut best) = (0..n)
                .map(|i| {
                    let c = reduced.column(i);
                    (c.norm_sq(), c)
                })
                .min_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)))
                .expect("nonempty basis");
            let center = vec![BigRational::zero(); n];
            let radius = BigRational::from_integer(best_len.clone());
            enumerate_ball(gso, &center, radius, &mut |coeffs| {
                if coeffs.iter().all(Zero::is_zero) {
                    return None;
                }
                let v = reduced.mul_vec(&IntVector::new(coeffs.to_vec()));
                let len = v.norm_sq();
                if len < best_len || (len == best_len && v < best) {
                    best_len = len;
                    best = v;
                    return Some(BigRational::from_integer(best_len.clone()));
                }
                None
            });
            Ok((best_len, best))
        }
    }
}

/// Closest lattice vector to an integer target.
pub fn closest_vector(l: &LatticeBasis, target: &IntVector) -> Result<IntVector> {
    closest_vector_rational(l, &target.to_rational())
}

/// Closest lattice vector to a rational target; ties go to the
/// lexicographically smallest lattice vector.
pub fn closest_vector_rational(l: &LatticeBasis, target: &RatVector) -> Result<IntVector> {
    l.check_dim()?;
    if target.dim() != l.dim() {
        return Err(Error::DimensionMismatch(format!(
            "target has {} entries for a rank-{} lattice",
            target.dim(),
            l.dim()
        )));
    }
    let reduced = l
        .reduced
        .as_ref()
        .expect("reduced basis for supported dims");
    let n = l.dim();
    if n == 1 {
        let b = reduced[(0, 0)].abs();
        let t = &target[0];
        let lo = (t / BigRational::from_integer(b.clone()))
            .floor()
            .to_integer()
            * &b;
        let hi = &lo + &b;
        let dlo = (BigRational::from_integer(lo.clone()) - t).abs();
        let dhi = (BigRational::from_integer(hi.clone()) - t).abs();
        // ties go to the smaller vector
        let v = if dhi < dlo { hi } else { lo };
        return Ok(IntVector::new(vec![v]));
    }
    let gso = l.gso.as_ref().expect("gso for supported dims");

    // target coordinates along the Gram-Schmidt directions
    let tau: Vec<BigRational> = (0..n)
        .map(|i| {
            let s = &gso.star[i];
            let dot = (0..n).fold(BigRational::zero(), |acc, k| acc + &s[k] * &target[k]);
            dot / &gso.norms[i]
        })
        .collect();

    // Babai nearest plane gives the initial radius
    let mut coeffs = vec![BigInt::zero(); n];
    for i in (0..n).rev() {
        let mut c = tau[i].clone();
        for (j, cj) in coeffs.iter().enumerate().skip(i + 1) {
            c -= &gso.mu[j][i] * BigRational::from_integer(cj.clone());
        }
        coeffs[i] = round_half_down(&c);
    }
    let mut best = reduced.mul_vec(&IntVector::new(coeffs));
    let mut best_dist = (&best.to_rational() - target).norm_sq();

    enumerate_ball(gso, &tau, best_dist.clone(), &mut |x| {
        let v = reduced.mul_vec(&IntVector::new(x.to_vec()));
        let d = (&v.to_rational() - target).norm_sq();
        if d < best_dist || (d == best_dist && v < best) {
            let shrink = d < best_dist;
            best_dist = d;
            best = v;
            if shrink {
                return Some(best_dist.clone());
            }
        }
        None
    });
    Ok(best)
}

/// Visits every coefficient vector `x` with
/// `sum_i |b*_i|^2 (x_i + sum_{j>i} mu_ji x_j - center_i)^2 <= radius`.
/// The visitor may return a smaller radius to prune the rest of the search.
fn enumerate_ball(
    gso: &Gso,
    center: &[BigRational],
    radius: BigRational,
    visit: &mut dyn FnMut(&[BigInt]) -> Option<BigRational>,
) {
    let n = gso.norms.len();
    let mut x = vec![BigInt::zero(); n];
    let mut radius = radius;
    recurse(
        gso,
        center,
        n,
        &mut x,
        &BigRational::zero(),
        &mut radius,
        visit,
    );

    fn recurse(
        gso: &Gso,
        center: &[BigRational],
        level: usize,
        x: &mut Vec<BigInt>,
        partial: &BigRational,
        radius: &mut BigRational,
        visit: &mut dyn FnMut(&[BigInt]) -> Option<BigRational>,
    ) {
        if level == 0 {
            if let Some(r) = visit(x) {
                *radius = r;
            }
            return;
        }
        let i = level - 1;
        let mut c = center[i].clone();
        for (j, xj) in x.iter().enumerate().skip(i + 1) {
            c -= &gso.mu[j][i] * BigRational::from_integer(xj.clone());
        }
        let cost = |xi: &BigInt| {
            let d = BigRational::from_integer(xi.clone()) - &c;
            partial + &gso.norms[i] * &d * &d
        };
        let start = round_half_down(&c);
        // walk upward from the rounded center, then downward
        let mut xi = start.clone();
        loop {
            let p = cost(&xi);
            if p > *radius {
                break;
            }
            x[i] = xi.clone();
            recurse(gso, center, i, x, &p, radius, visit);
            xi += 1;
        }
        let mut xi = start - 1;
        loop {
            let p = cost(&xi);
            if p > *radius {
                break;
            }
            x[i] = xi.clone();
            recurse(gso, center, i, x, &p, radius, visit);
            xi -= 1;
        }
        x[i] = BigInt::zero();
    }
}

fn round_half_down(q: &BigRational) -> BigInt {
    let half = BigRational::new(BigInt::one(), BigInt::from(2));
    (q - half).ceil().to_integer()
}

/// Nearest integer to `n / d` for `d > 0`.
fn round_div(n: &BigInt, d: &BigInt) -> BigInt {
    let two = BigInt::from(2);
    (&two * n + d).div_floor(&(&two * d))
}

/// Lagrange-Gauss reduction of a rank-2 basis given by columns.
pub fn lagrange_gauss(basis: &IntMatrix) -> IntMatrix {
    assert_eq!(basis.cols(), 2, "Lagrange-Gauss needs exactly two columns");
    let mut a = basis.column(0);
    let mut b = basis.column(1);
    if a.norm_sq() > b.norm_sq() {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let q = round_div(&a.dot(&b), &a.norm_sq());
        b = &b - &a.scale(&q);
        if b.norm_sq() >= a.norm_sq() {
            break;
        }
        std::mem::swap(&mut a, &mut b);
    }
    IntMatrix::from_columns(&[a, b])
}

fn gram_schmidt(basis: &IntMatrix) -> Gso {
    let n = basis.cols();
    let cols: Vec<RatVector> = (0..n).map(|j| basis.column(j).to_rational()).collect();
    let dot = |a: &RatVector, b: &RatVector| {
        (0..a.dim()).fold(BigRational::zero(), |acc, k| acc + &a[k] * &b[k])
    };
    let mut star: Vec<RatVector> = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut mu = vec![vec![BigRational::zero(); n]; n];
    for i in 0..n {
        let mut v = cols[i].clone();
        for j in 0..i {
            let m = dot(&cols[i], &star[j]) / &norms[j];
            v = &v - &star[j].scale(&m);
            mu[i][j] = m;
        }
        norms.push(dot(&v, &v));
        star.push(v);
    }
    Gso { norms, mu, star }
}

/// Textbook LLL with `delta = 3/4`, exact rationals. Intended for `D <= 4`.
fn lll(basis: &IntMatrix) -> IntMatrix {
    let n = basis.cols();
    let mut b = basis.clone();
    let delta = BigRational::new(3.into(), 4.into());
    let mut gso = gram_schmidt(&b);
    let mut k = 1;
    while k < n {
        for j in (0..k).rev() {
            let q = round_half_down(&gso.mu[k][j]);
            if !q.is_zero() {
                b.add_col_multiple(k, j, &-&q);
                gso = gram_schmidt(&b);
            }
        }
        let mu = &gso.mu[k][k - 1];
        let lhs = &gso.norms[k];
        let rhs = (&delta - mu * mu) * &gso.norms[k - 1];
        if *lhs >= rhs {
            k += 1;
        } else {
            b.swap_cols(k, k - 1);
            gso = gram_schmidt(&b);
            k = (k - 1).max(1);
        }
    }
    b
}

/// `true` iff `f` lies in the union of `N(anchor) + anchor k` over `k` in
/// the region's shifts.
pub fn in_fpd_union(f: &IntVector, region: &FpdUnionRegion) -> bool {
    region.contains(f)
}

/// Union of disjoint shifted copies `N(anchor) + anchor k`, with `k` ranging
/// over `N(quotient)` where `quotient = anchor^-1 R` for an lcrm `R`.
///
/// The shift set is represented by `quotient`; [`FpdUnionRegion::shifts`]
/// materializes it.
#[derive(Clone, Debug)]
pub struct FpdUnionRegion {
    anchor: ModReducer,
    quotient: ModReducer,
}

impl FpdUnionRegion {
    /// Region for anchor `M` and common right multiple `R` of `M`.
    pub fn new(anchor: &IntMatrix, lcrm: &IntMatrix) -> Result<Self> {
        let quotient = anchor
            .left_divide(lcrm)?
            .ok_or_else(|| Error::NotAnLcrm("not a right multiple of the anchor".into()))?;
        Self::from_quotient(anchor, &quotient)
    }

    pub fn from_quotient(anchor: &IntMatrix, quotient: &IntMatrix) -> Result<Self> {
        Ok(FpdUnionRegion {
            anchor: ModReducer::new(anchor)?,
            quotient: ModReducer::new(quotient)?,
        })
    }

    pub fn anchor(&self) -> &IntMatrix {
        self.anchor.modulus()
    }

    /// `anchor^-1 R`
    pub fn quotient(&self) -> &IntMatrix {
        self.quotient.modulus()
    }

    /// Number of shifted copies, `|det(anchor^-1 R)|`.
    pub fn shift_count(&self) -> BigInt {
        self.quotient.abs_det().clone()
    }

    /// Total number of points, `|det R|`.
    pub fn cardinality(&self) -> BigInt {
        self.anchor.abs_det() * self.quotient.abs_det()
    }

    /// The shift vectors `N(anchor^-1 R)`.
    pub fn shifts(&self) -> Result<Vec<IntVector>> {
        enumerate_fpd(self.quotient())
    }

    pub fn shifts_with_cap(&self, cap: u64) -> Result<Vec<IntVector>> {
        enumerate_fpd_with_cap(self.quotient(), cap)
    }

    /// `(k, r)` with `f = anchor k + r` and `r` in `N(anchor)`.
    pub fn decompose(&self, f: &IntVector) -> (IntVector, IntVector) {
        self.anchor.reduce(f)
    }

    /// `k mod (anchor^-1 R)`, the shift congruent to `k`.
    pub fn reduce_shift(&self, k: &IntVector) -> IntVector {
        self.quotient.remainder(k)
    }

    pub fn contains(&self, f: &IntVector) -> bool {
        let (k, _) = self.anchor.reduce(f);
        self.quotient.contains(&k)
    }

    /// `anchor k + r`
    pub fn compose(&self, shift: &IntVector, r: &IntVector) -> IntVector {
        &self.anchor().mul_vec(shift) + r
    }

    /// Center of the covering parallelepiped, `anchor (quotient 1/2 + 1/2)`.
    pub fn centroid(&self) -> RatVector {
        let n = self.anchor().dim();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let halves = RatVector::new(vec![half.clone(); n]);
        let q = self.quotient().mul_rat_vec(&halves);
        let inner = &q + &halves;
        self.anchor().mul_rat_vec(&inner)
    }

    /// Region point nearest the centroid; ties go to the lexicographically
    /// smallest point.
    pub fn point_nearest_centroid(&self) -> IntVector {
        let c = self.centroid();
        let n = c.dim();
        let base = c.floor();
        let mut best: Option<(BigRational, IntVector)> = None;
        // expanding cubes around floor(centroid); the region has positive
        // density, so a member is found after finitely many shells
        for radius in 0i64.. {
            if let Some((d, _)) = &best {
                // every point outside this shell is farther than radius - 1
                let lb = BigRational::from_integer(BigInt::from((radius - 1).max(0)));
                if lb.clone() * lb > *d {
                    break;
                }
            }
            for offset in shell(n, radius) {
                let p = &base + &IntVector::from_i64(&offset);
                if !self.contains(&p) {
                    continue;
                }
                let d = (&p.to_rational() - &c).norm_sq();
                let better = match &best {
                    None => true,
                    Some((bd, bp)) => d < *bd || (d == *bd && p < *bp),
                };
                if better {
                    best = Some((d, p));
                }
            }
        }
        best.expect("region is nonempty").1
    }
}

/// Integer offsets with max-norm exactly `r`.
fn shell(n: usize, r: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut cur = vec![-r; n];
    loop {
        if cur.iter().any(|x| x.abs() == r) {
            out.push(cur.clone());
        }
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < r {
                cur[i] += 1;
                break;
            }
            cur[i] = -r;
        }
    }
}
