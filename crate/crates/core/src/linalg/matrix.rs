use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};

/// Dense integer matrix with arbitrary-precision entries, stored row-major.
///
/// Moduli, normal forms, gclds and lcrms are all square; the rectangular
/// shape is used for the `D x 2D` blocks behind coprimality tests, gclds,
/// lcrms and Diophantine solving.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

/// Integer column vector.
#[derive(Clone, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct IntVector(Vec<BigInt>);

/// Column vector of exact rationals; used for averaged estimates.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RatVector(Vec<BigRational>);

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Self {
        assert!(rows > 0 && cols > 0, "matrix must be non-empty");
        assert_eq!(data.len(), rows * cols, "entry count does not match shape");
        IntMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    pub fn diag<T: Into<BigInt> + Clone>(entries: &[T]) -> Self {
        let n = entries.len();
        let mut m = IntMatrix::zeros(n, n);
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone().into();
        }
        m
    }

    /// Scalar multiple of the identity.
    pub fn scalar<T: Into<BigInt>>(n: usize, value: T) -> Self {
        let v = value.into();
        let mut m = IntMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = v.clone();
        }
        m
    }

    /// Builds a matrix from rows of anything convertible to `BigInt`.
    ///
    /// Panics if the rows are ragged or empty.
    pub fn from_rows<T: Into<BigInt> + Clone, R: AsRef<[T]>>(rows: &[R]) -> Self {
        let r = rows.len();
        assert!(r > 0, "matrix must have at least one row");
        let c = rows[0].as_ref().len();
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned().map(Into::into));
        }
        IntMatrix::new(r, c, data)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Dimension of a square matrix.
    pub fn dim(&self) -> usize {
        debug_assert!(self.is_square());
        self.rows
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> IntVector {
        IntVector((0..self.rows).map(|i| self[(i, j)].clone()).collect())
    }

    pub fn from_columns(columns: &[IntVector]) -> Self {
        assert!(!columns.is_empty());
        let rows = columns[0].dim();
        let mut m = IntMatrix::zeros(rows, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.dim(), rows);
            for i in 0..rows {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Horizontal concatenation `(self other)`.
    pub fn hstack(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot place {}x{} next to {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut m = IntMatrix::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)].clone();
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        Ok(m)
    }

    /// Sub-block with rows `r0..r1` and columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> IntMatrix {
        let mut m = IntMatrix::zeros(r1 - r0, c1 - c0);
        for i in r0..r1 {
            for j in c0..c1 {
                m[(i - r0, j - c0)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &IntVector) -> IntVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimension mismatch");
        IntVector(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.0.iter())
                        .fold(BigInt::zero(), |acc, (a, b)| acc + a * b)
                })
                .collect(),
        )
    }

    pub fn mul_rat_vec(&self, v: &RatVector) -> RatVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimension mismatch");
        RatVector(
            (0..self.rows)
                .map(|i| {
                    self.row(i)
                        .iter()
                        .zip(v.0.iter())
                        .fold(BigRational::zero(), |acc, (a, b)| {
                            acc + BigRational::from_integer(a.clone()) * b
                        })
                })
                .collect(),
        )
    }

    pub fn scale(&self, k: &BigInt) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x * k).collect(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self[(i, j)].is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].is_zero()))
    }

    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.rows.min(self.cols))
            .map(|i| self[(i, i)].clone())
            .collect()
    }

    /// Exact quotient `self / k` when every entry is divisible by `k`.
    pub fn div_exact(&self, k: &BigInt) -> Option<IntMatrix> {
        let mut data = Vec::with_capacity(self.data.len());
        for x in &self.data {
            let (q, r) = x.div_rem(k);
            if !r.is_zero() {
                return None;
            }
            data.push(q);
        }
        Some(IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self^{-1} * rhs` when it is an integer matrix; `None` if some entry
    /// is fractional. Errors if `self` is singular.
    pub fn left_divide(&self, rhs: &IntMatrix) -> Result<Option<IntMatrix>> {
        let det = super::det(self);
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let num = &super::adjugate(self) * rhs;
        Ok(num.div_exact(&det))
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// `row[target] += k * row[source]`
    pub fn add_row_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let v = &self.data[source * self.cols + j] * k;
            self.data[target * self.cols + j] += v;
        }
    }

    /// `col[target] += k * col[source]`
    pub fn add_col_multiple(&mut self, target: usize, source: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let v = &self.data[i * self.cols + source] * k;
            self.data[i * self.cols + target] += v;
        }
    }

    pub fn negate_row(&mut self, i: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }

    pub fn negate_col(&mut self, j: usize) {
        for i in 0..self.rows {
            let v = -std::mem::take(&mut self.data[i * self.cols + j]);
            self.data[i * self.cols + j] = v;
        }
    }

    /// Applies the 2x2 unimodular transform `[[a, b], [c, d]]` to columns
    /// `(i, j)`: `col_i <- a col_i + c col_j`, `col_j <- b col_i + d col_j`.
    pub(crate) fn combine_cols(
        &mut self,
        i: usize,
        j: usize,
        a: &BigInt,
        b: &BigInt,
        c: &BigInt,
        d: &BigInt,
    ) {
        for r in 0..self.rows {
            let x = self[(r, i)].clone();
            let y = self[(r, j)].clone();
            self[(r, i)] = a * &x + c * &y;
            self[(r, j)] = b * &x + d * &y;
        }
    }

    /// Row analogue of [`IntMatrix::combine_cols`]:
    /// `row_i <- a row_i + b row_j`, `row_j <- c row_i + d row_j`.
    pub(crate) fn combine_rows(
        &mut self,
        i: usize,
        j: usize,
        a: &BigInt,
        b: &BigInt,
        c: &BigInt,
        d: &BigInt,
    ) {
        for col in 0..self.cols {
            let x = self[(i, col)].clone();
            let y = self[(j, col)].clone();
            self[(i, col)] = a * &x + b * &y;
            self[(j, col)] = c * &x + d * &y;
        }
    }

    /// Parses a bracketed row-major literal such as `[[3,1],[2,2]]`.
    pub fn parse(s: &str) -> Result<IntMatrix> {
        let mut p = Parser::new(s);
        let m = p.matrix()?;
        p.end()?;
        Ok(m)
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += a * &rhs[(k, j)];
                }
            }
        }
        out
    }
}

impl Add for &IntMatrix {
    type Output = IntMatrix;
    fn add(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl Sub for &IntMatrix {
    type Output = IntMatrix;
    fn sub(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl Neg for &IntMatrix {
    type Output = IntMatrix;
    fn neg(self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| -a).collect(),
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "[")?;
            for (j, x) in self.row(i).iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

impl IntVector {
    pub fn new(entries: Vec<BigInt>) -> Self {
        assert!(!entries.is_empty(), "vector must be non-empty");
        IntVector(entries)
    }

    pub fn from_i64(entries: &[i64]) -> Self {
        IntVector::new(entries.iter().map(|&x| BigInt::from(x)).collect())
    }

    pub fn zeros(n: usize) -> Self {
        IntVector(vec![BigInt::zero(); n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut v = IntVector::zeros(n);
        v.0[i] = BigInt::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<BigInt> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn norm_sq(&self) -> BigInt {
        self.0.iter().map(|x| x * x).sum()
    }

    pub fn dot(&self, other: &IntVector) -> BigInt {
        assert_eq!(self.dim(), other.dim());
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn scale(&self, k: &BigInt) -> IntVector {
        IntVector(self.0.iter().map(|x| x * k).collect())
    }

    pub fn to_rational(&self) -> RatVector {
        RatVector(
            self.0
                .iter()
                .map(|x| BigRational::from_integer(x.clone()))
                .collect(),
        )
    }

    /// Euclidean norm as a float, for display.
    pub fn norm_f64(&self) -> f64 {
        crate::numeric::sqrt_int_f64(&self.norm_sq())
    }

    /// Parses a bracketed literal such as `[5,3]`.
    pub fn parse(s: &str) -> Result<IntVector> {
        let mut p = Parser::new(s);
        let v = p.vector()?;
        p.end()?;
        Ok(IntVector::new(v))
    }
}

impl Index<usize> for IntVector {
    type Output = BigInt;
    fn index(&self, i: usize) -> &BigInt {
        &self.0[i]
    }
}

impl IndexMut<usize> for IntVector {
    fn index_mut(&mut self, i: usize) -> &mut BigInt {
        &mut self.0[i]
    }
}

impl Add for &IntVector {
    type Output = IntVector;
    fn add(self, rhs: &IntVector) -> IntVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &IntVector {
    type Output = IntVector;
    fn sub(self, rhs: &IntVector) -> IntVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        IntVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &IntVector {
    type Output = IntVector;
    fn neg(self) -> IntVector {
        IntVector(self.0.iter().map(|a| -a).collect())
    }
}

impl fmt::Display for IntVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

impl RatVector {
    pub fn new(entries: Vec<BigRational>) -> Self {
        assert!(!entries.is_empty(), "vector must be non-empty");
        RatVector(entries)
    }

    pub fn zeros(n: usize) -> Self {
        RatVector(vec![BigRational::zero(); n])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.0
    }

    pub fn norm_sq(&self) -> BigRational {
        self.0
            .iter()
            .fold(BigRational::zero(), |acc, x| acc + x * x)
    }

    pub fn scale(&self, k: &BigRational) -> RatVector {
        RatVector(self.0.iter().map(|x| x * k).collect())
    }

    /// Integer vector if every entry is integral.
    pub fn to_integer(&self) -> Option<IntVector> {
        self.0
            .iter()
            .map(|x| x.is_integer().then(|| x.to_integer()))
            .collect::<Option<Vec<_>>>()
            .map(IntVector)
    }

    /// Element-wise floor.
    pub fn floor(&self) -> IntVector {
        IntVector(self.0.iter().map(|x| x.floor().to_integer()).collect())
    }

    /// Nearest integer vector, halves rounded toward negative infinity.
    pub fn round_half_down(&self) -> IntVector {
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        IntVector(
            self.0
                .iter()
                .map(|x| (x - &half).ceil().to_integer())
                .collect(),
        )
    }

    pub fn norm_f64(&self) -> f64 {
        crate::numeric::sqrt_rational_f64(&self.norm_sq())
    }
}

impl Index<usize> for RatVector {
    type Output = BigRational;
    fn index(&self, i: usize) -> &BigRational {
        &self.0[i]
    }
}

impl Add for &RatVector {
    type Output = RatVector;
    fn add(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        RatVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &RatVector {
    type Output = RatVector;
    fn sub(self, rhs: &RatVector) -> RatVector {
        assert_eq!(self.dim(), rhs.dim(), "vector dimension mismatch");
        RatVector(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl From<&IntVector> for RatVector {
    fn from(v: &IntVector) -> Self {
        v.to_rational()
    }
}

impl fmt::Display for RatVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, "]")
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(s: &'a str) -> Self {
        Parser {
            src: s.as_bytes(),
            pos: 0,
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        match self.peek() {
            Some(x) if x == c => {
                self.pos += 1;
                Ok(())
            }
            Some(x) => Err(Error::parse(
                self.pos,
                format!("expected '{}', found '{}'", c as char, x as char),
            )),
            None => Err(Error::parse(
                self.pos,
                format!("expected '{}', found end of input", c as char),
            )),
        }
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.src.get(self.pos), Some(b'-') | Some(b'+')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            return Err(Error::parse(start, "expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<BigInt>()
            .map_err(|e| Error::parse(start, e.to_string()))
    }

    fn vector(&mut self) -> Result<Vec<BigInt>> {
        self.expect(b'[')?;
        let mut out = vec![self.integer()?];
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    out.push(self.integer()?);
                }
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(Error::parse(self.pos, "expected ',' or ']'")),
            }
        }
    }

    fn matrix(&mut self) -> Result<IntMatrix> {
        self.expect(b'[')?;
        let mut rows = Vec::new();
        let row_start = self.peek().map(|_| self.pos).unwrap_or(self.pos);
        rows.push((row_start, self.vector()?));
        loop {
            match self.peek() {
                Some(b',') => {
                    self.pos += 1;
                    let at = self.peek().map(|_| self.pos).unwrap_or(self.pos);
                    rows.push((at, self.vector()?));
                }
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                _ => return Err(Error::parse(self.pos, "expected ',' or ']'")),
            }
        }
        let cols = rows[0].1.len();
        if let Some((at, _)) = rows.iter().find(|(_, r)| r.len() != cols) {
            return Err(Error::parse(*at, "rows have different lengths"));
        }
        let n = rows.len();
        Ok(IntMatrix::new(
            n,
            cols,
            rows.into_iter().flat_map(|(_, r)| r).collect(),
        ))
    }

    fn end(&mut self) -> Result<()> {
        match self.peek() {
            None => Ok(()),
            Some(_) => Err(Error::parse(self.pos, "unexpected trailing input")),
        }
    }
}

/// Parses a list of matrix literals separated by `;`.
pub fn parse_matrix_list(s: &str) -> Result<Vec<IntMatrix>> {
    let mut p = Parser::new(s);
    let mut out = vec![p.matrix()?];
    while let Some(b';') = p.peek() {
        p.pos += 1;
        out.push(p.matrix()?);
    }
    p.end()?;
    Ok(out)
}
