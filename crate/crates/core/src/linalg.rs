//! Dense matrices over exact scalars.
//!
//! Small and unoptimized: the matrices here are at most a few dozen rows.

use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// Exact field arithmetic used by [`Matrix`].
pub trait Scalar: Clone + PartialEq + fmt::Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero_elem(&self) -> bool;
    fn plus(&self, o: &Self) -> Self;
    fn minus(&self, o: &Self) -> Self;
    fn times(&self, o: &Self) -> Self;
    fn negated(&self) -> Self;
    fn inverse(&self) -> Option<Self>;
}

impl Scalar for BigRational {
    fn zero_like(&self) -> Self {
        BigRational::zero()
    }
    fn one_like(&self) -> Self {
        BigRational::one()
    }
    fn is_zero_elem(&self) -> bool {
        self.is_zero()
    }
    fn plus(&self, o: &Self) -> Self {
        self + o
    }
    fn minus(&self, o: &Self) -> Self {
        self - o
    }
    fn times(&self, o: &Self) -> Self {
        self * o
    }
    fn negated(&self) -> Self {
        -self
    }
    fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            None
        } else {
            Some(self.recip())
        }
    }
}

#[derive(Clone, PartialEq)]
pub struct Matrix<T: Scalar> {
    rows: usize,
    cols: usize,
    zero: T,
    data: Vec<T>,
}

pub type QMatrix = Matrix<BigRational>;

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize, zero: &T) -> Self {
        let zero = zero.zero_like();
        Matrix { rows, cols, data: vec![zero.clone(); rows * cols], zero }
    }

    pub fn identity(n: usize, like: &T) -> Self {
        let mut m = Self::zeros(n, n, like);
        for i in 0..n {
            m.data[i * n + i] = like.one_like();
        }
        m
    }

    /// Builds from rows; `like` supplies the zero when `rows` is empty.
    pub fn from_rows(rows: Vec<Vec<T>>, like: &T) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |x| x.len());
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Matrix { rows: r, cols: c, zero: like.zero_like(), data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, like: &T, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, zero: like.zero_like(), data }
    }

    pub fn diagonal(entries: &[T], like: &T) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n, like);
        for (i, e) in entries.iter().enumerate() {
            m.data[i * n + i] = e.clone();
        }
        m
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

    pub fn zero_elem(&self) -> &T {
        &self.zero
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U, like: &U) -> Matrix<U> {
        Matrix { rows: self.rows, cols: self.cols, zero: like.zero_like(), data: self.data.iter().map(f).collect() }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, &self.zero, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch in product");
        let mut out = Self::zeros(self.rows, o.cols, &self.zero);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero_elem() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if b.is_zero_elem() {
                        continue;
                    }
                    let idx = i * o.cols + j;
                    out.data[idx] = out.data[idx].plus(&a.times(b));
                }
            }
        }
        out
    }

    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            zero: self.zero.clone(),
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.plus(b)).collect(),
        }
    }

    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            zero: self.zero.clone(),
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.minus(b)).collect(),
        }
    }

    pub fn scale(&self, s: &T) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            zero: self.zero.clone(),
            data: self.data.iter().map(|a| a.times(s)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            zero: self.zero.clone(),
            data: self.data.iter().map(|a| a.negated()).collect(),
        }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::identity(self.rows, &self.zero.one_like());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && *self == Self::identity(self.rows, &self.zero.one_like())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|a| a.is_zero_elem())
    }

    /// Determinant by Gaussian elimination.
    pub fn det(&self) -> T {
        assert!(self.is_square(), "determinant of a non-square matrix");
        let n = self.rows;
        let mut m = self.data.clone();
        let mut det = self.zero.one_like();
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| !m[r * n + col].is_zero_elem()) else {
                return self.zero.clone();
            };
            if piv != col {
                for j in 0..n {
                    m.swap(piv * n + j, col * n + j);
                }
                det = det.negated();
            }
            let p = m[col * n + col].clone();
            det = det.times(&p);
            let pinv = p.inverse().expect("nonzero pivot");
            for r in col + 1..n {
                let f = m[r * n + col].times(&pinv);
                if f.is_zero_elem() {
                    continue;
                }
                for j in col..n {
                    let v = m[r * n + j].minus(&f.times(&m[col * n + j]));
                    m[r * n + j] = v;
                }
            }
        }
        det
    }

    /// Inverse by Gauss–Jordan elimination; `None` when singular.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of a non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n, &self.zero.one_like());
        for col in 0..n {
            let piv = (col..n).find(|&r| !a.get(r, col).is_zero_elem())?;
            if piv != col {
                for j in 0..n {
                    a.data.swap(piv * n + j, col * n + j);
                    inv.data.swap(piv * n + j, col * n + j);
                }
            }
            let pinv = a.get(col, col).inverse()?;
            for j in 0..n {
                let v = a.get(col, j).times(&pinv);
                a.set(col, j, v);
                let v = inv.get(col, j).times(&pinv);
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a.get(r, col).clone();
                if f.is_zero_elem() {
                    continue;
                }
                for j in 0..n {
                    let v = a.get(r, j).minus(&f.times(a.get(col, j)));
                    a.set(r, j, v);
                    let v = inv.get(r, j).minus(&f.times(inv.get(col, j)));
                    inv.set(r, j, v);
                }
            }
        }
        Some(inv)
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        Self::from_fn(h, w, &self.zero, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self.set(r0 + i, c0 + j, b.get(i, j).clone());
            }
        }
    }

    pub fn block_diag(blocks: &[Self], like: &T) -> Self {
        let n: usize = blocks.iter().map(|b| b.rows).sum();
        let m: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = Self::zeros(n, m, like);
        let (mut r, mut c) = (0, 0);
        for b in blocks {
            out.set_block(r, c, b);
            r += b.rows;
            c += b.cols;
        }
        out
    }

    /// The antidiagonal permutation w_n.
    pub fn antidiagonal(n: usize, like: &T) -> Self {
        let mut m = Self::zeros(n, n, like);
        for i in 0..n {
            m.set(i, n - 1 - i, like.one_like());
        }
        m
    }
}

/// Ordered list of block sizes with offsets, used to address block matrices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockLayout {
    sizes: Vec<usize>,
    offsets: Vec<usize>,
}

impl BlockLayout {
    pub fn new(sizes: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(sizes.len());
        let mut acc = 0;
        for s in &sizes {
            offsets.push(acc);
            acc += s;
        }
        BlockLayout { sizes, offsets }
    }

    pub fn total(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn size(&self, i: usize) -> usize {
        self.sizes[i]
    }

    pub fn offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn len(&self) -> usize {
        self.sizes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sizes.is_empty()
    }
}
