use std::fmt;
use std::ops::{Add, Index, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense rectangular matrix of complex scalars.
///
/// Zero-sized dimensions are allowed so that empty blocks of a canonical
/// decomposition have a uniform representation; everything read from user
/// input is required to be at least 1x1.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self(DMatrix::zeros(rows, cols))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// Matrix with entry `(i, j)` equal to `f(i, j)`; the values must be
    /// finite.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let m = Self(DMatrix::from_fn(rows, cols, |i, j| f(i, j)));
        debug_assert!(m.check_finite().is_ok());
        m
    }

    /// Builds a matrix from row-major entries, rejecting a wrong entry count
    /// or non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::Shape {
                rows,
                cols,
                found: entries.len(),
            });
        }
        if let Some(pos) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(Self(DMatrix::from_row_slice(rows, cols, &entries)))
    }

    /// Real-valued matrix from a list of rows.
    ///
    /// Panics if the rows are ragged or contain non-finite values.
    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n_rows = rows.len();
        let n_cols = rows.first().map_or(0, |r| r.as_ref().len());
        let entries: Vec<Complex64> = rows
            .iter()
            .flat_map(|r| {
                assert_eq!(r.as_ref().len(), n_cols, "ragged rows");
                r.as_ref().iter().map(|&x| Complex64::new(x, 0.0))
            })
            .collect();
        Self::from_row_major(n_rows, n_cols, entries).expect("finite real entries")
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self(m)
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d: Vec<Complex64> = diag.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        Self::from_diagonal(&d)
    }

    pub(crate) fn from_dmatrix(m: DMatrix<Complex64>) -> Self {
        Self(m)
    }

    pub fn as_dmatrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_dmatrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn is_empty(&self) -> bool {
        self.rows() == 0 || self.cols() == 0
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.0[(row, col)] = value;
    }

    pub fn to_row_major(&self) -> Vec<Complex64> {
        let (r, c) = self.shape();
        let mut out = Vec::with_capacity(r * c);
        for i in 0..r {
            for j in 0..c {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self(self.0.adjoint())
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    pub fn scale_complex(&self, factor: Complex64) -> Self {
        Self(self.0.map(|z| z * factor))
    }

    /// `self^k` by repeated multiplication; `self^0` is the identity.
    ///
    /// Panics if the matrix is not square.
    pub fn pow(&self, k: u32) -> Self {
        assert!(self.is_square(), "pow of a non-square matrix");
        let mut acc = Self::identity(self.rows());
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Horizontal concatenation. Panics on a row-count mismatch.
    pub fn hstack(parts: &[&ComplexMatrix]) -> Self {
        let rows = parts.first().map_or(0, |p| p.rows());
        let cols = parts.iter().map(|p| p.cols()).sum();
        let mut out = DMatrix::zeros(rows, cols);
        let mut offset = 0;
        for p in parts {
            assert_eq!(p.rows(), rows, "hstack row mismatch");
            out.view_mut((0, offset), (rows, p.cols())).copy_from(&p.0);
            offset += p.cols();
        }
        Self(out)
    }

    /// Assembles a 2x2 block matrix. Panics on inconsistent block shapes.
    pub fn from_blocks(
        b11: &ComplexMatrix,
        b12: &ComplexMatrix,
        b21: &ComplexMatrix,
        b22: &ComplexMatrix,
    ) -> Self {
        assert_eq!(b11.rows(), b12.rows());
        assert_eq!(b21.rows(), b22.rows());
        assert_eq!(b11.cols(), b21.cols());
        assert_eq!(b12.cols(), b22.cols());
        let (r1, c1) = b11.shape();
        let (r, c) = (r1 + b21.rows(), c1 + b12.cols());
        let mut out = DMatrix::zeros(r, c);
        out.view_mut((0, 0), b11.shape()).copy_from(&b11.0);
        out.view_mut((0, c1), b12.shape()).copy_from(&b12.0);
        out.view_mut((r1, 0), b21.shape()).copy_from(&b21.0);
        out.view_mut((r1, c1), b22.shape()).copy_from(&b22.0);
        Self(out)
    }

    /// Copies the submatrix starting at `(row, col)` with the given shape.
    pub fn block(&self, row: usize, col: usize, rows: usize, cols: usize) -> Self {
        Self(self.0.view((row, col), (rows, cols)).into_owned())
    }

    pub fn columns(&self, start: usize, count: usize) -> Self {
        self.block(0, start, self.rows(), count)
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix {}x{} [", self.rows(), self.cols())?;
        for i in 0..self.rows() {
            write!(f, "  ")?;
            for j in 0..self.cols() {
                let z = self.0[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, idx: (usize, usize)) -> &Complex64 {
        &self.0[idx]
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $check:expr) => {
        impl $trait<&ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                $check(self, rhs);
                ComplexMatrix((&self.0).$method(&rhs.0))
            }
        }

        impl $trait<ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                (&self).$method(&rhs)
            }
        }

        impl $trait<&ComplexMatrix> for ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: &ComplexMatrix) -> ComplexMatrix {
                (&self).$method(rhs)
            }
        }

        impl $trait<ComplexMatrix> for &ComplexMatrix {
            type Output = ComplexMatrix;

            fn $method(self, rhs: ComplexMatrix) -> ComplexMatrix {
                self.$method(&rhs)
            }
        }
    };
}

fn check_same_shape(a: &ComplexMatrix, b: &ComplexMatrix) {
    assert_eq!(a.shape(), b.shape(), "elementwise op on different shapes");
}

fn check_product(a: &ComplexMatrix, b: &ComplexMatrix) {
    assert_eq!(
        a.cols(),
        b.rows(),
        "product of {}x{} by {}x{}",
        a.rows(),
        a.cols(),
        b.rows(),
        b.cols()
    );
}

binop!(Add, add, check_same_shape);
binop!(Sub, sub, check_same_shape);
binop!(Mul, mul, check_product);

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-&self.0)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;

    fn neg(self) -> ComplexMatrix {
        ComplexMatrix(-self.0)
    }
}
