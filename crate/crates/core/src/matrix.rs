//! Dense complex operator matrices and the small amount of linear algebra
//! the rest of the crate needs (Hermitian eigendecomposition, exponentials).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Which representation space a matrix acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rep {
    /// The 2^n-dimensional half-spin representation on Fock space.
    Spin,
    /// The (2n+1)-dimensional defining representation.
    Defining,
}

impl Rep {
    pub fn dim(self, n: usize) -> usize {
        match self {
            Rep::Spin => 1 << n,
            Rep::Defining => 2 * n + 1,
        }
    }
}

impl fmt::Display for Rep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Rep::Spin => f.write_str("spin"),
            Rep::Defining => f.write_str("defining"),
        }
    }
}

/// A dense square complex matrix tagged with the representation it lives in.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    rep: Rep,
    mat: CMatrix,
}

impl OperatorMatrix {
    pub fn new(rep: Rep, mat: CMatrix) -> Self {
        assert!(mat.is_square(), "operator matrices are square");
        Self { rep, mat }
    }

    pub fn zeros(rep: Rep, n: usize) -> Self {
        let d = rep.dim(n);
        Self::new(rep, CMatrix::zeros(d, d))
    }

    pub fn identity(rep: Rep, n: usize) -> Self {
        let d = rep.dim(n);
        Self::new(rep, CMatrix::identity(d, d))
    }

    pub fn rep(&self) -> Rep {
        self.rep
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.mat[(row, col)]
    }

    pub fn adjoint(&self) -> Self {
        Self::new(self.rep, self.mat.adjoint())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::new(self.rep, self.mat.map(|z| z * s))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        &(self * other) - &(other * self)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        &(self * other) + &(other * self)
    }

    pub fn max_abs(&self) -> f64 {
        max_abs(&self.mat)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.check_same(other);
        max_abs(&(&self.mat - &other.mat))
    }

    pub fn hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.mat - self.mat.adjoint()))
    }

    pub fn anti_hermiticity_defect(&self) -> f64 {
        max_abs(&(&self.mat + self.mat.adjoint()))
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.mat)
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    fn check_same(&self, other: &Self) {
        assert_eq!(self.rep, other.rep, "operands live in different representations");
        assert_eq!(self.dim(), other.dim(), "operand dimensions differ");
    }
}

impl<'a> Add<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn add(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        self.check_same(rhs);
        OperatorMatrix::new(self.rep, &self.mat + &rhs.mat)
    }
}

impl<'a> Sub<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn sub(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        self.check_same(rhs);
        OperatorMatrix::new(self.rep, &self.mat - &rhs.mat)
    }
}

impl<'a> Mul<&'a OperatorMatrix> for &'a OperatorMatrix {
    type Output = OperatorMatrix;
    fn mul(self, rhs: &'a OperatorMatrix) -> OperatorMatrix {
        self.check_same(rhs);
        OperatorMatrix::new(self.rep, &self.mat * &rhs.mat)
    }
}

impl Neg for &OperatorMatrix {
    type Output = OperatorMatrix;
    fn neg(self) -> OperatorMatrix {
        OperatorMatrix::new(self.rep, -&self.mat)
    }
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// max |U†U - I|.
pub fn unitarity_defect(u: &CMatrix) -> f64 {
    let d = u.nrows();
    max_abs(&(u.adjoint() * u - CMatrix::identity(d, d)))
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvectors as columns.
pub fn hermitian_eigen(h: &CMatrix, tol: f64) -> Result<(Vec<f64>, CMatrix)> {
    let defect = max_abs(&(h - h.adjoint()));
    if defect > tol {
        return Err(Error::Domain(format!("matrix is not Hermitian (defect {defect:.3e})")));
    }
    let sym = (h + h.adjoint()).map(|z| z * 0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(h.nrows(), h.ncols(), |r, col| eig.eigenvectors[(r, order[col])]);
    Ok((values, vectors))
}

/// Applies a real function to a Hermitian matrix through its spectrum.
pub fn hermitian_function(h: &CMatrix, tol: f64, f: impl Fn(f64) -> C64) -> Result<CMatrix> {
    let (values, v) = hermitian_eigen(h, tol)?;
    let mut scaled = v.clone();
    for (k, lambda) in values.iter().enumerate() {
        let s = f(*lambda);
        scaled.column_mut(k).iter_mut().for_each(|z| *z *= s);
    }
    Ok(scaled * v.adjoint())
}

/// exp(A) for anti-Hermitian A via diagonalisation of the Hermitian iA.
pub fn expm_anti_hermitian(a: &CMatrix, tol: f64) -> Result<CMatrix> {
    let h = a.map(|z| z * I);
    // A = -i H, so exp(A) = V exp(-i Λ) V†.
    hermitian_function(&h, tol, |lambda| C64::from_polar(1.0, -lambda))
}

/// General complex matrix exponential by scaling and squaring with a
/// truncated Taylor series.
pub fn expm(a: &CMatrix) -> CMatrix {
    let d = a.nrows();
    let norm: f64 = a.iter().map(|z| z.norm()).sum::<f64>().max(0.0);
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a.map(|z| z * scale);
    let mut term = CMatrix::identity(d, d);
    let mut sum = CMatrix::identity(d, d);
    for k in 1..=18 {
        term = &term * &x / C64::from(k as f64);
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}
