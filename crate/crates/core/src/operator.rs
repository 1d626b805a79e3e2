//! Dense complex Hermitian operators at small dimension.
//!
//! Everything downstream (states, observables, effects, Choi states) is a
//! [`HermitianOp`]. Values are immutable; every operation returns a new
//! operator. Eigenvalues come from nalgebra's Hermitian eigensolver
//! (Householder tridiagonalization followed by implicit QR).

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Absolute Hermiticity tolerance, scaled by `max(1, max |entry|)`.
pub const HERMITICITY_TOL: f64 = 1e-12;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn matrix(self) -> DMatrix<Complex64> {
        match self {
            Pauli::I => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, ONE]),
            Pauli::X => DMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO]),
            Pauli::Y => DMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO]),
            Pauli::Z => DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE]),
        }
    }
}

/// A dense Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp {
    mat: DMatrix<Complex64>,
}

fn max_abs(mat: &DMatrix<Complex64>) -> f64 {
    mat.iter().fold(0.0, |m, z| m.max(z.norm()))
}

fn hermiticity_deviation(mat: &DMatrix<Complex64>) -> f64 {
    let n = mat.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            dev = dev.max((mat[(i, j)] - mat[(j, i)].conj()).norm());
        }
    }
    dev
}

impl HermitianOp {
    /// Validates and symmetrizes `mat` as `(A + A^dag) / 2`.
    pub fn new(mat: DMatrix<Complex64>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        let deviation = hermiticity_deviation(&mat);
        if deviation > HERMITICITY_TOL * max_abs(&mat).max(1.0) {
            return Err(Error::NotHermitian { deviation });
        }
        Ok(Self::symmetrized(mat))
    }

    /// Internal constructor for results that are Hermitian up to rounding.
    pub(crate) fn symmetrized(mat: DMatrix<Complex64>) -> Self {
        let adj = mat.adjoint();
        Self {
            mat: (mat + adj) * Complex64::new(0.5, 0.0),
        }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let d = DVector::from_iterator(diag.len(), diag.iter().map(|&x| Complex64::new(x, 0.0)));
        Self {
            mat: DMatrix::from_diagonal(&d),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            mat: DMatrix::identity(dim, dim),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            mat: DMatrix::zeros(dim, dim),
        }
    }

    pub fn pauli(p: Pauli) -> Self {
        Self { mat: p.matrix() }
    }

    /// `|psi><psi| / <psi|psi>`.
    pub fn projector(ket: &DVector<Complex64>) -> Result<Self> {
        let norm_sq = ket.norm_squared();
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::InvalidState("zero or non-finite ket".into()));
        }
        let outer = ket * ket.adjoint() / Complex64::new(norm_sq, 0.0);
        Ok(Self::symmetrized(outer))
    }

    /// Projector onto the computational basis state `|index>`.
    pub fn basis_projector(dim: usize, index: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[index] = 1.0;
        Self::from_real_diagonal(&diag)
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.mat
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.mat
    }

    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.mat[(row, col)]
    }

    pub fn trace(&self) -> f64 {
        self.mat.diagonal().iter().map(|z| z.re).sum()
    }

    /// `Re Tr(self * other)`; exact for Hermitian pairs.
    pub fn trace_with(&self, other: &HermitianOp) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.mat[(i, j)];
                let b = other.mat[(j, i)];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            mat: &self.mat * Complex64::new(factor, 0.0),
        }
    }

    /// Kronecker product `self ⊗ other`.
    pub fn tensor(&self, other: &HermitianOp) -> Self {
        Self {
            mat: self.mat.kronecker(&other.mat),
        }
    }

    /// Tensor product of a non-empty list of operators, left to right.
    pub fn tensor_all<'a>(ops: impl IntoIterator<Item = &'a HermitianOp>) -> Option<Self> {
        ops.into_iter()
            .fold(None, |acc: Option<HermitianOp>, op| match acc {
                None => Some(op.clone()),
                Some(a) => Some(a.tensor(op)),
            })
    }

    pub fn transpose(&self) -> Self {
        Self {
            mat: self.mat.transpose(),
        }
    }

    /// Traces out the first factor of a `dim_a * dim_b` operator.
    pub fn partial_trace_a(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        self.check_bipartite(dim_a, dim_b)?;
        let mut out = DMatrix::zeros(dim_b, dim_b);
        for a in 0..dim_a {
            for i in 0..dim_b {
                for j in 0..dim_b {
                    out[(i, j)] += self.mat[(a * dim_b + i, a * dim_b + j)];
                }
            }
        }
        Ok(Self::symmetrized(out))
    }

    /// Traces out the second factor of a `dim_a * dim_b` operator.
    pub fn partial_trace_b(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        self.check_bipartite(dim_a, dim_b)?;
        let mut out = DMatrix::zeros(dim_a, dim_a);
        for i in 0..dim_a {
            for j in 0..dim_a {
                for b in 0..dim_b {
                    out[(i, j)] += self.mat[(i * dim_b + b, j * dim_b + b)];
                }
            }
        }
        Ok(Self::symmetrized(out))
    }

    fn check_bipartite(&self, dim_a: usize, dim_b: usize) -> Result<()> {
        if dim_a * dim_b != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: dim_a * dim_b,
                found: self.dim(),
            });
        }
        Ok(())
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.mat.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    /// Eigenvalues (ascending) with matching orthonormal eigenvectors as columns.
    pub fn eigen(&self) -> (Vec<f64>, DMatrix<Complex64>) {
        let eig = self.mat.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..self.dim()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| eig.eigenvectors[(r, order[c])]);
        (values, vectors)
    }

    pub fn lambda_max(&self) -> f64 {
        // 2x2 closed form keeps the qubit hot paths off the iterative solver.
        if self.dim() == 2 {
            let (mean, radius) = self.qubit_spectrum();
            return mean + radius;
        }
        self.eigenvalues().last().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        if self.dim() == 2 {
            let (mean, radius) = self.qubit_spectrum();
            return mean - radius;
        }
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    fn qubit_spectrum(&self) -> (f64, f64) {
        let a = self.mat[(0, 0)].re;
        let d = self.mat[(1, 1)].re;
        let b = self.mat[(0, 1)];
        let half_gap = 0.5 * (a - d);
        (0.5 * (a + d), (half_gap * half_gap + b.norm_sqr()).sqrt())
    }

    /// Operator (spectral) norm `max |lambda|`.
    pub fn spectral_norm(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }

    pub fn max_abs_diff(&self, other: &HermitianOp) -> f64 {
        if self.dim() != other.dim() {
            return f64::INFINITY;
        }
        max_abs(&(&self.mat - &other.mat))
    }

    /// Checks PSD (min eigenvalue >= -tol) and unit trace within `tol`.
    pub fn check_density(&self, tol: f64) -> Result<()> {
        let tr = self.trace();
        if (tr - 1.0).abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} != 1")));
        }
        let min = self.lambda_min();
        if min < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn to_bloch(&self) -> Result<BlochRep> {
        BlochRep::from_op(self)
    }
}

impl Add for &HermitianOp {
    type Output = HermitianOp;
    fn add(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp {
            mat: &self.mat + &rhs.mat,
        }
    }
}

impl Sub for &HermitianOp {
    type Output = HermitianOp;
    fn sub(self, rhs: &HermitianOp) -> HermitianOp {
        HermitianOp {
            mat: &self.mat - &rhs.mat,
        }
    }
}

impl Mul<f64> for &HermitianOp {
    type Output = HermitianOp;
    fn mul(self, rhs: f64) -> HermitianOp {
        self.scale(rhs)
    }
}

/// Largest eigenvalue of a raw matrix, rejecting non-Hermitian input.
pub fn lambda_max(mat: &DMatrix<Complex64>) -> Result<f64> {
    Ok(HermitianOp::new(mat.clone())?.lambda_max())
}

/// Qubit operator in the Pauli basis: `X = 1/2 * sum_i x_i sigma_i` with
/// `x_i = Tr(X sigma_i)` and `sigma = (I, X, Y, Z)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct BlochRep {
    pub coeffs: [f64; 4],
}

impl BlochRep {
    pub const IDENTITY: BlochRep = BlochRep {
        coeffs: [2.0, 0.0, 0.0, 0.0],
    };

    pub fn new(coeffs: [f64; 4]) -> Self {
        Self { coeffs }
    }

    /// Projector onto the pure state with unit Bloch vector `axis`.
    pub fn pure_projector(axis: Vector3<f64>) -> Self {
        Self {
            coeffs: [1.0, axis.x, axis.y, axis.z],
        }
    }

    pub fn from_op(op: &HermitianOp) -> Result<Self> {
        if op.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                found: op.dim(),
            });
        }
        let m = op.matrix();
        let a = m[(0, 0)].re;
        let d = m[(1, 1)].re;
        let b = m[(1, 0)];
        // Tr(X sigma_x) = 2 Re X_10, Tr(X sigma_y) = 2 Im X_10.
        Ok(Self {
            coeffs: [a + d, 2.0 * b.re, 2.0 * b.im, a - d],
        })
    }

    pub fn to_op(&self) -> HermitianOp {
        let [x0, x1, x2, x3] = self.coeffs;
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(0.5 * (x0 + x3), 0.0),
                Complex64::new(0.5 * x1, -0.5 * x2),
                Complex64::new(0.5 * x1, 0.5 * x2),
                Complex64::new(0.5 * (x0 - x3), 0.0),
            ],
        );
        HermitianOp { mat: m }
    }

    pub fn trace_part(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn axis(&self) -> Vector3<f64> {
        Vector3::new(self.coeffs[1], self.coeffs[2], self.coeffs[3])
    }

    /// Hilbert-Schmidt inner product `Tr(XY) = 1/2 sum x_i y_i`.
    pub fn hs_inner(&self, other: &BlochRep) -> f64 {
        0.5 * self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
    }

    /// Bloch form of the transpose (`sigma_y -> -sigma_y`).
    pub fn transpose(&self) -> Self {
        let [x0, x1, x2, x3] = self.coeffs;
        Self {
            coeffs: [x0, x1, -x2, x3],
        }
    }
}

/// Orthonormal Hermitian basis of `d x d` operators under `Tr(AB)`.
///
/// Order: `I/sqrt(d)`, then symmetric/antisymmetric off-diagonal pairs
/// `(j, k)` for `j < k`, then the normalized diagonal Gell-Mann matrices.
/// For `d = 2` this is `(I, sigma_x, sigma_y, sigma_z) / sqrt(2)`.
pub fn hermitian_basis(dim: usize) -> Vec<HermitianOp> {
    let mut basis = Vec::with_capacity(dim * dim);
    basis.push(HermitianOp::identity(dim).scale(1.0 / (dim as f64).sqrt()));
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..dim {
        for k in (j + 1)..dim {
            let mut sym = DMatrix::zeros(dim, dim);
            sym[(j, k)] = Complex64::new(h, 0.0);
            sym[(k, j)] = Complex64::new(h, 0.0);
            basis.push(HermitianOp { mat: sym });
            let mut anti = DMatrix::zeros(dim, dim);
            anti[(j, k)] = Complex64::new(0.0, -h);
            anti[(k, j)] = Complex64::new(0.0, h);
            basis.push(HermitianOp { mat: anti });
        }
    }
    for l in 1..dim {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = vec![0.0; dim];
        for d in diag.iter_mut().take(l) {
            *d = norm;
        }
        diag[l] = -(l as f64) * norm;
        basis.push(HermitianOp::from_real_diagonal(&diag));
    }
    basis
}

/// Real coordinates `Tr(B_i op)` in [`hermitian_basis`].
pub fn basis_coordinates(basis: &[HermitianOp], op: &HermitianOp) -> DVector<f64> {
    DVector::from_iterator(basis.len(), basis.iter().map(|b| b.trace_with(op)))
}

pub fn from_basis_coordinates(basis: &[HermitianOp], coords: &DVector<f64>) -> HermitianOp {
    let dim = basis[0].dim();
    let mut mat = DMatrix::zeros(dim, dim);
    for (b, &c) in basis.iter().zip(coords.iter()) {
        mat += &b.mat * Complex64::new(c, 0.0);
    }
    HermitianOp::symmetrized(mat)
}

/// Normalized ket drawn from the unitarily invariant (Haar) measure.
pub fn random_ket<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    let v = DVector::from_fn(dim, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let n = v.norm();
    v / Complex64::new(n, 0.0)
}

/// Haar-random rank-one projector.
pub fn haar_projector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOp {
    HermitianOp::projector(&random_ket(dim, rng)).expect("Gaussian ket is nonzero")
}

/// Ginibre-distributed density matrix `G G^dag / Tr(G G^dag)`.
pub fn random_density<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOp {
    let g = random_ginibre(dim, dim, rng);
    let rho = &g * g.adjoint();
    let tr = rho.trace().re;
    HermitianOp::symmetrized(rho / Complex64::new(tr, 0.0))
}

/// `(G + G^dag) / 2` for a complex Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> HermitianOp {
    HermitianOp::symmetrized(random_ginibre(dim, dim, rng))
}

pub(crate) fn random_ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<Complex64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}
