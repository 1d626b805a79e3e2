//! POVMs, their frame operators and least-squares classical shadows.
//!
//! A POVM `{E_k}` defines the forward map `Phi(rho) = (Tr(rho E_k))_k` and the
//! frame operator `C(rho) = sum_k Tr(rho E_k) E_k`. For informationally
//! complete POVMs the least-squares estimator of a frequency vector `p` is
//! `sum_k p_k C^{-1}(E_k)`, and the classical shadow of outcome `k` is
//! `C^{-1}(E_k)`.
//!
//! Qubit POVMs with uniform trace `2/N` are also available in Bloch form
//! ([`BlochPovm`]): `E_k = (I + r_k . sigma) / N` with `|r_k| <= 1` and
//! `sum_k r_k = 0`. Their shadows have Bloch vectors `(1, W^{-1} r_k)` where
//! `W = (1/N) sum_k r_k r_k^T`.

use nalgebra::{DMatrix, Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{
    basis_coordinates, from_basis_coordinates, hermitian_basis, BlochRep, HermitianOp,
};

/// Effects may dip this far below zero and still count as PSD.
pub const PSD_TOL: f64 = 1e-10;
/// Entrywise tolerance on `sum_k E_k = I`.
pub const COMPLETENESS_TOL: f64 = 1e-10;
/// Frame operators (and Bloch `W` matrices) with a larger condition number
/// are treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

/// Outcome of [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ValidityReport {
    /// Smallest eigenvalue over all effects.
    pub min_eigenvalue: f64,
    /// `max_ij |(sum_k E_k - I)_ij|`.
    pub completeness_residual: f64,
    pub valid: bool,
}

/// Report-style check of PSD effects and completeness.
pub fn validate(effects: &[HermitianOp]) -> ValidityReport {
    let Some(first) = effects.first() else {
        return ValidityReport {
            min_eigenvalue: f64::NAN,
            completeness_residual: f64::INFINITY,
            valid: false,
        };
    };
    let dim = first.dim();
    if effects.iter().any(|e| e.dim() != dim) {
        return ValidityReport {
            min_eigenvalue: f64::NAN,
            completeness_residual: f64::INFINITY,
            valid: false,
        };
    }
    let min_eigenvalue = effects
        .iter()
        .map(HermitianOp::lambda_min)
        .fold(f64::INFINITY, f64::min);
    let total = effects
        .iter()
        .skip(1)
        .fold(first.clone(), |acc, e| &acc + e);
    let completeness_residual = total.max_abs_diff(&HermitianOp::identity(dim));
    ValidityReport {
        min_eigenvalue,
        completeness_residual,
        valid: min_eigenvalue >= -PSD_TOL && completeness_residual <= COMPLETENESS_TOL,
    }
}

/// A validated POVM on a `dim`-dimensional space.
#[derive(Debug, Clone, PartialEq)]
pub struct Povm {
    dim: usize,
    effects: Vec<HermitianOp>,
}

impl Povm {
    pub fn new(effects: Vec<HermitianOp>) -> Result<Self> {
        let report = validate(&effects);
        if !report.valid {
            return Err(Error::InvalidPovm {
                min_eigenvalue: report.min_eigenvalue,
                completeness_residual: report.completeness_residual,
            });
        }
        Ok(Self {
            dim: effects[0].dim(),
            effects,
        })
    }

    /// Skips validation; for internal frames built from weighted projectors.
    pub(crate) fn new_unvalidated(dim: usize, effects: Vec<HermitianOp>) -> Self {
        Self { dim, effects }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.effects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.effects.is_empty()
    }

    pub fn effects(&self) -> &[HermitianOp] {
        &self.effects
    }

    pub fn validate(&self) -> ValidityReport {
        validate(&self.effects)
    }

    /// Outcome probabilities `Tr(rho E_k)`.
    pub fn probabilities(&self, rho: &HermitianOp) -> Result<Vec<f64>> {
        check_dim(self.dim, rho.dim())?;
        Ok(self.effects.iter().map(|e| e.trace_with(rho)).collect())
    }

    /// Product POVM with effects `E_a ⊗ F_b`, outcome index `a * other.len() + b`.
    pub fn tensor(&self, other: &Povm) -> Povm {
        let effects = self
            .effects
            .iter()
            .flat_map(|a| other.effects.iter().map(move |b| a.tensor(b)))
            .collect();
        Povm {
            dim: self.dim * other.dim,
            effects,
        }
    }

    /// Merges consecutive groups of effects (`counts[i]` effects into outcome `i`).
    pub fn coarse_grain(&self, counts: &[usize]) -> Result<Povm> {
        if counts.iter().sum::<usize>() != self.len() || counts.iter().any(|&c| c == 0) {
            return Err(Error::InvalidParameter(
                "group sizes must be positive and cover every effect".into(),
            ));
        }
        let mut effects = Vec::with_capacity(counts.len());
        let mut start = 0;
        for &c in counts {
            let group = &self.effects[start..start + c];
            let sum = group[1..].iter().fold(group[0].clone(), |acc, e| &acc + e);
            effects.push(sum);
            start += c;
        }
        Povm::new(effects)
    }

    pub fn frame_operator(&self) -> FrameOperator {
        FrameOperator::new(self)
    }

    pub fn classical_shadows(&self) -> Result<ClassicalShadowSet> {
        classical_shadows(self)
    }

    pub fn to_json(&self) -> PovmJson {
        PovmJson {
            dim: self.dim,
            effects: self
                .effects
                .iter()
                .map(|e| {
                    let m = e.matrix();
                    (0..self.dim)
                        .flat_map(|r| (0..self.dim).map(move |c| (r, c)))
                        .map(|(r, c)| [m[(r, c)].re, m[(r, c)].im])
                        .collect()
                })
                .collect(),
        }
    }

    pub fn from_json(json: &PovmJson) -> Result<Self> {
        let d = json.dim;
        let effects = json
            .effects
            .iter()
            .map(|flat| {
                if flat.len() != d * d {
                    return Err(Error::DimensionMismatch {
                        expected: d * d,
                        found: flat.len(),
                    });
                }
                let m = DMatrix::from_row_iterator(
                    d,
                    d,
                    flat.iter().map(|&[re, im]| Complex64::new(re, im)),
                );
                HermitianOp::new(m)
            })
            .collect::<Result<Vec<_>>>()?;
        if effects.is_empty() {
            return Err(Error::InvalidPovm {
                min_eigenvalue: f64::NAN,
                completeness_residual: f64::INFINITY,
            });
        }
        Povm::new(effects)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Dense JSON form: each effect is a row-major list of `[re, im]` pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PovmJson {
    pub dim: usize,
    pub effects: Vec<Vec<[f64; 2]>>,
}

/// Bloch JSON form `{ "n": N, "vectors": [[x, y, z], ...] }`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlochPovmJson {
    pub n: usize,
    pub vectors: Vec<[f64; 3]>,
}

/// Either accepted POVM file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PovmFile {
    Dense(PovmJson),
    Bloch(BlochPovmJson),
}

impl PovmFile {
    pub fn into_povm(self) -> Result<Povm> {
        match self {
            PovmFile::Dense(j) => Povm::from_json(&j),
            PovmFile::Bloch(j) => Ok(BlochPovm::from_json(&j)?.to_povm()),
        }
    }
}

/// The frame operator `C_E = Phi^dag Phi` as a real symmetric `d^2 x d^2`
/// matrix in the orthonormal basis of [`hermitian_basis`].
#[derive(Debug, Clone)]
pub struct FrameOperator {
    dim: usize,
    basis: Vec<HermitianOp>,
    matrix: DMatrix<f64>,
}

impl FrameOperator {
    pub fn new(povm: &Povm) -> Self {
        let basis = hermitian_basis(povm.dim());
        // Rows of `phi` are the basis coordinates of each effect.
        let n = povm.len();
        let d2 = basis.len();
        let mut phi = DMatrix::zeros(n, d2);
        for (k, e) in povm.effects().iter().enumerate() {
            phi.set_row(k, &basis_coordinates(&basis, e).transpose());
        }
        let m = phi.transpose() * &phi;
        let matrix = (&m + m.transpose()) * 0.5;
        Self {
            dim: povm.dim(),
            basis,
            matrix,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn apply(&self, op: &HermitianOp) -> Result<HermitianOp> {
        check_dim(self.dim, op.dim())?;
        let v = &self.matrix * basis_coordinates(&self.basis, op);
        Ok(from_basis_coordinates(&self.basis, &v))
    }

    /// Eigenvalues of the frame matrix, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    }

    pub fn condition_number(&self) -> f64 {
        condition_from_eigenvalues(&self.eigenvalues())
    }

    pub fn rank(&self, tol: f64) -> usize {
        let ev = self.eigenvalues();
        let top = ev.last().copied().unwrap_or(0.0);
        ev.iter().filter(|&&l| l > tol * top.max(1.0)).count()
    }

    pub fn is_informationally_complete(&self) -> bool {
        self.condition_number() <= MAX_CONDITION
    }

    fn inverse(&self) -> Result<DMatrix<f64>> {
        let eig = self.matrix.clone().symmetric_eigen();
        let cond = condition_from_eigenvalues(eig.eigenvalues.as_slice());
        if cond > MAX_CONDITION {
            return Err(Error::NotInformationallyComplete {
                condition_number: cond,
            });
        }
        let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
        Ok(&eig.eigenvectors * inv_diag * eig.eigenvectors.transpose())
    }

    /// `C^{-1}(op)`.
    pub fn apply_inverse(&self, op: &HermitianOp) -> Result<HermitianOp> {
        check_dim(self.dim, op.dim())?;
        let inv = self.inverse()?;
        Ok(from_basis_coordinates(
            &self.basis,
            &(inv * basis_coordinates(&self.basis, op)),
        ))
    }
}

fn condition_from_eigenvalues(ev: &[f64]) -> f64 {
    let max = ev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ev.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Per-outcome least-squares estimates `C^{-1}(E_k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalShadowSet {
    shadows: Vec<HermitianOp>,
}

impl ClassicalShadowSet {
    pub fn shadows(&self) -> &[HermitianOp] {
        &self.shadows
    }

    pub fn len(&self) -> usize {
        self.shadows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shadows.is_empty()
    }

    /// `sum_k p_k rho_hat_k`; frequencies must sum to 1 within 1e-9.
    pub fn estimate(&self, frequencies: &[f64]) -> Result<HermitianOp> {
        check_dim(self.shadows.len(), frequencies.len())?;
        let sum: f64 = frequencies.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::FrequencySum { sum });
        }
        let dim = self.shadows[0].dim();
        Ok(self
            .shadows
            .iter()
            .zip(frequencies)
            .fold(HermitianOp::zeros(dim), |acc, (s, &p)| &acc + &s.scale(p)))
    }

    /// `Tr(rho_hat_k X)` for every outcome.
    pub fn overlaps(&self, x: &HermitianOp) -> Result<Vec<f64>> {
        check_dim(self.shadows[0].dim(), x.dim())?;
        Ok(self.shadows.iter().map(|s| s.trace_with(x)).collect())
    }
}

pub fn classical_shadows(povm: &Povm) -> Result<ClassicalShadowSet> {
    let frame = povm.frame_operator();
    let inv = frame.inverse()?;
    let shadows = povm
        .effects()
        .iter()
        .map(|e| from_basis_coordinates(&frame.basis, &(&inv * basis_coordinates(&frame.basis, e))))
        .collect();
    Ok(ClassicalShadowSet { shadows })
}

/// Least-squares state estimate from an outcome frequency vector.
pub fn least_squares_estimate(povm: &Povm, frequencies: &[f64]) -> Result<HermitianOp> {
    check_dim(povm.len(), frequencies.len())?;
    classical_shadows(povm)?.estimate(frequencies)
}

/// An informationally complete POVM bundled with its classical shadows.
#[derive(Debug, Clone)]
pub struct IcPovm {
    povm: Povm,
    shadows: ClassicalShadowSet,
}

impl IcPovm {
    pub fn new(povm: Povm) -> Result<Self> {
        let shadows = classical_shadows(&povm)?;
        Ok(Self { povm, shadows })
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn shadows(&self) -> &ClassicalShadowSet {
        &self.shadows
    }

    pub fn dim(&self) -> usize {
        self.povm.dim()
    }

    pub fn len(&self) -> usize {
        self.povm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.povm.is_empty()
    }

    /// Product of two IC POVMs; shadows of a product POVM are products of shadows.
    pub fn tensor(&self, other: &IcPovm) -> IcPovm {
        let shadows = self
            .shadows
            .shadows
            .iter()
            .flat_map(|a| other.shadows.shadows.iter().map(move |b| a.tensor(b)))
            .collect();
        IcPovm {
            povm: self.povm.tensor(&other.povm),
            shadows: ClassicalShadowSet { shadows },
        }
    }
}

/// Named qubit POVMs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CanonicalPovm {
    Tetrahedral,
    Pauli6,
    RandomN { n: usize, seed: u64 },
}

pub fn canonical(kind: CanonicalPovm) -> Result<Povm> {
    Ok(canonical_bloch(kind)?.to_povm())
}

pub fn canonical_bloch(kind: CanonicalPovm) -> Result<BlochPovm> {
    use rand::SeedableRng;
    match kind {
        CanonicalPovm::Tetrahedral => Ok(BlochPovm::tetrahedral()),
        CanonicalPovm::Pauli6 => Ok(BlochPovm::pauli6()),
        CanonicalPovm::RandomN { n, seed } => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            BlochPovm::random(n, &mut rng)
        }
    }
}

/// Splits every effect into `Tr(E_k) / epsilon` identical fragments so that
/// all effects share trace `epsilon`. Fragments of effect `k` are contiguous.
pub fn split_uniform_trace(povm: &Povm, epsilon: f64) -> Result<Povm> {
    let counts = split_counts(povm, epsilon)?;
    let effects = povm
        .effects()
        .iter()
        .zip(&counts)
        .flat_map(|(e, &c)| std::iter::repeat_n(e.scale(1.0 / c as f64), c))
        .collect();
    Povm::new(effects)
}

/// Fragment counts `N_k = Tr(E_k) / epsilon` used by [`split_uniform_trace`].
pub fn split_counts(povm: &Povm, epsilon: f64) -> Result<Vec<usize>> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon must be positive, got {epsilon}")));
    }
    povm.effects()
        .iter()
        .enumerate()
        .map(|(index, e)| {
            let ratio = e.trace() / epsilon;
            let rounded = ratio.round();
            if rounded < 1.0 || (ratio - rounded).abs() > 1e-9 {
                Err(Error::NonIntegerSplit { index, ratio })
            } else {
                Ok(rounded as usize)
            }
        })
        .collect()
}

/// Uniform-trace qubit POVM `E_k = (I + r_k . sigma) / N`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochPovm {
    vectors: Vec<Vector3<f64>>,
}

/// `|r_k| <= 1` is enforced up to this slack.
pub const BLOCH_NORM_TOL: f64 = 1e-12;
/// `|sum_k r_k|` must not exceed this.
pub const BLOCH_SUM_TOL: f64 = 1e-10;

impl BlochPovm {
    pub fn new(vectors: Vec<Vector3<f64>>) -> Result<Self> {
        let p = Self { vectors };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(vectors: Vec<Vector3<f64>>) -> Self {
        Self { vectors }
    }

    pub fn check(&self) -> Result<()> {
        if self.vectors.is_empty() {
            return Err(Error::InvalidBlochPovm("no effects".into()));
        }
        if let Some((k, r)) = self
            .vectors
            .iter()
            .enumerate()
            .find(|(_, r)| !(r.norm() <= 1.0 + BLOCH_NORM_TOL))
        {
            return Err(Error::InvalidBlochPovm(format!(
                "|r_{k}| = {} exceeds 1",
                r.norm()
            )));
        }
        let sum = self.sum();
        if sum.norm() > BLOCH_SUM_TOL {
            return Err(Error::InvalidBlochPovm(format!(
                "vectors sum to {:e}, not zero",
                sum.norm()
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[Vector3<f64>] {
        &self.vectors
    }

    pub fn sum(&self) -> Vector3<f64> {
        self.vectors.iter().sum()
    }

    /// Regular tetrahedron with one vertex on `+z`.
    pub fn tetrahedral() -> Self {
        let s2 = 2f64.sqrt();
        let y = (2.0f64 / 3.0).sqrt();
        Self::new_unchecked(vec![
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(2.0 * s2 / 3.0, 0.0, -1.0 / 3.0),
            Vector3::new(-s2 / 3.0, y, -1.0 / 3.0),
            Vector3::new(-s2 / 3.0, -y, -1.0 / 3.0),
        ])
    }

    /// Octahedron: `|0>, |1>, |+>, |->, |r>, |l>`.
    pub fn pauli6() -> Self {
        Self::new_unchecked(vec![
            Vector3::new(0.0, 0.0, 1.0),
            Vector3::new(0.0, 0.0, -1.0),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(-1.0, 0.0, 0.0),
            Vector3::new(0.0, 1.0, 0.0),
            Vector3::new(0.0, -1.0, 0.0),
        ])
    }

    /// Random IC configuration: `n - 1` uniform directions, the last vector
    /// closes the sum, and everything is shrunk until all norms are at most 1.
    /// Draws again if `W` is numerically singular.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n < 4 {
            return Err(Error::TooFewEffects(n));
        }
        loop {
            let mut vectors: Vec<Vector3<f64>> = (0..n - 1).map(|_| random_direction(rng)).collect();
            let closing = -vectors.iter().sum::<Vector3<f64>>();
            vectors.push(closing);
            let scale = vectors.iter().map(|v| v.norm()).fold(1.0, f64::max);
            for v in &mut vectors {
                *v /= scale;
            }
            let p = Self::new_unchecked(vectors);
            if p.w_condition_number() <= MAX_CONDITION {
                return Ok(p);
            }
        }
    }

    /// `W = (1/N) sum_k r_k r_k^T`.
    pub fn w_matrix(&self) -> Matrix3<f64> {
        let mut w = Matrix3::zeros();
        for r in &self.vectors {
            w += r * r.transpose();
        }
        w / self.n() as f64
    }

    pub fn w_condition_number(&self) -> f64 {
        let ev = self.w_matrix().symmetric_eigenvalues();
        condition_from_eigenvalues(ev.as_slice())
    }

    /// `W^{-1}`, or [`Error::SingularW`] when its condition number exceeds [`MAX_CONDITION`].
    pub fn w_inverse(&self) -> Result<Matrix3<f64>> {
        let w = self.w_matrix();
        let eig = w.symmetric_eigen();
        let cond = condition_from_eigenvalues(eig.eigenvalues.as_slice());
        if cond > MAX_CONDITION {
            return Err(Error::SingularW {
                condition_number: cond,
            });
        }
        let inv_diag = Matrix3::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
        Ok(eig.eigenvectors * inv_diag * eig.eigenvectors.transpose())
    }

    /// Shadow axes `W^{-1} r_k`.
    pub fn shadow_axes(&self) -> Result<Vec<Vector3<f64>>> {
        let inv = self.w_inverse()?;
        Ok(self.vectors.iter().map(|r| inv * r).collect())
    }

    /// Shadows in Bloch form: `(1, W^{-1} r_k)`.
    pub fn bloch_shadow_vectors(&self) -> Result<Vec<BlochRep>> {
        Ok(self
            .shadow_axes()?
            .into_iter()
            .map(|s| BlochRep::new([1.0, s.x, s.y, s.z]))
            .collect())
    }

    pub fn effect(&self, k: usize) -> HermitianOp {
        let n = self.n() as f64;
        let r = self.vectors[k];
        BlochRep::new([2.0 / n, 2.0 * r.x / n, 2.0 * r.y / n, 2.0 * r.z / n]).to_op()
    }

    pub fn to_povm(&self) -> Povm {
        Povm {
            dim: 2,
            effects: (0..self.n()).map(|k| self.effect(k)).collect(),
        }
    }

    /// Inverse of [`BlochPovm::to_povm`]; the POVM must be a qubit POVM with
    /// every trace equal to `2/N`.
    pub fn from_povm(povm: &Povm) -> Result<Self> {
        check_dim(2, povm.dim())?;
        let n = povm.len() as f64;
        let vectors = povm
            .effects()
            .iter()
            .enumerate()
            .map(|(k, e)| {
                let b = BlochRep::from_op(e)?;
                if (b.trace_part() - 2.0 / n).abs() > 1e-10 {
                    return Err(Error::InvalidBlochPovm(format!(
                        "effect {k} has trace {}, expected uniform 2/N",
                        b.trace_part()
                    )));
                }
                Ok(b.axis() * (n / 2.0))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors)
    }

    pub fn to_json(&self) -> BlochPovmJson {
        BlochPovmJson {
            n: self.n(),
            vectors: self.vectors.iter().map(|v| [v.x, v.y, v.z]).collect(),
        }
    }

    pub fn from_json(json: &BlochPovmJson) -> Result<Self> {
        if json.n != json.vectors.len() {
            return Err(Error::DimensionMismatch {
                expected: json.n,
                found: json.vectors.len(),
            });
        }
        Self::new(json.vectors.iter().map(|v| Vector3::new(v[0], v[1], v[2])).collect())
    }
}

fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
            rng.sample::<f64, _>(StandardNormal),
        );
        let n = v.norm();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// `Tr(rho E_k)` for a Bloch POVM without building dense effects.
pub fn bloch_probabilities(p: &BlochPovm, state: &BlochRep) -> Vec<f64> {
    let n = p.n() as f64;
    p.vectors()
        .iter()
        .map(|r| (state.trace_part() + state.axis().dot(r)) / n)
        .collect()
}
