//! Squared shadow norms and worst-case family maxima.
//!
//! `||X||^2_E = lambda_max(sum_k Tr(rho_hat_k X)^2 E_k)`. For Choi observables
//! `d rho^T ⊗ X` measured with a product POVM the norm factorizes as
//! `d^2 ||rho^T||^2_A ||X||^2_B`, and so does the family maximum.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::channel::CompositeObservable;
use crate::error::{Error, Result};
use crate::operator::{BlochRep, HermitianOp, Pauli};
use crate::povm::{
    BlochPovm, ClassicalShadowSet, FrameOperator, IcPovm, Povm, MAX_CONDITION,
};

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Dense `lambda_max(sum_k Tr(rho_hat_k X)^2 E_k)`.
pub fn shadow_norm_sq(povm: &Povm, shadows: &ClassicalShadowSet, obs: &HermitianOp) -> Result<f64> {
    check_dim(povm.len(), shadows.len())?;
    check_dim(povm.dim(), obs.dim())?;
    let overlaps = shadows.overlaps(obs)?;
    let weighted = povm
        .effects()
        .iter()
        .zip(&overlaps)
        .fold(HermitianOp::zeros(povm.dim()), |acc, (e, t)| &acc + &e.scale(t * t));
    Ok(weighted.lambda_max())
}

pub fn ic_shadow_norm_sq(ic: &IcPovm, obs: &HermitianOp) -> Result<f64> {
    shadow_norm_sq(ic.povm(), ic.shadows(), obs)
}

/// `||d rho^T ⊗ X||^2` under `A ⊗ B`, through the product factorization.
pub fn choi_shadow_norm_sq(a: &IcPovm, b: &IcPovm, obs: &CompositeObservable) -> Result<f64> {
    let d = obs.dim() as f64;
    let fa = ic_shadow_norm_sq(a, &obs.rho_transpose())?;
    let fb = ic_shadow_norm_sq(b, obs.x())?;
    Ok(d * d * fa * fb)
}

/// Same quantity evaluated on the full product POVM and the dense composite operator.
pub fn choi_shadow_norm_sq_dense(a: &IcPovm, b: &IcPovm, obs: &CompositeObservable) -> Result<f64> {
    check_dim(a.dim(), obs.dim())?;
    check_dim(b.dim(), obs.dim())?;
    ic_shadow_norm_sq(&a.tensor(b), &obs.composite())
}

/// Family maximum with the member that attains it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub argmax_index: usize,
    /// `[d^2, A factor, B factor]` at the argmax.
    pub factors: Vec<f64>,
}

/// Values this close (relative) count as tied.
pub const TIE_TOL: f64 = 1e-12;

pub(crate) fn beats(v: f64, best: f64) -> bool {
    if best == f64::NEG_INFINITY {
        return v > best;
    }
    v > best + TIE_TOL * best.abs().max(1.0)
}

/// First index of the maximum; ties go to the lowest index.
pub(crate) fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if beats(v, bv) { (i, v) } else { (bi, bv) })
}

/// `kappa^2` over a list of `(rho_l, X_j)` pairs.
pub fn kappa_sq(a: &IcPovm, b: &IcPovm, family: &[CompositeObservable]) -> Result<NormReport> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let mut parts = Vec::with_capacity(family.len());
    for obs in family {
        let fa = ic_shadow_norm_sq(a, &obs.rho_transpose())?;
        let fb = ic_shadow_norm_sq(b, obs.x())?;
        let d = obs.dim() as f64;
        parts.push((d * d, fa, fb));
    }
    let values: Vec<f64> = parts.iter().map(|(s, fa, fb)| s * fa * fb).collect();
    let (idx, value) = argmax(&values);
    let (s, fa, fb) = parts[idx];
    Ok(NormReport {
        value,
        argmax_index: idx,
        factors: vec![s, fa, fb],
    })
}

/// `kappa^2` over the product family `states × observables`, using
/// `d^2 max_l ||rho_l^T||^2 max_j ||X_j||^2`. The argmax index is `l * H + j`.
pub fn kappa_sq_product(
    a: &IcPovm,
    b: &IcPovm,
    states: &[HermitianOp],
    observables: &[HermitianOp],
) -> Result<NormReport> {
    if states.is_empty() || observables.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let fa = states
        .iter()
        .map(|r| ic_shadow_norm_sq(a, &r.transpose()))
        .collect::<Result<Vec<_>>>()?;
    let fb = observables
        .iter()
        .map(|x| ic_shadow_norm_sq(b, x))
        .collect::<Result<Vec<_>>>()?;
    let (la, va) = argmax(&fa);
    let (lb, vb) = argmax(&fb);
    let d = a.dim() as f64;
    Ok(NormReport {
        value: d * d * va * vb,
        argmax_index: la * observables.len() + lb,
        factors: vec![d * d, va, vb],
    })
}

/// Closed-form qubit norm for `E_k = (I + r_k . sigma)/N`:
/// `c_k = [(x_0 + x . W^{-1} r_k)/2]^2`, value `(sum c_k + |sum c_k r_k|)/N`.
pub fn bloch_norm_sq(p: &BlochPovm, x: &BlochRep) -> Result<f64> {
    let axes = p.shadow_axes()?;
    let x0 = x.trace_part();
    let xv = x.axis();
    let mut sum_c = 0.0;
    let mut sum_cr = Vector3::zeros();
    for (r, s) in p.vectors().iter().zip(&axes) {
        let t = 0.5 * (x0 + xv.dot(s));
        let ck = t * t;
        sum_c += ck;
        sum_cr += r * ck;
    }
    Ok((sum_c + sum_cr.norm()) / p.n() as f64)
}

/// Moments of a Bloch POVM that make each norm evaluation O(1):
/// `sum c = (N/4)(x_0^2 + x^T W^{-1} x)` and
/// `sum c r = (2 N x_0 x + T[x, x]) / 4` with `T = sum_k r_k ⊗ s_k ⊗ s_k`, `s_k = W^{-1} r_k`.
/// Relies on `sum_k r_k = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochMoments {
    n: f64,
    w_inv: Matrix3<f64>,
    t: [Matrix3<f64>; 3],
}

impl BlochMoments {
    pub fn new(p: &BlochPovm) -> Result<Self> {
        Self::from_vectors(p.vectors())
    }

    pub fn from_vectors(vectors: &[Vector3<f64>]) -> Result<Self> {
        let n = vectors.len() as f64;
        let mut w = Matrix3::zeros();
        for r in vectors {
            w += r * r.transpose();
        }
        w /= n;
        let eig = w.symmetric_eigen();
        let ev = eig.eigenvalues;
        let min = ev.min();
        let max = ev.max();
        if !(min > 0.0) || max / min > MAX_CONDITION {
            return Err(Error::SingularW {
                condition_number: if min > 0.0 { max / min } else { f64::INFINITY },
            });
        }
        let w_inv = eig.eigenvectors * Matrix3::from_diagonal(&ev.map(|l| 1.0 / l)) * eig.eigenvectors.transpose();
        let mut t = [Matrix3::zeros(); 3];
        for r in vectors {
            let s = w_inv * r;
            let ss = s * s.transpose();
            for (i, ti) in t.iter_mut().enumerate() {
                *ti += ss * r[i];
            }
        }
        Ok(Self { n, w_inv, t })
    }

    pub fn norm_sq(&self, x: &BlochRep) -> f64 {
        let x0 = x.trace_part();
        let xv = x.axis();
        let sum_c = 0.25 * self.n * (x0 * x0 + xv.dot(&(self.w_inv * xv)));
        let quad = Vector3::new(
            xv.dot(&(self.t[0] * xv)),
            xv.dot(&(self.t[1] * xv)),
            xv.dot(&(self.t[2] * xv)),
        );
        let sum_cr = (xv * (2.0 * self.n * x0) + quad) * 0.25;
        (sum_c + sum_cr.norm()) / self.n
    }

    /// Worst member of `family` and its index (lowest index on ties).
    pub fn kappa_sq(&self, family: &[BlochRep]) -> (f64, usize) {
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, x) in family.iter().enumerate() {
            let v = self.norm_sq(x);
            if beats(v, best.0) {
                best = (v, i);
            }
        }
        best
    }
}

/// Per-side `kappa^2` over Bloch-form members.
pub fn bloch_kappa_sq(p: &BlochPovm, family: &[BlochRep]) -> Result<(f64, usize)> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(BlochMoments::new(p)?.kappa_sq(family))
}

/// Largest genuinely entangled block evaluated densely.
pub const MAX_DENSE_BLOCK: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockKind {
    Single,
    Entangled,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub qubits: Vec<usize>,
    pub kind: BlockKind,
}

/// Ordered partition of `n` qubits into tensor blocks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeparabilityStructure {
    n_qubits: usize,
    blocks: Vec<Block>,
}

impl SeparabilityStructure {
    pub fn new(n_qubits: usize, blocks: Vec<Block>) -> Result<Self> {
        let mut seen = vec![false; n_qubits];
        for b in &blocks {
            if b.qubits.is_empty() {
                return Err(Error::InvalidStructure("empty block".into()));
            }
            if b.kind == BlockKind::Single && b.qubits.len() != 1 {
                return Err(Error::InvalidStructure(format!(
                    "single block holds {} qubits",
                    b.qubits.len()
                )));
            }
            for &q in &b.qubits {
                if q >= n_qubits {
                    return Err(Error::InvalidStructure(format!("qubit {q} out of range 0..{n_qubits}")));
                }
                if std::mem::replace(&mut seen[q], true) {
                    return Err(Error::InvalidStructure(format!("qubit {q} appears twice")));
                }
            }
        }
        if let Some(q) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidStructure(format!("qubit {q} not covered")));
        }
        Ok(Self { n_qubits, blocks })
    }

    pub fn all_separable(n_qubits: usize) -> Self {
        Self {
            n_qubits,
            blocks: (0..n_qubits)
                .map(|q| Block {
                    qubits: vec![q],
                    kind: BlockKind::Single,
                })
                .collect(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }
}

/// One side of a factorized problem: per-qubit POVMs, the block structure,
/// and for each block the candidate operators on that block (qubits in the
/// block's listed order).
#[derive(Debug, Clone)]
pub struct FactorizedSide<'a> {
    pub povms: &'a [BlochPovm],
    pub structure: &'a SeparabilityStructure,
    pub families: &'a [Vec<HermitianOp>],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorizedReport {
    pub n_qubits: usize,
    pub log2_kappa_sq: f64,
    /// Worst-member `log2` norm per block, A side then B side.
    pub log2_block_factors: Vec<f64>,
}

impl FactorizedReport {
    pub fn log2_per_qubit(&self) -> f64 {
        self.log2_kappa_sq / self.n_qubits as f64
    }

    /// `kappa^2` itself; overflows to infinity beyond `2^1024`.
    pub fn value(&self) -> f64 {
        self.log2_kappa_sq.exp2()
    }
}

fn side_log2_factors(side: &FactorizedSide, transpose: bool) -> Result<Vec<f64>> {
    let n = side.structure.n_qubits();
    check_dim(n, side.povms.len())?;
    check_dim(side.structure.blocks().len(), side.families.len())?;
    let mut out = Vec::with_capacity(side.families.len());
    for (block, family) in side.structure.blocks().iter().zip(side.families) {
        if family.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let size = block.qubits.len();
        if size > MAX_DENSE_BLOCK {
            return Err(Error::BlockTooLarge {
                size,
                max: MAX_DENSE_BLOCK,
            });
        }
        let prep = |op: &HermitianOp| if transpose { op.transpose() } else { op.clone() };
        let worst = if block.kind == BlockKind::Single {
            let moments = BlochMoments::new(&side.povms[block.qubits[0]])?;
            let members = family
                .iter()
                .map(|op| {
                    check_dim(2, op.dim())?;
                    BlochRep::from_op(&prep(op))
                })
                .collect::<Result<Vec<_>>>()?;
            moments.kappa_sq(&members).0
        } else {
            let mut ic = IcPovm::new(side.povms[block.qubits[0]].to_povm())?;
            for &q in &block.qubits[1..] {
                ic = ic.tensor(&IcPovm::new(side.povms[q].to_povm())?);
            }
            let mut worst = f64::NEG_INFINITY;
            for op in family {
                worst = worst.max(ic_shadow_norm_sq(&ic, &prep(op))?);
            }
            worst
        };
        out.push(worst.log2());
    }
    Ok(out)
}

/// `kappa^2 = 4^n prod_blocks max_member ||block||^2` over both sides, in `log2`.
/// States on side A enter transposed.
pub fn factorized_kappa_sq(states: &FactorizedSide, observables: &FactorizedSide) -> Result<FactorizedReport> {
    let n = states.structure.n_qubits();
    check_dim(n, observables.structure.n_qubits())?;
    let mut factors = side_log2_factors(states, true)?;
    factors.extend(side_log2_factors(observables, false)?);
    Ok(FactorizedReport {
        n_qubits: n,
        log2_kappa_sq: 2.0 * n as f64 + factors.iter().sum::<f64>(),
        log2_block_factors: factors,
    })
}

/// Random-Pauli bound `4^{2n} ||d rho^T ⊗ X||_inf^2` with `d = 2^n`.
pub fn pauli_bound_sq(obs: &CompositeObservable) -> Result<f64> {
    let d = obs.dim();
    if !d.is_power_of_two() || d < 2 {
        return Err(Error::InvalidParameter(format!("dimension {d} is not a qubit register")));
    }
    let n = d.trailing_zeros() as i32;
    let op_norm = d as f64 * obs.rho().spectral_norm() * obs.x().spectral_norm();
    Ok(4f64.powi(2 * n) * op_norm * op_norm)
}

/// `log2` of the Pauli bound for product `rho`, `X` given per-qubit spectral norms.
pub fn pauli_bound_log2(rho_norms: &[f64], x_norms: &[f64]) -> Result<f64> {
    check_dim(rho_norms.len(), x_norms.len())?;
    let n = rho_norms.len() as f64;
    let log_op: f64 = n + rho_norms.iter().chain(x_norms).map(|v| v.log2()).sum::<f64>();
    Ok(4.0 * n + 2.0 * log_op)
}

/// Weighted set of orthonormal measurement bases, each given by its rank-one projectors.
#[derive(Debug, Clone)]
pub struct ProjectiveEnsemble {
    dim: usize,
    bases: Vec<(f64, Vec<HermitianOp>)>,
}

impl ProjectiveEnsemble {
    pub fn new(bases: Vec<(f64, Vec<HermitianOp>)>) -> Result<Self> {
        let Some((_, first)) = bases.first() else {
            return Err(Error::EmptyFamily);
        };
        let dim = first.first().map(|p| p.dim()).ok_or(Error::EmptyFamily)?;
        let total: f64 = bases.iter().map(|(w, _)| w).sum();
        if (total - 1.0).abs() > 1e-9 || bases.iter().any(|(w, _)| *w < 0.0) {
            return Err(Error::UnnormalizedDistribution { sum: total });
        }
        for (_, basis) in &bases {
            check_dim(dim, basis.len())?;
            let mut sum = HermitianOp::zeros(dim);
            for p in basis {
                check_dim(dim, p.dim())?;
                let sq = HermitianOp::new(p.matrix() * p.matrix())?;
                if sq.max_abs_diff(p) > 1e-9 || (p.trace() - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter("basis element is not a rank-one projector".into()));
                }
                sum = &sum + p;
            }
            if sum.max_abs_diff(&HermitianOp::identity(dim)) > 1e-9 {
                return Err(Error::InvalidParameter("basis projectors do not sum to I".into()));
            }
        }
        Ok(Self { dim, bases })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bases(&self) -> &[(f64, Vec<HermitianOp>)] {
        &self.bases
    }

    /// Uniform random Pauli bases on `n` qubits (`3^n` product bases).
    pub fn pauli(n_qubits: usize) -> Self {
        let single = single_qubit_pauli_bases();
        let mut bases: Vec<Vec<HermitianOp>> = vec![vec![HermitianOp::identity(1)]];
        for _ in 0..n_qubits {
            bases = bases
                .iter()
                .flat_map(|b| {
                    single.iter().map(move |s| {
                        b.iter()
                            .flat_map(|p| s.iter().map(move |q| p.tensor(q)))
                            .collect::<Vec<_>>()
                    })
                })
                .collect();
        }
        let w = 1.0 / bases.len() as f64;
        Self {
            dim: 1 << n_qubits,
            bases: bases.into_iter().map(|b| (w, b)).collect(),
        }
    }

    /// Single-qubit Clifford group applied to the computational basis: the three
    /// Pauli bases, each hit by 8 of the 24 elements.
    pub fn clifford_single() -> Self {
        Self::pauli(1)
    }

    /// Global two-qubit Clifford group applied to the computational basis: the
    /// 15 stabilizer bases, uniformly weighted.
    pub fn clifford_two_qubit() -> Self {
        let paulis: Vec<HermitianOp> = Pauli::ALL
            .iter()
            .flat_map(|&a| Pauli::ALL.iter().map(move |&b| HermitianOp::pauli(a).tensor(&HermitianOp::pauli(b))))
            .skip(1)
            .collect();
        let find = |m: &HermitianOp| -> (usize, f64) {
            paulis
                .iter()
                .enumerate()
                .map(|(i, p)| (i, p.trace_with(m) / 4.0))
                .find(|(_, s)| s.abs() > 0.5)
                .expect("product of commuting Paulis is a signed Pauli")
        };
        let id = HermitianOp::identity(4);
        let mut seen = Vec::new();
        let mut bases = Vec::new();
        for i in 0..paulis.len() {
            for j in i + 1..paulis.len() {
                let ab = paulis[i].matrix() * paulis[j].matrix();
                let ba = paulis[j].matrix() * paulis[i].matrix();
                if (ab.clone() - ba).iter().any(|z| z.norm() > 1e-12) {
                    continue;
                }
                let (k, _) = find(&HermitianOp::new(ab).expect("commuting Pauli product is Hermitian"));
                let mut key = [i, j, k];
                key.sort_unstable();
                if seen.contains(&key) {
                    continue;
                }
                seen.push(key);
                let basis = [1.0, -1.0]
                    .iter()
                    .flat_map(|&s1| [1.0, -1.0].iter().map(move |&s2| (s1, s2)))
                    .map(|(s1, s2)| {
                        let a = &id + &paulis[i].scale(s1);
                        let b = &id + &paulis[j].scale(s2);
                        HermitianOp::new(a.matrix() * b.matrix() * num_complex::Complex64::new(0.25, 0.0))
                            .expect("commuting projector product is Hermitian")
                    })
                    .collect();
                bases.push(basis);
            }
        }
        let w = 1.0 / bases.len() as f64;
        Self {
            dim: 4,
            bases: bases.into_iter().map(|b| (w, b)).collect(),
        }
    }

    /// Product ensemble, weights multiplied.
    pub fn tensor(&self, other: &ProjectiveEnsemble) -> Self {
        let bases = self
            .bases
            .iter()
            .flat_map(|(wa, ba)| {
                other.bases.iter().map(move |(wb, bb)| {
                    (
                        wa * wb,
                        ba.iter().flat_map(|p| bb.iter().map(move |q| p.tensor(q))).collect(),
                    )
                })
            })
            .collect();
        Self {
            dim: self.dim * other.dim,
            bases,
        }
    }

    /// The ensemble viewed as one POVM with effects `w_U P_b`.
    pub fn to_povm(&self) -> Result<Povm> {
        Povm::new(
            self.bases
                .iter()
                .flat_map(|(w, b)| b.iter().map(move |p| p.scale(*w)))
                .collect(),
        )
    }
}

fn single_qubit_pauli_bases() -> Vec<Vec<HermitianOp>> {
    [Pauli::X, Pauli::Y, Pauli::Z]
        .iter()
        .map(|&p| {
            let half = HermitianOp::identity(2).scale(0.5);
            let s = HermitianOp::pauli(p).scale(0.5);
            vec![&half + &s, &half - &s]
        })
        .collect()
}

/// Worst-case single-shot second moment of randomized projective measurements:
/// `max_sigma sum_U w_U sum_b <b|sigma|b> <b|M^{-1}(O)|b>^2`, with
/// `M(A) = sum_U w_U sum_b <b|A|b> P_b`.
pub fn projective_ensemble_norm_sq(ensemble: &ProjectiveEnsemble, obs: &HermitianOp) -> Result<f64> {
    check_dim(ensemble.dim(), obs.dim())?;
    let projectors: Vec<HermitianOp> = ensemble.bases.iter().flat_map(|(_, b)| b.iter().cloned()).collect();
    let weights: Vec<f64> = ensemble
        .bases
        .iter()
        .flat_map(|(w, b)| std::iter::repeat_n(*w, b.len()))
        .collect();
    // M is the frame operator of the effects sqrt(w) P_b.
    let frame_povm = Povm::new_unvalidated(
        ensemble.dim,
        projectors.iter().zip(&weights).map(|(p, w)| p.scale(w.sqrt())).collect(),
    );
    let frame = FrameOperator::new(&frame_povm);
    let inv_o = frame.apply_inverse(obs)?;
    let acc = projectors
        .iter()
        .zip(&weights)
        .fold(HermitianOp::zeros(ensemble.dim), |acc, (p, w)| {
            let t = p.trace_with(&inv_o);
            &acc + &p.scale(w * t * t)
        });
    Ok(acc.lambda_max())
}
