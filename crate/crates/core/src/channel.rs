//! Quantum channels, Choi states and composite observables.
//!
//! The Choi state of a channel `E` on `C^d` is
//! `eta = sum_{n,m} |n><m| ⊗ E(|n><m|)`, i.e. `(I ⊗ E)(|omega><omega|)` for
//! the unnormalized `|omega> = sum_n |n>|n>`. Subsystem A is the untouched
//! reference, subsystem B the channel output. `eta` has trace `d`, and
//! `Tr[E(rho) X] = Tr[eta (rho^T ⊗ X)]`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{random_ginibre, HermitianOp, ONE, ZERO};
use crate::povm::Povm;

/// `sum_i K_i^dag K_i = I` must hold to this tolerance.
pub const TP_TOL: f64 = 1e-10;
/// Tolerance for Choi-state invariants (PSD, trace, marginal).
pub const CHOI_TOL: f64 = 1e-9;

/// A CPTP map in Kraus form.
#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim: usize,
    kraus: Vec<DMatrix<Complex64>>,
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl KrausChannel {
    pub fn new(kraus: Vec<DMatrix<Complex64>>) -> Result<Self> {
        let Some(first) = kraus.first() else {
            return Err(Error::InvalidParameter("channel needs at least one Kraus operator".into()));
        };
        let dim = first.nrows();
        for k in &kraus {
            if k.nrows() != dim || k.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: k.nrows().max(k.ncols()),
                });
            }
            if k.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        let total = kraus
            .iter()
            .fold(DMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let residual = (total - DMatrix::identity(dim, dim))
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if residual > TP_TOL {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(Self { dim, kraus })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kraus(&self) -> &[DMatrix<Complex64>] {
        &self.kraus
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            kraus: vec![DMatrix::identity(dim, dim)],
        }
    }

    /// Qubit depolarizing channel `rho -> p rho + (1 - p) I / 2`.
    /// `p = 1` is the identity, `p = 0` fully depolarizing; CP needs `p` in `[-1/3, 1]`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        if !(-1.0 / 3.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("depolarizing p = {p} outside [-1/3, 1]")));
        }
        let w0 = ((1.0 + 3.0 * p) / 4.0).sqrt();
        let w = ((1.0 - p) / 4.0).sqrt();
        use crate::operator::Pauli;
        Ok(Self {
            dim: 2,
            kraus: vec![
                Pauli::I.matrix() * c(w0),
                Pauli::X.matrix() * c(w),
                Pauli::Y.matrix() * c(w),
                Pauli::Z.matrix() * c(w),
            ],
        })
    }

    pub fn amplitude_damping(gamma: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&gamma) {
            return Err(Error::InvalidParameter(format!("damping gamma = {gamma} outside [0, 1]")));
        }
        Ok(Self {
            dim: 2,
            kraus: vec![
                DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c((1.0 - gamma).sqrt())]),
                DMatrix::from_row_slice(2, 2, &[ZERO, c(gamma.sqrt()), ZERO, ZERO]),
            ],
        })
    }

    pub fn phase_damping(lambda: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("phase damping lambda = {lambda} outside [0, 1]")));
        }
        Ok(Self {
            dim: 2,
            kraus: vec![
                DMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, c((1.0 - lambda).sqrt())]),
                DMatrix::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, c(lambda.sqrt())]),
            ],
        })
    }

    pub fn unitary(u: DMatrix<Complex64>) -> Result<Self> {
        if !u.is_square() {
            return Err(Error::NotSquare {
                rows: u.nrows(),
                cols: u.ncols(),
            });
        }
        let n = u.nrows();
        let residual = (u.adjoint() * &u - DMatrix::identity(n, n))
            .iter()
            .fold(0.0f64, |m, z| m.max(z.norm()));
        if residual > TP_TOL {
            return Err(Error::NotUnitary { residual });
        }
        Ok(Self {
            dim: n,
            kraus: vec![u],
        })
    }

    /// Random channel from a Haar-like Stinespring isometry with `n_kraus` outputs.
    pub fn random<R: Rng + ?Sized>(dim: usize, n_kraus: usize, rng: &mut R) -> Self {
        let g = random_ginibre(dim * n_kraus, dim, rng);
        let gram = HermitianOp::new(g.adjoint() * &g).expect("Gram matrix is Hermitian up to rounding");
        let (vals, vecs) = gram.eigen();
        let inv_sqrt = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            dim,
            vals.iter().map(|&l| c(1.0 / l.sqrt())),
        ));
        let v = g * (&vecs * inv_sqrt * vecs.adjoint());
        let kraus = (0..n_kraus)
            .map(|i| v.rows(i * dim, dim).into_owned())
            .collect();
        Self { dim, kraus }
    }

    /// Parallel composition `E ⊗ F`.
    pub fn tensor(&self, other: &KrausChannel) -> KrausChannel {
        let kraus = self
            .kraus
            .iter()
            .flat_map(|a| other.kraus.iter().map(move |b| a.kronecker(b)))
            .collect();
        KrausChannel {
            dim: self.dim * other.dim,
            kraus,
        }
    }

    /// `sum_i K_i M K_i^dag` for an arbitrary (not necessarily Hermitian) `M`.
    pub fn apply_matrix(&self, m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        self.kraus
            .iter()
            .fold(DMatrix::zeros(self.dim, self.dim), |acc, k| acc + k * m * k.adjoint())
    }

    pub fn apply(&self, rho: &HermitianOp) -> Result<HermitianOp> {
        check_dim(self.dim, rho.dim())?;
        Ok(HermitianOp::symmetrized(self.apply_matrix(rho.matrix())))
    }
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Unnormalized Choi state `eta` (trace `d`).
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    dim: usize,
    eta: HermitianOp,
}

impl ChoiState {
    /// Validates PSD, `Tr eta = d` and `Tr_B eta = I_A`.
    pub fn new(eta: HermitianOp, dim: usize) -> Result<Self> {
        check_dim(dim * dim, eta.dim())?;
        let tr = eta.trace();
        if (tr - dim as f64).abs() > CHOI_TOL {
            return Err(Error::InvalidChoi(format!("trace {tr}, expected {dim}")));
        }
        let min = eta.lambda_min();
        if min < -CHOI_TOL {
            return Err(Error::InvalidChoi(format!("negative eigenvalue {min:e}")));
        }
        let marginal = eta.partial_trace_b(dim, dim)?;
        let dev = marginal.max_abs_diff(&HermitianOp::identity(dim));
        if dev > CHOI_TOL {
            return Err(Error::InvalidChoi(format!("Tr_B eta deviates from I by {dev:e}")));
        }
        Ok(Self { dim, eta })
    }

    /// Input (and output) dimension `d`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn eta(&self) -> &HermitianOp {
        &self.eta
    }

    /// `eta / d`, a density operator.
    pub fn normalized(&self) -> HermitianOp {
        self.eta.scale(1.0 / self.dim as f64)
    }
}

pub fn choi_of_channel(ch: &KrausChannel) -> ChoiState {
    let d = ch.dim();
    let mut eta = DMatrix::zeros(d * d, d * d);
    for n in 0..d {
        for m in 0..d {
            let mut unit = DMatrix::zeros(d, d);
            unit[(n, m)] = ONE;
            let image = ch.apply_matrix(&unit);
            for i in 0..d {
                for j in 0..d {
                    eta[(n * d + i, m * d + j)] = image[(i, j)];
                }
            }
        }
    }
    ChoiState {
        dim: d,
        eta: HermitianOp::symmetrized(eta),
    }
}

/// `E(rho) = Tr_A[(rho^T ⊗ I) eta]`.
pub fn apply_via_choi(choi: &ChoiState, rho: &HermitianOp) -> Result<HermitianOp> {
    let d = choi.dim;
    check_dim(d, rho.dim())?;
    let eta = choi.eta.matrix();
    let r = rho.matrix();
    let mut out = DMatrix::zeros(d, d);
    // out_ij = sum_{a,b} rho^T_{ab} eta_{(b,i),(a,j)} = sum_{a,b} rho_{ba} eta_{(b,i),(a,j)}
    for a in 0..d {
        for b in 0..d {
            let w = r[(b, a)];
            if w == ZERO {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    out[(i, j)] += w * eta[(b * d + i, a * d + j)];
                }
            }
        }
    }
    Ok(HermitianOp::symmetrized(out))
}

/// `Re Tr[M (A ⊗ B)]` for a `(dA dB)`-dimensional `M`, without forming `A ⊗ B`.
pub(crate) fn trace_against_product(m: &HermitianOp, a: &HermitianOp, b: &HermitianOp) -> f64 {
    let da = a.dim();
    let db = b.dim();
    let mm = m.matrix();
    let am = a.matrix();
    let bm = b.matrix();
    let mut acc = ZERO;
    for i in 0..da {
        for k in 0..da {
            let aki = am[(k, i)];
            if aki == ZERO {
                continue;
            }
            for j in 0..db {
                for l in 0..db {
                    acc += mm[(i * db + j, k * db + l)] * aki * bm[(l, j)];
                }
            }
        }
    }
    acc.re
}

/// Known input state `rho` paired with an output observable `X`; stands for
/// the operator `d rho^T ⊗ X` on the Choi state.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeObservable {
    rho: HermitianOp,
    x: HermitianOp,
}

/// Density-matrix tolerance for the known state.
pub const STATE_TOL: f64 = 1e-10;

impl CompositeObservable {
    pub fn new(rho: HermitianOp, x: HermitianOp) -> Result<Self> {
        check_dim(rho.dim(), x.dim())?;
        rho.check_density(STATE_TOL)?;
        Ok(Self { rho, x })
    }

    pub fn dim(&self) -> usize {
        self.rho.dim()
    }

    pub fn rho(&self) -> &HermitianOp {
        &self.rho
    }

    pub fn x(&self) -> &HermitianOp {
        &self.x
    }

    pub fn rho_transpose(&self) -> HermitianOp {
        self.rho.transpose()
    }

    /// Dense `d rho^T ⊗ X`.
    pub fn composite(&self) -> HermitianOp {
        self.rho.transpose().tensor(&self.x).scale(self.dim() as f64)
    }
}

/// `Tr[eta (rho^T ⊗ X)] = Tr[E(rho) X]`.
pub fn expectation(choi: &ChoiState, obs: &CompositeObservable) -> Result<f64> {
    check_dim(choi.dim, obs.dim())?;
    Ok(trace_against_product(&choi.eta, &obs.rho_transpose(), &obs.x))
}

/// Joint outcome distribution of a product POVM on `eta / d`, flattened as
/// `a * n_b + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probs: Vec<f64>,
    pub n_a: usize,
    pub n_b: usize,
}

impl OutcomeDistribution {
    pub fn prob(&self, a: usize, b: usize) -> f64 {
        self.probs[a * self.n_b + b]
    }
}

/// Probabilities below zero by less than this are rounding and get clamped.
const NEGATIVE_PROB_SLACK: f64 = 1e-12;

pub fn outcome_distribution(choi: &ChoiState, povm_a: &Povm, povm_b: &Povm) -> Result<OutcomeDistribution> {
    let d = choi.dim;
    check_dim(d, povm_a.dim())?;
    check_dim(d, povm_b.dim())?;
    let eta = choi.eta.matrix();
    let mut probs = Vec::with_capacity(povm_a.len() * povm_b.len());
    for ea in povm_a.effects() {
        // Conditional operator G = Tr_A[(E_a ⊗ I) eta] on B.
        let em = ea.matrix();
        let mut g = DMatrix::zeros(d, d);
        for i in 0..d {
            for k in 0..d {
                let w = em[(k, i)];
                if w == ZERO {
                    continue;
                }
                for j in 0..d {
                    for l in 0..d {
                        g[(j, l)] += w * eta[(i * d + j, k * d + l)];
                    }
                }
            }
        }
        let g = HermitianOp::symmetrized(g);
        for eb in povm_b.effects() {
            let p = g.trace_with(eb) / d as f64;
            if p < -NEGATIVE_PROB_SLACK {
                return Err(Error::InvalidChoi(format!("negative outcome probability {p:e}")));
            }
            probs.push(p.max(0.0));
        }
    }
    Ok(OutcomeDistribution {
        probs,
        n_a: povm_a.len(),
        n_b: povm_b.len(),
    })
}

/// Matrix rows of `[re, im]` pairs.
pub type MatrixJson = Vec<Vec<[f64; 2]>>;

fn matrix_from_json(rows: &MatrixJson) -> Result<DMatrix<Complex64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("matrix must be square and non-empty".into()));
    }
    Ok(DMatrix::from_fn(n, n, |r, c| Complex64::new(rows[r][c][0], rows[r][c][1])))
}

/// JSON description of a channel, tagged by `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelSpec {
    Identity {
        #[serde(default = "default_dim")]
        dim: usize,
    },
    Depolarizing {
        p: f64,
    },
    AmplitudeDamping {
        gamma: f64,
    },
    PhaseDamping {
        lambda: f64,
    },
    Unitary {
        matrix: MatrixJson,
    },
    Kraus {
        operators: Vec<MatrixJson>,
    },
}

fn default_dim() -> usize {
    2
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        match self {
            ChannelSpec::Identity { dim } => Ok(KrausChannel::identity(*dim)),
            ChannelSpec::Depolarizing { p } => KrausChannel::depolarizing(*p),
            ChannelSpec::AmplitudeDamping { gamma } => KrausChannel::amplitude_damping(*gamma),
            ChannelSpec::PhaseDamping { lambda } => KrausChannel::phase_damping(*lambda),
            ChannelSpec::Unitary { matrix } => KrausChannel::unitary(matrix_from_json(matrix)?),
            ChannelSpec::Kraus { operators } => {
                KrausChannel::new(operators.iter().map(matrix_from_json).collect::<Result<_>>()?)
            }
        }
    }
}
