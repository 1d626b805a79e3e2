//! Measurement simulation, single-shot estimators and median-of-means.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{expectation, outcome_distribution, ChoiState, CompositeObservable, OutcomeDistribution};
use crate::error::{Error, Result};
use crate::norm::kappa_sq_product;
use crate::operator::HermitianOp;
use crate::povm::{ClassicalShadowSet, IcPovm};

/// Probability vectors must sum to 1 within this.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// One shot: outcome `a` of the A-side POVM and `b` of the B-side POVM (0-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutcomeRecord {
    pub a: usize,
    pub b: usize,
}

/// Inverse-CDF sampler over a fixed distribution.
#[derive(Debug, Clone)]
pub struct Sampler {
    cdf: Vec<f64>,
}

impl Sampler {
    pub fn new(probs: &[f64]) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        if probs.is_empty() || probs.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::UnnormalizedDistribution { sum });
        }
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { cdf })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total = *self.cdf.last().expect("nonempty");
        let u = rng.random::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u);
        // Skip zero-probability tail entries that share the final CDF value.
        i.min(self.last_positive())
    }

    fn last_positive(&self) -> usize {
        let mut i = self.cdf.len() - 1;
        while i > 0 && self.cdf[i] == self.cdf[i - 1] {
            i -= 1;
        }
        i
    }
}

/// Generator for batch `stream` of a run seeded with `seed`.
pub fn batch_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `m` i.i.d. draws from the joint distribution, on stream 0 of `seed`.
pub fn sample_outcomes(dist: &OutcomeDistribution, m: usize, seed: u64) -> Result<Vec<OutcomeRecord>> {
    let sampler = Sampler::new(&dist.probs)?;
    let mut rng = batch_rng(seed, 0);
    Ok((0..m)
        .map(|_| {
            let i = sampler.draw(&mut rng);
            OutcomeRecord {
                a: i / dist.n_b,
                b: i % dist.n_b,
            }
        })
        .collect())
}

/// `k` batches of `per_batch` draws, batch `i` on its own stream `i`.
pub fn sample_batches(dist: &OutcomeDistribution, k: usize, per_batch: usize, seed: u64) -> Result<Vec<Vec<OutcomeRecord>>> {
    let sampler = Sampler::new(&dist.probs)?;
    Ok((0..k)
        .into_par_iter()
        .map(|i| {
            let mut rng = batch_rng(seed, i as u64);
            (0..per_batch)
                .map(|_| {
                    let j = sampler.draw(&mut rng);
                    OutcomeRecord {
                        a: j / dist.n_b,
                        b: j % dist.n_b,
                    }
                })
                .collect()
        })
        .collect())
}

/// `x_hat = d Tr(rho_hat_a rho^T) Tr(rho_hat_b X)`.
pub fn shot_estimator(
    record: OutcomeRecord,
    shadows_a: &ClassicalShadowSet,
    shadows_b: &ClassicalShadowSet,
    obs: &CompositeObservable,
) -> f64 {
    let d = obs.dim() as f64;
    d * shadows_a.shadows()[record.a].trace_with(&obs.rho_transpose()) * shadows_b.shadows()[record.b].trace_with(obs.x())
}

/// Per-outcome shot values for one composite observable.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotTable {
    n_b: usize,
    values: Vec<f64>,
}

impl ShotTable {
    pub fn new(shadows_a: &ClassicalShadowSet, shadows_b: &ClassicalShadowSet, obs: &CompositeObservable) -> Result<Self> {
        let d = obs.dim() as f64;
        let ta = shadows_a.overlaps(&obs.rho_transpose())?;
        let tb = shadows_b.overlaps(obs.x())?;
        let values = ta.iter().flat_map(|x| tb.iter().map(move |y| d * x * y)).collect();
        Ok(Self { n_b: tb.len(), values })
    }

    pub fn value(&self, record: OutcomeRecord) -> f64 {
        self.values[record.a * self.n_b + record.b]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Sample plan from the median-of-means guarantee.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomPlan {
    pub k: usize,
    pub m: usize,
    pub m_per_batch: usize,
    pub epsilon: f64,
    pub delta: f64,
    pub h: usize,
    pub g: usize,
    pub kappa_sq: f64,
}

/// Relative slack below an integer that still rounds down to it.
pub const CEIL_SLACK: f64 = 1e-9;

fn ceil_with_slack(x: f64) -> usize {
    (x - CEIL_SLACK * x.abs().max(1.0)).ceil().max(1.0) as usize
}

/// `K = ceil(2 ln(2HG/delta))`, `M/K = ceil(34 kappa^2 / epsilon^2)`.
pub fn plan(epsilon: f64, delta: f64, h: usize, g: usize, kappa_sq: f64) -> Result<MomPlan> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} outside (0, 1)")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidParameter(format!("delta = {delta} outside (0, 1)")));
    }
    if h == 0 || g == 0 {
        return Err(Error::InvalidParameter("family sizes must be at least 1".into()));
    }
    if !(kappa_sq > 0.0 && kappa_sq.is_finite()) {
        return Err(Error::InvalidParameter(format!("kappa^2 = {kappa_sq} must be positive")));
    }
    let k = ceil_with_slack(2.0 * (2.0 * h as f64 * g as f64 / delta).ln());
    let m_per_batch = ceil_with_slack(34.0 * kappa_sq / (epsilon * epsilon));
    Ok(MomPlan {
        k,
        m: k * m_per_batch,
        m_per_batch,
        epsilon,
        delta,
        h,
        g,
        kappa_sq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub batch_means: Vec<f64>,
    pub plan: Option<MomPlan>,
}

/// Median of the means of `k` contiguous equal batches. Even `k` averages the two middle means.
pub fn median_of_means(values: &[f64], k: usize) -> Result<Estimate> {
    if k == 0 || values.is_empty() || values.len() % k != 0 {
        return Err(Error::NotDivisible { len: values.len(), k });
    }
    let size = values.len() / k;
    let batch_means: Vec<f64> = values
        .chunks_exact(size)
        .map(|c| c.iter().sum::<f64>() / size as f64)
        .collect();
    Ok(Estimate {
        value: median(&batch_means),
        batch_means,
        plan: None,
    })
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Mean and variance of the single-shot estimator by full enumeration of outcomes.
pub fn exact_moments(a: &IcPovm, b: &IcPovm, choi: &ChoiState, obs: &CompositeObservable) -> Result<(f64, f64)> {
    let dist = outcome_distribution(choi, a.povm(), b.povm())?;
    let table = ShotTable::new(a.shadows(), b.shadows(), obs)?;
    let (mut m1, mut m2) = (0.0, 0.0);
    for (p, x) in dist.probs.iter().zip(table.values()) {
        m1 += p * x;
        m2 += p * x * x;
    }
    Ok((m1, m2 - m1 * m1))
}

pub fn exact_variance(a: &IcPovm, b: &IcPovm, choi: &ChoiState, obs: &CompositeObservable) -> Result<f64> {
    Ok(exact_moments(a, b, choi, obs)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEstimate {
    pub state_index: usize,
    pub observable_index: usize,
    pub estimate: f64,
    pub truth: f64,
    pub error: f64,
    pub batch_means: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub seed: u64,
    pub plan: MomPlan,
    pub estimates: Vec<PairEstimate>,
    pub max_error: f64,
    pub within_epsilon: bool,
}

/// Protocol inputs: Choi state, product POVM, `G` known states and `H` observables.
#[derive(Debug, Clone)]
pub struct Protocol<'a> {
    pub choi: &'a ChoiState,
    pub povm_a: &'a IcPovm,
    pub povm_b: &'a IcPovm,
    pub states: &'a [HermitianOp],
    pub observables: &'a [HermitianOp],
    pub epsilon: f64,
    pub delta: f64,
}

/// Plans with the exact `kappa^2`, samples `M` shots once and estimates every
/// `Tr[E(rho_l) X_j]` from the same record.
pub fn simulate(protocol: &Protocol, seed: u64) -> Result<SimulationResult> {
    let Protocol {
        choi,
        povm_a,
        povm_b,
        states,
        observables,
        epsilon,
        delta,
    } = *protocol;
    let kappa = kappa_sq_product(povm_a, povm_b, states, observables)?;
    let plan = plan(epsilon, delta, observables.len(), states.len(), kappa.value)?;
    let dist = outcome_distribution(choi, povm_a.povm(), povm_b.povm())?;
    let batches = sample_batches(&dist, plan.k, plan.m_per_batch, seed)?;
    let mut estimates = Vec::with_capacity(states.len() * observables.len());
    for (l, rho) in states.iter().enumerate() {
        for (j, x) in observables.iter().enumerate() {
            let obs = CompositeObservable::new(rho.clone(), x.clone())?;
            let table = ShotTable::new(povm_a.shadows(), povm_b.shadows(), &obs)?;
            let batch_means: Vec<f64> = batches
                .iter()
                .map(|b| b.iter().map(|&r| table.value(r)).sum::<f64>() / b.len() as f64)
                .collect();
            let estimate = median(&batch_means);
            let truth = expectation(choi, &obs)?;
            estimates.push(PairEstimate {
                state_index: l,
                observable_index: j,
                estimate,
                truth,
                error: (estimate - truth).abs(),
                batch_means,
            });
        }
    }
    let max_error = estimates.iter().map(|e| e.error).fold(0.0, f64::max);
    Ok(SimulationResult {
        seed,
        within_epsilon: max_error <= epsilon,
        plan,
        estimates,
        max_error,
    })
}
