//! Simulated annealing over Bloch-form qubit POVMs.
//!
//! Moves pick two effects and shift their Bloch vectors by `+xi` and `-xi`,
//! which keeps `sum_k r_k = 0`. Candidates leaving the unit ball or with a
//! numerically singular `W` are rejected outright; the rest go through a
//! Metropolis test on the per-side `kappa^2`.

use nalgebra::Vector3;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimation::batch_rng;
use crate::norm::BlochMoments;
use crate::operator::{BlochRep, HermitianOp};
use crate::povm::{BlochPovm, BLOCH_NORM_TOL};

/// Annealing always stops once the temperature drops below this.
pub const HARD_STOP_TEMPERATURE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnnealConfig {
    pub t0: f64,
    pub t_min: f64,
    pub gamma: f64,
    pub n_steps: usize,
    pub restarts: usize,
    pub seed: u64,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        Self {
            t0: 1.0,
            t_min: 1e-8,
            gamma: 0.95,
            n_steps: 200,
            restarts: 8,
            seed: 0,
        }
    }
}

impl AnnealConfig {
    /// `t0 = t_min` is allowed and runs a single temperature.
    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min <= self.t0 && self.t0.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "need 0 < t_min <= t0 (t0 = {}, t_min = {})",
                self.t0, self.t_min
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidParameter(format!("gamma = {} outside (0, 1)", self.gamma)));
        }
        if self.n_steps == 0 {
            return Err(Error::InvalidParameter("n_steps must be at least 1".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of temperature levels the schedule visits.
    pub fn n_temperatures(&self) -> usize {
        let mut t = self.t0;
        let mut n = 0;
        loop {
            n += 1;
            t *= self.gamma;
            if t < self.t_min || t < HARD_STOP_TEMPERATURE {
                return n;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealResult {
    #[serde(with = "bloch_serde")]
    pub best_povm: BlochPovm,
    pub best_energy: f64,
    /// Best energy seen so far, recorded after each temperature level.
    pub history: Vec<f64>,
    pub accepted: u64,
    pub rejected: u64,
    pub restart: usize,
}

mod bloch_serde {
    use crate::povm::{BlochPovm, BlochPovmJson};
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(p: &BlochPovm, s: S) -> Result<S::Ok, S::Error> {
        p.to_json().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BlochPovm, D::Error> {
        let json = BlochPovmJson::deserialize(d)?;
        BlochPovm::from_json(&json).map_err(serde::de::Error::custom)
    }
}

/// Deterministic move: `r_k1 + xi`, `r_k2 - xi`. `None` when a vector leaves the unit ball.
pub fn propose_with(p: &BlochPovm, k1: usize, k2: usize, xi: Vector3<f64>) -> Option<BlochPovm> {
    let mut v = p.vectors().to_vec();
    v[k1] += xi;
    v[k2] -= xi;
    if v[k1].norm() > 1.0 + BLOCH_NORM_TOL || v[k2].norm() > 1.0 + BLOCH_NORM_TOL {
        return None;
    }
    Some(BlochPovm::new_unchecked(v))
}

fn noise<R: Rng + ?Sized>(temperature: f64, rng: &mut R) -> Vector3<f64> {
    let normal = Normal::new(0.0, temperature.sqrt()).expect("positive std");
    Vector3::new(normal.sample(rng), normal.sample(rng), normal.sample(rng))
}

fn pick_pair<R: Rng + ?Sized>(n: usize, rng: &mut R) -> (usize, usize) {
    let k1 = rng.random_range(0..n);
    let mut k2 = rng.random_range(0..n - 1);
    if k2 >= k1 {
        k2 += 1;
    }
    (k1, k2)
}

/// Random paired move at `temperature`; `None` for a rejected candidate
/// (outside the unit ball, or `W` singular).
pub fn perturb_pair<R: Rng + ?Sized>(p: &BlochPovm, temperature: f64, rng: &mut R) -> Option<BlochPovm> {
    let (k1, k2) = pick_pair(p.n(), rng);
    let cand = propose_with(p, k1, k2, noise(temperature, rng))?;
    BlochMoments::new(&cand).ok()?;
    Some(cand)
}

/// Metropolis rule: accept if `delta < 0` or `u < exp(-delta / T)`. `T = 0` is pure descent.
pub fn metropolis_accept(delta: f64, temperature: f64, u: f64) -> bool {
    delta < 0.0 || (temperature > 0.0 && u < (-delta / temperature).exp())
}

/// Per-side `kappa^2` of `p` over `family`.
pub fn energy(p: &BlochPovm, family: &[BlochRep]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    Ok(BlochMoments::new(p)?.kappa_sq(family).0)
}

/// `4 kappa_A^2 kappa_B^2` for a product POVM on a single-qubit Choi observable family.
pub fn pair_energy(a: &BlochPovm, states: &[BlochRep], b: &BlochPovm, observables: &[BlochRep]) -> Result<f64> {
    Ok(4.0 * energy(a, states)? * energy(b, observables)?)
}

/// Bloch forms of the family members; `transpose` is set for known input states.
pub fn bloch_family(ops: &[HermitianOp], transpose: bool) -> Result<Vec<BlochRep>> {
    ops.iter()
        .map(|op| {
            let b = BlochRep::from_op(op)?;
            Ok(if transpose { b.transpose() } else { b })
        })
        .collect()
}

fn run_chain(
    initial: BlochPovm,
    family: &[BlochRep],
    config: &AnnealConfig,
    rng: &mut ChaCha8Rng,
    mut on_accept: impl FnMut(f64),
) -> Result<AnnealResult> {
    let mut current = initial;
    let mut e_cur = energy(&current, family)?;
    let mut best = current.clone();
    let mut e_best = e_cur;
    let mut history = Vec::with_capacity(config.n_temperatures());
    let (mut accepted, mut rejected) = (0u64, 0u64);
    let n = current.n();
    let mut t = config.t0;
    loop {
        for _ in 0..config.n_steps {
            let (k1, k2) = pick_pair(n, rng);
            let xi = noise(t, rng);
            let u: f64 = rng.random();
            let Some(cand) = propose_with(&current, k1, k2, xi) else {
                rejected += 1;
                continue;
            };
            debug_assert!(cand.check().is_ok());
            let Ok(moments) = BlochMoments::new(&cand) else {
                rejected += 1;
                continue;
            };
            let e_new = moments.kappa_sq(family).0;
            if metropolis_accept(e_new - e_cur, t, u) {
                current = cand;
                e_cur = e_new;
                accepted += 1;
                on_accept(e_new);
                if e_cur < e_best {
                    e_best = e_cur;
                    best = current.clone();
                }
            } else {
                rejected += 1;
            }
        }
        history.push(e_best);
        t *= config.gamma;
        if t < config.t_min || t < HARD_STOP_TEMPERATURE {
            break;
        }
    }
    Ok(AnnealResult {
        best_povm: best,
        best_energy: e_best,
        history,
        accepted,
        rejected,
        restart: 0,
    })
}

fn reduce(results: Vec<AnnealResult>) -> AnnealResult {
    results
        .into_iter()
        .reduce(|best, r| if r.best_energy < best.best_energy { r } else { best })
        .expect("at least one restart")
}

fn anneal_side(
    initial: Option<&BlochPovm>,
    n_effects: usize,
    family: &[BlochRep],
    config: &AnnealConfig,
    side: u64,
) -> Result<AnnealResult> {
    config.validate()?;
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if let Some(p) = initial {
        p.check()?;
        BlochMoments::new(p)?;
    }
    let first = initial.cloned().or_else(|| symmetric_start(n_effects));
    let results = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = batch_rng(config.seed, (side << 32) | r as u64);
            let start = match &first {
                Some(p) if r == 0 => p.clone(),
                _ => BlochPovm::random(n_effects, &mut rng)?,
            };
            let mut res = run_chain(start, family, config, &mut rng, |_| {})?;
            res.restart = r;
            Ok(res)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(reduce(results))
}

/// Anneals from `initial` (restart 0) and `restarts - 1` random starts with
/// the same effect count; returns the best restart.
pub fn anneal(initial: &BlochPovm, family: &[BlochRep], config: &AnnealConfig) -> Result<AnnealResult> {
    anneal_side(Some(initial), initial.n(), family, config, 0)
}

/// Symmetric POVM with `n` effects, when there is one.
pub fn symmetric_start(n: usize) -> Option<BlochPovm> {
    match n {
        4 => Some(BlochPovm::tetrahedral()),
        6 => Some(BlochPovm::pauli6()),
        _ => None,
    }
}

/// Anneals `n`-effect POVMs; restart 0 starts from [`symmetric_start`] when
/// it exists, all other restarts from random POVMs.
pub fn anneal_random(n: usize, family: &[BlochRep], config: &AnnealConfig) -> Result<AnnealResult> {
    anneal_side(None, n, family, config, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiOptimum {
    pub side_a: AnnealResult,
    pub side_b: AnnealResult,
    /// `4 kappa_A^2 kappa_B^2`.
    pub combined: f64,
}

/// Optimizes the input-side POVM against `{rho_l^T}` and the output-side POVM
/// against `{X_j}` independently; the product POVM attains the combined value.
pub fn optimize_choi(
    states: &[HermitianOp],
    observables: &[HermitianOp],
    n_a: usize,
    n_b: usize,
    config: &AnnealConfig,
) -> Result<ChoiOptimum> {
    let fa = bloch_family(states, true)?;
    let fb = bloch_family(observables, false)?;
    let side_a = anneal_side(None, n_a, &fa, config, 1)?;
    let side_b = anneal_side(None, n_b, &fb, config, 2)?;
    Ok(ChoiOptimum {
        combined: 4.0 * side_a.best_energy * side_b.best_energy,
        side_a,
        side_b,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::{haar_projector, Pauli};
    use rand::SeedableRng;

    fn p0_bloch() -> BlochRep {
        BlochRep::new([1.0, 0.0, 0.0, 1.0])
    }

    fn pauli_projectors() -> Vec<BlochRep> {
        [Vector3::x(), Vector3::y(), Vector3::z()]
            .iter()
            .flat_map(|a| [BlochRep::pure_projector(*a), BlochRep::pure_projector(-a)])
            .collect()
    }

    fn quick() -> AnnealConfig {
        AnnealConfig {
            t0: 0.1,
            t_min: 1e-5,
            gamma: 0.8,
            n_steps: 50,
            restarts: 2,
            seed: 3,
        }
    }

    #[test]
    fn config_validation() {
        assert!(AnnealConfig::default().validate().is_ok());
        assert_eq!(AnnealConfig::default().n_temperatures(), 360);
        let bad = [
            AnnealConfig { t0: 0.0, ..Default::default() },
            AnnealConfig { t_min: 2.0, ..Default::default() },
            AnnealConfig { gamma: 1.0, ..Default::default() },
            AnnealConfig { n_steps: 0, ..Default::default() },
            AnnealConfig { restarts: 0, ..Default::default() },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
        let single = AnnealConfig { t0: 1e-3, t_min: 1e-3, ..Default::default() };
        assert!(single.validate().is_ok());
        assert_eq!(single.n_temperatures(), 1);
    }

    #[test]
    fn proposal_examples() {
        let p6 = BlochPovm::pauli6();
        assert_eq!(propose_with(&p6, 0, 3, Vector3::zeros()).unwrap(), p6);
        // r_0 = +z pushed to |(0.98, 0, 1)| = 1.4.
        assert!(propose_with(&p6, 0, 1, Vector3::new(0.98, 0.0, 0.0)).is_none());
        let inward = propose_with(&p6, 0, 1, Vector3::new(0.0, 0.0, -0.2)).unwrap();
        assert!((inward.vectors()[0].z - 0.8).abs() < 1e-15);
        assert!((inward.vectors()[1].z + 0.8).abs() < 1e-15);
    }

    #[test]
    fn accepted_proposals_preserve_constraints() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut p = BlochPovm::pauli6();
        let mut accepted = 0;
        while accepted < 10_000 {
            if let Some(c) = perturb_pair(&p, 0.01, &mut rng) {
                assert!(c.sum().norm() < 1e-12);
                assert!(c.vectors().iter().all(|r| r.norm() <= 1.0 + 1e-12));
                p = c;
                accepted += 1;
            }
        }
    }

    #[test]
    fn metropolis_rule() {
        assert!(metropolis_accept(-1e-9, 0.0, 0.99));
        assert!(!metropolis_accept(1e-9, 0.0, 0.0));
        assert!(metropolis_accept(1.0, 1.0, 0.3));
        assert!(!metropolis_accept(1.0, 1.0, 0.4));
    }

    #[test]
    fn energy_examples() {
        let p6 = BlochPovm::pauli6();
        assert!((energy(&p6, &pauli_projectors()).unwrap() - 1.5).abs() < 1e-12);
        let pp = pauli_projectors();
        assert!((pair_energy(&p6, &pp, &p6, &pp).unwrap() - 9.0).abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for p in [p6.clone(), BlochPovm::tetrahedral(), BlochPovm::random(7, &mut rng).unwrap()] {
            assert!((energy(&p, &[BlochRep::IDENTITY]).unwrap() - 1.0).abs() < 1e-12);
        }
        assert!(matches!(energy(&p6, &[]), Err(Error::EmptyFamily)));
        let x = bloch_family(&[HermitianOp::pauli(Pauli::Y)], true).unwrap();
        assert_eq!(x[0].coeffs, [0.0, 0.0, -2.0, 0.0]);
    }

    #[test]
    fn zero_temperature_is_pure_descent() {
        let config = AnnealConfig {
            t0: 1e-12,
            t_min: 1e-12,
            n_steps: 2000,
            ..Default::default()
        };
        let fam = [p0_bloch()];
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let start = BlochPovm::random(5, &mut rng).unwrap();
        let e0 = energy(&start, &fam).unwrap();
        let mut last = e0;
        let r = run_chain(start, &fam, &config, &mut rng, |e| {
            assert!(e <= last);
            last = e;
        })
        .unwrap();
        assert!(r.best_energy <= e0);
    }

    #[test]
    fn result_is_consistent_and_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let fam = bloch_family(&(0..20).map(|_| haar_projector(2, &mut rng)).collect::<Vec<_>>(), false).unwrap();
        let init = BlochPovm::random(6, &mut rng).unwrap();
        let r = anneal(&init, &fam, &quick()).unwrap();
        assert!((energy(&r.best_povm, &fam).unwrap() - r.best_energy).abs() < 1e-10);
        assert!(r.history.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.best_energy <= energy(&init, &fam).unwrap());
        assert_eq!(r, anneal(&init, &fam, &quick()).unwrap());
        assert!(r.best_povm.check().is_ok());
    }

    #[test]
    fn more_restarts_never_hurt() {
        let fam = [p0_bloch(), BlochRep::pure_projector(Vector3::x())];
        let mut prev = f64::INFINITY;
        for restarts in 1..=4 {
            let r = anneal_random(4, &fam, &AnnealConfig { restarts, ..quick() }).unwrap();
            assert!(r.best_energy <= prev);
            prev = r.best_energy;
        }
    }

    #[test]
    fn invalid_inputs_are_rejected() {
        let p6 = BlochPovm::pauli6();
        assert!(anneal(&p6, &[], &quick()).is_err());
        assert!(anneal(&p6, &[p0_bloch()], &AnnealConfig { gamma: 2.0, ..quick() }).is_err());
        let planar = BlochPovm::new(vec![Vector3::x(), -Vector3::x(), Vector3::y(), -Vector3::y()]).unwrap();
        assert!(matches!(anneal(&planar, &[p0_bloch()], &quick()), Err(Error::SingularW { .. })));
    }
}
