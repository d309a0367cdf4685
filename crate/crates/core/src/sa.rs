//! Simulated annealing with single-spin Metropolis updates and a linear
//! inverse-temperature ramp, used both as an optimizer and as a sampler of
//! the ground-state manifold.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::enumerate::SolutionSet;
use crate::error::{Error, Result};
use crate::instance::{IsingInstance, SpinConfig};
use crate::rng::{rng_from, Rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepOrder {
    /// Spins visited as `0, 1, ..., N-1` every sweep.
    #[default]
    Sequential,
    /// A fresh random permutation each sweep.
    RandomPermutation,
}

/// Linear ramp from `beta_min` to `beta_max` over `sweeps` sweeps; `beta` is
/// updated after every sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaSchedule {
    pub sweeps: usize,
    pub beta_min: f64,
    pub beta_max: f64,
    #[serde(default)]
    pub order: SweepOrder,
}

impl SaSchedule {
    pub fn new(sweeps: usize, beta_min: f64, beta_max: f64) -> Result<Self> {
        let s = SaSchedule {
            sweeps,
            beta_min,
            beta_max,
            order: SweepOrder::Sequential,
        };
        s.validate()?;
        Ok(s)
    }

    /// The default `0 -> 20` ramp.
    pub fn linear(sweeps: usize) -> Self {
        SaSchedule {
            sweeps,
            beta_min: 0.0,
            beta_max: 20.0,
            order: SweepOrder::Sequential,
        }
    }

    pub fn with_order(mut self, order: SweepOrder) -> Self {
        self.order = order;
        self
    }

    pub fn with_sweeps(mut self, sweeps: usize) -> Self {
        self.sweeps = sweeps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.sweeps == 0 {
            return Err(Error::input("schedule needs at least one sweep"));
        }
        if !(self.beta_min >= 0.0 && self.beta_min < self.beta_max && self.beta_max.is_finite()) {
            return Err(Error::input(format!(
                "need 0 <= beta_min < beta_max, got {} and {}",
                self.beta_min, self.beta_max
            )));
        }
        Ok(())
    }

    /// Inverse temperature of sweep `t`. A single-sweep schedule runs at
    /// `beta_max`.
    pub fn beta(&self, t: usize) -> f64 {
        if self.sweeps == 1 {
            return self.beta_max;
        }
        self.beta_min + t as f64 * (self.beta_max - self.beta_min) / (self.sweeps - 1) as f64
    }
}

/// Metropolis acceptance probability `min(1, exp(-beta * delta))`.
#[inline]
pub fn metropolis_acceptance(beta: f64, delta: i64) -> f64 {
    if delta <= 0 {
        1.0
    } else {
        (-beta * delta as f64).exp()
    }
}

/// One anneal from a uniformly random start.
pub fn run_sa(instance: &IsingInstance, schedule: &SaSchedule, rng: &mut Rng) -> Result<SpinConfig> {
    schedule.validate()?;
    Ok(anneal(instance, schedule, rng))
}

fn anneal(instance: &IsingInstance, schedule: &SaSchedule, rng: &mut Rng) -> SpinConfig {
    let n = instance.spin_count();
    let mut state = SpinConfig::random(n, rng);
    let mut order: Vec<usize> = (0..n).collect();
    let spins = state.spins_mut();
    for t in 0..schedule.sweeps {
        let beta = schedule.beta(t);
        if schedule.order == SweepOrder::RandomPermutation {
            order.shuffle(rng);
        }
        for &v in &order {
            let delta = instance.delta_unchecked(spins, v);
            if delta <= 0 || rng.gen::<f64>() < metropolis_acceptance(beta, delta) {
                spins[v] = -spins[v];
            }
        }
    }
    state
}

/// Ground-state counts from a batch of anneals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EmpiricalGsd {
    /// `counts[i]` is the number of anneals that ended in solution `i`.
    pub counts: Vec<u64>,
    pub anneals: u64,
    pub ground_hits: u64,
}

impl EmpiricalGsd {
    pub fn empty(solutions: usize) -> Self {
        EmpiricalGsd {
            counts: vec![0; solutions],
            anneals: 0,
            ground_hits: 0,
        }
    }

    /// `n_i / ground_hits`; all zero when nothing hit the ground manifold.
    pub fn probabilities(&self) -> Vec<f64> {
        if self.ground_hits == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / self.ground_hits as f64).collect()
    }

    /// Per-anneal probability of reaching solution `i`, `n_i / N`.
    pub fn success_probabilities(&self) -> Vec<f64> {
        if self.anneals == 0 {
            return vec![0.0; self.counts.len()];
        }
        self.counts.iter().map(|&c| c as f64 / self.anneals as f64).collect()
    }

    fn merge(mut self, other: EmpiricalGsd) -> Self {
        for (a, b) in self.counts.iter_mut().zip(other.counts) {
            *a += b;
        }
        self.anneals += other.anneals;
        self.ground_hits += other.ground_hits;
        self
    }
}

/// Runs `n_anneals` independent anneals (anneal `i` seeded from
/// `(seed, i)`) and counts how often each known solution is returned.
///
/// Anneals ending above the ground energy count only toward `anneals`. A
/// result below the ground energy, or at it but missing from `solutions`,
/// means the enumeration was wrong and is an integrity error.
pub fn sample_gsd(
    instance: &IsingInstance,
    solutions: &SolutionSet,
    schedule: &SaSchedule,
    n_anneals: u64,
    seed: u64,
) -> Result<EmpiricalGsd> {
    schedule.validate()?;
    if solutions.truncated {
        return Err(Error::input(format!(
            "solution set {} is truncated; GSD needs the complete manifold",
            solutions.instance_id
        )));
    }
    let index = solutions.index();
    let d = solutions.len();
    let ground = solutions.ground_energy;
    (0..n_anneals)
        .into_par_iter()
        .map(|i| {
            let mut rng = rng_from(seed, &[i]);
            let out = anneal(instance, schedule, &mut rng);
            let e = instance.energy_unchecked(out.spins());
            if e < ground {
                return Err(Error::Integrity(format!(
                    "anneal {i} reached energy {e} below the enumerated ground energy {ground}"
                )));
            }
            if e > ground {
                return Ok(None);
            }
            index.get(&out.to_words()).map(|&k| Some(k)).ok_or_else(|| {
                Error::Integrity(format!("anneal {i} reached a ground state missing from the solution set"))
            })
        })
        .try_fold(
            || EmpiricalGsd::empty(d),
            |mut tally, hit| {
                tally.anneals += 1;
                if let Some(k) = hit? {
                    tally.counts[k] += 1;
                    tally.ground_hits += 1;
                }
                Ok(tally)
            },
        )
        .try_reduce(|| EmpiricalGsd::empty(d), |a, b| Ok(a.merge(b)))
}

/// Per-solution time-to-solution over a grid of sweep counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TtsTable {
    pub sweeps: Vec<usize>,
    /// `tts[i][k]`: sweeps divided by the success probability of solution
    /// `i` at `sweeps[k]`; `None` when the solution was never reached.
    pub tts: Vec<Vec<Option<f64>>>,
    /// Probability of reaching any ground state, per grid point.
    pub ground_probability: Vec<f64>,
    pub gsds: Vec<EmpiricalGsd>,
}

impl TtsTable {
    /// Average sweeps to reach any ground state at grid point `k`.
    pub fn ground_tts(&self, k: usize) -> Option<f64> {
        let p = self.ground_probability[k];
        (p > 0.0).then(|| self.sweeps[k] as f64 / p)
    }

    /// Index of the grid point with the smallest ground-state TTS.
    pub fn best_index(&self) -> Option<usize> {
        (0..self.sweeps.len())
            .filter_map(|k| self.ground_tts(k).map(|t| (k, t)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(k, _)| k)
    }
}

pub fn tts_curve(
    instance: &IsingInstance,
    solutions: &SolutionSet,
    base: &SaSchedule,
    sweeps_list: &[usize],
    n_anneals: u64,
    seed: u64,
) -> Result<TtsTable> {
    if sweeps_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("sweep grid must be strictly ascending"));
    }
    let mut gsds = Vec::with_capacity(sweeps_list.len());
    for (k, &sweeps) in sweeps_list.iter().enumerate() {
        let schedule = base.with_sweeps(sweeps);
        gsds.push(sample_gsd(instance, solutions, &schedule, n_anneals, crate::rng::derive_seed(seed, &[k as u64]))?);
    }
    let tts = (0..solutions.len())
        .map(|i| {
            sweeps_list
                .iter()
                .zip(&gsds)
                .map(|(&sw, g)| {
                    let p = g.success_probabilities()[i];
                    (p > 0.0).then(|| sw as f64 / p)
                })
                .collect()
        })
        .collect();
    let ground_probability = gsds
        .iter()
        .map(|g| if g.anneals == 0 { 0.0 } else { g.ground_hits as f64 / g.anneals as f64 })
        .collect();
    Ok(TtsTable {
        sweeps: sweeps_list.to_vec(),
        tts,
        ground_probability,
        gsds,
    })
}

/// Powers of two from `2^4` to `2^14`.
pub fn default_pilot_grid() -> Vec<usize> {
    (4..=14).map(|p| 1usize << p).collect()
}

/// Sweep count minimizing the average time to reach any ground state over a
/// pilot grid (the optimizer operating point).
pub fn optimal_sweeps(
    instance: &IsingInstance,
    solutions: &SolutionSet,
    base: &SaSchedule,
    grid: &[usize],
    n_anneals: u64,
    seed: u64,
) -> Result<usize> {
    let table = tts_curve(instance, solutions, base, grid, n_anneals, seed)?;
    table
        .best_index()
        .map(|k| grid[k])
        .ok_or_else(|| Error::Numerical("no pilot grid point reached a ground state".into()))
}
