use std::collections::HashMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::enumerate::SolutionSet;
use crate::error::{Error, Result};
use crate::instance::{IsingInstance, SpinConfig};
use crate::rng::rng_from;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriverKind {
    /// `-sum_i X_i`.
    TransverseField,
    /// `-sum_i X_i + sum_<ij> Jt_ij X_i X_j` with `|Jt_ij| = |J_ij|`.
    NonStoquastic,
}

impl DriverKind {
    pub fn tag(self) -> &'static str {
        match self {
            DriverKind::TransverseField => "tf",
            DriverKind::NonStoquastic => "ns",
        }
    }
}

/// How the signs of the `XX` couplings are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    /// One sign for every edge.
    #[default]
    Global,
    /// An independent sign per edge.
    PerEdge,
}

/// A driver Hamiltonian, as a list of bit-flip terms with real coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Driver {
    pub kind: DriverKind,
    /// `(i, j, Jt_ij)`; empty for the transverse field.
    pub xx_couplings: Vec<(usize, usize, f64)>,
    pub sign_seed: u64,
    pub sign_mode: SignMode,
}

impl Driver {
    pub fn transverse_field() -> Self {
        Driver {
            kind: DriverKind::TransverseField,
            xx_couplings: Vec::new(),
            sign_seed: 0,
            sign_mode: SignMode::Global,
        }
    }

    /// `XX` couplings copy the problem couplings' magnitudes, with a sign
    /// drawn from `sign_seed` (once, or per edge).
    pub fn non_stoquastic(instance: &IsingInstance, sign_seed: u64, sign_mode: SignMode) -> Self {
        let mut rng = rng_from(sign_seed, &[]);
        let global: f64 = if rng.gen::<bool>() { 1.0 } else { -1.0 };
        let xx_couplings = instance
            .active_couplings()
            .map(|(a, b, j)| {
                let sign = match sign_mode {
                    SignMode::Global => global,
                    SignMode::PerEdge => {
                        if rng.gen::<bool>() {
                            1.0
                        } else {
                            -1.0
                        }
                    }
                };
                (a, b, sign * j as f64)
            })
            .collect();
        Driver {
            kind: DriverKind::NonStoquastic,
            xx_couplings,
            sign_seed,
            sign_mode,
        }
    }

    /// The global sign used for a [`SignMode::Global`] driver.
    pub fn global_sign(&self) -> Option<f64> {
        (self.sign_mode == SignMode::Global)
            .then(|| self.xx_couplings.first().map(|&(_, _, jt)| jt.signum()))
            .flatten()
    }

    /// All flip terms as `(bits, coefficient)`.
    pub(crate) fn terms(&self, n: usize) -> Vec<(FlipMask, f64)> {
        let mut terms: Vec<(FlipMask, f64)> = (0..n).map(|i| (FlipMask::One(i), -1.0)).collect();
        terms.extend(self.xx_couplings.iter().filter(|t| t.2 != 0.0).map(|&(a, b, jt)| (FlipMask::Two(a, b), jt)));
        terms
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum FlipMask {
    One(usize),
    Two(usize, usize),
}

/// Packed computational-basis state, one bit per spin (set = spin down).
pub(crate) type Packed = Vec<u64>;

pub(crate) struct Packing {
    pub n: usize,
    pub words: usize,
    last_mask: u64,
}

impl Packing {
    pub fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        let rem = n % 64;
        let last_mask = if rem == 0 { u64::MAX } else { (1u64 << rem) - 1 };
        Packing { n, words, last_mask }
    }

    #[inline]
    pub fn flip(&self, state: &mut [u64], bit: usize) {
        state[bit / 64] ^= 1 << (bit % 64);
    }

    pub fn apply(&self, state: &mut [u64], mask: FlipMask) {
        match mask {
            FlipMask::One(i) => self.flip(state, i),
            FlipMask::Two(i, j) => {
                self.flip(state, i);
                self.flip(state, j);
            }
        }
    }

    /// Representative of the `{phi, global flip of phi}` pair: the member
    /// with spin 0 up.
    pub fn canonicalize(&self, state: &mut [u64]) {
        if self.n > 0 && state[0] & 1 == 1 {
            for w in state.iter_mut() {
                *w = !*w;
            }
            if let Some(last) = state.last_mut() {
                *last &= self.last_mask;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateOrigin {
    GroundState,
    ExcitedReachable,
}

/// Basis of the flip-symmetric subspace: each entry stands for
/// `(|phi> + |phi_bar>) / sqrt(2)` with `phi` the pair representative.
///
/// The first `ground_dim` entries are the classical ground-state pairs, in
/// order of first appearance in the solution list.
#[derive(Debug, Clone)]
pub struct SubspaceBasis {
    pub level: u8,
    pub spin_count: usize,
    words: usize,
    states: Vec<u64>,
    pub origin: Vec<StateOrigin>,
    index: HashMap<Packed, usize>,
    pub ground_dim: usize,
    /// For each ground pair, the indices of its two solutions.
    pub pair_solutions: Vec<(usize, usize)>,
}

impl SubspaceBasis {
    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn state(&self, k: usize) -> &[u64] {
        &self.states[k * self.words..(k + 1) * self.words]
    }

    pub fn state_config(&self, k: usize) -> SpinConfig {
        SpinConfig::from_words(self.state(k), self.spin_count)
    }

    pub fn lookup(&self, packed: &[u64]) -> Option<usize> {
        self.index.get(packed).copied()
    }

    fn push(&mut self, packed: Packed, origin: StateOrigin) -> usize {
        let k = self.origin.len();
        self.states.extend_from_slice(&packed);
        self.index.insert(packed, k);
        self.origin.push(origin);
        k
    }
}

pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

/// Symmetric perturbative subspace of order `level` (1 or 2).
///
/// Level 1 holds one vector per ground-state pair. Level 2 adds every
/// non-ground computational state that one driver term connects to some
/// ground state.
pub fn build_subspace(
    instance: &IsingInstance,
    solutions: &SolutionSet,
    driver: &Driver,
    level: u8,
    cap: usize,
) -> Result<SubspaceBasis> {
    if !(1..=2).contains(&level) {
        return Err(Error::input(format!("subspace level {level} not supported (1 or 2)")));
    }
    if instance.has_fields() {
        return Err(Error::input("local fields break the global-flip symmetry the subspace relies on"));
    }
    if solutions.truncated {
        return Err(Error::input("solution set is truncated"));
    }
    if solutions.is_empty() {
        return Err(Error::input("solution set is empty"));
    }
    let n = instance.spin_count();
    if solutions.spin_count() != n {
        return Err(Error::input("solution length does not match instance"));
    }
    let packing = Packing::new(n);
    let mut basis = SubspaceBasis {
        level,
        spin_count: n,
        words: packing.words,
        states: Vec::new(),
        origin: Vec::new(),
        index: HashMap::new(),
        ground_dim: 0,
        pair_solutions: Vec::new(),
    };

    let sol_index = solutions.index();
    for (i, sol) in solutions.solutions.iter().enumerate() {
        let mut packed = pad(sol.to_words(), packing.words);
        packing.canonicalize(&mut packed);
        if basis.lookup(&packed).is_some() {
            continue;
        }
        let partner = sol.global_flip();
        let j = *sol_index.get(&partner.to_words()).ok_or_else(|| {
            Error::Integrity(format!("solution {i} has no global-flip partner in the set"))
        })?;
        basis.push(packed, StateOrigin::GroundState);
        basis.pair_solutions.push((i.min(j), i.max(j)));
    }
    basis.ground_dim = basis.dim();

    if level == 2 {
        let terms = driver.terms(n);
        for g in 0..basis.ground_dim {
            let base: Packed = basis.state(g).to_vec();
            for &(mask, _) in &terms {
                let mut next = base.clone();
                packing.apply(&mut next, mask);
                packing.canonicalize(&mut next);
                if basis.lookup(&next).is_none() {
                    if basis.dim() >= cap {
                        return Err(Error::Resource(format!("subspace dimension exceeds cap {cap}")));
                    }
                    basis.push(next, StateOrigin::ExcitedReachable);
                }
            }
        }
    }
    if basis.dim() > cap {
        return Err(Error::Resource(format!("subspace dimension {} exceeds cap {cap}", basis.dim())));
    }
    Ok(basis)
}

fn pad(mut words: Vec<u64>, len: usize) -> Vec<u64> {
    words.resize(len, 0);
    words
}
