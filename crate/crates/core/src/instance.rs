//! Ising instances with planted solutions built from frustrated loops.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::topology::Graph;

/// A configuration of `N` Ising spins, each `+1` or `-1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(bad) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::input(format!("spin value {bad} is not +1 or -1")));
        }
        Ok(SpinConfig(spins))
    }

    pub fn all_up(n: usize) -> Self {
        SpinConfig(vec![1; n])
    }

    /// Spin `i` is `-1` when bit `i` of `bits` is set. Only for `n <= 64`.
    pub fn from_bits(bits: u64, n: usize) -> Self {
        debug_assert!(n <= 64);
        SpinConfig((0..n).map(|i| if bits >> i & 1 == 1 { -1 } else { 1 }).collect())
    }

    pub fn random(n: usize, rng: &mut Rng) -> Self {
        SpinConfig((0..n).map(|_| if rng.gen::<bool>() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    // Negating entries keeps them in {+1, -1}; only the annealer uses this.
    pub(crate) fn spins_mut(&mut self) -> &mut [i8] {
        &mut self.0
    }

    pub fn get(&self, i: usize) -> i8 {
        self.0[i]
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    pub fn global_flip(&self) -> SpinConfig {
        SpinConfig(self.0.iter().map(|&s| -s).collect())
    }

    /// Bit-packed form (bit set for spin `-1`), usable as a hash key.
    pub fn to_words(&self) -> Vec<u64> {
        let mut words = vec![0u64; self.0.len().div_ceil(64)];
        for (i, &s) in self.0.iter().enumerate() {
            if s < 0 {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        words
    }

    pub fn from_words(words: &[u64], n: usize) -> Self {
        SpinConfig(
            (0..n)
                .map(|i| if words[i / 64] >> (i % 64) & 1 == 1 { -1 } else { 1 })
                .collect(),
        )
    }
}

/// Ising cost function `sum_<ij> J_ij s_i s_j + sum_i h_i s_i` on a graph.
///
/// `couplings[e]` belongs to `graph.edges()[e]`; zero couplings are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsingInstance {
    graph: Graph,
    couplings: Vec<i64>,
    fields: Vec<i64>,
    incident: Vec<Vec<(usize, i64)>>,
}

impl IsingInstance {
    pub fn new(graph: Graph, couplings: Vec<i64>, fields: Vec<i64>) -> Result<Self> {
        if couplings.len() != graph.edge_count() {
            return Err(Error::input(format!(
                "{} couplings for {} edges",
                couplings.len(),
                graph.edge_count()
            )));
        }
        if fields.len() != graph.vertex_count() {
            return Err(Error::input(format!(
                "{} fields for {} vertices",
                fields.len(),
                graph.vertex_count()
            )));
        }
        let mut incident = vec![Vec::new(); graph.vertex_count()];
        for (&(a, b), &j) in graph.edges().iter().zip(&couplings) {
            if j != 0 {
                incident[a].push((b, j));
                incident[b].push((a, j));
            }
        }
        Ok(IsingInstance {
            graph,
            couplings,
            fields,
            incident,
        })
    }

    /// Instance with zero fields.
    pub fn without_fields(graph: Graph, couplings: Vec<i64>) -> Result<Self> {
        let n = graph.vertex_count();
        Self::new(graph, couplings, vec![0; n])
    }

    pub fn zero(graph: Graph) -> Self {
        let m = graph.edge_count();
        Self::without_fields(graph, vec![0; m]).expect("sizes agree")
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn spin_count(&self) -> usize {
        self.graph.vertex_count()
    }

    pub fn couplings(&self) -> &[i64] {
        &self.couplings
    }

    pub fn fields(&self) -> &[i64] {
        &self.fields
    }

    pub fn has_fields(&self) -> bool {
        self.fields.iter().any(|&h| h != 0)
    }

    /// Nonzero couplings incident on `v`, as `(neighbor, J)`.
    pub fn incident(&self, v: usize) -> &[(usize, i64)] {
        &self.incident[v]
    }

    /// Edges with nonzero coupling, as `(i, j, J)`.
    pub fn active_couplings(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        self.graph
            .edges()
            .iter()
            .zip(&self.couplings)
            .filter(|(_, &j)| j != 0)
            .map(|(&(a, b), &j)| (a, b, j))
    }

    pub fn energy(&self, config: &SpinConfig) -> Result<i64> {
        self.check_len(config)?;
        Ok(self.energy_unchecked(config.spins()))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> i64 {
        let pair: i64 = self
            .graph
            .edges()
            .iter()
            .zip(&self.couplings)
            .map(|(&(a, b), &j)| j * i64::from(s[a]) * i64::from(s[b]))
            .sum();
        let field: i64 = self.fields.iter().zip(s).map(|(&h, &si)| h * i64::from(si)).sum();
        pair + field
    }

    /// `energy(config with v flipped) - energy(config)`, from the couplings
    /// incident on `v` only.
    pub fn delta_energy(&self, config: &SpinConfig, v: usize) -> Result<i64> {
        self.check_len(config)?;
        if v >= self.spin_count() {
            return Err(Error::input(format!("vertex {v} out of range")));
        }
        Ok(self.delta_unchecked(config.spins(), v))
    }

    #[inline]
    pub(crate) fn delta_unchecked(&self, s: &[i8], v: usize) -> i64 {
        let local: i64 = self.incident[v]
            .iter()
            .map(|&(w, j)| j * i64::from(s[w]))
            .sum::<i64>()
            + self.fields[v];
        -2 * i64::from(s[v]) * local
    }

    fn check_len(&self, config: &SpinConfig) -> Result<()> {
        if config.len() != self.spin_count() {
            return Err(Error::input(format!(
                "configuration has {} spins, instance has {}",
                config.len(),
                self.spin_count()
            )));
        }
        Ok(())
    }
}

/// One frustration-free local term of a planted Hamiltonian.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalTerm {
    /// Vertices of the term, in loop order for generated terms.
    pub support: Vec<usize>,
    /// `(i, j, J)` with `i < j`, both in `support`.
    pub couplings: Vec<(usize, usize, i64)>,
    pub min_energy: i64,
}

impl LocalTerm {
    /// Energy of the term under a full configuration.
    pub fn energy(&self, s: &[i8]) -> i64 {
        self.couplings
            .iter()
            .map(|&(a, b, j)| j * i64::from(s[a]) * i64::from(s[b]))
            .sum()
    }

    /// Energy when the support spins take `local[k]` for `support[k]`.
    pub fn local_energy(&self, local: &[i8]) -> i64 {
        let pos = |v: usize| self.support.iter().position(|&u| u == v).expect("coupling in support");
        self.couplings
            .iter()
            .map(|&(a, b, j)| j * i64::from(local[pos(a)]) * i64::from(local[pos(b)]))
            .sum()
    }
}

/// An instance assembled from local terms around a known ground state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlantedInstance {
    pub instance: IsingInstance,
    pub terms: Vec<LocalTerm>,
    pub planted: SpinConfig,
    pub ground_energy: i64,
}

/// Parameters for [`generate_planted`].
#[derive(Debug, Clone, Copy)]
pub struct PlantingParams {
    /// Loops per spin; the instance has `ceil(density * N)` loops.
    pub clause_density: f64,
    /// Longest accepted loop.
    pub loop_length_limit: usize,
    /// Random-walk attempts allowed per loop before giving up.
    pub retry_budget: usize,
}

impl Default for PlantingParams {
    fn default() -> Self {
        PlantingParams {
            clause_density: 0.35,
            loop_length_limit: 12,
            retry_budget: 10_000,
        }
    }
}

pub const MIN_LOOP_LENGTH: usize = 4;

/// Generates a planted-solution instance from frustrated loops.
///
/// A uniformly random planted configuration is drawn first. Each loop is a
/// simple cycle closed by a non-backtracking random walk; every loop edge
/// gets `J = -s_i s_j` (satisfied by the planted state) except one random
/// edge whose sign is reversed. Loop couplings are summed edge-wise, so the
/// planted state minimizes every loop and the ground energy is the sum of
/// the loop minima, `2 - L` each.
pub fn generate_planted(graph: &Graph, params: &PlantingParams, rng: &mut Rng) -> Result<PlantedInstance> {
    let n = graph.vertex_count();
    if !(params.clause_density >= 0.0) || !params.clause_density.is_finite() {
        return Err(Error::input(format!("clause density {} is invalid", params.clause_density)));
    }
    if params.loop_length_limit < MIN_LOOP_LENGTH {
        return Err(Error::input(format!(
            "loop length limit {} is below {MIN_LOOP_LENGTH}",
            params.loop_length_limit
        )));
    }
    let loops = (params.clause_density * n as f64 - 1e-9).ceil().max(0.0) as usize;
    let planted = SpinConfig::random(n, rng);
    if loops > 0 && (n < MIN_LOOP_LENGTH || !graph.has_cycle()) {
        return Err(Error::input(format!(
            "graph with {n} vertices and {} edges has no cycle of length {MIN_LOOP_LENGTH}",
            graph.edge_count()
        )));
    }
    let starts: Vec<usize> = (0..n).filter(|&v| graph.degree(v) >= 2).collect();

    let mut couplings = vec![0i64; graph.edge_count()];
    let mut terms = Vec::with_capacity(loops);
    let mut visit = vec![usize::MAX; n];
    let s = planted.spins();
    for t in 0..loops {
        let cycle = (0..params.retry_budget)
            .find_map(|_| random_cycle(graph, &starts, params.loop_length_limit, &mut visit, rng))
            .ok_or_else(|| {
                Error::Generation(format!(
                    "no loop of length {MIN_LOOP_LENGTH}..={} closed after {} walks (term {t})",
                    params.loop_length_limit, params.retry_budget
                ))
            })?;
        let len = cycle.len();
        let frustrated = rng.gen_range(0..len);
        let mut term_couplings = Vec::with_capacity(len);
        for idx in 0..len {
            let (a, b) = (cycle[idx], cycle[(idx + 1) % len]);
            let satisfied = -i64::from(s[a]) * i64::from(s[b]);
            let j = if idx == frustrated { -satisfied } else { satisfied };
            let e = graph.edge_index(a, b).expect("walk follows edges");
            couplings[e] += j;
            term_couplings.push((a.min(b), a.max(b), j));
        }
        terms.push(LocalTerm {
            support: cycle,
            couplings: term_couplings,
            min_energy: 2 - len as i64,
        });
    }

    let ground_energy = terms.iter().map(|t| t.min_energy).sum();
    let instance = IsingInstance::without_fields(graph.clone(), couplings)?;
    debug_assert_eq!(instance.energy_unchecked(s), ground_energy);
    Ok(PlantedInstance {
        instance,
        terms,
        planted,
        ground_energy,
    })
}

/// One non-backtracking walk; returns the first simple cycle it closes if
/// its length is within `MIN_LOOP_LENGTH..=limit`.
fn random_cycle(
    graph: &Graph,
    starts: &[usize],
    limit: usize,
    visit: &mut [usize],
    rng: &mut Rng,
) -> Option<Vec<usize>> {
    let start = *starts.choose(rng)?;
    let mut path = vec![start];
    visit[start] = 0;
    let mut prev = usize::MAX;
    let result = loop {
        let cur = *path.last().expect("nonempty");
        let choices: Vec<usize> = graph.neighbors(cur).iter().copied().filter(|&w| w != prev).collect();
        let Some(&next) = choices.choose(rng) else {
            break None;
        };
        if visit[next] != usize::MAX {
            let cycle = path[visit[next]..].to_vec();
            break (MIN_LOOP_LENGTH..=limit).contains(&cycle.len()).then_some(cycle);
        }
        visit[next] = path.len();
        path.push(next);
        prev = cur;
    };
    for &v in &path {
        visit[v] = usize::MAX;
    }
    result
}
