//! Exact enumeration of all minimizing configurations of a planted instance
//! by bucket elimination over per-term constraints.
//!
//! Every ground state of a frustration-free Hamiltonian minimizes each local
//! term, so the ground-state manifold is the solution set of the constraint
//! system "each term sits at its minimum". Bits are eliminated one at a time:
//! all constraints mentioning the bit are joined and the bit is projected
//! out. The constraints removed at each step are saved so that solutions can
//! be rebuilt by walking the steps backwards.

use std::collections::{BTreeSet, HashMap, HashSet};

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::instance::{PlantedInstance, SpinConfig};
use crate::rng::{rng_from, Rng};

/// Largest term support [`terms_to_constraints`] will exhaust.
pub const MAX_TERM_SUPPORT: usize = 24;

/// A list of allowed `+1/-1` settings for an ordered set of bits.
///
/// Rows are kept sorted and deduplicated. A constraint with no rows is a
/// contradiction; one with no bits and a single (empty) row is trivially
/// satisfied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    bits: Vec<usize>,
    rows: Vec<i8>,
    count: usize,
}

impl Constraint {
    pub fn new(bits: Vec<usize>, rows: Vec<Vec<i8>>) -> Result<Self> {
        let distinct: BTreeSet<_> = bits.iter().collect();
        if distinct.len() != bits.len() {
            return Err(Error::input(format!("repeated bit in constraint {bits:?}")));
        }
        let mut flat = Vec::with_capacity(rows.len() * bits.len());
        for row in &rows {
            if row.len() != bits.len() {
                return Err(Error::input(format!(
                    "setting of length {} for {} bits",
                    row.len(),
                    bits.len()
                )));
            }
            if row.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::input(format!("setting {row:?} has a value other than +1/-1")));
            }
            flat.extend_from_slice(row);
        }
        Ok(Self::canonical(bits, flat, rows.len()))
    }

    fn canonical(bits: Vec<usize>, flat: Vec<i8>, count: usize) -> Self {
        let width = bits.len();
        if width == 0 {
            return Constraint {
                bits,
                rows: Vec::new(),
                count: count.min(1),
            };
        }
        let mut rows: Vec<&[i8]> = flat.chunks_exact(width).collect();
        rows.sort_unstable();
        rows.dedup();
        let count = rows.len();
        Constraint {
            bits,
            rows: rows.concat(),
            count,
        }
    }

    pub fn bits(&self) -> &[usize] {
        &self.bits
    }

    pub fn width(&self) -> usize {
        self.bits.len()
    }

    /// Number of allowed settings.
    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn rows(&self) -> impl Iterator<Item = &[i8]> {
        let width = self.bits.len();
        (0..self.count).map(move |r| &self.rows[r * width..(r + 1) * width])
    }

    pub fn contains(&self, bit: usize) -> bool {
        self.bits.contains(&bit)
    }

    pub fn position(&self, bit: usize) -> Option<usize> {
        self.bits.iter().position(|&b| b == bit)
    }

    /// Whether `setting` (indexed by bit number) matches some row.
    pub fn allows(&self, setting: &[i8]) -> bool {
        let key: Vec<i8> = self.bits.iter().map(|&b| setting[b]).collect();
        self.rows().any(|r| r == key.as_slice())
    }
}

/// Joins two constraints: one row for each pair of rows that agree on every
/// shared bit. Bits are `a.bits` followed by the bits only `b` has.
fn join(a: &Constraint, b: &Constraint, row_cap: usize) -> Result<Constraint> {
    let shared: Vec<(usize, usize)> = a
        .bits
        .iter()
        .enumerate()
        .filter_map(|(ia, bit)| b.position(*bit).map(|ib| (ia, ib)))
        .collect();
    let extra: Vec<usize> = (0..b.width()).filter(|&ib| !a.contains(b.bits[ib])).collect();
    let mut bits = a.bits.clone();
    bits.extend(extra.iter().map(|&ib| b.bits[ib]));

    let mut index: HashMap<Vec<i8>, Vec<usize>> = HashMap::new();
    for (r, row) in b.rows().enumerate() {
        index.entry(shared.iter().map(|&(_, ib)| row[ib]).collect()).or_default().push(r);
    }
    let b_rows: Vec<&[i8]> = b.rows().collect();
    let mut flat = Vec::new();
    let mut count = 0usize;
    for row in a.rows() {
        let key: Vec<i8> = shared.iter().map(|&(ia, _)| row[ia]).collect();
        if let Some(matches) = index.get(&key) {
            for &r in matches {
                count += 1;
                if count > row_cap {
                    return Err(Error::Resource(format!(
                        "intermediate table exceeds {row_cap} rows"
                    )));
                }
                flat.extend_from_slice(row);
                flat.extend(extra.iter().map(|&ib| b_rows[r][ib]));
            }
        }
    }
    Ok(Constraint::canonical(bits, flat, count))
}

/// Drops `bit` from a constraint, merging rows that then coincide.
fn project_out(c: &Constraint, bit: usize) -> ProjectResult {
    let pos = c.position(bit).expect("projected bit is present");
    let n_rows = c.len();
    let bits: Vec<usize> = c.bits.iter().copied().filter(|&b| b != bit).collect();
    if bits.is_empty() {
        return if n_rows > 0 {
            ProjectResult::Satisfied
        } else {
            ProjectResult::Contradiction
        };
    }
    let mut flat = Vec::with_capacity(n_rows * bits.len());
    for row in c.rows() {
        flat.extend(row.iter().enumerate().filter(|&(i, _)| i != pos).map(|(_, &v)| v));
    }
    let out = Constraint::canonical(bits, flat, n_rows);
    if out.is_empty() {
        ProjectResult::Contradiction
    } else {
        ProjectResult::Constraint(out)
    }
}

enum ProjectResult {
    Constraint(Constraint),
    Satisfied,
    Contradiction,
}

/// Combines two constraints that both contain `eliminate`: rows agreeing on
/// every shared bit (including `eliminate`) are merged and `eliminate` is
/// dropped. An empty result means the pair is contradictory.
pub fn combine(c1: &Constraint, c2: &Constraint, eliminate: usize) -> Result<Constraint> {
    if !c1.contains(eliminate) || !c2.contains(eliminate) {
        return Err(Error::input(format!("bit {eliminate} is not in both constraints")));
    }
    let joined = join(c1, c2, usize::MAX)?;
    Ok(match project_out(&joined, eliminate) {
        ProjectResult::Constraint(c) => c,
        ProjectResult::Satisfied => Constraint::canonical(vec![], vec![], 1),
        ProjectResult::Contradiction => {
            let bits = joined.bits.into_iter().filter(|&b| b != eliminate).collect();
            Constraint::canonical(bits, vec![], 0)
        }
    })
}

/// One constraint per term, listing exactly the term's minimizing settings
/// over its support (found by exhausting all `2^|support|` assignments).
pub fn terms_to_constraints(planted: &PlantedInstance) -> Result<Vec<Constraint>> {
    planted
        .terms
        .iter()
        .enumerate()
        .map(|(t, term)| {
            let k = term.support.len();
            if k > MAX_TERM_SUPPORT {
                return Err(Error::input(format!(
                    "term {t} has support {k}, above the exhaustible limit {MAX_TERM_SUPPORT}"
                )));
            }
            let mut best = i64::MAX;
            let mut rows = Vec::new();
            for bits in 0..1u64 << k {
                let local = SpinConfig::from_bits(bits, k);
                let e = term.local_energy(local.spins());
                if e < best {
                    best = e;
                    rows.clear();
                }
                if e == best {
                    rows.push(local.spins().to_vec());
                }
            }
            if best != term.min_energy {
                return Err(Error::Integrity(format!(
                    "term {t} records minimum {} but exhaustion finds {best}",
                    term.min_energy
                )));
            }
            Constraint::new(term.support.clone(), rows)
        })
        .collect()
}

/// Bit-selection scores. Each is a function of the would-be combined
/// constraints: `u` distinct bits, `m` largest row count, `s` total rows.
/// The lowest score wins.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heuristic {
    UniqueBits,
    MaxRows,
    SumRows,
    UniqueTimesMax,
    UniqueTimesSum,
    MaxPlusSum,
}

impl Heuristic {
    pub const ALL: [Heuristic; 6] = [
        Heuristic::UniqueBits,
        Heuristic::MaxRows,
        Heuristic::SumRows,
        Heuristic::UniqueTimesMax,
        Heuristic::UniqueTimesSum,
        Heuristic::MaxPlusSum,
    ];

    pub fn score(self, u: u128, m: u128, s: u128) -> u128 {
        match self {
            Heuristic::UniqueBits => u,
            Heuristic::MaxRows => m,
            Heuristic::SumRows => s,
            Heuristic::UniqueTimesMax => u * m,
            Heuristic::UniqueTimesSum => u * s,
            Heuristic::MaxPlusSum => m + s,
        }
    }
}

#[derive(Debug, Clone)]
pub struct EliminationConfig {
    /// Largest intermediate table allowed before the attempt is abandoned.
    pub cap_table_size: usize,
    /// Reseeded attempts before an instance is declared infeasible.
    pub max_attempts: usize,
    pub heuristics: Vec<Heuristic>,
}

impl Default for EliminationConfig {
    fn default() -> Self {
        EliminationConfig {
            cap_table_size: 1 << 22,
            max_attempts: 20,
            heuristics: Heuristic::ALL.to_vec(),
        }
    }
}

/// The live constraint pool during elimination.
#[derive(Debug, Clone)]
pub struct EliminationState {
    pool: Vec<Option<Constraint>>,
    by_bit: HashMap<usize, Vec<usize>>,
    remaining: BTreeSet<usize>,
}

impl EliminationState {
    pub fn new(constraints: Vec<Constraint>) -> Self {
        let mut state = EliminationState {
            pool: Vec::new(),
            by_bit: HashMap::new(),
            remaining: BTreeSet::new(),
        };
        for c in constraints {
            state.insert(c);
        }
        state
    }

    fn insert(&mut self, c: Constraint) {
        let slot = self.pool.len();
        for &b in c.bits() {
            self.by_bit.entry(b).or_default().push(slot);
            self.remaining.insert(b);
        }
        self.pool.push(Some(c));
    }

    fn take_containing(&mut self, bit: usize) -> Vec<Constraint> {
        let slots = self.by_bit.remove(&bit).unwrap_or_default();
        let taken: Vec<Constraint> = slots.iter().filter_map(|&s| self.pool[s].take()).collect();
        for c in &taken {
            for &b in c.bits() {
                if b != bit {
                    if let Some(list) = self.by_bit.get_mut(&b) {
                        list.retain(|s| !slots.contains(s));
                    }
                }
            }
        }
        self.remaining.remove(&bit);
        taken
    }

    pub fn remaining_bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.remaining.iter().copied()
    }

    /// `(u, m, s)` for eliminating `bit` now.
    pub fn bucket_stats(&self, bit: usize) -> (u128, u128, u128) {
        let mut unique = HashSet::new();
        let (mut m, mut s) = (0u128, 0u128);
        for &slot in self.by_bit.get(&bit).map(Vec::as_slice).unwrap_or(&[]) {
            if let Some(c) = &self.pool[slot] {
                unique.extend(c.bits().iter().copied());
                let rows = c.len() as u128;
                m = m.max(rows);
                s += rows;
            }
        }
        (unique.len() as u128, m, s)
    }
}

/// Chooses the next bit: one heuristic from `heuristics` is drawn at random
/// and the remaining bit with the lowest score under it is returned (ties go
/// to the lowest bit index).
pub fn pick_next_bit(state: &EliminationState, heuristics: &[Heuristic], rng: &mut Rng) -> Option<usize> {
    let h = heuristics[rng.gen_range(0..heuristics.len())];
    state.remaining_bits().min_by_key(|&b| {
        let (u, m, s) = state.bucket_stats(b);
        (h.score(u, m, s), b)
    })
}

/// Everything needed to rebuild the solutions of a successful elimination.
#[derive(Debug, Clone)]
pub struct EliminationRecord {
    pub n_vars: usize,
    /// Bits in elimination order.
    pub order: Vec<usize>,
    /// Constraints removed from the pool when `order[i]` was eliminated.
    pub saved_tables: Vec<Vec<Constraint>>,
    /// Bits that appear in no constraint.
    pub free_bits: Vec<usize>,
}

#[derive(Debug, Clone)]
pub enum Elimination {
    Solved(EliminationRecord),
    Contradiction { at_bit: usize },
}

/// Runs bucket elimination to completion over bits `0..n_vars`.
pub fn eliminate_all(
    n_vars: usize,
    constraints: Vec<Constraint>,
    config: &EliminationConfig,
    rng: &mut Rng,
) -> Result<Elimination> {
    if config.heuristics.is_empty() {
        return Err(Error::input("no elimination heuristics configured"));
    }
    if let Some(bad) = constraints.iter().flat_map(|c| c.bits()).find(|&&b| b >= n_vars) {
        return Err(Error::input(format!("constraint bit {bad} out of range for {n_vars} variables")));
    }
    if let Some(c) = constraints.iter().find(|c| c.is_empty()) {
        return Ok(Elimination::Contradiction {
            at_bit: c.bits().first().copied().unwrap_or(0),
        });
    }
    let mut state = EliminationState::new(constraints);
    let free_bits = (0..n_vars).filter(|b| !state.remaining.contains(b)).collect();
    let mut order = Vec::new();
    let mut saved_tables = Vec::new();

    while let Some(bit) = pick_next_bit(&state, &config.heuristics, rng) {
        let bucket = state.take_containing(bit);
        let mut iter = bucket.iter();
        let first = iter.next().expect("remaining bits belong to some constraint");
        let mut joined = first.clone();
        for c in iter {
            joined = join(&joined, c, config.cap_table_size)?;
            if joined.is_empty() {
                return Ok(Elimination::Contradiction { at_bit: bit });
            }
        }
        if joined.len() > config.cap_table_size {
            return Err(Error::Resource(format!(
                "table for bit {bit} exceeds {} rows",
                config.cap_table_size
            )));
        }
        match project_out(&joined, bit) {
            ProjectResult::Contradiction => return Ok(Elimination::Contradiction { at_bit: bit }),
            ProjectResult::Satisfied => {}
            ProjectResult::Constraint(c) => state.insert(c),
        }
        order.push(bit);
        saved_tables.push(bucket);
    }
    Ok(Elimination::Solved(EliminationRecord {
        n_vars,
        order,
        saved_tables,
        free_bits,
    }))
}

/// Solutions rebuilt from an elimination record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumerated {
    pub solutions: Vec<SpinConfig>,
    pub truncated: bool,
}

/// Walks the saved tables backwards, extending each partial assignment by
/// every value of the step's bit consistent with all of the step's saved
/// constraints, then doubles over free bits. If the partial list ever grows
/// beyond `cap` it is cut back to `cap` and the result flagged truncated.
pub fn enumerate_solutions(record: &EliminationRecord, cap: usize) -> Enumerated {
    let n = record.n_vars;
    let mut partial: Vec<Vec<i8>> = vec![vec![0; n]];
    let mut truncated = false;
    let mut clip = |partial: &mut Vec<Vec<i8>>| {
        if partial.len() > cap {
            partial.truncate(cap);
            truncated = true;
        }
    };

    for (bit, tables) in record.order.iter().zip(&record.saved_tables).rev() {
        let lookups: Vec<(Vec<usize>, HashSet<&[i8]>)> = tables
            .iter()
            .map(|c| (c.bits().to_vec(), c.rows().collect()))
            .collect();
        let mut next = Vec::with_capacity(partial.len() * 2);
        for assignment in &partial {
            for value in [-1i8, 1] {
                let mut candidate = assignment.clone();
                candidate[*bit] = value;
                let ok = lookups.iter().all(|(bits, rows)| {
                    let key: Vec<i8> = bits.iter().map(|&b| candidate[b]).collect();
                    debug_assert!(key.iter().all(|&v| v != 0), "later bits are assigned");
                    rows.contains(key.as_slice())
                });
                if ok {
                    next.push(candidate);
                }
            }
        }
        partial = next;
        clip(&mut partial);
    }
    for &bit in &record.free_bits {
        let mut next = Vec::with_capacity(partial.len() * 2);
        for assignment in &partial {
            for value in [-1i8, 1] {
                let mut candidate = assignment.clone();
                candidate[bit] = value;
                next.push(candidate);
            }
        }
        partial = next;
        clip(&mut partial);
    }
    let mut solutions: Vec<SpinConfig> = partial
        .into_iter()
        .map(|s| SpinConfig::new(s).expect("all bits assigned"))
        .collect();
    solutions.sort();
    Enumerated { solutions, truncated }
}

/// The full (or truncated) ground-state manifold of an instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionSet {
    pub instance_id: String,
    pub ground_energy: i64,
    /// Sorted lexicographically (spin `-1` before `+1`).
    pub solutions: Vec<SpinConfig>,
    pub truncated: bool,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.solutions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.solutions.is_empty()
    }

    pub fn spin_count(&self) -> usize {
        self.solutions.first().map_or(0, SpinConfig::len)
    }

    /// Map from packed configuration to solution index.
    pub fn index(&self) -> HashMap<Vec<u64>, usize> {
        self.solutions.iter().enumerate().map(|(i, s)| (s.to_words(), i)).collect()
    }

    /// Index of each solution's global flip, if present.
    pub fn flip_partners(&self) -> Vec<Option<usize>> {
        let index = self.index();
        self.solutions
            .iter()
            .map(|s| index.get(&s.global_flip().to_words()).copied())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct EnumerateConfig {
    pub elimination: EliminationConfig,
    /// Solutions kept before the set is flagged truncated.
    pub cap: usize,
}

impl Default for EnumerateConfig {
    fn default() -> Self {
        EnumerateConfig {
            elimination: EliminationConfig::default(),
            cap: 500,
        }
    }
}

/// Enumerates the ground states of a planted instance, reseeding the
/// elimination order on resource failures. Each solution is checked to sit
/// at the planted ground energy.
pub fn solve_planted(
    planted: &PlantedInstance,
    instance_id: &str,
    config: &EnumerateConfig,
    seed: u64,
) -> Result<SolutionSet> {
    let constraints = terms_to_constraints(planted)?;
    let n = planted.instance.spin_count();
    let mut last_err = None;
    for attempt in 0..config.elimination.max_attempts.max(1) {
        let mut rng = rng_from(seed, &[attempt as u64]);
        match eliminate_all(n, constraints.clone(), &config.elimination, &mut rng) {
            Ok(Elimination::Solved(record)) => {
                let Enumerated { solutions, truncated } = enumerate_solutions(&record, config.cap);
                for s in &solutions {
                    let e = planted.instance.energy(s)?;
                    if e != planted.ground_energy {
                        return Err(Error::Integrity(format!(
                            "enumerated configuration has energy {e}, expected {}",
                            planted.ground_energy
                        )));
                    }
                }
                return Ok(SolutionSet {
                    instance_id: instance_id.to_string(),
                    ground_energy: planted.ground_energy,
                    solutions,
                    truncated,
                });
            }
            Ok(Elimination::Contradiction { at_bit }) => {
                return Err(Error::Integrity(format!(
                    "planted constraints contradict at bit {at_bit}"
                )))
            }
            Err(e @ Error::Resource(_)) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Resource(format!(
        "instance {instance_id} infeasible after {} attempts: {}",
        config.elimination.max_attempts,
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{generate_planted, IsingInstance, LocalTerm, PlantingParams};
    use crate::rng::rng_from;
    use crate::topology::{build_chimera, ChimeraSpec, Graph};
    use proptest::prelude::*;

    fn c(bits: &[usize], rows: &[&[i8]]) -> Constraint {
        Constraint::new(bits.to_vec(), rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    fn row_set(c: &Constraint) -> BTreeSet<Vec<i8>> {
        c.rows().map(<[i8]>::to_vec).collect()
    }

    #[test]
    fn worked_pair_reduces_to_single_row() {
        let c1 = c(&[1, 2, 3], &[&[-1, -1, -1], &[1, 1, -1]]);
        let c2 = c(&[1, 2, 4], &[&[-1, -1, -1], &[1, -1, -1]]);
        let out = combine(&c1, &c2, 1).unwrap();
        assert_eq!(out.bits(), &[2, 3, 4]);
        assert_eq!(row_set(&out), BTreeSet::from([vec![-1, -1, -1]]));
    }

    #[test]
    fn self_combination_is_projection() {
        let c1 = c(&[0, 1, 2], &[&[1, 1, -1], &[-1, 1, -1], &[1, -1, 1]]);
        let out = combine(&c1, &c1, 0).unwrap();
        assert_eq!(out.bits(), &[1, 2]);
        assert_eq!(row_set(&out), BTreeSet::from([vec![1, -1], vec![-1, 1]]));
    }

    #[test]
    fn combine_requires_shared_bit() {
        let c1 = c(&[0, 1], &[&[1, 1]]);
        let c2 = c(&[1, 2], &[&[1, 1]]);
        assert!(combine(&c1, &c2, 0).is_err());
    }

    #[test]
    fn contradiction_is_empty() {
        let c1 = c(&[0, 1], &[&[1, 1]]);
        let c2 = c(&[0, 1], &[&[-1, 1]]);
        let out = combine(&c1, &c2, 0).unwrap();
        assert!(out.is_empty());
    }

    #[test]
    fn rejects_malformed_constraints() {
        assert!(Constraint::new(vec![0, 0], vec![vec![1, 1]]).is_err());
        assert!(Constraint::new(vec![0, 1], vec![vec![1]]).is_err());
        assert!(Constraint::new(vec![0], vec![vec![0]]).is_err());
    }

    #[test]
    fn duplicate_rows_collapse() {
        let c1 = c(&[3, 4], &[&[1, -1], &[1, -1], &[-1, 1]]);
        assert_eq!(c1.len(), 2);
    }

    #[test]
    fn six_bit_loop_has_twelve_settings() {
        // Six-spin frustrated loop: 6 edges, one broken per ground state,
        // times the global flip.
        let g = Graph::new(6, (0..6).map(|i| (i, (i + 1) % 6))).unwrap();
        let mut js = vec![-1i64; 6];
        js[0] = 1;
        let support: Vec<usize> = (0..6).collect();
        let couplings = g.edges().iter().zip(&js).map(|(&(a, b), &j)| (a, b, j)).collect();
        let instance = IsingInstance::without_fields(g, js.clone()).unwrap();
        let planted = PlantedInstance {
            instance,
            terms: vec![LocalTerm {
                support,
                couplings,
                min_energy: -4,
            }],
            planted: SpinConfig::new(vec![1, -1, -1, -1, -1, -1]).unwrap(),
            ground_energy: -4,
        };
        let cons = terms_to_constraints(&planted).unwrap();
        assert_eq!(cons[0].len(), 12);
    }

    #[test]
    fn zero_coupling_term_allows_everything() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let planted = PlantedInstance {
            instance: IsingInstance::zero(g),
            terms: vec![LocalTerm {
                support: vec![0, 1],
                couplings: vec![(0, 1, 0)],
                min_energy: 0,
            }],
            planted: SpinConfig::all_up(2),
            ground_energy: 0,
        };
        assert_eq!(terms_to_constraints(&planted).unwrap()[0].len(), 4);
    }

    #[test]
    fn single_bit_single_constraint() {
        let cons = vec![c(&[0], &[&[1], &[-1]])];
        let Elimination::Solved(rec) = eliminate_all(1, cons, &EliminationConfig::default(), &mut rng_from(0, &[])).unwrap() else {
            panic!("satisfiable")
        };
        assert_eq!(rec.order, vec![0]);
        assert_eq!(rec.saved_tables.len(), 1);
        assert_eq!(enumerate_solutions(&rec, 10).solutions.len(), 2);
    }

    #[test]
    fn ferromagnet_pair() {
        let cons = vec![c(&[0, 1], &[&[1, 1], &[-1, -1]])];
        let Elimination::Solved(rec) = eliminate_all(2, cons, &EliminationConfig::default(), &mut rng_from(4, &[])).unwrap() else {
            panic!()
        };
        let out = enumerate_solutions(&rec, 10);
        assert!(!out.truncated);
        assert_eq!(
            out.solutions,
            vec![SpinConfig::new(vec![-1, -1]).unwrap(), SpinConfig::new(vec![1, 1]).unwrap()]
        );
    }

    #[test]
    fn last_bit_is_forced_pick() {
        let state = EliminationState::new(vec![c(&[5], &[&[1]])]);
        for seed in 0..10 {
            assert_eq!(pick_next_bit(&state, &Heuristic::ALL, &mut rng_from(seed, &[])), Some(5));
        }
    }

    #[test]
    fn unsatisfiable_system_reports_contradiction() {
        let cons = vec![c(&[0, 1], &[&[1, 1]]), c(&[1, 2], &[&[-1, 1]])];
        let out = eliminate_all(3, cons, &EliminationConfig::default(), &mut rng_from(0, &[])).unwrap();
        assert!(matches!(out, Elimination::Contradiction { .. }));
    }

    #[test]
    fn table_cap_is_resource_error() {
        // Two 2-row constraints on disjoint bits sharing one pivot produce 4 rows.
        let cons = vec![
            c(&[0, 1, 2], &[&[1, 1, 1], &[1, -1, -1], &[1, 1, -1], &[1, -1, 1]]),
            c(&[0, 3, 4], &[&[1, 1, 1], &[1, -1, -1], &[1, 1, -1], &[1, -1, 1]]),
        ];
        let config = EliminationConfig {
            cap_table_size: 3,
            ..Default::default()
        };
        let err = eliminate_all(5, cons, &config, &mut rng_from(0, &[])).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    #[test]
    fn free_bits_double_count_and_truncate() {
        let rec = EliminationRecord {
            n_vars: 10,
            order: vec![],
            saved_tables: vec![],
            free_bits: (0..10).collect(),
        };
        assert_eq!(enumerate_solutions(&rec, 2000).solutions.len(), 1024);
        let capped = enumerate_solutions(&rec, 500);
        assert!(capped.truncated);
        assert_eq!(capped.solutions.len(), 500);
    }

    #[test]
    fn truncated_flag_on_planted_instance() {
        let g = build_chimera(&ChimeraSpec::new(2, 2, 4)).unwrap();
        let params = PlantingParams {
            clause_density: 0.05,
            ..Default::default()
        };
        let p = generate_planted(&g, &params, &mut rng_from(2, &[])).unwrap();
        let full = solve_planted(&p, "x", &EnumerateConfig { cap: 1 << 20, ..Default::default() }, 0).unwrap();
        assert!(full.len() > 8);
        let cut = solve_planted(&p, "x", &EnumerateConfig { cap: 8, ..Default::default() }, 0).unwrap();
        assert!(cut.truncated);
        assert_eq!(cut.len(), 8);
    }

    fn brute_join(c1: &Constraint, c2: &Constraint, elim: usize) -> BTreeSet<Vec<i8>> {
        let mut union: Vec<usize> = c1.bits().to_vec();
        for &b in c2.bits() {
            if !union.contains(&b) {
                union.push(b);
            }
        }
        let max_bit = *union.iter().max().unwrap();
        let mut out = BTreeSet::new();
        for mask in 0..1u64 << union.len() {
            let mut setting = vec![0i8; max_bit + 1];
            for (k, &b) in union.iter().enumerate() {
                setting[b] = if mask >> k & 1 == 1 { -1 } else { 1 };
            }
            if c1.allows(&setting) && c2.allows(&setting) {
                out.insert(union.iter().filter(|&&b| b != elim).map(|&b| setting[b]).collect());
            }
        }
        out
    }

    fn arb_constraint(bits: Vec<usize>) -> impl Strategy<Value = Constraint> {
        let w = bits.len();
        proptest::collection::vec(proptest::collection::vec(prop_oneof![Just(1i8), Just(-1i8)], w), 1..12)
            .prop_map(move |rows| Constraint::new(bits.clone(), rows).unwrap())
    }

    proptest! {
        #[test]
        fn combine_matches_brute_join(
            (c1, c2) in (arb_constraint(vec![0, 1, 2, 3]), arb_constraint(vec![2, 4, 0, 5]))
        ) {
            let out = combine(&c1, &c2, 0).unwrap();
            prop_assert_eq!(row_set(&out), brute_join(&c1, &c2, 0));
        }

        #[test]
        fn combine_commutes(
            (c1, c2) in (arb_constraint(vec![0, 1, 2]), arb_constraint(vec![1, 0, 3]))
        ) {
            let ab = combine(&c1, &c2, 1).unwrap();
            let ba = combine(&c2, &c1, 1).unwrap();
            let reorder = |c: &Constraint| -> BTreeSet<Vec<(usize, i8)>> {
                c.rows().map(|r| {
                    let mut v: Vec<(usize, i8)> = c.bits().iter().copied().zip(r.iter().copied()).collect();
                    v.sort();
                    v
                }).collect()
            };
            prop_assert_eq!(reorder(&ab), reorder(&ba));
        }

        #[test]
        fn seeds_agree_on_solution_set(seed in 0u64..200) {
            let g = build_chimera(&ChimeraSpec::new(1, 2, 4)).unwrap();
            let p = generate_planted(&g, &PlantingParams { clause_density: 0.4, loop_length_limit: 8, ..Default::default() },
                &mut rng_from(seed, &[])).unwrap();
            let cfg = EnumerateConfig { cap: 1 << 16, ..Default::default() };
            let a = solve_planted(&p, "i", &cfg, 1).unwrap();
            let b = solve_planted(&p, "i", &cfg, 2).unwrap();
            prop_assert_eq!(&a.solutions, &b.solutions);
            // closed under global flip
            prop_assert!(a.flip_partners().iter().all(Option::is_some));
        }
    }
}
