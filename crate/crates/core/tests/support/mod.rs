//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use gsdlab::enumerate::{solve_planted, EnumerateConfig, SolutionSet};
use gsdlab::instance::{generate_planted, IsingInstance, PlantedInstance, PlantingParams, SpinConfig};
use gsdlab::quantum::Driver;
use gsdlab::rng::rng_from;
use gsdlab::topology::{build_chimera, ChimeraSpec, Graph};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::SliceRandom;

/// All minimizing configurations by Gray-code walk, with local fields
/// maintained incrementally from the raw edge list.
pub fn brute_force_ground(inst: &IsingInstance) -> (i64, Vec<SpinConfig>) {
    let n = inst.spin_count();
    assert!(n <= 30);
    let mut adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
    for (&(a, b), &j) in inst.graph().edges().iter().zip(inst.couplings()) {
        adj[a].push((b, j));
        adj[b].push((a, j));
    }
    let h = inst.fields();
    let mut s = vec![1i64; n];
    let mut e: i64 = inst.graph().edges().iter().zip(inst.couplings()).map(|(_, &j)| j).sum::<i64>() + h.iter().sum::<i64>();
    let mut best = e;
    let mut hits: Vec<u64> = vec![0];
    for step in 1u64..(1u64 << n) {
        let v = step.trailing_zeros() as usize;
        let local: i64 = adj[v].iter().map(|&(w, j)| j * s[w]).sum::<i64>() + h[v];
        e -= 2 * s[v] * local;
        s[v] = -s[v];
        let gray = step ^ (step >> 1);
        if e < best {
            best = e;
            hits.clear();
        }
        if e == best {
            hits.push(gray);
        }
    }
    let mut sols: Vec<SpinConfig> = hits.into_iter().map(|b| SpinConfig::from_bits(b, n)).collect();
    sols.sort_by(|a, b| a.spins().cmp(b.spins()));
    (best, sols)
}

pub fn bits_of(c: &SpinConfig) -> u64 {
    c.spins().iter().enumerate().filter(|(_, &s)| s < 0).map(|(i, _)| 1u64 << i).sum()
}

/// Full-space matrix element `<x| H_d |y>` from the operator definition.
pub fn driver_element(driver: &Driver, n: usize, x: u64, y: u64) -> f64 {
    let diff = x ^ y;
    let mut v = 0.0;
    if diff.count_ones() == 1 {
        v -= 1.0;
    }
    for &(a, b, jt) in &driver.xx_couplings {
        if diff == (1 << a) | (1 << b) {
            v += jt;
        }
    }
    let _ = n;
    v
}

/// Symmetric sector spanned by `(|b> + |~b>)/sqrt(2)` with bit 0 of `b`
/// clear. Returns the representatives and the matrices of `H_d` and `H_p`.
pub struct SymmetricSector {
    pub reps: Vec<u64>,
    pub driver: DMatrix<f64>,
    pub energy: Vec<f64>,
}

pub fn symmetric_sector(inst: &IsingInstance, driver: &Driver) -> SymmetricSector {
    let n = inst.spin_count();
    let full = (1u64 << n) - 1;
    let reps: Vec<u64> = (0..(1u64 << n)).filter(|b| b & 1 == 0).collect();
    let m = reps.len();
    let mut d = DMatrix::zeros(m, m);
    for (i, &a) in reps.iter().enumerate() {
        for (j, &b) in reps.iter().enumerate() {
            // <a_s|H|b_s> = H[a,b] + H[a,~b] for a flip-invariant H.
            d[(i, j)] = driver_element(driver, n, a, b) + driver_element(driver, n, a, b ^ full);
        }
    }
    let energy = reps
        .iter()
        .map(|&b| inst.energy(&SpinConfig::from_bits(b, n)).unwrap() as f64)
        .collect();
    SymmetricSector { reps, driver: d, energy }
}

/// Ground-pair probabilities of the lowest eigenvector, spread over the
/// solution list.
pub fn spread(sector: &SymmetricSector, sols: &[SpinConfig], weight_of_rep: impl Fn(usize) -> f64) -> Vec<f64> {
    let n = sols[0].len();
    let full = (1u64 << n) - 1;
    let mut total = 0.0;
    let mut raw = vec![0.0; sols.len()];
    for (i, s) in sols.iter().enumerate() {
        let b = bits_of(s);
        let rep = if b & 1 == 0 { b } else { b ^ full };
        let k = sector.reps.binary_search(&rep).unwrap();
        raw[i] = weight_of_rep(k);
        total += raw[i];
    }
    raw.iter().map(|w| w / total).collect()
}

fn lowest(m: &DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = SymmetricEigen::new(m.clone());
    let k = eig.eigenvalues.imin();
    (eig.eigenvalues[k], eig.eigenvectors.column(k).into_owned())
}

/// Dense diagonalization of `H(s)/(1-s)` in the symmetric sector, with the
/// gap above the lowest level. The weights are only as good as
/// `eps * |H| / gap` allows.
pub fn dense_gsd(sector: &SymmetricSector, sols: &[SpinConfig], s: f64) -> (Vec<f64>, f64) {
    let e0 = sector.energy.iter().copied().fold(f64::INFINITY, f64::min);
    let mu = s / (1.0 - s);
    let mut k = sector.driver.clone();
    for (i, e) in sector.energy.iter().enumerate() {
        k[(i, i)] += mu * (e - e0);
    }
    let eig = SymmetricEigen::new(k);
    let mut levels: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    levels.sort_by(f64::total_cmp);
    let v = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
    (spread(sector, sols, |k| v[k] * v[k]), levels[1] - levels[0])
}

/// Exact ground-pair weights of `H(s)` by partitioning the symmetric sector
/// into ground pairs `G` and the rest `Q`:
/// `K_eff(k) = D_GG - D_GQ (D_QQ + mu Delta_Q - k)^-1 D_QG`, `mu = s/(1-s)`,
/// iterated to self-consistency in `k`. Working in `K = H/(1-s)` units with
/// the ground block eliminated keeps the tiny splittings near `s = 1`
/// resolvable, which plain dense diagonalization is not. Valid only while
/// `k` stays below the spectrum of the `Q` block, i.e. close to `s = 1`.
pub fn feshbach_gsd(sector: &SymmetricSector, sols: &[SpinConfig], s: f64) -> Vec<f64> {
    let e0 = sector.energy.iter().copied().fold(f64::INFINITY, f64::min);
    let g: Vec<usize> = (0..sector.reps.len()).filter(|&i| sector.energy[i] == e0).collect();
    let q: Vec<usize> = (0..sector.reps.len()).filter(|&i| sector.energy[i] != e0).collect();
    let mu = s / (1.0 - s);
    let dgg = DMatrix::from_fn(g.len(), g.len(), |a, b| sector.driver[(g[a], g[b])]);
    let dqg = DMatrix::from_fn(q.len(), g.len(), |a, b| sector.driver[(q[a], g[b])]);
    let mut kappa = lowest(&dgg).0;
    let mut vec = DVector::zeros(g.len());
    for _ in 0..50 {
        let m = DMatrix::from_fn(q.len(), q.len(), |a, b| {
            let base = sector.driver[(q[a], q[b])];
            if a == b {
                base + mu * (sector.energy[q[a]] - e0) - kappa
            } else {
                base
            }
        });
        let solved = m.lu().solve(&dqg).expect("singular Q block");
        let keff = &dgg - dqg.transpose() * solved;
        let keff = (&keff + keff.transpose()) * 0.5;
        let (next, v) = lowest(&keff);
        vec = v;
        let done = (next - kappa).abs() <= 1e-15 * next.abs().max(1.0);
        kappa = next;
        if done {
            break;
        }
    }
    let mut weight = vec![0.0; sector.reps.len()];
    for (a, &i) in g.iter().enumerate() {
        weight[i] = vec[a] * vec[a];
    }
    spread(sector, sols, |k| weight[k])
}

pub fn total_variation(p: &[f64], q: &[f64]) -> f64 {
    0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>()
}

/// Small planted instance on a random induced subgraph of a two-cell
/// Chimera, with its brute-force solution set.
pub fn small_planted(n: usize, density: f64, seed: u64) -> Option<(PlantedInstance, SolutionSet)> {
    let chimera = build_chimera(&ChimeraSpec::new(1, 2, 4)).unwrap();
    let mut rng = rng_from(seed, &[0]);
    let mut order: Vec<usize> = (0..chimera.vertex_count()).collect();
    order.shuffle(&mut rng);
    let graph: Graph = chimera.remove_vertices(&order[n..]).ok()?;
    if !graph.has_cycle() || graph.component_count() != 1 {
        return None;
    }
    let params = PlantingParams {
        clause_density: density,
        ..PlantingParams::default()
    };
    let planted = generate_planted(&graph, &params, &mut rng).ok()?;
    let sols = solve_planted(&planted, &format!("small-{seed}"), &EnumerateConfig::default(), seed).ok()?;
    Some((planted, sols))
}
