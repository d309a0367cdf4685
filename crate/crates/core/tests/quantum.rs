mod support;

use std::collections::BTreeSet;

use gsdlab::enumerate::SolutionSet;
use gsdlab::instance::{IsingInstance, SpinConfig};
use gsdlab::quantum::{
    build_subspace, detect_degeneracy, minimize_rayleigh, quantum_gsd, random_vector, restrict_hamiltonian, Driver,
    Limit, QgsConfig, RayleighOptions, ResidualNorm, SignMode, StateOrigin, DEFAULT_BASIS_CAP,
};
use gsdlab::topology::Graph;
use gsdlab::Error;
use nalgebra::{DMatrix, SymmetricEigen};
use support::*;

fn drivers(inst: &IsingInstance, seed: u64) -> [Driver; 3] {
    [
        Driver::transverse_field(),
        Driver::non_stoquastic(inst, seed, SignMode::Global),
        Driver::non_stoquastic(inst, seed, SignMode::PerEdge),
    ]
}

/// Small degenerate fixtures: (instance, solutions), N between 8 and 12.
fn fixtures(count: usize) -> Vec<(IsingInstance, SolutionSet)> {
    let mut out = Vec::new();
    for seed in 0..500u64 {
        let n = 8 + (seed % 5) as usize;
        if let Some((p, sols)) = small_planted(n, 0.6, seed) {
            if sols.len() >= 4 {
                out.push((p.instance, sols));
            }
        }
        if out.len() == count {
            break;
        }
    }
    out
}

fn dense(h: &gsdlab::quantum::RestrictedHamiltonian) -> DMatrix<f64> {
    DMatrix::from_fn(h.dim(), h.dim(), |i, j| h.entry(i, j))
}

fn rep_bits(c: &SpinConfig) -> u64 {
    let n = c.len();
    let b = bits_of(c);
    if b & 1 == 0 {
        b
    } else {
        b ^ ((1u64 << n) - 1)
    }
}

#[test]
fn two_spin_ferromagnet_matches_hand_matrix() {
    let g = Graph::new(2, [(0, 1)]).unwrap();
    let inst = IsingInstance::without_fields(g, vec![-1]).unwrap();
    let (e0, sols) = brute_force_ground(&inst);
    assert_eq!(sols.len(), 2);
    let set = SolutionSet {
        instance_id: "ferro".into(),
        ground_energy: e0,
        solutions: sols,
        truncated: false,
    };
    let basis = build_subspace(&inst, &set, &Driver::transverse_field(), 2, DEFAULT_BASIS_CAP).unwrap();
    assert_eq!(basis.dim(), 2);
    let s = 0.3;
    let h = restrict_hamiltonian(&inst, &Driver::transverse_field(), &basis, s).unwrap();
    // Symmetric pair states {uu,dd} and {ud,du}: each single flip links them,
    // two flips in total, so the off-diagonal is -2 (1 - s).
    let expect = [[s * -1.0, -2.0 * (1.0 - s)], [-2.0 * (1.0 - s), s * 1.0]];
    for i in 0..2 {
        for j in 0..2 {
            assert!((h.entry(i, j) - expect[i][j]).abs() < 1e-15, "({i},{j})");
        }
    }
    // Against the full 4x4 operator: lowest eigenvalue agrees.
    let full = DMatrix::from_fn(4, 4, |x, y| {
        let e = if x == y {
            inst.energy(&SpinConfig::from_bits(x as u64, 2)).unwrap() as f64 * s
        } else {
            0.0
        };
        e + (1.0 - s) * driver_element(&Driver::transverse_field(), 2, x as u64, y as u64)
    });
    let full_min = SymmetricEigen::new(full).eigenvalues.min();
    let sub_min = SymmetricEigen::new(dense(&h)).eigenvalues.min();
    assert!((full_min - sub_min).abs() < 1e-12);
}

#[test]
fn restricted_elements_match_full_space_definition() {
    for (inst, sols) in fixtures(6) {
        let n = inst.spin_count();
        for driver in drivers(&inst, 3) {
            let basis = build_subspace(&inst, &sols, &driver, 2, DEFAULT_BASIS_CAP).unwrap();
            let h = restrict_hamiltonian(&inst, &driver, &basis, 0.4).unwrap();
            let full = (1u64 << n) - 1;
            let reps: Vec<u64> = (0..basis.dim()).map(|k| rep_bits(&basis.state_config(k))).collect();
            for (i, &a) in reps.iter().enumerate() {
                for (j, &b) in reps.iter().enumerate() {
                    let d = driver_element(&driver, n, a, b) + driver_element(&driver, n, a, b ^ full);
                    let e = if i == j {
                        inst.energy(&SpinConfig::from_bits(a, n)).unwrap() as f64
                    } else {
                        0.0
                    };
                    let want = 0.6 * d + 0.4 * e;
                    assert!((h.entry(i, j) - want).abs() < 1e-12);
                }
            }
            assert_eq!(h.driver.max_asymmetry(), 0.0);
        }
    }
}

#[test]
fn second_order_subspace_is_the_one_step_neighborhood() {
    for (inst, sols) in fixtures(6) {
        let n = inst.spin_count();
        let full = (1u64 << n) - 1;
        for driver in drivers(&inst, 5) {
            let basis = build_subspace(&inst, &sols, &driver, 2, DEFAULT_BASIS_CAP).unwrap();
            let ground: BTreeSet<u64> = sols.solutions.iter().map(rep_bits).collect();
            let mut expect = BTreeSet::new();
            for r in (0..=full).filter(|b| b & 1 == 0) {
                if ground.contains(&r) {
                    continue;
                }
                let linked = ground
                    .iter()
                    .any(|&g| driver_element(&driver, n, g, r) != 0.0 || driver_element(&driver, n, g, r ^ full) != 0.0);
                if linked {
                    expect.insert(r);
                }
            }
            let got: BTreeSet<u64> = (0..basis.dim())
                .filter(|&k| basis.origin[k] == StateOrigin::ExcitedReachable)
                .map(|k| rep_bits(&basis.state_config(k)))
                .collect();
            let got_ground: BTreeSet<u64> = (0..basis.ground_dim).map(|k| rep_bits(&basis.state_config(k))).collect();
            assert_eq!(got, expect);
            assert_eq!(got_ground, ground);
        }
    }
}

#[test]
fn minimizer_matches_dense_eigensolver() {
    for (inst, sols) in fixtures(5) {
        for driver in drivers(&inst, 1) {
            let basis = build_subspace(&inst, &sols, &driver, 2, DEFAULT_BASIS_CAP).unwrap();
            for s in [0.1, 0.5, 0.9] {
                let h = restrict_hamiltonian(&inst, &driver, &basis, s).unwrap();
                let eig = SymmetricEigen::new(dense(&h));
                let lo = eig.eigenvalues.min();
                let r = minimize_rayleigh(&h, &random_vector(h.dim(), 9, &[]), &RayleighOptions::default()).unwrap();
                assert!((r.value - lo).abs() <= 1e-10 * lo.abs().max(1.0), "s={s}: {} vs {lo}", r.value);
            }
        }
    }
}

#[test]
fn rayleigh_trace_is_monotone() {
    let (inst, sols) = fixtures(1).remove(0);
    let driver = Driver::transverse_field();
    let basis = build_subspace(&inst, &sols, &driver, 2, DEFAULT_BASIS_CAP).unwrap();
    let h = restrict_hamiltonian(&inst, &driver, &basis, 0.7).unwrap();
    let opts = RayleighOptions {
        record_trace: true,
        ..RayleighOptions::default()
    };
    let r = minimize_rayleigh(&h, &random_vector(h.dim(), 2, &[]), &opts).unwrap();
    assert!(r.trace.len() > 1);
    for w in r.trace.windows(2) {
        assert!(w[1] <= w[0] + 1e-12 * w[0].abs().max(1.0), "{} -> {}", w[0], w[1]);
    }
}

#[test]
fn degeneracy_detection_agrees_with_dense_gap() {
    let (mut unique, mut degenerate) = (0, 0);
    for (inst, sols) in fixtures(20) {
        for driver in drivers(&inst, 2) {
            let basis = build_subspace(&inst, &sols, &driver, 1, DEFAULT_BASIS_CAP).unwrap();
            if basis.dim() < 2 {
                continue;
            }
            let h = restrict_hamiltonian(&inst, &driver, &basis, 0.1).unwrap();
            let ev = SymmetricEigen::new(dense(&h)).eigenvalues;
            let mut sorted: Vec<f64> = ev.iter().copied().collect();
            sorted.sort_by(f64::total_cmp);
            let gap = sorted[1] - sorted[0];
            let check = detect_degeneracy(&h, 4, &RayleighOptions::default()).unwrap();
            if gap < 1e-9 {
                assert!(check.degenerate, "gap {gap:e} overlap {}", check.overlap);
                degenerate += 1;
            } else if gap > 1e-4 {
                assert!(!check.degenerate, "gap {gap:e} overlap {}", check.overlap);
                unique += 1;
            }
        }
    }
    assert!(unique > 0 && degenerate > 0, "unique {unique}, degenerate {degenerate}");
}

#[test]
fn distributions_are_normalized_and_pair_symmetric() {
    for (inst, sols) in fixtures(10) {
        let partners = sols.flip_partners();
        for driver in drivers(&inst, 7) {
            let Ok(g) = quantum_gsd(&inst, &sols, &driver, &QgsConfig::default()) else {
                continue;
            };
            let total: f64 = g.probabilities.iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            assert!(g.probabilities.iter().all(|&p| p >= 0.0));
            for (i, partner) in partners.iter().enumerate() {
                let j = partner.unwrap();
                assert_eq!(g.probabilities[i], g.probabilities[j]);
            }
        }
    }
}

#[test]
fn matches_exact_diagonalization_in_the_limit() {
    let mut checked = 0;
    for (inst, sols) in fixtures(12) {
        for driver in drivers(&inst, 11).into_iter().take(2) {
            // Exact weights are linear in 1-s close to the end; cancel the
            // slope with a second point.
            let sector = symmetric_sector(&inst, &driver);
            let near = feshbach_gsd(&sector, &sols.solutions, 1.0 - 1e-5);
            let far = feshbach_gsd(&sector, &sols.solutions, 1.0 - 2e-5);
            let exact: Vec<f64> = near.iter().zip(&far).map(|(a, b)| 2.0 * a - b).collect();
            match quantum_gsd(&inst, &sols, &driver, &QgsConfig::default()) {
                Ok(g) => {
                    let tv = total_variation(&g.probabilities, &exact);
                    assert!(tv <= 1e-8, "{} {:?}: tv {tv:e}", sols.instance_id, driver.kind);
                    checked += 1;
                }
                Err(Error::UnresolvedDegeneracy(_)) => {}
                Err(e) => panic!("{}: {e}", sols.instance_id),
            }
        }
    }
    assert!(checked >= 15, "only {checked} resolved");
}

#[test]
fn oracle_agrees_with_plain_diagonalization_before_the_end() {
    let mut checked = 0;
    for (inst, sols) in fixtures(6) {
        for driver in drivers(&inst, 13).into_iter().take(2) {
            let sector = symmetric_sector(&inst, &driver);
            for s in [0.99, 0.999] {
                let (dense, gap) = dense_gsd(&sector, &sols.solutions, s);
                if gap < 1e-3 {
                    continue;
                }
                // Dense eigenvectors are good to about eps * |K| / gap.
                let norm = s / (1.0 - s) * sector.energy.iter().fold(0.0f64, |m, e| m.max(e.abs())) * 2.0;
                let tol = 1e3 * f64::EPSILON * norm / gap;
                let tv = total_variation(&dense, &feshbach_gsd(&sector, &sols.solutions, s));
                assert!(tv < tol, "s={s}: {tv:e} > {tol:e}");
                checked += 1;
            }
        }
    }
    assert!(checked >= 8, "only {checked} well-gapped cases");
}

#[test]
fn first_order_answer_survives_the_second_order_subspace() {
    let opts = RayleighOptions {
        tol: Some(1e-12),
        norm: ResidualNorm::Preconditioned,
        ..RayleighOptions::default()
    };
    let mut checked = 0;
    for (inst, sols) in fixtures(15) {
        for driver in drivers(&inst, 17).into_iter().take(2) {
            let Ok(g) = quantum_gsd(&inst, &sols, &driver, &QgsConfig::default()) else {
                continue;
            };
            if g.order != 1 {
                continue;
            }
            let basis = build_subspace(&inst, &sols, &driver, 2, DEFAULT_BASIS_CAP).unwrap();
            let h = restrict_hamiltonian(&inst, &driver, &basis, 1.0 - 1e-7).unwrap();
            let mut start = vec![0.0; h.dim()];
            start[..h.ground_dim].fill(1.0);
            let r = minimize_rayleigh(&h, &start, &opts).unwrap();
            let w: Vec<f64> = r.vector[..basis.ground_dim].iter().map(|a| a * a).collect();
            let total: f64 = w.iter().sum();
            let mut p = vec![0.0; sols.len()];
            for (wk, &(i, j)) in w.iter().zip(&basis.pair_solutions) {
                p[i] += wk / total / 2.0;
                p[j] += wk / total / 2.0;
            }
            let tv = total_variation(&p, &g.probabilities);
            assert!(tv <= 1e-6, "{}: {tv:e}", sols.instance_id);
            checked += 1;
        }
    }
    assert!(checked > 0);
}

#[test]
fn local_fields_and_broken_pairs_are_rejected() {
    let g = Graph::new(2, [(0, 1)]).unwrap();
    let with_fields = IsingInstance::new(g.clone(), vec![-1], vec![1, 0]).unwrap();
    let inst = IsingInstance::without_fields(g, vec![-1]).unwrap();
    let half = SolutionSet {
        instance_id: "half".into(),
        ground_energy: -1,
        solutions: vec![SpinConfig::all_up(2)],
        truncated: false,
    };
    let full = SolutionSet {
        solutions: vec![SpinConfig::all_up(2), SpinConfig::all_up(2).global_flip()],
        ..half.clone()
    };
    let tf = Driver::transverse_field();
    assert!(matches!(quantum_gsd(&with_fields, &full, &tf, &QgsConfig::default()), Err(Error::Input(_))));
    assert!(matches!(quantum_gsd(&inst, &half, &tf, &QgsConfig::default()), Err(Error::Integrity(_))));
    let truncated = SolutionSet {
        truncated: true,
        ..full.clone()
    };
    assert!(matches!(quantum_gsd(&inst, &truncated, &tf, &QgsConfig::default()), Err(Error::Input(_))));
    let g = quantum_gsd(&inst, &full, &tf, &QgsConfig::default()).unwrap();
    assert_eq!(g.probabilities, vec![0.5, 0.5]);
}

#[test]
fn annealed_limit_agrees_with_perturbative_limit() {
    let anneal = QgsConfig {
        limit: Limit::Anneal,
        ..QgsConfig::default()
    };
    let mut compared = 0;
    for (inst, sols) in fixtures(10) {
        for driver in drivers(&inst, 19).into_iter().take(2) {
            let a = quantum_gsd(&inst, &sols, &driver, &QgsConfig::default());
            let b = quantum_gsd(&inst, &sols, &driver, &anneal);
            match (a, b) {
                (Ok(a), Ok(b)) => {
                    let tv = total_variation(&a.probabilities, &b.probabilities);
                    assert!(tv < 1e-4, "{}: {tv:e}", sols.instance_id);
                    compared += 1;
                }
                (Err(Error::UnresolvedDegeneracy(_)), Err(Error::UnresolvedDegeneracy(_))) => {}
                (a, b) => panic!("{}: {:?} vs {:?}", sols.instance_id, a.map(|g| g.order), b.map(|g| g.order)),
            }
        }
    }
    assert!(compared >= 10);
}
