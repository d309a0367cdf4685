//! Ground-state distributions of `H(s) = (1 - s) H_d + s H_p` as `s -> 1`,
//! computed in small flip-symmetric subspaces around the classical ground
//! states.

mod basis;
mod hamiltonian;
mod rayleigh;

pub use basis::{build_subspace, Driver, DriverKind, SignMode, StateOrigin, SubspaceBasis, DEFAULT_BASIS_CAP};
pub use hamiltonian::{restrict_hamiltonian, RestrictedHamiltonian, SparseSymmetric};
pub use rayleigh::{
    detect_degeneracy, minimize_deflated, minimize_rayleigh, random_vector, DegeneracyCheck, RayleighOptions,
    RayleighResult, ResidualNorm, OVERLAP_THRESHOLD,
};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::enumerate::SolutionSet;
use crate::error::{Error, Result};
use crate::instance::IsingInstance;
use hamiltonian::dot;

/// How the last grid points are extrapolated to `s = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extrapolation {
    None,
    Linear,
    Quadratic,
}

impl Extrapolation {
    fn points(self) -> usize {
        match self {
            Extrapolation::None => 1,
            Extrapolation::Linear => 2,
            Extrapolation::Quadratic => 3,
        }
    }
}

/// How the `s -> 1` limit is taken once first order leaves a degeneracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Limit {
    /// Diagonalize the second-order effective operator on the degenerate
    /// first-order ground space. Exact in the limit, no grid.
    Perturbative,
    /// Follow the second-order subspace ground state along a geometric grid
    /// in `1 - s` and extrapolate. The splitting shrinks like `1 - s`, so the
    /// last points lose precision on strongly degenerate manifolds.
    Anneal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QgsConfig {
    /// Where the degeneracy tests run.
    pub s_star: f64,
    pub limit: Limit,
    /// Last grid point is `s = 1 - epsilon`.
    pub epsilon: f64,
    /// Geometric grid density in `1 - s`.
    pub points_per_decade: usize,
    pub extrapolation: Extrapolation,
    pub basis_cap: usize,
    /// Gradient tolerance at `s_star`; `None` means `1e-12 * dim`.
    pub tol: Option<f64>,
    /// Preconditioned residual tolerance along the anneal.
    pub anneal_tol: f64,
    /// Smallest accepted ratio of the scaled ground-state gap at `epsilon`
    /// to the gap a decade earlier. A splitting that first appears at second
    /// order keeps this near 1; one that only appears later shrinks it.
    pub min_gap_ratio: f64,
    /// Norm of the random vector added to every warm start.
    pub restart_noise: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for QgsConfig {
    fn default() -> Self {
        QgsConfig {
            s_star: 0.1,
            limit: Limit::Perturbative,
            epsilon: 1e-6,
            points_per_decade: 4,
            extrapolation: Extrapolation::Linear,
            basis_cap: DEFAULT_BASIS_CAP,
            tol: None,
            anneal_tol: 1e-12,
            min_gap_ratio: 0.5,
            restart_noise: 1e-3,
            max_iter: 100_000,
            seed: 0,
        }
    }
}

impl QgsConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0 < self.s_star && self.s_star < 1.0) {
            return Err(Error::input("s_star must lie in (0, 1)"));
        }
        if !(0.0 < self.epsilon && self.epsilon < 1.0 - self.s_star) {
            return Err(Error::input("epsilon must lie in (0, 1 - s_star)"));
        }
        if self.points_per_decade == 0 {
            return Err(Error::input("points_per_decade must be positive"));
        }
        if !(self.restart_noise >= 0.0) {
            return Err(Error::input("restart_noise must be non-negative"));
        }
        if !(self.anneal_tol > 0.0) {
            return Err(Error::input("anneal_tol must be positive"));
        }
        Ok(())
    }

    fn options(&self) -> RayleighOptions {
        RayleighOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            ..RayleighOptions::default()
        }
    }

    /// Values of `1 - s`, from `1 - s_star` down to `epsilon`.
    pub fn grid(&self) -> Vec<f64> {
        let top = 1.0 - self.s_star;
        let decades = (top / self.epsilon).log10();
        let steps = (decades * self.points_per_decade as f64).ceil().max(1.0) as usize;
        (0..=steps)
            .map(|k| top * (self.epsilon / top).powf(k as f64 / steps as f64))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QgsDiagnostics {
    pub basis_dim: usize,
    pub ground_pairs: usize,
    pub s_final: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Overlap of the two independent minimizers at `s_star`.
    pub overlap: f64,
    /// Gap between the two lowest levels divided by `1 - s`, at the last
    /// grid point.
    pub scaled_gap: f64,
    /// `scaled_gap` relative to its value a decade earlier in `1 - s`.
    pub gap_ratio: f64,
    /// Largest change in any probability made by extrapolation.
    pub extrapolation_shift: f64,
    /// Probability mass lost to clipping negative extrapolated values.
    pub clipped_mass: f64,
}

/// Analytic ground-state distribution, indexed like the solution set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyticGsd {
    pub driver: DriverKind,
    pub probabilities: Vec<f64>,
    /// Perturbative order that resolved the degeneracy (1 or 2).
    pub order: u8,
    pub diagnostics: QgsDiagnostics,
}

/// Spreads pair weights `|a_k|^2` evenly over both members of each pair.
fn pair_probabilities(basis: &SubspaceBasis, vector: &[f64], d: usize) -> Vec<f64> {
    let weights: Vec<f64> = vector[..basis.ground_dim].iter().map(|a| a * a).collect();
    let total: f64 = weights.iter().sum();
    let mut p = vec![0.0; d];
    for (w, &(i, j)) in weights.iter().zip(&basis.pair_solutions) {
        let share = if total > 0.0 { w / total } else { 0.0 };
        if i == j {
            p[i] += share;
        } else {
            p[i] += share / 2.0;
            p[j] += share / 2.0;
        }
    }
    p
}

/// Lagrange extrapolation to `x = 0`.
fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut total = 0.0;
    for (k, (&xk, &yk)) in xs.iter().zip(ys).enumerate() {
        let weight: f64 = xs
            .iter()
            .enumerate()
            .filter(|&(m, _)| m != k)
            .map(|(_, &xm)| xm / (xm - xk))
            .product();
        total += weight * yk;
    }
    total
}

/// Ground-state distribution in the `s -> 1` limit.
///
/// First-order: the ground state of the driver restricted to the ground
/// pairs. When that is degenerate, second order decides among the degenerate
/// first-order states (see [`Limit`]).
pub fn quantum_gsd(
    instance: &IsingInstance,
    solutions: &SolutionSet,
    driver: &Driver,
    config: &QgsConfig,
) -> Result<AnalyticGsd> {
    config.validate()?;
    let d = solutions.len();
    let opts = config.options();
    let basis1 = build_subspace(instance, solutions, driver, 1, config.basis_cap)?;
    let h1 = restrict_hamiltonian(instance, driver, &basis1, config.s_star)?;
    let check1 = detect_degeneracy(&h1, config.seed, &opts)?;
    if !check1.degenerate {
        return Ok(AnalyticGsd {
            driver: driver.kind,
            probabilities: pair_probabilities(&basis1, &check1.primary.vector, d),
            order: 1,
            diagnostics: QgsDiagnostics {
                basis_dim: basis1.dim(),
                ground_pairs: basis1.ground_dim,
                s_final: config.s_star,
                gradient_norm: check1.primary.gradient_norm.max(check1.secondary.gradient_norm),
                iterations: check1.primary.iterations + check1.secondary.iterations,
                overlap: check1.overlap,
                scaled_gap: f64::NAN,
                gap_ratio: f64::NAN,
                extrapolation_shift: 0.0,
                clipped_mass: 0.0,
            },
        });
    }

    let basis2 = build_subspace(instance, solutions, driver, 2, config.basis_cap)?;
    let base = restrict_hamiltonian(instance, driver, &basis2, config.s_star)?;
    if config.limit == Limit::Perturbative {
        return second_order_limit(driver, &basis2, &base, d, &check1);
    }
    let check2 = detect_degeneracy(&base, crate::rng::derive_seed(config.seed, &[2]), &opts)?;
    if check2.degenerate {
        return Err(Error::UnresolvedDegeneracy(format!(
            "second-order subspace is degenerate at s = {} (overlap {:.12})",
            config.s_star, check2.overlap
        )));
    }
    let mut iterations = check2.primary.iterations + check2.secondary.iterations;

    let grid = config.grid();
    let mut xs: Vec<f64> = Vec::with_capacity(grid.len());
    let mut states: Vec<Vec<f64>> = Vec::with_capacity(grid.len());
    let mut last = check2.primary.clone();
    let anneal_opts = RayleighOptions {
        tol: Some(config.anneal_tol),
        max_iter: config.max_iter,
        norm: ResidualNorm::Preconditioned,
        record_trace: false,
    };
    let mut reference = None;
    let back = config.points_per_decade.min(grid.len() - 1);
    for (k, &lambda) in grid.iter().enumerate() {
        let h = base.at(1.0 - lambda);
        let start = match k {
            0 => last.vector.clone(),
            1 => states[0].clone(),
            _ => {
                let (l1, l0) = (xs[k - 1], xs[k - 2]);
                let t = (lambda - l1) / (l1 - l0);
                states[k - 1]
                    .iter()
                    .zip(&states[k - 2])
                    .map(|(a, b)| a + t * (a - b))
                    .collect()
            }
        };
        // A small random admixture lets the minimizer pick up a level that
        // crosses in from a block the previous state had no weight on.
        let noise = random_vector(base.dim(), config.seed, &[5, k as u64]);
        let scale = config.restart_noise / dot(&noise, &noise).sqrt();
        let start: Vec<f64> = start.iter().zip(&noise).map(|(a, b)| a + scale * b).collect();
        last = minimize_rayleigh(&h, &start, &anneal_opts)?;
        iterations += last.iterations;
        let mut v = last.vector.clone();
        // Fix the overall sign so the predictor does not flip between points.
        if let Some(prev) = states.last() {
            if dot(prev, &v) < 0.0 {
                v.iter_mut().for_each(|a| *a = -*a);
            }
        }
        if k + 1 + back == grid.len() {
            reference = Some((lambda, h.clone(), v.clone(), last.scaled_value));
        }
        xs.push(lambda);
        states.push(v);
    }

    // The level splitting must scale like (1 - s) as s -> 1; otherwise the
    // second-order subspace has not fixed the ground state.
    let (lambda_c, h_c, v_c, rho_c) = reference.expect("grid has at least two points");
    let second_c = minimize_deflated(
        &h_c,
        &random_vector(base.dim(), config.seed, &[4]),
        &anneal_opts,
        &[&v_c],
    )?;
    let lambda_f = config.epsilon;
    let h_f = base.at(1.0 - lambda_f);
    let second_f = minimize_deflated(&h_f, &second_c.vector, &anneal_opts, &[states.last().unwrap()])?;
    iterations += second_c.iterations + second_f.iterations;
    let gap_c = (second_c.scaled_value - rho_c) / lambda_c;
    let scaled_gap = (second_f.scaled_value - last.scaled_value) / lambda_f;
    let gap_ratio = scaled_gap / gap_c;
    if second_f.scaled_value < last.scaled_value - 1e-9 * last.scaled_value.abs().max(1e-300) {
        return Err(Error::Numerical(format!(
            "anneal followed an excited level: deflated minimum {:e} lies below {:e}",
            second_f.scaled_value, last.scaled_value
        )));
    }
    if !(gap_ratio >= config.min_gap_ratio) || !(scaled_gap > 0.0) {
        return Err(Error::UnresolvedDegeneracy(format!(
            "level splitting does not scale like 1 - s (scaled gap {scaled_gap:.3e}, ratio {gap_ratio:.3e}); higher orders decide the ground state"
        )));
    }

    let per_point: Vec<Vec<f64>> = states.iter().map(|v| pair_probabilities(&basis2, v, d)).collect();
    let m = config.extrapolation.points().min(per_point.len());
    let tail_x = &xs[xs.len() - m..];
    let mut probabilities = vec![0.0; d];
    let mut shift: f64 = 0.0;
    for i in 0..d {
        let ys: Vec<f64> = per_point[per_point.len() - m..].iter().map(|p| p[i]).collect();
        let value = extrapolate_to_zero(tail_x, &ys);
        shift = shift.max((value - ys[m - 1]).abs());
        probabilities[i] = value;
    }
    let clipped: f64 = probabilities.iter().filter(|&&p| p < 0.0).map(|p| -p).sum();
    probabilities.iter_mut().for_each(|p| *p = p.max(0.0));
    let total: f64 = probabilities.iter().sum();
    probabilities.iter_mut().for_each(|p| *p /= total);

    Ok(AnalyticGsd {
        driver: driver.kind,
        probabilities,
        order: 2,
        diagnostics: QgsDiagnostics {
            basis_dim: basis2.dim(),
            ground_pairs: basis2.ground_dim,
            s_final: 1.0 - config.epsilon,
            gradient_norm: last.gradient_norm,
            iterations,
            overlap: check2.overlap,
            scaled_gap,
            gap_ratio,
            extrapolation_shift: shift,
            clipped_mass: clipped,
        },
    })
}

/// Ground states of `P0 B P0`, with `P0` the lowest eigenspace of the driver
/// on the ground pairs and `B = -D_GQ Delta^-1 D_QG` the second-order
/// coupling through excited states. Near `s = 1` the scaled operator is
/// `D_GG + B (1 - s)/s + O((1 - s)^2)` on the ground pairs, so this is the
/// limit state, and its splitting is the limit of `gap / (1 - s)`.
fn second_order_limit(
    driver: &Driver,
    basis: &SubspaceBasis,
    h: &RestrictedHamiltonian,
    d: usize,
    check1: &DegeneracyCheck,
) -> Result<AnalyticGsd> {
    let g = basis.ground_dim;
    let dgg = DMatrix::from_fn(g, g, |i, j| h.driver.get(i, j));
    let first = SymmetricEigen::new(dgg);
    let (lo, hi) = extremes(first.eigenvalues.as_slice());
    let tol = DEGENERACY_TOLERANCE * (hi - lo).abs().max(1.0);
    let ground: Vec<usize> = (0..g).filter(|&k| first.eigenvalues[k] - lo <= tol).collect();
    let p0 = DMatrix::from_fn(g, ground.len(), |i, k| first.eigenvectors[(i, ground[k])]);

    let mut b = DMatrix::<f64>::zeros(g, g);
    for q in g..h.dim() {
        let delta = h.diagonal[q] - h.ground_energy;
        let links: Vec<(usize, f64)> = h.driver.row(q).filter(|&(j, _)| j < g).collect();
        for &(i, a) in &links {
            for &(j, c) in &links {
                b[(i, j)] -= a * c / delta;
            }
        }
    }
    let m = p0.transpose() * &b * &p0;
    let m = (&m + m.transpose()) * 0.5;
    let second = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..second.eigenvalues.len()).collect();
    order.sort_by(|&x, &y| second.eigenvalues[x].total_cmp(&second.eigenvalues[y]));
    let scale = b.amax().max(1e-300);
    let gap = match order.get(1) {
        Some(&k) => second.eigenvalues[k] - second.eigenvalues[order[0]],
        None => f64::INFINITY,
    };
    if ground.len() > 1 && gap <= DEGENERACY_TOLERANCE * scale {
        return Err(Error::UnresolvedDegeneracy(format!(
            "second-order operator leaves {} degenerate states (splitting {gap:.3e}); higher orders decide the ground state",
            order.iter().take_while(|&&k| second.eigenvalues[k] - second.eigenvalues[order[0]] <= DEGENERACY_TOLERANCE * scale).count()
        )));
    }
    let coeffs: DVector<f64> = second.eigenvectors.column(order[0]).into_owned();
    let residual = (&m * &coeffs - &coeffs * second.eigenvalues[order[0]]).norm();
    let vector: Vec<f64> = (&p0 * &coeffs).iter().copied().collect();
    Ok(AnalyticGsd {
        driver: driver.kind,
        probabilities: pair_probabilities(basis, &vector, d),
        order: if ground.len() > 1 { 2 } else { 1 },
        diagnostics: QgsDiagnostics {
            basis_dim: basis.dim(),
            ground_pairs: g,
            s_final: 1.0,
            gradient_norm: residual,
            iterations: check1.primary.iterations + check1.secondary.iterations,
            overlap: check1.overlap,
            scaled_gap: if ground.len() > 1 { gap } else { f64::NAN },
            gap_ratio: f64::NAN,
            extrapolation_shift: 0.0,
            clipped_mass: 0.0,
        },
    })
}

/// Relative tolerance under which two eigenvalues count as equal.
const DEGENERACY_TOLERANCE: f64 = 1e-9;

fn extremes(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::SolutionSet;
    use crate::instance::SpinConfig;
    use crate::topology::Graph;

    fn pair(j: i64) -> (IsingInstance, SolutionSet) {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let inst = IsingInstance::without_fields(g, vec![j]).unwrap();
        let sols = vec![SpinConfig::new(vec![1, 1]).unwrap(), SpinConfig::new(vec![-1, -1]).unwrap()];
        let sols = SolutionSet {
            instance_id: "pair".into(),
            ground_energy: -j.abs(),
            solutions: if j < 0 { sols } else { vec![SpinConfig::new(vec![1, -1]).unwrap(), SpinConfig::new(vec![-1, 1]).unwrap()] },
            truncated: false,
        };
        (inst, sols)
    }

    #[test]
    fn ferro_pair_is_even() {
        let (inst, sols) = pair(-1);
        let gsd = quantum_gsd(&inst, &sols, &Driver::transverse_field(), &QgsConfig::default()).unwrap();
        assert_eq!(gsd.probabilities, vec![0.5, 0.5]);
        assert_eq!(gsd.diagnostics.ground_pairs, 1);
    }

    #[test]
    fn two_spin_symmetric_element() {
        let (inst, sols) = pair(-1);
        let tf = Driver::transverse_field();
        let b = build_subspace(&inst, &sols, &tf, 2, 10).unwrap();
        assert_eq!(b.dim(), 2);
        let h = restrict_hamiltonian(&inst, &tf, &b, 0.0).unwrap();
        // <up,up|-X1-X2|up,down> pair vectors: both flips land on the same pair.
        assert_eq!(h.entry(0, 1), -2.0);
        assert_eq!(h.entry(1, 0), -2.0);
        assert_eq!(h.driver.max_asymmetry(), 0.0);
    }

    #[test]
    fn grid_runs_down_to_epsilon() {
        let cfg = QgsConfig::default();
        let g = cfg.grid();
        assert!((g[0] - 0.9).abs() < 1e-15);
        assert!((g.last().unwrap() - 1e-6).abs() < 1e-18);
        assert!(g.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn extrapolation_is_exact_on_polynomials() {
        let xs = [0.3, 0.2, 0.1];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x - 3.0 * x * x).collect();
        assert!((extrapolate_to_zero(&xs, &ys) - 1.0).abs() < 1e-12);
        assert!((extrapolate_to_zero(&xs[1..], &ys[1..]) - (ys[2] - (ys[1] - ys[2]))).abs() < 1e-12);
    }

    #[test]
    fn lowest_2x2_matches_closed_form() {
        let (mu, a, b) = rayleigh_test_hook(2.0, -1.0, 0.5);
        assert!((mu - (0.5 - (2.25f64 + 0.25).sqrt())).abs() < 1e-14);
        assert!((a * a + b * b - 1.0).abs() < 1e-14);
    }

    fn rayleigh_test_hook(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
        // Residual of the returned eigenpair.
        let (mu, v1, v2) = super::rayleigh::lowest_2x2(a, b, c);
        assert!((a * v1 + c * v2 - mu * v1).abs() < 1e-12);
        assert!((c * v1 + b * v2 - mu * v2).abs() < 1e-12);
        (mu, v1, v2)
    }

    #[test]
    fn fields_are_rejected() {
        let g = Graph::new(2, [(0, 1)]).unwrap();
        let inst = IsingInstance::new(g, vec![-1], vec![1, 0]).unwrap();
        let (_, sols) = pair(-1);
        let err = build_subspace(&inst, &sols, &Driver::transverse_field(), 1, 10).unwrap_err();
        assert!(matches!(err, Error::Input(_)));
    }
}
