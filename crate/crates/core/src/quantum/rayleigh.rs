use rand_distr::{Distribution, StandardNormal};

use super::hamiltonian::{dot, norm, RestrictedHamiltonian};
use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Which residual norm the stopping test uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResidualNorm {
    /// Euclidean norm of the gradient.
    #[default]
    Plain,
    /// Gradient weighted by the preconditioner; stays meaningful when the
    /// excited components are suppressed by a factor `1 - s`.
    Preconditioned,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighOptions {
    /// Stop tolerance; `None` means `1e-12 * dim`.
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub norm: ResidualNorm,
    pub record_trace: bool,
}

impl Default for RayleighOptions {
    fn default() -> Self {
        RayleighOptions {
            tol: None,
            max_iter: 100_000,
            norm: ResidualNorm::Plain,
            record_trace: false,
        }
    }
}

impl RayleighOptions {
    pub fn tolerance(&self, dim: usize) -> f64 {
        self.tol.unwrap_or(1e-12 * dim as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RayleighResult {
    /// Unit-norm minimizer.
    pub vector: Vec<f64>,
    /// Rayleigh quotient of `H(s)`.
    pub value: f64,
    /// Rayleigh quotient of the scaled operator `(H(s) - s E0) / (1 - s)`.
    pub scaled_value: f64,
    /// Final residual norm of the scaled problem, in the requested norm.
    pub gradient_norm: f64,
    pub iterations: usize,
    /// Quotient after each step, when requested.
    pub trace: Vec<f64>,
}

/// `K = a H_d + b (H_p - E0)`: for `s < 1` this is `(H(s) - s E0) / (1 - s)`,
/// with the same eigenvectors as `H(s)` but bounded entries near `s = 1`.
struct Scaled<'a> {
    h: &'a RestrictedHamiltonian,
    a: f64,
    b: f64,
    gap: Vec<f64>,
}

impl<'a> Scaled<'a> {
    fn new(h: &'a RestrictedHamiltonian) -> Self {
        let (a, b) = if h.s < 1.0 { (1.0, h.s / (1.0 - h.s)) } else { (0.0, 1.0) };
        let gap = h.diagonal.iter().map(|d| d - h.ground_energy).collect();
        Scaled { h, a, b, gap }
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        if self.a != 0.0 {
            self.h.driver.mul(x, y);
        } else {
            y.fill(0.0);
        }
        for ((yi, xi), g) in y.iter_mut().zip(x).zip(&self.gap) {
            *yi = self.a * *yi + self.b * g * xi;
        }
    }

    fn unscale(&self, rho: f64) -> f64 {
        if self.h.s < 1.0 {
            (1.0 - self.h.s) * rho + self.h.s * self.h.ground_energy
        } else {
            rho + self.h.ground_energy
        }
    }

    /// Diagonal preconditioner. Excited states: inverse of `1 + b gap`.
    /// Ground states: inverse of their coupling scale, the first-order row
    /// sum plus the second-order shift `sum_q D_gq^2 / (b gap_q)`, since
    /// eliminating the excited states leaves a ground block of that size.
    fn preconditioner(&self) -> Vec<f64> {
        (0..self.gap.len())
            .map(|i| {
                if self.gap[i] > 0.0 {
                    return 1.0 / (1.0 + self.b * self.gap[i]);
                }
                let mut first = 0.0;
                let mut second = 0.0;
                for (j, v) in self.h.driver.row(i) {
                    if self.gap[j] > 0.0 {
                        second += v * v / (self.b * self.gap[j]);
                    } else {
                        first += v.abs();
                    }
                }
                let scale = self.a * first + self.a * self.a * second;
                if scale > 0.0 && scale.is_finite() {
                    1.0 / scale
                } else {
                    1.0
                }
            })
            .collect()
    }
}

/// Lowest eigenpair of a symmetric 2x2 matrix `[[a, c], [c, b]]`.
pub(crate) fn lowest_2x2(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let mean = 0.5 * (a + b);
    let half = 0.5 * (a - b);
    let mu = mean - half.hypot(c);
    // Two candidate eigenvectors; keep the better conditioned one.
    let (u1, u2) = (c, mu - a);
    let (w1, w2) = (mu - b, c);
    let (v1, v2) = if u1.hypot(u2) >= w1.hypot(w2) { (u1, u2) } else { (w1, w2) };
    let n = v1.hypot(v2);
    if n == 0.0 {
        return if a <= b { (a, 1.0, 0.0) } else { (b, 0.0, 1.0) };
    }
    let (v1, v2) = if v1 < 0.0 { (-v1 / n, -v2 / n) } else { (v1 / n, v2 / n) };
    (mu, v1, v2)
}

/// Minimizes the Rayleigh quotient of `H(s)` from `start`.
///
/// Preconditioned Polak-Ribiere conjugate gradient; each step solves the
/// 2x2 Ritz problem on `span{x, p}`, so the quotient never increases.
pub fn minimize_rayleigh(h: &RestrictedHamiltonian, start: &[f64], opts: &RayleighOptions) -> Result<RayleighResult> {
    minimize_deflated(h, start, opts, &[])
}

/// As [`minimize_rayleigh`], restricted to the orthogonal complement of the
/// unit vectors in `locked`.
pub fn minimize_deflated(
    h: &RestrictedHamiltonian,
    start: &[f64],
    opts: &RayleighOptions,
    locked: &[&[f64]],
) -> Result<RayleighResult> {
    let dim = h.dim();
    if start.len() != dim || locked.iter().any(|v| v.len() != dim) {
        return Err(Error::input("vector length does not match the Hamiltonian"));
    }
    let op = Scaled::new(h);
    let tol = opts.tolerance(dim);
    let precond = op.preconditioner();
    let project = |v: &mut [f64]| {
        for _ in 0..2 {
            for l in locked {
                let c = dot(l, v);
                v.iter_mut().zip(l.iter()).for_each(|(a, b)| *a -= c * b);
            }
        }
    };

    let mut x = start.to_vec();
    project(&mut x);
    let n0 = norm(&x);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(Error::input("start vector must be finite and nonzero outside the locked space"));
    }
    x.iter_mut().for_each(|v| *v /= n0);
    let mut kx = vec![0.0; dim];
    op.apply(&x, &mut kx);
    let mut rho = dot(&x, &kx);
    let mut r = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut p = vec![0.0; dim];
    let mut kp = vec![0.0; dim];
    let mut r_prev = vec![0.0; dim];
    let mut zr_prev = 0.0;
    let mut trace = Vec::new();
    let mut fresh = true;
    let mut it = 0;

    let residual = |r: &mut Vec<f64>, z: &mut Vec<f64>, x: &[f64], kx: &[f64], rho: f64| -> f64 {
        for i in 0..dim {
            r[i] = kx[i] - rho * x[i];
        }
        project(r);
        for i in 0..dim {
            z[i] = precond[i] * r[i];
        }
        project(z);
        match opts.norm {
            ResidualNorm::Plain => 2.0 * norm(r),
            ResidualNorm::Preconditioned => 2.0 * norm(z),
        }
    };

    loop {
        let mut grad = residual(&mut r, &mut z, &x, &kx, rho);
        if grad <= tol && !fresh {
            // Confirm against an exact product before accepting.
            op.apply(&x, &mut kx);
            rho = dot(&x, &kx);
            grad = residual(&mut r, &mut z, &x, &kx, rho);
        }
        if grad <= tol || it == opts.max_iter {
            if grad > tol {
                return Err(Error::Numerical(format!(
                    "Rayleigh minimization did not converge in {it} iterations (residual {grad:.3e}, tolerance {tol:.3e}, dim {dim})"
                )));
            }
            return Ok(RayleighResult {
                value: op.unscale(rho),
                scaled_value: rho,
                vector: x,
                gradient_norm: grad,
                iterations: it,
                trace,
            });
        }
        let zr = dot(&z, &r);
        let beta = if it == 0 || zr_prev == 0.0 {
            0.0
        } else {
            let zy: f64 = z.iter().zip(&r).zip(&r_prev).map(|((zi, ri), qi)| zi * (ri - qi)).sum();
            (zy / zr_prev).max(0.0)
        };
        for i in 0..dim {
            p[i] = -z[i] + beta * p[i];
        }
        project(&mut p);
        let mut ritz = orthonormal_direction(&x, &mut p);
        if ritz.is_none() && beta != 0.0 {
            for i in 0..dim {
                p[i] = -z[i];
            }
            ritz = orthonormal_direction(&x, &mut p);
        }
        let Some(scale) = ritz else {
            return Err(Error::Numerical(format!(
                "Rayleigh search direction vanished at iteration {it} (residual {grad:.3e}, dim {dim})"
            )));
        };
        op.apply(&p, &mut kp);
        let off = 0.5 * (dot(&x, &kp) + dot(&p, &kx));
        let (mu, c1, c2) = lowest_2x2(rho, dot(&p, &kp), off);
        for i in 0..dim {
            x[i] = c1 * x[i] + c2 * p[i];
            kx[i] = c1 * kx[i] + c2 * kp[i];
        }
        let nx = norm(&x);
        for i in 0..dim {
            x[i] /= nx;
            kx[i] /= nx;
        }
        it += 1;
        fresh = false;
        // Periodic refresh keeps the recurrence for K x from drifting.
        if it % 32 == 0 {
            op.apply(&x, &mut kx);
            fresh = true;
        }
        let new_rho = dot(&x, &kx);
        debug_assert!(
            new_rho <= rho + 1e-10 * rho.abs().max(1.0),
            "Rayleigh quotient increased: {rho} -> {new_rho} (Ritz {mu})"
        );
        rho = new_rho;
        if opts.record_trace {
            trace.push(op.unscale(rho));
        }
        // Keep the unnormalized direction for the next conjugation.
        for v in p.iter_mut() {
            *v *= scale;
        }
        std::mem::swap(&mut r_prev, &mut r);
        zr_prev = zr;
    }
}

/// Makes `p` orthogonal to the unit vector `x` and normalizes it; returns the
/// norm it had after orthogonalization.
fn orthonormal_direction(x: &[f64], p: &mut [f64]) -> Option<f64> {
    let before = norm(p);
    for _ in 0..2 {
        let c = dot(x, p);
        for (pi, xi) in p.iter_mut().zip(x) {
            *pi -= c * xi;
        }
    }
    let n = norm(p);
    if !(n > 1e-14 * before) || !n.is_finite() {
        return None;
    }
    for v in p.iter_mut() {
        *v /= n;
    }
    Some(n)
}

/// Gaussian random start vector.
pub fn random_vector(dim: usize, seed: u64, path: &[u64]) -> Vec<f64> {
    let mut rng = rng_from(seed, path);
    (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyCheck {
    pub degenerate: bool,
    /// `|<psi_1|psi_2>|` of the two minimizers.
    pub overlap: f64,
    pub primary: RayleighResult,
    pub secondary: RayleighResult,
}

pub const OVERLAP_THRESHOLD: f64 = 1e-8;

/// Minimizes from two mutually orthogonal random starts. A unique ground
/// state attracts both; otherwise they settle on different vectors.
pub fn detect_degeneracy(h: &RestrictedHamiltonian, seed: u64, opts: &RayleighOptions) -> Result<DegeneracyCheck> {
    let dim = h.dim();
    let x1 = random_vector(dim, seed, &[0]);
    let mut x2 = random_vector(dim, seed, &[1]);
    if dim > 1 {
        let n1 = dot(&x1, &x1);
        let c = dot(&x1, &x2) / n1;
        for (a, b) in x2.iter_mut().zip(&x1) {
            *a -= c * b;
        }
    }
    let primary = minimize_rayleigh(h, &x1, opts)?;
    let secondary = minimize_rayleigh(h, &x2, opts)?;
    let overlap = dot(&primary.vector, &secondary.vector).abs();
    Ok(DegeneracyCheck {
        degenerate: overlap <= 1.0 - OVERLAP_THRESHOLD,
        overlap,
        primary,
        secondary,
    })
}
