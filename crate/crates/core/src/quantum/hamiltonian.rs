use rayon::prelude::*;

use super::basis::{Driver, Packing, SubspaceBasis};
use crate::error::{Error, Result};
use crate::instance::IsingInstance;

/// Compressed sparse rows for a real symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric {
    pub dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSymmetric {
    /// Builds from per-row `(col, value)` lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let dim = rows.len();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (c, v) in row {
                if cols.len() > *row_ptr.last().unwrap() && *cols.last().unwrap() == c {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(c);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        SparseSymmetric { dim, row_ptr, cols, vals }
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|e| e.0 == j).map_or(0.0, |e| e.1)
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[f64], y: &mut [f64]) {
        let kernel = |(i, yi): (usize, &mut f64)| {
            *yi = self.row(i).map(|(c, v)| v * x[c]).sum();
        };
        if self.dim >= 4096 {
            y.par_iter_mut().enumerate().for_each(kernel);
        } else {
            y.iter_mut().enumerate().for_each(kernel);
        }
    }

    pub fn max_asymmetry(&self) -> f64 {
        (0..self.dim)
            .flat_map(|i| self.row(i).map(move |(j, v)| (i, j, v)))
            .map(|(i, j, v)| (v - self.get(j, i)).abs())
            .fold(0.0, f64::max)
    }
}

/// `H(s) = (1 - s) H_d + s H_p` projected onto a subspace.
///
/// Stored split as driver and diagonal so any `s` can be formed cheaply.
#[derive(Debug, Clone)]
pub struct RestrictedHamiltonian {
    pub s: f64,
    pub driver: SparseSymmetric,
    /// Problem energies of the basis states.
    pub diagonal: Vec<f64>,
    pub ground_energy: f64,
    pub ground_dim: usize,
}

impl RestrictedHamiltonian {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn at(&self, s: f64) -> Self {
        RestrictedHamiltonian { s, ..self.clone() }
    }

    /// `y = H(s) x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.driver.mul(x, y);
        let a = 1.0 - self.s;
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diagonal) {
            *yi = a * *yi + self.s * d * xi;
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let d = if i == j { self.s * self.diagonal[i] } else { 0.0 };
        (1.0 - self.s) * self.driver.get(i, j) + d
    }

    pub fn rayleigh_quotient(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        dot(x, &y) / dot(x, x)
    }
}

/// Matrix of `H(s)` in the symmetric basis.
///
/// A driver term maps a pair vector onto another pair vector, so each
/// element is the sum of coefficients of terms linking the two pairs.
pub fn restrict_hamiltonian(
    instance: &IsingInstance,
    driver: &Driver,
    basis: &SubspaceBasis,
    s: f64,
) -> Result<RestrictedHamiltonian> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::input(format!("s = {s} outside [0, 1]")));
    }
    if instance.spin_count() != basis.spin_count {
        return Err(Error::input("basis and instance disagree on spin count"));
    }
    let n = basis.spin_count;
    let packing = Packing::new(n);
    let terms = driver.terms(n);
    let rows: Vec<Vec<(usize, f64)>> = (0..basis.dim())
        .into_par_iter()
        .map(|k| {
            let base = basis.state(k);
            let mut row = Vec::new();
            let mut next = base.to_vec();
            for &(mask, coef) in &terms {
                next.copy_from_slice(base);
                packing.apply(&mut next, mask);
                packing.canonicalize(&mut next);
                if let Some(j) = basis.lookup(&next) {
                    row.push((j, coef));
                }
            }
            row
        })
        .collect();
    let diagonal: Vec<f64> = (0..basis.dim())
        .into_par_iter()
        .map(|k| instance.energy_unchecked(basis.state_config(k).spins()) as f64)
        .collect();
    let ground_energy = diagonal[..basis.ground_dim].iter().copied().fold(f64::INFINITY, f64::min);
    if diagonal[..basis.ground_dim].iter().any(|&e| e != ground_energy)
        || diagonal[basis.ground_dim..].iter().any(|&e| e <= ground_energy)
    {
        return Err(Error::Integrity("basis ground states do not share the minimum energy".into()));
    }
    Ok(RestrictedHamiltonian {
        s,
        driver: SparseSymmetric::from_rows(rows),
        diagonal,
        ground_energy,
        ground_dim: basis.ground_dim,
    })
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
