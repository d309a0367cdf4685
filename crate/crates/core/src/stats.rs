//! Comparing ground-state distributions: chi-squared distances, bootstrap
//! p-values, bias, and mixtures of samplers.

use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::rng_from;

/// Probabilities at or below this are treated as zero when comparing the
/// supports of analytic distributions.
pub const ZERO_PROBABILITY: f64 = 1e-6;

/// Analytic pairs closer than this in total variation count as identical.
pub const ANALYTIC_TV_TOLERANCE: f64 = 1e-9;

pub const DEFAULT_BOOTSTRAP: usize = 10_000;

/// A distribution over a shared solution list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gsd {
    /// Counts of ground-state hits; `N` is their sum.
    Empirical(Vec<u64>),
    Analytic(Vec<f64>),
}

impl Gsd {
    pub fn len(&self) -> usize {
        match self {
            Gsd::Empirical(c) => c.len(),
            Gsd::Analytic(p) => p.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn total(&self) -> Option<u64> {
        match self {
            Gsd::Empirical(c) => Some(c.iter().sum()),
            Gsd::Analytic(_) => None,
        }
    }

    pub fn probabilities(&self) -> Vec<f64> {
        match self {
            Gsd::Empirical(c) => {
                let n: u64 = c.iter().sum();
                c.iter().map(|&k| if n == 0 { 0.0 } else { k as f64 / n as f64 }).collect()
            }
            Gsd::Analytic(p) => p.clone(),
        }
    }
}

fn same_len(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::input(format!("distributions have {a} and {b} entries")));
    }
    Ok(())
}

/// Squared chi-squared distance between two count vectors. Indices where
/// both counts are zero contribute nothing.
pub fn chi2_distance_sq(n1: &[u64], n2: &[u64]) -> Result<f64> {
    same_len(n1.len(), n2.len())?;
    let t1: u64 = n1.iter().sum();
    let t2: u64 = n2.iter().sum();
    if t1 == 0 || t2 == 0 {
        return Err(Error::input("chi-squared distance needs positive totals on both sides"));
    }
    let (f12, f21) = ((t1 as f64 / t2 as f64).sqrt(), (t2 as f64 / t1 as f64).sqrt());
    Ok(n1
        .iter()
        .zip(n2)
        .filter(|(&a, &b)| a + b > 0)
        .map(|(&a, &b)| {
            let diff = f12 * b as f64 - f21 * a as f64;
            diff * diff / (a + b) as f64
        })
        .sum())
}

/// Squared chi-squared distance of counts from an exact distribution.
///
/// Counts on an index of zero probability make the difference certain;
/// that case returns `f64::INFINITY`.
pub fn chi2_one_sided_sq(n1: &[u64], p2: &[f64]) -> Result<f64> {
    same_len(n1.len(), p2.len())?;
    let t1: u64 = n1.iter().sum();
    if t1 == 0 {
        return Err(Error::input("chi-squared distance needs a positive sample total"));
    }
    let t1 = t1 as f64;
    let mut total = 0.0;
    for (&n, &p) in n1.iter().zip(p2) {
        if p <= 0.0 {
            if n > 0 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        let expect = t1 * p;
        total += (expect - n as f64).powi(2) / expect;
    }
    Ok(total)
}

pub fn is_certain_difference(statistic: f64) -> bool {
    statistic == f64::INFINITY
}

/// Chi-squared distance between two distributions, one-sided when either is
/// analytic.
pub fn distance(a: &Gsd, b: &Gsd) -> Result<f64> {
    match (a, b) {
        (Gsd::Empirical(x), Gsd::Empirical(y)) => chi2_distance_sq(x, y),
        (Gsd::Empirical(x), Gsd::Analytic(p)) | (Gsd::Analytic(p), Gsd::Empirical(x)) => chi2_one_sided_sq(x, p),
        (Gsd::Analytic(_), Gsd::Analytic(_)) => Err(Error::input(
            "two analytic distributions have no sampling noise; compare them by total variation",
        )),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    /// `exceedances / n_bootstrap`.
    pub p_value: f64,
    pub exceedances: usize,
    pub n_bootstrap: usize,
    /// Tail probability of the statistic under a chi-squared law.
    pub asymptotic_p: f64,
}

impl TestResult {
    /// `true` when no replicate reached the observed distance.
    pub fn below_resolution(&self) -> bool {
        self.exceedances == 0
    }
}

/// Draws `total` samples from `p` by sequential binomials.
fn multinomial(total: u64, p: &[f64], rng: &mut crate::rng::Rng) -> Vec<u64> {
    let mut left = total;
    let mut mass = 1.0;
    let mut out = vec![0u64; p.len()];
    for (k, &pk) in p.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == p.len() || mass <= 0.0 {
            out[k] = left;
            break;
        }
        let q = (pk / mass).clamp(0.0, 1.0);
        let draw = if q == 0.0 {
            0
        } else if q == 1.0 {
            left
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        out[k] = draw;
        left -= draw;
        mass -= pk;
    }
    out
}

/// Bootstrapped test of whether two distributions differ.
///
/// The null is the pooled distribution, weighted by sample sizes (an
/// analytic side has infinite weight and is held fixed). Each replicate
/// redraws the empirical side(s) from the null; the p-value is the share of
/// replicates at least as far apart as the observed pair.
pub fn bootstrap_ks(a: &Gsd, b: &Gsd, n_bootstrap: usize, seed: u64) -> Result<TestResult> {
    same_len(a.len(), b.len())?;
    if n_bootstrap == 0 {
        return Err(Error::input("n_bootstrap must be positive"));
    }
    let observed = distance(a, b)?;
    let (null, analytic_side): (Vec<f64>, Option<Vec<f64>>) = match (a, b) {
        (Gsd::Empirical(x), Gsd::Empirical(y)) => {
            let total = (x.iter().sum::<u64>() + y.iter().sum::<u64>()) as f64;
            (x.iter().zip(y).map(|(&i, &j)| (i + j) as f64 / total).collect(), None)
        }
        (Gsd::Analytic(p), _) | (_, Gsd::Analytic(p)) => (p.clone(), Some(p.clone())),
    };
    let (t1, t2) = match (a, b) {
        (Gsd::Empirical(x), Gsd::Empirical(y)) => (x.iter().sum::<u64>(), y.iter().sum::<u64>()),
        (Gsd::Empirical(x), _) | (_, Gsd::Empirical(x)) => (x.iter().sum::<u64>(), 0),
        _ => unreachable!(),
    };
    let exceedances = (0..n_bootstrap)
        .into_par_iter()
        .map(|r| {
            let mut rng = rng_from(seed, &[r as u64]);
            let s1 = multinomial(t1, &null, &mut rng);
            let d = match &analytic_side {
                Some(p) => chi2_one_sided_sq(&s1, p),
                None => chi2_distance_sq(&s1, &multinomial(t2, &null, &mut rng)),
            }
            .expect("replicate shapes match");
            usize::from(d >= observed)
        })
        .sum::<usize>();
    let support = null.iter().filter(|&&p| p > 0.0).count();
    Ok(TestResult {
        statistic: observed,
        p_value: exceedances as f64 / n_bootstrap as f64,
        exceedances,
        n_bootstrap,
        asymptotic_p: asymptotic_p_value(observed, support.saturating_sub(1)),
    })
}

/// Upper tail of the chi-squared law with `dof` degrees of freedom.
pub fn asymptotic_p_value(statistic: f64, dof: usize) -> f64 {
    if statistic.is_infinite() {
        return 0.0;
    }
    if dof == 0 {
        return if statistic > 0.0 { 0.0 } else { 1.0 };
    }
    let law = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    law.sf(statistic.max(0.0))
}

/// Normalized L1 distance from the flat distribution: 0 flat, 1 point mass.
pub fn bias(p: &[f64]) -> Result<f64> {
    let d = p.len();
    if d < 2 {
        return Err(Error::input(format!("bias is undefined for a degenerate instance with {d} ground state(s)")));
    }
    // Scaled by d so that point masses sum exact integers; entries equal
    // to the stored 1/d contribute nothing, so flat inputs give exactly 0.
    let (n, flat) = (d as f64, 1.0 / d as f64);
    let l1: f64 = p.iter().filter(|&&x| x != flat).map(|&x| (n * x - 1.0).abs()).sum();
    Ok(l1 / (2.0 * (n - 1.0)))
}

/// Weighted mixture of distributions; equal weights when `weights` is `None`.
pub fn combine_gsds(parts: &[&[f64]], weights: Option<&[f64]>) -> Result<Vec<f64>> {
    let Some(first) = parts.first() else {
        return Err(Error::input("nothing to combine"));
    };
    for part in parts {
        same_len(first.len(), part.len())?;
    }
    let equal = vec![1.0 / parts.len() as f64; parts.len()];
    let w = weights.unwrap_or(&equal);
    if w.len() != parts.len() {
        return Err(Error::input("one weight per distribution is required"));
    }
    if (w.iter().sum::<f64>() - 1.0).abs() > 1e-12 || w.iter().any(|&x| x < 0.0) {
        return Err(Error::input("weights must be non-negative and sum to 1"));
    }
    Ok((0..first.len()).map(|i| parts.iter().zip(w).map(|(p, wk)| wk * p[i]).sum()).collect())
}

pub fn total_variation(p: &[f64], q: &[f64]) -> Result<f64> {
    same_len(p.len(), q.len())?;
    Ok(0.5 * p.iter().zip(q).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Indices where one distribution is zero and the other is not.
pub fn support_mismatches(p: &[f64], q: &[f64]) -> Result<Vec<usize>> {
    same_len(p.len(), q.len())?;
    Ok((0..p.len())
        .filter(|&i| (p[i] <= ZERO_PROBABILITY) != (q[i] <= ZERO_PROBABILITY))
        .collect())
}

/// One instance, one pair of methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub instance_id: String,
    pub method_a: String,
    pub method_b: String,
    /// Chi-squared distance, or total variation for two analytic methods.
    pub chi2: f64,
    pub p_value: f64,
    pub bias_a: f64,
    pub bias_b: f64,
    /// Bias of the equal mixture of both methods.
    pub bias_combined: f64,
    pub support_mismatches: usize,
}

/// Compares two distributions on one instance.
pub fn compare(
    instance_id: &str,
    (name_a, a): (&str, &Gsd),
    (name_b, b): (&str, &Gsd),
    n_bootstrap: usize,
    seed: u64,
) -> Result<ComparisonRow> {
    same_len(a.len(), b.len())?;
    let (pa, pb) = (a.probabilities(), b.probabilities());
    let (chi2, p_value) = match (a, b) {
        (Gsd::Analytic(_), Gsd::Analytic(_)) => {
            let tv = total_variation(&pa, &pb)?;
            (tv, if tv <= ANALYTIC_TV_TOLERANCE { 1.0 } else { 0.0 })
        }
        _ => {
            let t = bootstrap_ks(a, b, n_bootstrap, seed)?;
            (t.statistic, t.p_value)
        }
    };
    Ok(ComparisonRow {
        instance_id: instance_id.to_string(),
        method_a: name_a.to_string(),
        method_b: name_b.to_string(),
        chi2,
        p_value,
        bias_a: bias(&pa)?,
        bias_b: bias(&pb)?,
        bias_combined: bias(&combine_gsds(&[&pa, &pb], None)?)?,
        support_mismatches: support_mismatches(&pa, &pb)?.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub method_a: String,
    pub method_b: String,
    pub instances: usize,
    pub flagged: usize,
    pub flagged_fraction: f64,
    pub median_bias_a: f64,
    pub median_bias_b: f64,
    pub median_bias_combined: f64,
    /// Instances whose mixture is no more biased than method A alone.
    pub combined_not_worse: usize,
    pub support_mismatch_instances: usize,
    pub support_mismatch_states: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub p_threshold: f64,
    pub pairs: Vec<PairSummary>,
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

/// Per method pair: share of instances flagged at `p < p_threshold` and
/// median biases. Pairs appear in order of first occurrence.
pub fn pairwise_report(rows: &[ComparisonRow], p_threshold: f64) -> Report {
    let mut keys: Vec<(String, String)> = Vec::new();
    for r in rows {
        let key = (r.method_a.clone(), r.method_b.clone());
        if !keys.contains(&key) {
            keys.push(key);
        }
    }
    let pairs = keys
        .into_iter()
        .map(|(a, b)| {
            let sel: Vec<&ComparisonRow> = rows.iter().filter(|r| r.method_a == a && r.method_b == b).collect();
            let flagged = sel.iter().filter(|r| r.p_value < p_threshold).count();
            let col = |f: fn(&ComparisonRow) -> f64| median(&sel.iter().map(|r| f(r)).collect::<Vec<_>>());
            PairSummary {
                instances: sel.len(),
                flagged,
                flagged_fraction: flagged as f64 / sel.len() as f64,
                median_bias_a: col(|r| r.bias_a),
                median_bias_b: col(|r| r.bias_b),
                median_bias_combined: col(|r| r.bias_combined),
                combined_not_worse: sel.iter().filter(|r| r.bias_combined <= r.bias_a).count(),
                support_mismatch_instances: sel.iter().filter(|r| r.support_mismatches > 0).count(),
                support_mismatch_states: sel.iter().map(|r| r.support_mismatches).sum(),
                method_a: a,
                method_b: b,
            }
        })
        .collect();
    Report { p_threshold, pairs }
}
