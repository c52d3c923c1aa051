//! Greedy approximation of a finite dictionary in R^m.
//!
//! Selection is restricted to a subset `F~` of the dictionary `F`, while the
//! approximation quality is tracked for both. Used to check the product
//! inequality linking greedy errors to (upper bounds of) Kolmogorov widths,
//! and to evaluate the explicit rate-transfer constants.

use std::io::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use thiserror::Error;

use crate::csvfmt::fmt_f64;

/// Distances at or below this are treated as zero (span membership).
pub const SPAN_TOL: f64 = 1e-12;

/// Relative tolerance under which two distances are considered tied.
pub const TIE_RTOL: f64 = 1e-12;

/// Largest number of sub-dictionaries enumerated by [`WidthMode::SubsetExhaustive`].
pub const EXHAUSTIVE_BUDGET: u128 = 1_000_000;

#[derive(Debug, Error, PartialEq)]
pub enum AbstractError {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("{combinations} sub-dictionaries exceed the exhaustive budget; use SubsetGreedy")]
    BudgetExceeded { combinations: u128 },
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbstractInstance {
    pub dictionary: Vec<Vec<f64>>,
    pub subset_ids: Vec<usize>,
    pub gamma: f64,
}

impl AbstractInstance {
    pub fn new(dictionary: Vec<Vec<f64>>, subset_ids: Vec<usize>, gamma: f64) -> Result<Self, AbstractError> {
        let inst = AbstractInstance {
            dictionary,
            subset_ids,
            gamma,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn validate(&self) -> Result<(), AbstractError> {
        let bad = |m: String| Err(AbstractError::InvalidInstance(m));
        let Some(first) = self.dictionary.first() else {
            return bad("dictionary is empty".into());
        };
        let m = first.len();
        if m == 0 {
            return bad("vectors must have positive length".into());
        }
        for (i, f) in self.dictionary.iter().enumerate() {
            if f.len() != m {
                return bad(format!("vector {i} has length {}, expected {m}", f.len()));
            }
            if f.iter().any(|v| !v.is_finite()) {
                return bad(format!("vector {i} is not finite"));
            }
            if norm(f) > 1.0 + 1e-12 {
                return bad(format!("vector {i} has norm {} > 1", norm(f)));
            }
        }
        if self.subset_ids.is_empty() {
            return bad("subset is empty".into());
        }
        let mut seen = vec![false; self.dictionary.len()];
        for &id in &self.subset_ids {
            if id >= self.dictionary.len() {
                return bad(format!("subset id {id} out of range"));
            }
            if std::mem::replace(&mut seen[id], true) {
                return bad(format!("subset id {id} repeated"));
            }
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad(format!("gamma must lie in (0, 1], got {}", self.gamma));
        }
        Ok(())
    }

    /// Seeded random instance: dimension in 2..=8, 4..=32 vectors drawn
    /// uniformly on the sphere with radius uniform in (0.1, 1), and a random
    /// non-empty subset.
    pub fn random(seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(2..=8);
        let size = rng.gen_range(4..=32);
        let dictionary = (0..size)
            .map(|_| {
                let v: Vec<f64> = (0..m).map(|_| rng.sample(StandardNormal)).collect();
                let scale = rng.gen_range(0.1..1.0) / norm(&v);
                v.into_iter().map(|x| x * scale).collect()
            })
            .collect();
        let mut subset_ids: Vec<usize> = (0..size).filter(|_| rng.gen_bool(0.5)).collect();
        if subset_ids.is_empty() {
            subset_ids.push(*(0..size).collect::<Vec<_>>().choose(&mut rng).unwrap());
        }
        AbstractInstance {
            dictionary,
            subset_ids,
            gamma: 1.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dictionary[0].len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AbstractStop {
    Steps,
    SubsetExhausted,
}

/// `sigma_tilde[n]` and `sigma_full[n]` are the largest distances from `F~`
/// and `F` to the span of the first `n` selected elements.
#[derive(Clone, Debug, PartialEq)]
pub struct GreedyRunRecord {
    pub selected: Vec<usize>,
    pub sigma_tilde: Vec<f64>,
    pub sigma_full: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub gamma: f64,
    pub stop: AbstractStop,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn clamp_dist(d: f64) -> f64 {
    if d <= SPAN_TOL {
        0.0
    } else {
        d
    }
}

/// Orthonormal direction of `v` against `basis` (two Gram-Schmidt passes),
/// or `None` if `v` lies in the span.
fn orthonormalize(v: &[f64], basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    let mut q = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = dot(&q, b);
            axpy(&mut q, -c, b);
        }
    }
    let n = norm(&q);
    (n > SPAN_TOL).then(|| q.into_iter().map(|x| x / n).collect())
}

/// Greedy selection from `F~` for at most `steps` steps. The lowest-id
/// element within a factor `gamma` of the best is taken; distances that agree
/// to [`TIE_RTOL`] count as ties.
pub fn abstract_run(inst: &AbstractInstance, steps: usize) -> Result<GreedyRunRecord, AbstractError> {
    inst.validate()?;
    if steps > inst.subset_ids.len() {
        return Err(AbstractError::Precondition(format!(
            "steps {steps} exceeds subset size {}",
            inst.subset_ids.len()
        )));
    }
    let mut in_subset = vec![false; inst.dictionary.len()];
    for &id in &inst.subset_ids {
        in_subset[id] = true;
    }
    let mut residuals = inst.dictionary.clone();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut selected = Vec::with_capacity(steps);
    let mut sigma_tilde = Vec::with_capacity(steps + 1);
    let mut sigma_full = Vec::with_capacity(steps + 1);
    let stop = loop {
        let dist: Vec<f64> = residuals.iter().map(|r| clamp_dist(norm(r))).collect();
        let full = dist.iter().copied().fold(0.0, f64::max);
        let tilde = inst.subset_ids.iter().map(|&i| dist[i]).fold(0.0, f64::max);
        sigma_full.push(full);
        sigma_tilde.push(tilde);
        if selected.len() == steps {
            break AbstractStop::Steps;
        }
        if tilde == 0.0 {
            break AbstractStop::SubsetExhausted;
        }
        let threshold = inst.gamma * tilde * (1.0 - TIE_RTOL);
        let chosen = (0..dist.len()).find(|&i| in_subset[i] && dist[i] >= threshold).unwrap();
        let Some(q) = orthonormalize(&residuals[chosen], &basis) else {
            break AbstractStop::SubsetExhausted;
        };
        for r in residuals.iter_mut() {
            let c = dot(r, &q);
            axpy(r, -c, &q);
        }
        basis.push(q);
        selected.push(chosen);
    };
    Ok(GreedyRunRecord {
        selected,
        sigma_tilde,
        sigma_full,
        basis,
        gamma: inst.gamma,
        stop,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WidthMode {
    SubsetExhaustive,
    SubsetGreedy,
}

fn binomial(n: usize, k: usize) -> u128 {
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Upper bound on the width `d_m(F)`: the best worst-case distance from `F`
/// to the span of an `m`-element sub-dictionary.
pub fn width_upper_bound(inst: &AbstractInstance, m: usize, mode: WidthMode) -> Result<f64, AbstractError> {
    inst.validate()?;
    if m == 0 {
        return Err(AbstractError::Precondition("m must be >= 1".into()));
    }
    let n = inst.dictionary.len();
    if m >= n {
        return Ok(0.0);
    }
    match mode {
        WidthMode::SubsetGreedy => {
            let all = AbstractInstance {
                dictionary: inst.dictionary.clone(),
                subset_ids: (0..n).collect(),
                gamma: 1.0,
            };
            let rec = abstract_run(&all, m)?;
            Ok(*rec.sigma_full.last().unwrap())
        }
        WidthMode::SubsetExhaustive => {
            let combinations = binomial(n, m);
            if combinations > EXHAUSTIVE_BUDGET {
                return Err(AbstractError::BudgetExceeded { combinations });
            }
            let mut best = f64::INFINITY;
            let mut residuals = inst.dictionary.clone();
            exhaustive(&mut residuals, 0, m, &mut best);
            Ok(best)
        }
    }
}

// Depth-first search over sub-dictionaries; `residuals` are the dictionary
// elements projected onto the complement of the partial span.
fn exhaustive(residuals: &mut Vec<Vec<f64>>, start: usize, remaining: usize, best: &mut f64) {
    if *best == 0.0 {
        return;
    }
    if remaining == 0 {
        let worst = residuals.iter().map(|r| clamp_dist(norm(r))).fold(0.0, f64::max);
        *best = best.min(worst);
        return;
    }
    let n = residuals.len();
    for i in start..=n - remaining {
        let r = &residuals[i];
        let len = norm(r);
        if len <= SPAN_TOL {
            // adding a dependent element changes nothing; a shorter span is never better
            exhaustive(residuals, i + 1, remaining - 1, best);
            continue;
        }
        let q: Vec<f64> = r.iter().map(|x| x / len).collect();
        let saved = residuals.clone();
        for r in residuals.iter_mut() {
            let c = dot(r, &q);
            axpy(r, -c, &q);
        }
        exhaustive(residuals, i + 1, remaining - 1, best);
        *residuals = saved;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProductReport {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Compares `prod_{i=1..K} sigma~_{N+i}^2` with
/// `gamma^{-2K} (K/m)^m (K/(K-m))^{K-m} sigma~_{N+1}^{2m} d_m^{2K-2m}`,
/// where `d_hat[m]` bounds `d_m(F)` from above.
pub fn check_product_inequality(
    rec: &GreedyRunRecord,
    d_hat: &[f64],
    n: usize,
    k: usize,
    m: usize,
) -> Result<ProductReport, AbstractError> {
    if k < 1 || m < 1 || m >= k {
        return Err(AbstractError::Precondition(format!("need 1 <= m < K, got m={m}, K={k}")));
    }
    if n + k >= rec.sigma_tilde.len() {
        return Err(AbstractError::Precondition(format!(
            "sigma index {} beyond the {} recorded values",
            n + k,
            rec.sigma_tilde.len()
        )));
    }
    let Some(&d) = d_hat.get(m) else {
        return Err(AbstractError::Precondition(format!("no width bound for m={m}")));
    };
    let lhs: f64 = (1..=k).map(|i| rec.sigma_tilde[n + i].powi(2)).product();
    let (kf, mf) = (k as f64, m as f64);
    let rhs = rec.gamma.powi(-2 * k as i32)
        * (kf / mf).powi(m as i32)
        * (kf / (kf - mf)).powi((k - m) as i32)
        * rec.sigma_tilde[n + 1].powi(2 * m as i32)
        * d.powi(2 * (k - m) as i32);
    Ok(ProductReport {
        n,
        k,
        m,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-10),
    })
}

/// Constant of the algebraic rate transfer: `C1 = 2^{5 alpha + 1} C0`.
pub fn transfer_algebraic(c0: f64, alpha: f64) -> f64 {
    (5.0 * alpha + 1.0).exp2() * c0
}

/// Exponential rate transfer: `(sqrt(2 C0), 2^{-1-2 alpha} c0)`.
pub fn transfer_exponential(c0_big: f64, c0: f64, alpha: f64) -> (f64, f64) {
    ((2.0 * c0_big).sqrt(), (-1.0 - 2.0 * alpha).exp2() * c0)
}

/// Rate transfer for `exp(-c log(n) n^alpha)` decay, valid from n = 2 on:
/// `(sqrt(2 C0), 2^{-2-2 alpha} c0)`.
pub fn transfer_logexponential(c0_big: f64, c0: f64, alpha: f64) -> (f64, f64) {
    ((2.0 * c0_big).sqrt(), (-2.0 - 2.0 * alpha).exp2() * c0)
}

/// One line of the randomized verification report.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerificationRow {
    pub instance_seed: u64,
    pub report: ProductReport,
}

/// Largest K used by [`verify_instance`].
pub const MAX_K: usize = 6;

/// Runs the product inequality on a random instance for every admissible
/// `(N, K, m)` with `K <= 6`.
pub fn verify_instance(seed: u64) -> Result<Vec<VerificationRow>, AbstractError> {
    let inst = AbstractInstance::random(seed);
    let rec = abstract_run(&inst, inst.subset_ids.len())?;
    let mut d_hat = vec![f64::NAN];
    for m in 1..MAX_K {
        let mode = if binomial(inst.dictionary.len().max(m), m) <= EXHAUSTIVE_BUDGET {
            WidthMode::SubsetExhaustive
        } else {
            WidthMode::SubsetGreedy
        };
        d_hat.push(width_upper_bound(&inst, m, mode)?);
    }
    let last = rec.sigma_tilde.len() - 1;
    let mut rows = Vec::new();
    for k in 2..=MAX_K.min(last) {
        for m in 1..k {
            for n in 0..=last - k {
                let report = check_product_inequality(&rec, &d_hat, n, k, m)?;
                rows.push(VerificationRow {
                    instance_seed: seed,
                    report,
                });
            }
        }
    }
    Ok(rows)
}

/// `instance_seed,N,K,m,lhs,rhs,holds`
pub fn write_verification_csv<W: Write>(rows: &[VerificationRow], out: W) -> Result<(), AbstractError> {
    let io = |e: csv::Error| AbstractError::Io(e.to_string());
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["instance_seed", "N", "K", "m", "lhs", "rhs", "holds"]).map_err(io)?;
    for r in rows {
        let p = &r.report;
        w.write_record([
            r.instance_seed.to_string(),
            p.n.to_string(),
            p.k.to_string(),
            p.m.to_string(),
            fmt_f64(p.lhs),
            fmt_f64(p.rhs),
            p.holds.to_string(),
        ])
        .map_err(io)?;
    }
    w.flush().map_err(|e| AbstractError::Io(e.to_string()))
}
