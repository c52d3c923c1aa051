//! Greedy kernel interpolation on a finite candidate set.
//!
//! The state keeps the Newton basis evaluated at every candidate. Adding a
//! node `x_{n+1}` appends one column
//!
//! ```text
//! N_{n+1}(x) = (k(x, x_{n+1}) - sum_j N_j(x) N_j(x_{n+1})) / P_n(x_{n+1})
//! ```
//!
//! and updates the squared power function by `P_{n+1}(x)^2 = P_n(x)^2 - N_{n+1}(x)^2`.
//! Every sup norm is a maximum over the candidate set.

use std::io::Write;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvfmt::fmt_f64;
use crate::domains::CandidateSet;
use crate::kernels::{gram, KernelError, KernelSpec};

/// Squared pivot below which the Gram matrix is treated as numerically singular.
pub const PIVOT_TOL: f64 = 1e-14;

/// Largest Gram condition estimate accepted by [`power_direct`].
pub const MAX_CONDITION: f64 = 1.0 / f64::EPSILON;

#[derive(Debug, Error, PartialEq)]
pub enum GreedyError {
    #[error("candidate set is empty")]
    EmptyCandidates,
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("invalid selection rule: {0}")]
    InvalidRule(String),
    #[error("candidate {0} is already selected")]
    AlreadySelected(usize),
    #[error("candidate id {0} out of range")]
    OutOfRange(usize),
    #[error("numerical rank reached at candidate {id} (squared pivot {pivot2:e})")]
    RankDeficient { id: usize, pivot2: f64 },
    #[error("Gram matrix is ill-conditioned (condition estimate {condition_estimate:e})")]
    IllConditioned { condition_estimate: f64 },
    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("i/o: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    PGreedy,
    FGreedy,
    FOverPGreedy,
}

/// Point selection rule.
///
/// With `gamma < 1` the rule is weak: the next node is drawn uniformly (from
/// a generator seeded by `seed`) among the candidates whose score is at least
/// `gamma` times the maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct SelectionRule {
    pub kind: RuleKind,
    pub gamma: f64,
    pub seed: u64,
    /// Target values at every candidate; required by the f-based rules.
    pub target: Option<Vec<f64>>,
}

impl SelectionRule {
    pub fn p_greedy() -> Self {
        SelectionRule {
            kind: RuleKind::PGreedy,
            gamma: 1.0,
            seed: 0,
            target: None,
        }
    }

    pub fn f_greedy(target: Vec<f64>) -> Self {
        SelectionRule {
            kind: RuleKind::FGreedy,
            target: Some(target),
            ..Self::p_greedy()
        }
    }

    pub fn f_over_p_greedy(target: Vec<f64>) -> Self {
        SelectionRule {
            kind: RuleKind::FOverPGreedy,
            target: Some(target),
            ..Self::p_greedy()
        }
    }

    pub fn weak(mut self, gamma: f64, seed: u64) -> Self {
        self.gamma = gamma;
        self.seed = seed;
        self
    }

    pub fn validate(&self, n_candidates: usize) -> Result<(), GreedyError> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(GreedyError::InvalidRule(format!("gamma must lie in (0, 1], got {}", self.gamma)));
        }
        match (&self.kind, &self.target) {
            (RuleKind::PGreedy, Some(_)) => Err(GreedyError::InvalidRule("P-greedy takes no target".into())),
            (RuleKind::PGreedy, None) => Ok(()),
            (_, None) => Err(GreedyError::InvalidRule("f-based rules need target values".into())),
            (_, Some(t)) if t.len() != n_candidates => Err(GreedyError::LengthMismatch {
                expected: n_candidates,
                got: t.len(),
            }),
            (_, Some(t)) if t.iter().any(|v| !v.is_finite()) => {
                Err(GreedyError::InvalidRule("target values must be finite".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    MaxPoints,
    PowerTolerance,
    NumericalRank,
    Exhausted,
}

impl StopReason {
    pub fn as_str(self) -> &'static str {
        match self {
            StopReason::MaxPoints => "max_points",
            StopReason::PowerTolerance => "power_tol",
            StopReason::NumericalRank => "numerical_rank",
            StopReason::Exhausted => "exhausted",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            StopReason::MaxPoints,
            StopReason::PowerTolerance,
            StopReason::NumericalRank,
            StopReason::Exhausted,
        ]
        .into_iter()
        .find(|r| r.as_str() == s)
    }
}

/// One row of the selection trace. `step` equals the number of nodes selected
/// before this row; `sigma` is the maximal rule score at that moment. The final
/// row of a finished run carries no selection and holds the stop reason.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub step: usize,
    pub selected: Option<usize>,
    pub sigma: f64,
    pub chosen_score: f64,
    pub max_power: f64,
    pub elapsed: Duration,
    pub stop: Option<StopReason>,
}

impl TraceRecord {
    /// Equality on everything except the wall-clock time.
    pub fn same_values(&self, other: &TraceRecord) -> bool {
        self.step == other.step
            && self.selected == other.selected
            && self.sigma.to_bits() == other.sigma.to_bits()
            && self.chosen_score.to_bits() == other.chosen_score.to_bits()
            && self.max_power.to_bits() == other.max_power.to_bits()
            && self.stop == other.stop
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepOutcome {
    Selected(usize),
    Terminated(StopReason),
}

/// Selected nodes, Newton basis at every candidate, and squared power function.
#[derive(Clone, Debug)]
pub struct GreedyState {
    kernel: KernelSpec,
    candidates: CandidateSet,
    selected: Vec<usize>,
    is_selected: Vec<bool>,
    // row i holds N_1(x_i), ..., N_n(x_i)
    newton: Vec<Vec<f64>>,
    pivots: Vec<f64>,
    power2: Vec<f64>,
    min_unclamped: f64,
    residual: Option<Vec<f64>>,
    rng: Option<ChaCha8Rng>,
    trace: Vec<TraceRecord>,
    stop: Option<StopReason>,
    started: Instant,
}

impl GreedyState {
    pub fn new(kernel: KernelSpec, candidates: CandidateSet) -> Result<Self, GreedyError> {
        Self::with_capacity(kernel, candidates, 0)
    }

    /// Like [`Self::new`], reserving room for `capacity` Newton columns.
    pub fn with_capacity(kernel: KernelSpec, candidates: CandidateSet, capacity: usize) -> Result<Self, GreedyError> {
        if candidates.is_empty() {
            return Err(GreedyError::EmptyCandidates);
        }
        kernel.validate()?;
        if let Some(d) = kernel.required_dim() {
            if d != candidates.dim() {
                return Err(KernelError::DimensionMismatch(d, candidates.dim()).into());
            }
        }
        let n = candidates.len();
        let power2 = candidates.iter().map(|x| kernel.diag_value(x)).collect();
        Ok(GreedyState {
            kernel,
            selected: Vec::with_capacity(capacity),
            is_selected: vec![false; n],
            newton: (0..n).map(|_| Vec::with_capacity(capacity)).collect(),
            pivots: Vec::with_capacity(capacity),
            power2,
            min_unclamped: 0.0,
            residual: None,
            rng: None,
            trace: Vec::new(),
            stop: None,
            started: Instant::now(),
            candidates,
        })
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.candidates
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    pub fn selected_points(&self) -> Vec<Vec<f64>> {
        self.selected.iter().map(|&i| self.candidates.point(i).to_vec()).collect()
    }

    pub fn n_selected(&self) -> usize {
        self.selected.len()
    }

    /// Squared power function at every candidate.
    pub fn power2(&self) -> &[f64] {
        &self.power2
    }

    /// Power function at every candidate.
    pub fn power(&self) -> Vec<f64> {
        self.power2.iter().map(|p| p.sqrt()).collect()
    }

    /// Smallest squared power value observed before clamping (0 if none was negative).
    pub fn min_unclamped_power2(&self) -> f64 {
        self.min_unclamped
    }

    /// `N_j(x_i)` for candidate `i` and basis index `j`.
    pub fn newton(&self, i: usize, j: usize) -> f64 {
        self.newton[i][j]
    }

    /// Newton basis values at candidate `i`.
    pub fn newton_row(&self, i: usize) -> &[f64] {
        &self.newton[i]
    }

    /// `P_{j-1}(x_j)` for each selected node, in selection order.
    pub fn newton_diag(&self) -> &[f64] {
        &self.pivots
    }

    pub fn residual(&self) -> Option<&[f64]> {
        self.residual.as_deref()
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    pub fn stop_reason(&self) -> Option<StopReason> {
        self.stop
    }

    /// Maximum of the power function over the candidates.
    pub fn max_power(&self) -> f64 {
        self.power2.iter().copied().fold(0.0, f64::max).sqrt()
    }

    fn score(&self, kind: RuleKind, i: usize) -> f64 {
        match kind {
            RuleKind::PGreedy => self.power2[i].sqrt(),
            RuleKind::FGreedy => self.residual.as_ref().map_or(0.0, |r| r[i].abs()),
            RuleKind::FOverPGreedy => {
                if self.power2[i] > PIVOT_TOL {
                    self.residual.as_ref().map_or(0.0, |r| r[i].abs() / self.power2[i].sqrt())
                } else {
                    0.0
                }
            }
        }
    }

    /// Maximal score over unselected candidates and its lowest-id maximizer.
    fn best(&self, kind: RuleKind) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in (0..self.candidates.len()).filter(|&i| !self.is_selected[i]) {
            let s = self.score(kind, i);
            match best {
                Some((_, b)) if s <= b => {}
                _ => best = Some((i, s)),
            }
        }
        best
    }

    fn ensure_residual(&mut self, rule: &SelectionRule) {
        if self.residual.is_some() {
            return;
        }
        let Some(target) = &rule.target else {
            return;
        };
        let mut r = target.clone();
        for (j, &node) in self.selected.iter().enumerate() {
            let coef = r[node] / self.newton[node][j];
            for (ri, row) in r.iter_mut().zip(&self.newton) {
                *ri -= coef * row[j];
            }
        }
        self.residual = Some(r);
    }

    /// One greedy iteration.
    pub fn step(&mut self, rule: &SelectionRule) -> Result<StepOutcome, GreedyError> {
        if let Some(reason) = self.stop {
            return Ok(StepOutcome::Terminated(reason));
        }
        rule.validate(self.candidates.len())?;
        self.ensure_residual(rule);
        let Some((argmax, sigma)) = self.best(rule.kind) else {
            self.finish(StopReason::Exhausted, rule);
            return Ok(StepOutcome::Terminated(StopReason::Exhausted));
        };
        let chosen = if rule.gamma < 1.0 {
            let threshold = rule.gamma * sigma;
            let admissible: Vec<usize> = (0..self.candidates.len())
                .filter(|&i| !self.is_selected[i] && self.score(rule.kind, i) >= threshold)
                .collect();
            let rng = self.rng.get_or_insert_with(|| ChaCha8Rng::seed_from_u64(rule.seed));
            admissible[rng.gen_range(0..admissible.len())]
        } else {
            argmax
        };
        if self.power2[chosen] < PIVOT_TOL {
            self.finish(StopReason::NumericalRank, rule);
            return Ok(StepOutcome::Terminated(StopReason::NumericalRank));
        }
        self.trace.push(TraceRecord {
            step: self.selected.len(),
            selected: Some(chosen),
            sigma,
            chosen_score: self.score(rule.kind, chosen),
            max_power: self.max_power(),
            elapsed: self.started.elapsed(),
            stop: None,
        });
        self.add_node(chosen);
        Ok(StepOutcome::Selected(chosen))
    }

    /// Appends the given candidate as the next node, bypassing the selection rule.
    pub fn insert(&mut self, id: usize) -> Result<(), GreedyError> {
        if id >= self.candidates.len() {
            return Err(GreedyError::OutOfRange(id));
        }
        if self.is_selected[id] {
            return Err(GreedyError::AlreadySelected(id));
        }
        if self.power2[id] < PIVOT_TOL {
            return Err(GreedyError::RankDeficient {
                id,
                pivot2: self.power2[id],
            });
        }
        self.add_node(id);
        Ok(())
    }

    /// Records the terminal trace row. Later calls to [`Self::step`] keep
    /// reporting `reason`.
    pub fn finish(&mut self, reason: StopReason, rule: &SelectionRule) {
        if self.stop.is_some() {
            return;
        }
        let sigma = self.best(rule.kind).map_or(0.0, |(_, s)| s);
        self.trace.push(TraceRecord {
            step: self.selected.len(),
            selected: None,
            sigma,
            chosen_score: 0.0,
            max_power: self.max_power(),
            elapsed: self.started.elapsed(),
            stop: Some(reason),
        });
        self.stop = Some(reason);
    }

    fn add_node(&mut self, id: usize) {
        let pivot = self.power2[id].sqrt();
        let node_row = self.newton[id].clone();
        let node = self.candidates.point(id).to_vec();
        let mut min_unclamped = self.min_unclamped;
        for (i, (row, p2)) in self.newton.iter_mut().zip(self.power2.iter_mut()).enumerate() {
            let kv = self.kernel.value(self.candidates.point(i), &node);
            let v = (kv - dot(row, &node_row)) / pivot;
            row.push(v);
            let updated = *p2 - v * v;
            min_unclamped = min_unclamped.min(updated);
            *p2 = updated.max(0.0);
        }
        self.min_unclamped = min_unclamped;
        self.power2[id] = 0.0;
        let j = self.selected.len();
        if let Some(r) = self.residual.as_mut() {
            let coef = r[id] / self.newton[id][j];
            for (ri, row) in r.iter_mut().zip(&self.newton) {
                *ri -= coef * row[j];
            }
        }
        self.is_selected[id] = true;
        self.selected.push(id);
        self.pivots.push(pivot);
    }

    /// Newton basis values `N_1(x), ..., N_n(x)` at an arbitrary point.
    pub fn newton_values_at(&self, x: &[f64]) -> Result<Vec<f64>, GreedyError> {
        if x.len() != self.candidates.dim() {
            return Err(KernelError::DimensionMismatch(self.candidates.dim(), x.len()).into());
        }
        let mut out = Vec::with_capacity(self.selected.len());
        for (j, &node) in self.selected.iter().enumerate() {
            let kv = self.kernel.value(x, self.candidates.point(node));
            let v = (kv - dot(&out, &self.newton[node][..j])) / self.pivots[j];
            out.push(v);
        }
        Ok(out)
    }

    /// Power function at an arbitrary point.
    pub fn power_at(&self, x: &[f64]) -> Result<f64, GreedyError> {
        let nv = self.newton_values_at(x)?;
        let p2 = self.kernel.diag_value(x) - nv.iter().map(|v| v * v).sum::<f64>();
        Ok(p2.max(0.0).sqrt())
    }

    /// Newton coefficients of the interpolant of `f_at_selected` (forward
    /// substitution with the lower-triangular matrix `N_j(x_i)`).
    pub fn newton_coefficients(&self, f_at_selected: &[f64]) -> Result<Vec<f64>, GreedyError> {
        let n = self.selected.len();
        if f_at_selected.len() != n {
            return Err(GreedyError::LengthMismatch {
                expected: n,
                got: f_at_selected.len(),
            });
        }
        let mut c = Vec::with_capacity(n);
        for (i, &node) in self.selected.iter().enumerate() {
            let row = &self.newton[node];
            let v = (f_at_selected[i] - dot(&row[..i], &c)) / row[i];
            c.push(v);
        }
        Ok(c)
    }

    /// Interpolant values at every candidate.
    pub fn interpolate_candidates(&self, f_at_selected: &[f64]) -> Result<Vec<f64>, GreedyError> {
        let c = self.newton_coefficients(f_at_selected)?;
        Ok(self.newton.iter().map(|row| dot(row, &c)).collect())
    }
}

// Fixed four-lane accumulation; the result depends only on the two slices.
#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len());
    let (a, b) = (&a[..n], &b[..n]);
    let mut acc = [0.0f64; 4];
    let chunks = n / 4;
    for k in 0..chunks {
        let i = 4 * k;
        acc[0] += a[i] * b[i];
        acc[1] += a[i + 1] * b[i + 1];
        acc[2] += a[i + 2] * b[i + 2];
        acc[3] += a[i + 3] * b[i + 3];
    }
    let mut tail = 0.0;
    for i in 4 * chunks..n {
        tail += a[i] * b[i];
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// Minimum-norm interpolant of the selected data, evaluated at `eval_pts`.
/// With no selected nodes the projection is trivial and all values are zero.
pub fn interpolate<P: AsRef<[f64]>>(
    state: &GreedyState,
    f_at_selected: &[f64],
    eval_pts: &[P],
) -> Result<Vec<f64>, GreedyError> {
    let c = state.newton_coefficients(f_at_selected)?;
    eval_pts
        .iter()
        .map(|x| Ok(dot(&state.newton_values_at(x.as_ref())?, &c)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StopCriteria {
    pub max_points: usize,
    pub power_tol: f64,
}

/// Result of [`run`].
#[derive(Clone, Debug)]
pub struct GreedyTrace {
    pub stop_reason: StopReason,
    pub state: GreedyState,
}

impl GreedyTrace {
    pub fn records(&self) -> &[TraceRecord] {
        self.state.trace()
    }

    pub fn selected_ids(&self) -> &[usize] {
        self.state.selected()
    }

    pub fn selected_points(&self) -> Vec<Vec<f64>> {
        self.state.selected_points()
    }

    /// `(n, sigma_n)` for every trace row.
    pub fn sigmas(&self) -> Vec<(usize, f64)> {
        self.records().iter().map(|r| (r.step, r.sigma)).collect()
    }

    /// `step,selected_id,x0,..,sigma,stop_reason`; coordinates and id are
    /// empty on the terminal row.
    pub fn write_trace_csv<W: Write>(&self, out: W) -> Result<(), GreedyError> {
        let cands = self.state.candidates();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["step".to_string(), "selected_id".into()];
        header.extend((0..cands.dim()).map(|j| format!("x{j}")));
        header.extend(["sigma".to_string(), "stop_reason".into()]);
        w.write_record(&header).map_err(io_err)?;
        for r in self.records() {
            let mut row = vec![r.step.to_string(), r.selected.map(|i| i.to_string()).unwrap_or_default()];
            match r.selected {
                Some(i) => row.extend(cands.point(i).iter().map(|v| fmt_f64(*v))),
                None => row.extend((0..cands.dim()).map(|_| String::new())),
            }
            row.push(fmt_f64(r.sigma));
            row.push(r.stop.map(|s| s.as_str().to_string()).unwrap_or_default());
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| GreedyError::Io(e.to_string()))
    }

    /// `id,x0,..,power` for the final state.
    pub fn write_power_csv<W: Write>(&self, out: W) -> Result<(), GreedyError> {
        let cands = self.state.candidates();
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend((0..cands.dim()).map(|j| format!("x{j}")));
        header.push("power".into());
        w.write_record(&header).map_err(io_err)?;
        for (id, (p, p2)) in cands.iter().zip(self.state.power2()).enumerate() {
            let mut row = vec![id.to_string()];
            row.extend(p.iter().map(|v| fmt_f64(*v)));
            row.push(fmt_f64(p2.sqrt()));
            w.write_record(&row).map_err(io_err)?;
        }
        w.flush().map_err(|e| GreedyError::Io(e.to_string()))
    }
}

fn io_err(e: csv::Error) -> GreedyError {
    GreedyError::Io(e.to_string())
}

/// Runs the greedy selection until `max_points` nodes are chosen, the maximal
/// power drops to `power_tol`, or the numerical rank is reached.
pub fn run(
    kernel: &KernelSpec,
    candidates: &CandidateSet,
    rule: &SelectionRule,
    stop: StopCriteria,
) -> Result<GreedyTrace, GreedyError> {
    if stop.max_points == 0 {
        return Err(GreedyError::Precondition("max_points must be >= 1".into()));
    }
    rule.validate(candidates.len())?;
    let capacity = stop.max_points.min(candidates.len());
    let mut state = GreedyState::with_capacity(kernel.clone(), candidates.clone(), capacity)?;
    let stop_reason = loop {
        if state.n_selected() >= stop.max_points {
            state.finish(StopReason::MaxPoints, rule);
            break StopReason::MaxPoints;
        }
        if state.max_power() <= stop.power_tol {
            state.finish(StopReason::PowerTolerance, rule);
            break StopReason::PowerTolerance;
        }
        if let StepOutcome::Terminated(reason) = state.step(rule)? {
            break reason;
        }
    };
    Ok(GreedyTrace { stop_reason, state })
}

/// Power function from the dense formula `sqrt(k(x,x) - k_x^T A^{-1} k_x)`.
/// Independent of the incremental Newton update.
pub fn power_direct<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    kernel: &KernelSpec,
    nodes: &[P],
    eval_pts: &[Q],
) -> Result<Vec<f64>, GreedyError> {
    if nodes.is_empty() {
        return eval_pts
            .iter()
            .map(|x| Ok(kernel.diag_value(x.as_ref()).max(0.0).sqrt()))
            .collect();
    }
    let a = gram(kernel, nodes)?;
    let n = nodes.len();
    let chol = a.clone().cholesky().ok_or(GreedyError::IllConditioned {
        condition_estimate: f64::INFINITY,
    })?;
    let l = chol.l();
    let diag: Vec<f64> = (0..n).map(|i| l[(i, i)]).collect();
    let (lo, hi) = diag
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
    let condition_estimate = (hi / lo).powi(2);
    if !(condition_estimate <= MAX_CONDITION) {
        return Err(GreedyError::IllConditioned { condition_estimate });
    }
    eval_pts
        .iter()
        .map(|x| {
            let x = x.as_ref();
            let mut kx = DVector::zeros(n);
            for (i, node) in nodes.iter().enumerate() {
                kx[i] = kernel.eval(x, node.as_ref())?;
            }
            let v = l.solve_lower_triangular(&kx).ok_or(GreedyError::IllConditioned { condition_estimate })?;
            Ok((kernel.diag_value(x) - v.norm_squared()).max(0.0).sqrt())
        })
        .collect()
}

/// Dense interpolant `sum_j alpha_j k(., x_j)` with `A alpha = f`, evaluated at `eval_pts`.
pub fn interpolate_direct<P: AsRef<[f64]>, Q: AsRef<[f64]>>(
    kernel: &KernelSpec,
    nodes: &[P],
    values: &[f64],
    eval_pts: &[Q],
) -> Result<Vec<f64>, GreedyError> {
    if values.len() != nodes.len() {
        return Err(GreedyError::LengthMismatch {
            expected: nodes.len(),
            got: values.len(),
        });
    }
    if nodes.is_empty() {
        return Ok(vec![0.0; eval_pts.len()]);
    }
    let a: DMatrix<f64> = gram(kernel, nodes)?;
    let alpha = a
        .cholesky()
        .ok_or(GreedyError::IllConditioned {
            condition_estimate: f64::INFINITY,
        })?
        .solve(&DVector::from_column_slice(values));
    Ok(eval_pts
        .iter()
        .map(|x| {
            nodes
                .iter()
                .zip(alpha.iter())
                .map(|(z, a)| a * kernel.value(x.as_ref(), z.as_ref()))
                .sum()
        })
        .collect())
}

/// Evaluates the power function of the nodes `nodes_in_sub` (ids into `sub`)
/// on the points of `sub` twice: with the kernel living on the parent set and
/// with the kernel restricted to `sub`. Returns the largest absolute difference.
pub fn restriction_check(
    kernel: &KernelSpec,
    parent: &CandidateSet,
    sub: &CandidateSet,
    nodes_in_sub: &[usize],
) -> Result<f64, GreedyError> {
    let parent_ids = sub
        .parent_ids()
        .ok_or_else(|| GreedyError::Precondition("sub carries no parent ids".into()))?;
    for (i, &pid) in parent_ids.iter().enumerate() {
        if pid >= parent.len() || parent.point(pid) != sub.point(i) {
            return Err(GreedyError::Precondition(format!(
                "sub point {i} is not parent point {pid}"
            )));
        }
    }
    if let Some(&bad) = nodes_in_sub.iter().find(|&&id| id >= sub.len()) {
        return Err(GreedyError::Precondition(format!("node {bad} is not in the sub set")));
    }

    let mut on_parent = GreedyState::with_capacity(kernel.clone(), parent.clone(), nodes_in_sub.len())?;
    let mut on_sub = GreedyState::with_capacity(kernel.clone(), sub.clone(), nodes_in_sub.len())?;
    for &id in nodes_in_sub {
        on_parent.insert(parent_ids[id])?;
        on_sub.insert(id)?;
    }
    let discrepancy = parent_ids
        .iter()
        .enumerate()
        .map(|(i, &pid)| (on_parent.power2()[pid].sqrt() - on_sub.power2()[i].sqrt()).abs())
        .fold(0.0, f64::max);
    Ok(discrepancy)
}


#[cfg(test)]
mod props {
    use super::*;
    use crate::domains::{discretize, restrict, DomainSpec, Strategy};
    use proptest::prelude::*;
    use rand::Rng;

    fn kernel_by_index(i: usize) -> KernelSpec {
        match i % 5 {
            0 => KernelSpec::matern_basic(1.0),
            1 => KernelSpec::matern_linear(1.0),
            2 => KernelSpec::matern_quadratic(1.0),
            3 => KernelSpec::gaussian(1.0),
            _ => KernelSpec::composite(
                KernelSpec::matern_quadratic(1.0),
                KernelSpec::matern_linear(1.0),
                DomainSpec::ball(vec![0.5, 0.5], 0.3),
            ),
        }
    }

    // points in the unit square with pairwise distance at least `sep`
    fn scattered(seed: u64, n: usize, sep: f64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pts: Vec<Vec<f64>> = Vec::with_capacity(n);
        while pts.len() < n {
            let p = vec![rng.gen::<f64>(), rng.gen::<f64>()];
            if pts.iter().all(|q| crate::kernels::distance(q, &p) >= sep) {
                pts.push(p);
            }
        }
        pts
    }

    fn greedy_on(kernel: &KernelSpec, pts: &[Vec<f64>], steps: usize) -> GreedyState {
        let c = CandidateSet::explicit(pts.to_vec()).unwrap();
        let mut s = GreedyState::new(kernel.clone(), c).unwrap();
        for _ in 0..steps {
            if let StepOutcome::Terminated(_) = s.step(&SelectionRule::p_greedy()).unwrap() {
                break;
            }
        }
        s
    }

    #[test]
    fn five_gaussian_candidates_match_direct_formula() {
        let pts = scattered(11, 5, 0.05);
        let k = KernelSpec::gaussian(1.0);
        let s = greedy_on(&k, &pts, 3);
        let direct = power_direct(&k, &s.selected_points(), &pts).unwrap();
        for (p2, d) in s.power2().iter().zip(direct) {
            assert!((p2 - d * d).abs() < 1e-8);
        }
    }

    #[test]
    fn restriction_check_is_exact_on_cusp_domain() {
        let parent = discretize(&DomainSpec::unit_square(), Strategy::Grid, 2500, 0).unwrap();
        let sub = restrict(&parent, &DomainSpec::cusp_domain()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in [KernelSpec::gaussian(1.0), KernelSpec::matern_basic(1.0), KernelSpec::matern_linear(1.0)] {
            let mut nodes = Vec::new();
            while nodes.len() < 10 {
                let id = rng.gen_range(0..sub.len());
                if !nodes.contains(&id) {
                    nodes.push(id);
                }
            }
            assert_eq!(restriction_check(&k, &parent, &sub, &nodes).unwrap(), 0.0);
        }
    }

    #[test]
    fn random_f_on_six_nodes_matches_dense_solve() {
        let pts = scattered(3, 40, 0.02);
        for ki in 0..5 {
            let k = kernel_by_index(ki);
            let s = greedy_on(&k, &pts, 6);
            let f: Vec<f64> = (0..6).map(|i| (i as f64 * 1.3).cos()).collect();
            let a = interpolate(&s, &f, &pts).unwrap();
            let b = interpolate_direct(&k, &s.selected_points(), &f, &pts).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-8, "{k:?}: {x} vs {y}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn incremental_power_matches_direct(seed in any::<u64>(), ki in 0usize..5, n in 8usize..40) {
            let k = kernel_by_index(ki);
            let pts = scattered(seed, n, 0.02);
            // smooth kernels lose rank early; keep the oracle well conditioned
            let steps = if ki == 3 { 10 } else { 30 };
            let s = greedy_on(&k, &pts, steps);
            let direct = match power_direct(&k, &s.selected_points(), &pts) {
                Ok(d) => d,
                Err(GreedyError::IllConditioned { .. }) => return Ok(()),
                Err(e) => panic!("{e}"),
            };
            for (p2, d) in s.power2().iter().zip(direct) {
                prop_assert!((p2 - d * d).abs() <= 1e-8);
            }
        }

        #[test]
        fn step_invariants(seed in any::<u64>(), ki in 0usize..5) {
            let k = kernel_by_index(ki);
            let pts = scattered(seed, 60, 0.01);
            let c = CandidateSet::explicit(pts.clone()).unwrap();
            let mut s = GreedyState::new(k.clone(), c).unwrap();
            let mut before = s.power2().to_vec();
            for _ in 0..25 {
                if let StepOutcome::Terminated(_) = s.step(&SelectionRule::p_greedy()).unwrap() {
                    break;
                }
                for (a, b) in s.power2().iter().zip(&before) {
                    prop_assert!(*a <= b + 1e-12);
                }
                for &id in s.selected() {
                    prop_assert!(s.power2()[id] <= 1e-10);
                }
                before = s.power2().to_vec();
            }
            prop_assert!(s.min_unclamped_power2() >= -1e-10);
            let sig: Vec<f64> = s.trace().iter().map(|r| r.sigma).collect();
            prop_assert!(sig.windows(2).all(|w| w[1] <= w[0]));

            let f: Vec<f64> = s.selected().iter().map(|&i| (pts[i][0] * 5.0).sin() + pts[i][1]).collect();
            let at_nodes = interpolate(&s, &f, &s.selected_points()).unwrap();
            for (a, b) in at_nodes.iter().zip(&f) {
                prop_assert!((a - b).abs() <= 1e-8);
            }
        }

        #[test]
        fn pointwise_error_bounded_by_power(seed in any::<u64>(), ki in 0usize..5, m in 1usize..8) {
            let k = kernel_by_index(ki);
            let pts = scattered(seed, 50, 0.01);
            let s = greedy_on(&k, &pts, 12);
            // f = sum_i a_i k(., z_i) with ||f||^2 = a^T K_z a
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
            let centers = scattered(seed.wrapping_add(1), m, 0.05);
            let coef: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let kz = gram(&k, &centers).unwrap();
            let a = DVector::from_column_slice(&coef);
            let norm = (a.transpose() * &kz * &a)[(0, 0)].max(0.0).sqrt();
            let f = |x: &[f64]| -> f64 { centers.iter().zip(&coef).map(|(z, c)| c * k.value(x, z)).sum() };
            let fx: Vec<f64> = s.selected_points().iter().map(|x| f(x)).collect();
            let interp = interpolate(&s, &fx, &pts).unwrap();
            for (i, x) in pts.iter().enumerate() {
                let bound = s.power2()[i].sqrt() * norm;
                prop_assert!((f(x) - interp[i]).abs() <= bound + 1e-6);
            }
        }

        #[test]
        fn weak_greedy_respects_gamma(seed in any::<u64>(), gamma in 0.05f64..1.0, ki in 0usize..5) {
            let k = kernel_by_index(ki);
            let pts = scattered(seed, 50, 0.01);
            let c = CandidateSet::explicit(pts).unwrap();
            let stop = StopCriteria { max_points: 20, power_tol: 0.0 };
            let t = run(&k, &c, &SelectionRule::p_greedy().weak(gamma, seed), stop).unwrap();
            for r in t.records().iter().filter(|r| r.selected.is_some()) {
                prop_assert!(r.chosen_score >= gamma * r.sigma);
            }
        }

        #[test]
        fn subset_sigma_is_dominated_and_monotone(seed in 0u64..1000, ki in 0usize..5) {
            let k = kernel_by_index(ki);
            let parent = discretize(&DomainSpec::unit_square(), Strategy::Halton, 400, seed).unwrap();
            let sub = restrict(&parent, &DomainSpec::cusp_domain()).unwrap();
            let stop = StopCriteria { max_points: 30, power_tol: 0.0 };
            let t = run(&k, &sub, &SelectionRule::p_greedy(), stop).unwrap();
            let sig: Vec<f64> = t.records().iter().map(|r| r.sigma).collect();
            prop_assert!(sig.iter().all(|&v| v <= sig[0]));
            prop_assert!(sig.windows(2).all(|w| w[1] <= w[0]));
            let max_on_sub = t.state.max_power();
            prop_assert_eq!(max_on_sub, *sig.last().unwrap());
        }
    }
}
