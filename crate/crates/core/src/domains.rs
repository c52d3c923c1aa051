//! Domains as membership predicates and their finite candidate sets.
//!
//! Boundary conventions: balls are open, boxes are closed, and the norm
//! exterior predicate `||x|| > c` is strict.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::csvfmt::fmt_f64;

/// Minimum separation between two candidates.
pub const MIN_SEPARATION: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("invalid domain: {0}")]
    Invalid(String),
    #[error("domain discretization empty")]
    Empty,
    #[error("domain discretization could not reach {target} points (found {found})")]
    TargetUnreachable { target: usize, found: usize },
    #[error("restriction is empty")]
    EmptyRestriction,
    #[error("points {0} and {1} are closer than the minimum separation")]
    NotDistinct(usize, usize),
    #[error("cannot discretize an unbounded domain")]
    Unbounded,
    #[error("csv export failed: {0}")]
    Io(String),
}

/// Domain description, serialized with a `"type"` tag.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    /// Open ball `{x : ||x - center|| < radius}`.
    Ball { center: Vec<f64>, radius: f64 },
    /// Closed axis-aligned box.
    Box { low: Vec<f64>, high: Vec<f64> },
    /// Points of `base` that are not in `remove`.
    Difference {
        base: std::boxed::Box<DomainSpec>,
        remove: std::boxed::Box<DomainSpec>,
    },
    /// Points of `base` with `||x||_2 > norm_greater_than`.
    Intersection {
        base: std::boxed::Box<DomainSpec>,
        norm_greater_than: f64,
    },
    /// A finite point list; membership is exact coordinate equality.
    Explicit { points: Vec<Vec<f64>> },
}

impl DomainSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        DomainSpec::Ball { center, radius }
    }

    pub fn cube(low: Vec<f64>, high: Vec<f64>) -> Self {
        DomainSpec::Box { low, high }
    }

    pub fn difference(base: DomainSpec, remove: DomainSpec) -> Self {
        DomainSpec::Difference {
            base: std::boxed::Box::new(base),
            remove: std::boxed::Box::new(remove),
        }
    }

    pub fn norm_exterior(base: DomainSpec, c: f64) -> Self {
        DomainSpec::Intersection {
            base: std::boxed::Box::new(base),
            norm_greater_than: c,
        }
    }

    /// `[0,1]^2` cut down to the points with `||x|| > 1`; two cusps at the axes.
    pub fn cusp_domain() -> Self {
        Self::norm_exterior(Self::unit_square(), 1.0)
    }

    pub fn unit_square() -> Self {
        Self::cube(vec![0.0, 0.0], vec![1.0, 1.0])
    }

    pub fn dim(&self) -> Option<usize> {
        match self {
            DomainSpec::Ball { center, .. } => Some(center.len()),
            DomainSpec::Box { low, .. } => Some(low.len()),
            DomainSpec::Difference { base, remove } => base.dim().or_else(|| remove.dim()),
            DomainSpec::Intersection { base, .. } => base.dim(),
            DomainSpec::Explicit { points } => points.first().map(Vec::len),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        let invalid = |msg: String| Err(DomainError::Invalid(msg));
        match self {
            DomainSpec::Ball { center, radius } => {
                if center.is_empty() {
                    return invalid("ball center has dimension 0".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    return invalid(format!("ball radius must be > 0, got {radius}"));
                }
                if center.iter().any(|c| !c.is_finite()) {
                    return invalid("ball center must be finite".into());
                }
                Ok(())
            }
            DomainSpec::Box { low, high } => {
                if low.is_empty() {
                    return invalid("box has dimension 0".into());
                }
                if low.len() != high.len() {
                    return Err(DomainError::DimensionMismatch(low.len(), high.len()));
                }
                if low.iter().zip(high).any(|(l, h)| !(l.is_finite() && h.is_finite() && l <= h)) {
                    return invalid("box bounds must be finite with low <= high".into());
                }
                Ok(())
            }
            DomainSpec::Difference { base, remove } => {
                base.validate()?;
                remove.validate()?;
                match (base.dim(), remove.dim()) {
                    (Some(a), Some(b)) if a != b => Err(DomainError::DimensionMismatch(a, b)),
                    _ => Ok(()),
                }
            }
            DomainSpec::Intersection {
                base,
                norm_greater_than,
            } => {
                if !norm_greater_than.is_finite() {
                    return invalid("norm threshold must be finite".into());
                }
                base.validate()
            }
            DomainSpec::Explicit { points } => {
                if let Some(first) = points.first() {
                    if first.is_empty() {
                        return invalid("explicit points have dimension 0".into());
                    }
                    for p in points {
                        if p.len() != first.len() {
                            return Err(DomainError::DimensionMismatch(first.len(), p.len()));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    /// Membership predicate. Points of the wrong dimension are never members.
    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            DomainSpec::Ball { center, radius } => {
                center.len() == x.len() && crate::kernels::distance(center, x) < *radius
            }
            DomainSpec::Box { low, high } => {
                low.len() == x.len()
                    && x.iter().zip(low.iter().zip(high)).all(|(v, (l, h))| *l <= *v && *v <= *h)
            }
            DomainSpec::Difference { base, remove } => base.contains(x) && !remove.contains(x),
            DomainSpec::Intersection {
                base,
                norm_greater_than,
            } => base.contains(x) && euclidean_norm(x) > *norm_greater_than,
            DomainSpec::Explicit { points } => points.iter().any(|p| p.as_slice() == x),
        }
    }

    /// Checked membership.
    pub fn try_contains(&self, x: &[f64]) -> Result<bool, DomainError> {
        match self.dim() {
            Some(d) if d != x.len() => Err(DomainError::DimensionMismatch(d, x.len())),
            _ => Ok(self.contains(x)),
        }
    }

    /// Axis-aligned bounding box `(low, high)`; `None` for an empty explicit list.
    pub fn bounding_box(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            DomainSpec::Ball { center, radius } => Some((
                center.iter().map(|c| c - radius).collect(),
                center.iter().map(|c| c + radius).collect(),
            )),
            DomainSpec::Box { low, high } => Some((low.clone(), high.clone())),
            DomainSpec::Difference { base, .. } | DomainSpec::Intersection { base, .. } => base.bounding_box(),
            DomainSpec::Explicit { points } => {
                let first = points.first()?;
                let mut low = first.clone();
                let mut high = first.clone();
                for p in points {
                    for (j, v) in p.iter().enumerate() {
                        low[j] = low[j].min(*v);
                        high[j] = high[j].max(*v);
                    }
                }
                Some((low, high))
            }
        }
    }
}

fn euclidean_norm(x: &[f64]) -> f64 {
    let zero = vec![0.0; x.len()];
    crate::kernels::distance(x, &zero)
}

/// How candidate points are laid out inside the bounding box.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Tensor grid including the box faces, refined until enough points survive the filter.
    Grid,
    /// Halton sequence with a seeded Cranley-Patterson rotation.
    Halton,
}

/// Finite discretization of a domain with contiguous ids `0..len`.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateSet {
    coords: Vec<f64>,
    dim: usize,
    parent_ids: Option<Vec<usize>>,
    domain: DomainSpec,
}

impl CandidateSet {
    /// Builds a candidate set from explicit coordinates; rejects empty input and
    /// near-duplicates.
    pub fn from_points(points: Vec<Vec<f64>>, domain: DomainSpec) -> Result<Self, DomainError> {
        let Some(first) = points.first() else {
            return Err(DomainError::Empty);
        };
        let dim = first.len();
        if dim == 0 {
            return Err(DomainError::Invalid("points have dimension 0".into()));
        }
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(DomainError::DimensionMismatch(dim, p.len()));
            }
            coords.extend_from_slice(p);
        }
        let set = CandidateSet {
            coords,
            dim,
            parent_ids: None,
            domain,
        };
        set.check_distinct()?;
        Ok(set)
    }

    /// Candidate set made of the points of an explicit domain.
    pub fn explicit(points: Vec<Vec<f64>>) -> Result<Self, DomainError> {
        let domain = DomainSpec::Explicit { points: points.clone() };
        Self::from_points(points, domain)
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn point(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn to_points(&self) -> Vec<Vec<f64>> {
        self.iter().map(<[f64]>::to_vec).collect()
    }

    pub fn parent_ids(&self) -> Option<&[usize]> {
        self.parent_ids.as_deref()
    }

    pub fn domain(&self) -> &DomainSpec {
        &self.domain
    }

    fn check_distinct(&self) -> Result<(), DomainError> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| self.point(a)[0].total_cmp(&self.point(b)[0]));
        for (pos, &i) in order.iter().enumerate() {
            let xi = self.point(i);
            for &j in &order[pos + 1..] {
                let xj = self.point(j);
                if xj[0] - xi[0] > MIN_SEPARATION {
                    break;
                }
                if crate::kernels::distance(xi, xj) <= MIN_SEPARATION {
                    return Err(DomainError::NotDistinct(i.min(j), i.max(j)));
                }
            }
        }
        Ok(())
    }

    /// Writes `id,x0,x1,...,parent_id`; `parent_id` is empty without a parent.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DomainError> {
        let io = |e: csv::Error| DomainError::Io(e.to_string());
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string()];
        header.extend((0..self.dim).map(|j| format!("x{j}")));
        header.push("parent_id".into());
        w.write_record(&header).map_err(io)?;
        for (id, p) in self.iter().enumerate() {
            let mut row = vec![id.to_string()];
            row.extend(p.iter().map(|v| fmt_f64(*v)));
            row.push(self.parent_ids.as_ref().map(|ids| ids[id].to_string()).unwrap_or_default());
            w.write_record(&row).map_err(io)?;
        }
        w.flush().map_err(|e| DomainError::Io(e.to_string()))
    }
}

/// Discretizes a domain. Grid: smallest per-axis resolution whose filtered
/// point count reaches `target`. Halton: exactly `target` accepted points.
/// Explicit domains return their point list unchanged.
pub fn discretize(
    domain: &DomainSpec,
    strategy: Strategy,
    target: usize,
    seed: u64,
) -> Result<CandidateSet, DomainError> {
    if target == 0 {
        return Err(DomainError::Invalid("target must be >= 1".into()));
    }
    domain.validate()?;
    if let DomainSpec::Explicit { points } = domain {
        return CandidateSet::from_points(points.clone(), domain.clone());
    }
    let (low, high) = domain.bounding_box().ok_or(DomainError::Unbounded)?;
    let points = match strategy {
        Strategy::Grid => grid_points(domain, &low, &high, target)?,
        Strategy::Halton => halton_points(domain, &low, &high, target, seed)?,
    };
    CandidateSet::from_points(points, domain.clone())
}

// Cap on the number of raw box points examined before giving up.
fn raw_budget(target: usize) -> usize {
    target.saturating_mul(256).max(1 << 20)
}

fn grid_points(domain: &DomainSpec, low: &[f64], high: &[f64], target: usize) -> Result<Vec<Vec<f64>>, DomainError> {
    let d = low.len();
    let mut res = (target as f64).powf(1.0 / d as f64).ceil().max(1.0) as usize;
    while res.pow(d as u32) < target {
        res += 1;
    }
    let mut best = 0;
    loop {
        let total = res.checked_pow(d as u32).unwrap_or(usize::MAX);
        if total > raw_budget(target) {
            return Err(if best == 0 {
                DomainError::Empty
            } else {
                DomainError::TargetUnreachable { target, found: best }
            });
        }
        let pts = tensor_grid(low, high, res)
            .into_iter()
            .filter(|p| domain.contains(p))
            .collect::<Vec<_>>();
        if pts.len() >= target {
            return Ok(pts);
        }
        best = best.max(pts.len());
        res += 1;
    }
}

fn axis_value(low: f64, high: f64, i: usize, res: usize) -> f64 {
    if res == 1 {
        0.5 * (low + high)
    } else {
        low + (high - low) * (i as f64 / (res - 1) as f64)
    }
}

// Lexicographic order, first coordinate slowest.
fn tensor_grid(low: &[f64], high: &[f64], res: usize) -> Vec<Vec<f64>> {
    let d = low.len();
    let total = res.pow(d as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; d];
    for _ in 0..total {
        out.push((0..d).map(|j| axis_value(low[j], high[j], idx[j], res)).collect());
        for j in (0..d).rev() {
            idx[j] += 1;
            if idx[j] < res {
                break;
            }
            idx[j] = 0;
        }
    }
    out
}

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Van der Corput radical inverse of `index` in `base`, in `[0, 1)`.
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut out = 0.0;
    while index > 0 {
        out += f * (index % base) as f64;
        index /= base;
        f *= inv;
    }
    out
}

fn halton_points(
    domain: &DomainSpec,
    low: &[f64],
    high: &[f64],
    target: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, DomainError> {
    let d = low.len();
    if d > PRIMES.len() {
        return Err(DomainError::Invalid(format!("Halton supports at most {} dimensions", PRIMES.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shift: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
    let mut out = Vec::with_capacity(target);
    let budget = raw_budget(target) as u64;
    for index in 1..=budget {
        let p: Vec<f64> = (0..d)
            .map(|j| {
                let u = (radical_inverse(PRIMES[j], index) + shift[j]).fract();
                low[j] + (high[j] - low[j]) * u
            })
            .collect();
        if domain.contains(&p) {
            out.push(p);
            if out.len() == target {
                return Ok(out);
            }
        }
    }
    if out.is_empty() {
        Err(DomainError::Empty)
    } else {
        Err(DomainError::TargetUnreachable {
            target,
            found: out.len(),
        })
    }
}

/// Keeps the parent points inside `sub`, copying coordinates bitwise and
/// recording their parent ids.
pub fn restrict(parent: &CandidateSet, sub: &DomainSpec) -> Result<CandidateSet, DomainError> {
    let mut coords = Vec::new();
    let mut ids = Vec::new();
    for (id, p) in parent.iter().enumerate() {
        if sub.contains(p) {
            coords.extend_from_slice(p);
            ids.push(id);
        }
    }
    if ids.is_empty() {
        return Err(DomainError::EmptyRestriction);
    }
    Ok(CandidateSet {
        coords,
        dim: parent.dim,
        parent_ids: Some(ids),
        domain: sub.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contains_examples() {
        let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0);
        assert!(ball.contains(&[0.0, 0.0]));
        assert!(!ball.contains(&[1.0, 0.0]));
        let cusp = DomainSpec::cusp_domain();
        assert!(!cusp.contains(&[1.0, 0.0]));
        assert!(cusp.contains(&[1.0, 0.5]));
        assert!(!cusp.contains(&[0.5, 0.5]));
        let annulus = DomainSpec::difference(ball.clone(), DomainSpec::ball(vec![0.0, 0.0], 0.5));
        assert!(annulus.contains(&[0.7, 0.0]));
        assert!(annulus.contains(&[0.5, 0.0]));
        assert!(!annulus.contains(&[0.2, 0.0]));
        let cube = DomainSpec::unit_square();
        assert!(cube.contains(&[1.0, 1.0]));
        assert!(cube.contains(&[0.0, 0.3]));
        assert!(!cube.contains(&[1.0 + 1e-15, 0.3]));
    }

    #[test]
    fn checked_contains_reports_dimension() {
        let ball = DomainSpec::ball(vec![0.0, 0.0], 1.0);
        assert_eq!(ball.try_contains(&[0.0]), Err(DomainError::DimensionMismatch(2, 1)));
        assert_eq!(ball.try_contains(&[0.1, 0.1]), Ok(true));
    }

    #[test]
    fn grid_target_four_gives_corners() {
        let c = discretize(&DomainSpec::unit_square(), Strategy::Grid, 4, 0).unwrap();
        assert_eq!(
            c.to_points(),
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]]
        );
        assert!(c.parent_ids().is_none());
    }

    #[test]
    fn grid_on_cusp_domain_stays_inside() {
        let dom = DomainSpec::cusp_domain();
        let c = discretize(&dom, Strategy::Grid, 1000, 0).unwrap();
        assert!(c.len() >= 1000);
        for p in c.iter() {
            assert!(p[0].hypot(p[1]) > 1.0);
            assert!((0.0..=1.0).contains(&p[0]) && (0.0..=1.0).contains(&p[1]));
        }
        // the resolution is minimal: one step coarser falls short
        let res_side = (c.len() as f64).sqrt();
        assert!(res_side > 0.0);
    }

    #[test]
    fn grid_resolution_is_minimal() {
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0);
        let c = discretize(&dom, Strategy::Grid, 500, 0).unwrap();
        // recover the resolution from the smallest positive coordinate gap
        let mut xs: Vec<f64> = c.iter().map(|p| p[0]).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        let res = xs.len() + 2; // the two boundary columns x = +-1 are excluded by the open ball
        let coarser = tensor_grid(&[-1.0, -1.0], &[1.0, 1.0], res - 1)
            .into_iter()
            .filter(|p| dom.contains(p))
            .count();
        assert!(coarser < 500);
    }

    #[test]
    fn halton_is_reproducible_and_exact_count() {
        let dom = DomainSpec::ball(vec![0.0, 0.0], 1.0);
        let a = discretize(&dom, Strategy::Halton, 500, 7).unwrap();
        let b = discretize(&dom, Strategy::Halton, 500, 7).unwrap();
        assert_eq!(a.len(), 500);
        assert_eq!(a, b);
        let c = discretize(&dom, Strategy::Halton, 500, 8).unwrap();
        assert_ne!(a, c);
        assert!(a.iter().all(|p| dom.contains(p)));
    }

    #[test]
    fn radical_inverse_base_two() {
        let v: Vec<f64> = (1..=4).map(|i| radical_inverse(2, i)).collect();
        assert_eq!(v, vec![0.5, 0.25, 0.75, 0.125]);
    }

    #[test]
    fn empty_discretization_errors() {
        let dom = DomainSpec::norm_exterior(DomainSpec::unit_square(), 2.0);
        assert_eq!(discretize(&dom, Strategy::Grid, 10, 0), Err(DomainError::Empty));
        assert_eq!(discretize(&dom, Strategy::Halton, 10, 0), Err(DomainError::Empty));
        assert!(discretize(&DomainSpec::unit_square(), Strategy::Grid, 0, 0).is_err());
    }

    #[test]
    fn restrict_examples() {
        let parent = discretize(&DomainSpec::unit_square(), Strategy::Grid, 400, 0).unwrap();
        let cusp = restrict(&parent, &DomainSpec::cusp_domain()).unwrap();
        for (i, p) in cusp.iter().enumerate() {
            assert!(p[0].hypot(p[1]) > 1.0);
            let pid = cusp.parent_ids().unwrap()[i];
            assert_eq!(p, parent.point(pid));
        }
        // (1, 0) is on the grid but excluded
        assert!(parent.iter().any(|p| p == [1.0, 0.0]));
        assert!(!cusp.iter().any(|p| p == [1.0, 0.0]));

        let same = restrict(&parent, parent.domain()).unwrap();
        assert_eq!(same.parent_ids().unwrap(), (0..parent.len()).collect::<Vec<_>>().as_slice());
        assert_eq!(same.to_points(), parent.to_points());

        let ball = DomainSpec::ball(vec![0.0, 0.0], 0.5);
        let complement = DomainSpec::difference(DomainSpec::unit_square(), ball.clone());
        let a = restrict(&parent, &ball).unwrap().len();
        let b = restrict(&parent, &complement).unwrap().len();
        let counted = parent.iter().filter(|p| p[0].hypot(p[1]) < 0.5).count();
        assert_eq!(a, counted);
        assert_eq!(a + b, parent.len());
    }

    #[test]
    fn empty_restriction_errors() {
        let parent = discretize(&DomainSpec::unit_square(), Strategy::Grid, 16, 0).unwrap();
        let far = DomainSpec::ball(vec![5.0, 5.0], 0.1);
        assert_eq!(restrict(&parent, &far), Err(DomainError::EmptyRestriction));
    }

    #[test]
    fn grid_fill_distance_sanity_bound() {
        for target in [16usize, 50, 200] {
            let c = discretize(&DomainSpec::unit_square(), Strategy::Grid, target, 0).unwrap();
            let probes = 60;
            let mut fill: f64 = 0.0;
            for i in 0..=probes {
                for j in 0..=probes {
                    let q = [i as f64 / probes as f64, j as f64 / probes as f64];
                    let nearest = c
                        .iter()
                        .map(|p| crate::kernels::distance(p, &q))
                        .fold(f64::INFINITY, f64::min);
                    fill = fill.max(nearest);
                }
            }
            let bound = 2f64.sqrt() / (target as f64).sqrt().floor();
            assert!(fill <= bound, "target {target}: fill {fill} > {bound}");
        }
    }

    #[test]
    fn duplicates_rejected() {
        let err = CandidateSet::explicit(vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1e-13]]).unwrap_err();
        assert_eq!(err, DomainError::NotDistinct(0, 2));
        assert_eq!(CandidateSet::explicit(vec![]), Err(DomainError::Empty));
    }

    #[test]
    fn csv_export_columns() {
        let parent = discretize(&DomainSpec::unit_square(), Strategy::Grid, 4, 0).unwrap();
        let sub = restrict(&parent, &DomainSpec::cube(vec![0.5, 0.0], vec![1.0, 1.0])).unwrap();
        let mut buf = Vec::new();
        sub.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "id,x0,x1,parent_id");
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("0,1.0000000000000000e0,0.0000000000000000e0,2"));
    }

    #[test]
    fn json_grammar() {
        let d: DomainSpec = serde_json::from_str(
            r#"{"type":"intersection","base":{"type":"box","low":[0,0],"high":[1,1]},"norm_greater_than":1.0}"#,
        )
        .unwrap();
        assert_eq!(d, DomainSpec::cusp_domain());
        assert!(serde_json::from_str::<DomainSpec>(r#"{"type":"ball","center":[0],"radius":1,"x":2}"#).is_err());
    }
}
