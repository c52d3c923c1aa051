//! Radial kernels used by the greedy algorithms.
//!
//! All base families are normalized so that `k(x, x) = 1`. Distances are scaled
//! by the shape parameter before the radial profile is applied, i.e. the
//! profile sees `r = shape * ||x - y||_2`.
//!
//! The composite kernel `(outer(x, y) + chi(x) chi(y) inner(x, y)) / 2` glues a
//! second kernel onto the region selected by an indicator domain. The factor
//! [`COMPOSITE_NORMALIZATION`] keeps `k(x, x) <= 1` everywhere.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domains::DomainSpec;

/// Scaling applied to the composite kernel so that its diagonal stays in `(0, 1]`.
pub const COMPOSITE_NORMALIZATION: f64 = 0.5;

#[derive(Debug, Error, PartialEq)]
pub enum KernelError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("shape parameter must be finite and > 0, got {0}")]
    InvalidShape(f64),
    #[error("points {0} and {1} coincide; the Gram matrix would be singular")]
    DuplicatePoints(usize, usize),
    #[error("invalid indicator domain: {0}")]
    InvalidIndicator(String),
}

/// Kernel family tag, independent of parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KernelFamily {
    MaternBasic,
    MaternLinear,
    MaternQuadratic,
    Gaussian,
    Composite,
}

/// Sign convention for the linear Matern profile.
///
/// `OnePlusR` is the positive definite `e^{-r}(1 + r)`. `OneMinusR` evaluates
/// `e^{-r}(1 - r)`, which is *not* positive definite and only exists for
/// side-by-side comparison.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearForm {
    #[default]
    OnePlusR,
    OneMinusR,
}

fn unit_shape() -> f64 {
    1.0
}

fn is_default_form(form: &LinearForm) -> bool {
    *form == LinearForm::OnePlusR
}

/// Symbolic description of a strictly positive definite kernel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    MaternBasic {
        #[serde(default = "unit_shape")]
        shape: f64,
    },
    MaternLinear {
        #[serde(default = "unit_shape")]
        shape: f64,
        #[serde(default, skip_serializing_if = "is_default_form")]
        form: LinearForm,
    },
    MaternQuadratic {
        #[serde(default = "unit_shape")]
        shape: f64,
    },
    Gaussian {
        #[serde(default = "unit_shape")]
        shape: f64,
    },
    Composite {
        outer: Box<KernelSpec>,
        inner: Box<KernelSpec>,
        indicator: DomainSpec,
    },
}

impl KernelSpec {
    pub fn matern_basic(shape: f64) -> Self {
        KernelSpec::MaternBasic { shape }
    }

    pub fn matern_linear(shape: f64) -> Self {
        KernelSpec::MaternLinear {
            shape,
            form: LinearForm::OnePlusR,
        }
    }

    pub fn matern_quadratic(shape: f64) -> Self {
        KernelSpec::MaternQuadratic { shape }
    }

    pub fn gaussian(shape: f64) -> Self {
        KernelSpec::Gaussian { shape }
    }

    pub fn composite(outer: KernelSpec, inner: KernelSpec, indicator: DomainSpec) -> Self {
        KernelSpec::Composite {
            outer: Box::new(outer),
            inner: Box::new(inner),
            indicator,
        }
    }

    pub fn family(&self) -> KernelFamily {
        match self {
            KernelSpec::MaternBasic { .. } => KernelFamily::MaternBasic,
            KernelSpec::MaternLinear { .. } => KernelFamily::MaternLinear,
            KernelSpec::MaternQuadratic { .. } => KernelFamily::MaternQuadratic,
            KernelSpec::Gaussian { .. } => KernelFamily::Gaussian,
            KernelSpec::Composite { .. } => KernelFamily::Composite,
        }
    }

    /// Checks shape positivity recursively and the indicator domain of composites.
    pub fn validate(&self) -> Result<(), KernelError> {
        match self {
            KernelSpec::MaternBasic { shape }
            | KernelSpec::MaternLinear { shape, .. }
            | KernelSpec::MaternQuadratic { shape }
            | KernelSpec::Gaussian { shape } => {
                if shape.is_finite() && *shape > 0.0 {
                    Ok(())
                } else {
                    Err(KernelError::InvalidShape(*shape))
                }
            }
            KernelSpec::Composite {
                outer,
                inner,
                indicator,
            } => {
                outer.validate()?;
                inner.validate()?;
                indicator
                    .validate()
                    .map_err(|e| KernelError::InvalidIndicator(e.to_string()))
            }
        }
    }

    /// Dimension forced by the indicator of a composite kernel, if any.
    pub fn required_dim(&self) -> Option<usize> {
        match self {
            KernelSpec::Composite {
                outer,
                inner,
                indicator,
            } => indicator
                .dim()
                .or_else(|| outer.required_dim())
                .or_else(|| inner.required_dim()),
            _ => None,
        }
    }

    /// Checked kernel evaluation.
    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64, KernelError> {
        if x.len() != y.len() {
            return Err(KernelError::DimensionMismatch(x.len(), y.len()));
        }
        if let Some(d) = self.required_dim() {
            if d != x.len() {
                return Err(KernelError::DimensionMismatch(d, x.len()));
            }
        }
        Ok(self.value(x, y))
    }

    /// Unchecked evaluation for hot loops; callers guarantee equal dimensions.
    #[inline]
    pub fn value(&self, x: &[f64], y: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), y.len());
        match self {
            KernelSpec::Composite { .. } => COMPOSITE_NORMALIZATION * self.unnormalized(x, y),
            _ => self.radial_profile(distance(x, y)),
        }
    }

    /// Composite kernels without the `1/2` factor; identical to [`Self::value`]
    /// for the base families.
    pub fn unnormalized(&self, x: &[f64], y: &[f64]) -> f64 {
        match self {
            KernelSpec::Composite {
                outer,
                inner,
                indicator,
            } => {
                let glued = if indicator.contains(x) && indicator.contains(y) {
                    inner.value(x, y)
                } else {
                    0.0
                };
                outer.value(x, y) + glued
            }
            _ => self.value(x, y),
        }
    }

    /// Radial profile at unscaled distance `dist`. Composite kernels are not
    /// radial and return `NaN`.
    pub fn radial_profile(&self, dist: f64) -> f64 {
        match *self {
            KernelSpec::MaternBasic { shape } => (-shape * dist).exp(),
            KernelSpec::MaternLinear { shape, form } => {
                let r = shape * dist;
                match form {
                    LinearForm::OnePlusR => (-r).exp() * (1.0 + r),
                    LinearForm::OneMinusR => (-r).exp() * (1.0 - r),
                }
            }
            KernelSpec::MaternQuadratic { shape } => {
                let r = shape * dist;
                (-r).exp() * (3.0 + 3.0 * r + r * r) / 3.0
            }
            KernelSpec::Gaussian { shape } => {
                let r = shape * dist;
                (-r * r).exp()
            }
            KernelSpec::Composite { .. } => f64::NAN,
        }
    }

    /// Kernel diagonal `k(x, x)`.
    #[inline]
    pub fn diag_value(&self, x: &[f64]) -> f64 {
        self.value(x, x)
    }
}

/// Euclidean distance with scaled accumulation. Exactly symmetric in its
/// arguments since only `|x_i - y_i|` enters.
#[inline]
pub fn distance(x: &[f64], y: &[f64]) -> f64 {
    match x.len() {
        1 => (x[0] - y[0]).abs(),
        2 => (x[0] - y[0]).hypot(x[1] - y[1]),
        _ => {
            let scale = x
                .iter()
                .zip(y)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0_f64, f64::max);
            if scale == 0.0 || !scale.is_finite() {
                return scale;
            }
            let sum: f64 = x
                .iter()
                .zip(y)
                .map(|(a, b)| {
                    let t = (a - b) / scale;
                    t * t
                })
                .sum();
            scale * sum.sqrt()
        }
    }
}

/// Kernel matrix `A_ij = k(x_i, x_j)` for pairwise distinct points.
pub fn gram<P: AsRef<[f64]>>(kernel: &KernelSpec, points: &[P]) -> Result<DMatrix<f64>, KernelError> {
    let n = points.len();
    check_dims(kernel, points)?;
    for i in 0..n {
        for j in (i + 1)..n {
            if points[i].as_ref() == points[j].as_ref() {
                return Err(KernelError::DuplicatePoints(i, j));
            }
        }
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n {
        let xi = points[i].as_ref();
        a[(i, i)] = kernel.value(xi, xi);
        for j in (i + 1)..n {
            let v = kernel.value(xi, points[j].as_ref());
            a[(i, j)] = v;
            a[(j, i)] = v;
        }
    }
    Ok(a)
}

/// Vector of diagonal values `k(x_i, x_i)`.
pub fn diag<P: AsRef<[f64]>>(kernel: &KernelSpec, points: &[P]) -> Result<Vec<f64>, KernelError> {
    check_dims(kernel, points)?;
    Ok(points.iter().map(|p| kernel.diag_value(p.as_ref())).collect())
}

fn check_dims<P: AsRef<[f64]>>(kernel: &KernelSpec, points: &[P]) -> Result<(), KernelError> {
    let Some(first) = points.first() else {
        return Ok(());
    };
    let d = first.as_ref().len();
    if let Some(req) = kernel.required_dim() {
        if req != d {
            return Err(KernelError::DimensionMismatch(req, d));
        }
    }
    for p in points {
        if p.as_ref().len() != d {
            return Err(KernelError::DimensionMismatch(d, p.as_ref().len()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn base_families() -> Vec<KernelSpec> {
        vec![
            KernelSpec::matern_basic(1.0),
            KernelSpec::matern_linear(1.0),
            KernelSpec::matern_quadratic(1.0),
            KernelSpec::gaussian(1.0),
        ]
    }

    fn annulus_composite() -> KernelSpec {
        KernelSpec::composite(
            KernelSpec::matern_quadratic(1.0),
            KernelSpec::matern_linear(1.0),
            DomainSpec::ball(vec![0.0, 0.0], 0.5),
        )
    }

    fn min_eigenvalue(a: &DMatrix<f64>) -> f64 {
        a.clone().symmetric_eigen().eigenvalues.min()
    }

    #[test]
    fn gaussian_at_coincident_points_is_one() {
        let k = KernelSpec::gaussian(1.0);
        assert_eq!(k.eval(&[0.3, -1.2], &[0.3, -1.2]).unwrap(), 1.0);
    }

    #[test]
    fn basic_matern_at_ln2_is_half() {
        let k = KernelSpec::matern_basic(1.0);
        let v = k.eval(&[0.0, 0.0], &[std::f64::consts::LN_2, 0.0]).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn quadratic_matern_at_unit_distance() {
        let k = KernelSpec::matern_quadratic(1.0);
        let v = k.eval(&[0.0, 0.0], &[0.0, 1.0]).unwrap();
        let expected = (-1.0f64).exp() * 7.0 / 3.0;
        assert!((v - expected).abs() < 1e-15);
        assert!((v - 0.858_385).abs() < 1e-6);
    }

    #[test]
    fn linear_matern_forms() {
        let r = 0.7;
        let plus = KernelSpec::matern_linear(1.0);
        let minus = KernelSpec::MaternLinear {
            shape: 1.0,
            form: LinearForm::OneMinusR,
        };
        assert!((plus.radial_profile(r) - (-r).exp() * 1.7).abs() < 1e-15);
        assert!((minus.radial_profile(r) - (-r).exp() * 0.3).abs() < 1e-15);
    }

    #[test]
    fn shape_scales_distance() {
        let k = KernelSpec::gaussian(2.0);
        let v = k.eval(&[0.0], &[0.5]).unwrap();
        assert!((v - (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let k = KernelSpec::gaussian(1.0);
        assert_eq!(
            k.eval(&[0.0, 1.0], &[0.0]),
            Err(KernelError::DimensionMismatch(2, 1))
        );
        let c = annulus_composite();
        assert!(matches!(
            c.eval(&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]),
            Err(KernelError::DimensionMismatch(2, 3))
        ));
    }

    #[test]
    fn invalid_shape_is_rejected() {
        assert!(KernelSpec::gaussian(0.0).validate().is_err());
        assert!(KernelSpec::matern_basic(-1.0).validate().is_err());
        assert!(KernelSpec::matern_basic(f64::NAN).validate().is_err());
        assert!(annulus_composite().validate().is_ok());
    }

    #[test]
    fn gram_of_single_point_is_identity() {
        for k in base_families() {
            let a = gram(&k, &[vec![0.2, 0.9]]).unwrap();
            assert_eq!(a.shape(), (1, 1));
            assert_eq!(a[(0, 0)], 1.0);
        }
    }

    #[test]
    fn gram_two_points_basic_matern() {
        let k = KernelSpec::matern_basic(1.0);
        let a = gram(&k, &[vec![0.0, 0.0], vec![std::f64::consts::LN_2, 0.0]]).unwrap();
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(1, 1)], 1.0);
        assert!((a[(0, 1)] - 0.5).abs() < 1e-15);
        assert_eq!(a[(0, 1)], a[(1, 0)]);
    }

    #[test]
    fn gram_rejects_duplicates() {
        let k = KernelSpec::gaussian(1.0);
        let err = gram(&k, &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap_err();
        assert_eq!(err, KernelError::DuplicatePoints(0, 2));
    }

    #[test]
    fn gram_matches_direct_summation_and_is_positive_definite() {
        // Oracle: entries recomputed from the closed-form profile on raw
        // coordinates, eigenvalues from a dense symmetric solve.
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<Vec<f64>> = (0..4).map(|_| vec![rng.gen(), rng.gen()]).collect();
        let k = KernelSpec::gaussian(1.0);
        let a = gram(&k, &pts).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let dx = pts[i][0] - pts[j][0];
                let dy = pts[i][1] - pts[j][1];
                let direct = (-(dx * dx + dy * dy)).exp();
                assert!((a[(i, j)] - direct).abs() < 1e-15);
            }
        }
        assert!(min_eigenvalue(&a) > 0.0);
    }

    #[test]
    fn diag_is_all_ones_for_base_families() {
        let pts = vec![vec![0.1, 0.2], vec![3.0, -4.0], vec![0.0, 0.0]];
        for k in base_families() {
            assert_eq!(diag(&k, &pts).unwrap(), vec![1.0; 3]);
        }
    }

    #[test]
    fn composite_diagonal_inside_and_outside_indicator() {
        let k = annulus_composite();
        let inside = [0.1, 0.1];
        let outside = [0.7, 0.0];
        assert_eq!(k.unnormalized(&inside, &inside), 2.0);
        assert_eq!(k.unnormalized(&outside, &outside), 1.0);
        assert_eq!(k.diag_value(&inside), 1.0);
        assert_eq!(k.diag_value(&outside), 0.5);
        // eval oracle: outer part only, rescaled
        let outer = KernelSpec::matern_quadratic(1.0);
        assert_eq!(
            k.eval(&outside, &outside).unwrap(),
            COMPOSITE_NORMALIZATION * outer.eval(&outside, &outside).unwrap()
        );
    }

    #[test]
    fn symmetry_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut kernels = base_families();
        kernels.push(annulus_composite());
        for _ in 0..1000 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
            for k in &kernels {
                assert_eq!(k.value(&x, &y), k.value(&y, &x));
            }
        }
    }

    #[test]
    fn diagonal_bounded_by_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut kernels = base_families();
        kernels.push(annulus_composite());
        for _ in 0..500 {
            let x = [rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5)];
            for k in &kernels {
                assert!(k.diag_value(&x) <= 1.0);
            }
        }
    }

    #[test]
    fn translation_invariance_of_base_families() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let x = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen::<f64>()];
            let y = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen::<f64>()];
            let t = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            let xt: Vec<f64> = x.iter().zip(&t).map(|(a, b)| a + b).collect();
            let yt: Vec<f64> = y.iter().zip(&t).map(|(a, b)| a + b).collect();
            for k in base_families() {
                assert!((k.value(&x, &y) - k.value(&xt, &yt)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn positive_definiteness_probe() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut kernels = base_families();
        kernels.push(annulus_composite());
        for trial in 0..60 {
            let n = 2 + trial % 11;
            let pts: Vec<Vec<f64>> = (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect();
            for k in &kernels {
                let a = gram(k, &pts).unwrap();
                assert!(min_eigenvalue(&a) > -1e-10, "{k:?} failed on trial {trial}");
            }
        }
    }

    #[test]
    fn one_minus_r_form_is_not_positive_definite() {
        let k = KernelSpec::MaternLinear {
            shape: 1.0,
            form: LinearForm::OneMinusR,
        };
        // 4x4 grid at unit spacing
        let pts: Vec<Vec<f64>> = (0..16).map(|i| vec![(i / 4) as f64, (i % 4) as f64]).collect();
        let a = gram(&k, &pts).unwrap();
        assert!(min_eigenvalue(&a) < -1e-3);
    }

    #[test]
    fn json_grammar_round_trip() {
        let k: KernelSpec = serde_json::from_str(r#"{"family":"matern_quadratic","shape":1.0}"#).unwrap();
        assert_eq!(k, KernelSpec::matern_quadratic(1.0));
        let c: KernelSpec = serde_json::from_str(
            r#"{"family":"composite",
                "outer":{"family":"matern_quadratic","shape":1.0},
                "inner":{"family":"matern_linear","shape":1.0},
                "indicator":{"type":"ball","center":[0,0],"radius":0.5}}"#,
        )
        .unwrap();
        assert_eq!(c, annulus_composite());
        let back: KernelSpec = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<KernelSpec>(r#"{"family":"gaussian","shap":1.0}"#).is_err());
    }
}
