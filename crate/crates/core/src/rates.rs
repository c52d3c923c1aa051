//! Decay-model fits for greedy error sequences and the stability verdict
//! comparing a domain with a subdomain.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default slack on the decay exponent or rate constant in [`stability_verdict`].
pub const DEFAULT_SLACK: f64 = 0.15;

#[derive(Debug, Error, PartialEq)]
pub enum RateError {
    #[error("{ns} indices but {sigmas} sigma values")]
    LengthMismatch { ns: usize, sigmas: usize },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("need at least 3 points in the fit window, got {0}")]
    TooFewPoints(usize),
    #[error("sigma at n={n} is {value}; log undefined")]
    NonPositive { n: usize, value: f64 },
    #[error("alpha must be positive and finite, got {0}")]
    InvalidAlpha(f64),
    #[error("model {0:?} needs a fixed alpha")]
    MissingAlpha(DecayModel),
    #[error("cannot compare a {0:?} fit with a {1:?} fit")]
    MismatchedModels(DecayModel, DecayModel),
    #[error("fits use different exponents ({0} vs {1})")]
    MismatchedAlpha(f64, f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayModel {
    /// `C n^{-alpha}`
    Algebraic,
    /// `C exp(-c n^alpha)`
    Exponential,
    /// `C exp(-c log(n) n^alpha)`
    LogExponential,
}

impl DecayModel {
    pub fn min_n(self) -> usize {
        match self {
            DecayModel::LogExponential => 2,
            _ => 1,
        }
    }
}

/// Inclusive range of step indices used in a fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FitWindow {
    pub lo: usize,
    pub hi: usize,
}

impl FitWindow {
    pub fn new(lo: usize, hi: usize) -> Self {
        FitWindow { lo, hi }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub model: DecayModel,
    #[serde(rename = "C")]
    pub big_c: f64,
    pub alpha: f64,
    /// Rate constant; `None` for the algebraic model.
    pub c: Option<f64>,
    pub window: [usize; 2],
    /// Root-mean-square residual of `log sigma`.
    pub rms: f64,
}

impl DecayFit {
    /// Model prediction at step `n`.
    pub fn predict(&self, n: f64) -> f64 {
        match self.model {
            DecayModel::Algebraic => self.big_c * n.powf(-self.alpha),
            DecayModel::Exponential => self.big_c * (-self.c.unwrap_or(0.0) * n.powf(self.alpha)).exp(),
            DecayModel::LogExponential => self.big_c * (-self.c.unwrap_or(0.0) * n.ln() * n.powf(self.alpha)).exp(),
        }
    }
}

// Points (x, log sigma) inside the window.
fn window_points(
    ns: &[usize],
    sigmas: &[f64],
    window: FitWindow,
    model: DecayModel,
    feature: impl Fn(f64) -> f64,
) -> Result<(Vec<f64>, Vec<f64>), RateError> {
    if ns.len() != sigmas.len() {
        return Err(RateError::LengthMismatch {
            ns: ns.len(),
            sigmas: sigmas.len(),
        });
    }
    if window.lo < model.min_n() {
        return Err(RateError::InvalidWindow(format!(
            "{model:?} fits need n >= {}, window starts at {}",
            model.min_n(),
            window.lo
        )));
    }
    if window.lo > window.hi {
        return Err(RateError::InvalidWindow(format!("lo {} > hi {}", window.lo, window.hi)));
    }
    let (Some(&first), Some(&last)) = (ns.iter().min(), ns.iter().max()) else {
        return Err(RateError::TooFewPoints(0));
    };
    if window.lo < first || window.hi > last {
        return Err(RateError::InvalidWindow(format!(
            "[{}, {}] not within data range [{first}, {last}]",
            window.lo, window.hi
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&n, &s) in ns.iter().zip(sigmas) {
        if n < window.lo || n > window.hi {
            continue;
        }
        if !(s > 0.0 && s.is_finite()) {
            return Err(RateError::NonPositive { n, value: s });
        }
        xs.push(feature(n as f64));
        ys.push(s.ln());
    }
    if xs.len() < 3 {
        return Err(RateError::TooFewPoints(xs.len()));
    }
    Ok((xs, ys))
}

/// Least squares line `y = a + b x`; returns `(a, b, rms)`.
fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - a - b * x).powi(2)).sum();
    (a, b, (ss / n).sqrt())
}

fn check_alpha(alpha: f64) -> Result<(), RateError> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(RateError::InvalidAlpha(alpha))
    }
}

/// Fits `C n^{-alpha}` by least squares in log-log coordinates.
pub fn fit_algebraic(ns: &[usize], sigmas: &[f64], window: FitWindow) -> Result<DecayFit, RateError> {
    let model = DecayModel::Algebraic;
    let (xs, ys) = window_points(ns, sigmas, window, model, f64::ln)?;
    let (a, b, rms) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        model,
        big_c: a.exp(),
        alpha: -b,
        c: None,
        window: [window.lo, window.hi],
        rms,
    })
}

/// Fits `C exp(-c n^alpha)` for a fixed `alpha`.
pub fn fit_exponential(ns: &[usize], sigmas: &[f64], alpha: f64, window: FitWindow) -> Result<DecayFit, RateError> {
    check_alpha(alpha)?;
    let model = DecayModel::Exponential;
    let (xs, ys) = window_points(ns, sigmas, window, model, |n| n.powf(alpha))?;
    let (a, b, rms) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        model,
        big_c: a.exp(),
        alpha,
        c: Some(-b),
        window: [window.lo, window.hi],
        rms,
    })
}

/// Fits `C exp(-c log(n) n^alpha)` for a fixed `alpha`; the window must start at n >= 2.
pub fn fit_logexponential(ns: &[usize], sigmas: &[f64], alpha: f64, window: FitWindow) -> Result<DecayFit, RateError> {
    check_alpha(alpha)?;
    let model = DecayModel::LogExponential;
    let (xs, ys) = window_points(ns, sigmas, window, model, |n| n.ln() * n.powf(alpha))?;
    let (a, b, rms) = linear_fit(&xs, &ys);
    Ok(DecayFit {
        model,
        big_c: a.exp(),
        alpha,
        c: Some(-b),
        window: [window.lo, window.hi],
        rms,
    })
}

pub fn fit(
    model: DecayModel,
    ns: &[usize],
    sigmas: &[f64],
    alpha: Option<f64>,
    window: FitWindow,
) -> Result<DecayFit, RateError> {
    match (model, alpha) {
        (DecayModel::Algebraic, _) => fit_algebraic(ns, sigmas, window),
        (DecayModel::Exponential, Some(a)) => fit_exponential(ns, sigmas, a, window),
        (DecayModel::LogExponential, Some(a)) => fit_logexponential(ns, sigmas, a, window),
        (m, None) => Err(RateError::MissingAlpha(m)),
    }
}

/// Drops the first `max(5, 10%)` steps and everything from the first
/// non-positive sigma on.
pub fn default_window(ns: &[usize], sigmas: &[f64]) -> Result<FitWindow, RateError> {
    if ns.len() != sigmas.len() {
        return Err(RateError::LengthMismatch {
            ns: ns.len(),
            sigmas: sigmas.len(),
        });
    }
    let hi = ns
        .iter()
        .zip(sigmas)
        .take_while(|(_, s)| **s > 0.0)
        .map(|(n, _)| *n)
        .max()
        .ok_or(RateError::TooFewPoints(0))?;
    let lo = 5.max(hi.div_ceil(10));
    if lo > hi {
        return Err(RateError::InvalidWindow(format!("trace ends at n={hi}, before the burn-in of {lo} steps")));
    }
    Ok(FitWindow { lo, hi })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub stable: bool,
    /// Smallest subdomain value of the compared quantity still counted as stable.
    pub threshold: f64,
    pub slack: f64,
    pub detail: String,
    pub fit_super: DecayFit,
    pub fit_sub: DecayFit,
}

/// Checks that the subdomain decay is at least as fast as the theory
/// guarantees: the same algebraic exponent, or the rate constant degraded by
/// `2^{-1-2 alpha}` (exponential) or `2^{-2-2 alpha}` (log-exponential).
pub fn stability_verdict(fit_super: &DecayFit, fit_sub: &DecayFit, slack: f64) -> Result<StabilityReport, RateError> {
    if fit_super.model != fit_sub.model {
        return Err(RateError::MismatchedModels(fit_super.model, fit_sub.model));
    }
    let (value, threshold, what) = match fit_super.model {
        DecayModel::Algebraic => (fit_sub.alpha, fit_super.alpha - slack, "alpha"),
        model => {
            if (fit_super.alpha - fit_sub.alpha).abs() > 1e-12 {
                return Err(RateError::MismatchedAlpha(fit_super.alpha, fit_sub.alpha));
            }
            let factor = match model {
                DecayModel::Exponential => (-1.0 - 2.0 * fit_super.alpha).exp2(),
                _ => (-2.0 - 2.0 * fit_super.alpha).exp2(),
            };
            let c_sup = fit_super.c.unwrap_or(f64::NAN);
            (fit_sub.c.unwrap_or(f64::NAN), c_sup * factor - slack, "c")
        }
    };
    let stable = value >= threshold;
    let detail = format!(
        "{what}_sub = {value:.6} {} threshold {threshold:.6} ({what}_super = {:.6}, slack {slack})",
        if stable { ">=" } else { "<" },
        match fit_super.model {
            DecayModel::Algebraic => fit_super.alpha,
            _ => fit_super.c.unwrap_or(f64::NAN),
        }
    );
    Ok(StabilityReport {
        stable,
        threshold,
        slack,
        detail,
        fit_super: fit_super.clone(),
        fit_sub: fit_sub.clone(),
    })
}
