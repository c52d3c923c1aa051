//! JSON experiment configuration and its validation.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::domains::{discretize, DomainSpec, Strategy};
use crate::greedy::{RuleKind, SelectionRule};
use crate::kernels::KernelSpec;
use crate::rates::{DecayModel, DEFAULT_SLACK};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub name: String,
    pub kernel: KernelSpec,
    pub domain_super: DomainSpec,
    pub domain_sub: DomainSpec,
    pub discretization: Discretization,
    #[serde(default)]
    pub rule: RuleConfig,
    pub stop: StopConfig,
    #[serde(default)]
    pub fits: Vec<FitConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stability_slack: Option<f64>,
    #[serde(default)]
    pub power_snapshot: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub strategy: Strategy,
    pub target: usize,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RuleConfig {
    #[serde(default = "p_greedy")]
    pub kind: RuleKind,
    #[serde(default = "one")]
    pub gamma: f64,
    #[serde(default)]
    pub seed: u64,
}

fn p_greedy() -> RuleKind {
    RuleKind::PGreedy
}

fn one() -> f64 {
    1.0
}

impl Default for RuleConfig {
    fn default() -> Self {
        RuleConfig {
            kind: RuleKind::PGreedy,
            gamma: 1.0,
            seed: 0,
        }
    }
}

impl RuleConfig {
    pub fn to_rule(self) -> SelectionRule {
        SelectionRule::p_greedy().weak(self.gamma, self.seed)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StopConfig {
    pub max_points: usize,
    #[serde(default)]
    pub power_tol: f64,
    /// Runs ending through numerical rank with fewer nodes are reported as failures.
    #[serde(default)]
    pub min_points: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub model: DecayModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_fixed: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowConfig>,
}

/// Fit window; a missing `hi` means the last step with positive sigma.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub lo: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hi: Option<usize>,
}

/// One offending field and what is wrong with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for FieldError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, Vec<FieldError>> {
        serde_json::from_str(text).map_err(|e| {
            vec![FieldError {
                field: "<document>".into(),
                message: e.to_string(),
            }]
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Hex SHA-256 of the compact JSON serialization.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("config serializes");
        hex::encode(Sha256::digest(bytes))
    }

    pub fn slack(&self) -> f64 {
        self.stability_slack.unwrap_or(DEFAULT_SLACK)
    }

    /// Collects every problem instead of stopping at the first.
    pub fn validate(&self) -> Result<(), Vec<FieldError>> {
        let mut errs = Vec::new();
        let mut push = |field: &str, message: String| {
            errs.push(FieldError {
                field: field.into(),
                message,
            })
        };

        if self.schema_version != SCHEMA_VERSION {
            push("schema_version", format!("expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if !is_safe_name(&self.name) {
            push("name", format!("{:?} is not a safe file name ([A-Za-z0-9_.-], not starting with '.')", self.name));
        }
        if let Err(e) = self.kernel.validate() {
            push("kernel", e.to_string());
        }
        let dim_super = self.domain_super.dim();
        match self.domain_super.validate() {
            Err(e) => push("domain_super", e.to_string()),
            Ok(()) if self.domain_super.bounding_box().is_none() => {
                push("domain_super", "domain is unbounded".into())
            }
            Ok(()) => {}
        }
        if let Err(e) = self.domain_sub.validate() {
            push("domain_sub", e.to_string());
        }
        if dim_super != self.domain_sub.dim() {
            push("domain_sub", format!("dimension {:?} differs from domain_super {:?}", self.domain_sub.dim(), dim_super));
        }
        if let (Some(k), Some(d)) = (self.kernel.required_dim(), dim_super) {
            if k != d {
                push("kernel", format!("indicator dimension {k} differs from domain dimension {d}"));
            }
        }
        if self.discretization.target == 0 {
            push("discretization.target", "must be >= 1".into());
        }
        if self.rule.kind != RuleKind::PGreedy {
            push("rule.kind", "only p_greedy can be configured; f-based rules need target values".into());
        }
        if !(self.rule.gamma > 0.0 && self.rule.gamma <= 1.0) {
            push("rule.gamma", format!("must lie in (0, 1], got {}", self.rule.gamma));
        }
        if self.stop.max_points == 0 {
            push("stop.max_points", "must be >= 1".into());
        }
        if !(self.stop.power_tol >= 0.0 && self.stop.power_tol.is_finite()) {
            push("stop.power_tol", format!("must be finite and >= 0, got {}", self.stop.power_tol));
        }
        if self.stop.min_points > self.stop.max_points {
            push("stop.min_points", format!("exceeds max_points {}", self.stop.max_points));
        }
        for (i, fit) in self.fits.iter().enumerate() {
            match (fit.model, fit.alpha_fixed) {
                (DecayModel::Algebraic, Some(_)) => push(&format!("fits[{i}].alpha_fixed"), "algebraic fits estimate alpha".into()),
                (DecayModel::Algebraic, None) => {}
                (_, None) => push(&format!("fits[{i}].alpha_fixed"), "required for this model".into()),
                (_, Some(a)) if !(a > 0.0 && a.is_finite()) => {
                    push(&format!("fits[{i}].alpha_fixed"), format!("must be positive, got {a}"))
                }
                _ => {}
            }
            if let Some(w) = fit.window {
                if w.lo < fit.model.min_n() {
                    push(&format!("fits[{i}].window.lo"), format!("must be >= {}", fit.model.min_n()));
                }
                if let Some(hi) = w.hi {
                    if hi < w.lo + 2 {
                        push(&format!("fits[{i}].window.hi"), "window must hold at least 3 steps".into());
                    }
                }
            }
        }
        if let Some(s) = self.stability_slack {
            if !(s >= 0.0 && s.is_finite()) {
                push("stability_slack", format!("must be finite and >= 0, got {s}"));
            }
        }
        if errs.is_empty() {
            self.check_nesting(&mut errs);
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    // Every point of a sample of domain_sub must lie in domain_super.
    fn check_nesting(&self, errs: &mut Vec<FieldError>) {
        let sample = match discretize(&self.domain_sub, Strategy::Halton, 1024, self.discretization.seed) {
            Ok(s) => s,
            Err(e) => {
                errs.push(FieldError {
                    field: "domain_sub".into(),
                    message: format!("cannot be sampled: {e}"),
                });
                return;
            }
        };
        let outside = sample.iter().find(|p| !self.domain_super.contains(p)).map(<[f64]>::to_vec);
        if let Some(p) = outside {
            errs.push(FieldError {
                field: "domain_sub".into(),
                message: format!("point {p:?} lies outside domain_super"),
            });
        }
    }
}

fn is_safe_name(name: &str) -> bool {
    !name.is_empty()
        && !name.starts_with('.')
        && name.len() <= 128
        && name.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}
