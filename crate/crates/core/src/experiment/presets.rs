//! Built-in configurations for the domain pairs studied in the experiments.

use crate::domains::{DomainSpec, Strategy};
use crate::kernels::KernelSpec;
use crate::rates::DecayModel;

use super::config::{Discretization, ExperimentConfig, FitConfig, RuleConfig, StopConfig, WindowConfig, SCHEMA_VERSION};

pub const NAMES: [&str; 4] = ["fig1_composite", "fig2_basic_matern", "fig2_linear_matern", "fig3_gaussian"];

fn algebraic() -> FitConfig {
    FitConfig {
        model: DecayModel::Algebraic,
        alpha_fixed: None,
        window: None,
    }
}

fn base(name: &str, kernel: KernelSpec, domain_super: DomainSpec, domain_sub: DomainSpec) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        name: name.into(),
        kernel,
        domain_super,
        domain_sub,
        discretization: Discretization {
            strategy: Strategy::Grid,
            target: 10_000,
            seed: 0,
        },
        rule: RuleConfig::default(),
        stop: StopConfig {
            max_points: 500,
            power_tol: 0.0,
            min_points: 500,
        },
        fits: vec![algebraic()],
        outputs: None,
        stability_slack: None,
        power_snapshot: false,
    }
}

/// Unit square against its part outside the unit circle.
fn cusp_pair(name: &str, kernel: KernelSpec) -> ExperimentConfig {
    let mut cfg = base(name, kernel, DomainSpec::unit_square(), DomainSpec::cusp_domain());
    // the cusp domain covers 21% of the square; this leaves > 10^4 candidates in it
    cfg.discretization.target = 50_000;
    cfg
}

pub fn preset(name: &str) -> Option<ExperimentConfig> {
    let cfg = match name {
        "fig1_composite" => {
            let unit_ball = DomainSpec::ball(vec![0.0, 0.0], 1.0);
            let inner_ball = DomainSpec::ball(vec![0.0, 0.0], 0.5);
            let kernel = KernelSpec::composite(
                KernelSpec::matern_quadratic(1.0),
                KernelSpec::matern_linear(1.0),
                inner_ball.clone(),
            );
            let mut cfg = base(name, kernel, unit_ball.clone(), DomainSpec::difference(unit_ball, inner_ball));
            cfg.discretization.target = 20_000;
            cfg.stop.max_points = 1000;
            cfg.stop.min_points = 1000;
            cfg
        }
        "fig2_basic_matern" => cusp_pair(name, KernelSpec::matern_basic(1.0)),
        "fig2_linear_matern" => cusp_pair(name, KernelSpec::matern_linear(1.0)),
        "fig3_gaussian" => {
            let mut cfg = base(name, KernelSpec::gaussian(1.0), DomainSpec::unit_square(), DomainSpec::cusp_domain());
            // runs end at the numerical rank, long before max_points
            cfg.stop.min_points = 0;
            let from5 = Some(WindowConfig { lo: 5, hi: None });
            cfg.fits = vec![
                FitConfig {
                    model: DecayModel::LogExponential,
                    alpha_fixed: Some(0.5),
                    window: from5,
                },
                FitConfig { window: from5, ..algebraic() },
                FitConfig {
                    model: DecayModel::Exponential,
                    alpha_fixed: Some(0.5),
                    window: from5,
                },
            ];
            cfg
        }
        _ => return None,
    };
    Some(cfg)
}
