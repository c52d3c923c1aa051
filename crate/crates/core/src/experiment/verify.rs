//! Batch check of the abstract greedy theory on random instances.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::abstract_greedy::{
    abstract_run, transfer_algebraic, transfer_exponential, transfer_logexponential, verify_instance,
    write_verification_csv, AbstractInstance,
};

use super::ExperimentError;

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub instances: usize,
    pub inequality_checks: usize,
    pub inequality_violations: usize,
    /// Runs where a sigma on the subset exceeded the sigma on the whole dictionary.
    pub nesting_violations: usize,
    pub transfer_checks: usize,
    pub transfer_failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.inequality_violations == 0 && self.nesting_violations == 0 && self.transfer_failures == 0
    }

    pub fn summary(&self) -> String {
        format!(
            "product inequality: {}/{} checks hold on {} instances; subset nesting violations: {}; transfer constants: {}/{} exact",
            self.inequality_checks - self.inequality_violations,
            self.inequality_checks,
            self.instances,
            self.nesting_violations,
            self.transfer_checks - self.transfer_failures,
            self.transfer_checks
        )
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-15 * b.abs()
}

/// Runs the product inequality on instances seeded `0..seed_count`, checks
/// the subset nesting of the two sigma sequences and the transfer constants.
/// With `out_dir` the per-check rows go to `verification.csv` there.
pub fn verify_theory(seed_count: u64, out_dir: Option<&Path>) -> Result<VerifyReport, ExperimentError> {
    if seed_count == 0 {
        return Err(ExperimentError::VerificationFailed("seed count must be >= 1".into()));
    }
    let mut report = VerifyReport::default();
    let mut rows = Vec::new();
    let failed = |e: crate::abstract_greedy::AbstractError| ExperimentError::VerificationFailed(e.to_string());
    for seed in 0..seed_count {
        let inst_rows = verify_instance(seed).map_err(failed)?;
        report.inequality_checks += inst_rows.len();
        report.inequality_violations += inst_rows.iter().filter(|r| !r.report.holds).count();
        rows.extend(inst_rows);

        let inst = AbstractInstance::random(seed);
        let rec = abstract_run(&inst, inst.subset_ids.len()).map_err(failed)?;
        if rec.sigma_tilde.iter().zip(&rec.sigma_full).any(|(t, f)| *t > f + 1e-12) {
            report.nesting_violations += 1;
        }
        report.instances += 1;
    }

    let mut check = |ok: bool| {
        report.transfer_checks += 1;
        if !ok {
            report.transfer_failures += 1;
        }
    };
    check(transfer_algebraic(1.0, 1.0) == 64.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed_count);
    for _ in 0..seed_count {
        let (c0_big, c0, alpha) = (rng.gen_range(0.01..10.0), rng.gen_range(0.01..10.0), rng.gen_range(0.0..3.0));
        let (c_exp, c1) = transfer_exponential(c0_big, c0, alpha);
        let (c_log, c1t) = transfer_logexponential(c0_big, c0, alpha);
        check(rel_close(c1, c0 / 2f64.powf(1.0 + 2.0 * alpha)));
        check(rel_close(c1t, c0 / 2f64.powf(2.0 + 2.0 * alpha)));
        check(rel_close(c_exp, (2.0 * c0_big).sqrt()) && c_exp == c_log);
        check(c1 < c0 && c1t < c0);
        check(rel_close(transfer_algebraic(c0_big, alpha), c0_big * 2f64.powf(5.0 * alpha + 1.0)));
    }

    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| ExperimentError::io(dir, e))?;
        let path = dir.join("verification.csv");
        let file = File::create(&path).map_err(|e| ExperimentError::io(&path, e))?;
        write_verification_csv(&rows, BufWriter::new(file)).map_err(|e| ExperimentError::io(&path, e))?;
        report.csv = Some(path);
    }
    Ok(report)
}
