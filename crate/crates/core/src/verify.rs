//! Seeded numerical cross-checks of the determinant identities.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::ipd::{ipd_lhs, MAX_VARIABLES, MIN_VARIABLES};
use crate::measures::{gram_matrix, muc_det};
use crate::minors::{minor_sum_rows, muc_minors, phi_increment, MinorBudget, StandardizedMatrix};
use crate::stats::{standardize, RawSeries};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            m: 4,
            trials: 200,
            seed: 7,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub name: &'static str,
    pub max_rel_diff: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub checks: Vec<CheckSummary>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let c = &self.config;
        let n = c.m + 3;
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verify m={} n={} trials={} seed={} tol={:e}",
            c.m, n, c.trials, c.seed, c.tol
        );
        for check in &self.checks {
            let _ = writeln!(
                out,
                "{:<44} max rel diff {:.3e}  {}",
                check.name,
                check.max_rel_diff,
                if check.passed { "ok" } else { "FAIL" }
            );
        }
        if self.passed() {
            out.push_str("all identities within tolerance\n");
        } else {
            let failed: Vec<&str> = self
                .checks
                .iter()
                .filter(|c| !c.passed)
                .map(|c| c.name)
                .collect();
            let _ = writeln!(out, "identity violated: {}", failed.join(", "));
        }
        out
    }
}

/// `|a - b|` relative to the larger magnitude.
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn random_rows(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| (0..n).map(|_| StandardNormal.sample(&mut *rng)).collect())
        .collect()
}

fn series(rows: Vec<Vec<f64>>) -> Result<Vec<RawSeries>> {
    rows.into_iter().map(RawSeries::new).collect()
}

/// Runs every check on `trials` random instances with `n = m + 3`.
pub fn run(config: VerifyConfig) -> Result<VerifyReport> {
    let VerifyConfig {
        m,
        trials,
        seed,
        tol,
    } = config;
    if !(MIN_VARIABLES..=MAX_VARIABLES).contains(&m) {
        return Err(Error::Size {
            size: m,
            min: MIN_VARIABLES,
            max: MAX_VARIABLES,
        });
    }
    if trials == 0 {
        return Err(Error::InvalidInput("trials must be positive".into()));
    }
    if tol.is_nan() || tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidInput(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = m + 3;
    let budget = MinorBudget::from_env()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = [0.0f64; 4];

    for _ in 0..trials {
        let rows = random_rows(&mut rng, m, n);
        let expansion = ipd_lhs(&rows)?;
        let minors = minor_sum_rows(&rows, budget)?;
        let gram = gram_matrix(&rows)?.determinant();
        worst[0] = worst[0].max(rel_diff(expansion, minors));
        worst[1] = worst[1].max(rel_diff(minors, gram));

        let vars = series(random_rows(&mut rng, m, n))?;
        let det = muc_det(&vars)?.muc_squared;
        let sum = muc_minors(&vars, budget)?.muc_squared;
        worst[2] = worst[2].max(rel_diff(det, sum));

        let vars = series(random_rows(&mut rng, m, n))?;
        let base = StandardizedMatrix::from_series(&vars[..m - 1])?;
        let full = StandardizedMatrix::from_series(&vars)?;
        let appended = standardize(&vars[m - 1])?;
        let phi = phi_increment(&base, &appended, budget)?;
        let drop = base.minor_sum(budget)? - full.minor_sum(budget)?;
        worst[3] = worst[3].max(rel_diff(phi, drop));
    }

    let names = [
        "expansion vs minor sum",
        "minor sum vs gram determinant",
        "correlation determinant vs standardized minors",
        "increment vs drop in minor sum",
    ];
    let checks = names
        .iter()
        .zip(worst)
        .map(|(&name, max_rel_diff)| CheckSummary {
            name,
            max_rel_diff,
            passed: max_rel_diff <= tol,
        })
        .collect();
    Ok(VerifyReport { config, checks })
}
