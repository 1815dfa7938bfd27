//! Least-squares linear decomposition of a target over a set of predictors,
//! expressed through uncorrelation coefficients.
//!
//! For the optimal fit `x̂ = Σ β_i v_i + o`, the mean square error equals
//! `σ_y² ω²(V, y) / ω²(V)`, so minimizing the error over predictor subsets is
//! the same as minimizing the ratio `ω(V, y) / ω(V)`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{clamp_unit_det, correlation_matrix, muc_det, CorrelationMatrix};
use crate::minors::binomial;
use crate::stats::{covariance_unchecked, mean, pearson, RawSeries};

/// Smallest admissible Cholesky pivot of the unit-diagonal scaled covariance.
pub const SINGULARITY_THRESHOLD: f64 = 1e-10;
/// Smallest admissible `ω²(V)` for a candidate subset during selection.
pub const DEGENERATE_MUC_SQUARED: f64 = 1e-10;
/// Largest number of subsets exhaustive selection will evaluate.
pub const EXHAUSTIVE_LIMIT: u64 = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct NormalEquations {
    /// Population covariances among predictors.
    pub cov_matrix: DMatrix<f64>,
    /// Covariances of each predictor with the target.
    pub cross_cov: DVector<f64>,
    pub target_var: f64,
}

impl NormalEquations {
    pub fn from_data(predictors: &[RawSeries], target: &RawSeries) -> Self {
        let m = predictors.len();
        let cov_matrix = DMatrix::from_fn(m, m, |i, j| {
            covariance_unchecked(predictors[i].values(), predictors[j].values())
        });
        let cross_cov = DVector::from_fn(m, |i, _| {
            covariance_unchecked(predictors[i].values(), target.values())
        });
        let target_var = covariance_unchecked(target.values(), target.values());
        Self {
            cov_matrix,
            cross_cov,
            target_var,
        }
    }

    /// Solves `S B = S_y`.
    ///
    /// `S` is first scaled to unit diagonal so the singularity threshold is
    /// independent of predictor units, then factored by Cholesky.
    pub fn solve(&self) -> Result<DVector<f64>> {
        let m = self.cov_matrix.nrows();
        let scale = DVector::from_fn(m, |i, _| self.cov_matrix[(i, i)].sqrt());
        let scaled = DMatrix::from_fn(m, m, |i, j| self.cov_matrix[(i, j)] / (scale[i] * scale[j]));
        let chol = Cholesky::new(scaled).ok_or_else(|| {
            Error::DegenerateBasis("predictor covariance matrix is not positive definite".into())
        })?;
        let l = chol.l_dirty();
        let min_pivot = (0..m)
            .map(|i| l[(i, i)] * l[(i, i)])
            .fold(f64::INFINITY, f64::min);
        if min_pivot < SINGULARITY_THRESHOLD {
            return Err(Error::DegenerateBasis(format!(
                "predictors are collinear after centering (pivot {min_pivot:e})"
            )));
        }
        let rhs = self.cross_cov.component_div(&scale);
        Ok(chol.solve(&rhs).component_div(&scale))
    }
}

/// Absolute residuals of the decomposition identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdentityResiduals {
    /// `|mse - σ_y² ω²(V,y)/ω²(V)|`
    pub mse: f64,
    /// `|r²(x̂, y) - R²|`; `None` when the fit is constant.
    pub r_squared: Option<f64>,
    /// `|ω(x̂, y) - ω(V,y)/ω(V)|`; `None` when the fit is constant.
    pub omega: Option<f64>,
    /// `|σ²(x̂) - σ(x̂, y)|`
    pub fitted_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionResult {
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Mean square residual of the optimal fit.
    pub mse: f64,
    /// `σ_y² - S_yᵀ S⁻¹ S_y`, the same quantity from the normal equations.
    pub mse_normal: f64,
    pub r_squared: f64,
    pub fitted: Vec<f64>,
    pub omega_ratio: f64,
    pub fitted_variance: f64,
    pub fitted_target_cov: f64,
    pub target_var: f64,
    pub identity_residuals: IdentityResiduals,
}

impl DecompositionResult {
    /// Whether the fitted values carry no variance relative to the target.
    pub fn is_constant_fit(&self) -> bool {
        self.fitted_variance <= 1e-20 * self.target_var
    }
}

fn check_inputs(predictors: &[RawSeries], target: &RawSeries) -> Result<(usize, usize)> {
    let m = predictors.len();
    let n = target.len();
    if m == 0 {
        return Err(Error::InvalidInput("no predictors".into()));
    }
    for (i, p) in predictors.iter().enumerate() {
        if p.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                found: p.len(),
            });
        }
        if !p.has_variance() {
            return Err(Error::ZeroVariance(i));
        }
    }
    if !target.has_variance() {
        return Err(Error::ZeroVariance(m));
    }
    if m >= n {
        return Err(Error::Rank { m: m + 1, n });
    }
    Ok((m, n))
}

/// `ω(V, y) / ω(V)` from a correlation matrix whose last row is the target.
fn omega_ratio_from(joint: &CorrelationMatrix) -> Result<f64> {
    let k = joint.order() - 1;
    let predictors: Vec<usize> = (0..k).collect();
    let det_v = joint.select(&predictors).determinant();
    let det_vy = clamp_unit_det(joint.determinant())?;
    if det_v <= 0.0 {
        return Err(Error::DegenerateBasis("ω(V) is zero".into()));
    }
    Ok((det_vy / det_v).clamp(0.0, 1.0).sqrt())
}

pub fn fit_least_squares(
    predictors: &[RawSeries],
    target: &RawSeries,
) -> Result<DecompositionResult> {
    let (_, n) = check_inputs(predictors, target)?;
    let eqs = NormalEquations::from_data(predictors, target);
    let beta = eqs.solve()?;

    let y = target.values();
    let intercept = mean(y)
        - predictors
            .iter()
            .zip(beta.iter())
            .map(|(p, b)| b * mean(p.values()))
            .sum::<f64>();
    let fitted: Vec<f64> = (0..n)
        .map(|t| {
            intercept
                + predictors
                    .iter()
                    .zip(beta.iter())
                    .map(|(p, b)| b * p.values()[t])
                    .sum::<f64>()
        })
        .collect();
    let mse = y
        .iter()
        .zip(&fitted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / n as f64;
    let mse_normal = eqs.target_var - eqs.cross_cov.dot(&beta);
    if (mse - mse_normal).abs() > 1e-9 * eqs.target_var {
        return Err(Error::Numerical(format!(
            "residual MSE {mse:e} disagrees with normal-equation MSE {mse_normal:e}"
        )));
    }

    let fitted_variance = covariance_unchecked(&fitted, &fitted);
    let fitted_target_cov = covariance_unchecked(&fitted, y);
    let r_squared = (fitted_variance / eqs.target_var).clamp(0.0, 1.0);

    let mut joint = predictors.to_vec();
    joint.push(target.clone());
    let omega_ratio = omega_ratio_from(&correlation_matrix(&joint)?)?;

    let mut result = DecompositionResult {
        coefficients: beta.iter().copied().collect(),
        intercept,
        mse,
        mse_normal,
        r_squared,
        fitted,
        omega_ratio,
        fitted_variance,
        fitted_target_cov,
        target_var: eqs.target_var,
        identity_residuals: IdentityResiduals {
            mse: 0.0,
            r_squared: None,
            omega: None,
            fitted_variance: 0.0,
        },
    };
    result.identity_residuals = match verify_decomposition_identities(&result, predictors, target) {
        Ok(r) => r,
        Err(Error::ConstantFit) => IdentityResiduals {
            mse: (mse - eqs.target_var * omega_ratio * omega_ratio).abs(),
            r_squared: None,
            omega: None,
            fitted_variance: (fitted_variance - fitted_target_cov).abs(),
        },
        Err(e) => return Err(e),
    };
    Ok(result)
}

/// Recomputes the MUC ratio with the determinant route and the fitted-target
/// correlation with Pearson's formula, and returns the identity residuals.
pub fn verify_decomposition_identities(
    result: &DecompositionResult,
    predictors: &[RawSeries],
    target: &RawSeries,
) -> Result<IdentityResiduals> {
    check_inputs(predictors, target)?;
    if result.fitted.len() != target.len() {
        return Err(Error::LengthMismatch {
            expected: target.len(),
            found: result.fitted.len(),
        });
    }
    let mut joint = predictors.to_vec();
    joint.push(target.clone());
    let muc_vy = muc_det(&joint)?.muc;
    let muc_v = if predictors.len() >= 2 {
        muc_det(predictors)?.muc
    } else {
        1.0
    };
    if muc_v * muc_v < DEGENERATE_MUC_SQUARED {
        return Err(Error::DegenerateBasis(format!(
            "ω²(V) = {:e} is numerically zero",
            muc_v * muc_v
        )));
    }
    let ratio = muc_vy / muc_v;
    let var_y = covariance_unchecked(target.values(), target.values());
    let mse = (result.mse - var_y * ratio * ratio).abs();
    let fitted_variance = (result.fitted_variance - result.fitted_target_cov).abs();

    if result.is_constant_fit() {
        return Err(Error::ConstantFit);
    }
    let fitted = RawSeries::new(result.fitted.clone())?;
    if !fitted.has_variance() {
        return Err(Error::ConstantFit);
    }
    let r = pearson(&fitted, target)?;
    let omega_fit = (1.0 - r * r).max(0.0).sqrt();
    Ok(IdentityResiduals {
        mse,
        r_squared: Some((r * r - result.r_squared).abs()),
        omega: Some((omega_fit - ratio).abs()),
        fitted_variance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Exhaustive,
    GreedyForward,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceEntry {
    /// Predictor indices into the pool, ascending.
    pub subset: Vec<usize>,
    /// `ω(V, y) / ω(V)`, or `None` when the subset is degenerate.
    pub objective: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionResult {
    pub chosen: Vec<usize>,
    pub objective: f64,
    pub mse: f64,
    pub strategy: Strategy,
    /// Exhaustive: every subset in lexicographic order. Greedy: one entry per step.
    pub trace: Vec<TraceEntry>,
}

/// Evaluates `ω(V, y) / ω(V)` for pool subsets using one joint correlation matrix.
struct RatioOracle {
    joint: CorrelationMatrix,
    target: usize,
}

impl RatioOracle {
    fn new(pool: &[RawSeries], target: &RawSeries) -> Result<Self> {
        let mut joint = pool.to_vec();
        joint.push(target.clone());
        Ok(Self {
            joint: correlation_matrix(&joint)?,
            target: pool.len(),
        })
    }

    fn ratio(&self, subset: &[usize]) -> Result<Option<f64>> {
        let det_v = self.joint.select(subset).determinant();
        if det_v < DEGENERATE_MUC_SQUARED {
            return Ok(None);
        }
        let mut with_target = subset.to_vec();
        with_target.push(self.target);
        let det_vy = clamp_unit_det(self.joint.select(&with_target).determinant())?;
        Ok(Some((det_vy / det_v).clamp(0.0, 1.0).sqrt()))
    }
}

/// Chooses `m` predictors from `pool` minimizing `ω(V, y) / ω(V)`.
pub fn select_subset(
    pool: &[RawSeries],
    target: &RawSeries,
    m: usize,
    strategy: Strategy,
) -> Result<SelectionResult> {
    let k = pool.len();
    if m == 0 || m > k {
        return Err(Error::InvalidInput(format!(
            "subset size {m} must be between 1 and the pool size {k}"
        )));
    }
    check_inputs(pool, target).or_else(|e| match e {
        // the pool itself may exceed n; only the chosen subset must fit
        Error::Rank { .. } => Ok((k, target.len())),
        e => Err(e),
    })?;
    if m >= target.len() {
        return Err(Error::Rank {
            m: m + 1,
            n: target.len(),
        });
    }
    let oracle = RatioOracle::new(pool, target)?;

    let (chosen, objective, trace) = match strategy {
        Strategy::Exhaustive => {
            let count = binomial(k, m);
            if count > u128::from(EXHAUSTIVE_LIMIT) {
                return Err(Error::BudgetExceeded {
                    count,
                    budget: EXHAUSTIVE_LIMIT,
                });
            }
            let mut trace = Vec::new();
            let mut best: Option<(Vec<usize>, f64)> = None;
            for subset in itertools::Itertools::combinations(0..k, m) {
                let objective = oracle.ratio(&subset)?;
                if let Some(r) = objective {
                    if best.as_ref().is_none_or(|(_, b)| r < *b) {
                        best = Some((subset.clone(), r));
                    }
                }
                trace.push(TraceEntry { subset, objective });
            }
            let (chosen, objective) = best.ok_or(Error::NoFeasibleSubset)?;
            (chosen, objective, trace)
        }
        Strategy::GreedyForward => {
            let mut chosen: Vec<usize> = Vec::new();
            let mut trace = Vec::new();
            let mut objective = 1.0;
            for _ in 0..m {
                let mut best: Option<(usize, f64)> = None;
                for c in (0..k).filter(|c| !chosen.contains(c)) {
                    let mut cand = chosen.clone();
                    cand.push(c);
                    cand.sort_unstable();
                    if let Some(r) = oracle.ratio(&cand)? {
                        if best.is_none_or(|(_, b)| r < b) {
                            best = Some((c, r));
                        }
                    }
                }
                let (c, r) = best.ok_or(Error::NoFeasibleSubset)?;
                chosen.push(c);
                chosen.sort_unstable();
                objective = r;
                trace.push(TraceEntry {
                    subset: chosen.clone(),
                    objective: Some(r),
                });
            }
            (chosen, objective, trace)
        }
    };

    let subset: Vec<RawSeries> = chosen.iter().map(|&i| pool[i].clone()).collect();
    let mse = fit_least_squares(&subset, target)?.mse;
    Ok(SelectionResult {
        chosen,
        objective,
        mse,
        strategy,
        trace,
    })
}
