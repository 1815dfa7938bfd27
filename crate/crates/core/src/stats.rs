//! Univariate and bivariate statistics: moments, standardization and Pearson
//! correlation.
//!
//! Variances and covariances use the population convention (divisor `n`).
//! Standardized vectors are centered and scaled to unit Euclidean norm, so the
//! dot product of two standardized vectors is exactly their Pearson
//! correlation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest amount by which a correlation may leave `[-1, 1]` through rounding
/// before it is treated as a numerical failure.
pub const CLAMP_SLACK: f64 = 1e-12;

/// An observed variable: at least two finite values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RawSeries(Vec<f64>);

impl RawSeries {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::Length(values.len()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(pos));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// True unless every entry is identical.
    pub fn has_variance(&self) -> bool {
        let first = self.0[0];
        self.0.iter().any(|&v| v != first)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for RawSeries {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<RawSeries> for Vec<f64> {
    fn from(s: RawSeries) -> Self {
        s.0
    }
}

impl AsRef<[f64]> for RawSeries {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    /// Euclidean norm of the centered series.
    pub norm_dev: f64,
}

/// A centered, unit-norm vector.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedVector(Vec<f64>);

impl StandardizedVector {
    /// Wraps values that already satisfy the centered/unit-norm invariant.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        let sum: f64 = values.iter().sum();
        let norm = dot(&values, &values).sqrt();
        if sum.abs() > 1e-10 * n as f64 || (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidInput(format!(
                "vector is not standardized (sum {sum:e}, norm {norm})"
            )));
        }
        Ok(Self(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn dot(&self, other: &StandardizedVector) -> f64 {
        dot(&self.0, &other.0)
    }
}

impl AsRef<[f64]> for StandardizedVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn series_stats(x: &RawSeries) -> SeriesStats {
    let v = x.values();
    let mu = mean(v);
    let ss: f64 = v.iter().map(|&a| (a - mu) * (a - mu)).sum();
    let norm_dev = ss.sqrt();
    SeriesStats {
        mean: mu,
        std: norm_dev / (v.len() as f64).sqrt(),
        norm_dev,
    }
}

/// Like [`series_stats`] but validates raw values first.
pub fn series_stats_checked(values: &[f64]) -> Result<SeriesStats> {
    Ok(series_stats(&RawSeries::new(values.to_vec())?))
}

/// Centers `x` and divides by the norm of the centered vector.
pub fn standardize(x: &RawSeries) -> Result<StandardizedVector> {
    standardize_indexed(x, 0)
}

/// [`standardize`] that reports `index` in a zero-variance error.
pub(crate) fn standardize_indexed(x: &RawSeries, index: usize) -> Result<StandardizedVector> {
    if !x.has_variance() {
        return Err(Error::ZeroVariance(index));
    }
    let stats = series_stats(x);
    if stats.norm_dev == 0.0 {
        return Err(Error::ZeroVariance(index));
    }
    Ok(StandardizedVector(
        x.values()
            .iter()
            .map(|&a| (a - stats.mean) / stats.norm_dev)
            .collect(),
    ))
}

fn check_same_len(x: &RawSeries, y: &RawSeries) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    Ok(())
}

/// Population covariance.
pub fn covariance(x: &RawSeries, y: &RawSeries) -> Result<f64> {
    check_same_len(x, y)?;
    Ok(covariance_unchecked(x.values(), y.values()))
}

pub(crate) fn covariance_unchecked(x: &[f64], y: &[f64]) -> f64 {
    let mx = mean(x);
    let my = mean(y);
    x.iter()
        .zip(y)
        .map(|(&a, &b)| (a - mx) * (b - my))
        .sum::<f64>()
        / x.len() as f64
}

/// Clamps a correlation that left `[-1, 1]` by at most [`CLAMP_SLACK`].
pub fn clamp_correlation(r: f64) -> Result<f64> {
    if !r.is_finite() || r.abs() > 1.0 + CLAMP_SLACK {
        return Err(Error::Numerical(format!("correlation {r} outside [-1, 1]")));
    }
    Ok(r.clamp(-1.0, 1.0))
}

/// Pearson correlation `cov(x, y) / (std(x) std(y))`.
pub fn pearson(x: &RawSeries, y: &RawSeries) -> Result<f64> {
    check_same_len(x, y)?;
    if !x.has_variance() {
        return Err(Error::ZeroVariance(0));
    }
    if !y.has_variance() {
        return Err(Error::ZeroVariance(1));
    }
    let sx = series_stats(x);
    let sy = series_stats(y);
    let cov = covariance_unchecked(x.values(), y.values());
    clamp_correlation(cov / (sx.std * sy.std))
}
