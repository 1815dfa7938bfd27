//! Correlation and Gram matrices, the determinant route to MCC/MUC, and the
//! closed form for three variables.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{clamp_correlation, dot, standardize_indexed, RawSeries, StandardizedVector};

/// Negative rounding residue allowed on a determinant that is analytically in `[0, 1]`.
pub const DET_SLACK: f64 = 1e-10;

/// Determinant by LU factorization with partial pivoting.
pub fn determinant(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 1.0;
    }
    m.clone().lu().determinant()
}

/// Symmetric, unit-diagonal matrix of pairwise correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix(DMatrix<f64>);

impl CorrelationMatrix {
    /// Validates symmetry, unit diagonal and off-diagonal range. Positive
    /// semidefiniteness is not required here; see [`CorrelationMatrix::is_psd`].
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        for i in 0..m.nrows() {
            if m[(i, i)] != 1.0 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {i} is {} not 1",
                    m[(i, i)]
                )));
            }
            for j in 0..i {
                let v = m[(i, j)];
                if (v - m[(j, i)]).abs() > 1e-12 {
                    return Err(Error::InvalidInput(format!(
                        "entry ({i},{j}) is not symmetric"
                    )));
                }
                if !(-1.0..=1.0).contains(&v) {
                    return Err(Error::Domain(v));
                }
            }
        }
        Ok(Self(m))
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.0)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.0)
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }

    /// Principal submatrix on `indices`.
    pub fn select(&self, indices: &[usize]) -> CorrelationMatrix {
        let k = indices.len();
        CorrelationMatrix(DMatrix::from_fn(k, k, |i, j| {
            self.0[(indices[i], indices[j])]
        }))
    }

    /// Squared MUC, `det(R)` clamped to `[0, 1]`.
    pub fn muc_squared(&self) -> Result<f64> {
        clamp_unit_det(self.determinant())
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// Clamps a determinant that is analytically in `[0, 1]`.
pub fn clamp_unit_det(det: f64) -> Result<f64> {
    if !(-DET_SLACK..=1.0 + DET_SLACK).contains(&det) {
        return Err(Error::Numerical(format!(
            "correlation determinant {det:e} outside [0, 1]"
        )));
    }
    Ok(det.clamp(0.0, 1.0))
}

/// Matrix of pairwise inner products.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix(DMatrix<f64>);

impl GramMatrix {
    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn determinant(&self) -> f64 {
        determinant(&self.0)
    }
}

pub fn gram_matrix<V: AsRef<[f64]>>(vecs: &[V]) -> Result<GramMatrix> {
    let dim = vecs.first().map_or(0, |v| v.as_ref().len());
    for v in vecs {
        if v.as_ref().len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.as_ref().len(),
            });
        }
    }
    let k = vecs.len();
    let mut g = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..=i {
            let d = dot(vecs[i].as_ref(), vecs[j].as_ref());
            g[(i, j)] = d;
            g[(j, i)] = d;
        }
    }
    Ok(GramMatrix(g))
}

/// Standardizes every series, reporting the index of a constant one.
pub(crate) fn standardize_all(vars: &[RawSeries]) -> Result<Vec<StandardizedVector>> {
    let n = vars.first().map_or(0, RawSeries::len);
    vars.iter()
        .enumerate()
        .map(|(i, v)| {
            if v.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            standardize_indexed(v, i)
        })
        .collect()
}

/// Correlation matrix of already standardized vectors.
pub fn correlation_from_standardized(z: &[StandardizedVector]) -> Result<CorrelationMatrix> {
    let m = z.len();
    let mut r = DMatrix::identity(m, m);
    for i in 0..m {
        for j in 0..i {
            let v = clamp_correlation(z[i].dot(&z[j]))?;
            r[(i, j)] = v;
            r[(j, i)] = v;
        }
    }
    Ok(CorrelationMatrix(r))
}

pub fn correlation_matrix(vars: &[RawSeries]) -> Result<CorrelationMatrix> {
    if vars.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 variables, got {}",
            vars.len()
        )));
    }
    correlation_from_standardized(&standardize_all(vars)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Determinant,
    Minors,
    Ipd,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Determinant => "determinant",
            Route::Minors => "minors",
            Route::Ipd => "ipd",
        }
    }
}

/// MCC and MUC of a variable set along with the route that produced them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub mcc: f64,
    pub muc: f64,
    pub muc_squared: f64,
    pub route: Route,
    pub m: usize,
    pub n: usize,
}

impl CorrelationReport {
    /// Builds a report from a squared MUC already clamped to `[0, 1]`.
    pub fn from_muc_squared(muc_squared: f64, route: Route, m: usize, n: usize) -> Self {
        Self {
            mcc: (1.0 - muc_squared).sqrt(),
            muc: muc_squared.sqrt(),
            muc_squared,
            route,
            m,
            n,
        }
    }

    pub fn mcc_squared(&self) -> f64 {
        1.0 - self.muc_squared
    }
}

pub(crate) fn check_variable_count(vars: &[RawSeries]) -> Result<(usize, usize)> {
    let m = vars.len();
    if m < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 variables, got {m}"
        )));
    }
    let n = vars[0].len();
    if let Some(v) = vars.iter().find(|v| v.len() != n) {
        return Err(Error::LengthMismatch {
            expected: n,
            found: v.len(),
        });
    }
    if m > n {
        return Err(Error::Rank { m, n });
    }
    Ok((m, n))
}

/// MUC² as the determinant of the correlation matrix.
pub fn muc_det(vars: &[RawSeries]) -> Result<CorrelationReport> {
    let (m, n) = check_variable_count(vars)?;
    let r = correlation_matrix(vars)?;
    Ok(CorrelationReport::from_muc_squared(
        r.muc_squared()?,
        Route::Determinant,
        m,
        n,
    ))
}

/// Three-variable MCC from pairwise correlations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Mcc3 {
    /// MCC, the square root of the clamped squared value.
    pub mcc: f64,
    /// Unclamped `r_ab² + r_bc² + r_ac² - 2 r_ab r_bc r_ac`.
    pub raw: f64,
    /// False when no vector triple realizes the correlations (raw value above 1).
    pub feasible: bool,
}

pub fn mcc3(r_ab: f64, r_bc: f64, r_ac: f64) -> Result<Mcc3> {
    for r in [r_ab, r_bc, r_ac] {
        if !(-1.0..=1.0).contains(&r) {
            return Err(Error::Domain(r));
        }
    }
    // fixed evaluation order so that permuting the arguments is bit-exact
    let mut r = [r_ab, r_bc, r_ac];
    r.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
    let [x, y, z] = r;
    let raw = x * x + y * y + z * z - 2.0 * x * y * z;
    Ok(Mcc3 {
        mcc: raw.clamp(0.0, 1.0).sqrt(),
        raw,
        feasible: raw <= 1.0 + 1e-12,
    })
}
