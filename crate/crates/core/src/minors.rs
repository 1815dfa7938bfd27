//! MUC as a sum of squared maximal minors of the standardized data matrix,
//! and the increment formula for appending one variable.
//!
//! This route enumerates every column subset, so its cost grows as
//! `C(n, m)`. It is kept as an independent check on the determinant route;
//! a [`MinorBudget`] caps the enumeration.

use itertools::Itertools;
use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::measures::{
    check_variable_count, determinant, standardize_all, CorrelationReport, Route,
};
use crate::stats::{RawSeries, StandardizedVector};

pub const DEFAULT_MINOR_BUDGET: u64 = 1_000_000;

/// Environment variable overriding [`DEFAULT_MINOR_BUDGET`].
pub const BUDGET_ENV: &str = "MUCORR_MINOR_BUDGET";

/// Upper bound on the number of minors (or index sets) one call may enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MinorBudget(pub u64);

impl Default for MinorBudget {
    fn default() -> Self {
        MinorBudget(DEFAULT_MINOR_BUDGET)
    }
}

impl MinorBudget {
    /// Reads [`BUDGET_ENV`], falling back to the default when unset.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BUDGET_ENV) {
            Ok(v) => v
                .trim()
                .parse::<u64>()
                .map(MinorBudget)
                .map_err(|_| Error::InvalidInput(format!("{BUDGET_ENV}={v:?} is not a count"))),
            Err(_) => Ok(Self::default()),
        }
    }

    fn check(self, count: u128) -> Result<()> {
        if count > u128::from(self.0) {
            return Err(Error::BudgetExceeded {
                count,
                budget: self.0,
            });
        }
        Ok(())
    }
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Strictly increasing column indices selecting a minor.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MinorIndexSet(Vec<usize>);

impl MinorIndexSet {
    pub fn new(columns: Vec<usize>, n: usize) -> Result<Self> {
        if columns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(format!(
                "column indices {columns:?} are not strictly increasing"
            )));
        }
        if let Some(&last) = columns.last() {
            if last >= n {
                return Err(Error::Index {
                    index: last,
                    len: n,
                });
            }
        }
        Ok(Self(columns))
    }

    pub fn columns(&self) -> &[usize] {
        &self.0
    }

    /// Number of elements strictly greater than `p`.
    pub fn count_greater(&self, p: usize) -> usize {
        self.0.len() - self.0.partition_point(|&j| j <= p)
    }

    pub fn contains(&self, p: usize) -> bool {
        self.0.binary_search(&p).is_ok()
    }

    /// The set with `p` inserted in order.
    pub fn with(&self, p: usize) -> MinorIndexSet {
        let mut cols = self.0.clone();
        let pos = cols.partition_point(|&j| j < p);
        cols.insert(pos, p);
        MinorIndexSet(cols)
    }

    /// All `k`-subsets of `0..n`, lexicographic.
    pub fn all(n: usize, k: usize) -> impl Iterator<Item = MinorIndexSet> {
        (0..n).combinations(k).map(MinorIndexSet)
    }
}

/// Determinant of the square submatrix of `rows` on `cols`.
pub fn minor<V: AsRef<[f64]>>(rows: &[V], cols: &[usize]) -> f64 {
    let k = rows.len();
    debug_assert_eq!(k, cols.len());
    let sub = DMatrix::from_fn(k, k, |i, j| rows[i].as_ref()[cols[j]]);
    determinant(&sub)
}

fn row_dimension<V: AsRef<[f64]>>(rows: &[V]) -> Result<usize> {
    let n = rows.first().map_or(0, |r| r.as_ref().len());
    if let Some(r) = rows.iter().find(|r| r.as_ref().len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: r.as_ref().len(),
        });
    }
    Ok(n)
}

/// Sum of squared `m x m` minors over all column subsets, for arbitrary rows.
///
/// Equals `det(rows · rowsᵀ)` by Cauchy–Binet.
pub fn minor_sum_rows<V: AsRef<[f64]>>(rows: &[V], budget: MinorBudget) -> Result<f64> {
    let m = rows.len();
    let n = row_dimension(rows)?;
    if m == 0 {
        return Err(Error::InvalidInput("no rows".into()));
    }
    if m > n {
        return Err(Error::Rank { m, n });
    }
    budget.check(binomial(n, m))?;
    Ok(MinorIndexSet::all(n, m)
        .map(|set| {
            let d = minor(rows, set.columns());
            d * d
        })
        .sum())
}

/// Rows of standardized variables, `m <= n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StandardizedMatrix {
    rows: Vec<StandardizedVector>,
    n: usize,
}

impl StandardizedMatrix {
    pub fn from_rows(rows: Vec<StandardizedVector>) -> Result<Self> {
        let n = row_dimension(&rows)?;
        if rows.is_empty() {
            return Err(Error::InvalidInput("no rows".into()));
        }
        if rows.len() > n {
            return Err(Error::Rank { m: rows.len(), n });
        }
        Ok(Self { rows, n })
    }

    pub fn from_series(vars: &[RawSeries]) -> Result<Self> {
        Self::from_rows(standardize_all(vars)?)
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[StandardizedVector] {
        &self.rows
    }

    /// The matrix with `row` appended.
    pub fn with_row(&self, row: StandardizedVector) -> Result<Self> {
        let mut rows = self.rows.clone();
        rows.push(row);
        Self::from_rows(rows)
    }

    pub fn minor_sum(&self, budget: MinorBudget) -> Result<f64> {
        minor_sum_rows(&self.rows, budget)
    }

    /// Determinant of the stacked rows when `m == n`.
    pub fn square_determinant(&self) -> Result<f64> {
        if self.m() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: self.m(),
            });
        }
        Ok(minor(&self.rows, &(0..self.n).collect::<Vec<_>>()))
    }
}

/// Squared MUC as the sum of squared minors of the standardized rows.
pub fn minor_sum(mat: &StandardizedMatrix, budget: MinorBudget) -> Result<f64> {
    mat.minor_sum(budget)
}

pub fn muc_minors(vars: &[RawSeries], budget: MinorBudget) -> Result<CorrelationReport> {
    let (m, n) = check_variable_count(vars)?;
    let mat = StandardizedMatrix::from_series(vars)?;
    let sum = mat.minor_sum(budget)?;
    if !(-1e-10..=1.0 + 1e-10).contains(&sum) {
        return Err(Error::Numerical(format!("minor sum {sum} outside [0, 1]")));
    }
    Ok(CorrelationReport::from_muc_squared(
        sum.clamp(0.0, 1.0),
        Route::Minors,
        m,
        n,
    ))
}

/// Decrease of the squared MUC when `new_row` is appended to `mat`.
///
/// For every `(m-1)`-column set `J`, sums `(-1)^g(p:J) x_p det[mat | J ∪ {p}]`
/// over the columns `p` outside `J`, where `g(p:J)` counts the elements of `J`
/// greater than `p` and the minor takes its columns in increasing order; the
/// result is the sum of the squares of those inner sums.
pub fn phi_increment(
    mat: &StandardizedMatrix,
    new_row: &StandardizedVector,
    budget: MinorBudget,
) -> Result<f64> {
    let n = mat.n();
    let m = mat.m();
    if new_row.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: new_row.len(),
        });
    }
    if m + 1 > n {
        return Err(Error::Rank { m: m + 1, n });
    }
    budget.check(binomial(n, m - 1))?;
    let x = new_row.values();
    let rows = mat.rows();
    let mut phi = 0.0;
    for set in MinorIndexSet::all(n, m - 1) {
        let mut inner = 0.0;
        for p in (0..n).filter(|&p| !set.contains(p)) {
            let sign = if set.count_greater(p).is_multiple_of(2) {
                1.0
            } else {
                -1.0
            };
            inner += sign * x[p] * minor(rows, set.with(p).columns());
        }
        phi += inner * inner;
    }
    Ok(phi)
}
