//! The inner product–determinant expansion: the Gram determinant written as a
//! signed sum over set partitions of the variables.
//!
//! A singleton block contributes a squared norm, a pair block a squared inner
//! product, and a block of three or more elements a circular inner product
//! around one of its cyclic orderings. Cyclic orderings are identified up to
//! rotation and reflection, and every such class is weighted by 2, because a
//! cycle and its reverse give the same product.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{
    check_variable_count, clamp_unit_det, gram_matrix, standardize_all, CorrelationReport, Route,
};
use crate::stats::{dot, RawSeries};

pub const MIN_VARIABLES: usize = 2;
pub const MAX_VARIABLES: usize = 8;

/// One summand of the expansion. Indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionTerm {
    pub singletons: Vec<usize>,
    pub pairs: Vec<[usize; 2]>,
    /// Canonical cyclic orderings: smallest index first, second element
    /// smaller than the last.
    pub cycles: Vec<Vec<usize>>,
    pub block_count: usize,
    pub cycle_count: usize,
}

impl PartitionTerm {
    /// `2^|cycles| (-1)^(m - |blocks|)`.
    pub fn coefficient(&self, m: usize) -> f64 {
        let sign = if (m - self.block_count).is_multiple_of(2) {
            1.0
        } else {
            -1.0
        };
        sign * f64::from(1u32 << self.cycle_count)
    }

    /// Product of the block factors read off a Gram matrix.
    pub fn product(&self, gram: &DMatrix<f64>) -> f64 {
        let mut acc = 1.0;
        for &s in &self.singletons {
            acc *= gram[(s, s)];
        }
        for &[i, j] in &self.pairs {
            acc *= gram[(i, j)] * gram[(i, j)];
        }
        for c in &self.cycles {
            acc *= cycle_product(gram, c);
        }
        acc
    }

    /// Every index must appear in exactly one block.
    pub fn covers(&self, m: usize) -> bool {
        let mut seen = vec![0usize; m];
        let all = self
            .singletons
            .iter()
            .chain(self.pairs.iter().flatten())
            .chain(self.cycles.iter().flatten());
        for &i in all {
            if i >= m {
                return false;
            }
            seen[i] += 1;
        }
        seen.iter().all(|&c| c == 1)
    }
}

fn cycle_product(gram: &DMatrix<f64>, cycle: &[usize]) -> f64 {
    cycle
        .iter()
        .zip(cycle.iter().cycle().skip(1))
        .map(|(&a, &b)| gram[(a, b)])
        .product()
}

/// Restricted growth strings of length `m` in lexicographic order; each one
/// encodes a set partition (`rgs[i]` is the block of element `i`).
fn restricted_growth_strings(m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut rgs = vec![0usize; m];
    loop {
        out.push(rgs.clone());
        // rightmost position that can still grow
        let mut i = m;
        loop {
            if i <= 1 {
                return out;
            }
            i -= 1;
            let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
            if rgs[i] <= max_prefix {
                rgs[i] += 1;
                for v in &mut rgs[i + 1..] {
                    *v = 0;
                }
                break;
            }
        }
    }
}

/// Canonical cyclic orderings of a sorted block: `(p-1)!/2` of them for `p >= 3`.
fn canonical_cycles(block: &[usize]) -> Vec<Vec<usize>> {
    let (&first, rest) = block.split_first().expect("non-empty block");
    rest.iter()
        .copied()
        .permutations(rest.len())
        .filter(|perm| perm[0] < perm[perm.len() - 1])
        .map(|perm| std::iter::once(first).chain(perm).collect())
        .collect()
}

fn check_size(m: usize) -> Result<()> {
    if !(MIN_VARIABLES..=MAX_VARIABLES).contains(&m) {
        return Err(Error::Size {
            size: m,
            min: MIN_VARIABLES,
            max: MAX_VARIABLES,
        });
    }
    Ok(())
}

/// All terms of the expansion for `m` variables, deterministic order.
pub fn enumerate_partition_terms(m: usize) -> Result<Vec<PartitionTerm>> {
    check_size(m)?;
    let mut terms = Vec::new();
    for rgs in restricted_growth_strings(m) {
        let block_count = rgs.iter().max().map_or(0, |b| b + 1);
        let mut blocks = vec![Vec::new(); block_count];
        for (elem, &b) in rgs.iter().enumerate() {
            blocks[b].push(elem);
        }
        let mut singletons = Vec::new();
        let mut pairs = Vec::new();
        let mut large = Vec::new();
        for block in &blocks {
            match block.len() {
                1 => singletons.push(block[0]),
                2 => pairs.push([block[0], block[1]]),
                _ => large.push(canonical_cycles(block)),
            }
        }
        let cycle_count = large.len();
        let choices: Vec<Vec<Vec<usize>>> = if large.is_empty() {
            vec![Vec::new()]
        } else {
            large.into_iter().multi_cartesian_product().collect()
        };
        for cycles in choices {
            terms.push(PartitionTerm {
                singletons: singletons.clone(),
                pairs: pairs.clone(),
                cycles,
                block_count,
                cycle_count,
            });
        }
    }
    Ok(terms)
}

/// Circular inner product `(a_k1, a_k2)(a_k2, a_k3) ... (a_kp, a_k1)`.
pub fn circular_product<V: AsRef<[f64]>>(vecs: &[V], cycle: &[usize]) -> Result<f64> {
    if cycle.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "a cycle needs at least 3 elements, got {}",
            cycle.len()
        )));
    }
    if let Some(&bad) = cycle.iter().find(|&&i| i >= vecs.len()) {
        return Err(Error::Index {
            index: bad,
            len: vecs.len(),
        });
    }
    Ok(cycle
        .iter()
        .zip(cycle.iter().cycle().skip(1))
        .map(|(&a, &b)| dot(vecs[a].as_ref(), vecs[b].as_ref()))
        .product())
}

/// Precomputed expansion for a fixed number of variables, reusable across inputs.
#[derive(Debug, Clone)]
pub struct IpdExpansion {
    m: usize,
    terms: Vec<PartitionTerm>,
}

impl IpdExpansion {
    pub fn new(m: usize) -> Result<Self> {
        Ok(Self {
            m,
            terms: enumerate_partition_terms(m)?,
        })
    }

    pub fn terms(&self) -> &[PartitionTerm] {
        &self.terms
    }

    /// Evaluates the signed partition sum for `vecs`.
    pub fn evaluate<V: AsRef<[f64]>>(&self, vecs: &[V]) -> Result<f64> {
        if vecs.len() != self.m {
            return Err(Error::Size {
                size: vecs.len(),
                min: self.m,
                max: self.m,
            });
        }
        let gram = gram_matrix(vecs)?;
        let dim = vecs[0].as_ref().len();
        if self.m > dim {
            return Err(Error::Rank { m: self.m, n: dim });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| t.coefficient(self.m) * t.product(gram.matrix()))
            .sum())
    }
}

/// Left side of the inner product–determinant equation.
pub fn ipd_lhs<V: AsRef<[f64]>>(vecs: &[V]) -> Result<f64> {
    IpdExpansion::new(vecs.len())?.evaluate(vecs)
}

/// Hard-coded expansions for two and three vectors.
pub fn ipd_closed_form<V: AsRef<[f64]>>(vecs: &[V]) -> Result<f64> {
    let g = gram_matrix(vecs)?;
    let g = |i: usize, j: usize| g.get(i, j);
    match vecs.len() {
        2 => Ok(g(0, 0) * g(1, 1) - g(0, 1) * g(0, 1)),
        3 => {
            let (aa, bb, cc) = (g(0, 0), g(1, 1), g(2, 2));
            let (ab, bc, ac) = (g(0, 1), g(1, 2), g(0, 2));
            Ok(aa * bb * cc + 2.0 * ab * bc * ac - aa * bc * bc - bb * ac * ac - cc * ab * ab)
        }
        k => Err(Error::Arity(k)),
    }
}

/// Squared MUC via the expansion applied to the standardized variables.
pub fn muc_ipd(vars: &[RawSeries]) -> Result<CorrelationReport> {
    let (m, n) = check_variable_count(vars)?;
    let z = standardize_all(vars)?;
    let value = clamp_unit_det(ipd_lhs(&z)?)?;
    Ok(CorrelationReport::from_muc_squared(value, Route::Ipd, m, n))
}
