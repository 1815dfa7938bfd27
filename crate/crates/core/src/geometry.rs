//! Angle-parameterized correlation structures.
//!
//! Three unit vectors `a`, `b`, `c` are described by the angles
//! `α = ∠(a, b)`, `β = ∠(b, c)` and `γ = ∠(a, c)`, so the pairwise
//! correlations are `cos α`, `cos β` and `cos γ`. This module samples the
//! three-variable MCC over `(β, γ)` for fixed `α`, cuts profiles through the
//! resulting surface, extracts level sets, and realizes feasible angle sets as
//! concrete vectors.

use std::collections::HashMap;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::measures::{gram_matrix, mcc3, min_eigenvalue, CorrelationMatrix};
use crate::stats::{dot, RawSeries};

/// Eigenvalue tolerance for calling a cosine matrix positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Eigenvalues at or below this are dropped when embedding.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Cosine of an angle in degrees, exact at 0°, 60°, 90°, 120° and 180°
/// and odd-symmetric about 90°.
pub fn cos_deg(deg: f64) -> f64 {
    if deg > 90.0 {
        return -cos_deg(180.0 - deg);
    }
    if deg == 90.0 {
        0.0
    } else if deg == 60.0 {
        0.5
    } else if deg == 0.0 {
        1.0
    } else {
        deg.to_radians().cos()
    }
}

fn check_angle(deg: f64) -> Result<()> {
    if !(0.0..=180.0).contains(&deg) {
        return Err(Error::Range(deg));
    }
    Ok(())
}

/// Pairwise angles for `m` variables in the order (1,2), (1,3), ..., (1,m), (2,3), ...
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSpec {
    m: usize,
    angles: Vec<f64>,
}

impl AngleSpec {
    pub fn new(m: usize, angles: Vec<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidInput(format!(
                "need at least 2 variables, got {m}"
            )));
        }
        let expected = m * (m - 1) / 2;
        if angles.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: angles.len(),
            });
        }
        for &a in &angles {
            check_angle(a)?;
        }
        Ok(Self { m, angles })
    }

    /// Angles `(α, β, γ)` between (a,b), (b,c) and (a,c).
    pub fn triple(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        // pair order is (a,b), (a,c), (b,c)
        Self::new(3, vec![alpha, gamma, beta])
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }
}

/// Cosine matrix of an angle spec, and whether any vectors realize it.
pub fn angles_to_corr(spec: &AngleSpec) -> Result<(CorrelationMatrix, bool)> {
    let m = spec.m;
    let mut r = DMatrix::identity(m, m);
    let mut k = 0;
    for i in 0..m {
        for j in i + 1..m {
            let c = cos_deg(spec.angles[k]);
            r[(i, j)] = c;
            r[(j, i)] = c;
            k += 1;
        }
    }
    let feasible = min_eigenvalue(&r) >= -PSD_TOL;
    Ok((CorrelationMatrix::from_matrix(r)?, feasible))
}

/// Vectors of dimension `rank(corr)` whose Gram matrix is `corr`.
pub fn embed_unit_vectors(corr: &CorrelationMatrix) -> Result<Vec<Vec<f64>>> {
    let eig = SymmetricEigen::new(corr.matrix().clone());
    let min = eig
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL {
        return Err(Error::NotPsd(min));
    }
    let kept: Vec<usize> = (0..eig.eigenvalues.len())
        .filter(|&k| eig.eigenvalues[k] > RANK_CUTOFF)
        .collect();
    Ok((0..corr.order())
        .map(|i| {
            kept.iter()
                .map(|&k| eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt())
                .collect()
        })
        .collect())
}

/// Orthonormal basis of the vectors in `R^n` whose entries sum to zero.
fn helmert_basis(n: usize) -> Vec<Vec<f64>> {
    (1..n)
        .map(|k| {
            let scale = ((k * (k + 1)) as f64).sqrt();
            (0..n)
                .map(|t| match t.cmp(&k) {
                    std::cmp::Ordering::Less => 1.0 / scale,
                    std::cmp::Ordering::Equal => -(k as f64) / scale,
                    std::cmp::Ordering::Greater => 0.0,
                })
                .collect()
        })
        .collect()
}

/// Realizes `corr` as data series of length `n` whose Pearson correlations
/// reproduce it: the embedded vectors are mapped into the zero-sum subspace,
/// so they are already centered and unit-norm.
pub fn realize_series(corr: &CorrelationMatrix, n: usize) -> Result<Vec<RawSeries>> {
    let vecs = embed_unit_vectors(corr)?;
    let dim = vecs.first().map_or(0, Vec::len);
    if n < dim + 1 || n < corr.order() {
        return Err(Error::Rank {
            m: corr.order().max(dim + 1),
            n,
        });
    }
    let basis = helmert_basis(n);
    vecs.iter()
        .map(|v| {
            let series = (0..n)
                .map(|t| v.iter().zip(&basis).map(|(c, b)| c * b[t]).sum())
                .collect();
            RawSeries::new(series)
        })
        .collect()
}

fn grid_points(step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || step > 180.0 {
        return Err(Error::InvalidInput(format!(
            "step {step} must be in (0, 180]"
        )));
    }
    let count = (180.0 / step).round();
    if (count * step - 180.0).abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "step {step} does not divide 180"
        )));
    }
    let count = count as usize;
    Ok((0..=count)
        .map(|i| if i == count { 180.0 } else { i as f64 * step })
        .collect())
}

/// `(γ, |cos γ|)` over `[0°, 180°]`.
pub fn pearson_curve(step: f64) -> Result<Vec<(f64, f64)>> {
    Ok(grid_points(step)?
        .into_iter()
        .map(|g| (g, cos_deg(g).abs()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurfaceCell {
    pub mcc: f64,
    pub feasible: bool,
}

/// MCC over `(β, γ) ∈ [0°, 180°]²` for a fixed `α`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGrid {
    pub alpha: f64,
    pub step: f64,
    /// Node coordinates shared by both axes.
    pub angles: Vec<f64>,
    /// `cells[i][j]` is the node at `β = angles[i]`, `γ = angles[j]`.
    pub cells: Vec<Vec<SurfaceCell>>,
}

impl SurfaceGrid {
    pub fn size(&self) -> usize {
        self.angles.len()
    }

    pub fn cell(&self, i: usize, j: usize) -> SurfaceCell {
        self.cells[i][j]
    }

    /// Iterates `(β, γ, cell)` with β outer.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64, SurfaceCell)> + '_ {
        self.angles.iter().enumerate().flat_map(move |(i, &b)| {
            self.angles
                .iter()
                .enumerate()
                .map(move |(j, &g)| (b, g, self.cells[i][j]))
        })
    }

    /// Bilinear interpolation of MCC at `(β, γ)`. Feasible only if every
    /// node with nonzero weight is.
    pub fn interpolate(&self, beta: f64, gamma: f64) -> Option<SurfaceCell> {
        if !(0.0..=180.0).contains(&beta) || !(0.0..=180.0).contains(&gamma) {
            return None;
        }
        let last = self.size() - 1;
        let locate = |x: f64| {
            let u = x / self.step;
            let i = (u.floor() as usize).min(last.saturating_sub(1));
            (i, (u - i as f64).clamp(0.0, 1.0))
        };
        let (i, fu) = locate(beta);
        let (j, fv) = locate(gamma);
        let mut mcc = 0.0;
        let mut feasible = true;
        for (di, wu) in [(0, 1.0 - fu), (1, fu)] {
            for (dj, wv) in [(0, 1.0 - fv), (1, fv)] {
                let w = wu * wv;
                if w == 0.0 {
                    continue;
                }
                let c = self.cells[(i + di).min(last)][(j + dj).min(last)];
                mcc += w * c.mcc;
                feasible &= c.feasible;
            }
        }
        Some(SurfaceCell { mcc, feasible })
    }
}

pub fn mcc_surface(alpha: f64, step: f64) -> Result<SurfaceGrid> {
    check_angle(alpha)?;
    let angles = grid_points(step)?;
    let r_ab = cos_deg(alpha);
    let cells = angles
        .iter()
        .map(|&beta| {
            angles
                .iter()
                .map(|&gamma| {
                    let v = mcc3(r_ab, cos_deg(beta), cos_deg(gamma))?;
                    Ok(SurfaceCell {
                        mcc: if v.feasible { v.mcc } else { 1.0 },
                        feasible: v.feasible,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SurfaceGrid {
        alpha,
        step,
        angles,
        cells,
    })
}

/// Straight cut through the `(β, γ)` square.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cut {
    pub start: (f64, f64),
    pub end: (f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProfilePoint {
    /// Distance from the start of the clipped cut, in degrees.
    pub t: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mcc: f64,
    pub feasible: bool,
}

/// Clips a segment to `[0, 180]²` (Liang–Barsky).
fn clip_to_square(cut: Cut) -> Option<Cut> {
    let (x0, y0) = cut.start;
    let (dx, dy) = (cut.end.0 - x0, cut.end.1 - y0);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for (p, q) in [(-dx, x0), (dx, 180.0 - x0), (-dy, y0), (dy, 180.0 - y0)] {
        if p == 0.0 {
            if q < 0.0 {
                return None;
            }
        } else {
            let r = q / p;
            if p < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
        }
    }
    if lo > hi {
        return None;
    }
    let at = |s: f64| {
        (
            (x0 + s * dx).clamp(0.0, 180.0),
            (y0 + s * dy).clamp(0.0, 180.0),
        )
    };
    Some(Cut {
        start: at(lo),
        end: at(hi),
    })
}

/// Samples the surface along `cut` at `samples` evenly spaced points.
pub fn profile_line(grid: &SurfaceGrid, cut: Cut, samples: usize) -> Result<Vec<ProfilePoint>> {
    let clipped = clip_to_square(cut).ok_or(Error::EmptyIntersection)?;
    let (x0, y0) = clipped.start;
    let (dx, dy) = (clipped.end.0 - x0, clipped.end.1 - y0);
    let length = dx.hypot(dy);
    let samples = samples.max(1);
    (0..samples)
        .map(|k| {
            let s = if samples == 1 {
                0.0
            } else {
                k as f64 / (samples - 1) as f64
            };
            let (beta, gamma) = if k + 1 == samples && samples > 1 {
                clipped.end
            } else {
                (x0 + s * dx, y0 + s * dy)
            };
            let c = grid
                .interpolate(beta, gamma)
                .ok_or(Error::EmptyIntersection)?;
            Ok(ProfilePoint {
                t: s * length,
                beta,
                gamma,
                mcc: c.mcc,
                feasible: c.feasible,
            })
        })
        .collect()
}

/// Sample count giving one point per grid step along the cut's longer axis,
/// so axis-aligned and diagonal cuts land on grid nodes.
pub fn default_samples(grid: &SurfaceGrid, cut: Cut) -> usize {
    clip_to_square(cut).map_or(1, |c| {
        let span = (c.end.0 - c.start.0).abs().max((c.end.1 - c.start.1).abs());
        (span / grid.step).round() as usize + 1
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContourSet {
    pub level: f64,
    /// Polylines of `(β, γ)` points.
    pub polylines: Vec<Vec<(f64, f64)>>,
}

/// Identifies a grid edge: horizontal edges join `(i, j)`–`(i+1, j)`,
/// vertical edges join `(i, j)`–`(i, j+1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Marching squares over cells whose four corners are all feasible.
pub fn contour_lines(grid: &SurfaceGrid, levels: &[f64]) -> Vec<ContourSet> {
    levels
        .iter()
        .map(|&level| ContourSet {
            level,
            polylines: extract_level(grid, level),
        })
        .collect()
}

fn extract_level(grid: &SurfaceGrid, level: f64) -> Vec<Vec<(f64, f64)>> {
    let n = grid.size();
    let value = |i: usize, j: usize| grid.cells[i][j].mcc;
    let point = |e: Edge| -> (f64, f64) {
        let ((i0, j0), (i1, j1)) = match e {
            Edge::H(i, j) => ((i, j), (i + 1, j)),
            Edge::V(i, j) => ((i, j), (i, j + 1)),
        };
        let (v0, v1) = (value(i0, j0), value(i1, j1));
        let s = if v1 == v0 {
            0.5
        } else {
            (level - v0) / (v1 - v0)
        };
        let s = s.clamp(0.0, 1.0);
        let (b0, g0) = (grid.angles[i0], grid.angles[j0]);
        let (b1, g1) = (grid.angles[i1], grid.angles[j1]);
        (b0 + s * (b1 - b0), g0 + s * (g1 - g0))
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        for j in 0..n - 1 {
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            if corners.iter().any(|&(a, b)| !grid.cells[a][b].feasible) {
                continue;
            }
            let above: Vec<bool> = corners.iter().map(|&(a, b)| value(a, b) >= level).collect();
            // edges in corner order: bottom, right, top, left
            let edges = [
                Edge::H(i, j),
                Edge::V(i + 1, j),
                Edge::H(i, j + 1),
                Edge::V(i, j),
            ];
            let crossing: Vec<usize> = (0..4).filter(|&k| above[k] != above[(k + 1) % 4]).collect();
            match crossing.len() {
                2 => segments.push((edges[crossing[0]], edges[crossing[1]])),
                4 => {
                    // saddle: pair edges around the corners on the same side as the center
                    let center = corners.iter().map(|&(a, b)| value(a, b)).sum::<f64>() / 4.0;
                    if (center >= level) == above[0] {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    join_segments(&segments)
        .into_iter()
        .map(|chain| {
            let mut pts: Vec<(f64, f64)> = Vec::with_capacity(chain.len());
            for e in chain {
                let p = point(e);
                if pts.last() != Some(&p) {
                    pts.push(p);
                }
            }
            pts
        })
        .collect()
}

/// Chains segments sharing an edge into polylines, in a deterministic order.
fn join_segments(segments: &[(Edge, Edge)]) -> Vec<Vec<Edge>> {
    let mut by_edge: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, &(a, b)) in segments.iter().enumerate() {
        by_edge.entry(a).or_default().push(k);
        by_edge.entry(b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let next_from = |edge: Edge, used: &[bool]| -> Option<usize> {
        by_edge[&edge].iter().copied().find(|&k| !used[k])
    };
    let mut chains = Vec::new();
    // open chains start at an edge touched by a single segment
    let mut starts: Vec<usize> = (0..segments.len()).collect();
    starts.sort_by_key(|&k| {
        let (a, b) = segments[k];
        let open = by_edge[&a].len() == 1 || by_edge[&b].len() == 1;
        !open
    });
    for start in starts {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let (first, mut tail) = if by_edge[&b].len() == 1 && by_edge[&a].len() != 1 {
            (b, a)
        } else {
            (a, b)
        };
        let mut chain = vec![first, tail];
        while let Some(k) = next_from(tail, &used) {
            used[k] = true;
            let (p, q) = segments[k];
            tail = if p == tail { q } else { p };
            chain.push(tail);
        }
        chains.push(chain);
    }
    chains
}

/// Volume of the parallelotope spanned by `vecs`, as `sqrt(det(Gram))`.
pub fn parallelotope_volume<V: AsRef<[f64]>>(vecs: &[V]) -> Result<f64> {
    check_volume_dims(vecs)?;
    let det = gram_matrix(vecs)?.determinant();
    Ok(det.max(0.0).sqrt())
}

/// The same volume as the product of `|R_ii|` from a QR factorization of the
/// matrix whose columns are `vecs`.
pub fn parallelotope_volume_qr<V: AsRef<[f64]>>(vecs: &[V]) -> Result<f64> {
    let dim = check_volume_dims(vecs)?;
    let a = DMatrix::from_fn(dim, vecs.len(), |i, j| vecs[j].as_ref()[i]);
    let r = a.qr().r();
    Ok((0..vecs.len()).map(|i| r[(i, i)].abs()).product())
}

fn check_volume_dims<V: AsRef<[f64]>>(vecs: &[V]) -> Result<usize> {
    let dim = vecs.first().map_or(0, |v| v.as_ref().len());
    if let Some(v) = vecs.iter().find(|v| v.as_ref().len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: v.as_ref().len(),
        });
    }
    if vecs.len() > dim {
        return Err(Error::Rank {
            m: vecs.len(),
            n: dim,
        });
    }
    Ok(dim)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotationPoint {
    /// Dihedral angle between the (a,b) and (b,c) planes, degrees.
    pub theta: f64,
    pub r_ac: f64,
    pub mcc_squared: f64,
}

/// Three-variable MCC² while `c` rotates about `b`, keeping `∠(a,b) = α` and
/// `∠(b,c) = β` fixed and sweeping the dihedral angle `θ` over `[0°, 90°]`.
pub fn rotation_curve(alpha: f64, beta: f64, step: f64) -> Result<Vec<RotationPoint>> {
    for angle in [alpha, beta] {
        if !(angle > 0.0 && angle < 90.0) {
            return Err(Error::Range(angle));
        }
    }
    if step.is_nan() || step <= 0.0 || step > 90.0 {
        return Err(Error::InvalidInput(format!(
            "step {step} must be in (0, 90]"
        )));
    }
    let (sa, ca) = alpha.to_radians().sin_cos();
    let (sb, cb) = beta.to_radians().sin_cos();
    let b = [1.0, 0.0, 0.0];
    let a = [ca, sa, 0.0];
    let count = (90.0 / step).floor() as usize;
    let mut thetas: Vec<f64> = (0..=count).map(|k| k as f64 * step).collect();
    if thetas.last().is_some_and(|&t| t < 90.0 - 1e-9) {
        thetas.push(90.0);
    }
    thetas
        .into_iter()
        .map(|theta| {
            let (st, ct) = if theta == 90.0 {
                (1.0, 0.0)
            } else {
                theta.to_radians().sin_cos()
            };
            let c = [cb, sb * ct, sb * st];
            let r_ab = dot(&a, &b);
            let r_bc = dot(&b, &c);
            let r_ac = dot(&a, &c);
            let v = mcc3(r_ab, r_bc, r_ac.clamp(-1.0, 1.0))?;
            Ok(RotationPoint {
                theta,
                r_ac,
                mcc_squared: v.raw,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::muc_det;
    use approx::assert_abs_diff_eq;

    #[test]
    fn cos_deg_exact_points() {
        assert_eq!(cos_deg(0.0), 1.0);
        assert_eq!(cos_deg(60.0), 0.5);
        assert_eq!(cos_deg(90.0), 0.0);
        assert_eq!(cos_deg(120.0), -0.5);
        assert_eq!(cos_deg(180.0), -1.0);
        for d in [13.0, 37.5, 89.0] {
            assert_eq!(cos_deg(180.0 - d), -cos_deg(d));
        }
    }

    #[test]
    fn angle_spec_validation() {
        assert!(matches!(
            AngleSpec::new(3, vec![10.0, 200.0, 30.0]),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            AngleSpec::new(3, vec![10.0, 20.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn angles_to_corr_examples() {
        let (r, ok) = angles_to_corr(&AngleSpec::triple(45.0, 45.0, 60.0).unwrap()).unwrap();
        assert!(ok);
        assert_abs_diff_eq!(r.determinant(), 0.25, epsilon = 1e-12);

        let (r, ok) = angles_to_corr(&AngleSpec::triple(90.0, 90.0, 90.0).unwrap()).unwrap();
        assert!(ok);
        assert_eq!(r.matrix(), &DMatrix::<f64>::identity(3, 3));
        assert_eq!(r.determinant(), 1.0);

        let (r, ok) = angles_to_corr(&AngleSpec::new(3, vec![0.0, 0.0, 180.0]).unwrap()).unwrap();
        assert!(!ok);
        assert_abs_diff_eq!(r.determinant(), -4.0, epsilon = 1e-12);
    }

    #[test]
    fn embedding_examples() {
        let id = CorrelationMatrix::from_matrix(DMatrix::identity(3, 3)).unwrap();
        let v = embed_unit_vectors(&id).unwrap();
        let g = gram_matrix(&v).unwrap();
        assert!((g.matrix() - DMatrix::<f64>::identity(3, 3)).amax() < 1e-12);

        let half =
            CorrelationMatrix::from_matrix(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]))
                .unwrap();
        let v = embed_unit_vectors(&half).unwrap();
        assert_eq!(v[0].len(), 2);
        let cos = dot(&v[0], &v[1]) / (dot(&v[0], &v[0]) * dot(&v[1], &v[1])).sqrt();
        assert_abs_diff_eq!(cos.acos().to_degrees(), 60.0, epsilon = 1e-9);

        // rank-deficient: a duplicated vector embeds in one dimension
        let ones = CorrelationMatrix::from_matrix(DMatrix::from_element(2, 2, 1.0)).unwrap();
        assert_eq!(embed_unit_vectors(&ones).unwrap()[0].len(), 1);

        let (bad, _) = angles_to_corr(&AngleSpec::new(3, vec![0.0, 0.0, 180.0]).unwrap()).unwrap();
        assert!(matches!(embed_unit_vectors(&bad), Err(Error::NotPsd(_))));
    }

    #[test]
    fn equal_mcc_pair_from_realized_series() {
        let mut reports = Vec::new();
        for (a, b, c) in [(45.0, 45.0, 60.0), (30.0, 90.0, 90.0)] {
            let (r, _) = angles_to_corr(&AngleSpec::triple(a, b, c).unwrap()).unwrap();
            let series = realize_series(&r, 4).unwrap();
            reports.push(muc_det(&series).unwrap());
        }
        assert_abs_diff_eq!(reports[0].muc_squared, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(reports[1].muc_squared, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(reports[0].mcc, reports[1].mcc, epsilon = 1e-12);
    }

    #[test]
    fn pearson_curve_examples() {
        let c = pearson_curve(1.0).unwrap();
        assert_eq!(c.len(), 181);
        assert_eq!(c[0], (0.0, 1.0));
        assert_eq!(c[90], (90.0, 0.0));
        assert_eq!(c[180], (180.0, 1.0));
        assert_abs_diff_eq!(c[60].1, 0.5, epsilon = 1e-15);
        for w in c[..=90].windows(2) {
            assert!(w[1].1 < w[0].1);
        }
        for w in c[90..].windows(2) {
            assert!(w[1].1 > w[0].1);
        }
        assert!(pearson_curve(7.0).is_err());
    }

    #[test]
    fn surface_examples() {
        let g = mcc_surface(90.0, 1.0).unwrap();
        assert_eq!(g.size(), 181);
        let c = g.cell(90, 90);
        assert_eq!(c.mcc, 0.0);
        assert!(c.feasible);
        let c = g.cell(60, 60);
        assert!(c.feasible);
        assert_abs_diff_eq!(c.mcc * c.mcc, 0.5, epsilon = 1e-15);
        assert!(matches!(mcc_surface(190.0, 1.0), Err(Error::Range(_))));
    }

    #[test]
    fn surface_feasibility_matches_psd() {
        for alpha in [0.0, 30.0, 90.0, 145.0, 160.0] {
            let g = mcc_surface(alpha, 5.0).unwrap();
            for (b, c, cell) in g.iter() {
                let (_, psd) = angles_to_corr(&AngleSpec::triple(alpha, b, c).unwrap()).unwrap();
                assert_eq!(cell.feasible, psd, "alpha {alpha} beta {b} gamma {c}");
                if !cell.feasible {
                    assert_eq!(cell.mcc, 1.0);
                }
            }
        }
    }

    #[test]
    fn alpha_zero_surface_follows_determinant_sign() {
        // with a = b, feasibility requires β = γ
        let g = mcc_surface(0.0, 10.0).unwrap();
        for (i, row) in g.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                assert_eq!(cell.feasible, i == j, "({i}, {j})");
            }
        }
    }

    #[test]
    fn surface_symmetries() {
        for alpha in [30.0, 90.0, 145.0, 160.0] {
            let g = mcc_surface(alpha, 2.0).unwrap();
            let last = g.size() - 1;
            for i in 0..g.size() {
                for j in 0..g.size() {
                    assert_eq!(g.cell(i, j), g.cell(j, i));
                    assert_eq!(g.cell(i, j), g.cell(last - i, last - j));
                }
            }
        }
    }

    #[test]
    fn profile_examples() {
        let g = mcc_surface(90.0, 1.0).unwrap();
        let cut = Cut {
            start: (0.0, 0.0),
            end: (180.0, 180.0),
        };
        let prof = profile_line(&g, cut, default_samples(&g, cut)).unwrap();
        assert_eq!(prof.len(), 181);
        for p in &prof {
            let closed = 2.0 * cos_deg(p.beta).powi(2);
            if closed <= 1.0 + 1e-12 {
                assert!(p.feasible);
                assert_abs_diff_eq!(p.mcc, closed.min(1.0).sqrt(), epsilon = 1e-12);
            } else {
                assert!(!p.feasible);
                assert_eq!(p.mcc, 1.0);
            }
        }

        let cut = Cut {
            start: (90.0, 0.0),
            end: (90.0, 180.0),
        };
        let prof = profile_line(&g, cut, 181).unwrap();
        let curve = pearson_curve(1.0).unwrap();
        for (p, (gamma, r)) in prof.iter().zip(curve) {
            assert_abs_diff_eq!(p.gamma, gamma, epsilon = 1e-12);
            assert_abs_diff_eq!(p.mcc, r, epsilon = 1e-12);
        }

        // mirrored cuts through the center give identical profiles
        let g = mcc_surface(30.0, 1.0).unwrap();
        let a = profile_line(
            &g,
            Cut {
                start: (20.0, 0.0),
                end: (70.0, 180.0),
            },
            97,
        )
        .unwrap();
        let b = profile_line(
            &g,
            Cut {
                start: (160.0, 180.0),
                end: (110.0, 0.0),
            },
            97,
        )
        .unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_abs_diff_eq!(p.mcc, q.mcc, epsilon = 1e-12);
            assert_eq!(p.feasible, q.feasible);
        }
    }

    #[test]
    fn profile_clips_and_rejects() {
        let g = mcc_surface(90.0, 5.0).unwrap();
        let prof = profile_line(
            &g,
            Cut {
                start: (-90.0, 90.0),
                end: (270.0, 90.0),
            },
            37,
        )
        .unwrap();
        assert_eq!(prof.first().unwrap().beta, 0.0);
        assert_eq!(prof.last().unwrap().beta, 180.0);
        assert!(matches!(
            profile_line(
                &g,
                Cut {
                    start: (200.0, 0.0),
                    end: (300.0, 50.0)
                },
                10
            ),
            Err(Error::EmptyIntersection)
        ));
    }

    #[test]
    fn contour_examples() {
        let g = mcc_surface(90.0, 1.0).unwrap();
        let level = 0.5f64.sqrt();
        let sets = contour_lines(&g, &[level, 1.5]);
        assert_eq!(sets.len(), 2);
        assert!(sets[1].polylines.is_empty());
        let lines = &sets[0].polylines;
        assert!(!lines.is_empty());
        let near = |target: (f64, f64)| {
            lines
                .iter()
                .flatten()
                .map(|p| (p.0 - target.0).hypot(p.1 - target.1))
                .fold(f64::INFINITY, f64::min)
        };
        assert!(near((60.0, 60.0)) <= 1.0);
        assert!(near((45.0, 90.0)) <= 1.0);
        for &(b, c) in lines.iter().flatten() {
            let v = g.interpolate(b, c).unwrap();
            assert!(v.feasible);
            assert!((v.mcc - level).abs() < 1e-3, "({b}, {c}) -> {}", v.mcc);
        }
    }

    #[test]
    fn equal_mcc_triples_share_a_level() {
        let h = 2f64.sqrt() / 2.0;
        let first = mcc3(h, h, 0.5).unwrap();
        let second = mcc3(cos_deg(30.0), 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(first.mcc, 0.75f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(second.mcc, 0.75f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn volume_examples() {
        let e = [
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        assert_abs_diff_eq!(parallelotope_volume(&e).unwrap(), 1.0);
        let v = [vec![1.0, 0.0], vec![0.5, 0.75f64.sqrt()]];
        assert_abs_diff_eq!(
            parallelotope_volume(&v).unwrap(),
            0.75f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            parallelotope_volume_qr(&v).unwrap(),
            0.75f64.sqrt(),
            epsilon = 1e-15
        );

        let (r, _) = angles_to_corr(&AngleSpec::triple(30.0, 90.0, 90.0).unwrap()).unwrap();
        let vecs = embed_unit_vectors(&r).unwrap();
        assert_abs_diff_eq!(parallelotope_volume(&vecs).unwrap(), 0.5, epsilon = 1e-12);
        assert!(matches!(
            parallelotope_volume(&[vec![1.0], vec![2.0]]),
            Err(Error::Rank { .. })
        ));
    }

    #[test]
    fn rotation_construction() {
        let curve = rotation_curve(50.0, 70.0, 1.0).unwrap();
        assert_eq!(curve.len(), 91);
        let (a, b) = (50f64.to_radians(), 70f64.to_radians());
        assert_abs_diff_eq!(curve[90].r_ac, a.cos() * b.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(curve[0].r_ac, (a - b).cos(), epsilon = 1e-15);
        for w in curve.windows(2) {
            assert!(w[1].mcc_squared - w[0].mcc_squared < -1e-12);
        }
        assert!(matches!(
            rotation_curve(90.0, 30.0, 1.0),
            Err(Error::Range(_))
        ));
    }
}
