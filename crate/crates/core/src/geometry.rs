//! Distance indexing, sphere-proximity neighbor ordering and order-k angles.
//!
//! For a center `x_i` and a scale `s`, neighbors are ranked by how close they
//! lie to the sphere of radius `s` around `x_i`, i.e. by `|s - ‖x_j - x_i‖|`.
//! Ties are broken by smaller distance, then smaller id.
//!
//! The angle of order `k` at a center is the angle between the vector to the
//! `(k+1)`-th ranked neighbor and its orthogonal projection onto the span of
//! the vectors to the first `k` ranked neighbors. It always lies in `[0, π/2]`.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::cloud::{euclidean, PointCloud};
use crate::error::{Error, Result};

/// Relative tolerance under which an orthogonalized base vector is treated as
/// linearly dependent on the previous ones.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Per-point ascending-sorted distances to every other point.
///
/// Storage is `n * (n - 1)` distances plus the same number of `u32` ids, so
/// each sphere-proximity query costs a binary search plus `O(count)` work.
#[derive(Debug, Clone)]
pub struct DistanceIndex {
    n: usize,
    dists: Vec<f64>,
    ids: Vec<u32>,
    /// Number of zero-distance entries at the head of each row.
    zero_prefix: Vec<u32>,
    duplicates: Vec<(usize, usize)>,
    s_min: f64,
    s_max: f64,
}

impl DistanceIndex {
    pub fn build(cloud: &PointCloud) -> Result<Self> {
        let n = cloud.len();
        if n > u32::MAX as usize {
            return Err(Error::Parameter(format!("too many points for index: {n}")));
        }
        let width = n - 1;
        let mut dists = vec![0.0; n * width];
        let mut ids = vec![0u32; n * width];

        dists
            .par_chunks_mut(width)
            .zip(ids.par_chunks_mut(width))
            .enumerate()
            .for_each(|(i, (drow, irow))| {
                let xi = cloud.point(i);
                let mut row: Vec<(f64, u32)> = (0..n)
                    .filter(|&j| j != i)
                    .map(|j| (euclidean(xi, cloud.point(j)), j as u32))
                    .collect();
                row.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                for (k, (d, j)) in row.into_iter().enumerate() {
                    drow[k] = d;
                    irow[k] = j;
                }
            });

        let mut zero_prefix = Vec::with_capacity(n);
        let mut duplicates = Vec::new();
        let mut s_min = f64::INFINITY;
        let mut s_max = 0.0f64;
        for i in 0..n {
            let drow = &dists[i * width..(i + 1) * width];
            let zeros = drow.partition_point(|&d| d == 0.0);
            zero_prefix.push(zeros as u32);
            for &j in &ids[i * width..i * width + zeros] {
                if (j as usize) > i {
                    duplicates.push((i, j as usize));
                }
            }
            if let Some(&d) = drow.get(zeros) {
                s_min = s_min.min(d);
            }
            s_max = s_max.max(drow[width - 1]);
        }
        if !s_min.is_finite() {
            return Err(Error::DegenerateInput(
                "all points are identical; minimum nonzero pairwise distance is undefined".into(),
            ));
        }
        if !duplicates.is_empty() {
            log::warn!(
                "{} duplicate point pair(s) found; they are excluded from each other's neighbor sets",
                duplicates.len()
            );
        }
        Ok(Self {
            n,
            dists,
            ids,
            zero_prefix,
            duplicates,
            s_min,
            s_max,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Smallest nonzero pairwise distance.
    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    /// Largest pairwise distance.
    pub fn s_max(&self) -> f64 {
        self.s_max
    }

    /// Pairs `(i, j)`, `i < j`, of points at exactly zero distance.
    pub fn duplicates(&self) -> &[(usize, usize)] {
        &self.duplicates
    }

    /// Sorted `(distance, neighbor id)` row for point `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (f64, usize)> + '_ {
        let w = self.n - 1;
        self.dists[i * w..(i + 1) * w]
            .iter()
            .zip(&self.ids[i * w..(i + 1) * w])
            .map(|(&d, &j)| (d, j as usize))
    }

    /// Number of non-duplicate neighbors of point `i`.
    pub fn distinct_neighbors(&self, i: usize) -> usize {
        self.n - 1 - self.zero_prefix[i] as usize
    }

    /// Every pairwise distance with `i < j`, in no particular order.
    pub fn pairwise(&self) -> Vec<f64> {
        let w = self.n - 1;
        let mut out = Vec::with_capacity(self.n * w / 2);
        for i in 0..self.n {
            let base = i * w;
            for k in 0..w {
                if self.ids[base + k] as usize > i {
                    out.push(self.dists[base + k]);
                }
            }
        }
        out
    }

    /// The `count` neighbors of `center` closest to the sphere of radius `s`.
    pub fn sphere_neighbors(&self, center: usize, s: f64, count: usize) -> Result<NeighborSelection> {
        let mut ids = Vec::with_capacity(count);
        self.select_into(center, s, count, false, &mut ids)?;
        Ok(NeighborSelection { center, scale: s, ids })
    }

    /// Like [`sphere_neighbors`](Self::sphere_neighbors), but skipping points
    /// that coincide with the center.
    pub fn sphere_neighbors_distinct(
        &self,
        center: usize,
        s: f64,
        count: usize,
    ) -> Result<NeighborSelection> {
        let mut ids = Vec::with_capacity(count);
        self.select_into(center, s, count, true, &mut ids)?;
        Ok(NeighborSelection { center, scale: s, ids })
    }

    pub(crate) fn select_into(
        &self,
        center: usize,
        s: f64,
        count: usize,
        skip_duplicates: bool,
        out: &mut Vec<usize>,
    ) -> Result<()> {
        if !(s > 0.0) || !s.is_finite() {
            return Err(Error::Parameter(format!("scale must be positive and finite, got {s}")));
        }
        if center >= self.n {
            return Err(Error::Parameter(format!("center {center} out of range (n = {})", self.n)));
        }
        let w = self.n - 1;
        let lo = if skip_duplicates { self.zero_prefix[center] as usize } else { 0 };
        let available = w - lo;
        if count == 0 || count > available {
            return Err(Error::InsufficientPoints { requested: count, available });
        }
        let dists = &self.dists[center * w + lo..(center + 1) * w];
        let ids = &self.ids[center * w + lo..(center + 1) * w];
        let key = |k: usize| (s - dists[k]).abs();

        // Entries left of `pos` lie strictly inside the sphere; their key grows
        // leftwards, the key of the entries from `pos` on grows rightwards.
        let pos = dists.partition_point(|&d| d < s);
        let mut left = pos.saturating_sub(count);
        while left > 0 && left < pos && key(left - 1) == key(left) {
            left -= 1;
        }
        let right = (pos + count).min(available);

        let mut candidates: Vec<(f64, f64, u32)> = (left..right)
            .map(|k| (key(k), dists[k], ids[k]))
            .collect();
        candidates.sort_unstable_by(proximity_order);
        out.clear();
        out.extend(candidates.iter().take(count).map(|c| c.2 as usize));
        Ok(())
    }
}

fn proximity_order(a: &(f64, f64, u32), b: &(f64, f64, u32)) -> Ordering {
    a.0.total_cmp(&b.0)
        .then(a.1.total_cmp(&b.1))
        .then(a.2.cmp(&b.2))
}

/// Neighbors of a center ordered by closeness to the sphere of radius `scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSelection {
    pub center: usize,
    pub scale: f64,
    pub ids: Vec<usize>,
}

/// Reusable scratch space for angle computations.
#[derive(Debug, Default, Clone)]
pub struct Projector {
    basis: Vec<f64>,
    rank: usize,
    work: Vec<f64>,
    residual: Vec<f64>,
}

impl Projector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Rank of the span used by the last successful [`angle`](Self::angle) call.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Angle between `apex - center` and its projection onto the span of
    /// `{b - center : b in base}`.
    pub fn angle(&mut self, center: &[f64], base: &[&[f64]], apex: &[f64]) -> Result<f64> {
        let d = center.len();
        self.basis.clear();
        self.rank = 0;
        self.work.resize(d, 0.0);

        let mut max_norm = 0.0f64;
        for b in base {
            max_norm = max_norm.max(euclidean(b, center));
        }
        if max_norm == 0.0 {
            return Err(Error::DegenerateAngle("all base vectors are zero"));
        }
        let tol = RANK_TOLERANCE * max_norm;

        for b in base {
            for (w, (x, c)) in self.work.iter_mut().zip(b.iter().zip(center)) {
                *w = x - c;
            }
            // Two passes of modified Gram-Schmidt keep the basis orthogonal to
            // working precision.
            for _ in 0..2 {
                orthogonalize(&mut self.work, &self.basis, d);
            }
            let norm = norm(&self.work);
            if norm > tol {
                self.basis.extend(self.work.iter().map(|w| w / norm));
                self.rank += 1;
            }
        }

        self.residual.clear();
        self.residual.extend(apex.iter().zip(center).map(|(a, c)| a - c));
        let v_norm = norm(&self.residual);
        if v_norm == 0.0 {
            return Err(Error::DegenerateAngle("apex coincides with center"));
        }
        for _ in 0..2 {
            orthogonalize(&mut self.residual, &self.basis, d);
        }
        let proj_norm = apex
            .iter()
            .zip(center)
            .zip(&self.residual)
            .map(|((a, c), r)| {
                let p = (a - c) - r;
                p * p
            })
            .sum::<f64>()
            .sqrt();
        let theta = norm(&self.residual).atan2(proj_norm);
        Ok(theta.clamp(0.0, std::f64::consts::FRAC_PI_2))
    }
}

fn orthogonalize(w: &mut [f64], basis: &[f64], d: usize) {
    for q in basis.chunks_exact(d) {
        let dot: f64 = q.iter().zip(w.iter()).map(|(a, b)| a * b).sum();
        for (wi, qi) in w.iter_mut().zip(q) {
            *wi -= dot * qi;
        }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Order-`k` angle at `center` (radians, in `[0, π/2]`), with `k = base.len()`.
pub fn angle(cloud: &PointCloud, center: usize, base: &[usize], apex: usize) -> Result<f64> {
    let n = cloud.len();
    if center >= n || apex >= n || base.iter().any(|&b| b >= n) {
        return Err(Error::Parameter("point id out of range".into()));
    }
    if apex == center {
        return Err(Error::Parameter("apex must differ from center".into()));
    }
    for (i, &b) in base.iter().enumerate() {
        if b == center || b == apex || base[..i].contains(&b) {
            return Err(Error::Parameter(format!(
                "base ids must be distinct and differ from center and apex (offending id {b})"
            )));
        }
    }
    if base.is_empty() {
        return Err(Error::Parameter("base must contain at least one point".into()));
    }
    let pts: Vec<&[f64]> = base.iter().map(|&b| cloud.point(b)).collect();
    Projector::new().angle(cloud.point(center), &pts, cloud.point(apex))
}
