//! Scale grids, the normalizing constants `a_k`, angle fields and the
//! dimension statistic `T_k(s) = k + mean(θ^k(s)) / a_k`.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::geometry::{DistanceIndex, Projector};
use crate::rng::stream_rng;

/// What the raw scales are divided by to get the standardized scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum NormalizerMode {
    #[default]
    MaxPairwise,
    P95Pairwise,
}

impl NormalizerMode {
    pub fn as_str(self) -> &'static str {
        match self {
            NormalizerMode::MaxPairwise => "max-pairwise",
            NormalizerMode::P95Pairwise => "p95-pairwise",
        }
    }
}

impl fmt::Display for NormalizerMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NormalizerMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max-pairwise" | "max" => Ok(NormalizerMode::MaxPairwise),
            "p95-pairwise" | "p95" => Ok(NormalizerMode::P95Pairwise),
            other => Err(Error::Parameter(format!("unknown normalizer mode '{other}'"))),
        }
    }
}

/// Human label for a percentile position: `s_min`, `s_5%`, ..., `s_max`.
pub fn scale_label(percent: f64) -> String {
    if percent == 0.0 {
        "s_min".to_string()
    } else if percent == 100.0 {
        "s_max".to_string()
    } else {
        format!("s_{percent}%")
    }
}

/// Percent positions `0, step, 2·step, …, 100`.
pub fn canonical_percents(step_percent: f64) -> Result<Vec<f64>> {
    if !(step_percent > 0.0 && step_percent <= 50.0) {
        return Err(Error::Parameter(format!(
            "step_percent must be in (0, 50], got {step_percent}"
        )));
    }
    let mut out = Vec::new();
    let mut i = 0u32;
    loop {
        let p = f64::from(i) * step_percent;
        if p >= 100.0 - 1e-9 {
            break;
        }
        out.push(p);
        i += 1;
    }
    out.push(100.0);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    /// Percentile of the pairwise-distance distribution this scale sits at.
    pub percent: f64,
    pub raw: f64,
    pub standardized: f64,
}

impl GridPoint {
    pub fn label(&self) -> String {
        scale_label(self.percent)
    }
}

/// Ordered scales from `s_min` to `s_max`, taken at percentiles of the
/// pairwise-distance multiset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    pub step_percent: f64,
    pub mode: NormalizerMode,
    pub normalizer: f64,
    pub points: Vec<GridPoint>,
}

impl ScaleGrid {
    /// Percentile grid with repeated raw values collapsed onto their first label.
    pub fn build(index: &DistanceIndex, step_percent: f64, mode: NormalizerMode) -> Result<Self> {
        let mut grid = Self::build_full(index, step_percent, mode)?;
        grid.points.dedup_by(|b, a| b.raw == a.raw);
        if grid.points.len() < 2 {
            return Err(Error::DegenerateGrid(
                "fewer than 2 distinct pairwise distances".into(),
            ));
        }
        Ok(grid)
    }

    /// Percentile grid keeping every label, even when raw values repeat.
    pub fn build_full(index: &DistanceIndex, step_percent: f64, mode: NormalizerMode) -> Result<Self> {
        let percents = canonical_percents(step_percent)?;
        let mut distances = index.pairwise();
        distances.retain(|&d| d > 0.0);
        if distances.is_empty() {
            return Err(Error::DegenerateGrid("no nonzero pairwise distances".into()));
        }

        let mut wanted: Vec<f64> = percents.clone();
        if mode == NormalizerMode::P95Pairwise {
            wanted.push(95.0);
        }
        let ranks: Vec<usize> = wanted.iter().map(|&p| nearest_rank(p, distances.len())).collect();
        let values = order_statistics(&mut distances, &ranks);
        let raw = &values[..percents.len()];
        let normalizer = match mode {
            NormalizerMode::MaxPairwise => index.s_max(),
            NormalizerMode::P95Pairwise => values[percents.len()],
        };
        let points = percents
            .iter()
            .zip(raw)
            .map(|(&percent, &raw)| GridPoint {
                percent,
                raw,
                standardized: raw / normalizer,
            })
            .collect();
        Ok(Self {
            step_percent,
            mode,
            normalizer,
            points,
        })
    }

    /// A grid on explicit raw scales; labels are the positions' indices.
    pub fn from_raw_scales(raw: &[f64], normalizer: f64) -> Result<Self> {
        if raw.is_empty() || raw.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::Parameter("raw scales must be positive and finite".into()));
        }
        if !(normalizer > 0.0) {
            return Err(Error::Parameter("normalizer must be positive".into()));
        }
        Ok(Self {
            step_percent: f64::NAN,
            mode: NormalizerMode::MaxPairwise,
            normalizer,
            points: raw
                .iter()
                .enumerate()
                .map(|(i, &s)| GridPoint {
                    percent: i as f64,
                    raw: s,
                    standardized: s / normalizer,
                })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn raw_scales(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.raw).collect()
    }

    pub fn position_of(&self, percent: f64) -> Option<usize> {
        self.points.iter().position(|p| p.percent == percent)
    }
}

/// 0-based nearest-rank index of the `percent`-th percentile among `len` values.
pub fn nearest_rank(percent: f64, len: usize) -> usize {
    if percent <= 0.0 {
        return 0;
    }
    let rank = (percent * len as f64 / 100.0 - 1e-9).ceil() as usize;
    rank.clamp(1, len) - 1
}

/// Values at the given 0-based ranks, via successive selection.
fn order_statistics(values: &mut [f64], ranks: &[usize]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..ranks.len()).collect();
    order.sort_by_key(|&i| ranks[i]);
    let mut out = vec![0.0; ranks.len()];
    let mut start = 0;
    for &i in &order {
        let r = ranks[i];
        if r >= start {
            let (_, v, _) = values[start..].select_nth_unstable_by(r - start, f64::total_cmp);
            out[i] = *v;
            start = r;
        } else {
            out[i] = values[r];
        }
    }
    out
}

/// How a normalizing constant was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Exact,
    Quadrature,
    MonteCarlo,
}

impl Provenance {
    pub fn as_str(self) -> &'static str {
        match self {
            Provenance::Exact => "exact",
            Provenance::Quadrature => "quadrature",
            Provenance::MonteCarlo => "monte-carlo",
        }
    }
}

impl FromStr for Provenance {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Provenance::Exact),
            "quadrature" => Ok(Provenance::Quadrature),
            "monte-carlo" => Ok(Provenance::MonteCarlo),
            other => Err(Error::Parameter(format!("unknown normalizer method '{other}'"))),
        }
    }
}

/// Method requested from [`compute_normalizer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalizerMethod {
    Exact,
    Quadrature,
    MonteCarlo { samples: usize, seed: u64 },
}

/// `a_k`: the mean angle between a uniform direction in `(k+1)`-space and a
/// uniformly oriented `k`-dimensional subspace.
///
/// Writing the component of the direction along the subspace normal as
/// `t = sin φ`, `a_k = ∫ φ cos^(k-1) φ dφ / ∫ cos^(k-1) φ dφ` over `[0, π/2]`.
pub fn compute_normalizer(k: usize, method: NormalizerMethod) -> Result<f64> {
    if k == 0 {
        return Err(Error::Parameter("normalizer order k must be >= 1".into()));
    }
    match method {
        NormalizerMethod::Exact => match k {
            1 => Ok(FRAC_PI_4),
            2 => Ok(FRAC_PI_2 - 1.0),
            3 => Ok(FRAC_PI_4 - 1.0 / PI),
            _ => Err(Error::Parameter(format!("no closed form for a_{k}; use quadrature"))),
        },
        NormalizerMethod::Quadrature => {
            let p = (k - 1) as i32;
            let num = adaptive_simpson(&|phi: f64| phi * phi.cos().powi(p), 0.0, FRAC_PI_2, 1e-13);
            let den = adaptive_simpson(&|phi: f64| phi.cos().powi(p), 0.0, FRAC_PI_2, 1e-13);
            Ok(num / den)
        }
        NormalizerMethod::MonteCarlo { samples, seed } => {
            if samples == 0 {
                return Err(Error::Parameter("monte-carlo normalizer needs samples >= 1".into()));
            }
            let mut rng = stream_rng(seed, k as u64);
            let mut sum = NeumaierSum::default();
            let mut v = vec![0.0f64; k + 1];
            for _ in 0..samples {
                for x in v.iter_mut() {
                    *x = rng.sample(StandardNormal);
                }
                let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                sum.add((v[0].abs() / norm).min(1.0).asin());
            }
            Ok(sum.total() / samples as f64)
        }
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 40)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub value: f64,
    pub provenance: Provenance,
}

/// `k -> a_k` with the method each value came from.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct NormalizerTable {
    entries: BTreeMap<usize, Normalizer>,
}

impl NormalizerTable {
    /// Closed forms for `k <= 3`, quadrature above.
    pub fn standard(k_max: usize) -> Result<Self> {
        let mut table = Self::default();
        for k in 1..=k_max {
            let (method, provenance) = if k <= 3 {
                (NormalizerMethod::Exact, Provenance::Exact)
            } else {
                (NormalizerMethod::Quadrature, Provenance::Quadrature)
            };
            table.insert(k, compute_normalizer(k, method)?, provenance);
        }
        Ok(table)
    }

    pub fn insert(&mut self, k: usize, value: f64, provenance: Provenance) {
        self.entries.insert(k, Normalizer { value, provenance });
    }

    pub fn get(&self, k: usize) -> Option<f64> {
        self.entries.get(&k).map(|e| e.value)
    }

    pub fn entry(&self, k: usize) -> Option<Normalizer> {
        self.entries.get(&k).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Normalizer)> + '_ {
        self.entries.iter().map(|(&k, &e)| (k, e))
    }

    /// Text table, one `k<TAB>a_k<TAB>provenance` line per entry.
    pub fn to_text(&self) -> String {
        let mut out = String::from("k\ta_k\tprovenance\n");
        for (k, e) in self.iter() {
            out.push_str(&format!("{k}\t{:?}\t{}\n", e.value, e.provenance.as_str()));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut table = Self::default();
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some("k\ta_k\tprovenance") {
            return Err(Error::Parameter("normalizer table: missing header".into()));
        }
        for (no, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Parameter(format!("normalizer table: malformed line {}", no + 2));
            let mut cols = line.split('\t');
            let k = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
            let v = cols.next().and_then(|c| c.parse().ok()).ok_or_else(bad)?;
            let p = cols.next().ok_or_else(bad)?.parse()?;
            table.insert(k, v, p);
        }
        Ok(table)
    }
}

/// Why a cell of the angle field holds no value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MaskReason {
    /// Too few non-duplicate neighbors for this order.
    TooFewNeighbors,
    /// The angle itself is undefined (zero-length vectors).
    DegenerateAngle,
}

/// `θ_i^k(s)` over points, orders and grid positions.
#[derive(Debug, Clone)]
pub struct AngleField {
    n: usize,
    orders: RangeInclusive<usize>,
    grid_len: usize,
    theta: Vec<f64>,
    mask: Vec<Option<MaskReason>>,
}

impl AngleField {
    fn offset(&self, i: usize, k: usize, g: usize) -> usize {
        let nk = self.orders.end() - self.orders.start() + 1;
        (i * nk + (k - self.orders.start())) * self.grid_len + g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn orders(&self) -> RangeInclusive<usize> {
        self.orders.clone()
    }

    pub fn grid_len(&self) -> usize {
        self.grid_len
    }

    /// `Ok(θ)` for an available cell, `Err(reason)` for a masked one.
    pub fn get(&self, i: usize, k: usize, g: usize) -> std::result::Result<f64, MaskReason> {
        let o = self.offset(i, k, g);
        match self.mask[o] {
            None => Ok(self.theta[o]),
            Some(r) => Err(r),
        }
    }

    /// Available angles of order `k` at grid position `g`, ascending point id.
    pub fn column(&self, k: usize, g: usize) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).filter_map(move |i| self.get(i, k, g).ok())
    }

    pub fn masked_count(&self) -> usize {
        self.mask.iter().filter(|m| m.is_some()).count()
    }
}

/// Largest admissible order for a cloud: `min(d - 1, n - 2)`.
pub fn max_order(cloud: &PointCloud) -> usize {
    (cloud.dim() - 1).min(cloud.len() - 2)
}

/// Default order cap: `min(d - 1, n - 2, 10)`.
pub fn default_k_max(cloud: &PointCloud) -> usize {
    max_order(cloud).min(10)
}

pub fn compute_angle_field(
    cloud: &PointCloud,
    index: &DistanceIndex,
    grid: &ScaleGrid,
    k_max: usize,
) -> Result<AngleField> {
    compute_angle_field_for(cloud, index, grid, 1..=k_max)
}

/// Angle field restricted to the orders in `orders`.
pub fn compute_angle_field_for(
    cloud: &PointCloud,
    index: &DistanceIndex,
    grid: &ScaleGrid,
    orders: RangeInclusive<usize>,
) -> Result<AngleField> {
    let limit = max_order(cloud);
    if *orders.start() < 1 || orders.start() > orders.end() || *orders.end() > limit {
        return Err(Error::Parameter(format!(
            "orders {}..={} outside 1..={limit} (min(d-1, n-2))",
            orders.start(),
            orders.end()
        )));
    }
    if index.len() != cloud.len() {
        return Err(Error::Parameter("distance index does not match cloud".into()));
    }
    let n = cloud.len();
    let nk = orders.end() - orders.start() + 1;
    let g_len = grid.len();
    let per_point = nk * g_len;
    let mut theta = vec![0.0; n * per_point];
    let mut mask = vec![None; n * per_point];
    let k_hi = *orders.end();
    let k_lo = *orders.start();

    theta
        .par_chunks_mut(per_point)
        .zip(mask.par_chunks_mut(per_point))
        .enumerate()
        .try_for_each_init(
            || (Projector::new(), Vec::with_capacity(k_hi + 1), Vec::with_capacity(k_hi)),
            |(proj, sel, base), (i, (trow, mrow))| -> Result<()> {
                let avail = index.distinct_neighbors(i);
                let count = (k_hi + 1).min(avail);
                let center = cloud.point(i);
                for (g, gp) in grid.points.iter().enumerate() {
                    if count > 0 {
                        index.select_into(i, gp.raw, count, true, sel)?;
                    } else {
                        sel.clear();
                    }
                    for k in k_lo..=k_hi {
                        let cell = (k - k_lo) * g_len + g;
                        if k + 1 > sel.len() {
                            mrow[cell] = Some(MaskReason::TooFewNeighbors);
                            continue;
                        }
                        base.clear();
                        base.extend(sel[..k].iter().map(|&j| cloud.point(j)));
                        match proj.angle(center, base, cloud.point(sel[k])) {
                            Ok(t) => trow[cell] = t,
                            Err(Error::DegenerateAngle(_)) => {
                                mrow[cell] = Some(MaskReason::DegenerateAngle)
                            }
                            Err(e) => return Err(e),
                        }
                    }
                }
                Ok(())
            },
        )?;

    Ok(AngleField {
        n,
        orders,
        grid_len: g_len,
        theta,
        mask,
    })
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TCell {
    /// `None` when every point was masked at this cell.
    pub value: Option<f64>,
    pub count: usize,
    pub reliable: bool,
}

/// `T_k(s)` over orders and grid positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TProfile {
    pub n: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub grid_len: usize,
    cells: Vec<TCell>,
}

impl TProfile {
    /// Profile from cells laid out order-major (`(k - k_min) * grid_len + g`).
    pub fn from_parts(n: usize, k_min: usize, k_max: usize, grid_len: usize, cells: Vec<TCell>) -> Self {
        assert_eq!(cells.len(), (k_max + 1 - k_min) * grid_len, "cell count mismatch");
        Self {
            n,
            k_min,
            k_max,
            grid_len,
            cells,
        }
    }

    pub fn cell(&self, k: usize, g: usize) -> TCell {
        assert!((self.k_min..=self.k_max).contains(&k), "order {k} not in profile");
        self.cells[(k - self.k_min) * self.grid_len + g]
    }

    pub fn value(&self, k: usize, g: usize) -> Option<f64> {
        self.cell(k, g).value
    }

    /// `T_k` across the grid.
    pub fn curve(&self, k: usize) -> Vec<Option<f64>> {
        (0..self.grid_len).map(|g| self.value(k, g)).collect()
    }

    pub fn orders(&self) -> RangeInclusive<usize> {
        self.k_min..=self.k_max
    }
}

/// Minimum number of contributing points for a reliable `T` cell.
pub fn reliability_threshold(n: usize) -> usize {
    10.max(n.div_ceil(10))
}

#[allow(non_snake_case)]
pub fn compute_T(field: &AngleField, normalizers: &NormalizerTable) -> Result<TProfile> {
    let orders = field.orders();
    let threshold = reliability_threshold(field.n());
    let mut cells = Vec::with_capacity(orders.clone().count() * field.grid_len());
    for k in orders.clone() {
        let a_k = normalizers
            .get(k)
            .ok_or_else(|| Error::Parameter(format!("no normalizer a_{k} in table")))?;
        for g in 0..field.grid_len() {
            let mut sum = NeumaierSum::default();
            let mut count = 0usize;
            for t in field.column(k, g) {
                sum.add(t);
                count += 1;
            }
            let value = (count > 0).then(|| k as f64 + sum.total() / count as f64 / a_k);
            cells.push(TCell {
                value,
                count,
                reliable: count >= threshold,
            });
        }
    }
    Ok(TProfile {
        n: field.n(),
        k_min: *orders.start(),
        k_max: *orders.end(),
        grid_len: field.grid_len(),
        cells,
    })
}

/// Index, grid, angle field and `T` profile for the orders in `orders`.
pub fn t_profile(
    cloud: &PointCloud,
    grid: &ScaleGrid,
    index: &DistanceIndex,
    orders: RangeInclusive<usize>,
    normalizers: &NormalizerTable,
) -> Result<TProfile> {
    let field = compute_angle_field_for(cloud, index, grid, orders)?;
    compute_T(&field, normalizers)
}
