use crate::error::{Error, Result};

/// `n` observations in `d`-dimensional real space, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    n: usize,
    d: usize,
}

impl PointCloud {
    /// Builds a cloud from row-major coordinates.
    ///
    /// Requires `n >= 3`, `d >= 2` and finite coordinates.
    pub fn new(coords: Vec<f64>, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::Parameter(format!(
                "point cloud needs ambient dimension d >= 2, got {d}"
            )));
        }
        if !coords.len().is_multiple_of(d) {
            return Err(Error::Parameter(format!(
                "coordinate buffer of length {} is not a multiple of d = {d}",
                coords.len()
            )));
        }
        let n = coords.len() / d;
        if n < 3 {
            return Err(Error::Parameter(format!(
                "point cloud needs at least 3 observations, got {n}"
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::Parameter(format!(
                "non-finite coordinate at row {}, column {}",
                pos / d,
                pos % d
            )));
        }
        Ok(Self { coords, n, d })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != d) {
            return Err(Error::Parameter(format!(
                "ragged rows: row {bad} has {} columns, expected {d}",
                rows[bad].len()
            )));
        }
        Self::new(rows.concat(), d)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    /// Applies `f` to every point, producing a cloud of possibly different dimension.
    pub fn map_points<F>(&self, out_dim: usize, mut f: F) -> Result<Self>
    where
        F: FnMut(&[f64], &mut [f64]),
    {
        let mut out = vec![0.0; self.n * out_dim];
        for (src, dst) in self.rows().zip(out.chunks_exact_mut(out_dim)) {
            f(src, dst);
        }
        Self::new(out, out_dim)
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean(self.point(i), self.point(j))
    }
}

#[inline]
pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}
