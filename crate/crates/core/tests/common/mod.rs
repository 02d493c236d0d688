//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scaledim::PointCloud;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform_cloud(rng: &mut impl Rng, n: usize, d: usize) -> PointCloud {
    let coords = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    PointCloud::new(coords, d).unwrap()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        let t = a[i] - b[i];
        s += t * t;
    }
    s.sqrt()
}

/// All ids except `center` (and, if asked, points coinciding with it), fully
/// sorted by `(|s - d|, d, id)`; the first `count` are returned.
pub fn exhaustive_neighbors(
    cloud: &PointCloud,
    center: usize,
    s: f64,
    count: usize,
    skip_coincident: bool,
) -> Vec<usize> {
    let c = cloud.point(center);
    let mut all: Vec<(f64, f64, usize)> = (0..cloud.len())
        .filter(|&j| j != center)
        .map(|j| {
            let d = dist(c, cloud.point(j));
            ((s - d).abs(), d, j)
        })
        .filter(|&(_, d, _)| !(skip_coincident && d == 0.0))
        .collect();
    all.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(a.2.cmp(&b.2))
    });
    all.into_iter().take(count).map(|t| t.2).collect()
}

/// Classical Gram-Schmidt projection; θ = arccos(‖proj‖ / ‖v‖).
pub fn gs_angle(center: &[f64], base: &[Vec<f64>], apex: &[f64]) -> f64 {
    let sub = |p: &[f64]| -> Vec<f64> { p.iter().zip(center).map(|(a, b)| a - b).collect() };
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut q: Vec<Vec<f64>> = Vec::new();
    for b in base {
        let u = sub(b);
        let mut w = u.clone();
        for e in &q {
            let c = dot(&u, e);
            for (wi, ei) in w.iter_mut().zip(e) {
                *wi -= c * ei;
            }
        }
        let nw = dot(&w, &w).sqrt();
        q.push(w.iter().map(|x| x / nw).collect());
    }
    let v = sub(apex);
    let mut p = vec![0.0; v.len()];
    for e in &q {
        let c = dot(&v, e);
        for (pi, ei) in p.iter_mut().zip(e) {
            *pi += c * ei;
        }
    }
    let ratio = (dot(&p, &p).sqrt() / dot(&v, &v).sqrt()).min(1.0);
    ratio.acos()
}

/// Nearest-rank percentiles of all nonzero pairwise distances, by full sort.
pub fn brute_percentiles(cloud: &PointCloud, percents: &[f64]) -> Vec<f64> {
    let mut d = Vec::new();
    for i in 0..cloud.len() {
        for j in i + 1..cloud.len() {
            let x = dist(cloud.point(i), cloud.point(j));
            if x > 0.0 {
                d.push(x);
            }
        }
    }
    d.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = d.len();
    percents
        .iter()
        .map(|&p| {
            let r = ((p / 100.0) * m as f64).ceil() as usize;
            d[r.clamp(1, m) - 1]
        })
        .collect()
}

/// Haar-random rotation of R^d by Gram-Schmidt on a Gaussian matrix.
pub fn random_rotation(rng: &mut impl Rng, d: usize) -> Vec<Vec<f64>> {
    let normal = rand_distr::StandardNormal;
    let mut q: Vec<Vec<f64>> = Vec::new();
    while q.len() < d {
        let mut w: Vec<f64> = (0..d).map(|_| rng.sample::<f64, _>(normal)).collect();
        for _ in 0..2 {
            for e in &q {
                let c: f64 = w.iter().zip(e).map(|(a, b)| a * b).sum();
                for (wi, ei) in w.iter_mut().zip(e) {
                    *wi -= c * ei;
                }
            }
        }
        let n = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-6 {
            q.push(w.into_iter().map(|x| x / n).collect());
        }
    }
    q
}

pub fn rigid_motion(cloud: &PointCloud, rot: &[Vec<f64>], shift: &[f64]) -> PointCloud {
    let d = cloud.dim();
    cloud
        .map_points(d, |p, out| {
            for (r, o) in out.iter_mut().enumerate() {
                *o = rot[r].iter().zip(p).map(|(a, b)| a * b).sum::<f64>() + shift[r];
            }
        })
        .unwrap()
}

pub fn scaled(cloud: &PointCloud, c: f64) -> PointCloud {
    cloud
        .map_points(cloud.dim(), |p, out| {
            for (o, x) in out.iter_mut().zip(p) {
                *o = c * x;
            }
        })
        .unwrap()
}
