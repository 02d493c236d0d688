//! Seeded generators for the synthetic dataset families.
//!
//! Every generator is a pure function of its [`GeneratorSpec`]: the same
//! spec always yields a bit-identical cloud.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Default noise standard deviation of the circle family (variance 0.25).
pub const CIRCLE_NOISE_SD: f64 = 0.5;
pub const CIRCLE_RADIUS: f64 = 5.0;
/// Hénon map parameters.
pub const HENON_A: f64 = 1.4;
pub const HENON_B: f64 = 0.3;
const HENON_ESCAPE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum GeneratorSpec {
    /// `x ~ U(0, 1)`, `y ~ N(0, sigma²)`.
    LineToy { n: usize, sigma: f64, seed: u64 },
    /// Radius-5 circle with isotropic noise; `ambient = 6` pads four pure-noise columns.
    Circle {
        n: usize,
        ambient: usize,
        noise_sd: f64,
        seed: u64,
    },
    /// `(t cos t, h, t sin t)`, `t ~ U(3π/2, 9π/2)`, `h ~ U(0, 21)`, plus `N(0, sigma²)` noise.
    SwissRoll { n: usize, sigma: f64, seed: u64 },
    /// Hénon orbit from the origin, first `burn_in` iterates dropped.
    Henon {
        n: usize,
        burn_in: usize,
        sigma: f64,
        seed: u64,
    },
    /// i.i.d. standard normal entries.
    Gaussian { n: usize, d: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn family(&self) -> &'static str {
        match self {
            GeneratorSpec::LineToy { .. } => "line-toy",
            GeneratorSpec::Circle { .. } => "circle",
            GeneratorSpec::SwissRoll { .. } => "swiss-roll",
            GeneratorSpec::Henon { .. } => "henon",
            GeneratorSpec::Gaussian { .. } => "gaussian",
        }
    }

    pub fn generate(&self) -> Result<PointCloud> {
        match *self {
            GeneratorSpec::LineToy { n, sigma, seed } => gen_line_toy(n, sigma, seed),
            GeneratorSpec::Circle {
                n,
                ambient,
                noise_sd,
                seed,
            } => gen_circle_with_noise(n, ambient, noise_sd, seed),
            GeneratorSpec::SwissRoll { n, sigma, seed } => gen_swiss_roll(n, sigma, seed),
            GeneratorSpec::Henon {
                n,
                burn_in,
                sigma,
                seed,
            } => gen_henon(n, burn_in, sigma, seed),
            GeneratorSpec::Gaussian { n, d, seed } => gen_gaussian(n, d, seed),
        }
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma >= 0.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("noise sigma must be finite and >= 0, got {sigma}")))
    }
}

fn check_n(n: usize) -> Result<()> {
    if n >= 3 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("sample size must be >= 3, got {n}")))
    }
}

fn normal(sigma: f64) -> Normal<f64> {
    Normal::new(0.0, sigma).expect("sigma validated")
}

pub fn gen_line_toy(n: usize, sigma: f64, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    check_sigma(sigma)?;
    let mut rng = stream_rng(seed, 0);
    let noise = normal(sigma);
    let mut coords = Vec::with_capacity(2 * n);
    for _ in 0..n {
        let x: f64 = rng.random();
        coords.push(x);
        coords.push(noise.sample(&mut rng));
    }
    PointCloud::new(coords, 2)
}

/// Circle with the default noise level.
pub fn gen_circle(n: usize, ambient: usize, seed: u64) -> Result<PointCloud> {
    gen_circle_with_noise(n, ambient, CIRCLE_NOISE_SD, seed)
}

pub fn gen_circle_with_noise(n: usize, ambient: usize, noise_sd: f64, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    check_sigma(noise_sd)?;
    if ambient != 2 && ambient != 6 {
        return Err(Error::Parameter(format!("circle ambient dimension must be 2 or 6, got {ambient}")));
    }
    let mut rng = stream_rng(seed, 0);
    let angle = Uniform::new(0.0, 2.0 * PI).expect("valid range");
    let noise = normal(noise_sd);
    let mut coords = Vec::with_capacity(ambient * n);
    for _ in 0..n {
        let lambda = angle.sample(&mut rng);
        coords.push(CIRCLE_RADIUS * lambda.sin() + noise.sample(&mut rng));
        coords.push(CIRCLE_RADIUS * lambda.cos() + noise.sample(&mut rng));
        for _ in 2..ambient {
            coords.push(noise.sample(&mut rng));
        }
    }
    PointCloud::new(coords, ambient)
}

pub fn gen_swiss_roll(n: usize, sigma: f64, seed: u64) -> Result<PointCloud> {
    Ok(swiss_roll_with_params(n, sigma, seed)?.0)
}

/// Swiss roll plus the generating `t` of every point.
pub fn swiss_roll_with_params(n: usize, sigma: f64, seed: u64) -> Result<(PointCloud, Vec<f64>)> {
    check_n(n)?;
    check_sigma(sigma)?;
    let mut rng = stream_rng(seed, 0);
    let t_dist = Uniform::new(1.5 * PI, 4.5 * PI).expect("valid range");
    let h_dist = Uniform::new(0.0, 21.0).expect("valid range");
    let noise = normal(sigma);
    let mut coords = Vec::with_capacity(3 * n);
    let mut ts = Vec::with_capacity(n);
    for _ in 0..n {
        let t = t_dist.sample(&mut rng);
        let h = h_dist.sample(&mut rng);
        coords.push(t * t.cos() + noise.sample(&mut rng));
        coords.push(h + noise.sample(&mut rng));
        coords.push(t * t.sin() + noise.sample(&mut rng));
        ts.push(t);
    }
    Ok((PointCloud::new(coords, 3)?, ts))
}

/// One step of the Hénon map.
#[inline]
pub fn henon_step(x: f64, y: f64) -> (f64, f64) {
    (y + 1.0 - HENON_A * x * x, HENON_B * x)
}

/// Noise-free Hénon iterates `1..=burn_in + n` from the origin, keeping the last `n`.
pub fn henon_orbit(n: usize, burn_in: usize) -> Result<Vec<(f64, f64)>> {
    let (mut x, mut y) = (0.0, 0.0);
    let mut out = Vec::with_capacity(n);
    for iterate in 1..=burn_in + n {
        (x, y) = henon_step(x, y);
        if !(x.abs() <= HENON_ESCAPE) {
            return Err(Error::NumericEscape { iterate, magnitude: x.abs() });
        }
        if iterate > burn_in {
            out.push((x, y));
        }
    }
    Ok(out)
}

pub fn gen_henon(n: usize, burn_in: usize, sigma: f64, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    check_sigma(sigma)?;
    let orbit = henon_orbit(n, burn_in)?;
    let mut rng = stream_rng(seed, 0);
    let noise = normal(sigma);
    let mut coords = Vec::with_capacity(2 * n);
    for (x, y) in orbit {
        coords.push(x + noise.sample(&mut rng));
        coords.push(y + noise.sample(&mut rng));
    }
    PointCloud::new(coords, 2)
}

pub fn gen_gaussian(n: usize, d: usize, seed: u64) -> Result<PointCloud> {
    check_n(n)?;
    gaussian_from(&mut stream_rng(seed, 0), n, d)
}

/// `n × d` standard normal cloud drawn from `rng`.
pub fn gaussian_from<R: Rng>(rng: &mut R, n: usize, d: usize) -> Result<PointCloud> {
    let coords = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    PointCloud::new(coords, d)
}
