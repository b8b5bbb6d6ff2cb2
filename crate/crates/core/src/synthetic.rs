//! Seeded point-cloud generators for loop-bearing and loop-free samples.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filtration::PointCloud;
use crate::scalar::{lit, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    /// Noisy circle; one dominant loop.
    Circle,
    /// Gaussian clusters; no persistent loop.
    Blobs,
    /// Noisy circle plus uniform outliers in the bounding square.
    CirclePlusNoise,
}

impl std::str::FromStr for Generator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "circle" => Ok(Generator::Circle),
            "blobs" => Ok(Generator::Blobs),
            "circle_plus_noise" => Ok(Generator::CirclePlusNoise),
            other => Err(Error::InvalidInput(format!("unknown generator `{other}`"))),
        }
    }
}

fn one() -> f64 {
    1.0
}

fn two() -> usize {
    2
}

fn tenth() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub generator: Generator,
    /// Points per cloud.
    pub n_points: usize,
    /// Standard deviation of the Gaussian jitter (cluster spread for blobs).
    pub noise_sd: f64,
    /// Number of clouds.
    pub count: usize,
    pub seed: u64,
    /// Circle radius drawn uniformly from `[radius_min, radius_max]`.
    #[serde(default = "one")]
    pub radius_min: f64,
    #[serde(default = "one")]
    pub radius_max: f64,
    /// Cluster count for blobs.
    #[serde(default = "two")]
    pub centers: usize,
    /// Fraction of outliers for circle_plus_noise.
    #[serde(default = "tenth")]
    pub outlier_fraction: f64,
}

impl SyntheticSpec {
    pub fn new(generator: Generator, n_points: usize, noise_sd: f64, count: usize, seed: u64) -> Self {
        Self {
            generator,
            n_points,
            noise_sd,
            count,
            seed,
            radius_min: 1.0,
            radius_max: 1.0,
            centers: 2,
            outlier_fraction: 0.1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 || self.count == 0 {
            return Err(Error::Config("n_points and count must be positive".into()));
        }
        if !(self.noise_sd >= 0.0) || !self.noise_sd.is_finite() {
            return Err(Error::Config(format!("noise_sd must be nonnegative, got {}", self.noise_sd)));
        }
        if !(self.radius_min > 0.0 && self.radius_max >= self.radius_min && self.radius_max.is_finite()) {
            return Err(Error::Config("radius range must satisfy 0 < radius_min <= radius_max".into()));
        }
        if self.centers == 0 {
            return Err(Error::Config("blobs need at least one center".into()));
        }
        if !(0.0..=1.0).contains(&self.outlier_fraction) {
            return Err(Error::Config("outlier_fraction must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

/// A generated cloud with the radius it was drawn at (0 for blobs).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T> {
    pub cloud: PointCloud<T>,
    pub radius: f64,
}

fn circle(rng: &mut ChaCha8Rng, n: usize, radius: f64, noise: &Normal<f64>) -> Vec<Vec<f64>> {
    let phase: f64 = rng.random::<f64>() * std::f64::consts::TAU;
    (0..n)
        .map(|i| {
            let t = phase + std::f64::consts::TAU * i as f64 / n as f64;
            vec![radius * t.cos() + noise.sample(rng), radius * t.sin() + noise.sample(rng)]
        })
        .collect()
}

/// `spec.count` clouds; the same spec always yields the same clouds.
pub fn generate<T: Scalar>(spec: &SyntheticSpec) -> Result<Vec<Sample<T>>> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::Config(e.to_string()))?;
    let mut out = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let radius = if spec.radius_max > spec.radius_min {
            rng.random_range(spec.radius_min..=spec.radius_max)
        } else {
            spec.radius_min
        };
        let (points, r) = match spec.generator {
            Generator::Circle => (circle(&mut rng, spec.n_points, radius, &noise), radius),
            Generator::CirclePlusNoise => {
                let outliers = ((spec.n_points as f64) * spec.outlier_fraction).round() as usize;
                let outliers = outliers.min(spec.n_points);
                let mut pts = circle(&mut rng, spec.n_points - outliers, radius, &noise);
                for _ in 0..outliers {
                    pts.push(vec![rng.random_range(-radius..=radius), rng.random_range(-radius..=radius)]);
                }
                (pts, radius)
            }
            Generator::Blobs => {
                let centers: Vec<(f64, f64)> =
                    (0..spec.centers).map(|_| (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0))).collect();
                let pts = (0..spec.n_points)
                    .map(|i| {
                        let (cx, cy) = centers[i % centers.len()];
                        vec![cx + noise.sample(&mut rng), cy + noise.sample(&mut rng)]
                    })
                    .collect();
                (pts, 0.0)
            }
        };
        let points = points.into_iter().map(|p| p.into_iter().map(lit::<T>).collect()).collect();
        out.push(Sample { cloud: PointCloud::new(points)?, radius: r });
    }
    Ok(out)
}
