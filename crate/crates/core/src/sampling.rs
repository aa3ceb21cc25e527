//! Seeded point sources for Monte Carlo integration.
//!
//! Every shard draws from its own ChaCha8 stream: the generator is seeded
//! with the run seed and the stream id is the shard index. A run is
//! reproducible from `(RNG_ALGORITHM, seed, samples, shards)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

pub const RNG_ALGORITHM: &str = "ChaCha8 (rand_chacha 0.9), seed_from_u64(seed), stream = shard index";

pub type ShardRng = ChaCha8Rng;

pub fn shard_rng(seed: u64, shard: u64) -> ShardRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shard);
    rng
}

/// Independent seed for sub-run `index` (grid point, scenario, …) of a run
/// seeded with `base`. SplitMix64 finalizer.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Produces weighted points; `E[w · f(x)]` is the target integral of `f`.
pub trait PointSource: Sync {
    fn dim(&self) -> usize;
    /// Writes a point into `x` and returns its weight.
    fn draw(&self, rng: &mut ShardRng, x: &mut [f64]) -> f64;
}

fn gaussian_direction(rng: &mut ShardRng, x: &mut [f64]) {
    loop {
        let mut norm_sq = 0.0;
        for v in x.iter_mut() {
            *v = rng.sample(StandardNormal);
            norm_sq += *v * *v;
        }
        if norm_sq > 1e-300 {
            let inv = norm_sq.sqrt().recip();
            x.iter_mut().for_each(|v| *v *= inv);
            return;
        }
    }
}

/// Uniform points on `S^{n-1}` (normalized standard Gaussians), weight 1.
#[derive(Clone, Debug)]
pub struct UniformSphere {
    n: usize,
}

impl UniformSphere {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidDimension(n));
        }
        Ok(Self { n })
    }
}

impl PointSource for UniformSphere {
    fn dim(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut ShardRng, x: &mut [f64]) -> f64 {
        gaussian_direction(rng, x);
        1.0
    }
}

/// Uniform points in the `d`-ball of radius `radius`, weighted by its volume
/// so that the sample mean estimates `∫_{B(0,R)} f dx`.
#[derive(Clone, Debug)]
pub struct UniformBall {
    d: usize,
    radius: f64,
    volume: f64,
}

impl UniformBall {
    pub fn new(d: usize, radius: f64) -> Result<Self> {
        if d == 0 || !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("ball of dimension {d} and radius {radius}")));
        }
        let half = d as f64 / 2.0;
        let volume = (half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0) + d as f64 * radius.ln()).exp();
        Ok(Self { d, radius, volume })
    }

    pub fn volume(&self) -> f64 {
        self.volume
    }
}

impl PointSource for UniformBall {
    fn dim(&self) -> usize {
        self.d
    }

    fn draw(&self, rng: &mut ShardRng, x: &mut [f64]) -> f64 {
        if self.d == 1 {
            x[0] = self.radius * (2.0 * rng.random::<f64>() - 1.0);
        } else {
            gaussian_direction(rng, x);
            let r = self.radius * rng.random::<f64>().powf(1.0 / self.d as f64);
            x.iter_mut().for_each(|v| *v *= r);
        }
        self.volume
    }
}

/// Sampling strategy selectable from configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// Plain uniform sampling of the normalized measure.
    Uniform,
    /// Defensive mixture concentrating on coordinate subspheres; see
    /// [`CoordinateMixture`].
    CoordinateMixture { floor: f64, uniform_weight: f64 },
}

/// Importance sampler for integrands singular on coordinate subspheres
/// `{x_S = 0}` of `S^{n-1}`.
///
/// With probability `uniform_weight` a point is uniform on the sphere.
/// Otherwise a nonempty proper subset `S` is picked uniformly, `|x_S|` is
/// drawn log-uniformly on `[floor, 1]`, and the directions inside `x_S` and
/// `x_{S^c}` are uniform. Given `|x_S|` the uniform measure has the same
/// conditional law, so the density ratio to `dσ` only involves the law of
/// `|x_S|`, which is `Beta(k/2, (n−k)/2)` in `|x_S|²`. Weights are the exact
/// reciprocal of the mixture density ratio, so estimates stay unbiased while
/// each octave of distance to every coordinate subsphere receives a comparable
/// number of samples.
#[derive(Clone, Debug)]
pub struct CoordinateMixture {
    n: usize,
    floor: f64,
    uniform_weight: f64,
    subsets: Vec<u64>,
    /// `ln B(k/2, (n−k)/2) − ln 2 − ln ln(1/floor)` for each subset size `k`.
    log_const: Vec<f64>,
}

/// Largest dimension for which the mixture is offered (it has `2^n − 2` components).
pub const MIXTURE_MAX_DIM: usize = 16;

impl CoordinateMixture {
    pub fn new(n: usize, floor: f64, uniform_weight: f64) -> Result<Self> {
        if !(2..=MIXTURE_MAX_DIM).contains(&n) {
            return Err(Error::InvalidConfig(format!(
                "coordinate mixture supports 2 <= n <= {MIXTURE_MAX_DIM}, got {n}"
            )));
        }
        if !(floor > 0.0 && floor < 1.0) {
            return Err(Error::InvalidConfig(format!("mixture floor {floor} must lie in (0,1)")));
        }
        if !(uniform_weight > 0.0 && uniform_weight < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "mixture uniform weight {uniform_weight} must lie in (0,1)"
            )));
        }
        let full = (1u64 << n) - 1;
        let subsets: Vec<u64> = (1..full).collect();
        let lnln = (1.0 / floor).ln().ln();
        let log_const = (0..=n)
            .map(|k| {
                if k == 0 || k == n {
                    return f64::NAN;
                }
                let (a, b) = (k as f64 / 2.0, (n - k) as f64 / 2.0);
                ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b) - std::f64::consts::LN_2 - lnln
            })
            .collect();
        Ok(Self { n, floor, uniform_weight, subsets, log_const })
    }

    /// Density of the mixture relative to `dσ` at the unit vector `x`.
    pub fn density_ratio(&self, x: &[f64]) -> f64 {
        let n = self.n;
        let full = (1usize << n) - 1;
        let mut sq = vec![0.0f64; full + 1];
        for mask in 1..=full {
            let low = mask.trailing_zeros() as usize;
            sq[mask] = sq[mask & (mask - 1)] + x[low] * x[low];
        }
        let per = (1.0 - self.uniform_weight) / self.subsets.len() as f64;
        let mut ratio = self.uniform_weight;
        for &s in &self.subsets {
            let s = s as usize;
            let r_sq = sq[s];
            if r_sq < self.floor * self.floor {
                continue;
            }
            let k = s.count_ones() as usize;
            let rest = sq[full ^ s];
            if rest <= 0.0 {
                continue;
            }
            let expo = (n - k) as f64 / 2.0 - 1.0;
            let ln = self.log_const[k] - 0.5 * k as f64 * r_sq.ln() - expo * rest.ln();
            ratio += per * ln.exp();
        }
        ratio
    }
}

impl PointSource for CoordinateMixture {
    fn dim(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut ShardRng, x: &mut [f64]) -> f64 {
        let n = self.n;
        if rng.random::<f64>() < self.uniform_weight {
            gaussian_direction(rng, x);
        } else {
            let s = self.subsets[rng.random_range(0..self.subsets.len())];
            let r = (rng.random::<f64>() * self.floor.ln()).exp();
            let inside: Vec<usize> = (0..n).filter(|&i| s >> i & 1 == 1).collect();
            let outside: Vec<usize> = (0..n).filter(|&i| s >> i & 1 == 0).collect();
            let mut u = vec![0.0; inside.len()];
            let mut v = vec![0.0; outside.len()];
            gaussian_direction(rng, &mut u);
            gaussian_direction(rng, &mut v);
            let c = (1.0 - r * r).sqrt();
            for (&i, &ui) in inside.iter().zip(&u) {
                x[i] = r * ui;
            }
            for (&i, &vi) in outside.iter().zip(&v) {
                x[i] = c * vi;
            }
        }
        self.density_ratio(x).recip()
    }
}

/// Source for sphere integrals under a configured sampler.
pub enum SphereSource {
    Uniform(UniformSphere),
    Mixture(CoordinateMixture),
}

impl SphereSource {
    pub fn new(n: usize, sampler: &Sampler) -> Result<Self> {
        Ok(match sampler {
            Sampler::Uniform => SphereSource::Uniform(UniformSphere::new(n)?),
            Sampler::CoordinateMixture { floor, uniform_weight } => {
                SphereSource::Mixture(CoordinateMixture::new(n, *floor, *uniform_weight)?)
            }
        })
    }
}

impl PointSource for SphereSource {
    fn dim(&self) -> usize {
        match self {
            SphereSource::Uniform(s) => s.dim(),
            SphereSource::Mixture(s) => s.dim(),
        }
    }

    fn draw(&self, rng: &mut ShardRng, x: &mut [f64]) -> f64 {
        match self {
            SphereSource::Uniform(s) => s.draw(rng, x),
            SphereSource::Mixture(s) => s.draw(rng, x),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shard_streams_differ_and_repeat() {
        let a: Vec<u64> = (0..4).map(|_| shard_rng(7, 0).random()).collect();
        let b: u64 = shard_rng(7, 1).random();
        assert_eq!(a[0], a[1]);
        assert_ne!(a[0], b);
    }

    #[test]
    fn derived_seeds_are_distinct() {
        let mut seen: Vec<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        seen.sort_unstable();
        seen.dedup();
        assert_eq!(seen.len(), 1000);
    }

    #[test]
    fn ball_volumes() {
        assert!((UniformBall::new(1, 1.0).unwrap().volume() - 2.0).abs() < 1e-12);
        assert!((UniformBall::new(2, 2.0).unwrap().volume() - 4.0 * std::f64::consts::PI).abs() < 1e-10);
        let v3 = 4.0 / 3.0 * std::f64::consts::PI * 27.0;
        assert!((UniformBall::new(3, 3.0).unwrap().volume() - v3).abs() < 1e-9);
    }

    #[test]
    fn ball_points_stay_inside() {
        let ball = UniformBall::new(4, 2.5).unwrap();
        let mut rng = shard_rng(3, 0);
        let mut x = [0.0; 4];
        for _ in 0..1000 {
            ball.draw(&mut rng, &mut x);
            assert!(x.iter().map(|v| v * v).sum::<f64>().sqrt() <= 2.5);
        }
    }

    #[test]
    fn mixture_points_are_unit_vectors() {
        let m = CoordinateMixture::new(5, 1e-6, 0.3).unwrap();
        let mut rng = shard_rng(11, 0);
        let mut x = [0.0; 5];
        for _ in 0..2000 {
            let w = m.draw(&mut rng, &mut x);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-12);
            assert!(w > 0.0 && w <= 1.0 / 0.3 + 1e-12);
        }
    }

    #[test]
    fn mixture_config_errors() {
        assert!(CoordinateMixture::new(3, 0.0, 0.3).is_err());
        assert!(CoordinateMixture::new(3, 1e-3, 1.0).is_err());
        assert!(CoordinateMixture::new(20, 1e-3, 0.3).is_err());
    }
}
