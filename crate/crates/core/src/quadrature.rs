//! Monte Carlo integration on the sphere and on coordinate balls.
//!
//! All integrals on `S^{n-1}` are against the normalized surface measure
//! `dσ`. Samples are split into shards that run in parallel; shard results
//! are merged in shard order, so an estimate depends only on the seed, the
//! sample count and the shard count, never on thread scheduling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exponents::per_function_exponents;
use crate::multi_index::MultiIndex;
use crate::sampling::{derive_seed, shard_rng, PointSource, Sampler, SphereSource, UniformBall};
use crate::symmetry::Symmetry;

pub const DEFAULT_SAMPLES: u64 = 1_000_000;
pub const MIN_SAMPLES: u64 = 100;

fn default_samples() -> u64 {
    DEFAULT_SAMPLES
}

fn default_shards() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuadConfig {
    #[serde(default = "default_samples")]
    pub samples: u64,
    #[serde(default)]
    pub seed: u64,
    /// Number of independent RNG streams. Part of the reproducibility key.
    #[serde(default = "default_shards")]
    pub shards: usize,
    /// Defaults to uniform sampling.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<Sampler>,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, seed: 0, shards: default_shards(), sampler: None }
    }
}

impl QuadConfig {
    pub fn new(samples: u64, seed: u64) -> Self {
        Self { samples, seed, ..Self::default() }
    }

    pub fn with_sampler(mut self, sampler: Sampler) -> Self {
        self.sampler = Some(sampler);
        self
    }

    pub fn with_shards(mut self, shards: usize) -> Self {
        self.shards = shards;
        self
    }

    /// Same configuration with the seed replaced by an independent child seed.
    pub fn child(&self, index: u64) -> Self {
        Self { seed: derive_seed(self.seed, index), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "samples must be at least {MIN_SAMPLES}, got {}",
                self.samples
            )));
        }
        if self.shards == 0 || self.shards as u64 > self.samples {
            return Err(Error::InvalidConfig(format!(
                "shards must lie in 1..={}, got {}",
                self.samples, self.shards
            )));
        }
        Ok(())
    }

    fn sampler(&self) -> Sampler {
        self.sampler.clone().unwrap_or(Sampler::Uniform)
    }
}

/// A Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// A scalar function on `S^{n-1}`, optionally tagged with its symmetry.
pub trait Integrand: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &[f64]) -> f64;
    fn symmetry(&self) -> Option<&Symmetry> {
        None
    }
}

/// Wraps a closure as an [`Integrand`].
pub struct FnIntegrand<F> {
    n: usize,
    f: F,
    symmetry: Option<Symmetry>,
}

impl<F: Fn(&[f64]) -> f64 + Sync> FnIntegrand<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f, symmetry: None }
    }

    pub fn tagged(sym: Symmetry, f: F) -> Self {
        Self { n: sym.n(), f, symmetry: Some(sym) }
    }
}

impl<F: Fn(&[f64]) -> f64 + Sync> Integrand for FnIntegrand<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn symmetry(&self) -> Option<&Symmetry> {
        self.symmetry.as_ref()
    }
}

/// Running means and co-moments of a vector of outputs.
#[derive(Clone, Debug)]
pub(crate) struct Moments {
    pub count: u64,
    pub mean: Vec<f64>,
    /// Row-major `k × k` sum of centered cross products.
    pub comoment: Vec<f64>,
}

impl Moments {
    fn new(k: usize) -> Self {
        Self { count: 0, mean: vec![0.0; k], comoment: vec![0.0; k * k] }
    }

    fn push(&mut self, y: &[f64], delta: &mut [f64]) {
        let k = y.len();
        self.count += 1;
        let c = self.count as f64;
        for i in 0..k {
            delta[i] = y[i] - self.mean[i];
            self.mean[i] += delta[i] / c;
        }
        for i in 0..k {
            let post = y[i] - self.mean[i];
            for j in 0..k {
                self.comoment[i * k + j] += delta[j] * post;
            }
        }
    }

    fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let k = self.mean.len();
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..k {
            for j in 0..k {
                self.comoment[i * k + j] += other.comoment[i * k + j] + d[i] * d[j] * na * nb / n;
            }
        }
        for i in 0..k {
            self.mean[i] += d[i] * nb / n;
        }
        self.count += other.count;
    }

    /// Sample covariance between outputs `i` and `j`.
    pub fn covariance(&self, i: usize, j: usize) -> f64 {
        if self.count < 2 {
            return 0.0;
        }
        self.comoment[i * self.mean.len() + j] / (self.count - 1) as f64
    }

    pub fn stderr(&self, i: usize) -> f64 {
        (self.covariance(i, i).max(0.0) / self.count as f64).sqrt()
    }
}

/// Draws `cfg.samples` weighted points from `source`, evaluates `k` outputs
/// per point with `eval`, and accumulates `w · output`.
pub(crate) fn accumulate<S, F>(source: &S, cfg: &QuadConfig, k: usize, eval: F) -> Result<Moments>
where
    S: PointSource,
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    cfg.validate()?;
    let shards = cfg.shards as u64;
    let base = cfg.samples / shards;
    let extra = cfg.samples % shards;
    let parts: Vec<Result<Moments>> = (0..shards)
        .into_par_iter()
        .map(|s| {
            let count = base + u64::from(s < extra);
            let offset = s * base + s.min(extra);
            let mut rng = shard_rng(cfg.seed, s);
            let mut x = vec![0.0; source.dim()];
            let mut y = vec![0.0; k];
            let mut scratch = vec![0.0; k];
            let mut m = Moments::new(k);
            for i in 0..count {
                let w = source.draw(&mut rng, &mut x);
                eval(&x, &mut y);
                for v in y.iter_mut() {
                    *v *= w;
                    if !v.is_finite() {
                        return Err(Error::NonFiniteSample { index: offset + i, value: *v });
                    }
                }
                m.push(&y, &mut scratch);
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::new(k);
    for p in parts {
        total.merge(&p?);
    }
    Ok(total)
}

fn estimate(m: &Moments, i: usize, cfg: &QuadConfig) -> Estimate {
    Estimate { value: m.mean[i], stderr: m.stderr(i), samples: m.count, seed: cfg.seed }
}

fn check_dim(f: &dyn Integrand, n: usize) -> Result<()> {
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: f.dim() });
    }
    Ok(())
}

/// `∫_{S^{n-1}} f dσ`.
pub fn integrate_sphere(f: &dyn Integrand, cfg: &QuadConfig) -> Result<Estimate> {
    let source = SphereSource::new(f.dim(), &cfg.sampler())?;
    let m = accumulate(&source, cfg, 1, |x, y| y[0] = f.eval(x))?;
    Ok(estimate(&m, 0, cfg))
}

/// `E[w · f(x)]` under an arbitrary weighted point source.
pub fn integrate_with<S: PointSource>(source: &S, f: &dyn Integrand, cfg: &QuadConfig) -> Result<Estimate> {
    check_dim(f, source.dim())?;
    let m = accumulate(source, cfg, 1, |x, y| y[0] = f.eval(x))?;
    Ok(estimate(&m, 0, cfg))
}

/// `(∫ |f|^p dσ)^{1/p}`, with the standard error propagated from the
/// estimate of `∫ |f|^p`.
pub fn lp_norm_sphere(f: &dyn Integrand, p: f64, cfg: &QuadConfig) -> Result<Estimate> {
    check_exponent(p)?;
    let source = SphereSource::new(f.dim(), &cfg.sampler())?;
    let m = accumulate(&source, cfg, 1, |x, y| y[0] = f.eval(x).abs().powf(p))?;
    Ok(norm_from_moment(estimate(&m, 0, cfg), p))
}

fn check_exponent(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("exponent p = {p} must be finite and >= 1")));
    }
    Ok(())
}

/// Converts an estimate of `∫|f|^p` into one of `‖f‖_p`.
pub fn norm_from_moment(m: Estimate, p: f64) -> Estimate {
    let value = m.value.max(0.0).powf(1.0 / p);
    let stderr = if m.value > 0.0 { value / (p * m.value) * m.stderr } else { 0.0 };
    Estimate { value, stderr, ..m }
}

/// `∫_{B^k} f(y) (1 − |y|²)^{(n−2−k)/2} dy` where `y` fills the coordinates
/// `α` (`k = |α|`) and all other coordinates are zero. For `f` depending only
/// on `x_α` this equals `∫_{S^{n-1}} f dσ` up to the factor `|S^{n-k-1}|/|S^{n-1}|`
/// of the unnormalized measures.
pub fn ball_reduced_integral(f: &dyn Integrand, alpha: &MultiIndex, cfg: &QuadConfig) -> Result<Estimate> {
    let n = f.dim();
    if alpha.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: alpha.n() });
    }
    let k = alpha.weight();
    if k == 0 || k >= n {
        return Err(Error::InvalidMultiIndex(format!("need 1 <= |alpha| <= n-1, got {alpha}")));
    }
    let pos: Vec<usize> = alpha.positions().collect();
    let ball = UniformBall::new(k, 1.0)?;
    let expo = (n as f64 - 2.0 - k as f64) / 2.0;
    let m = accumulate(&ball, cfg, 1, |y, out| {
        let mut x = vec![0.0; n];
        for (&p, &v) in pos.iter().zip(y) {
            x[p] = v;
        }
        let r_sq: f64 = y.iter().map(|v| v * v).sum();
        out[0] = f.eval(&x) * (1.0 - r_sq).max(0.0).powf(expo);
    })?;
    Ok(estimate(&m, 0, cfg))
}

/// The product integral `∫ Π f_J dσ` together with the norms `‖f_J‖_{p_J}`,
/// all estimated from one set of samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointEstimate {
    pub lhs: Estimate,
    pub norms: Vec<Estimate>,
    pub rhs: f64,
    /// Relative standard error of `lhs / rhs`, from the joint sample covariance.
    pub rel_joint_stderr: f64,
}

impl JointEstimate {
    /// `lhs ≤ rhs (1 + 3 · rel_joint_stderr)`.
    pub fn holds(&self) -> bool {
        self.lhs.value <= self.rhs * (1.0 + 3.0 * self.rel_joint_stderr)
    }
}

pub fn joint_estimate(n: usize, fs: &[&dyn Integrand], ps: &[f64], cfg: &QuadConfig) -> Result<JointEstimate> {
    if fs.is_empty() || fs.len() != ps.len() {
        return Err(Error::InvalidParameter(format!("{} functions and {} exponents", fs.len(), ps.len())));
    }
    for (f, &p) in fs.iter().zip(ps) {
        check_dim(*f, n)?;
        check_exponent(p)?;
    }
    let m_count = fs.len();
    let source = SphereSource::new(n, &cfg.sampler())?;
    let moments = accumulate(&source, cfg, m_count + 1, |x, y| {
        let mut prod = 1.0;
        for (j, f) in fs.iter().enumerate() {
            let v = f.eval(x);
            prod *= v;
            y[j + 1] = v.abs().powf(ps[j]);
        }
        y[0] = prod;
    })?;

    let lhs = estimate(&moments, 0, cfg);
    let norms: Vec<Estimate> =
        (0..m_count).map(|j| norm_from_moment(estimate(&moments, j + 1, cfg), ps[j])).collect();
    let rhs: f64 = norms.iter().map(|e| e.value).product();

    // Delta method on log(lhs) − Σ log(μ_J)/p_J.
    let rel_joint_stderr = if moments.mean.iter().all(|&v| v > 0.0) {
        let mut grad = vec![0.0; m_count + 1];
        grad[0] = 1.0 / moments.mean[0];
        for j in 0..m_count {
            grad[j + 1] = -1.0 / (ps[j] * moments.mean[j + 1]);
        }
        let mut var = 0.0;
        for a in 0..=m_count {
            for b in 0..=m_count {
                var += grad[a] * grad[b] * moments.covariance(a, b);
            }
        }
        (var.max(0.0) / moments.count as f64).sqrt()
    } else {
        0.0
    };
    Ok(JointEstimate { lhs, norms, rhs, rel_joint_stderr })
}

/// Result of checking `∫ Π f_J ≤ Π ‖f_J‖_{p_J}` by Monte Carlo.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationRecord {
    pub lhs: Estimate,
    pub norms: Vec<Estimate>,
    pub rhs: f64,
    /// `rhs − lhs`.
    pub margin: f64,
    /// Relative standard error of `lhs / rhs`, from the joint sample covariance.
    pub rel_joint_stderr: f64,
    pub exponents: Vec<f64>,
    pub required_exponents: Vec<usize>,
    /// Functions observed to be even in every coordinate on probe points.
    pub reflection_even: Vec<bool>,
    /// `lhs ≤ rhs (1 + 3 · rel_joint_stderr)`.
    pub pass: bool,
}

/// Number of probe points used for the reflection check.
const REFLECTION_PROBES: u64 = 64;

/// Whether `f(x)` is unchanged under flipping the sign of any single
/// coordinate, tested on random probe points.
pub fn reflection_even(f: &dyn Integrand, seed: u64) -> bool {
    let n = f.dim();
    let mut rng = shard_rng(derive_seed(seed, 0x5EF1), 0);
    let mut x = vec![0.0; n];
    for _ in 0..REFLECTION_PROBES {
        for v in x.iter_mut() {
            *v = rng.random_range(-1.0..1.0);
        }
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        x.iter_mut().for_each(|v| *v /= norm);
        let base = f.eval(&x);
        for i in 0..n {
            x[i] = -x[i];
            let flipped = f.eval(&x);
            x[i] = -x[i];
            if (flipped - base).abs() > 1e-9 * base.abs().max(1.0) {
                return false;
            }
        }
    }
    true
}

/// Monte Carlo check of the symmetric Brascamp–Lieb inequality for one
/// family of nonnegative functions. The product and every `|f_J|^{p_J}` are
/// estimated from the same samples.
pub fn holder_verify(
    fams: &[Symmetry],
    fs: &[&dyn Integrand],
    ps: &[f64],
    cfg: &QuadConfig,
) -> Result<VerificationRecord> {
    if fams.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if fs.len() != fams.len() || ps.len() != fams.len() {
        return Err(Error::InvalidParameter(format!(
            "{} symmetries, {} functions and {} exponents",
            fams.len(),
            fs.len(),
            ps.len()
        )));
    }
    let n = fams[0].n();
    for (j, (f, s)) in fs.iter().zip(fams).enumerate() {
        if let Some(tag) = f.symmetry() {
            if tag.canonical() != s.canonical() {
                return Err(Error::InvalidParameter(format!(
                    "function {} is tagged with {tag:?} but paired with {s:?}",
                    j + 1
                )));
            }
        }
    }
    let required = per_function_exponents(fams)?;
    for (j, (&p, &req)) in ps.iter().zip(&required).enumerate() {
        if p < req as f64 {
            return Err(Error::InvalidParameter(format!(
                "exponent {p} for function {} is below the required {req}",
                j + 1
            )));
        }
    }

    let joint = joint_estimate(n, fs, ps, cfg)?;
    let JointEstimate { lhs, norms, rhs, rel_joint_stderr } = joint;
    let pass = lhs.value <= rhs * (1.0 + 3.0 * rel_joint_stderr);
    Ok(VerificationRecord {
        lhs,
        norms,
        rhs,
        margin: rhs - lhs.value,
        rel_joint_stderr,
        exponents: ps.to_vec(),
        required_exponents: required,
        reflection_even: fs.iter().map(|f| reflection_even(*f, cfg.seed)).collect(),
        pass,
    })
}
