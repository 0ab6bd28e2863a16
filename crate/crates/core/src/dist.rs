//! Random-variate generation and special-density evaluation shared by the
//! sampler, completion, and simulation machinery.
//!
//! Every sampler here is a pure function of its parameters and the supplied
//! random stream: the same stream state always yields the same output. A
//! single stream must not be shared across concurrent callers; independent
//! streams may run in parallel.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Beta as BetaDist, Distribution, Gamma as GammaDist, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal as NormalDist};
use statrs::function::erf::erfc;
use statrs::function::gamma::{gamma_ur, ln_gamma};

use crate::error::{Error, Result};

/// Parameters of a normal–inverse-gamma base measure.
///
/// The convention is fixed for the whole crate: the component variance is
/// `V ~ Inv-Gamma(shape, scale)` (shape/scale form, so `E[V] =
/// scale / (shape - 1)` for `shape > 1`) and the component mean given `V` is
/// `N(mu, tau * V)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NigParams {
    /// Location of the base measure.
    pub mu: f64,
    /// Prior variance of the mean as a multiple of the component variance.
    pub tau: f64,
    /// Inverse-gamma shape for the component variance.
    pub shape: f64,
    /// Inverse-gamma scale for the component variance.
    pub scale: f64,
}

impl NigParams {
    pub fn new(mu: f64, tau: f64, shape: f64, scale: f64) -> Result<Self> {
        let params = NigParams {
            mu,
            tau,
            shape,
            scale,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mu.is_finite() {
            return Err(Error::domain(format!("NIG mu must be finite: {}", self.mu)));
        }
        for (name, v) in [
            ("tau", self.tau),
            ("shape", self.shape),
            ("scale", self.scale),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!("NIG {name} must be > 0: {v}")));
            }
        }
        Ok(())
    }
}

/// A single normal kernel parameter: mean and variance.
///
/// Serialized as a `[mean, variance]` pair. Components are compared with
/// exact equality; ties arise only by copying, never by coincidence of
/// continuous draws.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Component {
    pub mean: f64,
    pub variance: f64,
}

impl Component {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        let c = Component { mean, variance };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(Error::domain(format!(
                "component mean must be finite: {}",
                self.mean
            )));
        }
        if !self.variance.is_finite() || self.variance <= 0.0 {
            return Err(Error::domain(format!(
                "component variance must be > 0: {}",
                self.variance
            )));
        }
        Ok(())
    }
}

impl From<(f64, f64)> for Component {
    fn from((mean, variance): (f64, f64)) -> Self {
        Component { mean, variance }
    }
}

impl From<Component> for (f64, f64) {
    fn from(c: Component) -> Self {
        (c.mean, c.variance)
    }
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v <= 0.0 {
        return Err(Error::domain(format!("{name} must be finite and > 0: {v}")));
    }
    Ok(())
}

/// Draws a Beta(a, b) variate.
pub fn sample_beta<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    check_positive("beta a", a)?;
    check_positive("beta b", b)?;
    let dist = BetaDist::new(a, b).map_err(|e| Error::domain(format!("beta: {e}")))?;
    Ok(dist.sample(rng))
}

/// Draws a Gamma(shape, rate) variate with mean `shape / rate`.
pub fn sample_gamma<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> Result<f64> {
    check_positive("gamma shape", shape)?;
    check_positive("gamma rate", rate)?;
    let dist =
        GammaDist::new(shape, 1.0 / rate).map_err(|e| Error::domain(format!("gamma: {e}")))?;
    Ok(dist.sample(rng))
}

/// Draws an Inv-Gamma(shape, scale) variate, the reciprocal of a gamma
/// variate with rate `scale`. For `shape > 1` the mean is
/// `scale / (shape - 1)`.
pub fn sample_inverse_gamma<R: Rng + ?Sized>(shape: f64, scale: f64, rng: &mut R) -> Result<f64> {
    Ok(1.0 / sample_gamma(shape, scale, rng)?)
}

/// Draws a component from the base measure: `V ~ Inv-Gamma(shape, scale)`,
/// then `mean ~ N(mu, tau * V)`.
pub fn sample_nig<R: Rng + ?Sized>(params: &NigParams, rng: &mut R) -> Result<Component> {
    params.validate()?;
    let variance = sample_inverse_gamma(params.shape, params.scale, rng)?;
    let z: f64 = StandardNormal.sample(rng);
    let mean = params.mu + (params.tau * variance).sqrt() * z;
    Component::new(mean, variance)
}

/// Draws a normal variate with the given mean and variance.
pub fn sample_normal<R: Rng + ?Sized>(mean: f64, variance: f64, rng: &mut R) -> Result<f64> {
    check_positive("normal variance", variance)?;
    let z: f64 = StandardNormal.sample(rng);
    Ok(mean + variance.sqrt() * z)
}

/// Normal density at `y` for the given mean and variance.
pub fn normal_density(y: f64, mean: f64, variance: f64) -> f64 {
    let z2 = (y - mean) * (y - mean) / variance;
    (-0.5 * z2).exp() / (2.0 * PI * variance).sqrt()
}

/// Normal distribution function at `y` for the given mean and variance.
pub fn normal_cdf(y: f64, mean: f64, variance: f64) -> f64 {
    let z = (y - mean) / variance.sqrt();
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Density of the marginal distribution of one observation under the normal
/// kernel and the NIG base measure: a Student-t with `2 * shape` degrees of
/// freedom, location `mu`, and squared scale `scale * (1 + tau) / shape`.
pub fn marginal_t_density(y: f64, params: &NigParams) -> Result<f64> {
    params.validate()?;
    if !y.is_finite() {
        return Err(Error::domain(format!("t density point must be finite: {y}")));
    }
    let df = 2.0 * params.shape;
    let scale2 = params.scale * (1.0 + params.tau) / params.shape;
    let z2 = (y - params.mu) * (y - params.mu) / scale2;
    let log_norm = ln_gamma(0.5 * (df + 1.0))
        - ln_gamma(0.5 * df)
        - 0.5 * (df.ln() + PI.ln() + scale2.ln());
    Ok((log_norm - 0.5 * (df + 1.0) * (1.0 + z2 / df).ln()).exp())
}

/// Conjugate NIG update for a single observation `y` under the normal
/// kernel: returns the posterior base-measure parameters.
pub fn nig_posterior_single(y: f64, params: &NigParams) -> Result<NigParams> {
    params.validate()?;
    if !y.is_finite() {
        return Err(Error::domain(format!("observation must be finite: {y}")));
    }
    let denom = 1.0 + params.tau;
    let resid = y - params.mu;
    NigParams::new(
        (params.mu + params.tau * y) / denom,
        params.tau / denom,
        params.shape + 0.5,
        params.scale + resid * resid / (2.0 * denom),
    )
}

// Rates above this use a normal-approximation bracket refined with the exact
// regularized-gamma CDF instead of term-by-term summation.
const POISSON_SUMMATION_LIMIT: f64 = 1e4;

fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

fn poisson_cdf_exact(m: u64, rate: f64) -> f64 {
    // P(X <= m) for X ~ Pois(rate), via the upper regularized gamma.
    gamma_ur(m as f64 + 1.0, rate)
}

/// Smallest integer `m` with `P(Pois(rate) <= m) >= p`.
///
/// Uses stable log-space CDF summation, switching to a normal-approximation
/// bracket with exact refinement for large rates.
pub fn poisson_quantile(p: f64, rate: f64) -> Result<u64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::domain(format!(
            "poisson quantile level must lie in [0, 1): {p}"
        )));
    }
    if !rate.is_finite() || rate < 0.0 {
        return Err(Error::domain(format!(
            "poisson rate must be finite and >= 0: {rate}"
        )));
    }
    if rate == 0.0 || p == 0.0 {
        return Ok(0);
    }
    if rate <= POISSON_SUMMATION_LIMIT {
        let log_p = p.ln();
        let log_rate = rate.ln();
        let mut m = 0u64;
        let mut log_pmf = -rate;
        let mut log_cdf = log_pmf;
        // Tail mass beyond rate + 50 sqrt(rate) + 50 is far below any
        // representable p < 1.
        let hard_stop = (rate + 50.0 * rate.sqrt() + 50.0) as u64;
        while log_cdf < log_p && m < hard_stop {
            m += 1;
            log_pmf += log_rate - (m as f64).ln();
            log_cdf = log_add_exp(log_cdf, log_pmf);
        }
        Ok(m)
    } else {
        let z = NormalDist::new(0.0, 1.0).unwrap().inverse_cdf(p);
        // Cornish-Fisher start, then walk to the exact quantile.
        let guess = rate + z * rate.sqrt() + (z * z - 1.0) / 6.0;
        let mut m = guess.max(0.0).floor() as u64;
        while m > 0 && poisson_cdf_exact(m - 1, rate) >= p {
            m -= 1;
        }
        while poisson_cdf_exact(m, rate) < p {
            m += 1;
        }
        Ok(m)
    }
}

/// Draws an index with probability proportional to its weight. Weights need
/// not be normalized; at least one must be strictly positive.
pub fn sample_categorical<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> Result<usize> {
    let mut total = 0.0;
    for (i, &w) in weights.iter().enumerate() {
        if !w.is_finite() || w < 0.0 {
            return Err(Error::domain(format!(
                "categorical weight {i} must be finite and >= 0: {w}"
            )));
        }
        total += w;
    }
    if total <= 0.0 {
        return Err(Error::domain(
            "categorical weights must have positive total mass".to_string(),
        ));
    }
    let u = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = i;
            if u < acc {
                return Ok(i);
            }
        }
    }
    // Rounding pushed u past the accumulated total; return the last
    // positive-weight index.
    Ok(last_positive)
}

/// Compensated (Kahan) summation.
pub(crate) fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let y = v - c;
        let t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
    sum
}
