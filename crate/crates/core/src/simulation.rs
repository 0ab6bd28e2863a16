//! Synthetic-data machinery: mixtures sampled from the prior via
//! stick-breaking, allocation-labelled data generation, and reconstruction
//! of the truncated marginal mixture a labelled sample implies.

use rand::Rng;

use crate::completion::{sample_stick, stick_weights, truncation_level, MixtureDensity, Provenance};
use crate::dist::{sample_categorical, sample_gamma, sample_inverse_gamma, sample_nig, sample_normal, NigParams};
use crate::error::{Error, Result};
use crate::gibbs::ModelConfig;

/// Samples a mixture from the prior: sticks `Beta(1, alpha)`, atoms i.i.d.
/// from the base measure, truncated per `(eps, ups)`.
pub fn sample_prior_mixture<R: Rng + ?Sized>(
    alpha: f64,
    g0: &NigParams,
    eps: f64,
    ups: f64,
    rng: &mut R,
) -> Result<MixtureDensity> {
    g0.validate()?;
    let m = truncation_level(alpha, 0, eps, ups)?;
    let mut v = Vec::with_capacity(m);
    for _ in 0..m {
        v.push(sample_stick(alpha, rng)?);
    }
    let weights = stick_weights(&v)?;
    let mut atoms = Vec::with_capacity(m);
    for _ in 0..m {
        atoms.push(sample_nig(g0, rng)?);
    }
    MixtureDensity::new(weights, atoms, Provenance::Prior)
}

/// A mixture drawn from the full prior of a model configuration, together
/// with the hyperparameter values that produced it.
#[derive(Clone, Debug)]
pub struct PriorTruth {
    pub mixture: MixtureDensity,
    pub alpha: f64,
    pub mu: f64,
    pub tau: f64,
    pub g0: NigParams,
}

/// Draws the hyperparameters from their hyperpriors (or takes the fixed
/// overrides), then samples a prior mixture under the resulting base
/// measure.
pub fn sample_prior_truth<R: Rng + ?Sized>(
    model: &ModelConfig,
    eps: f64,
    ups: f64,
    rng: &mut R,
) -> Result<PriorTruth> {
    model.validate()?;
    let mu = match model.fix_mu {
        Some(m) => m,
        None => sample_normal(model.mu_mean, model.mu_var, rng)?,
    };
    let tau = match model.fix_tau {
        Some(t) => t,
        None => sample_inverse_gamma(model.tau_shape, model.tau_scale, rng)?,
    };
    let alpha = match model.fix_alpha {
        Some(a) => a,
        None => sample_gamma(model.alpha_shape, model.alpha_rate, rng)?,
    };
    let g0 = NigParams::new(mu, tau, model.var_shape, model.var_scale)?;
    let mixture = sample_prior_mixture(alpha, &g0, eps, ups, rng)?;
    Ok(PriorTruth {
        mixture,
        alpha,
        mu,
        tau,
        g0,
    })
}

/// Generates `n` observations from a mixture, recording which component
/// generated each: labels are categorical in the weights, observations
/// normal given their labelled component.
pub fn generate_labeled_data<R: Rng + ?Sized>(
    mix: &MixtureDensity,
    n: usize,
    rng: &mut R,
) -> Result<(Vec<f64>, Vec<usize>)> {
    if n == 0 {
        return Err(Error::domain("sample size must be positive".to_string()));
    }
    let mut ys = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = sample_categorical(mix.weights(), rng)?;
        let c = mix.components()[label];
        ys.push(sample_normal(c.mean, c.variance, rng)?);
        labels.push(label);
    }
    Ok((ys, labels))
}

/// The truncated marginal mixture implied by a labelled sample: only the
/// components that generated an observation, weighted by occupancy.
pub fn truncated_marginal(mix: &MixtureDensity, labels: &[usize]) -> Result<MixtureDensity> {
    if labels.is_empty() {
        return Err(Error::domain("labels must be nonempty".to_string()));
    }
    let mut counts = vec![0.0; mix.len()];
    for &label in labels {
        if label >= mix.len() {
            return Err(Error::domain(format!(
                "label {label} out of range for {}-atom mixture",
                mix.len()
            )));
        }
        counts[label] += 1.0;
    }
    let mut weights = Vec::new();
    let mut components = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        if c > 0.0 {
            weights.push(c);
            components.push(mix.components()[i]);
        }
    }
    MixtureDensity::from_unnormalized(weights, components, Provenance::TruncatedMarginal)
}
