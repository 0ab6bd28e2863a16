//! Stick-breaking completion of posterior draws.
//!
//! Each retained draw fixes the first `n` kernel parameters; the remaining
//! infinite tail of the random mixing distribution is reconstructed by
//! drawing stick weights `v ~ Beta(1, alpha + n)` and atoms i.i.d. from the
//! urn measure (a fresh base-measure draw with probability
//! `alpha / (alpha + n)`, otherwise a uniformly chosen copy of an existing
//! parameter). The truncation level is fixed up front so that the unassigned
//! stick mass exceeds `eps` with probability at most `ups`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dist::{kahan_sum, poisson_quantile, sample_beta, sample_nig, Component, NigParams};
use crate::error::{Error, Result};
use crate::gibbs::{ModelConfig, PosteriorDraw};

/// Truncation controls: stick-mass tolerance `eps` and the probability
/// budget `ups` for exceeding it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompletionConfig {
    pub eps: f64,
    pub ups: f64,
    /// Seed for the deterministic per-draw sub-streams.
    pub seed: u64,
}

impl Default for CompletionConfig {
    fn default() -> Self {
        CompletionConfig {
            eps: 0.01,
            ups: 0.01,
            seed: 0,
        }
    }
}

impl CompletionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eps", self.eps), ("ups", self.ups)] {
            if !v.is_finite() || v <= 0.0 || v >= 1.0 {
                return Err(Error::domain(format!("{name} must lie in (0, 1): {v}")));
            }
        }
        Ok(())
    }
}

/// How a mixture was produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    #[serde(rename = "completed")]
    Completed,
    #[serde(rename = "prior")]
    Prior,
    #[serde(rename = "truncated-marginal")]
    TruncatedMarginal,
}

/// A finite mixture of normal kernels: positive weights summing to one, one
/// component per weight, duplicate components merged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixtureDensity {
    weights: Vec<f64>,
    components: Vec<Component>,
    provenance: Provenance,
}

impl MixtureDensity {
    /// Builds a mixture from weights and components, merging exact-duplicate
    /// components by weight addition and dropping zero-weight entries. The
    /// weights must sum to one within `1e-12`.
    pub fn new(
        weights: Vec<f64>,
        components: Vec<Component>,
        provenance: Provenance,
    ) -> Result<Self> {
        if weights.len() != components.len() {
            return Err(Error::domain(format!(
                "weight/component length mismatch: {} vs {}",
                weights.len(),
                components.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::domain("mixture must have at least one atom".to_string()));
        }
        for &w in &weights {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::domain(format!(
                    "mixture weights must be finite and >= 0: {w}"
                )));
            }
        }
        for c in &components {
            Component::new(c.mean, c.variance)?;
        }
        let mut merged_w: Vec<f64> = Vec::new();
        let mut merged_c: Vec<Component> = Vec::new();
        for (w, c) in weights.into_iter().zip(components) {
            match merged_c.iter().position(|m| *m == c) {
                Some(j) => merged_w[j] += w,
                None => {
                    merged_w.push(w);
                    merged_c.push(c);
                }
            }
        }
        let mut weights = Vec::with_capacity(merged_w.len());
        let mut components = Vec::with_capacity(merged_c.len());
        for (w, c) in merged_w.into_iter().zip(merged_c) {
            if w > 0.0 {
                weights.push(w);
                components.push(c);
            }
        }
        if weights.is_empty() {
            return Err(Error::domain("all mixture weights are zero".to_string()));
        }
        let total = kahan_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::domain(format!(
                "mixture weights must sum to 1 within 1e-12, got {total}"
            )));
        }
        Ok(MixtureDensity {
            weights,
            components,
            provenance,
        })
    }

    /// Builds a mixture from unnormalized nonnegative weights.
    pub fn from_unnormalized(
        weights: Vec<f64>,
        components: Vec<Component>,
        provenance: Provenance,
    ) -> Result<Self> {
        let total = kahan_sum(weights.iter().copied());
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::domain(format!(
                "unnormalized weights must have positive total: {total}"
            )));
        }
        let normalized = weights.into_iter().map(|w| w / total).collect();
        MixtureDensity::new(normalized, components, provenance)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    /// Number of atoms after merging.
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Draws one stick fraction `Beta(1, rate)`, nudged into the open interval
/// (0, 1) when floating-point rounding lands on an endpoint (tiny rates
/// concentrate near 1).
pub(crate) fn sample_stick<R: Rng + ?Sized>(rate: f64, rng: &mut R) -> Result<f64> {
    Ok(sample_beta(1.0, rate, rng)?.clamp(1e-300, 1.0 - f64::EPSILON))
}

/// Truncation level guaranteeing stick mass `1 - eps` with probability at
/// least `1 - ups`: two plus the `1 - ups` quantile of a Poisson with rate
/// `(alpha + n) * (-log eps)`.
pub fn truncation_level(alpha: f64, n: usize, eps: f64, ups: f64) -> Result<usize> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::domain(format!("alpha must be > 0: {alpha}")));
    }
    for (name, v) in [("eps", eps), ("ups", ups)] {
        if !v.is_finite() || v <= 0.0 || v >= 1.0 {
            return Err(Error::domain(format!("{name} must lie in (0, 1): {v}")));
        }
    }
    let rate = (alpha + n as f64) * (-eps.ln());
    Ok(2 + poisson_quantile(1.0 - ups, rate)? as usize)
}

/// Stick-breaking weights from Beta draws: `w_j = v_j * prod_{i<j} (1 - v_i)`
/// for all but the last entry, which is assigned the remainder
/// `1 - sum_{j<M} w_j` so the weights sum to one.
pub fn stick_weights(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(Error::domain("stick draws must be nonempty".to_string()));
    }
    for &vj in v {
        if !(vj > 0.0 && vj < 1.0) {
            return Err(Error::domain(format!(
                "stick draws must lie in (0, 1): {vj}"
            )));
        }
    }
    let m = v.len();
    let mut weights = vec![0.0; m];
    let mut remaining = 1.0;
    for j in 0..m - 1 {
        weights[j] = v[j] * remaining;
        remaining *= 1.0 - v[j];
    }
    weights[m - 1] = 1.0 - kahan_sum(weights[..m - 1].iter().copied());
    Ok(weights)
}

/// Draws one atom from the urn measure of a posterior draw: fresh from the
/// base measure with probability `alpha / (alpha + n)`, otherwise a copy of
/// a uniformly chosen existing parameter.
pub fn draw_atom<R: Rng + ?Sized>(
    draw: &PosteriorDraw,
    g0: &NigParams,
    rng: &mut R,
) -> Result<Component> {
    let n = draw.thetas.len();
    if n == 0 {
        return sample_nig(g0, rng);
    }
    let u = rng.gen::<f64>() * (draw.alpha + n as f64);
    if u <= draw.alpha {
        sample_nig(g0, rng)
    } else {
        let idx = rng.gen_range(0..n);
        Ok(draw.thetas[idx])
    }
}

/// Completes one posterior draw into a full random mixture. The base
/// measure `g0` must carry the draw's own hyperparameters.
pub fn complete<R: Rng + ?Sized>(
    draw: &PosteriorDraw,
    g0: &NigParams,
    config: &CompletionConfig,
    rng: &mut R,
) -> Result<MixtureDensity> {
    config.validate()?;
    g0.validate()?;
    let n = draw.thetas.len();
    let m = truncation_level(draw.alpha, n, config.eps, config.ups)?;
    let rate = draw.alpha + n as f64;
    let mut v = Vec::with_capacity(m);
    for _ in 0..m {
        v.push(sample_stick(rate, rng)?);
    }
    let weights = stick_weights(&v)?;
    let mut atoms = Vec::with_capacity(m);
    for _ in 0..m {
        atoms.push(draw_atom(draw, g0, rng)?);
    }
    MixtureDensity::new(weights, atoms, Provenance::Completed)
}

/// Completes every draw, one deterministic sub-stream per draw, fanned out
/// across workers. Serial and parallel execution produce identical output.
pub fn complete_all(
    draws: &[PosteriorDraw],
    model: &ModelConfig,
    config: &CompletionConfig,
) -> Result<Vec<MixtureDensity>> {
    if draws.is_empty() {
        return Err(Error::domain("no draws to complete".to_string()));
    }
    model.validate()?;
    config.validate()?;
    draws
        .par_iter()
        .enumerate()
        .map(|(t, draw)| {
            let mut rng = sub_stream(config.seed, t);
            let g0 = NigParams::new(draw.mu, draw.tau, model.var_shape, model.var_scale)?;
            complete(draw, &g0, config, &mut rng)
        })
        .collect()
}

/// The deterministic random stream for draw index `t`.
pub fn sub_stream(seed: u64, t: usize) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(t as u64 + 1);
    rng
}

/// The finite mixture a draw implies on its own, before completion: the
/// distinct components weighted by the share of observations allocated to
/// each.
pub fn marginal_mixture(draw: &PosteriorDraw) -> Result<MixtureDensity> {
    if draw.thetas.is_empty() {
        return Err(Error::domain("draw has no components".to_string()));
    }
    let mut components: Vec<Component> = Vec::new();
    let mut counts: Vec<f64> = Vec::new();
    for theta in &draw.thetas {
        match components.iter().position(|c| c == theta) {
            Some(j) => counts[j] += 1.0,
            None => {
                components.push(*theta);
                counts.push(1.0);
            }
        }
    }
    MixtureDensity::from_unnormalized(counts, components, Provenance::TruncatedMarginal)
}
