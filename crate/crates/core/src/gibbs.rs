//! Marginal Gibbs sampler for the Dirichlet process mixture of normals.
//!
//! The sampler works on the first `n` kernel parameters only, with the
//! random mixing distribution integrated out. One sweep resamples each
//! `theta_i` from its urn conditional (copy an existing component with
//! weight proportional to its likelihood, or open a fresh one with weight
//! proportional to `alpha` times the marginal density), optionally redraws
//! each distinct component from its conjugate posterior (the remix step),
//! and then updates the hyperparameters `mu`, `tau`, and `alpha`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dist::{
    marginal_t_density, normal_density, sample_beta, sample_categorical, sample_gamma,
    sample_inverse_gamma, sample_nig, sample_normal, Component, NigParams,
};
use crate::error::{Error, Result};

/// Hyperprior constants, fixed-parameter overrides, and chain controls.
///
/// The hyperpriors are `mu ~ N(mu_mean, mu_var)`,
/// `tau ~ Inv-Gamma(tau_shape, tau_scale)`, and
/// `alpha ~ Gamma(alpha_shape, alpha_rate)` (shape/rate form); the base
/// measure's variance prior is `V ~ Inv-Gamma(var_shape, var_scale)`.
/// Defaults reproduce the classic galaxy-data configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Mean of the normal hyperprior on the base-measure location.
    pub mu_mean: f64,
    /// Variance of the normal hyperprior on the base-measure location.
    pub mu_var: f64,
    /// Shape of the inverse-gamma hyperprior on `tau`.
    pub tau_shape: f64,
    /// Scale of the inverse-gamma hyperprior on `tau`.
    pub tau_scale: f64,
    /// Shape of the gamma hyperprior on the concentration parameter.
    pub alpha_shape: f64,
    /// Rate of the gamma hyperprior on the concentration parameter.
    pub alpha_rate: f64,
    /// Shape of the inverse-gamma prior on component variances.
    pub var_shape: f64,
    /// Scale of the inverse-gamma prior on component variances.
    pub var_scale: f64,
    /// Hold the concentration parameter fixed at this value.
    pub fix_alpha: Option<f64>,
    /// Hold the base-measure location fixed at this value.
    pub fix_mu: Option<f64>,
    /// Hold the base-measure spread multiplier fixed at this value.
    pub fix_tau: Option<f64>,
    /// Number of retained draws.
    pub iterations: usize,
    /// Discarded warm-up sweeps.
    pub burnin: usize,
    /// Sweeps between retained draws.
    pub thin: usize,
    /// Seed for the chain's random stream.
    pub seed: u64,
    /// Redraw each distinct component from its conjugate posterior once per
    /// sweep. Leaves the partition unchanged; improves mixing.
    pub remix: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            mu_mean: 20.8,
            mu_var: 20.8,
            tau_shape: 0.5,
            tau_scale: 50.0,
            alpha_shape: 1.0,
            alpha_rate: 2.0,
            var_shape: 2.0,
            var_scale: 1.0,
            fix_alpha: None,
            fix_mu: None,
            fix_tau: None,
            iterations: 100,
            burnin: 2000,
            thin: 150,
            seed: 0,
            remix: true,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.mu_mean.is_finite() {
            return Err(Error::domain("mu_mean must be finite".to_string()));
        }
        for (name, v) in [
            ("mu_var", self.mu_var),
            ("tau_shape", self.tau_shape),
            ("tau_scale", self.tau_scale),
            ("alpha_shape", self.alpha_shape),
            ("alpha_rate", self.alpha_rate),
            ("var_shape", self.var_shape),
            ("var_scale", self.var_scale),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::domain(format!("{name} must be > 0: {v}")));
            }
        }
        if let Some(a) = self.fix_alpha {
            if !a.is_finite() || a <= 0.0 {
                return Err(Error::domain(format!("fix_alpha must be > 0: {a}")));
            }
        }
        if let Some(m) = self.fix_mu {
            if !m.is_finite() {
                return Err(Error::domain(format!("fix_mu must be finite: {m}")));
            }
        }
        if let Some(t) = self.fix_tau {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::domain(format!("fix_tau must be > 0: {t}")));
            }
        }
        if self.thin == 0 {
            return Err(Error::domain("thin must be >= 1".to_string()));
        }
        Ok(())
    }
}

/// One retained iteration of the chain: the per-observation kernel
/// parameters (with ties), the hyperparameters, and the number of distinct
/// components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PosteriorDraw {
    pub thetas: Vec<Component>,
    pub mu: f64,
    pub tau: f64,
    pub alpha: f64,
    pub k: usize,
}

/// Number of distinct components in a draw, using exact equality.
pub fn count_components(draw: &PosteriorDraw) -> usize {
    let mut distinct: Vec<Component> = Vec::new();
    for theta in &draw.thetas {
        if !distinct.contains(theta) {
            distinct.push(*theta);
        }
    }
    distinct.len()
}

#[derive(Clone, Debug)]
struct Cluster {
    component: Component,
    members: Vec<usize>,
}

/// Current state of the chain: data, the partition of observations into
/// clusters sharing a component, and the hyperparameters.
#[derive(Clone, Debug)]
pub struct GibbsState {
    data: Vec<f64>,
    config: ModelConfig,
    clusters: Vec<Cluster>,
    assignment: Vec<usize>,
    mu: f64,
    tau: f64,
    alpha: f64,
}

impl GibbsState {
    /// Initializes the chain: hyperparameters from their hyperpriors (or the
    /// fixed overrides), every observation in its own singleton cluster with
    /// a component drawn from its single-observation conjugate posterior.
    pub fn init<R: Rng + ?Sized>(
        data: Vec<f64>,
        config: ModelConfig,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if data.is_empty() {
            return Err(Error::domain("data must contain at least one value".to_string()));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("data values must be finite: {bad}")));
        }
        let mu = match config.fix_mu {
            Some(m) => m,
            None => sample_normal(config.mu_mean, config.mu_var, rng)?,
        };
        let tau = match config.fix_tau {
            Some(t) => t,
            None => sample_inverse_gamma(config.tau_shape, config.tau_scale, rng)?,
        };
        let alpha = match config.fix_alpha {
            Some(a) => a,
            None => sample_gamma(config.alpha_shape, config.alpha_rate, rng)?,
        };
        let g0 = NigParams::new(mu, tau, config.var_shape, config.var_scale)?;
        let mut clusters = Vec::with_capacity(data.len());
        for (i, &y) in data.iter().enumerate() {
            let posterior = nig_posterior(&g0, std::iter::once(y))?;
            clusters.push(Cluster {
                component: sample_nig(&posterior, rng)?,
                members: vec![i],
            });
        }
        let assignment = (0..data.len()).collect();
        let state = GibbsState {
            data,
            config,
            clusters,
            assignment,
            mu,
            tau,
            alpha,
        };
        state.debug_check();
        Ok(state)
    }

    /// Rebuilds a chain state from a retained draw, grouping equal
    /// components into clusters. Useful for warm restarts and for driving
    /// individual updates from a pinned state.
    pub fn from_draw(data: Vec<f64>, draw: &PosteriorDraw, config: ModelConfig) -> Result<Self> {
        config.validate()?;
        if data.len() != draw.thetas.len() {
            return Err(Error::domain(format!(
                "data length {} does not match draw length {}",
                data.len(),
                draw.thetas.len()
            )));
        }
        if data.is_empty() {
            return Err(Error::domain("data must contain at least one value".to_string()));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("data values must be finite: {bad}")));
        }
        if !draw.tau.is_finite() || draw.tau <= 0.0 || !draw.alpha.is_finite() || draw.alpha <= 0.0
        {
            return Err(Error::domain("draw tau and alpha must be > 0".to_string()));
        }
        let mut clusters: Vec<Cluster> = Vec::new();
        let mut assignment = Vec::with_capacity(data.len());
        for (i, theta) in draw.thetas.iter().enumerate() {
            theta.validate()?;
            match clusters.iter().position(|c| c.component == *theta) {
                Some(j) => {
                    clusters[j].members.push(i);
                    assignment.push(j);
                }
                None => {
                    clusters.push(Cluster {
                        component: *theta,
                        members: vec![i],
                    });
                    assignment.push(clusters.len() - 1);
                }
            }
        }
        let state = GibbsState {
            data,
            config,
            clusters,
            assignment,
            mu: draw.mu,
            tau: draw.tau,
            alpha: draw.alpha,
        };
        state.debug_check();
        Ok(state)
    }

    pub fn n(&self) -> usize {
        self.data.len()
    }

    /// Number of distinct components (occupied clusters).
    pub fn k(&self) -> usize {
        self.clusters.len()
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Base measure assembled from the current hyperparameters.
    pub fn g0(&self) -> NigParams {
        NigParams {
            mu: self.mu,
            tau: self.tau,
            shape: self.config.var_shape,
            scale: self.config.var_scale,
        }
    }

    /// The distinct components with their member observation indices.
    pub fn partition(&self) -> impl Iterator<Item = (&Component, &[usize])> {
        self.clusters
            .iter()
            .map(|c| (&c.component, c.members.as_slice()))
    }

    /// Materializes the current state as a retained draw.
    pub fn draw(&self) -> PosteriorDraw {
        let thetas = self
            .assignment
            .iter()
            .map(|&c| self.clusters[c].component)
            .collect();
        PosteriorDraw {
            thetas,
            mu: self.mu,
            tau: self.tau,
            alpha: self.alpha,
            k: self.clusters.len(),
        }
    }

    fn detach(&mut self, i: usize) {
        let ci = self.assignment[i];
        let members = &mut self.clusters[ci].members;
        let pos = members
            .iter()
            .position(|&j| j == i)
            .expect("observation missing from its cluster");
        members.remove(pos);
        if self.clusters[ci].members.is_empty() {
            self.clusters.remove(ci);
            for a in &mut self.assignment {
                if *a > ci {
                    *a -= 1;
                }
            }
        }
    }

    fn attach_fresh<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        let posterior = nig_posterior(&self.g0(), std::iter::once(self.data[i]))
            .expect("state hyperparameters are valid");
        let component = sample_nig(&posterior, rng).expect("posterior parameters are valid");
        self.clusters.push(Cluster {
            component,
            members: vec![i],
        });
        self.assignment[i] = self.clusters.len() - 1;
    }

    /// Resamples `theta_i` from its urn conditional: join an existing
    /// cluster with weight proportional to its size times the kernel
    /// likelihood, or open a fresh component with weight proportional to
    /// `alpha` times the marginal density of `y_i` under the base measure.
    pub fn update_theta<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        assert!(i < self.data.len(), "observation index out of range");
        self.detach(i);
        let y = self.data[i];
        let q0 = marginal_t_density(y, &self.g0()).expect("state hyperparameters are valid");
        let mut weights: Vec<f64> = self
            .clusters
            .iter()
            .map(|c| c.members.len() as f64 * normal_density(y, c.component.mean, c.component.variance))
            .collect();
        weights.push(self.alpha * q0);
        let choice = sample_categorical(&weights, rng).expect("alpha * q0 is positive");
        if choice == self.clusters.len() {
            self.attach_fresh(i, rng);
        } else {
            self.clusters[choice].members.push(i);
            self.assignment[i] = choice;
        }
        self.debug_check();
    }

    /// Resamples `theta_i` from its prior urn conditional, ignoring the
    /// data. Used for prior partition simulation and sampler validation.
    pub fn update_theta_prior<R: Rng + ?Sized>(&mut self, i: usize, rng: &mut R) {
        assert!(i < self.data.len(), "observation index out of range");
        self.detach(i);
        let mut weights: Vec<f64> = self
            .clusters
            .iter()
            .map(|c| c.members.len() as f64)
            .collect();
        weights.push(self.alpha);
        let choice = sample_categorical(&weights, rng).expect("alpha is positive");
        if choice == self.clusters.len() {
            let component = sample_nig(&self.g0(), rng).expect("state hyperparameters are valid");
            self.clusters.push(Cluster {
                component,
                members: vec![i],
            });
            self.assignment[i] = self.clusters.len() - 1;
        } else {
            self.clusters[choice].members.push(i);
            self.assignment[i] = choice;
        }
        self.debug_check();
    }

    /// Redraws each distinct component from its conjugate posterior given
    /// the observations currently allocated to it. The partition is left
    /// unchanged.
    pub fn remix_clusters<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let g0 = self.g0();
        for cluster in &mut self.clusters {
            let ys = cluster.members.iter().map(|&j| self.data[j]);
            let posterior = nig_posterior(&g0, ys).expect("state hyperparameters are valid");
            cluster.component =
                sample_nig(&posterior, rng).expect("posterior parameters are valid");
        }
        self.debug_check();
    }

    /// Conjugate update of the base-measure location from the distinct
    /// components. Skipped when the location is fixed.
    pub fn update_mu<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.config.fix_mu.is_some() {
            return;
        }
        let mut precision = 1.0 / self.config.mu_var;
        let mut weighted = self.config.mu_mean / self.config.mu_var;
        for cluster in &self.clusters {
            let w = 1.0 / (self.tau * cluster.component.variance);
            precision += w;
            weighted += cluster.component.mean * w;
        }
        self.mu = sample_normal(weighted / precision, 1.0 / precision, rng)
            .expect("posterior precision is positive");
    }

    /// Conjugate update of the base-measure spread multiplier from the
    /// distinct components. Skipped when fixed.
    pub fn update_tau<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.config.fix_tau.is_some() {
            return;
        }
        let k = self.clusters.len() as f64;
        let mut ss = 0.0;
        for cluster in &self.clusters {
            let d = cluster.component.mean - self.mu;
            ss += d * d / (2.0 * cluster.component.variance);
        }
        self.tau = sample_inverse_gamma(
            self.config.tau_shape + 0.5 * k,
            self.config.tau_scale + ss,
            rng,
        )
        .expect("posterior parameters are positive");
    }

    /// Auxiliary-variable update of the concentration parameter: draw
    /// `x ~ Beta(alpha + 1, n)`, then `alpha` from a two-component gamma
    /// mixture whose stationary conditional is `p(alpha | k, n)`. Skipped
    /// when fixed.
    pub fn update_alpha<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        if self.config.fix_alpha.is_some() {
            return;
        }
        let n = self.data.len() as f64;
        let k = self.clusters.len() as f64;
        let c = self.config.alpha_shape;
        let rate0 = self.config.alpha_rate;
        let x = sample_beta(self.alpha + 1.0, n, rng).expect("alpha and n are positive");
        let rate = rate0 - x.ln();
        let odds = (c + k - 1.0) / (n * rate);
        let pi = odds / (1.0 + odds);
        let shape = if rng.gen::<f64>() < pi { c + k } else { c + k - 1.0 };
        self.alpha = sample_gamma(shape, rate, rng).expect("posterior parameters are positive");
    }

    /// One full sweep: every `theta_i` in order, the optional remix step,
    /// then the hyperparameter updates.
    pub fn sweep<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for i in 0..self.data.len() {
            self.update_theta(i, rng);
        }
        if self.config.remix {
            self.remix_clusters(rng);
        }
        self.update_mu(rng);
        self.update_tau(rng);
        self.update_alpha(rng);
    }

    fn debug_check(&self) {
        #[cfg(debug_assertions)]
        {
            let n = self.data.len();
            assert_eq!(self.assignment.len(), n);
            assert!(!self.clusters.is_empty() || n == 0);
            let mut seen = vec![false; n];
            for (ci, cluster) in self.clusters.iter().enumerate() {
                assert!(!cluster.members.is_empty(), "empty cluster {ci}");
                for &j in &cluster.members {
                    assert!(j < n);
                    assert!(!seen[j], "observation {j} in two clusters");
                    seen[j] = true;
                    assert_eq!(self.assignment[j], ci);
                }
            }
            assert!(seen.iter().all(|&s| s), "partition does not cover the data");
        }
    }
}

/// Conjugate NIG posterior given a sequence of observations, computed by
/// folding the single-observation update.
fn nig_posterior(g0: &NigParams, ys: impl Iterator<Item = f64>) -> Result<NigParams> {
    let mut params = *g0;
    for y in ys {
        params = crate::dist::nig_posterior_single(y, &params)?;
    }
    Ok(params)
}

/// Runs the chain: `burnin` discarded sweeps, then `iterations * thin`
/// sweeps retaining every `thin`-th state. Fully reproducible from the
/// config seed.
pub fn run_chain(data: &[f64], config: &ModelConfig) -> Result<Vec<PosteriorDraw>> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let mut state = GibbsState::init(data.to_vec(), config.clone(), &mut rng)?;
    for _ in 0..config.burnin {
        state.sweep(&mut rng);
    }
    let mut draws = Vec::with_capacity(config.iterations);
    for _ in 0..config.iterations {
        for _ in 0..config.thin {
            state.sweep(&mut rng);
        }
        draws.push(state.draw());
    }
    Ok(draws)
}
