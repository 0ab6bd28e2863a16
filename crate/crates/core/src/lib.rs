//! Dirichlet process mixture modelling for univariate data with normal
//! kernels.
//!
//! The crate is organised around one pipeline:
//!
//! 1. [`gibbs`] runs the marginal Gibbs sampler, producing per-iteration
//!    draws of the first `n` kernel parameters together with the base-measure
//!    hyperparameters and the concentration parameter.
//! 2. [`completion`] extends each draw into a full random mixture via a
//!    truncated stick-breaking construction, with the truncation level chosen
//!    so the unassigned stick mass stays below `eps` with probability at
//!    least `1 - ups`.
//! 3. [`analysis`] turns collections of mixtures into density/CDF grids,
//!    mode counts, trapezoid moments, pointwise means, and confidence bands.
//! 4. [`simulation`] samples mixtures from the prior and generates labelled
//!    synthetic data for coverage experiments.
//!
//! [`dist`] holds the shared probability kernels, and [`data`] ships the
//! built-in galaxy velocity dataset used throughout the examples.
//!
//! The base measure over components is normal–inverse-gamma throughout:
//! `V ~ Inv-Gamma(shape, scale)` and `mean | V ~ N(mu, tau * V)`, with the
//! inverse gamma in shape/scale form. All samplers are deterministic
//! functions of their parameters and an explicit random stream.

pub mod analysis;
pub mod completion;
pub mod data;
pub mod dist;
mod error;
pub mod gibbs;
pub mod simulation;

pub use analysis::{BandKind, BandSet, GridFunction, Moments};
pub use completion::{CompletionConfig, MixtureDensity, Provenance};
pub use dist::{Component, NigParams};
pub use error::{Error, Result};
pub use gibbs::{GibbsState, ModelConfig, PosteriorDraw};
