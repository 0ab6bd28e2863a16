//! Posterior-functional summaries over collections of mixtures: density and
//! CDF grids, mode counting, trapezoid moments, pointwise means, and
//! pointwise/simultaneous confidence bands.
//!
//! All operations are pure and safe for concurrent use on shared inputs.

use serde::{Deserialize, Serialize};

use crate::completion::MixtureDensity;
use crate::dist::{kahan_sum, normal_cdf, normal_density};
use crate::error::{Error, Result};

/// A function sampled on a strictly increasing grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() != values.len() {
            return Err(Error::domain(format!(
                "grid/value length mismatch: {} vs {}",
                grid.len(),
                values.len()
            )));
        }
        validate_grid(&grid)?;
        Ok(GridFunction { grid, values })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::domain("grid must be nonempty".to_string()));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::domain(format!(
                "grid must be strictly increasing: {} then {}",
                w[0], w[1]
            )));
        }
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::domain("grid values must be finite".to_string()));
    }
    Ok(())
}

/// `n` equally spaced points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::domain(format!("need finite lo < hi: {lo}, {hi}")));
    }
    if n < 2 {
        return Err(Error::domain("grid needs at least 2 points".to_string()));
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n).map(|i| lo + step * i as f64).collect())
}

/// The default analysis grid: 1000 equally spaced points spanning
/// `[lo, hi]` extended by 15% on each side.
pub fn default_grid(lo: f64, hi: f64) -> Result<Vec<f64>> {
    let pad = 0.15 * (hi - lo);
    linspace(lo - pad, hi + pad, 1000)
}

/// Mixture density evaluated on a grid.
pub fn eval_density(mix: &MixtureDensity, grid: &[f64]) -> Result<GridFunction> {
    validate_grid(grid)?;
    let values = grid
        .iter()
        .map(|&x| {
            mix.weights()
                .iter()
                .zip(mix.components())
                .map(|(w, c)| w * normal_density(x, c.mean, c.variance))
                .sum()
        })
        .collect();
    GridFunction::new(grid.to_vec(), values)
}

/// Mixture distribution function evaluated on a grid. Values are clamped to
/// `[0, 1]` and nondecreasing.
pub fn eval_cdf(mix: &MixtureDensity, grid: &[f64]) -> Result<GridFunction> {
    validate_grid(grid)?;
    let mut values: Vec<f64> = grid
        .iter()
        .map(|&x| {
            mix.weights()
                .iter()
                .zip(mix.components())
                .map(|(w, c)| w * normal_cdf(x, c.mean, c.variance))
                .sum::<f64>()
                .clamp(0.0, 1.0)
        })
        .collect();
    for i in 1..values.len() {
        if values[i] < values[i - 1] {
            values[i] = values[i - 1];
        }
    }
    GridFunction::new(grid.to_vec(), values)
}

/// Locations of strict local maxima of the mixture density on a uniform
/// grid of `resolution` points over `[lo, hi]`; endpoints are excluded.
pub fn count_modes(
    mix: &MixtureDensity,
    data_range: (f64, f64),
    resolution: usize,
) -> Result<Vec<f64>> {
    let (lo, hi) = data_range;
    if !(lo < hi) {
        return Err(Error::domain(format!("need lo < hi: {lo}, {hi}")));
    }
    if resolution < 3 {
        return Err(Error::domain("mode resolution must be >= 3".to_string()));
    }
    let grid = linspace(lo, hi, resolution)?;
    let f = eval_density(mix, &grid)?;
    let v = f.values();
    let mut modes = Vec::new();
    for g in 1..resolution - 1 {
        if v[g] > v[g - 1] && v[g] > v[g + 1] {
            modes.push(grid[g]);
        }
    }
    Ok(modes)
}

/// Trapezoid-rule mean and variance of a density sampled on a grid, both
/// renormalized by the trapezoid mass. `low_mass` flags grids covering less
/// than 0.99 of the mass.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    /// Trapezoid estimate of the total mass on the grid.
    pub mass: f64,
    /// True when `mass < 0.99`: the grid misses too much of the density.
    pub low_mass: bool,
}

fn trapezoid(grid: &[f64], values: impl Fn(usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for i in 1..grid.len() {
        acc += 0.5 * (grid[i] - grid[i - 1]) * (values(i) + values(i - 1));
    }
    acc
}

/// First two central moments of a density grid via trapezoid integration.
pub fn moments_trapezoid(density: &GridFunction) -> Moments {
    let grid = density.grid();
    let f = density.values();
    let mass = trapezoid(grid, |i| f[i]);
    let mean = trapezoid(grid, |i| grid[i] * f[i]) / mass;
    let variance = trapezoid(grid, |i| (grid[i] - mean) * (grid[i] - mean) * f[i]) / mass;
    Moments {
        mean,
        variance,
        mass,
        low_mass: mass < 0.99,
    }
}

/// Exact mean and variance of a normal mixture, in closed form.
pub fn mixture_moments(mix: &MixtureDensity) -> (f64, f64) {
    let mean = kahan_sum(
        mix.weights()
            .iter()
            .zip(mix.components())
            .map(|(w, c)| w * c.mean),
    );
    let second = kahan_sum(
        mix.weights()
            .iter()
            .zip(mix.components())
            .map(|(w, c)| w * (c.variance + c.mean * c.mean)),
    );
    (mean, second - mean * mean)
}

/// Elementwise average of functions sharing a grid.
pub fn pointwise_mean(fns: &[GridFunction]) -> Result<GridFunction> {
    let first = fns
        .first()
        .ok_or_else(|| Error::domain("need at least one function".to_string()))?;
    for f in fns {
        if f.grid() != first.grid() {
            return Err(Error::domain("functions must share a grid".to_string()));
        }
    }
    let t = fns.len() as f64;
    let values = (0..first.len())
        .map(|g| fns.iter().map(|f| f.values()[g]).sum::<f64>() / t)
        .collect();
    GridFunction::new(first.grid().to_vec(), values)
}

/// Band flavour: per-point quantile envelopes, or the envelope of the
/// sample paths closest to the mean in sup norm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BandKind {
    #[serde(rename = "pointwise")]
    Pointwise,
    #[serde(rename = "simultaneous")]
    Simultaneous,
}

/// Lower and upper band edges on a grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    pub grid: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub kind: BandKind,
    pub level: f64,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

/// Confidence bands over a collection of functions sharing a grid.
///
/// Pointwise: per-point empirical quantiles at `(1 - level) / 2` and
/// `1 - (1 - level) / 2`. Simultaneous: rank the functions by sup-distance
/// to the pointwise mean, keep the closest `ceil(level * T)`, and take
/// their pointwise envelope.
pub fn bands(fns: &[GridFunction], level: f64, kind: BandKind) -> Result<BandSet> {
    if fns.len() < 20 {
        return Err(Error::domain(format!(
            "bands need at least 20 functions, got {}",
            fns.len()
        )));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::domain(format!("level must lie in (0, 1): {level}")));
    }
    let mean = pointwise_mean(fns)?;
    let grid = mean.grid().to_vec();
    let (lower, upper) = match kind {
        BandKind::Pointwise => {
            let p_lo = (1.0 - level) / 2.0;
            let p_hi = 1.0 - p_lo;
            let mut lower = Vec::with_capacity(grid.len());
            let mut upper = Vec::with_capacity(grid.len());
            let mut column = vec![0.0; fns.len()];
            for g in 0..grid.len() {
                for (t, f) in fns.iter().enumerate() {
                    column[t] = f.values()[g];
                }
                column.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
                lower.push(quantile(&column, p_lo));
                upper.push(quantile(&column, p_hi));
            }
            (lower, upper)
        }
        BandKind::Simultaneous => {
            let mut ranked: Vec<(f64, usize)> = fns
                .iter()
                .enumerate()
                .map(|(t, f)| {
                    let sup = f
                        .values()
                        .iter()
                        .zip(mean.values())
                        .map(|(v, m)| (v - m).abs())
                        .fold(0.0_f64, f64::max);
                    (sup, t)
                })
                .collect();
            ranked.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let keep = ((level * fns.len() as f64).ceil() as usize).max(1);
            let kept = &ranked[..keep.min(ranked.len())];
            let mut lower = vec![f64::INFINITY; grid.len()];
            let mut upper = vec![f64::NEG_INFINITY; grid.len()];
            for &(_, t) in kept {
                for (g, &v) in fns[t].values().iter().enumerate() {
                    lower[g] = lower[g].min(v);
                    upper[g] = upper[g].max(v);
                }
            }
            (lower, upper)
        }
    };
    Ok(BandSet {
        grid,
        lower,
        upper,
        kind,
        level,
    })
}
