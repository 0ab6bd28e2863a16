//! Implementations of the four subcommands.

use std::fs;
use std::path::Path;
use std::time::Instant;

use dpmix::analysis::{self, BandKind, GridFunction};
use dpmix::completion::{self, marginal_mixture, CompletionConfig, MixtureDensity};
use dpmix::data;
use dpmix::gibbs::{run_chain, ModelConfig};
use serde::Serialize;

use crate::format::{self, read_draws_file, read_mixtures_file};
use crate::{CliError, What};

fn write_output(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

/// Full-precision decimal for CSV: 17 significant digits.
fn csv_num(x: f64) -> String {
    format!("{x:.16e}")
}

pub struct FitOptions {
    pub iters: usize,
    pub burnin: usize,
    pub thin: usize,
    pub seed: u64,
    pub fix_alpha: Option<f64>,
    pub fix_mu: Option<f64>,
    pub fix_tau: Option<f64>,
}

pub fn fit(input: &str, options: FitOptions, out: Option<&Path>) -> Result<(), CliError> {
    let data = if input == "galaxies" {
        data::galaxies()
    } else {
        format::read_data(Path::new(input))?
    };
    let config = ModelConfig {
        iterations: options.iters,
        burnin: options.burnin,
        thin: options.thin,
        seed: options.seed,
        fix_alpha: options.fix_alpha,
        fix_mu: options.fix_mu,
        fix_tau: options.fix_tau,
        ..ModelConfig::default()
    };
    let draws = run_chain(&data, &config)?;
    write_output(out, &format::render_draws_file(&config, data.len(), &draws))
}

pub fn complete(
    draws_path: &Path,
    eps: f64,
    ups: f64,
    seed: u64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let file = read_draws_file(draws_path)?;
    if file.draws.is_empty() {
        return Err(CliError::usage(format!(
            "{}: no draws to complete",
            draws_path.display()
        )));
    }
    let config = CompletionConfig { eps, ups, seed };
    let mixtures = completion::complete_all(&file.draws, &file.header.model, &config)?;
    write_output(
        out,
        &format::render_mixtures_file(&file.header, &config, &mixtures),
    )
}

/// Loads the mixtures a file describes: a mixtures file directly, or the
/// per-draw occupancy-weighted marginal mixtures of a draws file.
fn load_mixtures(path: &Path) -> Result<Vec<MixtureDensity>, CliError> {
    match format::peek_kind(path)?.as_str() {
        "mixtures" => read_mixtures_file(path),
        "draws" => read_draws_file(path)?
            .draws
            .iter()
            .map(|d| marginal_mixture(d).map_err(CliError::from))
            .collect(),
        other => Err(CliError::usage(format!(
            "{}: unsupported file kind {other:?}",
            path.display()
        ))),
    }
}

pub struct GridOptions {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub n: Option<usize>,
}

/// Span of the means of non-negligible atoms (weight at least 1%) across
/// all samples: the stand-in for the data range when only mixtures are
/// available. Stray low-weight atoms from the completed tail would
/// otherwise stretch the range far beyond the data.
fn atom_mean_span(mixtures: &[MixtureDensity]) -> Result<(f64, f64), CliError> {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for mix in mixtures {
        for (w, c) in mix.weights().iter().zip(mix.components()) {
            if *w >= 0.01 {
                lo = lo.min(c.mean);
                hi = hi.max(c.mean);
            }
        }
    }
    if lo > hi {
        // No atom reaches the weight cutoff; fall back to the full span.
        for mix in mixtures {
            for c in mix.components() {
                lo = lo.min(c.mean);
                hi = hi.max(c.mean);
            }
        }
    }
    if !(lo < hi) {
        // Degenerate single-atom case: pad by the atom scale.
        let sd = mixtures[0].components()[0].variance.sqrt();
        lo -= 3.0 * sd;
        hi += 3.0 * sd;
    }
    Ok((lo, hi))
}

pub fn analyze(
    file: &Path,
    what: What,
    grid: GridOptions,
    level: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mixtures = load_mixtures(file)?;
    if mixtures.is_empty() {
        return Err(CliError::usage(format!("{}: no samples", file.display())));
    }
    let (span_lo, span_hi) = atom_mean_span(&mixtures)?;
    let pad = 0.15 * (span_hi - span_lo);

    let content = match what {
        What::Density | What::Cdf => {
            let lo = grid.lo.unwrap_or(span_lo - pad);
            let hi = grid.hi.unwrap_or(span_hi + pad);
            let points = analysis::linspace(lo, hi, grid.n.unwrap_or(1000))?;
            let mut csv = String::from("sample_id,x,value\n");
            for (t, mix) in mixtures.iter().enumerate() {
                let f = match what {
                    What::Density => analysis::eval_density(mix, &points)?,
                    _ => analysis::eval_cdf(mix, &points)?,
                };
                for (x, v) in f.grid().iter().zip(f.values()) {
                    csv.push_str(&format!("{t},{},{}\n", csv_num(*x), csv_num(*v)));
                }
            }
            csv
        }
        What::Moments => {
            let lo = grid.lo.unwrap_or(span_lo - pad);
            let hi = grid.hi.unwrap_or(span_hi + pad);
            let points = analysis::linspace(lo, hi, grid.n.unwrap_or(1000))?;
            let mut csv = String::from("sample_id,mean,variance,mass\n");
            let mut low_mass = 0usize;
            for (t, mix) in mixtures.iter().enumerate() {
                let m = analysis::moments_trapezoid(&analysis::eval_density(mix, &points)?);
                if m.low_mass {
                    low_mass += 1;
                }
                csv.push_str(&format!(
                    "{t},{},{},{}\n",
                    csv_num(m.mean),
                    csv_num(m.variance),
                    csv_num(m.mass)
                ));
            }
            if low_mass > 0 {
                eprintln!(
                    "warning: {low_mass} of {} samples carry less than 0.99 \
                     of their mass on the grid; consider --grid-lo/--grid-hi",
                    mixtures.len()
                );
            }
            csv
        }
        What::Modes => {
            let lo = grid.lo.unwrap_or(span_lo);
            let hi = grid.hi.unwrap_or(span_hi);
            let resolution = grid.n.unwrap_or(512);
            let mut locations = Vec::with_capacity(mixtures.len());
            let mut counts = Vec::with_capacity(mixtures.len());
            for mix in &mixtures {
                let modes = analysis::count_modes(mix, (lo, hi), resolution)?;
                counts.push(modes.len());
                locations.push(modes);
            }
            let mut histogram: Vec<(usize, usize)> = Vec::new();
            for &c in &counts {
                match histogram.iter_mut().find(|(k, _)| *k == c) {
                    Some((_, f)) => *f += 1,
                    None => histogram.push((c, 1)),
                }
            }
            histogram.sort_unstable();
            #[derive(Serialize)]
            struct ModesReport {
                what: &'static str,
                lo: f64,
                hi: f64,
                resolution: usize,
                counts: Vec<usize>,
                histogram: Vec<(usize, usize)>,
                locations: Vec<Vec<f64>>,
            }
            let mut json = serde_json::to_string(&ModesReport {
                what: "modes",
                lo,
                hi,
                resolution,
                counts,
                histogram,
                locations,
            })
            .expect("report serializes");
            json.push('\n');
            json
        }
        What::Bands => {
            let lo = grid.lo.unwrap_or(span_lo - pad);
            let hi = grid.hi.unwrap_or(span_hi + pad);
            let points = analysis::linspace(lo, hi, grid.n.unwrap_or(1000))?;
            let cdfs: Vec<GridFunction> = mixtures
                .iter()
                .map(|m| analysis::eval_cdf(m, &points))
                .collect::<Result<_, _>>()?;
            let pointwise = analysis::bands(&cdfs, level, BandKind::Pointwise)?;
            let simultaneous = analysis::bands(&cdfs, level, BandKind::Simultaneous)?;
            let mean = analysis::pointwise_mean(&cdfs)?;
            #[derive(Serialize)]
            struct Edges {
                lower: Vec<f64>,
                upper: Vec<f64>,
            }
            #[derive(Serialize)]
            struct BandsReport {
                what: &'static str,
                target: &'static str,
                level: f64,
                grid: Vec<f64>,
                mean: Vec<f64>,
                pointwise: Edges,
                simultaneous: Edges,
            }
            let mut json = serde_json::to_string(&BandsReport {
                what: "bands",
                target: "cdf",
                level,
                grid: points,
                mean: mean.values().to_vec(),
                pointwise: Edges {
                    lower: pointwise.lower,
                    upper: pointwise.upper,
                },
                simultaneous: Edges {
                    lower: simultaneous.lower,
                    upper: simultaneous.upper,
                },
            })
            .expect("report serializes");
            json.push('\n');
            json
        }
    };
    write_output(out, &content)
}

#[derive(Serialize)]
struct BenchEntry {
    n: usize,
    iters: usize,
    reps: usize,
    fit_total_ms_mean: f64,
    fit_total_ms_min: f64,
    fit_total_ms_max: f64,
    fit_per_iter_ms: f64,
    completion_total_ms_mean: f64,
    completion_total_ms_min: f64,
    completion_total_ms_max: f64,
    completion_per_draw_ms: f64,
}

#[derive(Serialize)]
struct BenchReport {
    results: Vec<BenchEntry>,
}

pub fn bench(ns: &[usize], iters: usize, reps: usize, out: Option<&Path>) -> Result<(), CliError> {
    let mut results = Vec::new();
    if reps > 0 && iters > 0 {
        for &n in ns {
            // Synthetic bimodal data, seeded for repeatability. Benchmarks
            // run without burn-in or thinning.
            let data: Vec<f64> = (0..n)
                .map(|i| {
                    let x = (i as f64 * 0.7368).sin() * 4.0;
                    20.8 + if i % 2 == 0 { x } else { x - 6.0 }
                })
                .collect();
            let config = ModelConfig {
                iterations: iters,
                burnin: 0,
                thin: 1,
                seed: 42,
                ..ModelConfig::default()
            };
            let completion_config = CompletionConfig::default();
            let mut fit_ms = Vec::with_capacity(reps);
            let mut completion_ms = Vec::with_capacity(reps);
            for _ in 0..reps {
                let start = Instant::now();
                let draws = run_chain(&data, &config)?;
                fit_ms.push(start.elapsed().as_secs_f64() * 1e3);

                // Serial completion.
                let start = Instant::now();
                for (t, draw) in draws.iter().enumerate() {
                    let mut rng = completion::sub_stream(completion_config.seed, t);
                    let g0 = dpmix::NigParams::new(
                        draw.mu,
                        draw.tau,
                        config.var_shape,
                        config.var_scale,
                    )?;
                    completion::complete(draw, &g0, &completion_config, &mut rng)?;
                }
                completion_ms.push(start.elapsed().as_secs_f64() * 1e3);
            }
            let stats = |xs: &[f64]| -> (f64, f64, f64) {
                let mean = xs.iter().sum::<f64>() / xs.len() as f64;
                let min = xs.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (mean, min, max)
            };
            let (fit_mean, fit_min, fit_max) = stats(&fit_ms);
            let (c_mean, c_min, c_max) = stats(&completion_ms);
            results.push(BenchEntry {
                n,
                iters,
                reps,
                fit_total_ms_mean: fit_mean,
                fit_total_ms_min: fit_min,
                fit_total_ms_max: fit_max,
                fit_per_iter_ms: fit_mean / iters as f64,
                completion_total_ms_mean: c_mean,
                completion_total_ms_min: c_min,
                completion_total_ms_max: c_max,
                completion_per_draw_ms: c_mean / iters as f64,
            });
        }
    }
    let mut json = serde_json::to_string_pretty(&BenchReport { results })
        .expect("report serializes");
    json.push('\n');
    write_output(out, &json)
}
