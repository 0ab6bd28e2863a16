//! Independent oracles shared by the integration tests: quadrature,
//! brute-force summation, importance sampling, and exact combinatorics.
//! Nothing here goes through the crate's own density or update formulas.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const LN_2PI: f64 = 1.8378770664093453;

/// Adaptive Simpson integration with error control. `min_depth` forces the
/// recursion to subdivide before the error estimate may terminate it, so
/// narrow interior features cannot be missed by coarse initial probes.
pub fn adaptive_simpson_deep(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    min_depth: u32,
) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        min_depth: u32,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || (min_depth == 0 && delta.abs() <= 15.0 * tol) {
            left + right + delta / 15.0
        } else {
            let next_min = min_depth.saturating_sub(1);
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, next_min, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, next_min, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, min_depth, 44)
}

/// Adaptive Simpson integration with error control.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    adaptive_simpson_deep(f, a, b, tol, 4)
}

pub fn normal_pdf(y: f64, mean: f64, variance: f64) -> f64 {
    let z2 = (y - mean) * (y - mean) / variance;
    (-0.5 * (z2 + LN_2PI + variance.ln())).exp()
}

/// Inverse-gamma density in shape/scale form.
pub fn inv_gamma_pdf(v: f64, shape: f64, scale: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let log = shape * scale.ln() - statrs::function::gamma::ln_gamma(shape)
        - (shape + 1.0) * v.ln()
        - scale / v;
    log.exp()
}

/// Joint base-measure density at (mean m, variance v) for parameters
/// (mu, tau, shape, scale): N(m | mu, tau v) * InvGamma(v | shape, scale).
pub fn nig_pdf(m: f64, v: f64, mu: f64, tau: f64, shape: f64, scale: f64) -> f64 {
    normal_pdf(m, mu, tau * v) * inv_gamma_pdf(v, shape, scale)
}

/// Integrates g(m, v) * NIG(m, v) over the whole plane by nested adaptive
/// Simpson: outer over x = ln v, inner over m. `centers` supplies extra
/// locations (besides mu) whose neighbourhoods the inner integral must
/// cover.
/// Integrates g(m, v) * NIG(m, v) where `g` is a product of normal kernels
/// `prod_i N(centers[i] | m, v)` (possibly times a polynomial in m and v).
/// The inner integral over m runs on the intersection of the per-factor
/// windows `centers[i] +/- 13 sqrt(v)` and the prior window
/// `mu +/- 13 sqrt(tau v)`; an empty intersection contributes an
/// exponentially negligible amount and is skipped.
pub fn nig_expectation(
    g: &dyn Fn(f64, f64) -> f64,
    mu: f64,
    tau: f64,
    shape: f64,
    scale: f64,
    centers: &[f64],
) -> f64 {
    const WINDOW: f64 = 13.0;
    let outer = |x: f64| -> f64 {
        let v = x.exp();
        let kernel_sd = v.sqrt();
        let prior_sd = (tau * v).sqrt();
        let mut lo = mu - WINDOW * prior_sd;
        let mut hi = mu + WINDOW * prior_sd;
        for &c in centers {
            lo = lo.max(c - WINDOW * kernel_sd);
            hi = hi.min(c + WINDOW * kernel_sd);
        }
        if !(lo < hi) {
            return 0.0;
        }
        let inner = |m: f64| g(m, v) * nig_pdf(m, v, mu, tau, shape, scale);
        // Jacobian of v = e^x.
        adaptive_simpson_deep(&inner, lo, hi, 3e-13, 4) * v
    };
    let x_lo = scale.ln() - 16.0;
    let x_hi = scale.ln() + 45.0;
    // Split at the variance scales the prior body, each center, and the
    // center spread prefer, so no peak hides between coarse probes.
    let mut cuts = vec![x_lo, x_hi, (scale / (shape + 1.0)).ln()];
    for &c in centers {
        let preferred = ((c - mu) * (c - mu) / (1.0 + tau)).max(1e-12);
        for pad in [-3.0, 0.0, 3.0] {
            cuts.push(preferred.ln() + pad);
        }
    }
    if centers.len() >= 2 {
        let mean = centers.iter().sum::<f64>() / centers.len() as f64;
        let msd = centers.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>()
            / centers.len() as f64;
        for pad in [-3.0, 0.0, 3.0] {
            cuts.push(msd.max(1e-12).ln() + pad);
        }
    }
    let mut cuts: Vec<f64> = cuts
        .into_iter()
        .map(|x| x.clamp(x_lo, x_hi))
        .collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_simpson_deep(&outer, w[0], w[1], 1e-11, 5);
    }
    total
}

/// Quadrature oracle for the one-observation marginal density
/// `int N(y | m, v) dNIG(m, v)`.
pub fn t_marginal_quadrature(y: f64, mu: f64, tau: f64, shape: f64, scale: f64) -> f64 {
    nig_expectation(&|m, v| normal_pdf(y, m, v), mu, tau, shape, scale, &[y])
}

/// Poisson CDF by direct linear summation (valid for rate < ~700).
pub fn poisson_cdf_linear(m: u64, rate: f64) -> f64 {
    let mut pmf = (-rate).exp();
    let mut cdf = pmf;
    for k in 1..=m {
        pmf *= rate / k as f64;
        cdf += pmf;
    }
    cdf
}

/// Poisson quantile by direct linear CDF summation.
pub fn poisson_quantile_linear(p: f64, rate: f64) -> u64 {
    let mut m = 0u64;
    let mut pmf = (-rate).exp();
    let mut cdf = pmf;
    while cdf < p {
        m += 1;
        pmf *= rate / m as f64;
        cdf += pmf;
    }
    m
}

/// Poisson pmf by recurrence.
pub fn poisson_pmf(k: u64, rate: f64) -> f64 {
    let mut pmf = (-rate).exp();
    for j in 1..=k {
        pmf *= rate / j as f64;
    }
    pmf
}

/// Chi-square goodness-of-fit p-value for observed counts against expected
/// probabilities. Bins with expected count below 5 are pooled into their
/// neighbour.
pub fn chi_square_gof_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc_o = 0.0;
    let mut acc_e = 0.0;
    for (&o, &e) in observed.iter().zip(expected) {
        acc_o += o;
        acc_e += e;
        if acc_e >= 5.0 {
            pooled.push((acc_o, acc_e));
            acc_o = 0.0;
            acc_e = 0.0;
        }
    }
    if acc_e > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc_o;
            last.1 += acc_e;
        } else {
            pooled.push((acc_o, acc_e));
        }
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(o, e)| (o - e) * (o - e) / e)
        .sum();
    let df = (pooled.len() - 1).max(1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(statistic)
}

/// Two-sample chi-square homogeneity p-value over matching count vectors.
pub fn chi_square_two_sample_pvalue(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    // Pool sparse bins so every cell has a pooled total of at least 10.
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&x, &y) in a.iter().zip(b) {
        acc.0 += x;
        acc.1 += y;
        if acc.0 + acc.1 >= 10.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.0 + acc.1 > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        }
    }
    let total_a: f64 = pooled.iter().map(|p| p.0).sum();
    let total_b: f64 = pooled.iter().map(|p| p.1).sum();
    let total = total_a + total_b;
    let mut statistic = 0.0;
    for &(x, y) in &pooled {
        let row = x + y;
        let ea = row * total_a / total;
        let eb = row * total_b / total;
        statistic += (x - ea) * (x - ea) / ea + (y - eb) * (y - eb) / eb;
    }
    let df = (pooled.len() - 1).max(1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(statistic)
}

/// Exact distribution of the number of occupied clusters under the
/// exchangeable urn prior with concentration `alpha` and `n` observations,
/// via the unsigned-Stirling recursion c(n, k) = c(n-1, k-1) +
/// (n-1) c(n-1, k).
pub fn urn_k_distribution(n: usize, alpha: f64) -> Vec<f64> {
    let mut c = vec![vec![0.0_f64; n + 1]; n + 1];
    c[1][1] = 1.0;
    for i in 2..=n {
        for k in 1..=i {
            c[i][k] = c[i - 1][k - 1] + (i - 1) as f64 * c[i - 1][k];
        }
    }
    let mut rising = 1.0;
    for j in 0..n {
        rising *= alpha + j as f64;
    }
    (1..=n)
        .map(|k| c[n][k] * alpha.powi(k as i32) / rising)
        .collect()
}

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
