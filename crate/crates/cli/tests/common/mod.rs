//! Independent oracles for the acceptance suite: quadrature over the
//! base-measure posterior, Poisson summation, and chi-square goodness of
//! fit. Deliberately separate from the library's own formulas.

#![allow(dead_code)]

use statrs::distribution::{ChiSquared, ContinuousCDF};

pub const LN_2PI: f64 = 1.8378770664093453;

pub fn normal_pdf(y: f64, mean: f64, variance: f64) -> f64 {
    let z2 = (y - mean) * (y - mean) / variance;
    (-0.5 * (z2 + LN_2PI + variance.ln())).exp()
}

pub fn inv_gamma_pdf(v: f64, shape: f64, scale: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    (shape * scale.ln() - statrs::function::gamma::ln_gamma(shape)
        - (shape + 1.0) * v.ln()
        - scale / v)
        .exp()
}

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
            let next = min_depth.saturating_sub(1);
            recurse(f, a, fa, m, fm, flm, left, tol / 2.0, next, depth - 1)
                + recurse(f, m, fm, b, fb, frm, right, tol / 2.0, next, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    recurse(f, a, fa, b, fb, fm, simpson(a, fa, b, fb, fm), tol, min_depth, 44)
}

/// Integrates g(m, v) * N(m | mu, tau v) * InvGamma(v | shape, scale) where
/// `g` is a product of normal kernels at `centers` (times an optional
/// polynomial). See the core test oracles for the windowing argument.
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
        let inner =
            |m: f64| g(m, v) * normal_pdf(m, mu, tau * v) * inv_gamma_pdf(v, shape, scale);
        adaptive_simpson_deep(&inner, lo, hi, 3e-13, 4) * v
    };
    let x_lo = scale.ln() - 16.0;
    let x_hi = scale.ln() + 45.0;
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
    let mut cuts: Vec<f64> = cuts.into_iter().map(|x| x.clamp(x_lo, x_hi)).collect();
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        total += adaptive_simpson_deep(&outer, w[0], w[1], 1e-11, 5);
    }
    total
}

pub fn poisson_pmf(k: u64, rate: f64) -> f64 {
    let mut pmf = (-rate).exp();
    for j in 1..=k {
        pmf *= rate / j as f64;
    }
    pmf
}

pub fn chi_square_gof_pvalue(observed: &[f64], expected: &[f64]) -> f64 {
    assert_eq!(observed.len(), expected.len());
    let mut pooled: Vec<(f64, f64)> = Vec::new();
    let mut acc = (0.0, 0.0);
    for (&o, &e) in observed.iter().zip(expected) {
        acc.0 += o;
        acc.1 += e;
        if acc.1 >= 5.0 {
            pooled.push(acc);
            acc = (0.0, 0.0);
        }
    }
    if acc.1 > 0.0 {
        if let Some(last) = pooled.last_mut() {
            last.0 += acc.0;
            last.1 += acc.1;
        } else {
            pooled.push(acc);
        }
    }
    let statistic: f64 = pooled.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let df = (pooled.len() - 1).max(1) as f64;
    1.0 - ChiSquared::new(df).unwrap().cdf(statistic)
}

pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical quantile with linear interpolation on a sorted copy.
pub fn quantile(xs: &[f64], p: f64) -> f64 {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}
