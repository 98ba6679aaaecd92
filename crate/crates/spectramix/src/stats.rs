//! Hypothesis-test primitives: Kolmogorov-Smirnov distances, Pearson
//! correlation, chi-square independence on binned joints, histograms.

use crate::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance (n-1 denominator).
pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// One-sample KS statistic sup_x |F_n(x) - F(x)| against a continuous
/// reference CDF. For step references (empirical vs empirical) use
/// [`ks_two_sample`], which handles atoms exactly.
pub fn ks_distance(samples: &[f64], reference_cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "ks_distance needs >= 2 samples, got {}",
            samples.len()
        )));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.total_cmp(b));
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, x) in xs.iter().enumerate() {
        let f = reference_cdf(*x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

/// Two-sample KS statistic; exact for tied values (identical samples give 0).
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientData("ks_two_sample needs >= 2 samples each".into()));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(|u, v| u.total_cmp(v));
    ys.sort_by(|u, v| u.total_cmp(v));
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("length mismatch {} vs {}", x.len(), y.len())));
    }
    if x.len() < 3 {
        return Err(Error::InsufficientData("pearson needs >= 3 pairs".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Contract("zero variance in pearson input".into()));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Chi-square independence statistic on a `bins` x `bins` joint histogram with
/// per-variable equiprobable (quantile) bin edges. df = (bins-1)^2.
pub fn chi2_pair_independence(x: &[f64], y: &[f64], bins: usize) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    let edges = |v: &[f64]| -> Vec<f64> {
        let mut s = v.to_vec();
        s.sort_by(|a, b| a.total_cmp(b));
        (1..bins).map(|k| s[k * n / bins]).collect()
    };
    let (ex, ey) = (edges(x), edges(y));
    let bin_of = |edges: &[f64], v: f64| edges.iter().take_while(|e| v >= **e).count();
    let mut counts = vec![0usize; bins * bins];
    for (a, b) in x.iter().zip(y) {
        counts[bin_of(&ex, *a) * bins + bin_of(&ey, *b)] += 1;
    }
    let row: Vec<f64> = (0..bins)
        .map(|i| (0..bins).map(|j| counts[i * bins + j] as f64).sum())
        .collect();
    let col: Vec<f64> = (0..bins)
        .map(|j| (0..bins).map(|i| counts[i * bins + j] as f64).sum())
        .collect();
    let mut stat = 0.0;
    for i in 0..bins {
        for j in 0..bins {
            let e = row[i] * col[j] / n as f64;
            if e > 0.0 {
                let d = counts[i * bins + j] as f64 - e;
                stat += d * d / e;
            }
        }
    }
    stat
}

/// Upper chi-square quantile by the Wilson-Hilferty cube approximation;
/// `z` is the standard-normal quantile of the target tail (e.g. 3.0902 for 0.999).
pub fn chi2_critical(df: usize, z: f64) -> f64 {
    let v = df as f64;
    let a = 2.0 / (9.0 * v);
    v * (1.0 - a + z * a.sqrt()).powi(3)
}

/// Equal-width histogram normalized to unit area over [lo, hi); samples
/// outside the range are dropped.
pub fn histogram_density(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Vec<(f64, f64, f64)> {
    assert!(hi > lo && bins > 0);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut kept = 0usize;
    for &s in samples {
        if s >= lo && s < hi {
            counts[((s - lo) / width) as usize] += 1;
            kept += 1;
        }
    }
    let norm = if kept > 0 { 1.0 / (kept as f64 * width) } else { 0.0 };
    counts
        .iter()
        .enumerate()
        .map(|(k, c)| (lo + k as f64 * width, lo + (k + 1) as f64 * width, *c as f64 * norm))
        .collect()
}
