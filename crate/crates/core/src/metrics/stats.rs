//! Streaming moments, power-law fits and the ratio diagnostics.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Count, mean and sum of squared deviations of vector observations.
///
/// Merging uses the pairwise update of Chan et al., so partial accumulators
/// may be combined in any order.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVar {
    count: u64,
    mean: DVector<f64>,
    m2: DVector<f64>,
}

impl MeanVar {
    pub fn new(dim: usize) -> Self {
        Self { count: 0, mean: DVector::zeros(dim), m2: DVector::zeros(dim) }
    }

    pub fn push(&mut self, x: &DVector<f64>) {
        self.count += 1;
        let delta = x - &self.mean;
        self.mean.axpy(1.0 / self.count as f64, &delta, 1.0);
        let delta2 = x - &self.mean;
        self.m2 += delta.component_mul(&delta2);
    }

    pub fn merge(&mut self, other: &MeanVar) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other.clone();
            return;
        }
        let total = (self.count + other.count) as f64;
        let delta = &other.mean - &self.mean;
        let w = other.count as f64 / total;
        let cross = self.count as f64 * other.count as f64 / total;
        self.mean.axpy(w, &delta, 1.0);
        self.m2 += &other.m2 + delta.component_mul(&delta) * cross;
        self.count += other.count;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    /// Unbiased per-coordinate variance; zero with fewer than two points.
    pub fn variance(&self) -> DVector<f64> {
        if self.count < 2 {
            return DVector::zeros(self.mean.len());
        }
        &self.m2 / (self.count - 1) as f64
    }

    /// Standard error of the mean per coordinate.
    pub fn stderr(&self) -> DVector<f64> {
        let n = self.count.max(1) as f64;
        self.variance().map(|v| (v / n).sqrt())
    }
}

/// Result of a least-squares line fit of `ln v` on `ln k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

pub const MIN_FIT_POINTS: usize = 10;

/// Fit `ln value = intercept + slope · ln k` over points with `k` in
/// `[k_lo, k_hi]`.
pub fn fit_rate_slope(ks: &[f64], values: &[f64], k_lo: f64, k_hi: f64) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = ks
        .iter()
        .zip(values)
        .filter(|(k, _)| **k >= k_lo && **k <= k_hi)
        .map(|(&k, &v)| {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InsufficientData(format!("value {v} at k = {k} is not positive")));
            }
            Ok((k.ln(), v.ln()))
        })
        .collect::<Result<_>>()?;
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::InsufficientData(format!(
            "{} points in [{k_lo}, {k_hi}], need at least {MIN_FIT_POINTS}",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all k values coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit { slope, intercept, r_squared, points: pts.len() })
}

/// `max_{k ≤ K} (Σ_{t ≤ k} ρ^{k−t} α_t) / α_k` via the recursion
/// `S_k = ρ S_{k−1} + α_k`.
pub fn geometric_sum_check(rho: f64, alpha: impl Fn(u64) -> f64, horizon: u64) -> f64 {
    let mut s = 0.0;
    let mut worst: f64 = 0.0;
    for k in 1..=horizon {
        let a = alpha(k);
        s = rho * s + a;
        worst = worst.max(s / a);
    }
    worst
}

/// Outcome of the bounded-ratio check: the value at the probe iteration
/// against the median over a reference window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioCheck {
    pub probe: f64,
    pub reference_median: f64,
    pub factor: f64,
}

impl RatioCheck {
    pub fn passes(&self) -> bool {
        self.probe <= self.factor * self.reference_median
    }
}

/// Compare `ratio(k_probe)` with `factor ×` the median of `ratio(k)` over
/// `k ∈ [lo, hi]`. `ks` and `ratios` are parallel slices.
pub fn bounded_ratio(ks: &[f64], ratios: &[f64], lo: f64, hi: f64, probe: f64, factor: f64) -> Result<RatioCheck> {
    let mut window: Vec<f64> = ks
        .iter()
        .zip(ratios)
        .filter(|(k, _)| **k >= lo && **k <= hi)
        .map(|(_, &r)| r)
        .collect();
    if window.is_empty() {
        return Err(Error::InsufficientData(format!("no rows with k in [{lo}, {hi}]")));
    }
    let probe_value = ks
        .iter()
        .zip(ratios)
        .rfind(|(k, _)| **k <= probe)
        .map(|(_, &r)| r)
        .ok_or_else(|| Error::InsufficientData(format!("no row at or before k = {probe}")))?;
    window.sort_by(f64::total_cmp);
    let mid = window.len() / 2;
    let median = if window.len() % 2 == 1 { window[mid] } else { 0.5 * (window[mid - 1] + window[mid]) };
    Ok(RatioCheck { probe: probe_value, reference_median: median, factor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let ks: Vec<f64> = (1..=50).map(|k| k as f64 * 10.0).collect();
        let vs: Vec<f64> = ks.iter().map(|k| 7.0 / k).collect();
        let fit = fit_rate_slope(&ks, &vs, 1.0, 1e9).unwrap();
        assert!((fit.slope + 1.0).abs() < 1e-6);
        assert!(fit.r_squared > 0.999999);
        assert!((fit.intercept - 7f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn constant_has_zero_slope() {
        let ks: Vec<f64> = (1..=20).map(f64::from).collect();
        let fit = fit_rate_slope(&ks, &[3.0; 20], 0.0, 100.0).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn too_few_points() {
        let ks: Vec<f64> = (1..=20).map(f64::from).collect();
        let vs = vec![1.0; 20];
        assert!(matches!(fit_rate_slope(&ks, &vs, 1.0, 9.0), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn geometric_constant_step() {
        let v = geometric_sum_check(0.5, |_| 0.1, 200);
        assert!((v - 2.0).abs() < 1e-12);
        assert_eq!(geometric_sum_check(0.0, |k| 1.0 / k as f64, 100), 1.0);
    }

    /// Direct double sum as the oracle.
    #[test]
    fn geometric_diminishing_step_stabilises() {
        let alpha = |k: u64| 1.0 / (k as f64 + 1.0).powf(0.6);
        let direct = |horizon: u64| {
            (1..=horizon)
                .map(|k| (1..=k).map(|t| 0.5f64.powi((k - t) as i32) * alpha(t)).sum::<f64>() / alpha(k))
                .fold(0.0, f64::max)
        };
        let small = geometric_sum_check(0.5, alpha, 1000);
        assert!((small - direct(1000)).abs() < 1e-12);
        let large = geometric_sum_check(0.5, alpha, 10_000);
        assert!((large - small).abs() <= 0.01 * small);
    }

    #[test]
    fn ratio_check() {
        let ks: Vec<f64> = (1..=100).map(|k| k as f64 * 100.0).collect();
        let rs = vec![1.0; 100];
        let c = bounded_ratio(&ks, &rs, 100.0, 1000.0, 10_000.0, 10.0).unwrap();
        assert_eq!(c.reference_median, 1.0);
        assert!(c.passes());
    }

    #[test]
    fn zero_variance_accumulator() {
        let mut acc = MeanVar::new(2);
        for _ in 0..5 {
            acc.push(&DVector::from_vec(vec![1.5, -2.0]));
        }
        assert_eq!(acc.stderr(), DVector::zeros(2));
        assert_eq!(acc.mean(), &DVector::from_vec(vec![1.5, -2.0]));
    }

    proptest! {
        #[test]
        fn merge_matches_sequential(xs in prop::collection::vec(-100.0f64..100.0, 2..60), split in 0usize..60) {
            let split = split.min(xs.len());
            let mut all = MeanVar::new(1);
            let mut left = MeanVar::new(1);
            let mut right = MeanVar::new(1);
            for (i, &x) in xs.iter().enumerate() {
                let v = DVector::from_element(1, x);
                all.push(&v);
                if i < split { left.push(&v) } else { right.push(&v) }
            }
            let mut rl = right.clone();
            rl.merge(&left);
            left.merge(&right);
            for m in [&left, &rl] {
                prop_assert_eq!(m.count(), all.count());
                prop_assert!((m.mean()[0] - all.mean()[0]).abs() < 1e-9);
                prop_assert!((m.variance()[0] - all.variance()[0]).abs() < 1e-7 * (1.0 + all.variance()[0]));
            }
            // two-pass oracle
            let n = xs.len() as f64;
            let mean = xs.iter().sum::<f64>() / n;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            prop_assert!((all.variance()[0] - var).abs() < 1e-7 * (1.0 + var));
        }
    }
}
