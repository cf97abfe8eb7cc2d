//! Exponential growth model `C(t) = C0 * exp(lambda * t)` fitted by ordinary
//! least squares on `ln C`.
//!
//! Intervals for `lambda` come from two routes: the analytic t-interval of
//! the OLS slope, and a case-resampling percentile bootstrap. The bootstrap
//! seeds one ChaCha stream per resample index, so its output does not depend
//! on thread count or scheduling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::timeline::{frontier_bounds_by_year, TimelineDataset};
use crate::{Error, Result};

/// Growth rate quoted in the literature for the 2017-2026 frontier, per year.
pub const PUBLISHED_LAMBDA: f64 = 0.59;
/// Published analytic 95% interval around [`PUBLISHED_LAMBDA`].
pub const PUBLISHED_ANALYTIC_CI: (f64, f64) = (0.51, 0.67);
/// Published bootstrap 95% interval around [`PUBLISHED_LAMBDA`].
pub const PUBLISHED_BOOTSTRAP_CI: (f64, f64) = (0.48, 0.71);

pub const CONFIDENCE_LEVEL: f64 = 0.95;
pub const MIN_RESAMPLES: usize = 100;
const MAX_REDRAWS: usize = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    /// Growth rate per year.
    pub lambda: f64,
    /// Fitted value at `t = 0` (the base year), in tokens.
    pub c0: f64,
    pub base_year: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub slope_std_error: f64,
    /// `12 ln 2 / lambda`; absent unless `lambda > 0`.
    pub doubling_months: Option<f64>,
    /// `exp(lambda) - 1`.
    pub cagr_continuous: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl GrowthFit {
    pub fn predict(&self, t_years: f64) -> f64 {
        self.c0 * (self.lambda * (t_years - self.base_year)).exp()
    }
}

struct Ols {
    slope: f64,
    intercept: f64,
    sxx: f64,
    ssr: f64,
    sst: f64,
}

/// OLS of `y` on `t`. Fails when fewer than two distinct `t` values exist.
fn ols(t: &[f64], y: &[f64]) -> Option<Ols> {
    let n = t.len() as f64;
    let t_mean = t.iter().sum::<f64>() / n;
    let y_mean = y.iter().sum::<f64>() / n;
    let sxx: f64 = t.iter().map(|ti| (ti - t_mean).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = t.iter().zip(y).map(|(ti, yi)| (ti - t_mean) * (yi - y_mean)).sum();
    let slope = sxy / sxx;
    let intercept = y_mean - slope * t_mean;
    let ssr = t
        .iter()
        .zip(y)
        .map(|(ti, yi)| (yi - intercept - slope * ti).powi(2))
        .sum();
    let sst = y.iter().map(|yi| (yi - y_mean).powi(2)).sum();
    Some(Ols {
        slope,
        intercept,
        sxx,
        ssr,
        sst,
    })
}

fn log_observations(obs: &[(f64, f64)], base_year: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(&(t, v)) = obs.iter().find(|(t, v)| !(*v > 0.0) || !t.is_finite() || !v.is_finite()) {
        return Err(Error::domain(format!(
            "token value {v} at t = {t} must be positive and finite"
        )));
    }
    Ok(obs.iter().map(|&(t, v)| (t - base_year, v.ln())).unzip())
}

/// Fits `ln(tokens) = ln(c0) + lambda * (t - base_year)`.
///
/// `obs` holds `(time in years, tokens)`.
pub fn fit_exponential(obs: &[(f64, f64)], base_year: f64) -> Result<GrowthFit> {
    if obs.len() < 3 {
        return Err(Error::fit(format!("need at least 3 points, got {}", obs.len())));
    }
    let (t, y) = log_observations(obs, base_year)?;
    let fit = ols(&t, &y).ok_or_else(|| Error::fit("need at least 2 distinct time values"))?;

    let n = obs.len();
    let dof = (n - 2) as f64;
    let se = (fit.ssr / dof / fit.sxx).sqrt();
    let q = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::fit(e.to_string()))?
        .inverse_cdf(0.5 + CONFIDENCE_LEVEL / 2.0);
    let r_squared = if fit.sst > 0.0 {
        (1.0 - fit.ssr / fit.sst).clamp(0.0, 1.0)
    } else {
        1.0
    };
    let lambda = fit.slope;
    Ok(GrowthFit {
        lambda,
        c0: fit.intercept.exp(),
        base_year,
        ci_low: lambda - q * se,
        ci_high: lambda + q * se,
        slope_std_error: se,
        doubling_months: (lambda > 0.0).then(|| 12.0 * std::f64::consts::LN_2 / lambda),
        cagr_continuous: cagr(lambda),
        r_squared,
        n_points: n,
    })
}

/// Doubling time in months for a growth rate per year.
pub fn doubling_time_months(lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) {
        return Err(Error::domain(format!("doubling time needs lambda > 0, got {lambda}")));
    }
    Ok(12.0 * std::f64::consts::LN_2 / lambda)
}

pub fn cagr(lambda: f64) -> f64 {
    lambda.exp_m1()
}

/// Percentile bootstrap interval for `lambda`.
///
/// Each resample draws `n` observations with replacement from a ChaCha8
/// stream keyed by `(seed, resample index)`. Draws with fewer than two
/// distinct times are discarded and redrawn from the same stream.
pub fn bootstrap_ci(obs: &[(f64, f64)], resamples: usize, seed: u64) -> Result<(f64, f64)> {
    if resamples < MIN_RESAMPLES {
        return Err(Error::domain(format!(
            "bootstrap needs at least {MIN_RESAMPLES} resamples, got {resamples}"
        )));
    }
    if obs.len() < 3 {
        return Err(Error::fit(format!("need at least 3 points, got {}", obs.len())));
    }
    let (t, y) = log_observations(obs, 0.0)?;
    if ols(&t, &y).is_none() {
        return Err(Error::fit("need at least 2 distinct time values"));
    }

    let mut slopes = (0..resamples)
        .into_par_iter()
        .map(|i| resample_slope(&t, &y, seed, i as u64))
        .collect::<Result<Vec<f64>>>()?;
    slopes.sort_by(f64::total_cmp);
    let alpha = 1.0 - CONFIDENCE_LEVEL;
    Ok((percentile(&slopes, alpha / 2.0), percentile(&slopes, 1.0 - alpha / 2.0)))
}

fn resample_slope(t: &[f64], y: &[f64], seed: u64, index: u64) -> Result<f64> {
    let n = t.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let mut rt = vec![0.0; n];
    let mut ry = vec![0.0; n];
    for _ in 0..MAX_REDRAWS {
        for k in 0..n {
            let j = rng.random_range(0..n);
            rt[k] = t[j];
            ry[k] = y[j];
        }
        if let Some(fit) = ols(&rt, &ry) {
            return Ok(fit.slope);
        }
    }
    Err(Error::fit(format!(
        "resample {index}: no non-degenerate draw in {MAX_REDRAWS} attempts"
    )))
}

/// Linear-interpolated quantile of sorted data (type 7).
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Which observations feed the fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum FitPreset {
    /// One point per year: the yearly frontier.
    #[serde(rename = "table2-frontier")]
    #[value(name = "table2-frontier")]
    YearlyFrontier,
    /// Every non-excluded release, dated by year.
    #[serde(rename = "appendixA-all")]
    #[value(name = "appendixA-all")]
    AllReleases,
    /// Every non-excluded release, dated by year and month.
    #[serde(rename = "appendixA-monthly")]
    #[value(name = "appendixA-monthly")]
    MonthlyReleases,
}

impl FitPreset {
    pub const ALL: [FitPreset; 3] = [
        FitPreset::YearlyFrontier,
        FitPreset::AllReleases,
        FitPreset::MonthlyReleases,
    ];

    pub fn label(self) -> &'static str {
        match self {
            FitPreset::YearlyFrontier => "table2-frontier",
            FitPreset::AllReleases => "appendixA-all",
            FitPreset::MonthlyReleases => "appendixA-monthly",
        }
    }
}

impl fmt::Display for FitPreset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Value taken for a year whose frontier is a range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum RangeChoice {
    Lower,
    #[default]
    Upper,
}

/// Observations `(year, tokens)` for a preset over `first_year..=last_year`.
pub fn preset_observations(
    dataset: &TimelineDataset,
    preset: FitPreset,
    exclusions: &[String],
    first_year: i32,
    last_year: i32,
    range_choice: RangeChoice,
) -> Result<Vec<(f64, f64)>> {
    let in_window = |y: i32| y >= first_year && y <= last_year;
    let included = || {
        dataset
            .releases()
            .iter()
            .filter(|r| in_window(r.release_year))
            .filter(|r| !exclusions.iter().any(|x| x == &r.model_name))
    };
    let obs: Vec<(f64, f64)> = match preset {
        FitPreset::YearlyFrontier => frontier_bounds_by_year(dataset, first_year, last_year, exclusions)?
            .into_iter()
            .map(|b| {
                let v = match range_choice {
                    RangeChoice::Lower => b.lower,
                    RangeChoice::Upper => b.upper,
                };
                (f64::from(b.year), v)
            })
            .collect(),
        FitPreset::AllReleases => included()
            .map(|r| (f64::from(r.release_year), r.max_context_tokens as f64))
            .collect(),
        FitPreset::MonthlyReleases => included()
            .map(|r| (r.decimal_year(), r.max_context_tokens as f64))
            .collect(),
    };
    Ok(obs)
}

#[cfg(test)]
mod tests {
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    use super::*;

    fn synthetic(lambda: f64, c0: f64, n: usize) -> Vec<(f64, f64)> {
        (0..n).map(|t| (t as f64, c0 * (lambda * t as f64).exp())).collect()
    }

    /// Closed-form slope written out independently of `ols`.
    fn oracle_slope(obs: &[(f64, f64)]) -> f64 {
        let n = obs.len() as f64;
        let tb = obs.iter().map(|o| o.0).sum::<f64>() / n;
        let yb = obs.iter().map(|o| o.1.ln()).sum::<f64>() / n;
        let num: f64 = obs.iter().map(|o| (o.0 - tb) * (o.1.ln() - yb)).sum();
        let den: f64 = obs.iter().map(|o| (o.0 - tb) * (o.0 - tb)).sum();
        num / den
    }

    #[test]
    fn exact_recovery() {
        let fit = fit_exponential(&synthetic(0.5, 512.0, 10), 0.0).unwrap();
        assert!((fit.lambda - 0.5).abs() < 1e-9);
        assert_relative_eq!(fit.c0, 512.0, max_relative = 1e-9);
        assert_eq!(fit.r_squared, 1.0);
        assert!(fit.ci_low <= fit.lambda && fit.lambda <= fit.ci_high);
        assert!(fit.ci_high - fit.ci_low < 1e-6);
    }

    #[test]
    fn flat_series() {
        let obs: Vec<_> = (0..6).map(|t| (t as f64, 512.0)).collect();
        let fit = fit_exponential(&obs, 0.0).unwrap();
        assert_eq!(fit.lambda, 0.0);
        assert_eq!(fit.cagr_continuous, 0.0);
        assert_eq!(fit.doubling_months, None);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn table2_frontier_slope() {
        let tokens = [512.0, 512.0, 1024.0, 2048.0, 4096.0, 8192.0, 1e5, 1e6, 1e6, 2e6];
        let obs: Vec<_> = tokens.iter().enumerate().map(|(t, &v)| (t as f64, v)).collect();
        let fit = fit_exponential(&obs, 0.0).unwrap();
        // Frozen from the closed-form oracle below (numpy/scipy agree).
        assert_relative_eq!(fit.lambda, 1.056_070_060_185_771_5, max_relative = 1e-12);
        assert_relative_eq!(fit.lambda, oracle_slope(&obs), max_relative = 1e-12);
        assert_relative_eq!(fit.ci_low, 0.827_315_752_046_028_5, max_relative = 1e-9);
        assert_relative_eq!(fit.ci_high, 1.284_824_368_325_514_5, max_relative = 1e-9);
        assert_relative_eq!(fit.r_squared, 0.934_067_266_812_360_6, max_relative = 1e-9);
        assert_eq!(format!("{:.2}", doubling_time_months(1.06).unwrap()), "7.85");
    }

    #[test]
    fn errors() {
        assert!(matches!(fit_exponential(&synthetic(0.5, 1.0, 2), 0.0), Err(Error::Fit(_))));
        let mut obs = synthetic(0.5, 1.0, 5);
        obs[2].1 = 0.0;
        assert!(matches!(fit_exponential(&obs, 0.0), Err(Error::Domain(_))));
        let same_t = vec![(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)];
        assert!(matches!(fit_exponential(&same_t, 0.0), Err(Error::Fit(_))));
        assert!(doubling_time_months(0.0).is_err());
        assert!(doubling_time_months(-0.1).is_err());
        assert!(bootstrap_ci(&synthetic(0.5, 1.0, 5), 99, 1).is_err());
    }

    #[test]
    fn derived_quantities() {
        assert_eq!(format!("{:.2}", doubling_time_months(0.59).unwrap()), "14.10");
        assert!((doubling_time_months(std::f64::consts::LN_2).unwrap() - 12.0).abs() < 1e-12);
        assert!((cagr(0.59) - 0.8040).abs() < 1e-4);
        assert_eq!(cagr(0.0), 0.0);
        assert!((cagr(0.3466) - 0.4142).abs() < 1e-4);
    }

    #[test]
    fn bootstrap_on_exact_data_collapses() {
        let (lo, hi) = bootstrap_ci(&synthetic(0.5, 512.0, 10), 500, 7).unwrap();
        assert!(lo <= 0.5 + 1e-12 && 0.5 - 1e-12 <= hi);
        assert!(hi - lo < 1e-6);
    }

    #[test]
    fn bootstrap_is_deterministic() {
        let obs = vec![(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (3.0, 30.0), (4.0, 41.0)];
        let a = bootstrap_ci(&obs, 1000, 42).unwrap();
        let b = bootstrap_ci(&obs, 1000, 42).unwrap();
        assert_eq!(a.0.to_bits(), b.0.to_bits());
        assert_eq!(a.1.to_bits(), b.1.to_bits());
        let c = bootstrap_ci(&obs, 1000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bootstrap_independent_of_thread_count() {
        let obs = vec![(0.0, 1.0), (1.0, 3.0), (2.0, 5.0), (3.0, 30.0), (4.0, 41.0)];
        let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = single.install(|| bootstrap_ci(&obs, 2000, 9).unwrap());
        let b = many.install(|| bootstrap_ci(&obs, 2000, 9).unwrap());
        assert_eq!((a.0.to_bits(), a.1.to_bits()), (b.0.to_bits(), b.1.to_bits()));
    }

    #[test]
    fn percentile_interpolates() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(percentile(&v, 0.0), 0.0);
        assert_eq!(percentile(&v, 1.0), 4.0);
        assert_eq!(percentile(&v, 0.5), 2.0);
        assert_eq!(percentile(&v, 0.125), 0.5);
    }

    #[test]
    fn presets_on_bundled_data() {
        let ds = TimelineDataset::bundled();
        let excl = vec![crate::timeline::DEFAULT_EXCLUSION.to_string()];
        let f = preset_observations(&ds, FitPreset::YearlyFrontier, &excl, 2017, 2026, RangeChoice::Upper).unwrap();
        assert_eq!(f.len(), 10);
        assert_eq!(f[5], (2022.0, 8192.0));
        let frontier = fit_exponential(&f, 2017.0).unwrap();
        // Year-end 2023 frontier is 128,000, not the 100,000 in the hand-entered series above.
        assert_relative_eq!(frontier.lambda, 1.060_558_425_239_072, max_relative = 1e-12);
        assert_relative_eq!(frontier.ci_low, 0.829_768_696_559_646_9, max_relative = 1e-9);
        assert_relative_eq!(frontier.ci_high, 1.291_348_153_918_497_2, max_relative = 1e-9);
        assert_relative_eq!(frontier.r_squared, 0.933_496_246_769_148_6, max_relative = 1e-9);
        let f = preset_observations(&ds, FitPreset::YearlyFrontier, &excl, 2017, 2026, RangeChoice::Lower).unwrap();
        assert_eq!(f[5], (2022.0, 4096.0));
        let all = preset_observations(&ds, FitPreset::AllReleases, &excl, 2017, 2026, RangeChoice::Upper).unwrap();
        assert_eq!(all.len(), 19);
        let monthly = preset_observations(&ds, FitPreset::MonthlyReleases, &excl, 2017, 2026, RangeChoice::Upper).unwrap();
        assert_relative_eq!(monthly[0].0, 2017.0 + 5.0 / 12.0);
        for (obs, expect) in [(&all, 1.014_307_137_772_766_2), (&monthly, 1.030_069_520_430_448_2)] {
            let fit = fit_exponential(obs, 2017.0).unwrap();
            assert_relative_eq!(fit.lambda, expect, max_relative = 1e-9);
            assert_relative_eq!(fit.lambda, oracle_slope(obs), max_relative = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn recovers_any_noiseless_exponential(lambda in -2.0..2.0f64, c0 in 1.0..1e6f64, n in 3usize..25) {
            let fit = fit_exponential(&synthetic(lambda, c0, n), 0.0).unwrap();
            prop_assert!((fit.lambda - lambda).abs() < 1e-9);
            prop_assert!(fit.r_squared > 1.0 - 1e-9);
        }

        #[test]
        fn base_year_shift_keeps_lambda(shift in -50.0..50.0f64, noise in proptest::collection::vec(-0.5..0.5f64, 8)) {
            let obs: Vec<_> = noise.iter().enumerate()
                .map(|(t, e)| (2017.0 + t as f64, 512.0 * (0.8 * t as f64 + e).exp())).collect();
            let a = fit_exponential(&obs, 2017.0).unwrap();
            let b = fit_exponential(&obs, 2017.0 + shift).unwrap();
            prop_assert!((a.lambda - b.lambda).abs() < 1e-12);
            prop_assert!((b.c0 / a.c0 - (a.lambda * shift).exp()).abs() < 1e-9 * (a.lambda * shift).exp());
        }

        #[test]
        fn unit_scaling_keeps_lambda(k in 1e-3..1e3f64, noise in proptest::collection::vec(-0.5..0.5f64, 8)) {
            let obs: Vec<_> = noise.iter().enumerate()
                .map(|(t, e)| (t as f64, 512.0 * (0.8 * t as f64 + e).exp())).collect();
            let scaled: Vec<_> = obs.iter().map(|&(t, v)| (t, k * v)).collect();
            let a = fit_exponential(&obs, 0.0).unwrap();
            let b = fit_exponential(&scaled, 0.0).unwrap();
            prop_assert!((a.lambda - b.lambda).abs() < 1e-12);
        }

        #[test]
        fn fit_fields_are_consistent(noise in proptest::collection::vec(-1.0..1.0f64, 3..15)) {
            let obs: Vec<_> = noise.iter().enumerate()
                .map(|(t, e)| (t as f64, (0.3 * t as f64 + e).exp())).collect();
            let fit = fit_exponential(&obs, 0.0).unwrap();
            prop_assert!(fit.ci_low <= fit.lambda && fit.lambda <= fit.ci_high);
            prop_assert_eq!(fit.cagr_continuous, cagr(fit.lambda));
            match fit.doubling_months {
                Some(d) => prop_assert_eq!(d, doubling_time_months(fit.lambda).unwrap()),
                None => prop_assert!(fit.lambda <= 0.0),
            }
            prop_assert!((0.0..=1.0).contains(&fit.r_squared));
        }
    }
}
