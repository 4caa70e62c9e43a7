//! Return-series statistics: heavy-tail estimation, autocorrelation,
//! the power-law-versus-lognormal CV statistic and the excess-volatility
//! variance diagnostic.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Minimum sample length accepted by any estimator in this module.
pub const MIN_ESTIMATOR_LEN: usize = 30;

/// A return series plus the label of its sampling interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub values: Vec<f64>,
    pub dt: String,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, dt: impl Into<String>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite return {v}")));
        }
        Ok(ReturnSeries {
            values,
            dt: dt.into(),
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnMode {
    Log,
    Simple,
}

/// Log returns `ln(p_t / p_{t-1})` or simple returns `p_t / p_{t-1} - 1`.
pub fn compute_returns(prices: &[f64], mode: ReturnMode) -> Result<ReturnSeries> {
    if prices.len() < 2 {
        return Err(Error::domain(format!(
            "need at least 2 prices, got {}",
            prices.len()
        )));
    }
    if let Some(p) = prices.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::domain(format!(
            "prices must be positive and finite, got {p}"
        )));
    }
    let values = prices
        .windows(2)
        .map(|w| match mode {
            ReturnMode::Log => (w[1] / w[0]).ln(),
            ReturnMode::Simple => w[1] / w[0] - 1.0,
        })
        .collect();
    ReturnSeries::new(values, "1")
}

fn check_len(series: &ReturnSeries) -> Result<()> {
    if series.len() < MIN_ESTIMATOR_LEN {
        return Err(Error::domain(format!(
            "estimator needs at least {MIN_ESTIMATOR_LEN} observations, got {}",
            series.len()
        )));
    }
    Ok(())
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample variance with the n-1 denominator.
fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64
}

/// Fourth standardized moment minus 3 (population moments, so a symmetric
/// two-point sample gives exactly -2).
pub fn excess_kurtosis(series: &ReturnSeries) -> Result<f64> {
    check_len(series)?;
    let x = &series.values;
    let m = mean(x);
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64;
    if m2 == 0.0 {
        return Err(Error::domain(
            "zero variance, kurtosis undefined".to_string(),
        ));
    }
    let m4 = x.iter().map(|v| (v - m).powi(4)).sum::<f64>() / x.len() as f64;
    Ok(m4 / (m2 * m2) - 3.0)
}

/// Biased sample autocorrelation, `acf[0] = 1`, lags up to `max_lag`.
pub fn autocorrelation(series: &ReturnSeries, max_lag: usize) -> Result<Vec<f64>> {
    check_len(series)?;
    let x = &series.values;
    if max_lag >= x.len() / 4 {
        return Err(Error::domain(format!(
            "max_lag {max_lag} too large for series of length {} (must be < length/4)",
            x.len()
        )));
    }
    let m = mean(x);
    let denom: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    if denom == 0.0 {
        return Err(Error::domain(
            "zero variance, autocorrelation undefined".to_string(),
        ));
    }
    let mut acf = Vec::with_capacity(max_lag + 1);
    for lag in 0..=max_lag {
        let num: f64 = (0..x.len() - lag)
            .map(|t| (x[t] - m) * (x[t + lag] - m))
            .sum();
        acf.push(num / denom);
    }
    Ok(acf)
}

/// Hill tail-exponent estimate from the top `k` order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillEstimate {
    pub mu_hat: f64,
    pub k: usize,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Zero returns dropped before taking logs.
    pub zeros_excluded: usize,
}

/// `mu_hat = k / sum_{i=1..k} ln(x_(i) / x_(k+1))` on the absolute values
/// sorted descending, zeros excluded. `std_error = mu_hat / sqrt(k)`; the CI
/// is the 95% normal band. `k` may be as small as 1 (the estimator is exact
/// on a two-point sample); sensible tail fits use k in [10, n/10], which is
/// what [`stylized_facts_report`] defaults to.
pub fn hill_estimator(series: &ReturnSeries, k: usize) -> Result<HillEstimate> {
    let mut magnitudes: Vec<f64> = series
        .values
        .iter()
        .map(|v| v.abs())
        .filter(|v| *v > 0.0)
        .collect();
    let zeros_excluded = series.len() - magnitudes.len();
    if k < 1 || k + 1 > magnitudes.len() {
        return Err(Error::domain(format!(
            "hill k must satisfy 1 <= k <= n-1 with n = {} nonzero magnitudes, got {k}",
            magnitudes.len()
        )));
    }
    magnitudes.sort_by(|a, b| b.total_cmp(a));
    let x_k1 = magnitudes[k];
    let log_sum: f64 = magnitudes[..k].iter().map(|x| (x / x_k1).ln()).sum();
    if log_sum == 0.0 {
        return Err(Error::domain(
            "hill estimator undefined: ties at the k-th order statistic".to_string(),
        ));
    }
    let mu_hat = k as f64 / log_sum;
    let std_error = mu_hat / (k as f64).sqrt();
    Ok(HillEstimate {
        mu_hat,
        k,
        std_error,
        ci_low: mu_hat - 1.96 * std_error,
        ci_high: mu_hat + 1.96 * std_error,
        zeros_excluded,
    })
}

/// Coefficient of variation of the log sample: the discriminating statistic
/// between power-law and log-normal tails.
///
/// With a threshold `u` the statistic is computed on the log exceedances
/// `ln(|x|/u)` over `|x| > u`; a power-law tail makes those exponential, so
/// the statistic approaches 1, while a log-normal tail gives a smaller
/// value. Without a threshold it is `std(ln|x|) / mean(ln|x|)` on all
/// nonzero values. Larger values favor the power law; the decision
/// threshold is left to the caller.
pub fn cv_log_statistic(series: &ReturnSeries, threshold: Option<f64>) -> Result<f64> {
    if let Some(u) = threshold {
        if !(u > 0.0) || !u.is_finite() {
            return Err(Error::domain(format!("threshold must be > 0, got {u}")));
        }
    }
    let logs: Vec<f64> = match threshold {
        Some(u) => series
            .values
            .iter()
            .map(|v| v.abs())
            .filter(|v| *v > u)
            .map(|v| (v / u).ln())
            .collect(),
        None => series
            .values
            .iter()
            .map(|v| v.abs())
            .filter(|v| *v > 0.0)
            .map(|v| v.ln())
            .collect(),
    };
    if logs.len() < MIN_ESTIMATOR_LEN {
        return Err(Error::domain(format!(
            "cv_log needs at least {MIN_ESTIMATOR_LEN} values above the threshold, got {}",
            logs.len()
        )));
    }
    let m = mean(&logs);
    if m == 0.0 {
        return Err(Error::domain(
            "mean of logs is zero, CV undefined".to_string(),
        ));
    }
    Ok(sample_variance(&logs).sqrt() / m)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum VolatilityOrdering {
    /// `Var(p) <= Var(p*)`: consistent with the optimal-forecast variance
    /// bound.
    RationalExpectationsConsistent,
    /// `Var(p) > Var(p*)`: the observed price fluctuates more than the
    /// fundamental series it is supposed to forecast.
    ExcessVolatility,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExcessVolatilityReport {
    pub var_p: f64,
    pub var_pstar: f64,
    pub ordering: VolatilityOrdering,
    pub variance_of_diff: f64,
}

/// Compare the variance of an observed price series against its fundamental
/// series. Under rational expectations the forecast must be less variable
/// than the variable forecasted, so `Var(p) > Var(p*)` flags excess
/// volatility.
pub fn excess_volatility_diagnostic(
    p_series: &[f64],
    pstar_series: &[f64],
) -> Result<ExcessVolatilityReport> {
    if p_series.len() != pstar_series.len() {
        return Err(Error::domain(format!(
            "series lengths differ: {} vs {}",
            p_series.len(),
            pstar_series.len()
        )));
    }
    if p_series.len() < MIN_ESTIMATOR_LEN {
        return Err(Error::domain(format!(
            "need at least {MIN_ESTIMATOR_LEN} observations, got {}",
            p_series.len()
        )));
    }
    let var_p = sample_variance(p_series);
    let var_pstar = sample_variance(pstar_series);
    let diff: Vec<f64> = p_series
        .iter()
        .zip(pstar_series)
        .map(|(a, b)| a - b)
        .collect();
    let ordering = if var_p <= var_pstar {
        VolatilityOrdering::RationalExpectationsConsistent
    } else {
        VolatilityOrdering::ExcessVolatility
    };
    Ok(ExcessVolatilityReport {
        var_p,
        var_pstar,
        ordering,
        variance_of_diff: sample_variance(&diff),
    })
}

/// Stylized-facts summary of a price series. Serialized as JSON with
/// exactly these keys; the acf vectors are indexed by lag (entry 0 is the
/// trivial lag-0 value 1).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesReport {
    pub mean: f64,
    pub std: f64,
    pub excess_kurtosis: f64,
    pub acf_returns: Vec<f64>,
    pub acf_abs_returns: Vec<f64>,
    pub hill_mu: f64,
    pub hill_k: usize,
    pub hill_stderr: f64,
    pub cv_log: f64,
    pub n: usize,
}

/// Default maximum autocorrelation lag in [`stylized_facts_report`].
pub const REPORT_MAX_LAG: usize = 50;
/// Default Hill tail fraction in [`stylized_facts_report`].
pub const REPORT_HILL_FRACTION: f64 = 0.05;

/// Assemble the full report for a price series: log returns, moments, lag
/// 1..=50 autocorrelations of returns and absolute returns, Hill estimate on
/// the top 5% of magnitudes, and the CV-of-logs statistic.
pub fn stylized_facts_report(prices: &[f64]) -> Result<SeriesReport> {
    if prices.len() < 500 {
        return Err(Error::domain(format!(
            "stylized_facts_report needs at least 500 prices, got {}",
            prices.len()
        )));
    }
    let returns = compute_returns(prices, ReturnMode::Log)?;
    report_for_returns(&returns)
}

/// Report for an already-computed return series.
pub fn report_for_returns(returns: &ReturnSeries) -> Result<SeriesReport> {
    let n = returns.len();
    let abs_returns = ReturnSeries::new(
        returns.values.iter().map(|v| v.abs()).collect(),
        returns.dt.clone(),
    )?;
    let k = ((n as f64 * REPORT_HILL_FRACTION).round() as usize).max(10);
    let hill = hill_estimator(returns, k)?;
    Ok(SeriesReport {
        mean: mean(&returns.values),
        std: sample_variance(&returns.values).sqrt(),
        excess_kurtosis: excess_kurtosis(returns)?,
        acf_returns: autocorrelation(returns, REPORT_MAX_LAG)?,
        acf_abs_returns: autocorrelation(&abs_returns, REPORT_MAX_LAG)?,
        hill_mu: hill.mu_hat,
        hill_k: hill.k,
        hill_stderr: hill.std_error,
        cv_log: cv_log_statistic(returns, None)?,
        n,
    })
}
