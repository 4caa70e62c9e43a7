//! Operational quantum decision theory: prospect probabilities decompose
//! into a utility factor plus an attraction factor.
//!
//! A prospect lattice of `N_L` alternatives carries expected utilities
//! `U_j`. The utility factors `f_j = U_j / sum(U)` sum to 1; the attraction
//! factors `q_j` encode contextual pull and always sum to 0 with average
//! magnitude 1/4 (the quarter law). The prospect probabilities are
//! `p_j = f_j + q_j`, which must form a genuine probability vector —
//! combinations violating that are rejected, never repaired. A prospect can
//! be less useful yet preferred when its attraction overcomes the utility
//! gap, which is how the classical preference paradoxes dissolve.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Tolerance for the zero-sum and unit-sum checks on user-supplied vectors.
pub const SUM_TOL: f64 = 1e-12;

/// Utility factors `f_j = U_j / sum(U)`.
///
/// Utilities must be nonnegative with a positive total: the normalization is
/// ill-defined for mixed signs, so callers must map losses to nonnegative
/// utilities upstream.
pub fn utility_factor(utilities: &[f64]) -> Result<Vec<f64>> {
    if utilities.len() < 2 {
        return Err(Error::domain("need at least 2 prospects".to_string()));
    }
    if let Some(u) = utilities.iter().find(|u| !(**u >= 0.0) || !u.is_finite()) {
        return Err(Error::domain(format!(
            "utility {u} is negative or non-finite; the normalization U/sum(U) requires \
             nonnegative utilities (map losses upstream)"
        )));
    }
    let total: f64 = utilities.iter().sum();
    if total == 0.0 {
        return Err(Error::domain(
            "all utilities are zero; the normalization U/sum(U) is undefined".to_string(),
        ));
    }
    Ok(utilities.iter().map(|u| u / total).collect())
}

/// The default attraction vector for a given attractiveness ranking:
/// equally spaced values symmetric about 0, scaled so the mean absolute
/// value is exactly 1/4, assigned in decreasing order along the ranking.
///
/// `ranking[0]` is the most attractive prospect. The construction is exact
/// in rationals: value `j` of the descending sequence is
/// `(n-1-2j) * n / (4 * sum_i |n-1-2i|)`; each returned `f64` is that
/// rational correctly rounded.
pub fn default_attraction(ranking: &[usize]) -> Result<Vec<f64>> {
    let n = ranking.len();
    if n < 2 {
        return Err(Error::domain(format!("need at least 2 prospects, got {n}")));
    }
    let mut seen = vec![false; n];
    for &r in ranking {
        if r >= n || seen[r] {
            return Err(Error::domain(format!(
                "ranking is not a permutation of 0..{n}"
            )));
        }
        seen[r] = true;
    }
    // Integer numerators n-1, n-3, ..., -(n-1); |sum| = n^2/2 (even n) or
    // (n^2-1)/2 (odd n).
    let numerators: Vec<i64> = (0..n).map(|j| (n as i64 - 1) - 2 * j as i64).collect();
    let abs_sum: i64 = numerators.iter().map(|v| v.abs()).sum();
    let mut q = vec![0.0; n];
    for (j, &prospect) in ranking.iter().enumerate() {
        q[prospect] = (numerators[j] * n as i64) as f64 / (4 * abs_sum) as f64;
    }
    Ok(q)
}

/// Validate an attraction vector against the lattice constraints: zero sum
/// within [`SUM_TOL`] and every entry in [-1, 1]. The quarter law is an
/// estimate, not a constraint, so it is reported via
/// [`ProspectSet::quarter_law_gap`] rather than enforced here.
pub fn validate_attraction(q: &[f64]) -> Result<()> {
    if let Some(v) = q.iter().find(|v| !v.is_finite() || v.abs() > 1.0) {
        return Err(Error::domain(format!(
            "attraction factor {v} outside [-1, 1]"
        )));
    }
    let total: f64 = q.iter().sum();
    if total.abs() > SUM_TOL {
        return Err(Error::domain(format!(
            "attraction factors must sum to 0, got {total:e}"
        )));
    }
    Ok(())
}

/// Prospect probabilities `p_j = f_j + q_j`.
///
/// Errors if any `f_j + q_j` leaves [0, 1]: an invalid combination is
/// reported, not clipped or renormalized.
pub fn prospect_probabilities(f: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    if f.len() != q.len() || f.len() < 2 {
        return Err(Error::domain(format!(
            "utility and attraction vectors must have equal length >= 2, got {} and {}",
            f.len(),
            q.len()
        )));
    }
    let p: Vec<f64> = f.iter().zip(q).map(|(f, q)| f + q).collect();
    let violations: Vec<String> = p
        .iter()
        .enumerate()
        .filter(|(_, pj)| !(0.0..=1.0).contains(*pj))
        .map(|(j, pj)| format!("p_{j} = f_{j} + q_{j} = {pj}"))
        .collect();
    if !violations.is_empty() {
        return Err(Error::Constraint(format!(
            "{} outside [0, 1]; prospect probabilities must form a probability measure",
            violations.join(", ")
        )));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > SUM_TOL {
        return Err(Error::Constraint(format!(
            "prospect probabilities sum to {total}, expected 1"
        )));
    }
    Ok(p)
}

/// The chosen prospect: argmax of `p`, lowest index on an exact tie.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Preference {
    pub index: usize,
    pub tie: bool,
}

pub fn preferred_prospect(p: &[f64]) -> Preference {
    let mut index = 0;
    for (j, &v) in p.iter().enumerate().skip(1) {
        if v > p[index] {
            index = j;
        }
    }
    let tie = p
        .iter()
        .enumerate()
        .any(|(j, &v)| j != index && v == p[index]);
    Preference { index, tie }
}

/// Is prospect 1 strictly preferred over prospect 2? True exactly when
/// `f1 - f2 > q2 - q1`, i.e. when the utility edge beats the attraction
/// deficit; algebraically the same comparison as `p1 > p2`.
pub fn preference_inequality(f1: f64, f2: f64, q1: f64, q2: f64) -> bool {
    f1 - f2 > q2 - q1
}

/// A prospect lattice with validated utility and attraction factors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProspectSet {
    labels: Vec<String>,
    utilities: Vec<f64>,
    f: Vec<f64>,
    q: Vec<f64>,
}

impl ProspectSet {
    /// Build from expected utilities and an explicit attraction vector.
    pub fn new(labels: Vec<String>, utilities: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        if labels.len() != utilities.len() || labels.len() != q.len() {
            return Err(Error::domain(format!(
                "labels ({}), utilities ({}) and q ({}) must have equal length",
                labels.len(),
                utilities.len(),
                q.len()
            )));
        }
        let f = utility_factor(&utilities)?;
        validate_attraction(&q)?;
        prospect_probabilities(&f, &q)?;
        Ok(ProspectSet {
            labels,
            utilities,
            f,
            q,
        })
    }

    /// Build with the default equal-spacing attraction for a ranking given
    /// by prospect indices, most attractive first.
    pub fn with_default_attraction(
        labels: Vec<String>,
        utilities: Vec<f64>,
        ranking: &[usize],
    ) -> Result<Self> {
        if ranking.len() != labels.len() {
            return Err(Error::domain(format!(
                "ranking has {} entries for {} prospects",
                ranking.len(),
                labels.len()
            )));
        }
        let q = default_attraction(ranking)?;
        Self::new(labels, utilities, q)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn utilities(&self) -> &[f64] {
        &self.utilities
    }

    pub fn utility_factors(&self) -> &[f64] {
        &self.f
    }

    pub fn attraction_factors(&self) -> &[f64] {
        &self.q
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        // Validated at construction; recompute rather than store.
        self.f.iter().zip(&self.q).map(|(f, q)| f + q).collect()
    }

    pub fn preferred(&self) -> Preference {
        preferred_prospect(&self.probabilities())
    }

    /// How far the attraction magnitudes sit from the quarter-law estimate
    /// `mean |q| = 1/4`. Informational: user-supplied attractions may
    /// deviate.
    pub fn quarter_law_gap(&self) -> f64 {
        let mean_abs: f64 = self.q.iter().map(|v| v.abs()).sum::<f64>() / self.q.len() as f64;
        (mean_abs - 0.25).abs()
    }
}

/// Observed choice counts over a prospect lattice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChoiceCounts {
    counts: Vec<u64>,
    total: u64,
}

impl ChoiceCounts {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        if counts.len() < 2 {
            return Err(Error::domain(
                "need counts for at least 2 prospects".to_string(),
            ));
        }
        let total = counts.iter().sum();
        Ok(ChoiceCounts { counts, total })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    /// Empirical choice frequencies `N_j / N`.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts
            .iter()
            .map(|&c| c as f64 / self.total as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyComparison {
    pub p_exp: Vec<f64>,
    pub chi_square: f64,
    pub dof: usize,
    pub p_value: f64,
    /// Set when some expected cell count falls below 1; the statistic is
    /// still returned but the chi-square approximation is shaky.
    pub low_expectation: bool,
}

/// Pearson chi-square comparison of observed choice frequencies against
/// theoretical prospect probabilities, `dof = N_L - 1`.
pub fn frequency_compare(p_theory: &[f64], counts: &ChoiceCounts) -> Result<FrequencyComparison> {
    if p_theory.len() != counts.counts.len() {
        return Err(Error::domain(format!(
            "{} theoretical probabilities for {} count cells",
            p_theory.len(),
            counts.counts.len()
        )));
    }
    if let Some(p) = p_theory.iter().find(|p| !(**p > 0.0) || !p.is_finite()) {
        return Err(Error::domain(format!(
            "theoretical probabilities must be strictly positive, got {p}"
        )));
    }
    let total_p: f64 = p_theory.iter().sum();
    if (total_p - 1.0).abs() > SUM_TOL {
        return Err(Error::domain(format!(
            "theoretical probabilities sum to {total_p}"
        )));
    }
    let n_l = p_theory.len();
    if counts.total < 5 * n_l as u64 {
        return Err(Error::domain(format!(
            "chi-square needs at least {} observations for {} prospects, got {}",
            5 * n_l,
            n_l,
            counts.total
        )));
    }
    let n = counts.total as f64;
    let mut chi_square = 0.0;
    let mut low_expectation = false;
    for (&obs, &p) in counts.counts.iter().zip(p_theory) {
        let expected = n * p;
        if expected < 1.0 {
            low_expectation = true;
        }
        let d = obs as f64 - expected;
        chi_square += d * d / expected;
    }
    let dof = n_l - 1;
    let dist = ChiSquared::new(dof as f64).expect("dof >= 1");
    let p_value = 1.0 - dist.cdf(chi_square);
    Ok(FrequencyComparison {
        p_exp: counts.frequencies(),
        chi_square,
        dof,
        p_value,
        low_expectation,
    })
}

/// On-disk prospect description: utilities plus either an explicit
/// attraction vector or an attractiveness ranking by label (most attractive
/// first) for the default construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProspectDocument {
    pub labels: Vec<String>,
    pub utilities: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<f64>>,
    /// Attractiveness order, most attractive first. The usual qualitative
    /// criteria for ranking: prefer the more certain gain, the more
    /// uncertain loss, higher activity under certainty, lower activity
    /// under uncertainty and risk.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<String>>,
}

impl ProspectDocument {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| Error::config(format!("invalid prospect document: {e}")))
    }

    pub fn build(&self) -> Result<ProspectSet> {
        match (&self.q, &self.ranking) {
            (Some(_), Some(_)) => Err(Error::config(
                "prospect document must give either `q` or `ranking`, not both".to_string(),
            )),
            (Some(q), None) => {
                ProspectSet::new(self.labels.clone(), self.utilities.clone(), q.clone())
            }
            (None, Some(ranking)) => {
                let indices: Vec<usize> = ranking
                    .iter()
                    .map(|label| {
                        self.labels.iter().position(|l| l == label).ok_or_else(|| {
                            Error::config(format!("ranking label {label:?} not in labels"))
                        })
                    })
                    .collect::<Result<_>>()?;
                ProspectSet::with_default_attraction(
                    self.labels.clone(),
                    self.utilities.clone(),
                    &indices,
                )
            }
            (None, None) => Err(Error::config(
                "prospect document needs `q` or `ranking`".to_string(),
            )),
        }
    }
}

/// Result payload emitted by the CLI: keys `f, q, p, preferred, tie`.
pub fn result_json(set: &ProspectSet) -> serde_json::Value {
    let preference = set.preferred();
    serde_json::json!({
        "f": set.utility_factors(),
        "q": set.attraction_factors(),
        "p": set.probabilities(),
        "preferred": preference.index,
        "tie": preference.tie,
    })
}
