//! Random-utility discrete choice: Gumbel noise, logit probabilities and the
//! independence-from-irrelevant-alternatives check.
//!
//! A decision maker picks the alternative maximizing `U(x) = V(x) + eps(x)`.
//! With i.i.d. Gumbel `eps` the argmax probabilities have the closed logit
//! form `P(x) = exp(V(x)/gamma) / sum_y exp(V(y)/gamma)`, the same form as a
//! Boltzmann factor at temperature `gamma`. [`simulate_choices`] samples the
//! argmax directly so the equivalence can be verified numerically.

use crate::error::{Error, Result};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Location/scale parameters of a Gumbel distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GumbelParams {
    pub mu: f64,
    pub gamma: f64,
}

impl GumbelParams {
    pub fn new(mu: f64, gamma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::domain(format!(
                "gumbel location must be finite, got {mu}"
            )));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "gumbel scale must be > 0, got {gamma}"
            )));
        }
        Ok(GumbelParams { mu, gamma })
    }

    /// Standard Gumbel: location 0, scale 1.
    pub fn standard() -> Self {
        GumbelParams {
            mu: 0.0,
            gamma: 1.0,
        }
    }
}

/// Cumulative distribution `F(x) = exp(-exp(-(x - mu)/gamma))`.
pub fn gumbel_cdf(x: f64, params: &GumbelParams) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!(
            "gumbel_cdf argument must be finite, got {x}"
        )));
    }
    Ok((-(-(x - params.mu) / params.gamma).exp()).exp())
}

/// Inverse-CDF sample `mu - gamma * ln(-ln u)` with `u` uniform on (0, 1).
pub fn sample_gumbel<R: Rng + ?Sized>(rng: &mut R, params: &GumbelParams) -> f64 {
    let u: f64 = rng.sample(rand::distr::Open01);
    params.mu - params.gamma * (-u.ln()).ln()
}

/// A discrete choice problem: one deterministic utility per alternative plus
/// the common Gumbel noise scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChoiceProblem {
    deterministic_utilities: Vec<f64>,
    gamma: f64,
}

impl ChoiceProblem {
    pub fn new(deterministic_utilities: Vec<f64>, gamma: f64) -> Result<Self> {
        if deterministic_utilities.len() < 2 {
            return Err(Error::domain(format!(
                "a choice problem needs at least 2 alternatives, got {}",
                deterministic_utilities.len()
            )));
        }
        if let Some(v) = deterministic_utilities.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite utility {v}")));
        }
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::domain(format!(
                "noise scale gamma must be > 0, got {gamma}"
            )));
        }
        Ok(ChoiceProblem {
            deterministic_utilities,
            gamma,
        })
    }

    pub fn utilities(&self) -> &[f64] {
        &self.deterministic_utilities
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn n_alternatives(&self) -> usize {
        self.deterministic_utilities.len()
    }
}

/// Closed-form logit probabilities `exp(V/gamma)` normalized.
///
/// The maximum of `V/gamma` is subtracted before exponentiation so the result
/// stays finite for |V|/gamma beyond ~700.
pub fn logit_probabilities(problem: &ChoiceProblem) -> Vec<f64> {
    let gamma = problem.gamma;
    let scaled: Vec<f64> = problem
        .deterministic_utilities
        .iter()
        .map(|v| v / gamma)
        .collect();
    let max = scaled.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = scaled.iter().map(|s| (s - max).exp()).collect();
    let z: f64 = weights.iter().sum();
    weights.into_iter().map(|w| w / z).collect()
}

/// Monte Carlo choice frequencies: each sample draws i.i.d. Gumbel(0, gamma)
/// noise per alternative (sequentially from `rng`) and records the argmax of
/// `V + eps`. Realized ties go to the lowest index; with continuous noise
/// they have probability zero.
pub fn simulate_choices<R: Rng + ?Sized>(
    problem: &ChoiceProblem,
    n_samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_samples == 0 {
        return Err(Error::domain("n_samples must be >= 1".to_string()));
    }
    let noise = GumbelParams {
        mu: 0.0,
        gamma: problem.gamma,
    };
    let mut counts = vec![0u64; problem.n_alternatives()];
    for _ in 0..n_samples {
        let mut best = 0usize;
        let mut best_u = f64::NEG_INFINITY;
        for (i, v) in problem.deterministic_utilities.iter().enumerate() {
            let u = v + sample_gumbel(rng, &noise);
            if u > best_u {
                best_u = u;
                best = i;
            }
        }
        counts[best] += 1;
    }
    Ok(counts
        .into_iter()
        .map(|c| c as f64 / n_samples as f64)
        .collect())
}

/// Renormalize a probability vector on a subset of indices.
pub fn renormalize_subset(full_probs: &[f64], subset: &[usize]) -> Result<Vec<f64>> {
    validate_subset(full_probs, subset)?;
    let total: f64 = subset.iter().map(|&i| full_probs[i]).sum();
    Ok(subset.iter().map(|&i| full_probs[i] / total).collect())
}

/// Luce's choice axiom check: how far do choice-probability ratios move when
/// the offered set shrinks to `subset`?
///
/// `subset_probs[j]` is the observed probability of alternative `subset[j]`
/// when only the subset is offered; it is compared against the ratios of
/// `full_probs`. Returns the maximum over ordered pairs of
/// `|ratio_subset / ratio_full - 1|`; exactly 0 when `subset_probs` is the
/// renormalization of `full_probs`, and 0 within rounding for any logit
/// model evaluated on the subset's own utilities.
pub fn iia_ratio_check(full_probs: &[f64], subset_probs: &[f64], subset: &[usize]) -> Result<f64> {
    validate_subset(full_probs, subset)?;
    if subset_probs.len() != subset.len() {
        return Err(Error::domain(format!(
            "subset_probs has {} entries for a subset of {}",
            subset_probs.len(),
            subset.len()
        )));
    }
    if let Some(p) = subset_probs.iter().find(|p| !(**p > 0.0)) {
        return Err(Error::domain(format!(
            "subset probabilities must be > 0, got {p}"
        )));
    }
    let mut worst = 0.0f64;
    for a in 0..subset.len() {
        for b in 0..subset.len() {
            if a == b {
                continue;
            }
            let ratio_subset = subset_probs[a] / subset_probs[b];
            let ratio_full = full_probs[subset[a]] / full_probs[subset[b]];
            worst = worst.max((ratio_subset / ratio_full - 1.0).abs());
        }
    }
    Ok(worst)
}

fn validate_subset(full_probs: &[f64], subset: &[usize]) -> Result<()> {
    if subset.len() < 2 {
        return Err(Error::domain(
            "subset needs at least 2 elements".to_string(),
        ));
    }
    let mut seen = vec![false; full_probs.len()];
    for &i in subset {
        if i >= full_probs.len() {
            return Err(Error::domain(format!("subset index {i} out of range")));
        }
        if seen[i] {
            return Err(Error::domain(format!("subset index {i} repeated")));
        }
        seen[i] = true;
    }
    if let Some(p) = subset.iter().map(|&i| full_probs[i]).find(|p| !(*p > 0.0)) {
        return Err(Error::domain(format!(
            "full probabilities must be strictly positive on the subset, got {p}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use approx::assert_relative_eq;

    #[test]
    fn cdf_at_mode_is_inv_e() {
        let p = GumbelParams::standard();
        assert_relative_eq!(
            gumbel_cdf(0.0, &p).unwrap(),
            0.367_879_441_171_442_32,
            max_relative = 1e-15
        );
    }

    #[test]
    fn cdf_median_point() {
        // x = -gamma * ln(ln 2) forces exp(-x/gamma) = ln 2.
        for gamma in [0.5, 1.0, 3.0] {
            let p = GumbelParams::new(0.0, gamma).unwrap();
            let x = -gamma * std::f64::consts::LN_2.ln();
            assert_relative_eq!(gumbel_cdf(x, &p).unwrap(), 0.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn cdf_limits_and_monotonicity() {
        let p = GumbelParams::standard();
        assert!(gumbel_cdf(1e300, &p).unwrap() == 1.0);
        assert!(gumbel_cdf(-1e300, &p).unwrap() == 0.0);
        let mut prev = 0.0;
        for i in -400..400 {
            let f = gumbel_cdf(i as f64 / 40.0, &p).unwrap();
            assert!(f >= prev);
            prev = f;
        }
        assert!(gumbel_cdf(f64::NAN, &p).is_err());
        assert!(gumbel_cdf(f64::INFINITY, &p).is_err());
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(GumbelParams::new(0.0, 0.0).is_err());
        assert!(GumbelParams::new(0.0, -1.0).is_err());
        assert!(GumbelParams::new(f64::NAN, 1.0).is_err());
        assert!(GumbelParams::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn sampler_inverse_cdf_points() {
        // u = 1/e gives -ln u = 1, result mu; u = 0.5 gives the median.
        let p = GumbelParams::new(2.0, 3.0).unwrap();
        let at = |u: f64| p.mu - p.gamma * (-u.ln()).ln();
        assert_relative_eq!(at(1.0 / std::f64::consts::E), 2.0, max_relative = 1e-14);
        assert_relative_eq!(
            at(0.5),
            2.0 + 3.0 * 0.366_512_920_581_664_33,
            max_relative = 1e-12
        );
    }

    /// Kolmogorov-Smirnov distance between an empirical sample and the
    /// closed-form CDF. Test-side oracle, independent of the sampler.
    fn ks_distance(sample: &mut [f64], params: &GumbelParams) -> f64 {
        sample.sort_by(|a, b| a.total_cmp(b));
        let n = sample.len() as f64;
        let mut worst = 0.0f64;
        for (i, x) in sample.iter().enumerate() {
            let f = gumbel_cdf(*x, params).unwrap();
            let lo = i as f64 / n;
            let hi = (i + 1) as f64 / n;
            worst = worst.max((f - lo).abs()).max((hi - f).abs());
        }
        worst
    }

    #[test]
    fn sampler_matches_cdf_by_ks() {
        let params = GumbelParams::standard();
        let mut rng = rng_from_seed(7);
        let mut sample: Vec<f64> = (0..100_000)
            .map(|_| sample_gumbel(&mut rng, &params))
            .collect();
        let d = ks_distance(&mut sample, &params);
        assert!(d < 0.01, "KS distance {d} too large");
    }

    #[test]
    fn logit_uniform_for_equal_utilities() {
        for n in 2..6 {
            let p = ChoiceProblem::new(vec![3.7; n], 1.3).unwrap();
            for prob in logit_probabilities(&p) {
                assert_relative_eq!(prob, 1.0 / n as f64, max_relative = 1e-14);
            }
        }
    }

    #[test]
    fn logit_two_alternatives() {
        let p = ChoiceProblem::new(vec![1.0, 0.0], 1.0).unwrap();
        let probs = logit_probabilities(&p);
        assert_relative_eq!(probs[0], 0.731_058_578_630_004_9, max_relative = 1e-14);
        assert_relative_eq!(probs[1], 0.268_941_421_369_995_1, max_relative = 1e-14);
    }

    #[test]
    fn logit_three_alternatives_high_precision() {
        // Proportional to (e^4, e^2, e^0); reference values from 40-digit
        // arithmetic.
        let p = ChoiceProblem::new(vec![2.0, 1.0, 0.0], 0.5).unwrap();
        let probs = logit_probabilities(&p);
        assert_relative_eq!(probs[0], 0.866_813_332_197_334_9, max_relative = 1e-14);
        assert_relative_eq!(probs[1], 0.117_310_427_826_198_36, max_relative = 1e-14);
        assert_relative_eq!(probs[2], 0.015_876_239_976_466_766, max_relative = 1e-14);
    }

    #[test]
    fn logit_handles_extreme_utilities() {
        // Far beyond the exp overflow point; the max-subtraction keeps the
        // result a valid probability vector (the losing entry may underflow
        // to exactly 0 here).
        let p = ChoiceProblem::new(vec![1000.0, 0.0], 1.0).unwrap();
        let probs = logit_probabilities(&p);
        assert!(probs[0] > 0.999_999);
        assert!(probs
            .iter()
            .all(|p| p.is_finite() && (0.0..=1.0).contains(p)));
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn deterministic_limit_picks_argmax() {
        let p = ChoiceProblem::new(vec![1.0, 0.0], 1e-9).unwrap();
        let mut rng = rng_from_seed(3);
        let freq = simulate_choices(&p, 2_000, &mut rng).unwrap();
        assert_eq!(freq[0], 1.0);
        assert_eq!(freq[1], 0.0);
    }

    #[test]
    fn symmetric_choices_split_evenly() {
        let p = ChoiceProblem::new(vec![0.0, 0.0], 1.0).unwrap();
        let mut rng = rng_from_seed(11);
        let freq = simulate_choices(&p, 100_000, &mut rng).unwrap();
        assert!((freq[0] - 0.5).abs() < 0.01);
        assert!((freq[1] - 0.5).abs() < 0.01);
    }

    #[test]
    fn monte_carlo_matches_logit_in_total_variation() {
        // The Holman-Marley equivalence checked numerically at desk scale;
        // the acceptance suite reruns it at 10^6 samples.
        let p = ChoiceProblem::new(vec![1.0, 0.0, -1.0], 1.0).unwrap();
        let mut rng = rng_from_seed(5);
        let freq = simulate_choices(&p, 200_000, &mut rng).unwrap();
        let probs = logit_probabilities(&p);
        let tv: f64 = freq
            .iter()
            .zip(&probs)
            .map(|(f, p)| (f - p).abs())
            .sum::<f64>()
            / 2.0;
        assert!(tv < 0.005, "total variation {tv}");
    }

    #[test]
    fn monte_carlo_equivalence_five_alternatives() {
        // The closed-form equivalence holds for any alternative count; this
        // pins it at the largest supported-by-contract size and full sample
        // scale.
        let p = ChoiceProblem::new(vec![0.8, 0.3, 0.0, -0.4, -1.1], 0.7).unwrap();
        let mut rng = rng_from_seed(23);
        let freq = simulate_choices(&p, 1_000_000, &mut rng).unwrap();
        let probs = logit_probabilities(&p);
        let tv: f64 =
            freq.iter().zip(&probs).map(|(f, p)| (f - p).abs()).sum::<f64>() / 2.0;
        assert!(tv < 0.005, "total variation {tv}");
    }

    #[test]
    fn zero_samples_rejected() {
        let p = ChoiceProblem::new(vec![0.0, 1.0], 1.0).unwrap();
        assert!(simulate_choices(&p, 0, &mut rng_from_seed(0)).is_err());
    }

    #[test]
    fn iia_holds_for_logit_by_construction() {
        let full = ChoiceProblem::new(vec![0.4, -0.3, 1.2, 0.0], 0.7).unwrap();
        let full_probs = logit_probabilities(&full);
        let subset = [0usize, 2, 3];
        // Logit over the subset's own utilities.
        let sub = ChoiceProblem::new(vec![0.4, 1.2, 0.0], 0.7).unwrap();
        let sub_probs = logit_probabilities(&sub);
        let dev = iia_ratio_check(&full_probs, &sub_probs, &subset).unwrap();
        assert!(dev < 1e-12, "deviation {dev}");
    }

    #[test]
    fn renormalization_preserves_ratios() {
        // Ratio 5/3 on both sides; the deviation is zero up to one rounding
        // of the two divisions.
        let full = [0.5, 0.3, 0.2];
        let subset = [0usize, 1];
        let sub = renormalize_subset(&full, &subset).unwrap();
        assert_relative_eq!(sub[0] / sub[1], 5.0 / 3.0, max_relative = 1e-15);
        let dev = iia_ratio_check(&full, &sub, &subset).unwrap();
        assert!(dev <= 1e-15, "deviation {dev}");
    }

    #[test]
    fn correlated_noise_violates_iia() {
        // Argmax with correlated Gaussian noise: alternatives 0 and 1 share
        // a common factor and cannibalize each other in the full set, while
        // head-to-head against the independent alternative 2 the odds are
        // even. The ratio p(0)/p(2) therefore shifts when alternative 1 is
        // removed, violating the choice axiom.
        use rand_distr::StandardNormal;
        let mut rng = rng_from_seed(17);
        let n = 400_000usize;
        let mut full_counts = [0u64; 3];
        let mut duel_counts = [0u64; 2]; // {0, 2} offered alone
        for _ in 0..n {
            let shared: f64 = rng.sample(StandardNormal);
            let e0 = 0.95 * shared + 0.312 * rng.sample::<f64, _>(StandardNormal);
            let e1 = 0.95 * shared + 0.312 * rng.sample::<f64, _>(StandardNormal);
            let e2: f64 = rng.sample(StandardNormal);
            let u = [e0, e1, e2];
            let best = (0..3).max_by(|&a, &b| u[a].total_cmp(&u[b])).unwrap();
            full_counts[best] += 1;
            duel_counts[if u[0] >= u[2] { 0 } else { 1 }] += 1;
        }
        let full: Vec<f64> = full_counts.iter().map(|&c| c as f64 / n as f64).collect();
        let duel: Vec<f64> = duel_counts.iter().map(|&c| c as f64 / n as f64).collect();
        // Sanity: the independent alternative beats 1/3 in the full set, the
        // duel is a fair coin.
        assert!(full[2] > 0.36, "p(2) = {}", full[2]);
        assert!((duel[0] - 0.5).abs() < 0.01);
        let dev = iia_ratio_check(&full, &duel, &[0, 2]).unwrap();
        assert!(dev > 0.1, "deviation {dev} too small for a clear violation");
    }

    #[test]
    fn iia_rejects_bad_inputs() {
        assert!(iia_ratio_check(&[0.5, 0.5], &[1.0], &[0]).is_err());
        assert!(iia_ratio_check(&[0.5, 0.5, 0.0], &[0.5, 0.5], &[1, 2]).is_err());
        assert!(iia_ratio_check(&[0.5, 0.5], &[0.5, 0.5], &[0, 0]).is_err());
    }
}
