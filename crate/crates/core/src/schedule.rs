//! Time profiles for the imitation strength and the external news field.
//!
//! The coupling schedules implement the "sweeping of an instability"
//! mechanism: the imitation strength is driven back and forth across its
//! critical value over the course of a run. The paper names the mechanism
//! but no functional form, so the four kinds here are our own choices and
//! are recorded in run manifests. Produced coupling values are clamped at 0.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingSchedule {
    Constant {
        lambda: f64,
    },
    LinearRamp {
        start: f64,
        end: f64,
    },
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period: f64,
    },
    /// Discrete Ornstein-Uhlenbeck: `x' = x + reversion*(mean - x) + vol*z`,
    /// clamped at 0, started at `mean`, driven by its own seed.
    OuProcess {
        mean: f64,
        reversion: f64,
        vol: f64,
        seed: u64,
    },
}

impl CouplingSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CouplingSchedule::Constant { lambda } => {
                ensure_finite("coupling.lambda", lambda)?;
                ensure_nonnegative("coupling.lambda", lambda)
            }
            CouplingSchedule::LinearRamp { start, end } => {
                ensure_finite("coupling.start", start)?;
                ensure_finite("coupling.end", end)?;
                ensure_nonnegative("coupling.start", start)?;
                ensure_nonnegative("coupling.end", end)
            }
            CouplingSchedule::Sinusoid {
                mean,
                amplitude,
                period,
            } => {
                ensure_finite("coupling.mean", mean)?;
                ensure_finite("coupling.amplitude", amplitude)?;
                ensure_positive("coupling.period", period)
            }
            CouplingSchedule::OuProcess {
                mean,
                reversion,
                vol,
                ..
            } => {
                ensure_nonnegative("coupling.mean", mean)?;
                if !(0.0..=1.0).contains(&reversion) {
                    return Err(Error::config(format!(
                        "coupling.reversion must be in [0, 1], got {reversion}"
                    )));
                }
                ensure_nonnegative("coupling.vol", vol)
            }
        }
    }

    /// Evaluate the whole path up front; `path[t]` is the coupling used at
    /// step `t` (0-based).
    pub fn sample_path(&self, horizon: usize) -> Vec<f64> {
        match *self {
            CouplingSchedule::Constant { lambda } => vec![lambda.max(0.0); horizon],
            CouplingSchedule::LinearRamp { start, end } => {
                if horizon == 1 {
                    return vec![start.max(0.0)];
                }
                (0..horizon)
                    .map(|t| {
                        let frac = t as f64 / (horizon - 1) as f64;
                        (start + (end - start) * frac).max(0.0)
                    })
                    .collect()
            }
            CouplingSchedule::Sinusoid {
                mean,
                amplitude,
                period,
            } => (0..horizon)
                .map(|t| {
                    (mean + amplitude * (std::f64::consts::TAU * t as f64 / period).sin()).max(0.0)
                })
                .collect(),
            CouplingSchedule::OuProcess {
                mean,
                reversion,
                vol,
                seed,
            } => {
                let mut rng = rng_from_seed(seed);
                let mut x = mean;
                (0..horizon)
                    .map(|_| {
                        let current = x;
                        let z: f64 = rng.sample(StandardNormal);
                        x = (x + reversion * (mean - x) + vol * z).max(0.0);
                        current
                    })
                    .collect()
            }
        }
    }
}

/// Global news signal added to every agent's decision argument.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSchedule {
    None,
    Sinusoid {
        amplitude: f64,
        period: f64,
    },
    /// `+amplitude` for the first half of each period, `-amplitude` for the
    /// second half.
    SquareWave {
        amplitude: f64,
        period: f64,
    },
    IidShocks {
        std: f64,
        seed: u64,
    },
}

impl FieldSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FieldSchedule::None => Ok(()),
            FieldSchedule::Sinusoid { amplitude, period }
            | FieldSchedule::SquareWave { amplitude, period } => {
                ensure_finite("field.amplitude", amplitude)?;
                ensure_positive("field.period", period)
            }
            FieldSchedule::IidShocks { std, .. } => ensure_nonnegative("field.std", std),
        }
    }

    pub fn sample_path(&self, horizon: usize) -> Vec<f64> {
        match *self {
            FieldSchedule::None => vec![0.0; horizon],
            FieldSchedule::Sinusoid { amplitude, period } => (0..horizon)
                .map(|t| amplitude * (std::f64::consts::TAU * t as f64 / period).sin())
                .collect(),
            FieldSchedule::SquareWave { amplitude, period } => (0..horizon)
                .map(|t| {
                    let phase = (t as f64).rem_euclid(period) / period;
                    if phase < 0.5 {
                        amplitude
                    } else {
                        -amplitude
                    }
                })
                .collect(),
            FieldSchedule::IidShocks { std, seed } => {
                let mut rng = rng_from_seed(seed);
                (0..horizon)
                    .map(|_| std * rng.sample::<f64, _>(StandardNormal))
                    .collect()
            }
        }
    }
}

fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be finite, got {v}")))
    }
}

fn ensure_nonnegative(name: &str, v: f64) -> Result<()> {
    ensure_finite(name, v)?;
    if v >= 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be >= 0, got {v}")))
    }
}

fn ensure_positive(name: &str, v: f64) -> Result<()> {
    ensure_finite(name, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::config(format!("{name} must be > 0, got {v}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_path() {
        let path = CouplingSchedule::Constant { lambda: 1.5 }.sample_path(4);
        assert_eq!(path, vec![1.5; 4]);
    }

    #[test]
    fn ramp_endpoints() {
        let path = CouplingSchedule::LinearRamp {
            start: 1.0,
            end: 3.0,
        }
        .sample_path(5);
        assert_eq!(path[0], 1.0);
        assert_eq!(path[4], 3.0);
        assert_eq!(path[2], 2.0);
    }

    #[test]
    fn sinusoid_clamped_at_zero() {
        let path = CouplingSchedule::Sinusoid {
            mean: 0.5,
            amplitude: 2.0,
            period: 8.0,
        }
        .sample_path(16);
        assert!(path.iter().all(|&v| v >= 0.0));
        assert!(path.contains(&0.0), "clamp never hit");
        assert!(path.iter().any(|&v| v > 2.0));
    }

    #[test]
    fn ou_deterministic_and_clamped() {
        let sched = CouplingSchedule::OuProcess {
            mean: 0.2,
            reversion: 0.1,
            vol: 0.5,
            seed: 12,
        };
        let a = sched.sample_path(500);
        let b = sched.sample_path(500);
        assert_eq!(a, b);
        assert!(a.iter().all(|&v| v >= 0.0));
        assert_eq!(a[0], 0.2);
    }

    #[test]
    fn ou_reverts_to_mean() {
        let sched = CouplingSchedule::OuProcess {
            mean: 2.0,
            reversion: 0.2,
            vol: 0.05,
            seed: 3,
        };
        let path = sched.sample_path(5_000);
        let mean = path.iter().sum::<f64>() / path.len() as f64;
        assert!((mean - 2.0).abs() < 0.1, "OU mean {mean}");
    }

    #[test]
    fn square_wave_alternates() {
        let path = FieldSchedule::SquareWave {
            amplitude: 0.3,
            period: 4.0,
        }
        .sample_path(8);
        assert_eq!(path, vec![0.3, 0.3, -0.3, -0.3, 0.3, 0.3, -0.3, -0.3]);
    }

    #[test]
    fn none_field_is_zero() {
        assert!(FieldSchedule::None
            .sample_path(10)
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn iid_shocks_deterministic() {
        let sched = FieldSchedule::IidShocks { std: 0.1, seed: 7 };
        assert_eq!(sched.sample_path(100), sched.sample_path(100));
    }

    #[test]
    fn validation_catches_bad_values() {
        assert!(CouplingSchedule::Constant { lambda: -1.0 }
            .validate()
            .is_err());
        assert!(CouplingSchedule::Sinusoid {
            mean: 1.0,
            amplitude: 1.0,
            period: 0.0
        }
        .validate()
        .is_err());
        assert!(CouplingSchedule::OuProcess {
            mean: 1.0,
            reversion: 1.5,
            vol: 0.1,
            seed: 0
        }
        .validate()
        .is_err());
        assert!(FieldSchedule::IidShocks { std: -0.1, seed: 0 }
            .validate()
            .is_err());
    }
}
