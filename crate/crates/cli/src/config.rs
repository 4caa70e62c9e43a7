//! Sectioned key-value config parsing and typed builders.
//!
//! The on-disk format is diff-friendly plain text:
//!
//! ```text
//! # experiment: near-critical baseline
//! [market]
//! n_agents = 1000
//! ```
//!
//! A JSON document with the same two-level structure is accepted as an
//! alternative (detected by a leading `{`). Unknown keys, missing required
//! keys and invariant violations are hard errors carrying the line number.

use crate::schema::KeySpec;
use spinmarket::market::{
    AgentNoise, ImpactFunction, MarketConfig, NeighborNorm, NoiseSpec, PriceMode, UpdateScheme,
};
use spinmarket::schedule::{CouplingSchedule, FieldSchedule};
use spinmarket::topology::TopologySpec;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for ConfigError {}

type Result<T> = std::result::Result<T, ConfigError>;

fn err<T>(msg: impl Into<String>) -> Result<T> {
    Err(ConfigError(msg.into()))
}

/// One parsed `key = value` entry with its source line (0 for JSON input).
#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
    used: std::cell::Cell<bool>,
}

/// Flat view of a sectioned config.
#[derive(Debug, Default)]
pub struct RawConfig {
    entries: BTreeMap<(String, String), Entry>,
}

impl RawConfig {
    /// Parse either the key-value format or the JSON alternative.
    pub fn parse(text: &str) -> Result<RawConfig> {
        if text.trim_start().starts_with('{') {
            Self::parse_json(text)
        } else {
            Self::parse_kv(text)
        }
    }

    fn parse_kv(text: &str) -> Result<RawConfig> {
        let mut entries = BTreeMap::new();
        let mut section = String::new();
        for (idx, raw_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw_line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name
                    .strip_suffix(']')
                    .ok_or_else(|| {
                        ConfigError(format!("line {line_no}: unterminated section header"))
                    })?
                    .trim();
                if name.is_empty() {
                    return err(format!("line {line_no}: empty section name"));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!(
                    "line {line_no}: expected `key = value`, got {line:?}"
                ))
            })?;
            let key = key.trim();
            if key.is_empty() {
                return err(format!("line {line_no}: empty key"));
            }
            if section.is_empty() {
                return err(format!(
                    "line {line_no}: key {key:?} appears before any [section]"
                ));
            }
            let previous = entries.insert(
                (section.clone(), key.to_string()),
                Entry {
                    value: value.trim().to_string(),
                    line: line_no,
                    used: std::cell::Cell::new(false),
                },
            );
            if let Some(previous) = previous {
                return err(format!(
                    "line {line_no}: duplicate key [{section}] {key} (first set on line {})",
                    previous.line
                ));
            }
        }
        Ok(RawConfig { entries })
    }

    fn parse_json(text: &str) -> Result<RawConfig> {
        let value: serde_json::Value = serde_json::from_str(text)
            .map_err(|e| ConfigError(format!("invalid JSON config: {e}")))?;
        let object = value
            .as_object()
            .ok_or_else(|| ConfigError("JSON config must be an object of sections".to_string()))?;
        let mut entries = BTreeMap::new();
        for (section, body) in object {
            let body = body.as_object().ok_or_else(|| {
                ConfigError(format!("JSON config section {section:?} must be an object"))
            })?;
            for (key, val) in body {
                let text_value = match val {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Bool(b) => b.to_string(),
                    serde_json::Value::Number(n) => n.to_string(),
                    other => {
                        return err(format!("[{section}] {key}: unsupported JSON value {other}"))
                    }
                };
                entries.insert(
                    (section.clone(), key.clone()),
                    Entry {
                        value: text_value,
                        line: 0,
                        used: std::cell::Cell::new(false),
                    },
                );
            }
        }
        Ok(RawConfig { entries })
    }

    /// Reject any key not present in the schema, citing its line.
    pub fn check_against_schema(&self, schema: &[&KeySpec]) -> Result<()> {
        for ((section, key), entry) in &self.entries {
            let known = schema.iter().any(|s| s.section == section && s.key == key);
            if !known {
                return err(format!("{}: unknown key [{section}] {key}", at(entry.line)));
            }
        }
        Ok(())
    }

    /// Every key must have been consumed by a builder; catches keys that are
    /// in the schema but not applicable to the configured kind.
    pub fn check_all_used(&self) -> Result<()> {
        for ((section, key), entry) in &self.entries {
            if !entry.used.get() {
                return err(format!(
                    "{}: key [{section}] {key} is not applicable here (wrong kind?)",
                    at(entry.line)
                ));
            }
        }
        Ok(())
    }

    fn raw(&self, section: &str, key: &str) -> Option<&Entry> {
        let entry = self.entries.get(&(section.to_string(), key.to_string()));
        if let Some(e) = entry {
            e.used.set(true);
        }
        entry
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.raw(section, key).map(|e| e.value.as_str())
    }

    pub fn require(&self, section: &str, key: &str) -> Result<&str> {
        self.get(section, key)
            .ok_or_else(|| ConfigError(format!("missing required key [{section}] {key}")))
    }

    pub fn get_or<'a>(&'a self, section: &str, key: &str, default: &'a str) -> &'a str {
        self.get(section, key).unwrap_or(default)
    }

    fn line_of(&self, section: &str, key: &str) -> usize {
        self.entries
            .get(&(section.to_string(), key.to_string()))
            .map(|e| e.line)
            .unwrap_or(0)
    }

    pub fn parse_value<T: std::str::FromStr>(
        &self,
        section: &str,
        key: &str,
        value: &str,
        what: &str,
    ) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        value.parse().map_err(|e| {
            ConfigError(format!(
                "{}: [{section}] {key} = {value:?} is not a valid {what}: {e}",
                at(self.line_of(section, key))
            ))
        })
    }

    pub fn f64_or(&self, section: &str, key: &str, default: &str) -> Result<f64> {
        let value = self.get_or(section, key, default).to_string();
        self.parse_value(section, key, &value, "number")
    }

    pub fn f64_req(&self, section: &str, key: &str) -> Result<f64> {
        let value = self.require(section, key)?.to_string();
        self.parse_value(section, key, &value, "number")
    }

    pub fn usize_req(&self, section: &str, key: &str) -> Result<usize> {
        let value = self.require(section, key)?.to_string();
        self.parse_value(section, key, &value, "nonnegative integer")
    }

    pub fn u64_req(&self, section: &str, key: &str) -> Result<u64> {
        let value = self.require(section, key)?.to_string();
        self.parse_value(section, key, &value, "nonnegative integer")
    }

    pub fn bool_or(&self, section: &str, key: &str, default: &str) -> Result<bool> {
        let value = self.get_or(section, key, default).to_string();
        self.parse_value(section, key, &value, "boolean (true/false)")
    }
}

fn at(line: usize) -> String {
    if line == 0 {
        "(json)".to_string()
    } else {
        format!("line {line}")
    }
}

fn bad_kind<T>(raw: &RawConfig, section: &str, value: &str, allowed: &str) -> Result<T> {
    err(format!(
        "{}: [{section}] kind = {value:?} is not one of {allowed}",
        at(raw.line_of(section, "kind"))
    ))
}

pub fn build_market_config(raw: &RawConfig) -> Result<MarketConfig> {
    let n_agents = raw.usize_req("market", "n_agents")?;
    if n_agents < 2 {
        return err(format!(
            "{}: [market] n_agents must be >= 2, got {n_agents}",
            at(raw.line_of("market", "n_agents"))
        ));
    }
    let horizon = raw.usize_req("market", "horizon")?;
    let seed = raw.u64_req("market", "seed")?;
    let initial_price = raw.f64_or("market", "initial_price", "100.0")?;

    let update_scheme = match raw.get_or("market", "update_scheme", "synchronous") {
        "synchronous" => UpdateScheme::Synchronous,
        "random_sequential" => UpdateScheme::RandomSequential,
        other => {
            return err(format!(
                "{}: [market] update_scheme = {other:?} is not synchronous | random_sequential",
                at(raw.line_of("market", "update_scheme"))
            ))
        }
    };
    let price_mode = match raw.get_or("market", "price_mode", "log") {
        "log" => PriceMode::Log,
        "raw" => PriceMode::Raw,
        other => {
            return err(format!(
                "{}: [market] price_mode = {other:?} is not log | raw",
                at(raw.line_of("market", "price_mode"))
            ))
        }
    };
    let neighbor_norm = match raw.get_or("market", "neighbor_norm", "total_agents") {
        "total_agents" => NeighborNorm::TotalAgents,
        "degree" => NeighborNorm::Degree,
        other => {
            return err(format!(
                "{}: [market] neighbor_norm = {other:?} is not total_agents | degree",
                at(raw.line_of("market", "neighbor_norm"))
            ))
        }
    };

    let topology = match raw.get_or("topology", "kind", "complete") {
        "complete" => TopologySpec::Complete,
        "lattice2d" => TopologySpec::Lattice2d {
            width: raw.usize_req("topology", "width")?,
            height: raw.usize_req("topology", "height")?,
            periodic: raw.bool_or("topology", "periodic", "false")?,
        },
        "erdos_renyi" => TopologySpec::ErdosRenyi {
            edge_prob: raw.f64_req("topology", "edge_prob")?,
            seed: raw.u64_req("topology", "seed")?,
        },
        other => return bad_kind(raw, "topology", other, "complete | lattice2d | erdos_renyi"),
    };

    let impact = match raw.get_or("impact", "kind", "linear") {
        "linear" => ImpactFunction::Linear {
            lambda: raw.f64_or("impact", "lambda", "0.01")?,
        },
        "square_root" => ImpactFunction::SquareRoot {
            lambda: raw.f64_or("impact", "lambda", "0.01")?,
        },
        other => return bad_kind(raw, "impact", other, "linear | square_root"),
    };

    let agent_scale = raw.f64_or("noise", "agent_scale", "1.0")?;
    let agent = match raw.get_or("noise", "agent", "logistic") {
        "logistic" => AgentNoise::Logistic { scale: agent_scale },
        "gaussian" => AgentNoise::Gaussian { std: agent_scale },
        other => {
            return err(format!(
                "{}: [noise] agent = {other:?} is not logistic | gaussian",
                at(raw.line_of("noise", "agent"))
            ))
        }
    };
    let noise = NoiseSpec {
        agent,
        price_sigma: raw.f64_or("noise", "price_sigma", "0.0")?,
    };

    let coupling = match raw.require("coupling", "kind")? {
        "constant" => CouplingSchedule::Constant {
            lambda: raw.f64_req("coupling", "lambda")?,
        },
        "linear_ramp" => CouplingSchedule::LinearRamp {
            start: raw.f64_req("coupling", "start")?,
            end: raw.f64_req("coupling", "end")?,
        },
        "sinusoid" => CouplingSchedule::Sinusoid {
            mean: raw.f64_req("coupling", "mean")?,
            amplitude: raw.f64_req("coupling", "amplitude")?,
            period: raw.f64_req("coupling", "period")?,
        },
        "ou_process" => CouplingSchedule::OuProcess {
            mean: raw.f64_req("coupling", "mean")?,
            reversion: raw.f64_req("coupling", "reversion")?,
            vol: raw.f64_req("coupling", "vol")?,
            seed: raw.u64_req("coupling", "seed")?,
        },
        other => {
            return bad_kind(
                raw,
                "coupling",
                other,
                "constant | linear_ramp | sinusoid | ou_process",
            )
        }
    };

    let field = match raw.get_or("field", "kind", "none") {
        "none" => FieldSchedule::None,
        "sinusoid" => FieldSchedule::Sinusoid {
            amplitude: raw.f64_req("field", "amplitude")?,
            period: raw.f64_req("field", "period")?,
        },
        "square_wave" => FieldSchedule::SquareWave {
            amplitude: raw.f64_req("field", "amplitude")?,
            period: raw.f64_req("field", "period")?,
        },
        "iid_shocks" => FieldSchedule::IidShocks {
            std: raw.f64_req("field", "std")?,
            seed: raw.u64_req("field", "seed")?,
        },
        other => {
            return bad_kind(
                raw,
                "field",
                other,
                "none | sinusoid | square_wave | iid_shocks",
            )
        }
    };

    let config = MarketConfig {
        n_agents,
        topology,
        impact,
        noise,
        coupling,
        field,
        update_scheme,
        horizon,
        initial_price,
        seed,
        price_mode,
        neighbor_norm,
    };
    config.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(config)
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct SweepParams {
    pub grid: Vec<f64>,
    pub burn_in: usize,
    pub measure_steps: usize,
}

pub fn build_sweep_params(raw: &RawConfig) -> Result<SweepParams> {
    let grid: Vec<f64> = raw
        .require("sweep", "grid")?
        .split(',')
        .map(|v| raw.parse_value::<f64>("sweep", "grid", v.trim(), "number"))
        .collect::<Result<_>>()?;
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return err(format!(
            "{}: [sweep] grid must be strictly ascending",
            at(raw.line_of("sweep", "grid"))
        ));
    }
    Ok(SweepParams {
        grid,
        burn_in: raw.usize_req("sweep", "burn_in")?,
        measure_steps: raw.usize_req("sweep", "measure_steps")?,
    })
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct NivolParams {
    pub amplitude: f64,
    pub period: f64,
    pub n_seeds: usize,
}

pub fn build_nivol_params(raw: &RawConfig) -> Result<NivolParams> {
    Ok(NivolParams {
        amplitude: raw.f64_req("nivol", "amplitude")?,
        period: raw.f64_req("nivol", "period")?,
        n_seeds: {
            let value = raw.get_or("nivol", "n_seeds", "20").to_string();
            raw.parse_value("nivol", "n_seeds", &value, "nonnegative integer")?
        },
    })
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ChoiceParams {
    pub utilities: Vec<f64>,
    pub gamma: f64,
    pub n_samples: usize,
    pub seed: u64,
}

pub fn build_choice_params(raw: &RawConfig) -> Result<ChoiceParams> {
    let utilities: Vec<f64> = raw
        .require("choice", "utilities")?
        .split(',')
        .map(|v| raw.parse_value::<f64>("choice", "utilities", v.trim(), "number"))
        .collect::<Result<_>>()?;
    Ok(ChoiceParams {
        utilities,
        gamma: raw.f64_or("choice", "gamma", "1.0")?,
        n_samples: {
            let value = raw.get_or("choice", "n_samples", "100000").to_string();
            raw.parse_value("choice", "n_samples", &value, "nonnegative integer")?
        },
        seed: raw.u64_req("choice", "seed")?,
    })
}

#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct StylizedParams {
    pub input: String,
}

pub fn build_stylized_params(raw: &RawConfig) -> Result<StylizedParams> {
    Ok(StylizedParams {
        input: raw.require("stylized", "input")?.to_string(),
    })
}
