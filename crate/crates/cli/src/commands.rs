//! Subcommand execution: bind a parsed config to the library operations and
//! persist the outputs with a manifest.

use crate::config::{
    build_choice_params, build_market_config, build_nivol_params, build_stylized_params,
    build_sweep_params, ChoiceParams, RawConfig,
};
use crate::schema::schema_for;
use spinmarket::discrete_choice::{logit_probabilities, simulate_choices, ChoiceProblem};
use spinmarket::experiments::{noise_induced_volatility, sweep_coupling};
use spinmarket::market::{run_simulation, MarketConfig};
use spinmarket::persistence::{trajectory_from_csv, write_run, DataFormat, RunData, RunManifest};
use spinmarket::qdt::{result_json, ProspectDocument};
use spinmarket::rng::rng_from_seed;
use spinmarket::stats::stylized_facts_report;
use std::path::{Path, PathBuf};

/// Environment variable giving the default output root.
pub const OUT_ROOT_ENV: &str = "SPINMARKET_OUT";

#[derive(Debug)]
pub enum CliError {
    /// Bad config file or flags; exit code 1.
    Config(String),
    /// The model or the run itself failed; exit code 2.
    Runtime(String),
}

impl From<crate::config::ConfigError> for CliError {
    fn from(e: crate::config::ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Invocation {
    pub subcommand: &'static str,
    pub config_path: PathBuf,
    pub out: Option<PathBuf>,
    pub seed_override: Option<u64>,
    pub jobs: Option<usize>,
    pub format: DataFormat,
}

impl Invocation {
    /// Resolved output directory: `--out` wins, then the environment root,
    /// then `./runs/<subcommand>`. Returns the directory and the env value
    /// when it was honored.
    fn output_dir(&self) -> (PathBuf, Option<String>) {
        if let Some(out) = &self.out {
            return (out.clone(), None);
        }
        if let Ok(root) = std::env::var(OUT_ROOT_ENV) {
            if !root.is_empty() {
                return (Path::new(&root).join(self.subcommand), Some(root));
            }
        }
        (Path::new("runs").join(self.subcommand), None)
    }

    fn read_config(&self) -> Result<String> {
        std::fs::read_to_string(&self.config_path).map_err(|e| {
            CliError::Config(format!(
                "cannot read config {}: {e}",
                self.config_path.display()
            ))
        })
    }

    /// Parse and schema-check a sectioned config.
    fn raw_config(&self) -> Result<RawConfig> {
        let raw = RawConfig::parse(&self.read_config()?)?;
        raw.check_against_schema(&schema_for(self.subcommand))?;
        Ok(raw)
    }

    fn annotate(&self, manifest: &mut RunManifest, env_root: Option<String>) {
        manifest.seed_override = self.seed_override;
        manifest.out_root_env = env_root;
        manifest.notes.insert(
            "format".to_string(),
            match self.format {
                DataFormat::Csv => "csv".to_string(),
                DataFormat::Json => "json".to_string(),
            },
        );
        if let Some(jobs) = self.jobs {
            manifest.notes.insert("jobs".to_string(), jobs.to_string());
        }
    }

    fn market_config(&self, raw: &RawConfig) -> Result<MarketConfig> {
        let mut config = build_market_config(raw)?;
        if let Some(seed) = self.seed_override {
            config.seed = seed;
        }
        Ok(config)
    }
}

fn runtime(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

fn persist(
    invocation: &Invocation,
    mut manifest: RunManifest,
    data: RunData,
) -> Result<(Vec<PathBuf>, PathBuf)> {
    let (dir, env_root) = invocation.output_dir();
    invocation.annotate(&mut manifest, env_root);
    let paths = write_run(&mut manifest, &data, &dir).map_err(runtime)?;
    Ok((paths, dir))
}

pub fn execute(invocation: &Invocation) -> Result<String> {
    match invocation.subcommand {
        "simulate" => run_simulate(invocation),
        "sweep" => run_sweep(invocation),
        "nivol" => run_nivol(invocation),
        "stylized" => run_stylized(invocation),
        "choice" => run_choice(invocation),
        "qdt" => run_qdt(invocation),
        other => Err(CliError::Config(format!("unknown subcommand {other}"))),
    }
}

fn run_simulate(invocation: &Invocation) -> Result<String> {
    let raw = invocation.raw_config()?;
    let config = invocation.market_config(&raw)?;
    raw.check_all_used()?;
    let trajectory = run_simulation(&config).map_err(runtime)?;
    let mean_abs_m = trajectory
        .magnetization
        .iter()
        .map(|m| m.abs())
        .sum::<f64>()
        / trajectory.len() as f64;
    let final_price = *trajectory.price.last().expect("horizon >= 1");
    let manifest = RunManifest::new(
        "simulate",
        serde_json::to_value(&config).map_err(runtime)?,
        config.seed,
    );
    let (_, dir) = persist(
        invocation,
        manifest,
        RunData::Trajectory {
            trajectory: &trajectory,
            format: invocation.format,
        },
    )?;
    Ok(format!(
        "simulate: {} steps, final price {:.4}, mean |m| {:.4} -> {}",
        trajectory.len(),
        final_price,
        mean_abs_m,
        dir.display()
    ))
}

fn run_sweep(invocation: &Invocation) -> Result<String> {
    let raw = invocation.raw_config()?;
    let config = invocation.market_config(&raw)?;
    let params = build_sweep_params(&raw)?;
    raw.check_all_used()?;
    let points = sweep_coupling(&config, &params.grid, params.burn_in, params.measure_steps)
        .map_err(|e| match e {
            // Grid/window problems are config mistakes even when caught here.
            spinmarket::Error::Config(msg) => CliError::Config(msg),
            other => runtime(other),
        })?;
    let peak = points
        .iter()
        .max_by(|a, b| a.susceptibility.total_cmp(&b.susceptibility))
        .expect("grid is nonempty");
    let peak_lambda = peak.lambda;
    let manifest = RunManifest::new(
        "sweep",
        serde_json::json!({ "market": config, "sweep": params }),
        config.seed,
    );
    let (_, dir) = persist(
        invocation,
        manifest,
        RunData::Sweep {
            points: &points,
            format: invocation.format,
        },
    )?;
    Ok(format!(
        "sweep: {} points, susceptibility peak at lambda = {:.4} -> {}",
        points.len(),
        peak_lambda,
        dir.display()
    ))
}

fn run_nivol(invocation: &Invocation) -> Result<String> {
    let raw = invocation.raw_config()?;
    let config = invocation.market_config(&raw)?;
    let params = build_nivol_params(&raw)?;
    raw.check_all_used()?;
    let result = noise_induced_volatility(&config, params.amplitude, params.period, params.n_seeds)
        .map_err(|e| match e {
            spinmarket::Error::Config(msg) => CliError::Config(msg),
            other => runtime(other),
        })?;
    let manifest = RunManifest::new(
        "nivol",
        serde_json::json!({ "market": config, "nivol": params }),
        config.seed,
    );
    let summary = format!(
        "nivol: driven > baseline in {}/{} pairs (sign test p = {:.4})",
        result.wins,
        result.pairs.len(),
        result.p_value
    );
    let value = serde_json::to_value(&result).map_err(runtime)?;
    let (_, dir) = persist(
        invocation,
        manifest,
        RunData::Json {
            name: "nivol".to_string(),
            value,
        },
    )?;
    Ok(format!("{summary} -> {}", dir.display()))
}

/// Accepts a trajectory CSV (price column), a `price`-headed column, or one
/// price per line.
fn read_prices(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read input {}: {e}", path.display())))?;
    let mut lines = text.lines().peekable();
    let first = *lines
        .peek()
        .ok_or_else(|| CliError::Runtime(format!("input {} is empty", path.display())))?;
    if first == "t,price,log_return,magnetization,lambda,field" {
        let trajectory = trajectory_from_csv(&text, 1.0).map_err(runtime)?;
        return Ok(trajectory.price);
    }
    if first.trim() == "price" {
        lines.next();
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            line.trim().parse::<f64>().map_err(|e| {
                CliError::Runtime(format!("{}:{}: not a price: {e}", path.display(), i + 1))
            })
        })
        .collect()
}

fn run_stylized(invocation: &Invocation) -> Result<String> {
    let raw = invocation.raw_config()?;
    let params = build_stylized_params(&raw)?;
    raw.check_all_used()?;
    let prices = read_prices(Path::new(&params.input))?;
    let report = stylized_facts_report(&prices).map_err(runtime)?;
    let manifest = RunManifest::new(
        "stylized",
        serde_json::to_value(&params).map_err(runtime)?,
        0,
    );
    let summary = format!(
        "stylized: n = {}, excess kurtosis {:.3}, hill mu {:.3} (k = {})",
        report.n, report.excess_kurtosis, report.hill_mu, report.hill_k
    );
    let (_, dir) = persist(invocation, manifest, RunData::Report(&report))?;
    Ok(format!("{summary} -> {}", dir.display()))
}

#[derive(serde::Serialize)]
struct ChoiceOutput<'a> {
    params: &'a ChoiceParams,
    logit: Vec<f64>,
    frequencies: Vec<f64>,
    total_variation: f64,
}

fn run_choice(invocation: &Invocation) -> Result<String> {
    let raw = invocation.raw_config()?;
    let mut params = build_choice_params(&raw)?;
    raw.check_all_used()?;
    if let Some(seed) = invocation.seed_override {
        params.seed = seed;
    }
    let problem = ChoiceProblem::new(params.utilities.clone(), params.gamma).map_err(runtime)?;
    let logit = logit_probabilities(&problem);
    let mut rng = rng_from_seed(params.seed);
    let frequencies = simulate_choices(&problem, params.n_samples, &mut rng).map_err(runtime)?;
    let total_variation: f64 = logit
        .iter()
        .zip(&frequencies)
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        / 2.0;
    let output = ChoiceOutput {
        params: &params,
        logit,
        frequencies,
        total_variation,
    };
    let manifest = RunManifest::new(
        "choice",
        serde_json::to_value(&params).map_err(runtime)?,
        params.seed,
    );
    let value = serde_json::to_value(&output).map_err(runtime)?;
    let (_, dir) = persist(
        invocation,
        manifest,
        RunData::Json {
            name: "choice".to_string(),
            value,
        },
    )?;
    Ok(format!(
        "choice: {} samples over {} alternatives, TV(model, empirical) = {:.5} -> {}",
        params.n_samples,
        params.utilities.len(),
        total_variation,
        dir.display()
    ))
}

fn run_qdt(invocation: &Invocation) -> Result<String> {
    let text = invocation.read_config()?;
    let document =
        ProspectDocument::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?;
    // Constraint violations (probabilities leaving [0, 1]) are model errors,
    // not config syntax errors.
    let set = document.build().map_err(runtime)?;
    let preference = set.preferred();
    let manifest = RunManifest::new("qdt", serde_json::to_value(&document).map_err(runtime)?, 0);
    let (_, dir) = persist(
        invocation,
        manifest,
        RunData::Json {
            name: "qdt".to_string(),
            value: result_json(&set),
        },
    )?;
    Ok(format!(
        "qdt: {} prospects, preferred = {} ({}){} quarter-law gap {:.4} -> {}",
        set.len(),
        preference.index,
        set.labels()[preference.index],
        if preference.tie { " [tie]" } else { "" },
        set.quarter_law_gap(),
        dir.display()
    ))
}
