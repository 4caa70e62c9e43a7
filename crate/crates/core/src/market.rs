//! Kinetic Ising market engine.
//!
//! `N` traders hold a buy (`+1`) or sell (`-1`) position. At each step every
//! trader polls her neighbors and takes the sign of her expected profit,
//!
//! ```text
//! s_i = sign( lambda_t / norm_i * sum_{j in N(i)} s_j + field_t + noise_i )
//! ```
//!
//! and the price then moves by the impact of the aggregate imbalance
//! `m = sum_i s_i / N` plus exogenous news:
//!
//! ```text
//! (p(t) - p(t-1)) / p(t-1) = F(m) + sigma * eta(t)      (raw mode)
//! ln p(t) - ln p(t-1)      = F(m) + sigma * eta(t)      (log mode, default)
//! ```
//!
//! With logistic agent noise the spin update is exactly Glauber dynamics,
//! which is what makes the imitation-versus-noise competition a genuine
//! Ising phase transition (see [`meanfield_critical_coupling`]).

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, SimRng};
use crate::schedule::{CouplingSchedule, FieldSchedule};
use crate::topology::{build_topology, Topology, TopologySpec};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

/// Price impact of the order imbalance. `F(0) = 0`, odd, increasing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ImpactFunction {
    /// Kyle's linear impact `F(x) = lambda * x`.
    Linear { lambda: f64 },
    /// Concave impact `F(x) = lambda * sign(x) * sqrt(|x|)`.
    SquareRoot { lambda: f64 },
}

impl ImpactFunction {
    pub fn validate(&self) -> Result<()> {
        let lambda = match *self {
            ImpactFunction::Linear { lambda } | ImpactFunction::SquareRoot { lambda } => lambda,
        };
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::config(format!(
                "impact.lambda must be > 0, got {lambda}"
            )));
        }
        Ok(())
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match *self {
            ImpactFunction::Linear { lambda } => lambda * x,
            ImpactFunction::SquareRoot { lambda } => lambda * x.signum() * x.abs().sqrt(),
        }
    }
}

/// Distribution of the traders' idiosyncratic news perception.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentNoise {
    /// Logistic(0, scale); the choice that makes the update rule Glauber
    /// dynamics.
    Logistic { scale: f64 },
    /// Gaussian(0, std), matching the price equation's news term.
    Gaussian { std: f64 },
}

impl AgentNoise {
    pub fn validate(&self) -> Result<()> {
        let v = match *self {
            AgentNoise::Logistic { scale } => scale,
            AgentNoise::Gaussian { std } => std,
        };
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::config(format!(
                "agent noise scale must be > 0, got {v}"
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AgentNoise::Logistic { scale } => {
                let u: f64 = rng.sample(rand::distr::Open01);
                scale * (u / (1.0 - u)).ln()
            }
            AgentNoise::Gaussian { std } => std * rng.sample::<f64, _>(StandardNormal),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub agent: AgentNoise,
    /// Price volatility per unit time; scales the Gaussian news term of the
    /// price equation.
    pub price_sigma: f64,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        self.agent.validate()?;
        if !(self.price_sigma >= 0.0) || !self.price_sigma.is_finite() {
            return Err(Error::config(format!(
                "noise.price_sigma must be >= 0, got {}",
                self.price_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateScheme {
    /// All agents decide from the same previous spin vector. Matches the
    /// simultaneous decision timing of the price equation; the default.
    Synchronous,
    /// Agents update one at a time in a fresh random permutation per step,
    /// each seeing the latest spins (conventional Glauber ordering).
    RandomSequential,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceMode {
    /// Returns accumulate in log price; positivity is automatic. Default.
    Log,
    /// The price equation taken literally. A step driving the price to or
    /// below zero is rejected with a simulation error.
    Raw,
}

/// Normalization of the restricted neighbor sum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NeighborNorm {
    /// Divide by the total number of agents, as in the model's update rule.
    /// On sparse topologies this makes the effective coupling
    /// degree-dependent. Default.
    TotalAgents,
    /// Divide by the agent's own degree |N(i)|; flagged in run manifests.
    Degree,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketConfig {
    pub n_agents: usize,
    pub topology: TopologySpec,
    pub impact: ImpactFunction,
    pub noise: NoiseSpec,
    pub coupling: CouplingSchedule,
    pub field: FieldSchedule,
    pub update_scheme: UpdateScheme,
    pub horizon: usize,
    pub initial_price: f64,
    pub seed: u64,
    pub price_mode: PriceMode,
    pub neighbor_norm: NeighborNorm,
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_agents < 2 {
            return Err(Error::config(format!(
                "n_agents must be >= 2, got {}",
                self.n_agents
            )));
        }
        if self.horizon < 1 {
            return Err(Error::config("horizon must be >= 1".to_string()));
        }
        if !(self.initial_price > 0.0) || !self.initial_price.is_finite() {
            return Err(Error::config(format!(
                "initial_price must be > 0, got {}",
                self.initial_price
            )));
        }
        self.impact.validate()?;
        self.noise.validate()?;
        self.coupling.validate()?;
        self.field.validate()?;
        Ok(())
    }
}

/// The evolving simulation state.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    pub spins: Vec<i8>,
    pub price: f64,
    pub t: usize,
}

impl MarketState {
    pub fn new(spins: Vec<i8>, price: f64) -> Result<Self> {
        if spins.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::domain("spins must be +1 or -1".to_string()));
        }
        if !(price > 0.0) {
            return Err(Error::domain(format!("price must be > 0, got {price}")));
        }
        Ok(MarketState { spins, price, t: 0 })
    }

    pub fn spin_sum(&self) -> i64 {
        self.spins.iter().map(|&s| s as i64).sum()
    }

    /// Order imbalance `m = sum s_i / N`, in [-1, 1].
    pub fn magnetization(&self) -> f64 {
        self.spin_sum() as f64 / self.spins.len() as f64
    }
}

fn neighbor_sum(spins: &[i8], topo: &Topology, spin_sum: i64, agent: usize) -> i64 {
    if topo.is_complete() {
        spin_sum - spins[agent] as i64
    } else {
        topo.neighbors(agent)
            .iter()
            .map(|&j| spins[j as usize] as i64)
            .sum()
    }
}

fn norm_for(config: &MarketConfig, topo: &Topology, agent: usize) -> f64 {
    match config.neighbor_norm {
        NeighborNorm::TotalAgents => config.n_agents as f64,
        NeighborNorm::Degree => topo.degree(agent) as f64,
    }
}

/// `sign` with the tie kept on the agent's previous position. A zero
/// argument has probability zero under continuous noise; retaining the old
/// spin avoids spending extra randomness on it.
fn decide_spin(argument: f64, previous: i8) -> i8 {
    if argument > 0.0 {
        1
    } else if argument < 0.0 {
        -1
    } else {
        previous
    }
}

/// One spin-update pass over all agents; returns the new spin vector.
///
/// Noise draws are consumed from `rng` in agent-index order under
/// [`UpdateScheme::Synchronous`] (after no other draws), and in permutation
/// order under [`UpdateScheme::RandomSequential`] (after the draws consumed
/// by the shuffle itself).
pub fn agent_update<R: Rng + ?Sized>(
    state: &MarketState,
    topo: &Topology,
    config: &MarketConfig,
    lambda_t: f64,
    field_t: f64,
    rng: &mut R,
) -> Vec<i8> {
    let mut new_spins = state.spins.clone();
    let mut spin_sum = state.spin_sum();
    step_spins(
        &state.spins,
        &mut new_spins,
        &mut spin_sum,
        topo,
        config,
        lambda_t,
        field_t,
        rng,
    );
    new_spins
}

/// In-place worker shared by `agent_update` and the simulation loop.
/// `old` and `new` must alias the same contents on entry; `spin_sum` must be
/// the sum of `old` and is left as the sum of `new`.
#[allow(clippy::too_many_arguments)]
fn step_spins<R: Rng + ?Sized>(
    old: &[i8],
    new: &mut [i8],
    spin_sum: &mut i64,
    topo: &Topology,
    config: &MarketConfig,
    lambda_t: f64,
    field_t: f64,
    rng: &mut R,
) {
    match config.update_scheme {
        UpdateScheme::Synchronous => {
            let old_sum = *spin_sum;
            let mut new_sum = 0i64;
            for i in 0..old.len() {
                let local = lambda_t * neighbor_sum(old, topo, old_sum, i) as f64
                    / norm_for(config, topo, i);
                let s = decide_spin(local + field_t + config.noise.agent.sample(rng), old[i]);
                new[i] = s;
                new_sum += s as i64;
            }
            *spin_sum = new_sum;
        }
        UpdateScheme::RandomSequential => {
            let mut order: Vec<u32> = (0..old.len() as u32).collect();
            order.shuffle(rng);
            for &raw in &order {
                let i = raw as usize;
                let local = lambda_t * neighbor_sum(new, topo, *spin_sum, i) as f64
                    / norm_for(config, topo, i);
                let s = decide_spin(local + field_t + config.noise.agent.sample(rng), new[i]);
                *spin_sum += (s - new[i]) as i64;
                new[i] = s;
            }
        }
    }
}

/// Trader `i`'s conditional expected profit for holding `candidate` over the
/// next step, given her poll of the neighbors and her news perception
/// `noise`. [`agent_update`]'s chosen spin is the argmax of this quantity
/// over the two candidates (previous spin on a tie).
#[allow(clippy::too_many_arguments)]
pub fn expected_pnl(
    agent: usize,
    state: &MarketState,
    topo: &Topology,
    config: &MarketConfig,
    lambda_t: f64,
    field_t: f64,
    noise: f64,
    candidate: i8,
) -> f64 {
    let local = lambda_t * neighbor_sum(&state.spins, topo, state.spin_sum(), agent) as f64
        / norm_for(config, topo, agent);
    (local + field_t + noise) * state.price * candidate as f64
}

fn step_price<R: Rng + ?Sized>(
    price: f64,
    magnetization: f64,
    config: &MarketConfig,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let eta: f64 = rng.sample(StandardNormal);
    let drive = config.impact.evaluate(magnetization) + config.noise.price_sigma * eta;
    match config.price_mode {
        PriceMode::Log => {
            let new = price * drive.exp();
            Ok((new, drive))
        }
        PriceMode::Raw => {
            let new = price * (1.0 + drive);
            if !(new > 0.0) {
                return Err(Error::Simulation(format!(
                    "raw-mode price step produced non-positive price {new} \
                     (return {drive:.6}); rerun with price_mode = log"
                )));
            }
            Ok((new, (new / price).ln()))
        }
    }
}

/// Form the next price from the current imbalance. Consumes one Gaussian
/// draw from `rng`.
pub fn price_update<R: Rng + ?Sized>(
    state: &MarketState,
    config: &MarketConfig,
    rng: &mut R,
) -> Result<f64> {
    Ok(step_price(state.price, state.magnetization(), config, rng)?.0)
}

/// Per-step record of a full run. All vectors have length `horizon`; entry
/// `t` holds the state right after step `t+1` completed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub initial_price: f64,
    pub price: Vec<f64>,
    pub log_return: Vec<f64>,
    pub magnetization: Vec<f64>,
    pub lambda: Vec<f64>,
    pub field: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.price.len()
    }

    pub fn is_empty(&self) -> bool {
        self.price.is_empty()
    }
}

/// Run the full market simulation.
///
/// Each step first evaluates the schedules, then updates the spins, then
/// forms the price: agents decide at `t-1`, the price they face settles at
/// `t`. Initial spins are drawn uniformly from the run's seed, so two runs
/// with identical configs produce bitwise-identical trajectories.
pub fn run_simulation(config: &MarketConfig) -> Result<Trajectory> {
    config.validate()?;
    let topo = build_topology(config.n_agents, &config.topology)?;
    run_simulation_on(config, &topo)
}

/// Same as [`run_simulation`] with a pre-built topology, for callers running
/// many configs on the same graph.
pub fn run_simulation_on(config: &MarketConfig, topo: &Topology) -> Result<Trajectory> {
    let horizon = config.horizon;
    let lambda_path = config.coupling.sample_path(horizon);
    let field_path = config.field.sample_path(horizon);

    let mut rng: SimRng = rng_from_seed(config.seed);
    let mut spins: Vec<i8> = (0..config.n_agents)
        .map(|_| if rng.random::<bool>() { 1 } else { -1 })
        .collect();
    let mut spin_sum: i64 = spins.iter().map(|&s| s as i64).sum();
    let mut scratch = spins.clone();
    let mut price = config.initial_price;

    let mut out = Trajectory {
        initial_price: config.initial_price,
        price: Vec::with_capacity(horizon),
        log_return: Vec::with_capacity(horizon),
        magnetization: Vec::with_capacity(horizon),
        lambda: lambda_path.clone(),
        field: field_path.clone(),
    };

    for t in 0..horizon {
        match config.update_scheme {
            UpdateScheme::Synchronous => {
                scratch.copy_from_slice(&spins);
                step_spins(
                    &scratch,
                    &mut spins,
                    &mut spin_sum,
                    topo,
                    config,
                    lambda_path[t],
                    field_path[t],
                    &mut rng,
                );
            }
            UpdateScheme::RandomSequential => {
                step_spins(
                    &scratch, // unused by the sequential branch
                    &mut spins,
                    &mut spin_sum,
                    topo,
                    config,
                    lambda_path[t],
                    field_path[t],
                    &mut rng,
                );
            }
        }
        let m = spin_sum as f64 / config.n_agents as f64;
        let (new_price, log_return) = step_price(price, m, config, &mut rng)?;
        price = new_price;
        out.price.push(price);
        out.log_return.push(log_return);
        out.magnetization.push(m);
    }
    Ok(out)
}

/// Critical imitation strength on the complete graph, from the mean-field
/// self-consistency of the update rule.
///
/// Logistic(scale s) noise gives `m = tanh(lambda m / (2 s))`, hence
/// `lambda_c = 2 s`; Gaussian(std g) gives `m = erf(lambda m / (g sqrt 2))`,
/// hence `lambda_c = g sqrt(pi / 2)`.
pub fn meanfield_critical_coupling(noise: &NoiseSpec) -> f64 {
    match noise.agent {
        AgentNoise::Logistic { scale } => 2.0 * scale,
        AgentNoise::Gaussian { std } => std * (std::f64::consts::PI / 2.0).sqrt(),
    }
}

#[cfg(test)]
pub(crate) fn test_config(n_agents: usize, horizon: usize, seed: u64) -> MarketConfig {
    MarketConfig {
        n_agents,
        topology: TopologySpec::Complete,
        impact: ImpactFunction::Linear { lambda: 0.01 },
        noise: NoiseSpec {
            agent: AgentNoise::Logistic { scale: 1.0 },
            price_sigma: 0.01,
        },
        coupling: CouplingSchedule::Constant { lambda: 0.0 },
        field: FieldSchedule::None,
        update_scheme: UpdateScheme::Synchronous,
        horizon,
        initial_price: 100.0,
        seed,
        price_mode: PriceMode::Log,
        neighbor_norm: NeighborNorm::TotalAgents,
    }
}
