//! Interaction graphs giving each agent its neighbor set.

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// How the agents are wired together.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologySpec {
    /// Every agent sees every other agent.
    Complete,
    /// Rectangular grid, 4-neighborhood. `width * height` must equal the
    /// agent count; periodic wrapping requires both dimensions >= 3 so no
    /// edge is duplicated.
    Lattice2d {
        width: usize,
        height: usize,
        periodic: bool,
    },
    /// G(n, p) random graph. Resampled (up to 100 attempts) until no agent
    /// is isolated.
    ErdosRenyi { edge_prob: f64, seed: u64 },
}

/// A built adjacency structure. Symmetric, no self-loops, minimum degree 1.
#[derive(Debug, Clone)]
pub struct Topology {
    spec: TopologySpec,
    neighbors: Vec<Vec<u32>>,
}

impl Topology {
    pub fn spec(&self) -> &TopologySpec {
        &self.spec
    }

    pub fn n_agents(&self) -> usize {
        self.neighbors.len()
    }

    pub fn neighbors(&self, agent: usize) -> &[u32] {
        &self.neighbors[agent]
    }

    pub fn degree(&self, agent: usize) -> usize {
        self.neighbors[agent].len()
    }

    /// Complete graphs get an O(1) neighbor-sum fast path in the simulator.
    pub fn is_complete(&self) -> bool {
        matches!(self.spec, TopologySpec::Complete)
    }

    pub fn mean_degree(&self) -> f64 {
        let total: usize = self.neighbors.iter().map(Vec::len).sum();
        total as f64 / self.n_agents() as f64
    }
}

pub fn build_topology(n_agents: usize, spec: &TopologySpec) -> Result<Topology> {
    if n_agents < 2 {
        return Err(Error::config(format!(
            "n_agents must be >= 2, got {n_agents}"
        )));
    }
    let neighbors = match spec {
        TopologySpec::Complete => (0..n_agents)
            .map(|i| (0..n_agents as u32).filter(|&j| j != i as u32).collect())
            .collect(),
        TopologySpec::Lattice2d {
            width,
            height,
            periodic,
        } => build_lattice(n_agents, *width, *height, *periodic)?,
        TopologySpec::ErdosRenyi { edge_prob, seed } => {
            build_erdos_renyi(n_agents, *edge_prob, *seed)?
        }
    };
    Ok(Topology {
        spec: spec.clone(),
        neighbors,
    })
}

fn build_lattice(n: usize, width: usize, height: usize, periodic: bool) -> Result<Vec<Vec<u32>>> {
    if width < 2 || height < 2 {
        return Err(Error::config(format!(
            "lattice dimensions must be >= 2, got {width}x{height}"
        )));
    }
    if periodic && (width < 3 || height < 3) {
        return Err(Error::config(format!(
            "periodic lattice dimensions must be >= 3 to avoid duplicate edges, got {width}x{height}"
        )));
    }
    if width * height != n {
        return Err(Error::config(format!(
            "lattice {width}x{height} holds {} agents, config says {n}",
            width * height
        )));
    }
    let idx = |x: usize, y: usize| (y * width + x) as u32;
    let mut neighbors = vec![Vec::with_capacity(4); n];
    for y in 0..height {
        for x in 0..width {
            let mut push = |nx: isize, ny: isize| {
                let (nx, ny) = if periodic {
                    (
                        nx.rem_euclid(width as isize) as usize,
                        ny.rem_euclid(height as isize) as usize,
                    )
                } else {
                    if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
                        return;
                    }
                    (nx as usize, ny as usize)
                };
                neighbors[idx(x, y) as usize].push(idx(nx, ny));
            };
            let (xi, yi) = (x as isize, y as isize);
            push(xi - 1, yi);
            push(xi + 1, yi);
            push(xi, yi - 1);
            push(xi, yi + 1);
        }
    }
    Ok(neighbors)
}

fn build_erdos_renyi(n: usize, p: f64, seed: u64) -> Result<Vec<Vec<u32>>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::config(format!(
            "edge probability must be in (0, 1], got {p}"
        )));
    }
    let mut rng = rng_from_seed(seed);
    for _attempt in 0..100 {
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < p {
                    neighbors[i].push(j as u32);
                    neighbors[j].push(i as u32);
                }
            }
        }
        if neighbors.iter().all(|nb| !nb.is_empty()) {
            return Ok(neighbors);
        }
    }
    Err(Error::config(format!(
        "erdos_renyi(p={p}) produced an isolated agent in 100 consecutive attempts"
    )))
}
