//! Config-key schemas: one table per subcommand.
//!
//! The same table drives three things, so they cannot drift apart: the
//! unknown-key check in the parser, the defaults applied by the builders,
//! and the key listing appended to each subcommand's `--help`.

pub struct KeySpec {
    pub section: &'static str,
    pub key: &'static str,
    /// Textual default, `None` when required or conditional.
    pub default: Option<&'static str>,
    pub about: &'static str,
}

const fn key(
    section: &'static str,
    key: &'static str,
    default: Option<&'static str>,
    about: &'static str,
) -> KeySpec {
    KeySpec {
        section,
        key,
        default,
        about,
    }
}

/// Keys shared by every market-simulation subcommand.
pub const MARKET_KEYS: &[KeySpec] = &[
    key(
        "market",
        "n_agents",
        None,
        "number of traders (required, >= 2)",
    ),
    key(
        "market",
        "horizon",
        None,
        "number of steps (required, >= 1)",
    ),
    key("market", "seed", None, "run seed (required)"),
    key(
        "market",
        "initial_price",
        Some("100.0"),
        "starting price (> 0)",
    ),
    key(
        "market",
        "update_scheme",
        Some("synchronous"),
        "synchronous | random_sequential",
    ),
    key(
        "market",
        "price_mode",
        Some("log"),
        "log | raw (raw rejects non-positive prices)",
    ),
    key(
        "market",
        "neighbor_norm",
        Some("total_agents"),
        "total_agents | degree (neighbor-sum normalization)",
    ),
    key(
        "topology",
        "kind",
        Some("complete"),
        "complete | lattice2d | erdos_renyi",
    ),
    key("topology", "width", None, "lattice2d: grid width (>= 2)"),
    key("topology", "height", None, "lattice2d: grid height (>= 2)"),
    key(
        "topology",
        "periodic",
        Some("false"),
        "lattice2d: wrap edges (dims >= 3)",
    ),
    key(
        "topology",
        "edge_prob",
        None,
        "erdos_renyi: edge probability in (0, 1]",
    ),
    key("topology", "seed", None, "erdos_renyi: graph seed"),
    key("impact", "kind", Some("linear"), "linear | square_root"),
    key("impact", "lambda", Some("0.01"), "impact coefficient (> 0)"),
    key(
        "noise",
        "agent",
        Some("logistic"),
        "logistic | gaussian (trader noise)",
    ),
    key(
        "noise",
        "agent_scale",
        Some("1.0"),
        "logistic scale / gaussian std (> 0)",
    ),
    key(
        "noise",
        "price_sigma",
        Some("0.0"),
        "price news volatility per step (>= 0)",
    ),
    key(
        "coupling",
        "kind",
        None,
        "constant | linear_ramp | sinusoid | ou_process (required)",
    ),
    key(
        "coupling",
        "lambda",
        None,
        "constant: imitation strength (>= 0)",
    ),
    key("coupling", "start", None, "linear_ramp: initial value"),
    key("coupling", "end", None, "linear_ramp: final value"),
    key("coupling", "mean", None, "sinusoid/ou_process: mean level"),
    key(
        "coupling",
        "amplitude",
        None,
        "sinusoid: oscillation amplitude",
    ),
    key(
        "coupling",
        "period",
        None,
        "sinusoid: period in steps (> 0)",
    ),
    key(
        "coupling",
        "reversion",
        None,
        "ou_process: mean-reversion rate in [0, 1]",
    ),
    key("coupling", "vol", None, "ou_process: innovation std (>= 0)"),
    key("coupling", "seed", None, "ou_process: schedule seed"),
    key(
        "field",
        "kind",
        Some("none"),
        "none | sinusoid | square_wave | iid_shocks",
    ),
    key(
        "field",
        "amplitude",
        None,
        "sinusoid/square_wave: field amplitude",
    ),
    key(
        "field",
        "period",
        None,
        "sinusoid/square_wave: period in steps (> 0)",
    ),
    key("field", "std", None, "iid_shocks: shock std (>= 0)"),
    key("field", "seed", None, "iid_shocks: shock seed"),
];

pub const SWEEP_KEYS: &[KeySpec] = &[
    key(
        "sweep",
        "grid",
        None,
        "comma-separated coupling values, strictly ascending (required)",
    ),
    key(
        "sweep",
        "burn_in",
        None,
        "steps discarded per grid point (required)",
    ),
    key(
        "sweep",
        "measure_steps",
        None,
        "steps measured per grid point (required)",
    ),
];

pub const NIVOL_KEYS: &[KeySpec] = &[
    key(
        "nivol",
        "amplitude",
        None,
        "square-wave field amplitude (required, >= 0)",
    ),
    key(
        "nivol",
        "period",
        None,
        "square-wave period in steps (required, >= 2)",
    ),
    key("nivol", "n_seeds", Some("20"), "number of paired seeds"),
];

pub const STYLIZED_KEYS: &[KeySpec] = &[key(
    "stylized",
    "input",
    None,
    "path to a trajectory.csv or a one-price-per-line file (required)",
)];

pub const CHOICE_KEYS: &[KeySpec] = &[
    key(
        "choice",
        "utilities",
        None,
        "comma-separated deterministic utilities (required, >= 2)",
    ),
    key("choice", "gamma", Some("1.0"), "noise scale (> 0)"),
    key(
        "choice",
        "n_samples",
        Some("100000"),
        "Monte Carlo draws (>= 1)",
    ),
    key("choice", "seed", None, "sampling seed (required)"),
];

/// The qdt subcommand reads a prospect-set JSON document instead of a
/// sectioned config; these rows document its fields in `--help`.
pub const QDT_KEYS: &[KeySpec] = &[
    key(
        "prospects",
        "labels",
        None,
        "JSON array of prospect names (required)",
    ),
    key(
        "prospects",
        "utilities",
        None,
        "JSON array of expected utilities, nonnegative (required)",
    ),
    key(
        "prospects",
        "q",
        None,
        "JSON array of attraction factors (alternative to ranking)",
    ),
    key(
        "prospects",
        "ranking",
        None,
        "JSON array of labels, most attractive first (alternative to q)",
    ),
];

/// Schema for a subcommand, as (table groups, config style).
pub fn schema_for(subcommand: &str) -> Vec<&'static KeySpec> {
    let groups: Vec<&[KeySpec]> = match subcommand {
        "simulate" => vec![MARKET_KEYS],
        "sweep" => vec![MARKET_KEYS, SWEEP_KEYS],
        "nivol" => vec![MARKET_KEYS, NIVOL_KEYS],
        "stylized" => vec![STYLIZED_KEYS],
        "choice" => vec![CHOICE_KEYS],
        "qdt" => vec![QDT_KEYS],
        other => panic!("no schema for subcommand {other}"),
    };
    groups.into_iter().flatten().collect()
}

/// Render the key table appended to `--help`.
pub fn render_help(subcommand: &str) -> String {
    let mut out = String::new();
    if subcommand == "qdt" {
        out.push_str("Config document (JSON):\n");
    } else {
        out.push_str(
            "Config keys ([section] key = value; JSON with the same sections also accepted):\n",
        );
    }
    let mut current_section = "";
    for spec in schema_for(subcommand) {
        if spec.section != current_section {
            current_section = spec.section;
            out.push_str(&format!("  [{}]\n", spec.section));
        }
        let default = match spec.default {
            Some(d) => format!("default {d}"),
            None => "no default".to_string(),
        };
        out.push_str(&format!(
            "    {:<14} {} ({})\n",
            spec.key, spec.about, default
        ));
    }
    out
}
