//! Domain types shared by every stage of the simulation: node state, radio
//! constants, scenario configuration and node placement.

use std::fmt;

use rand::Rng;
use thiserror::Error;

/// Errors raised while validating a [`ScenarioConfig`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{field} out of range: {reason}")]
    Range { field: &'static str, reason: String },
}

impl ConfigError {
    pub(crate) fn range(field: &'static str, reason: impl Into<String>) -> Self {
        ConfigError::Range {
            field,
            reason: reason.into(),
        }
    }

    /// Name of the offending configuration field.
    pub fn field(&self) -> &'static str {
        match self {
            ConfigError::Range { field, .. } => field,
        }
    }
}

/// A point in the sensing field, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance_to(&self, other: &Position) -> f64 {
        distance(*self, *other)
    }
}

/// Euclidean distance between two positions.
pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Normal,
    Advanced,
}

/// One sensor node.
///
/// `alive` mirrors `energy > 0`; the engine flips it at the end of the round
/// in which the battery hits zero and never flips it back.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeState {
    pub id: usize,
    pub position: Position,
    pub kind: NodeKind,
    pub energy: f64,
    pub alive: bool,
    /// Last round in which the node served as cluster head.
    pub last_ch_round: Option<u32>,
    pub sensed_bit: u8,
}

impl NodeState {
    pub fn new(id: usize, position: Position, kind: NodeKind, energy: f64) -> Self {
        Self {
            id,
            position,
            kind,
            energy,
            alive: energy > 0.0,
            last_ch_round: None,
            sensed_bit: 0,
        }
    }
}

/// First-order radio model constants. All energies are per bit unless noted.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyParams {
    /// Initial battery energy of a normal node (J).
    pub e_o: f64,
    /// Transmit electronics (J/bit).
    pub e_t: f64,
    /// Data aggregation (J/bit).
    pub e_d: f64,
    /// Receive electronics (J/bit).
    pub e_r: f64,
    /// Free-space amplifier (J/bit/m²).
    pub e_f: f64,
    /// Multipath amplifier (J/bit/m⁴).
    pub e_m: f64,
    /// Electronics energy of the linear transmit model (J/bit).
    pub e_e: f64,
    /// Propagation constant of the linear transmit model (J/m).
    pub e_a: f64,
    /// Path-loss component of the linear transmit model.
    pub alpha: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        Self {
            e_o: 0.5,
            e_t: 50e-9,
            e_d: 5e-9,
            e_r: 50e-9,
            e_f: 10e-12,
            e_m: 0.0013e-12,
            e_e: 50e-9,
            e_a: 10e-12,
            alpha: 0.3,
        }
    }
}

impl EnergyParams {
    /// Distance at which the free-space and multipath cost branches meet.
    pub fn d_o(&self) -> f64 {
        crate::energy::crossover_distance(self)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let fields = [
            ("e_o", self.e_o),
            ("e_t", self.e_t),
            ("e_d", self.e_d),
            ("e_r", self.e_r),
            ("e_f", self.e_f),
            ("e_m", self.e_m),
            ("e_e", self.e_e),
            ("e_a", self.e_a),
            ("alpha", self.alpha),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(ConfigError::range(
                    name,
                    format!("must be finite and > 0, got {value}"),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Protocol {
    /// Every cluster head reports straight to the fusion centre.
    Baseline,
    /// Cluster heads relay sensing tables over a minimum spanning tree.
    Proposed,
}

impl Protocol {
    pub fn as_str(&self) -> &'static str {
        match self {
            Protocol::Baseline => "baseline",
            Protocol::Proposed => "proposed",
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "baseline" | "leach" => Ok(Protocol::Baseline),
            "proposed" | "mst" => Ok(Protocol::Proposed),
            other => Err(format!(
                "unknown protocol `{other}` (expected baseline|proposed)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Clustering {
    /// Exactly `k` cluster heads per round while enough nodes are alive.
    Uniform(usize),
    /// Whatever the stochastic election produces, possibly zero.
    NonUniform,
}

impl Clustering {
    pub fn as_str(&self) -> &'static str {
        match self {
            Clustering::Uniform(_) => "uniform",
            Clustering::NonUniform => "nonuniform",
        }
    }
}

impl fmt::Display for Clustering {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Cluster count used when uniform clustering is requested without `k`.
pub const DEFAULT_UNIFORM_K: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub n_nodes: usize,
    pub field_width: f64,
    pub field_height: f64,
    pub fc_position: Position,
    /// Desired cluster-head probability.
    pub p: f64,
    pub r_max: u32,
    pub protocol: Protocol,
    pub clustering: Clustering,
    pub advanced_fraction: f64,
    /// Advanced nodes start with `e_o * (1 + advanced_energy_factor)`.
    pub advanced_energy_factor: f64,
    pub energy: EnergyParams,
    pub rng_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            n_nodes: 100,
            field_width: 100.0,
            field_height: 100.0,
            fc_position: Position::new(50.0, 50.0),
            p: 0.1,
            r_max: 1500,
            protocol: Protocol::Proposed,
            clustering: Clustering::NonUniform,
            advanced_fraction: 0.0,
            advanced_energy_factor: 0.0,
            energy: EnergyParams::default(),
            rng_seed: 0,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.n_nodes == 0 {
            return Err(ConfigError::range("nodes", "must be at least 1"));
        }
        if !(self.field_width.is_finite() && self.field_width > 0.0) {
            return Err(ConfigError::range(
                "field_width",
                format!("must be > 0, got {}", self.field_width),
            ));
        }
        if !(self.field_height.is_finite() && self.field_height > 0.0) {
            return Err(ConfigError::range(
                "field_height",
                format!("must be > 0, got {}", self.field_height),
            ));
        }
        if !(self.fc_position.x.is_finite() && self.fc_position.y.is_finite()) {
            return Err(ConfigError::range("fc", "coordinates must be finite"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(ConfigError::range(
                "p",
                format!("must lie in (0, 1], got {}", self.p),
            ));
        }
        if !(0.0..=1.0).contains(&self.advanced_fraction) {
            return Err(ConfigError::range(
                "advanced_fraction",
                format!("must lie in [0, 1], got {}", self.advanced_fraction),
            ));
        }
        if !(self.advanced_energy_factor.is_finite() && self.advanced_energy_factor >= 0.0) {
            return Err(ConfigError::range(
                "advanced_energy_factor",
                format!("must be >= 0, got {}", self.advanced_energy_factor),
            ));
        }
        if let Clustering::Uniform(k) = self.clustering {
            if k == 0 || k > self.n_nodes {
                return Err(ConfigError::range(
                    "k",
                    format!("must lie in [1, {}], got {k}", self.n_nodes),
                ));
            }
            if self.p * (self.n_nodes as f64) < 1.0 {
                return Err(ConfigError::range(
                    "p",
                    format!(
                        "p * nodes must be >= 1 for uniform clustering, got {}",
                        self.p * self.n_nodes as f64
                    ),
                ));
            }
        }
        self.energy.validate()
    }

    /// Number of advanced nodes; they occupy the lowest ids.
    pub fn advanced_count(&self) -> usize {
        (self.advanced_fraction * self.n_nodes as f64).floor() as usize
    }

    pub fn initial_total_energy(&self) -> f64 {
        let advanced = self.advanced_count();
        let normal = self.n_nodes - advanced;
        normal as f64 * self.energy.e_o
            + advanced as f64 * self.energy.e_o * (1.0 + self.advanced_energy_factor)
    }
}

/// Scatters `n_nodes` nodes uniformly over the field.
pub fn place_nodes<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<Vec<NodeState>, ConfigError> {
    config.validate()?;
    let advanced = config.advanced_count();
    let nodes = (0..config.n_nodes)
        .map(|id| {
            let x = rng.random_range(0.0..=config.field_width);
            let y = rng.random_range(0.0..=config.field_height);
            let (kind, energy) = if id < advanced {
                (
                    NodeKind::Advanced,
                    config.energy.e_o * (1.0 + config.advanced_energy_factor),
                )
            } else {
                (NodeKind::Normal, config.energy.e_o)
            };
            NodeState::new(id, Position::new(x, y), kind, energy)
        })
        .collect();
    Ok(nodes)
}
