//! The round loop.
//!
//! Each round: every alive node senses a bit, heads are elected and members
//! attached, members report one bit to their head, then heads deliver to the
//! fusion centre according to the protocol. Energy is charged into a per-round
//! ledger and applied at the end of the round, where deaths are detected.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::clustering::{elect_cluster_heads, ClusterAssignment, ClusteringError, ElectionState};
use crate::energy::{aggregation_energy, link_cost, rx_energy, Cost, EnergyError};
use crate::model::{distance, place_nodes, ConfigError, NodeState, Protocol, ScenarioConfig};
use crate::routing::{
    build_adjacency, merge_sensing_tables, nearest_index, orient_tree, prim_mst, route_decision,
    RouteChoice, RouteDecision, RoutingError, SensingTable,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Clustering(#[from] ClusteringError),
    #[error(transparent)]
    Routing(#[from] RoutingError),
    #[error(transparent)]
    Energy(#[from] EnergyError),
    #[error("no alive nodes left")]
    NoAliveNodes,
    #[error("node ids must equal their index (node at index {index} has id {id})")]
    BadNodeIds { index: usize, id: usize },
}

/// Everything that happened in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundOutcome {
    /// 1-based round number.
    pub round: u32,
    pub ch_ids: Vec<usize>,
    /// Tree edges as `(parent-side node id, child node id, meters)`; empty for
    /// the baseline protocol.
    pub mst_edges: Vec<(usize, usize, f64)>,
    pub decisions: Vec<RouteDecision>,
    /// Bits that reached the fusion centre, keyed by head id.
    pub fc_received: SensingTable,
    pub energy_spent: f64,
    pub deaths: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRow {
    /// 1-based round number.
    pub round: u32,
    /// Sum of residual energy over alive nodes, joules.
    pub total_residual: f64,
    pub alive: usize,
    pub ch_count: usize,
    pub first_death_round: Option<u32>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub initial_energy: f64,
    pub metrics: Vec<MetricsRow>,
    pub outcomes: Vec<RoundOutcome>,
    /// Round in which the last node died, if that happened before `r_max`.
    pub extinct_at: Option<u32>,
}

impl SimulationResult {
    pub fn final_residual(&self) -> f64 {
        self.metrics
            .last()
            .map_or(self.initial_energy, |m| m.total_residual)
    }

    pub fn final_alive(&self, n_nodes: usize) -> usize {
        self.metrics.last().map_or(n_nodes, |m| m.alive)
    }

    pub fn first_death_round(&self) -> Option<u32> {
        self.metrics.last().and_then(|m| m.first_death_round)
    }
}

/// Compensated (Neumaier) sum. Network totals are ~50 J while a round moves
/// ~1e-5 J, so naive summation error would swamp the per-round balance.
pub fn neumaier_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Energy charged to each node during the current round.
#[derive(Debug, Clone)]
struct Ledger(Vec<f64>);

impl Ledger {
    fn new(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    fn charge(&mut self, id: usize, cost: Cost) {
        self.0[id] += cost.joules();
    }
}

pub struct Simulation {
    config: ScenarioConfig,
    nodes: Vec<NodeState>,
    rng: ChaCha8Rng,
    /// Rounds completed so far.
    round: u32,
    initial_energy: f64,
    first_death_round: Option<u32>,
}

impl Simulation {
    /// Places nodes from the config's seed and prepares round one.
    pub fn new(config: ScenarioConfig) -> Result<Self, SimError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let nodes = place_nodes(&config, &mut rng)?;
        Ok(Self::from_parts(config, nodes, rng))
    }

    /// Uses an explicit node layout; `nodes[i].id` must be `i`.
    pub fn with_nodes(config: ScenarioConfig, nodes: Vec<NodeState>) -> Result<Self, SimError> {
        config.validate()?;
        if let Some((index, n)) = nodes.iter().enumerate().find(|(i, n)| n.id != *i) {
            return Err(SimError::BadNodeIds { index, id: n.id });
        }
        let rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        Ok(Self::from_parts(config, nodes, rng))
    }

    fn from_parts(config: ScenarioConfig, nodes: Vec<NodeState>, rng: ChaCha8Rng) -> Self {
        let initial_energy = neumaier_sum(nodes.iter().filter(|n| n.alive).map(|n| n.energy));
        Self {
            config,
            nodes,
            rng,
            round: 0,
            initial_energy,
            first_death_round: None,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn nodes(&self) -> &[NodeState] {
        &self.nodes
    }

    pub fn initial_energy(&self) -> f64 {
        self.initial_energy
    }

    pub fn alive_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.alive).count()
    }

    pub fn total_residual(&self) -> f64 {
        neumaier_sum(self.nodes.iter().filter(|n| n.alive).map(|n| n.energy))
    }

    pub fn run_round(&mut self) -> Result<RoundOutcome, SimError> {
        if !self.nodes.iter().any(|n| n.alive) {
            return Err(SimError::NoAliveNodes);
        }
        let r = self.round;
        let params = self.config.energy;
        let fc = self.config.fc_position;

        for node in self.nodes.iter_mut().filter(|n| n.alive) {
            node.sensed_bit = u8::from(self.rng.random_bool(0.5));
        }

        let election = ElectionState::new(r, self.config.p, &self.nodes)?;
        let assignment = elect_cluster_heads(
            &mut self.nodes,
            &election,
            self.config.clustering,
            &mut self.rng,
        )?;

        let mut ledger = Ledger::new(self.nodes.len());
        let mut mst_edges = Vec::new();
        let mut decisions = Vec::new();
        let fc_received;

        if assignment.cluster_heads.is_empty() {
            fc_received = no_ch_fallback(&self.nodes, &self.config, &mut ledger.0)?;
        } else {
            self.charge_member_reports(&assignment, &mut ledger)?;
            let heads = &assignment.cluster_heads;
            match self.config.protocol {
                Protocol::Baseline => {
                    let mut table = SensingTable::new();
                    for &h in heads {
                        let d = distance(self.nodes[h].position, fc);
                        let decision = route_decision(&params, h, 1, d, None)?;
                        ledger.charge(h, decision.direct_cost);
                        table = merge_sensing_tables(
                            &table,
                            &SensingTable::single(h, self.nodes[h].sensed_bit),
                        )?;
                        decisions.push(decision);
                    }
                    fc_received = table;
                }
                Protocol::Proposed => {
                    let (edges, decs, table) = self.convergecast(heads, &mut ledger)?;
                    mst_edges = edges;
                    decisions = decs;
                    fc_received = table;
                }
            }
        }

        let (energy_spent, deaths) = self.apply(&ledger);
        self.round += 1;
        if !deaths.is_empty() && self.first_death_round.is_none() {
            self.first_death_round = Some(self.round);
        }

        Ok(RoundOutcome {
            round: self.round,
            ch_ids: assignment.cluster_heads,
            mst_edges,
            decisions,
            fc_received,
            energy_spent,
            deaths,
        })
    }

    /// Member -> head single-bit reports, with reception and aggregation at
    /// the head.
    fn charge_member_reports(
        &self,
        assignment: &ClusterAssignment,
        ledger: &mut Ledger,
    ) -> Result<(), SimError> {
        let params = &self.config.energy;
        let per_member_at_head = rx_energy(params, 1)? + aggregation_energy(params, 1);
        for (&member, &head) in &assignment.member_of {
            let d = distance(self.nodes[member].position, self.nodes[head].position);
            ledger.charge(member, link_cost(params, 1, d)?);
            ledger.charge(head, per_member_at_head);
        }
        Ok(())
    }

    /// Tree-based delivery of the full sensing table. Heads transmit deepest
    /// first so every head forwards exactly once, after its children.
    #[allow(clippy::type_complexity)]
    fn convergecast(
        &self,
        heads: &[usize],
        ledger: &mut Ledger,
    ) -> Result<(Vec<(usize, usize, f64)>, Vec<RouteDecision>, SensingTable), SimError> {
        let params = &self.config.energy;
        let fc = self.config.fc_position;
        let positions: Vec<_> = heads.iter().map(|&h| self.nodes[h].position).collect();
        let d_fc: Vec<f64> = positions.iter().map(|&p| distance(p, fc)).collect();
        let m_bits = u32::try_from(heads.len()).expect("head count fits in u32");

        let adj = build_adjacency(&positions);
        let start = nearest_index(&d_fc).unwrap_or(0);
        let tree = prim_mst(&adj, start);
        let oriented = orient_tree(&tree, &d_fc);

        let edges = (0..heads.len())
            .filter_map(|i| oriented.parent[i].map(|p| (heads[p], heads[i], adj.weight(i, p))))
            .collect();

        let mut tables: Vec<SensingTable> = heads
            .iter()
            .map(|&h| SensingTable::single(h, self.nodes[h].sensed_bit))
            .collect();
        let mut at_fc = SensingTable::new();
        let mut decisions = Vec::with_capacity(heads.len());
        let rx = rx_energy(params, m_bits)?;

        for i in oriented.leaf_to_root_order() {
            let parent = oriented.parent[i].map(|p| (heads[p], adj.weight(i, p)));
            let decision = route_decision(params, heads[i], m_bits, d_fc[i], parent)?;
            ledger.charge(heads[i], decision.chosen_cost());
            let outgoing = std::mem::take(&mut tables[i]);
            match decision.choice {
                RouteChoice::Direct => at_fc = merge_sensing_tables(&at_fc, &outgoing)?,
                RouteChoice::RelayTo(_) => {
                    let p = oriented.parent[i].expect("relay requires a parent");
                    ledger.charge(heads[p], rx);
                    tables[p] = merge_sensing_tables(&tables[p], &outgoing)?;
                }
            }
            decisions.push(decision);
        }
        debug_assert_eq!(at_fc.len(), heads.len());
        decisions.sort_by_key(|d| d.ch_id);
        Ok((edges, decisions, at_fc))
    }

    /// Deducts the ledger, flooring at zero, and marks deaths. Returns the
    /// energy actually removed and the ids that died.
    fn apply(&mut self, ledger: &Ledger) -> (f64, Vec<usize>) {
        let mut taken_per_node = Vec::new();
        let mut deaths = Vec::new();
        for (node, &charge) in self.nodes.iter_mut().zip(&ledger.0) {
            if charge == 0.0 {
                continue;
            }
            debug_assert!(node.alive, "dead node {} was charged", node.id);
            let taken = charge.min(node.energy);
            node.energy -= taken;
            taken_per_node.push(taken);
            if node.energy <= 0.0 {
                node.energy = 0.0;
                node.alive = false;
                deaths.push(node.id);
            }
        }
        (neumaier_sum(taken_per_node), deaths)
    }

    pub fn metrics_row(&self, ch_count: usize) -> MetricsRow {
        MetricsRow {
            round: self.round,
            total_residual: self.total_residual(),
            alive: self.alive_count(),
            ch_count,
            first_death_round: self.first_death_round,
        }
    }

    /// Runs until `r_max` rounds or extinction.
    pub fn run(mut self) -> Result<SimulationResult, SimError> {
        let mut metrics = Vec::with_capacity(self.config.r_max as usize);
        let mut outcomes = Vec::with_capacity(self.config.r_max as usize);
        let mut extinct_at = None;
        for _ in 0..self.config.r_max {
            let outcome = self.run_round()?;
            metrics.push(self.metrics_row(outcome.ch_ids.len()));
            outcomes.push(outcome);
            if self.alive_count() == 0 {
                extinct_at = Some(self.round);
                break;
            }
        }
        Ok(SimulationResult {
            initial_energy: self.initial_energy,
            metrics,
            outcomes,
            extinct_at,
        })
    }
}

pub fn run_simulation(config: &ScenarioConfig) -> Result<SimulationResult, SimError> {
    Simulation::new(config.clone())?.run()
}

/// Round with no heads: every alive node sends its own bit straight to the
/// fusion centre. Costs are added to `charges`, indexed by node id.
pub fn no_ch_fallback(
    nodes: &[NodeState],
    config: &ScenarioConfig,
    charges: &mut [f64],
) -> Result<SensingTable, SimError> {
    if !nodes.iter().any(|n| n.alive) {
        return Err(SimError::NoAliveNodes);
    }
    let mut received = Vec::new();
    for node in nodes.iter().filter(|n| n.alive) {
        let d = distance(node.position, config.fc_position);
        charges[node.id] += link_cost(&config.energy, 1, d)?.joules();
        received.push((node.id, node.sensed_bit));
    }
    Ok(received.into_iter().collect())
}
