//! Cluster-head election with epoch-based rotation, plus member assignment.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use thiserror::Error;

use crate::model::{distance, Clustering, NodeState};

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum ClusteringError {
    #[error("probability must lie in (0, 1], got {0}")]
    InvalidProbability(f64),
    #[error("no alive nodes")]
    NoAliveNodes,
    #[error("no cluster heads to assign members to")]
    NoClusterHeads,
}

/// Rounds per rotation epoch, `round(1/p)`, never less than one.
pub fn epoch_length(p: f64) -> u32 {
    ((1.0 / p).round() as u32).max(1)
}

/// Election threshold for a node at round `r`.
///
/// `p / (1 - p·(r mod 1/p))` for eligible nodes, capped at 1; zero otherwise.
pub fn election_threshold(p: f64, r: u32, in_g: bool) -> Result<f64, ClusteringError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ClusteringError::InvalidProbability(p));
    }
    if !in_g {
        return Ok(0.0);
    }
    let phase = f64::from(r % epoch_length(p));
    let denom = 1.0 - p * phase;
    if denom <= 0.0 {
        return Ok(1.0);
    }
    Ok((p / denom).min(1.0))
}

/// Eligibility snapshot for one round.
///
/// A node is eligible when it is alive and has not served as cluster head
/// since the start of the current epoch; the set resets to every alive node
/// whenever `round` is a multiple of the epoch length.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectionState {
    pub round: u32,
    pub p: f64,
    pub epoch_length: u32,
    pub eligible: BTreeSet<usize>,
}

impl ElectionState {
    pub fn new(round: u32, p: f64, nodes: &[NodeState]) -> Result<Self, ClusteringError> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(ClusteringError::InvalidProbability(p));
        }
        let epoch_length = epoch_length(p);
        let epoch_start = round - round % epoch_length;
        let eligible = nodes
            .iter()
            .filter(|n| n.alive && n.last_ch_round.is_none_or(|last| last < epoch_start))
            .map(|n| n.id)
            .collect();
        Ok(Self {
            round,
            p,
            epoch_length,
            eligible,
        })
    }

    pub fn threshold_for(&self, id: usize) -> f64 {
        // p is validated in `new`
        election_threshold(self.p, self.round, self.eligible.contains(&id)).unwrap_or(0.0)
    }
}

/// Cluster heads for a round and the head each alive member reports to.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusterAssignment {
    /// Sorted by node id.
    pub cluster_heads: Vec<usize>,
    pub member_of: BTreeMap<usize, usize>,
}

impl ClusterAssignment {
    pub fn members_of(&self, ch: usize) -> impl Iterator<Item = usize> + '_ {
        self.member_of
            .iter()
            .filter(move |(_, &head)| head == ch)
            .map(|(&member, _)| member)
    }
}

/// Orders candidates by descending residual energy, then ascending id.
fn by_energy_desc(nodes: &[NodeState], ids: &mut [usize]) {
    ids.sort_by(|&a, &b| nodes[b].energy.total_cmp(&nodes[a].energy).then(a.cmp(&b)));
}

/// Runs the stochastic election for `state.round` and records the new heads'
/// `last_ch_round`. `nodes[i].id` must equal `i`.
///
/// In `Uniform(k)` mode the draw is trimmed to the `k` highest-energy winners,
/// or topped up by promoting the highest-energy alive non-winners (eligible
/// nodes first) until `k` heads exist.
pub fn elect_cluster_heads<R: Rng + ?Sized>(
    nodes: &mut [NodeState],
    state: &ElectionState,
    mode: Clustering,
    rng: &mut R,
) -> Result<ClusterAssignment, ClusteringError> {
    if !nodes.iter().any(|n| n.alive) {
        return Err(ClusteringError::NoAliveNodes);
    }

    let mut elected: Vec<usize> = Vec::new();
    for &id in &state.eligible {
        debug_assert!(nodes[id].alive);
        let threshold = state.threshold_for(id);
        let u: f64 = rng.random();
        if u < threshold {
            elected.push(id);
        }
    }

    if let Clustering::Uniform(k) = mode {
        if elected.len() > k {
            by_energy_desc(nodes, &mut elected);
            elected.truncate(k);
        } else if elected.len() < k {
            let chosen: BTreeSet<usize> = elected.iter().copied().collect();
            let (mut in_g, mut rest): (Vec<usize>, Vec<usize>) = nodes
                .iter()
                .filter(|n| n.alive && !chosen.contains(&n.id))
                .map(|n| n.id)
                .partition(|id| state.eligible.contains(id));
            by_energy_desc(nodes, &mut in_g);
            by_energy_desc(nodes, &mut rest);
            let need = k - elected.len();
            elected.extend(in_g.into_iter().chain(rest).take(need));
        }
    }

    elected.sort_unstable();
    for &id in &elected {
        nodes[id].last_ch_round = Some(state.round);
    }

    if elected.is_empty() {
        return Ok(ClusterAssignment::default());
    }
    assign_members(nodes, &elected)
}

/// Attaches every alive non-head node to its nearest head; equal distances go
/// to the lower head id.
pub fn assign_members(
    nodes: &[NodeState],
    cluster_heads: &[usize],
) -> Result<ClusterAssignment, ClusteringError> {
    if cluster_heads.is_empty() {
        return Err(ClusteringError::NoClusterHeads);
    }
    let mut heads = cluster_heads.to_vec();
    heads.sort_unstable();
    heads.dedup();
    let head_set: BTreeSet<usize> = heads.iter().copied().collect();

    let member_of = nodes
        .iter()
        .filter(|n| n.alive && !head_set.contains(&n.id))
        .map(|n| {
            let mut best = heads[0];
            let mut best_d = distance(n.position, nodes[best].position);
            for &h in &heads[1..] {
                let d = distance(n.position, nodes[h].position);
                if d < best_d {
                    best = h;
                    best_d = d;
                }
            }
            (n.id, best)
        })
        .collect();

    Ok(ClusterAssignment {
        cluster_heads: heads,
        member_of,
    })
}
