//! Inter-cluster routing: distance matrix over the elected heads, Prim's
//! minimum spanning tree, orientation toward the fusion centre, and the
//! per-head choice between a direct report and a one-hop relay.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::energy::{link_cost, Cost, EnergyError};
use crate::model::{distance, EnergyParams, Position};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RoutingError {
    #[error("sensing tables disagree on the bit reported for node {0}")]
    ConflictingBit(usize),
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Dense symmetric matrix of pairwise distances in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    size: usize,
    weights: Vec<f64>,
}

impl AdjacencyMatrix {
    /// Builds a matrix from a row-major weight list. Panics if the length is
    /// not `size * size`.
    pub fn from_weights(size: usize, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), size * size, "weight list is not square");
        Self { size, weights }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.size + j]
    }
}

pub fn build_adjacency(ch_positions: &[Position]) -> AdjacencyMatrix {
    let n = ch_positions.len();
    let mut weights = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = distance(ch_positions[i], ch_positions[j]);
            weights[i * n + j] = d;
            weights[j * n + i] = d;
        }
    }
    AdjacencyMatrix { size: n, weights }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    /// Endpoint already in the tree when the edge was added.
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// Undirected spanning tree over matrix indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SpanningTree {
    pub size: usize,
    pub edges: Vec<Edge>,
    /// Vertex the tree was grown from.
    pub root: usize,
}

impl SpanningTree {
    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    pub fn neighbors(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.size];
        for e in &self.edges {
            adj[e.from].push(e.to);
            adj[e.to].push(e.from);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }
}

/// Grows a minimum spanning tree from `start`, adding at each step the
/// lightest edge that joins the tree to an outside vertex. Equal weights are
/// resolved by the lower in-tree endpoint, then the lower outside endpoint.
pub fn prim_mst(adj: &AdjacencyMatrix, start: usize) -> SpanningTree {
    let n = adj.size();
    if n == 0 {
        return SpanningTree {
            size: 0,
            edges: Vec::new(),
            root: 0,
        };
    }
    assert!(
        start < n,
        "start vertex {start} out of range for {n} vertices"
    );

    let mut in_tree = vec![false; n];
    // Cheapest known connection to the tree for each outside vertex:
    // (weight, in-tree endpoint).
    let mut best: Vec<Option<(f64, usize)>> = vec![None; n];
    let mut edges = Vec::with_capacity(n - 1);

    let mut current = start;
    in_tree[current] = true;
    for _ in 1..n {
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let w = adj.weight(current, v);
            let better = match best[v] {
                None => true,
                Some((bw, bu)) => w < bw || (w == bw && current < bu),
            };
            if better {
                best[v] = Some((w, current));
            }
        }

        let mut pick: Option<(f64, usize, usize)> = None;
        for (v, slot) in best.iter().enumerate() {
            if in_tree[v] {
                continue;
            }
            let (w, u) = slot.expect("outside vertex without a frontier edge");
            let better = match pick {
                None => true,
                Some((pw, pu, pv)) => (w, u, v) < (pw, pu, pv),
            };
            if better {
                pick = Some((w, u, v));
            }
        }
        let (weight, from, to) = pick.expect("frontier is empty before the tree spans");
        in_tree[to] = true;
        edges.push(Edge { from, to, weight });
        current = to;
    }

    SpanningTree {
        size: n,
        edges,
        root: start,
    }
}

/// A spanning tree with every vertex pointing one hop closer to the root.
#[derive(Debug, Clone, PartialEq)]
pub struct OrientedTree {
    pub root: usize,
    pub parent: Vec<Option<usize>>,
    pub depth: Vec<usize>,
}

impl OrientedTree {
    /// Vertices ordered deepest first, ties by index; every child precedes its
    /// parent.
    pub fn leaf_to_root_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.parent.len()).collect();
        order.sort_by(|&a, &b| self.depth[b].cmp(&self.depth[a]).then(a.cmp(&b)));
        order
    }
}

/// Index of the smallest distance, first one on ties.
pub fn nearest_index(distances: &[f64]) -> Option<usize> {
    distances
        .iter()
        .enumerate()
        .fold(None, |acc: Option<(usize, f64)>, (i, &d)| match acc {
            Some((_, bd)) if bd <= d => acc,
            _ => Some((i, d)),
        })
        .map(|(i, _)| i)
}

/// Roots `tree` at the vertex nearest the fusion centre and assigns parents
/// along the unique tree paths.
pub fn orient_tree(tree: &SpanningTree, ch_fc_distances: &[f64]) -> OrientedTree {
    assert_eq!(tree.size, ch_fc_distances.len());
    let n = tree.size;
    let root = nearest_index(ch_fc_distances).unwrap_or(0);
    let mut parent = vec![None; n];
    let mut depth = vec![0; n];
    if n == 0 {
        return OrientedTree {
            root,
            parent,
            depth,
        };
    }

    let neighbors = tree.neighbors();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([root]);
    seen[root] = true;
    while let Some(u) = queue.pop_front() {
        for &v in &neighbors[u] {
            if !seen[v] {
                seen[v] = true;
                parent[v] = Some(u);
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    debug_assert!(seen.iter().all(|&s| s), "tree is not connected");

    OrientedTree {
        root,
        parent,
        depth,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RouteChoice {
    Direct,
    RelayTo(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteDecision {
    pub ch_id: usize,
    pub choice: RouteChoice,
    pub direct_cost: Cost,
    /// `None` for the root, which has no parent to relay through.
    pub relay_cost: Option<Cost>,
}

impl RouteDecision {
    /// Cost of the transmission actually made.
    pub fn chosen_cost(&self) -> Cost {
        match self.choice {
            RouteChoice::Direct => self.direct_cost,
            RouteChoice::RelayTo(_) => self.relay_cost.unwrap_or(self.direct_cost),
        }
    }
}

/// Compares sending `m_bits` straight to the fusion centre against one hop to
/// the tree parent (`parent = Some((id, distance))`). Ties go direct; the root
/// (`parent = None`) always goes direct.
pub fn route_decision(
    params: &EnergyParams,
    ch_id: usize,
    m_bits: u32,
    d_fc: f64,
    parent: Option<(usize, f64)>,
) -> Result<RouteDecision, RoutingError> {
    let direct_cost = link_cost(params, m_bits, d_fc)?;
    let Some((parent_id, d_parent)) = parent else {
        return Ok(RouteDecision {
            ch_id,
            choice: RouteChoice::Direct,
            direct_cost,
            relay_cost: None,
        });
    };
    let relay_cost = link_cost(params, m_bits, d_parent)?;
    let choice = if direct_cost <= relay_cost {
        RouteChoice::Direct
    } else {
        RouteChoice::RelayTo(parent_id)
    };
    Ok(RouteDecision {
        ch_id,
        choice,
        direct_cost,
        relay_cost: Some(relay_cost),
    })
}

/// Per-round map from cluster-head id to the bit that head sensed.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SensingTable {
    bits: BTreeMap<usize, u8>,
}

impl SensingTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn single(ch_id: usize, bit: u8) -> Self {
        Self {
            bits: BTreeMap::from([(ch_id, bit)]),
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, ch_id: usize) -> Option<u8> {
        self.bits.get(&ch_id).copied()
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.keys().copied()
    }
}

impl FromIterator<(usize, u8)> for SensingTable {
    fn from_iter<I: IntoIterator<Item = (usize, u8)>>(iter: I) -> Self {
        Self {
            bits: iter.into_iter().collect(),
        }
    }
}

/// Union of two tables. Both must agree wherever they overlap.
pub fn merge_sensing_tables(
    local: &SensingTable,
    incoming: &SensingTable,
) -> Result<SensingTable, RoutingError> {
    let mut bits = local.bits.clone();
    for (&id, &bit) in &incoming.bits {
        match bits.insert(id, bit) {
            Some(prev) if prev != bit => return Err(RoutingError::ConflictingBit(id)),
            _ => {}
        }
    }
    Ok(SensingTable { bits })
}
