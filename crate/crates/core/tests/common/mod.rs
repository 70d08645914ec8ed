//! Test-only oracles, independent of the library's routing code.

#![allow(dead_code)]

/// Decodes a Prüfer sequence into the edge list of a labeled tree on
/// `seq.len() + 2` vertices.
pub fn prufer_edges(seq: &[usize]) -> Vec<(usize, usize)> {
    let n = seq.len() + 2;
    let mut degree = vec![1usize; n];
    for &v in seq {
        degree[v] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &v in seq {
        let leaf = (0..n).find(|&u| degree[u] == 1).unwrap();
        edges.push((leaf, v));
        degree[leaf] -= 1;
        degree[v] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&u| degree[u] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Minimum total weight over all n^(n-2) labeled spanning trees of the
/// complete graph with the given weight function.
pub fn brute_force_mst_weight(n: usize, weight: impl Fn(usize, usize) -> f64) -> f64 {
    match n {
        0 | 1 => return 0.0,
        2 => return weight(0, 1),
        _ => {}
    }
    let len = n - 2;
    let total = n.pow(len as u32);
    let mut best = f64::INFINITY;
    let mut seq = vec![0usize; len];
    for mut code in 0..total {
        for slot in seq.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        let w: f64 = prufer_edges(&seq).iter().map(|&(a, b)| weight(a, b)).sum();
        best = best.min(w);
    }
    best
}

/// Number of distinct labeled trees the enumeration visits.
pub fn count_distinct_trees(n: usize) -> usize {
    let len = n - 2;
    let mut seen = std::collections::BTreeSet::new();
    let mut seq = vec![0usize; len];
    for mut code in 0..n.pow(len as u32) {
        for slot in seq.iter_mut() {
            *slot = code % n;
            code /= n;
        }
        let mut e: Vec<(usize, usize)> = prufer_edges(&seq)
            .into_iter()
            .map(|(a, b)| (a.min(b), a.max(b)))
            .collect();
        e.sort_unstable();
        seen.insert(e);
    }
    seen.len()
}

/// Union-find check that `edges` form a spanning tree on `n` vertices.
pub fn is_spanning_tree(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return edges.is_empty();
    }
    if edges.len() != n - 1 {
        return false;
    }
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra == rb {
            return false;
        }
        parent[ra] = rb;
    }
    true
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
