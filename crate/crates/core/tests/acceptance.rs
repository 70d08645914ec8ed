//! Acceptance criteria. Each test prints one `[PASS]` / `[FAIL]` line with the
//! measured values, then asserts.
//!
//! Run with `cargo test -p crwsn --test acceptance -- --nocapture`.

mod common;

use std::sync::OnceLock;

use common::{brute_force_mst_weight, is_spanning_tree, rel_close};
use crwsn::cli::render_run_csv;
use crwsn::clustering::{elect_cluster_heads, ElectionState};
use crwsn::energy::link_cost;
use crwsn::model::place_nodes;
use crwsn::routing::{build_adjacency, prim_mst};
use crwsn::sweep::{compare, comparison_variants, run_seeds, Comparison};
use crwsn::{Clustering, EnergyParams, Position, ScenarioConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const PAIRED_SEEDS: [u64; 20] = [
    1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20,
];

fn report(id: u32, ok: bool, detail: String) {
    println!(
        "[{}] criterion {id}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
}

/// 20 paired seeds x 3 variants x 1500 rounds on the default scenario,
/// shared by criteria 1-3.
fn paired_comparison() -> &'static Comparison {
    static CELL: OnceLock<Comparison> = OnceLock::new();
    CELL.get_or_init(|| {
        let cfg = ScenarioConfig {
            clustering: Clustering::Uniform(10),
            ..Default::default()
        };
        assert_eq!((cfg.n_nodes, cfg.r_max), (100, 1500));
        assert_eq!((cfg.field_width, cfg.field_height), (100.0, 100.0));
        assert_eq!(cfg.fc_position, Position::new(50.0, 50.0));
        assert_eq!(cfg.energy, EnergyParams::default());
        compare(&cfg, &PAIRED_SEEDS).expect("comparison runs")
    })
}

#[test]
fn criterion_1_uniform_residual_beats_baseline() {
    let c = paired_comparison();
    let ratio = c.residual_ratio_uniform_vs_baseline();
    let ok = ratio >= 1.15;
    report(
        1,
        ok,
        format!(
            "mean residual proposed-uniform {:.9} J / baseline {:.9} J = {ratio:.6} (need >= 1.15)",
            c.uniform.mean_residual(),
            c.baseline.mean_residual()
        ),
    );
    assert!(ok, "residual ratio {ratio} < 1.15");
}

#[test]
fn criterion_2_uniform_residual_beats_nonuniform() {
    let c = paired_comparison();
    let ratio = c.residual_ratio_uniform_vs_nonuniform();
    let ok = ratio >= 1.10;
    report(
        2,
        ok,
        format!(
            "mean residual proposed-uniform {:.9} J / proposed-nonuniform {:.9} J = {ratio:.6} (need >= 1.10)",
            c.uniform.mean_residual(),
            c.nonuniform.mean_residual()
        ),
    );
    assert!(ok, "residual ratio {ratio} < 1.10");
}

#[test]
fn criterion_3_uniform_survival_beats_baseline() {
    let c = paired_comparison();
    let ratio = c.alive_ratio_uniform_vs_baseline();
    let fd_u = c.uniform.mean_first_death();
    let fd_b = c.baseline.mean_first_death();
    let deaths_u = c.uniform.first_death.iter().filter(|d| d.is_some()).count();
    let deaths_b = c
        .baseline
        .first_death
        .iter()
        .filter(|d| d.is_some())
        .count();
    let ok = ratio >= 2.0 && fd_u > fd_b;
    report(
        3,
        ok,
        format!(
            "mean alive {:.2} / {:.2} = {ratio:.4} (need >= 2); mean first death {fd_u:.1} vs {fd_b:.1} \
             (need strictly later; runs with a death: {deaths_u}/20 vs {deaths_b}/20)",
            c.uniform.mean_alive(),
            c.baseline.mean_alive()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_4_election_calibration() {
    let cfg = ScenarioConfig::default();
    let mut nodes = place_nodes(&cfg, &mut ChaCha8Rng::seed_from_u64(404)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(4040);
    let epoch = 10u32;
    let mut per_round = Vec::new();
    let mut bad_epochs = 0;
    // energy is never touched: a dry run of the election alone
    for e in 0..100u32 {
        let mut served = vec![0u32; nodes.len()];
        for r in e * epoch..(e + 1) * epoch {
            let s = ElectionState::new(r, cfg.p, &nodes).unwrap();
            let a = elect_cluster_heads(&mut nodes, &s, Clustering::NonUniform, &mut rng).unwrap();
            per_round.push(a.cluster_heads.len() as f64);
            for h in a.cluster_heads {
                served[h] += 1;
            }
        }
        if e < 10 && served.iter().any(|&c| c != 1) {
            bad_epochs += 1;
        }
    }
    let mean = per_round.iter().sum::<f64>() / per_round.len() as f64;
    let ok = bad_epochs == 0 && (mean - 10.0).abs() <= 1.0;
    report(
        4,
        ok,
        format!(
            "epochs with a node not serving exactly once: {bad_epochs}/10; mean heads/round over {} rounds = {mean:.4} (need 10 +/- 1)",
            per_round.len()
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_5_prim_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut mismatches = 0;
    let mut malformed = 0;
    for _ in 0..500 {
        let n = rng.random_range(3..=6);
        let pts: Vec<Position> = (0..n)
            .map(|_| Position::new(rng.random_range(0.0..100.0), rng.random_range(0.0..100.0)))
            .collect();
        let adj = build_adjacency(&pts);
        let tree = prim_mst(&adj, rng.random_range(0..n));
        let pairs: Vec<(usize, usize)> = tree.edges.iter().map(|e| (e.from, e.to)).collect();
        if !is_spanning_tree(n, &pairs) {
            malformed += 1;
        }
        let oracle = brute_force_mst_weight(n, |i, j| adj.weight(i, j));
        if !rel_close(tree.total_weight(), oracle, 1e-9) {
            mismatches += 1;
        }
    }
    let ok = mismatches == 0 && malformed == 0;
    report(
        5,
        ok,
        format!(
            "500 configs (3-6 heads): weight mismatches {mismatches}, malformed trees {malformed}"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_6_link_cost_values() {
    let p = EnergyParams::default();
    let d_o = p.d_o();
    let cases = [
        (10u32, 0.0, 5.5e-7),
        (1, 100.0, 1.85e-7),
        (1, d_o, 55e-9 + 10e-12 * (10e-12 / 0.0013e-12)),
    ];
    let mut worst: f64 = 0.0;
    for (m, d, expected) in cases {
        let got = link_cost(&p, m, d).unwrap().joules();
        worst = worst.max((got - expected).abs() / expected);
    }
    let mut worst_cont: f64 = 0.0;
    for m in [1, 10, 100] {
        let lo = link_cost(&p, m, d_o - 1e-6).unwrap().joules();
        let hi = link_cost(&p, m, d_o + 1e-6).unwrap().joules();
        worst_cont = worst_cont.max((hi - lo).abs() / hi);
    }
    let ok = worst <= 1e-12 && worst_cont <= 1e-6;
    report(
        6,
        ok,
        format!("worst relative error {worst:.3e} (need <= 1e-12); continuity gap at d_o {worst_cont:.3e} (need <= 1e-6)"),
    );
    assert!(ok);
}

#[test]
fn criterion_7_conservation_and_monotonicity() {
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    let mut runs = 0;
    for v in comparison_variants(10) {
        let cfg = ScenarioConfig {
            protocol: v.protocol,
            clustering: v.clustering,
            ..Default::default()
        };
        for (_, res) in run_seeds(&cfg, &[101, 102, 103, 104, 105]).unwrap() {
            runs += 1;
            assert_eq!(res.metrics.len(), 1500);
            let mut spent = 0.0;
            let mut prev: Option<(f64, usize)> = None;
            for (row, out) in res.metrics.iter().zip(&res.outcomes) {
                spent += out.energy_spent;
                let drop = res.initial_energy - row.total_residual;
                worst = worst.max((drop - spent).abs() / spent);
                if let Some((r, a)) = prev {
                    if row.total_residual > r || row.alive > a {
                        violations += 1;
                    }
                }
                prev = Some((row.total_residual, row.alive));
            }
        }
    }
    let ok = worst <= 1e-9 && violations == 0;
    report(
        7,
        ok,
        format!("{runs} runs x 1500 rounds: worst conservation error {worst:.3e} (need <= 1e-9), monotonicity violations {violations}"),
    );
    assert!(ok);
}

#[test]
fn criterion_8_determinism() {
    let mut differing = 0;
    let mut checked = 0;
    for v in comparison_variants(10) {
        for seeds in [vec![0u64], vec![42], vec![7, 3, 99]] {
            let cfg = ScenarioConfig {
                protocol: v.protocol,
                clustering: v.clustering,
                r_max: 300,
                ..Default::default()
            };
            let a = render_run_csv(&cfg, &seeds).unwrap();
            let b = render_run_csv(&cfg, &seeds).unwrap();
            checked += 1;
            if a.as_bytes() != b.as_bytes() {
                differing += 1;
            }
        }
    }
    let ok = differing == 0;
    report(
        8,
        ok,
        format!("{checked} (config, seeds) reruns, byte-differing outputs: {differing}"),
    );
    assert!(ok);
}
