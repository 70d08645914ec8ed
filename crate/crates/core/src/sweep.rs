//! Multi-seed execution and the three-way protocol comparison.

use rayon::prelude::*;

use crate::engine::{run_simulation, SimError, SimulationResult};
use crate::model::{Clustering, Protocol, ScenarioConfig, DEFAULT_UNIFORM_K};

/// Runs `config` once per seed. Results come back in seed order regardless of
/// which run finishes first.
pub fn run_seeds(
    config: &ScenarioConfig,
    seeds: &[u64],
) -> Result<Vec<(u64, SimulationResult)>, SimError> {
    config.validate()?;
    seeds
        .par_iter()
        .map(|&seed| {
            let cfg = ScenarioConfig {
                rng_seed: seed,
                ..config.clone()
            };
            run_simulation(&cfg).map(|res| (seed, res))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Variant {
    pub name: &'static str,
    pub protocol: Protocol,
    pub clustering: Clustering,
}

/// Baseline (stochastic election, direct reports), tree relay with a fixed
/// head count, and tree relay with stochastic election.
pub fn comparison_variants(k: usize) -> [Variant; 3] {
    [
        Variant {
            name: "baseline",
            protocol: Protocol::Baseline,
            clustering: Clustering::NonUniform,
        },
        Variant {
            name: "proposed_uniform",
            protocol: Protocol::Proposed,
            clustering: Clustering::Uniform(k),
        },
        Variant {
            name: "proposed_nonuniform",
            protocol: Protocol::Proposed,
            clustering: Clustering::NonUniform,
        },
    ]
}

/// End-of-run statistics for one variant across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct VariantSummary {
    pub variant: Variant,
    pub seeds: Vec<u64>,
    pub rounds: u32,
    pub final_residual: Vec<f64>,
    pub final_alive: Vec<usize>,
    pub first_death: Vec<Option<u32>>,
}

impl VariantSummary {
    pub fn from_runs(
        variant: Variant,
        rounds: u32,
        n_nodes: usize,
        runs: &[(u64, SimulationResult)],
    ) -> Self {
        Self {
            variant,
            seeds: runs.iter().map(|(s, _)| *s).collect(),
            rounds,
            final_residual: runs.iter().map(|(_, r)| r.final_residual()).collect(),
            final_alive: runs.iter().map(|(_, r)| r.final_alive(n_nodes)).collect(),
            first_death: runs.iter().map(|(_, r)| r.first_death_round()).collect(),
        }
    }

    pub fn mean_residual(&self) -> f64 {
        mean(&self.final_residual)
    }

    pub fn std_residual(&self) -> f64 {
        sample_std(&self.final_residual)
    }

    pub fn mean_alive(&self) -> f64 {
        let v: Vec<f64> = self.final_alive.iter().map(|&a| a as f64).collect();
        mean(&v)
    }

    /// Runs without any death count as `rounds + 1`.
    pub fn mean_first_death(&self) -> f64 {
        let censored = f64::from(self.rounds) + 1.0;
        let v: Vec<f64> = self
            .first_death
            .iter()
            .map(|d| d.map_or(censored, f64::from))
            .collect();
        mean(&v)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub baseline: VariantSummary,
    pub uniform: VariantSummary,
    pub nonuniform: VariantSummary,
}

impl Comparison {
    pub fn variants(&self) -> [&VariantSummary; 3] {
        [&self.baseline, &self.uniform, &self.nonuniform]
    }

    pub fn residual_ratio_uniform_vs_baseline(&self) -> f64 {
        self.uniform.mean_residual() / self.baseline.mean_residual()
    }

    pub fn residual_ratio_uniform_vs_nonuniform(&self) -> f64 {
        self.uniform.mean_residual() / self.nonuniform.mean_residual()
    }

    pub fn alive_ratio_uniform_vs_baseline(&self) -> f64 {
        self.uniform.mean_alive() / self.baseline.mean_alive()
    }

    /// `(name, value)` pairs in output order.
    pub fn ratios(&self) -> [(&'static str, f64); 3] {
        [
            (
                "residual_proposed_uniform_over_baseline",
                self.residual_ratio_uniform_vs_baseline(),
            ),
            (
                "residual_proposed_uniform_over_proposed_nonuniform",
                self.residual_ratio_uniform_vs_nonuniform(),
            ),
            (
                "alive_proposed_uniform_over_baseline",
                self.alive_ratio_uniform_vs_baseline(),
            ),
        ]
    }
}

/// Runs all three variants on every seed. `config.clustering`'s `k` is used
/// for the uniform variant when set, otherwise the default of ten.
pub fn compare(config: &ScenarioConfig, seeds: &[u64]) -> Result<Comparison, SimError> {
    let k = match config.clustering {
        Clustering::Uniform(k) => k,
        Clustering::NonUniform => DEFAULT_UNIFORM_K,
    };
    let [b, u, nu] = comparison_variants(k);
    let summarize = |variant: Variant| -> Result<VariantSummary, SimError> {
        let cfg = ScenarioConfig {
            protocol: variant.protocol,
            clustering: variant.clustering,
            ..config.clone()
        };
        let runs = run_seeds(&cfg, seeds)?;
        Ok(VariantSummary::from_runs(
            variant,
            cfg.r_max,
            cfg.n_nodes,
            &runs,
        ))
    };
    Ok(Comparison {
        baseline: summarize(b)?,
        uniform: summarize(u)?,
        nonuniform: summarize(nu)?,
    })
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        return f64::NAN;
    }
    v.iter().sum::<f64>() / v.len() as f64
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    let ss: f64 = v.iter().map(|x| (x - m) * (x - m)).sum();
    (ss / (v.len() - 1) as f64).sqrt()
}
