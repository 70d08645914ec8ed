//! Configuration files, CSV output and the `run` / `compare` commands.
//!
//! Config files are flat `key = value` text with `#` comments. Every key is
//! optional; omitted keys keep their defaults. Command-line flags override
//! file values.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use thiserror::Error;

use crate::engine::{MetricsRow, SimError};
use crate::model::{Clustering, ConfigError, Protocol, ScenarioConfig, DEFAULT_UNIFORM_K};
use crate::sweep::{compare, run_seeds, Comparison};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {message}")]
    InvalidValue {
        line: usize,
        key: String,
        message: String,
    },
    #[error("line {line}: duplicate key `{key}`")]
    DuplicateKey { line: usize, key: String },
    #[error(transparent)]
    Range(#[from] ConfigError),
}

/// Keys accepted in a config file, in echo order.
pub const CONFIG_KEYS: &[&str] = &[
    "nodes",
    "field_width",
    "field_height",
    "fc_x",
    "fc_y",
    "p",
    "rounds",
    "protocol",
    "clustering",
    "k",
    "advanced_fraction",
    "advanced_energy_factor",
    "seed",
    "e_o",
    "e_t",
    "e_d",
    "e_r",
    "e_f",
    "e_m",
    "e_e",
    "e_a",
    "alpha",
];

/// Optional overrides collected from one config source.
#[derive(Debug, Clone, Default, PartialEq)]
struct Overrides {
    clustering: Option<ClusteringArg>,
    k: Option<usize>,
}

fn parse_value<T: std::str::FromStr>(line: usize, key: &str, raw: &str) -> Result<T, ParseError>
where
    T::Err: std::fmt::Display,
{
    raw.parse::<T>().map_err(|e| ParseError::InvalidValue {
        line,
        key: key.to_string(),
        message: format!("`{raw}`: {e}"),
    })
}

/// Parses config text into a validated scenario, starting from defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ParseError> {
    let mut config = ScenarioConfig::default();
    let overrides = apply_config_text(&mut config, text)?;
    config.clustering = resolve_clustering(config.clustering, overrides.clustering, overrides.k);
    config.validate()?;
    Ok(config)
}

fn apply_config_text(config: &mut ScenarioConfig, text: &str) -> Result<Overrides, ParseError> {
    let mut seen: Vec<&str> = Vec::new();
    let mut over = Overrides::default();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("");
        if content.trim().is_empty() {
            continue;
        }
        let Some(eq) = content.find('=') else {
            let column = content.len() - content.trim_start().len() + 1;
            return Err(ParseError::Syntax {
                line,
                column,
                message: "expected `key = value`".into(),
            });
        };
        let key = content[..eq].trim();
        let value = content[eq + 1..].trim();
        if key.is_empty() {
            return Err(ParseError::Syntax {
                line,
                column: eq + 1,
                message: "missing key before `=`".into(),
            });
        }
        if value.is_empty() {
            return Err(ParseError::Syntax {
                line,
                column: eq + 2,
                message: format!("missing value for `{key}`"),
            });
        }
        let Some(&known) = CONFIG_KEYS.iter().find(|k| **k == key) else {
            return Err(ParseError::UnknownKey {
                line,
                key: key.to_string(),
            });
        };
        if seen.contains(&known) {
            return Err(ParseError::DuplicateKey {
                line,
                key: key.to_string(),
            });
        }
        seen.push(known);

        let e = &mut config.energy;
        match known {
            "nodes" => config.n_nodes = parse_value(line, key, value)?,
            "field_width" => config.field_width = parse_value(line, key, value)?,
            "field_height" => config.field_height = parse_value(line, key, value)?,
            "fc_x" => config.fc_position.x = parse_value(line, key, value)?,
            "fc_y" => config.fc_position.y = parse_value(line, key, value)?,
            "p" => config.p = parse_value(line, key, value)?,
            "rounds" => config.r_max = parse_value(line, key, value)?,
            "protocol" => config.protocol = parse_value(line, key, value)?,
            "clustering" => {
                over.clustering = Some(ClusteringArg::from_str(value, true).map_err(|m| {
                    ParseError::InvalidValue {
                        line,
                        key: key.to_string(),
                        message: m,
                    }
                })?)
            }
            "k" => over.k = Some(parse_value(line, key, value)?),
            "advanced_fraction" => config.advanced_fraction = parse_value(line, key, value)?,
            "advanced_energy_factor" => {
                config.advanced_energy_factor = parse_value(line, key, value)?
            }
            "seed" => config.rng_seed = parse_value(line, key, value)?,
            "e_o" => e.e_o = parse_value(line, key, value)?,
            "e_t" => e.e_t = parse_value(line, key, value)?,
            "e_d" => e.e_d = parse_value(line, key, value)?,
            "e_r" => e.e_r = parse_value(line, key, value)?,
            "e_f" => e.e_f = parse_value(line, key, value)?,
            "e_m" => e.e_m = parse_value(line, key, value)?,
            "e_e" => e.e_e = parse_value(line, key, value)?,
            "e_a" => e.e_a = parse_value(line, key, value)?,
            "alpha" => e.alpha = parse_value(line, key, value)?,
            _ => unreachable!("key list and match arms disagree"),
        }
    }
    Ok(over)
}

fn resolve_clustering(
    current: Clustering,
    mode: Option<ClusteringArg>,
    k: Option<usize>,
) -> Clustering {
    let current_k = match current {
        Clustering::Uniform(k) => k,
        Clustering::NonUniform => DEFAULT_UNIFORM_K,
    };
    let uniform = match (mode, current) {
        (Some(ClusteringArg::Uniform), _) => true,
        (Some(ClusteringArg::Nonuniform), _) => false,
        (None, Clustering::Uniform(_)) => true,
        (None, Clustering::NonUniform) => false,
    };
    if uniform {
        Clustering::Uniform(k.unwrap_or(current_k))
    } else {
        Clustering::NonUniform
    }
}

/// `# key = value` lines for every effective parameter except the seed.
pub fn config_header(config: &ScenarioConfig) -> String {
    let e = &config.energy;
    let k = match config.clustering {
        Clustering::Uniform(k) => k,
        Clustering::NonUniform => DEFAULT_UNIFORM_K,
    };
    let mut out = String::new();
    let mut put = |key: &str, value: String| {
        let _ = writeln!(out, "# {key} = {value}");
    };
    put("nodes", config.n_nodes.to_string());
    put("field_width", format!("{:?}", config.field_width));
    put("field_height", format!("{:?}", config.field_height));
    put("fc_x", format!("{:?}", config.fc_position.x));
    put("fc_y", format!("{:?}", config.fc_position.y));
    put("p", format!("{:?}", config.p));
    put("rounds", config.r_max.to_string());
    put("protocol", config.protocol.to_string());
    put("clustering", config.clustering.to_string());
    put("k", k.to_string());
    put(
        "advanced_fraction",
        format!("{:?}", config.advanced_fraction),
    );
    put(
        "advanced_energy_factor",
        format!("{:?}", config.advanced_energy_factor),
    );
    for (key, value) in [
        ("e_o", e.e_o),
        ("e_t", e.e_t),
        ("e_d", e.e_d),
        ("e_r", e.e_r),
        ("e_f", e.e_f),
        ("e_m", e.e_m),
        ("e_e", e.e_e),
        ("e_a", e.e_a),
        ("alpha", e.alpha),
    ] {
        put(key, format!("{value:?}"));
    }
    out
}

pub const METRICS_HEADER: &str = "round,protocol,clustering,seed,total_residual_j,alive,ch_count";

fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Appends one CSV row per metrics row.
pub fn write_metrics_rows(
    out: &mut String,
    config: &ScenarioConfig,
    seed: u64,
    rows: &[MetricsRow],
) {
    for m in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            m.round,
            config.protocol,
            config.clustering,
            seed,
            fmt_f64(m.total_residual),
            m.alive,
            m.ch_count
        );
    }
}

/// One parsed data line of a per-round CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub round: u32,
    pub protocol: Protocol,
    pub clustering: String,
    pub seed: u64,
    pub total_residual: f64,
    pub alive: usize,
    pub ch_count: usize,
}

/// Reads the data lines of a per-round CSV, skipping comments and the header.
pub fn read_metrics_csv(text: &str) -> Result<Vec<CsvRecord>, String> {
    let mut records = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.starts_with('#') || line.is_empty() || line == METRICS_HEADER {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 7 {
            return Err(format!(
                "line {}: expected 7 fields, got {}",
                idx + 1,
                f.len()
            ));
        }
        let err = |what: &str| format!("line {}: bad {what}", idx + 1);
        records.push(CsvRecord {
            round: f[0].parse().map_err(|_| err("round"))?,
            protocol: f[1].parse().map_err(|_| err("protocol"))?,
            clustering: f[2].to_string(),
            seed: f[3].parse().map_err(|_| err("seed"))?,
            total_residual: f[4].parse().map_err(|_| err("total_residual_j"))?,
            alive: f[5].parse().map_err(|_| err("alive"))?,
            ch_count: f[6].parse().map_err(|_| err("ch_count"))?,
        });
    }
    Ok(records)
}

/// Rebuilds the metrics of one run from its CSV records. The first death is
/// the first round whose alive count drops below `n_nodes`.
pub fn metrics_from_records(records: &[CsvRecord], n_nodes: usize) -> Vec<MetricsRow> {
    let mut first_death = None;
    records
        .iter()
        .map(|r| {
            if first_death.is_none() && r.alive < n_nodes {
                first_death = Some(r.round);
            }
            MetricsRow {
                round: r.round,
                total_residual: r.total_residual,
                alive: r.alive,
                ch_count: r.ch_count,
                first_death_round: first_death,
            }
        })
        .collect()
}

/// Full per-round CSV for a set of seeds: config echo, header, then rows
/// grouped by seed in the given order.
pub fn render_run_csv(config: &ScenarioConfig, seeds: &[u64]) -> Result<String, SimError> {
    let runs = run_seeds(config, seeds)?;
    let mut out = config_header(config);
    let _ = writeln!(out, "# seeds = {}", join_seeds(seeds));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for (seed, res) in &runs {
        write_metrics_rows(&mut out, config, *seed, &res.metrics);
    }
    Ok(out)
}

pub const SUMMARY_HEADER: &str =
    "kind,name,seeds,rounds,mean_residual_j,std_residual_j,mean_alive,mean_first_death_round,value";

/// Summary CSV: one row per variant, then one row per ratio.
pub fn render_summary_csv(config: &ScenarioConfig, seeds: &[u64], cmp: &Comparison) -> String {
    let mut out = config_header(config);
    let _ = writeln!(out, "# seeds = {}", join_seeds(seeds));
    let _ = writeln!(
        out,
        "# first-death means count runs without deaths as rounds + 1"
    );
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for v in cmp.variants() {
        let _ = writeln!(
            out,
            "variant,{},{},{},{},{},{},{},",
            v.variant.name,
            v.seeds.len(),
            v.rounds,
            fmt_f64(v.mean_residual()),
            fmt_f64(v.std_residual()),
            fmt_f64(v.mean_alive()),
            fmt_f64(v.mean_first_death()),
        );
    }
    for (name, value) in cmp.ratios() {
        let _ = writeln!(
            out,
            "ratio,{name},{},{},,,,,{}",
            seeds.len(),
            config.r_max,
            fmt_f64(value)
        );
    }
    out
}

fn join_seeds(seeds: &[u64]) -> String {
    seeds
        .iter()
        .map(u64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProtocolArg {
    Baseline,
    Proposed,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Baseline => Protocol::Baseline,
            ProtocolArg::Proposed => Protocol::Proposed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ClusteringArg {
    Uniform,
    Nonuniform,
}

#[derive(Debug, Parser)]
#[command(
    name = "crwsn",
    version,
    about = "Cluster-head report routing simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// Flat `key = value` config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of rounds to simulate.
    #[arg(long)]
    pub rounds: Option<u32>,
    /// Single RNG seed.
    #[arg(long, conflicts_with = "seeds")]
    pub seed: Option<u64>,
    /// Comma-separated RNG seeds.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub seeds: Option<Vec<u64>>,
    /// Uniform-mode cluster count.
    #[arg(long)]
    pub k: Option<usize>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one protocol variant and write per-round metrics.
    Run {
        #[arg(long, value_enum)]
        protocol: Option<ProtocolArg>,
        #[arg(long, value_enum)]
        clustering: Option<ClusteringArg>,
        #[command(flatten)]
        common: Common,
    },
    /// Run baseline, uniform and non-uniform variants and summarise.
    Compare {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read config {path}: {source}")]
    ReadConfig { path: PathBuf, source: io::Error },
    #[error("config {path}: {source}")]
    Config { path: PathBuf, source: ParseError },
    #[error("invalid flag: {0}")]
    Flag(ConfigError),
    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: io::Error },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Layers defaults, the config file and flags into a scenario and seed list.
pub fn resolve(
    common: &Common,
    protocol: Option<ProtocolArg>,
    clustering: Option<ClusteringArg>,
) -> Result<(ScenarioConfig, Vec<u64>), CliError> {
    let mut config = ScenarioConfig::default();
    let mut file_over = Overrides::default();
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path).map_err(|source| CliError::ReadConfig {
            path: path.clone(),
            source,
        })?;
        file_over = apply_config_text(&mut config, &text).map_err(|source| CliError::Config {
            path: path.clone(),
            source,
        })?;
    }
    config.clustering = resolve_clustering(config.clustering, file_over.clustering, file_over.k);
    config.clustering = resolve_clustering(config.clustering, clustering, common.k);
    if let Some(p) = protocol {
        config.protocol = p.into();
    }
    if let Some(r) = common.rounds {
        config.r_max = r;
    }
    if let Some(s) = common.seed {
        config.rng_seed = s;
    }
    let seeds = match &common.seeds {
        Some(list) if !list.is_empty() => list.clone(),
        _ => vec![config.rng_seed],
    };
    config.rng_seed = seeds[0];
    if let Err(e) = config.validate() {
        return Err(match &common.config {
            Some(path) => CliError::Config {
                path: path.clone(),
                source: ParseError::Range(e),
            },
            None => CliError::Flag(e),
        });
    }
    Ok((config, seeds))
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(path) => write_file(path, text),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            protocol,
            clustering,
            common,
        } => {
            let (config, seeds) = resolve(&common, protocol, clustering)?;
            eprintln!(
                "running {} / {} for {} rounds on {} seed(s)",
                config.protocol,
                config.clustering,
                config.r_max,
                seeds.len()
            );
            let csv = render_run_csv(&config, &seeds)?;
            emit(&common.out, &csv)
        }
        Command::Compare { common } => {
            let (config, seeds) = resolve(&common, None, None)?;
            eprintln!(
                "comparing variants for {} rounds on {} seed(s)",
                config.r_max,
                seeds.len()
            );
            let cmp = compare(&config, &seeds)?;
            for (name, value) in cmp.ratios() {
                eprintln!("{name}: {value:.6}");
            }
            emit(&common.out, &render_summary_csv(&config, &seeds, &cmp))
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
