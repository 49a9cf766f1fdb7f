//! Command-line flags and the JSON experiment config they override.

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "chamberwalk", version, about = "Random walks on graphs with group actions and on affine buildings")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// χ(λ), N_λ and Poincaré sums for a root system.
    CoxeterTables(Settings),
    /// Build and export a truncated ball of the Ã₂ building.
    Ball(Settings),
    /// Simulate a walk and report endpoint statistics.
    Simulate(Settings),
    /// Induced kernel of a finite walk on a subset.
    Induce(Settings),
    /// Quotient network of a group action, with law and return-time checks.
    Quotient(Settings),
    /// Discretize a lattice-invariant walk to a measure on the group.
    Discretize(Settings),
    /// Run named verification suites.
    Verify(Settings),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CoxeterTables(_) => "coxeter-tables",
            Command::Ball(_) => "ball",
            Command::Simulate(_) => "simulate",
            Command::Induce(_) => "induce",
            Command::Quotient(_) => "quotient",
            Command::Discretize(_) => "discretize",
            Command::Verify(_) => "verify",
        }
    }

    pub fn settings(&self) -> &Settings {
        match self {
            Command::CoxeterTables(s)
            | Command::Ball(s)
            | Command::Simulate(s)
            | Command::Induce(s)
            | Command::Quotient(s)
            | Command::Discretize(s)
            | Command::Verify(s) => s,
        }
    }
}

fn one_or_many<'de, D, T>(d: D) -> Result<Option<Vec<T>>, D::Error>
where
    D: Deserializer<'de>,
    T: Deserialize<'de>,
{
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany<T> {
        One(T),
        Many(Vec<T>),
    }
    Ok(Option::<OneOrMany<T>>::deserialize(d)?.map(|v| match v {
        OneOrMany::One(x) => vec![x],
        OneOrMany::Many(xs) => xs,
    }))
}

/// Every option, settable by flag or by the same key in the config file.
#[derive(Debug, Clone, Default, Deserialize, Serialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// JSON config file; flags override its keys.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Master seed, required by stochastic commands.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads for Monte Carlo (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory; reports go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Verification suite names.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many", alias = "checks")]
    pub suite: Option<Vec<String>>,
    /// Model or action family.
    #[arg(long)]
    pub family: Option<String>,
    /// Cartan type such as A1 or A2.
    #[arg(long = "type")]
    #[serde(rename = "type")]
    pub cartan_type: Option<String>,
    /// Thickness parameters, or tree branching.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub q: Option<Vec<u64>>,
    /// Prime of the lattice model.
    #[arg(long)]
    pub p: Option<u64>,
    #[arg(long)]
    pub radius: Option<i64>,
    /// Coordinate bound for tables.
    #[arg(long)]
    pub bound: Option<i64>,
    /// Free-group rank.
    #[arg(long)]
    pub rank: Option<u8>,
    /// Size of path and cycle networks.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub period: Option<i64>,
    #[arg(long)]
    pub shift: Option<usize>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// Finite network JSON file.
    #[arg(long)]
    pub network: Option<PathBuf>,
    /// Permutation action JSON file.
    #[arg(long)]
    pub action: Option<PathBuf>,
    /// Subset of node indices.
    #[arg(long, value_delimiter = ',')]
    #[serde(default, deserialize_with = "one_or_many")]
    pub subset: Option<Vec<usize>>,
    /// Exponential-moment parameter.
    #[arg(long)]
    pub c: Option<f64>,
    /// Step horizon for Monte Carlo walks.
    #[arg(long)]
    pub horizon: Option<u64>,
}

macro_rules! merge_fields {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Settings { config: $a.config.clone(), $($f: $a.$f.clone().or_else(|| $b.$f.clone())),* }
    };
}

impl Settings {
    /// Flags in `self` take precedence over `base`.
    pub fn over(&self, base: &Settings) -> Settings {
        merge_fields!(
            self,
            base,
            seed,
            samples,
            workers,
            out,
            format,
            suite,
            family,
            cartan_type,
            q,
            p,
            radius,
            bound,
            rank,
            n,
            period,
            shift,
            steps,
            network,
            action,
            subset,
            c,
            horizon
        )
    }

    pub fn from_json(text: &str) -> serde_json::Result<Settings> {
        serde_json::from_str(text)
    }

    /// The settings that determine a report's content, for echoing into it.
    pub fn inputs(&self) -> serde_json::Value {
        let mut v = serde_json::to_value(self).expect("settings serialize");
        if let Some(map) = v.as_object_mut() {
            map.retain(|k, v| !v.is_null() && !matches!(k.as_str(), "out" | "workers" | "format"));
        }
        v
    }

    pub fn workers(&self) -> usize {
        self.workers.unwrap_or(0)
    }

    pub fn q_single(&self, default: u64) -> u64 {
        self.q.as_ref().and_then(|q| q.first().copied()).unwrap_or(default)
    }
}
