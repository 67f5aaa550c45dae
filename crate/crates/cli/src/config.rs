//! Experiment recipes read from TOML.

use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::Deserialize;

use crate::error::CliError;

/// The experiments a config can request.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    IsingPhaseDiagram,
    IsingTaScaling,
    IsChainOrder,
    IsChainTa,
    StarThermo,
    StarSpeedup,
    MixingBound,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::IsingPhaseDiagram,
        ExperimentKind::IsingTaScaling,
        ExperimentKind::IsChainOrder,
        ExperimentKind::IsChainTa,
        ExperimentKind::StarThermo,
        ExperimentKind::StarSpeedup,
        ExperimentKind::MixingBound,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::IsingPhaseDiagram => "ising-phase-diagram",
            ExperimentKind::IsingTaScaling => "ising-ta-scaling",
            ExperimentKind::IsChainOrder => "is-chain-order",
            ExperimentKind::IsChainTa => "is-chain-ta",
            ExperimentKind::StarThermo => "star-thermo",
            ExperimentKind::StarSpeedup => "star-speedup",
            ExperimentKind::MixingBound => "mixing-bound",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            ExperimentKind::IsingPhaseDiagram => "free-fermion gap and phase label over a (J1/h, J2/h) grid",
            ExperimentKind::IsingTaScaling => "adiabatic time t_a of the Ising routes against ring size",
            ExperimentKind::IsChainOrder => "Z2/Z3 order parameters and gap over an (Omega/Vg, Ve/Vg) grid",
            ExperimentKind::IsChainTa => "adiabatic time t_a of the independent-set chain paths",
            ExperimentKind::StarThermo => "star entropy per branch and center occupation against beta",
            ExperimentKind::StarSpeedup => "star adiabatic times next to classical mixing times",
            ExperimentKind::MixingBound => "exact mixing times against the spectral lower bound",
        }
    }

    /// Names of the CSV files the experiment writes.
    pub fn files(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::IsingPhaseDiagram => &["ising_phase.csv"],
            ExperimentKind::IsingTaScaling => &["ising_ta_runs.csv", "ising_ta.csv"],
            ExperimentKind::IsChainOrder => &["is_order.csv"],
            ExperimentKind::IsChainTa => &["is_ta_runs.csv", "is_ta.csv"],
            ExperimentKind::StarThermo => &["star_entropy.csv"],
            ExperimentKind::StarSpeedup => &["star_ta_runs.csv", "star_ta.csv", "star_classical.csv"],
            ExperimentKind::MixingBound => &["mixing_bound.csv"],
        }
    }
}

/// Inclusive integer range, written either as a list or as
/// `{ from, to, step }`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SizeRange {
    List(Vec<usize>),
    Span {
        from: usize,
        to: usize,
        #[serde(default = "one")]
        step: usize,
    },
}

fn one() -> usize {
    1
}

impl SizeRange {
    pub fn values(&self) -> Vec<usize> {
        match self {
            SizeRange::List(v) => v.clone(),
            SizeRange::Span { from, to, step } => (*from..=*to).step_by((*step).max(1)).collect(),
        }
    }
}

/// Real grid, written either as a list or as `{ start, stop, points }`
/// with both ends included.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    List(Vec<f64>),
    Linspace { start: f64, stop: f64, points: usize },
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::List(v) => v.clone(),
            Grid::Linspace { start, stop, points } => match points {
                0 => Vec::new(),
                1 => vec![*start],
                &p => (0..p)
                    .map(|k| start + (stop - start) * k as f64 / (p - 1) as f64)
                    .collect(),
            },
        }
    }
}

/// Overrides of numerical conventions; unset fields keep library defaults.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub target_fidelity: Option<f64>,
    pub tv_threshold: Option<f64>,
    pub bisection_rel_tol: Option<f64>,
    pub max_time: Option<f64>,
    pub step_tol: Option<f64>,
    pub basis_cap: Option<usize>,
    pub worst_case_limit: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundarySpec {
    Open,
    Periodic,
}

/// Classical model used by the mixing and ad-hoc commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelSpec {
    /// Ising ring with Glauber dynamics.
    Ising,
    /// Unit-weight independent sets on an open chain, Metropolis dynamics.
    IsChain,
    /// Unit-weight independent sets on a star with `n` branches.
    Star,
    /// Independent sets on a seeded random graph with random weights.
    RandomIs,
}

impl ModelSpec {
    pub fn label(self) -> &'static str {
        match self {
            ModelSpec::Ising => "ising",
            ModelSpec::IsChain => "is-chain",
            ModelSpec::Star => "star",
            ModelSpec::RandomIs => "random-is",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [ModelSpec::Ising, ModelSpec::IsChain, ModelSpec::Star, ModelSpec::RandomIs]
            .into_iter()
            .find(|m| m.label() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    /// Defaults to the kind's label.
    pub name: Option<String>,
    /// Ring, chain or vertex count; branch count for star experiments.
    pub sizes: Option<SizeRange>,
    pub betas: Option<Grid>,
    /// First ratio axis: `J1/h` or `Omega/Vg`.
    pub x: Option<Grid>,
    /// Second ratio axis: `J2/h` or `Ve/Vg`.
    pub y: Option<Grid>,
    /// Path labels; each kind has its own set and default.
    pub paths: Option<Vec<String>>,
    pub models: Option<Vec<ModelSpec>>,
    pub boundary: Option<BoundarySpec>,
    /// Edge probability of the random graphs.
    pub edge_probability: Option<f64>,
    /// Random graphs drawn per size.
    pub samples: Option<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl ExperimentConfig {
    pub fn name(&self) -> &str {
        self.name.as_deref().unwrap_or(self.kind.label())
    }

    /// Output file names; an explicit `name` becomes a prefix so that one
    /// config can hold several experiments of the same kind.
    pub fn output_files(&self) -> Vec<String> {
        self.kind
            .files()
            .iter()
            .map(|f| match &self.name {
                Some(n) => format!("{n}_{f}"),
                None => f.to_string(),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
}

impl RunConfig {
    /// Parses and validates a config, reporting the line of any syntax or
    /// field error.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            CliError::Config {
                line,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let invalid = |message: String| CliError::Config { line: 0, message };
        if self.experiments.is_empty() {
            return Err(invalid("config declares no [[experiment]]".into()));
        }
        let mut names = BTreeSet::new();
        let mut files = BTreeSet::new();
        for e in &self.experiments {
            if !names.insert(e.name().to_string()) {
                return Err(invalid(format!("experiment name `{}` is used twice", e.name())));
            }
            for f in e.output_files() {
                if !files.insert(f.clone()) {
                    return Err(invalid(format!("two experiments would write {f}")));
                }
            }
            e.validate().map_err(|m| invalid(format!("experiment `{}`: {m}", e.name())))?;
        }
        Ok(())
    }
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), String> {
        if let Some(n) = &self.name {
            if n.is_empty() || !n.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err(format!("name `{n}` may only use letters, digits, `-` and `_`"));
            }
        }
        if let Some(s) = &self.sizes {
            if s.values().is_empty() {
                return Err("`sizes` is empty".into());
            }
        }
        for (field, grid) in [("betas", &self.betas), ("x", &self.x), ("y", &self.y)] {
            if let Some(g) = grid {
                let v = g.values();
                if v.is_empty() {
                    return Err(format!("`{field}` is empty"));
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(format!("`{field}` has a non-finite entry"));
                }
            }
        }
        if let Some(p) = &self.paths {
            if p.is_empty() {
                return Err("`paths` is empty".into());
            }
        }
        if let Some(m) = &self.models {
            if m.is_empty() {
                return Err("`models` is empty".into());
            }
        }
        if let Some(p) = self.edge_probability {
            if !(0.0..=1.0).contains(&p) {
                return Err(format!("edge probability {p} is outside [0, 1]"));
            }
        }
        Ok(())
    }
}
