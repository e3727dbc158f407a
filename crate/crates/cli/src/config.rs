//! Run configuration: JSON schema and conversion into library types.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;
use witten_core::decay::Aggregation;
use witten_core::model::{Hamiltonian, ModelKind};
use witten_core::sampler::{ChainConfig, Proposal};
use witten_core::witten_grid::{GridSpec, SolverOptions, DEFAULT_NODE_BUDGET, MAX_GRID_DIM};
use witten_core::{Lattice, Observable};

/// Bad input: unreadable or malformed config, or a request the library cannot honor as posed.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    Certify,
    Solve,
    Cov,
    Sample,
    Decay,
    Crosscheck,
}

impl Task {
    pub fn name(self) -> &'static str {
        match self {
            Task::Certify => "certify",
            Task::Solve => "solve",
            Task::Cov => "cov",
            Task::Sample => "sample",
            Task::Decay => "decay",
            Task::Crosscheck => "crosscheck",
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ModelKindConfig {
    Quadratic,
    Kac,
    GaussianBump,
}

/// `kind` plus the parameters that kind needs; a flat struct keeps exact number parsing.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub kind: ModelKindConfig,
    #[serde(default)]
    pub nu: Option<f64>,
    #[serde(default)]
    pub amplitude: Option<f64>,
    #[serde(default)]
    pub width: Option<f64>,
}

impl ModelConfig {
    fn kind(&self) -> anyhow::Result<ModelKind<f64>> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| config_err(format!("model: missing field `{name}`")));
        let (allowed, kind): (&[&str], _) = match self.kind {
            ModelKindConfig::Quadratic => (&[], ModelKind::Quadratic),
            ModelKindConfig::Kac => (&["nu"], ModelKind::Kac { nu: need(self.nu, "nu")? }),
            ModelKindConfig::GaussianBump => (
                &["amplitude", "width"],
                ModelKind::GaussianBump {
                    amplitude: need(self.amplitude, "amplitude")?,
                    width: need(self.width, "width")?,
                },
            ),
        };
        for (name, v) in [("nu", self.nu), ("amplitude", self.amplitude), ("width", self.width)] {
            if v.is_some() && !allowed.contains(&name) {
                return Err(config_err(format!("model: field `{name}` does not apply to this kind")));
            }
        }
        Ok(kind)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub extents: Vec<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub half_width: f64,
    pub points_per_axis: usize,
    #[serde(default)]
    pub budget: Option<usize>,
    #[serde(default)]
    pub tol: Option<f64>,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProposalConfig {
    FullVector,
    SingleSite,
    SingleSiteIndependent,
    Langevin,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n_steps: usize,
    #[serde(default)]
    pub burn_in: Option<usize>,
    #[serde(default)]
    pub proposal_scale: Option<f64>,
    #[serde(default)]
    pub thin: Option<usize>,
    #[serde(default)]
    pub proposal: Option<ProposalConfig>,
    /// Write every retained sample to `chain.csv` (sample task).
    #[serde(default)]
    pub write_chain: Option<bool>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionConfig {
    #[serde(default)]
    pub n_samples: Option<usize>,
    #[serde(default)]
    pub radii: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, Deserialize, Default, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum RouteConfig {
    #[default]
    Mcmc,
    Grid,
}

#[derive(Debug, Clone, Copy, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AggregationConfig {
    #[default]
    Max,
    Mean,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticConfig {
    pub kappa: f64,
    #[serde(default = "one")]
    pub c: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    #[serde(default)]
    pub route: RouteConfig,
    #[serde(default)]
    pub anchor: usize,
    #[serde(default)]
    pub aggregation: AggregationConfig,
    #[serde(default)]
    pub c_ref: Option<f64>,
    /// Replace measured correlations by `c e^{-kappa d}` to exercise the profile and fit.
    #[serde(default)]
    pub synthetic: Option<SyntheticConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrosscheckSection {
    /// Absolute floor of the grid-route tolerance `max(grid_tol, 5 h^2)`.
    #[serde(default = "default_grid_tol")]
    pub grid_tol: f64,
    /// Error-bar multiplier for the chain route.
    #[serde(default = "default_sigmas")]
    pub mcmc_sigmas: f64,
}

impl Default for CrosscheckSection {
    fn default() -> Self {
        CrosscheckSection {
            grid_tol: default_grid_tol(),
            mcmc_sigmas: default_sigmas(),
        }
    }
}

fn default_grid_tol() -> f64 {
    1e-4
}

fn default_sigmas() -> f64 {
    3.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub task: Option<Task>,
    pub model: ModelConfig,
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub chain: Option<ChainSection>,
    #[serde(default)]
    pub kappas: Option<Vec<f64>>,
    /// Observable pairs such as `["x_0", "x_1"]`.
    #[serde(default)]
    pub pairs: Option<Vec<(String, String)>>,
    /// Right-hand sides for the solve task.
    #[serde(default)]
    pub observables: Option<Vec<String>>,
    #[serde(default)]
    pub assumptions: Option<AssumptionConfig>,
    #[serde(default)]
    pub decay: Option<DecaySection>,
    #[serde(default)]
    pub crosscheck: Option<CrosscheckSection>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

pub fn parse(text: &str) -> anyhow::Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| config_err(format!("invalid config: {e}")))
}

impl RunConfig {
    pub fn hamiltonian(&self) -> anyhow::Result<Hamiltonian<f64>> {
        let lattice = Lattice::new_box(&self.lattice.extents)
            .map_err(|e| config_err(format!("lattice.extents: {e}")))?;
        let kind = self.model.kind()?;
        Hamiltonian::new(lattice, kind).map_err(|e| config_err(format!("model: {e}")))
    }

    pub fn seed(&self, cli: Option<u64>) -> u64 {
        cli.or(self.seed).unwrap_or(0)
    }

    pub fn kappas(&self) -> Vec<f64> {
        self.kappas.clone().unwrap_or_else(|| vec![0.0])
    }

    pub fn grid_spec(&self, dim: usize) -> anyhow::Result<(GridSpec<f64>, SolverOptions<f64>)> {
        if dim > MAX_GRID_DIM {
            return Err(config_err(format!(
                "grid route supports at most {MAX_GRID_DIM} sites, lattice has {dim}"
            )));
        }
        let g = self
            .grid
            .as_ref()
            .ok_or_else(|| config_err("missing field `grid` (required by this task)"))?;
        let spec = GridSpec::with_budget(
            g.half_width,
            g.points_per_axis,
            dim,
            g.budget.unwrap_or(DEFAULT_NODE_BUDGET),
        )
        .map_err(|e| config_err(format!("grid: {e}")))?;
        let mut opts = SolverOptions::default();
        if let Some(t) = g.tol {
            if !(t > 0.0) {
                return Err(config_err("grid.tol must be positive"));
            }
            opts.tol = t;
        }
        opts.max_iter = g.max_iter;
        Ok((spec, opts))
    }

    pub fn chain_config(&self, dim: usize, seed: u64) -> anyhow::Result<ChainConfig<f64>> {
        let c = self
            .chain
            .as_ref()
            .ok_or_else(|| config_err("missing field `chain` (required by this task)"))?;
        let mut cfg = ChainConfig::new(dim, c.n_steps, seed);
        if let Some(b) = c.burn_in {
            cfg.burn_in = b;
        }
        if let Some(s) = c.proposal_scale {
            cfg.proposal_scale = s;
        }
        if let Some(t) = c.thin {
            cfg.thin = t;
        }
        cfg.proposal = match c.proposal.unwrap_or(ProposalConfig::FullVector) {
            ProposalConfig::FullVector => Proposal::FullVector,
            ProposalConfig::SingleSite => Proposal::SingleSite,
            ProposalConfig::SingleSiteIndependent => Proposal::SingleSiteIndependent,
            ProposalConfig::Langevin => Proposal::Langevin,
        };
        cfg.validate().map_err(|e| config_err(format!("chain: {e}")))?;
        Ok(cfg)
    }

    /// Configured pairs, or every `(x_i, x_j)` with `i <= j`.
    pub fn pairs(&self, lattice: &Lattice) -> anyhow::Result<Vec<(Observable, Observable)>> {
        match &self.pairs {
            Some(p) => p
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let parse = |s: &str| -> anyhow::Result<Observable> {
                        let o: Observable = s
                            .parse()
                            .map_err(|e| config_err(format!("pairs[{k}]: {e}")))?;
                        o.check(lattice).map_err(|e| config_err(format!("pairs[{k}]: {e}")))?;
                        Ok(o)
                    };
                    Ok((parse(a)?, parse(b)?))
                })
                .collect(),
            None => {
                let m = lattice.len();
                Ok((0..m)
                    .flat_map(|i| (i..m).map(move |j| (Observable::Coordinate(i), Observable::Coordinate(j))))
                    .collect())
            }
        }
    }

    pub fn observables(&self, lattice: &Lattice) -> anyhow::Result<Vec<Observable>> {
        let names = self.observables.clone().unwrap_or_else(|| vec!["x_0".into()]);
        names
            .iter()
            .enumerate()
            .map(|(k, s)| {
                let o: Observable = s
                    .parse()
                    .map_err(|e| config_err(format!("observables[{k}]: {e}")))?;
                o.check(lattice)
                    .map_err(|e| config_err(format!("observables[{k}]: {e}")))?;
                Ok(o)
            })
            .collect()
    }

    pub fn aggregation(&self) -> Aggregation {
        match self.decay.as_ref().map(|d| d.aggregation).unwrap_or_default() {
            AggregationConfig::Max => Aggregation::Max,
            AggregationConfig::Mean => Aggregation::Mean,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config() {
        let c = parse(r#"{"model": {"kind": "kac", "nu": 0.1}, "lattice": {"extents": [6]}}"#).unwrap();
        assert_eq!(c.hamiltonian().unwrap().dim(), 6);
        assert_eq!(c.kappas(), vec![0.0]);
        assert_eq!(c.pairs(c.hamiltonian().unwrap().lattice()).unwrap().len(), 21);
    }

    #[test]
    fn unknown_keys_are_rejected_with_position() {
        let err = parse("{\n  \"model\": {\"kind\": \"quadratic\"},\n  \"lattice\": {\"extents\": [2]},\n  \"colour\": 1\n}")
            .unwrap_err()
            .to_string();
        assert!(err.contains("unknown field `colour`"), "{err}");
        assert!(err.contains("line 4"), "{err}");
    }

    #[test]
    fn model_parameters_match_kind() {
        let bad = parse(r#"{"model": {"kind": "quadratic", "nu": 0.1}, "lattice": {"extents": [2]}}"#).unwrap();
        assert!(bad.hamiltonian().is_err());
        let missing = parse(r#"{"model": {"kind": "kac"}, "lattice": {"extents": [2]}}"#).unwrap();
        assert!(missing.hamiltonian().is_err());
        let bump = parse(
            r#"{"model": {"kind": "gaussian_bump", "amplitude": 0.2, "width": 1.5}, "lattice": {"extents": [3]}}"#,
        )
        .unwrap();
        assert_eq!(bump.hamiltonian().unwrap().dim(), 3);
    }

    #[test]
    fn grid_route_limits() {
        let c = parse(r#"{"model": {"kind": "quadratic"}, "lattice": {"extents": [5]}}"#).unwrap();
        assert!(c.grid_spec(5).is_err());
        assert!(c.grid_spec(2).is_err());
        let c = parse(
            r#"{"model": {"kind": "quadratic"}, "lattice": {"extents": [2]},
                "grid": {"half_width": 8, "points_per_axis": 41}}"#,
        )
        .unwrap();
        assert_eq!(c.grid_spec(2).unwrap().0.node_count(), 41 * 41);
    }

    #[test]
    fn bad_pairs_are_config_errors() {
        let c = parse(
            r#"{"model": {"kind": "quadratic"}, "lattice": {"extents": [2]}, "pairs": [["x_0", "x_9"]]}"#,
        )
        .unwrap();
        assert!(c.pairs(c.hamiltonian().unwrap().lattice()).is_err());
    }
}
