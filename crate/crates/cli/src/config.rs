//! JSON run configuration: parsing, validation into core types, and the
//! field-path diagnostics the exit-code contract promises.

use std::path::{Path, PathBuf};

use detx_core::{BinaryInstance, Channel, ChannelBank, Distribution, MaryInstance, Proportions};
use serde::Deserialize;

use crate::Failure;

/// Threshold handling for decision rules, shared by the config file and the
/// `--threshold` flag.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdChoice {
    /// Compare statistics against the nominal threshold.
    Raw,
    /// Add the finite-sample slack that buys the universal error guarantee.
    Adjusted,
}

/// Declarative run configuration. Unknown keys are rejected so typos cannot
/// silently change an experiment.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Source laws, one per hypothesis.
    pub distributions: Vec<Vec<f64>>,
    /// Channel bank, one row-stochastic matrix per sensor.
    pub channels: Vec<Vec<Vec<f64>>>,
    /// Test-sample proportions across channels.
    pub a: Vec<f64>,
    /// Training-sample proportions across channels.
    pub b: Vec<f64>,
    /// Training-to-test length ratio.
    #[serde(default)]
    pub alpha: Option<f64>,
    /// Ratio list for `sweep-alpha` (strictly increasing).
    #[serde(default)]
    pub alphas: Option<Vec<f64>>,
    /// Decision threshold.
    #[serde(default)]
    pub lambda: Option<f64>,
    /// Threshold list for `mary-reject`.
    #[serde(default)]
    pub lambdas: Option<Vec<f64>>,
    /// Optional redundant hypothesis count, validated against
    /// `distributions`.
    #[serde(default)]
    pub m: Option<usize>,
    /// Assume identity-cover processing (second training sequence carries no
    /// information).
    #[serde(default)]
    pub vi: bool,
    /// Sweep the worst-hypothesis rejection exponent instead of the plain
    /// error exponent (`sweep-ab` only, two hypotheses).
    #[serde(default)]
    pub rejection: bool,
    #[serde(default)]
    pub threshold: Option<ThresholdChoice>,
    /// Lattice resolution for sweeps and reference checks.
    #[serde(default)]
    pub resolution: Option<f64>,
    #[serde(default)]
    pub simulation: Option<SimBlock>,
    /// Output CSV path; the `--out` flag overrides it.
    #[serde(default)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimBlock {
    /// Test sequence length.
    pub n: usize,
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    /// Hypothesis index (0-based) generating the test samples.
    #[serde(default)]
    pub truth: usize,
}

/// A parsed and validated configuration plus the raw bytes it came from,
/// kept for the output hash.
pub struct Validated {
    pub sources: Vec<Distribution>,
    pub bank: ChannelBank,
    pub a: Proportions,
    pub b: Proportions,
    pub cfg: RunConfig,
    pub raw: Vec<u8>,
}

fn config_err(msg: String) -> Failure {
    Failure::Config(msg)
}

pub fn load(path: &Path) -> Result<Validated, Failure> {
    let raw = std::fs::read(path)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_slice(&raw)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))?;

    let sources = cfg
        .distributions
        .iter()
        .enumerate()
        .map(|(i, v)| {
            Distribution::new(v.clone())
                .map_err(|e| config_err(format!("distributions[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if sources.is_empty() {
        return Err(config_err("distributions: need at least one source law".into()));
    }
    if let Some(m) = cfg.m {
        if m != sources.len() {
            return Err(config_err(format!(
                "m: declared {m} hypotheses but distributions lists {}",
                sources.len()
            )));
        }
    }

    let channels = cfg
        .channels
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            Channel::new(rows.clone()).map_err(|e| config_err(format!("channels[{i}]: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let bank = ChannelBank::new(channels).map_err(|e| config_err(format!("channels: {e}")))?;

    let a = Proportions::new(cfg.a.clone()).map_err(|e| config_err(format!("a: {e}")))?;
    let b = Proportions::new(cfg.b.clone()).map_err(|e| config_err(format!("b: {e}")))?;

    Ok(Validated { sources, bank, a, b, cfg, raw })
}

impl Validated {
    pub fn alpha(&self) -> Result<f64, Failure> {
        self.cfg
            .alpha
            .ok_or_else(|| config_err("alpha: this command needs a training ratio".into()))
    }

    pub fn lambda(&self) -> Result<f64, Failure> {
        self.cfg
            .lambda
            .ok_or_else(|| config_err("lambda: this command needs a threshold".into()))
    }

    /// Threshold list for `mary-reject`: `lambdas`, falling back to the
    /// scalar `lambda`.
    pub fn lambdas(&self) -> Result<Vec<f64>, Failure> {
        if let Some(ls) = &self.cfg.lambdas {
            if ls.is_empty() {
                return Err(config_err("lambdas: the list must not be empty".into()));
            }
            return Ok(ls.clone());
        }
        Ok(vec![self.lambda()?])
    }

    pub fn simulation(&self) -> Result<&SimBlock, Failure> {
        self.cfg
            .simulation
            .as_ref()
            .ok_or_else(|| config_err("simulation: this command needs a simulation block".into()))
    }

    pub fn binary_instance(&self, alpha: f64, lambda: f64) -> Result<BinaryInstance, Failure> {
        if self.sources.len() != 2 {
            return Err(config_err(format!(
                "distributions: this command works on exactly 2 hypotheses, got {}",
                self.sources.len()
            )));
        }
        BinaryInstance::new(
            self.sources[0].clone(),
            self.sources[1].clone(),
            self.bank.clone(),
            self.a.clone(),
            self.b.clone(),
            alpha,
            lambda,
        )
        .map_err(|e| config_err(e.to_string()))
    }

    pub fn mary_instance(&self, alpha: f64, lambda: f64) -> Result<MaryInstance, Failure> {
        MaryInstance::new(
            self.sources.clone(),
            self.bank.clone(),
            self.a.clone(),
            self.b.clone(),
            alpha,
            lambda,
        )
        .map_err(|e| config_err(e.to_string()))
    }
}
