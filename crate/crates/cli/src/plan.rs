//! Experiment plans: what to run, on which data, over which parameter grid.

use std::path::{Path, PathBuf};

use dirac_core::{Error, InitialGuess, NgfParams, Order, Result, Selector, SignalSpec, VarianceConvention};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DatasetSource {
    Generated {
        nodes: usize,
        flavor: i32,
        beta: f64,
        /// Seed of the generator, independent of the noise seed.
        ngf_seed: u64,
    },
    File {
        complex: PathBuf,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        flow: Option<PathBuf>,
    },
}

impl DatasetSource {
    pub fn ngf(&self) -> Option<NgfParams> {
        match *self {
            DatasetSource::Generated {
                nodes,
                flavor,
                beta,
                ngf_seed,
            } => Some(NgfParams::new(nodes, flavor, beta, ngf_seed)),
            DatasetSource::File { .. } => None,
        }
    }
}

/// The true signal of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SignalPlan {
    Eigen {
        selector: Selector,
    },
    GaussianMix {
        lambda_bar: f64,
        sigma_hat: f64,
        #[serde(default)]
        convention: VarianceConvention,
    },
    /// The dataset's link flow, lifted to all blocks and projected onto
    /// `im(D_n)`.
    Flow,
}

impl SignalPlan {
    pub fn spec(&self) -> Option<SignalSpec> {
        match *self {
            SignalPlan::Eigen { selector } => Some(SignalSpec::Eigen { selector }),
            SignalPlan::GaussianMix {
                lambda_bar,
                sigma_hat,
                convention,
            } => Some(SignalSpec::GaussianMix {
                lambda_bar,
                sigma_hat,
                convention,
            }),
            SignalPlan::Flow => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnParams {
    pub m0: Vec<InitialGuess>,
    pub eta: f64,
    pub delta: f64,
    pub max_iters: usize,
}

impl Default for LearnParams {
    fn default() -> Self {
        LearnParams {
            m0: vec![InitialGuess::Auto],
            eta: 0.3,
            delta: 1e-4,
            max_iters: 500,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub dataset: DatasetSource,
    /// 1 for node/link signals, 2 for link/triangle signals.
    pub order: usize,
    pub signal: SignalPlan,
    /// Noise amplitudes `α_n`.
    pub alphas: Vec<f64>,
    pub taus: Vec<f64>,
    /// Fixed values of `m` for sweeps.
    #[serde(default)]
    pub ms: Vec<f64>,
    #[serde(default)]
    pub learn: LearnParams,
    /// Noise seed; run `r` of every cell uses draw `r` of this seed.
    pub seed: Option<u64>,
    /// Noise realizations per grid cell.
    pub runs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentPlan {
    pub fn order(&self) -> Result<Order> {
        Order::new(self.order)
    }

    pub fn seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::InvalidConfig("a seed is required (--seed or `seed` in the plan)".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.order()?;
        self.seed()?;
        if let Some(p) = self.dataset.ngf() {
            p.validate()?;
        }
        if self.runs == 0 {
            return invalid("runs must be at least 1");
        }
        if self.alphas.is_empty() || self.taus.is_empty() {
            return invalid("alphas and taus must not be empty");
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a >= 0.0 && a.is_finite())) {
            return invalid(&format!("alpha must be finite and >= 0, got {a}"));
        }
        if let Some(t) = self.taus.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return invalid(&format!("tau must be finite and >= 0, got {t}"));
        }
        if let Some(m) = self.ms.iter().find(|m| !m.is_finite()) {
            return invalid(&format!("m must be finite, got {m}"));
        }
        if self.learn.m0.is_empty() {
            return invalid("at least one initial guess m0 is required");
        }
        if matches!(self.signal, SignalPlan::Flow)
            && !matches!(self.dataset, DatasetSource::File { flow: Some(_), .. })
        {
            return invalid("signal mode `flow` needs a dataset file with a flow");
        }
        Ok(())
    }

    /// The JSON form written into output headers.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }
}

fn invalid<T>(msg: &str) -> Result<T> {
    Err(Error::InvalidConfig(msg.into()))
}

/// Reads a plan from a `.toml` or `.json` file.
pub fn load_plan<P: for<'de> Deserialize<'de>>(path: &Path) -> Result<P> {
    let text = std::fs::read_to_string(path)?;
    match path.extension().and_then(|e| e.to_str()) {
        Some("toml") => toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        Some("json") => serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display()))),
        _ => Err(Error::Parse(format!(
            "{}: plan files must end in .toml or .json",
            path.display()
        ))),
    }
}

/// Settings of the runtime benchmark.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchPlan {
    /// NGF node counts; a complex with `N` nodes has `N + L = 3N - 3`.
    pub nodes: Vec<usize>,
    pub flavor: i32,
    pub beta: f64,
    /// Timed runs per size, after one discarded warm-up run.
    pub runs: usize,
    /// Runs per group for the median of group means.
    pub group: usize,
    pub signal: SignalPlan,
    pub alpha: f64,
    pub tau: f64,
    pub learn: LearnParams,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl BenchPlan {
    pub fn validate(&self) -> Result<()> {
        if self.seed.is_none() {
            return invalid("a seed is required (--seed or `seed` in the plan)");
        }
        if self.nodes.is_empty() || self.runs == 0 || self.group == 0 {
            return invalid("bench needs at least one size, one run and a group size >= 1");
        }
        for &n in &self.nodes {
            NgfParams::new(n, self.flavor, self.beta, 0).validate()?;
        }
        if matches!(self.signal, SignalPlan::Flow) {
            return invalid("bench runs on generated complexes and cannot use a flow signal");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plan serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn plans_round_trip_through_toml_and_json() {
        for name in presets::names() {
            let mut plan = presets::plan(name).unwrap();
            plan.seed = Some(7);
            let text = toml::to_string(&plan).unwrap();
            let back: ExperimentPlan = toml::from_str(&text).unwrap();
            assert_eq!(back, plan, "{name}");
            let back: ExperimentPlan = serde_json::from_str(&plan.to_json()).unwrap();
            assert_eq!(back, plan, "{name}");
        }
    }

    #[test]
    fn toml_plan_by_hand() {
        let text = r#"
            order = 1
            alphas = [0.5]
            taus = [7.0]
            seed = 3
            runs = 4
            [dataset]
            kind = "generated"
            nodes = 30
            flavor = -1
            beta = 0.0
            ngf_seed = 1
            [signal]
            mode = "eigen"
            selector = "smallest-positive"
            [learn]
            m0 = ["auto", 1.5]
            eta = 0.3
            delta = 1e-4
            max_iters = 100
        "#;
        let plan: ExperimentPlan = toml::from_str(text).unwrap();
        plan.validate().unwrap();
        assert_eq!(plan.learn.m0, vec![InitialGuess::Auto, InitialGuess::Value(1.5)]);
    }

    #[test]
    fn validation() {
        let mut plan = presets::plan("ff-smallest").unwrap();
        assert_eq!(plan.validate().unwrap_err().class(), "InvalidConfig");
        plan.seed = Some(1);
        plan.validate().unwrap();
        let bad = ExperimentPlan { order: 3, ..plan.clone() };
        assert_eq!(bad.validate().unwrap_err().class(), "InvalidOrder");
        let bad = ExperimentPlan { signal: SignalPlan::Flow, ..plan.clone() };
        assert!(bad.validate().is_err());
        let bad = ExperimentPlan { alphas: vec![-0.1], ..plan };
        assert!(bad.validate().is_err());
    }
}
