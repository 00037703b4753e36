//! Built-in plans. None of them carries a seed; the caller supplies one.

use std::path::Path;

use dirac_core::{Error, InitialGuess, Result, Selector, VarianceConvention};

use crate::plan::{BenchPlan, DatasetSource, ExperimentPlan, LearnParams, SignalPlan};

const NAMES: &[&str] = &[
    "ff-sweep-smallest",
    "ff-sweep-largest",
    "ff-sweep-mixture",
    "ff-smallest",
    "ff-largest",
    "ff-mixture",
    "drifter-sweep-1",
    "drifter-sweep-2",
    "drifter-learn-1",
    "drifter-learn-2",
    "ngf-heatmap-1-smallest",
    "ngf-heatmap-1-largest",
    "ngf-heatmap-1-mixture",
    "ngf-heatmap-2-smallest",
    "ngf-heatmap-2-largest",
    "ngf-heatmap-2-mixture",
    "ngf-manifold-heatmap-1-smallest",
    "ngf-manifold-heatmap-1-largest",
    "ngf-manifold-heatmap-1-mixture",
    "ngf-manifold-heatmap-2-smallest",
    "ngf-manifold-heatmap-2-largest",
    "ngf-manifold-heatmap-2-mixture",
    "ngf-basin",
    "ngf-manifold-basin",
];

pub fn names() -> &'static [&'static str] {
    NAMES
}

/// `start, start + step, ...` up to `stop` inclusive, rounded to 1e-9.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
        .collect()
}

fn mixture() -> SignalPlan {
    SignalPlan::GaussianMix {
        lambda_bar: 1.0,
        sigma_hat: 0.2,
        convention: VarianceConvention::Literal,
    }
}

fn eigen(selector: Selector) -> SignalPlan {
    SignalPlan::Eigen { selector }
}

fn learn_from(m0: &[f64]) -> LearnParams {
    LearnParams {
        m0: m0.iter().map(|&v| InitialGuess::Value(v)).collect(),
        ..LearnParams::default()
    }
}

pub fn plan(name: &str) -> Result<ExperimentPlan> {
    plan_in(name, Path::new("data"))
}

/// The preset `name`, with bundled datasets looked up in `data_dir`.
pub fn plan_in(name: &str, data_dir: &Path) -> Result<ExperimentPlan> {
    let florentine = DatasetSource::File {
        complex: data_dir.join("florentine_marriage.json"),
        flow: None,
    };
    let drifter = DatasetSource::File {
        complex: data_dir.join("drifter_style.json"),
        flow: Some(data_dir.join("drifter_style_flow.csv")),
    };
    let ngf = |flavor| DatasetSource::Generated {
        nodes: 50,
        flavor,
        beta: 0.0,
        ngf_seed: 1,
    };
    let base = |dataset, order, signal, alphas: &[f64], taus: &[f64], runs| ExperimentPlan {
        dataset,
        order,
        signal,
        alphas: alphas.to_vec(),
        taus: taus.to_vec(),
        ms: Vec::new(),
        learn: LearnParams::default(),
        seed: None,
        runs,
        output: None,
    };

    let plan = match name {
        "ff-sweep-smallest" | "ff-sweep-largest" | "ff-sweep-mixture" => {
            let signal = match name {
                "ff-sweep-smallest" => eigen(Selector::SmallestPositive),
                "ff-sweep-largest" => eigen(Selector::LargestPositive),
                _ => mixture(),
            };
            ExperimentPlan {
                ms: grid(0.0, 3.0, 0.02),
                ..base(florentine, 1, signal, &[0.6], &[10.0], 500)
            }
        }
        "ff-smallest" => ExperimentPlan {
            learn: learn_from(&[1.5]),
            ..base(florentine, 1, eigen(Selector::SmallestPositive), &[0.5], &[7.0], 50)
        },
        "ff-largest" => ExperimentPlan {
            learn: learn_from(&[3.0]),
            ..base(florentine, 1, eigen(Selector::LargestPositive), &[0.5], &[7.0], 50)
        },
        "ff-mixture" => ExperimentPlan {
            learn: learn_from(&[3.0]),
            ..base(florentine, 1, mixture(), &[0.5], &[2.0], 50)
        },
        "drifter-sweep-1" | "drifter-sweep-2" => {
            let (order, tau) = if name.ends_with('1') { (1, 1.0) } else { (2, 1.5) };
            ExperimentPlan {
                ms: grid(0.0, 4.0, 0.05),
                ..base(drifter, order, SignalPlan::Flow, &[0.6], &[tau], 10)
            }
        }
        "drifter-learn-1" | "drifter-learn-2" => {
            let (order, tau) = if name.ends_with('1') { (1, 1.0) } else { (2, 1.5) };
            base(drifter, order, SignalPlan::Flow, &[0.6], &[tau], 10)
        }
        "ngf-basin" | "ngf-manifold-basin" => {
            let flavor = if name.contains("manifold") { -1 } else { 0 };
            ExperimentPlan {
                learn: LearnParams {
                    m0: grid(0.0, 4.0, 0.25).into_iter().map(InitialGuess::Value).collect(),
                    ..LearnParams::default()
                },
                ..base(ngf(flavor), 1, eigen(Selector::SmallestPositive), &[0.6, 1.5], &[2.0, 7.0], 20)
            }
        }
        _ => {
            let rest = name
                .strip_prefix("ngf-heatmap-")
                .map(|r| (0, r))
                .or_else(|| name.strip_prefix("ngf-manifold-heatmap-").map(|r| (-1, r)));
            let Some((flavor, rest)) = rest else {
                return Err(unknown(name));
            };
            let (order, kind) = match rest.split_once('-') {
                Some(("1", k)) => (1, k),
                Some(("2", k)) => (2, k),
                _ => return Err(unknown(name)),
            };
            let (signal, m0) = match kind {
                "smallest" => (eigen(Selector::SmallestPositive), 1.0),
                "largest" => (eigen(Selector::LargestPositive), 3.0),
                "mixture" => (mixture(), 2.0),
                _ => return Err(unknown(name)),
            };
            ExperimentPlan {
                learn: learn_from(&[m0]),
                ..base(
                    ngf(flavor),
                    order,
                    signal,
                    &grid(0.0, 1.0, 0.1),
                    &[0.0, 1.0, 2.0, 5.0, 10.0],
                    10,
                )
            }
        }
    };
    Ok(plan)
}

fn unknown(name: &str) -> Error {
    Error::InvalidConfig(format!(
        "unknown preset {name:?}; available: {}",
        NAMES.join(", ")
    ))
}

/// Sizes with `N + L` close to 200, 400, 800, 1600 and 3200.
pub fn bench_plan() -> BenchPlan {
    BenchPlan {
        nodes: vec![68, 134, 268, 534, 1068],
        flavor: 0,
        beta: 0.0,
        runs: 20,
        group: 5,
        signal: mixture(),
        alpha: 0.5,
        tau: 1.0,
        learn: LearnParams::default(),
        seed: None,
        output: None,
    }
}
