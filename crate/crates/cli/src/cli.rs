//! Command-line interface.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dirac_core::io::{complex_to_json, write_spectrum};
use dirac_core::{Basis, Error, InitialGuess, NgfParams, Operator, Order, Result, Selector, VarianceConvention};
use serde_json::json;

use crate::output::{header, write_table};
use crate::plan::{load_plan, BenchPlan, DatasetSource, ExperimentPlan, LearnParams, SignalPlan};
use crate::presets;
use crate::run::{self, Runner};

#[derive(Debug, Parser)]
#[command(name = "dirac", version, about = "Adaptive Dirac filtering experiments on simplicial complexes")]
pub struct Cli {
    /// Log verbosity (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Grow an NGF complex and write it as JSON.
    Generate(GenerateArgs),
    /// Print counts, Betti numbers and spectral ranges of a complex.
    Info(InfoArgs),
    /// Write the true, noise and noisy signals of one draw.
    Synth(SynthArgs),
    /// Filtering error over a grid of fixed m.
    SweepM(PlanArgs),
    /// Learn m for every cell and run; per-run summary and traces.
    Learn(LearnArgs),
    /// Mean learned error over the (tau, alpha) grid.
    Heatmap(PlanArgs),
    /// Mean |m_hat - m_true| against the initial guess.
    Basin(PlanArgs),
    /// Runtime against complex size, with a power-law fit.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub nodes: usize,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub flavor: i32,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct InfoArgs {
    /// Complex file; otherwise an NGF complex from --nodes and --seed.
    #[arg(long)]
    pub complex: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub flavor: i32,
    #[arg(long, default_value_t = 0.0)]
    pub beta: f64,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Also write the spectra of D_1 and D_2 as CSV.
    #[arg(long)]
    pub spectrum: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Plan file (.toml or .json); flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Built-in plan; flags override its fields.
    #[arg(long, conflicts_with = "config")]
    pub preset: Option<String>,
    /// Directory holding the bundled datasets used by presets.
    #[arg(long, default_value = "data")]
    pub data_dir: PathBuf,

    #[arg(long)]
    pub complex: Option<PathBuf>,
    #[arg(long)]
    pub flow: Option<PathBuf>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub flavor: Option<i32>,
    #[arg(long)]
    pub beta: Option<f64>,
    /// Generator seed; defaults to --seed.
    #[arg(long)]
    pub ngf_seed: Option<u64>,

    #[arg(long)]
    pub order: Option<usize>,
    /// smallest-positive, largest-positive, smallest-negative,
    /// largest-negative, index:K, value:X, gaussian-mix or flow.
    #[arg(long)]
    pub signal: Option<String>,
    #[arg(long)]
    pub lambda_bar: Option<f64>,
    #[arg(long)]
    pub sigma_hat: Option<f64>,
    /// literal or squared.
    #[arg(long)]
    pub convention: Option<String>,

    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    pub tau: Vec<f64>,
    /// Fixed m values; `a:b:step` expands to a range.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m: Vec<String>,
    /// Initial guesses: numbers, `a:b:step` ranges or `auto`.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub m0: Vec<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,

    #[arg(long)]
    pub seed: Option<u64>,
    /// Noise realizations per grid cell.
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Noise draw index.
    #[arg(long, default_value_t = 0)]
    pub draw: u64,
}

#[derive(Debug, Args)]
pub struct LearnArgs {
    #[command(flatten)]
    pub plan: PlanArgs,
    /// Per-iteration traces.
    #[arg(long)]
    pub trace_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// NGF node counts.
    #[arg(long, value_delimiter = ',')]
    pub nodes: Vec<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub flavor: Option<i32>,
    #[arg(long)]
    pub runs: Option<usize>,
    #[arg(long)]
    pub group: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_range(text: &str) -> Result<Vec<f64>> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad number {s:?}")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [v] => Ok(vec![num(v)?]),
        [a, b, step] => {
            let (a, b, step) = (num(a)?, num(b)?, num(step)?);
            if !(step > 0.0) || b < a {
                return Err(Error::Parse(format!("bad range {text:?}; expected start:stop:step")));
            }
            Ok(presets::grid(a, b, step))
        }
        _ => Err(Error::Parse(format!("bad range {text:?}; expected start:stop:step"))),
    }
}

fn parse_signal(text: &str, lambda_bar: f64, sigma_hat: f64, convention: VarianceConvention) -> Result<SignalPlan> {
    let selector = match text {
        "smallest-positive" => Selector::SmallestPositive,
        "largest-positive" => Selector::LargestPositive,
        "smallest-negative" => Selector::SmallestNegative,
        "largest-negative" => Selector::LargestNegative,
        "gaussian-mix" => {
            return Ok(SignalPlan::GaussianMix {
                lambda_bar,
                sigma_hat,
                convention,
            })
        }
        "flow" => return Ok(SignalPlan::Flow),
        _ => match text.split_once(':') {
            Some(("index", k)) => Selector::Index(k.parse().map_err(|_| Error::Parse(format!("bad index {k:?}")))?),
            Some(("value", v)) => Selector::Value(v.parse().map_err(|_| Error::Parse(format!("bad value {v:?}")))?),
            _ => return Err(Error::Parse(format!("unknown signal {text:?}"))),
        },
    };
    Ok(SignalPlan::Eigen { selector })
}

fn parse_convention(text: &str) -> Result<VarianceConvention> {
    match text {
        "literal" => Ok(VarianceConvention::Literal),
        "squared" => Ok(VarianceConvention::Squared),
        _ => Err(Error::Parse(format!("convention must be literal or squared, got {text:?}"))),
    }
}

impl PlanArgs {
    /// The plan from the config file or preset, with flags applied on top.
    pub fn resolve(&self) -> Result<ExperimentPlan> {
        let mut plan = if let Some(path) = &self.config {
            Some(load_plan::<ExperimentPlan>(path)?)
        } else if let Some(name) = &self.preset {
            Some(presets::plan_in(name, &self.data_dir)?)
        } else {
            None
        };

        let dataset = if let Some(complex) = &self.complex {
            Some(DatasetSource::File {
                complex: complex.clone(),
                flow: self.flow.clone(),
            })
        } else {
            let ngf_flag = self.nodes.is_some() || self.flavor.is_some() || self.beta.is_some() || self.ngf_seed.is_some();
            let current = plan.as_ref().map(|p| p.dataset.clone());
            match current {
                Some(DatasetSource::Generated {
                    nodes,
                    flavor,
                    beta,
                    ngf_seed,
                }) => Some(DatasetSource::Generated {
                    nodes: self.nodes.unwrap_or(nodes),
                    flavor: self.flavor.unwrap_or(flavor),
                    beta: self.beta.unwrap_or(beta),
                    ngf_seed: self.ngf_seed.unwrap_or(ngf_seed),
                }),
                Some(DatasetSource::File { complex, flow }) if !ngf_flag => Some(DatasetSource::File {
                    complex,
                    flow: self.flow.clone().or(flow),
                }),
                _ if ngf_flag => Some(DatasetSource::Generated {
                    nodes: self.nodes.unwrap_or(50),
                    flavor: self.flavor.unwrap_or(0),
                    beta: self.beta.unwrap_or(0.0),
                    ngf_seed: self
                        .ngf_seed
                        .or(self.seed)
                        .ok_or_else(|| Error::InvalidConfig("--ngf-seed or --seed is required".into()))?,
                }),
                _ => None,
            }
        };

        let mut plan = match (plan.take(), dataset) {
            (Some(mut p), Some(d)) => {
                p.dataset = d;
                p
            }
            (Some(p), None) => p,
            (None, Some(d)) => ExperimentPlan {
                dataset: d,
                order: 1,
                signal: SignalPlan::Eigen {
                    selector: Selector::SmallestPositive,
                },
                alphas: vec![0.5],
                taus: vec![1.0],
                ms: presets::grid(0.0, 3.0, 0.05),
                learn: LearnParams::default(),
                seed: None,
                runs: 10,
                output: None,
            },
            (None, None) => {
                return Err(Error::InvalidConfig(
                    "no dataset: give --config, --preset, --complex or NGF parameters".into(),
                ))
            }
        };

        if let Some(o) = self.order {
            plan.order = o;
        }
        let convention = match (&self.convention, &plan.signal) {
            (Some(c), _) => parse_convention(c)?,
            (None, SignalPlan::GaussianMix { convention, .. }) => *convention,
            _ => VarianceConvention::default(),
        };
        let (lb, sh) = match plan.signal {
            SignalPlan::GaussianMix {
                lambda_bar, sigma_hat, ..
            } => (lambda_bar, sigma_hat),
            _ => (1.0, 0.2),
        };
        let (lb, sh) = (self.lambda_bar.unwrap_or(lb), self.sigma_hat.unwrap_or(sh));
        if let Some(s) = &self.signal {
            plan.signal = parse_signal(s, lb, sh, convention)?;
        } else if let SignalPlan::GaussianMix { .. } = plan.signal {
            plan.signal = SignalPlan::GaussianMix {
                lambda_bar: lb,
                sigma_hat: sh,
                convention,
            };
        }

        if !self.alpha.is_empty() {
            plan.alphas = self.alpha.clone();
        }
        if !self.tau.is_empty() {
            plan.taus = self.tau.clone();
        }
        if !self.m.is_empty() {
            plan.ms = self
                .m
                .iter()
                .map(|t| parse_range(t))
                .collect::<Result<Vec<_>>>()?
                .concat();
        }
        if !self.m0.is_empty() {
            let mut m0 = Vec::new();
            for t in &self.m0 {
                if t == "auto" {
                    m0.push(InitialGuess::Auto);
                } else {
                    m0.extend(parse_range(t)?.into_iter().map(InitialGuess::Value));
                }
            }
            plan.learn.m0 = m0;
        }
        if let Some(v) = self.eta {
            plan.learn.eta = v;
        }
        if let Some(v) = self.delta {
            plan.learn.delta = v;
        }
        if let Some(v) = self.max_iters {
            plan.learn.max_iters = v;
        }
        if self.seed.is_some() {
            plan.seed = self.seed;
        }
        if let Some(r) = self.runs {
            plan.runs = r;
        }
        if self.out.is_some() {
            plan.output = self.out.clone();
        }
        plan.validate()?;
        Ok(plan)
    }

    fn runner(&self) -> Runner {
        Runner { threads: self.threads }
    }
}

impl BenchArgs {
    pub fn resolve(&self) -> Result<BenchPlan> {
        let mut plan = match &self.config {
            Some(path) => load_plan::<BenchPlan>(path)?,
            None => presets::bench_plan(),
        };
        if !self.nodes.is_empty() {
            plan.nodes = self.nodes.clone();
        }
        if let Some(v) = self.flavor {
            plan.flavor = v;
        }
        if let Some(v) = self.runs {
            plan.runs = v;
        }
        if let Some(v) = self.group {
            plan.group = v;
        }
        if let Some(v) = self.tau {
            plan.tau = v;
        }
        if let Some(v) = self.alpha {
            plan.alpha = v;
        }
        if self.seed.is_some() {
            plan.seed = self.seed;
        }
        if self.out.is_some() {
            plan.output = self.out.clone();
        }
        plan.validate()?;
        Ok(plan)
    }
}

/// Opens `path`, or standard output when absent.
fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

pub fn execute(command: &Command) -> Result<()> {
    match command {
        Command::Generate(a) => generate(a),
        Command::Info(a) => info(a),
        Command::Synth(a) => synth(a),
        Command::SweepM(a) => {
            let plan = a.resolve()?;
            let rows = run::sweep_m(&plan, a.runner())?;
            let mut w = sink(plan.output.as_deref())?;
            write_table(&mut w, &header("sweep-m", &plan.to_json()), &rows)?;
            w.flush()?;
            Ok(())
        }
        Command::Learn(a) => {
            let plan = a.plan.resolve()?;
            let res = run::learn_plan(&plan, a.plan.runner())?;
            let comments = header("learn", &plan.to_json());
            if let Some(path) = &a.trace_out {
                let mut w = sink(Some(path))?;
                write_table(&mut w, &comments, &res.trace_rows())?;
                w.flush()?;
            }
            let mut w = sink(plan.output.as_deref())?;
            write_table(&mut w, &comments, &res.rows)?;
            w.flush()?;
            let failed = res.rows.iter().filter(|r| !r.converged).count();
            if failed > 0 {
                log::warn!("{failed} of {} runs hit max_iters without converging", res.rows.len());
            }
            Ok(())
        }
        Command::Heatmap(a) => {
            let plan = a.resolve()?;
            let rows = run::heatmap(&plan, a.runner())?;
            let mut w = sink(plan.output.as_deref())?;
            write_table(&mut w, &header("heatmap", &plan.to_json()), &rows)?;
            w.flush()?;
            Ok(())
        }
        Command::Basin(a) => {
            let plan = a.resolve()?;
            let rows = run::basin(&plan, a.runner())?;
            let mut w = sink(plan.output.as_deref())?;
            write_table(&mut w, &header("basin", &plan.to_json()), &rows)?;
            w.flush()?;
            Ok(())
        }
        Command::Bench(a) => {
            let plan = a.resolve()?;
            let (rows, fit) = run::bench(&plan)?;
            let mut comments = header("bench", &plan.to_json());
            let mut w = sink(plan.output.as_deref())?;
            let summary = format!(
                "fit exponent={} stderr={} points={} low_confidence={}",
                fit.exponent, fit.stderr, fit.points, fit.low_confidence
            );
            write_table(&mut w, &comments, &rows)?;
            comments.clear();
            comments.push(summary.clone());
            dirac_core::io::write_comments(&mut w, &comments)?;
            w.flush()?;
            if plan.output.is_some() {
                println!("{summary}");
            }
            Ok(())
        }
    }
}

fn generate(a: &GenerateArgs) -> Result<()> {
    let params = NgfParams::new(a.nodes, a.flavor, a.beta, a.seed);
    let k = dirac_core::ngf_generate(&params)?;
    let meta = json!({
        "generator": "ngf",
        "nodes": a.nodes,
        "flavor": a.flavor,
        "beta": a.beta,
        "seed": a.seed,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let mut w = sink(a.out.as_deref())?;
    writeln!(w, "{}", complex_to_json(&k, meta))?;
    w.flush()?;
    Ok(())
}

fn info(a: &InfoArgs) -> Result<()> {
    let k = match (&a.complex, a.nodes) {
        (Some(path), _) => dirac_core::io::load_complex(path)?,
        (None, Some(n)) => {
            let seed = a
                .seed
                .ok_or_else(|| Error::InvalidConfig("--seed is required to generate a complex".into()))?;
            dirac_core::ngf_generate(&NgfParams::new(n, a.flavor, a.beta, seed))?
        }
        (None, None) => return Err(Error::InvalidConfig("give --complex or --nodes".into())),
    };
    let op = Operator::new(&k);
    let b1 = Basis::new(&op, Order::One)?;
    let b2 = Basis::new(&op, Order::Two)?;
    let range = |b: &Basis| {
        let p = b.positive();
        if p.is_empty() {
            serde_json::Value::Null
        } else {
            json!([b.eigenvalue(p.start), b.eigenvalue(p.end - 1)])
        }
    };
    let betti = k.betti_numbers();
    let summary = json!({
        "nodes": k.node_count(),
        "links": k.links().len(),
        "triangles": k.triangles().len(),
        "euler_characteristic": k.euler_characteristic(),
        "betti": betti,
        "kernel_dim": op.dim() - b1.nonharmonic_dim() - b2.nonharmonic_dim(),
        "d1_positive_range": range(&b1),
        "d2_positive_range": range(&b2),
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(path) = &a.spectrum {
        let mut w = sink(Some(path))?;
        let comments = header("info", &summary.to_string());
        write_spectrum(&mut w, &[&b1, &b2], &comments)?;
        w.flush()?;
    }
    Ok(())
}

#[derive(serde::Serialize)]
struct SynthRow {
    block: &'static str,
    index: usize,
    truth: f64,
    noise: f64,
    noisy: f64,
}

fn synth(a: &SynthArgs) -> Result<()> {
    let plan = a.plan.resolve()?;
    let prep = run::prepare(&plan)?;
    let alpha = plan.alphas[0];
    let (noise, noisy) = run::observe(&prep, alpha, plan.seed()?, a.draw)?;
    let mut rows = Vec::with_capacity(noisy.dim());
    for block in dirac_core::Block::ALL {
        for index in 0..prep.complex.layout().len(block) {
            rows.push(SynthRow {
                block: block.name(),
                index,
                truth: prep.truth.get(block, index),
                noise: noise.get(block, index),
                noisy: noisy.get(block, index),
            });
        }
    }
    let mut comments = header("synth", &plan.to_json());
    let snr = dirac_core::snr(&prep.truth, &noise).unwrap_or(f64::INFINITY);
    comments.push(format!("draw={} alpha={alpha} m_true={} snr={snr}", a.draw, prep.m_true));
    let mut w = sink(plan.output.as_deref())?;
    write_table(&mut w, &comments, &rows)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Cli {
        Cli::try_parse_from(std::iter::once("dirac").chain(args.iter().copied())).unwrap()
    }

    fn plan_of(args: &[&str]) -> Result<ExperimentPlan> {
        match parse(args).command {
            Command::SweepM(p) | Command::Heatmap(p) | Command::Basin(p) => p.resolve(),
            Command::Learn(l) => l.plan.resolve(),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("0:1:0.5").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(parse_range("-2").unwrap(), vec![-2.0]);
        assert!(parse_range("1:0:0.5").is_err());
        assert!(parse_range("x").is_err());
    }

    #[test]
    fn flags_build_a_plan() {
        let p = plan_of(&[
            "learn", "--nodes", "30", "--flavor", "-1", "--seed", "5", "--signal", "gaussian-mix", "--sigma-hat", "0.3",
            "--alpha", "0.5,0.7", "--tau", "2", "--m0", "auto,1:2:0.5", "--runs", "3",
        ])
        .unwrap();
        assert_eq!(
            p.dataset,
            DatasetSource::Generated {
                nodes: 30,
                flavor: -1,
                beta: 0.0,
                ngf_seed: 5
            }
        );
        assert_eq!(p.alphas, vec![0.5, 0.7]);
        assert_eq!(p.learn.m0.len(), 4);
        assert!(matches!(p.signal, SignalPlan::GaussianMix { sigma_hat, lambda_bar, .. } if sigma_hat == 0.3 && lambda_bar == 1.0));
    }

    #[test]
    fn presets_take_overrides() {
        let p = plan_of(&["heatmap", "--preset", "ngf-heatmap-1-smallest", "--seed", "1", "--flavor", "-1", "--runs", "2"])
            .unwrap();
        assert!(matches!(p.dataset, DatasetSource::Generated { flavor: -1, nodes: 50, .. }));
        assert_eq!(p.runs, 2);
    }

    #[test]
    fn missing_pieces_are_reported() {
        let e = plan_of(&["heatmap", "--preset", "ngf-basin"]).unwrap_err();
        assert_eq!(e.class(), "InvalidConfig");
        let e = plan_of(&["sweep-m", "--seed", "1"]).unwrap_err();
        assert_eq!(e.class(), "InvalidConfig");
        let e = plan_of(&["sweep-m", "--preset", "ff-smallest", "--seed", "1", "--signal", "bogus"]).unwrap_err();
        assert_eq!(e.class(), "ParseError");
    }

    #[test]
    fn stochastic_commands_need_a_seed() {
        assert!(Cli::try_parse_from(["dirac", "generate", "--nodes", "10"]).is_err());
        let b = match parse(&["bench", "--nodes", "10,20"]).command {
            Command::Bench(b) => b,
            _ => unreachable!(),
        };
        assert_eq!(b.resolve().unwrap_err().class(), "InvalidConfig");
    }
}
