//! Experiment execution.
//!
//! Work items are `(cell, run)` pairs evaluated on a bounded thread pool and
//! collected in item order, so the output never depends on scheduling. Run `r`
//! of every cell draws its noise from stream `r` of the plan seed; cells that
//! differ only in `τ`, `α` or `m0` therefore see the same underlying noise.

use std::time::Instant;

use dirac_core::io::load_complex;
use dirac_core::signals::{lift_signal, sample_noise, snr};
use dirac_core::{
    dirac_filter, learn, ngf_generate, signal_error, Basis, Error, FilterConfig, InitialGuess, NgfParams, NoiseModel,
    Operator, Order, Result, RunTrace, SimplicialComplex, Spinor,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::plan::{BenchPlan, DatasetSource, ExperimentPlan, SignalPlan};

/// Everything that stays fixed across the cells of a plan.
pub struct Prepared {
    pub complex: SimplicialComplex,
    pub op: Operator,
    pub basis: Basis,
    pub truth: Spinor,
    /// Rayleigh quotient of the true signal; the eigenvalue for eigenmodes.
    pub m_true: f64,
}

pub fn load_dataset(dataset: &DatasetSource) -> Result<SimplicialComplex> {
    match dataset {
        DatasetSource::Generated { .. } => ngf_generate(&dataset.ngf().expect("generated")),
        DatasetSource::File { complex, .. } => load_complex(complex),
    }
}

pub fn true_signal(
    signal: &SignalPlan,
    dataset: &DatasetSource,
    complex: &SimplicialComplex,
    op: &Operator,
    basis: &Basis,
) -> Result<Spinor> {
    match (signal.spec(), dataset) {
        (Some(spec), _) => spec.synthesize(basis),
        (None, DatasetSource::File { flow: Some(path), .. }) => {
            let sigma: Spinor = dirac_core::io::load_flow(path, complex)?;
            lift_signal(&sigma, op, basis)
        }
        (None, _) => Err(Error::InvalidConfig("signal mode `flow` needs a dataset flow file".into())),
    }
}

pub fn prepare(plan: &ExperimentPlan) -> Result<Prepared> {
    plan.validate()?;
    let complex = load_dataset(&plan.dataset)?;
    let op = Operator::new(&complex);
    let basis = Basis::new(&op, plan.order()?)?;
    let truth = true_signal(&plan.signal, &plan.dataset, &complex, &op, &basis)?;
    let m_true = basis.rayleigh(&truth)?;
    Ok(Prepared {
        complex,
        op,
        basis,
        truth,
        m_true,
    })
}

/// Noise and observation for run `run` at amplitude `alpha`.
pub fn observe(prep: &Prepared, alpha: f64, seed: u64, run: u64) -> Result<(Spinor, Spinor)> {
    let model = NoiseModel {
        alpha1: alpha,
        alpha2: alpha,
        seed,
    };
    let noise = sample_noise(&model, &prep.basis, run)?;
    let noisy = &prep.truth + &noise;
    Ok((noise, noisy))
}

/// Bounded worker pool; `threads = 0` uses every available core.
#[derive(Clone, Copy, Debug, Default)]
pub struct Runner {
    pub threads: usize,
}

impl Runner {
    pub fn map<I, R, F>(&self, items: Vec<I>, f: F) -> Result<Vec<R>>
    where
        I: Send + Sync,
        R: Send,
        F: Fn(&I) -> Result<R> + Send + Sync,
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
        pool.install(|| items.par_iter().map(&f).collect())
    }
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub tau: f64,
    pub alpha: f64,
    pub m: f64,
    pub mean_delta_s: f64,
    pub std_delta_s: f64,
    pub mean_rel_error: f64,
    pub std_rel_error: f64,
}

/// The sweep grid: the plan's `m` values plus the Hodge baseline `m = 0`.
pub fn sweep_grid(plan: &ExperimentPlan) -> Vec<f64> {
    let mut ms = plan.ms.clone();
    ms.push(0.0);
    ms.sort_by(f64::total_cmp);
    ms.dedup();
    ms
}

fn ratio(e: f64, base: f64) -> f64 {
    if base > 0.0 {
        e / base
    } else if e == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

/// Filtering error at fixed `m` for every `(τ, α)` cell and every `m` of
/// [`sweep_grid`].
pub fn sweep_m(plan: &ExperimentPlan, runner: Runner) -> Result<Vec<SweepRow>> {
    let prep = prepare(plan)?;
    let seed = plan.seed()?;
    let ms = sweep_grid(plan);
    let zero = ms.iter().position(|&m| m == 0.0).expect("grid holds 0");
    let cells: Vec<(f64, f64)> = plan
        .taus
        .iter()
        .flat_map(|&t| plan.alphas.iter().map(move |&a| (t, a)))
        .collect();
    let items: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..plan.runs as u64).map(move |r| (c, r)))
        .collect();
    let errors = runner.map(items, |&(c, r)| {
        let (tau, alpha) = cells[c];
        let (_, noisy) = observe(&prep, alpha, seed, r)?;
        ms.iter()
            .map(|&m| signal_error(&dirac_filter(&noisy, &prep.basis, tau, m)?, &prep.truth))
            .collect::<Result<Vec<f64>>>()
    })?;

    let mut rows = Vec::with_capacity(cells.len() * ms.len());
    for (c, &(tau, alpha)) in cells.iter().enumerate() {
        let runs = &errors[c * plan.runs..(c + 1) * plan.runs];
        for (k, &m) in ms.iter().enumerate() {
            let ds: Vec<f64> = runs.iter().map(|e| e[k]).collect();
            let rel: Vec<f64> = runs.iter().map(|e| ratio(e[k], e[zero])).collect();
            let (mean_delta_s, std_delta_s) = mean_std(&ds);
            let (mean_rel_error, std_rel_error) = mean_std(&rel);
            rows.push(SweepRow {
                tau,
                alpha,
                m,
                mean_delta_s,
                std_delta_s,
                mean_rel_error,
                std_rel_error,
            });
        }
    }
    Ok(rows)
}

/// One grid cell of a learning experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LearnCell {
    pub tau: f64,
    pub alpha: f64,
    pub m0: InitialGuess,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LearnRow {
    pub tau: f64,
    pub alpha: f64,
    pub m0: InitialGuess,
    pub run: u64,
    pub converged: bool,
    pub iterations: usize,
    pub m_true: f64,
    pub m_hat: f64,
    pub abs_m_error: f64,
    /// `Δs(m̂)`.
    pub delta_s: f64,
    /// `Δs(0)`, the Hodge filter at the same `τ`.
    pub hodge_delta_s: f64,
    pub rel_error: f64,
    /// `‖s̃ - s‖`.
    pub noisy_error: f64,
    /// `1 - Δs(m̂) / ‖s̃ - s‖`.
    pub reduction: f64,
    pub snr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceOutRow {
    pub tau: f64,
    pub alpha: f64,
    pub m0: InitialGuess,
    pub run: u64,
    pub t: usize,
    pub m_hat: f64,
    pub delta_s: Option<f64>,
    pub rel_error: Option<f64>,
}

pub struct LearnResult {
    pub cells: Vec<LearnCell>,
    pub rows: Vec<LearnRow>,
    pub traces: Vec<RunTrace>,
}

impl LearnResult {
    /// Rows of cell `c`, in run order.
    pub fn cell_rows(&self, c: usize) -> &[LearnRow] {
        let runs = self.rows.len() / self.cells.len().max(1);
        &self.rows[c * runs..(c + 1) * runs]
    }

    pub fn trace_rows(&self) -> Vec<TraceOutRow> {
        self.rows
            .iter()
            .zip(&self.traces)
            .flat_map(|(row, trace)| {
                trace.rows.iter().map(move |t| TraceOutRow {
                    tau: row.tau,
                    alpha: row.alpha,
                    m0: row.m0,
                    run: row.run,
                    t: t.t,
                    m_hat: t.m_hat,
                    delta_s: t.delta_s,
                    rel_error: t.rel_error,
                })
            })
            .collect()
    }
}

/// Runs the adaptive filter on every cell; non-converged runs are kept, with
/// the estimate taken at the last iterate.
pub fn learn_cells(plan: &ExperimentPlan, prep: &Prepared, cells: Vec<LearnCell>, runner: Runner) -> Result<LearnResult> {
    let seed = plan.seed()?;
    let items: Vec<(usize, u64)> = (0..cells.len())
        .flat_map(|c| (0..plan.runs as u64).map(move |r| (c, r)))
        .collect();
    let out = runner.map(items, |&(c, run)| {
        let cell = cells[c];
        let (noise, noisy) = observe(prep, cell.alpha, seed, run)?;
        let config = FilterConfig {
            tau: cell.tau,
            m0: cell.m0,
            eta: plan.learn.eta,
            delta: plan.learn.delta,
            max_iters: plan.learn.max_iters,
        };
        let (trace, m_hat, estimate) = match learn(&noisy, &prep.basis, &config, Some(&prep.truth)) {
            Ok(o) => (o.trace, o.m_hat, o.estimate),
            Err(Error::NonConvergence(trace)) => {
                let m = trace.final_m();
                let estimate = dirac_filter(&noisy, &prep.basis, cell.tau, m)?;
                (*trace, m, estimate)
            }
            Err(e) => return Err(e),
        };
        let delta_s = signal_error(&estimate, &prep.truth)?;
        let hodge = signal_error(&dirac_filter(&noisy, &prep.basis, cell.tau, 0.0)?, &prep.truth)?;
        let noisy_error = noise.norm();
        let row = LearnRow {
            tau: cell.tau,
            alpha: cell.alpha,
            m0: cell.m0,
            run,
            converged: trace.converged,
            iterations: trace.iterations,
            m_true: prep.m_true,
            m_hat,
            abs_m_error: (m_hat - prep.m_true).abs(),
            delta_s,
            hodge_delta_s: hodge,
            rel_error: ratio(delta_s, hodge),
            noisy_error,
            reduction: if noisy_error > 0.0 { 1.0 - delta_s / noisy_error } else { 0.0 },
            snr: match snr(&prep.truth, &noise) {
                Ok(v) => v,
                Err(Error::ZeroNoise) => f64::INFINITY,
                Err(e) => return Err(e),
            },
        };
        Ok((row, trace))
    })?;
    let (rows, traces) = out.into_iter().unzip();
    Ok(LearnResult { cells, rows, traces })
}

fn cells_tau_alpha_m0(plan: &ExperimentPlan) -> Vec<LearnCell> {
    let mut cells = Vec::new();
    for &tau in &plan.taus {
        for &alpha in &plan.alphas {
            for &m0 in &plan.learn.m0 {
                cells.push(LearnCell { tau, alpha, m0 });
            }
        }
    }
    cells
}

/// Learning traces and per-run summaries over `τ × α × m0`.
pub fn learn_plan(plan: &ExperimentPlan, runner: Runner) -> Result<LearnResult> {
    let prep = prepare(plan)?;
    learn_cells(plan, &prep, cells_tau_alpha_m0(plan), runner)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeatmapRow {
    pub tau: f64,
    pub alpha: f64,
    pub m0: InitialGuess,
    pub mean_delta_s: f64,
    pub std_delta_s: f64,
    pub mean_m_hat: f64,
    pub nonconverged: usize,
}

/// Mean learned error over the `τ × α` grid, for each initial guess.
pub fn heatmap(plan: &ExperimentPlan, runner: Runner) -> Result<Vec<HeatmapRow>> {
    let res = learn_plan(plan, runner)?;
    Ok((0..res.cells.len())
        .map(|c| {
            let rows = res.cell_rows(c);
            let ds: Vec<f64> = rows.iter().map(|r| r.delta_s).collect();
            let ms: Vec<f64> = rows.iter().map(|r| r.m_hat).collect();
            let (mean_delta_s, std_delta_s) = mean_std(&ds);
            let cell = res.cells[c];
            HeatmapRow {
                tau: cell.tau,
                alpha: cell.alpha,
                m0: cell.m0,
                mean_delta_s,
                std_delta_s,
                mean_m_hat: mean_std(&ms).0,
                nonconverged: rows.iter().filter(|r| !r.converged).count(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BasinRow {
    pub alpha: f64,
    pub tau: f64,
    pub m0: InitialGuess,
    pub m_true: f64,
    pub mean_abs_error: f64,
    pub std_abs_error: f64,
    pub nonconverged: usize,
}

/// `|m̂ - m_true|` against the initial guess, for every `(α, τ)`.
pub fn basin(plan: &ExperimentPlan, runner: Runner) -> Result<Vec<BasinRow>> {
    let prep = prepare(plan)?;
    let mut cells = Vec::new();
    for &alpha in &plan.alphas {
        for &tau in &plan.taus {
            for &m0 in &plan.learn.m0 {
                cells.push(LearnCell { tau, alpha, m0 });
            }
        }
    }
    let res = learn_cells(plan, &prep, cells, runner)?;
    Ok((0..res.cells.len())
        .map(|c| {
            let rows = res.cell_rows(c);
            let errs: Vec<f64> = rows.iter().map(|r| r.abs_m_error).collect();
            let (mean_abs_error, std_abs_error) = mean_std(&errs);
            let cell = res.cells[c];
            BasinRow {
                alpha: cell.alpha,
                tau: cell.tau,
                m0: cell.m0,
                m_true: prep.m_true,
                mean_abs_error,
                std_abs_error,
                nonconverged: rows.iter().filter(|r| !r.converged).count(),
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub nodes: usize,
    pub links: usize,
    pub triangles: usize,
    pub n_plus_l: usize,
    pub runs: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub median_of_means_s: f64,
    pub max_s: f64,
    pub nonconverged: usize,
}

/// Least-squares fit of `ln y = a + b ln x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PowerFit {
    pub exponent: f64,
    /// Standard error of the exponent; NaN with fewer than three points.
    pub stderr: f64,
    pub points: usize,
    pub low_confidence: bool,
}

pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidConfig("a power-law fit needs at least two points".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let stderr = if lx.len() > 2 {
        let ssr: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - a - b * x).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    Ok(PowerFit {
        exponent: b,
        stderr,
        points: lx.len(),
        low_confidence: lx.len() < 3,
    })
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Wall time of one complete unsupervised filtering: spectral basis, signal,
/// noise and the learning loop. Returns seconds and whether it converged.
pub fn timed_run(complex: &SimplicialComplex, plan: &BenchPlan, seed: u64, draw: u64) -> Result<(f64, bool)> {
    let spec = plan.signal.spec().expect("validated");
    let config = FilterConfig {
        tau: plan.tau,
        m0: plan.learn.m0.first().copied().unwrap_or(InitialGuess::Auto),
        eta: plan.learn.eta,
        delta: plan.learn.delta,
        max_iters: plan.learn.max_iters,
    };
    let start = Instant::now();
    let op = Operator::new(complex);
    let basis = Basis::new(&op, Order::One)?;
    let truth = spec.synthesize(&basis)?;
    let model = NoiseModel {
        alpha1: plan.alpha,
        alpha2: plan.alpha,
        seed,
    };
    let noisy = &truth + &sample_noise(&model, &basis, draw)?;
    let converged = match learn(&noisy, &basis, &config, None) {
        Ok(o) => {
            std::hint::black_box(o.estimate);
            true
        }
        Err(Error::NonConvergence(_)) => false,
        Err(e) => return Err(e),
    };
    Ok((start.elapsed().as_secs_f64(), converged))
}

/// Runtime against complex size; runs execute one at a time.
pub fn bench(plan: &BenchPlan) -> Result<(Vec<BenchRow>, PowerFit)> {
    plan.validate()?;
    let seed = plan.seed.expect("validated");
    let mut rows = Vec::new();
    for &n in &plan.nodes {
        let complex = ngf_generate(&NgfParams::new(n, plan.flavor, plan.beta, seed))?;
        timed_run(&complex, plan, seed, 0)?;
        let mut times = Vec::with_capacity(plan.runs);
        let mut nonconverged = 0;
        for r in 1..=plan.runs as u64 {
            let (t, ok) = timed_run(&complex, plan, seed, r)?;
            log::debug!("bench nodes={n} run={r} time={t:.4}s");
            times.push(t);
            nonconverged += usize::from(!ok);
        }
        let (mean_s, std_s) = mean_std(&times);
        let group_means: Vec<f64> = times.chunks(plan.group).map(|g| mean_std(g).0).collect();
        let links = complex.links().len();
        rows.push(BenchRow {
            nodes: n,
            links,
            triangles: complex.triangles().len(),
            n_plus_l: n + links,
            runs: plan.runs,
            mean_s,
            std_s,
            median_of_means_s: median(group_means),
            max_s: times.iter().copied().fold(0.0, f64::max),
            nonconverged,
        });
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.n_plus_l as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.median_of_means_s).collect();
    let fit = fit_power_law(&xs, &ys)?;
    Ok((rows, fit))
}
