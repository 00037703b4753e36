//! Hodge and Dirac filters, and the adaptive loop that learns the spectral
//! centre `m` of the Dirac kernel `Q(m) = (D_n - m I)²`.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{DiracOperator, LaplacianPart, Order};
use crate::scalar::Real;
use crate::spectral::SpectralBasis;
use crate::spinor::{Block, TopologicalSpinor};

/// `ŝ = (I + τ ℒ)⁻¹ s̃`, solved block by block with a Cholesky factorization.
pub fn hodge_filter<T: Real>(
    noisy: &TopologicalSpinor<T>,
    op: &DiracOperator<T>,
    tau: T,
) -> Result<TopologicalSpinor<T>> {
    noisy.check_layout(op.layout())?;
    check_tau(tau)?;
    let layout = op.layout();
    let mut out = noisy.clone();
    if tau == T::zero() {
        return Ok(out);
    }
    for block in Block::ALL {
        let r = layout.range(block);
        if r.is_empty() {
            continue;
        }
        let l = op.hodge_laplacian(block.index(), LaplacianPart::Full)?;
        let a = DMatrix::identity(r.len(), r.len()) + l * tau;
        let rhs = noisy.block(block).clone_owned();
        let x = spd_solve(a, rhs)?;
        out.as_vector_mut().rows_mut(r.start, r.len()).copy_from(&x);
    }
    Ok(out)
}

/// Attenuation `1 / (1 + τ (λ - m)²)` of an eigenmode.
pub fn attenuation<T: Real>(lambda: T, tau: T, m: T) -> T {
    let d = lambda - m;
    T::one() / (T::one() + tau * d * d)
}

/// `ŝ_n = (I + τ (D_n - m I)²)⁻¹ s̃_n` in the eigenbasis of `D_n`.
///
/// The input is projected onto `im(D_n)` first; the result lies there too.
pub fn dirac_filter<T: Real>(
    noisy: &TopologicalSpinor<T>,
    basis: &SpectralBasis<T>,
    tau: T,
    m: T,
) -> Result<TopologicalSpinor<T>> {
    check_tau(tau)?;
    let c = basis.coefficients(noisy)?;
    Ok(dirac_filter_coeffs(basis, &c, tau, m))
}

/// Same filter as [`dirac_filter`], by a Cholesky solve on the support of
/// `D_n`. The input must already lie in `im(D_n)`; components in the kernel
/// would be scaled by `1 / (1 + τ m²)` instead of removed.
pub fn dirac_filter_factored<T: Real>(
    projected: &TopologicalSpinor<T>,
    op: &DiracOperator<T>,
    order: Order,
    tau: T,
    m: T,
) -> Result<TopologicalSpinor<T>> {
    projected.check_layout(op.layout())?;
    check_tau(tau)?;
    let support = op.support(order);
    let k = support.len();
    let d = op.part_block(order);
    // (D - mI)² = D² - 2mD + m²I
    let shifted = &d * &d - &d * (T::lit(2.0) * m) + DMatrix::identity(k, k) * (m * m);
    let a = DMatrix::identity(k, k) + shifted * tau;
    let rhs = projected.as_vector().rows(support.start, k).clone_owned();
    let x = spd_solve(a, rhs)?;
    let mut out = TopologicalSpinor::zeros(op.layout());
    out.as_vector_mut().rows_mut(support.start, k).copy_from(&x);
    Ok(out)
}

/// `m_n = sᵀ D_n s / sᵀ s`.
pub fn rayleigh_m<T: Real>(s: &TopologicalSpinor<T>, basis: &SpectralBasis<T>) -> Result<T> {
    basis.rayleigh(s)
}

/// `Δs = ‖ŝ - s‖₂`.
pub fn error<T: Real>(estimate: &TopologicalSpinor<T>, truth: &TopologicalSpinor<T>) -> Result<T> {
    if estimate.dim() != truth.dim() {
        return Err(Error::DimensionMismatch {
            expected: truth.dim(),
            found: estimate.dim(),
        });
    }
    Ok((estimate.as_vector() - truth.as_vector()).norm())
}

fn check_tau<T: Real>(tau: T) -> Result<()> {
    if tau >= T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!("tau must be >= 0, got {}", tau.as_f64())))
    }
}

fn spd_solve<T: Real>(a: DMatrix<T>, b: DVector<T>) -> Result<DVector<T>> {
    let chol = Cholesky::new(a)
        .ok_or_else(|| Error::SolverFailure("matrix is not positive definite".into()))?;
    Ok(chol.solve(&b))
}

/// Starting value of the learned `m`. Serialized as `"auto"` or a number.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "GuessRepr", try_from = "GuessRepr")]
pub enum InitialGuess {
    /// Rayleigh quotient of the projected observation.
    Auto,
    Value(f64),
}

impl std::str::FromStr for InitialGuess {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(InitialGuess::Auto);
        }
        s.parse::<f64>()
            .map(InitialGuess::Value)
            .map_err(|_| Error::Parse(format!("initial guess must be a number or `auto`, got {s:?}")))
    }
}

#[derive(Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum GuessRepr {
    Number(f64),
    Text(String),
}

impl From<InitialGuess> for GuessRepr {
    fn from(g: InitialGuess) -> Self {
        match g {
            InitialGuess::Auto => GuessRepr::Text("auto".into()),
            InitialGuess::Value(v) => GuessRepr::Number(v),
        }
    }
}

impl TryFrom<GuessRepr> for InitialGuess {
    type Error = Error;

    fn try_from(r: GuessRepr) -> Result<Self> {
        match r {
            GuessRepr::Number(v) => Ok(InitialGuess::Value(v)),
            GuessRepr::Text(s) => s.parse(),
        }
    }
}

impl std::fmt::Display for InitialGuess {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            InitialGuess::Auto => f.write_str("auto"),
            InitialGuess::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilterConfig {
    pub tau: f64,
    pub m0: InitialGuess,
    pub eta: f64,
    pub delta: f64,
    pub max_iters: usize,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            tau: 1.0,
            m0: InitialGuess::Auto,
            eta: 0.3,
            delta: 1e-4,
            max_iters: 500,
        }
    }
}

impl FilterConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.tau >= 0.0 && self.tau.is_finite()) {
            return bad(format!("tau must be finite and >= 0, got {}", self.tau));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return bad(format!("eta must lie in (0, 1], got {}", self.eta));
        }
        if !(self.delta > 0.0) {
            return bad(format!("delta must be > 0, got {}", self.delta));
        }
        if let InitialGuess::Value(v) = self.m0 {
            if !v.is_finite() {
                return bad(format!("initial guess must be finite, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub m_hat: f64,
    /// `‖ŝ(m̂) - s‖`, when the truth is known.
    pub delta_s: Option<f64>,
    /// `Δs(m̂) / Δs(0)`, when the truth is known.
    pub rel_error: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub rows: Vec<TraceRow>,
    pub converged: bool,
    pub iterations: usize,
}

impl RunTrace {
    pub fn final_m(&self) -> f64 {
        self.rows.last().map(|r| r.m_hat).unwrap_or(f64::NAN)
    }

    pub fn final_row(&self) -> Option<&TraceRow> {
        self.rows.last()
    }
}

#[derive(Clone, Debug)]
pub struct LearnOutcome<T: Real> {
    pub estimate: TopologicalSpinor<T>,
    pub m_hat: T,
    pub trace: RunTrace,
}

/// Adaptive Dirac filtering: alternate the filter at the current `m̂` with the
/// relaxed Rayleigh update `m̂ ← (1 - η) m̂ + η ŝᵀD_nŝ / ŝᵀŝ` until the update
/// moves `m̂` by less than `δ`.
///
/// The observation is projected onto `im(D_n)`. When `truth` is given, every
/// trace row also records `Δs` and its ratio to the `m = 0` (Hodge) error.
/// Hitting `max_iters` returns [`Error::NonConvergence`] carrying the trace.
pub fn learn<T: Real>(
    noisy: &TopologicalSpinor<T>,
    basis: &SpectralBasis<T>,
    config: &FilterConfig,
    truth: Option<&TopologicalSpinor<T>>,
) -> Result<LearnOutcome<T>> {
    config.validate()?;
    let tau = T::lit(config.tau);
    let eta = T::lit(config.eta);
    let lambdas = basis.eigenvalues();
    let c = basis.coefficients(noisy)?;
    let c_sq: Vec<T> = c.iter().map(|&x| x * x).collect();
    if c_sq.iter().all(|&x| x == T::zero()) {
        return Err(Error::ZeroSignal);
    }

    let rayleigh_at = |m: T| -> T {
        let (mut num, mut den) = (T::zero(), T::zero());
        for (&l, &cs) in lambdas.iter().zip(&c_sq) {
            let w = attenuation(l, tau, m);
            let e = w * w * cs;
            num += l * e;
            den += e;
        }
        num / den
    };

    let truth_parts = match truth {
        Some(s) => {
            let cs = basis.coefficients(s)?;
            let outside = (s.norm_squared() - cs.norm_squared()).max(T::zero());
            if let InitialGuess::Auto = config.m0 {
                let noise_sq = (&c - &cs).norm_squared() + outside;
                if noise_sq > T::zero() && s.norm_squared() < noise_sq {
                    log::warn!(
                        "signal to noise ratio {:.3} is below 1; the automatic initial guess may land in the wrong basin",
                        (s.norm_squared() / noise_sq).as_f64()
                    );
                }
            }
            Some((cs, outside))
        }
        None => None,
    };
    let error_at = |m: T| -> Option<T> {
        truth_parts.as_ref().map(|(cs, outside)| {
            let mut acc = *outside;
            for ((&l, &ci), &si) in lambdas.iter().zip(c.iter()).zip(cs.iter()) {
                let d = ci * attenuation(l, tau, m) - si;
                acc += d * d;
            }
            acc.sqrt()
        })
    };
    let baseline = error_at(T::zero());
    let row = |t: usize, m: T| {
        let err = error_at(m);
        TraceRow {
            t,
            m_hat: m.as_f64(),
            delta_s: err.map(|e| e.as_f64()),
            rel_error: err.zip(baseline).map(|(e, b)| (e / b).as_f64()),
        }
    };

    let mut m = match config.m0 {
        InitialGuess::Auto => {
            // Rayleigh quotient of the projected observation
            let num = lambdas
                .iter()
                .zip(&c_sq)
                .fold(T::zero(), |acc, (&l, &cs)| acc + l * cs);
            num / c_sq.iter().fold(T::zero(), |acc, &cs| acc + cs)
        }
        InitialGuess::Value(v) => T::lit(v),
    };
    let mut trace = RunTrace {
        rows: vec![row(0, m)],
        ..RunTrace::default()
    };
    for t in 1..=config.max_iters {
        let next = (T::one() - eta) * m + eta * rayleigh_at(m);
        let change = (next - m).abs();
        m = next;
        trace.rows.push(row(t, m));
        trace.iterations = t;
        if change.as_f64() < config.delta {
            trace.converged = true;
            break;
        }
    }
    if !trace.converged {
        return Err(Error::NonConvergence(Box::new(trace)));
    }
    let estimate = dirac_filter_coeffs(basis, &c, tau, m);
    Ok(LearnOutcome {
        estimate,
        m_hat: m,
        trace,
    })
}

fn dirac_filter_coeffs<T: Real>(
    basis: &SpectralBasis<T>,
    c: &DVector<T>,
    tau: T,
    m: T,
) -> TopologicalSpinor<T> {
    let w = DVector::from_iterator(
        c.len(),
        basis
            .eigenvalues()
            .iter()
            .zip(c.iter())
            .map(|(&l, &ci)| ci * attenuation(l, tau, m)),
    );
    basis.synthesize(&w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use crate::signals::{eigenmode_signal, Selector};

    fn square_with_diagonal() -> SimplicialComplex {
        // two triangles sharing the link (0, 2), one of them filled
        SimplicialComplex::new(4, &[[0, 1], [1, 2], [0, 2], [2, 3], [0, 3]], &[[0, 1, 2]]).unwrap()
    }

    fn setup(order: Order) -> (DiracOperator<f64>, SpectralBasis<f64>) {
        let op = DiracOperator::new(&square_with_diagonal());
        let b = SpectralBasis::new(&op, order).unwrap();
        (op, b)
    }

    fn spinor(op: &DiracOperator<f64>, seed: u64) -> TopologicalSpinor<f64> {
        let x = crate::signals::standard_normal(seed, 0, op.dim());
        TopologicalSpinor::from_vector(op.layout(), x).unwrap()
    }

    #[test]
    fn hodge_filter_with_zero_tau_is_identity() {
        let (op, _) = setup(Order::One);
        let s = spinor(&op, 1);
        assert_eq!(hodge_filter(&s, &op, 0.0).unwrap(), s);
        assert!(hodge_filter(&s, &op, -1.0).is_err());
    }

    #[test]
    fn hodge_filter_scales_laplacian_eigenvectors() {
        let (op, b) = setup(Order::One);
        // φ(λ) of D_1 restricted to nodes is an eigenvector of L0 with μ = λ²
        let phi = b.eigenvector(b.positive().start);
        let lambda = b.eigenvalue(b.positive().start);
        let mut node_part = TopologicalSpinor::zeros(op.layout());
        for i in op.layout().range(Block::Node) {
            node_part.as_vector_mut()[i] = phi.as_vector()[i];
        }
        let out = hodge_filter(&node_part, &op, 2.0).unwrap();
        let want = node_part.scale(1.0 / (1.0 + 2.0 * lambda * lambda));
        assert!((out.as_vector() - want.as_vector()).amax() < 1e-12);
    }

    #[test]
    fn hodge_filter_keeps_harmonic_signals() {
        let (op, _) = setup(Order::One);
        let ones = TopologicalSpinor::from_blocks(&[1.0; 4], &[0.0; 5], &[0.0]);
        let out = hodge_filter(&ones, &op, 5.0).unwrap();
        assert!((out.as_vector() - ones.as_vector()).amax() < 1e-12);
    }

    #[test]
    fn dirac_filter_passes_mode_at_centre() {
        let (_, b) = setup(Order::One);
        let i = b.positive().end - 1;
        let phi = b.eigenvector(i);
        let l = b.eigenvalue(i);
        let out = dirac_filter(&phi, &b, 10.0, l).unwrap();
        assert!((out.as_vector() - phi.as_vector()).amax() < 1e-12);
        let out0 = dirac_filter(&phi, &b, 1.0, 0.0).unwrap();
        let want = phi.scale(1.0 / (1.0 + l * l));
        assert!((out0.as_vector() - want.as_vector()).amax() < 1e-12);
    }

    #[test]
    fn factored_route_matches_spectral_route() {
        for order in Order::BOTH {
            let (op, b) = setup(order);
            let s = b.project(&spinor(&op, 9)).unwrap();
            for (tau, m) in [(0.5, -1.0), (3.0, 0.0), (10.0, 1.7)] {
                let a = dirac_filter(&s, &b, tau, m).unwrap();
                let f = dirac_filter_factored(&s, &op, order, tau, m).unwrap();
                assert!((a.as_vector() - f.as_vector()).amax() < 1e-10);
            }
        }
    }

    #[test]
    fn error_metric() {
        let a = TopologicalSpinor::from_blocks(&[1.0], &[0.0], &[]);
        let b = TopologicalSpinor::from_blocks(&[0.0], &[1.0], &[]);
        assert_eq!(error(&a, &a).unwrap(), 0.0);
        assert!((error(&a, &b).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = TopologicalSpinor::from_blocks(&[0.0], &[1.0, 2.0], &[]);
        assert!(matches!(error(&a, &c), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn config_validation() {
        let ok = FilterConfig::default();
        assert!(ok.validate().is_ok());
        for bad in [
            FilterConfig { eta: 0.0, ..ok },
            FilterConfig { eta: 1.5, ..ok },
            FilterConfig { delta: 0.0, ..ok },
            FilterConfig { tau: -1.0, ..ok },
            FilterConfig { m0: InitialGuess::Value(f64::NAN), ..ok },
        ] {
            assert!(matches!(bad.validate(), Err(Error::InvalidConfig(_))));
        }
        assert_eq!("auto".parse::<InitialGuess>().unwrap(), InitialGuess::Auto);
        assert_eq!("1.5".parse::<InitialGuess>().unwrap(), InitialGuess::Value(1.5));
        assert!("x".parse::<InitialGuess>().is_err());
        assert_eq!(serde_json::to_string(&InitialGuess::Auto).unwrap(), "\"auto\"");
        assert_eq!(serde_json::from_str::<InitialGuess>("2.5").unwrap(), InitialGuess::Value(2.5));
        assert_eq!(serde_json::from_str::<InitialGuess>("\"auto\"").unwrap(), InitialGuess::Auto);
    }

    #[test]
    fn noiseless_eigenmode_is_a_fixed_point() {
        let (_, b) = setup(Order::One);
        let i = b
            .positive()
            .find(|&i| eigenmode_signal(&b, Selector::Index(i)).is_ok())
            .unwrap();
        let phi = eigenmode_signal(&b, Selector::Index(i)).unwrap();
        let l = b.eigenvalue(i);
        let cfg = FilterConfig {
            tau: 5.0,
            m0: InitialGuess::Value(l),
            ..FilterConfig::default()
        };
        let out = learn(&phi, &b, &cfg, Some(&phi)).unwrap();
        assert!(out.trace.converged);
        assert_eq!(out.trace.iterations, 1);
        assert!(out.trace.final_row().unwrap().delta_s.unwrap() < 1e-12);
        assert!((out.m_hat - l).abs() < 1e-12);
    }

    #[test]
    fn large_threshold_stops_early() {
        let (op, b) = setup(Order::One);
        let s = spinor(&op, 3);
        let cfg = FilterConfig {
            delta: 10.0,
            ..FilterConfig::default()
        };
        let out = learn(&s, &b, &cfg, None).unwrap();
        assert!(out.trace.iterations <= 2);
        assert!(out.trace.rows.iter().all(|r| r.delta_s.is_none()));
    }

    #[test]
    fn iteration_cap_reports_partial_trace() {
        let (op, b) = setup(Order::One);
        let s = spinor(&op, 4);
        let cfg = FilterConfig {
            delta: 1e-300,
            max_iters: 3,
            m0: InitialGuess::Value(0.3),
            ..FilterConfig::default()
        };
        match learn(&s, &b, &cfg, None) {
            Err(Error::NonConvergence(trace)) => {
                assert_eq!(trace.rows.len(), 4);
                assert!(!trace.converged);
            }
            other => panic!("expected NonConvergence, got {other:?}"),
        }
    }

    #[test]
    fn zero_observation_is_rejected() {
        let (op, b) = setup(Order::One);
        let z = TopologicalSpinor::zeros(op.layout());
        assert!(matches!(
            learn(&z, &b, &FilterConfig::default(), None),
            Err(Error::ZeroSignal)
        ));
    }
}
