//! Synthetic true signals and calibrated subspace noise.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::DiracOperator;
use crate::scalar::Real;
use crate::spectral::SpectralBasis;
use crate::spinor::TopologicalSpinor;

/// Which eigenmode of `D_n` to use as a true signal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Selector {
    SmallestPositive,
    LargestPositive,
    SmallestNegative,
    LargestNegative,
    /// Position in the ascending list of nonzero eigenvalues.
    Index(usize),
    /// The eigenvalue closest to the given value, which must match it.
    Value(f64),
}

/// How `σ̂` enters the Gaussian weights.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VarianceConvention {
    /// `exp(-(λ - λ̄)² / (2σ̂))`.
    #[default]
    Literal,
    /// `exp(-(λ - λ̄)² / (2σ̂²))`.
    Squared,
}

/// Eigenvalues closer than this (relative to `max(1, |λ|)`) count as one.
pub fn degeneracy_tol<T: Real>() -> T {
    T::default_epsilon().sqrt()
}

/// Index of the eigenpair picked by `selector`.
pub fn select<T: Real>(basis: &SpectralBasis<T>, selector: Selector) -> Result<usize> {
    let n = basis.nonharmonic_dim();
    if n == 0 {
        return Err(Error::EmptySpectrum);
    }
    let pos = basis.positive();
    let neg = basis.negative();
    let i = match selector {
        Selector::SmallestPositive => pos.start,
        Selector::LargestPositive => pos.end - 1,
        Selector::SmallestNegative => neg.start,
        Selector::LargestNegative => neg.end - 1,
        Selector::Index(i) if i < n => i,
        Selector::Index(i) => {
            return Err(Error::NoSuchEigenvalue(format!(
                "index {i} out of {n} nonzero eigenvalues"
            )))
        }
        Selector::Value(target) => {
            let target = T::lit(target);
            let (i, dist) = basis
                .eigenvalues()
                .iter()
                .map(|&l| (l - target).abs())
                .enumerate()
                .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite"))
                .expect("nonempty");
            let scale = T::one().max(target.abs());
            if dist > T::lit(1e-6) * scale {
                return Err(Error::NoSuchEigenvalue(format!(
                    "nearest eigenvalue to {} is {}",
                    target.as_f64(),
                    basis.eigenvalue(i).as_f64()
                )));
            }
            i
        }
    };
    let l = basis.eigenvalue(i);
    let tol = degeneracy_tol::<T>() * T::one().max(l.abs());
    let neighbours = [i.checked_sub(1), Some(i + 1)];
    for j in neighbours.into_iter().flatten().filter(|&j| j < n) {
        if (basis.eigenvalue(j) - l).abs() <= tol {
            return Err(Error::DegenerateSelection(l.as_f64()));
        }
    }
    Ok(i)
}

/// A pure unit-norm eigenmode `φ_n(λ)` of a non-degenerate eigenvalue.
pub fn eigenmode_signal<T: Real>(
    basis: &SpectralBasis<T>,
    selector: Selector,
) -> Result<TopologicalSpinor<T>> {
    let i = select(basis, selector)?;
    Ok(basis.eigenvector(i))
}

/// `Σ_{λ≠0} c_λ φ(λ)` with Gaussian weights centred at `λ̄`, scaled to unit norm.
pub fn gaussian_mix_signal<T: Real>(
    basis: &SpectralBasis<T>,
    lambda_bar: T,
    sigma_hat: T,
    convention: VarianceConvention,
) -> Result<TopologicalSpinor<T>> {
    if basis.nonharmonic_dim() == 0 {
        return Err(Error::EmptySpectrum);
    }
    if !(sigma_hat > T::zero()) {
        return Err(Error::InvalidConfig("sigma_hat must be positive".into()));
    }
    let two = T::lit(2.0);
    let denom = match convention {
        VarianceConvention::Literal => two * sigma_hat,
        VarianceConvention::Squared => two * sigma_hat * sigma_hat,
    };
    let exponents: Vec<T> = basis
        .eigenvalues()
        .iter()
        .map(|&l| -(l - lambda_bar) * (l - lambda_bar) / denom)
        .collect();
    // Shift by the largest exponent so narrow widths do not underflow to zero.
    let top = exponents
        .iter()
        .copied()
        .fold(T::min_value().expect("bounded"), |a, b| a.max(b));
    let weights = DVector::from_iterator(
        exponents.len(),
        exponents.into_iter().map(|e| (e - top).exp()),
    );
    let s = basis.synthesize(&weights);
    let norm = s.norm();
    Ok(s.scale(T::one() / norm))
}

/// `c_n (σ + D_n σ)` projected onto `im(D_n)`, with `c_n` giving unit norm.
pub fn lift_signal<T: Real>(
    sigma: &TopologicalSpinor<T>,
    op: &DiracOperator<T>,
    basis: &SpectralBasis<T>,
) -> Result<TopologicalSpinor<T>> {
    let input_norm = sigma.norm();
    if input_norm == T::zero() {
        return Err(Error::ZeroSignal);
    }
    let raised = sigma + &op.apply_part(basis.order(), sigma)?;
    let projected = basis.project(&raised)?;
    let norm = projected.norm();
    if norm <= T::rank_cutoff().sqrt() * input_norm {
        return Err(Error::ZeroAfterProjection);
    }
    Ok(projected.scale(T::one() / norm))
}

/// Noise amplitudes per subspace and the seed of the noise stream.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub alpha1: f64,
    pub alpha2: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn alpha(&self, order: crate::operators::Order) -> f64 {
        match order {
            crate::operators::Order::One => self.alpha1,
            crate::operators::Order::Two => self.alpha2,
        }
    }
}

/// Standard normal vector `x ∈ R^len` for draw `draw_index`.
///
/// The stream is ChaCha20 keyed by `seed` with `draw_index` as the stream id,
/// so each `(seed, draw_index)` pair maps to the same vector on every platform
/// and draws can be generated in any order.
pub fn standard_normal(seed: u64, draw_index: u64, len: usize) -> DVector<f64> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(draw_index);
    DVector::from_iterator(len, (0..len).map(|_| rng.sample::<f64, _>(StandardNormal)))
}

/// `ε_n = α_n D_n D_n† x / √D_n`, with `x` standard normal on the whole
/// spinor space.
pub fn sample_noise<T: Real>(
    model: &NoiseModel,
    basis: &SpectralBasis<T>,
    draw_index: u64,
) -> Result<TopologicalSpinor<T>> {
    let dim_image = basis.nonharmonic_dim();
    if dim_image == 0 {
        return Err(Error::EmptyImage(basis.order().get()));
    }
    let layout = basis.layout();
    let x = standard_normal(model.seed, draw_index, layout.dim()).map(T::lit);
    let x = TopologicalSpinor::from_vector(layout, x)?;
    let scale = T::lit(model.alpha(basis.order())) / T::from_usize(dim_image).unwrap().sqrt();
    Ok(basis.project(&x)?.scale(scale))
}

/// `‖s‖² / ‖ε‖²`.
pub fn snr<T: Real>(s: &TopologicalSpinor<T>, eps: &TopologicalSpinor<T>) -> Result<T> {
    let e = eps.norm_squared();
    if e == T::zero() {
        return Err(Error::ZeroNoise);
    }
    Ok(s.norm_squared() / e)
}

/// Recipe for a unit-norm true signal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum SignalSpec {
    Eigen {
        selector: Selector,
    },
    GaussianMix {
        lambda_bar: f64,
        sigma_hat: f64,
        #[serde(default)]
        convention: VarianceConvention,
    },
}

impl SignalSpec {
    pub fn synthesize<T: Real>(&self, basis: &SpectralBasis<T>) -> Result<TopologicalSpinor<T>> {
        match *self {
            SignalSpec::Eigen { selector } => eigenmode_signal(basis, selector),
            SignalSpec::GaussianMix {
                lambda_bar,
                sigma_hat,
                convention,
            } => gaussian_mix_signal(basis, T::lit(lambda_bar), T::lit(sigma_hat), convention),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use crate::operators::Order;

    fn edge_basis() -> (DiracOperator<f64>, SpectralBasis<f64>) {
        let k = SimplicialComplex::new(2, &[[0, 1]], &[]).unwrap();
        let op = DiracOperator::new(&k);
        let b = SpectralBasis::new(&op, Order::One).unwrap();
        (op, b)
    }

    fn triangle_basis(order: Order) -> (DiracOperator<f64>, SpectralBasis<f64>) {
        let k = SimplicialComplex::new(3, &[[0, 1], [0, 2], [1, 2]], &[[0, 1, 2]]).unwrap();
        let op = DiracOperator::new(&k);
        let b = SpectralBasis::new(&op, order).unwrap();
        (op, b)
    }

    #[test]
    fn negative_mode_is_chiral_image() {
        let (_, b) = edge_basis();
        let plus = eigenmode_signal(&b, Selector::Value(2f64.sqrt())).unwrap();
        let minus = eigenmode_signal(&b, Selector::Value(-(2f64.sqrt()))).unwrap();
        let g = b.chirality(&plus);
        let d = (g.as_vector() - minus.as_vector()).amax().min((g.as_vector() + minus.as_vector()).amax());
        assert!(d < 1e-12);
    }

    #[test]
    fn degenerate_and_missing_selections() {
        // L0 of the filled triangle is {0, 3, 3}: ±√3 both doubly degenerate.
        let (_, b) = triangle_basis(Order::One);
        assert!(matches!(
            eigenmode_signal(&b, Selector::SmallestPositive),
            Err(Error::DegenerateSelection(_))
        ));
        assert!(matches!(
            eigenmode_signal(&b, Selector::Value(1.0)),
            Err(Error::NoSuchEigenvalue(_))
        ));
        assert!(matches!(
            eigenmode_signal(&b, Selector::Index(17)),
            Err(Error::NoSuchEigenvalue(_))
        ));
    }

    #[test]
    fn mixture_with_tiny_width_is_a_single_mode() {
        let (_, b) = edge_basis();
        let s = gaussian_mix_signal(&b, 2f64.sqrt(), 1e-4, VarianceConvention::Literal).unwrap();
        let phi = b.eigenvector(1);
        assert!((s.as_vector() - phi.as_vector()).amax() < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixture_needs_spectrum_and_width() {
        let k = SimplicialComplex::new(2, &[], &[]).unwrap();
        let op = DiracOperator::<f64>::new(&k);
        let b = SpectralBasis::new(&op, Order::One).unwrap();
        assert!(matches!(
            gaussian_mix_signal(&b, 1.0, 0.2, VarianceConvention::Literal),
            Err(Error::EmptySpectrum)
        ));
        let (_, b) = edge_basis();
        assert!(gaussian_mix_signal(&b, 1.0, 0.0, VarianceConvention::Literal).is_err());
    }

    #[test]
    fn lifted_link_signal_spreads_to_adjacent_blocks() {
        let (op, b1) = triangle_basis(Order::One);
        let b2 = SpectralBasis::new(&op, Order::Two).unwrap();
        let sigma = TopologicalSpinor::from_blocks(&[0.0; 3], &[1.0, 0.0, 0.0], &[0.0]);
        let s1 = lift_signal(&sigma, &op, &b1).unwrap();
        assert!(s1.s0().norm() > 1e-3 && s1.s1().norm() > 1e-3 && s1.s2().norm() == 0.0);
        let s2 = lift_signal(&sigma, &op, &b2).unwrap();
        assert!(s2.s0().norm() == 0.0 && s2.s1().norm() > 1e-3 && s2.s2().norm() > 1e-3);
        assert!((s1.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_source_cannot_be_lifted() {
        let (op, b1) = triangle_basis(Order::One);
        let sigma = TopologicalSpinor::from_blocks(&[1.0, 1.0, 1.0], &[0.0; 3], &[0.0]);
        assert!(matches!(lift_signal(&sigma, &op, &b1), Err(Error::ZeroAfterProjection)));
    }

    #[test]
    fn noise_is_deterministic_and_in_the_image() {
        let (_, b) = triangle_basis(Order::One);
        let model = NoiseModel { alpha1: 0.6, alpha2: 0.6, seed: 42 };
        let a = sample_noise(&model, &b, 3).unwrap();
        let again = sample_noise(&model, &b, 3).unwrap();
        assert_eq!(a, again);
        let other = sample_noise(&model, &b, 4).unwrap();
        assert_ne!(a, other);
        let p = b.project(&a).unwrap();
        assert!((p.as_vector() - a.as_vector()).amax() < 1e-12);
    }

    #[test]
    fn snr_examples() {
        let s = TopologicalSpinor::from_blocks(&[1.0], &[0.0], &[]);
        let e = TopologicalSpinor::from_blocks(&[0.0], &[1.0], &[]);
        assert_eq!(snr(&s, &e).unwrap(), 1.0);
        let z = TopologicalSpinor::from_blocks(&[0.0], &[0.0], &[]);
        assert!(matches!(snr(&s, &z), Err(Error::ZeroNoise)));
    }

    #[test]
    fn empty_image_has_no_noise() {
        let k = SimplicialComplex::new(3, &[[0, 1]], &[]).unwrap();
        let op = DiracOperator::<f64>::new(&k);
        let b2 = SpectralBasis::new(&op, Order::Two).unwrap();
        let model = NoiseModel { alpha1: 0.5, alpha2: 0.5, seed: 1 };
        assert!(matches!(sample_noise(&model, &b2, 0), Err(Error::EmptyImage(2))));
    }
}
