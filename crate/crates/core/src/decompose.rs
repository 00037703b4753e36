//! Dirac decomposition `s = s_[1] + s_[2] + s_harm`.

use crate::error::{Error, Result};
use crate::operators::Order;
use crate::scalar::Real;
use crate::spectral::SpectralBasis;
use crate::spinor::TopologicalSpinor;

#[derive(Clone, Debug)]
pub struct DiracDecomposition<T: Real> {
    pub first: TopologicalSpinor<T>,
    pub second: TopologicalSpinor<T>,
    pub harmonic: TopologicalSpinor<T>,
}

/// `s_[n] = D_n D_n† s`.
pub fn dirac_project<T: Real>(
    s: &TopologicalSpinor<T>,
    basis: &SpectralBasis<T>,
) -> Result<TopologicalSpinor<T>> {
    basis.project(s)
}

/// `s_harm = s - s_[1] - s_[2]`, the component in `ker(D)`.
pub fn harmonic_project<T: Real>(
    s: &TopologicalSpinor<T>,
    first: &SpectralBasis<T>,
    second: &SpectralBasis<T>,
) -> Result<TopologicalSpinor<T>> {
    Ok(decompose(s, first, second)?.harmonic)
}

pub fn decompose<T: Real>(
    s: &TopologicalSpinor<T>,
    first: &SpectralBasis<T>,
    second: &SpectralBasis<T>,
) -> Result<DiracDecomposition<T>> {
    if first.order() != Order::One || second.order() != Order::Two {
        return Err(Error::InvalidConfig(
            "decomposition needs the bases of D_1 and D_2, in that order".into(),
        ));
    }
    let s1 = first.project(s)?;
    let s2 = second.project(s)?;
    let harmonic = &(s - &s1) - &s2;
    Ok(DiracDecomposition {
        first: s1,
        second: s2,
        harmonic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::SimplicialComplex;
    use crate::operators::DiracOperator;
    use crate::spinor::Layout;
    use nalgebra::DVector;

    fn setup(k: &SimplicialComplex) -> (DiracOperator<f64>, SpectralBasis<f64>, SpectralBasis<f64>) {
        let op = DiracOperator::new(k);
        let b1 = SpectralBasis::new(&op, Order::One).unwrap();
        let b2 = SpectralBasis::new(&op, Order::Two).unwrap();
        (op, b1, b2)
    }

    #[test]
    fn constant_node_signal_is_harmonic() {
        let k = SimplicialComplex::new(3, &[[0, 1], [0, 2], [1, 2]], &[[0, 1, 2]]).unwrap();
        let (_, b1, b2) = setup(&k);
        let s = TopologicalSpinor::from_blocks(&[1.0, 1.0, 1.0], &[0.0; 3], &[0.0]);
        let h = harmonic_project(&s, &b1, &b2).unwrap();
        assert!((h.as_vector() - s.as_vector()).amax() < 1e-12);
        assert!(dirac_project(&s, &b1).unwrap().norm() < 1e-12);
    }

    #[test]
    fn image_of_dirac_has_no_harmonic_part() {
        let k = SimplicialComplex::new(3, &[[0, 1], [0, 2], [1, 2]], &[[0, 1, 2]]).unwrap();
        let (op, b1, b2) = setup(&k);
        let x = TopologicalSpinor::from_blocks(&[0.3, -1.0, 2.0], &[1.5, 0.2, -0.7], &[0.9]);
        let dx = op.apply(&x).unwrap();
        assert!(harmonic_project(&dx, &b1, &b2).unwrap().norm() < 1e-12);
        let once = dirac_project(&dx, &b1).unwrap();
        let twice = dirac_project(&once, &b1).unwrap();
        assert!((once.as_vector() - twice.as_vector()).amax() < 1e-12);
    }

    #[test]
    fn bases_in_wrong_order_are_rejected() {
        let k = SimplicialComplex::new(2, &[[0, 1]], &[]).unwrap();
        let (_, b1, b2) = setup(&k);
        let s = TopologicalSpinor::from_vector(Layout::new(2, 1, 0), DVector::from_element(3, 1.0)).unwrap();
        assert!(decompose(&s, &b2, &b1).is_err());
    }
}
