//! Eigenpairs of a Dirac part `D_n` and the projections built from them.
//!
//! The nonzero spectrum is assembled from the singular value decomposition of
//! the boundary matrix `B_n`: each singular triple `(σ, u, v)` yields the chiral
//! pair `λ = ±σ` with eigenvectors `(u, ±v)/√2`. The singular vectors come from
//! a dense symmetric eigensolve of whichever Gram matrix (`B Bᵀ` or `Bᵀ B`) is
//! smaller, so the cost is cubic in `min(N_{n-1}, N_n)` rather than in the
//! spinor dimension.

use std::ops::Range;

use nalgebra::{DMatrix, DVector, Dyn, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operators::{chirality_map, DiracOperator, Order, DENSE_EIGEN_LIMIT};
use crate::scalar::Real;
use crate::spinor::{Layout, TopologicalSpinor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EigenClass {
    Negative,
    Harmonic,
    Positive,
}

impl EigenClass {
    pub fn name(self) -> &'static str {
        match self {
            EigenClass::Negative => "neg",
            EigenClass::Harmonic => "harm",
            EigenClass::Positive => "pos",
        }
    }
}

/// Nonzero eigenpairs of `D_n`, with the kernel described by its dimension.
///
/// Eigenvalues are ascending: the `p` negative ones first, then the `p`
/// positive ones, where `p = rank(B_n)`. Eigenvector `i` and `2p - 1 - i` form
/// a chiral pair.
#[derive(Clone, Debug)]
pub struct SpectralBasis<T: Real> {
    order: Order,
    layout: Layout,
    support: Range<usize>,
    eigenvalues: DVector<T>,
    /// Columns are eigenvectors restricted to `support`.
    eigenvectors: DMatrix<T>,
}

impl<T: Real> SpectralBasis<T> {
    pub fn new(op: &DiracOperator<T>, order: Order) -> Result<Self> {
        let b: DMatrix<T> = op.boundary(order).to_dense();
        let (r, c) = b.shape();
        let support = op.support(order);
        let pairs = singular_triples(&b)?;
        let p = pairs.len();

        let mut eigenvalues = DVector::zeros(2 * p);
        let mut eigenvectors = DMatrix::zeros(r + c, 2 * p);
        let half = T::lit(0.5).sqrt();
        // pairs are sorted by descending σ, so the negatives come out ascending
        for (k, (sigma, u, v)) in pairs.into_iter().enumerate() {
            let mut plus = DVector::zeros(r + c);
            plus.rows_mut(0, r).copy_from(&(&u * half));
            plus.rows_mut(r, c).copy_from(&(&v * half));
            let mut minus = plus.clone();
            minus.rows_mut(r, c).neg_mut();
            fix_sign(&mut plus);
            fix_sign(&mut minus);
            eigenvalues[k] = -sigma;
            eigenvectors.set_column(k, &minus);
            eigenvalues[2 * p - 1 - k] = sigma;
            eigenvectors.set_column(2 * p - 1 - k, &plus);
        }

        Ok(SpectralBasis {
            order,
            layout: op.layout(),
            support,
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn support(&self) -> Range<usize> {
        self.support.clone()
    }

    /// Nonzero eigenvalues, ascending.
    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.eigenvalues
    }

    /// Eigenvectors restricted to the support, one per column.
    pub fn eigenvectors(&self) -> &DMatrix<T> {
        &self.eigenvectors
    }

    /// `D_n = dim im(D_n)`.
    pub fn nonharmonic_dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Dimension of `ker(D_n)` over the full spinor space.
    pub fn harmonic_dim(&self) -> usize {
        self.layout.dim() - self.nonharmonic_dim()
    }

    pub fn negative(&self) -> Range<usize> {
        0..self.nonharmonic_dim() / 2
    }

    pub fn positive(&self) -> Range<usize> {
        self.nonharmonic_dim() / 2..self.nonharmonic_dim()
    }

    /// Index of the eigenpair with eigenvalue `-λ_i`.
    pub fn chiral_partner(&self, i: usize) -> usize {
        self.nonharmonic_dim() - 1 - i
    }

    pub fn eigenvalue(&self, i: usize) -> T {
        self.eigenvalues[i]
    }

    /// Eigenvector `i` embedded in the full spinor space.
    pub fn eigenvector(&self, i: usize) -> TopologicalSpinor<T> {
        self.embed(&self.eigenvectors.column(i).clone_owned())
    }

    /// The complete spectrum of `D_n` on the full space, zeros included, with
    /// each value's class.
    pub fn classified_spectrum(&self) -> Vec<(T, EigenClass)> {
        let neg = self.negative().map(|i| (self.eigenvalues[i], EigenClass::Negative));
        let harm = (0..self.harmonic_dim()).map(|_| (T::zero(), EigenClass::Harmonic));
        let pos = self.positive().map(|i| (self.eigenvalues[i], EigenClass::Positive));
        neg.chain(harm).chain(pos).collect()
    }

    /// Coordinates `Φᵀ s` of a spinor in the eigenbasis.
    pub fn coefficients(&self, s: &TopologicalSpinor<T>) -> Result<DVector<T>> {
        s.check_layout(self.layout)?;
        let restricted = s
            .as_vector()
            .rows(self.support.start, self.support.len());
        Ok(self.eigenvectors.tr_mul(&restricted))
    }

    /// `Φ c`, embedded in the full space.
    pub fn synthesize(&self, coefficients: &DVector<T>) -> TopologicalSpinor<T> {
        self.embed(&(&self.eigenvectors * coefficients))
    }

    /// Orthogonal projection `D_n D_n† s` onto `im(D_n)`.
    pub fn project(&self, s: &TopologicalSpinor<T>) -> Result<TopologicalSpinor<T>> {
        Ok(self.synthesize(&self.coefficients(s)?))
    }

    /// Rayleigh quotient `sᵀ D_n s / sᵀ s`.
    pub fn rayleigh(&self, s: &TopologicalSpinor<T>) -> Result<T> {
        let denom = s.norm_squared();
        if denom == T::zero() {
            return Err(Error::ZeroSignal);
        }
        let c = self.coefficients(s)?;
        let num = c
            .iter()
            .zip(self.eigenvalues.iter())
            .fold(T::zero(), |acc, (&ci, &l)| acc + l * ci * ci);
        Ok(num / denom)
    }

    /// Orthonormal basis of `ker(D_n)` restricted to the support, computed on
    /// demand as the complement of the nonharmonic eigenvectors.
    pub fn harmonic_basis(&self) -> Result<DMatrix<T>> {
        let k = self.support.len();
        check_dense(k)?;
        let proj = &self.eigenvectors * self.eigenvectors.transpose();
        let complement = DMatrix::identity(k, k) - proj;
        let eig = complement
            .try_symmetric_eigen(T::default_epsilon(), 0)
            .ok_or_else(|| Error::EigensolveFailure("complement eigensolve".into()))?;
        let keep: Vec<usize> = (0..k)
            .filter(|&i| eig.eigenvalues[i] > T::lit(0.5))
            .collect();
        Ok(eig.eigenvectors.select_columns(&keep))
    }

    /// Applies `γ_n`.
    pub fn chirality(&self, s: &TopologicalSpinor<T>) -> TopologicalSpinor<T> {
        chirality_map(self.order, s)
    }

    fn embed(&self, restricted: &DVector<T>) -> TopologicalSpinor<T> {
        let mut out = TopologicalSpinor::zeros(self.layout);
        out.as_vector_mut()
            .rows_mut(self.support.start, self.support.len())
            .copy_from(restricted);
        out
    }
}

fn check_dense(n: usize) -> Result<()> {
    if n > DENSE_EIGEN_LIMIT {
        return Err(Error::EigensolveFailure(format!(
            "dimension {n} exceeds the dense limit {DENSE_EIGEN_LIMIT}"
        )));
    }
    Ok(())
}

type Triple<T> = (T, DVector<T>, DVector<T>);

/// Nonzero singular triples of `b`, by descending singular value.
fn singular_triples<T: Real>(b: &DMatrix<T>) -> Result<Vec<Triple<T>>> {
    let (r, c) = b.shape();
    if r == 0 || c == 0 {
        return Ok(Vec::new());
    }
    let left = r <= c;
    let gram = if left { b * b.transpose() } else { b.transpose() * b };
    let n = gram.nrows();
    check_dense(n)?;
    let eig = refined_eigen(&gram)?;
    let mu_max = eig.eigenvalues.max();
    if mu_max <= T::zero() {
        return Ok(Vec::new());
    }
    let cutoff = T::rank_cutoff() * mu_max;
    let mut idx: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] > cutoff)
        .collect();
    idx.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("finite eigenvalues")
    });
    let out = idx
        .into_iter()
        .map(|i| {
            let sigma = eig.eigenvalues[i].sqrt();
            let w = eig.eigenvectors.column(i).clone_owned();
            if left {
                let v = b.tr_mul(&w) / sigma;
                (sigma, w, v)
            } else {
                let u = b * &w / sigma;
                (sigma, u, w)
            }
        })
        .collect();
    Ok(out)
}

/// Symmetric eigendecomposition followed by one Rayleigh-Ritz pass, which
/// restores full accuracy for nearly degenerate pairs.
fn refined_eigen<T: Real>(a: &DMatrix<T>) -> Result<SymmetricEigen<T, Dyn>> {
    let solve = |m: DMatrix<T>| {
        m.try_symmetric_eigen(T::default_epsilon(), 0)
            .ok_or_else(|| Error::EigensolveFailure("symmetric QR did not converge".into()))
    };
    let first = solve(a.clone())?;
    let w = first.eigenvectors;
    let mut ritz = w.transpose() * a * &w;
    ritz = (&ritz + ritz.transpose()) * T::lit(0.5);
    let second = solve(ritz)?;
    Ok(SymmetricEigen {
        eigenvectors: w * second.eigenvectors,
        eigenvalues: second.eigenvalues,
    })
}

/// Flips `v` so that its largest-magnitude entry is positive.
fn fix_sign<T: Real>(v: &mut DVector<T>) {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, x) in v.iter().enumerate() {
        if x.abs() > best_abs {
            best = i;
            best_abs = x.abs();
        }
    }
    if v.len() > 0 && v[best] < T::zero() {
        v.neg_mut();
    }
}
