//! The Dirac operator, its parts `D_1`, `D_2`, and the Hodge Laplacians.

use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::complex::{BoundaryMatrix, SimplicialComplex};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spinor::{Block, Layout, TopologicalSpinor};

/// Dense eigensolves are refused above this dimension.
pub const DENSE_EIGEN_LIMIT: usize = 4000;

/// Order `n ∈ {1, 2}` of a Dirac part `D_n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Order {
    One,
    Two,
}

impl Order {
    pub const BOTH: [Order; 2] = [Order::One, Order::Two];

    pub fn new(n: usize) -> Result<Order> {
        match n {
            1 => Ok(Order::One),
            2 => Ok(Order::Two),
            _ => Err(Error::InvalidOrder {
                order: n,
                what: "Dirac part",
            }),
        }
    }

    pub fn get(self) -> usize {
        match self {
            Order::One => 1,
            Order::Two => 2,
        }
    }

    /// The two blocks `D_n` couples: `(n-1, n)`.
    pub fn blocks(self) -> (Block, Block) {
        match self {
            Order::One => (Block::Node, Block::Link),
            Order::Two => (Block::Link, Block::Triangle),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianPart {
    Full,
    Up,
    Down,
}

/// `D = [[0, B1, 0], [B1ᵀ, 0, B2], [0, B2ᵀ, 0]]` over the spinor space of a
/// complex. Held sparse; dense views are built on request.
#[derive(Clone, Debug)]
pub struct DiracOperator<T: Real> {
    layout: Layout,
    b1: BoundaryMatrix,
    b2: BoundaryMatrix,
    _scalar: std::marker::PhantomData<T>,
}

impl<T: Real> DiracOperator<T> {
    pub fn new(complex: &SimplicialComplex) -> Self {
        DiracOperator {
            layout: complex.layout(),
            b1: complex.boundary_matrix(1).expect("order 1"),
            b2: complex.boundary_matrix(2).expect("order 2"),
            _scalar: std::marker::PhantomData,
        }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn boundary(&self, order: Order) -> &BoundaryMatrix {
        match order {
            Order::One => &self.b1,
            Order::Two => &self.b2,
        }
    }

    /// Coordinates on which `D_n` can be nonzero: nodes+links for `n = 1`,
    /// links+triangles for `n = 2`.
    pub fn support(&self, order: Order) -> Range<usize> {
        let (lo, hi) = order.blocks();
        self.layout.range(lo).start..self.layout.range(hi).end
    }

    /// Dense `D_n` restricted to its support, `[[0, B], [Bᵀ, 0]]`.
    pub fn part_block(&self, order: Order) -> DMatrix<T> {
        let b = self.boundary(order);
        let (r, c) = (b.rows(), b.cols());
        let mut m = DMatrix::zeros(r + c, r + c);
        for (i, j, v) in b.triplets() {
            let v = T::from_i8(v).unwrap();
            m[(i, r + j)] = v;
            m[(r + j, i)] = v;
        }
        m
    }

    /// Dense `D_n` over the full spinor space.
    pub fn part(&self, order: Order) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        let s = self.support(order);
        m.view_mut((s.start, s.start), (s.len(), s.len()))
            .copy_from(&self.part_block(order));
        m
    }

    /// Dense `D = D_1 + D_2`.
    pub fn full(&self) -> DMatrix<T> {
        self.part(Order::One) + self.part(Order::Two)
    }

    /// `D_n s` without densifying.
    pub fn apply_part(&self, order: Order, s: &TopologicalSpinor<T>) -> Result<TopologicalSpinor<T>> {
        s.check_layout(self.layout)?;
        let (lo, hi) = order.blocks();
        let b = self.boundary(order);
        let x_lo = s.block(lo).clone_owned();
        let x_hi = s.block(hi).clone_owned();
        let mut out = TopologicalSpinor::zeros(self.layout);
        let v = out.as_vector_mut();
        v.rows_mut(self.layout.range(lo).start, b.rows())
            .copy_from(&b.mul_vec(&x_hi));
        v.rows_mut(self.layout.range(hi).start, b.cols())
            .copy_from(&b.tr_mul_vec(&x_lo));
        Ok(out)
    }

    /// `D s`.
    pub fn apply(&self, s: &TopologicalSpinor<T>) -> Result<TopologicalSpinor<T>> {
        let a = self.apply_part(Order::One, s)?;
        let b = self.apply_part(Order::Two, s)?;
        Ok(&a + &b)
    }

    /// `γ_n s`: for `n = 1` keeps nodes, negates links and zeroes triangles;
    /// for `n = 2` zeroes nodes, keeps links and negates triangles.
    pub fn chirality(&self, order: Order, s: &TopologicalSpinor<T>) -> Result<TopologicalSpinor<T>> {
        s.check_layout(self.layout)?;
        Ok(chirality_map(order, s))
    }

    /// Hodge Laplacian `L_n` or its up/down part, dense.
    pub fn hodge_laplacian(&self, n: usize, which: LaplacianPart) -> Result<DMatrix<T>> {
        if n > 2 {
            return Err(Error::InvalidOrder {
                order: n,
                what: "Hodge Laplacian",
            });
        }
        let size = [self.layout.nodes, self.layout.links, self.layout.triangles][n];
        // L_n^down = B_nᵀ B_n, L_n^up = B_{n+1} B_{n+1}ᵀ
        let down = match n {
            0 => DMatrix::zeros(size, size),
            _ => {
                let b: DMatrix<T> = self.boundary(Order::new(n)?).to_dense();
                b.transpose() * b
            }
        };
        let up = match n {
            2 => DMatrix::zeros(size, size),
            _ => {
                let b: DMatrix<T> = self.boundary(Order::new(n + 1)?).to_dense();
                &b * b.transpose()
            }
        };
        Ok(match which {
            LaplacianPart::Full => up + down,
            LaplacianPart::Up => up,
            LaplacianPart::Down => down,
        })
    }

    /// Block-diagonal super-Laplacian `blockdiag(L0, L1, L2)`.
    pub fn super_laplacian(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for block in Block::ALL {
            let r = self.layout.range(block);
            let l = self
                .hodge_laplacian(block.index(), LaplacianPart::Full)
                .expect("n <= 2");
            m.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&l);
        }
        m
    }

    /// Ascending eigenvalues of the full `D`.
    pub fn spectrum(&self) -> Result<DVector<T>> {
        if self.dim() > DENSE_EIGEN_LIMIT {
            return Err(Error::EigensolveFailure(format!(
                "dimension {} exceeds the dense limit {DENSE_EIGEN_LIMIT}",
                self.dim()
            )));
        }
        let eig = self
            .full()
            .try_symmetric_eigen(T::default_epsilon(), 0)
            .ok_or_else(|| Error::EigensolveFailure("symmetric QR did not converge".into()))?;
        let mut vals: Vec<T> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        Ok(DVector::from_vec(vals))
    }

    /// Number of eigenvalues of `D` with `|λ| <= tol`.
    pub fn kernel_dim(&self, tol: T) -> Result<usize> {
        Ok(self.spectrum()?.iter().filter(|l| l.abs() <= tol).count())
    }
}

/// Applies `γ_n` to a spinor.
pub fn chirality_map<T: Real>(order: Order, s: &TopologicalSpinor<T>) -> TopologicalSpinor<T> {
    let layout = s.layout();
    let mut out = s.clone();
    let (flip, zero) = match order {
        Order::One => (Block::Link, Block::Triangle),
        Order::Two => (Block::Triangle, Block::Node),
    };
    let v = out.as_vector_mut();
    for i in layout.range(flip) {
        v[i] = -v[i];
    }
    for i in layout.range(zero) {
        v[i] = T::zero();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge() -> SimplicialComplex {
        SimplicialComplex::new(2, &[[0, 1]], &[]).unwrap()
    }

    fn filled_triangle() -> SimplicialComplex {
        SimplicialComplex::new(3, &[[0, 1], [0, 2], [1, 2]], &[[0, 1, 2]]).unwrap()
    }

    fn sorted_eigs(m: DMatrix<f64>) -> Vec<f64> {
        let mut v: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v
    }

    #[test]
    fn single_edge_dirac() {
        let d = DiracOperator::<f64>::new(&edge());
        let full = d.full();
        assert_eq!(full.shape(), (3, 3));
        // By hand: D = [[0,-1,...]] has characteristic polynomial -λ(λ² - 2).
        let eig = d.spectrum().unwrap();
        let expected = [-2f64.sqrt(), 0.0, 2f64.sqrt()];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn filled_triangle_dirac_spectrum() {
        let d = DiracOperator::<f64>::new(&filled_triangle());
        let eig = d.spectrum().unwrap();
        let s3 = 3f64.sqrt();
        let expected = [-s3, -s3, -s3, 0.0, s3, s3, s3];
        for (a, b) in eig.iter().zip(expected) {
            assert!((a - b).abs() < 1e-10, "{eig}");
        }
    }

    #[test]
    fn isolated_nodes_give_zero_operator() {
        let k = SimplicialComplex::new(4, &[], &[]).unwrap();
        let d = DiracOperator::<f64>::new(&k);
        assert_eq!(d.full(), DMatrix::zeros(4, 4));
        assert_eq!(d.kernel_dim(1e-8).unwrap(), 4);
    }

    #[test]
    fn edge_laplacian() {
        let d = DiracOperator::<f64>::new(&edge());
        let l0 = d.hodge_laplacian(0, LaplacianPart::Full).unwrap();
        assert_eq!(l0, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));
        assert!(d.hodge_laplacian(3, LaplacianPart::Full).is_err());
    }

    #[test]
    fn triangle_up_laplacian_is_rank_one() {
        let d = DiracOperator::<f64>::new(&filled_triangle());
        let up = d.hodge_laplacian(1, LaplacianPart::Up).unwrap();
        let eig = sorted_eigs(up);
        assert!(eig[0].abs() < 1e-12 && eig[1].abs() < 1e-12);
        assert!((eig[2] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_is_up_plus_down() {
        let d = DiracOperator::<f64>::new(&filled_triangle());
        for n in 0..3 {
            let full = d.hodge_laplacian(n, LaplacianPart::Full).unwrap();
            let up = d.hodge_laplacian(n, LaplacianPart::Up).unwrap();
            let down = d.hodge_laplacian(n, LaplacianPart::Down).unwrap();
            assert_eq!(full, &up + &down);
            assert!((&up * &down).amax() < 1e-12);
        }
    }

    #[test]
    fn sparse_apply_matches_dense() {
        let k = filled_triangle();
        let d = DiracOperator::<f64>::new(&k);
        let s = TopologicalSpinor::from_blocks(&[1.0, -2.0, 0.5], &[0.3, 0.7, -1.1], &[2.0]);
        let dense = d.full() * s.as_vector();
        let sparse = d.apply(&s).unwrap();
        assert!((dense - sparse.as_vector()).amax() < 1e-14);
    }

    #[test]
    fn chirality_on_first_order() {
        let s = TopologicalSpinor::from_blocks(&[1.0, 2.0], &[3.0], &[4.0]);
        let g = chirality_map(Order::One, &s);
        assert_eq!(g, TopologicalSpinor::from_blocks(&[1.0, 2.0], &[-3.0], &[0.0]));
        let g2 = chirality_map(Order::Two, &s);
        assert_eq!(g2, TopologicalSpinor::from_blocks(&[0.0, 0.0], &[3.0], &[-4.0]));
        let z = TopologicalSpinor::<f64>::zeros(s.layout());
        assert!(chirality_map(Order::One, &z).is_zero());
    }
}
