//! Simplicial complexes of dimension at most two and their boundary matrices.
//!
//! Simplices are stored with ascending node labels, which fixes their
//! orientation. Links and triangles are kept sorted lexicographically so that a
//! simplex's position in the list is its index in every operator and signal.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rank::integer_rank;
use crate::scalar::Real;
use crate::spinor::Layout;

pub type Link = [usize; 2];
pub type Triangle = [usize; 3];

/// Complexes with at most this many simplices get their Betti numbers
/// confirmed with exact rational arithmetic.
pub const EXACT_RANK_LIMIT: usize = 200;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialComplex {
    node_count: usize,
    links: Vec<Link>,
    triangles: Vec<Triangle>,
}

impl SimplicialComplex {
    /// Builds a complex, rejecting triangles whose faces are not listed.
    pub fn new(node_count: usize, links: &[Link], triangles: &[Triangle]) -> Result<Self> {
        Self::build(node_count, links, triangles, false)
    }

    /// Builds a complex, inserting missing triangle faces.
    pub fn with_closure(node_count: usize, links: &[Link], triangles: &[Triangle]) -> Result<Self> {
        Self::build(node_count, links, triangles, true)
    }

    /// Canonicalizes and validates the input. Links and triangles may be given
    /// in any order and with any vertex order.
    pub fn build(
        node_count: usize,
        links: &[Link],
        triangles: &[Triangle],
        insert_missing_faces: bool,
    ) -> Result<Self> {
        let mut ls = Vec::with_capacity(links.len());
        for l in links {
            let mut c = *l;
            c.sort_unstable();
            check_simplex(&c, node_count)?;
            ls.push(c);
        }
        ls.sort_unstable();
        if let Some(w) = ls.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSimplex {
                kind: "link",
                simplex: w[0].to_vec(),
            });
        }

        let mut ts = Vec::with_capacity(triangles.len());
        for t in triangles {
            let mut c = *t;
            c.sort_unstable();
            check_simplex(&c, node_count)?;
            ts.push(c);
        }
        ts.sort_unstable();
        if let Some(w) = ts.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateSimplex {
                kind: "triangle",
                simplex: w[0].to_vec(),
            });
        }

        let mut missing = Vec::new();
        for t in &ts {
            for face in triangle_faces(t) {
                if ls.binary_search(&face).is_err() {
                    if !insert_missing_faces {
                        return Err(Error::MissingFace {
                            triangle: *t,
                            face,
                        });
                    }
                    missing.push(face);
                }
            }
        }
        if !missing.is_empty() {
            ls.extend(missing);
            ls.sort_unstable();
            ls.dedup();
        }

        Ok(SimplicialComplex {
            node_count,
            links: ls,
            triangles: ts,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn triangles(&self) -> &[Triangle] {
        &self.triangles
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.node_count, self.links.len(), self.triangles.len())
    }

    pub fn dimension(&self) -> usize {
        if !self.triangles.is_empty() {
            2
        } else if !self.links.is_empty() {
            1
        } else {
            0
        }
    }

    pub fn simplex_count(&self) -> usize {
        self.layout().dim()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.node_count as i64 - self.links.len() as i64 + self.triangles.len() as i64
    }

    pub fn link_index(&self, i: usize, j: usize) -> Option<usize> {
        let key = if i < j { [i, j] } else { [j, i] };
        self.links.binary_search(&key).ok()
    }

    pub fn triangle_index(&self, t: Triangle) -> Option<usize> {
        let mut key = t;
        key.sort_unstable();
        self.triangles.binary_search(&key).ok()
    }

    /// Signed boundary matrix `B_n` mapping `n`-simplices to their faces.
    pub fn boundary_matrix(&self, order: usize) -> Result<BoundaryMatrix> {
        match order {
            1 => {
                let entries = self
                    .links
                    .iter()
                    .map(|&[i, j]| vec![(i, -1), (j, 1)])
                    .collect();
                Ok(BoundaryMatrix::from_columns(1, self.node_count, entries))
            }
            2 => {
                let entries = self
                    .triangles
                    .iter()
                    .map(|t| {
                        let [ij, ik, jk] = triangle_faces(t);
                        let idx = |f: Link| self.link_index(f[0], f[1]).expect("closed complex");
                        let mut col = vec![(idx(ij), 1), (idx(ik), -1), (idx(jk), 1)];
                        col.sort_unstable();
                        col
                    })
                    .collect();
                Ok(BoundaryMatrix::from_columns(2, self.links.len(), entries))
            }
            _ => Err(Error::InvalidOrder {
                order,
                what: "boundary matrix",
            }),
        }
    }

    /// `(β0, β1, β2)` from the ranks of the boundary matrices.
    ///
    /// Ranks come from singular values with a relative cutoff; complexes with
    /// at most [`EXACT_RANK_LIMIT`] simplices are also ranked exactly and the
    /// exact result wins on disagreement.
    pub fn betti_numbers(&self) -> [usize; 3] {
        let b1 = self.boundary_matrix(1).expect("order 1");
        let b2 = self.boundary_matrix(2).expect("order 2");
        let r1 = numerical_rank(&b1);
        let r2 = numerical_rank(&b2);
        let mut betti = betti_from_ranks(self.layout(), r1, r2);
        if self.simplex_count() <= EXACT_RANK_LIMIT {
            let exact = self.betti_numbers_exact();
            if exact != betti {
                log::warn!("floating-point Betti numbers {betti:?} disagree with exact {exact:?}");
                betti = exact;
            }
        }
        betti
    }

    /// Betti numbers from exact rational ranks. Cubic in the simplex count.
    pub fn betti_numbers_exact(&self) -> [usize; 3] {
        let r1 = integer_rank(&self.boundary_matrix(1).expect("order 1").to_rows());
        let r2 = integer_rank(&self.boundary_matrix(2).expect("order 2").to_rows());
        betti_from_ranks(self.layout(), r1, r2)
    }
}

fn betti_from_ranks(layout: Layout, r1: usize, r2: usize) -> [usize; 3] {
    [
        layout.nodes - r1,
        layout.links - r1 - r2,
        layout.triangles - r2,
    ]
}

fn numerical_rank(b: &BoundaryMatrix) -> usize {
    if b.rows() == 0 || b.cols() == 0 {
        return 0;
    }
    let dense: DMatrix<f64> = b.to_dense();
    let sv = dense.singular_values();
    let max = sv.max();
    if max == 0.0 {
        return 0;
    }
    let cutoff = f64::rank_cutoff() * max;
    sv.iter().filter(|&&s| s > cutoff).count()
}

fn check_simplex(s: &[usize], node_count: usize) -> Result<()> {
    if let Some(&bad) = s.iter().find(|&&v| v >= node_count) {
        return Err(Error::IndexOutOfRange {
            simplex: s.to_vec(),
            index: bad,
            node_count,
        });
    }
    if s.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegenerateSimplex(s.to_vec()));
    }
    Ok(())
}

/// Faces `(i,j), (i,k), (j,k)` of a sorted triangle, in the order that carries
/// the boundary signs `(+1, -1, +1)`.
pub fn triangle_faces(t: &Triangle) -> [Link; 3] {
    let [i, j, k] = *t;
    [[i, j], [i, k], [j, k]]
}

/// Sparse signed incidence matrix stored by columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    order: usize,
    rows: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<i8>,
}

impl BoundaryMatrix {
    fn from_columns(order: usize, rows: usize, columns: Vec<Vec<(usize, i8)>>) -> Self {
        let mut col_ptr = Vec::with_capacity(columns.len() + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_ptr.push(0);
        for col in columns {
            for (r, v) in col {
                row_idx.push(r);
                values.push(v);
            }
            col_ptr.push(row_idx.len());
        }
        BoundaryMatrix {
            order,
            rows,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.col_ptr.len() - 1
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Nonzeros `(row, value)` of column `c`, rows ascending.
    pub fn column(&self, c: usize) -> impl Iterator<Item = (usize, i8)> + '_ {
        let span = self.col_ptr[c]..self.col_ptr[c + 1];
        self.row_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// All nonzeros as `(row, col, value)`.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, i8)> + '_ {
        (0..self.cols()).flat_map(move |c| self.column(c).map(move |(r, v)| (r, c, v)))
    }

    pub fn to_dense<T: Real>(&self) -> DMatrix<T> {
        let mut m = DMatrix::zeros(self.rows, self.cols());
        for (r, c, v) in self.triplets() {
            m[(r, c)] = T::from_i8(v).expect("small integer");
        }
        m
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        let mut rows = vec![vec![0i64; self.cols()]; self.rows];
        for (r, c, v) in self.triplets() {
            rows[r][c] = v as i64;
        }
        rows
    }

    /// `B x`.
    pub fn mul_vec<T: Real>(&self, x: &DVector<T>) -> DVector<T> {
        assert_eq!(x.len(), self.cols());
        let mut y = DVector::zeros(self.rows);
        for (r, c, v) in self.triplets() {
            y[r] += T::from_i8(v).unwrap() * x[c];
        }
        y
    }

    /// `Bᵀ x`.
    pub fn tr_mul_vec<T: Real>(&self, x: &DVector<T>) -> DVector<T> {
        assert_eq!(x.len(), self.rows);
        let mut y = DVector::zeros(self.cols());
        for (r, c, v) in self.triplets() {
            y[c] += T::from_i8(v).unwrap() * x[r];
        }
        y
    }

    /// Nonzero entries of the integer product `self · rhs`.
    pub fn product(&self, rhs: &BoundaryMatrix) -> Result<BTreeMap<(usize, usize), i64>> {
        if self.cols() != rhs.rows {
            return Err(Error::DimensionMismatch {
                expected: self.cols(),
                found: rhs.rows,
            });
        }
        // Row-wise view of self for the inner index.
        let mut by_col: Vec<Vec<(usize, i64)>> = vec![Vec::new(); self.cols()];
        for (r, c, v) in self.triplets() {
            by_col[c].push((r, v as i64));
        }
        let mut out = BTreeMap::new();
        for (k, c, w) in rhs.triplets() {
            for &(r, v) in &by_col[k] {
                *out.entry((r, c)).or_insert(0) += v * w as i64;
            }
        }
        out.retain(|_, v| *v != 0);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn filled_triangle() -> SimplicialComplex {
        SimplicialComplex::new(3, &[[0, 1], [0, 2], [1, 2]], &[[0, 1, 2]]).unwrap()
    }

    #[test]
    fn filled_triangle_is_valid() {
        let k = filled_triangle();
        assert_eq!(k.layout(), Layout::new(3, 3, 1));
        assert_eq!(k.dimension(), 2);
    }

    #[test]
    fn missing_face_is_rejected() {
        let err = SimplicialComplex::new(3, &[[0, 1]], &[[0, 1, 2]]).unwrap_err();
        assert!(matches!(err, Error::MissingFace { .. }), "{err}");
    }

    #[test]
    fn closure_inserts_missing_faces() {
        let k = SimplicialComplex::with_closure(3, &[[0, 1]], &[[2, 0, 1]]).unwrap();
        assert_eq!(k, filled_triangle());
    }

    #[test]
    fn duplicates_and_bad_indices_are_rejected() {
        let dup = SimplicialComplex::new(3, &[[0, 1], [1, 0]], &[]).unwrap_err();
        assert!(matches!(dup, Error::DuplicateSimplex { kind: "link", .. }));
        let oob = SimplicialComplex::new(2, &[[0, 2]], &[]).unwrap_err();
        assert!(matches!(oob, Error::IndexOutOfRange { index: 2, .. }));
        let loop_ = SimplicialComplex::new(2, &[[1, 1]], &[]).unwrap_err();
        assert!(matches!(loop_, Error::DegenerateSimplex(_)));
    }

    #[test]
    fn input_is_canonicalized() {
        let k = SimplicialComplex::new(4, &[[3, 2], [1, 0], [2, 0]], &[]).unwrap();
        assert_eq!(k.links(), &[[0, 1], [0, 2], [2, 3]]);
    }

    #[test]
    fn fifteen_node_network() {
        let links: Vec<Link> = (0..15).map(|i| [i, (i + 1) % 15]).chain((0..5).map(|i| [i, i + 7])).collect();
        let k = SimplicialComplex::new(15, &links, &[]).unwrap();
        assert_eq!(k.layout(), Layout::new(15, 20, 0));
    }

    #[test]
    fn single_edge_boundary() {
        let k = SimplicialComplex::new(2, &[[0, 1]], &[]).unwrap();
        let b1: DMatrix<f64> = k.boundary_matrix(1).unwrap().to_dense();
        assert_eq!(b1, DMatrix::from_row_slice(2, 1, &[-1.0, 1.0]));
        let b2 = k.boundary_matrix(2).unwrap();
        assert_eq!((b2.rows(), b2.cols()), (1, 0));
    }

    #[test]
    fn triangle_boundary_signs() {
        let k = filled_triangle();
        let b2 = k.boundary_matrix(2).unwrap();
        assert_eq!(b2.column(0).collect::<Vec<_>>(), vec![(0, 1), (1, -1), (2, 1)]);
        let b1 = k.boundary_matrix(1).unwrap();
        assert!(b1.product(&b2).unwrap().is_empty());
        assert!(k.boundary_matrix(3).is_err());
    }

    #[test]
    fn betti_examples() {
        assert_eq!(filled_triangle().betti_numbers(), [1, 0, 0]);
        let hollow = SimplicialComplex::new(3, &[[0, 1], [0, 2], [1, 2]], &[]).unwrap();
        assert_eq!(hollow.betti_numbers(), [1, 1, 0]);
        let two_edges = SimplicialComplex::new(4, &[[0, 1], [2, 3]], &[]).unwrap();
        assert_eq!(two_edges.betti_numbers(), [2, 0, 0]);
    }

    #[test]
    fn filled_triangle_ranks_by_elimination() {
        let k = filled_triangle();
        assert_eq!(integer_rank(&k.boundary_matrix(1).unwrap().to_rows()), 2);
        assert_eq!(integer_rank(&k.boundary_matrix(2).unwrap().to_rows()), 1);
    }

    #[test]
    fn hollow_tetrahedron_has_a_cavity() {
        let tris = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let k = SimplicialComplex::with_closure(4, &[], &tris).unwrap();
        assert_eq!(k.betti_numbers(), [1, 0, 1]);
        assert_eq!(k.betti_numbers_exact(), [1, 0, 1]);
    }
}
