use std::ops::{Add, Range, Sub};

use nalgebra::{DVector, DVectorView};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Simplex dimension of a spinor block.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Block {
    Node,
    Link,
    Triangle,
}

impl Block {
    pub const ALL: [Block; 3] = [Block::Node, Block::Link, Block::Triangle];

    pub fn index(self) -> usize {
        match self {
            Block::Node => 0,
            Block::Link => 1,
            Block::Triangle => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Block::Node => "node",
            Block::Link => "link",
            Block::Triangle => "triangle",
        }
    }

    pub fn parse(s: &str) -> Option<Block> {
        match s {
            "node" => Some(Block::Node),
            "link" => Some(Block::Link),
            "triangle" => Some(Block::Triangle),
            _ => None,
        }
    }
}

/// Simplex counts `(N0, N1, N2)` of a complex; fixes the layout of every spinor
/// living on it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Layout {
    pub nodes: usize,
    pub links: usize,
    pub triangles: usize,
}

impl Layout {
    pub fn new(nodes: usize, links: usize, triangles: usize) -> Self {
        Layout {
            nodes,
            links,
            triangles,
        }
    }

    /// Total dimension `M = N0 + N1 + N2`.
    pub fn dim(&self) -> usize {
        self.nodes + self.links + self.triangles
    }

    pub fn len(&self, block: Block) -> usize {
        match block {
            Block::Node => self.nodes,
            Block::Link => self.links,
            Block::Triangle => self.triangles,
        }
    }

    /// Coordinates of `block` inside the concatenated spinor.
    pub fn range(&self, block: Block) -> Range<usize> {
        match block {
            Block::Node => 0..self.nodes,
            Block::Link => self.nodes..self.nodes + self.links,
            Block::Triangle => self.nodes + self.links..self.dim(),
        }
    }
}

/// A signal on nodes ⊕ links ⊕ triangles, stored as one concatenated vector.
#[derive(Clone, Debug, PartialEq)]
pub struct TopologicalSpinor<T: Real> {
    layout: Layout,
    data: DVector<T>,
}

impl<T: Real> TopologicalSpinor<T> {
    pub fn zeros(layout: Layout) -> Self {
        TopologicalSpinor {
            layout,
            data: DVector::zeros(layout.dim()),
        }
    }

    pub fn from_vector(layout: Layout, data: DVector<T>) -> Result<Self> {
        if data.len() != layout.dim() {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: data.len(),
            });
        }
        Ok(TopologicalSpinor { layout, data })
    }

    pub fn from_blocks(s0: &[T], s1: &[T], s2: &[T]) -> Self {
        let layout = Layout::new(s0.len(), s1.len(), s2.len());
        let data = DVector::from_iterator(
            layout.dim(),
            s0.iter().chain(s1).chain(s2).copied(),
        );
        TopologicalSpinor { layout, data }
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn dim(&self) -> usize {
        self.data.len()
    }

    pub fn as_vector(&self) -> &DVector<T> {
        &self.data
    }

    pub fn as_vector_mut(&mut self) -> &mut DVector<T> {
        &mut self.data
    }

    pub fn into_vector(self) -> DVector<T> {
        self.data
    }

    pub fn block(&self, block: Block) -> DVectorView<'_, T> {
        let r = self.layout.range(block);
        self.data.rows(r.start, r.len())
    }

    pub fn s0(&self) -> DVectorView<'_, T> {
        self.block(Block::Node)
    }

    pub fn s1(&self) -> DVectorView<'_, T> {
        self.block(Block::Link)
    }

    pub fn s2(&self) -> DVectorView<'_, T> {
        self.block(Block::Triangle)
    }

    pub fn set(&mut self, block: Block, index: usize, value: T) {
        let r = self.layout.range(block);
        self.data[r.start + index] = value;
    }

    pub fn get(&self, block: Block, index: usize) -> T {
        self.data[self.layout.range(block).start + index]
    }

    pub fn norm(&self) -> T {
        self.data.norm()
    }

    pub fn norm_squared(&self) -> T {
        self.data.norm_squared()
    }

    pub fn dot(&self, other: &Self) -> T {
        self.data.dot(&other.data)
    }

    pub fn scale(&self, k: T) -> Self {
        TopologicalSpinor {
            layout: self.layout,
            data: &self.data * k,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| *x == T::zero())
    }

    pub fn check_layout(&self, layout: Layout) -> Result<()> {
        if self.layout != layout {
            return Err(Error::DimensionMismatch {
                expected: layout.dim(),
                found: self.dim(),
            });
        }
        Ok(())
    }
}

impl<T: Real> Add for &TopologicalSpinor<T> {
    type Output = TopologicalSpinor<T>;

    fn add(self, rhs: Self) -> TopologicalSpinor<T> {
        assert_eq!(self.layout, rhs.layout, "spinor layouts differ");
        TopologicalSpinor {
            layout: self.layout,
            data: &self.data + &rhs.data,
        }
    }
}

impl<T: Real> Sub for &TopologicalSpinor<T> {
    type Output = TopologicalSpinor<T>;

    fn sub(self, rhs: Self) -> TopologicalSpinor<T> {
        assert_eq!(self.layout, rhs.layout, "spinor layouts differ");
        TopologicalSpinor {
            layout: self.layout,
            data: &self.data - &rhs.data,
        }
    }
}
