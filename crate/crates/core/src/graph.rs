//! Sparse binary bipartite adjacency stored in CSR form for both directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One side of a bipartite graph in compressed sparse row layout.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Csr {
    offsets: Vec<usize>,
    targets: Vec<u32>,
}

impl Csr {
    /// Builds rows from `(row, col)` pairs already sorted by row then column
    /// with no duplicates.
    fn from_sorted(rows: usize, pairs: impl Iterator<Item = (u32, u32)>) -> Self {
        let mut offsets = Vec::with_capacity(rows + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        let mut row = 0usize;
        for (r, c) in pairs {
            while row < r as usize {
                offsets.push(targets.len());
                row += 1;
            }
            targets.push(c);
        }
        while row < rows {
            offsets.push(targets.len());
            row += 1;
        }
        Csr { offsets, targets }
    }

    #[inline]
    fn row(&self, r: usize) -> &[u32] {
        &self.targets[self.offsets[r]..self.offsets[r + 1]]
    }

    #[inline]
    fn degree(&self, r: usize) -> usize {
        self.offsets[r + 1] - self.offsets[r]
    }
}

/// Binary bipartite graph between "left" nodes (always users) and "right"
/// nodes (objects or tags).
///
/// Both neighbor directions are kept, each list strictly increasing.
/// Immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRepr", into = "GraphRepr")]
pub struct BipartiteGraph {
    left_count: usize,
    right_count: usize,
    left: Csr,
    right: Csr,
}

impl BipartiteGraph {
    /// Builds a graph from an edge list. Duplicate pairs collapse to one edge.
    pub fn from_edges(
        edges: impl IntoIterator<Item = (u32, u32)>,
        left_count: usize,
        right_count: usize,
    ) -> Result<Self> {
        let mut pairs: Vec<(u32, u32)> = edges.into_iter().collect();
        for &(l, r) in &pairs {
            if l as usize >= left_count {
                return Err(Error::IndexOutOfRange {
                    kind: "left node",
                    index: l as usize,
                    count: left_count,
                });
            }
            if r as usize >= right_count {
                return Err(Error::IndexOutOfRange {
                    kind: "right node",
                    index: r as usize,
                    count: right_count,
                });
            }
        }
        pairs.sort_unstable();
        pairs.dedup();
        Ok(Self::from_sorted_unique(pairs, left_count, right_count))
    }

    /// `pairs` must be sorted, deduplicated and in range.
    fn from_sorted_unique(pairs: Vec<(u32, u32)>, left_count: usize, right_count: usize) -> Self {
        let left = Csr::from_sorted(left_count, pairs.iter().copied());
        let mut flipped: Vec<(u32, u32)> = pairs.into_iter().map(|(l, r)| (r, l)).collect();
        flipped.sort_unstable();
        let right = Csr::from_sorted(right_count, flipped.into_iter());
        BipartiteGraph {
            left_count,
            right_count,
            left,
            right,
        }
    }

    pub fn empty(left_count: usize, right_count: usize) -> Self {
        Self::from_sorted_unique(Vec::new(), left_count, right_count)
    }

    pub fn left_count(&self) -> usize {
        self.left_count
    }

    pub fn right_count(&self) -> usize {
        self.right_count
    }

    pub fn edge_count(&self) -> usize {
        self.left.targets.len()
    }

    /// Sorted right-node neighbors of left node `u`. Panics if out of range.
    #[inline]
    pub fn left_neighbors(&self, u: u32) -> &[u32] {
        self.left.row(u as usize)
    }

    /// Sorted left-node neighbors of right node `x`. Panics if out of range.
    #[inline]
    pub fn right_neighbors(&self, x: u32) -> &[u32] {
        self.right.row(x as usize)
    }

    #[inline]
    pub fn left_degree(&self, u: u32) -> usize {
        self.left.degree(u as usize)
    }

    #[inline]
    pub fn right_degree(&self, x: u32) -> usize {
        self.right.degree(x as usize)
    }

    pub fn check_left(&self, u: u32) -> Result<()> {
        if (u as usize) < self.left_count {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                kind: "user",
                index: u as usize,
                count: self.left_count,
            })
        }
    }

    pub fn check_right(&self, x: u32) -> Result<()> {
        if (x as usize) < self.right_count {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                kind: "right node",
                index: x as usize,
                count: self.right_count,
            })
        }
    }

    pub fn contains(&self, u: u32, x: u32) -> bool {
        (u as usize) < self.left_count && self.left_neighbors(u).binary_search(&x).is_ok()
    }

    /// All edges in (left, right) lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.left_count as u32)
            .flat_map(move |u| self.left_neighbors(u).iter().map(move |&x| (u, x)))
    }

    /// All edges enumerated from the right-side lists, as (left, right) pairs
    /// in (right, left) order.
    pub fn edges_by_right(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.right_count as u32)
            .flat_map(move |x| self.right_neighbors(x).iter().map(move |&u| (u, x)))
    }

    /// Returns a graph with the same node counts containing only the edges
    /// for which `keep` returns true.
    pub fn filter_edges(&self, mut keep: impl FnMut(u32, u32) -> bool) -> Self {
        let pairs: Vec<(u32, u32)> = self.edges().filter(|&(u, x)| keep(u, x)).collect();
        Self::from_sorted_unique(pairs, self.left_count, self.right_count)
    }
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    left_count: usize,
    right_count: usize,
    /// Per-left-node neighbor lists.
    adjacency: Vec<Vec<u32>>,
}

impl From<BipartiteGraph> for GraphRepr {
    fn from(g: BipartiteGraph) -> Self {
        GraphRepr {
            left_count: g.left_count,
            right_count: g.right_count,
            adjacency: (0..g.left_count as u32)
                .map(|u| g.left_neighbors(u).to_vec())
                .collect(),
        }
    }
}

impl TryFrom<GraphRepr> for BipartiteGraph {
    type Error = Error;

    fn try_from(repr: GraphRepr) -> Result<Self> {
        if repr.adjacency.len() != repr.left_count {
            return Err(Error::Snapshot(format!(
                "adjacency has {} rows, expected {}",
                repr.adjacency.len(),
                repr.left_count
            )));
        }
        let edges = repr
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, row)| row.iter().map(move |&x| (u as u32, x)));
        BipartiteGraph::from_edges(edges, repr.left_count, repr.right_count)
    }
}
