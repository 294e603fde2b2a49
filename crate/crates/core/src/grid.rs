//! Uniform Cartesian grids on square/cubic domains, node indexing, and
//! boundary classification.

use crate::error::{Error, Result};

/// Descriptor of a uniform Cartesian grid over `(l1, l2)^dim`.
///
/// Node coordinates are always produced as `l1 + i*h` with a single
/// multiply-add, so repeated calls are bit-identical.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub dim: usize,
    pub l1: f64,
    pub l2: f64,
    pub n1: usize,
    pub h: f64,
}

impl GridSpec {
    pub fn coord(&self, i: usize) -> f64 {
        self.l1 + i as f64 * self.h
    }

    /// Total node count `(n1+1)^dim`.
    pub fn num_nodes(&self) -> usize {
        (self.n1 + 1).pow(self.dim as u32)
    }

    /// Interior unknown count `(n1-1)^dim`.
    pub fn num_interior(&self) -> usize {
        (self.n1 - 1).pow(self.dim as u32)
    }

    /// Flat storage index over the full grid, i fastest.
    pub fn node_offset(&self, node: NodeIndex) -> usize {
        let n = self.n1 + 1;
        match self.dim {
            2 => node.j * n + node.i,
            _ => (node.k * n + node.j) * n + node.i,
        }
    }

    pub fn point(&self, node: NodeIndex) -> [f64; 3] {
        [
            self.coord(node.i),
            self.coord(node.j),
            if self.dim == 3 { self.coord(node.k) } else { 0.0 },
        ]
    }

    /// Iterate all nodes of the full grid in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        let n = self.n1 + 1;
        let dim = self.dim;
        let planes = if dim == 3 { n } else { 1 };
        (0..planes).flat_map(move |k| {
            (0..n).flat_map(move |j| (0..n).map(move |i| NodeIndex { i, j, k }))
        })
    }

    /// Iterate interior nodes in lexicographic order (i fastest).
    pub fn interior_nodes(&self) -> impl Iterator<Item = NodeIndex> + '_ {
        let n1 = self.n1;
        let dim = self.dim;
        let ks = if dim == 3 { 1..n1 } else { 0..1 };
        ks.flat_map(move |k| {
            (1..n1).flat_map(move |j| (1..n1).map(move |i| NodeIndex { i, j, k }))
        })
    }
}

/// Multi-index of a grid node. `k` is 0 in 2D.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeIndex {
    pub i: usize,
    pub j: usize,
    pub k: usize,
}

impl NodeIndex {
    pub fn new2(i: usize, j: usize) -> Self {
        NodeIndex { i, j, k: 0 }
    }
    pub fn new3(i: usize, j: usize, k: usize) -> Self {
        NodeIndex { i, j, k }
    }
    fn as_array(&self) -> [usize; 3] {
        [self.i, self.j, self.k]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Interior,
    Boundary,
}

/// Uniform temporal grid on `[0, t_end]`, `t_n = n * tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t_end: f64,
    pub n2: usize,
    pub tau: f64,
}

impl TimeGrid {
    pub fn new(t_end: f64, n2: usize) -> Result<Self> {
        if n2 == 0 {
            return Err(Error::InvalidCount(0));
        }
        if t_end < 0.0 {
            return Err(Error::InvalidExtent { l1: t_end, l2: 0.0 });
        }
        Ok(TimeGrid { t_end, n2, tau: t_end / n2 as f64 })
    }

    pub fn time(&self, n: usize) -> f64 {
        n as f64 * self.tau
    }
}

/// Build a grid over `(l1, l2)^dim` with `n1` subdivisions per axis.
pub fn make_grid(dim: usize, l1: f64, l2: f64, n1: usize) -> Result<GridSpec> {
    assert!(dim == 2 || dim == 3, "only 2D and 3D grids are supported");
    if !l1.is_finite() || !l2.is_finite() || l2 <= l1 {
        return Err(Error::InvalidExtent { l1, l2 });
    }
    if n1 < 2 {
        return Err(Error::InvalidCount(n1));
    }
    Ok(GridSpec { dim, l1, l2, n1, h: (l2 - l1) / n1 as f64 })
}

/// Classify a node as interior or boundary. A node is boundary iff any of
/// its indices is 0 or n1.
pub fn classify(node: NodeIndex, grid: &GridSpec) -> Result<NodeClass> {
    let idx = node.as_array();
    for d in 0..grid.dim {
        if idx[d] > grid.n1 {
            return Err(Error::OutOfRange { index: idx, n1: grid.n1 });
        }
    }
    if grid.dim == 2 && node.k != 0 {
        return Err(Error::OutOfRange { index: idx, n1: grid.n1 });
    }
    let on_boundary = (0..grid.dim).any(|d| idx[d] == 0 || idx[d] == grid.n1);
    Ok(if on_boundary { NodeClass::Boundary } else { NodeClass::Interior })
}

/// Flat index of an interior node, lexicographic with i fastest:
/// `(k-1)(n1-1)^2 + (j-1)(n1-1) + (i-1)` in 3D.
pub fn lex_index(node: NodeIndex, grid: &GridSpec) -> Result<usize> {
    match classify(node, grid)? {
        NodeClass::Boundary => Err(Error::BoundaryNode(node.as_array())),
        NodeClass::Interior => {
            let m = grid.n1 - 1;
            Ok(match grid.dim {
                2 => (node.j - 1) * m + (node.i - 1),
                _ => ((node.k - 1) * m + (node.j - 1)) * m + (node.i - 1),
            })
        }
    }
}

/// Inverse of [`lex_index`].
pub fn node_of_lex(idx: usize, grid: &GridSpec) -> NodeIndex {
    let m = grid.n1 - 1;
    match grid.dim {
        2 => NodeIndex { i: idx % m + 1, j: idx / m + 1, k: 0 },
        _ => NodeIndex {
            i: idx % m + 1,
            j: (idx / m) % m + 1,
            k: idx / (m * m) + 1,
        },
    }
}

/// Scalar field sampled on every node of a grid, in storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &GridSpec) -> Self {
        Field { values: vec![0.0; grid.num_nodes()] }
    }

    pub fn from_fn(grid: &GridSpec, mut f: impl FnMut([f64; 3]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.num_nodes());
        for node in grid.nodes() {
            values.push(f(grid.point(node)));
        }
        Field { values }
    }

    pub fn at(&self, grid: &GridSpec, node: NodeIndex) -> f64 {
        self.values[grid.node_offset(node)]
    }

    pub fn set(&mut self, grid: &GridSpec, node: NodeIndex, v: f64) {
        self.values[grid.node_offset(node)] = v;
    }

    /// Max-norm of the difference over all nodes.
    pub fn linf_diff(&self, other: &Field) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_grid_quarter() {
        let g = make_grid(2, 0.0, 1.0, 4).unwrap();
        assert_eq!(g.h, 0.25);
        let coords: Vec<f64> = (0..=4).map(|i| g.coord(i)).collect();
        assert_eq!(coords, vec![0.0, 0.25, 0.5, 0.75, 1.0]);
    }

    #[test]
    fn make_grid_3d_symmetric() {
        let g = make_grid(3, -1.0, 1.0, 8).unwrap();
        assert_eq!(g.h, 0.25);
        assert_eq!(g.num_nodes(), 9 * 9 * 9);
    }

    #[test]
    fn make_grid_fine() {
        let g = make_grid(2, 0.0, 1.0, 1024).unwrap();
        assert_eq!(g.h, 1.0 / 1024.0);
    }

    #[test]
    fn make_grid_rejects_bad_input() {
        assert!(matches!(make_grid(2, 1.0, 1.0, 4), Err(Error::InvalidExtent { .. })));
        assert!(matches!(make_grid(2, 0.0, 1.0, 1), Err(Error::InvalidCount(1))));
    }

    #[test]
    fn classify_cases() {
        let g = make_grid(2, 0.0, 1.0, 8).unwrap();
        assert_eq!(classify(NodeIndex::new2(0, 3), &g).unwrap(), NodeClass::Boundary);
        assert_eq!(classify(NodeIndex::new2(4, 4), &g).unwrap(), NodeClass::Interior);
        let g3 = make_grid(3, 0.0, 1.0, 8).unwrap();
        assert_eq!(classify(NodeIndex::new3(1, 1, 8), &g3).unwrap(), NodeClass::Boundary);
        assert!(classify(NodeIndex::new2(9, 0), &g).is_err());
    }

    #[test]
    fn classify_partitions_nodes() {
        for dim in [2, 3] {
            let g = make_grid(dim, 0.0, 1.0, 5).unwrap();
            let interior = g
                .nodes()
                .filter(|&n| classify(n, &g).unwrap() == NodeClass::Interior)
                .count();
            let boundary = g
                .nodes()
                .filter(|&n| classify(n, &g).unwrap() == NodeClass::Boundary)
                .count();
            assert_eq!(interior + boundary, g.num_nodes());
            assert_eq!(interior, g.num_interior());
        }
    }

    #[test]
    fn lex_index_examples() {
        let g = make_grid(2, 0.0, 1.0, 4).unwrap();
        assert_eq!(lex_index(NodeIndex::new2(1, 1), &g).unwrap(), 0);
        assert_eq!(lex_index(NodeIndex::new2(3, 1), &g).unwrap(), 2);
        let g3 = make_grid(3, 0.0, 1.0, 4).unwrap();
        assert_eq!(lex_index(NodeIndex::new3(1, 1, 2), &g3).unwrap(), 9);
        assert!(matches!(
            lex_index(NodeIndex::new2(0, 1), &g),
            Err(Error::BoundaryNode(_))
        ));
    }

    #[test]
    fn lex_index_bijection() {
        for dim in [2, 3] {
            for n1 in [2usize, 3, 5, 16] {
                if dim == 3 && n1 > 8 {
                    continue;
                }
                let g = make_grid(dim, -1.0, 2.0, n1).unwrap();
                let mut seen = vec![false; g.num_interior()];
                for node in g.interior_nodes() {
                    let idx = lex_index(node, &g).unwrap();
                    assert!(!seen[idx]);
                    seen[idx] = true;
                    assert_eq!(node_of_lex(idx, &g), node);
                }
                assert!(seen.iter().all(|&s| s));
            }
        }
    }

    #[test]
    fn time_grid_levels() {
        let tg = TimeGrid::new(1.0, 8).unwrap();
        assert_eq!(tg.tau, 0.125);
        for n in 0..=8 {
            assert_eq!(tg.time(n), n as f64 * 0.125);
        }
        assert!(TimeGrid::new(1.0, 0).is_err());
        assert!(TimeGrid::new(-1.0, 4).is_err());
    }

    #[test]
    fn coords_bit_exact() {
        let g = make_grid(2, 0.0, 1.0, 7).unwrap();
        for i in 0..=7 {
            assert_eq!(g.coord(i), 0.0 + i as f64 * g.h);
        }
    }
}
