//! Interaction graphs: a compact undirected graph type and the Chimera
//! hardware layout built from `K_{k,k}` unit cells.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Simple undirected graph with compact vertex indices `0..vertex_count`.
///
/// Edges are stored as `(i, j)` with `i < j` in ascending lexicographic
/// order; `adjacency[v]` is sorted. `original` maps each compact index back
/// to the index it had in the graph it was derived from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
    original: Vec<usize>,
}

impl Graph {
    /// Builds a graph from an edge list. Edge orientation does not matter;
    /// self-loops, duplicates and out-of-range endpoints are rejected.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::input(format!(
                    "edge ({a}, {b}) out of range for {vertex_count} vertices"
                )));
            }
            if a == b {
                return Err(Error::input(format!("self-loop on vertex {a}")));
            }
            let e = (a.min(b), a.max(b));
            if !set.insert(e) {
                return Err(Error::input(format!("duplicate edge ({}, {})", e.0, e.1)));
            }
        }
        Ok(Self::from_sorted(vertex_count, set.into_iter().collect(), (0..vertex_count).collect()))
    }

    fn from_sorted(vertex_count: usize, edges: Vec<(usize, usize)>, original: Vec<usize>) -> Self {
        let mut adjacency = vec![Vec::new(); vertex_count];
        for &(a, b) in &edges {
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Graph {
            vertex_count,
            edges,
            adjacency,
            original,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adjacency[v].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        a < self.vertex_count && self.adjacency[a].binary_search(&b).is_ok()
    }

    /// Index each compact vertex had in the graph this one was derived from.
    pub fn original_index(&self, v: usize) -> usize {
        self.original[v]
    }

    pub fn original_indices(&self) -> &[usize] {
        &self.original
    }

    /// Position of `(a, b)` in [`Graph::edges`].
    pub fn edge_index(&self, a: usize, b: usize) -> Option<usize> {
        let key = (a.min(b), a.max(b));
        self.edges.binary_search(&key).ok()
    }

    /// Induced subgraph on the vertices not in `victims`, with compacted
    /// indices. The original-index map composes with this graph's own map.
    pub fn remove_vertices(&self, victims: &[usize]) -> Result<Graph> {
        let mut dead = vec![false; self.vertex_count];
        for &v in victims {
            if v >= self.vertex_count {
                return Err(Error::input(format!(
                    "cannot remove vertex {v}: graph has {} vertices",
                    self.vertex_count
                )));
            }
            dead[v] = true;
        }
        let mut remap = vec![usize::MAX; self.vertex_count];
        let mut original = Vec::with_capacity(self.vertex_count);
        for v in 0..self.vertex_count {
            if !dead[v] {
                remap[v] = original.len();
                original.push(self.original[v]);
            }
        }
        // Monotone relabeling keeps the edge list sorted.
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| !dead[a] && !dead[b])
            .map(|&(a, b)| (remap[a], remap[b]))
            .collect();
        Ok(Graph::from_sorted(original.len(), edges, original))
    }

    /// True when the graph contains at least one cycle.
    pub fn has_cycle(&self) -> bool {
        // A forest has exactly `n - components` edges.
        self.edges.len() + self.component_count() > self.vertex_count
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.vertex_count];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in 0..self.vertex_count {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for &w in &self.adjacency[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        count
    }
}

/// Parameters of a Chimera layout: an `rows x cols` grid of `K_{k,k}` cells.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChimeraSpec {
    pub rows: usize,
    pub cols: usize,
    pub k: usize,
    #[serde(default)]
    pub dead_vertices: Vec<usize>,
}

impl ChimeraSpec {
    pub fn new(rows: usize, cols: usize, k: usize) -> Self {
        ChimeraSpec {
            rows,
            cols,
            k,
            dead_vertices: Vec::new(),
        }
    }

    pub fn with_dead(mut self, dead: Vec<usize>) -> Self {
        self.dead_vertices = dead;
        self
    }

    /// Vertex count of the ideal graph, before dead vertices are removed.
    pub fn ideal_vertex_count(&self) -> usize {
        self.rows * self.cols * 2 * self.k
    }

    /// Index of vertex `offset` (`0..2k`) in cell `(row, col)`.
    pub fn vertex(&self, row: usize, col: usize, offset: usize) -> usize {
        (row * self.cols + col) * 2 * self.k + offset
    }
}

/// Example list of eight inoperative qubits for an 8x8 `K_{4,4}` Chimera,
/// giving the 504-vertex working graph. Not the layout of any real device.
pub const SAMPLE_DEAD_VERTICES: [usize; 8] = [22, 75, 131, 196, 263, 318, 401, 477];

/// Builds a Chimera graph.
///
/// Cells are numbered row-major; within a cell offsets `0..k` form the left
/// half and `k..2k` the right half. Each cell is complete bipartite between
/// the halves. Left-half vertices couple to the same offset in the cell
/// below, right-half vertices to the same offset in the cell to the right.
/// Dead vertices are then removed and indices compacted.
pub fn build_chimera(spec: &ChimeraSpec) -> Result<Graph> {
    let ChimeraSpec { rows, cols, k, .. } = *spec;
    if rows == 0 || cols == 0 || k == 0 {
        return Err(Error::input(format!(
            "chimera dimensions must be positive (rows={rows}, cols={cols}, k={k})"
        )));
    }
    let n = spec.ideal_vertex_count();
    let mut edges = Vec::with_capacity(rows * cols * k * k + 2 * k * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            for a in 0..k {
                for b in k..2 * k {
                    edges.push((spec.vertex(r, c, a), spec.vertex(r, c, b)));
                }
                if r + 1 < rows {
                    edges.push((spec.vertex(r, c, a), spec.vertex(r + 1, c, a)));
                }
                if c + 1 < cols {
                    edges.push((spec.vertex(r, c, k + a), spec.vertex(r, c + 1, k + a)));
                }
            }
        }
    }
    let ideal = Graph::new(n, edges)?;
    if spec.dead_vertices.is_empty() {
        return Ok(ideal);
    }
    ideal.remove_vertices(&spec.dead_vertices)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn triangle() -> Graph {
        Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn single_cell_k1_is_one_edge() {
        let g = build_chimera(&ChimeraSpec::new(1, 1, 1)).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
    }

    #[test]
    fn full_8x8_edge_count() {
        let g = build_chimera(&ChimeraSpec::new(8, 8, 4)).unwrap();
        assert_eq!(g.vertex_count(), 512);
        // 64 cells * 16 intra + 4 * 7 * 8 vertical + 4 * 8 * 7 horizontal
        assert_eq!(g.edge_count(), 64 * 16 + 224 + 224);
        assert_eq!(g.edge_count(), 1472);
    }

    #[test]
    fn sample_dead_list_gives_504() {
        let spec = ChimeraSpec::new(8, 8, 4).with_dead(SAMPLE_DEAD_VERTICES.to_vec());
        let g = build_chimera(&spec).unwrap();
        assert_eq!(g.vertex_count(), 504);
        for &(a, b) in g.edges() {
            assert!(!SAMPLE_DEAD_VERTICES.contains(&g.original_index(a)));
            assert!(!SAMPLE_DEAD_VERTICES.contains(&g.original_index(b)));
        }
    }

    #[test]
    fn interior_degree_is_six() {
        let spec = ChimeraSpec::new(3, 3, 4);
        let g = build_chimera(&spec).unwrap();
        for off in 0..8 {
            assert_eq!(g.degree(spec.vertex(1, 1, off)), 6);
        }
    }

    #[test]
    fn degree_histogram_matches_boundary_count() {
        for (m, n, k) in [(1, 1, 4), (2, 3, 4), (4, 4, 2), (3, 1, 3), (8, 8, 4)] {
            let spec = ChimeraSpec::new(m, n, k);
            let g = build_chimera(&spec).unwrap();
            let mut expected = std::collections::BTreeMap::new();
            for r in 0..m {
                for c in 0..n {
                    let vert = usize::from(r > 0) + usize::from(r + 1 < m);
                    let horiz = usize::from(c > 0) + usize::from(c + 1 < n);
                    *expected.entry(k + vert).or_insert(0usize) += k;
                    *expected.entry(k + horiz).or_insert(0usize) += k;
                }
            }
            let mut actual = std::collections::BTreeMap::new();
            for v in 0..g.vertex_count() {
                *actual.entry(g.degree(v)).or_insert(0usize) += 1;
            }
            assert_eq!(actual, expected, "chimera {m}x{n}x{k}");
        }
    }

    #[test]
    fn dead_vertex_out_of_range() {
        let spec = ChimeraSpec::new(1, 1, 4).with_dead(vec![8]);
        assert!(matches!(build_chimera(&spec), Err(Error::Input(_))));
    }

    #[test]
    fn zero_dimension_rejected() {
        assert!(build_chimera(&ChimeraSpec::new(0, 1, 4)).is_err());
    }

    #[test]
    fn remove_from_triangle() {
        let g = triangle().remove_vertices(&[1]).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[(0, 1)]);
        assert_eq!(g.original_indices(), &[0, 2]);
    }

    #[test]
    fn remove_nothing_is_identity() {
        let g = build_chimera(&ChimeraSpec::new(2, 2, 3)).unwrap();
        assert_eq!(g.remove_vertices(&[]).unwrap(), g);
    }

    #[test]
    fn remove_unknown_vertex() {
        assert!(triangle().remove_vertices(&[3]).is_err());
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::new(2, [(0, 0)]).is_err());
        assert!(Graph::new(2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn cycle_detection() {
        assert!(triangle().has_cycle());
        assert!(!Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap().has_cycle());
        assert!(!Graph::new(3, []).unwrap().has_cycle());
    }

    proptest! {
        #[test]
        fn removal_composes(first in proptest::collection::btree_set(0usize..72, 0..10),
                            second_raw in proptest::collection::btree_set(0usize..200, 0..10)) {
            let g = build_chimera(&ChimeraSpec::new(3, 3, 4)).unwrap();
            let first: Vec<usize> = first.into_iter().collect();
            let once = g.remove_vertices(&first).unwrap();
            let second: Vec<usize> = second_raw.into_iter().filter(|&v| v < once.vertex_count()).collect();
            let twice = once.remove_vertices(&second).unwrap();

            let mut union: BTreeSet<usize> = first.iter().copied().collect();
            union.extend(second.iter().map(|&v| once.original_index(v)));
            let union: Vec<usize> = union.into_iter().collect();
            prop_assert_eq!(twice, g.remove_vertices(&union).unwrap());
        }

        #[test]
        fn adjacency_consistent(dead in proptest::collection::btree_set(0usize..32, 0..6)) {
            let spec = ChimeraSpec::new(2, 2, 4).with_dead(dead.into_iter().collect());
            let g = build_chimera(&spec).unwrap();
            let mut from_adj = 0;
            for v in 0..g.vertex_count() {
                for &w in g.neighbors(v) {
                    prop_assert!(g.has_edge(w, v));
                    from_adj += 1;
                }
            }
            prop_assert_eq!(from_adj, 2 * g.edge_count());
        }
    }
}
