//! Partition a stroke graph's edges into ordered pen strokes. Every edge is
//! traversed exactly once; revisiting vertices is allowed. Strokes start at
//! the lowest-index vertex with remaining edges and always continue to the
//! lowest-index remaining neighbor, so the output is fully deterministic.

use crate::error::{Error, Result};
use crate::sketch::{Point, Polyline};

/// Symmetric adjacency lists with multiset semantics (parallel edges are
/// tolerated). Neighbor lists are kept sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AdjacencyList {
    lists: Vec<Vec<usize>>,
}

impl AdjacencyList {
    /// Build from undirected edges over `n` vertices.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut lists = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange(u.max(v)));
            }
            if u == v {
                return Err(Error::InvalidInput(format!("self-loop at vertex {u}")));
            }
            lists[u].push(v);
            lists[v].push(u);
        }
        for list in &mut lists {
            list.sort_unstable();
        }
        Ok(AdjacencyList { lists })
    }

    pub fn vertex_count(&self) -> usize {
        self.lists.len()
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.lists[u]
    }

    /// Total number of undirected edges (counting multiplicity).
    pub fn edge_count(&self) -> usize {
        self.lists.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    /// Remove one instance of the undirected edge (u, w) from both sides.
    fn pop_edge(&mut self, u: usize, w: usize) {
        let pos = self.lists[u]
            .iter()
            .position(|&x| x == w)
            .expect("edge must exist when popped");
        self.lists[u].remove(pos);
        let pos = self.lists[w]
            .iter()
            .position(|&x| x == u)
            .expect("adjacency must be symmetric");
        self.lists[w].remove(pos);
    }

    fn validate_symmetric(&self) -> Result<()> {
        for (u, list) in self.lists.iter().enumerate() {
            for &w in list {
                if w >= self.lists.len() {
                    return Err(Error::IndexOutOfRange(w));
                }
                let forward = list.iter().filter(|&&x| x == w).count();
                let backward = self.lists[w].iter().filter(|&&x| x == u).count();
                if forward != backward {
                    return Err(Error::NotUndirected);
                }
            }
        }
        Ok(())
    }

    /// Direct access for callers that assemble lists by hand. The lists are
    /// sorted; symmetry is checked by [`strokes_gen`].
    pub fn from_lists(mut lists: Vec<Vec<usize>>) -> Self {
        for list in &mut lists {
            list.sort_unstable();
        }
        AdjacencyList { lists }
    }
}

/// An ordered set of strokes, each a walk of vertex indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrokeSequence {
    pub strokes: Vec<Vec<usize>>,
}

/// Extend `stroke` from vertex `u`: repeatedly pop the edge to the lowest
/// remaining neighbor and follow it, until the walk dead-ends. Iterative
/// form of the recursive procedure (the recursion is tail-like after the
/// append), so long chains cannot overflow the call stack.
pub fn get_sequence(adjacency: &mut AdjacencyList, start: usize, stroke: &mut Vec<usize>) {
    let mut u = start;
    while let Some(&w) = adjacency.lists[u].first() {
        adjacency.pop_edge(u, w);
        stroke.push(w);
        u = w;
    }
}

/// Partition all edges into strokes: while any vertex has remaining edges,
/// start a stroke at the lowest such vertex, take its first edge, and let
/// [`get_sequence`] run the walk to exhaustion.
pub fn strokes_gen(adjacency: &AdjacencyList) -> Result<StrokeSequence> {
    adjacency.validate_symmetric()?;
    let mut work = adjacency.clone();
    let mut sequence = StrokeSequence::default();
    while let Some(v) = (0..work.vertex_count()).find(|&v| !work.lists[v].is_empty()) {
        let u = work.lists[v][0];
        work.pop_edge(v, u);
        let mut stroke = vec![v, u];
        get_sequence(&mut work, u, &mut stroke);
        sequence.strokes.push(stroke);
    }
    Ok(sequence)
}

/// Resolve stroke vertex indices to coordinates.
pub fn strokes_to_points(sequence: &StrokeSequence, vertices: &[Point]) -> Result<Vec<Polyline>> {
    let mut polylines = Vec::with_capacity(sequence.strokes.len());
    for stroke in &sequence.strokes {
        let mut points = Vec::with_capacity(stroke.len());
        for &idx in stroke {
            let p = vertices.get(idx).ok_or(Error::IndexOutOfRange(idx))?;
            points.push(*p);
        }
        polylines.push(Polyline::new(points)?);
    }
    Ok(polylines)
}
