//! The graph an instance is played on. Simulation runs on [`GridMap`]; the
//! QBF reduction emits a general [`Graph`], which only validation and the
//! exact solver accept.

use std::fmt::Debug;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gridmap::{CellCoord, GridMap};

pub trait Board {
    type Vertex: Copy + Eq + Ord + Hash + Debug;

    /// True for vertices agents may stand on.
    fn contains(&self, v: Self::Vertex) -> bool;

    /// Passable neighbours of a passable vertex, in a fixed order.
    fn neighbors(&self, v: Self::Vertex) -> Vec<Self::Vertex>;

    fn adjacent(&self, a: Self::Vertex, b: Self::Vertex) -> bool;

    /// All passable vertices, in a fixed order.
    fn vertices(&self) -> Vec<Self::Vertex>;
}

impl Board for GridMap {
    type Vertex = CellCoord;

    fn contains(&self, v: CellCoord) -> bool {
        self.is_passable(v)
    }

    fn neighbors(&self, v: CellCoord) -> Vec<CellCoord> {
        self.neighbors4(v).unwrap_or_default()
    }

    fn adjacent(&self, a: CellCoord, b: CellCoord) -> bool {
        a.is_adjacent4(b) && self.is_passable(a) && self.is_passable(b)
    }

    fn vertices(&self) -> Vec<CellCoord> {
        self.passable_cells().collect()
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("edge ({0},{1}) references a vertex outside 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
}

/// Undirected simple graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(vertex_count: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); vertex_count],
        }
    }

    pub fn from_edges(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut g = Graph::new(vertex_count);
        for (a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(GraphError::VertexOutOfRange(a, b, vertex_count));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            g.add_edge(a, b);
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self) -> usize {
        self.adjacency.push(Vec::new());
        self.adjacency.len() - 1
    }

    /// Adds an undirected edge; duplicates are ignored.
    pub fn add_edge(&mut self, a: usize, b: usize) {
        assert_ne!(a, b, "self-loop");
        if !self.adjacency[a].contains(&b) {
            self.adjacency[a].push(b);
            self.adjacency[b].push(a);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges as `(lo, hi)` pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out: Vec<_> = self
            .adjacency
            .iter()
            .enumerate()
            .flat_map(|(a, ns)| ns.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
            .collect();
        out.sort_unstable();
        out
    }

    pub fn neighbors_of(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Hop distances from `src`; `None` when unreachable.
    pub fn distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut queue = std::collections::VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(v) = queue.pop_front() {
            let d = dist[v].unwrap_or(0) + 1;
            for &n in &self.adjacency[v] {
                if dist[n].is_none() {
                    dist[n] = Some(d);
                    queue.push_back(n);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() == 0 || self.distances(0).iter().all(Option::is_some)
    }
}

impl Board for Graph {
    type Vertex = usize;

    fn contains(&self, v: usize) -> bool {
        v < self.adjacency.len()
    }

    fn neighbors(&self, v: usize) -> Vec<usize> {
        self.adjacency.get(v).cloned().unwrap_or_default()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency.get(a).is_some_and(|ns| ns.contains(&b))
    }

    fn vertices(&self) -> Vec<usize> {
        (0..self.adjacency.len()).collect()
    }
}

/// JSON form of a [`Graph`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphDoc {
    pub vertex_count: usize,
    pub edges: Vec<[usize; 2]>,
}

impl From<&Graph> for GraphDoc {
    fn from(g: &Graph) -> Self {
        GraphDoc {
            vertex_count: g.vertex_count(),
            edges: g.edges().into_iter().map(|(a, b)| [a, b]).collect(),
        }
    }
}

impl TryFrom<&GraphDoc> for Graph {
    type Error = GraphError;

    fn try_from(doc: &GraphDoc) -> Result<Self, GraphError> {
        Graph::from_edges(doc.vertex_count, doc.edges.iter().map(|e| (e[0], e[1])))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graph_basics() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (1, 0)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.adjacent(2, 1));
        assert!(!g.adjacent(0, 2));
        assert!(!g.is_connected());
        assert_eq!(g.distances(0)[2], Some(2));
        assert_eq!(Graph::from_edges(2, [(0, 2)]), Err(GraphError::VertexOutOfRange(0, 2, 2)));
        assert_eq!(Graph::from_edges(2, [(1, 1)]), Err(GraphError::SelfLoop(1)));
    }

    #[test]
    fn grid_board_adjacency() {
        let map = GridMap::from_rows(&["..", "@."]).unwrap();
        assert!(map.adjacent(CellCoord::new(0, 0), CellCoord::new(1, 0)));
        assert!(!map.adjacent(CellCoord::new(0, 0), CellCoord::new(0, 1)));
        assert!(!map.adjacent(CellCoord::new(0, 0), CellCoord::new(1, 1)));
        assert_eq!(map.vertices().len(), 3);
    }
}
