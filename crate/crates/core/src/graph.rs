//! Undirected weighted graphs with hop-count BFS utilities.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge ({0}, {1}) leaves the vertex range 0..{2}")]
    VertexOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("non-finite weight on edge ({0}, {1})")]
    NonFiniteWeight(usize, usize),
}

/// Simple undirected graph. Weights are only used by random-walk chains;
/// distances and girth count hops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<(usize, f64)>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum EdgeJson {
    Weighted(usize, usize, f64),
    Plain(usize, usize),
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<EdgeJson>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = GraphError;

    fn try_from(raw: GraphJson) -> Result<Self, GraphError> {
        let mut g = Graph::new(raw.n);
        for e in raw.edges {
            match e {
                EdgeJson::Weighted(i, j, w) => g.add_weighted_edge(i, j, w)?,
                EdgeJson::Plain(i, j) => g.add_edge(i, j)?,
            }
        }
        Ok(g)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            n: g.n,
            edges: g
                .edges()
                .into_iter()
                .map(|(i, j, w)| {
                    if w == 1.0 {
                        EdgeJson::Plain(i, j)
                    } else {
                        EdgeJson::Weighted(i, j, w)
                    }
                })
                .collect(),
        }
    }
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph {
            n,
            adj: vec![Vec::new(); n],
        }
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n);
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Self {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Graph::from_edges(n, &edges).expect("cycle edges are valid")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).expect("path edges are valid")
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for i in 0..n {
            for j in (i + 1)..n {
                g.add_edge(i, j).expect("complete graph edges are valid");
            }
        }
        g
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<(), GraphError> {
        self.add_weighted_edge(i, j, 1.0)
    }

    /// Adds `{i, j}` with weight `w`. Sign is not checked here; chain
    /// construction rejects non-positive weights.
    pub fn add_weighted_edge(&mut self, i: usize, j: usize, w: f64) -> Result<(), GraphError> {
        if i >= self.n || j >= self.n {
            return Err(GraphError::VertexOutOfRange(i, j, self.n));
        }
        if i == j {
            return Err(GraphError::SelfLoop(i));
        }
        if !w.is_finite() {
            return Err(GraphError::NonFiniteWeight(i, j));
        }
        if self.has_edge(i, j) {
            return Err(GraphError::DuplicateEdge(i, j));
        }
        self.adj[i].push((j, w));
        self.adj[j].push((i, w));
        Ok(())
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) -> bool {
        let before = self.adj[i].len();
        self.adj[i].retain(|&(v, _)| v != j);
        self.adj[j].retain(|&(v, _)| v != i);
        self.adj[i].len() != before
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].iter().any(|&(v, _)| v == j)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(i, j, w)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let mut out: Vec<_> = (0..self.n)
            .flat_map(|i| {
                self.adj[i]
                    .iter()
                    .filter(move |&&(j, _)| i < j)
                    .map(move |&(j, w)| (i, j, w))
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn weighted_degree(&self, i: usize) -> f64 {
        self.adj[i].iter().map(|&(_, w)| w).sum()
    }

    /// Hop distances from `src`; `None` for unreachable vertices.
    pub fn hop_distances(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.n];
        dist[src] = Some(0);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices are reached");
            for &(v, _) in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.hop_distances(0).iter().all(Option::is_some)
    }

    /// Length of a shortest cycle and the non-tree edge that closes it in
    /// the BFS from the lowest-numbered root attaining it.
    pub fn shortest_cycle(&self) -> Option<(usize, (usize, usize))> {
        let mut best: Option<(usize, (usize, usize))> = None;
        let mut dist = vec![usize::MAX; self.n];
        let mut parent = vec![usize::MAX; self.n];
        for root in 0..self.n {
            dist.iter_mut().for_each(|d| *d = usize::MAX);
            dist[root] = 0;
            parent[root] = usize::MAX;
            let mut queue = VecDeque::from([root]);
            'bfs: while let Some(u) = queue.pop_front() {
                if let Some((len, _)) = best {
                    // cycles through deeper vertices cannot be shorter
                    if 2 * dist[u] + 1 >= len {
                        break 'bfs;
                    }
                }
                for &(v, _) in &self.adj[u] {
                    if dist[v] == usize::MAX {
                        dist[v] = dist[u] + 1;
                        parent[v] = u;
                        queue.push_back(v);
                    } else if parent[u] != v {
                        let len = dist[u] + dist[v] + 1;
                        if best.is_none_or(|(b, _)| len < b) {
                            best = Some((len, (u.min(v), u.max(v))));
                        }
                    }
                }
            }
        }
        best
    }

    /// Shortest cycle length; `None` for forests.
    pub fn girth(&self) -> Option<usize> {
        self.shortest_cycle().map(|(len, _)| len)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn girth_examples() {
        let k22 = Graph::from_edges(4, &[(0, 2), (0, 3), (1, 2), (1, 3)]).unwrap();
        assert_eq!(k22.girth(), Some(4));
        assert_eq!(Graph::cycle(6).girth(), Some(6));
        assert_eq!(Graph::cycle(7).girth(), Some(7));
        assert_eq!(Graph::complete(5).girth(), Some(3));
        let tree = Graph::from_edges(5, &[(0, 1), (0, 2), (2, 3), (2, 4)]).unwrap();
        assert_eq!(tree.girth(), None);
    }

    #[test]
    fn closing_edge_lies_on_a_short_cycle() {
        // a 4-cycle with a pendant 5-cycle sharing vertex 0
        let g = Graph::from_edges(
            8,
            &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 4), (4, 5), (5, 6), (6, 7), (7, 0)],
        )
        .unwrap();
        let (len, (u, v)) = g.shortest_cycle().unwrap();
        assert_eq!(len, 4);
        let mut h = g.clone();
        h.remove_edge(u, v);
        assert_eq!(h.girth(), Some(5));
    }

    #[test]
    fn rejects_bad_edges() {
        let mut g = Graph::new(3);
        assert_eq!(g.add_edge(0, 0), Err(GraphError::SelfLoop(0)));
        assert_eq!(g.add_edge(0, 5), Err(GraphError::VertexOutOfRange(0, 5, 3)));
        g.add_edge(0, 1).unwrap();
        assert_eq!(g.add_edge(1, 0), Err(GraphError::DuplicateEdge(1, 0)));
    }

    #[test]
    fn json_round_trip() {
        let g: Graph = serde_json::from_str(r#"{"n":3,"edges":[[0,1],[1,2,2.5]]}"#).unwrap();
        assert_eq!(g.weighted_degree(1), 3.5);
        let back: Graph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn connectivity_and_distances() {
        let p = Graph::path(4);
        assert_eq!(p.hop_distances(0), vec![Some(0), Some(1), Some(2), Some(3)]);
        let mut two = Graph::new(4);
        two.add_edge(0, 1).unwrap();
        two.add_edge(2, 3).unwrap();
        assert!(!two.is_connected());
        assert_eq!(two.hop_distances(0)[2], None);
    }
}
