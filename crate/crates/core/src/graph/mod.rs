//! Undirected graphs, averaging matrices supported on them, and spectral design.

mod averaging;
mod design;
pub mod eigen;

pub use averaging::{build_laplacian_averaging, validate_averaging, AveragingMatrix, Check, Spectrum, ValidityReport};
pub use design::optimize_averaging_matrix;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Stream;

/// Redraw budget for [`gen_erdos_renyi`].
pub const MAX_GRAPH_DRAWS: usize = 1000;

/// Undirected simple graph on vertices `0..m`. Edges are stored once as
/// `(i, j)` with `i < j`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    m: usize,
    edges: BTreeSet<(usize, usize)>,
    adjacency: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    m: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = Error;
    fn try_from(g: GraphJson) -> Result<Self> {
        Graph::new(g.m, g.edges.into_iter().map(|[i, j]| (i, j)))
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson {
            m: g.m,
            edges: g.edges.iter().map(|&(i, j)| [i, j]).collect(),
        }
    }
}

impl Graph {
    /// Builds a graph from unordered pairs. Duplicates in either orientation
    /// collapse to one edge; self-loops and out-of-range indices are rejected.
    pub fn new(m: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= m || j >= m {
                return Err(Error::invalid(format!("edge ({i}, {j}) out of range for m = {m}")));
            }
            if i == j {
                return Err(Error::invalid(format!("self-loop at vertex {i}")));
            }
            set.insert((i.min(j), i.max(j)));
        }
        let mut adjacency = vec![Vec::new(); m];
        for &(i, j) in &set {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        adjacency.iter_mut().for_each(|a| a.sort_unstable());
        Ok(Graph { m, edges: set, adjacency })
    }

    pub fn complete(m: usize) -> Result<Self> {
        Graph::new(m, (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i.min(j), i.max(j)))
    }

    /// Neighbors of `i` in ascending order.
    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adjacency.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn is_connected(&self) -> bool {
        connected_components(self.m, |i| self.adjacency[i].iter().copied()) == 1
    }
}

/// Number of connected components of the graph given by `neighbors`.
pub(crate) fn connected_components<I>(m: usize, neighbors: impl Fn(usize) -> I) -> usize
where
    I: Iterator<Item = usize>,
{
    let mut seen = vec![false; m];
    let mut components = 0;
    let mut queue = VecDeque::new();
    for start in 0..m {
        if seen[start] {
            continue;
        }
        components += 1;
        seen[start] = true;
        queue.push_back(start);
        while let Some(v) = queue.pop_front() {
            for w in neighbors(v) {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    components
}

/// Draws G(m, p_edge) until the draw is connected. Attempt `a` uses the
/// stream seeded with `seed + a` (wrapping) and visits pairs `(i, j)`, `i < j`,
/// in lexicographic order, keeping a pair when `uniform() < p_edge`.
pub fn gen_erdos_renyi(m: usize, p_edge: f64, seed: u64) -> Result<Graph> {
    if m < 2 {
        return Err(Error::invalid(format!("need m >= 2, got {m}")));
    }
    if !(p_edge > 0.0 && p_edge <= 1.0) {
        return Err(Error::invalid(format!("edge probability must lie in (0, 1], got {p_edge}")));
    }
    for attempt in 0..MAX_GRAPH_DRAWS {
        let mut rng = Stream::new(seed.wrapping_add(attempt as u64));
        let mut edges = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                if rng.uniform() < p_edge {
                    edges.push((i, j));
                }
            }
        }
        let g = Graph::new(m, edges)?;
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GraphGeneration {
        m,
        p_edge,
        attempts: MAX_GRAPH_DRAWS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // Connectivity by repeated relaxation of a reachability matrix; shares
    // nothing with the BFS used by `is_connected`.
    fn reachable_everywhere(g: &Graph) -> bool {
        let m = g.m();
        let mut reach = vec![vec![false; m]; m];
        for i in 0..m {
            reach[i][i] = true;
        }
        for (i, j) in g.edges() {
            reach[i][j] = true;
            reach[j][i] = true;
        }
        for k in 0..m {
            for i in 0..m {
                for j in 0..m {
                    if reach[i][k] && reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
        reach.iter().all(|r| r.iter().all(|&b| b))
    }

    #[test]
    fn reference_sized_draw_is_connected() {
        let g = gen_erdos_renyi(20, 0.2, 42).unwrap();
        assert_eq!(g.m(), 20);
        assert!(g.is_connected());
        assert!(reachable_everywhere(&g));
    }

    #[test]
    fn two_vertices_full_probability_is_k2() {
        for seed in [0, 1, 99] {
            let g = gen_erdos_renyi(2, 1.0, seed).unwrap();
            assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        }
    }

    #[test]
    fn connectivity_agrees_with_closure_oracle() {
        let g = gen_erdos_renyi(6, 0.5, 7).unwrap();
        assert_eq!(g.is_connected(), reachable_everywhere(&g));
        for seed in 0..50 {
            let mut rng = Stream::new(seed);
            let edges: Vec<_> = (0..6)
                .flat_map(|i| (i + 1..6).map(move |j| (i, j)))
                .filter(|_| rng.uniform() < 0.3)
                .collect();
            let g = Graph::new(6, edges).unwrap();
            assert_eq!(g.is_connected(), reachable_everywhere(&g), "seed {seed}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = gen_erdos_renyi(30, 0.2, 1234).unwrap();
        let b = gen_erdos_renyi(30, 0.2, 1234).unwrap();
        assert_eq!(a, b);
        let c = gen_erdos_renyi(30, 0.2, 987_654).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn invalid_arguments() {
        assert!(matches!(gen_erdos_renyi(1, 0.5, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gen_erdos_renyi(5, 0.0, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gen_erdos_renyi(5, 1.5, 0), Err(Error::InvalidArgument(_))));
        assert!(matches!(
            gen_erdos_renyi(200, 1e-6, 0),
            Err(Error::GraphGeneration { attempts: 1000, .. })
        ));
    }

    #[test]
    fn rejects_self_loops_and_normalizes_orientation() {
        assert!(Graph::new(3, [(1, 1)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
        let g = Graph::new(3, [(2, 0), (0, 2), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 2);
        assert!(g.has_edge(0, 2) && g.has_edge(2, 0));
        assert_eq!(g.neighbors(2), &[0, 1]);
    }

    #[test]
    fn json_shape() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"m":3,"edges":[[0,1],[1,2]]}"#);
        let back: Graph = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<Graph>(r#"{"m":2,"edges":[[0,0]]}"#).is_err());
    }
}
