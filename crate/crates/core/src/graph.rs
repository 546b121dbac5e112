//! Undirected multigraphs without self-loops.
//!
//! This is the common substrate for network graphs (one vertex per tensor,
//! one edge per index) and for decomposition inputs. Parallel edges are
//! allowed and count separately toward degrees and boundary sizes.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("edge ({0}, {1}) has an endpoint outside 0..{2}")]
    EndpointOutOfRange(usize, usize, usize),
    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(usize),
    #[error("invalid graph JSON: {0}")]
    Json(String),
}

/// An undirected multigraph on vertices `0..num_vertices`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphDoc {
    num_vertices: usize,
    edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn new(num_vertices: usize, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        for &(a, b) in &edges {
            if a >= num_vertices || b >= num_vertices {
                return Err(GraphError::EndpointOutOfRange(a, b, num_vertices));
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
        }
        Ok(Graph {
            num_vertices,
            edges,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Degree with multiplicity (parallel edges count separately).
    pub fn degree(&self, v: usize) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| a == v || b == v)
            .count()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.num_vertices).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Distinct neighbors of `v` (multiplicities collapsed), sorted.
    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == v {
                    Some(b)
                } else if b == v {
                    Some(a)
                } else {
                    None
                }
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Simple-graph adjacency lists (deduplicated, sorted), one per vertex.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_vertices];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        adj
    }

    /// Connected components as sorted vertex lists, ordered by minimum
    /// vertex. The empty graph has no components.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut seen = vec![false; self.num_vertices];
        let mut components = Vec::new();
        for start in 0..self.num_vertices {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    pub fn is_connected(&self) -> bool {
        self.num_vertices <= 1 || self.connected_components().len() == 1
    }

    /// Number of edges with exactly one endpoint in the marked set
    /// (multiplicity counted).
    pub fn boundary_size(&self, members: &[bool]) -> usize {
        self.edges
            .iter()
            .filter(|&&(a, b)| members[a] != members[b])
            .count()
    }

    /// Connected components of the subgraph induced by `subset`, as sorted
    /// vertex lists ordered by minimum vertex.
    pub fn induced_components(&self, subset: &[usize]) -> Vec<Vec<usize>> {
        let mut member = vec![false; self.num_vertices];
        for &v in subset {
            member[v] = true;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.num_vertices];
        let mut components = Vec::new();
        let mut ordered: Vec<usize> = subset.to_vec();
        ordered.sort_unstable();
        ordered.dedup();
        for &start in &ordered {
            if seen[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut comp = Vec::new();
            seen[start] = true;
            while let Some(v) = stack.pop() {
                comp.push(v);
                for &w in &adj[v] {
                    if member[w] && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            components.push(comp);
        }
        components
    }

    /// Serializes as `{"num_vertices": n, "edges": [[a, b], ...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphDoc {
            num_vertices: self.num_vertices,
            edges: self.edges.clone(),
        })
        .expect("graph serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let doc: GraphDoc = serde_json::from_str(text)
            .map_err(|e| GraphError::Json(format!("{e} (line {}, column {})", e.line(), e.column())))?;
        Graph::new(doc.num_vertices, doc.edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction_rejects_loops_and_range() {
        assert!(Graph::new(2, vec![(0, 1)]).is_ok());
        assert_eq!(
            Graph::new(2, vec![(0, 2)]).unwrap_err(),
            GraphError::EndpointOutOfRange(0, 2, 2)
        );
        assert_eq!(
            Graph::new(2, vec![(1, 1)]).unwrap_err(),
            GraphError::SelfLoop(1)
        );
    }

    #[test]
    fn degrees_count_multiplicity() {
        let g = Graph::new(3, vec![(0, 1), (0, 1), (1, 2)]).unwrap();
        assert_eq!(g.degree(0), 2);
        assert_eq!(g.degree(1), 3);
        assert_eq!(g.max_degree(), 3);
        assert_eq!(g.neighbors(1), vec![0, 2]);
    }

    #[test]
    fn components_and_boundary() {
        let g = Graph::new(5, vec![(0, 1), (1, 2), (3, 4)]).unwrap();
        assert!(!g.is_connected());
        assert_eq!(g.connected_components(), vec![vec![0, 1, 2], vec![3, 4]]);
        let members = [true, true, false, false, false];
        assert_eq!(g.boundary_size(&members), 1);
        assert_eq!(
            g.induced_components(&[0, 2, 3, 4]),
            vec![vec![0], vec![2], vec![3, 4]]
        );
    }

    #[test]
    fn json_roundtrip() {
        let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 3), (0, 3)]).unwrap();
        let back = Graph::from_json(&g.to_json()).unwrap();
        assert_eq!(g, back);
        let err = Graph::from_json("{oops").unwrap_err();
        match err {
            GraphError::Json(msg) => assert!(msg.contains("line 1")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
