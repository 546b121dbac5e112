//! Tree decompositions and carving decompositions of multigraphs.
//!
//! A tree decomposition assigns a bag of vertices to each node of a tree so
//! that every vertex appears somewhere, every edge fits inside some bag, and
//! the nodes holding any fixed vertex form a connected subtree. A carving
//! decomposition is a rooted binary tree whose leaves are in bijection with
//! the graph's vertices; its width is the largest number of edges crossing
//! the cut between any subtree's vertices and the rest.
//!
//! Besides validation and width computation this module provides a min-fill
//! heuristic for tree decompositions, a conversion that turns a tree
//! decomposition of width `t` into a carving decomposition of width at most
//! `max_degree * (t + 1)`, an exact carving-width solver for small graphs,
//! and the derivation of a pairwise contraction order from a carving.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use crate::graph::{Graph, GraphError};

/// Exact carving-width search is limited to graphs of this many vertices;
/// the subset dynamic program underneath it is exponential.
pub const MAX_EXACT_CARVING_VERTICES: usize = 10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DecompError {
    #[error("invalid decomposition: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("graph has {vertices} vertices, exact search is limited to {max}")]
    GraphTooLarge { vertices: usize, max: usize },
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("invalid decomposition JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

// ===================== tree decompositions =====================

/// A tree decomposition: `bags[i]` is the vertex bag of tree node `i`, and
/// `tree_edges` connect the nodes into a tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    bags: Vec<Vec<usize>>,
    tree_edges: Vec<(usize, usize)>,
}

impl TreeDecomposition {
    /// Bags are sorted and deduplicated; tree structure is checked by
    /// [`TreeDecomposition::validate`].
    pub fn new(bags: Vec<Vec<usize>>, tree_edges: Vec<(usize, usize)>) -> Self {
        let bags = bags
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b.dedup();
                b
            })
            .collect();
        TreeDecomposition { bags, tree_edges }
    }

    pub fn bags(&self) -> &[Vec<usize>] {
        &self.bags
    }

    pub fn tree_edges(&self) -> &[(usize, usize)] {
        &self.tree_edges
    }

    /// Largest bag size minus one.
    pub fn width(&self) -> usize {
        self.bags.iter().map(Vec::len).max().unwrap_or(0).saturating_sub(1)
    }

    /// All violations of the four tree-decomposition conditions against
    /// `graph`: the nodes form a tree, every vertex is in some bag, every
    /// edge fits in some bag, and each vertex's bags form a connected
    /// subtree.
    pub fn validate(&self, graph: &Graph) -> Vec<String> {
        let mut violations = Vec::new();
        let nodes = self.bags.len();
        if nodes == 0 {
            violations.push("decomposition has no bags".to_string());
            return violations;
        }
        for &(a, b) in &self.tree_edges {
            if a >= nodes || b >= nodes {
                violations.push(format!("tree edge ({a}, {b}) names a missing node"));
                return violations;
            }
        }
        let tree = match Graph::new(nodes, self.tree_edges.to_vec()) {
            Ok(t) => t,
            Err(e) => {
                violations.push(format!("tree edges are malformed: {e}"));
                return violations;
            }
        };
        if self.tree_edges.len() != nodes - 1 || !tree.is_connected() {
            violations.push(format!(
                "nodes do not form a tree ({} nodes, {} edges, {} components)",
                nodes,
                self.tree_edges.len(),
                tree.connected_components().len()
            ));
        }
        for bag in &self.bags {
            for &v in bag {
                if v >= graph.num_vertices() {
                    violations.push(format!("bag vertex {v} is not a graph vertex"));
                }
            }
        }
        let mut holders: Vec<Vec<usize>> = vec![Vec::new(); graph.num_vertices()];
        for (node, bag) in self.bags.iter().enumerate() {
            for &v in bag {
                if v < holders.len() {
                    holders[v].push(node);
                }
            }
        }
        for (v, nodes_with_v) in holders.iter().enumerate() {
            if nodes_with_v.is_empty() {
                violations.push(format!("vertex {v} is in no bag"));
            }
        }
        for &(a, b) in graph.edges() {
            let covered = self
                .bags
                .iter()
                .any(|bag| bag.binary_search(&a).is_ok() && bag.binary_search(&b).is_ok());
            if !covered {
                violations.push(format!("edge ({a}, {b}) fits in no bag"));
            }
        }
        // Connectedness of each vertex's occurrence set within the tree.
        for (v, nodes_with_v) in holders.iter().enumerate() {
            if nodes_with_v.len() < 2 {
                continue;
            }
            let components = tree.induced_components(nodes_with_v);
            if components.len() > 1 {
                violations.push(format!(
                    "bags containing vertex {v} form {} disconnected groups",
                    components.len()
                ));
            }
        }
        violations
    }

    pub fn to_json(&self) -> String {
        let doc = TreeDecompDoc {
            bags: self.bags.clone(),
            edges: self.tree_edges.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("decomposition serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, DecompError> {
        let doc: TreeDecompDoc = serde_json::from_str(text).map_err(|e| {
            DecompError::Json(format!("{e} (line {}, column {})", e.line(), e.column()))
        })?;
        Ok(TreeDecomposition::new(doc.bags, doc.edges))
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDecompDoc {
    bags: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

/// Builds a tree decomposition with the min-fill elimination heuristic:
/// repeatedly eliminate the vertex whose neighborhood needs the fewest fill
/// edges to become a clique (ties: smaller degree, then smaller id). The
/// result is valid for every input graph but its width is only a heuristic
/// upper bound on the treewidth.
pub fn heuristic_tree_decomposition(graph: &Graph) -> TreeDecomposition {
    let n = graph.num_vertices();
    if n == 0 {
        return TreeDecomposition::new(vec![Vec::new()], Vec::new());
    }
    // Work on the underlying simple graph: multiplicities do not affect
    // decompositions.
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for &(a, b) in graph.edges() {
        adj[a].insert(b);
        adj[b].insert(a);
    }

    let fill_in = |adj: &[BTreeSet<usize>], v: usize| -> usize {
        let neighbors: Vec<usize> = adj[v].iter().copied().collect();
        let mut missing = 0;
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                if !adj[a].contains(&b) {
                    missing += 1;
                }
            }
        }
        missing
    };

    let mut alive: BTreeSet<usize> = (0..n).collect();
    let mut bags: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut elim_pos: Vec<usize> = vec![usize::MAX; n];
    let mut elim_order: Vec<usize> = Vec::with_capacity(n);

    for step in 0..n {
        let &v = alive
            .iter()
            .min_by_key(|&&v| (fill_in(&adj, v), adj[v].len(), v))
            .expect("alive set is nonempty");
        let neighbors: Vec<usize> = adj[v].iter().copied().collect();
        let mut bag = neighbors.clone();
        bag.push(v);
        bag.sort_unstable();
        bags.push(bag);
        elim_pos[v] = step;
        elim_order.push(v);
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        for &a in &neighbors {
            adj[a].remove(&v);
        }
        adj[v].clear();
        alive.remove(&v);
    }

    // Node i holds the bag created when eliminating the i-th vertex. Connect
    // it to the node of the earliest-eliminated *later* bag member; bags with
    // no later member (last bag, isolated vertices) chain to the next node so
    // the result is a tree even on disconnected graphs.
    let mut tree_edges = Vec::with_capacity(n.saturating_sub(1));
    for (i, &v) in elim_order.iter().enumerate() {
        let successor = bags[i]
            .iter()
            .filter(|&&u| u != v)
            .map(|&u| elim_pos[u])
            .min();
        match successor {
            Some(j) => tree_edges.push((i, j)),
            None if i + 1 < n => tree_edges.push((i, i + 1)),
            None => {}
        }
    }
    TreeDecomposition::new(bags, tree_edges)
}

// ===================== carving decompositions =====================

/// One node of a carving decomposition tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CarvingNode {
    /// A leaf standing for one graph vertex.
    Leaf { vertex: usize },
    /// An internal node with exactly two children.
    Internal { left: usize, right: usize },
}

/// A carving decomposition: a rooted binary tree whose leaves are in
/// bijection with the vertices of a graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarvingDecomposition {
    nodes: Vec<CarvingNode>,
    root: usize,
}

impl CarvingDecomposition {
    pub fn new(nodes: Vec<CarvingNode>, root: usize) -> Self {
        CarvingDecomposition { nodes, root }
    }

    pub fn nodes(&self) -> &[CarvingNode] {
        &self.nodes
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// All violations against `graph`: the nodes form a rooted binary tree
    /// (every non-root has exactly one parent, everything is reachable from
    /// the root) and the leaves carry each graph vertex exactly once.
    pub fn validate(&self, graph: &Graph) -> Vec<String> {
        let mut violations = Vec::new();
        let count = self.nodes.len();
        if count == 0 {
            violations.push("carving has no nodes".to_string());
            return violations;
        }
        if self.root >= count {
            violations.push(format!("root {} is not a node", self.root));
            return violations;
        }
        let mut parents: Vec<usize> = vec![0; count];
        for (id, node) in self.nodes.iter().enumerate() {
            if let CarvingNode::Internal { left, right } = *node {
                for child in [left, right] {
                    if child >= count {
                        violations.push(format!("node {id} points at missing child {child}"));
                        return violations;
                    }
                    parents[child] += 1;
                }
                if left == right {
                    violations.push(format!("node {id} uses node {left} as both children"));
                }
            }
        }
        for (id, &p) in parents.iter().enumerate() {
            if id == self.root && p != 0 {
                violations.push(format!("root {id} has {p} parents"));
            } else if id != self.root && p != 1 {
                violations.push(format!("node {id} has {p} parents (expected 1)"));
            }
        }
        // Reachability from the root; with the parent counts above this also
        // rules out cycles.
        let mut seen = vec![false; count];
        let mut stack = vec![self.root];
        let mut leaf_vertices = Vec::new();
        while let Some(id) = stack.pop() {
            if seen[id] {
                violations.push(format!("node {id} is reached twice from the root"));
                return violations;
            }
            seen[id] = true;
            match self.nodes[id] {
                CarvingNode::Leaf { vertex } => leaf_vertices.push(vertex),
                CarvingNode::Internal { left, right } => {
                    stack.push(left);
                    stack.push(right);
                }
            }
        }
        for (id, &reached) in seen.iter().enumerate() {
            if !reached {
                violations.push(format!("node {id} is not reachable from the root"));
            }
        }
        leaf_vertices.sort_unstable();
        let expected: Vec<usize> = (0..graph.num_vertices()).collect();
        if leaf_vertices != expected {
            violations.push(format!(
                "leaves carry vertices {leaf_vertices:?}, expected each of 0..{} exactly once",
                graph.num_vertices()
            ));
        }
        violations
    }

    /// Largest number of graph edges crossing the cut between some subtree's
    /// vertex set and the rest. Validates first.
    pub fn carving_width(&self, graph: &Graph) -> Result<usize, DecompError> {
        let violations = self.validate(graph);
        if !violations.is_empty() {
            return Err(DecompError::Invalid(violations));
        }
        let mut membership: Vec<Option<Vec<bool>>> = vec![None; self.nodes.len()];
        let mut width = 0;
        for id in self.post_order() {
            let members = match self.nodes[id] {
                CarvingNode::Leaf { vertex } => {
                    let mut m = vec![false; graph.num_vertices()];
                    m[vertex] = true;
                    m
                }
                CarvingNode::Internal { left, right } => {
                    let l = membership[left].take().expect("post-order");
                    let r = membership[right].take().expect("post-order");
                    l.iter().zip(&r).map(|(a, b)| a | b).collect()
                }
            };
            width = width.max(graph.boundary_size(&members));
            membership[id] = Some(members);
        }
        Ok(width)
    }

    /// Node ids in post-order (children before parents, left before right).
    pub(crate) fn post_order(&self) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                order.push(id);
                continue;
            }
            match self.nodes[id] {
                CarvingNode::Leaf { .. } => order.push(id),
                CarvingNode::Internal { left, right } => {
                    stack.push((id, true));
                    stack.push((right, false));
                    stack.push((left, false));
                }
            }
        }
        order
    }

    /// Smallest leaf vertex in each node's subtree; used to name merged
    /// tensors by a stable representative.
    fn representatives(&self) -> Vec<usize> {
        let mut rep = vec![usize::MAX; self.nodes.len()];
        for id in self.post_order() {
            rep[id] = match self.nodes[id] {
                CarvingNode::Leaf { vertex } => vertex,
                CarvingNode::Internal { left, right } => rep[left].min(rep[right]),
            };
        }
        rep
    }

    /// A pairwise contraction order following the carving bottom-up: one
    /// pair per internal node in post-order, naming each side by the
    /// smallest leaf vertex in its subtree. Intermediate cut sizes during
    /// such a contraction match the carving's cuts, so tensor ranks stay
    /// within the carving width.
    pub fn contraction_pairs(&self) -> Vec<(usize, usize)> {
        let rep = self.representatives();
        self.post_order()
            .into_iter()
            .filter_map(|id| match self.nodes[id] {
                CarvingNode::Leaf { .. } => None,
                CarvingNode::Internal { left, right } => Some((rep[left], rep[right])),
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = CarvingDoc {
            root: self.root,
            nodes: self
                .nodes
                .iter()
                .map(|n| match *n {
                    CarvingNode::Leaf { vertex } => CarvingNodeDoc::Leaf { leaf: vertex },
                    CarvingNode::Internal { left, right } => {
                        CarvingNodeDoc::Internal { left, right }
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("decomposition serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, DecompError> {
        let doc: CarvingDoc = serde_json::from_str(text).map_err(|e| {
            DecompError::Json(format!("{e} (line {}, column {})", e.line(), e.column()))
        })?;
        Ok(CarvingDecomposition::new(
            doc.nodes
                .into_iter()
                .map(|n| match n {
                    CarvingNodeDoc::Leaf { leaf } => CarvingNode::Leaf { vertex: leaf },
                    CarvingNodeDoc::Internal { left, right } => {
                        CarvingNode::Internal { left, right }
                    }
                })
                .collect(),
            doc.root,
        ))
    }
}

#[derive(Serialize, Deserialize)]
struct CarvingDoc {
    root: usize,
    nodes: Vec<CarvingNodeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum CarvingNodeDoc {
    Leaf { leaf: usize },
    Internal { left: usize, right: usize },
}

/// Converts a tree decomposition of width `t` into a carving decomposition
/// of width at most `max_degree * (t + 1)`.
///
/// Each vertex is assigned to its topmost bag (rooting the decomposition
/// tree at node 0); working bottom-up, every decomposition node combines the
/// carvings of its children with leaves for its own vertices into a
/// left-deep chain. Every cut this creates separates some set `X` from the
/// rest such that each crossing edge has an endpoint in the node's bag, so
/// no cut exceeds the bag size times the maximum degree.
pub fn carving_from_tree_decomposition(
    graph: &Graph,
    td: &TreeDecomposition,
) -> Result<CarvingDecomposition, DecompError> {
    let violations = td.validate(graph);
    if !violations.is_empty() {
        return Err(DecompError::Invalid(violations));
    }
    let n = graph.num_vertices();
    if n == 0 {
        return Err(DecompError::EmptyGraph);
    }
    let node_count = td.bags().len();
    let tree = Graph::new(node_count, td.tree_edges().to_vec()).expect("validated tree");
    let adjacency = tree.adjacency();

    // Root the decomposition tree at node 0 and record a breadth-first
    // order; each vertex is hosted at its unique bag node closest to the
    // root.
    let mut parent: Vec<Option<usize>> = vec![None; node_count];
    let mut bfs_order = Vec::with_capacity(node_count);
    let mut seen = vec![false; node_count];
    let mut queue = std::collections::VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(u) = queue.pop_front() {
        bfs_order.push(u);
        for &w in &adjacency[u] {
            if !seen[w] {
                seen[w] = true;
                parent[w] = Some(u);
                queue.push_back(w);
            }
        }
    }
    let mut depth = vec![0usize; node_count];
    for &u in &bfs_order[1..] {
        depth[u] = depth[parent[u].expect("non-root")] + 1;
    }
    let mut host: Vec<usize> = vec![usize::MAX; n];
    for (node, bag) in td.bags().iter().enumerate() {
        for &v in bag {
            if host[v] == usize::MAX || depth[node] < depth[host[v]] {
                host[v] = node;
            }
        }
    }
    let mut hosted: Vec<Vec<usize>> = vec![Vec::new(); node_count];
    for v in 0..n {
        hosted[host[v]].push(v);
    }

    let mut nodes: Vec<CarvingNode> = Vec::with_capacity(2 * n - 1);
    // Carving subtree built for each decomposition node, bottom-up.
    let mut built: Vec<Option<usize>> = vec![None; node_count];
    for &u in bfs_order.iter().rev() {
        let mut pieces: Vec<usize> = Vec::new();
        for &v in &hosted[u] {
            nodes.push(CarvingNode::Leaf { vertex: v });
            pieces.push(nodes.len() - 1);
        }
        for &w in &adjacency[u] {
            if parent[w] == Some(u) {
                if let Some(sub) = built[w] {
                    pieces.push(sub);
                }
            }
        }
        built[u] = pieces.into_iter().reduce(|acc, piece| {
            nodes.push(CarvingNode::Internal {
                left: acc,
                right: piece,
            });
            nodes.len() - 1
        });
    }
    let root = built[0].expect("every vertex is hosted somewhere");
    Ok(CarvingDecomposition::new(nodes, root))
}

/// Exact carving width by dynamic programming over vertex subsets: the best
/// carving of a subset is the best split into two nonempty parts, each
/// carved optimally, capped below by the subset's own boundary. Limited to
/// [`MAX_EXACT_CARVING_VERTICES`] vertices.
pub fn exact_carving_width(graph: &Graph) -> Result<usize, DecompError> {
    let n = graph.num_vertices();
    if n == 0 {
        return Err(DecompError::EmptyGraph);
    }
    if n > MAX_EXACT_CARVING_VERTICES {
        return Err(DecompError::GraphTooLarge {
            vertices: n,
            max: MAX_EXACT_CARVING_VERTICES,
        });
    }
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    // Boundary size of every subset, via one pass per edge.
    let mut boundary = vec![0usize; (full as usize) + 1];
    for mask in 0..=full {
        let mut count = 0;
        for &(a, b) in graph.edges() {
            if (mask >> a & 1) != (mask >> b & 1) {
                count += 1;
            }
        }
        boundary[mask as usize] = count;
    }
    let mut best = vec![usize::MAX; (full as usize) + 1];
    let mut masks: Vec<u32> = (1..=full).collect();
    masks.sort_by_key(|m| m.count_ones());
    for mask in masks {
        if mask.count_ones() == 1 {
            best[mask as usize] = boundary[mask as usize];
            continue;
        }
        // Enumerate bipartitions once each: keep the lowest set bit on the
        // left side.
        let low = mask & mask.wrapping_neg();
        let rest = mask ^ low;
        let mut sub = rest;
        let mut cheapest = usize::MAX;
        loop {
            let left = low | sub;
            let right = mask ^ left;
            if right != 0 {
                let split = best[left as usize].max(best[right as usize]);
                cheapest = cheapest.min(split);
            }
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & rest;
        }
        best[mask as usize] = cheapest.max(boundary[mask as usize]);
    }
    Ok(best[full as usize])
}
