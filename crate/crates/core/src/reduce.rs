//! Carving-guided size reduction of variable-constrained networks.
//!
//! A network whose variables all live in a few tensors carries a lot of
//! dead weight: every tensor with purely constant entries can be contracted
//! away without changing the polynomial the network computes. This module
//! performs that contraction guided by a carving decomposition of the
//! network's graph, which is what keeps the output small in a provable way.
//!
//! The shape of the argument: mark the carving leaves whose tensors
//! constrain a variable, close the marks under both-sided branching
//! ([`find_y_nodes`]), and delete the marked nodes from the carving tree.
//! With `l >= 1` marked leaves there are exactly `2l - 1` marked nodes, so
//! the remaining forest has at most `2l - 1` components. Each forest
//! component touches the rest of the tree through at most two tree edges,
//! and every tree edge cuts at most `w` graph edges (the carving width), so
//! the graph vertices under one forest component have at most `2w` boundary
//! edges and split into at most `2w` connected blocks. Contracting each
//! block to a single tensor therefore yields a network of at most
//! `4·l·(w+1)` tensors, each of rank at most `2w` (beyond the untouched
//! variable tensors), computing the same polynomial.
//!
//! [`reduce_network`] runs the pipeline and reports the measured sizes
//! against the bounds; [`reduce_subfunction`] first pins a subset of the
//! variables to constants, which is how one extracts small networks for
//! subfunctions of a larger symbolic computation.

use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

use crate::decomp::{CarvingDecomposition, CarvingNode, DecompError};
use crate::network::{NetworkError, TensorNetwork};
use crate::par;
use crate::poly::{Assignment, PolyError, VarSet};
use crate::tensor::{AlgebraicTensor, TensorError};

#[derive(Debug, Error)]
pub enum ReduceError {
    #[error("invalid network: {0:?}")]
    InvalidNetwork(Vec<String>),
    #[error("carving decomposition does not fit the network graph: {0:?}")]
    InvalidCarving(Vec<String>),
    #[error("no tensor constrains a variable; reduction needs at least one")]
    NoVariableTensors,
    #[error("kept variables are not a subset of the network's variables")]
    NotSubset,
    #[error("bad binding: {0}")]
    BadBinding(String),
    #[error("{what} is {got}, above the guaranteed bound {bound}")]
    BoundViolation {
        what: &'static str,
        got: usize,
        bound: usize,
    },
    #[error("reduction changed the network degree from {original} to {reduced}")]
    DegreeChanged { original: u32, reduced: u32 },
    #[error("reduced network is structurally invalid: {0:?}")]
    InvalidResult(Vec<String>),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Positions of the tensors with some entry constraining a variable of `y`,
/// in ascending order.
pub fn find_y_tensors(network: &TensorNetwork, y: &VarSet) -> Vec<usize> {
    network
        .tensors()
        .iter()
        .enumerate()
        .filter(|(_, t)| t.constrains(y))
        .map(|(pos, _)| pos)
        .collect()
}

/// Carving-tree nodes touched by the marked leaves: the leaves whose vertex
/// is listed in `marked_vertices`, plus every internal node with marked
/// leaves strictly inside both child subtrees. For `l >= 1` marked leaves
/// the result has exactly `2l - 1` nodes (the marked leaves and their
/// pairwise meets); for `l = 0` it is empty.
///
/// The carving must be structurally sound (as per
/// [`CarvingDecomposition::validate`]); node ids are returned ascending.
pub fn find_y_nodes(cd: &CarvingDecomposition, marked_vertices: &[usize]) -> Vec<usize> {
    let marked: BTreeSet<usize> = marked_vertices.iter().copied().collect();
    let nodes = cd.nodes();
    let mut subtree_has_mark = vec![false; nodes.len()];
    let mut out = Vec::new();
    for id in cd.post_order() {
        let (has, is_y) = match nodes[id] {
            CarvingNode::Leaf { vertex } => {
                let hit = marked.contains(&vertex);
                (hit, hit)
            }
            CarvingNode::Internal { left, right } => (
                subtree_has_mark[left] || subtree_has_mark[right],
                subtree_has_mark[left] && subtree_has_mark[right],
            ),
        };
        subtree_has_mark[id] = has;
        if is_y {
            out.push(id);
        }
    }
    out.sort_unstable();
    out
}

/// Connected components of the carving tree after deleting the nodes in
/// `removed`, each a sorted list of node ids, ordered by smallest member.
/// Removing nothing yields the whole tree as one component; removing
/// everything yields no components.
pub fn forest_components(cd: &CarvingDecomposition, removed: &[usize]) -> Vec<Vec<usize>> {
    let nodes = cd.nodes();
    let gone: BTreeSet<usize> = removed.iter().copied().collect();
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    for (id, node) in nodes.iter().enumerate() {
        if let CarvingNode::Internal { left, right } = *node {
            for child in [left, right] {
                adjacency[id].push(child);
                adjacency[child].push(id);
            }
        }
    }
    let mut seen = vec![false; nodes.len()];
    let mut components = Vec::new();
    for start in 0..nodes.len() {
        if seen[start] || gone.contains(&start) {
            continue;
        }
        let mut stack = vec![start];
        let mut component = Vec::new();
        seen[start] = true;
        while let Some(id) = stack.pop() {
            component.push(id);
            for &next in &adjacency[id] {
                if !seen[next] && !gone.contains(&next) {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        component.sort_unstable();
        components.push(component);
    }
    components
}

/// How one forest component of the carving projects onto the network graph.
#[derive(Debug, Clone)]
pub struct ComponentReport {
    /// Graph vertices at the component's leaves, ascending.
    pub vertices: Vec<usize>,
    /// Connected blocks those vertices form in the network graph, each
    /// sorted, ordered by smallest member.
    pub blocks: Vec<Vec<usize>>,
    /// Network edges with exactly one endpoint among `vertices`.
    pub boundary_edges: usize,
}

/// Projects one forest component (node ids from [`forest_components`]) onto
/// the network graph and checks the width guarantees: at most `2 * width`
/// blocks and at most `2 * width` boundary edges. Both hold whenever the
/// component came from deleting the marked nodes of a carving of width
/// `width` with at least one marked leaf; a violation signals an
/// inconsistent input.
pub fn graph_components(
    network: &TensorNetwork,
    cd: &CarvingDecomposition,
    forest_component: &[usize],
    width: usize,
) -> Result<ComponentReport, ReduceError> {
    let graph = network.build_graph()?.to_graph();
    let nodes = cd.nodes();
    let mut vertices: Vec<usize> = forest_component
        .iter()
        .filter_map(|&id| match nodes[id] {
            CarvingNode::Leaf { vertex } => Some(vertex),
            CarvingNode::Internal { .. } => None,
        })
        .collect();
    vertices.sort_unstable();
    let blocks = graph.induced_components(&vertices);
    let mut member = vec![false; graph.num_vertices()];
    for &v in &vertices {
        member[v] = true;
    }
    let boundary_edges = graph.boundary_size(&member);
    if blocks.len() > 2 * width {
        return Err(ReduceError::BoundViolation {
            what: "graph blocks under one forest component",
            got: blocks.len(),
            bound: 2 * width,
        });
    }
    if boundary_edges > 2 * width {
        return Err(ReduceError::BoundViolation {
            what: "boundary edges of one forest component",
            got: boundary_edges,
            bound: 2 * width,
        });
    }
    Ok(ComponentReport {
        vertices,
        blocks,
        boundary_edges,
    })
}

/// Sizes measured by a reduction, next to the bounds they are guaranteed
/// to satisfy.
#[derive(Debug, Clone, Serialize)]
pub struct ReduceStats {
    /// Tensors constraining a variable (`l`); these survive untouched.
    pub variable_tensors: usize,
    /// Carving width `w` of the decomposition that guided the reduction.
    pub carving_width: usize,
    pub original_size: usize,
    pub reduced_size: usize,
    /// `4 * l * (w + 1)`, the guaranteed cap on `reduced_size`.
    pub size_bound: usize,
    pub original_rank: usize,
    pub reduced_rank: usize,
    /// `max(2w, rank of the widest variable tensor)`, the guaranteed cap on
    /// `reduced_rank`; merged tensors alone stay within `2w`.
    pub rank_bound: usize,
    pub original_degree: u32,
    pub reduced_degree: u32,
    pub forest_components: usize,
    pub merged_blocks: usize,
    /// Largest number of blocks under a single forest component.
    pub max_blocks_per_component: usize,
    /// Largest boundary of a single forest component.
    pub max_component_boundary: usize,
    /// `2w`, the per-component cap on both of the above.
    pub component_bound: usize,
}

/// Contracts away every tensor that constrains no variable, guided by a
/// carving decomposition of the network's graph.
///
/// The result keeps the variable-constraining tensors verbatim and replaces
/// each connected block of constant tensors with its contraction, walking a
/// depth-first spanning tree from the block's smallest vertex so that every
/// pairwise contraction shares an index. It computes the same polynomial as
/// the input and satisfies `reduced_size <= 4·l·(w+1)` and
/// `reduced_rank <= max(2w, variable tensor ranks)` with the degree
/// unchanged; those guarantees are re-checked on the way out and reported
/// in the returned [`ReduceStats`].
///
/// A network where every tensor constrains a variable is returned as-is. A
/// network where none does is rejected with
/// [`ReduceError::NoVariableTensors`]: the size guarantee degenerates to
/// zero, and such networks are plain constants better handled by full
/// contraction.
pub fn reduce_network(
    network: &TensorNetwork,
    cd: &CarvingDecomposition,
) -> Result<(TensorNetwork, ReduceStats), ReduceError> {
    let violations = network.validate();
    if !violations.is_empty() {
        return Err(ReduceError::InvalidNetwork(violations));
    }
    let graph = network.build_graph()?.to_graph();
    let cd_violations = cd.validate(&graph);
    if !cd_violations.is_empty() {
        return Err(ReduceError::InvalidCarving(cd_violations));
    }
    let width = cd.carving_width(&graph)?;

    let y_tensors = find_y_tensors(network, network.varset());
    if y_tensors.is_empty() {
        return Err(ReduceError::NoVariableTensors);
    }
    let y_nodes = find_y_nodes(cd, &y_tensors);
    let forest = forest_components(cd, &y_nodes);

    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut max_blocks_per_component = 0;
    let mut max_component_boundary = 0;
    for component in &forest {
        let report = graph_components(network, cd, component, width)?;
        max_blocks_per_component = max_blocks_per_component.max(report.blocks.len());
        max_component_boundary = max_component_boundary.max(report.boundary_edges);
        blocks.extend(report.blocks);
    }

    let adjacency = graph.adjacency();
    let tensors = network.tensors();
    let merged = par::map_slice(&blocks, |members| {
        contract_block(tensors, &adjacency, members)
    });
    let mut reduced_tensors: Vec<AlgebraicTensor> =
        y_tensors.iter().map(|&pos| tensors[pos].clone()).collect();
    for tensor in merged {
        reduced_tensors.push(tensor?);
    }
    let reduced = TensorNetwork::new(network.varset(), reduced_tensors)?;
    let result_violations = reduced.validate();
    if !result_violations.is_empty() {
        return Err(ReduceError::InvalidResult(result_violations));
    }

    let max_y_rank = y_tensors
        .iter()
        .map(|&pos| tensors[pos].rank())
        .max()
        .unwrap_or(0);
    let stats = ReduceStats {
        variable_tensors: y_tensors.len(),
        carving_width: width,
        original_size: network.size(),
        reduced_size: reduced.size(),
        size_bound: 4 * y_tensors.len() * (width + 1),
        original_rank: network.network_rank(),
        reduced_rank: reduced.network_rank(),
        rank_bound: (2 * width).max(max_y_rank),
        original_degree: network.degree(),
        reduced_degree: reduced.degree(),
        forest_components: forest.len(),
        merged_blocks: blocks.len(),
        max_blocks_per_component,
        max_component_boundary,
        component_bound: 2 * width,
    };
    if stats.reduced_size > stats.size_bound {
        return Err(ReduceError::BoundViolation {
            what: "reduced network size",
            got: stats.reduced_size,
            bound: stats.size_bound,
        });
    }
    if stats.reduced_rank > stats.rank_bound {
        return Err(ReduceError::BoundViolation {
            what: "reduced network rank",
            got: stats.reduced_rank,
            bound: stats.rank_bound,
        });
    }
    if stats.reduced_degree != stats.original_degree {
        return Err(ReduceError::DegreeChanged {
            original: stats.original_degree,
            reduced: stats.reduced_degree,
        });
    }
    Ok((reduced, stats))
}

/// Pins every variable outside `y` to the constant `beta` prescribes, then
/// reduces the resulting network over `y` with [`reduce_network`]. The
/// substitution leaves the graph unchanged, so the same carving
/// decomposition applies. `beta` must bind exactly the dropped variables.
pub fn reduce_subfunction(
    network: &TensorNetwork,
    y: &VarSet,
    beta: &Assignment,
    cd: &CarvingDecomposition,
) -> Result<(TensorNetwork, ReduceStats), ReduceError> {
    if !y.is_subset_of(network.varset()) {
        return Err(ReduceError::NotSubset);
    }
    let dropped = network.varset().difference(y);
    for name in dropped.iter() {
        if beta.get(name).is_none() {
            return Err(ReduceError::BadBinding(format!(
                "no value for variable {name}"
            )));
        }
    }
    for (name, _) in beta.iter() {
        if y.contains(name) {
            return Err(ReduceError::BadBinding(format!(
                "variable {name} is kept symbolic, not bound"
            )));
        }
        if !network.varset().contains(name) {
            return Err(ReduceError::BadBinding(format!(
                "variable {name} is not a network variable"
            )));
        }
    }
    let pinned = network.substitute(beta, y)?;
    reduce_network(&pinned, cd)
}

/// Contracts the tensors of one block into a single tensor, walking a
/// depth-first spanning tree from the smallest vertex. Each step merges a
/// tensor adjacent to the part already merged, so a shared index always
/// exists.
fn contract_block(
    tensors: &[AlgebraicTensor],
    adjacency: &[Vec<usize>],
    members: &[usize],
) -> Result<AlgebraicTensor, TensorError> {
    let member_set: BTreeSet<usize> = members.iter().copied().collect();
    let start = members[0];
    let mut visited: BTreeSet<usize> = BTreeSet::new();
    visited.insert(start);
    let mut stack = vec![start];
    let mut merged: Option<AlgebraicTensor> = None;
    while let Some(v) = stack.pop() {
        merged = Some(match merged {
            None => tensors[v].clone(),
            Some(t) => {
                debug_assert!(
                    t.indices().iter().any(|l| tensors[v].indices().contains(l)),
                    "spanning-tree order always shares an index"
                );
                t.contract(&tensors[v])?
            }
        });
        let mut next: Vec<usize> = adjacency[v]
            .iter()
            .copied()
            .filter(|w| member_set.contains(w) && !visited.contains(w))
            .collect();
        next.sort_unstable();
        for w in next.into_iter().rev() {
            visited.insert(w);
            stack.push(w);
        }
    }
    Ok(merged.expect("blocks are never empty"))
}
