//! Seeded random instances for property tests and the verification suite.
//!
//! Everything here is driven by an explicit [`rand::Rng`]; combined with
//! [`rng`], which fixes the stream cipher and seed handling, equal seeds
//! produce byte-identical instances across runs and platforms. Generators
//! prefer structural guarantees over rejection sampling: random graphs grow
//! around a spanning tree, and random circuits end in a chain of CZ gates
//! so their graphs are always connected.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

use crate::circuit::{gates, CircuitEdge, CMatrix, InputLabel, QuantumCircuit, Vertex, VertexKind};
use crate::decomp::{CarvingDecomposition, CarvingNode};
use crate::graph::Graph;
use crate::network::TensorNetwork;
use crate::poly::{Assignment, Monomial, Polynomial, VarSet};
use crate::tensor::AlgebraicTensor;
use num_complex::Complex64;

/// The deterministic generator used throughout: ChaCha with a fixed stream
/// count, seeded portably from a single integer.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform assignment over `varset`.
pub fn random_assignment<R: Rng>(rng: &mut R, varset: &VarSet) -> Assignment {
    Assignment::from_pairs(varset.iter().map(|name| (name, rng.random_bool(0.5))))
}

/// A connected multigraph on `n >= 1` vertices: a random spanning tree plus
/// `extra_edges` additional edges (parallel edges allowed, self-loops not),
/// keeping every degree at most `max_degree` where possible. The degree cap
/// yields bounded tensor ranks when the graph becomes a network.
pub fn random_connected_graph<R: Rng>(
    rng: &mut R,
    n: usize,
    extra_edges: usize,
    max_degree: usize,
) -> Graph {
    assert!(n >= 1, "graphs here have at least one vertex");
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(n - 1 + extra_edges);
    let mut degree = vec![0usize; n];
    for v in 1..n {
        // Attach to an earlier vertex with spare degree; fall back to the
        // least-loaded one so the tree always completes.
        let candidates: Vec<usize> = (0..v).filter(|&u| degree[u] < max_degree).collect();
        let target = if candidates.is_empty() {
            (0..v).min_by_key(|&u| degree[u]).expect("v >= 1")
        } else {
            candidates[rng.random_range(0..candidates.len())]
        };
        edges.push((target, v));
        degree[target] += 1;
        degree[v] += 1;
    }
    if n >= 2 {
        for _ in 0..extra_edges {
            let open: Vec<usize> = (0..n).filter(|&u| degree[u] < max_degree).collect();
            if open.len() < 2 {
                break;
            }
            let a = open[rng.random_range(0..open.len())];
            let b = loop {
                let b = open[rng.random_range(0..open.len())];
                if b != a {
                    break b;
                }
            };
            edges.push((a.min(b), a.max(b)));
            degree[a] += 1;
            degree[b] += 1;
        }
    }
    Graph::new(n, edges).expect("endpoints in range, no self-loops")
}

/// Shape of a random tensor network.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    /// Number of tensors (graph vertices), at least 1.
    pub tensors: usize,
    /// Edges beyond the spanning tree.
    pub extra_edges: usize,
    /// Degree cap, i.e. the maximum tensor rank.
    pub max_degree: usize,
    /// Variable names for the polynomial entries.
    pub variables: Vec<String>,
    /// How many tensors carry variables; the rest have constant entries.
    /// Each such tensor is guaranteed to constrain at least one variable.
    pub variable_tensors: usize,
    /// Nonzero entries drawn per tensor (duplicates collapse, so this is an
    /// upper bound).
    pub entries_per_tensor: usize,
    /// Coefficients are Gaussian integers with components in
    /// `-coeff_range..=coeff_range`.
    pub coeff_range: i32,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            tensors: 6,
            extra_edges: 2,
            max_degree: 4,
            variables: vec!["x".to_string(), "y".to_string()],
            variable_tensors: 2,
            entries_per_tensor: 3,
            coeff_range: 3,
        }
    }
}

/// A random valid tensor network: connected sharing graph, every index in
/// exactly two tensors, sparse entries with small multilinear polynomials.
pub fn random_network<R: Rng>(rng: &mut R, config: &NetworkConfig) -> TensorNetwork {
    let varset = VarSet::new(config.variables.clone()).expect("caller supplies valid names");
    let graph = random_connected_graph(rng, config.tensors, config.extra_edges, config.max_degree);
    // Index label per edge: 1-based positions in the edge list.
    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); config.tensors];
    for (pos, &(a, b)) in graph.edges().iter().enumerate() {
        let label = (pos + 1) as u32;
        incident[a].push(label);
        incident[b].push(label);
    }
    let mut positions: Vec<usize> = (0..config.tensors).collect();
    positions.shuffle(rng);
    let variable_positions: BTreeSet<usize> = positions
        .into_iter()
        .take(config.variable_tensors.min(config.tensors))
        .collect();
    let tensors: Vec<AlgebraicTensor> = incident
        .into_iter()
        .enumerate()
        .map(|(pos, indices)| {
            let with_vars = variable_positions.contains(&pos) && !varset.is_empty();
            let rank = indices.len();
            let mut entries: BTreeMap<u64, Polynomial> = BTreeMap::new();
            let draw_code = |rng: &mut R| {
                if rank == 0 {
                    0
                } else {
                    rng.random_range(0..(1u64 << (2 * rank)))
                }
            };
            for _ in 0..config.entries_per_tensor {
                let code = draw_code(rng);
                entries.insert(
                    code,
                    random_polynomial(rng, &varset, config.coeff_range, with_vars),
                );
            }
            if with_vars {
                // One entry is overwritten with a single-term polynomial in
                // one variable, so the tensor is guaranteed to constrain it
                // regardless of how the other draws landed.
                let name = varset.name(rng.random_range(0..varset.len()));
                let term = (
                    Monomial::var(name),
                    Complex64::new(rng.random_range(1..=config.coeff_range.max(1)) as f64, 0.0),
                );
                let poly = Polynomial::from_terms(&varset, [term]).expect("name from the varset");
                entries.insert(draw_code(rng), poly);
            }
            AlgebraicTensor::from_coded(indices, &varset, entries.into_iter().collect(), false)
                .expect("codes drawn in range")
        })
        .collect();
    TensorNetwork::new(&varset, tensors).expect("tensors share the network varset")
}

/// A short multilinear polynomial with nonzero Gaussian-integer
/// coefficients: one or two terms over at most two variables each.
/// Variables appear only when `with_vars` is set.
fn random_polynomial<R: Rng>(
    rng: &mut R,
    varset: &VarSet,
    coeff_range: i32,
    with_vars: bool,
) -> Polynomial {
    let names: Vec<&str> = varset.iter().collect();
    let term_count = rng.random_range(1..=2);
    let terms = (0..term_count).map(|_| {
        let mut picked: Vec<&str> = Vec::new();
        if with_vars {
            for &name in &names {
                if picked.len() < 2 && rng.random_bool(0.4) {
                    picked.push(name);
                }
            }
        }
        let mono = Monomial::from_factors(picked.iter().map(|&n| (n, 1u32)))
            .expect("positive exponents");
        let mut component = || loop {
            let v = rng.random_range(-coeff_range..=coeff_range);
            if v != 0 {
                break v as f64;
            }
        };
        (mono, Complex64::new(component(), component()))
    });
    let terms: Vec<(Monomial, Complex64)> = terms.collect();
    Polynomial::from_terms(varset, terms).expect("variables from the varset")
}

/// A random carving decomposition of an `n`-vertex graph: leaves in
/// shuffled order, merged pairwise at random until one tree remains.
pub fn random_carving<R: Rng>(rng: &mut R, n: usize) -> CarvingDecomposition {
    assert!(n >= 1, "carvings need at least one leaf");
    let mut vertices: Vec<usize> = (0..n).collect();
    vertices.shuffle(rng);
    let mut nodes: Vec<CarvingNode> = vertices
        .into_iter()
        .map(|vertex| CarvingNode::Leaf { vertex })
        .collect();
    let mut roots: Vec<usize> = (0..n).collect();
    while roots.len() > 1 {
        let left = roots.swap_remove(rng.random_range(0..roots.len()));
        let right = roots.swap_remove(rng.random_range(0..roots.len()));
        nodes.push(CarvingNode::Internal { left, right });
        roots.push(nodes.len() - 1);
    }
    CarvingDecomposition::new(nodes, roots[0])
}

/// Shape of a random circuit.
#[derive(Debug, Clone)]
pub struct CircuitConfig {
    /// Qubit register width, at least 1.
    pub max_qubits: usize,
    /// Random gates drawn before the connecting CZ chain.
    pub max_gates: usize,
    /// Distinct variable names available to inputs (each input picks a
    /// basis state or one of these, possibly repeating).
    pub max_variables: usize,
}

impl Default for CircuitConfig {
    fn default() -> Self {
        CircuitConfig {
            max_qubits: 6,
            max_gates: 12,
            max_variables: 4,
        }
    }
}

/// A random valid circuit: inputs choose between kets and variables, gates
/// are drawn from {H, X, T, CNOT, CZ} on random wires, measurements from
/// {|0><0|, |1><1|, I, diag(p, q)}. A CZ chain across adjacent wires is
/// appended so multi-qubit circuits stay connected.
pub fn random_circuit<R: Rng>(rng: &mut R, config: &CircuitConfig) -> QuantumCircuit {
    let qubits = rng.random_range(1..=config.max_qubits.max(1));
    let gate_count = rng.random_range(0..=config.max_gates);
    let var_pool: Vec<String> = (0..config.max_variables.min(26))
        .map(|i| format!("v{i:02}"))
        .collect();

    // Inputs first, recording which pool variables are actually used.
    let mut labels: Vec<InputLabel> = Vec::with_capacity(qubits);
    let mut used: Vec<String> = Vec::new();
    for _ in 0..qubits {
        let label = if var_pool.is_empty() || rng.random_bool(0.4) {
            if rng.random_bool(0.5) {
                InputLabel::Ket0
            } else {
                InputLabel::Ket1
            }
        } else {
            let name = var_pool[rng.random_range(0..var_pool.len())].clone();
            if !used.contains(&name) {
                used.push(name.clone());
            }
            InputLabel::Var(name)
        };
        labels.push(label);
    }
    let varset = VarSet::new(used).expect("pool names are valid");

    let mut stages: Vec<(CMatrix, Vec<usize>)> = Vec::new();
    for _ in 0..gate_count {
        if qubits >= 2 && rng.random_bool(0.4) {
            let a = rng.random_range(0..qubits);
            let b = loop {
                let b = rng.random_range(0..qubits);
                if b != a {
                    break b;
                }
            };
            let matrix = if rng.random_bool(0.5) {
                gates::cnot()
            } else {
                gates::cz()
            };
            stages.push((matrix, vec![a, b]));
        } else {
            let matrix = match rng.random_range(0..3) {
                0 => gates::hadamard(),
                1 => gates::pauli_x(),
                _ => gates::t_gate(),
            };
            stages.push((matrix, vec![rng.random_range(0..qubits)]));
        }
    }
    for slot in 0..qubits.saturating_sub(1) {
        stages.push((gates::cz(), vec![slot, slot + 1]));
    }

    let measurements: Vec<CMatrix> = (0..qubits)
        .map(|_| match rng.random_range(0..4) {
            0 => gates::measure_zero(),
            1 => gates::measure_one(),
            2 => gates::measure_identity(),
            _ => {
                let p: f64 = rng.random();
                let q: f64 = rng.random();
                CMatrix::new(
                    2,
                    2,
                    vec![
                        Complex64::new(p, 0.0),
                        Complex64::ZERO,
                        Complex64::ZERO,
                        Complex64::new(q, 0.0),
                    ],
                )
                .expect("fixed shape")
            }
        })
        .collect();

    assemble_circuit(&varset, &labels, &stages, &measurements)
}

/// Wires up a register-style circuit: the given inputs, the staged gates
/// applied to their wire slots in order, then one measurement per wire.
pub fn assemble_circuit(
    varset: &VarSet,
    inputs: &[InputLabel],
    stages: &[(CMatrix, Vec<usize>)],
    measurements: &[CMatrix],
) -> QuantumCircuit {
    let qubits = inputs.len();
    assert_eq!(measurements.len(), qubits, "one measurement per wire");
    let mut vertices: Vec<Vertex> = Vec::new();
    let mut edges: Vec<CircuitEdge> = Vec::new();
    let mut next_label = 1u32;
    // Open wire per slot: (edge label, source vertex).
    let mut front: Vec<(u32, usize)> = Vec::with_capacity(qubits);
    for label in inputs {
        let id = vertices.len();
        vertices.push(Vertex {
            id,
            kind: VertexKind::Input {
                label: label.clone(),
            },
            in_ports: vec![],
            out_ports: vec![next_label],
        });
        front.push((next_label, id));
        next_label += 1;
    }
    for (matrix, slots) in stages {
        let id = vertices.len();
        let in_ports: Vec<u32> = slots.iter().map(|&s| front[s].0).collect();
        for &s in slots {
            let (label, src) = front[s];
            edges.push(CircuitEdge { id: label, src, dst: id });
            front[s] = (next_label, id);
            next_label += 1;
        }
        let out_ports: Vec<u32> = slots.iter().map(|&s| front[s].0).collect();
        vertices.push(Vertex {
            id,
            kind: VertexKind::Gate {
                matrix: matrix.clone(),
            },
            in_ports,
            out_ports,
        });
    }
    for (slot, measurement) in measurements.iter().enumerate() {
        let id = vertices.len();
        let (label, src) = front[slot];
        edges.push(CircuitEdge { id: label, src, dst: id });
        vertices.push(Vertex {
            id,
            kind: VertexKind::Output {
                measurement: measurement.clone(),
            },
            in_ports: vec![label],
            out_ports: vec![],
        });
    }
    edges.sort_by_key(|e| e.id);
    QuantumCircuit::new(varset, vertices, edges)
}

/// A random full contraction order for a valid network: repeatedly merges
/// two random groups that share an index, emitting original-position pairs
/// as accepted by contraction with an explicit order.
pub fn random_contraction_order<R: Rng>(
    rng: &mut R,
    network: &TensorNetwork,
) -> Vec<(usize, usize)> {
    let mut groups: Vec<(usize, std::collections::BTreeSet<u32>)> = network
        .tensors()
        .iter()
        .enumerate()
        .map(|(pos, t)| (pos, t.indices().iter().copied().collect()))
        .collect();
    let mut order = Vec::with_capacity(groups.len().saturating_sub(1));
    while groups.len() > 1 {
        let mut joinable: Vec<(usize, usize)> = Vec::new();
        for i in 0..groups.len() {
            for j in i + 1..groups.len() {
                if !groups[i].1.is_disjoint(&groups[j].1) {
                    joinable.push((i, j));
                }
            }
        }
        let &(i, j) = joinable
            .get(rng.random_range(0..joinable.len()))
            .expect("valid networks always have a joinable pair");
        order.push((groups[i].0, groups[j].0));
        let (right_pos, right_set) = groups.swap_remove(j);
        let left = &mut groups[i];
        // Shared labels are consumed; the rest is the symmetric difference.
        let shared: Vec<u32> = left.1.intersection(&right_set).copied().collect();
        for label in right_set {
            if !left.1.insert(label) {
                left.1.remove(&label);
            }
        }
        for label in shared {
            left.1.remove(&label);
        }
        left.0 = left.0.min(right_pos);
    }
    order
}
