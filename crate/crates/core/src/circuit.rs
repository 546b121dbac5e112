//! Quantum circuits as DAGs with labeled wires, plus a dense state-vector
//! oracle for output probabilities.
//!
//! A circuit has input vertices (a basis state or a Boolean variable, one
//! outgoing wire), gate vertices (a `2^k x 2^k` unitary with `k` incoming
//! and `k` outgoing wires), and output vertices (one incoming wire and a
//! 2x2 measurement element `M` with both `M` and `I - M` positive
//! semidefinite). Wires are edges carrying 1-based labels that form a
//! bijection onto `{1..#edges}`; those labels double as tensor index labels
//! after conversion to a network.
//!
//! Wire-to-qubit correspondence is fixed by port order: position `p` of a
//! gate's `in_ports` list is qubit `p` of its unitary, in big-endian
//! tensor-product order (port 0 is the most significant bit). The same
//! convention orders the whole register: the input vertex with the i-th
//! smallest id feeds qubit slot `i`, and slot 0 is the most significant bit
//! of the state index.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::distinct::TruthTable;
use crate::par;
use crate::poly::{Assignment, PolyError, VarSet};
use crate::{DEFAULT_TOLERANCE, GAP_EPS, MAX_ORACLE_QUBITS};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("invalid circuit: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("circuit has {qubits} qubits, the dense oracle is limited to {max}")]
    TooManyQubits { qubits: usize, max: usize },
    #[error("assignment is missing a value for variable {0:?}")]
    MissingAssignment(String),
    #[error("probability at {assignment} is {probability}, within the ambiguity gap around 1/2")]
    AmbiguousThreshold { assignment: String, probability: f64 },
    #[error("bad gate order: {0}")]
    BadGateOrder(String),
    #[error("simulated probability {value} is outside [0, 1] beyond tolerance")]
    ProbabilityOutOfRange { value: f64 },
    #[error("truth table variable set differs from the circuit's")]
    VarSetMismatch,
    #[error("matrix error: {0}")]
    Matrix(String),
    #[error("invalid circuit JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Table(#[from] crate::distinct::DistinctError),
}

// ===================== complex matrices =====================

/// A dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, CircuitError> {
        if data.len() != rows * cols {
            return Err(CircuitError::Matrix(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(CircuitError::Matrix("matrix entry is not finite".to_string()));
        }
        Ok(CMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, CircuitError> {
        let height = rows.len();
        let width = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != width) {
            return Err(CircuitError::Matrix("rows have differing lengths".to_string()));
        }
        CMatrix::new(height, width, rows.into_iter().flatten().collect())
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::ZERO; n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::ONE;
        }
        CMatrix { rows: n, cols: n, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.data[r * self.cols + c]
    }

    pub fn mul(&self, other: &CMatrix) -> Result<CMatrix, CircuitError> {
        if self.cols != other.rows {
            return Err(CircuitError::Matrix(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut data = vec![Complex64::ZERO; self.rows * other.cols];
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == Complex64::ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    data[r * other.cols + c] += a * other.get(k, c);
                }
            }
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: other.cols,
            data,
        })
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> CMatrix {
        let mut data = vec![Complex64::ZERO; self.data.len()];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.get(r, c).conj();
            }
        }
        CMatrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    /// Kronecker product; `self` supplies the most significant block.
    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut data = vec![Complex64::ZERO; rows * cols];
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        data[(r1 * other.rows + r2) * cols + (c1 * other.cols + c2)] =
                            a * other.get(r2, c2);
                    }
                }
            }
        }
        CMatrix { rows, cols, data }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    /// Square with `U * U^dagger = I` entrywise within `tol`.
    pub fn is_unitary(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let product = self.mul(&self.dagger()).expect("square");
        let identity = CMatrix::identity(self.rows);
        product
            .data
            .iter()
            .zip(&identity.data)
            .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// A valid single-qubit measurement element: 2x2, Hermitian, and both
    /// `M` and `I - M` positive semidefinite (within `tol`).
    pub fn is_measurement_element(&self, tol: f64) -> bool {
        if self.rows != 2 || self.cols != 2 {
            return false;
        }
        let hermitian = (self.get(0, 1) - self.get(1, 0).conj()).norm() <= tol
            && self.get(0, 0).im.abs() <= tol
            && self.get(1, 1).im.abs() <= tol;
        if !hermitian {
            return false;
        }
        // A Hermitian 2x2 matrix is PSD exactly when its trace and
        // determinant are nonnegative.
        let psd = |m: &CMatrix| {
            let trace = (m.get(0, 0) + m.get(1, 1)).re;
            let det = (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).re;
            trace >= -tol && det >= -tol
        };
        let mut complement = CMatrix::identity(2);
        for i in 0..4 {
            complement.data[i] -= self.data[i];
        }
        psd(self) && psd(&complement)
    }
}

// ===================== circuit structure =====================

/// Label of an input vertex: a fixed basis state or a Boolean variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InputLabel {
    Ket0,
    Ket1,
    Var(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum VertexKind {
    Input { label: InputLabel },
    Gate { matrix: CMatrix },
    Output { measurement: CMatrix },
}

/// One circuit vertex. Ports are ordered lists of edge labels: position `p`
/// of `in_ports` and of `out_ports` refer to the same wire slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub id: usize,
    pub kind: VertexKind,
    pub in_ports: Vec<u32>,
    pub out_ports: Vec<u32>,
}

/// A wire, identified by its 1-based label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CircuitEdge {
    pub id: u32,
    pub src: usize,
    pub dst: usize,
}

/// A quantum circuit DAG over a set of Boolean input variables.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumCircuit {
    varset: VarSet,
    vertices: Vec<Vertex>,
    edges: Vec<CircuitEdge>,
}

impl QuantumCircuit {
    /// Stores the parts as given; structural and numerical conditions are
    /// checked by [`QuantumCircuit::validate`].
    pub fn new(varset: &VarSet, vertices: Vec<Vertex>, edges: Vec<CircuitEdge>) -> Self {
        QuantumCircuit {
            varset: varset.clone(),
            vertices,
            edges,
        }
    }

    pub fn varset(&self) -> &VarSet {
        &self.varset
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[CircuitEdge] {
        &self.edges
    }

    /// Input vertex count, i.e. the width of the qubit register.
    pub fn num_qubits(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| matches!(v.kind, VertexKind::Input { .. }))
            .count()
    }

    /// Largest gate arity (in wires).
    pub fn max_gate_arity(&self) -> usize {
        self.vertices
            .iter()
            .filter(|v| matches!(v.kind, VertexKind::Gate { .. }))
            .map(|v| v.in_ports.len())
            .max()
            .unwrap_or(0)
    }

    /// All structural and numerical violations. Empty exactly when the
    /// circuit is valid: positional ids, bijective 1-based edge labels,
    /// per-kind port shapes, ports consistent with edge endpoints, acyclic,
    /// unitary gates, measurement elements well-formed, variables declared,
    /// and a connected underlying graph.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.vertices.is_empty() {
            violations.push("circuit has no vertices".to_string());
            return violations;
        }
        for (pos, v) in self.vertices.iter().enumerate() {
            if v.id != pos {
                violations.push(format!("vertex at position {pos} has id {}", v.id));
            }
        }
        if !violations.is_empty() {
            return violations;
        }
        let vertex_count = self.vertices.len();
        let edge_count = self.edges.len();

        // Edge labels must hit 1..=edge_count exactly once each.
        let mut by_label: BTreeMap<u32, &CircuitEdge> = BTreeMap::new();
        for e in &self.edges {
            if e.id == 0 || e.id as usize > edge_count {
                violations.push(format!(
                    "edge label {} is outside 1..={edge_count}",
                    e.id
                ));
            } else if by_label.insert(e.id, e).is_some() {
                violations.push(format!("edge label {} is used twice", e.id));
            }
            if e.src >= vertex_count || e.dst >= vertex_count {
                violations.push(format!(
                    "edge {} connects missing vertices ({} -> {})",
                    e.id, e.src, e.dst
                ));
            }
        }
        if !violations.is_empty() {
            return violations;
        }

        // Port shapes per vertex kind, plus numeric label conditions.
        for v in &self.vertices {
            match &v.kind {
                VertexKind::Input { label } => {
                    if !v.in_ports.is_empty() || v.out_ports.len() != 1 {
                        violations.push(format!(
                            "input {} must have 0 in-ports and 1 out-port, has {} and {}",
                            v.id,
                            v.in_ports.len(),
                            v.out_ports.len()
                        ));
                    }
                    if let InputLabel::Var(name) = label {
                        if self.varset.position(name).is_none() {
                            violations.push(format!(
                                "input {} uses undeclared variable {name:?}",
                                v.id
                            ));
                        }
                    }
                }
                VertexKind::Gate { matrix } => {
                    let k = v.in_ports.len();
                    if k == 0 || v.out_ports.len() != k {
                        violations.push(format!(
                            "gate {} must have matching nonzero port counts, has {} in and {} out",
                            v.id,
                            k,
                            v.out_ports.len()
                        ));
                        continue;
                    }
                    let dim = 1usize << k;
                    if matrix.rows() != dim || matrix.cols() != dim {
                        violations.push(format!(
                            "gate {} on {k} wires needs a {dim}x{dim} matrix, has {}x{}",
                            v.id,
                            matrix.rows(),
                            matrix.cols()
                        ));
                    } else if !matrix.is_unitary(DEFAULT_TOLERANCE) {
                        violations.push(format!("gate {} matrix is not unitary", v.id));
                    }
                }
                VertexKind::Output { measurement } => {
                    if v.in_ports.len() != 1 || !v.out_ports.is_empty() {
                        violations.push(format!(
                            "output {} must have 1 in-port and 0 out-ports, has {} and {}",
                            v.id,
                            v.in_ports.len(),
                            v.out_ports.len()
                        ));
                    }
                    if !measurement.is_measurement_element(DEFAULT_TOLERANCE) {
                        violations.push(format!(
                            "output {} measurement must be 2x2 with both M and I-M positive semidefinite",
                            v.id
                        ));
                    }
                }
            }
        }

        // Every edge appears exactly once among out-ports (at its source)
        // and once among in-ports (at its destination).
        let mut out_seen: BTreeMap<u32, usize> = BTreeMap::new();
        let mut in_seen: BTreeMap<u32, usize> = BTreeMap::new();
        for v in &self.vertices {
            for &e in &v.out_ports {
                match by_label.get(&e) {
                    None => violations.push(format!(
                        "vertex {} lists unknown edge {e} as an out-port",
                        v.id
                    )),
                    Some(edge) if edge.src != v.id => violations.push(format!(
                        "edge {e} starts at vertex {}, not at vertex {}",
                        edge.src, v.id
                    )),
                    Some(_) => {
                        if out_seen.insert(e, v.id).is_some() {
                            violations.push(format!("edge {e} is an out-port twice"));
                        }
                    }
                }
            }
            for &e in &v.in_ports {
                match by_label.get(&e) {
                    None => violations.push(format!(
                        "vertex {} lists unknown edge {e} as an in-port",
                        v.id
                    )),
                    Some(edge) if edge.dst != v.id => violations.push(format!(
                        "edge {e} ends at vertex {}, not at vertex {}",
                        edge.dst, v.id
                    )),
                    Some(_) => {
                        if in_seen.insert(e, v.id).is_some() {
                            violations.push(format!("edge {e} is an in-port twice"));
                        }
                    }
                }
            }
        }
        for e in &self.edges {
            if !out_seen.contains_key(&e.id) {
                violations.push(format!("edge {} is missing from its source's out-ports", e.id));
            }
            if !in_seen.contains_key(&e.id) {
                violations.push(format!(
                    "edge {} is missing from its destination's in-ports",
                    e.id
                ));
            }
        }

        if self.topological_order().is_none() {
            violations.push("circuit contains a directed cycle".to_string());
        }

        if self.num_qubits() == 0 {
            violations.push("circuit has no input vertices".to_string());
        }

        if violations.is_empty() {
            // The conversion to a tensor network requires a connected
            // circuit graph, so connectivity is part of validity here.
            let graph = crate::graph::Graph::new(
                vertex_count,
                self.edges.iter().map(|e| (e.src, e.dst)).collect(),
            )
            .expect("endpoints checked");
            if !graph.is_connected() {
                violations.push("circuit graph is disconnected".to_string());
            }
        }
        violations
    }

    /// Vertex ids in topological order (Kahn's algorithm, smallest id
    /// first), or `None` if the circuit has a directed cycle.
    fn topological_order(&self) -> Option<Vec<usize>> {
        let n = self.vertices.len();
        let mut indegree = vec![0usize; n];
        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for e in &self.edges {
            if e.src < n && e.dst < n {
                indegree[e.dst] += 1;
                out[e.src].push(e.dst);
            }
        }
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&v) = ready.iter().next() {
            ready.remove(&v);
            order.push(v);
            for &w in &out[v] {
                indegree[w] -= 1;
                if indegree[w] == 0 {
                    ready.insert(w);
                }
            }
        }
        (order.len() == n).then_some(order)
    }

    /// Replaces every variable input by the basis state `alpha` assigns to
    /// it; the result has no variables and identical structure.
    pub fn bind(&self, alpha: &Assignment) -> Result<QuantumCircuit, CircuitError> {
        for name in self.varset.iter() {
            if alpha.get(name).is_none() {
                return Err(CircuitError::MissingAssignment(name.to_string()));
            }
        }
        let vertices = self
            .vertices
            .iter()
            .map(|v| {
                let kind = match &v.kind {
                    VertexKind::Input {
                        label: InputLabel::Var(name),
                    } => VertexKind::Input {
                        label: if alpha.get(name).expect("checked total") {
                            InputLabel::Ket1
                        } else {
                            InputLabel::Ket0
                        },
                    },
                    other => other.clone(),
                };
                Vertex { kind, ..v.clone() }
            })
            .collect();
        Ok(QuantumCircuit {
            varset: VarSet::empty(),
            vertices,
            edges: self.edges.clone(),
        })
    }

    /// Qubit slot carried by each edge (indexed by edge label): inputs in
    /// id order feed slots `0..q`, and gates pass slot `p` of their inputs
    /// to slot `p` of their outputs. Requires a valid circuit.
    fn wire_slots(&self, order: &[usize]) -> Vec<usize> {
        let mut slot_of_edge = vec![usize::MAX; self.edges.len() + 1];
        let mut next_slot = 0;
        for &id in order {
            let v = &self.vertices[id];
            match v.kind {
                VertexKind::Input { .. } => {
                    slot_of_edge[v.out_ports[0] as usize] = next_slot;
                    next_slot += 1;
                }
                VertexKind::Gate { .. } => {
                    for (p, &out) in v.out_ports.iter().enumerate() {
                        slot_of_edge[out as usize] = slot_of_edge[v.in_ports[p] as usize];
                    }
                }
                VertexKind::Output { .. } => {}
            }
        }
        slot_of_edge
    }

    /// Output probability under the dense state-vector oracle, applying
    /// gates in ascending-id topological order.
    pub fn output_probability(&self, alpha: &Assignment) -> Result<f64, CircuitError> {
        let order = self.simulation_checks(alpha)?;
        let gates: Vec<usize> = order
            .iter()
            .copied()
            .filter(|&id| matches!(self.vertices[id].kind, VertexKind::Gate { .. }))
            .collect();
        self.simulate(alpha, &order, &gates)
    }

    /// Output probability with an explicit gate application order, which
    /// must list every gate exactly once and respect wire precedence.
    pub fn output_probability_with_gate_order(
        &self,
        alpha: &Assignment,
        gate_order: &[usize],
    ) -> Result<f64, CircuitError> {
        let order = self.simulation_checks(alpha)?;
        let mut expected: Vec<usize> = (0..self.vertices.len())
            .filter(|&id| matches!(self.vertices[id].kind, VertexKind::Gate { .. }))
            .collect();
        let mut given = gate_order.to_vec();
        given.sort_unstable();
        expected.sort_unstable();
        if given != expected {
            return Err(CircuitError::BadGateOrder(format!(
                "order must list every gate exactly once, expected {expected:?}"
            )));
        }
        let mut position = vec![usize::MAX; self.vertices.len()];
        for (i, &id) in gate_order.iter().enumerate() {
            position[id] = i;
        }
        for e in &self.edges {
            if position[e.src] != usize::MAX
                && position[e.dst] != usize::MAX
                && position[e.src] >= position[e.dst]
            {
                return Err(CircuitError::BadGateOrder(format!(
                    "gate {} must be applied before gate {} (edge {})",
                    e.src, e.dst, e.id
                )));
            }
        }
        self.simulate(alpha, &order, gate_order)
    }

    fn simulation_checks(&self, alpha: &Assignment) -> Result<Vec<usize>, CircuitError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(CircuitError::Invalid(violations));
        }
        let qubits = self.num_qubits();
        if qubits > MAX_ORACLE_QUBITS {
            return Err(CircuitError::TooManyQubits {
                qubits,
                max: MAX_ORACLE_QUBITS,
            });
        }
        for name in self.varset.iter() {
            if alpha.get(name).is_none() {
                return Err(CircuitError::MissingAssignment(name.to_string()));
            }
        }
        Ok(self.topological_order().expect("validated"))
    }

    /// Dense simulation: prepare the register, apply gates, then apply the
    /// tensor product of output measurements and take the inner product
    /// with the pre-measurement state.
    fn simulate(
        &self,
        alpha: &Assignment,
        topo: &[usize],
        gate_order: &[usize],
    ) -> Result<f64, CircuitError> {
        let qubits = self.num_qubits();
        let slot_of_edge = self.wire_slots(topo);
        let dim = 1usize << qubits;

        // Initial basis state: inputs in id order, slot 0 most significant.
        let mut index = 0usize;
        let mut slot = 0;
        for v in &self.vertices {
            if let VertexKind::Input { label } = &v.kind {
                let bit = match label {
                    InputLabel::Ket0 => false,
                    InputLabel::Ket1 => true,
                    InputLabel::Var(name) => alpha.get(name).expect("checked total"),
                };
                if bit {
                    index |= 1 << (qubits - 1 - slot);
                }
                slot += 1;
            }
        }
        let mut state = vec![Complex64::ZERO; dim];
        state[index] = Complex64::ONE;

        for &id in gate_order {
            let v = &self.vertices[id];
            let VertexKind::Gate { matrix } = &v.kind else {
                return Err(CircuitError::BadGateOrder(format!(
                    "vertex {id} is not a gate"
                )));
            };
            let slots: Vec<usize> = v
                .in_ports
                .iter()
                .map(|&e| slot_of_edge[e as usize])
                .collect();
            state = apply_matrix(&state, qubits, matrix, &slots);
            debug_assert!(
                (state.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt() - 1.0).abs() <= 1e-7,
                "state norm drifted after gate {id}"
            );
        }

        let mut measured = state.clone();
        for v in &self.vertices {
            if let VertexKind::Output { measurement } = &v.kind {
                let s = slot_of_edge[v.in_ports[0] as usize];
                measured = apply_matrix(&measured, qubits, measurement, &[s]);
            }
        }
        let probability: f64 = state
            .iter()
            .zip(&measured)
            .map(|(a, b)| (a.conj() * b).re)
            .sum();
        if !(-DEFAULT_TOLERANCE..=1.0 + DEFAULT_TOLERANCE).contains(&probability) {
            return Err(CircuitError::ProbabilityOutOfRange { value: probability });
        }
        Ok(probability.clamp(0.0, 1.0))
    }

    /// True when the circuit computes `f`: on every assignment the output
    /// probability is on the side of 1/2 that `f` prescribes; probabilities
    /// within [`GAP_EPS`](crate::GAP_EPS) of 1/2 are ambiguous errors.
    pub fn computes_function(&self, f: &TruthTable) -> Result<bool, CircuitError> {
        if f.varset() != &self.varset {
            return Err(CircuitError::VarSetMismatch);
        }
        let assignments = Assignment::enumerate(&self.varset);
        let results = par::map_slice(&assignments, |alpha| self.output_probability(alpha));
        for (alpha, result) in assignments.iter().zip(results) {
            let probability = result?;
            if (probability - 0.5).abs() <= GAP_EPS {
                return Err(CircuitError::AmbiguousThreshold {
                    assignment: alpha.to_string(),
                    probability,
                });
            }
            if (probability > 0.5) != f.value(alpha)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    // ---------- JSON ----------

    pub fn to_json(&self) -> String {
        let doc = CircuitDoc {
            variables: self.varset.iter().map(str::to_string).collect(),
            vertices: self
                .vertices
                .iter()
                .map(|v| {
                    let (kind, label) = match &v.kind {
                        VertexKind::Input { label } => (
                            "input",
                            LabelDoc::Text(match label {
                                InputLabel::Ket0 => "ket0".to_string(),
                                InputLabel::Ket1 => "ket1".to_string(),
                                InputLabel::Var(name) => name.clone(),
                            }),
                        ),
                        VertexKind::Gate { matrix } => ("gate", LabelDoc::Matrix(matrix_doc(matrix))),
                        VertexKind::Output { measurement } => {
                            ("output", LabelDoc::Matrix(matrix_doc(measurement)))
                        }
                    };
                    VertexDoc {
                        id: v.id,
                        kind: kind.to_string(),
                        label,
                        in_ports: v.in_ports.clone(),
                        out_ports: v.out_ports.clone(),
                    }
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| EdgeDoc {
                    id: e.id,
                    src: e.src,
                    dst: e.dst,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("circuit serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, CircuitError> {
        let doc: CircuitDoc = serde_json::from_str(text).map_err(|e| {
            CircuitError::Json(format!("{e} (line {}, column {})", e.line(), e.column()))
        })?;
        let varset = VarSet::new(doc.variables)?;
        let mut vertices = Vec::with_capacity(doc.vertices.len());
        for v in doc.vertices {
            let kind = match (v.kind.as_str(), v.label) {
                ("input", LabelDoc::Text(text)) => VertexKind::Input {
                    label: match text.as_str() {
                        "ket0" => InputLabel::Ket0,
                        "ket1" => InputLabel::Ket1,
                        _ => InputLabel::Var(text),
                    },
                },
                ("gate", LabelDoc::Matrix(m)) => VertexKind::Gate {
                    matrix: matrix_from_doc(m)?,
                },
                ("output", LabelDoc::Matrix(m)) => VertexKind::Output {
                    measurement: matrix_from_doc(m)?,
                },
                (kind, _) => {
                    return Err(CircuitError::Json(format!(
                        "vertex {} has kind {kind:?} with a mismatched label",
                        v.id
                    )))
                }
            };
            vertices.push(Vertex {
                id: v.id,
                kind,
                in_ports: v.in_ports,
                out_ports: v.out_ports,
            });
        }
        let edges = doc
            .edges
            .into_iter()
            .map(|e| CircuitEdge {
                id: e.id,
                src: e.src,
                dst: e.dst,
            })
            .collect();
        Ok(QuantumCircuit::new(&varset, vertices, edges))
    }
}

/// Applies a `2^k x 2^k` matrix to the listed qubit slots of a state vector
/// (port 0 of the matrix acts on `slots[0]`, the most significant of the
/// block). Works for non-unitary matrices too, which is how measurement
/// elements are applied.
fn apply_matrix(state: &[Complex64], qubits: usize, matrix: &CMatrix, slots: &[usize]) -> Vec<Complex64> {
    let k = slots.len();
    let block = 1usize << k;
    let shifts: Vec<usize> = slots.iter().map(|&s| qubits - 1 - s).collect();
    let mut next = vec![Complex64::ZERO; state.len()];
    for (i, amp) in next.iter_mut().enumerate() {
        let mut local = 0usize;
        let mut base = i;
        for (p, &shift) in shifts.iter().enumerate() {
            local |= ((i >> shift) & 1) << (k - 1 - p);
            base &= !(1 << shift);
        }
        let mut total = Complex64::ZERO;
        for col in 0..block {
            let coeff = matrix.get(local, col);
            if coeff == Complex64::ZERO {
                continue;
            }
            let mut j = base;
            for (p, &shift) in shifts.iter().enumerate() {
                j |= ((col >> (k - 1 - p)) & 1) << shift;
            }
            total += coeff * state[j];
        }
        *amp = total;
    }
    next
}

fn matrix_doc(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m.get(r, c);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

fn matrix_from_doc(doc: Vec<Vec<[f64; 2]>>) -> Result<CMatrix, CircuitError> {
    CMatrix::from_rows(
        doc.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|[re, im]| Complex64::new(re, im))
                    .collect()
            })
            .collect(),
    )
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    variables: Vec<String>,
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
struct VertexDoc {
    id: usize,
    kind: String,
    label: LabelDoc,
    in_ports: Vec<u32>,
    out_ports: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum LabelDoc {
    Text(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

#[derive(Serialize, Deserialize)]
struct EdgeDoc {
    id: u32,
    src: usize,
    dst: usize,
}

// ===================== standard gates =====================

/// The usual small gate set and measurement elements.
pub mod gates {
    use super::CMatrix;
    use num_complex::Complex64;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn hadamard() -> CMatrix {
        let h = FRAC_1_SQRT_2;
        CMatrix::new(2, 2, vec![c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]).expect("fixed shape")
    }

    pub fn pauli_x() -> CMatrix {
        CMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        )
        .expect("fixed shape")
    }

    /// The T gate: phase `exp(i*pi/4)` on the |1> component.
    pub fn t_gate() -> CMatrix {
        let phase = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        CMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), phase],
        )
        .expect("fixed shape")
    }

    /// Controlled NOT; the control is port 0 (the most significant bit).
    pub fn cnot() -> CMatrix {
        let rows = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, 0.0, 1.0, 0.0],
        ];
        CMatrix::new(
            4,
            4,
            rows.iter().flatten().map(|&x| c(x, 0.0)).collect(),
        )
        .expect("fixed shape")
    }

    /// Controlled Z; symmetric in its two ports.
    pub fn cz() -> CMatrix {
        let rows = [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 0.0, -1.0],
        ];
        CMatrix::new(
            4,
            4,
            rows.iter().flatten().map(|&x| c(x, 0.0)).collect(),
        )
        .expect("fixed shape")
    }

    /// Measurement element |0><0|.
    pub fn measure_zero() -> CMatrix {
        CMatrix::new(
            2,
            2,
            vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)],
        )
        .expect("fixed shape")
    }

    /// Measurement element |1><1|.
    pub fn measure_one() -> CMatrix {
        CMatrix::new(
            2,
            2,
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)],
        )
        .expect("fixed shape")
    }

    /// The trivial measurement element `I`, accepting everything.
    pub fn measure_identity() -> CMatrix {
        CMatrix::identity(2)
    }
}
