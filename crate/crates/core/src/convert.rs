//! Conversion of quantum circuits into algebraic tensor networks.
//!
//! Every circuit vertex becomes one tensor whose index labels are the
//! vertex's wire labels, ordered in-ports first. The network works in the
//! density-operator picture: each wire index ranges over the 2x2 basis, an
//! input injects its state `rho` as the coefficients `Tr(rho * s)`, a gate
//! `U` with `k` in-wires acts by conjugation and stores
//! `Tr((s_out_1 x ... x s_out_k)^dagger * U * (s_in_1 x ... x s_in_k) * U^dagger)`
//! at each tuple of basis elements, and an output with measurement `M`
//! closes the trace with `Tr(s^dagger * M)`. A variable input `x`
//! contributes the entries of `diag(1 - x, x)`, the only polynomials of
//! positive degree in the result. The network's graph is therefore exactly
//! the circuit's graph, and its value at any assignment equals the
//! circuit's output probability.
//!
//! Gate entries are not accumulated by literal trace products: writing each
//! basis element as `|r><c|` collapses the trace to
//! `U[row_out, row_in] * conj(U[col_out, col_in])`, so entries are
//! enumerated from pairs of nonzero matrix coefficients. The literal
//! formula survives in the tests as an independent oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{CircuitError, CMatrix, InputLabel, QuantumCircuit, Vertex, VertexKind};
use crate::network::{NetworkError, TensorNetwork};
use crate::par;
use crate::poly::{Assignment, PolyError, Polynomial, VarSet};
use crate::tensor::{AlgebraicTensor, PiElement, TensorError};
use crate::{DEFAULT_TOLERANCE, MAX_ORACLE_QUBITS};

/// Assignments checked exhaustively by [`verify_against_oracle`] before it
/// falls back to sampling.
pub const MAX_EXHAUSTIVE_ASSIGNMENTS: u64 = 1 << 16;

/// Sample count for the fallback, drawn from a fixed-seed generator so the
/// report is reproducible.
pub const ORACLE_SAMPLES: usize = 256;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConvertError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Network(#[from] NetworkError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error("network value deviates from the oracle by {deviation} at {assignment}")]
    Deviation { assignment: String, deviation: f64 },
}

/// Converts a valid circuit into its tensor network. One tensor per vertex,
/// index order (in-ports, out-ports); the result is valid, its graph is the
/// circuit's graph, its rank is at most twice the largest gate arity, and
/// its degree is 1 exactly when the circuit has variable inputs.
pub fn convert(circuit: &QuantumCircuit) -> Result<TensorNetwork, ConvertError> {
    let violations = circuit.validate();
    if !violations.is_empty() {
        return Err(CircuitError::Invalid(violations).into());
    }
    let varset = circuit.varset().clone();
    let tensors = par::map_slice(circuit.vertices(), |v| vertex_tensor(v, &varset));
    let tensors: Result<Vec<AlgebraicTensor>, ConvertError> = tensors.into_iter().collect();
    Ok(TensorNetwork::new(&varset, tensors?)?)
}

fn vertex_tensor(vertex: &Vertex, varset: &VarSet) -> Result<AlgebraicTensor, ConvertError> {
    let indices: Vec<u32> = vertex
        .in_ports
        .iter()
        .chain(&vertex.out_ports)
        .copied()
        .collect();
    match &vertex.kind {
        VertexKind::Input { label } => {
            let entries: Vec<(Vec<PiElement>, Polynomial)> = match label {
                InputLabel::Ket0 => vec![(
                    vec![PiElement::K00],
                    Polynomial::constant_re(varset, 1.0),
                )],
                InputLabel::Ket1 => vec![(
                    vec![PiElement::K11],
                    Polynomial::constant_re(varset, 1.0),
                )],
                InputLabel::Var(name) => {
                    let x = Polynomial::variable(varset, name)?;
                    let one_minus_x = Polynomial::constant_re(varset, 1.0).sub(&x)?;
                    vec![
                        (vec![PiElement::K00], one_minus_x),
                        (vec![PiElement::K11], x),
                    ]
                }
            };
            Ok(AlgebraicTensor::new(indices, varset, entries)?)
        }
        VertexKind::Gate { matrix } => Ok(gate_tensor(matrix, indices, varset)?),
        VertexKind::Output { measurement } => {
            let mut entries = Vec::new();
            for element in PiElement::ALL {
                let value = measurement.get(element.row(), element.col());
                if value != Complex64::ZERO {
                    entries.push((vec![element], Polynomial::constant(varset, value)));
                }
            }
            Ok(AlgebraicTensor::new(indices, varset, entries)?)
        }
    }
}

/// Gate tensor from the closed form: with every basis element written as
/// `|r><c|`, conjugation by `U` gives the entry
/// `U[row_out, row_in] * conj(U[col_out, col_in])` at the tuple whose
/// in-elements are `|row_in bits><col_in bits|` per port and likewise for
/// the out side. Entries are enumerated from pairs of nonzero coefficients
/// of `U`, so sparse gates stay sparse.
fn gate_tensor(
    matrix: &CMatrix,
    indices: Vec<u32>,
    varset: &VarSet,
) -> Result<AlgebraicTensor, TensorError> {
    let k = indices.len() / 2;
    let dim = 1usize << k;
    let mut support: Vec<(usize, usize, Complex64)> = Vec::new();
    for out in 0..dim {
        for inp in 0..dim {
            let value = matrix.get(out, inp);
            if value != Complex64::ZERO {
                support.push((out, inp, value));
            }
        }
    }
    let mut entries: Vec<(u64, Polynomial)> = Vec::new();
    for &(row_out, row_in, row_coeff) in &support {
        for &(col_out, col_in, col_coeff) in &support {
            let value = row_coeff * col_coeff.conj();
            // Port p of the gate is the (k-1-p)-th bit of each code;
            // tensor position p is the in-port, position k+p the out-port.
            let mut code = 0u64;
            for p in 0..k {
                let shift = k - 1 - p;
                let in_element =
                    (((row_in >> shift) & 1) << 1 | ((col_in >> shift) & 1)) as u64;
                let out_element =
                    (((row_out >> shift) & 1) << 1 | ((col_out >> shift) & 1)) as u64;
                code |= in_element << (2 * p);
                code |= out_element << (2 * (k + p));
            }
            entries.push((code, Polynomial::constant(varset, value)));
        }
    }
    AlgebraicTensor::from_coded(indices, varset, entries, false)
}

/// Outcome of cross-checking a converted network against the state-vector
/// oracle.
#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    /// Number of assignments compared.
    pub checked: usize,
    /// True when the variable count forced random sampling instead of
    /// exhaustive enumeration.
    pub sampled: bool,
    /// Largest |network value - circuit probability| seen.
    pub max_deviation: f64,
    /// Assignment attaining the maximum, rendered as text.
    pub worst_assignment: String,
}

/// Compares the converted network's value with the circuit's output
/// probability on every assignment (or a fixed-seed sample when there are
/// more than 2^16), failing on any deviation beyond `tolerance`.
pub fn verify_against_oracle(
    circuit: &QuantumCircuit,
    tolerance: f64,
) -> Result<OracleReport, ConvertError> {
    let violations = circuit.validate();
    if !violations.is_empty() {
        return Err(CircuitError::Invalid(violations).into());
    }
    if circuit.num_qubits() > MAX_ORACLE_QUBITS {
        return Err(CircuitError::TooManyQubits {
            qubits: circuit.num_qubits(),
            max: MAX_ORACLE_QUBITS,
        }
        .into());
    }
    let network = convert(circuit)?;
    let varset = circuit.varset();
    let n = varset.len();
    let (assignments, sampled) = if (n as u32) < 64 && (1u64 << n) <= MAX_EXHAUSTIVE_ASSIGNMENTS {
        (Assignment::enumerate(varset), false)
    } else {
        let mut rng = crate::gen::rng(7);
        let samples = (0..ORACLE_SAMPLES)
            .map(|_| crate::gen::random_assignment(&mut rng, varset))
            .collect();
        (samples, true)
    };
    let deviations = par::map_slice(&assignments, |alpha| -> Result<f64, ConvertError> {
        let via_network = network.value(alpha)?;
        let via_oracle = circuit.output_probability(alpha)?;
        Ok((via_network - via_oracle).abs())
    });
    let mut max_deviation = 0.0;
    let mut worst = String::from("(none)");
    for (alpha, deviation) in assignments.iter().zip(deviations) {
        let deviation = deviation?;
        if deviation >= max_deviation {
            max_deviation = deviation;
            worst = alpha.to_string();
        }
    }
    if max_deviation > tolerance {
        return Err(ConvertError::Deviation {
            assignment: worst,
            deviation: max_deviation,
        });
    }
    Ok(OracleReport {
        checked: assignments.len(),
        sampled,
        max_deviation,
        worst_assignment: worst,
    })
}

/// Convenience wrapper using the crate-wide default tolerance.
pub fn verify_against_oracle_default(
    circuit: &QuantumCircuit,
) -> Result<OracleReport, ConvertError> {
    verify_against_oracle(circuit, DEFAULT_TOLERANCE)
}
