//! Tensor networks: collections of algebraic tensors in which every index
//! label occurs in exactly two tensors.
//!
//! The associated multigraph has one vertex per tensor and one edge per
//! index label; validity additionally requires that graph to be connected.
//! Contracting all tensors pairwise (in any order) yields a rank-0 tensor
//! whose single polynomial entry is independent of the order taken; the
//! network's value at an assignment is the magnitude of that polynomial's
//! evaluation. A network computes a Boolean function when its value clears
//! 1/2 from the correct side on every assignment.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::distinct::{DistinctError, TruthTable};
use crate::graph::Graph;
use crate::par;
use crate::poly::{Assignment, PolyError, Polynomial, VarSet};
use crate::tensor::{
    contract_entries, AlgebraicTensor, ContractValue, IndexLabel, PiElement, TensorError,
};
use crate::GAP_EPS;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum NetworkError {
    #[error("invalid network: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("tensor variable set differs from the network's")]
    VarSetMismatch,
    #[error("assignment is missing a value for variable {0:?}")]
    MissingAssignment(String),
    #[error("value at {assignment} is {value}, within the ambiguity gap around 1/2")]
    AmbiguousThreshold { assignment: String, value: f64 },
    #[error("contraction order step {step}: {details}")]
    BadOrder { step: usize, details: String },
    #[error("tensors {i} and {j} share no index")]
    NotContractible { i: usize, j: usize },
    #[error("tensor position {index} out of bounds for network of size {size}")]
    OutOfBounds { index: usize, size: usize },
    #[error("invalid network JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Table(#[from] DistinctError),
}

// ===================== network graph =====================

/// The multigraph of a network: vertex per tensor, edge per index label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkGraph {
    vertex_count: usize,
    /// (label, endpoint, endpoint), sorted by label.
    edges: Vec<(IndexLabel, usize, usize)>,
}

impl NetworkGraph {
    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[(IndexLabel, usize, usize)] {
        &self.edges
    }

    /// Forgets edge labels, keeping the multigraph.
    pub fn to_graph(&self) -> Graph {
        Graph::new(
            self.vertex_count,
            self.edges.iter().map(|&(_, a, b)| (a, b)).collect(),
        )
        .expect("network graph endpoints are tensor positions")
    }
}

// ===================== tensor networks =====================

/// A collection of algebraic tensors over a common variable set.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorNetwork {
    varset: VarSet,
    tensors: Vec<AlgebraicTensor>,
}

impl TensorNetwork {
    /// Wraps tensors into a network. Structural validity (index occurrence
    /// counts, connectivity) is checked by [`TensorNetwork::validate`], not
    /// here, so that diagnostics can be collected; varset consistency is
    /// enforced eagerly.
    pub fn new(varset: &VarSet, tensors: Vec<AlgebraicTensor>) -> Result<Self, NetworkError> {
        for t in &tensors {
            if t.varset() != varset {
                return Err(NetworkError::VarSetMismatch);
            }
        }
        Ok(TensorNetwork {
            varset: varset.clone(),
            tensors,
        })
    }

    pub fn varset(&self) -> &VarSet {
        &self.varset
    }

    pub fn tensors(&self) -> &[AlgebraicTensor] {
        &self.tensors
    }

    pub fn size(&self) -> usize {
        self.tensors.len()
    }

    /// Maximum tensor rank.
    pub fn network_rank(&self) -> usize {
        self.tensors.iter().map(AlgebraicTensor::rank).max().unwrap_or(0)
    }

    /// Maximum tensor degree.
    pub fn degree(&self) -> u32 {
        self.tensors
            .iter()
            .map(AlgebraicTensor::tensor_degree)
            .max()
            .unwrap_or(0)
    }

    /// Sum of tensor degrees; bounds the degree of the contracted result.
    pub fn total_degree(&self) -> u32 {
        self.tensors.iter().map(AlgebraicTensor::tensor_degree).sum()
    }

    /// Structural violations, empty exactly when the network is valid:
    /// at least one tensor, every index label in exactly two tensors, and a
    /// connected graph.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        if self.tensors.is_empty() {
            violations.push("network has no tensors".to_string());
            return violations;
        }
        let mut occurrences: BTreeMap<IndexLabel, usize> = BTreeMap::new();
        for t in &self.tensors {
            for &label in t.indices() {
                *occurrences.entry(label).or_insert(0) += 1;
            }
        }
        for (label, count) in &occurrences {
            if *count != 2 {
                violations.push(format!(
                    "index {label} occurs {count} times (expected exactly 2)"
                ));
            }
        }
        if violations.is_empty() {
            let graph = self
                .graph_unchecked()
                .expect("occurrence counts verified")
                .to_graph();
            if !graph.is_connected() {
                violations.push("network graph is disconnected".to_string());
            }
        }
        violations
    }

    fn graph_unchecked(&self) -> Option<NetworkGraph> {
        let mut endpoints: BTreeMap<IndexLabel, Vec<usize>> = BTreeMap::new();
        for (pos, t) in self.tensors.iter().enumerate() {
            for &label in t.indices() {
                endpoints.entry(label).or_default().push(pos);
            }
        }
        let mut edges = Vec::with_capacity(endpoints.len());
        for (label, owners) in endpoints {
            if owners.len() != 2 {
                return None;
            }
            edges.push((label, owners[0], owners[1]));
        }
        Some(NetworkGraph {
            vertex_count: self.tensors.len(),
            edges,
        })
    }

    /// The network's multigraph. Errors when the network is invalid.
    pub fn build_graph(&self) -> Result<NetworkGraph, NetworkError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(NetworkError::Invalid(violations));
        }
        Ok(self.graph_unchecked().expect("validated"))
    }

    /// Contracts the tensors at positions `i` and `j`, placing the result at
    /// `min(i, j)` and removing the other position. The surviving index
    /// labels keep exactly two occurrences each, so validity is preserved.
    pub fn contract_pair(&self, i: usize, j: usize) -> Result<TensorNetwork, NetworkError> {
        let size = self.tensors.len();
        for &pos in &[i, j] {
            if pos >= size {
                return Err(NetworkError::OutOfBounds { index: pos, size });
            }
        }
        if i == j {
            return Err(NetworkError::BadOrder {
                step: 0,
                details: format!("pair ({i}, {j}) names the same tensor twice"),
            });
        }
        let merged = self.tensors[i]
            .contract(&self.tensors[j])
            .map_err(|e| match e {
                TensorError::NoSharedIndex => NetworkError::NotContractible { i, j },
                other => NetworkError::Tensor(other),
            })?;
        let (lo, hi) = (i.min(j), i.max(j));
        let mut tensors = self.tensors.clone();
        tensors[lo] = merged;
        tensors.remove(hi);
        Ok(TensorNetwork {
            varset: self.varset.clone(),
            tensors,
        })
    }

    /// Fully contracts a valid network down to its scalar polynomial.
    ///
    /// `order`, when given, lists `size - 1` pairs of *original* tensor
    /// positions; a position that has already been merged stands for the
    /// tensor that absorbed it. When `order` is `None` a greedy plan is
    /// used, repeatedly contracting the contractible pair whose result has
    /// the smallest rank (ties broken by position).
    pub fn contract_all(
        &self,
        order: Option<&[(usize, usize)]>,
    ) -> Result<Polynomial, NetworkError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(NetworkError::Invalid(violations));
        }
        let slots: Vec<RawTensor<Polynomial>> = self
            .tensors
            .iter()
            .map(|t| RawTensor {
                indices: t.indices().to_vec(),
                entries: t
                    .nonzero_entries_coded()
                    .map(|(c, p)| (c, p.clone()))
                    .collect(),
            })
            .collect();
        let result = execute_plan(slots, order)?;
        debug_assert!(result.indices.is_empty(), "valid networks contract to rank 0");
        Ok(result
            .entries
            .into_iter()
            .next()
            .map(|(_, p)| p)
            .unwrap_or_else(|| Polynomial::zero(&self.varset)))
    }

    /// Network value at `alpha`: the magnitude of the contracted scalar.
    /// Entries are evaluated numerically first, so the contraction runs over
    /// complex scalars.
    pub fn value(&self, alpha: &Assignment) -> Result<f64, NetworkError> {
        let violations = self.validate();
        if !violations.is_empty() {
            return Err(NetworkError::Invalid(violations));
        }
        for name in self.varset.iter() {
            if alpha.get(name).is_none() {
                return Err(NetworkError::MissingAssignment(name.to_string()));
            }
        }
        let slots: Result<Vec<RawTensor<Complex64>>, PolyError> = self
            .tensors
            .iter()
            .map(|t| {
                Ok(RawTensor {
                    indices: t.indices().to_vec(),
                    entries: t.evaluated_entries(alpha)?,
                })
            })
            .collect();
        let result = execute_plan(slots?, None)?;
        let scalar = result
            .entries
            .into_iter()
            .next()
            .map(|(_, v)| v)
            .unwrap_or(Complex64::ZERO);
        Ok(scalar.norm())
    }

    /// Value computed by symbolic contraction followed by evaluation; agrees
    /// with [`TensorNetwork::value`] up to floating-point noise.
    pub fn value_symbolic(&self, alpha: &Assignment) -> Result<f64, NetworkError> {
        let scalar = self.contract_all(None)?;
        for name in self.varset.iter() {
            if alpha.get(name).is_none() {
                return Err(NetworkError::MissingAssignment(name.to_string()));
            }
        }
        Ok(scalar.eval(alpha)?.norm())
    }

    /// Tabulates the Boolean function this network computes: value above
    /// 1/2 means 1, below means 0. Errors with [`NetworkError::AmbiguousThreshold`]
    /// when any value lands within [`GAP_EPS`](crate::GAP_EPS) of 1/2.
    pub fn truth_table(&self) -> Result<TruthTable, NetworkError> {
        let assignments = Assignment::enumerate(&self.varset);
        let values = par::map_slice(&assignments, |alpha| self.value(alpha));
        let mut bits = Vec::with_capacity(values.len());
        for (alpha, value) in assignments.iter().zip(values) {
            let value = value?;
            if (value - 0.5).abs() <= GAP_EPS {
                return Err(NetworkError::AmbiguousThreshold {
                    assignment: alpha.to_string(),
                    value,
                });
            }
            bits.push(value > 0.5);
        }
        Ok(TruthTable::from_bits(&self.varset, bits)?)
    }

    /// True when the network computes `f`: on every assignment the value is
    /// on the side of 1/2 that `f` prescribes. The truth table must range
    /// over the network's variable set.
    pub fn computes(&self, f: &TruthTable) -> Result<bool, NetworkError> {
        if f.varset() != &self.varset {
            return Err(NetworkError::VarSetMismatch);
        }
        Ok(self.truth_table()? == *f)
    }

    /// Substitutes `beta` into every tensor and re-homes the network over
    /// `target`. The graph is unchanged.
    pub fn substitute(
        &self,
        beta: &Assignment,
        target: &VarSet,
    ) -> Result<TensorNetwork, NetworkError> {
        let tensors: Result<Vec<AlgebraicTensor>, TensorError> = self
            .tensors
            .iter()
            .map(|t| t.substitute(beta, target))
            .collect();
        Ok(TensorNetwork {
            varset: target.clone(),
            tensors: tensors?,
        })
    }

    // ---------- JSON ----------

    /// Serializes per the network JSON format: variables, then one record
    /// per tensor with its index labels and nonzero entries (basis tuple as
    /// a comma-joined key, polynomial in the textual format).
    pub fn to_json(&self) -> String {
        let doc = NetworkDoc {
            variables: self.varset.iter().map(str::to_string).collect(),
            tensors: self
                .tensors
                .iter()
                .map(|t| TensorDoc {
                    indices: t.indices().to_vec(),
                    entries: t
                        .nonzero_entries()
                        .map(|(tuple, poly)| EntryDoc {
                            key: tuple
                                .iter()
                                .map(PiElement::to_string)
                                .collect::<Vec<_>>()
                                .join(","),
                            poly: poly.to_text(),
                        })
                        .collect(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("network serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self, NetworkError> {
        let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| {
            NetworkError::Json(format!("{e} (line {}, column {})", e.line(), e.column()))
        })?;
        let varset = VarSet::new(doc.variables)?;
        let mut tensors = Vec::with_capacity(doc.tensors.len());
        for t in doc.tensors {
            let mut entries = Vec::with_capacity(t.entries.len());
            for e in t.entries {
                let tuple: Vec<PiElement> = if e.key.is_empty() {
                    Vec::new()
                } else {
                    e.key
                        .split(',')
                        .map(|s| s.trim().parse::<PiElement>())
                        .collect::<Result<_, _>>()
                        .map_err(NetworkError::Json)?
                };
                let poly = Polynomial::from_text(&varset, &e.poly)?;
                entries.push((tuple, poly));
            }
            tensors.push(AlgebraicTensor::new(t.indices, &varset, entries)?);
        }
        TensorNetwork::new(&varset, tensors)
    }
}

#[derive(Serialize, Deserialize)]
struct NetworkDoc {
    variables: Vec<String>,
    tensors: Vec<TensorDoc>,
}

#[derive(Serialize, Deserialize)]
struct TensorDoc {
    indices: Vec<IndexLabel>,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    key: String,
    poly: String,
}

// ===================== contraction planning =====================

struct RawTensor<V> {
    indices: Vec<IndexLabel>,
    entries: Vec<(u64, V)>,
}

fn symmetric_difference_size(a: &[IndexLabel], b: &[IndexLabel]) -> Option<usize> {
    let shared = a.iter().filter(|l| b.contains(l)).count();
    if shared == 0 {
        return None;
    }
    Some(a.len() + b.len() - 2 * shared)
}

/// Runs a full contraction over raw tensors. Explicit orders name original
/// positions and follow merges; the greedy default picks the contractible
/// pair with the smallest result rank at each step.
fn execute_plan<V: ContractValue>(
    tensors: Vec<RawTensor<V>>,
    order: Option<&[(usize, usize)]>,
) -> Result<RawTensor<V>, NetworkError> {
    let size = tensors.len();
    let mut slots: Vec<Option<RawTensor<V>>> = tensors.into_iter().map(Some).collect();
    let mut parent: Vec<usize> = (0..size).collect();

    fn find(parent: &mut [usize], mut v: usize) -> usize {
        while parent[v] != v {
            parent[v] = parent[parent[v]];
            v = parent[v];
        }
        v
    }

    let merge =
        |slots: &mut Vec<Option<RawTensor<V>>>, parent: &mut Vec<usize>, a: usize, b: usize, step: usize| {
            let (lo, hi) = (a.min(b), a.max(b));
            let left = slots[lo].take().expect("live slot");
            let right = slots[hi].take().expect("live slot");
            let la: Vec<(u64, &V)> = left.entries.iter().map(|(c, v)| (*c, v)).collect();
            let lb: Vec<(u64, &V)> = right.entries.iter().map(|(c, v)| (*c, v)).collect();
            let merged = contract_entries(&left.indices, &la, &right.indices, &lb).map_err(
                |e| match e {
                    TensorError::NoSharedIndex => NetworkError::BadOrder {
                        step,
                        details: format!("tensors at merged positions {lo} and {hi} share no index"),
                    },
                    other => NetworkError::Tensor(other),
                },
            )?;
            slots[lo] = Some(RawTensor {
                indices: merged.0,
                entries: merged.1,
            });
            parent[hi] = lo;
            Ok::<(), NetworkError>(())
        };

    match order {
        Some(pairs) => {
            if pairs.len() != size.saturating_sub(1) {
                return Err(NetworkError::BadOrder {
                    step: 0,
                    details: format!(
                        "order has {} steps, expected {}",
                        pairs.len(),
                        size.saturating_sub(1)
                    ),
                });
            }
            for (step, &(i, j)) in pairs.iter().enumerate() {
                for &pos in &[i, j] {
                    if pos >= size {
                        return Err(NetworkError::OutOfBounds { index: pos, size });
                    }
                }
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri == rj {
                    return Err(NetworkError::BadOrder {
                        step,
                        details: format!("positions {i} and {j} already belong to one tensor"),
                    });
                }
                merge(&mut slots, &mut parent, ri, rj, step)?;
            }
        }
        None => {
            loop {
                let live: Vec<usize> = (0..size).filter(|&s| slots[s].is_some()).collect();
                if live.len() <= 1 {
                    break;
                }
                let mut best: Option<(usize, usize, usize)> = None;
                for (ai, &a) in live.iter().enumerate() {
                    for &b in &live[ai + 1..] {
                        let (ta, tb) = (slots[a].as_ref().unwrap(), slots[b].as_ref().unwrap());
                        if let Some(rank) = symmetric_difference_size(&ta.indices, &tb.indices) {
                            if best.is_none_or(|(r, _, _)| rank < r) {
                                best = Some((rank, a, b));
                            }
                        }
                    }
                }
                let Some((_, a, b)) = best else {
                    return Err(NetworkError::Invalid(vec![
                        "network graph is disconnected".to_string(),
                    ]));
                };
                merge(&mut slots, &mut parent, a, b, 0)?;
            }
        }
    }

    let root = (0..size).find(|&s| slots[s].is_some()).expect("nonempty network");
    Ok(slots[root].take().expect("live root"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;
    use PiElement::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vs(names: &[&str]) -> VarSet {
        VarSet::new(names.iter().copied()).unwrap()
    }

    fn const_tensor(
        varset: &VarSet,
        indices: Vec<u32>,
        values: &[(Vec<PiElement>, Complex64)],
    ) -> AlgebraicTensor {
        AlgebraicTensor::new(
            indices,
            varset,
            values
                .iter()
                .map(|(t, v)| (t.clone(), Polynomial::constant(varset, *v))),
        )
        .unwrap()
    }

    /// A two-tensor network whose contraction value is `p` itself:
    /// one rank-1 carrier for `p` and one rank-1 all-ones probe.
    fn carrier_network(varset: &VarSet, p: Polynomial) -> TensorNetwork {
        let carrier = AlgebraicTensor::new(vec![1], varset, [(vec![K00], p)]).unwrap();
        let probe = AlgebraicTensor::new(
            vec![1],
            varset,
            [(vec![K00], Polynomial::constant_re(varset, 1.0))],
        )
        .unwrap();
        TensorNetwork::new(varset, vec![carrier, probe]).unwrap()
    }

    #[test]
    fn validation_reports_occurrences_and_connectivity() {
        let varset = VarSet::empty();
        // Index 2 dangles (one occurrence), index 3 occurs three times.
        let t1 = const_tensor(&varset, vec![1, 2, 3], &[]);
        let t2 = const_tensor(&varset, vec![1, 3], &[]);
        let t3 = const_tensor(&varset, vec![3], &[]);
        let n = TensorNetwork::new(&varset, vec![t1, t2, t3]).unwrap();
        let violations = n.validate();
        assert!(violations.contains(&"index 2 occurs 1 times (expected exactly 2)".to_string()));
        assert!(violations.contains(&"index 3 occurs 3 times (expected exactly 2)".to_string()));

        // Two disjoint valid pairs: every index twice, but disconnected.
        let a1 = const_tensor(&varset, vec![1], &[(vec![K00], c(1.0, 0.0))]);
        let a2 = const_tensor(&varset, vec![1], &[(vec![K00], c(1.0, 0.0))]);
        let b1 = const_tensor(&varset, vec![2], &[(vec![K00], c(1.0, 0.0))]);
        let b2 = const_tensor(&varset, vec![2], &[(vec![K00], c(1.0, 0.0))]);
        let split = TensorNetwork::new(&varset, vec![a1, a2, b1, b2]).unwrap();
        assert_eq!(split.validate(), vec!["network graph is disconnected".to_string()]);

        let empty = TensorNetwork::new(&varset, vec![]).unwrap();
        assert_eq!(empty.validate(), vec!["network has no tensors".to_string()]);

        // A single rank-0 tensor is a valid network.
        let scalar = TensorNetwork::new(
            &varset,
            vec![AlgebraicTensor::scalar(&varset, Polynomial::constant_re(&varset, 0.25)).unwrap()],
        )
        .unwrap();
        assert!(scalar.validate().is_empty());
        assert_eq!(scalar.contract_all(None).unwrap(), Polynomial::constant_re(&varset, 0.25));
    }

    #[test]
    fn build_graph_matches_index_sharing() {
        let varset = VarSet::empty();
        let t0 = const_tensor(&varset, vec![1, 2], &[]);
        let t1 = const_tensor(&varset, vec![1, 3], &[]);
        let t2 = const_tensor(&varset, vec![2, 3], &[]);
        let n = TensorNetwork::new(&varset, vec![t0, t1, t2]).unwrap();
        let g = n.build_graph().unwrap();
        assert_eq!(g.vertex_count(), 3);
        assert_eq!(g.edges(), &[(1, 0, 1), (2, 0, 2), (3, 1, 2)]);
        assert!(g.to_graph().is_connected());
    }

    #[test]
    fn contract_pair_preserves_occurrence_invariant() {
        let varset = VarSet::empty();
        // Path: t0 -1- t1 -2- t2, plus a parallel edge 3 between t0 and t1.
        let t0 = const_tensor(&varset, vec![1, 3], &[(vec![K00, K00], c(1.0, 0.0))]);
        let t1 = const_tensor(
            &varset,
            vec![1, 2, 3],
            &[(vec![K00, K11, K00], c(2.0, 0.0))],
        );
        let t2 = const_tensor(&varset, vec![2], &[(vec![K11], c(3.0, 0.0))]);
        let n = TensorNetwork::new(&varset, vec![t0, t1, t2]).unwrap();
        assert!(n.validate().is_empty());
        let step = n.contract_pair(0, 1).unwrap();
        assert_eq!(step.size(), 2);
        // Both occurrences of indices 1 and 3 were consumed; index 2 remains
        // shared between the merged tensor and t2.
        assert!(step.validate().is_empty());
        let done = step.contract_pair(0, 1).unwrap();
        assert_eq!(done.size(), 1);
        assert_eq!(
            done.tensors()[0].scalar_value().unwrap(),
            Polynomial::constant_re(&varset, 6.0)
        );
    }

    #[test]
    fn explicit_orders_follow_merges() {
        let varset = VarSet::empty();
        // Star: center 0 with legs to 1, 2, 3.
        let center = const_tensor(
            &varset,
            vec![1, 2, 3],
            &[(vec![K00, K00, K00], c(1.0, 0.0))],
        );
        let l1 = const_tensor(&varset, vec![1], &[(vec![K00], c(2.0, 0.0))]);
        let l2 = const_tensor(&varset, vec![2], &[(vec![K00], c(3.0, 0.0))]);
        let l3 = const_tensor(&varset, vec![3], &[(vec![K00], c(4.0, 0.0))]);
        let n = TensorNetwork::new(&varset, vec![center, l1, l2, l3]).unwrap();
        // Step 2 names position 1, already merged into 0: follows the merge.
        let p = n.contract_all(Some(&[(0, 1), (1, 2), (3, 0)])).unwrap();
        assert_eq!(p, Polynomial::constant_re(&varset, 24.0));
        // A pair inside one merged tensor is rejected.
        let err = n.contract_all(Some(&[(0, 1), (0, 1), (0, 3)])).unwrap_err();
        assert!(matches!(err, NetworkError::BadOrder { step: 1, .. }));
        // Wrong number of steps is rejected.
        let err = n.contract_all(Some(&[(0, 1)])).unwrap_err();
        assert!(matches!(err, NetworkError::BadOrder { step: 0, .. }));
    }

    #[test]
    fn contraction_value_is_order_independent() {
        // Triangle with polynomial entries; all three orders agree
        // coefficientwise.
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let y = Polynomial::variable(&varset, "y").unwrap();
        let t0 = AlgebraicTensor::new(
            vec![1, 2],
            &varset,
            [
                (vec![K00, K00], x.clone()),
                (vec![K11, K01], Polynomial::constant_re(&varset, 1.0)),
            ],
        )
        .unwrap();
        let t1 = AlgebraicTensor::new(
            vec![1, 3],
            &varset,
            [
                (vec![K00, K11], y.clone()),
                (vec![K11, K10], Polynomial::constant(&varset, c(0.0, 1.0))),
            ],
        )
        .unwrap();
        let t2 = AlgebraicTensor::new(
            vec![2, 3],
            &varset,
            [
                (vec![K00, K11], Polynomial::constant_re(&varset, 2.0)),
                (vec![K01, K10], y.clone()),
            ],
        )
        .unwrap();
        let n = TensorNetwork::new(&varset, vec![t0, t1, t2]).unwrap();
        let orders: [&[(usize, usize)]; 3] = [&[(0, 1), (0, 2)], &[(1, 2), (0, 1)], &[(0, 2), (2, 1)]];
        let base = n.contract_all(Some(orders[0])).unwrap();
        assert!(!base.is_zero());
        for order in &orders[1..] {
            let other = n.contract_all(Some(order)).unwrap();
            assert!(base.max_coeff_deviation(&other).unwrap() <= 1e-12);
        }
        let greedy = n.contract_all(None).unwrap();
        assert!(base.max_coeff_deviation(&greedy).unwrap() <= 1e-12);
    }

    #[test]
    fn numeric_and_symbolic_values_agree() {
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let y = Polynomial::variable(&varset, "y").unwrap();
        let p = x
            .scale(c(0.75, 0.5))
            .add(&y.scale(c(-0.25, 0.0)))
            .unwrap()
            .add(&Polynomial::constant_re(&varset, 0.125))
            .unwrap();
        let n = carrier_network(&varset, p);
        assert!(n.validate().is_empty());
        for alpha in Assignment::enumerate(&varset) {
            let fast = n.value(&alpha).unwrap();
            let slow = n.value_symbolic(&alpha).unwrap();
            assert!((fast - slow).abs() <= 1e-12, "{alpha}: {fast} vs {slow}");
        }
    }

    #[test]
    fn computes_respects_threshold_and_gap() {
        let varset = vs(&["x"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        // p = 1 - x: value 1 at x=0, 0 at x=1 -> computes NOT(x).
        let p = Polynomial::constant_re(&varset, 1.0).sub(&x).unwrap();
        let n = carrier_network(&varset, p);
        let not_x = TruthTable::from_fn(&varset, |a| !a.get("x").unwrap()).unwrap();
        let ident = TruthTable::from_fn(&varset, |a| a.get("x").unwrap()).unwrap();
        assert!(n.computes(&not_x).unwrap());
        assert!(!n.computes(&ident).unwrap());
        // Value exactly 1/2 is ambiguous, not rounded.
        let half = carrier_network(&varset, Polynomial::constant_re(&varset, 0.5));
        let err = half.computes(&not_x).unwrap_err();
        assert!(matches!(err, NetworkError::AmbiguousThreshold { .. }));
        // Wrong variable set is a contract violation.
        let other = TruthTable::from_fn(&vs(&["y"]), |_| true).unwrap();
        assert!(matches!(n.computes(&other).unwrap_err(), NetworkError::VarSetMismatch));
    }

    #[test]
    fn degree_bookkeeping() {
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let y = Polynomial::variable(&varset, "y").unwrap();
        let t0 = AlgebraicTensor::new(vec![1], &varset, [(vec![K00], x.clone())]).unwrap();
        let t1 = AlgebraicTensor::new(vec![1], &varset, [(vec![K00], y.clone())]).unwrap();
        let n = TensorNetwork::new(&varset, vec![t0, t1]).unwrap();
        assert_eq!(n.degree(), 1);
        assert_eq!(n.total_degree(), 2);
        assert_eq!(n.network_rank(), 1);
        let g = n.contract_all(None).unwrap();
        assert_eq!(g.degree(), 2); // x*y
        assert!(g.degree() <= n.total_degree());
        // Squared-magnitude degree is at most twice the total degree.
        assert!(g.norm_square().degree() <= 2 * n.total_degree());
    }

    #[test]
    fn value_requires_full_assignment() {
        let varset = vs(&["x"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let n = carrier_network(&varset, x);
        let err = n.value(&Assignment::new()).unwrap_err();
        assert!(matches!(err, NetworkError::MissingAssignment(v) if v == "x"));
    }

    #[test]
    fn json_roundtrip_preserves_everything() {
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let t0 = AlgebraicTensor::new(
            vec![2, 1],
            &varset,
            [
                (vec![K01, K10], x.scale(c(0.5, -0.25))),
                (vec![K11, K11], Polynomial::constant_re(&varset, 1.0 / 3.0)),
            ],
        )
        .unwrap();
        let t1 = AlgebraicTensor::new(
            vec![1, 2],
            &varset,
            [(vec![K10, K01], Polynomial::constant(&varset, c(0.0, 2.0)))],
        )
        .unwrap();
        let n = TensorNetwork::new(&varset, vec![t0, t1]).unwrap();
        let text = n.to_json();
        let back = TensorNetwork::from_json(&text).unwrap();
        assert_eq!(n, back);
        // Index order within a tensor survives the round trip.
        assert_eq!(back.tensors()[0].indices(), &[2, 1]);
        // Parse failures carry position diagnostics.
        let err = TensorNetwork::from_json("{\"variables\": [,]}").unwrap_err();
        match err {
            NetworkError::Json(msg) => assert!(msg.contains("line"), "{msg}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn scalar_network_json_uses_empty_key() {
        let varset = VarSet::empty();
        let n = TensorNetwork::new(
            &varset,
            vec![AlgebraicTensor::scalar(&varset, Polynomial::constant_re(&varset, 0.75)).unwrap()],
        )
        .unwrap();
        let text = n.to_json();
        assert!(text.contains("\"key\": \"\""));
        let back = TensorNetwork::from_json(&text).unwrap();
        assert_eq!(n, back);
    }

    #[test]
    fn substitute_keeps_graph_and_binds_entries() {
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let y = Polynomial::variable(&varset, "y").unwrap();
        let t0 = AlgebraicTensor::new(vec![1], &varset, [(vec![K00], x)]).unwrap();
        let t1 = AlgebraicTensor::new(vec![1], &varset, [(vec![K00], y)]).unwrap();
        let n = TensorNetwork::new(&varset, vec![t0, t1]).unwrap();
        let target = vs(&["y"]);
        let bound = n
            .substitute(&Assignment::from_pairs([("x", true)]), &target)
            .unwrap();
        assert_eq!(bound.varset(), &target);
        assert_eq!(bound.size(), 2);
        assert!(bound.validate().is_empty());
        let p = bound.contract_all(None).unwrap();
        assert_eq!(p.coefficient(&Monomial::var("y")), c(1.0, 0.0));
    }
}
