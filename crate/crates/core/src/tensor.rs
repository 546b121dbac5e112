//! Algebraic tensors: maps from tuples over the 2x2 matrix basis
//! {|0><0|, |0><1|, |1><0|, |1><1|} to polynomial entries.
//!
//! Each tensor owns an ordered list of distinct positive index labels; a
//! tuple assigns one [`PiElement`] per index. Contracting two tensors sums
//! entry products over all joint values of their shared indices and keeps
//! the symmetric difference of the index sets, with the surviving labels
//! sorted ascending. Entries are stored densely (one slot per tuple) up to
//! [`DENSE_RANK_LIMIT`] and sparsely above; missing tuples denote the zero
//! polynomial in both representations.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;

use crate::poly::{Assignment, PolyError, Polynomial, VarSet};

/// Tensors of rank up to this use a dense entry vector (`4^rank` slots).
pub const DENSE_RANK_LIMIT: usize = 8;

/// Hard cap on tensor rank: tuple codes pack 2 bits per position into a u64.
pub const MAX_RANK: usize = 31;

/// Index labels are opaque positive integers; each label names one shared
/// "leg" between exactly two tensors of a network.
pub type IndexLabel = u32;

/// Errors produced by tensor construction and contraction.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TensorError {
    #[error("index labels must be positive")]
    NonPositiveIndex,
    #[error("index label {0} occurs twice in one tensor")]
    DuplicateIndex(IndexLabel),
    #[error("rank {0} exceeds the supported maximum {MAX_RANK}")]
    RankTooLarge(usize),
    #[error("entry tuple has length {got}, expected rank {expected}")]
    TupleLength { got: usize, expected: usize },
    #[error("entry tuple specified more than once")]
    DuplicateTuple,
    #[error("tensor entries are defined over different variable sets")]
    VarSetMismatch,
    #[error("tensors share no index; contraction requires at least one")]
    NoSharedIndex,
    #[error("tensors have different index sets")]
    IndexSetMismatch,
    #[error(transparent)]
    Poly(#[from] PolyError),
}

// ===================== the Pi basis =====================

/// One of the four basis matrices |0><0|, |0><1|, |1><0|, |1><1|.
///
/// `Kij` is `|i><j|`: a single 1 at row `i`, column `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PiElement {
    K00,
    K01,
    K10,
    K11,
}

impl PiElement {
    pub const ALL: [PiElement; 4] = [
        PiElement::K00,
        PiElement::K01,
        PiElement::K10,
        PiElement::K11,
    ];

    /// Two-bit code: `row << 1 | col`.
    pub fn code(self) -> u64 {
        match self {
            PiElement::K00 => 0,
            PiElement::K01 => 1,
            PiElement::K10 => 2,
            PiElement::K11 => 3,
        }
    }

    pub fn from_code(code: u64) -> PiElement {
        match code & 3 {
            0 => PiElement::K00,
            1 => PiElement::K01,
            2 => PiElement::K10,
            _ => PiElement::K11,
        }
    }

    /// Row of the single nonzero entry (the ket side of |r><c|).
    pub fn row(self) -> usize {
        (self.code() >> 1) as usize
    }

    /// Column of the single nonzero entry (the bra side of |r><c|).
    pub fn col(self) -> usize {
        (self.code() & 1) as usize
    }

    /// The 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let mut m = [[Complex64::ZERO; 2]; 2];
        m[self.row()][self.col()] = Complex64::new(1.0, 0.0);
        m
    }
}

impl fmt::Display for PiElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "K{}{}", self.row(), self.col())
    }
}

impl std::str::FromStr for PiElement {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "K00" => Ok(PiElement::K00),
            "K01" => Ok(PiElement::K01),
            "K10" => Ok(PiElement::K10),
            "K11" => Ok(PiElement::K11),
            other => Err(format!("unknown basis element {other:?}")),
        }
    }
}

/// Packs a tuple into a u64 code, 2 bits per position (position 0 in the
/// low bits).
pub fn encode_tuple(tuple: &[PiElement]) -> u64 {
    tuple
        .iter()
        .enumerate()
        .fold(0u64, |acc, (p, e)| acc | (e.code() << (2 * p)))
}

/// Inverse of [`encode_tuple`] for a given rank.
pub fn decode_tuple(code: u64, rank: usize) -> Vec<PiElement> {
    (0..rank)
        .map(|p| PiElement::from_code(code >> (2 * p)))
        .collect()
}

// ===================== contraction engine =====================

/// Entry arithmetic shared by the symbolic (polynomial) and numeric
/// (complex scalar) contraction paths.
pub(crate) trait ContractValue: Clone {
    fn mul(a: &Self, b: &Self) -> Self;
    fn add_assign(&mut self, other: Self);
    /// Called once per accumulated output entry before the zero test.
    fn finalize(&mut self);
    fn is_zero_value(&self) -> bool;
}

impl ContractValue for Polynomial {
    fn mul(a: &Self, b: &Self) -> Self {
        a.mul_same_varset(b)
    }

    fn add_assign(&mut self, other: Self) {
        self.add_assign_same_varset(other);
    }

    fn finalize(&mut self) {
        self.prune();
    }

    fn is_zero_value(&self) -> bool {
        self.is_zero()
    }
}

impl ContractValue for Complex64 {
    fn mul(a: &Self, b: &Self) -> Self {
        a * b
    }

    fn add_assign(&mut self, other: Self) {
        *self += other;
    }

    fn finalize(&mut self) {}

    fn is_zero_value(&self) -> bool {
        *self == Complex64::ZERO
    }
}

enum PosTarget {
    Shared(usize),
    Surviving(usize),
}

fn position_targets(
    own: &[IndexLabel],
    shared: &[IndexLabel],
    out: &[IndexLabel],
) -> Vec<PosTarget> {
    own.iter()
        .map(|label| match shared.binary_search(label) {
            Ok(slot) => PosTarget::Shared(slot),
            Err(_) => PosTarget::Surviving(
                out.binary_search(label).expect("surviving label is in output"),
            ),
        })
        .collect()
}

fn split_code(code: u64, targets: &[PosTarget]) -> (u64, u64) {
    let (mut shared_code, mut out_code) = (0u64, 0u64);
    for (p, target) in targets.iter().enumerate() {
        let bits = (code >> (2 * p)) & 3;
        match target {
            PosTarget::Shared(slot) => shared_code |= bits << (2 * slot),
            PosTarget::Surviving(slot) => out_code |= bits << (2 * slot),
        }
    }
    (shared_code, out_code)
}

/// Contracts two coded entry lists over every index label the operands
/// share. Returns the surviving labels (sorted ascending) and the nonzero
/// output entries (sorted by code). The summation order over shared tuples
/// is fixed, so results are bitwise deterministic.
pub(crate) type ContractedEntries<V> = (Vec<IndexLabel>, Vec<(u64, V)>);

pub(crate) fn contract_entries<V: ContractValue>(
    a_indices: &[IndexLabel],
    a_entries: &[(u64, &V)],
    b_indices: &[IndexLabel],
    b_entries: &[(u64, &V)],
) -> Result<ContractedEntries<V>, TensorError> {
    let mut shared: Vec<IndexLabel> = a_indices
        .iter()
        .copied()
        .filter(|l| b_indices.contains(l))
        .collect();
    shared.sort_unstable();
    if shared.is_empty() {
        return Err(TensorError::NoSharedIndex);
    }
    let mut out: Vec<IndexLabel> = a_indices
        .iter()
        .chain(b_indices.iter())
        .copied()
        .filter(|l| shared.binary_search(l).is_err())
        .collect();
    out.sort_unstable();
    if out.len() > MAX_RANK {
        return Err(TensorError::RankTooLarge(out.len()));
    }

    let a_targets = position_targets(a_indices, &shared, &out);
    let b_targets = position_targets(b_indices, &shared, &out);

    let group = |entries: &[(u64, &V)], targets: &[PosTarget]| {
        let mut groups: BTreeMap<u64, Vec<(u64, V)>> = BTreeMap::new();
        for (code, value) in entries {
            let (shared_code, out_code) = split_code(*code, targets);
            groups
                .entry(shared_code)
                .or_default()
                .push((out_code, (*value).clone()));
        }
        groups
    };
    let a_groups = group(a_entries, &a_targets);
    let b_groups = group(b_entries, &b_targets);

    let mut acc: BTreeMap<u64, V> = BTreeMap::new();
    for (shared_code, a_group) in &a_groups {
        let Some(b_group) = b_groups.get(shared_code) else {
            continue;
        };
        for (a_out, a_val) in a_group {
            for (b_out, b_val) in b_group {
                let code = a_out | b_out;
                let product = V::mul(a_val, b_val);
                match acc.entry(code) {
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        e.get_mut().add_assign(product)
                    }
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(product);
                    }
                }
            }
        }
    }

    let mut result: Vec<(u64, V)> = Vec::with_capacity(acc.len());
    for (code, mut value) in acc {
        value.finalize();
        if !value.is_zero_value() {
            result.push((code, value));
        }
    }
    Ok((out, result))
}

// ===================== algebraic tensors =====================

enum EntryStorage {
    Dense(Vec<Polynomial>),
    Sparse(BTreeMap<u64, Polynomial>),
}

/// A tensor over the Pi basis with polynomial entries.
pub struct AlgebraicTensor {
    indices: Vec<IndexLabel>,
    varset: VarSet,
    entries: EntryStorage,
}

impl AlgebraicTensor {
    /// Builds a tensor from explicit (tuple, entry) pairs. Indices must be
    /// distinct positive labels; tuples must have one element per index;
    /// every entry must share `varset`. Zero entries may be omitted.
    pub fn new(
        indices: Vec<IndexLabel>,
        varset: &VarSet,
        entries: impl IntoIterator<Item = (Vec<PiElement>, Polynomial)>,
    ) -> Result<Self, TensorError> {
        let rank = indices.len();
        let mut coded: Vec<(u64, Polynomial)> = Vec::new();
        for (tuple, poly) in entries {
            if tuple.len() != rank {
                return Err(TensorError::TupleLength {
                    got: tuple.len(),
                    expected: rank,
                });
            }
            coded.push((encode_tuple(&tuple), poly));
        }
        Self::from_coded(indices, varset, coded, true)
    }

    /// A tensor with all-zero entries.
    pub fn zeros(indices: Vec<IndexLabel>, varset: &VarSet) -> Result<Self, TensorError> {
        Self::new(indices, varset, std::iter::empty())
    }

    /// A rank-0 tensor holding a single polynomial.
    pub fn scalar(varset: &VarSet, value: Polynomial) -> Result<Self, TensorError> {
        Self::new(Vec::new(), varset, [(Vec::new(), value)])
    }

    pub(crate) fn from_coded(
        indices: Vec<IndexLabel>,
        varset: &VarSet,
        coded: Vec<(u64, Polynomial)>,
        check_duplicates: bool,
    ) -> Result<Self, TensorError> {
        let rank = indices.len();
        if rank > MAX_RANK {
            return Err(TensorError::RankTooLarge(rank));
        }
        if indices.contains(&0) {
            return Err(TensorError::NonPositiveIndex);
        }
        for (i, label) in indices.iter().enumerate() {
            if indices[i + 1..].contains(label) {
                return Err(TensorError::DuplicateIndex(*label));
            }
        }
        let mut entries = if rank <= DENSE_RANK_LIMIT {
            EntryStorage::Dense(vec![Polynomial::zero(varset); 1 << (2 * rank)])
        } else {
            EntryStorage::Sparse(BTreeMap::new())
        };
        for (code, poly) in coded {
            if poly.varset() != varset {
                return Err(TensorError::VarSetMismatch);
            }
            if poly.is_zero() {
                continue;
            }
            match &mut entries {
                EntryStorage::Dense(slots) => {
                    if check_duplicates && !slots[code as usize].is_zero() {
                        return Err(TensorError::DuplicateTuple);
                    }
                    slots[code as usize] = poly;
                }
                EntryStorage::Sparse(map) => {
                    if map.insert(code, poly).is_some() && check_duplicates {
                        return Err(TensorError::DuplicateTuple);
                    }
                }
            }
        }
        Ok(AlgebraicTensor {
            indices,
            varset: varset.clone(),
            entries,
        })
    }

    pub fn rank(&self) -> usize {
        self.indices.len()
    }

    /// Index labels in this tensor's own order.
    pub fn indices(&self) -> &[IndexLabel] {
        &self.indices
    }

    pub fn varset(&self) -> &VarSet {
        &self.varset
    }

    /// Maximum formal degree over all entries (0 for an all-zero tensor).
    pub fn tensor_degree(&self) -> u32 {
        self.nonzero_entries_coded()
            .map(|(_, p)| p.degree())
            .max()
            .unwrap_or(0)
    }

    /// The entry at `tuple` (the zero polynomial when absent).
    pub fn entry(&self, tuple: &[PiElement]) -> Result<Polynomial, TensorError> {
        if tuple.len() != self.rank() {
            return Err(TensorError::TupleLength {
                got: tuple.len(),
                expected: self.rank(),
            });
        }
        let code = encode_tuple(tuple);
        Ok(self
            .entry_at_code(code)
            .cloned()
            .unwrap_or_else(|| Polynomial::zero(&self.varset)))
    }

    fn entry_at_code(&self, code: u64) -> Option<&Polynomial> {
        match &self.entries {
            EntryStorage::Dense(slots) => {
                let p = &slots[code as usize];
                (!p.is_zero()).then_some(p)
            }
            EntryStorage::Sparse(map) => map.get(&code),
        }
    }

    /// Nonzero entries as (code, polynomial), sorted by code.
    pub(crate) fn nonzero_entries_coded(&self) -> Box<dyn Iterator<Item = (u64, &Polynomial)> + '_> {
        match &self.entries {
            EntryStorage::Dense(slots) => Box::new(
                slots
                    .iter()
                    .enumerate()
                    .filter(|(_, p)| !p.is_zero())
                    .map(|(code, p)| (code as u64, p)),
            ),
            EntryStorage::Sparse(map) => Box::new(map.iter().map(|(code, p)| (*code, p))),
        }
    }

    /// Nonzero entries as (tuple, polynomial), sorted by coded tuple.
    pub fn nonzero_entries(&self) -> impl Iterator<Item = (Vec<PiElement>, &Polynomial)> + '_ {
        let rank = self.rank();
        self.nonzero_entries_coded()
            .map(move |(code, p)| (decode_tuple(code, rank), p))
    }

    pub fn num_nonzero_entries(&self) -> usize {
        self.nonzero_entries_coded().count()
    }

    /// For a rank-0 tensor, its single entry.
    pub fn scalar_value(&self) -> Option<Polynomial> {
        if self.rank() != 0 {
            return None;
        }
        Some(
            self.entry_at_code(0)
                .cloned()
                .unwrap_or_else(|| Polynomial::zero(&self.varset)),
        )
    }

    /// True when some entry mentions a variable of `y`.
    pub fn constrains(&self, y: &VarSet) -> bool {
        self.nonzero_entries_coded().any(|(_, p)| p.constrains(y))
    }

    /// Contracts over every shared index label per the summation rule:
    /// the output entry at a surviving tuple is the sum over all shared
    /// tuples of the product of the operand entries. Output indices are the
    /// symmetric difference of the operand index sets, sorted ascending.
    pub fn contract(&self, other: &AlgebraicTensor) -> Result<AlgebraicTensor, TensorError> {
        if self.varset != other.varset {
            return Err(TensorError::VarSetMismatch);
        }
        let a_entries: Vec<(u64, &Polynomial)> = self.nonzero_entries_coded().collect();
        let b_entries: Vec<(u64, &Polynomial)> = other.nonzero_entries_coded().collect();
        let (out_indices, out_entries) =
            contract_entries(&self.indices, &a_entries, &other.indices, &b_entries)?;
        Self::from_coded(out_indices, &self.varset, out_entries, false)
    }

    /// The same tensor with indices sorted ascending (entries re-keyed).
    pub fn canonicalized(&self) -> AlgebraicTensor {
        let mut order: Vec<usize> = (0..self.rank()).collect();
        order.sort_by_key(|&p| self.indices[p]);
        let sorted_indices: Vec<IndexLabel> = order.iter().map(|&p| self.indices[p]).collect();
        let coded: Vec<(u64, Polynomial)> = self
            .nonzero_entries_coded()
            .map(|(code, p)| {
                let mut new_code = 0u64;
                for (new_pos, &old_pos) in order.iter().enumerate() {
                    new_code |= ((code >> (2 * old_pos)) & 3) << (2 * new_pos);
                }
                (new_code, p.clone())
            })
            .collect();
        Self::from_coded(sorted_indices, &self.varset, coded, false)
            .expect("canonicalization preserves validity")
    }

    /// Largest coefficientwise deviation between entries of two tensors with
    /// equal index sets (orders may differ).
    pub fn max_entry_deviation(&self, other: &AlgebraicTensor) -> Result<f64, TensorError> {
        if self.varset != other.varset {
            return Err(TensorError::VarSetMismatch);
        }
        let a = self.canonicalized();
        let b = other.canonicalized();
        if a.indices != b.indices {
            return Err(TensorError::IndexSetMismatch);
        }
        let zero = Polynomial::zero(&self.varset);
        let mut worst = 0.0f64;
        let mut seen: std::collections::BTreeSet<u64> = std::collections::BTreeSet::new();
        for (code, p) in a.nonzero_entries_coded() {
            seen.insert(code);
            let q = b.entry_at_code(code).unwrap_or(&zero);
            worst = worst.max(p.max_coeff_deviation(q)?);
        }
        for (code, q) in b.nonzero_entries_coded() {
            if !seen.contains(&code) {
                worst = worst.max(q.max_coeff_deviation(&zero)?);
            }
        }
        Ok(worst)
    }

    /// Evaluates every entry at `alpha`, producing coded numeric entries
    /// (exact zeros dropped), sorted by code.
    pub(crate) fn evaluated_entries(
        &self,
        alpha: &Assignment,
    ) -> Result<Vec<(u64, Complex64)>, PolyError> {
        let mut out = Vec::with_capacity(self.num_nonzero_entries());
        for (code, poly) in self.nonzero_entries_coded() {
            let value = poly.eval(alpha)?;
            if value != Complex64::ZERO {
                out.push((code, value));
            }
        }
        Ok(out)
    }

    /// Substitutes `beta` into every entry and re-homes the tensor over
    /// `target` (used when fixing a subset of network variables).
    pub fn substitute(
        &self,
        beta: &Assignment,
        target: &VarSet,
    ) -> Result<AlgebraicTensor, TensorError> {
        let coded: Result<Vec<(u64, Polynomial)>, PolyError> = self
            .nonzero_entries_coded()
            .map(|(code, p)| Ok((code, p.substitute(beta, target)?)))
            .collect();
        Self::from_coded(self.indices.clone(), target, coded?, false)
    }
}

impl Clone for AlgebraicTensor {
    fn clone(&self) -> Self {
        let coded: Vec<(u64, Polynomial)> = self
            .nonzero_entries_coded()
            .map(|(c, p)| (c, p.clone()))
            .collect();
        Self::from_coded(self.indices.clone(), &self.varset, coded, false)
            .expect("clone preserves validity")
    }
}

impl PartialEq for AlgebraicTensor {
    fn eq(&self, other: &Self) -> bool {
        self.indices == other.indices
            && self.varset == other.varset
            && self
                .nonzero_entries_coded()
                .eq(other.nonzero_entries_coded())
    }
}

impl fmt::Debug for AlgebraicTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraicTensor(indices={:?}, entries={{", self.indices)?;
        for (tuple, poly) in self.nonzero_entries() {
            let key: Vec<String> = tuple.iter().map(|e| e.to_string()).collect();
            write!(f, " [{}] -> {};", key.join(","), poly)?;
        }
        write!(f, " }})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vs(names: &[&str]) -> VarSet {
        VarSet::new(names.iter().copied()).unwrap()
    }

    fn constant_tensor(indices: Vec<u32>, values: &[(Vec<PiElement>, Complex64)]) -> AlgebraicTensor {
        let varset = VarSet::empty();
        AlgebraicTensor::new(
            indices,
            &varset,
            values
                .iter()
                .map(|(t, v)| (t.clone(), Polynomial::constant(&varset, *v))),
        )
        .unwrap()
    }

    #[test]
    fn pi_matrices_are_the_standard_basis() {
        use PiElement::*;
        assert_eq!(K00.matrix()[0][0], c(1.0, 0.0));
        assert_eq!(K01.matrix()[0][1], c(1.0, 0.0));
        assert_eq!(K10.matrix()[1][0], c(1.0, 0.0));
        assert_eq!(K11.matrix()[1][1], c(1.0, 0.0));
        // Orthonormal under the Frobenius inner product Tr(A^dag B).
        for a in PiElement::ALL {
            for b in PiElement::ALL {
                let ma = a.matrix();
                let mb = b.matrix();
                let mut inner = Complex64::ZERO;
                for i in 0..2 {
                    for j in 0..2 {
                        inner += ma[i][j].conj() * mb[i][j];
                    }
                }
                let expected = if a == b { c(1.0, 0.0) } else { Complex64::ZERO };
                assert_eq!(inner, expected, "inner product of {a} and {b}");
            }
        }
        for e in PiElement::ALL {
            assert_eq!(PiElement::from_code(e.code()), e);
            assert_eq!(e.to_string().parse::<PiElement>().unwrap(), e);
        }
    }

    #[test]
    fn tuple_codes_roundtrip() {
        use PiElement::*;
        let tuple = vec![K10, K00, K11];
        let code = encode_tuple(&tuple);
        assert_eq!(decode_tuple(code, 3), tuple);
        assert_eq!(encode_tuple(&[]), 0);
    }

    #[test]
    fn construction_validates_indices_and_tuples() {
        let varset = VarSet::empty();
        assert_eq!(
            AlgebraicTensor::zeros(vec![0], &varset).unwrap_err(),
            TensorError::NonPositiveIndex
        );
        assert_eq!(
            AlgebraicTensor::zeros(vec![1, 1], &varset).unwrap_err(),
            TensorError::DuplicateIndex(1)
        );
        let bad_tuple = AlgebraicTensor::new(
            vec![1, 2],
            &varset,
            [(vec![PiElement::K00], Polynomial::constant_re(&varset, 1.0))],
        );
        assert_eq!(
            bad_tuple.unwrap_err(),
            TensorError::TupleLength { got: 1, expected: 2 }
        );
        let other_vs = vs(&["x"]);
        let mismatched = AlgebraicTensor::new(
            vec![1],
            &varset,
            [(vec![PiElement::K00], Polynomial::constant_re(&other_vs, 1.0))],
        );
        assert_eq!(mismatched.unwrap_err(), TensorError::VarSetMismatch);
    }

    #[test]
    fn rank_one_pair_contracts_to_hand_expanded_sum() {
        use PiElement::*;
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let y = Polynomial::variable(&varset, "y").unwrap();
        // g:  K00 -> 1, K01 -> x, K10 -> 2i, K11 -> 3
        let g = AlgebraicTensor::new(
            vec![1],
            &varset,
            [
                (vec![K00], Polynomial::constant_re(&varset, 1.0)),
                (vec![K01], x),
                (vec![K10], Polynomial::constant(&varset, c(0.0, 2.0))),
                (vec![K11], Polynomial::constant_re(&varset, 3.0)),
            ],
        )
        .unwrap();
        // g': K00 -> 2, K01 -> y, K10 -> 1, K11 -> -1
        let g2 = AlgebraicTensor::new(
            vec![1],
            &varset,
            [
                (vec![K00], Polynomial::constant_re(&varset, 2.0)),
                (vec![K01], y),
                (vec![K10], Polynomial::constant_re(&varset, 1.0)),
                (vec![K11], Polynomial::constant_re(&varset, -1.0)),
            ],
        )
        .unwrap();
        // Sum over the four basis elements:
        //   1*2 + x*y + 2i*1 + 3*(-1) = (-1 + 2i) + x*y
        let result = g.contract(&g2).unwrap();
        assert_eq!(result.rank(), 0);
        let value = result.scalar_value().unwrap();
        assert_eq!(value.coefficient(&crate::poly::Monomial::one()), c(-1.0, 2.0));
        let xy = crate::poly::Monomial::var("x").mul(&crate::poly::Monomial::var("y"));
        assert_eq!(value.coefficient(&xy), c(1.0, 0.0));
        assert_eq!(value.num_terms(), 2);
    }

    #[test]
    fn contraction_rank_arithmetic() {
        use PiElement::*;
        // rank 2 sharing one index with rank 3 -> rank 3, indices sorted.
        let a = constant_tensor(vec![7, 2], &[(vec![K00, K00], c(1.0, 0.0))]);
        let b = constant_tensor(vec![2, 5, 9], &[(vec![K00, K11, K01], c(2.0, 0.0))]);
        let r = a.contract(&b).unwrap();
        assert_eq!(r.rank(), 3);
        assert_eq!(r.indices(), &[5, 7, 9]);
        // Sharing both indices -> rank 0.
        let p = constant_tensor(
            vec![1, 2],
            &[
                (vec![K00, K01], c(1.0, 0.0)),
                (vec![K10, K11], c(2.0, 0.0)),
            ],
        );
        let q = constant_tensor(
            vec![2, 1],
            &[
                (vec![K01, K00], c(3.0, 0.0)),
                (vec![K11, K10], c(-1.0, 0.0)),
            ],
        );
        // Note q's index order is (2, 1): its tuple (K01, K00) pairs with
        // p's (K00, K01). Result = 1*3 + 2*(-1) = 1.
        let s = p.contract(&q).unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(
            s.scalar_value().unwrap().coefficient(&crate::poly::Monomial::one()),
            c(1.0, 0.0)
        );
        // Disjoint index sets are not contractible.
        let d = constant_tensor(vec![4], &[(vec![K00], c(1.0, 0.0))]);
        assert_eq!(a.contract(&d).unwrap_err(), TensorError::NoSharedIndex);
    }

    /// Literal implementation of the contraction sum for the oracle test:
    /// iterates over every joint tuple of both operands, multiplying entries
    /// whose shared components agree.
    fn naive_contract(
        a: &AlgebraicTensor,
        b: &AlgebraicTensor,
    ) -> (Vec<IndexLabel>, BTreeMap<u64, Complex64>) {
        let mut all: Vec<IndexLabel> = a.indices().to_vec();
        for l in b.indices() {
            if !all.contains(l) {
                all.push(*l);
            }
        }
        all.sort_unstable();
        let shared: Vec<IndexLabel> = a
            .indices()
            .iter()
            .copied()
            .filter(|l| b.indices().contains(l))
            .collect();
        let out: Vec<IndexLabel> = all
            .iter()
            .copied()
            .filter(|l| !shared.contains(l))
            .collect();
        let empty = Assignment::new();
        let mut acc: BTreeMap<u64, Complex64> = BTreeMap::new();
        // Joint assignment of a PiElement to every label in the union.
        for joint in 0..(1u64 << (2 * all.len())) {
            let elem_of = |label: IndexLabel| -> PiElement {
                let pos = all.iter().position(|&l| l == label).unwrap();
                PiElement::from_code(joint >> (2 * pos))
            };
            let a_tuple: Vec<PiElement> = a.indices().iter().map(|&l| elem_of(l)).collect();
            let b_tuple: Vec<PiElement> = b.indices().iter().map(|&l| elem_of(l)).collect();
            let prod = a.entry(&a_tuple).unwrap().eval(&empty).unwrap()
                * b.entry(&b_tuple).unwrap().eval(&empty).unwrap();
            let mut out_code = 0u64;
            for (slot, &label) in out.iter().enumerate() {
                out_code |= elem_of(label).code() << (2 * slot);
            }
            *acc.entry(out_code).or_insert(Complex64::ZERO) += prod;
        }
        acc.retain(|_, v| *v != Complex64::ZERO);
        (out, acc)
    }

    #[test]
    fn contraction_matches_naive_oracle_on_constant_tensors() {
        // Integer-valued coefficients keep both routes exact, so the
        // comparison is equality, not tolerance.
        let mut state = 0x243F6A8885A308D3u64;
        let mut next = move || {
            // xorshift64
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for case in 0..200 {
            let ra = 1 + (next() % 3) as usize;
            let rb = 1 + (next() % 3) as usize;
            let shared = 1 + (next() as usize % ra.min(rb));
            // Shared labels 1..=shared; private labels disjoint above.
            let a_idx: Vec<u32> = (1..=shared as u32)
                .chain(10..10 + (ra - shared) as u32)
                .collect();
            let b_idx: Vec<u32> = (1..=shared as u32)
                .chain(20..20 + (rb - shared) as u32)
                .collect();
            let varset = VarSet::empty();
            let mut fill = |indices: &[u32]| {
                let rank = indices.len();
                let mut entries: Vec<(Vec<PiElement>, Polynomial)> = Vec::new();
                for code in 0..1u64 << (2 * rank) {
                    if next() % 3 == 0 {
                        continue;
                    }
                    let coeff = c((next() % 9) as f64 - 4.0, (next() % 9) as f64 - 4.0);
                    entries.push((decode_tuple(code, rank), Polynomial::constant(&varset, coeff)));
                }
                AlgebraicTensor::new(indices.to_vec(), &varset, entries).unwrap()
            };
            let a = fill(&a_idx);
            let b = fill(&b_idx);
            let fast = a.contract(&b).unwrap();
            let (naive_out, naive_entries) = naive_contract(&a, &b);
            assert_eq!(fast.indices(), naive_out.as_slice(), "case {case}");
            let empty = Assignment::new();
            let fast_entries: BTreeMap<u64, Complex64> = fast
                .nonzero_entries_coded()
                .map(|(code, p)| (code, p.eval(&empty).unwrap()))
                .collect();
            assert_eq!(fast_entries, naive_entries, "case {case}");
        }
    }

    #[test]
    fn degree_is_additive_under_contraction() {
        use PiElement::*;
        let varset = vs(&["x", "y"]);
        let x = Polynomial::variable(&varset, "x").unwrap();
        let y = Polynomial::variable(&varset, "y").unwrap();
        let xy = x.mul(&y).unwrap();
        let a = AlgebraicTensor::new(
            vec![1, 2],
            &varset,
            [
                (vec![K00, K00], xy.clone()),
                (vec![K11, K01], Polynomial::constant_re(&varset, 2.0)),
            ],
        )
        .unwrap();
        let b = AlgebraicTensor::new(vec![2], &varset, [(vec![K00], y.clone())]).unwrap();
        assert_eq!(a.tensor_degree(), 2);
        assert_eq!(b.tensor_degree(), 1);
        let r = a.contract(&b).unwrap();
        assert_eq!(r.tensor_degree(), 3); // x*y * y, no cancellation
        assert!(r.tensor_degree() <= a.tensor_degree() + b.tensor_degree());
    }

    #[test]
    fn sparse_storage_above_dense_limit() {
        use PiElement::*;
        // Rank 9 exceeds DENSE_RANK_LIMIT; storage must stay sparse and
        // contraction against a rank-1 tensor brings it back to dense rank 8.
        let varset = VarSet::empty();
        let indices: Vec<u32> = (1..=9).collect();
        let one_tuple = vec![K00; 9];
        let big = AlgebraicTensor::new(
            indices,
            &varset,
            [(one_tuple, Polynomial::constant_re(&varset, 2.0))],
        )
        .unwrap();
        assert_eq!(big.rank(), 9);
        assert_eq!(big.num_nonzero_entries(), 1);
        let probe = AlgebraicTensor::new(
            vec![9],
            &varset,
            [(vec![K00], Polynomial::constant_re(&varset, 0.5))],
        )
        .unwrap();
        let r = big.contract(&probe).unwrap();
        assert_eq!(r.rank(), 8);
        let entry = r.entry(&[K00; 8]).unwrap();
        assert_eq!(
            entry.coefficient(&crate::poly::Monomial::one()),
            c(1.0, 0.0)
        );
    }

    #[test]
    fn canonicalization_reorders_indices() {
        use PiElement::*;
        let varset = VarSet::empty();
        let t = constant_tensor(vec![5, 2], &[(vec![K01, K10], c(3.0, 0.0))]);
        let canon = t.canonicalized();
        assert_eq!(canon.indices(), &[2, 5]);
        // The entry moved with its index: position of label 2 now first.
        assert_eq!(
            canon.entry(&[K10, K01]).unwrap(),
            Polynomial::constant_re(&varset, 3.0)
        );
        assert_eq!(t.max_entry_deviation(&canon).unwrap(), 0.0);
    }
}
