//! Element-distinctness truth tables and brute-force subfunction counting.
//!
//! The inputs of the distinctness function on `n = 2k log2(k)` variables are
//! read as `k` blocks of `2 log2(k)` bits; the function is 1 exactly when
//! the block values are pairwise distinct. Fixing all blocks but one induces
//! a subfunction of the free block; counting the distinct subfunctions over
//! all fixings is the quantity checked here at desk scale, by exhaustive
//! enumeration against an independent block-value oracle.

use serde::Serialize;
use std::collections::HashSet;

use crate::par;
use crate::poly::{Assignment, PolyError, VarSet};

/// Enumeration caps: truth tables up to 2^24 rows, fixings up to 2^20.
pub const MAX_TABLE_VARS: usize = 24;
pub const MAX_FIXED_VARS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DistinctError {
    #[error("k = {0} must be a power of two, at least 2")]
    BadBlockCount(usize),
    #[error("n = {0} variables exceeds the enumeration cap {1}")]
    TooManyVariables(usize, usize),
    #[error("{0} fixed variables exceed the enumeration cap {MAX_FIXED_VARS}")]
    TooManyFixedVariables(usize),
    #[error("truth table length {got} does not match 2^{vars}")]
    BadTableLength { got: usize, vars: usize },
    #[error("variables {0:?} are not a subset of the table's variables")]
    NotSubset(Vec<String>),
    #[error("assignment does not determine a table row: missing {0:?}")]
    MissingAssignment(String),
    #[error(
        "subfunction count mismatch for k={k} block {block}: enumeration {via_table}, oracle {via_blocks}"
    )]
    OracleMismatch {
        k: usize,
        block: usize,
        via_table: u64,
        via_blocks: u64,
    },
    #[error(transparent)]
    Poly(#[from] PolyError),
}

// ===================== truth tables =====================

/// A total Boolean function over a [`VarSet`], stored as `2^n` bits in
/// canonical assignment order (see [`Assignment::for_index`]).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthTable {
    varset: VarSet,
    bits: Vec<bool>,
}

impl TruthTable {
    /// Tabulates `f` over all assignments of `varset`.
    pub fn from_fn<F>(varset: &VarSet, f: F) -> Result<Self, DistinctError>
    where
        F: Fn(&Assignment) -> bool,
    {
        let n = varset.len();
        if n > MAX_TABLE_VARS {
            return Err(DistinctError::TooManyVariables(n, MAX_TABLE_VARS));
        }
        let bits = (0..1u64 << n)
            .map(|i| f(&Assignment::for_index(varset, i)))
            .collect();
        Ok(TruthTable {
            varset: varset.clone(),
            bits,
        })
    }

    pub fn from_bits(varset: &VarSet, bits: Vec<bool>) -> Result<Self, DistinctError> {
        let n = varset.len();
        if n > MAX_TABLE_VARS {
            return Err(DistinctError::TooManyVariables(n, MAX_TABLE_VARS));
        }
        if bits.len() != 1 << n {
            return Err(DistinctError::BadTableLength {
                got: bits.len(),
                vars: n,
            });
        }
        Ok(TruthTable {
            varset: varset.clone(),
            bits,
        })
    }

    pub fn varset(&self) -> &VarSet {
        &self.varset
    }

    pub fn num_vars(&self) -> usize {
        self.varset.len()
    }

    /// Number of rows (`2^n`, never zero).
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    /// Always false: a table over `n` variables has `2^n >= 1` rows.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Row at the canonical assignment index.
    pub fn value_at(&self, index: u64) -> bool {
        self.bits[index as usize]
    }

    /// Value at an explicit assignment (must cover the variable set).
    pub fn value(&self, alpha: &Assignment) -> Result<bool, DistinctError> {
        let index = alpha.index_over(&self.varset).map_err(|e| match e {
            PolyError::MissingAssignment(v) => DistinctError::MissingAssignment(v),
            other => DistinctError::Poly(other),
        })?;
        Ok(self.value_at(index))
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().filter(|b| **b).count()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// The subfunction obtained by fixing the variables bound in `beta`.
    /// The result ranges over the remaining variables.
    pub fn restrict(&self, beta: &Assignment) -> Result<TruthTable, DistinctError> {
        let fixed = VarSet::new(
            beta.iter()
                .map(|(n, _)| n)
                .filter(|n| self.varset.contains(n)),
        )?;
        let free = self.varset.difference(&fixed);
        let table = TruthTable::from_fn(&free, |gamma| {
            let full = beta.merged_with(gamma);
            self.value(&full).expect("full assignment covers the table")
        })?;
        Ok(table)
    }
}

// ===================== blocked variable sets =====================

/// The variable set of the distinctness function: `k` blocks of
/// `2 log2(k)` bits. Block-major variable names (`x00_00`, `x00_01`, ...)
/// keep the canonical order aligned with the block structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockedVarSet {
    varset: VarSet,
    block_count: usize,
    block_bits: usize,
}

impl BlockedVarSet {
    /// `k` must be a power of two, at least 2, with `2k log2(k)` within the
    /// enumeration cap.
    pub fn new(k: usize) -> Result<Self, DistinctError> {
        if k < 2 || !k.is_power_of_two() {
            return Err(DistinctError::BadBlockCount(k));
        }
        let block_bits = 2 * k.trailing_zeros() as usize;
        let n = k * block_bits;
        if n > MAX_TABLE_VARS {
            return Err(DistinctError::TooManyVariables(n, MAX_TABLE_VARS));
        }
        let names: Vec<String> = (0..k)
            .flat_map(|b| (0..block_bits).map(move |j| format!("x{b:02}_{j:02}")))
            .collect();
        Ok(BlockedVarSet {
            varset: VarSet::new(names)?,
            block_count: k,
            block_bits,
        })
    }

    pub fn varset(&self) -> &VarSet {
        &self.varset
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_bits(&self) -> usize {
        self.block_bits
    }

    pub fn num_vars(&self) -> usize {
        self.block_count * self.block_bits
    }

    /// The variables of block `i` as their own set.
    pub fn block(&self, i: usize) -> VarSet {
        VarSet::new(
            (0..self.block_bits).map(|j| format!("x{i:02}_{j:02}")),
        )
        .expect("block names are valid")
    }

    /// Block values encoded by a canonical assignment index (big-endian
    /// within each block, blocks in order).
    pub fn block_values(&self, index: u64) -> Vec<u64> {
        let n = self.num_vars();
        (0..self.block_count)
            .map(|b| {
                let mut v = 0u64;
                for j in 0..self.block_bits {
                    let pos = b * self.block_bits + j;
                    let bit = (index >> (n - 1 - pos)) & 1;
                    v = (v << 1) | bit;
                }
                v
            })
            .collect()
    }
}

// ===================== element distinctness =====================

/// Builds the distinctness function for `k` blocks: 1 exactly when all
/// block values are pairwise distinct.
pub fn element_distinctness(k: usize) -> Result<(BlockedVarSet, TruthTable), DistinctError> {
    let blocks = BlockedVarSet::new(k)?;
    let n = blocks.num_vars();
    let bits: Vec<bool> = (0..1u64 << n)
        .map(|idx| {
            let values = blocks.block_values(idx);
            let mut seen = 0u64; // block values fit in block_bits <= 8 bits here
            for v in values {
                if seen & (1 << v) != 0 {
                    return false;
                }
                seen |= 1 << v;
            }
            true
        })
        .collect();
    let table = TruthTable::from_bits(blocks.varset(), bits)?;
    Ok((blocks, table))
}

/// Counts the distinct subfunctions of `f` over `y` obtained by fixing the
/// remaining variables in every possible way.
pub fn count_subfunctions(f: &TruthTable, y: &VarSet) -> Result<u64, DistinctError> {
    let x = f.varset();
    let missing: Vec<String> = y.iter().filter(|n| !x.contains(n)).map(str::to_string).collect();
    if !missing.is_empty() {
        return Err(DistinctError::NotSubset(missing));
    }
    let z = x.difference(y);
    if z.len() > MAX_FIXED_VARS {
        return Err(DistinctError::TooManyFixedVariables(z.len()));
    }
    let n = x.len();
    let y_positions: Vec<usize> = y.iter().map(|v| x.position(v).unwrap()).collect();
    let z_positions: Vec<usize> = z.iter().map(|v| x.position(v).unwrap()).collect();
    let y_len = y_positions.len();
    let z_len = z_positions.len();
    let words = (1usize << y_len).div_ceil(64);

    let signatures: Vec<Vec<u64>> = par::map_range(1u64 << z_len, |bz| {
        let mut base = 0u64;
        for (j, &pos) in z_positions.iter().enumerate() {
            if (bz >> (z_len - 1 - j)) & 1 == 1 {
                base |= 1u64 << (n - 1 - pos);
            }
        }
        let mut signature = vec![0u64; words];
        for by in 0..1u64 << y_len {
            let mut full = base;
            for (j, &pos) in y_positions.iter().enumerate() {
                if (by >> (y_len - 1 - j)) & 1 == 1 {
                    full |= 1u64 << (n - 1 - pos);
                }
            }
            if f.value_at(full) {
                signature[(by / 64) as usize] |= 1u64 << (by % 64);
            }
        }
        signature
    });

    let distinct: HashSet<Vec<u64>> = signatures.into_iter().collect();
    Ok(distinct.len() as u64)
}

/// Independent oracle for the distinctness family: enumerates the *values*
/// of the fixed blocks directly (never touching the tabulated function) and
/// reads the induced subfunction off the distinctness definition. The
/// family is symmetric in its blocks, so one count covers every choice of
/// free block.
fn count_subfunctions_blockwise(k: usize) -> Result<u64, DistinctError> {
    let blocks = BlockedVarSet::new(k)?;
    let alphabet = 1u64 << blocks.block_bits();
    let fixed_blocks = k - 1;
    let mut distinct: HashSet<u64> = HashSet::new();
    let total = alphabet.pow(fixed_blocks as u32);
    for t in 0..total {
        let mut rest = t;
        let mut seen = 0u64;
        let mut others_distinct = true;
        for _ in 0..fixed_blocks {
            let v = rest % alphabet;
            rest /= alphabet;
            if seen & (1 << v) != 0 {
                others_distinct = false;
                break;
            }
            seen |= 1 << v;
        }
        // The subfunction is s -> [s avoids every fixed value], which is
        // determined by the avoided set; any repeated fixed value collapses
        // it to the constant-0 function (signature 0).
        let mut signature = 0u64;
        if others_distinct {
            for s in 0..alphabet {
                if seen & (1 << s) == 0 {
                    signature |= 1 << s;
                }
            }
        }
        distinct.insert(signature);
    }
    Ok(distinct.len() as u64)
}

// ===================== small-scale subfunction report =====================

#[derive(Debug, Clone, Serialize)]
pub struct SubfunctionCountEntry {
    pub k: usize,
    pub n: usize,
    /// Count per free block, via generic truth-table enumeration.
    pub per_block: Vec<u64>,
    /// Count via the independent block-value oracle.
    pub oracle: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubfunctionCountReport {
    pub entries: Vec<SubfunctionCountEntry>,
    /// True when counts never decreased as k doubled.
    pub monotone: bool,
}

/// Runs the desk-scale subfunction count for every power-of-two `k` from 2
/// up to `max_k` (within the enumeration caps), cross-checking the generic
/// enumeration against the block-value oracle for every block.
pub fn check_subfunction_counts(max_k: usize) -> Result<SubfunctionCountReport, DistinctError> {
    if max_k < 2 {
        return Err(DistinctError::BadBlockCount(max_k));
    }
    let mut entries = Vec::new();
    let mut monotone = true;
    let mut previous: Option<u64> = None;
    let mut k = 2;
    while k <= max_k {
        match BlockedVarSet::new(k) {
            Ok(_) => {}
            Err(DistinctError::TooManyVariables(..)) => break,
            Err(e) => return Err(e),
        }
        let (blocks, table) = element_distinctness(k)?;
        let oracle_count = count_subfunctions_blockwise(k)?;
        let mut per_block = Vec::with_capacity(k);
        for b in 0..k {
            let via_table = count_subfunctions(&table, &blocks.block(b))?;
            if via_table != oracle_count {
                return Err(DistinctError::OracleMismatch {
                    k,
                    block: b,
                    via_table,
                    via_blocks: oracle_count,
                });
            }
            per_block.push(via_table);
        }
        if let Some(prev) = previous {
            if per_block[0] < prev {
                monotone = false;
            }
        }
        previous = Some(per_block[0]);
        entries.push(SubfunctionCountEntry {
            k,
            n: blocks.num_vars(),
            per_block,
            oracle: oracle_count,
        });
        k *= 2;
    }
    Ok(SubfunctionCountReport { entries, monotone })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truth_table_roundtrip_and_restrict() {
        let vs = VarSet::new(["a", "b"]).unwrap();
        // XOR
        let f = TruthTable::from_fn(&vs, |alpha| {
            alpha.get("a").unwrap() ^ alpha.get("b").unwrap()
        })
        .unwrap();
        assert_eq!(f.len(), 4);
        assert_eq!(f.ones(), 2);
        assert!(!f.value_at(0)); // a=0, b=0
        assert!(f.value_at(1)); // a=0, b=1
        let fixed = f
            .restrict(&Assignment::from_pairs([("a", true)]))
            .unwrap();
        assert_eq!(fixed.num_vars(), 1);
        assert!(fixed.value_at(0)); // b=0 -> 1^0 = 1
        assert!(!fixed.value_at(1));
    }

    #[test]
    fn blocked_varset_shapes() {
        let b = BlockedVarSet::new(2).unwrap();
        assert_eq!(b.block_count(), 2);
        assert_eq!(b.block_bits(), 2);
        assert_eq!(b.num_vars(), 4);
        assert_eq!(b.varset().name(0), "x00_00");
        assert_eq!(b.block(1).name(0), "x01_00");
        assert_eq!(BlockedVarSet::new(3).unwrap_err(), DistinctError::BadBlockCount(3));
        assert_eq!(BlockedVarSet::new(1).unwrap_err(), DistinctError::BadBlockCount(1));
        // k = 8 needs 48 variables, over the cap.
        assert!(matches!(
            BlockedVarSet::new(8).unwrap_err(),
            DistinctError::TooManyVariables(48, _)
        ));
        // index 0b0110 over (x00_00, x00_01, x01_00, x01_01): blocks (01, 10).
        assert_eq!(b.block_values(0b0110), vec![1, 2]);
    }

    #[test]
    fn distinctness_k2_truth_table_is_inequality() {
        let (blocks, table) = element_distinctness(2).unwrap();
        assert_eq!(table.len(), 16);
        // 16 pairs of 2-bit values, 4 of them equal: 12 ones.
        assert_eq!(table.ones(), 12);
        for idx in 0..16u64 {
            let values = blocks.block_values(idx);
            assert_eq!(table.value_at(idx), values[0] != values[1], "index {idx}");
        }
    }

    #[test]
    fn distinctness_k2_has_four_subfunctions() {
        // Fixing the second 2-bit block to value s leaves s1 -> [s1 != s]:
        // four distinct subfunctions, one per s.
        let (blocks, table) = element_distinctness(2).unwrap();
        for b in 0..2 {
            let count = count_subfunctions(&table, &blocks.block(b)).unwrap();
            assert_eq!(count, 4, "block {b}");
        }
    }

    #[test]
    fn distinctness_k4_counts_match_both_routes_and_all_blocks() {
        let report = check_subfunction_counts(4).unwrap();
        assert_eq!(report.entries.len(), 2);
        assert!(report.monotone);
        let k2 = &report.entries[0];
        assert_eq!(k2.per_block, vec![4, 4]);
        assert_eq!(k2.oracle, 4);
        let k4 = &report.entries[1];
        assert_eq!(k4.n, 16);
        assert_eq!(k4.per_block.len(), 4);
        // All four blocks agree by symmetry.
        assert!(k4.per_block.iter().all(|&c| c == k4.per_block[0]));
        assert_eq!(k4.per_block[0], k4.oracle);
        // Fixing three of four 4-bit blocks: distinct triples give C(16,3)
        // avoided-value sets, plus the constant-0 subfunction from any
        // repeated triple: 560 + 1.
        assert_eq!(k4.oracle, 561);
    }

    #[test]
    fn count_subfunctions_validates_inputs() {
        let vs = VarSet::new(["a", "b"]).unwrap();
        let f = TruthTable::from_fn(&vs, |_| true).unwrap();
        let foreign = VarSet::new(["zz"]).unwrap();
        assert!(matches!(
            count_subfunctions(&f, &foreign).unwrap_err(),
            DistinctError::NotSubset(_)
        ));
        // Fixing zero variables leaves exactly one subfunction: f itself.
        assert_eq!(count_subfunctions(&f, &vs).unwrap(), 1);
        // Fixing everything: constant-true has a single distinct restriction.
        assert_eq!(count_subfunctions(&f, &VarSet::empty()).unwrap(), 1);
    }
}
