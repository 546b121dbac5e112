//! Sparse multivariate polynomials over complex coefficients.
//!
//! A polynomial is a map from monomials to coefficients, kept canonical by
//! pruning every coefficient with magnitude at most [`ZERO_EPS`](crate::ZERO_EPS)
//! after each operation. Degrees are formal: `x^2` has degree 2 even though
//! the variables only ever take the Boolean values 0 and 1. Callers that
//! want the multilinear image use [`Polynomial::normalize_multilinear`]
//! before evaluation-insensitive comparisons.

use num_complex::Complex64;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::ZERO_EPS;

/// Errors produced by polynomial and variable-set operations.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error("invalid variable name {0:?}: names must be nonempty ASCII [A-Za-z0-9_]")]
    InvalidVariableName(String),
    #[error("variable {0:?} is not in the variable set")]
    UnknownVariable(String),
    #[error("operands are defined over different variable sets")]
    VarSetMismatch,
    #[error("assignment is missing a value for variable {0:?}")]
    MissingAssignment(String),
    #[error("coefficient is not finite")]
    NonFiniteCoefficient,
    #[error("exponent must be positive")]
    ZeroExponent,
    #[error("line {line}: {message}")]
    TextParse { line: usize, message: String },
    #[error("assignment entry {0:?} is malformed (expected name=0 or name=1)")]
    BadAssignmentEntry(String),
}

// ===================== variable sets =====================

/// An ordered set of distinct variable names.
///
/// Names are sorted, so the ordering is total and stable; it fixes the
/// canonical assignment enumeration order and the serialization order of
/// monomial factors. Cloning is cheap (shared storage).
#[derive(Clone, Eq)]
pub struct VarSet {
    names: Arc<Vec<String>>,
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_')
}

impl VarSet {
    /// Builds a variable set from the given names, sorting and deduplicating.
    ///
    /// Names must be nonempty and consist of ASCII alphanumerics or `_`
    /// (they appear bare in the textual polynomial format).
    pub fn new<I, S>(names: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        for name in &names {
            if !valid_name(name) {
                return Err(PolyError::InvalidVariableName(name.clone()));
            }
        }
        names.sort();
        names.dedup();
        Ok(VarSet {
            names: Arc::new(names),
        })
    }

    /// The empty variable set (constant polynomials live here).
    pub fn empty() -> Self {
        VarSet {
            names: Arc::new(Vec::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Name at position `i` in canonical (sorted) order.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(String::as_str)
    }

    /// Position of `name` in canonical order, if present.
    pub fn position(&self, name: &str) -> Option<usize> {
        self.names.binary_search_by(|n| n.as_str().cmp(name)).ok()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.position(name).is_some()
    }

    pub fn is_subset_of(&self, other: &VarSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    /// Variables of `self` that are not in `other`.
    pub fn difference(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.iter().filter(|n| !other.contains(n)))
            .expect("names already validated")
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        VarSet::new(self.iter().chain(other.iter())).expect("names already validated")
    }
}

impl PartialEq for VarSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.names, &other.names) || self.names == other.names
    }
}

impl fmt::Debug for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VarSet{:?}", self.names)
    }
}

// ===================== assignments =====================

/// A Boolean assignment: variable name -> {0, 1}.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Assignment {
    values: BTreeMap<String, bool>,
}

impl Assignment {
    pub fn new() -> Self {
        Assignment::default()
    }

    pub fn from_pairs<I, S>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, bool)>,
        S: Into<String>,
    {
        Assignment {
            values: pairs.into_iter().map(|(n, v)| (n.into(), v)).collect(),
        }
    }

    /// Parses the `name=0,name=1` syntax used on the command line.
    pub fn parse(text: &str) -> Result<Self, PolyError> {
        let mut values = BTreeMap::new();
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Ok(Assignment { values });
        }
        for entry in trimmed.split(',') {
            let entry = entry.trim();
            let (name, value) = entry
                .split_once('=')
                .ok_or_else(|| PolyError::BadAssignmentEntry(entry.to_string()))?;
            let bit = match value.trim() {
                "0" => false,
                "1" => true,
                _ => return Err(PolyError::BadAssignmentEntry(entry.to_string())),
            };
            let name = name.trim();
            if !valid_name(name) {
                return Err(PolyError::InvalidVariableName(name.to_string()));
            }
            values.insert(name.to_string(), bit);
        }
        Ok(Assignment { values })
    }

    pub fn set(&mut self, name: impl Into<String>, value: bool) {
        self.values.insert(name.into(), value);
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.values.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, bool)> {
        self.values.iter().map(|(n, v)| (n.as_str(), *v))
    }

    /// True when every variable of `vars` has a value.
    pub fn covers(&self, vars: &VarSet) -> bool {
        vars.iter().all(|n| self.values.contains_key(n))
    }

    /// The canonical `index`-th assignment over `vars`: the variable at
    /// position `j` receives bit `index >> (len-1-j) & 1` (first variable is
    /// the most significant bit).
    pub fn for_index(vars: &VarSet, index: u64) -> Self {
        let n = vars.len();
        debug_assert!(n == 0 || index < (1u64 << n));
        let mut values = BTreeMap::new();
        for (j, name) in vars.iter().enumerate() {
            let bit = (index >> (n - 1 - j)) & 1 == 1;
            values.insert(name.to_string(), bit);
        }
        Assignment { values }
    }

    /// The canonical index of this assignment over `vars` (inverse of
    /// [`Assignment::for_index`]). Errors when a variable is unassigned.
    pub fn index_over(&self, vars: &VarSet) -> Result<u64, PolyError> {
        let n = vars.len();
        let mut index = 0u64;
        for (j, name) in vars.iter().enumerate() {
            let bit = self
                .get(name)
                .ok_or_else(|| PolyError::MissingAssignment(name.to_string()))?;
            if bit {
                index |= 1u64 << (n - 1 - j);
            }
        }
        Ok(index)
    }

    /// All `2^|vars|` assignments in canonical order.
    pub fn enumerate(vars: &VarSet) -> Vec<Assignment> {
        let n = vars.len();
        assert!(n <= 32, "assignment enumeration over {n} variables");
        (0..1u64 << n).map(|i| Assignment::for_index(vars, i)).collect()
    }

    /// Merges two assignments with disjoint-or-agreeing domains; `other`
    /// wins on overlap.
    pub fn merged_with(&self, other: &Assignment) -> Assignment {
        let mut values = self.values.clone();
        for (n, v) in &other.values {
            values.insert(n.clone(), *v);
        }
        Assignment { values }
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (name, value) in &self.values {
            if !first {
                write!(f, ",")?;
            }
            first = false;
            write!(f, "{}={}", name, if *value { 1 } else { 0 })?;
        }
        Ok(())
    }
}

// ===================== monomials =====================

/// A product of variable powers with positive exponents, e.g. `x^2 y`.
///
/// Factors are kept sorted by variable name; the empty monomial is the
/// constant 1.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Monomial {
    factors: Vec<(String, u32)>,
}

impl Monomial {
    /// The constant monomial 1.
    pub fn one() -> Self {
        Monomial::default()
    }

    /// The monomial consisting of a single variable.
    pub fn var(name: impl Into<String>) -> Self {
        Monomial {
            factors: vec![(name.into(), 1)],
        }
    }

    /// Builds a monomial from (name, exponent) pairs; exponents of equal
    /// names are added, zero exponents are rejected.
    pub fn from_factors<I, S>(factors: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (S, u32)>,
        S: Into<String>,
    {
        let mut map: BTreeMap<String, u32> = BTreeMap::new();
        for (name, exp) in factors {
            if exp == 0 {
                return Err(PolyError::ZeroExponent);
            }
            *map.entry(name.into()).or_insert(0) += exp;
        }
        Ok(Monomial {
            factors: map.into_iter().collect(),
        })
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    /// Total degree: the sum of all exponents.
    pub fn degree(&self) -> u32 {
        self.factors.iter().map(|(_, e)| *e).sum()
    }

    pub fn factors(&self) -> impl Iterator<Item = (&str, u32)> {
        self.factors.iter().map(|(n, e)| (n.as_str(), *e))
    }

    pub fn contains_var(&self, name: &str) -> bool {
        self.factors.iter().any(|(n, _)| n == name)
    }

    /// Product of two monomials (exponents add).
    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut factors = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut a, mut b) = (self.factors.iter().peekable(), other.factors.iter().peekable());
        loop {
            match (a.peek(), b.peek()) {
                (Some((na, ea)), Some((nb, eb))) => match na.cmp(nb) {
                    std::cmp::Ordering::Less => {
                        factors.push((na.clone(), *ea));
                        a.next();
                    }
                    std::cmp::Ordering::Greater => {
                        factors.push((nb.clone(), *eb));
                        b.next();
                    }
                    std::cmp::Ordering::Equal => {
                        factors.push((na.clone(), ea + eb));
                        a.next();
                        b.next();
                    }
                },
                (Some(_), None) => {
                    factors.extend(a.by_ref().cloned());
                    break;
                }
                (None, Some(_)) => {
                    factors.extend(b.by_ref().cloned());
                    break;
                }
                (None, None) => break,
            }
        }
        Monomial { factors }
    }

    /// Caps every exponent at 1 (the image of the monomial on {0,1} inputs).
    pub fn multilinear(&self) -> Monomial {
        Monomial {
            factors: self.factors.iter().map(|(n, _)| (n.clone(), 1)).collect(),
        }
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        let mut first = true;
        for (name, exp) in &self.factors {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{name}^{exp}")?;
        }
        Ok(())
    }
}

// ===================== polynomials =====================

/// A multivariate polynomial over complex coefficients, sparse in its
/// monomials, defined over a fixed [`VarSet`].
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    varset: VarSet,
    terms: BTreeMap<Monomial, Complex64>,
}

fn negligible(c: Complex64) -> bool {
    c.norm() <= ZERO_EPS
}

impl Polynomial {
    /// The zero polynomial over `varset` (no stored terms, degree 0).
    pub fn zero(varset: &VarSet) -> Self {
        Polynomial {
            varset: varset.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// A constant polynomial.
    pub fn constant(varset: &VarSet, value: Complex64) -> Self {
        let mut p = Polynomial::zero(varset);
        if !negligible(value) {
            p.terms.insert(Monomial::one(), value);
        }
        p
    }

    /// A real constant polynomial.
    pub fn constant_re(varset: &VarSet, value: f64) -> Self {
        Polynomial::constant(varset, Complex64::new(value, 0.0))
    }

    /// The polynomial `name` (a single degree-1 term). Errors when the
    /// variable is not in `varset`.
    pub fn variable(varset: &VarSet, name: &str) -> Result<Self, PolyError> {
        if !varset.contains(name) {
            return Err(PolyError::UnknownVariable(name.to_string()));
        }
        let mut p = Polynomial::zero(varset);
        p.terms.insert(Monomial::var(name), Complex64::new(1.0, 0.0));
        Ok(p)
    }

    /// Builds a polynomial from (monomial, coefficient) terms. Coefficients
    /// of equal monomials are added; near-zero results are pruned. Every
    /// variable must belong to `varset` and every coefficient must be finite.
    pub fn from_terms<I>(varset: &VarSet, terms: I) -> Result<Self, PolyError>
    where
        I: IntoIterator<Item = (Monomial, Complex64)>,
    {
        let mut map: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (mono, coeff) in terms {
            if !coeff.re.is_finite() || !coeff.im.is_finite() {
                return Err(PolyError::NonFiniteCoefficient);
            }
            for (name, _) in mono.factors() {
                if !varset.contains(name) {
                    return Err(PolyError::UnknownVariable(name.to_string()));
                }
            }
            *map.entry(mono).or_insert(Complex64::ZERO) += coeff;
        }
        map.retain(|_, c| !negligible(*c));
        Ok(Polynomial {
            varset: varset.clone(),
            terms: map,
        })
    }

    pub fn varset(&self) -> &VarSet {
        &self.varset
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical (monomial-sorted) order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, Complex64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    /// Coefficient of `mono` (zero when absent).
    pub fn coefficient(&self, mono: &Monomial) -> Complex64 {
        self.terms.get(mono).copied().unwrap_or(Complex64::ZERO)
    }

    /// Formal total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// True when some variable of `y` occurs in a stored term.
    pub fn constrains(&self, y: &VarSet) -> bool {
        self.terms
            .keys()
            .any(|m| m.factors().any(|(name, _)| y.contains(name)))
    }

    /// True when `name` occurs in a stored term.
    pub fn mentions(&self, name: &str) -> bool {
        self.terms.keys().any(|m| m.contains_var(name))
    }

    fn check_same_varset(&self, other: &Polynomial) -> Result<(), PolyError> {
        if self.varset != other.varset {
            return Err(PolyError::VarSetMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same_varset(other)?;
        Ok(self.add_same_varset(other))
    }

    pub(crate) fn add_same_varset(&self, other: &Polynomial) -> Polynomial {
        let mut terms = self.terms.clone();
        for (mono, coeff) in &other.terms {
            *terms.entry(mono.clone()).or_insert(Complex64::ZERO) += coeff;
        }
        terms.retain(|_, c| !negligible(*c));
        Polynomial {
            varset: self.varset.clone(),
            terms,
        }
    }

    /// In-place sum for the contraction accumulator; callers guarantee
    /// matching varsets and prune afterwards via [`Polynomial::prune`].
    pub(crate) fn add_assign_same_varset(&mut self, other: Polynomial) {
        debug_assert!(self.varset == other.varset);
        for (mono, coeff) in other.terms {
            *self.terms.entry(mono).or_insert(Complex64::ZERO) += coeff;
        }
    }

    /// Drops terms whose coefficients fell below the pruning threshold.
    pub(crate) fn prune(&mut self) {
        self.terms.retain(|_, c| !negligible(*c));
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Polynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, factor: Complex64) -> Polynomial {
        let mut terms: BTreeMap<Monomial, Complex64> = self
            .terms
            .iter()
            .map(|(m, c)| (m.clone(), c * factor))
            .collect();
        terms.retain(|_, c| !negligible(*c));
        Polynomial {
            varset: self.varset.clone(),
            terms,
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Result<Polynomial, PolyError> {
        self.check_same_varset(other)?;
        Ok(self.mul_same_varset(other))
    }

    pub(crate) fn mul_same_varset(&self, other: &Polynomial) -> Polynomial {
        let mut terms: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                let mono = ma.mul(mb);
                *terms.entry(mono).or_insert(Complex64::ZERO) += ca * cb;
            }
        }
        terms.retain(|_, c| !negligible(*c));
        Polynomial {
            varset: self.varset.clone(),
            terms,
        }
    }

    /// Conjugates every coefficient. On real-valued (Boolean) inputs this is
    /// the pointwise complex conjugate of the polynomial.
    pub fn conjugate(&self) -> Polynomial {
        Polynomial {
            varset: self.varset.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c.conj())).collect(),
        }
    }

    /// Evaluates at a Boolean assignment. Every variable occurring in a
    /// stored term must be assigned.
    pub fn eval(&self, assignment: &Assignment) -> Result<Complex64, PolyError> {
        let mut total = Complex64::ZERO;
        for (mono, coeff) in &self.terms {
            let mut alive = true;
            for (name, _) in mono.factors() {
                match assignment.get(name) {
                    Some(true) => {}
                    Some(false) => {
                        alive = false;
                        break;
                    }
                    None => return Err(PolyError::MissingAssignment(name.to_string())),
                }
            }
            if alive {
                total += coeff;
            }
        }
        Ok(total)
    }

    /// Substitutes the variables bound by `beta` and re-homes the result over
    /// `target`. Every unbound variable occurring in a term must be in
    /// `target`.
    pub fn substitute(&self, beta: &Assignment, target: &VarSet) -> Result<Polynomial, PolyError> {
        let mut result = Polynomial::zero(target);
        for (mono, coeff) in &self.terms {
            let mut alive = true;
            let mut residual: Vec<(String, u32)> = Vec::new();
            for (name, exp) in mono.factors() {
                match beta.get(name) {
                    Some(true) => {}
                    Some(false) => {
                        alive = false;
                        break;
                    }
                    None => {
                        if !target.contains(name) {
                            return Err(PolyError::UnknownVariable(name.to_string()));
                        }
                        residual.push((name.to_string(), exp));
                    }
                }
            }
            if alive {
                let mono = Monomial { factors: residual };
                *result.terms.entry(mono).or_insert(Complex64::ZERO) += coeff;
            }
        }
        result.terms.retain(|_, c| !negligible(*c));
        Ok(result)
    }

    /// Replaces every exponent by 1 and merges terms: the unique multilinear
    /// polynomial agreeing with `self` on Boolean inputs.
    pub fn normalize_multilinear(&self) -> Polynomial {
        let mut terms: BTreeMap<Monomial, Complex64> = BTreeMap::new();
        for (mono, coeff) in &self.terms {
            *terms.entry(mono.multilinear()).or_insert(Complex64::ZERO) += coeff;
        }
        terms.retain(|_, c| !negligible(*c));
        Polynomial {
            varset: self.varset.clone(),
            terms,
        }
    }

    /// `p * conj(p)`: the squared-magnitude polynomial. Its value on Boolean
    /// inputs is |p(alpha)|^2 and its degree is at most twice deg(p).
    pub fn norm_square(&self) -> Polynomial {
        self.mul_same_varset(&self.conjugate())
    }

    /// Largest coefficientwise deviation between two polynomials over the
    /// union of their monomials. Errors on varset mismatch.
    pub fn max_coeff_deviation(&self, other: &Polynomial) -> Result<f64, PolyError> {
        self.check_same_varset(other)?;
        let mut worst = 0.0f64;
        for (mono, coeff) in &self.terms {
            worst = worst.max((coeff - other.coefficient(mono)).norm());
        }
        for (mono, coeff) in &other.terms {
            worst = worst.max((coeff - self.coefficient(mono)).norm());
        }
        Ok(worst)
    }

    // ---------- textual serialization ----------

    /// Serializes as one line per term: `coeff_re coeff_im [var^e ...]`,
    /// terms in canonical monomial order, factors in variable order. The
    /// zero polynomial serializes to the empty string. Floats round-trip
    /// exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (mono, coeff) in &self.terms {
            out.push_str(&format!("{} {}", coeff.re, coeff.im));
            for (name, exp) in mono.factors() {
                out.push_str(&format!(" {name}^{exp}"));
            }
            out.push('\n');
        }
        out
    }

    /// Parses the format produced by [`Polynomial::to_text`].
    pub fn from_text(varset: &VarSet, text: &str) -> Result<Polynomial, PolyError> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let mut tokens = line.split_whitespace();
            let parse_float = |tok: Option<&str>, lineno: usize| -> Result<f64, PolyError> {
                let tok = tok.ok_or(PolyError::TextParse {
                    line: lineno + 1,
                    message: "expected two leading coefficient components".into(),
                })?;
                let value: f64 = tok.parse().map_err(|_| PolyError::TextParse {
                    line: lineno + 1,
                    message: format!("bad float {tok:?}"),
                })?;
                if !value.is_finite() {
                    return Err(PolyError::NonFiniteCoefficient);
                }
                Ok(value)
            };
            let re = parse_float(tokens.next(), lineno)?;
            let im = parse_float(tokens.next(), lineno)?;
            let mut factors = Vec::new();
            for tok in tokens {
                let (name, exp) = tok.split_once('^').ok_or_else(|| PolyError::TextParse {
                    line: lineno + 1,
                    message: format!("bad factor {tok:?} (expected var^exp)"),
                })?;
                let exp: u32 = exp.parse().map_err(|_| PolyError::TextParse {
                    line: lineno + 1,
                    message: format!("bad exponent in {tok:?}"),
                })?;
                if exp == 0 {
                    return Err(PolyError::TextParse {
                        line: lineno + 1,
                        message: format!("zero exponent in {tok:?}"),
                    });
                }
                factors.push((name.to_string(), exp));
            }
            let mono = Monomial::from_factors(factors)?;
            terms.push((mono, Complex64::new(re, im)));
        }
        Polynomial::from_terms(varset, terms)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (mono, coeff) in &self.terms {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if mono.is_one() {
                write!(f, "({} {})", coeff.re, coeff.im)?;
            } else {
                write!(f, "({} {})*{}", coeff.re, coeff.im, mono)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn vars(names: &[&str]) -> VarSet {
        VarSet::new(names.iter().copied()).unwrap()
    }

    #[test]
    fn varset_sorts_and_dedups() {
        let vs = vars(&["y", "x", "y"]);
        assert_eq!(vs.len(), 2);
        assert_eq!(vs.name(0), "x");
        assert_eq!(vs.name(1), "y");
        assert_eq!(vs.position("y"), Some(1));
        assert!(vs.contains("x"));
        assert!(!vs.contains("z"));
    }

    #[test]
    fn varset_rejects_bad_names() {
        assert!(VarSet::new(["ok_1", ""]).is_err());
        assert!(VarSet::new(["with space"]).is_err());
        assert!(VarSet::new(["x^2"]).is_err());
    }

    #[test]
    fn assignment_roundtrip_and_order() {
        let vs = vars(&["a", "b", "c"]);
        // index 5 = binary 101 over (a, b, c) big-endian: a=1, b=0, c=1.
        let alpha = Assignment::for_index(&vs, 5);
        assert_eq!(alpha.get("a"), Some(true));
        assert_eq!(alpha.get("b"), Some(false));
        assert_eq!(alpha.get("c"), Some(true));
        assert_eq!(alpha.index_over(&vs).unwrap(), 5);
        assert_eq!(alpha.to_string(), "a=1,b=0,c=1");
        let parsed = Assignment::parse("a=1, b=0, c=1").unwrap();
        assert_eq!(parsed, alpha);
        assert_eq!(Assignment::enumerate(&vs).len(), 8);
    }

    #[test]
    fn zero_polynomial_has_degree_zero() {
        let vs = vars(&["x"]);
        let z = Polynomial::zero(&vs);
        assert!(z.is_zero());
        assert_eq!(z.degree(), 0);
        assert_eq!(z.to_text(), "");
    }

    #[test]
    fn pruning_drops_near_zero_coefficients() {
        let vs = vars(&["x"]);
        let p = Polynomial::from_terms(&vs, [(Monomial::var("x"), c(1e-13, 0.0))]).unwrap();
        assert!(p.is_zero());
        // x + (-x) cancels exactly.
        let x = Polynomial::variable(&vs, "x").unwrap();
        assert!(x.add(&x.neg()).unwrap().is_zero());
    }

    #[test]
    fn hand_expanded_product() {
        // (x + 1)(x - 1) = x^2 - 1
        let vs = vars(&["x"]);
        let x = Polynomial::variable(&vs, "x").unwrap();
        let one = Polynomial::constant_re(&vs, 1.0);
        let p = x.add(&one).unwrap();
        let q = x.sub(&one).unwrap();
        let prod = p.mul(&q).unwrap();
        let x2 = Monomial::from_factors([("x", 2)]).unwrap();
        assert_eq!(prod.num_terms(), 2);
        assert_eq!(prod.coefficient(&x2), c(1.0, 0.0));
        assert_eq!(prod.coefficient(&Monomial::one()), c(-1.0, 0.0));
        assert_eq!(prod.degree(), 2);
    }

    #[test]
    fn complex_coefficient_product() {
        // (1+i)x * (1-i)x = 2x^2
        let vs = vars(&["x"]);
        let p = Polynomial::from_terms(&vs, [(Monomial::var("x"), c(1.0, 1.0))]).unwrap();
        let q = Polynomial::from_terms(&vs, [(Monomial::var("x"), c(1.0, -1.0))]).unwrap();
        let prod = p.mul(&q).unwrap();
        let x2 = Monomial::from_factors([("x", 2)]).unwrap();
        assert_eq!(prod.coefficient(&x2), c(2.0, 0.0));
        assert_eq!(prod.num_terms(), 1);
    }

    #[test]
    fn eval_requires_all_mentioned_variables() {
        let vs = vars(&["x", "y"]);
        // p = 2 + 3x + xy
        let p = Polynomial::from_terms(
            &vs,
            [
                (Monomial::one(), c(2.0, 0.0)),
                (Monomial::var("x"), c(3.0, 0.0)),
                (Monomial::var("x").mul(&Monomial::var("y")), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let alpha = Assignment::from_pairs([("x", true), ("y", false)]);
        assert_eq!(p.eval(&alpha).unwrap(), c(5.0, 0.0));
        let partial = Assignment::from_pairs([("y", false)]);
        assert_eq!(
            p.eval(&partial),
            Err(PolyError::MissingAssignment("x".into()))
        );
        // A variable that never occurs need not be assigned.
        let q = Polynomial::constant_re(&vs, 4.0);
        assert_eq!(q.eval(&Assignment::new()).unwrap(), c(4.0, 0.0));
    }

    #[test]
    fn constrains_ignores_pruned_terms() {
        let vs = vars(&["x", "y", "z"]);
        let p = Polynomial::from_terms(
            &vs,
            [
                (Monomial::var("x").mul(&Monomial::var("y")), c(1.0, 0.0)),
                (Monomial::one(), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        assert!(p.constrains(&vars(&["y", "z"])));
        assert!(!p.constrains(&vars(&["z"])));
        // x + 0*y does not constrain {y}: the zero term is pruned away.
        let q = Polynomial::from_terms(
            &vs,
            [
                (Monomial::var("x"), c(1.0, 0.0)),
                (Monomial::var("y"), c(0.0, 0.0)),
            ],
        )
        .unwrap();
        assert!(!q.constrains(&vars(&["y"])));
        assert!(!Polynomial::zero(&vs).constrains(&vs));
    }

    #[test]
    fn substitute_binds_and_rehomes() {
        let vs = vars(&["x", "y"]);
        let x = Polynomial::variable(&vs, "x").unwrap();
        let y = Polynomial::variable(&vs, "y").unwrap();
        let one = Polynomial::constant_re(&vs, 1.0);
        // (1 - x) * y
        let p = one.sub(&x).unwrap().mul(&y).unwrap();
        let target = vars(&["y"]);
        let bound = p
            .substitute(&Assignment::from_pairs([("x", false)]), &target)
            .unwrap();
        assert_eq!(bound.varset(), &target);
        assert_eq!(bound.coefficient(&Monomial::var("y")), c(1.0, 0.0));
        assert_eq!(bound.num_terms(), 1);
        let dead = p
            .substitute(&Assignment::from_pairs([("x", true)]), &target)
            .unwrap();
        assert!(dead.is_zero());
    }

    #[test]
    fn multilinear_normalization_merges() {
        let vs = vars(&["x", "y"]);
        // x^2 y -> x y; x^2 + x -> 2x
        let p = Polynomial::from_terms(
            &vs,
            [(
                Monomial::from_factors([("x", 2), ("y", 1)]).unwrap(),
                c(1.0, 0.0),
            )],
        )
        .unwrap();
        let ml = p.normalize_multilinear();
        assert_eq!(
            ml.coefficient(&Monomial::var("x").mul(&Monomial::var("y"))),
            c(1.0, 0.0)
        );
        assert_eq!(ml.degree(), 2);

        let q = Polynomial::from_terms(
            &vs,
            [
                (Monomial::from_factors([("x", 2)]).unwrap(), c(1.0, 0.0)),
                (Monomial::var("x"), c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let qm = q.normalize_multilinear();
        assert_eq!(qm.coefficient(&Monomial::var("x")), c(2.0, 0.0));
        assert_eq!(qm.num_terms(), 1);
    }

    #[test]
    fn text_roundtrip() {
        let vs = vars(&["x", "y"]);
        let p = Polynomial::from_terms(
            &vs,
            [
                (Monomial::one(), c(0.5, -1.25)),
                (
                    Monomial::from_factors([("x", 2), ("y", 1)]).unwrap(),
                    c(1.0 / 3.0, 2e-7),
                ),
                (Monomial::var("y"), c(-3.0, 0.0)),
            ],
        )
        .unwrap();
        let text = p.to_text();
        let back = Polynomial::from_text(&vs, &text).unwrap();
        assert_eq!(p, back);
        // Malformed factor is rejected with the line number.
        let err = Polynomial::from_text(&vs, "1 0 x2\n").unwrap_err();
        match err {
            PolyError::TextParse { line, .. } => assert_eq!(line, 1),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn norm_square_degree_doubles() {
        let vs = vars(&["x"]);
        let x = Polynomial::variable(&vs, "x").unwrap();
        let p = x.scale(c(0.0, 1.0)).add(&Polynomial::constant_re(&vs, 1.0)).unwrap();
        let sq = p.norm_square();
        // |1 + ix|^2 = 1 + x^2 on real points.
        assert_eq!(sq.degree(), 2);
        for alpha in Assignment::enumerate(&vs) {
            let direct = p.eval(&alpha).unwrap().norm_sqr();
            let via = sq.eval(&alpha).unwrap();
            assert!((via.re - direct).abs() < 1e-12);
            assert!(via.im.abs() < 1e-12);
        }
    }

    // Evaluation-homomorphism oracle: structured operations agree with
    // pointwise arithmetic at every Boolean point.
    mod eval_oracle {
        use super::*;
        use proptest::prelude::*;

        fn small_poly(vs: &VarSet) -> impl Strategy<Value = Polynomial> {
            let names: Vec<String> = vs.iter().map(str::to_string).collect();
            let vs = vs.clone();
            prop::collection::vec(
                (
                    prop::collection::vec((0..names.len(), 1u32..3), 0..3),
                    -4i64..=4,
                    -4i64..=4,
                ),
                0..4,
            )
            .prop_map(move |raw| {
                let terms = raw.into_iter().map(|(factors, re, im)| {
                    let mono = Monomial::from_factors(
                        factors
                            .into_iter()
                            .map(|(i, e)| (names[i].clone(), e)),
                    )
                    .unwrap();
                    (mono, Complex64::new(re as f64, im as f64))
                });
                Polynomial::from_terms(&vs, terms).unwrap()
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(256))]

            #[test]
            fn ops_agree_with_pointwise(
                (p, q) in {
                    let vs = VarSet::new(["u", "v", "w"]).unwrap();
                    (small_poly(&vs), small_poly(&vs))
                }
            ) {
                let vs = p.varset().clone();
                let sum = p.add(&q).unwrap();
                let prod = p.mul(&q).unwrap();
                for alpha in Assignment::enumerate(&vs) {
                    let pe = p.eval(&alpha).unwrap();
                    let qe = q.eval(&alpha).unwrap();
                    prop_assert!((sum.eval(&alpha).unwrap() - (pe + qe)).norm() <= 1e-9);
                    prop_assert!((prod.eval(&alpha).unwrap() - pe * qe).norm() <= 1e-9);
                }
                // Degree law and commutativity.
                prop_assert!(prod.degree() <= p.degree() + q.degree());
                let flipped = q.mul(&p).unwrap();
                prop_assert!(prod.max_coeff_deviation(&flipped).unwrap() <= 1e-12);
            }
        }
    }
}
