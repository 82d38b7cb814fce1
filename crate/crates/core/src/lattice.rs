//! Integer-lattice vector algebra: the ground set, sparse nonnegative
//! integer vectors with join/meet/multiset-difference, box-plus-cardinality
//! constraints, and the marginal-gain contract everything else builds on.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Nonnegative multiplicity of a single element.
pub type Count = u64;

/// Ordered set of element identifiers. Iteration order is construction
/// order and is stable across runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundSet {
    names: Vec<String>,
    by_name: BTreeMap<String, usize>,
}

impl GroundSet {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::Input("ground set must not be empty".into()));
        }
        let mut by_name = BTreeMap::new();
        for (i, name) in names.iter().enumerate() {
            if by_name.insert(name.clone(), i).is_some() {
                return Err(Error::Input(format!("duplicate element identifier {name:?}")));
            }
        }
        Ok(Self { names, by_name })
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, e: usize) -> &str {
        &self.names[e]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.by_name.get(name).copied()
    }

    /// Elements in arrival (construction) order.
    pub fn elements(&self) -> impl Iterator<Item = usize> {
        0..self.names.len()
    }
}

/// Sparse vector in N^E. Zero coordinates are never stored, so `support`
/// and `total` are O(nnz).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LatticeVector {
    counts: BTreeMap<usize, Count>,
}

impl LatticeVector {
    pub fn zero() -> Self {
        Self::default()
    }

    /// l * chi_e.
    pub fn unit(e: usize, l: Count) -> Self {
        Self::zero().add_scaled(e, l)
    }

    pub fn from_pairs<I: IntoIterator<Item = (usize, Count)>>(pairs: I) -> Self {
        let mut v = Self::zero();
        for (e, c) in pairs {
            if c > 0 {
                *v.counts.entry(e).or_insert(0) += c;
            }
        }
        v
    }

    pub fn get(&self, e: usize) -> Count {
        self.counts.get(&e).copied().unwrap_or(0)
    }

    /// x(E): sum of all multiplicities.
    pub fn total(&self) -> Count {
        self.counts.values().sum()
    }

    /// supp+(x): elements with positive multiplicity, ascending.
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.counts.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Count)> + '_ {
        self.counts.iter().map(|(&e, &c)| (e, c))
    }

    pub fn is_zero(&self) -> bool {
        self.counts.is_empty()
    }

    /// Coordinate-wise partial order.
    pub fn le(&self, other: &Self) -> bool {
        self.iter().all(|(e, c)| c <= other.get(e))
    }

    /// x + l * chi_e.
    pub fn add_scaled(&self, e: usize, l: Count) -> Self {
        let mut out = self.clone();
        if l > 0 {
            *out.counts.entry(e).or_insert(0) += l;
        }
        out
    }

    /// Coordinate-wise sum.
    pub fn plus(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.iter() {
            *out.counts.entry(e).or_insert(0) += c;
        }
        out
    }

    /// Coordinate-wise maximum.
    pub fn join(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in other.iter() {
            let slot = out.counts.entry(e).or_insert(0);
            *slot = (*slot).max(c);
        }
        out
    }

    /// Coordinate-wise minimum.
    pub fn meet(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.iter() {
            let m = c.min(other.get(e));
            if m > 0 {
                out.counts.insert(e, m);
            }
        }
        out
    }

    /// Multiset difference {x} \ {y}: coordinate-wise max(x - y, 0).
    pub fn multiset_diff(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (e, c) in self.iter() {
            let d = c.saturating_sub(other.get(e));
            if d > 0 {
                out.counts.insert(e, d);
            }
        }
        out
    }

    /// Dense counts in ground order.
    pub fn to_dense(&self, n: usize) -> Vec<Count> {
        let mut out = vec![0; n];
        for (e, c) in self.iter() {
            out[e] = c;
        }
        out
    }
}

/// Box caps (`None` = unbounded, so the effective search cap is k alone)
/// plus the cardinality budget k. A vector is feasible iff it respects
/// every cap and its total is at most k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintSpec {
    caps: Vec<Option<Count>>,
    k: Count,
}

impl ConstraintSpec {
    pub fn new(caps: Vec<Option<Count>>, k: Count) -> Self {
        Self { caps, k }
    }

    /// Same cap on every element.
    pub fn uniform(n: usize, cap: Count, k: Count) -> Self {
        Self::new(vec![Some(cap); n], k)
    }

    pub fn n(&self) -> usize {
        self.caps.len()
    }

    pub fn k(&self) -> Count {
        self.k
    }

    pub fn cap(&self, e: usize) -> Option<Count> {
        self.caps[e]
    }

    pub fn caps(&self) -> &[Option<Count>] {
        &self.caps
    }

    pub fn is_feasible(&self, x: &LatticeVector) -> bool {
        self.check_feasible(x).is_ok()
    }

    pub fn check_feasible(&self, x: &LatticeVector) -> Result<()> {
        for (e, c) in x.iter() {
            if e >= self.caps.len() {
                return Err(Error::Infeasible(format!("element index {e} outside ground set")));
            }
            if let Some(cap) = self.caps[e] {
                if c > cap {
                    return Err(Error::Infeasible(format!(
                        "box: element {e} has multiplicity {c} > cap {cap}"
                    )));
                }
            }
        }
        let total = x.total();
        if total > self.k {
            return Err(Error::Infeasible(format!(
                "cardinality: total {total} > budget {}",
                self.k
            )));
        }
        Ok(())
    }

    /// min(b(e) - x(e), k - x(E)): how far e can still be raised on top
    /// of x without leaving the feasible region.
    pub fn headroom(&self, x: &LatticeVector, e: usize) -> Count {
        let budget = self.k.saturating_sub(x.total());
        match self.caps[e] {
            Some(cap) => cap.saturating_sub(x.get(e)).min(budget),
            None => budget,
        }
    }

    /// True when every cap of `other` is at least as permissive here.
    pub fn box_dominates(&self, other: &ConstraintSpec) -> bool {
        self.caps.len() == other.caps.len()
            && self
                .caps
                .iter()
                .zip(&other.caps)
                .all(|(mine, theirs)| match (mine, theirs) {
                    (None, _) => true,
                    (Some(_), None) => false,
                    (Some(a), Some(b)) => a >= b,
                })
    }
}

/// Evaluation side of a gain function. Implementations must be pure;
/// [`crate::oracle::GainOracle`] additionally counts invocations.
pub trait GainFn<F: Scalar> {
    fn eval(&self, x: &LatticeVector) -> Result<F>;
}

impl<F: Scalar, T: Fn(&LatticeVector) -> F> GainFn<F> for T {
    fn eval(&self, x: &LatticeVector) -> Result<F> {
        Ok(self(x))
    }
}

/// g(delta | base) = g(base + delta) - g(base). Exactly two evaluations;
/// callers that already hold g(base) should subtract it themselves.
pub fn marginal<F: Scalar>(
    g: &impl GainFn<F>,
    delta: &LatticeVector,
    base: &LatticeVector,
) -> Result<F> {
    let with = g.eval(&base.plus(delta))?;
    let without = g.eval(base)?;
    Ok(with - without)
}
