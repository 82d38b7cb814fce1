//! Gain-function families, linear cost models, and problem instances.
//!
//! Three families ship: concave coverage (weighted concave transforms of
//! linear coverage counts), budget allocation (probabilistic influence),
//! and explicit table oracles for adversarial tests. Oracle-call counting
//! lives here, not in the algorithms, so query-complexity claims are
//! measured rather than inferred.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{ConstraintSpec, Count, GainFn, GroundSet, LatticeVector};
use crate::scalar::{from_count, val, Scalar};

/// Submodularity class an oracle declares for itself. Claims are checked
/// by the verification module, never trusted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClassClaim {
    DrSubmodular,
    LatticeSubmodular,
    AlphaWeak,
}

/// Per-group transform for the coverage family. The first three are
/// concave (the family is then diminishing-returns submodular); `Square`
/// is convex and exists solely to build oracles that must fail the
/// diminishing-returns check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Phi<F> {
    CappedLinear { cap: F },
    Sqrt,
    OneMinusExp,
    Square,
}

impl<F: Scalar> Phi<F> {
    pub fn apply(&self, z: F) -> F {
        match *self {
            Phi::CappedLinear { cap } => z.min(cap),
            Phi::Sqrt => z.sqrt(),
            Phi::OneMinusExp => F::one() - (-z).exp(),
            Phi::Square => z * z,
        }
    }

    pub fn is_concave(&self) -> bool {
        !matches!(self, Phi::Square)
    }
}

#[derive(Debug, Clone)]
enum GainKind<F> {
    /// g(x) = sum_j w_j * phi_j(sum_e a[j][e] * x(e))
    Coverage {
        weights: Vec<F>,
        incidence: Vec<Vec<F>>,
        phi: Vec<Phi<F>>,
    },
    /// g(x) = sum_t w_t * (1 - prod_e (1 - p[t][e])^x(e))
    Budget {
        weights: Vec<F>,
        probabilities: Vec<Vec<F>>,
    },
    /// Explicit value for every lattice point of a small box.
    Table { caps: Vec<Count>, values: Vec<F> },
}

/// A normalized monotone gain oracle over N^E with a declared box.
/// Evaluation is pure and deterministic; every evaluation bumps an atomic
/// call counter that instrumentation reads.
#[derive(Debug)]
pub struct GainOracle<F> {
    kind: GainKind<F>,
    caps: Vec<Option<Count>>,
    claim: ClassClaim,
    calls: AtomicU64,
}

impl<F: Scalar> Clone for GainOracle<F> {
    fn clone(&self) -> Self {
        Self {
            kind: self.kind.clone(),
            caps: self.caps.clone(),
            claim: self.claim,
            calls: AtomicU64::new(self.calls.load(Ordering::Relaxed)),
        }
    }
}

impl<F: Scalar> GainOracle<F> {
    /// Concave-coverage family; rejects non-concave transforms.
    pub fn coverage(
        weights: Vec<F>,
        incidence: Vec<Vec<F>>,
        phi: Vec<Phi<F>>,
        caps: Vec<Option<Count>>,
    ) -> Result<Self> {
        if phi.iter().any(|p| !p.is_concave()) {
            return Err(Error::Input(
                "coverage oracle requires concave transforms; use adversarial() for square".into(),
            ));
        }
        Self::coverage_like(weights, incidence, phi, caps, ClassClaim::DrSubmodular)
    }

    /// Coverage shape with the convex square transform; violates
    /// diminishing returns by construction.
    pub fn adversarial_square(
        weights: Vec<F>,
        incidence: Vec<Vec<F>>,
        caps: Vec<Option<Count>>,
    ) -> Result<Self> {
        let phi = vec![Phi::Square; weights.len()];
        Self::coverage_like(weights, incidence, phi, caps, ClassClaim::AlphaWeak)
    }

    fn coverage_like(
        weights: Vec<F>,
        incidence: Vec<Vec<F>>,
        phi: Vec<Phi<F>>,
        caps: Vec<Option<Count>>,
        claim: ClassClaim,
    ) -> Result<Self> {
        let n = caps.len();
        if weights.len() != incidence.len() || weights.len() != phi.len() {
            return Err(Error::Input(
                "coverage oracle needs one weight, incidence row, and transform per group".into(),
            ));
        }
        for w in &weights {
            if *w < F::zero() {
                return Err(Error::Input("coverage weights must be nonnegative".into()));
            }
        }
        for row in &incidence {
            if row.len() != n {
                return Err(Error::Input(format!(
                    "incidence row length {} != ground size {n}",
                    row.len()
                )));
            }
            if row.iter().any(|a| *a < F::zero()) {
                return Err(Error::Input("incidence entries must be nonnegative".into()));
            }
        }
        Ok(Self {
            kind: GainKind::Coverage { weights, incidence, phi },
            caps,
            claim,
            calls: AtomicU64::new(0),
        })
    }

    /// Budget-allocation family: probabilities[t][e] in [0, 1).
    pub fn budget(
        weights: Vec<F>,
        probabilities: Vec<Vec<F>>,
        caps: Vec<Option<Count>>,
    ) -> Result<Self> {
        let n = caps.len();
        if weights.len() != probabilities.len() {
            return Err(Error::Input("budget oracle needs one weight per target".into()));
        }
        for w in &weights {
            if *w < F::zero() {
                return Err(Error::Input("budget weights must be nonnegative".into()));
            }
        }
        for row in &probabilities {
            if row.len() != n {
                return Err(Error::Input(format!(
                    "probability row length {} != ground size {n}",
                    row.len()
                )));
            }
            if row.iter().any(|p| *p < F::zero() || *p >= F::one()) {
                return Err(Error::Input("probabilities must lie in [0, 1)".into()));
            }
        }
        Ok(Self {
            kind: GainKind::Budget { weights, probabilities },
            caps,
            claim: ClassClaim::LatticeSubmodular,
            calls: AtomicU64::new(0),
        })
    }

    /// Table oracle: `values` holds one entry per lattice point of the box
    /// `caps`, in mixed-radix order with the last coordinate fastest.
    pub fn table(caps: Vec<Count>, values: Vec<F>, claim: ClassClaim) -> Result<Self> {
        let points: u128 = caps.iter().map(|&c| c as u128 + 1).product();
        if points > 1_000_000 {
            return Err(Error::TooLarge(format!("table oracle with {points} points")));
        }
        if values.len() as u128 != points {
            return Err(Error::Input(format!(
                "table oracle needs {points} values, got {}",
                values.len()
            )));
        }
        if !values.is_empty() && values[0].abs() > F::abs_tol() {
            return Err(Error::Input("table oracle must be normalized: g(0) = 0".into()));
        }
        let boxed = caps.iter().map(|&c| Some(c)).collect();
        Ok(Self {
            kind: GainKind::Table { caps, values },
            caps: boxed,
            claim,
            calls: AtomicU64::new(0),
        })
    }

    /// Convenience table constructor from (dense point, value) pairs.
    pub fn table_from_points(
        caps: Vec<Count>,
        points: &[(Vec<Count>, F)],
        claim: ClassClaim,
    ) -> Result<Self> {
        let total: u128 = caps.iter().map(|&c| c as u128 + 1).product();
        let mut values = vec![F::zero(); total as usize];
        let mut seen = vec![false; total as usize];
        for (dense, value) in points {
            if dense.len() != caps.len() {
                return Err(Error::Input("table point arity mismatch".into()));
            }
            let mut idx = 0usize;
            for (i, &c) in dense.iter().enumerate() {
                if c > caps[i] {
                    return Err(Error::Input("table point outside box".into()));
                }
                idx = idx * (caps[i] as usize + 1) + c as usize;
            }
            values[idx] = *value;
            seen[idx] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::Input("table must cover every lattice point of its box".into()));
        }
        Self::table(caps, values, claim)
    }

    pub fn n(&self) -> usize {
        self.caps.len()
    }

    /// Declared box, per element (None = unbounded).
    pub fn box_caps(&self) -> &[Option<Count>] {
        &self.caps
    }

    pub fn claim(&self) -> ClassClaim {
        self.claim
    }

    pub fn call_count(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }

    pub fn reset_calls(&self) {
        self.calls.store(0, Ordering::Relaxed);
    }

    fn check_box(&self, x: &LatticeVector) -> Result<()> {
        for (e, c) in x.iter() {
            if e >= self.caps.len() {
                return Err(Error::Domain(format!("element index {e} outside oracle ground")));
            }
            if let Some(cap) = self.caps[e] {
                if c > cap {
                    return Err(Error::Domain(format!(
                        "element {e} at multiplicity {c} exceeds oracle box cap {cap}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Evaluate g(x). Errors if x leaves the declared box; increments the
    /// call counter on every successful evaluation.
    pub fn eval(&self, x: &LatticeVector) -> Result<F> {
        self.check_box(x)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(match &self.kind {
            GainKind::Coverage { weights, incidence, phi } => {
                let mut acc = F::zero();
                for ((w, row), p) in weights.iter().zip(incidence).zip(phi) {
                    let z = x
                        .iter()
                        .map(|(e, c)| row[e] * from_count::<F>(c))
                        .fold(F::zero(), |a, b| a + b);
                    acc = acc + *w * p.apply(z);
                }
                acc
            }
            GainKind::Budget { weights, probabilities } => {
                let mut acc = F::zero();
                for (w, row) in weights.iter().zip(probabilities) {
                    let mut fail = F::one();
                    for (e, c) in x.iter() {
                        let p = row[e];
                        if p > F::zero() {
                            fail = fail * (F::one() - p).powf(from_count(c));
                        }
                    }
                    acc = acc + *w * (F::one() - fail);
                }
                acc
            }
            GainKind::Table { caps, values } => {
                let mut idx = 0usize;
                for (i, &cap) in caps.iter().enumerate() {
                    idx = idx * (cap as usize + 1) + x.get(i) as usize;
                }
                values[idx]
            }
        })
    }
}

impl<F: Scalar> GainFn<F> for GainOracle<F> {
    fn eval(&self, x: &LatticeVector) -> Result<F> {
        GainOracle::eval(self, x)
    }
}

/// Nonnegative linear cost: c(x) = sum_e unit(e) * x(e).
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel<F> {
    unit: Vec<F>,
}

impl<F: Scalar> CostModel<F> {
    pub fn new(unit: Vec<F>) -> Result<Self> {
        if unit.iter().any(|c| *c < F::zero() || !c.is_finite()) {
            return Err(Error::Input("unit costs must be finite and nonnegative".into()));
        }
        Ok(Self { unit })
    }

    pub fn free(n: usize) -> Self {
        Self { unit: vec![F::zero(); n] }
    }

    pub fn n(&self) -> usize {
        self.unit.len()
    }

    pub fn unit_cost(&self, e: usize) -> F {
        self.unit[e]
    }

    pub fn eval(&self, x: &LatticeVector) -> F {
        x.iter()
            .map(|(e, c)| self.unit[e] * from_count::<F>(c))
            .fold(F::zero(), |a, b| a + b)
    }
}

/// One optimization instance: ground set, constraints, gain oracle, cost
/// model, and the stream arrival order.
#[derive(Debug, Clone)]
pub struct ProblemInstance<F> {
    ground: GroundSet,
    constraint: ConstraintSpec,
    gain: GainOracle<F>,
    cost: CostModel<F>,
    stream_order: Vec<usize>,
}

impl<F: Scalar> ProblemInstance<F> {
    pub fn new(
        ground: GroundSet,
        constraint: ConstraintSpec,
        gain: GainOracle<F>,
        cost: CostModel<F>,
        stream_order: Vec<usize>,
    ) -> Result<Self> {
        let n = ground.n();
        if constraint.n() != n || gain.n() != n || cost.n() != n {
            return Err(Error::Input("ground set, constraint, oracle, and costs disagree on n".into()));
        }
        let oracle_box = ConstraintSpec::new(gain.box_caps().to_vec(), Count::MAX);
        if !oracle_box.box_dominates(&constraint) {
            return Err(Error::Input(
                "gain oracle's declared box must dominate the constraint box".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &e in &stream_order {
            if e >= n {
                return Err(Error::Input(format!("stream element index {e} outside ground set")));
            }
            if seen[e] {
                return Err(Error::Input(format!(
                    "element {:?} appears twice in the stream",
                    ground.name(e)
                )));
            }
            seen[e] = true;
        }
        Ok(Self { ground, constraint, gain, cost, stream_order })
    }

    pub fn ground(&self) -> &GroundSet {
        &self.ground
    }

    pub fn constraint(&self) -> &ConstraintSpec {
        &self.constraint
    }

    pub fn gain(&self) -> &GainOracle<F> {
        &self.gain
    }

    pub fn cost(&self) -> &CostModel<F> {
        &self.cost
    }

    pub fn stream_order(&self) -> &[usize] {
        &self.stream_order
    }

    pub fn k(&self) -> Count {
        self.constraint.k()
    }

    /// g(x) - c(x) for a feasible x; errors name the violated constraint.
    pub fn objective(&self, x: &LatticeVector) -> Result<F> {
        self.constraint.check_feasible(x)?;
        Ok(self.gain.eval(x)? - self.cost.eval(x))
    }
}

/// On-disk oracle description. `kind` selects the family; the other
/// fields are read per kind (see docs/FORMATS.md). The box is keyed by
/// element name; missing entries mean unbounded.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleSpec {
    pub kind: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub weights: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub incidence: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub phi: Vec<PhiSpec>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub probabilities: Vec<Vec<f64>>,
    #[serde(default, rename = "box", skip_serializing_if = "BTreeMap::is_empty")]
    pub box_caps: BTreeMap<String, Count>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<TablePointSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhiSpec {
    CappedLinear { cap: f64 },
    Sqrt,
    OneMinusExp,
    Square,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TablePointSpec {
    /// Dense counts in the header's element order.
    pub x: Vec<Count>,
    pub v: f64,
}

impl OracleSpec {
    /// Resolve the spec against a ground set.
    pub fn compile<F: Scalar>(&self, ground: &GroundSet) -> Result<GainOracle<F>> {
        let n = ground.n();
        let mut caps: Vec<Option<Count>> = vec![None; n];
        for (name, &cap) in &self.box_caps {
            let e = ground
                .index_of(name)
                .ok_or_else(|| Error::Input(format!("oracle box names unknown element {name:?}")))?;
            caps[e] = Some(cap);
        }
        let weights =|w: &[f64]| w.iter().map(|&x| val::<F>(x)).collect::<Vec<_>>();
        let matrix = |m: &[Vec<f64>]| {
            m.iter()
                .map(|row| row.iter().map(|&x| val::<F>(x)).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        };
        match self.kind.as_str() {
            "coverage" => {
                let phi = self
                    .phi
                    .iter()
                    .map(|p| match *p {
                        PhiSpec::CappedLinear { cap } => Ok(Phi::CappedLinear { cap: val(cap) }),
                        PhiSpec::Sqrt => Ok(Phi::Sqrt),
                        PhiSpec::OneMinusExp => Ok(Phi::OneMinusExp),
                        PhiSpec::Square => Err(Error::Input(
                            "square transform belongs to kind \"adversarial\"".into(),
                        )),
                    })
                    .collect::<Result<Vec<_>>>()?;
                GainOracle::coverage(weights(&self.weights), matrix(&self.incidence), phi, caps)
            }
            "adversarial" => {
                GainOracle::adversarial_square(weights(&self.weights), matrix(&self.incidence), caps)
            }
            "budget" => {
                GainOracle::budget(weights(&self.weights), matrix(&self.probabilities), caps)
            }
            "table" => {
                let dense_caps: Vec<Count> = (0..n)
                    .map(|e| {
                        caps[e].ok_or_else(|| {
                            Error::Input(format!(
                                "table oracle requires a box cap for element {:?}",
                                ground.name(e)
                            ))
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let points: Vec<(Vec<Count>, F)> = self
                    .values
                    .iter()
                    .map(|p| (p.x.clone(), val::<F>(p.v)))
                    .collect();
                GainOracle::table_from_points(dense_caps, &points, ClassClaim::AlphaWeak)
            }
            other => Err(Error::Input(format!("unknown oracle kind {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ground(n: usize) -> GroundSet {
        GroundSet::new((0..n).map(|i| format!("e{i}")).collect()).unwrap()
    }

    /// g(x) = sum_e min(x(e), 2): one capped-linear group per element.
    pub(crate) fn capped_per_element<F: Scalar>(n: usize, caps: Vec<Option<Count>>) -> GainOracle<F> {
        let weights = vec![F::one(); n];
        let incidence = (0..n)
            .map(|j| (0..n).map(|e| if e == j { F::one() } else { F::zero() }).collect())
            .collect();
        let phi = vec![Phi::CappedLinear { cap: val(2.0) }; n];
        GainOracle::coverage(weights, incidence, phi, caps).unwrap()
    }

    #[test]
    fn coverage_is_normalized() {
        let g = capped_per_element::<f64>(2, vec![None, None]);
        assert_eq!(g.eval(&LatticeVector::zero()).unwrap(), 0.0);
    }

    #[test]
    fn coverage_caps_saturate() {
        let g = capped_per_element::<f64>(1, vec![None]);
        assert_eq!(g.eval(&LatticeVector::unit(0, 5)).unwrap(), 2.0);
    }

    #[test]
    fn budget_single_target_closed_form() {
        // one target, w = 1, p_a = 0.5, x = {a:2} -> 1 - 0.5^2 = 0.75
        let g = GainOracle::<f64>::budget(vec![1.0], vec![vec![0.5]], vec![None]).unwrap();
        assert!((g.eval(&LatticeVector::unit(0, 2)).unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn eval_counts_calls() {
        let g = capped_per_element::<f64>(1, vec![None]);
        assert_eq!(g.call_count(), 0);
        g.eval(&LatticeVector::zero()).unwrap();
        g.eval(&LatticeVector::unit(0, 1)).unwrap();
        assert_eq!(g.call_count(), 2);
        g.reset_calls();
        assert_eq!(g.call_count(), 0);
    }

    #[test]
    fn eval_rejects_points_outside_the_box() {
        let g = capped_per_element::<f64>(1, vec![Some(2)]);
        let err = g.eval(&LatticeVector::unit(0, 3)).unwrap_err();
        assert!(matches!(err, Error::Domain(_)));
    }

    #[test]
    fn cost_is_a_dot_product() {
        let c = CostModel::new(vec![0.1, 0.3]).unwrap();
        assert_eq!(c.eval(&LatticeVector::zero()), 0.0);
        let x = LatticeVector::from_pairs([(0, 2), (1, 1)]);
        assert!((c.eval(&x) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn cost_is_linear() {
        let c = CostModel::new(vec![0.25, 0.75, 0.0]).unwrap();
        let x = LatticeVector::from_pairs([(0, 1), (2, 4)]);
        let y = LatticeVector::from_pairs([(0, 2), (1, 3)]);
        let lhs = c.eval(&x.plus(&y));
        let rhs = c.eval(&x) + c.eval(&y);
        assert!((lhs - rhs).abs() < 1e-12);
    }

    fn coverage_instance() -> ProblemInstance<f64> {
        let g = ground(2);
        let gain = capped_per_element(2, vec![Some(3), Some(3)]);
        let cost = CostModel::new(vec![0.1, 0.1]).unwrap();
        let constraint = ConstraintSpec::uniform(2, 3, 4);
        ProblemInstance::new(g, constraint, gain, cost, vec![0, 1]).unwrap()
    }

    #[test]
    fn objective_subtracts_cost() {
        let inst = coverage_instance();
        assert_eq!(inst.objective(&LatticeVector::zero()).unwrap(), 0.0);
        let x = LatticeVector::unit(0, 2);
        assert!((inst.objective(&x).unwrap() - 1.8).abs() < 1e-12);
    }

    #[test]
    fn objective_rejects_infeasible_input() {
        let inst = coverage_instance();
        let too_many = LatticeVector::from_pairs([(0, 3), (1, 2)]);
        let err = inst.objective(&too_many).unwrap_err();
        assert!(err.to_string().contains("cardinality"));
    }

    #[test]
    fn instance_requires_box_domination() {
        let g = ground(1);
        let gain = capped_per_element(1, vec![Some(1)]);
        let cost = CostModel::new(vec![0.0]).unwrap();
        let constraint = ConstraintSpec::uniform(1, 2, 2);
        let err = ProblemInstance::new(g, constraint, gain, cost, vec![0]).unwrap_err();
        assert!(err.to_string().contains("dominate"));
    }

    #[test]
    fn instance_rejects_repeated_arrivals() {
        let g = ground(2);
        let gain = capped_per_element(2, vec![None, None]);
        let cost = CostModel::new(vec![0.0, 0.0]).unwrap();
        let constraint = ConstraintSpec::uniform(2, 3, 4);
        let err = ProblemInstance::new(g, constraint, gain, cost, vec![0, 0]).unwrap_err();
        assert!(err.to_string().contains("twice"));
    }

    #[test]
    fn oracle_spec_round_trips_through_json() {
        let spec = OracleSpec {
            kind: "coverage".into(),
            weights: vec![1.0, 2.0],
            incidence: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            phi: vec![PhiSpec::CappedLinear { cap: 2.0 }, PhiSpec::Sqrt],
            probabilities: vec![],
            box_caps: BTreeMap::from([("e0".into(), 3), ("e1".into(), 2)]),
            values: vec![],
        };
        let text = serde_json::to_string(&spec).unwrap();
        let back: OracleSpec = serde_json::from_str(&text).unwrap();
        let oracle: GainOracle<f64> = back.compile(&ground(2)).unwrap();
        assert_eq!(oracle.box_caps(), &[Some(3), Some(2)]);
        let x = LatticeVector::from_pairs([(0, 3), (1, 2)]);
        // min(3,2) + 2*sqrt(2)
        assert!((oracle.eval(&x).unwrap() - (2.0 + 2.0 * 2f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn table_spec_requires_full_coverage_of_the_box() {
        let g = ground(1);
        let spec = OracleSpec {
            kind: "table".into(),
            weights: vec![],
            incidence: vec![],
            phi: vec![],
            probabilities: vec![],
            box_caps: BTreeMap::from([("e0".into(), 1)]),
            values: vec![TablePointSpec { x: vec![0], v: 0.0 }],
        };
        assert!(spec.compile::<f64>(&g).is_err());
    }

    #[test]
    fn generic_scalar_f32_smoke() {
        let g: GainOracle<f32> = capped_per_element(1, vec![None]);
        assert_eq!(g.eval(&LatticeVector::unit(0, 5)).unwrap(), 2.0f32);
    }
}
