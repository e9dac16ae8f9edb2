//! States on finite effect algebras, decided by exact linear feasibility.
//!
//! A state is `ω: E → [0, 1]` with `ω(1) = 1` and `ω(x ⊕ y) = ω(x) + ω(y)`.
//! Upper bounds need no rows of their own: `ω(x) + ω(x') = 1` with `ω ≥ 0`
//! already forces `ω ≤ 1`. On finite algebras every monotone net is
//! eventually constant, so every state is order continuous.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{EffectAlgebra, Element};
use crate::construct;
use crate::lp::{
    self, check_certificate, fraction_string, Constraint, FarkasCertificate, Feasibility, LinearSystem,
    Optimum, Rational, Relation,
};
use crate::structure;

/// Exact values indexed by element.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StateVector {
    #[serde(serialize_with = "lp::serialize_fractions")]
    values: Vec<Rational>,
}

impl StateVector {
    pub fn new(values: Vec<Rational>) -> Self {
        StateVector { values }
    }

    pub fn value(&self, x: Element) -> &Rational {
        &self.values[x]
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `(label, "num/den")` pairs.
    pub fn labelled(&self, e: &EffectAlgebra) -> Vec<(String, String)> {
        self.values
            .iter()
            .enumerate()
            .map(|(x, q)| (e.label(x).to_string(), fraction_string(q)))
            .collect()
    }
}

/// Which constraints a [`LinearSystem`] encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    State,
    Subadditive,
}

/// Variables are `ω(x)` by element index. Rows: `ω(0) = 0`, `ω(1) = 1`,
/// `ω(x) + ω(y) - ω(x ⊕ y) = 0` for nonzero `x ≤ y` (by index) with `x ⊕ y`
/// defined, and for [`SystemKind::Subadditive`] also
/// `ω(x ∨ y) - ω(x) - ω(y) ≤ 0` for incomparable `x < y`.
pub fn state_system(e: &EffectAlgebra, kind: SystemKind) -> Result<LinearSystem, StatesError> {
    if kind == SystemKind::Subadditive && !e.is_lattice() {
        return Err(StatesError::NotLattice);
    }
    let one = || Rational::one();
    let mut s = LinearSystem::new(e.size());
    s.push(Constraint::new([(e.zero(), one())], Relation::Eq, Rational::zero()));
    s.push(Constraint::new([(e.one(), one())], Relation::Eq, one()));
    for x in e.elements().filter(|&x| x != e.zero()) {
        for y in (x..e.size()).filter(|&y| y != e.zero()) {
            if let Some(z) = e.sum(x, y) {
                s.push(Constraint::new([(x, one()), (y, one()), (z, -one())], Relation::Eq, Rational::zero()));
            }
        }
    }
    if kind == SystemKind::Subadditive {
        for x in e.elements() {
            for y in x + 1..e.size() {
                if e.leq(x, y) || e.leq(y, x) {
                    continue;
                }
                let j = e.join(x, y).expect("lattice");
                s.push(Constraint::new([(j, one()), (x, -one()), (y, -one())], Relation::Le, Rational::zero()));
            }
        }
    }
    Ok(s)
}

/// Proof that no state (of the requested kind) exists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Infeasibility {
    pub kind: SystemKind,
    pub system: LinearSystem,
    pub certificate: FarkasCertificate,
}

impl Infeasibility {
    /// Re-checks the certificate by direct arithmetic.
    pub fn verify(&self) -> bool {
        check_certificate(&self.system, &self.certificate)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StateOutcome {
    Feasible(StateVector),
    Infeasible(Box<Infeasibility>),
}

impl StateOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, StateOutcome::Feasible(_))
    }

    pub fn is_infeasible(&self) -> bool {
        !self.is_feasible()
    }

    pub fn state(&self) -> Option<&StateVector> {
        match self {
            StateOutcome::Feasible(s) => Some(s),
            StateOutcome::Infeasible(_) => None,
        }
    }

    pub fn into_state(self) -> Option<StateVector> {
        match self {
            StateOutcome::Feasible(s) => Some(s),
            StateOutcome::Infeasible(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Lattice,
    NonzeroCentral,
    ModularInterval,
    Archimedean,
    Atomic,
    Unsharp,
    Modular,
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::Lattice => "E is a lattice",
            Hypothesis::NonzeroCentral => "c is nonzero",
            Hypothesis::ModularInterval => "[0, c] is a modular lattice",
            Hypothesis::Archimedean => "E is Archimedean",
            Hypothesis::Atomic => "E is atomic",
            Hypothesis::Unsharp => "S(E) differs from E",
            Hypothesis::Modular => "the finite elements form a modular lattice",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StatesError {
    #[error("the algebra is not a lattice")]
    NotLattice,
    #[error("element {0} is not central")]
    NotCentral(Element),
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(Hypothesis),
    #[error("the interval [0, {central}] admits no subadditive state")]
    LiftFailed { central: Element, interval: Box<EffectAlgebra> },
    #[error("atom {b} is not compatible with {a} but a ∨ b ≠ 2a")]
    DichotomyFailed { a: Element, b: Element },
}

fn solve(e: &EffectAlgebra, kind: SystemKind) -> Result<StateOutcome, StatesError> {
    let system = state_system(e, kind)?;
    Ok(match lp::feasible_point(&system) {
        Feasibility::Feasible(values) => StateOutcome::Feasible(StateVector::new(values)),
        Feasibility::Infeasible(certificate) => {
            StateOutcome::Infeasible(Box::new(Infeasibility { kind, system, certificate }))
        }
    })
}

/// A state, or a Farkas certificate that none exists.
pub fn find_state(e: &EffectAlgebra) -> StateOutcome {
    let out = solve(e, SystemKind::State).expect("plain states need no lattice");
    if let StateOutcome::Feasible(s) = &out {
        debug_assert!(verify_state(e, s, false).is_clean());
    }
    out
}

/// A subadditive state on a lattice effect algebra, or a certificate.
///
/// Panics if a returned state breaks `ω(x) + ω(y) = ω(x ∨ y) + ω(x ∧ y)`.
pub fn find_subadditive_state(e: &EffectAlgebra) -> Result<StateOutcome, StatesError> {
    let out = solve(e, SystemKind::Subadditive)?;
    if let StateOutcome::Feasible(s) = &out {
        let report = verify_state(e, s, true);
        assert!(report.is_clean(), "subadditive state fails verification: {report}");
    }
    Ok(out)
}

/// Affine dimension of the state space, or -1 when it is empty.
pub fn state_space_dimension(e: &EffectAlgebra) -> i64 {
    let system = state_system(e, SystemKind::State).expect("plain states need no lattice");
    if let Feasibility::Infeasible(_) = lp::feasible_point(&system) {
        return -1;
    }
    // Coordinates that vanish on every state are implicit equalities.
    let free: Vec<usize> = (0..system.variables)
        .filter(|&j| match lp::maximize(&system, &[(j, Rational::one())]) {
            Optimum::Optimal { value, .. } => value.is_positive(),
            Optimum::Unbounded => true,
            Optimum::Infeasible(_) => unreachable!("feasible above"),
        })
        .collect();
    let rows: Vec<Vec<Rational>> = system
        .constraints
        .iter()
        .map(|c| {
            free.iter()
                .map(|&j| c.terms.iter().find(|(k, _)| *k == j).map_or_else(Rational::zero, |(_, q)| q.clone()))
                .collect()
        })
        .collect();
    (free.len() - lp::rank(&rows)) as i64
}

/// Lifts a subadditive state of `[0, c]` along `x ↦ x ∧ c`.
///
/// Panics if the lifted map fails [`verify_state`] with subadditivity.
pub fn state_from_central_finite(e: &EffectAlgebra, c: Element) -> Result<StateVector, StatesError> {
    let state = lift_from_central(e, c)?;
    let report = verify_state(e, &state, true);
    assert!(report.is_clean(), "lifted state fails verification: {report}");
    Ok(state)
}

/// A solver vertex of the subadditive system, without verification.
pub(crate) fn subadditive_point(e: &EffectAlgebra) -> Result<Option<StateVector>, StatesError> {
    Ok(solve(e, SystemKind::Subadditive)?.into_state())
}

pub(crate) fn lift_from_central(e: &EffectAlgebra, c: Element) -> Result<StateVector, StatesError> {
    if !e.is_lattice() {
        return Err(StatesError::NotLattice);
    }
    if c == e.zero() {
        return Err(StatesError::HypothesisViolated(Hypothesis::NonzeroCentral));
    }
    if !structure::is_central(e, c) {
        return Err(StatesError::NotCentral(c));
    }
    let (lower, carrier) = construct::interval_with_map(e, e.zero(), c).expect("0 < c");
    if !structure::is_modular(&lower).is_ok_and(|f| f.holds) {
        return Err(StatesError::HypothesisViolated(Hypothesis::ModularInterval));
    }
    let Some(local) = subadditive_point(&lower)? else {
        return Err(StatesError::LiftFailed { central: c, interval: Box::new(lower) });
    };
    let values = e
        .elements()
        .map(|x| {
            let m = e.meet(x, c).expect("lattice");
            local.value(carrier.binary_search(&m).expect("x ∧ c lies in [0, c]")).clone()
        })
        .collect();
    Ok(StateVector::new(values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The chosen atom lies in `B(E)`, the elements compatible with all others.
    CompatibleWithAll,
    /// Every atom not compatible with `a` satisfies `a ∨ b = 2a`.
    Dichotomy,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DichotomyCheck {
    pub atom: Element,
    pub join: Element,
    pub double: Option<Element>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExstateTrace {
    /// An atom with `a ≤ a'`.
    pub atom: Element,
    /// `ord(a)`.
    pub multiplicity: usize,
    pub branch: Branch,
    pub checks: Vec<DichotomyCheck>,
    /// `n_a · a`.
    pub central: Element,
}

/// Builds a subadditive state by following the central-element argument:
/// pick an unsharp-side atom `a`, show `c = ord(a)·a` is central, and lift
/// a state from `[0, c]`.
pub fn state_via_exstate_procedure(e: &EffectAlgebra) -> Result<(StateVector, ExstateTrace), StatesError> {
    if !e.is_lattice() {
        return Err(StatesError::HypothesisViolated(Hypothesis::Lattice));
    }
    let flags = structure::classify(e);
    if !flags.is_archimedean.holds {
        return Err(StatesError::HypothesisViolated(Hypothesis::Archimedean));
    }
    if !flags.is_atomic.holds {
        return Err(StatesError::HypothesisViolated(Hypothesis::Atomic));
    }
    if !flags.is_modular.holds {
        return Err(StatesError::HypothesisViolated(Hypothesis::Modular));
    }
    // Any atom under x ∧ x' for an unsharp x satisfies a ≤ a'.
    let Some(&a) = e.atoms().iter().find(|&&a| e.leq(a, e.orthosupplement(a))) else {
        return Err(StatesError::HypothesisViolated(Hypothesis::Unsharp));
    };
    let multiplicity = e.ord(a).expect("atoms are nonzero");
    let central = e.multiple(a, multiplicity).expect("ord(a)·a is defined");
    let incompatible: Vec<Element> =
        e.atoms().iter().copied().filter(|&b| !structure::compatible(e, a, b)).collect();
    let in_b = structure::compatibility_center(e).expect("lattice").contains(a);
    let (branch, checks) = if in_b {
        (Branch::CompatibleWithAll, Vec::new())
    } else {
        let double = e.sum(a, a);
        let mut checks = Vec::new();
        for b in incompatible {
            let join = e.join(a, b).expect("lattice");
            checks.push(DichotomyCheck { atom: b, join, double });
            if Some(join) != double {
                return Err(StatesError::DichotomyFailed { a, b });
            }
        }
        (Branch::Dichotomy, checks)
    };
    assert!(structure::is_central(e, central), "ord(a)·a = {central} is not central");
    let state = state_from_central_finite(e, central)?;
    Ok((state, ExstateTrace { atom: a, multiplicity, branch, checks, central }))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateViolation {
    Length { expected: usize, found: usize },
    OutOfRange { x: Element },
    Zero,
    One,
    Additivity { x: Element, y: Element, sum: Element },
    Monotonicity { x: Element, y: Element },
    NotLattice,
    Subadditivity { x: Element, y: Element, join: Element },
    ModularMeasure { x: Element, y: Element },
}

impl fmt::Display for StateViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateViolation::Length { expected, found } => {
                write!(f, "expected {expected} values, found {found}")
            }
            StateViolation::OutOfRange { x } => write!(f, "ω({x}) lies outside [0, 1]"),
            StateViolation::Zero => write!(f, "ω(0) ≠ 0"),
            StateViolation::One => write!(f, "ω(1) ≠ 1"),
            StateViolation::Additivity { x, y, sum } => write!(f, "ω({sum}) ≠ ω({x}) + ω({y})"),
            StateViolation::Monotonicity { x, y } => write!(f, "{x} ≤ {y} but ω({x}) > ω({y})"),
            StateViolation::NotLattice => write!(f, "subadditivity needs a lattice"),
            StateViolation::Subadditivity { x, y, join } => write!(f, "ω({join}) > ω({x}) + ω({y})"),
            StateViolation::ModularMeasure { x, y } => {
                write!(f, "ω({x}) + ω({y}) ≠ ω({x} ∨ {y}) + ω({x} ∧ {y})")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct StateReport {
    pub violations: Vec<StateViolation>,
}

impl StateReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for StateReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_clean() {
            return f.write_str("ok");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Lists every way `w` fails to be a (subadditive) state.
pub fn verify_state(e: &EffectAlgebra, w: &StateVector, require_subadditive: bool) -> StateReport {
    let mut violations = Vec::new();
    if w.len() != e.size() {
        violations.push(StateViolation::Length { expected: e.size(), found: w.len() });
        return StateReport { violations };
    }
    let v = |x: Element| w.value(x);
    for x in e.elements() {
        if v(x).is_negative() || *v(x) > Rational::one() {
            violations.push(StateViolation::OutOfRange { x });
        }
    }
    if !v(e.zero()).is_zero() {
        violations.push(StateViolation::Zero);
    }
    if !v(e.one()).is_one() {
        violations.push(StateViolation::One);
    }
    for x in e.elements() {
        for y in x..e.size() {
            if let Some(sum) = e.sum(x, y) {
                if *v(sum) != v(x) + v(y) {
                    violations.push(StateViolation::Additivity { x, y, sum });
                }
            }
        }
    }
    for x in e.elements() {
        for y in e.elements() {
            if e.leq(x, y) && v(x) > v(y) {
                violations.push(StateViolation::Monotonicity { x, y });
            }
        }
    }
    if require_subadditive {
        if !e.is_lattice() {
            violations.push(StateViolation::NotLattice);
        } else {
            for x in e.elements() {
                for y in x + 1..e.size() {
                    let join = e.join(x, y).expect("lattice");
                    let meet = e.meet(x, y).expect("lattice");
                    if *v(join) > v(x) + v(y) {
                        violations.push(StateViolation::Subadditivity { x, y, join });
                    }
                    if v(x) + v(y) != v(join) + v(meet) {
                        violations.push(StateViolation::ModularMeasure { x, y });
                    }
                }
            }
        }
    }
    StateReport { violations }
}
