//! Derived substructures and classification predicates: sharp elements,
//! compatibility and blocks, the two centers, modularity, finite and compact
//! elements, sharp hulls and section involutions.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{EffectAlgebra, Element};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("the algebra is not a lattice")]
    NotLattice,
    #[error("{0} ∧ {0}' does not exist")]
    MeetUndefined(Element),
    #[error("no smallest sharp element over {x}; minimal sharp upper bounds {minimal:?}")]
    NoMinimum { x: Element, minimal: Vec<Element> },
    #[error("no greatest sharp element under {x}; maximal sharp lower bounds {maximal:?}")]
    NoMaximum { x: Element, maximal: Vec<Element> },
    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
    #[error("{x} is not in the section [{a}, 1]")]
    NotInSection { a: Element, x: Element },
    #[error("scanning 2^{size} subsets exceeds the cap of {cap}")]
    CapExceeded { size: usize, cap: u64 },
    #[error("the sum of sharp multiples is undefined at atom {0}")]
    SumUndefined(Element),
}

/// A set of elements of a fixed algebra.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ElementSubset {
    members: FixedBitSet,
}

impl ElementSubset {
    pub fn empty(universe: usize) -> Self {
        ElementSubset { members: FixedBitSet::with_capacity(universe) }
    }

    pub fn full(universe: usize) -> Self {
        let mut members = FixedBitSet::with_capacity(universe);
        members.insert_range(..);
        ElementSubset { members }
    }

    pub fn from_elements(universe: usize, xs: impl IntoIterator<Item = Element>) -> Self {
        let mut s = Self::empty(universe);
        for x in xs {
            s.insert(x);
        }
        s
    }

    pub fn from_bits(members: FixedBitSet) -> Self {
        ElementSubset { members }
    }

    pub fn universe(&self) -> usize {
        self.members.len()
    }

    pub fn insert(&mut self, x: Element) {
        self.members.insert(x);
    }

    pub fn contains(&self, x: Element) -> bool {
        self.members.contains(x)
    }

    pub fn len(&self) -> usize {
        self.members.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = Element> + '_ {
        self.members.ones()
    }

    pub fn to_vec(&self) -> Vec<Element> {
        self.iter().collect()
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.members
    }

    pub fn intersection(&self, other: &Self) -> Self {
        ElementSubset { members: &self.members & &other.members }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.members.is_subset(&other.members)
    }
}

impl fmt::Debug for ElementSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for ElementSubset {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(self.iter())
    }
}

/// Counterexample attached to a failed predicate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "elements", rename_all = "snake_case")]
pub enum Witness {
    /// A pair without join or meet.
    NoBound(Element, Element),
    Element(Element),
    Pair(Element, Element),
    Triple(Element, Element, Element),
    Elements(Vec<Element>),
}

/// A boolean verdict; `witness` is present iff `holds` is false.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl Flag {
    pub fn yes() -> Self {
        Flag { holds: true, witness: None }
    }

    pub fn no(w: Witness) -> Self {
        Flag { holds: false, witness: Some(w) }
    }

    fn from_counterexample(w: Option<Witness>) -> Self {
        match w {
            None => Flag::yes(),
            Some(w) => Flag::no(w),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationFlags {
    pub is_lattice: Flag,
    pub is_modular: Flag,
    pub is_distributive: Flag,
    pub is_orthomodular_lattice: Flag,
    pub is_mv_effect_algebra: Flag,
    pub is_sharply_dominating: Flag,
    pub is_atomic: Flag,
    pub is_archimedean: Flag,
}

fn lattice_gap(e: &EffectAlgebra) -> Option<Witness> {
    for x in e.elements() {
        for y in x..e.size() {
            if e.join(x, y).is_none() || e.meet(x, y).is_none() {
                return Some(Witness::NoBound(x, y));
            }
        }
    }
    None
}

fn require_lattice(e: &EffectAlgebra) -> Result<(), StructureError> {
    if e.is_lattice() {
        Ok(())
    } else {
        Err(StructureError::NotLattice)
    }
}

/// `x ∧ x' = 0`, or `None` when the meet does not exist.
pub fn is_sharp(e: &EffectAlgebra, x: Element) -> Option<bool> {
    e.meet(x, e.orthosupplement(x)).map(|m| m == e.zero())
}

/// `S(E) = {x : x ∧ x' = 0}`.
pub fn sharp_elements(e: &EffectAlgebra) -> Result<ElementSubset, StructureError> {
    let mut s = ElementSubset::empty(e.size());
    for x in e.elements() {
        if is_sharp(e, x).ok_or(StructureError::MeetUndefined(x))? {
            s.insert(x);
        }
    }
    Ok(s)
}

/// Mackey compatibility: `x = x₁ ⊕ d`, `y = y₁ ⊕ d` with `x₁ ⊕ y₁ ⊕ d` defined.
pub fn compatible(e: &EffectAlgebra, x: Element, y: Element) -> bool {
    let common = e.order().down_set(x) & e.order().down_set(y);
    common.ones().any(|d| {
        let x1 = e.try_difference(x, d).expect("d ≤ x");
        let y1 = e.try_difference(y, d).expect("d ≤ y");
        e.sum(x1, y1).and_then(|s| e.sum(s, d)).is_some()
    })
}

/// Adjacency bitsets of the compatibility graph (no self loops).
pub fn compatibility_graph(e: &EffectAlgebra) -> Vec<FixedBitSet> {
    let n = e.size();
    let mut adj = vec![FixedBitSet::with_capacity(n); n];
    for x in 0..n {
        for y in x + 1..n {
            if compatible(e, x, y) {
                adj[x].insert(y);
                adj[y].insert(x);
            }
        }
    }
    adj
}

/// Maximal sets of pairwise compatible elements, each sorted, in
/// lexicographic order.
pub fn blocks(e: &EffectAlgebra) -> Result<Vec<ElementSubset>, StructureError> {
    require_lattice(e)?;
    let adj = compatibility_graph(e);
    let mut cliques = maximal_cliques(&adj);
    cliques.sort_by(|a, b| a.ones().cmp(b.ones()));
    Ok(cliques.into_iter().map(ElementSubset::from_bits).collect())
}

/// Bron–Kerbosch with Tomita pivoting over bitset adjacency.
pub fn maximal_cliques(adj: &[FixedBitSet]) -> Vec<FixedBitSet> {
    let n = adj.len();
    let mut out = Vec::new();
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    expand(adj, FixedBitSet::with_capacity(n), all, FixedBitSet::with_capacity(n), &mut out);
    out
}

fn expand(
    adj: &[FixedBitSet],
    clique: FixedBitSet,
    mut candidates: FixedBitSet,
    mut excluded: FixedBitSet,
    out: &mut Vec<FixedBitSet>,
) {
    if candidates.is_clear() {
        if excluded.is_clear() {
            out.push(clique);
        }
        return;
    }
    let pivot = candidates
        .union(&excluded)
        .max_by_key(|&u| candidates.intersection(&adj[u]).count())
        .expect("nonempty");
    let branch: Vec<Element> = candidates.difference(&adj[pivot]).collect();
    for v in branch {
        let mut next = clique.clone();
        next.insert(v);
        expand(adj, next, &candidates & &adj[v], &excluded & &adj[v], out);
        candidates.set(v, false);
        excluded.insert(v);
    }
}

/// `B(E)`: elements compatible with every element.
///
/// Computed both as the intersection of all blocks and as the set of
/// universally compatible elements; the two must agree.
pub fn compatibility_center(e: &EffectAlgebra) -> Result<ElementSubset, StructureError> {
    let bs = blocks(e)?;
    let mut meet = ElementSubset::full(e.size());
    for b in &bs {
        meet = meet.intersection(b);
    }
    let direct = ElementSubset::from_elements(
        e.size(),
        e.elements().filter(|&x| e.elements().all(|y| x == y || compatible(e, x, y))),
    );
    assert_eq!(meet, direct, "block intersection differs from universal compatibility");
    Ok(direct)
}

/// `C(E) = {x : y = (y ∧ x) ∨ (y ∧ x') for all y}`, by definition.
pub fn center(e: &EffectAlgebra) -> Result<ElementSubset, StructureError> {
    require_lattice(e)?;
    Ok(ElementSubset::from_elements(
        e.size(),
        e.elements().filter(|&x| is_central(e, x)),
    ))
}

pub fn is_central(e: &EffectAlgebra, x: Element) -> bool {
    let xc = e.orthosupplement(x);
    e.elements().all(|y| {
        let parts = e.meet(y, x).zip(e.meet(y, xc));
        parts.and_then(|(p, q)| e.join(p, q)) == Some(y)
    })
}

fn modular_counterexample(e: &EffectAlgebra) -> Option<Witness> {
    for x in e.elements() {
        for z in e.order().up_set(x).ones() {
            for y in e.elements() {
                let lhs = e.meet(y, z).and_then(|m| e.join(x, m));
                let rhs = e.join(x, y).and_then(|j| e.meet(j, z));
                if lhs != rhs {
                    return Some(Witness::Triple(x, y, z));
                }
            }
        }
    }
    None
}

fn distributive_counterexample(e: &EffectAlgebra) -> Option<Witness> {
    for x in e.elements() {
        for y in e.elements() {
            for z in e.elements() {
                let lhs = e.join(y, z).and_then(|j| e.meet(x, j));
                let rhs = e.meet(x, y).zip(e.meet(x, z)).and_then(|(p, q)| e.join(p, q));
                if lhs != rhs {
                    return Some(Witness::Triple(x, y, z));
                }
            }
        }
    }
    None
}

/// `x ≤ z ⟹ x ∨ (y ∧ z) = (x ∨ y) ∧ z`.
pub fn is_modular(e: &EffectAlgebra) -> Result<Flag, StructureError> {
    require_lattice(e)?;
    Ok(Flag::from_counterexample(modular_counterexample(e)))
}

/// `x ∧ (y ∨ z) = (x ∧ y) ∨ (x ∧ z)`.
pub fn is_distributive(e: &EffectAlgebra) -> Result<Flag, StructureError> {
    require_lattice(e)?;
    Ok(Flag::from_counterexample(distributive_counterexample(e)))
}

/// `{0}` together with every finite `⊕`-sum of atoms.
pub fn finite_elements(e: &EffectAlgebra) -> ElementSubset {
    let mut seen = ElementSubset::empty(e.size());
    seen.insert(e.zero());
    let mut queue = std::collections::VecDeque::from([e.zero()]);
    while let Some(x) = queue.pop_front() {
        for &a in e.atoms() {
            if let Some(y) = e.sum(x, a) {
                if !seen.contains(y) {
                    seen.insert(y);
                    queue.push_back(y);
                }
            }
        }
    }
    seen
}

/// Downward closed and closed under binary joins.
pub fn is_lattice_ideal(e: &EffectAlgebra, s: &ElementSubset) -> Result<Flag, StructureError> {
    require_lattice(e)?;
    for x in s.iter() {
        if let Some(z) = e.order().down_set(x).ones().find(|&z| !s.contains(z)) {
            return Ok(Flag::no(Witness::Pair(z, x)));
        }
    }
    for x in s.iter() {
        for y in s.iter() {
            let j = e.join(x, y).expect("lattice");
            if !s.contains(j) {
                return Ok(Flag::no(Witness::Triple(x, y, j)));
            }
        }
    }
    Ok(Flag::yes())
}

/// Default bound on the number of subsets scanned by [`is_compact`].
pub const DEFAULT_COMPACTNESS_CAP: u64 = 1 << 20;

/// Compactness by definition: for every `D ⊆ E` with `u ≤ ⋁D`, some finite
/// `F ⊆ D` has `u ≤ ⋁F`. On a finite lattice `F = D` always works; the scan
/// looks for the smallest such `F` anyway.
pub fn is_compact(e: &EffectAlgebra, u: Element, cap: u64) -> Result<bool, StructureError> {
    require_lattice(e)?;
    let n = e.size();
    if n >= 63 || (1u64 << n) > cap {
        return Err(StructureError::CapExceeded { size: n, cap });
    }
    let subset = |mask: u64| -> Vec<Element> { (0..n).filter(|i| mask >> i & 1 == 1).collect() };
    for mask in 0..(1u64 << n) {
        let d = subset(mask);
        let Some(top) = e.order().join_of(&d) else { continue };
        if !e.leq(u, top) {
            continue;
        }
        // submasks in increasing numeric order; `mask` itself always works
        let mut sub = 0u64;
        let mut found = false;
        loop {
            if e.order().join_of(&subset(sub)).is_some_and(|j| e.leq(u, j)) {
                found = true;
                break;
            }
            if sub == mask {
                break;
            }
            sub = sub.wrapping_sub(mask) & mask;
        }
        if !found {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sharp_set(e: &EffectAlgebra) -> Result<ElementSubset, StructureError> {
    sharp_elements(e)
}

/// `x̂`: the least sharp element above x.
pub fn smallest_sharp_over(e: &EffectAlgebra, x: Element) -> Result<Element, StructureError> {
    let sharp = sharp_set(e)?;
    let uppers: Vec<Element> = sharp.iter().filter(|&s| e.leq(x, s)).collect();
    if let Some(&least) = uppers.iter().find(|&&s| uppers.iter().all(|&t| e.leq(s, t))) {
        return Ok(least);
    }
    let minimal = uppers
        .iter()
        .copied()
        .filter(|&s| !uppers.iter().any(|&t| e.lt(t, s)))
        .collect();
    Err(StructureError::NoMinimum { x, minimal })
}

/// `x̃`: the greatest sharp element below x.
pub fn greatest_sharp_under(e: &EffectAlgebra, x: Element) -> Result<Element, StructureError> {
    let sharp = sharp_set(e)?;
    let lowers: Vec<Element> = sharp.iter().filter(|&s| e.leq(s, x)).collect();
    if let Some(&top) = lowers.iter().find(|&&s| lowers.iter().all(|&t| e.leq(t, s))) {
        return Ok(top);
    }
    let maximal = lowers
        .iter()
        .copied()
        .filter(|&s| !lowers.iter().any(|&t| e.lt(s, t)))
        .collect();
    Err(StructureError::NoMaximum { x, maximal })
}

/// Greedy decomposition `x = ⊕ kᵢ·aᵢ`: repeatedly take the lowest-indexed
/// atom below the remainder and subtract its largest multiple that fits.
/// Returns `None` if x is not finite.
pub fn atom_decomposition(e: &EffectAlgebra, x: Element) -> Option<Vec<(Element, usize)>> {
    let mut rest = x;
    let mut parts = Vec::new();
    while rest != e.zero() {
        let &a = e.atoms().iter().find(|&&a| e.leq(a, rest))?;
        let mut k = 1;
        let mut acc = a;
        while let Some(next) = e.sum(acc, a).filter(|&m| e.leq(m, rest)) {
            acc = next;
            k += 1;
        }
        rest = e.try_difference(rest, acc).expect("acc ≤ rest");
        parts.push((a, k));
    }
    Some(parts)
}

/// `⊕ n_{aᵢ}·aᵢ` over the atoms of the greedy decomposition of x.
pub(crate) fn hat_by_atoms(e: &EffectAlgebra, x: Element) -> Result<Element, StructureError> {
    let parts = atom_decomposition(e, x)
        .ok_or_else(|| StructureError::HypothesisViolated(format!("{x} is not finite")))?;
    let mut acc = e.zero();
    for (a, _) in parts {
        let full = e.multiple(a, e.ord(a).expect("atoms are nonzero")).expect("ord");
        acc = e.sum(acc, full).ok_or(StructureError::SumUndefined(a))?;
    }
    Ok(acc)
}

/// Sharp hull through atom multiples, for modular atomic lattice effect
/// algebras.
pub fn sharp_hat_formula(e: &EffectAlgebra, x: Element) -> Result<Element, StructureError> {
    require_lattice(e)?;
    if let Some(w) = modular_counterexample(e) {
        return Err(StructureError::HypothesisViolated(format!("not modular: {w:?}")));
    }
    if let Some(w) = atomic_counterexample(e) {
        return Err(StructureError::HypothesisViolated(format!("not atomic: {w:?}")));
    }
    hat_by_atoms(e, x)
}

/// The antitone involution of the section `[a, 1]`: `x ↦ a ⊕ x'`.
pub fn section_involution(e: &EffectAlgebra, a: Element, x: Element) -> Result<Element, StructureError> {
    if !e.leq(a, x) {
        return Err(StructureError::NotInSection { a, x });
    }
    Ok(e.sum(a, e.orthosupplement(x)).expect("x' ≤ a' when a ≤ x"))
}

fn atomic_counterexample(e: &EffectAlgebra) -> Option<Witness> {
    e.elements()
        .filter(|&x| x != e.zero())
        .find(|&x| !e.atoms().iter().any(|&a| e.leq(a, x)))
        .map(Witness::Element)
}

fn archimedean_counterexample(e: &EffectAlgebra) -> Option<Witness> {
    // A repeated multiple means the sequence k·x never terminates.
    e.elements().filter(|&x| x != e.zero()).find_map(|x| {
        let mut seen = FixedBitSet::with_capacity(e.size());
        let mut acc = x;
        loop {
            if seen.put(acc) {
                return Some(Witness::Element(x));
            }
            match e.sum(acc, x) {
                Some(next) => acc = next,
                None => return None,
            }
        }
    })
}

/// `(x ∨ y) ⊖ x = y ⊖ (x ∧ y)` for all pairs.
pub(crate) fn mv_identity_counterexample(e: &EffectAlgebra) -> Option<Witness> {
    for x in e.elements() {
        for y in e.elements() {
            let (Some(j), Some(m)) = (e.join(x, y), e.meet(x, y)) else {
                return Some(Witness::NoBound(x, y));
            };
            if e.try_difference(j, x) != e.try_difference(y, m) {
                return Some(Witness::Pair(x, y));
            }
        }
    }
    None
}

pub fn classify(e: &EffectAlgebra) -> ClassificationFlags {
    let gap = lattice_gap(e);
    let is_lattice = Flag::from_counterexample(gap.clone());
    let not_lattice = || Flag::no(gap.clone().expect("not a lattice"));
    let atomic = Flag::from_counterexample(atomic_counterexample(e));
    let archimedean = Flag::from_counterexample(archimedean_counterexample(e));

    let sharp = sharp_elements(e).ok();
    let sharply_dominating = match &sharp {
        None => not_lattice(),
        Some(_) => Flag::from_counterexample(
            e.elements()
                .find(|&x| smallest_sharp_over(e, x).is_err())
                .map(Witness::Element),
        ),
    };
    if !is_lattice.holds {
        return ClassificationFlags {
            is_modular: not_lattice(),
            is_distributive: not_lattice(),
            is_orthomodular_lattice: not_lattice(),
            is_mv_effect_algebra: not_lattice(),
            is_sharply_dominating: sharply_dominating,
            is_atomic: atomic,
            is_archimedean: archimedean,
            is_lattice,
        };
    }
    let sharp = sharp.expect("lattice");
    let oml = Flag::from_counterexample(
        e.elements().find(|&x| !sharp.contains(x)).map(Witness::Element),
    );
    let single_block = blocks(e).expect("lattice").len() == 1;
    let identity = mv_identity_counterexample(e);
    assert_eq!(
        single_block,
        identity.is_none(),
        "one-block test and the MV difference identity disagree"
    );
    let mv = match identity {
        None => Flag::yes(),
        Some(w) => Flag::no(w),
    };
    ClassificationFlags {
        is_lattice,
        is_modular: Flag::from_counterexample(modular_counterexample(e)),
        is_distributive: Flag::from_counterexample(distributive_counterexample(e)),
        is_orthomodular_lattice: oml,
        is_mv_effect_algebra: mv,
        is_sharply_dominating: sharply_dominating,
        is_atomic: atomic,
        is_archimedean: archimedean,
    }
}

/// Contains 0 and 1 and is closed under `'` and defined `⊕`.
pub fn is_sub_effect_algebra(e: &EffectAlgebra, s: &ElementSubset) -> bool {
    s.contains(e.zero())
        && s.contains(e.one())
        && s.iter().all(|x| s.contains(e.orthosupplement(x)))
        && s.iter().all(|x| s.iter().all(|y| e.sum(x, y).is_none_or(|z| s.contains(z))))
}

/// Closed under the joins and meets of the ambient lattice.
pub fn is_sublattice(e: &EffectAlgebra, s: &ElementSubset) -> bool {
    s.iter().all(|x| {
        s.iter().all(|y| {
            e.join(x, y).is_some_and(|j| s.contains(j)) && e.meet(x, y).is_some_and(|m| s.contains(m))
        })
    })
}
