//! Executable claims: each registered claim evaluates its hypotheses on an
//! instance and, when they hold, its conclusion.
//!
//! Claims about infinite families are finitized: unions over families become
//! all pairs, all triples on small instances and a fixed number of seeded
//! random families.

use std::ops::ControlFlow;
use std::sync::OnceLock;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::algebra::{EffectAlgebra, Element, SumTable};
use crate::construct;
use crate::enumerate::{self, EnumerateError, EnumerationConfig};
use crate::states::{self, Branch, DichotomyCheck, ExstateTrace, StateVector};
use crate::structure::{self, ClassificationFlags, ElementSubset, Flag, Witness, DEFAULT_COMPACTNESS_CAP};

/// Seed for the random families of the distributivity claims.
pub const FAMILY_SEED: u64 = 0x5eed_fa31;
pub const RANDOM_FAMILIES: usize = 1000;
/// Largest instance on which all triples are scanned.
pub const TRIPLE_LIMIT: usize = 8;

pub struct Claim {
    pub id: &'static str,
    /// The claim in one line.
    pub statement: &'static str,
    eval: fn(&Context) -> Evaluation,
}

/// Registered claims in report order.
pub static CLAIMS: &[Claim] = &[
    Claim {
        id: "scompfinchain.i",
        statement: "modular lattice: for finite x and any y, (x ∨ y) ⊖ y is finite",
        eval: finite_difference,
    },
    Claim {
        id: "scompfinchain.ii",
        statement: "modular lattice: everything below a finite element is finite",
        eval: finite_down_closed,
    },
    Claim {
        id: "scompfinchain.iv",
        statement: "modular lattice: [0, x] is a complete lattice for finite x",
        eval: finite_interval_complete,
    },
    Claim {
        id: "scompfinchain.v",
        statement: "modular lattice: the join of two finite elements is finite",
        eval: finite_join,
    },
    Claim {
        id: "scompfinchain.vi",
        statement: "modular lattice: the finite elements form a lattice ideal",
        eval: finite_ideal,
    },
    Claim {
        id: "modlea.hat",
        statement: "modular Archimedean lattice: finite x has a least sharp element above it, \
                    equal to ⊕ ord(aᵢ)·aᵢ over its atoms, and a greatest one below it; \
                    the finite and cofinite elements form a sharply dominating sub-lattice effect algebra",
        eval: sharp_hull,
    },
    Claim {
        id: "xdist",
        statement: "lattice: (⋁ bα) ⊖ a = ⋁ (bα ⊖ a) for a below every bα",
        eval: difference_distributes,
    },
    Claim {
        id: "xblockmod",
        statement: "modular lattice: if the finite elements under z join to z, then [0, z] is atomic",
        eval: finite_generated_atomic,
    },
    Claim {
        id: "dusblockmod",
        statement: "modular lattice with an Archimedean atomic block: E is atomic",
        eval: block_atomic,
    },
    Claim {
        id: "mose",
        statement: "modular Archimedean atomic lattice: S(E) is an atomic orthomodular lattice",
        eval: sharp_oml,
    },
    Claim {
        id: "crae",
        statement: "in every section [d, 1] a compact element above d dominates an atom of the section",
        eval: compact_has_atom,
    },
    Claim {
        id: "cisfin",
        statement: "Archimedean lattice: a compact element is a finite join of finite elements",
        eval: compact_finite_join,
    },
    Claim {
        id: "modcompis",
        statement: "modular Archimedean lattice: compact elements are finite",
        eval: compact_is_finite,
    },
    Claim {
        id: "compblockmod",
        statement: "modular Archimedean lattice: if the compact elements under z join to z, \
                    then [0, z] is atomic",
        eval: compact_generated_atomic,
    },
    Claim {
        id: "distlaw",
        statement: "(⋁ cα) ⊕ b = ⋁ (cα ⊕ b) whenever the left side exists",
        eval: sum_distributes,
    },
    Claim {
        id: "center.identity",
        statement: "lattice: C(E) = B(E) ∩ S(E)",
        eval: center_identity,
    },
    Claim {
        id: "modular.measure",
        statement: "a subadditive state satisfies ω(x) + ω(y) = ω(x ∨ y) + ω(x ∧ y)",
        eval: modular_measure,
    },
    Claim {
        id: "exstatecen",
        statement: "Archimedean atomic lattice with a nonzero finite central c and [0, c] modular: \
                    a subadditive state lifts from [0, c]",
        eval: central_lift,
    },
    Claim {
        id: "exstate.dichotomy",
        statement: "Archimedean atomic lattice, S(E) ≠ E, finite elements a modular ideal: \
                    for an atom a ≤ a', every atom b not compatible with a has a ∨ b = 2a, \
                    and ord(a)·a is central",
        eval: atom_dichotomy,
    },
    Claim {
        id: "xexstate",
        statement: "modular Archimedean atomic lattice with S(E) ≠ E: a subadditive state exists",
        eval: subadditive_exists,
    },
];

/// Claims kept for coverage whose hypotheses cannot be met by a finite
/// instance, or whose conclusion is vacuous there.
pub static SCALE_EXCLUSIONS: &[(&str, &str, &str)] = &[
    (
        "hsum.finite",
        "horizontal sums with an infinite complete atomic Boolean summand break closure of finite elements",
        "needs an infinite Boolean algebra",
    ),
    (
        "chang.noncompact",
        "without the Archimedean property a compact element need not be a finite join of finite elements",
        "every finite effect algebra is Archimedean",
    ),
    (
        "scompfinchain.iii",
        "modular lattice: every chain under a finite element is finite",
        "every chain in a finite poset is finite",
    ),
];

pub const UNSATISFIABLE: &str = "hypotheses unsatisfiable at this scale";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TheoremError {
    #[error("unknown claim {0:?}")]
    UnknownClaim(String),
    #[error(transparent)]
    Enumerate(#[from] EnumerateError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Evidence {
    Structure { witness: Witness },
    Family { base: Element, members: Vec<Element> },
    State { state: StateVector },
    Central { central: Element, state: StateVector },
    Trace { trace: ExstateTrace },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClaimReport {
    pub claim: String,
    pub hypotheses_met: bool,
    pub hypotheses: Vec<HypothesisCheck>,
    /// Present iff `hypotheses_met`.
    pub conclusion_holds: Option<bool>,
    /// Number of concrete cases the conclusion was checked on.
    pub cases: u64,
    /// Counterexample when the conclusion fails, otherwise a trace if any.
    pub witness: Option<Evidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl ClaimReport {
    /// Hypotheses met and conclusion false.
    pub fn failed(&self) -> bool {
        self.conclusion_holds == Some(false)
    }
}

/// Outcome of one claim check before packaging.
struct Evaluation {
    hypotheses: Vec<HypothesisCheck>,
    conclusion: Option<Conclusion>,
}

struct Conclusion {
    holds: bool,
    cases: u64,
    witness: Option<Evidence>,
}

impl Conclusion {
    fn holds(cases: u64) -> Self {
        Conclusion { holds: true, cases, witness: None }
    }

    fn fails(cases: u64, witness: Evidence) -> Self {
        Conclusion { holds: false, cases, witness: Some(witness) }
    }

    fn from_scan(cases: u64, failure: Option<Witness>) -> Self {
        match failure {
            None => Conclusion::holds(cases),
            Some(w) => Conclusion::fails(cases, Evidence::Structure { witness: w }),
        }
    }
}

/// Per-instance facts shared by all claims.
struct Context<'a> {
    e: &'a EffectAlgebra,
    flags: ClassificationFlags,
    finite: ElementSubset,
    compact: OnceLock<Option<Vec<bool>>>,
}

impl<'a> Context<'a> {
    fn new(e: &'a EffectAlgebra) -> Self {
        Context { e, flags: structure::classify(e), finite: structure::finite_elements(e), compact: OnceLock::new() }
    }

    fn lattice(&self) -> bool {
        self.flags.is_lattice.holds
    }

    fn hyp(&self, name: &'static str, flag: &Flag) -> HypothesisCheck {
        HypothesisCheck { name, holds: flag.holds, witness: flag.witness.clone() }
    }

    fn lattice_hyp(&self) -> HypothesisCheck {
        self.hyp("lattice", &self.flags.is_lattice)
    }

    fn modular_hyp(&self) -> HypothesisCheck {
        self.hyp("modular", &self.flags.is_modular)
    }

    fn archimedean_hyp(&self) -> HypothesisCheck {
        self.hyp("archimedean", &self.flags.is_archimedean)
    }

    fn atomic_hyp(&self) -> HypothesisCheck {
        self.hyp("atomic", &self.flags.is_atomic)
    }

    fn unsharp_hyp(&self) -> HypothesisCheck {
        let oml = &self.flags.is_orthomodular_lattice;
        HypothesisCheck {
            name: "unsharp element",
            holds: self.lattice() && !oml.holds,
            witness: None,
        }
    }

    /// Compactness of each element, `None` if the scan is too large.
    fn compact(&self) -> Option<&[bool]> {
        self.compact
            .get_or_init(|| {
                self.e
                    .elements()
                    .map(|u| structure::is_compact(self.e, u, DEFAULT_COMPACTNESS_CAP).ok())
                    .collect()
            })
            .as_deref()
    }

    fn join_of(&self, xs: &[Element]) -> Option<Element> {
        self.e.order().join_of(xs)
    }

    /// First nonzero `y ≤ z` with no atom below it.
    fn atomless_below(&self, z: Element) -> Option<Element> {
        let e = self.e;
        e.order()
            .down_set(z)
            .ones()
            .filter(|&y| y != e.zero())
            .find(|&y| !e.atoms().iter().any(|&a| e.leq(a, y)))
    }
}

fn evaluate(hypotheses: Vec<HypothesisCheck>, conclusion: impl FnOnce() -> Conclusion) -> Evaluation {
    let met = hypotheses.iter().all(|h| h.holds);
    Evaluation { hypotheses, conclusion: met.then(conclusion) }
}

fn modular_lattice(ctx: &Context) -> Vec<HypothesisCheck> {
    vec![ctx.lattice_hyp(), ctx.modular_hyp()]
}

fn finite_difference(ctx: &Context) -> Evaluation {
    evaluate(modular_lattice(ctx), || {
        let e = ctx.e;
        let mut cases = 0;
        for x in ctx.finite.iter() {
            for y in e.elements() {
                cases += 1;
                let d = e.try_difference(e.join(x, y).expect("lattice"), y).expect("y ≤ x ∨ y");
                if !ctx.finite.contains(d) {
                    return Conclusion::from_scan(cases, Some(Witness::Pair(x, y)));
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn finite_down_closed(ctx: &Context) -> Evaluation {
    evaluate(modular_lattice(ctx), || {
        let mut cases = 0;
        for x in ctx.finite.iter() {
            for z in ctx.e.order().down_set(x).ones() {
                cases += 1;
                if !ctx.finite.contains(z) {
                    return Conclusion::from_scan(cases, Some(Witness::Pair(z, x)));
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn finite_interval_complete(ctx: &Context) -> Evaluation {
    evaluate(modular_lattice(ctx), || {
        let e = ctx.e;
        let mut cases = 0;
        for x in ctx.finite.iter() {
            cases += 1;
            let below: Vec<Element> = e.order().down_set(x).ones().collect();
            // a finite bounded poset with all binary joins is a complete lattice
            for &p in &below {
                for &q in &below {
                    if !e.join(p, q).is_some_and(|j| e.leq(j, x)) {
                        return Conclusion::from_scan(cases, Some(Witness::Triple(p, q, x)));
                    }
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn finite_join(ctx: &Context) -> Evaluation {
    evaluate(modular_lattice(ctx), || {
        let mut cases = 0;
        for x in ctx.finite.iter() {
            for y in ctx.finite.iter() {
                cases += 1;
                if !ctx.finite.contains(ctx.e.join(x, y).expect("lattice")) {
                    return Conclusion::from_scan(cases, Some(Witness::Pair(x, y)));
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn finite_ideal(ctx: &Context) -> Evaluation {
    evaluate(modular_lattice(ctx), || {
        let flag = structure::is_lattice_ideal(ctx.e, &ctx.finite).expect("lattice");
        Conclusion::from_scan(1, flag.witness)
    })
}

fn sharp_hull(ctx: &Context) -> Evaluation {
    let hyps = vec![ctx.lattice_hyp(), ctx.modular_hyp(), ctx.archimedean_hyp()];
    evaluate(hyps, || {
        let e = ctx.e;
        let mut cases = 0;
        for x in ctx.finite.iter() {
            cases += 1;
            let hat = structure::smallest_sharp_over(e, x);
            let tilde = structure::greatest_sharp_under(e, x);
            let formula = structure::hat_by_atoms(e, x);
            match (hat, tilde, formula) {
                (Ok(h), Ok(_), Ok(f)) if h == f => {}
                _ => return Conclusion::from_scan(cases, Some(Witness::Element(x))),
            }
        }
        let e1 = ElementSubset::from_elements(
            e.size(),
            e.elements().filter(|&x| ctx.finite.contains(x) || ctx.finite.contains(e.orthosupplement(x))),
        );
        cases += 1;
        if !structure::is_sub_effect_algebra(e, &e1) || !structure::is_sublattice(e, &e1) {
            return Conclusion::from_scan(cases, Some(Witness::Elements(e1.to_vec())));
        }
        let sharp = structure::sharp_elements(e).expect("lattice").intersection(&e1);
        for x in e1.iter() {
            cases += 1;
            let above: Vec<Element> = sharp.iter().filter(|&s| e.leq(x, s)).collect();
            if !above.iter().any(|&s| above.iter().all(|&t| e.leq(s, t))) {
                return Conclusion::from_scan(cases, Some(Witness::Element(x)));
            }
        }
        Conclusion::holds(cases)
    })
}

/// Families for the distributivity claims: all pairs, all triples on small
/// instances, then seeded random families.
fn families(pool: &[Element], size: usize, salt: u64) -> Vec<Vec<Element>> {
    let mut out = Vec::new();
    for (i, &p) in pool.iter().enumerate() {
        for &q in &pool[i..] {
            out.push(vec![p, q]);
        }
    }
    if size <= TRIPLE_LIMIT {
        for (i, &p) in pool.iter().enumerate() {
            for (j, &q) in pool.iter().enumerate().skip(i + 1) {
                for &r in &pool[j + 1..] {
                    out.push(vec![p, q, r]);
                }
            }
        }
    }
    if pool.is_empty() {
        return out;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(FAMILY_SEED ^ salt);
    for _ in 0..RANDOM_FAMILIES {
        let len = rng.gen_range(1..=pool.len().max(2));
        out.push((0..len).map(|_| *pool.choose(&mut rng).expect("nonempty")).collect());
    }
    out
}

fn difference_distributes(ctx: &Context) -> Evaluation {
    evaluate(vec![ctx.lattice_hyp()], || {
        let e = ctx.e;
        let mut cases = 0;
        for a in e.elements() {
            let pool: Vec<Element> = e.order().up_set(a).ones().collect();
            for family in families(&pool, e.size(), a as u64) {
                cases += 1;
                let lhs = ctx.join_of(&family).and_then(|j| e.try_difference(j, a));
                let diffs: Vec<Element> =
                    family.iter().map(|&b| e.try_difference(b, a).expect("a ≤ b")).collect();
                let rhs = ctx.join_of(&diffs);
                if lhs != rhs {
                    return Conclusion::fails(cases, Evidence::Family { base: a, members: family });
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn sum_distributes(ctx: &Context) -> Evaluation {
    evaluate(Vec::new(), || {
        let e = ctx.e;
        let all: Vec<Element> = e.elements().collect();
        let mut cases = 0;
        for family in families(&all, e.size(), u64::MAX) {
            let Some(top) = ctx.join_of(&family) else { continue };
            for b in e.elements() {
                let Some(lhs) = e.sum(top, b) else { continue };
                cases += 1;
                let sums: Option<Vec<Element>> = family.iter().map(|&c| e.sum(c, b)).collect();
                if sums.and_then(|s| ctx.join_of(&s)) != Some(lhs) {
                    return Conclusion::fails(cases, Evidence::Family { base: b, members: family });
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn finite_generated_atomic(ctx: &Context) -> Evaluation {
    evaluate(modular_lattice(ctx), || {
        let e = ctx.e;
        let mut cases = 0;
        for z in e.elements() {
            let fz: Vec<Element> = ctx.finite.iter().filter(|&x| e.leq(x, z)).collect();
            if ctx.join_of(&fz) != Some(z) {
                continue;
            }
            cases += 1;
            if let Some(y) = ctx.atomless_below(z) {
                return Conclusion::from_scan(cases, Some(Witness::Pair(y, z)));
            }
        }
        Conclusion::holds(cases)
    })
}

/// A block that is Archimedean and atomic as an effect algebra in its own right.
fn archimedean_atomic_block(e: &EffectAlgebra) -> Option<ElementSubset> {
    structure::blocks(e).ok()?.into_iter().find(|m| {
        let nonzero: Vec<Element> = m.iter().filter(|&x| x != e.zero()).collect();
        let atoms: Vec<Element> =
            nonzero.iter().copied().filter(|&x| !nonzero.iter().any(|&y| e.lt(y, x))).collect();
        let atomic = nonzero.iter().all(|&x| atoms.iter().any(|&a| e.leq(a, x)));
        let archimedean = nonzero.iter().all(|&x| e.ord(x).is_ok());
        atomic && archimedean
    })
}

fn block_atomic(ctx: &Context) -> Evaluation {
    let mut hyps = modular_lattice(ctx);
    let block = if ctx.lattice() { archimedean_atomic_block(ctx.e) } else { None };
    hyps.push(HypothesisCheck { name: "Archimedean atomic block", holds: block.is_some(), witness: None });
    evaluate(hyps, || {
        Conclusion::from_scan(1, ctx.atomless_below(ctx.e.one()).map(Witness::Element))
    })
}

fn sharp_oml(ctx: &Context) -> Evaluation {
    let hyps = vec![ctx.lattice_hyp(), ctx.modular_hyp(), ctx.archimedean_hyp(), ctx.atomic_hyp()];
    evaluate(hyps, || {
        let e = ctx.e;
        let s = structure::sharp_elements(e).expect("lattice");
        let mut cases = 1;
        if !structure::is_sublattice(e, &s) {
            return Conclusion::from_scan(cases, Some(Witness::Elements(s.to_vec())));
        }
        for x in s.iter() {
            cases += 1;
            let xc = e.orthosupplement(x);
            if !s.contains(xc) || e.join(x, xc) != Some(e.one()) {
                return Conclusion::from_scan(cases, Some(Witness::Element(x)));
            }
            for y in s.iter().filter(|&y| e.leq(x, y)) {
                let rebuilt = e.meet(y, xc).and_then(|m| e.join(x, m));
                if rebuilt != Some(y) {
                    return Conclusion::from_scan(cases, Some(Witness::Pair(x, y)));
                }
            }
        }
        let nonzero: Vec<Element> = s.iter().filter(|&x| x != e.zero()).collect();
        let atoms: Vec<Element> =
            nonzero.iter().copied().filter(|&x| !nonzero.iter().any(|&y| e.lt(y, x))).collect();
        for &x in &nonzero {
            cases += 1;
            if !atoms.iter().any(|&a| e.leq(a, x)) {
                return Conclusion::from_scan(cases, Some(Witness::Element(x)));
            }
        }
        Conclusion::holds(cases)
    })
}

fn compact_has_atom(ctx: &Context) -> Evaluation {
    evaluate(vec![ctx.lattice_hyp()], || {
        let e = ctx.e;
        let mut cases = 0;
        for d in e.elements().filter(|&d| d != e.one()) {
            let (section, carrier) = construct::interval_with_map(e, d, e.one()).expect("d < 1");
            for u in section.elements().filter(|&u| u != section.zero()) {
                if !structure::is_compact(&section, u, DEFAULT_COMPACTNESS_CAP).unwrap_or(false) {
                    continue;
                }
                cases += 1;
                if !section.atoms().iter().any(|&a| section.leq(a, u)) {
                    return Conclusion::from_scan(cases, Some(Witness::Pair(d, carrier[u])));
                }
            }
        }
        Conclusion::holds(cases)
    })
}

fn compact_elements(ctx: &Context) -> Vec<Element> {
    ctx.compact()
        .map(|c| ctx.e.elements().filter(|&u| c[u]).collect())
        .unwrap_or_default()
}

fn compact_finite_join(ctx: &Context) -> Evaluation {
    evaluate(vec![ctx.lattice_hyp(), ctx.archimedean_hyp()], || {
        let e = ctx.e;
        let mut cases = 0;
        for u in compact_elements(ctx) {
            cases += 1;
            let below: Vec<Element> = ctx.finite.iter().filter(|&x| e.leq(x, u)).collect();
            if ctx.join_of(&below) != Some(u) {
                return Conclusion::from_scan(cases, Some(Witness::Element(u)));
            }
        }
        Conclusion::holds(cases)
    })
}

fn compact_is_finite(ctx: &Context) -> Evaluation {
    evaluate(vec![ctx.lattice_hyp(), ctx.modular_hyp(), ctx.archimedean_hyp()], || {
        let compact = compact_elements(ctx);
        let bad = compact.iter().copied().find(|&u| !ctx.finite.contains(u));
        Conclusion::from_scan(compact.len() as u64, bad.map(Witness::Element))
    })
}

fn compact_generated_atomic(ctx: &Context) -> Evaluation {
    evaluate(vec![ctx.lattice_hyp(), ctx.modular_hyp(), ctx.archimedean_hyp()], || {
        let e = ctx.e;
        let compact = compact_elements(ctx);
        let mut cases = 0;
        for z in e.elements() {
            let cz: Vec<Element> = compact.iter().copied().filter(|&x| e.leq(x, z)).collect();
            if ctx.join_of(&cz) != Some(z) {
                continue;
            }
            cases += 1;
            if let Some(y) = ctx.atomless_below(z) {
                return Conclusion::from_scan(cases, Some(Witness::Pair(y, z)));
            }
        }
        Conclusion::holds(cases)
    })
}

fn center_identity(ctx: &Context) -> Evaluation {
    evaluate(vec![ctx.lattice_hyp()], || {
        let e = ctx.e;
        let c = structure::center(e).expect("lattice");
        let b = structure::compatibility_center(e).expect("lattice");
        let s = structure::sharp_elements(e).expect("lattice");
        let bs = b.intersection(&s);
        let diff: Vec<Element> = e.elements().filter(|&x| c.contains(x) != bs.contains(x)).collect();
        if diff.is_empty() {
            Conclusion::holds(e.size() as u64)
        } else {
            Conclusion::fails(e.size() as u64, Evidence::Structure { witness: Witness::Elements(diff) })
        }
    })
}

fn modular_measure(ctx: &Context) -> Evaluation {
    let mut hyps = vec![ctx.lattice_hyp()];
    let state = if ctx.lattice() { states::subadditive_point(ctx.e).ok().flatten() } else { None };
    hyps.push(HypothesisCheck { name: "subadditive state", holds: state.is_some(), witness: None });
    evaluate(hyps, || {
        let e = ctx.e;
        let w = state.expect("hypothesis");
        let mut cases = 0;
        for x in e.elements() {
            for y in x + 1..e.size() {
                cases += 1;
                let (j, m) = (e.join(x, y).expect("lattice"), e.meet(x, y).expect("lattice"));
                if w.value(x) + w.value(y) != w.value(j) + w.value(m) {
                    return Conclusion::from_scan(cases, Some(Witness::Pair(x, y)));
                }
            }
        }
        Conclusion { holds: true, cases, witness: Some(Evidence::State { state: w }) }
    })
}

fn central_lift(ctx: &Context) -> Evaluation {
    let e = ctx.e;
    let mut hyps = vec![ctx.lattice_hyp(), ctx.archimedean_hyp(), ctx.atomic_hyp()];
    let centrals: Vec<Element> = if ctx.lattice() {
        let center = structure::center(e).expect("lattice");
        center
            .iter()
            .filter(|&c| c != e.zero() && ctx.finite.contains(c))
            .filter(|&c| {
                construct::interval(e, e.zero(), c)
                    .is_ok_and(|l| structure::is_modular(&l).is_ok_and(|f| f.holds))
            })
            .collect()
    } else {
        Vec::new()
    };
    hyps.push(HypothesisCheck {
        name: "nonzero finite central c with [0, c] modular",
        holds: !centrals.is_empty(),
        witness: None,
    });
    evaluate(hyps, || {
        let mut first = None;
        for (i, &c) in centrals.iter().enumerate() {
            let lifted = states::lift_from_central(e, c)
                .ok()
                .filter(|w| states::verify_state(e, w, true).is_clean());
            match lifted {
                Some(w) => {
                    first.get_or_insert(Evidence::Central { central: c, state: w });
                }
                None => return Conclusion::from_scan(i as u64 + 1, Some(Witness::Element(c))),
            }
        }
        Conclusion { holds: true, cases: centrals.len() as u64, witness: first }
    })
}

/// Whether the finite elements form a lattice ideal that is modular.
fn finite_modular_ideal(ctx: &Context) -> HypothesisCheck {
    let name = "finite elements form a modular ideal";
    if !ctx.lattice() {
        return HypothesisCheck { name, holds: false, witness: None };
    }
    let e = ctx.e;
    let ideal = structure::is_lattice_ideal(e, &ctx.finite).expect("lattice");
    if !ideal.holds {
        return HypothesisCheck { name, holds: false, witness: ideal.witness };
    }
    for x in ctx.finite.iter() {
        for z in ctx.finite.iter().filter(|&z| e.leq(x, z)) {
            for y in ctx.finite.iter() {
                let lhs = e.meet(y, z).and_then(|m| e.join(x, m));
                let rhs = e.join(x, y).and_then(|j| e.meet(j, z));
                if lhs != rhs {
                    return HypothesisCheck { name, holds: false, witness: Some(Witness::Triple(x, y, z)) };
                }
            }
        }
    }
    HypothesisCheck { name, holds: true, witness: None }
}

fn atom_dichotomy(ctx: &Context) -> Evaluation {
    let hyps = vec![
        ctx.lattice_hyp(),
        ctx.archimedean_hyp(),
        ctx.atomic_hyp(),
        ctx.unsharp_hyp(),
        finite_modular_ideal(ctx),
    ];
    evaluate(hyps, || {
        let e = ctx.e;
        let b_center = structure::compatibility_center(e).expect("lattice");
        let mut cases = 0;
        let mut first = None;
        for &a in e.atoms().iter().filter(|&&a| e.leq(a, e.orthosupplement(a))) {
            let multiplicity = e.ord(a).expect("atoms are nonzero");
            let central = e.multiple(a, multiplicity).expect("ord(a)·a is defined");
            let double = e.sum(a, a);
            let mut checks = Vec::new();
            let branch = if b_center.contains(a) {
                Branch::CompatibleWithAll
            } else {
                for &b in e.atoms().iter().filter(|&&b| !structure::compatible(e, a, b)) {
                    cases += 1;
                    let join = e.join(a, b).expect("lattice");
                    if Some(join) != double {
                        return Conclusion::from_scan(cases, Some(Witness::Pair(a, b)));
                    }
                    checks.push(DichotomyCheck { atom: b, join, double });
                }
                Branch::Dichotomy
            };
            cases += 1;
            if !structure::is_central(e, central) {
                return Conclusion::from_scan(cases, Some(Witness::Pair(a, central)));
            }
            first.get_or_insert(ExstateTrace { atom: a, multiplicity, branch, checks, central });
        }
        Conclusion { holds: true, cases, witness: first.map(|trace| Evidence::Trace { trace }) }
    })
}

fn subadditive_exists(ctx: &Context) -> Evaluation {
    let hyps = vec![
        ctx.lattice_hyp(),
        ctx.modular_hyp(),
        ctx.archimedean_hyp(),
        ctx.atomic_hyp(),
        ctx.unsharp_hyp(),
    ];
    evaluate(hyps, || {
        let found = states::subadditive_point(ctx.e)
            .ok()
            .flatten()
            .filter(|w| states::verify_state(ctx.e, w, true).is_clean());
        match found {
            Some(state) => Conclusion { holds: true, cases: 1, witness: Some(Evidence::State { state }) },
            None => Conclusion::fails(1, Evidence::Structure { witness: Witness::Elements(Vec::new()) }),
        }
    })
}

fn package(id: &str, ev: Evaluation) -> ClaimReport {
    let hypotheses_met = ev.conclusion.is_some();
    let (conclusion_holds, cases, witness) = match ev.conclusion {
        Some(c) => (Some(c.holds), c.cases, c.witness),
        None => (None, 0, None),
    };
    ClaimReport {
        claim: id.to_string(),
        hypotheses_met,
        hypotheses: ev.hypotheses,
        conclusion_holds,
        cases,
        witness,
        error: None,
    }
}

fn excluded(id: &str) -> Option<ClaimReport> {
    let &(id, _, reason) = SCALE_EXCLUSIONS.iter().find(|(x, _, _)| *x == id)?;
    Some(ClaimReport {
        claim: id.to_string(),
        hypotheses_met: false,
        hypotheses: vec![HypothesisCheck { name: reason, holds: false, witness: None }],
        conclusion_holds: None,
        cases: 0,
        witness: None,
        error: Some(UNSATISFIABLE.to_string()),
    })
}

/// Evaluates one registered claim on `e`.
pub fn check(e: &EffectAlgebra, id: &str) -> Result<ClaimReport, TheoremError> {
    if let Some(report) = excluded(id) {
        return Ok(report);
    }
    let claim = CLAIMS.iter().find(|c| c.id == id).ok_or_else(|| TheoremError::UnknownClaim(id.into()))?;
    Ok(package(claim.id, (claim.eval)(&Context::new(e))))
}

/// Every registered claim, in registry order.
pub fn check_all(e: &EffectAlgebra) -> Vec<ClaimReport> {
    let ctx = Context::new(e);
    CLAIMS.iter().map(|c| package(c.id, (c.eval)(&ctx))).collect()
}

/// Like [`check_all`], but accepts an unchecked table; an invalid table gets
/// one error entry per claim.
pub fn check_table(table: &SumTable) -> Vec<ClaimReport> {
    match EffectAlgebra::new(table.clone()) {
        Ok(e) => check_all(&e),
        Err(err) => CLAIMS
            .iter()
            .map(|c| ClaimReport {
                claim: c.id.to_string(),
                hypotheses_met: false,
                hypotheses: Vec::new(),
                conclusion_holds: None,
                cases: 0,
                witness: None,
                error: Some(err.to_string()),
            })
            .collect(),
    }
}

/// Greedily replaces `e` by an interval `[0, x]` or `[x, 1]` on which
/// `fails` still holds, until no interval does.
pub fn shrink<F>(e: &EffectAlgebra, fails: F) -> EffectAlgebra
where
    F: Fn(&EffectAlgebra) -> bool,
{
    let mut current = e.clone();
    'outer: loop {
        for x in current.elements() {
            let candidates = [
                (x != current.zero()).then(|| construct::interval(&current, current.zero(), x)),
                (x != current.one()).then(|| construct::interval(&current, x, current.one())),
            ];
            for sub in candidates.into_iter().flatten().flatten() {
                if sub.size() < current.size() && fails(&sub) {
                    current = sub;
                    continue 'outer;
                }
            }
        }
        return current;
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub instance: SumTable,
    pub report: ClaimReport,
    /// The smallest interval of `instance` on which the claim still fails.
    pub reduced: SumTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub claim: String,
    pub max_size: usize,
    pub instances: u64,
    pub hypotheses_met: u64,
    pub counterexample: Option<Counterexample>,
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Runs one claim over every enumerated instance of sizes `2..=config.size`.
pub fn sweep(config: &EnumerationConfig, id: &str) -> Result<SweepReport, TheoremError> {
    if excluded(id).is_none() && !CLAIMS.iter().any(|c| c.id == id) {
        return Err(TheoremError::UnknownClaim(id.into()));
    }
    let mut report = SweepReport {
        claim: id.to_string(),
        max_size: config.size,
        instances: 0,
        hypotheses_met: 0,
        counterexample: None,
    };
    for size in 2..=config.size {
        let sized = EnumerationConfig { size, ..config.clone() };
        let mut failure = None;
        enumerate::run(
            &sized,
            None,
            |e| {
                let r = check(&e, id).expect("registered");
                (e, r)
            },
            |(e, r)| {
                report.instances += 1;
                report.hypotheses_met += u64::from(r.hypotheses_met);
                if r.failed() {
                    failure = Some((e, r));
                    return ControlFlow::Break(());
                }
                ControlFlow::Continue(())
            },
        )?;
        if let Some((e, r)) = failure {
            let reduced = shrink(&e, |sub| check(sub, id).is_ok_and(|r| r.failed()));
            report.counterexample =
                Some(Counterexample { instance: e.table().clone(), report: r, reduced: reduced.table().clone() });
            break;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{boolean_algebra, chain, horizontal_sum};

    fn e5() -> EffectAlgebra {
        horizontal_sum(&[boolean_algebra(2).unwrap(), chain(2).unwrap()]).unwrap()
    }

    #[test]
    fn registry_ids_are_unique_and_described() {
        let mut ids: Vec<&str> = CLAIMS.iter().map(|c| c.id).collect();
        assert_eq!(ids.len(), 20);
        ids.extend(SCALE_EXCLUSIONS.iter().map(|x| x.0));
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert!(CLAIMS.iter().all(|c| !c.statement.trim().is_empty()));
        assert!(SCALE_EXCLUSIONS.iter().all(|x| !x.1.trim().is_empty() && !x.2.trim().is_empty()));
    }

    #[test]
    fn e5_passes_everything() {
        let reports = check_all(&e5());
        assert_eq!(reports.len(), 20);
        assert!(reports.iter().all(|r| !r.failed()), "{reports:#?}");
        let x = check(&e5(), "xexstate").unwrap();
        assert_eq!(x.conclusion_holds, Some(true));
    }

    #[test]
    fn boolean_square_is_sharp() {
        let r = check(&boolean_algebra(2).unwrap(), "xexstate").unwrap();
        assert!(!r.hypotheses_met);
        assert_eq!(r.conclusion_holds, None);
    }

    #[test]
    fn unknown_and_excluded_ids() {
        assert!(matches!(check(&e5(), "nope"), Err(TheoremError::UnknownClaim(_))));
        let r = check(&e5(), "chang.noncompact").unwrap();
        assert_eq!(r.error.as_deref(), Some(UNSATISFIABLE));
    }

    #[test]
    fn shrink_descends_to_an_interval() {
        let b3 = boolean_algebra(3).unwrap();
        let small = shrink(&b3, |e| e.size() >= 4);
        assert_eq!(small.size(), 4);
    }
}
