//! Structure reports and Hasse diagrams.

use std::fmt::Write as _;

use effectlab::structure::{self, ElementSubset, Flag, Witness};
use effectlab::{EffectAlgebra, Element};
use serde::Serialize;

pub fn witness_elements(w: &Witness) -> Vec<Element> {
    match w {
        Witness::NoBound(x, y) | Witness::Pair(x, y) => vec![*x, *y],
        Witness::Element(x) => vec![*x],
        Witness::Triple(x, y, z) => vec![*x, *y, *z],
        Witness::Elements(xs) => xs.clone(),
    }
}

fn labels(e: &EffectAlgebra, xs: impl IntoIterator<Item = Element>) -> Vec<String> {
    xs.into_iter().map(|x| e.label(x).to_string()).collect()
}

#[derive(Debug, Serialize)]
pub struct FlagReport {
    pub holds: bool,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<String>,
}

fn flag(e: &EffectAlgebra, f: &Flag) -> FlagReport {
    FlagReport { holds: f.holds, witness: f.witness.as_ref().map_or_else(Vec::new, |w| labels(e, witness_elements(w))) }
}

#[derive(Debug, Serialize)]
pub struct Classification {
    pub lattice: FlagReport,
    pub modular: FlagReport,
    pub distributive: FlagReport,
    pub orthomodular_lattice: FlagReport,
    pub mv_effect_algebra: FlagReport,
    pub sharply_dominating: FlagReport,
    pub atomic: FlagReport,
    pub archimedean: FlagReport,
}

#[derive(Debug, Serialize)]
pub struct OrdEntry {
    pub element: String,
    pub ord: usize,
}

#[derive(Debug, Serialize)]
pub struct Analysis {
    pub size: usize,
    pub elements: Vec<String>,
    pub classification: Classification,
    pub atoms: Vec<String>,
    pub finite: Vec<String>,
    /// Absent for non-lattices, where the lattice-only substructures are undefined.
    pub sharp: Option<Vec<String>>,
    pub blocks: Option<Vec<Vec<String>>>,
    pub compatibility_center: Option<Vec<String>>,
    pub center: Option<Vec<String>>,
    pub ord: Vec<OrdEntry>,
}

pub fn analyze(e: &EffectAlgebra) -> Analysis {
    let c = structure::classify(e);
    let set = |s: ElementSubset| labels(e, s.iter());
    Analysis {
        size: e.size(),
        elements: e.labels().to_vec(),
        classification: Classification {
            lattice: flag(e, &c.is_lattice),
            modular: flag(e, &c.is_modular),
            distributive: flag(e, &c.is_distributive),
            orthomodular_lattice: flag(e, &c.is_orthomodular_lattice),
            mv_effect_algebra: flag(e, &c.is_mv_effect_algebra),
            sharply_dominating: flag(e, &c.is_sharply_dominating),
            atomic: flag(e, &c.is_atomic),
            archimedean: flag(e, &c.is_archimedean),
        },
        atoms: labels(e, e.atoms().iter().copied()),
        finite: set(structure::finite_elements(e)),
        sharp: structure::sharp_elements(e).ok().map(set),
        blocks: structure::blocks(e).ok().map(|bs| bs.into_iter().map(set).collect()),
        compatibility_center: structure::compatibility_center(e).ok().map(set),
        center: structure::center(e).ok().map(set),
        ord: e
            .elements()
            .filter(|&x| x != e.zero())
            .map(|x| OrdEntry { element: e.label(x).to_string(), ord: e.ord(x).expect("nonzero") })
            .collect(),
    }
}

fn yes_no(f: &FlagReport) -> String {
    if f.holds {
        "yes".into()
    } else if f.witness.is_empty() {
        "no".into()
    } else {
        format!("no ({})", f.witness.join(", "))
    }
}

fn braces(xs: &[String]) -> String {
    format!("{{{}}}", xs.join(", "))
}

pub fn analysis_text(a: &Analysis) -> String {
    let mut out = String::new();
    let c = &a.classification;
    let _ = writeln!(out, "elements: {}", braces(&a.elements));
    for (name, f) in [
        ("lattice", &c.lattice),
        ("modular", &c.modular),
        ("distributive", &c.distributive),
        ("orthomodular lattice", &c.orthomodular_lattice),
        ("MV-effect algebra", &c.mv_effect_algebra),
        ("sharply dominating", &c.sharply_dominating),
        ("atomic", &c.atomic),
        ("Archimedean", &c.archimedean),
    ] {
        let _ = writeln!(out, "{name}: {}", yes_no(f));
    }
    let _ = writeln!(out, "atoms: {}", braces(&a.atoms));
    let _ = writeln!(out, "finite: {}", braces(&a.finite));
    let optional = |s: &Option<Vec<String>>| s.as_ref().map_or_else(|| "n/a (not a lattice)".into(), |v| braces(v));
    let _ = writeln!(out, "S(E): {}", optional(&a.sharp));
    match &a.blocks {
        Some(bs) => {
            let _ = writeln!(out, "blocks: {}", bs.len());
            for b in bs {
                let _ = writeln!(out, "  {}", braces(b));
            }
        }
        None => {
            let _ = writeln!(out, "blocks: n/a (not a lattice)");
        }
    }
    let _ = writeln!(out, "B(E): {}", optional(&a.compatibility_center));
    let _ = writeln!(out, "C(E): {}", optional(&a.center));
    let ords: Vec<String> = a.ord.iter().map(|o| format!("{}:{}", o.element, o.ord)).collect();
    let _ = writeln!(out, "ord: {}", ords.join(" "));
    out
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Hasse diagram in DOT, bottom to top; sharp elements are double circles.
pub fn hasse_dot(e: &EffectAlgebra) -> String {
    let sharp = |x: Element| structure::is_sharp(e, x) == Some(true);
    let mut out = String::from("digraph hasse {\n  rankdir=BT;\n  edge [dir=none];\n");
    for x in e.elements() {
        let shape = if sharp(x) { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  n{x} [label={}, shape={shape}];", quote(e.label(x)));
    }
    for &(x, y) in e.order().covers() {
        let _ = writeln!(out, "  n{x} -> n{y};");
    }
    out.push_str("}\n");
    out
}
