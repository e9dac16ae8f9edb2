//! Finite effect algebras given by a partial sum table.
//!
//! A [`SumTable`] is an unchecked candidate: a dense `n × n` table of
//! optional results together with the two distinguished elements. Running
//! [`SumTable::validate`] lists every axiom violation; a table with an empty
//! report can be promoted to an [`EffectAlgebra`], which caches the
//! orthosupplement, the difference table and the induced order.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::order::{derive_order, OrderStructure};

/// Elements are 0-based indices into the carrier.
pub type Element = usize;

/// Malformed input tables. Distinct from axiom violations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructureError {
    #[error("an effect algebra needs at least two elements")]
    TooSmall,
    #[error("row {row} has {len} entries, expected {expected}")]
    Ragged { row: usize, len: usize, expected: usize },
    #[error("index {index} out of range for {size} elements ({context})")]
    IndexOutOfRange { index: usize, size: usize, context: &'static str },
    #[error("{got} labels supplied for {size} elements")]
    LabelCount { got: usize, size: usize },
    #[error("duplicate label {0:?}")]
    DuplicateLabel(String),
}

/// Errors raised by operations on a validated algebra.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AlgebraError {
    #[error("table is not an effect algebra: {0}")]
    Invalid(ValidationReport),
    #[error("{x} is not below {y}")]
    NotBelow { x: Element, y: Element },
    #[error("ord is not defined for the zero element")]
    ZeroElement,
    #[error("sum undefined after {position} terms: {partial} ⊕ {next} does not exist")]
    Undefined { position: usize, partial: Element, next: Element },
    #[error("element {0} out of range")]
    OutOfRange(Element),
}

/// The four defining axioms plus the distinct-bounds requirement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axiom {
    /// 0 and 1 must be different elements.
    DistinctBounds,
    /// Ei: x ⊕ y = y ⊕ x.
    Commutativity,
    /// Eii: (x ⊕ y) ⊕ z = x ⊕ (y ⊕ z) if one side is defined.
    Associativity,
    /// Eiii: exactly one y with x ⊕ y = 1.
    Orthosupplement,
    /// Eiv: 1 ⊕ x defined only for x = 0.
    ZeroOne,
}

impl Axiom {
    pub fn code(self) -> &'static str {
        match self {
            Axiom::DistinctBounds => "distinct-bounds",
            Axiom::Commutativity => "Ei",
            Axiom::Associativity => "Eii",
            Axiom::Orthosupplement => "Eiii",
            Axiom::ZeroOne => "Eiv",
        }
    }
}

impl fmt::Display for Axiom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

/// One axiom failure with the elements that exhibit it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub axiom: Axiom,
    pub witness: Vec<Element>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, axiom: Axiom) -> bool {
        self.violations.iter().any(|v| v.axiom == axiom)
    }

    /// Violated axioms, sorted and deduplicated.
    pub fn axioms(&self) -> Vec<Axiom> {
        let mut out: Vec<Axiom> = self.violations.iter().map(|v| v.axiom).collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        let shown: Vec<String> = self
            .violations
            .iter()
            .take(4)
            .map(|v| format!("{}: {}", v.axiom, v.detail))
            .collect();
        write!(f, "{} violation(s): {}", self.violations.len(), shown.join("; "))?;
        if self.violations.len() > 4 {
            f.write_str("; ...")?;
        }
        Ok(())
    }
}

/// Candidate partial algebra. No axioms are assumed.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SumTable {
    size: usize,
    zero: Element,
    one: Element,
    sum: Vec<Option<Element>>,
    labels: Vec<String>,
}

/// Serialized as labels, the two constants and one `[x, y, x ⊕ y]` triple per
/// defined unordered pair (by index).
impl Serialize for SumTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let n = self.size;
        let sums: Vec<[Element; 3]> = (0..n)
            .flat_map(|x| (x..n).map(move |y| (x, y)))
            .filter_map(|(x, y)| self.get(x, y).map(|z| [x, y, z]))
            .collect();
        let mut st = s.serialize_struct("SumTable", 5)?;
        st.serialize_field("size", &n)?;
        st.serialize_field("zero", &self.zero)?;
        st.serialize_field("one", &self.one)?;
        st.serialize_field("labels", &self.labels)?;
        st.serialize_field("sums", &sums)?;
        st.end()
    }
}

impl SumTable {
    /// Empty table (every sum undefined) with default labels.
    pub fn new(size: usize, zero: Element, one: Element) -> Result<Self, StructureError> {
        if size < 2 {
            return Err(StructureError::TooSmall);
        }
        for (index, context) in [(zero, "zero"), (one, "one")] {
            if index >= size {
                return Err(StructureError::IndexOutOfRange { index, size, context });
            }
        }
        let labels = (0..size).map(|i| default_label(i, zero, one)).collect();
        Ok(SumTable { size, zero, one, sum: vec![None; size * size], labels })
    }

    /// Table from explicit rows; `rows[x][y]` is `x ⊕ y`.
    pub fn from_rows(
        zero: Element,
        one: Element,
        rows: &[Vec<Option<Element>>],
    ) -> Result<Self, StructureError> {
        let size = rows.len();
        let mut table = SumTable::new(size, zero, one)?;
        for (x, row) in rows.iter().enumerate() {
            if row.len() != size {
                return Err(StructureError::Ragged { row: x, len: row.len(), expected: size });
            }
            for (y, v) in row.iter().enumerate() {
                if let Some(z) = *v {
                    if z >= size {
                        return Err(StructureError::IndexOutOfRange {
                            index: z,
                            size,
                            context: "sum entry",
                        });
                    }
                }
                table.sum[x * size + y] = *v;
            }
        }
        Ok(table)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self, StructureError> {
        if labels.len() != self.size {
            return Err(StructureError::LabelCount { got: labels.len(), size: self.size });
        }
        let mut seen = std::collections::HashSet::new();
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(StructureError::DuplicateLabel(l.clone()));
            }
        }
        self.labels = labels;
        Ok(self)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn zero(&self) -> Element {
        self.zero
    }

    pub fn one(&self) -> Element {
        self.one
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, x: Element) -> &str {
        &self.labels[x]
    }

    pub fn get(&self, x: Element, y: Element) -> Option<Element> {
        self.sum[x * self.size + y]
    }

    pub fn set(&mut self, x: Element, y: Element, value: Option<Element>) {
        self.sum[x * self.size + y] = value;
    }

    /// Sets both `x ⊕ y` and `y ⊕ x`.
    pub fn set_symmetric(&mut self, x: Element, y: Element, value: Option<Element>) {
        self.set(x, y, value);
        self.set(y, x, value);
    }

    /// Makes zero neutral: `0 ⊕ x = x ⊕ 0 = x` for every x.
    pub fn fill_zero_row(&mut self) {
        for x in 0..self.size {
            self.set_symmetric(self.zero, x, Some(x));
        }
    }

    /// Row-major flattened table; `None` for undefined entries.
    pub fn entries(&self) -> &[Option<Element>] {
        &self.sum
    }

    /// Checks every axiom and reports all violations with witnesses.
    pub fn validate(&self) -> ValidationReport {
        let n = self.size;
        let mut violations = Vec::new();
        if self.zero == self.one {
            violations.push(Violation {
                axiom: Axiom::DistinctBounds,
                witness: vec![self.zero],
                detail: format!("zero and one are both element {}", self.zero),
            });
        }
        for x in 0..n {
            for y in x..n {
                let (a, b) = (self.get(x, y), self.get(y, x));
                if a != b {
                    violations.push(Violation {
                        axiom: Axiom::Commutativity,
                        witness: vec![x, y],
                        detail: format!(
                            "{} ⊕ {} = {} but {} ⊕ {} = {}",
                            self.labels[x],
                            self.labels[y],
                            self.show(a),
                            self.labels[y],
                            self.labels[x],
                            self.show(b)
                        ),
                    });
                }
            }
        }
        for x in 0..n {
            for y in 0..n {
                let xy = self.get(x, y);
                for z in 0..n {
                    let lhs = xy.and_then(|s| self.get(s, z));
                    let rhs = self.get(y, z).and_then(|s| self.get(x, s));
                    if lhs != rhs {
                        violations.push(Violation {
                            axiom: Axiom::Associativity,
                            witness: vec![x, y, z],
                            detail: format!(
                                "({} ⊕ {}) ⊕ {} = {} but {} ⊕ ({} ⊕ {}) = {}",
                                self.labels[x],
                                self.labels[y],
                                self.labels[z],
                                self.show(lhs),
                                self.labels[x],
                                self.labels[y],
                                self.labels[z],
                                self.show(rhs)
                            ),
                        });
                    }
                }
            }
        }
        for x in 0..n {
            let complements: Vec<Element> =
                (0..n).filter(|&y| self.get(x, y) == Some(self.one)).collect();
            if complements.len() != 1 {
                let mut witness = vec![x];
                witness.extend(&complements);
                violations.push(Violation {
                    axiom: Axiom::Orthosupplement,
                    witness,
                    detail: format!(
                        "{} has {} elements summing with it to 1",
                        self.labels[x],
                        complements.len()
                    ),
                });
            }
        }
        for x in 0..n {
            if x != self.zero && self.get(self.one, x).is_some() {
                violations.push(Violation {
                    axiom: Axiom::ZeroOne,
                    witness: vec![self.one, x],
                    detail: format!("1 ⊕ {} is defined", self.labels[x]),
                });
            }
        }
        ValidationReport { violations }
    }

    fn show(&self, v: Option<Element>) -> String {
        match v {
            Some(z) => self.labels[z].clone(),
            None => "undefined".to_string(),
        }
    }

    /// Promotes the table to a validated algebra.
    pub fn into_algebra(self) -> Result<EffectAlgebra, AlgebraError> {
        EffectAlgebra::new(self)
    }
}

fn default_label(i: usize, zero: Element, one: Element) -> String {
    if i == zero {
        "0".to_string()
    } else if i == one {
        "1".to_string()
    } else {
        format!("e{i}")
    }
}

/// A validated finite effect algebra with its derived operations cached.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct EffectAlgebra {
    table: SumTable,
    ortho: Vec<Element>,
    diff: Vec<Option<Element>>,
    order: OrderStructure,
}

impl PartialEq for EffectAlgebra {
    fn eq(&self, other: &Self) -> bool {
        self.table == other.table
    }
}

impl Eq for EffectAlgebra {}

impl EffectAlgebra {
    pub fn new(table: SumTable) -> Result<Self, AlgebraError> {
        let report = table.validate();
        if !report.is_valid() {
            return Err(AlgebraError::Invalid(report));
        }
        let n = table.size;
        let ortho = (0..n)
            .map(|x| (0..n).find(|&y| table.get(x, y) == Some(table.one)).expect("validated"))
            .collect();
        let mut diff = vec![None; n * n];
        for x in 0..n {
            for z in 0..n {
                if let Some(y) = table.get(x, z) {
                    diff[y * n + x] = Some(z);
                }
            }
        }
        let order = derive_order(&table);
        Ok(EffectAlgebra { table, ortho, diff, order })
    }

    pub fn table(&self) -> &SumTable {
        &self.table
    }

    pub fn size(&self) -> usize {
        self.table.size
    }

    pub fn zero(&self) -> Element {
        self.table.zero
    }

    pub fn one(&self) -> Element {
        self.table.one
    }

    pub fn elements(&self) -> std::ops::Range<Element> {
        0..self.table.size
    }

    pub fn label(&self, x: Element) -> &str {
        self.table.label(x)
    }

    pub fn labels(&self) -> &[String] {
        self.table.labels()
    }

    pub fn element_by_label(&self, label: &str) -> Option<Element> {
        self.table.labels.iter().position(|l| l == label)
    }

    /// `x ⊕ y`, or `None` when undefined.
    pub fn sum(&self, x: Element, y: Element) -> Option<Element> {
        self.table.get(x, y)
    }

    pub fn is_orthogonal(&self, x: Element, y: Element) -> bool {
        self.sum(x, y).is_some()
    }

    /// The unique `x'` with `x ⊕ x' = 1`.
    pub fn orthosupplement(&self, x: Element) -> Element {
        self.ortho[x]
    }

    /// `y ⊖ x`: the unique z with `x ⊕ z = y`.
    pub fn difference(&self, y: Element, x: Element) -> Result<Element, AlgebraError> {
        self.diff[y * self.size() + x].ok_or(AlgebraError::NotBelow { x, y })
    }

    pub fn try_difference(&self, y: Element, x: Element) -> Option<Element> {
        self.diff[y * self.size() + x]
    }

    pub fn order(&self) -> &OrderStructure {
        &self.order
    }

    pub fn leq(&self, x: Element, y: Element) -> bool {
        self.order.leq(x, y)
    }

    pub fn lt(&self, x: Element, y: Element) -> bool {
        x != y && self.order.leq(x, y)
    }

    pub fn join(&self, x: Element, y: Element) -> Option<Element> {
        self.order.join(x, y)
    }

    pub fn meet(&self, x: Element, y: Element) -> Option<Element> {
        self.order.meet(x, y)
    }

    pub fn is_lattice(&self) -> bool {
        self.order.is_lattice()
    }

    pub fn atoms(&self) -> &[Element] {
        self.order.atoms()
    }

    /// `k·x`, the k-fold sum; `0·x = 0`.
    pub fn multiple(&self, x: Element, k: usize) -> Option<Element> {
        let mut acc = self.zero();
        for _ in 0..k {
            acc = self.sum(acc, x)?;
        }
        Some(acc)
    }

    /// Largest k with `k·x` defined.
    pub fn ord(&self, x: Element) -> Result<usize, AlgebraError> {
        if x >= self.size() {
            return Err(AlgebraError::OutOfRange(x));
        }
        if x == self.zero() {
            return Err(AlgebraError::ZeroElement);
        }
        // Multiples strictly increase, so the loop ends within `size` steps.
        let mut k = 1;
        let mut acc = x;
        while let Some(next) = self.sum(acc, x) {
            acc = next;
            k += 1;
        }
        Ok(k)
    }

    /// Left-associated sum of a finite sequence; the empty sum is 0.
    pub fn oplus_sum(&self, xs: &[Element]) -> Result<Element, AlgebraError> {
        let mut acc = self.zero();
        for (position, &x) in xs.iter().enumerate() {
            acc = self
                .sum(acc, x)
                .ok_or(AlgebraError::Undefined { position, partial: acc, next: x })?;
        }
        Ok(acc)
    }
}

/// Validates a candidate table without promoting it.
pub fn validate(candidate: &SumTable) -> ValidationReport {
    candidate.validate()
}
