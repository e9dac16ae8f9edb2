//! Standard constructions: Boolean algebras, finite chains, horizontal sums,
//! direct products, intervals and the splitting at a central element.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, EffectAlgebra, Element, SumTable, ValidationReport};
use crate::structure;

/// Products and powersets larger than this are rejected.
pub const MAX_CONSTRUCTED_SIZE: usize = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructError {
    #[error("construction would have {size} elements (limit {limit})")]
    TooLarge { size: usize, limit: usize },
    #[error("{0} must be at least 1")]
    ZeroParameter(&'static str),
    #[error("a sum or product needs at least one part")]
    NoParts,
    #[error("interval [{0}, {0}] is degenerate")]
    EmptyInterval(Element),
    #[error("{lower} is not below {upper}")]
    NotBelow { lower: Element, upper: Element },
    #[error("element {0} is not central")]
    NotCentral(Element),
    #[error("central decomposition needs c ∉ {{0, 1}}, got {0}")]
    TrivialCentral(Element),
    #[error("the algebra is not a lattice")]
    NotLattice,
    #[error("no element labelled {0:?}")]
    UnknownLabel(String),
    #[error("constructed table failed validation: {0}")]
    InvalidResult(ValidationReport),
    #[error(transparent)]
    Algebra(AlgebraError),
}

impl From<AlgebraError> for ConstructError {
    fn from(e: AlgebraError) -> Self {
        match e {
            AlgebraError::Invalid(r) => ConstructError::InvalidResult(r),
            other => ConstructError::Algebra(other),
        }
    }
}

/// Declarative description of a constructed algebra.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConstructionSpec {
    Boolean { atoms: usize },
    Chain { length: usize },
    HorizontalSum { parts: Vec<ConstructionSpec> },
    Product { parts: Vec<ConstructionSpec> },
    Interval { parent: Box<ConstructionSpec>, lower: String, upper: String },
}

impl ConstructionSpec {
    pub fn build(&self) -> Result<EffectAlgebra, ConstructError> {
        match self {
            ConstructionSpec::Boolean { atoms } => boolean_algebra(*atoms),
            ConstructionSpec::Chain { length } => chain(*length),
            ConstructionSpec::HorizontalSum { parts } => {
                let built = parts.iter().map(|p| p.build()).collect::<Result<Vec<_>, _>>()?;
                horizontal_sum(&built)
            }
            ConstructionSpec::Product { parts } => {
                let built = parts.iter().map(|p| p.build()).collect::<Result<Vec<_>, _>>()?;
                product(&built)
            }
            ConstructionSpec::Interval { parent, lower, upper } => {
                let e = parent.build()?;
                let find = |l: &str| {
                    e.element_by_label(l).ok_or_else(|| ConstructError::UnknownLabel(l.into()))
                };
                let (a, b) = (find(lower)?, find(upper)?);
                interval(&e, a, b)
            }
        }
    }
}

/// The Boolean algebra with `k` atoms; element `i` is the subset with bitmask `i`.
pub fn boolean_algebra(k: usize) -> Result<EffectAlgebra, ConstructError> {
    if k == 0 {
        return Err(ConstructError::ZeroParameter("atom count"));
    }
    if k > 12 {
        let size = 1usize.checked_shl(k as u32).unwrap_or(usize::MAX);
        return Err(ConstructError::TooLarge { size, limit: MAX_CONSTRUCTED_SIZE });
    }
    let n = 1usize << k;
    let one = n - 1;
    let mut table = SumTable::new(n, 0, one).expect("n >= 2");
    for x in 0..n {
        for y in 0..n {
            if x & y == 0 {
                table.set(x, y, Some(x | y));
            }
        }
    }
    let labels = (0..n)
        .map(|x| match x {
            0 => "0".to_string(),
            _ if x == one => "1".to_string(),
            _ => (0..k)
                .filter(|i| x >> i & 1 == 1)
                .map(atom_name)
                .collect::<Vec<_>>()
                .join(""),
        })
        .collect();
    Ok(EffectAlgebra::new(table.with_labels(labels).expect("unique"))?)
}

fn atom_name(i: usize) -> String {
    if i < 26 {
        ((b'a' + i as u8) as char).to_string()
    } else {
        format!("p{i}")
    }
}

/// The chain `0 < a < 2a < … < m·a = 1`; element `j` is `j·a`.
pub fn chain(m: usize) -> Result<EffectAlgebra, ConstructError> {
    if m == 0 {
        return Err(ConstructError::ZeroParameter("chain length"));
    }
    if m + 1 > MAX_CONSTRUCTED_SIZE {
        return Err(ConstructError::TooLarge { size: m + 1, limit: MAX_CONSTRUCTED_SIZE });
    }
    let mut table = SumTable::new(m + 1, 0, m).expect("m >= 1");
    for j in 0..=m {
        for k in 0..=m - j {
            table.set(j, k, Some(j + k));
        }
    }
    let labels = (0..=m)
        .map(|j| match j {
            0 => "0".to_string(),
            _ if j == m => "1".to_string(),
            1 => "a".to_string(),
            _ => format!("{j}a"),
        })
        .collect();
    Ok(EffectAlgebra::new(table.with_labels(labels).expect("unique"))?)
}

/// Glues the parts at 0 and 1. Sums only exist inside a part.
///
/// The result lists 0 first, then the inner elements of each part in order,
/// and 1 last. Inner labels are prefixed with the part's 1-based index.
pub fn horizontal_sum(parts: &[EffectAlgebra]) -> Result<EffectAlgebra, ConstructError> {
    match parts.len() {
        0 => return Err(ConstructError::NoParts),
        1 => return Ok(parts[0].clone()),
        _ => {}
    }
    let inner: usize = parts.iter().map(|p| p.size() - 2).sum();
    let n = inner + 2;
    if n > MAX_CONSTRUCTED_SIZE {
        return Err(ConstructError::TooLarge { size: n, limit: MAX_CONSTRUCTED_SIZE });
    }
    let one = n - 1;
    let mut labels = vec!["0".to_string()];
    let mut maps = Vec::with_capacity(parts.len());
    let mut next = 1;
    for (i, p) in parts.iter().enumerate() {
        let mut map = vec![0; p.size()];
        for x in p.elements() {
            map[x] = if x == p.zero() {
                0
            } else if x == p.one() {
                one
            } else {
                labels.push(format!("h{}.{}", i + 1, p.label(x)));
                next += 1;
                next - 1
            };
        }
        maps.push(map);
    }
    labels.push("1".to_string());
    let mut table = SumTable::new(n, 0, one).expect("n >= 2");
    for (p, map) in parts.iter().zip(&maps) {
        for x in p.elements() {
            for y in p.elements() {
                if let Some(z) = p.sum(x, y) {
                    table.set(map[x], map[y], Some(map[z]));
                }
            }
        }
    }
    Ok(EffectAlgebra::new(table.with_labels(labels).expect("prefixed labels are unique"))?)
}

/// Direct product with coordinatewise `⊕`. Element indices use mixed radix
/// with the first part most significant.
pub fn product(parts: &[EffectAlgebra]) -> Result<EffectAlgebra, ConstructError> {
    if parts.is_empty() {
        return Err(ConstructError::NoParts);
    }
    let n = parts
        .iter()
        .try_fold(1usize, |acc, p| acc.checked_mul(p.size()))
        .filter(|&n| n <= MAX_CONSTRUCTED_SIZE)
        .ok_or(ConstructError::TooLarge { size: usize::MAX, limit: MAX_CONSTRUCTED_SIZE })?;
    let encode = |coords: &[Element]| {
        coords.iter().zip(parts).fold(0, |acc, (&c, p)| acc * p.size() + c)
    };
    let decode = |mut idx: usize| {
        let mut coords = vec![0; parts.len()];
        for (i, p) in parts.iter().enumerate().rev() {
            coords[i] = idx % p.size();
            idx /= p.size();
        }
        coords
    };
    let zero = encode(&parts.iter().map(|p| p.zero()).collect::<Vec<_>>());
    let one = encode(&parts.iter().map(|p| p.one()).collect::<Vec<_>>());
    let coords: Vec<Vec<Element>> = (0..n).map(decode).collect();
    let mut table = SumTable::new(n, zero, one).expect("n >= 2");
    for x in 0..n {
        for y in 0..n {
            let s: Option<Vec<Element>> = parts
                .iter()
                .enumerate()
                .map(|(i, p)| p.sum(coords[x][i], coords[y][i]))
                .collect();
            if let Some(s) = s {
                table.set(x, y, Some(encode(&s)));
            }
        }
    }
    let labels = coords
        .iter()
        .map(|c| {
            let inner: Vec<&str> = c.iter().zip(parts).map(|(&x, p)| p.label(x)).collect();
            format!("({})", inner.join(","))
        })
        .collect();
    Ok(EffectAlgebra::new(table.with_labels(labels).expect("tuples are unique"))?)
}

/// The interval `[a, b]` as an effect algebra with zero `a` and unit `b`:
/// `x ⊞ y = a ⊕ ((x ⊖ a) ⊕ (y ⊖ a))` whenever that exists and lies below `b`.
///
/// Elements are listed in ascending index order of the parent.
pub fn interval(e: &EffectAlgebra, a: Element, b: Element) -> Result<EffectAlgebra, ConstructError> {
    Ok(interval_with_map(e, a, b)?.0)
}

/// Like [`interval`], also returning the parent index of each new element.
pub fn interval_with_map(
    e: &EffectAlgebra,
    a: Element,
    b: Element,
) -> Result<(EffectAlgebra, Vec<Element>), ConstructError> {
    if a == b {
        return Err(ConstructError::EmptyInterval(a));
    }
    if !e.leq(a, b) {
        return Err(ConstructError::NotBelow { lower: a, upper: b });
    }
    let carrier = e.order().interval(a, b);
    let pos = |x: Element| carrier.binary_search(&x).ok();
    let n = carrier.len();
    let mut table = SumTable::new(n, pos(a).unwrap(), pos(b).unwrap()).expect("a < b");
    for (i, &x) in carrier.iter().enumerate() {
        for (j, &y) in carrier.iter().enumerate() {
            let shifted = e
                .sum(e.try_difference(x, a).unwrap(), e.try_difference(y, a).unwrap())
                .and_then(|s| e.sum(a, s))
                .filter(|&z| e.leq(z, b));
            if let Some(z) = shifted {
                table.set(i, j, Some(pos(z).expect("z lies in [a, b]")));
            }
        }
    }
    let labels = carrier.iter().map(|&x| e.label(x).to_string()).collect();
    let algebra = EffectAlgebra::new(table.with_labels(labels).expect("parent labels"))?;
    Ok((algebra, carrier))
}

/// `E ≅ [0, c] × [0, c']` for a central element `c`.
#[derive(Debug, Clone)]
pub struct CentralDecomposition {
    pub central: Element,
    pub lower: EffectAlgebra,
    pub upper: EffectAlgebra,
    /// Parent index of each element of `lower`.
    pub lower_carrier: Vec<Element>,
    /// Parent index of each element of `upper`.
    pub upper_carrier: Vec<Element>,
    /// `x ↦ (x ∧ c, x ∧ c')` as indices into `lower` and `upper`.
    pub factor_map: Vec<(Element, Element)>,
}

pub fn central_decomposition(
    e: &EffectAlgebra,
    c: Element,
) -> Result<CentralDecomposition, ConstructError> {
    if !e.is_lattice() {
        return Err(ConstructError::NotLattice);
    }
    if c == e.zero() || c == e.one() {
        return Err(ConstructError::TrivialCentral(c));
    }
    let center = structure::center(e).map_err(|_| ConstructError::NotLattice)?;
    if !center.contains(c) {
        return Err(ConstructError::NotCentral(c));
    }
    let cc = e.orthosupplement(c);
    let (lower, lower_carrier) = interval_with_map(e, e.zero(), c)?;
    let (upper, upper_carrier) = interval_with_map(e, e.zero(), cc)?;
    let factor_map: Vec<(Element, Element)> = e
        .elements()
        .map(|x| {
            let l = e.meet(x, c).expect("lattice");
            let u = e.meet(x, cc).expect("lattice");
            (lower_carrier.binary_search(&l).unwrap(), upper_carrier.binary_search(&u).unwrap())
        })
        .collect();
    let d = CentralDecomposition { central: c, lower, upper, lower_carrier, upper_carrier, factor_map };
    assert!(d.is_isomorphism(e), "central splitting at {c} is not an isomorphism");
    Ok(d)
}

impl CentralDecomposition {
    /// Checks that the factor map is a bijection onto the product preserving
    /// `⊕` in both directions.
    pub fn is_isomorphism(&self, e: &EffectAlgebra) -> bool {
        let m = self.upper.size();
        let mut seen = vec![false; self.lower.size() * m];
        for &(l, u) in &self.factor_map {
            if std::mem::replace(&mut seen[l * m + u], true) {
                return false;
            }
        }
        if seen.iter().any(|s| !s) {
            return false;
        }
        for x in e.elements() {
            for y in e.elements() {
                let (xl, xu) = self.factor_map[x];
                let (yl, yu) = self.factor_map[y];
                let coord = self.lower.sum(xl, yl).zip(self.upper.sum(xu, yu));
                match (e.sum(x, y), coord) {
                    (None, None) => {}
                    (Some(z), Some(pair)) if self.factor_map[z] == pair => {}
                    _ => return false,
                }
            }
        }
        true
    }
}
