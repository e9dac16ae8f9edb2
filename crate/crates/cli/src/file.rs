//! The TOML algebra file.
//!
//! ```toml
//! version = 1
//! elements = ["0", "a", "a'", "b", "1"]
//! zero = "0"
//! one = "1"
//! sums = [["a", "a'", "1"], ["b", "b", "1"]]
//! ```
//!
//! Each unordered pair needs one orientation; `x ⊕ 0 = x` is implied.
//! Instead of a table a file may hold a `[construct]` table.

use std::collections::HashMap;
use std::fmt;

use effectlab::construct::ConstructionSpec;
use effectlab::{EffectAlgebra, SumTable};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub elements: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub zero: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub one: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sums: Option<Vec<[String; 3]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub construct: Option<ConstructionSpec>,
}

/// Anything that stops a file from becoming a table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError(pub String);

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError(msg.into()))
}

/// What a file turned into: a raw table still to be validated, or an
/// algebra built (and validated) from a construction.
pub enum Loaded {
    Table(SumTable),
    Built(EffectAlgebra),
}

pub fn parse(text: &str) -> Result<Loaded, ParseError> {
    let file: AlgebraFile = toml::from_str(text).map_err(|e| ParseError(e.to_string()))?;
    if file.version != FORMAT_VERSION {
        return err(format!("unsupported version {}", file.version));
    }
    let has_table = file.elements.is_some() || file.zero.is_some() || file.one.is_some() || file.sums.is_some();
    match (file.construct, has_table) {
        (Some(_), true) => err("give either a table or a construction, not both"),
        (Some(spec), false) => spec.build().map(Loaded::Built).map_err(|e| ParseError(e.to_string())),
        (None, false) => err("no table and no construction"),
        (None, true) => {
            let (Some(elements), Some(zero), Some(one)) = (file.elements, file.zero, file.one) else {
                return err("a table needs elements, zero and one");
            };
            table_from_triples(elements, &zero, &one, &file.sums.unwrap_or_default()).map(Loaded::Table)
        }
    }
}

fn table_from_triples(
    elements: Vec<String>,
    zero: &str,
    one: &str,
    sums: &[[String; 3]],
) -> Result<SumTable, ParseError> {
    let mut index = HashMap::new();
    for (i, l) in elements.iter().enumerate() {
        if index.insert(l.as_str(), i).is_some() {
            return err(format!("duplicate element {l:?}"));
        }
    }
    let find = |l: &str| index.get(l).copied().ok_or_else(|| ParseError(format!("unknown element {l:?}")));
    let (z, o) = (find(zero)?, find(one)?);
    let n = elements.len();
    let mut table = SumTable::new(n, z, o).map_err(|e| ParseError(e.to_string()))?;
    let mut put = |x: usize, y: usize, v: usize| -> Result<(), ParseError> {
        for (p, q) in [(x, y), (y, x)] {
            match table.get(p, q) {
                Some(old) if old != v => {
                    return err(format!(
                        "conflicting sums for {} ⊕ {}: {} and {}",
                        elements[p], elements[q], elements[old], elements[v]
                    ))
                }
                _ => table.set(p, q, Some(v)),
            }
        }
        Ok(())
    };
    for x in 0..n {
        put(x, z, x)?;
    }
    for [x, y, v] in sums {
        put(find(x)?, find(y)?, find(v)?)?;
    }
    table.with_labels(elements.clone()).map_err(|e| ParseError(e.to_string()))
}

pub fn load(path: &std::path::Path) -> Result<Loaded, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseError(format!("{}: {e}", path.display())))?;
    parse(&text)
}

/// The table of `e` as a file, one triple per unordered pair of nonzero elements.
pub fn to_file(e: &EffectAlgebra) -> AlgebraFile {
    let label = |x: usize| e.label(x).to_string();
    let mut sums = Vec::new();
    for x in e.elements().filter(|&x| x != e.zero()) {
        for y in (x..e.size()).filter(|&y| y != e.zero()) {
            if let Some(z) = e.sum(x, y) {
                sums.push([label(x), label(y), label(z)]);
            }
        }
    }
    AlgebraFile {
        version: FORMAT_VERSION,
        elements: Some(e.labels().to_vec()),
        zero: Some(label(e.zero())),
        one: Some(label(e.one())),
        sums: Some(sums),
        construct: None,
    }
}

pub fn to_toml(e: &EffectAlgebra) -> String {
    toml::to_string(&to_file(e)).expect("plain data serializes")
}
