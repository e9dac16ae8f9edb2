//! The order induced by `⊕`, with covers, atoms and the partial lattice
//! operations.

use fixedbitset::FixedBitSet;

use crate::algebra::{Element, SumTable};

/// Induced order of an effect algebra.
///
/// `join`/`meet` are partial tables: an entry is `None` exactly when the
/// pair has no least upper (greatest lower) bound.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderStructure {
    size: usize,
    zero: Element,
    leq: Vec<bool>,
    up: Vec<FixedBitSet>,
    down: Vec<FixedBitSet>,
    covers: Vec<(Element, Element)>,
    atoms: Vec<Element>,
    join: Vec<Option<Element>>,
    meet: Vec<Option<Element>>,
    is_lattice: bool,
}

/// `x ≤ y` iff `x ⊕ z = y` for some z.
pub fn derive_order(table: &SumTable) -> OrderStructure {
    let n = table.size();
    let mut leq = vec![false; n * n];
    for x in 0..n {
        for z in 0..n {
            if let Some(y) = table.get(x, z) {
                leq[x * n + y] = true;
            }
        }
    }
    OrderStructure::from_relation(n, table.zero(), leq)
}

impl OrderStructure {
    /// Builds the structure from a reflexive order relation given row-major.
    pub fn from_relation(size: usize, zero: Element, leq: Vec<bool>) -> Self {
        let n = size;
        let mut up = vec![FixedBitSet::with_capacity(n); n];
        let mut down = vec![FixedBitSet::with_capacity(n); n];
        for x in 0..n {
            for y in 0..n {
                if leq[x * n + y] {
                    up[x].insert(y);
                    down[y].insert(x);
                }
            }
        }
        let mut covers = Vec::new();
        for x in 0..n {
            for y in up[x].ones() {
                if y == x {
                    continue;
                }
                // y covers x iff nothing lies strictly between them.
                let between = up[x].intersection(&down[y]).count();
                if between == 2 {
                    covers.push((x, y));
                }
            }
        }
        let atoms = covers.iter().filter(|&&(x, _)| x == zero).map(|&(_, y)| y).collect();
        let mut join = vec![None; n * n];
        let mut meet = vec![None; n * n];
        let mut is_lattice = true;
        for x in 0..n {
            for y in x..n {
                let j = least_of(&up, &(&up[x] & &up[y]));
                let m = greatest_of(&down, &(&down[x] & &down[y]));
                is_lattice &= j.is_some() && m.is_some();
                join[x * n + y] = j;
                join[y * n + x] = j;
                meet[x * n + y] = m;
                meet[y * n + x] = m;
            }
        }
        OrderStructure { size, zero, leq, up, down, covers, atoms, join, meet, is_lattice }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn leq(&self, x: Element, y: Element) -> bool {
        self.leq[x * self.size + y]
    }

    pub fn up_set(&self, x: Element) -> &FixedBitSet {
        &self.up[x]
    }

    pub fn down_set(&self, x: Element) -> &FixedBitSet {
        &self.down[x]
    }

    pub fn covers(&self) -> &[(Element, Element)] {
        &self.covers
    }

    pub fn atoms(&self) -> &[Element] {
        &self.atoms
    }

    pub fn is_atom(&self, x: Element) -> bool {
        self.atoms.contains(&x)
    }

    pub fn join(&self, x: Element, y: Element) -> Option<Element> {
        self.join[x * self.size + y]
    }

    pub fn meet(&self, x: Element, y: Element) -> Option<Element> {
        self.meet[x * self.size + y]
    }

    pub fn is_lattice(&self) -> bool {
        self.is_lattice
    }

    /// Least upper bound of an arbitrary family; the empty join is 0.
    pub fn join_of(&self, xs: &[Element]) -> Option<Element> {
        let mut bounds = FixedBitSet::with_capacity(self.size);
        bounds.insert_range(..);
        for &x in xs {
            bounds.intersect_with(&self.up[x]);
        }
        if xs.is_empty() {
            return Some(self.zero);
        }
        least_of(&self.up, &bounds)
    }

    /// Greatest lower bound of a nonempty family.
    pub fn meet_of(&self, xs: &[Element]) -> Option<Element> {
        let mut bounds = FixedBitSet::with_capacity(self.size);
        bounds.insert_range(..);
        for &x in xs {
            bounds.intersect_with(&self.down[x]);
        }
        greatest_of(&self.down, &bounds)
    }

    /// Elements of the interval `[a, b]`, ascending.
    pub fn interval(&self, a: Element, b: Element) -> Vec<Element> {
        (&self.up[a] & &self.down[b]).ones().collect()
    }
}

fn least_of(up: &[FixedBitSet], set: &FixedBitSet) -> Option<Element> {
    set.ones().find(|&u| set.is_subset(&up[u]))
}

fn greatest_of(down: &[FixedBitSet], set: &FixedBitSet) -> Option<Element> {
    set.ones().find(|&u| set.is_subset(&down[u]))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Bounded poset 0 < a, b < c, d < 1 where a, b have two minimal upper
    /// bounds.
    fn bowtie() -> OrderStructure {
        let n = 6;
        let rel = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)];
        let mut leq = vec![false; n * n];
        for x in 0..n {
            leq[x * n + x] = true;
        }
        for &(x, y) in &rel {
            leq[x * n + y] = true;
        }
        // transitive closure
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    if leq[i * n + k] && leq[k * n + j] {
                        leq[i * n + j] = true;
                    }
                }
            }
        }
        OrderStructure::from_relation(n, 0, leq)
    }

    #[test]
    fn partial_joins_on_a_non_lattice() {
        let o = bowtie();
        assert!(!o.is_lattice());
        assert_eq!(o.join(1, 2), None);
        assert_eq!(o.meet(3, 4), None);
        assert_eq!(o.join(3, 4), Some(5));
        assert_eq!(o.join_of(&[1, 2, 3]), Some(3));
        assert_eq!(o.atoms(), &[1, 2]);
        assert_eq!(o.covers().len(), 8);
    }
}
