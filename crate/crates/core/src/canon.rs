//! Canonical labelling by color refinement followed by an exhaustive scan of
//! the permutations that respect the refined colors.
//!
//! Refined colors are isomorphism invariant, so restricting the scan to
//! color-preserving relabelings still yields a complete invariant.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::algebra::{Element, SumTable};

/// Refines an initial coloring until the number of classes stops growing.
///
/// `neighbours(x, colors)` must return an isomorphism-invariant signature of
/// `x`'s relation to the other points under the current `colors`.
pub fn refine<F>(initial: Vec<u64>, mut neighbours: F) -> Vec<usize>
where
    F: FnMut(usize, &[usize]) -> Vec<u64>,
{
    let mut colors = ranks(&initial.iter().map(|&c| vec![c]).collect::<Vec<_>>());
    loop {
        let sigs: Vec<Vec<u64>> = (0..colors.len())
            .map(|x| {
                let mut sig = vec![colors[x] as u64];
                sig.extend(neighbours(x, &colors));
                sig
            })
            .collect();
        let next = ranks(&sigs);
        let classes = |c: &[usize]| c.iter().max().map_or(0, |m| m + 1);
        if classes(&next) == classes(&colors) {
            return next;
        }
        colors = next;
    }
}

fn ranks(sigs: &[Vec<u64>]) -> Vec<usize> {
    let mut distinct: Vec<&Vec<u64>> = sigs.iter().collect();
    distinct.sort();
    distinct.dedup();
    sigs.iter().map(|s| distinct.binary_search(&s).unwrap()).collect()
}

/// Calls `visit` with every permutation `perm` (new position → old point)
/// that lists color class 0 first, then class 1, and so on.
pub fn for_each_color_preserving<F>(colors: &[usize], mut visit: F)
where
    F: FnMut(&[usize]),
{
    let m = colors.len();
    let mut slots: Vec<usize> = (0..m).collect();
    slots.sort_by_key(|&x| colors[x]);
    let slot_color: Vec<usize> = slots.iter().map(|&x| colors[x]).collect();
    let mut perm = Vec::with_capacity(m);
    let mut used = vec![false; m];
    fn go<F: FnMut(&[usize])>(
        pos: usize,
        colors: &[usize],
        slot_color: &[usize],
        perm: &mut Vec<usize>,
        used: &mut [bool],
        visit: &mut F,
    ) {
        if pos == colors.len() {
            visit(perm);
            return;
        }
        for x in 0..colors.len() {
            if !used[x] && colors[x] == slot_color[pos] {
                used[x] = true;
                perm.push(x);
                go(pos + 1, colors, slot_color, perm, used, visit);
                perm.pop();
                used[x] = false;
            }
        }
    }
    go(0, colors, &slot_color, &mut perm, &mut used, &mut visit);
}

/// Smallest code over all color-preserving relabelings, with one permutation
/// attaining it.
pub fn minimise<F>(colors: &[usize], mut code: F) -> (Vec<usize>, Vec<u32>)
where
    F: FnMut(&[usize]) -> Vec<u32>,
{
    let mut best: Option<(Vec<usize>, Vec<u32>)> = None;
    for_each_color_preserving(colors, |perm| {
        let c = code(perm);
        if best.as_ref().is_none_or(|(_, b)| c.cmp(b) == Ordering::Less) {
            best = Some((perm.to_vec(), c));
        }
    });
    best.expect("at least the sorted permutation")
}

/// Isomorphism-complete key for a sum table: the smallest flattened table
/// over relabelings that send 0 to the first and 1 to the last position.
///
/// Entries are encoded as `value + 1`, with 0 for undefined.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CanonicalForm(pub Vec<u32>);

impl CanonicalForm {
    pub fn of(table: &SumTable) -> Self {
        canonical_labeling(table).1
    }
}

/// Inner points (everything but 0 and 1) of a table, in index order.
fn inner_points(t: &SumTable) -> Vec<Element> {
    (0..t.size()).filter(|&x| x != t.zero() && x != t.one()).collect()
}

/// Full relabeling `old index → new index` derived from a permutation of the
/// inner points (`perm[new inner position] = old inner position`).
pub fn full_relabeling(t: &SumTable, inner: &[Element], perm: &[usize]) -> Vec<Element> {
    let n = t.size();
    let mut map = vec![0; n];
    map[t.zero()] = 0;
    map[t.one()] = n - 1;
    for (new_pos, &old_pos) in perm.iter().enumerate() {
        map[inner[old_pos]] = new_pos + 1;
    }
    map
}

/// Flattened code of `t` relabelled by `map` (old → new).
pub fn relabelled_code(t: &SumTable, map: &[Element]) -> Vec<u32> {
    let n = t.size();
    let mut inverse = vec![0; n];
    for (old, &new) in map.iter().enumerate() {
        inverse[new] = old;
    }
    let mut code = Vec::with_capacity(n * n + 1);
    code.push(n as u32);
    for nx in 0..n {
        for ny in 0..n {
            code.push(t.get(inverse[nx], inverse[ny]).map_or(0, |z| map[z] as u32 + 1));
        }
    }
    code
}

/// Canonical relabeling of a table (old → new) and its canonical form.
pub fn canonical_labeling(t: &SumTable) -> (Vec<Element>, CanonicalForm) {
    let inner = inner_points(t);
    let n = t.size();
    let pos_of = |x: Element| inner.iter().position(|&p| p == x);
    let class_of = |z: Option<Element>, colors: &[usize]| -> u64 {
        match z {
            None => 0,
            Some(z) if z == t.zero() => 1,
            Some(z) if z == t.one() => 2,
            Some(z) => 3 + colors[pos_of(z).unwrap()] as u64,
        }
    };
    let initial: Vec<u64> = inner
        .iter()
        .map(|&x| {
            let row = (0..n).filter(|&y| t.get(x, y).is_some()).count() as u64;
            let hits = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| t.get(a, b) == Some(x))
                .count() as u64;
            let diag = match t.get(x, x) {
                None => 0,
                Some(z) if z == t.one() => 1,
                Some(z) if z == x => 2,
                Some(_) => 3,
            };
            (row << 40) | (hits << 8) | diag
        })
        .collect();
    let colors = refine(initial, |i, colors| {
        let x = inner[i];
        let mut sig: Vec<u64> = (0..n)
            .filter(|&y| y != t.zero() && y != t.one())
            .map(|y| {
                let cy = colors[pos_of(y).unwrap()] as u64;
                (cy << 32) | (class_of(t.get(x, y), colors) << 16) | class_of(t.get(y, x), colors)
            })
            .collect();
        sig.sort_unstable();
        sig.push(class_of(t.get(x, t.zero()), colors));
        sig.push(class_of(t.get(x, t.one()), colors));
        sig
    });
    let (perm, code) = minimise(&colors, |perm| relabelled_code(t, &full_relabeling(t, &inner, perm)));
    (full_relabeling(t, &inner, &perm), CanonicalForm(code))
}

/// Applies a relabeling (old → new) to a table, carrying labels along.
pub fn relabel(t: &SumTable, map: &[Element]) -> SumTable {
    let n = t.size();
    let mut out = SumTable::new(n, map[t.zero()], map[t.one()]).expect("same size");
    let mut labels = vec![String::new(); n];
    for x in 0..n {
        labels[map[x]] = t.label(x).to_string();
        for y in 0..n {
            out.set(map[x], map[y], t.get(x, y).map(|z| map[z]));
        }
    }
    out.with_labels(labels).expect("labels are a permutation of unique labels")
}

/// Whether two tables are isomorphic as partial algebras with 0 and 1.
pub fn isomorphic(a: &SumTable, b: &SumTable) -> bool {
    a.size() == b.size() && CanonicalForm::of(a) == CanonicalForm::of(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{boolean_algebra, chain, horizontal_sum};

    #[test]
    fn relabelled_copies_share_a_form() {
        let e = horizontal_sum(&[boolean_algebra(2).unwrap(), chain(3).unwrap()]).unwrap();
        let t = e.table();
        let n = t.size();
        // reverse the inner points, keep 0 and 1
        let map: Vec<Element> =
            (0..n).map(|x| if x == 0 || x == n - 1 { x } else { n - 1 - x }).collect();
        let shuffled = relabel(t, &map);
        assert_ne!(&shuffled, t);
        assert!(isomorphic(t, &shuffled));
        let c = canonical_labeling(t);
        assert_eq!(relabelled_code(t, &c.0), c.1 .0);
    }

    #[test]
    fn distinct_algebras_differ() {
        let b2 = boolean_algebra(2).unwrap();
        let c4 = chain(3).unwrap();
        assert!(!isomorphic(b2.table(), c4.table()));
    }

    #[test]
    fn color_preserving_count() {
        let mut count = 0;
        for_each_color_preserving(&[0, 1, 0, 1, 1], |_| count += 1);
        assert_eq!(count, 2 * 6);
    }
}
