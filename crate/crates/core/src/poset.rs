//! Unlabelled finite posets, generated one isomorphism class at a time.
//!
//! Every poset on `k + 1` points arises from one on `k` points by adding a
//! maximal point above a down-closed subset, so growing each class
//! representative by every order ideal and keeping canonical forms yields
//! every class exactly once.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};

use crate::canon::{minimise, refine};

/// Largest number of points supported.
pub const MAX_POINTS: usize = 10;

/// A poset on points `0..m`; `below[x]` is the bitmask of points strictly below x.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    below: Vec<u32>,
}

impl Poset {
    pub fn antichain(m: usize) -> Self {
        Poset { below: vec![0; m] }
    }

    /// Builds a poset from strict-below masks, closing transitively.
    pub fn from_below(mut below: Vec<u32>) -> Self {
        let m = below.len();
        loop {
            let mut changed = false;
            for x in 0..m {
                let mut closure = below[x];
                for y in 0..m {
                    if below[x] >> y & 1 == 1 {
                        closure |= below[y];
                    }
                }
                if closure != below[x] {
                    below[x] = closure;
                    changed = true;
                }
            }
            if !changed {
                return Poset { below };
            }
        }
    }

    pub fn len(&self) -> usize {
        self.below.len()
    }

    pub fn is_empty(&self) -> bool {
        self.below.is_empty()
    }

    /// Strict order.
    pub fn lt(&self, x: usize, y: usize) -> bool {
        self.below[y] >> x & 1 == 1
    }

    pub fn below(&self, x: usize) -> u32 {
        self.below[x]
    }

    pub fn above(&self, x: usize) -> u32 {
        (0..self.len()).filter(|&y| self.lt(x, y)).fold(0, |m, y| m | 1 << y)
    }

    /// Down-closed subsets, as bitmasks, in increasing numeric order.
    pub fn ideals(&self) -> Vec<u32> {
        let m = self.len();
        (0..1u32 << m)
            .filter(|&s| (0..m).all(|x| s >> x & 1 == 0 || self.below[x] & !s == 0))
            .collect()
    }

    /// The poset with `perm[new] = old` applied.
    pub fn relabel(&self, perm: &[usize]) -> Poset {
        let m = self.len();
        let mut inverse = vec![0; m];
        for (new, &old) in perm.iter().enumerate() {
            inverse[old] = new;
        }
        let below = perm
            .iter()
            .map(|&old| {
                (0..m).filter(|&y| self.below[old] >> y & 1 == 1).fold(0, |mask, y| mask | 1 << inverse[y])
            })
            .collect();
        Poset { below }
    }

    fn code(&self, perm: &[usize]) -> Vec<u32> {
        self.relabel(perm).below
    }

    fn colors(&self) -> Vec<usize> {
        let m = self.len();
        let initial = (0..m)
            .map(|x| ((self.below[x].count_ones() as u64) << 8) | self.above(x).count_ones() as u64)
            .collect();
        refine(initial, |x, colors| {
            let mut sig: Vec<u64> = (0..m)
                .filter_map(|y| {
                    if self.lt(y, x) {
                        Some(colors[y] as u64)
                    } else if self.lt(x, y) {
                        Some((1 << 32) | colors[y] as u64)
                    } else {
                        None
                    }
                })
                .collect();
            sig.sort_unstable();
            sig
        })
    }

    /// Canonical representative and its code.
    pub fn canonical(&self) -> (Poset, Vec<u32>) {
        let (perm, code) = minimise(&self.colors(), |p| self.code(p));
        (self.relabel(&perm), code)
    }

    /// Every automorphism as a permutation `perm[new] = old`.
    pub fn automorphisms(&self) -> Vec<Vec<usize>> {
        let own = self.below.clone();
        let mut out = Vec::new();
        crate::canon::for_each_color_preserving(&self.colors(), |p| {
            if self.code(p) == own {
                out.push(p.to_vec());
            }
        });
        out
    }

    /// A linear extension: points sorted by number of strict predecessors.
    pub fn linear_extension(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by_key(|&x| (self.below[x].count_ones(), x));
        order
    }

    /// Whether the poset with a bottom and a top adjoined is a lattice.
    pub fn bounded_is_lattice(&self) -> bool {
        let m = self.len();
        let upper = |x: usize| self.above(x) | 1 << x;
        let lower = |x: usize| self.below[x] | 1 << x;
        for x in 0..m {
            for y in x + 1..m {
                let ub = upper(x) & upper(y);
                if ub != 0 && !(0..m).any(|u| ub >> u & 1 == 1 && ub & !upper(u) == 0) {
                    return false;
                }
                let lb = lower(x) & lower(y);
                if lb != 0 && !(0..m).any(|u| lb >> u & 1 == 1 && lb & !lower(u) == 0) {
                    return false;
                }
            }
        }
        true
    }
}

fn cache() -> &'static Mutex<HashMap<usize, Arc<Vec<Poset>>>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Poset>>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// One canonical representative per isomorphism class of posets on `m`
/// points, sorted by canonical code.
pub fn posets(m: usize) -> Arc<Vec<Poset>> {
    assert!(m <= MAX_POINTS, "posets beyond {MAX_POINTS} points are not supported");
    if let Some(p) = cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    let generated = if m == 0 {
        vec![Poset::antichain(0)]
    } else {
        let smaller = posets(m - 1);
        let mut classes: BTreeMap<Vec<u32>, Poset> = BTreeMap::new();
        for p in smaller.iter() {
            for ideal in p.ideals() {
                let mut below = p.below.clone();
                below.push(ideal);
                let (rep, code) = Poset { below }.canonical();
                classes.entry(code).or_insert(rep);
            }
        }
        classes.into_values().collect()
    };
    let generated = Arc::new(generated);
    cache().lock().unwrap().insert(m, generated.clone());
    generated
}
