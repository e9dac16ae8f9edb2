//! Independent oracles shared by the integration tests. Nothing here calls the
//! crate's order, canonical-form or LP code.
#![allow(dead_code)]

use effectlab::construct::{boolean_algebra, chain, horizontal_sum, product};
use effectlab::{EffectAlgebra, Element, SumTable};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

pub fn b2() -> EffectAlgebra {
    boolean_algebra(2).unwrap()
}

pub fn c3() -> EffectAlgebra {
    chain(2).unwrap()
}

pub fn c4() -> EffectAlgebra {
    chain(3).unwrap()
}

/// 0, a, a', b, 1 with a ⊕ a' = 1 = b ⊕ b.
pub fn e5() -> EffectAlgebra {
    horizontal_sum(&[b2(), c3()]).unwrap()
}

pub fn hs2() -> EffectAlgebra {
    horizontal_sum(&[b2(), b2()]).unwrap()
}

pub fn b2_times_c3() -> EffectAlgebra {
    product(&[b2(), c3()]).unwrap()
}

/// All permutations of `0..k` (Heap's algorithm).
pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        for i in 0..k - 1 {
            go(k - 1, a, out);
            if k.is_multiple_of(2) {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
        }
        go(k - 1, a, out);
    }
    let mut out = Vec::new();
    go(k, &mut (0..k).collect(), &mut out);
    out
}

/// Brute-force isomorphism: try every bijection sending 0 to 0 and 1 to 1.
pub fn naive_isomorphic(a: &SumTable, b: &SumTable) -> bool {
    let n = a.size();
    if n != b.size() {
        return false;
    }
    let inner = |t: &SumTable| (0..n).filter(|&x| x != t.zero() && x != t.one()).collect::<Vec<_>>();
    let (ia, ib) = (inner(a), inner(b));
    permutations(n - 2).into_iter().any(|p| {
        let mut map = vec![0; n];
        map[a.zero()] = b.zero();
        map[a.one()] = b.one();
        for (i, &x) in ia.iter().enumerate() {
            map[x] = ib[p[i]];
        }
        (0..n).all(|x| (0..n).all(|y| a.get(x, y).map(|z| map[z]) == b.get(map[x], map[y])))
    })
}

/// Every effect algebra on `n` elements up to isomorphism, by generating all
/// symmetric tables with `x ⊕ 0 = x` and deduplicating by brute force.
///
/// The row of 1 is left undefined off 0; everything else ranges freely.
pub fn naive_classes(n: usize) -> Vec<SumTable> {
    assert!((2..=5).contains(&n));
    let one = n - 1;
    let pairs: Vec<(usize, usize)> = (1..one).flat_map(|x| (x..one).map(move |y| (x, y))).collect();
    let choices = n + 1;
    let total = choices.pow(pairs.len() as u32);
    let mut classes: Vec<SumTable> = Vec::new();
    for mut code in 0..total {
        let mut t = SumTable::new(n, 0, one).unwrap();
        t.fill_zero_row();
        for &(x, y) in &pairs {
            let c = code % choices;
            code /= choices;
            t.set_symmetric(x, y, (c > 0).then(|| c - 1));
        }
        if !t.validate().is_valid() {
            continue;
        }
        if !classes.iter().any(|c| naive_isomorphic(c, &t)) {
            classes.push(t);
        }
    }
    classes
}

/// A linear constraint `Σ coeffs·x (= or ≤) rhs`.
#[derive(Clone, Debug)]
pub struct Row {
    pub coeffs: Vec<Q>,
    pub eq: bool,
    pub rhs: Q,
}

/// Exact Fourier–Motzkin feasibility: equalities are eliminated by
/// substitution, then inequalities variable by variable.
pub fn fm_feasible(vars: usize, rows: &[Row]) -> bool {
    let mut eqs: Vec<Row> = rows.iter().filter(|r| r.eq).cloned().collect();
    let mut ineqs: Vec<Row> = rows.iter().filter(|r| !r.eq).cloned().collect();
    let mut live = vec![true; vars];
    while let Some(r) = eqs.pop() {
        let Some(j) = (0..vars).find(|&j| !r.coeffs[j].is_zero()) else {
            if !r.rhs.is_zero() {
                return false;
            }
            continue;
        };
        let substitute = |s: &mut Row| {
            if s.coeffs[j].is_zero() {
                return;
            }
            let f = &s.coeffs[j] / &r.coeffs[j];
            for k in 0..vars {
                let d = &f * &r.coeffs[k];
                s.coeffs[k] -= d;
            }
            s.rhs -= &f * &r.rhs;
        };
        eqs.iter_mut().for_each(substitute);
        ineqs.iter_mut().for_each(substitute);
        live[j] = false;
    }
    for j in 0..vars {
        if !live[j] {
            continue;
        }
        let (mut pos, mut neg, mut rest) = (Vec::new(), Vec::new(), Vec::new());
        for r in ineqs {
            if r.coeffs[j].is_positive() {
                pos.push(r);
            } else if r.coeffs[j].is_negative() {
                neg.push(r);
            } else {
                rest.push(r);
            }
        }
        for p in &pos {
            for m in &neg {
                let (fp, fm) = (-m.coeffs[j].clone(), p.coeffs[j].clone());
                let coeffs: Vec<Q> = (0..vars).map(|k| &fp * &p.coeffs[k] + &fm * &m.coeffs[k]).collect();
                let rhs = &fp * &p.rhs + &fm * &m.rhs;
                let row = Row { coeffs, eq: false, rhs };
                if !rest.iter().any(|r: &Row| r.coeffs == row.coeffs && r.rhs <= row.rhs) {
                    rest.push(row);
                }
            }
        }
        ineqs = rest;
    }
    ineqs.iter().all(|r| !r.rhs.is_negative())
}

/// The state conditions on `e` as FM rows over one variable per element.
pub fn state_rows(e: &EffectAlgebra) -> Vec<Row> {
    let n = e.size();
    let unit = |j: usize| {
        let mut v = vec![q(0); n];
        v[j] = q(1);
        v
    };
    let mut rows = vec![
        Row { coeffs: unit(e.zero()), eq: true, rhs: q(0) },
        Row { coeffs: unit(e.one()), eq: true, rhs: q(1) },
    ];
    for x in 0..n {
        rows.push(Row { coeffs: unit(x).into_iter().map(|c| -c).collect(), eq: false, rhs: q(0) });
        rows.push(Row { coeffs: unit(x), eq: false, rhs: q(1) });
        for y in x..n {
            if let Some(z) = e.sum(x, y) {
                let mut c = vec![q(0); n];
                c[x] += q(1);
                c[y] += q(1);
                c[z] -= q(1);
                rows.push(Row { coeffs: c, eq: true, rhs: q(0) });
            }
        }
    }
    rows
}

pub fn fm_has_state(e: &EffectAlgebra) -> bool {
    fm_feasible(e.size(), &state_rows(e))
}

/// Upper bounds of `{x, y}` computed from sums alone.
fn naive_leq(e: &EffectAlgebra, x: Element, y: Element) -> bool {
    e.elements().any(|z| e.sum(x, z) == Some(y))
}

pub fn naive_join(e: &EffectAlgebra, x: Element, y: Element) -> Option<Element> {
    let ub: Vec<Element> = e.elements().filter(|&u| naive_leq(e, x, u) && naive_leq(e, y, u)).collect();
    ub.iter().copied().find(|&u| ub.iter().all(|&v| naive_leq(e, u, v)))
}

pub fn naive_meet(e: &EffectAlgebra, x: Element, y: Element) -> Option<Element> {
    let lb: Vec<Element> = e.elements().filter(|&l| naive_leq(e, l, x) && naive_leq(e, l, y)).collect();
    lb.iter().copied().find(|&l| lb.iter().all(|&v| naive_leq(e, v, l)))
}

/// Direct check of the state conditions, optionally with subadditivity and
/// the modular-measure identity.
pub fn is_state(e: &EffectAlgebra, w: &[Q], subadditive: bool, modular_measure: bool) -> bool {
    if w.len() != e.size() || !w[e.zero()].is_zero() || !w[e.one()].is_one() {
        return false;
    }
    if w.iter().any(|v| v.is_negative() || *v > q(1)) {
        return false;
    }
    for x in e.elements() {
        for y in e.elements() {
            if let Some(z) = e.sum(x, y) {
                if &w[x] + &w[y] != w[z] {
                    return false;
                }
            }
            if subadditive || modular_measure {
                let (Some(j), Some(m)) = (naive_join(e, x, y), naive_meet(e, x, y)) else {
                    return false;
                };
                if subadditive && w[j] > &w[x] + &w[y] {
                    return false;
                }
                if modular_measure && &w[x] + &w[y] != &w[j] + &w[m] {
                    return false;
                }
            }
        }
    }
    true
}

/// The stateless nine-element algebra found by the exhaustive search, in
/// index layout (0 first, 1 last).
pub const STATELESS_9: &[(usize, usize, usize)] = &[
    (1, 1, 5),
    (1, 2, 7),
    (1, 3, 6),
    (1, 5, 8),
    (2, 2, 6),
    (2, 3, 5),
    (2, 6, 8),
    (3, 3, 4),
    (3, 4, 7),
    (3, 7, 8),
    (4, 4, 8),
];

pub fn stateless_9() -> EffectAlgebra {
    let mut t = SumTable::new(9, 0, 8).unwrap();
    t.fill_zero_row();
    for &(x, y, z) in STATELESS_9 {
        t.set_symmetric(x, y, Some(z));
    }
    EffectAlgebra::new(t).unwrap()
}
