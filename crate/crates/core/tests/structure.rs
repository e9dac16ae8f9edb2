mod common;

use effectlab::construct::{boolean_algebra, interval, product};
use effectlab::enumerate::{self, EnumerationConfig};
use effectlab::structure::{self, ElementSubset};
use effectlab::{EffectAlgebra, Element};

use common::*;

fn corpus() -> Vec<EffectAlgebra> {
    let mut all: Vec<EffectAlgebra> =
        (2..=7).flat_map(|n| enumerate::enumerate(&EnumerationConfig::new(n)).unwrap()).collect();
    all.extend([e5(), hs2(), b2_times_c3()]);
    all
}

fn leq(e: &EffectAlgebra, x: Element, y: Element) -> bool {
    e.elements().any(|z| e.sum(x, z) == Some(y))
}

/// Mackey compatibility straight from the definition.
fn mackey(e: &EffectAlgebra, x: Element, y: Element) -> bool {
    e.elements().any(|d| {
        e.elements().any(|x1| {
            e.sum(x1, d) == Some(x)
                && e.elements().any(|y1| e.sum(y1, d) == Some(y) && e.oplus_sum(&[x1, y1, d]).is_ok())
        })
    })
}

#[test]
fn order_and_bounds_match_definitions() {
    for e in corpus() {
        for x in e.elements() {
            for y in e.elements() {
                assert_eq!(e.leq(x, y), leq(&e, x, y));
                assert_eq!(e.join(x, y), naive_join(&e, x, y));
                assert_eq!(e.meet(x, y), naive_meet(&e, x, y));
            }
        }
        let atoms: Vec<Element> = e
            .elements()
            .filter(|&a| a != e.zero() && e.elements().all(|y| y == e.zero() || y == a || !leq(&e, y, a)))
            .collect();
        assert_eq!(e.atoms(), atoms.as_slice());
        assert_eq!(structure::finite_elements(&e).len(), e.size());
    }
}

#[test]
fn compatibility_matches_mackey_definition() {
    for e in corpus().into_iter().filter(|e| e.size() <= 6) {
        for x in e.elements() {
            for y in e.elements() {
                assert_eq!(structure::compatible(&e, x, y), mackey(&e, x, y), "{x} {y} in {:?}", e.table());
            }
        }
    }
}

#[test]
fn sharp_elements_match_definition() {
    for e in corpus().into_iter().filter(|e| e.is_lattice()) {
        let direct: Vec<Element> =
            e.elements().filter(|&x| naive_meet(&e, x, e.orthosupplement(x)) == Some(e.zero())).collect();
        assert_eq!(structure::sharp_elements(&e).unwrap().to_vec(), direct);
    }
}

#[test]
fn blocks_are_maximal_compatible_sets() {
    for e in corpus().into_iter().filter(|e| e.is_lattice()) {
        let blocks = structure::blocks(&e).unwrap();
        let mut covered = ElementSubset::empty(e.size());
        for b in &blocks {
            for x in b.iter() {
                covered.insert(x);
                for y in b.iter() {
                    assert!(structure::compatible(&e, x, y));
                }
            }
            for z in e.elements().filter(|&z| !b.contains(z)) {
                assert!(b.iter().any(|x| !structure::compatible(&e, x, z)));
            }
        }
        assert_eq!(covered.len(), e.size());
    }
}

#[test]
fn e5_and_hs2_structure() {
    let e = e5();
    let blocks: Vec<Vec<Element>> = structure::blocks(&e).unwrap().iter().map(ElementSubset::to_vec).collect();
    assert_eq!(blocks, vec![vec![0, 1, 2, 4], vec![0, 3, 4]]);
    assert_eq!(structure::compatibility_center(&e).unwrap().to_vec(), vec![0, 4]);
    assert_eq!(structure::center(&e).unwrap().to_vec(), vec![0, 4]);
    let c = structure::classify(&e);
    assert!(c.is_modular.holds && !c.is_orthomodular_lattice.holds && c.is_sharply_dominating.holds);

    let h = hs2();
    assert_eq!(structure::blocks(&h).unwrap().len(), 2);
    assert_eq!(structure::sharp_elements(&h).unwrap().len(), 6);
    assert!(structure::classify(&h).is_orthomodular_lattice.holds);
    assert!(!structure::classify(&h).is_distributive.holds);
}

#[test]
fn products_and_intervals() {
    let p = product(&[b2(), c3()]).unwrap();
    assert_eq!(p.size(), 12);
    assert_eq!(structure::center(&p).unwrap().len(), 8);
    assert!(structure::classify(&p).is_mv_effect_algebra.holds);
    let b3 = boolean_algebra(3).unwrap();
    let atom = b3.atoms()[0];
    let top = b3.orthosupplement(atom);
    let i = interval(&b3, b3.zero(), top).unwrap();
    assert!(naive_isomorphic(i.table(), b2().table()));
    for e in corpus() {
        for x in e.elements().filter(|&x| x != e.zero()) {
            let down = interval(&e, e.zero(), x).unwrap();
            assert_eq!(down.size(), e.elements().filter(|&y| leq(&e, y, x)).count());
            assert!(down.table().validate().is_valid());
        }
    }
}

#[test]
fn central_elements_split_the_algebra() {
    for e in corpus().into_iter().filter(|e| e.is_lattice()) {
        for c in structure::center(&e).unwrap().iter().filter(|&c| c != e.zero() && c != e.one()) {
            let lo = interval(&e, e.zero(), c).unwrap();
            let hi = interval(&e, e.zero(), e.orthosupplement(c)).unwrap();
            let prod = product(&[lo, hi]).unwrap();
            assert!(naive_isomorphic(prod.table(), e.table()), "c = {c} in {:?}", e.table());
        }
    }
}
