//! Acceptance criteria, one line each. Run with
//! `cargo test -p effectlab --test acceptance`.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use effectlab::enumerate::{self, EnumerationConfig, Filters};
use effectlab::lp::{self, rational, Optimum};
use effectlab::states::{self, StateOutcome, SystemKind};
use effectlab::structure::{self, ElementSubset};
use effectlab::theorems;
use effectlab::{Axiom, EffectAlgebra, SumTable};
use serde_json::json;

use common::*;

type Verdict = Result<String, String>;

fn all_upto(n: usize, filters: Filters) -> Vec<EffectAlgebra> {
    (2..=n)
        .flat_map(|k| enumerate::enumerate(&EnumerationConfig::new(k).with_filters(filters)).unwrap())
        .collect()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn mutate(base: &EffectAlgebra, edits: &[(usize, usize, Option<usize>)], symmetric: bool) -> SumTable {
    let mut t = base.table().clone();
    for &(x, y, v) in edits {
        if symmetric {
            t.set_symmetric(x, y, v);
        } else {
            t.set(x, y, v);
        }
    }
    t
}

fn axiom_gate() -> Verdict {
    for (name, e) in [("B2", b2()), ("C3", c3()), ("C4", c4()), ("E5", e5()), ("HS2", hs2())] {
        ensure(e.table().validate().is_valid(), || format!("{name} rejected"))?;
    }
    let e = e5();
    let (a, a2, b, one) = (1, 2, 3, 4);
    let mut distinct = SumTable::new(3, 0, 0).unwrap();
    distinct.fill_zero_row();
    let mutations = [
        ("one-sided a ⊕ b", mutate(&e, &[(a, b, Some(one))], false), Axiom::Commutativity),
        ("a ⊕ b = a'", mutate(&e, &[(a, b, Some(a2))], true), Axiom::Associativity),
        ("a ⊕ b = 1", mutate(&e, &[(a, b, Some(one))], true), Axiom::Orthosupplement),
        ("1 ⊕ a = 1", mutate(&e, &[(one, a, Some(one))], true), Axiom::ZeroOne),
        ("0 = 1", distinct, Axiom::DistinctBounds),
    ];
    for (name, t, axiom) in &mutations {
        let r = t.validate();
        ensure(r.violates(*axiom), || format!("{name}: expected {axiom}, got {:?}", r.axioms()))?;
    }
    let ragged = SumTable::from_rows(0, 1, &[vec![Some(0), Some(1)], vec![Some(1)]]);
    ensure(ragged.is_err(), || "ragged table accepted".into())?;
    Ok(format!("5 accepted, {} mutations rejected", mutations.len() + 1))
}

fn e5_sharp_elements() -> Verdict {
    let e = e5();
    let sharp = structure::sharp_elements(&e).map_err(|err| err.to_string())?;
    ensure(sharp.to_vec() == vec![0, 1, 2, 4], || format!("S(E) = {:?}", sharp.to_vec()))?;
    ensure(e.sum(3, 3) == Some(4), || "2b ≠ 1".into())?;
    let atoms_of_s: Vec<usize> =
        sharp.iter().filter(|&x| x != 0 && !sharp.iter().any(|y| y != 0 && y != x && e.leq(y, x))).collect();
    ensure(!atoms_of_s.contains(&4), || "1 is an atom of S(E)".into())?;
    ensure(atoms_of_s == vec![1, 2], || format!("atoms of S(E) = {atoms_of_s:?}"))?;
    Ok("S(E) = {0, a, a', 1}; 2b = 1 is not an atom of S(E)".into())
}

fn center_identity() -> Verdict {
    let lattices = all_upto(6, Filters { lattice_only: true, ..Filters::default() });
    for e in &lattices {
        let b = structure::compatibility_center(e).unwrap();
        let s = structure::sharp_elements(e).unwrap();
        let c = structure::center(e).unwrap();
        ensure(c == b.intersection(&s), || format!("C ≠ B ∩ S on {:?}", e.table()))?;
        let direct = ElementSubset::from_elements(
            e.size(),
            e.elements().filter(|&x| {
                e.elements().all(|y| {
                    let (Some(m1), Some(m2)) = (naive_meet(e, y, x), naive_meet(e, y, e.orthosupplement(x))) else {
                        return false;
                    };
                    naive_join(e, m1, m2) == Some(y)
                })
            }),
        );
        ensure(c == direct, || format!("center disagrees with its definition on {:?}", e.table()))?;
    }
    Ok(format!("{} lattices", lattices.len()))
}

fn state_floor() -> Verdict {
    let all = all_upto(8, Filters::default());
    for e in &all {
        let w = states::find_state(e).into_state().ok_or_else(|| format!("no state on {:?}", e.table()))?;
        ensure(is_state(e, w.values(), false, false), || "solver state fails the oracle".into())?;
    }
    let fixture = stateless_9();
    let StateOutcome::Infeasible(inf) = states::find_state(&fixture) else {
        return Err("nine-element fixture has a state".into());
    };
    ensure(inf.verify(), || "certificate does not verify".into())?;
    ensure(!fm_has_state(&fixture), || "Fourier-Motzkin finds a state on the fixture".into())?;
    let enumerate::StatelessSearch::Found(found) =
        enumerate::find_stateless(9, enumerate::Budget::default(), 0, None).map_err(|e| e.to_string())?
    else {
        return Err("no stateless instance at n = 9".into());
    };
    ensure(naive_isomorphic(found.table(), fixture.table()), || "search and fixture differ".into())?;
    Ok(format!("{} instances with n ≤ 8 have states; n = 9 fixture infeasible", all.len()))
}

fn subadditive_states() -> Result<(String, String), String> {
    let filters = Filters { lattice_only: true, modular_only: true, unsharp_only: true };
    let all = all_upto(7, filters);
    let mut measured = 0;
    for e in &all {
        let outcome = states::find_subadditive_state(e).map_err(|err| err.to_string())?;
        let w = outcome.into_state().ok_or_else(|| format!("no subadditive state on {:?}", e.table()))?;
        ensure(is_state(e, w.values(), true, false), || "subadditive state fails the oracle".into())?;
        ensure(is_state(e, w.values(), false, true), || format!("modular measure fails on {:?}", e.table()))?;
        measured += 1;
    }
    Ok((format!("{} modular unsharp lattices", all.len()), format!("{measured} states")))
}

fn exstate_agreement() -> Verdict {
    let half = rational(1, 2);
    for (name, e) in [("E5", e5()), ("C4", c4())] {
        let (w, _) = states::state_via_exstate_procedure(&e).map_err(|err| format!("{name}: {err}"))?;
        ensure(states::verify_state(&e, &w, true).is_clean(), || format!("{name}: verify_state"))?;
        ensure(is_state(&e, w.values(), true, false), || format!("{name}: oracle"))?;
    }
    let e = e5();
    let (w, _) = states::state_via_exstate_procedure(&e).unwrap();
    ensure([1, 2, 3].iter().all(|&x| *w.value(x) == half), || "E5 state is not 1/2".into())?;
    let solver = states::find_subadditive_state(&e).unwrap().into_state().unwrap();
    ensure(solver == w, || "solver and procedure differ".into())?;
    let system = states::state_system(&e, SystemKind::Subadditive).unwrap();
    for x in [1, 2, 3] {
        for sign in [1, -1] {
            let Optimum::Optimal { value, .. } = lp::maximize(&system, &[(x, rational(sign, 1))]) else {
                return Err("subadditive system unbounded or infeasible".into());
            };
            ensure(value == &half * rational(sign, 1), || format!("ω({}) not forced", e.label(x)))?;
        }
    }
    Ok("E5 (1/2, 1/2, 1/2) unique; C4 verified".into())
}

fn hat_formula() -> Verdict {
    let lattices = all_upto(6, Filters { lattice_only: true, modular_only: true, ..Filters::default() });
    let mut checked = 0;
    for e in lattices.iter().filter(|e| structure::classify(e).is_atomic.holds) {
        for x in structure::finite_elements(e).iter() {
            let formula = structure::sharp_hat_formula(e, x).map_err(|err| err.to_string())?;
            let smallest = structure::smallest_sharp_over(e, x).map_err(|err| err.to_string())?;
            ensure(formula == smallest, || format!("x = {x} on {:?}", e.table()))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} elements"))
}

fn distributivity() -> Verdict {
    let mut instances = all_upto(6, Filters::default());
    instances.extend([e5(), hs2(), b2_times_c3()]);
    let mut cases = 0;
    for e in &instances {
        for id in ["xdist", "distlaw"] {
            let r = theorems::check(e, id).unwrap();
            ensure(!r.failed() && r.error.is_none(), || format!("{id} fails on {:?}", e.table()))?;
            cases += r.cases;
        }
    }
    for e in [e5(), hs2(), b2_times_c3()] {
        let r = theorems::check(&e, "xdist").unwrap();
        ensure(r.cases >= theorems::RANDOM_FAMILIES as u64, || "random families missing".into())?;
    }
    Ok(format!("{} instances, {cases} cases", instances.len()))
}

fn dichotomy() -> Verdict {
    let r = theorems::sweep(&EnumerationConfig::new(7), "exstate.dichotomy").map_err(|e| e.to_string())?;
    ensure(r.holds(), || format!("counterexample: {:?}", r.counterexample))?;
    ensure(r.hypotheses_met > 0, || "hypotheses never met".into())?;
    Ok(format!("{} instances, {} with hypotheses met", r.instances, r.hypotheses_met))
}

fn naive_counts() -> Verdict {
    let mut counts = Vec::new();
    for n in 2..=5 {
        let naive = naive_classes(n).len() as u64;
        let fast = enumerate::count(&EnumerationConfig::new(n)).unwrap();
        ensure(naive == fast, || format!("n = {n}: naive {naive}, enumerator {fast}"))?;
        counts.push(fast);
    }
    ensure(counts == [1, 1, 3, 4], || format!("{counts:?}"))?;
    Ok(format!("{counts:?}"))
}

fn report(jobs: usize) -> String {
    let mut records = Vec::new();
    for n in 2..=7 {
        let mut config = EnumerationConfig::new(n);
        config.jobs = jobs;
        for e in enumerate::enumerate(&config).unwrap() {
            records.push(json!({
                "table": e.table(),
                "state": states::find_state(&e).state(),
                "claims": theorems::check_all(&e),
            }));
        }
    }
    serde_json::to_string(&records).unwrap()
}

fn determinism() -> Verdict {
    let (a, b) = (report(1), report(0));
    ensure(a == b, || "reports differ".into())?;
    Ok(format!("{} bytes identical", a.len()))
}

fn main() -> ExitCode {
    let mut failures = 0;
    let mut line = |id: u32, name: &str, target: Duration, verdict: Verdict, elapsed: Duration| {
        let (status, detail) = match verdict {
            Ok(d) if elapsed <= target => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {target:?} target")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} {id:>2} {name}: {detail} [{:.2?} / {target:?}]", elapsed);
    };
    let timed = |f: fn() -> Verdict| {
        let t = Instant::now();
        let v = f();
        (v, t.elapsed())
    };
    let secs = Duration::from_secs;

    let (v, t) = timed(axiom_gate);
    line(1, "axiom gate", secs(1), v, t);
    let (v, t) = timed(e5_sharp_elements);
    line(2, "E5 sharp elements", secs(1), v, t);
    let (v, t) = timed(center_identity);
    line(3, "center identity n ≤ 6", secs(60), v, t);
    let (v, t) = timed(state_floor);
    line(4, "state existence n ≤ 8, stateless n = 9", secs(600), v, t);
    let start = Instant::now();
    let sub = subadditive_states();
    let t = start.elapsed();
    let (v5, v6) = match sub {
        Ok((a, b)) => (Ok(a), Ok(b)),
        Err(e) => (Err(e.clone()), Err(e)),
    };
    line(5, "subadditive states n ≤ 7", secs(300), v5, t);
    line(6, "modular measure", secs(300), v6, t);
    let (v, t) = timed(exstate_agreement);
    line(7, "exstate procedure vs solver", secs(1), v, t);
    let (v, t) = timed(hat_formula);
    line(8, "hat formula n ≤ 6", secs(60), v, t);
    let (v, t) = timed(distributivity);
    line(9, "distributive laws", secs(120), v, t);
    let (v, t) = timed(dichotomy);
    line(10, "dichotomy n ≤ 7", secs(300), v, t);
    let (v, t) = timed(naive_counts);
    line(11, "enumerator vs naive oracle n ≤ 5", secs(60), v, t);
    let (v, t) = timed(determinism);
    line(12, "byte-identical reports", secs(600), v, t);

    if failures == 0 {
        println!("acceptance: all 12 criteria pass");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criterion line(s) failed");
        ExitCode::FAILURE
    }
}
