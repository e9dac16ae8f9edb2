//! Isomorph-free enumeration of finite effect algebras.
//!
//! An effect algebra is the same thing as a difference poset: a bounded
//! poset with a partial subtraction `c ⊖ a` (defined iff `a ≤ c`) such that
//! `c ⊖ ·` is an antitone involution of `[0, c]` and
//! `(c ⊖ a) ⊖ (c ⊖ b) = b ⊖ a` whenever `a ≤ b ≤ c`. The search runs over the
//! bounded posets of the requested size, one per isomorphism class, and for
//! each poset assigns the subtractions bottom-up. Two algebras on the same
//! labelled poset are isomorphic iff a poset automorphism maps one onto the
//! other, so a solution is kept only when its table is the smallest among its
//! images under the automorphism group.

use std::cmp::Ordering;
use std::ops::ControlFlow;
use std::sync::atomic::{AtomicU64, Ordering as AtomicOrdering};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{EffectAlgebra, SumTable};
use crate::poset::{posets, Poset, MAX_POINTS};
use crate::states;
use crate::structure;

/// Largest algebra size the enumerator accepts.
pub const MAX_SIZE: usize = MAX_POINTS + 2;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Filters {
    pub lattice_only: bool,
    pub modular_only: bool,
    /// Keep only algebras with an unsharp element, i.e. `S(E) ≠ E`.
    pub unsharp_only: bool,
}

impl Filters {
    fn needs_lattice(&self) -> bool {
        self.lattice_only || self.modular_only
    }

    pub fn accepts(&self, e: &EffectAlgebra) -> bool {
        if self.needs_lattice() && !e.is_lattice() {
            return false;
        }
        if self.modular_only && !structure::is_modular(e).is_ok_and(|f| f.holds) {
            return false;
        }
        if self.unsharp_only && e.elements().all(|x| structure::is_sharp(e, x) == Some(true)) {
            return false;
        }
        true
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    /// Search nodes (partial difference assignments) across all workers.
    pub max_nodes: u64,
    pub time_limit: Duration,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_nodes: u64::MAX, time_limit: Duration::from_secs(24 * 3600) }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnumerationConfig {
    pub size: usize,
    pub filters: Filters,
    pub budget: Budget,
    /// Worker threads; 0 uses the global pool.
    pub jobs: usize,
}

impl EnumerationConfig {
    pub fn new(size: usize) -> Self {
        EnumerationConfig { size, filters: Filters::default(), budget: Budget::default(), jobs: 0 }
    }

    pub fn with_filters(mut self, filters: Filters) -> Self {
        self.filters = filters;
        self
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    fn check(&self) -> Result<(), EnumerateError> {
        if self.size < 2 || self.size > MAX_SIZE {
            return Err(EnumerateError::InvalidConfig(format!(
                "size must be in 2..={MAX_SIZE}, got {}",
                self.size
            )));
        }
        if self.budget.max_nodes == 0 || self.budget.time_limit.is_zero() {
            return Err(EnumerateError::InvalidConfig("budgets must be positive".into()));
        }
        Ok(())
    }
}

/// Resumable position in an enumeration of one size.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub size: usize,
    pub filters: Filters,
    /// Index of the first poset class not yet processed.
    pub next_poset: usize,
    pub total_posets: usize,
    pub emitted: u64,
    pub nodes: u64,
    /// Sizes already fully scanned (used by the stateless search).
    #[serde(default)]
    pub cleared_sizes: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BudgetKind {
    Nodes,
    Time,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnumerateError {
    #[error("invalid enumeration config: {0}")]
    InvalidConfig(String),
    #[error("{kind:?} budget exhausted at poset {} of {}", checkpoint.next_poset, checkpoint.total_posets)]
    BudgetExceeded { kind: BudgetKind, checkpoint: Checkpoint },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub emitted: u64,
    pub nodes: u64,
    /// The sink asked to stop before the enumeration finished.
    pub stopped: bool,
}

/// Drives the enumeration for `config.size`, mapping each algebra in
/// parallel and feeding results to `sink` in canonical order.
pub fn run<T, M, S>(
    config: &EnumerationConfig,
    resume: Option<&Checkpoint>,
    map: M,
    sink: S,
) -> Result<RunSummary, EnumerateError>
where
    T: Send,
    M: Fn(EffectAlgebra) -> T + Sync,
    S: FnMut(T) -> ControlFlow<()>,
{
    config.check()?;
    if let Some(cp) = resume {
        if cp.version != CHECKPOINT_VERSION || cp.size != config.size || cp.filters != config.filters {
            return Err(EnumerateError::InvalidConfig("checkpoint does not match the config".into()));
        }
    }
    let pool = match config.jobs {
        0 => None,
        jobs => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| EnumerateError::InvalidConfig(e.to_string()))?,
        ),
    };
    run_inner(config, resume, pool.as_ref(), &map, sink)
}

fn run_inner<T, M, S>(
    config: &EnumerationConfig,
    resume: Option<&Checkpoint>,
    pool: Option<&rayon::ThreadPool>,
    map: &M,
    mut sink: S,
) -> Result<RunSummary, EnumerateError>
where
    T: Send,
    M: Fn(EffectAlgebra) -> T + Sync,
    S: FnMut(T) -> ControlFlow<()>,
{
    let started = Instant::now();
    let classes = posets(config.size - 2);
    let nodes = AtomicU64::new(resume.map_or(0, |c| c.nodes));
    let mut emitted = resume.map_or(0, |c| c.emitted);
    let mut next = resume.map_or(0, |c| c.next_poset);
    let threads = pool.map_or_else(rayon::current_num_threads, |p| p.current_num_threads());
    let chunk = threads.max(1) * 4;
    while next < classes.len() {
        let end = (next + chunk).min(classes.len());
        let work = || -> Vec<Vec<T>> {
            classes[next..end]
                .par_iter()
                .map(|p| algebras_on(p, &config.filters, &nodes).into_iter().map(map).collect())
                .collect()
        };
        let batch = match pool {
            Some(p) => p.install(work),
            None => work(),
        };
        for item in batch.into_iter().flatten() {
            emitted += 1;
            if sink(item).is_break() {
                return Ok(RunSummary { emitted, nodes: nodes.into_inner(), stopped: true });
            }
        }
        next = end;
        let spent = nodes.load(AtomicOrdering::Relaxed);
        let kind = if spent >= config.budget.max_nodes {
            Some(BudgetKind::Nodes)
        } else if started.elapsed() >= config.budget.time_limit {
            Some(BudgetKind::Time)
        } else {
            None
        };
        if let (Some(kind), true) = (kind, next < classes.len()) {
            return Err(EnumerateError::BudgetExceeded {
                kind,
                checkpoint: Checkpoint {
                    version: CHECKPOINT_VERSION,
                    size: config.size,
                    filters: config.filters,
                    next_poset: next,
                    total_posets: classes.len(),
                    emitted,
                    nodes: spent,
                    cleared_sizes: Vec::new(),
                },
            });
        }
    }
    Ok(RunSummary { emitted, nodes: nodes.into_inner(), stopped: false })
}

/// Every isomorphism class of the configured size passing the filters.
pub fn enumerate(config: &EnumerationConfig) -> Result<Vec<EffectAlgebra>, EnumerateError> {
    let mut out = Vec::new();
    run(config, None, |e| e, |e| {
        out.push(e);
        ControlFlow::Continue(())
    })?;
    Ok(out)
}

/// Number of isomorphism classes of the configured size.
pub fn count(config: &EnumerationConfig) -> Result<u64, EnumerateError> {
    Ok(run(config, None, |_| (), |_| ControlFlow::Continue(()))?.emitted)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ForAllOutcome {
    Holds { checked: u64 },
    Counterexample(EffectAlgebra),
}

/// Applies `predicate` to every class of every size `2..=config.size`;
/// returns the first failure in canonical order.
pub fn for_all<P>(config: &EnumerationConfig, predicate: P) -> Result<ForAllOutcome, EnumerateError>
where
    P: Fn(&EffectAlgebra) -> bool + Sync,
{
    let mut checked = 0;
    for size in 2..=config.size {
        let sized = EnumerationConfig { size, ..config.clone() };
        let mut failure = None;
        run(&sized, None, |e| (predicate(&e), e), |(ok, e)| {
            checked += 1;
            if ok {
                ControlFlow::Continue(())
            } else {
                failure = Some(e);
                ControlFlow::Break(())
            }
        })?;
        if let Some(e) = failure {
            return Ok(ForAllOutcome::Counterexample(e));
        }
    }
    Ok(ForAllOutcome::Holds { checked })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StatelessSearch {
    Found(EffectAlgebra),
    /// Every class of every listed size admits a state.
    NoneFound { cleared_sizes: Vec<usize> },
}

/// Scans sizes `2..=max_size` for the first algebra without a state.
///
/// On budget exhaustion the returned checkpoint lists the sizes already
/// cleared; pass it back as `resume` to continue.
pub fn find_stateless(
    max_size: usize,
    budget: Budget,
    jobs: usize,
    resume: Option<&Checkpoint>,
) -> Result<StatelessSearch, EnumerateError> {
    let started = Instant::now();
    let mut cleared: Vec<usize> = resume.map(|c| c.cleared_sizes.clone()).unwrap_or_default();
    let first = resume.map_or(2, |c| c.size);
    for size in first..=max_size {
        if cleared.contains(&size) {
            continue;
        }
        let remaining = budget.time_limit.saturating_sub(started.elapsed());
        let config = EnumerationConfig {
            size,
            filters: Filters::default(),
            budget: Budget { max_nodes: budget.max_nodes, time_limit: remaining.max(Duration::from_millis(1)) },
            jobs,
        };
        let resume_here = resume.filter(|c| c.size == size);
        let mut found = None;
        let outcome = run(
            &config,
            resume_here,
            |e| (states::find_state(&e).is_infeasible(), e),
            |(stateless, e)| {
                if stateless {
                    found = Some(e);
                    ControlFlow::Break(())
                } else {
                    ControlFlow::Continue(())
                }
            },
        );
        match outcome {
            Ok(_) => {}
            Err(EnumerateError::BudgetExceeded { kind, mut checkpoint }) => {
                checkpoint.cleared_sizes = cleared.clone();
                return Err(EnumerateError::BudgetExceeded { kind, checkpoint });
            }
            Err(e) => return Err(e),
        }
        if let Some(e) = found {
            return Ok(StatelessSearch::Found(e));
        }
        cleared.push(size);
    }
    Ok(StatelessSearch::NoneFound { cleared_sizes: cleared })
}

/// All effect algebras whose induced order is `p` with 0 and 1 adjoined, one
/// per isomorphism class, in search order.
///
/// Layout: 0 is index 0, point `i` of `p` is index `i + 1`, 1 is the last index.
pub fn algebras_on(p: &Poset, filters: &Filters, nodes: &AtomicU64) -> Vec<EffectAlgebra> {
    if filters.needs_lattice() && !p.bounded_is_lattice() {
        return Vec::new();
    }
    let mut search = DifferenceSearch::new(p);
    let automorphisms: Vec<Vec<usize>> = p
        .automorphisms()
        .into_iter()
        .filter(|g| g.iter().enumerate().any(|(i, &j)| i != j))
        .collect();
    let mut out = Vec::new();
    search.run(&mut |table: SumTable| {
        if !is_smallest_image(&table, &automorphisms) {
            return;
        }
        let e = EffectAlgebra::new(table).expect("difference posets are effect algebras");
        debug_assert!(search_order_matches(p, &e));
        if filters.accepts(&e) {
            out.push(e);
        }
    });
    nodes.fetch_add(search.nodes, AtomicOrdering::Relaxed);
    out
}

fn search_order_matches(p: &Poset, e: &EffectAlgebra) -> bool {
    let m = p.len();
    (0..m).all(|x| (0..m).all(|y| (x == y || p.lt(x, y)) == e.leq(x + 1, y + 1)))
}

/// Whether no automorphism maps the table to a lexicographically smaller one.
fn is_smallest_image(t: &SumTable, automorphisms: &[Vec<usize>]) -> bool {
    let n = t.size();
    let code = |z: Option<usize>| z.map_or(0, |v| v + 1);
    automorphisms.iter().all(|g| {
        // g[new inner] = old inner; build old → new and its inverse on full indices
        let mut to_new = vec![0; n];
        to_new[n - 1] = n - 1;
        let mut to_old = to_new.clone();
        for (new, &old) in g.iter().enumerate() {
            to_new[old + 1] = new + 1;
            to_old[new + 1] = old + 1;
        }
        for nx in 0..n {
            for ny in 0..n {
                let image = code(t.get(to_old[nx], to_old[ny]).map(|z| to_new[z]));
                match image.cmp(&code(t.get(nx, ny))) {
                    Ordering::Less => return false,
                    Ordering::Greater => return true,
                    Ordering::Equal => {}
                }
            }
        }
        true
    })
}

/// Backtracking assignment of `c ⊖ x` for every `x ≤ c`.
struct DifferenceSearch {
    n: usize,
    leq: Vec<bool>,
    /// `delta[c * n + x] = c ⊖ x`.
    delta: Vec<Option<usize>>,
    /// Elements in processing order, each with its open interval `(0, c)`.
    schedule: Vec<(usize, Vec<usize>)>,
    nodes: u64,
}

impl DifferenceSearch {
    fn new(p: &Poset) -> Self {
        let m = p.len();
        let n = m + 2;
        let top = n - 1;
        let mut leq = vec![false; n * n];
        for x in 0..n {
            leq[x * n + x] = true;
            leq[x] = true;
            leq[x * n + top] = true;
        }
        for x in 0..m {
            for y in 0..m {
                if p.lt(x, y) {
                    leq[(x + 1) * n + y + 1] = true;
                }
            }
        }
        let mut delta = vec![None; n * n];
        for c in 0..n {
            delta[c * n] = Some(c);
            delta[c * n + c] = Some(0);
        }
        let mut schedule: Vec<(usize, Vec<usize>)> = p
            .linear_extension()
            .into_iter()
            .map(|x| {
                let c = x + 1;
                let open = (1..top).filter(|&y| y != c && leq[y * n + c]).collect();
                (c, open)
            })
            .collect();
        schedule.push((top, (1..top).collect()));
        DifferenceSearch { n, leq, delta, schedule, nodes: 0 }
    }

    fn run(&mut self, emit: &mut dyn FnMut(SumTable)) {
        self.element(0, emit);
    }

    fn element(&mut self, k: usize, emit: &mut dyn FnMut(SumTable)) {
        if k == self.schedule.len() {
            emit(self.table());
            return;
        }
        self.pair_up(k, emit);
    }

    fn pair_up(&mut self, k: usize, emit: &mut dyn FnMut(SumTable)) {
        self.nodes += 1;
        let n = self.n;
        let c = self.schedule[k].0;
        let Some(x) = self.schedule[k].1.iter().copied().find(|&x| self.delta[c * n + x].is_none())
        else {
            self.element(k + 1, emit);
            return;
        };
        let open = self.schedule[k].1.clone();
        for y in open {
            if self.delta[c * n + y].is_some() {
                continue;
            }
            self.delta[c * n + x] = Some(y);
            self.delta[c * n + y] = Some(x);
            if self.consistent(k, x) && (x == y || self.consistent(k, y)) {
                self.pair_up(k, emit);
            }
            self.delta[c * n + x] = None;
            self.delta[c * n + y] = None;
        }
    }

    /// Checks antitonicity and the subtraction identity between the freshly
    /// assigned point `p` and every assigned point of the same interval.
    fn consistent(&self, k: usize, p: usize) -> bool {
        let n = self.n;
        let (c, open) = (&self.schedule[k].0, &self.schedule[k].1);
        let d = |r: usize| self.delta[c * n + r];
        let dp = d(p).expect("assigned");
        for &r in open {
            let Some(dr) = d(r) else { continue };
            if self.leq[p * n + r] && !self.leq[dr * n + dp] {
                return false;
            }
            if self.leq[r * n + p] && !self.leq[dp * n + dr] {
                return false;
            }
            // (c ⊖ a) ⊖ (c ⊖ b) = b ⊖ a for a < b < c
            let (a, b, da, db) = if r != p && self.leq[p * n + r] {
                (p, r, dp, dr)
            } else if r != p && self.leq[r * n + p] {
                (r, p, dr, dp)
            } else {
                continue;
            };
            if self.delta[da * n + db] != self.delta[b * n + a] {
                return false;
            }
        }
        true
    }

    /// `a ⊕ b` is defined iff `a ≤ b'`, and then equals `(b' ⊖ a)'`.
    fn table(&self) -> SumTable {
        let n = self.n;
        let top = n - 1;
        let ortho = |x: usize| self.delta[top * n + x].expect("complete");
        let mut t = SumTable::new(n, 0, top).expect("n >= 2");
        for a in 0..n {
            for b in 0..n {
                let bc = ortho(b);
                if self.leq[a * n + bc] {
                    let diff = self.delta[bc * n + a].expect("a ≤ b'");
                    t.set(a, b, Some(ortho(diff)));
                }
            }
        }
        t
    }
}
