//! Exact linear feasibility and optimisation over nonnegative variables.
//!
//! A two-phase tableau simplex over `BigRational` with Bland's rule. An
//! infeasible system comes with a Farkas certificate that can be checked by
//! plain arithmetic through [`check_certificate`].

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `"num/den"` with the denominator always present.
pub fn fraction_string(q: &Rational) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

pub fn parse_fraction(s: &str) -> Option<Rational> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim().parse::<BigInt>().ok()?, d.trim().parse::<BigInt>().ok()?),
        None => (s.trim().parse::<BigInt>().ok()?, BigInt::one()),
    };
    (!d.is_zero()).then(|| BigRational::new(n, d))
}

pub(crate) fn serialize_fractions<S: Serializer>(values: &[Rational], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(values.iter().map(fraction_string))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Eq,
    Le,
}

/// `Σ coeffs[j]·x_j (= or ≤) rhs`, sparse and sorted by variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Constraint {
    #[serde(serialize_with = "serialize_terms")]
    pub terms: Vec<(usize, Rational)>,
    pub relation: Relation,
    #[serde(serialize_with = "serialize_fraction")]
    pub rhs: Rational,
}

fn serialize_terms<S: Serializer>(terms: &[(usize, Rational)], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(terms.iter().map(|(j, q)| (j, fraction_string(q))))
}

fn serialize_fraction<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&fraction_string(q))
}

impl Constraint {
    /// Merges repeated variables and drops zero coefficients.
    pub fn new(terms: impl IntoIterator<Item = (usize, Rational)>, relation: Relation, rhs: Rational) -> Self {
        let mut merged: BTreeMap<usize, Rational> = BTreeMap::new();
        for (j, q) in terms {
            *merged.entry(j).or_insert_with(Rational::zero) += q;
        }
        let terms = merged.into_iter().filter(|(_, q)| !q.is_zero()).collect();
        Constraint { terms, relation, rhs }
    }

    pub fn lhs(&self, x: &[Rational]) -> Rational {
        self.terms.iter().map(|(j, q)| q * &x[*j]).sum()
    }

    pub fn holds(&self, x: &[Rational]) -> bool {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Eq => lhs == self.rhs,
            Relation::Le => lhs <= self.rhs,
        }
    }
}

/// Constraints over `variables` nonnegative unknowns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LinearSystem {
    pub variables: usize,
    pub constraints: Vec<Constraint>,
}

impl LinearSystem {
    pub fn new(variables: usize) -> Self {
        LinearSystem { variables, constraints: Vec::new() }
    }

    pub fn push(&mut self, c: Constraint) {
        assert!(
            c.terms.iter().all(|&(j, _)| j < self.variables),
            "constraint references a variable out of range"
        );
        self.constraints.push(c);
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        x.len() == self.variables
            && x.iter().all(|v| !v.is_negative())
            && self.constraints.iter().all(|c| c.holds(x))
    }
}

/// Multipliers `z`, one per constraint, with `z ≥ 0` on `≤` rows,
/// `Σ zᵢ·aᵢ ≥ 0` componentwise and `Σ zᵢ·bᵢ = -1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FarkasCertificate {
    #[serde(serialize_with = "serialize_fractions")]
    pub multipliers: Vec<Rational>,
}

impl fmt::Display for FarkasCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .multipliers
            .iter()
            .enumerate()
            .filter(|(_, z)| !z.is_zero())
            .map(|(i, z)| format!("{}·r{i}", fraction_string(z)))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Whether `cert` proves `system` has no nonnegative solution.
pub fn check_certificate(system: &LinearSystem, cert: &FarkasCertificate) -> bool {
    if cert.multipliers.len() != system.constraints.len() {
        return false;
    }
    let mut combined = vec![Rational::zero(); system.variables];
    let mut rhs = Rational::zero();
    for (c, z) in system.constraints.iter().zip(&cert.multipliers) {
        if c.relation == Relation::Le && z.is_negative() {
            return false;
        }
        for (j, q) in &c.terms {
            combined[*j] += z * q;
        }
        rhs += z * &c.rhs;
    }
    combined.iter().all(|v| !v.is_negative()) && rhs == -Rational::one()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Feasibility {
    Feasible(Vec<Rational>),
    Infeasible(FarkasCertificate),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Optimum {
    Optimal { point: Vec<Rational>, value: Rational },
    Unbounded,
    Infeasible(FarkasCertificate),
}

/// A basic feasible solution, or a certificate of infeasibility.
pub fn feasible_point(system: &LinearSystem) -> Feasibility {
    match Tableau::phase_one(system) {
        Ok(t) => Feasibility::Feasible(t.point()),
        Err(cert) => Feasibility::Infeasible(cert),
    }
}

/// Maximises `Σ objective[j]·x_j` over the system.
pub fn maximize(system: &LinearSystem, objective: &[(usize, Rational)]) -> Optimum {
    let mut t = match Tableau::phase_one(system) {
        Ok(t) => t,
        Err(cert) => return Optimum::Infeasible(cert),
    };
    let mut cost = vec![Rational::zero(); t.width];
    for (j, q) in objective {
        cost[*j] -= q;
    }
    if !t.optimise(cost) {
        return Optimum::Unbounded;
    }
    let point = t.point();
    let value = objective.iter().map(|(j, q)| q * &point[*j]).sum();
    Optimum::Optimal { point, value }
}

/// Rank of a dense rational matrix.
pub fn rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(r, p);
        let pivot = m[r][c].clone();
        for i in r + 1..m.len() {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] / &pivot;
            for k in c..cols {
                let delta = &f * &m[r][k];
                m[i][k] -= delta;
            }
        }
        r += 1;
    }
    r
}

/// Columns: structural variables, then one slack per `≤` row, then one
/// artificial per row. The last entry of each row is the right-hand side.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    variables: usize,
    /// First artificial column.
    artificial: usize,
    width: usize,
}

impl Tableau {
    fn phase_one(system: &LinearSystem) -> Result<Tableau, FarkasCertificate> {
        let n = system.variables;
        let m = system.constraints.len();
        let slacks: Vec<Option<usize>> = {
            let mut next = n;
            system
                .constraints
                .iter()
                .map(|c| {
                    (c.relation == Relation::Le).then(|| {
                        next += 1;
                        next - 1
                    })
                })
                .collect()
        };
        let artificial = n + slacks.iter().flatten().count();
        let width = artificial + m;
        let mut signs = Vec::with_capacity(m);
        let mut rows = Vec::with_capacity(m);
        for (i, c) in system.constraints.iter().enumerate() {
            let mut row = vec![Rational::zero(); width + 1];
            for (j, q) in &c.terms {
                row[*j] = q.clone();
            }
            if let Some(s) = slacks[i] {
                row[s] = Rational::one();
            }
            row[width] = c.rhs.clone();
            let sign = if c.rhs.is_negative() { -Rational::one() } else { Rational::one() };
            if sign.is_negative() {
                row.iter_mut().for_each(|v| *v = -&*v);
            }
            row[artificial + i] = Rational::one();
            signs.push(sign);
            rows.push(row);
        }
        let mut t = Tableau { rows, basis: (artificial..width).collect(), variables: n, artificial, width };
        let mut cost = vec![Rational::zero(); width];
        cost[artificial..].iter_mut().for_each(|c| *c = Rational::one());
        let objective = t.run(cost, width).expect("phase one is bounded");
        let value = -objective[width].clone();
        if value.is_positive() {
            // Reduced cost of artificial i is 1 - yᵢ for the phase-one duals y.
            let mut z: Vec<Rational> = (0..m)
                .map(|i| (&objective[artificial + i] - Rational::one()) * &signs[i])
                .collect();
            let scale = value.recip();
            z.iter_mut().for_each(|v| *v *= &scale);
            let cert = FarkasCertificate { multipliers: z };
            debug_assert!(check_certificate(system, &cert));
            return Err(cert);
        }
        t.evict_artificials();
        Ok(t)
    }

    /// Minimises `cost·x` starting from the current basis, allowing only
    /// columns below `limit` to enter. Returns the final objective row, whose
    /// last entry is minus the optimum, or `None` if unbounded.
    fn run(&mut self, cost: Vec<Rational>, limit: usize) -> Option<Vec<Rational>> {
        let mut obj = cost;
        obj.push(Rational::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if !obj[b].is_zero() {
                let f = obj[b].clone();
                for (o, r) in obj.iter_mut().zip(&self.rows[i]) {
                    *o -= &f * r;
                }
            }
        }
        loop {
            let Some(enter) = (0..limit).find(|&j| obj[j].is_negative()) else {
                return Some(obj);
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[self.width] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let (i, _) = leave?;
            self.pivot(i, enter);
            let f = obj[enter].clone();
            for (o, r) in obj.iter_mut().zip(&self.rows[i]) {
                *o -= &f * r;
            }
        }
    }

    fn optimise(&mut self, cost: Vec<Rational>) -> bool {
        self.run(cost, self.artificial).is_some()
    }

    fn pivot(&mut self, i: usize, j: usize) {
        let p = self.rows[i][j].clone();
        self.rows[i].iter_mut().for_each(|v| *v /= &p);
        let pivot_row = self.rows[i].clone();
        for (k, row) in self.rows.iter_mut().enumerate() {
            if k == i || row[j].is_zero() {
                continue;
            }
            let f = row[j].clone();
            for (v, r) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * r;
            }
        }
        self.basis[i] = j;
    }

    /// Pivots zero-level artificials out of the basis where possible; rows
    /// where that fails are redundant and stay inert.
    fn evict_artificials(&mut self) {
        for i in 0..self.rows.len() {
            if self.basis[i] < self.artificial {
                continue;
            }
            if let Some(j) = (0..self.artificial).find(|&j| !self.rows[i][j].is_zero()) {
                self.pivot(i, j);
            }
        }
    }

    fn point(&self) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); self.variables];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.variables {
                x[b] = self.rows[i][self.width].clone();
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64) -> Rational {
        rational(n, 1)
    }

    #[test]
    fn solves_a_small_system() {
        // x + y = 1, 2y = 1
        let mut s = LinearSystem::new(2);
        s.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Eq, q(1)));
        s.push(Constraint::new([(1, q(2))], Relation::Eq, q(1)));
        let Feasibility::Feasible(x) = feasible_point(&s) else { panic!("feasible") };
        assert_eq!(x, vec![rational(1, 2), rational(1, 2)]);
    }

    #[test]
    fn certifies_infeasibility() {
        // x + y = 1, x + y ≤ 1/2
        let mut s = LinearSystem::new(2);
        s.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Eq, q(1)));
        s.push(Constraint::new([(0, q(1)), (1, q(1))], Relation::Le, rational(1, 2)));
        let Feasibility::Infeasible(cert) = feasible_point(&s) else { panic!("infeasible") };
        assert!(check_certificate(&s, &cert));
        let mut tampered = cert.clone();
        tampered.multipliers[1] = -tampered.multipliers[1].clone();
        assert!(!check_certificate(&s, &tampered));
    }

    #[test]
    fn negative_right_hand_sides() {
        // -x ≤ -2, x ≤ 3
        let mut s = LinearSystem::new(1);
        s.push(Constraint::new([(0, q(-1))], Relation::Le, q(-2)));
        s.push(Constraint::new([(0, q(1))], Relation::Le, q(3)));
        match maximize(&s, &[(0, q(1))]) {
            Optimum::Optimal { value, .. } => assert_eq!(value, q(3)),
            other => panic!("{other:?}"),
        }
        match maximize(&s, &[(0, q(-1))]) {
            Optimum::Optimal { value, .. } => assert_eq!(value, q(-2)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unbounded_and_redundant() {
        let mut s = LinearSystem::new(2);
        s.push(Constraint::new([(0, q(1)), (1, q(-1))], Relation::Eq, q(0)));
        s.push(Constraint::new([(0, q(2)), (1, q(-2))], Relation::Eq, q(0)));
        assert_eq!(maximize(&s, &[(0, q(1))]), Optimum::Unbounded);
        assert_eq!(rank(&[vec![q(1), q(-1)], vec![q(2), q(-2)]]), 1);
    }

    #[test]
    fn fractions_round_trip() {
        assert_eq!(fraction_string(&rational(2, 4)), "1/2");
        assert_eq!(fraction_string(&q(1)), "1/1");
        assert_eq!(parse_fraction("3/6"), Some(rational(1, 2)));
        assert_eq!(parse_fraction("1/0"), None);
    }
}
