//! Exact Fourier–Motzkin elimination over the rationals.
//!
//! Constraints have the shape `coeffs · x  (≥ | > | =)  bound`. Equalities are
//! eliminated by substitution before any pairwise combination, which keeps
//! the system small for the tiny instances this crate works with.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Relation {
    /// `coeffs · x ≥ bound`
    Ge,
    /// `coeffs · x > bound`
    Gt,
    /// `coeffs · x = bound`
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Inequality {
    pub coeffs: Vec<BigRational>,
    pub bound: BigRational,
    pub relation: Relation,
}

impl Inequality {
    pub fn new(coeffs: Vec<BigRational>, bound: BigRational, relation: Relation) -> Self {
        Inequality {
            coeffs,
            bound,
            relation,
        }
    }

    /// Integer-coefficient shorthand.
    pub fn int(coeffs: &[i64], bound: i64, relation: Relation) -> Self {
        Inequality::new(
            coeffs.iter().map(|&c| int_q(c)).collect(),
            int_q(bound),
            relation,
        )
    }

    /// `coeffs · x ≥ bound`, or `>` when `strict`.
    pub fn with_strictness(coeffs: Vec<BigRational>, bound: BigRational, strict: bool) -> Self {
        let rel = if strict { Relation::Gt } else { Relation::Ge };
        Inequality::new(coeffs, bound, rel)
    }

    pub fn is_satisfied_by(&self, x: &[BigRational]) -> bool {
        let lhs: BigRational = self
            .coeffs
            .iter()
            .zip(x)
            .map(|(c, v)| c * v)
            .fold(BigRational::zero(), |a, b| a + b);
        match self.relation {
            Relation::Ge => lhs >= self.bound,
            Relation::Gt => lhs > self.bound,
            Relation::Eq => lhs == self.bound,
        }
    }

    fn is_trivial(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    fn holds_trivially(&self) -> bool {
        let zero = BigRational::zero();
        match self.relation {
            Relation::Ge => zero >= self.bound,
            Relation::Gt => zero > self.bound,
            Relation::Eq => zero == self.bound,
        }
    }

    /// Scales so that the first nonzero coefficient has absolute value one.
    /// Only positive scaling is used, so the relation is preserved.
    fn normalized(mut self) -> Self {
        if let Some(lead) = self.coeffs.iter().find(|c| !c.is_zero()).cloned() {
            let mut s = lead.abs();
            if self.relation == Relation::Eq && lead.is_negative() {
                s = -s;
            }
            for c in &mut self.coeffs {
                *c = &*c / &s;
            }
            self.bound = &self.bound / &s;
        }
        self
    }
}

pub(crate) fn int_q(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Feasibility {
    /// A point satisfying every input constraint exactly.
    Feasible(Vec<BigRational>),
    /// The derived constraint `0 (rel) bound` that cannot hold.
    Infeasible(Inequality),
}

impl Feasibility {
    pub fn witness(&self) -> Option<&[BigRational]> {
        match self {
            Feasibility::Feasible(w) => Some(w),
            Feasibility::Infeasible(_) => None,
        }
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// How a variable was removed, kept for back-substitution.
enum Elimination {
    /// `x_var = (bound - Σ_{k≠var} c_k x_k) / c_var`
    Substituted { var: usize, eq: Inequality },
    /// Constraints that mention `var`, with the other variables still free.
    Projected { var: usize, cons: Vec<Inequality> },
}

/// Decides feasibility of a finite rational system in `dim` variables.
pub fn linear_feasible(dim: usize, ineqs: &[Inequality]) -> Feasibility {
    for q in ineqs {
        assert_eq!(q.coeffs.len(), dim, "constraint arity mismatch");
    }
    let mut system: Vec<Inequality> = ineqs.iter().cloned().map(Inequality::normalized).collect();
    let mut trail = Vec::with_capacity(dim);
    for var in (0..dim).rev() {
        if let Some(bad) = system.iter().find(|q| q.is_trivial() && !q.holds_trivially()) {
            return Feasibility::Infeasible(bad.clone());
        }
        let (next, step) = eliminate(system, var);
        system = next;
        trail.push(step);
    }
    if let Some(bad) = system.iter().find(|q| !q.holds_trivially()) {
        return Feasibility::Infeasible(bad.clone());
    }
    let mut x = vec![BigRational::zero(); dim];
    for step in trail.iter().rev() {
        match step {
            Elimination::Substituted { var, eq } => {
                let mut rest = eq.bound.clone();
                for (k, c) in eq.coeffs.iter().enumerate() {
                    if k != *var {
                        rest -= c * &x[k];
                    }
                }
                x[*var] = rest / &eq.coeffs[*var];
            }
            Elimination::Projected { var, cons } => {
                let (lo, hi) = interval_for(cons, *var, &x);
                x[*var] = pick_value(&lo, &hi);
            }
        }
    }
    debug_assert!(ineqs.iter().all(|q| q.is_satisfied_by(&x)));
    Feasibility::Feasible(x)
}

type Bound = Option<(BigRational, bool)>;

/// Bounds on `x_var` implied by `cons` once the other entries of `x` are fixed.
/// Each bound carries a strictness flag.
fn interval_for(cons: &[Inequality], var: usize, x: &[BigRational]) -> (Bound, Bound) {
    let mut lo: Bound = None;
    let mut hi: Bound = None;
    for q in cons {
        let c = &q.coeffs[var];
        let mut rest = q.bound.clone();
        for (k, ck) in q.coeffs.iter().enumerate() {
            if k != var {
                rest -= ck * &x[k];
            }
        }
        let v = rest / c;
        let strict = q.relation == Relation::Gt;
        if c.is_positive() {
            tighten_lower(&mut lo, v, strict);
        } else {
            tighten_upper(&mut hi, v, strict);
        }
    }
    (lo, hi)
}

fn tighten_lower(lo: &mut Bound, v: BigRational, strict: bool) {
    match lo {
        Some((cur, s)) if *cur > v || (*cur == v && (*s || !strict)) => {}
        _ => *lo = Some((v, strict)),
    }
}

fn tighten_upper(hi: &mut Bound, v: BigRational, strict: bool) {
    match hi {
        Some((cur, s)) if *cur < v || (*cur == v && (*s || !strict)) => {}
        _ => *hi = Some((v, strict)),
    }
}

fn admits(lo: &Bound, hi: &Bound, v: &BigRational) -> bool {
    let above = match lo {
        None => true,
        Some((l, true)) => v > l,
        Some((l, false)) => v >= l,
    };
    let below = match hi {
        None => true,
        Some((h, true)) => v < h,
        Some((h, false)) => v <= h,
    };
    above && below
}

/// Prefers 0, then the admissible integer closest to 0, then the midpoint.
fn pick_value(lo: &Bound, hi: &Bound) -> BigRational {
    let zero = BigRational::zero();
    if admits(lo, hi, &zero) {
        return zero;
    }
    let candidate = match (lo, hi) {
        (Some((l, _)), _) if l.is_positive() => l.floor() + BigRational::one(),
        (_, Some((h, _))) if h.is_negative() => h.ceil() - BigRational::one(),
        _ => zero.clone(),
    };
    let candidate = match (lo, hi) {
        (Some((l, false)), _) if l.is_integer() && l.is_positive() => l.clone(),
        (_, Some((h, false))) if h.is_integer() && h.is_negative() => h.clone(),
        _ => candidate,
    };
    if admits(lo, hi, &candidate) {
        return candidate;
    }
    match (lo, hi) {
        (Some((l, _)), Some((h, _))) => (l + h) / int_q(2),
        (Some((l, _)), None) => l + BigRational::one(),
        (None, Some((h, _))) => h - BigRational::one(),
        (None, None) => zero,
    }
}

fn eliminate(system: Vec<Inequality>, var: usize) -> (Vec<Inequality>, Elimination) {
    if let Some(pos) = system
        .iter()
        .position(|q| q.relation == Relation::Eq && !q.coeffs[var].is_zero())
    {
        let eq = system[pos].clone();
        let mut out = BTreeSet::new();
        for (k, q) in system.into_iter().enumerate() {
            if k == pos {
                continue;
            }
            let c = q.coeffs[var].clone();
            if c.is_zero() {
                out.insert(q);
                continue;
            }
            let f = &c / &eq.coeffs[var];
            let coeffs = q
                .coeffs
                .iter()
                .zip(&eq.coeffs)
                .map(|(a, b)| a - &f * b)
                .collect();
            let bound = &q.bound - &f * &eq.bound;
            out.insert(Inequality::new(coeffs, bound, q.relation).normalized());
        }
        return (
            out.into_iter().collect(),
            Elimination::Substituted { var, eq },
        );
    }

    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut rest = BTreeSet::new();
    for q in system {
        let c = &q.coeffs[var];
        if c.is_positive() {
            lower.push(q);
        } else if c.is_negative() {
            upper.push(q);
        } else {
            rest.insert(q);
        }
    }
    for l in &lower {
        for u in &upper {
            // positive multipliers cancel var
            let a = -u.coeffs[var].clone();
            let b = l.coeffs[var].clone();
            let coeffs = l
                .coeffs
                .iter()
                .zip(&u.coeffs)
                .map(|(x, y)| &a * x + &b * y)
                .collect();
            let bound = &a * &l.bound + &b * &u.bound;
            let rel = if l.relation == Relation::Gt || u.relation == Relation::Gt {
                Relation::Gt
            } else {
                Relation::Ge
            };
            rest.insert(Inequality::new(coeffs, bound, rel).normalized());
        }
    }
    let mut cons = lower;
    cons.extend(upper);
    (
        rest.into_iter().collect(),
        Elimination::Projected { var, cons },
    )
}

/// Exact bounds of the projection of the solution set onto coordinate
/// `var`. Returns `None` when the system is infeasible; otherwise each side
/// is `None` when unbounded.
pub fn projection_bounds(
    dim: usize,
    ineqs: &[Inequality],
    var: usize,
) -> Option<(Option<BigRational>, Option<BigRational>)> {
    if !linear_feasible(dim, ineqs).is_feasible() {
        return None;
    }
    let mut system: Vec<Inequality> = ineqs.iter().cloned().map(Inequality::normalized).collect();
    for other in (0..dim).rev() {
        if other != var {
            system = eliminate(system, other).0;
        }
    }
    let mut lo: Option<BigRational> = None;
    let mut hi: Option<BigRational> = None;
    for q in &system {
        let c = &q.coeffs[var];
        if c.is_zero() {
            continue;
        }
        let v = &q.bound / c;
        if q.relation == Relation::Eq {
            lo = Some(v.clone());
            hi = Some(v);
            continue;
        }
        if c.is_positive() {
            if lo.as_ref().is_none_or(|l| v > *l) {
                lo = Some(v);
            }
        } else if hi.as_ref().is_none_or(|h| v < *h) {
            hi = Some(v);
        }
    }
    Some((lo, hi))
}

/// Clears denominators of a rational vector and divides out the content,
/// giving the primitive integer vector on the same ray.
pub fn primitive_integer_vector(v: &[BigRational]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &lcm).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    ints.into_iter().map(|x| x / &g).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contradictory_bounds() {
        let sys = [
            Inequality::int(&[1], 1, Relation::Ge),
            Inequality::int(&[-1], 0, Relation::Ge),
        ];
        assert!(!linear_feasible(1, &sys).is_feasible());
    }

    #[test]
    fn orthant_prefers_origin() {
        let sys = [
            Inequality::int(&[1, 0], 0, Relation::Ge),
            Inequality::int(&[0, 1], 0, Relation::Ge),
        ];
        assert_eq!(
            linear_feasible(2, &sys).witness().unwrap(),
            &[int_q(0), int_q(0)]
        );
    }

    #[test]
    fn separating_functional_for_adjacent_cones() {
        // cone(e1,e2) vs cone(-e1-e2, e2), shared ray e2
        let sys = [
            Inequality::int(&[1, 0], 0, Relation::Gt),
            Inequality::int(&[1, 1], 0, Relation::Gt),
            Inequality::int(&[0, 1], 0, Relation::Eq),
        ];
        let w = linear_feasible(2, &sys);
        let m = w.witness().unwrap();
        for q in &sys {
            assert!(q.is_satisfied_by(m));
        }
        let dot = |v: [i64; 2]| &m[0] * int_q(v[0]) + &m[1] * int_q(v[1]);
        assert!(dot([1, 0]) > int_q(0));
        assert!(dot([-1, -1]) < int_q(0));
        assert_eq!(dot([0, 1]), int_q(0));
    }

    #[test]
    fn strict_open_interval() {
        let sys = [
            Inequality::int(&[2], 1, Relation::Gt),
            Inequality::int(&[-2], -2, Relation::Gt),
        ];
        let w = linear_feasible(1, &sys);
        let x = &w.witness().unwrap()[0];
        assert!(x > &BigRational::new(1.into(), 2.into()) && x < &int_q(1));
    }

    #[test]
    fn equality_contradiction() {
        let sys = [
            Inequality::int(&[1, 1], 1, Relation::Eq),
            Inequality::int(&[1, 1], 2, Relation::Eq),
        ];
        assert!(!linear_feasible(2, &sys).is_feasible());
    }

    #[test]
    fn simplex_projection() {
        let sys = [
            Inequality::int(&[1, 0], 0, Relation::Ge),
            Inequality::int(&[0, 1], 0, Relation::Ge),
            Inequality::int(&[-1, -1], -3, Relation::Ge),
        ];
        let (lo, hi) = projection_bounds(2, &sys, 0).unwrap();
        assert_eq!((lo, hi), (Some(int_q(0)), Some(int_q(3))));
        let half_plane = [Inequality::int(&[1, 0], 0, Relation::Ge)];
        assert_eq!(projection_bounds(2, &half_plane, 1).unwrap(), (None, None));
    }
}
