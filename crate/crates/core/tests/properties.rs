mod common;

use std::collections::BTreeMap;

use nctoric::azumaya::{a1_probe, idem_classify, subordinate};
use nctoric::exactmath::{
    hnf, kernel_basis, linear_feasible, minimal_polynomial, GaussRational as G, Inequality, IntMatrix, QIMatrix,
    Relation,
};
use nctoric::freeword::{compile_submonoid, ReducedWord};
use nctoric::ncalgebra::{bounded_ideal_member, AlgElem, BoundedIdeal, Membership, WordDomain};
use nctoric::toricfan::ConeId;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn word(rank: usize, max_len: usize) -> impl Strategy<Value = ReducedWord> {
    prop::collection::vec((1..=rank as i32, any::<bool>()), 0..=max_len).prop_map(move |ls| {
        let letters: Vec<i32> = ls.into_iter().map(|(i, neg)| if neg { -i } else { i }).collect();
        ReducedWord::reduce(rank, &letters).unwrap()
    })
}

fn gauss() -> impl Strategy<Value = G> {
    (-3i64..=3, -3i64..=3).prop_map(|(a, b)| G::from_parts(a, 1, b, 1))
}

fn elem(rank: usize) -> impl Strategy<Value = AlgElem> {
    prop::collection::vec((word(rank, 3), gauss()), 0..4).prop_map(move |ts| AlgElem::from_terms(rank, ts))
}

fn int_matrix(rows: usize, cols: usize) -> impl Strategy<Value = IntMatrix> {
    prop::collection::vec(prop::collection::vec(-5i64..=5, cols), rows)
        .prop_map(move |r| IntMatrix::from_i64_rows(cols, &r))
}

fn invertible(r: usize) -> impl Strategy<Value = (QIMatrix, QIMatrix)> {
    prop::collection::vec(gauss(), r * r)
        .prop_map(move |v| QIMatrix::from_flat(r, v))
        .prop_filter_map("singular", |p| p.inverse().map(|q| (p, q)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn words_form_a_group(a in word(3, 10), b in word(3, 10), c in word(3, 10)) {
        prop_assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        prop_assert!(a.mul(&a.inv()).is_identity());
        prop_assert_eq!(a.inv().inv(), a.clone());
        prop_assert_eq!(a.mul(&b).inv(), b.inv().mul(&a.inv()));
        let s: Vec<i64> = a.abelianize().iter().zip(b.abelianize()).map(|(x, y)| x + y).collect();
        prop_assert_eq!(a.mul(&b).abelianize(), s);
    }

    #[test]
    fn word_text_round_trips(a in word(3, 10)) {
        prop_assert_eq!(ReducedWord::parse(&a.to_string(), 3).unwrap(), a);
    }

    #[test]
    fn submonoids_accept_their_products(
        gens in prop::collection::vec(word(2, 3), 1..4),
        picks in prop::collection::vec(0usize..4, 0..8),
    ) {
        let m = compile_submonoid(2, gens.clone()).unwrap();
        let w = picks
            .iter()
            .fold(ReducedWord::identity(2), |acc, &k| acc.mul(&gens[k % gens.len()]));
        prop_assert!(m.member(&w));
        for g in &gens {
            prop_assert!(m.member(g));
        }
    }

    #[test]
    fn hnf_is_unimodular_and_echelon(m in int_matrix(3, 4)) {
        let (h, u) = hnf(&m);
        prop_assert_eq!(u.mul(&m), h.clone());
        prop_assert!(u.det().abs().is_one());
        let mut last_pivot = None;
        for i in 0..h.rows() {
            if let Some(p) = (0..h.cols()).find(|&j| !h.get(i, j).is_zero()) {
                prop_assert!(h.get(i, p).is_positive());
                prop_assert!(last_pivot.map_or(true, |q| p > q));
                last_pivot = Some(p);
            }
        }
    }

    #[test]
    fn kernel_rows_annihilate(m in int_matrix(2, 4)) {
        let k = kernel_basis(&m);
        let prod = k.mul(&m.transpose());
        for i in 0..prod.rows() {
            prop_assert!(prod.is_zero_row(i));
        }
    }

    #[test]
    fn planted_points_are_feasible(
        x0 in prop::collection::vec(-4i64..=4, 3),
        rows in prop::collection::vec((prop::collection::vec(-3i64..=3, 3), 0i64..3), 1..7),
    ) {
        let ineqs: Vec<Inequality> = rows
            .iter()
            .map(|(a, slack)| {
                let dot: i64 = a.iter().zip(&x0).map(|(p, q)| p * q).sum();
                Inequality::int(a, dot - slack, Relation::Ge)
            })
            .collect();
        let f = linear_feasible(3, &ineqs);
        let w = f.witness().expect("planted point is feasible");
        for q in &ineqs {
            prop_assert!(q.is_satisfied_by(w));
        }
        let mut bad = ineqs.clone();
        bad.push(Inequality::int(&[1, 0, 0], 1, Relation::Ge));
        bad.push(Inequality::int(&[-1, 0, 0], 0, Relation::Ge));
        prop_assert!(!linear_feasible(3, &bad).is_feasible());
    }

    #[test]
    fn algebra_multiplication_associates(a in elem(2), b in elem(2), c in elem(2)) {
        let l = a.checked_mul(&b).unwrap().checked_mul(&c).unwrap();
        let r = a.checked_mul(&b.checked_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(l, r);
        let d = a.checked_mul(&b.checked_add(&c).unwrap()).unwrap();
        let e = a.checked_mul(&b).unwrap().checked_add(&a.checked_mul(&c).unwrap()).unwrap();
        prop_assert_eq!(d, e);
    }

    #[test]
    fn ideal_combinations_are_members(
        gen in elem(2),
        mults in prop::collection::vec((word(2, 1), word(2, 1), gauss()), 1..3),
    ) {
        prop_assume!(!gen.is_zero());
        let ideal = BoundedIdeal {
            rank: 2,
            generators: vec![gen.clone()],
            degree_bound: gen.max_len() + 2,
            domain: WordDomain::Group,
        };
        let target = mults.iter().fold(AlgElem::zero(2), |acc, (u, v, c)| {
            acc.checked_add(&gen.sandwich(u, v).scale(c)).unwrap()
        });
        match bounded_ideal_member(&ideal, &target).unwrap() {
            Membership::Member(cert) => prop_assert_eq!(cert.reconstruct(&ideal), target),
            Membership::NotFoundAtBound(d) => prop_assert!(false, "missed at bound {}", d),
        }
    }

    #[test]
    fn subordination_is_transitive(
        (p, q) in invertible(3),
        a in 0usize..=3,
        b in 0usize..=3,
    ) {
        let (lo, hi) = (a.min(b), a.max(b));
        let e = |k: usize| {
            let d: Vec<i64> = (0..3).map(|i| i64::from(i < k)).collect();
            p.mul(&QIMatrix::diag_i64(&d)).mul(&q)
        };
        let (e1, e2, e3) = (e(lo), e(hi), e(3));
        prop_assert!(subordinate(&e1, &e2));
        prop_assert!(subordinate(&e2, &e3));
        prop_assert!(subordinate(&e1, &e3));
        prop_assert_eq!(subordinate(&e2, &e1), lo == hi);
    }

    #[test]
    fn split_probe_fibers_fill_the_algebra(
        (p, q) in invertible(3),
        eig in prop::collection::vec(-2i64..=2, 3),
    ) {
        let a = p.mul(&QIMatrix::diag_i64(&eig)).mul(&q);
        let probe = a1_probe(&a);
        prop_assert!(probe.irreducible_rest.is_none());
        prop_assert!(!probe.truncated);
        let total: usize = probe.fibers.iter().map(|(_, d)| d).sum();
        prop_assert_eq!(total, 9);
        prop_assert!(minimal_polynomial(&a).eval_matrix(&a).is_zero());
        let mut distinct = eig.clone();
        distinct.sort();
        distinct.dedup();
        prop_assert_eq!(probe.fibers.len(), distinct.len());
    }

    #[test]
    fn reduced_idempotents_recover_planted_blocks(
        (p, q) in invertible(3),
        owner in prop::collection::vec(prop::option::of(0usize..4), 3),
    ) {
        let f = common::p1();
        let faces: Vec<ConeId> = f.faces().cloned().collect();
        let planted: BTreeMap<ConeId, QIMatrix> = faces
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let d: Vec<i64> = owner.iter().map(|o| i64::from(*o == Some(k % faces.len()))).collect();
                (c.clone(), p.mul(&QIMatrix::diag_i64(&d)).mul(&q))
            })
            .collect();
        let e: BTreeMap<ConeId, QIMatrix> = faces
            .iter()
            .map(|s| {
                let m = faces
                    .iter()
                    .filter(|t| t.is_subset_of(s))
                    .fold(QIMatrix::zero(3), |acc, t| acc.add(&planted[t]));
                (s.clone(), m)
            })
            .collect();
        let sys = idem_classify(&f, &e).unwrap();
        prop_assert!(sys.strong);
        prop_assert_eq!(sys.reduced.unwrap(), planted);
    }
}

#[test]
fn rationals_in_witnesses_are_exact() {
    // x + y = 1/2 with x = y forces the witness (1/4, 1/4)
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    let one = BigRational::one();
    let ineqs = vec![
        Inequality::new(vec![one.clone(), one.clone()], half, Relation::Eq),
        Inequality::new(vec![one.clone(), -one], BigRational::zero(), Relation::Eq),
    ];
    let w = linear_feasible(2, &ineqs).witness().unwrap().to_vec();
    assert_eq!(w, vec![BigRational::new(1.into(), 4.into()); 2]);
}
