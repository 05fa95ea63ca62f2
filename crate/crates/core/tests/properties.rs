use std::collections::BTreeSet;

use num_bigint::BigInt;
use proptest::prelude::*;

use powpa::ast::{eval_formula, Atom, BaseTag, Formula, LinearTerm, Model, Rel, Symbols, Var};
use powpa::eqsolver::solve_equalities;
use powpa::ineqsolver::strict::{solve_strict, StrictSystem, StrictVerdict};
use powpa::linarith::eliminate_integer_vars;
use powpa::oracle::{enumerate_box_solutions, BoxSystem};
use powpa::textio::{parse_formula_with, print_formula};

fn bi(x: i64) -> BigInt {
    BigInt::from(x)
}

fn vars() -> (Symbols, [Var; 3]) {
    let mut s = Symbols::new();
    let v = [s.intern("x"), s.intern("y"), s.intern("z")];
    (s, v)
}

fn term() -> impl Strategy<Value = LinearTerm> {
    (prop::collection::vec(-20i64..=20, 3), -50i64..=50, any::<bool>()).prop_map(|(cs, k, huge)| {
        let (_, v) = vars();
        let mut t = LinearTerm::constant(if huge { bi(k) * bi(10).pow(25) } else { bi(k) });
        for (x, c) in v.iter().zip(cs) {
            t.add_coeff(*x, &bi(c));
        }
        t
    })
}

fn rel() -> impl Strategy<Value = Rel> {
    prop::sample::select(vec![Rel::Gt, Rel::Eq, Rel::Lt, Rel::Ge, Rel::Le, Rel::Ne])
}

fn qf_formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        (term(), rel()).prop_map(|(t, r)| Formula::cmp(t, r)),
        (term(), any::<bool>()).prop_map(|(t, a)| Formula::power(t, if a { BaseTag::A } else { BaseTag::B })),
        Just(Formula::tt()),
        Just(Formula::ff()),
    ];
    leaf.prop_recursive(4, 24, 4, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::And),
            prop::collection::vec(inner.clone(), 0..4).prop_map(Formula::Or),
            inner.prop_map(Formula::not),
        ]
    })
}

fn model(vals: &[i64], v: &[Var; 3]) -> Model {
    v.iter().zip(vals).map(|(x, &n)| (*x, bi(n))).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn print_parse_preserves_meaning(f in qf_formula(), vals in prop::collection::vec(-40i64..=40, 3)) {
        let (syms, v) = vars();
        let text = print_formula(&f, &syms);
        let mut s2 = syms.clone();
        let g = parse_formula_with(&text, &mut s2).unwrap();
        prop_assert_eq!(&s2, &syms);
        let again = parse_formula_with(&print_formula(&g, &syms), &mut s2).unwrap();
        prop_assert_eq!(&again, &g);
        let m = model(&vals, &v);
        let (two, three) = (bi(2), bi(3));
        prop_assert_eq!(eval_formula(&f, &m, &two, &three).unwrap(), eval_formula(&g, &m, &two, &three).unwrap());
    }

    #[test]
    fn quantified_text_roundtrips(f in qf_formula(), split in 0usize..3) {
        let (syms, v) = vars();
        let f = Formula::Exists(v[..split].to_vec(), Box::new(Formula::Forall(v[split..].to_vec(), Box::new(f))));
        let mut s2 = syms.clone();
        let g = parse_formula_with(&print_formula(&f, &syms), &mut s2).unwrap();
        let text = print_formula(&g, &syms);
        let h = parse_formula_with(&text, &mut s2).unwrap();
        prop_assert_eq!(&print_formula(&h, &syms), &text);
        prop_assert_eq!(&h, &g);
        match g {
            Formula::Exists(ref xs, ref inner) => {
                prop_assert_eq!(xs.as_slice(), &v[..split]);
                let is_forall = matches!(**inner, Formula::Forall(ref ys, _) if ys.as_slice() == &v[split..]);
                prop_assert!(is_forall);
            }
            _ => prop_assert!(false, "prefix lost: {}", text),
        }
    }
}

fn cmp_atoms() -> impl Strategy<Value = Vec<(i64, i64, i64, Rel)>> {
    prop::collection::vec((-3i64..=3, -3i64..=3, -10i64..=10, rel()), 1..4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// `∃x. atoms(x, y)` agrees with the projected systems on `y`, and
    /// back-substitution recovers a valid `x`.
    #[test]
    fn projection_matches_search(spec in cmp_atoms()) {
        let (_, v) = vars();
        let (x, y) = (v[0], v[1]);
        let atoms: Vec<Atom> = spec
            .iter()
            .map(|&(cx, cy, k, r)| {
                let mut t = LinearTerm::constant(k);
                t.add_coeff(x, &bi(cx));
                t.add_coeff(y, &bi(cy));
                Atom::Cmp(t, r)
            })
            .collect();
        let body = Formula::And(atoms.iter().cloned().map(Formula::Atom).collect());
        let systems = eliminate_integer_vars(&atoms, &BTreeSet::from([x]));
        let (two, three) = (bi(2), bi(3));
        for yv in -8i64..=8 {
            let exists = (-60i64..=60).any(|xv| eval_formula(&body, &model(&[xv, yv, 0], &v), &two, &three).unwrap());
            let m: Model = [(y, bi(yv))].into_iter().collect();
            let hit = systems.iter().find(|g| g.holds(&m));
            prop_assert_eq!(exists, hit.is_some(), "y = {}", yv);
            if let Some(g) = hit {
                let mut full = m.clone();
                prop_assert!(g.back_substitute(&mut full).is_some());
                prop_assert!(eval_formula(&body, &full, &two, &three).unwrap());
            }
        }
    }

    #[test]
    fn single_base_equations_match_box(cs in prop::collection::vec(-6i64..=6, 1..=3), d in -30i64..=30, g in prop::sample::select(vec![2i64, 3, 5])) {
        let l = cs.len();
        let bases = vec![bi(g); l];
        let c: Vec<BigInt> = cs.iter().map(|&x| bi(x)).collect();
        let repr = solve_equalities(std::slice::from_ref(&c), &[bi(d)], &bases, 1_000_000);
        let sys = BoxSystem { bases, a: vec![], b: vec![], c: vec![c], d: vec![bi(d)] };
        let want = enumerate_box_solutions(&sys, 10);
        let everything = enumerate_box_solutions(&BoxSystem { c: vec![], d: vec![], ..sys.clone() }, 10);
        let got: Vec<Vec<u64>> = everything.into_iter().filter(|e| repr.contains(e)).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn mixed_equations_match_box(cs in prop::collection::vec(-6i64..=6, 2), d in -30i64..=30) {
        let bases = vec![bi(2), bi(3)];
        let c: Vec<BigInt> = cs.iter().map(|&x| bi(x)).collect();
        let repr = solve_equalities(std::slice::from_ref(&c), &[bi(d)], &bases, 1_000_000);
        let sys = BoxSystem { bases, a: vec![], b: vec![], c: vec![c], d: vec![bi(d)] };
        let want = enumerate_box_solutions(&sys, 12);
        let everything = enumerate_box_solutions(&BoxSystem { c: vec![], d: vec![], ..sys.clone() }, 12);
        let got: Vec<Vec<u64>> = everything.into_iter().filter(|e| repr.contains(e)).collect();
        prop_assert_eq!(got, want);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn strict_systems_agree_with_box(rows in prop::collection::vec(prop::collection::vec(-3i64..=3, 3), 1..=3)) {
        let bases = vec![bi(2), bi(3), bi(3)];
        let a: Vec<Vec<BigInt>> = rows.iter().map(|r| r.iter().map(|&x| bi(x)).collect()).collect();
        let sys = StrictSystem::new(bases.clone(), a.clone());
        let found = enumerate_box_solutions(&BoxSystem { bases, b: vec![bi(0); a.len()], a, c: vec![], d: vec![] }, 8);
        match solve_strict(&sys, 1_000_000) {
            StrictVerdict::Sat(w) => prop_assert!(sys.satisfied_by(&w)),
            StrictVerdict::Unsat => prop_assert!(found.is_empty(), "unsat but {:?}", found[0]),
            StrictVerdict::Unknown(r) => prop_assert!(found.is_empty(), "unknown ({}) but {:?}", r, found[0]),
        }
    }
}
