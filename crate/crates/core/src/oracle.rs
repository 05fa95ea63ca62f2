//! Brute-force search over bounded boxes, kept apart from the solver paths.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;

use crate::ast::{eval_formula, Atom, BaseTag, Formula, LinearTerm, Model, Var};
use crate::powerprep::ProblemOneInstance;
use crate::textio::SystemText;

/// `A z > b ∧ C z = d` over explicit column bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoxSystem {
    pub bases: Vec<BigInt>,
    pub a: Vec<Vec<BigInt>>,
    pub b: Vec<BigInt>,
    pub c: Vec<Vec<BigInt>>,
    pub d: Vec<BigInt>,
}

impl BoxSystem {
    pub fn from_text(t: &SystemText, alpha: &BigInt, beta: &BigInt) -> Self {
        BoxSystem {
            bases: t.bases.iter().map(|g| if *g == BaseTag::A { alpha.clone() } else { beta.clone() }).collect(),
            a: t.a.clone(),
            b: t.b.clone(),
            c: t.c.clone(),
            d: t.d.clone(),
        }
    }
}

impl From<&ProblemOneInstance> for BoxSystem {
    fn from(p: &ProblemOneInstance) -> Self {
        BoxSystem {
            bases: (0..p.arity()).map(|i| p.base_value(i).clone()).collect(),
            a: p.a.clone(),
            b: p.b.clone(),
            c: p.c.clone(),
            d: p.d.clone(),
        }
    }
}

/// Every exponent tuple in `[0, side]^l` satisfying the system, in
/// lexicographic order.
pub fn enumerate_box_solutions(sys: &BoxSystem, side: u64) -> Vec<Vec<u64>> {
    let l = sys.bases.len();
    let tables: Vec<Vec<BigInt>> = sys
        .bases
        .iter()
        .map(|g| {
            let mut t = vec![BigInt::one()];
            for _ in 0..side {
                let next = t.last().unwrap() * g;
                t.push(next);
            }
            t
        })
        .collect();
    let holds = |e: &[u64]| {
        let dot = |row: &[BigInt]| -> BigInt { row.iter().enumerate().map(|(i, c)| c * &tables[i][e[i] as usize]).sum() };
        sys.a.iter().zip(&sys.b).all(|(r, b)| &dot(r) > b) && sys.c.iter().zip(&sys.d).all(|(r, d)| &dot(r) == d)
    };
    let mut out = Vec::new();
    let mut e = vec![0u64; l];
    loop {
        if holds(&e) {
            out.push(e.clone());
        }
        // odometer with the last column fastest
        let mut i = l;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if e[i] < side {
                e[i] += 1;
                break;
            }
            e[i] = 0;
        }
    }
}

fn strip(f: &Formula, positive: bool, bound: &mut Vec<Var>) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::And(gs) => Formula::And(gs.iter().map(|g| strip(g, positive, bound)).collect()),
        Formula::Or(gs) => Formula::Or(gs.iter().map(|g| strip(g, positive, bound)).collect()),
        Formula::Not(g) => Formula::Not(Box::new(strip(g, !positive, bound))),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let existential = matches!(f, Formula::Exists(..)) == positive;
            assert!(existential, "oracle: sentence is not existential");
            bound.extend(vs.iter().copied());
            strip(g, positive, bound)
        }
    }
}

/// Tags `γ` with a positive-polarity atom `x ∈ γ^ℕ` on a bare variable.
fn power_tags(f: &Formula, positive: bool, out: &mut BTreeMap<Var, BTreeSet<BaseTag>>) {
    match f {
        Formula::Atom(Atom::Power(t, g)) if positive => {
            let mut vs = t.vars();
            if let (Some(v), None) = (vs.next(), vs.next()) {
                if *t == LinearTerm::var(v) {
                    out.entry(v).or_default().insert(*g);
                }
            }
        }
        Formula::Atom(_) => {}
        Formula::And(gs) | Formula::Or(gs) => gs.iter().for_each(|g| power_tags(g, positive, out)),
        Formula::Not(g) => power_tags(g, !positive, out),
        Formula::Exists(_, g) | Formula::Forall(_, g) => power_tags(g, positive, out),
    }
}

/// First model in lexicographic order over the bound variables (by index).
///
/// A variable constrained to a power set ranges over those powers with
/// exponent at most `exp_box`, ordered by value; every other variable
/// ranges over `[−lin_box, lin_box]`. Panics when `f` has a universal
/// quantifier.
pub fn semi_decide(f: &Formula, alpha: &BigInt, beta: &BigInt, exp_box: u64, lin_box: u64) -> Option<Model> {
    let mut bound = Vec::new();
    let body = strip(f, true, &mut bound);
    let vars: Vec<Var> = bound.into_iter().collect::<BTreeSet<_>>().into_iter().collect();
    let mut tags = BTreeMap::new();
    power_tags(f, true, &mut tags);
    let powers = |g: &BigInt| {
        let mut t = vec![BigInt::one()];
        for _ in 0..exp_box {
            let next = t.last().unwrap() * g;
            t.push(next);
        }
        t
    };
    let domains: Vec<Vec<BigInt>> = vars
        .iter()
        .map(|v| match tags.get(v) {
            Some(ts) => {
                let mut vals: Vec<BigInt> = ts.iter().flat_map(|t| powers(if *t == BaseTag::A { alpha } else { beta })).collect();
                vals.sort();
                vals.dedup();
                vals
            }
            None => {
                let r = lin_box as i64;
                (-r..=r).map(BigInt::from).collect()
            }
        })
        .collect();
    let mut idx = vec![0usize; vars.len()];
    loop {
        let m: Model = vars.iter().zip(&idx).zip(&domains).map(|((v, &i), d)| (*v, d[i].clone())).collect();
        if eval_formula(&body, &m, alpha, beta).ok()? {
            return Some(m);
        }
        let mut i = vars.len();
        loop {
            if i == 0 {
                return None;
            }
            i -= 1;
            if idx[i] + 1 < domains[i].len() {
                idx[i] += 1;
                break;
            }
            idx[i] = 0;
        }
    }
}
