//! Power-system instances and whole sentences.
//!
//! [`Engine::solve_general`] handles `A z > b ∧ C z = d`: equalities are
//! solved first and each solution cell is substituted away; negative
//! thresholds are split into `row = v` branches and one `row > 0` branch;
//! non-negative thresholds go to the strict solver and the witness is then
//! raised above `b`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::ast::{eval_formula, Atom, Formula, Model, Symbols, Var};
use crate::eqsolver::{solve_equalities, AClassCell, Completeness};
use crate::ineqsolver::pumping::inflate_witness;
use crate::ineqsolver::strict::{Inhomogeneous, StrictSolver, StrictSystem, StrictVerdict};
use crate::linarith::{eliminate_integer_vars, normalize_negations, to_power_tagged_dnf};
use crate::powerprep::{unfold_to_problem1, ProblemOneInstance};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Sat { model: Model, witness: Vec<u64> },
    Unsat,
    Unknown(String),
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Sat { .. } => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown(_) => "unknown",
        }
    }

    pub fn is_sat(&self) -> bool {
        matches!(self, Verdict::Sat { .. })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Stats {
    pub instances: u64,
    pub cells: u64,
    pub enumerated: u64,
    pub budget_truncated: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decision {
    pub verdict: Verdict,
    pub stats: Stats,
}

#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum DriverError {
    #[error("free variables not allowed")]
    FreeVariables,
    #[error("only existential sentences are supported")]
    NotExistential,
    #[error("power base must exceed 1, got {0}")]
    Domain(BigInt),
    #[error("internal error: {0}")]
    Internal(String),
}

type Key = (Vec<BigInt>, Vec<Vec<BigInt>>, Vec<BigInt>, Vec<Vec<BigInt>>, Vec<BigInt>);

/// Solver state shared by all sub-problems of one run.
pub struct Engine {
    budget: u64,
    pub stats: Stats,
    memo: HashMap<Key, StrictVerdict>,
}

fn pow(b: &BigInt, e: u64) -> BigInt {
    num_traits::pow(b.clone(), e as usize)
}

fn dot(row: &[BigInt], z: &[BigInt]) -> BigInt {
    row.iter().zip(z).map(|(c, v)| c * v).sum()
}

fn holds(bases: &[BigInt], a: &[Vec<BigInt>], b: &[BigInt], c: &[Vec<BigInt>], d: &[BigInt], exps: &[u64]) -> bool {
    let z: Vec<BigInt> = bases.iter().zip(exps).map(|(g, &e)| pow(g, e)).collect();
    a.iter().zip(b).all(|(r, x)| &dot(r, &z) > x) && c.iter().zip(d).all(|(r, x)| &dot(r, &z) == x)
}

/// Small-box search; `None` when nothing in the box works.
fn probe(bases: &[BigInt], a: &[Vec<BigInt>], b: &[BigInt], c: &[Vec<BigInt>], d: &[BigInt]) -> Option<Vec<u64>> {
    let l = bases.len();
    let mut side = 1u64;
    while (side + 1).saturating_pow(l as u32) <= 512 && side < 24 {
        side += 1;
    }
    let mut e = vec![0u64; l];
    loop {
        if holds(bases, a, b, c, d, &e) {
            return Some(e);
        }
        let mut i = 0;
        loop {
            if i == l {
                return None;
            }
            if e[i] + 1 < side {
                e[i] += 1;
                break;
            }
            e[i] = 0;
            i += 1;
        }
    }
}

struct Outcome {
    unknown: Option<String>,
}

impl Outcome {
    fn finish(self) -> StrictVerdict {
        self.unknown.map_or(StrictVerdict::Unsat, StrictVerdict::Unknown)
    }

    /// Returns the witness on SAT, records UNKNOWN.
    fn take(&mut self, v: StrictVerdict) -> Option<Vec<u64>> {
        match v {
            StrictVerdict::Sat(w) => Some(w),
            StrictVerdict::Unknown(r) => {
                self.unknown.get_or_insert(r);
                None
            }
            StrictVerdict::Unsat => None,
        }
    }
}

impl Engine {
    pub fn new(budget: u64) -> Self {
        Engine { budget, stats: Stats::default(), memo: HashMap::new() }
    }

    pub fn solve_strict(&mut self, sys: &StrictSystem) -> StrictVerdict {
        StrictSolver::new(self).solve(sys)
    }

    /// Exponents with `A z > b ∧ C z = d`, each column on its own base value.
    pub fn solve_general(
        &mut self,
        bases: &[BigInt],
        a: &[Vec<BigInt>],
        b: &[BigInt],
        c: &[Vec<BigInt>],
        d: &[BigInt],
    ) -> StrictVerdict {
        let key: Key = (bases.to_vec(), a.to_vec(), b.to_vec(), c.to_vec(), d.to_vec());
        if let Some(v) = self.memo.get(&key) {
            return v.clone();
        }
        let v = self.general_uncached(bases, a, b, c, d);
        if let StrictVerdict::Sat(w) = &v {
            assert!(holds(bases, a, b, c, d, w), "unverified witness {w:?}");
        }
        self.memo.insert(key, v.clone());
        v
    }

    fn general_uncached(
        &mut self,
        bases: &[BigInt],
        a: &[Vec<BigInt>],
        b: &[BigInt],
        c: &[Vec<BigInt>],
        d: &[BigInt],
    ) -> StrictVerdict {
        let l = bases.len();
        let mut ra = Vec::new();
        let mut rb = Vec::new();
        for (row, x) in a.iter().zip(b) {
            if row.iter().all(Zero::is_zero) {
                if !x.is_negative() {
                    return StrictVerdict::Unsat;
                }
            } else {
                ra.push(row.clone());
                rb.push(x.clone());
            }
        }
        let mut rc = Vec::new();
        let mut rd = Vec::new();
        for (row, x) in c.iter().zip(d) {
            if row.iter().all(Zero::is_zero) {
                if !x.is_zero() {
                    return StrictVerdict::Unsat;
                }
            } else {
                rc.push(row.clone());
                rd.push(x.clone());
            }
        }
        if let Some(w) = probe(bases, &ra, &rb, &rc, &rd) {
            return StrictVerdict::Sat(w);
        }
        if !rc.is_empty() {
            return self.with_equalities(bases, &ra, &rb, &rc, &rd);
        }
        if ra.is_empty() {
            return StrictVerdict::Sat(vec![0; l]);
        }
        let Some(j) = rb.iter().position(|x| x.is_negative()) else {
            let sys = StrictSystem::new(bases.to_vec(), ra.clone());
            return match self.solve_strict(&sys) {
                StrictVerdict::Sat(m) => match inflate_witness(bases, &ra, &rb, &m) {
                    Ok(w) => StrictVerdict::Sat(w),
                    Err(e) => StrictVerdict::Unknown(format!("witness inflation: {e}")),
                },
                v => v,
            };
        };
        // row_j > b_j with b_j < 0: row_j > 0, or row_j = v for b_j < v ≤ 0
        let mut out = Outcome { unknown: None };
        let mut pos = rb.clone();
        pos[j] = BigInt::zero();
        if let Some(w) = out.take(self.solve_general(bases, &ra, &pos, &[], &[])) {
            return StrictVerdict::Sat(w);
        }
        let mut rest_a = ra.clone();
        let row = rest_a.remove(j);
        let mut rest_b = rb.clone();
        let bj = rest_b.remove(j);
        let mut v: BigInt = bj + 1;
        while !v.is_positive() {
            let sub = self.solve_general(bases, &rest_a, &rest_b, std::slice::from_ref(&row), std::slice::from_ref(&v));
            if let Some(w) = out.take(sub) {
                return StrictVerdict::Sat(w);
            }
            v += 1;
        }
        out.finish()
    }

    fn with_equalities(
        &mut self,
        bases: &[BigInt],
        a: &[Vec<BigInt>],
        b: &[BigInt],
        c: &[Vec<BigInt>],
        d: &[BigInt],
    ) -> StrictVerdict {
        let repr = solve_equalities(c, d, bases, self.budget);
        self.stats.cells += repr.cells.len() as u64;
        self.stats.enumerated += repr.enumerated;
        let mut out = Outcome { unknown: None };
        if repr.completeness == Completeness::BudgetTruncated {
            self.stats.budget_truncated = true;
            out.unknown = Some("equality enumeration budget exhausted".into());
        }
        for cell in &repr.cells {
            let (sub_bases, sub_a, sub_b, free) = substitute(bases, a, b, cell);
            if let Some(w) = out.take(self.solve_general(&sub_bases, &sub_a, &sub_b, &[], &[])) {
                let exps = expand(cell, &free, &w, bases.len());
                if holds(bases, a, b, c, d, &exps) {
                    return StrictVerdict::Sat(exps);
                }
                out.unknown.get_or_insert_with(|| "cell witness failed verification".into());
            }
        }
        out.finish()
    }

    /// Power-system instance; the model assigns the instance's power variables.
    pub fn solve_problem1(&mut self, inst: &ProblemOneInstance) -> Verdict {
        let bases: Vec<BigInt> = (0..inst.arity()).map(|i| inst.base_value(i).clone()).collect();
        match self.solve_general(&bases, &inst.a, &inst.b, &inst.c, &inst.d) {
            StrictVerdict::Sat(w) => {
                assert!(inst.satisfied_by(&w));
                Verdict::Sat { model: inst.lift(&w), witness: w }
            }
            StrictVerdict::Unsat => Verdict::Unsat,
            StrictVerdict::Unknown(r) => Verdict::Unknown(r),
        }
    }
}

impl Inhomogeneous for Engine {
    fn solve_above(&mut self, bases: &[BigInt], a: &[Vec<BigInt>], b: &[BigInt]) -> StrictVerdict {
        self.solve_general(bases, a, b, &[], &[])
    }
}

/// Substitutes a normalized cell: fixed columns move into the thresholds,
/// offset members fold into their representative. Returns the reduced
/// system and the original index of each remaining column.
fn substitute(
    bases: &[BigInt],
    a: &[Vec<BigInt>],
    b: &[BigInt],
    cell: &AClassCell,
) -> (Vec<BigInt>, Vec<Vec<BigInt>>, Vec<BigInt>, Vec<usize>) {
    let l = bases.len();
    let mut a2: Vec<Vec<BigInt>> = a.to_vec();
    let mut b2: Vec<BigInt> = b.to_vec();
    let mut gone = vec![false; l];
    for &(col, v) in &cell.fixes {
        let p = pow(&bases[col], v);
        for (row, x) in a2.iter_mut().zip(b2.iter_mut()) {
            *x -= &row[col] * &p;
        }
        gone[col] = true;
    }
    for &(m, rep, diff) in &cell.offsets {
        let p = pow(&bases[rep], diff as u64);
        for row in a2.iter_mut() {
            let add = &row[m] * &p;
            row[rep] += add;
        }
        gone[m] = true;
    }
    let free: Vec<usize> = (0..l).filter(|&i| !gone[i]).collect();
    let sub_bases = free.iter().map(|&i| bases[i].clone()).collect();
    let sub_a = a2.iter().map(|row| free.iter().map(|&i| row[i].clone()).collect()).collect();
    (sub_bases, sub_a, b2, free)
}

fn expand(cell: &AClassCell, free: &[usize], w: &[u64], l: usize) -> Vec<u64> {
    let mut exps = vec![0u64; l];
    for (k, &i) in free.iter().enumerate() {
        exps[i] = w[k];
    }
    for &(col, v) in &cell.fixes {
        exps[col] = v;
    }
    for &(m, rep, diff) in &cell.offsets {
        exps[m] = exps[rep] + diff as u64;
    }
    exps
}

/// Decides a single power-system instance.
pub fn solve_problem1(inst: &ProblemOneInstance, budget: u64) -> Decision {
    let mut e = Engine::new(budget);
    e.stats.instances = 1;
    let verdict = e.solve_problem1(inst);
    Decision { verdict, stats: e.stats }
}

fn has_forall(f: &Formula) -> bool {
    match f {
        Formula::Forall(..) => true,
        Formula::Atom(_) => false,
        Formula::And(fs) | Formula::Or(fs) => fs.iter().any(has_forall),
        Formula::Not(g) | Formula::Exists(_, g) => has_forall(g),
    }
}

fn strip_quantifiers(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) => f.clone(),
        Formula::And(fs) => Formula::And(fs.iter().map(strip_quantifiers).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(strip_quantifiers).collect()),
        Formula::Not(g) => Formula::not(strip_quantifiers(g)),
        Formula::Exists(_, g) | Formula::Forall(_, g) => strip_quantifiers(g),
    }
}

fn collect_vars(f: &Formula, out: &mut BTreeSet<Var>) {
    match f {
        Formula::Atom(a) => out.extend(a.term().vars()),
        Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| collect_vars(g, out)),
        Formula::Not(g) => collect_vars(g, out),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            out.extend(vs.iter().copied());
            collect_vars(g, out);
        }
    }
}

/// Decides a closed existential sentence; SAT models assign every variable
/// of the sentence and are re-checked against it.
pub fn decide(f: &Formula, syms: &mut Symbols, alpha: &BigInt, beta: &BigInt, budget: u64) -> Result<Decision, DriverError> {
    for g in [alpha, beta] {
        if g <= &BigInt::one() {
            return Err(DriverError::Domain(g.clone()));
        }
    }
    if !f.free_vars().is_empty() {
        return Err(DriverError::FreeVariables);
    }
    let nf = normalize_negations(f, syms, alpha, beta);
    if has_forall(&nf) {
        return Err(DriverError::NotExistential);
    }
    let ptf = to_power_tagged_dnf(&nf, syms);
    let mut engine = Engine::new(budget);
    let mut unknown: Option<String> = None;
    for (i, disjunct) in ptf.disjuncts.iter().enumerate() {
        let tags = ptf.disjunct_power_vars(i);
        let cmps: Vec<Atom> = disjunct.iter().filter(|a| matches!(a, Atom::Cmp(..))).cloned().collect();
        let mut all: BTreeSet<Var> = BTreeSet::new();
        for a in disjunct {
            all.extend(a.term().vars());
        }
        let elim: BTreeSet<Var> = all.iter().copied().filter(|v| !tags.contains_key(v)).collect();
        for gs in eliminate_integer_vars(&cmps, &elim) {
            let instances = unfold_to_problem1(&gs, &tags, alpha, beta);
            engine.stats.instances += instances.len() as u64;
            for inst in &instances {
                match engine.solve_problem1(inst) {
                    Verdict::Sat { mut model, witness } => {
                        gs.back_substitute(&mut model)
                            .ok_or_else(|| DriverError::Internal("back-substitution failed".into()))?;
                        let model = finish_model(f, model, alpha, beta)?;
                        return Ok(Decision { verdict: Verdict::Sat { model, witness }, stats: engine.stats });
                    }
                    Verdict::Unknown(r) => {
                        unknown.get_or_insert(r);
                    }
                    Verdict::Unsat => {}
                }
            }
        }
    }
    let verdict = unknown.map_or(Verdict::Unsat, Verdict::Unknown);
    Ok(Decision { verdict, stats: engine.stats })
}

/// Restricts to the sentence's own variables (absent ones get 0) and
/// re-evaluates the sentence body.
fn finish_model(f: &Formula, model: Model, alpha: &BigInt, beta: &BigInt) -> Result<Model, DriverError> {
    let mut own = BTreeSet::new();
    collect_vars(f, &mut own);
    let out: Model = own.iter().map(|v| (*v, model.get(v).cloned().unwrap_or_default())).collect();
    match eval_formula(&strip_quantifiers(f), &out, alpha, beta) {
        Ok(true) => Ok(out),
        Ok(false) => Err(DriverError::Internal(format!("model {out:?} does not satisfy the sentence"))),
        Err(e) => Err(DriverError::Internal(e.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::BaseTag;
    use crate::textio::parse_formula;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn inst(bases: &[BaseTag], a: &[&[i64]], b: &[i64], c: &[&[i64]], d: &[i64]) -> ProblemOneInstance {
        ProblemOneInstance {
            alpha: BigInt::from(2),
            beta: BigInt::from(3),
            bases: bases.to_vec(),
            a: a.iter().map(|r| v(r)).collect(),
            b: v(b),
            c: c.iter().map(|r| v(r)).collect(),
            d: v(d),
            provenance: vec![],
        }
    }

    fn run(text: &str) -> (Verdict, Symbols) {
        let mut p = parse_formula(text).unwrap();
        let d = decide(&p.formula, &mut p.symbols, &BigInt::from(2), &BigInt::from(3), 100_000).unwrap();
        (d.verdict, p.symbols)
    }

    fn value(m: &Model, syms: &Symbols, name: &str) -> BigInt {
        m[&syms.lookup(name).unwrap()].clone()
    }

    #[test]
    fn problem_one() {
        use BaseTag::{A, B};
        let i = inst(&[A], &[&[1]], &[5], &[], &[]);
        assert!(matches!(solve_problem1(&i, 1000).verdict, Verdict::Sat { witness, .. } if witness == vec![3]));
        let i = inst(&[A, A, B], &[&[1, 0, -1]], &[0], &[&[1, -1, 0]], &[0]);
        match solve_problem1(&i, 1000).verdict {
            Verdict::Sat { witness, .. } => assert!(i.satisfied_by(&witness) && witness[0] == witness[1]),
            other => panic!("{other:?}"),
        }
        let i = inst(&[], &[], &[], &[], &[]);
        assert_eq!(solve_problem1(&i, 10).verdict, Verdict::Sat { model: Model::new(), witness: vec![] });
        let i = inst(&[A, B], &[&[1, -1]], &[-3], &[], &[]);
        assert!(solve_problem1(&i, 10).verdict.is_sat());
        let i = inst(&[A, A], &[&[1, -1], &[-1, 1]], &[-1, -1], &[], &[]);
        assert!(solve_problem1(&i, 10).verdict.is_sat());
        let i = inst(&[A, A], &[&[1, -1], &[-1, 1]], &[0, -1], &[], &[]);
        assert_eq!(solve_problem1(&i, 10).verdict, Verdict::Unsat);
    }

    #[test]
    fn sum_of_two_powers_of_two_above_ten() {
        use BaseTag::{A, B};
        // brute force over exponents ≤ 30
        let mut found = vec![];
        for x in 0..=30u32 {
            for y in 0..=30u32 {
                for z in 0..=30u32 {
                    let (l, r) = (BigInt::from(2).pow(x) + BigInt::from(2).pow(y), BigInt::from(3).pow(z));
                    if l == r && r > BigInt::from(10) {
                        found.push((x, y, z));
                    }
                }
            }
        }
        assert!(found.is_empty());
        let i = inst(&[A, A, B], &[&[0, 0, 1]], &[10], &[&[1, 1, -1]], &[0]);
        let d = solve_problem1(&i, 20_000);
        assert!(matches!(d.verdict, Verdict::Unknown(_)));
        assert!(d.stats.budget_truncated);
    }

    #[test]
    fn decide_examples() {
        let (v, s) = run("exists x y . powA(x) & powB(y) & x = y + 1");
        let Verdict::Sat { model, .. } = v else { panic!() };
        assert_eq!((value(&model, &s, "x"), value(&model, &s, "y")), (BigInt::from(2), BigInt::from(1)));
        assert_eq!(run("exists x . powA(x) & powB(x) & x > 1").0, Verdict::Unsat);
        let (v, s) = run("exists x . powA(x) & x > 5 & x < 9");
        let Verdict::Sat { model, .. } = v else { panic!() };
        assert_eq!(value(&model, &s, "x"), BigInt::from(8));
    }

    #[test]
    fn decide_errors() {
        let mut p = parse_formula("powA(x)").unwrap();
        let e = decide(&p.formula, &mut p.symbols, &BigInt::from(2), &BigInt::from(3), 10).unwrap_err();
        assert_eq!(e.to_string(), "free variables not allowed");
        let mut p = parse_formula("exists x . powA(x)").unwrap();
        assert_eq!(decide(&p.formula, &mut p.symbols, &BigInt::from(1), &BigInt::from(3), 10), Err(DriverError::Domain(BigInt::from(1))));
    }

    #[test]
    fn decide_with_negation_and_integers() {
        let (v, s) = run("exists x z . powA(x) & !powB(x - 1) & x = 2*z + 4 & z > 3");
        let Verdict::Sat { model, .. } = v else { panic!("{v:?}") };
        let x = value(&model, &s, "x");
        assert!(x > BigInt::from(11));
        // 2^a + 1 = 3^b only at 3 and 9
        let (v, _) = run("exists x . powA(x) & powB(x + 1) & x > 8");
        assert!(!v.is_sat());
    }
}
