//! From congruence-and-comparison systems over power variables to power-system
//! instances `A z > b ∧ C z = d` over `z_i ∈ {α', β'}`.
//!
//! Each power variable `y = γ^n` either has a fixed exponent below the
//! preperiod of `γ^n mod D`, or runs through a progression `n = a + D_γ·m`.
//! Progressions are rebased to `γ' = γ^{D_γ}` with the factor `γ^a` folded
//! into the coefficient column.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::ast::{BaseTag, LinearTerm, Model, Var};
use crate::linarith::{Constraint, GuardedSystem};
use crate::numth::multiplicative_relation;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Dependence {
    Independent,
    /// α^a = β^b = γ with (a, b) minimal.
    Dependent { a: u64, b: u64, gamma: BigInt },
}

pub fn mult_dependence(alpha: &BigInt, beta: &BigInt) -> Dependence {
    match multiplicative_relation(alpha, beta).expect("bases exceed 1") {
        None => Dependence::Independent,
        Some((a, b)) => Dependence::Dependent { a, b, gamma: num_traits::pow(alpha.clone(), a as usize) },
    }
}

/// `γ^n mod D` for `n < preperiod + period`; periodic from `preperiod` on.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResiduePeriod {
    pub gamma: BigInt,
    pub modulus: BigInt,
    pub preperiod: u64,
    pub period: u64,
    pub table: Vec<BigInt>,
}

impl ResiduePeriod {
    pub fn residue(&self, n: u64) -> &BigInt {
        let idx = if n < self.preperiod {
            n
        } else {
            self.preperiod + (n - self.preperiod) % self.period
        };
        &self.table[idx as usize]
    }
}

pub fn residue_period(gamma: &BigInt, modulus: &BigInt) -> ResiduePeriod {
    let mut first: HashMap<BigInt, u64> = HashMap::new();
    let mut table = Vec::new();
    let mut x = BigInt::one().mod_floor(modulus);
    let mut n = 0u64;
    loop {
        if let Some(&i) = first.get(&x) {
            return ResiduePeriod {
                gamma: gamma.clone(),
                modulus: modulus.clone(),
                preperiod: i,
                period: n - i,
                table,
            };
        }
        first.insert(x.clone(), n);
        table.push(x.clone());
        x = (&x * gamma).mod_floor(modulus);
        n += 1;
    }
}

/// Original exponent of a power variable in terms of instance columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Fixed(u64),
    /// `offset + step·m_column`
    Progression { column: usize, offset: u64, step: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerSource {
    pub var: Var,
    pub base: BigInt,
    pub exponent: Exponent,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProblemOneInstance {
    pub alpha: BigInt,
    pub beta: BigInt,
    pub bases: Vec<BaseTag>,
    pub a: Vec<Vec<BigInt>>,
    pub b: Vec<BigInt>,
    pub c: Vec<Vec<BigInt>>,
    pub d: Vec<BigInt>,
    pub provenance: Vec<PowerSource>,
}

impl ProblemOneInstance {
    pub fn arity(&self) -> usize {
        self.bases.len()
    }

    pub fn base_value(&self, col: usize) -> &BigInt {
        match self.bases[col] {
            BaseTag::A => &self.alpha,
            BaseTag::B => &self.beta,
        }
    }

    pub fn powers(&self, exps: &[u64]) -> Vec<BigInt> {
        (0..self.arity()).map(|i| num_traits::pow(self.base_value(i).clone(), exps[i] as usize)).collect()
    }

    /// Exact check of `A z > b ∧ C z = d`.
    pub fn satisfied_by(&self, exps: &[u64]) -> bool {
        let z = self.powers(exps);
        let dot = |row: &[BigInt]| row.iter().zip(&z).map(|(c, v)| c * v).sum::<BigInt>();
        self.a.iter().zip(&self.b).all(|(row, b)| &dot(row) > b)
            && self.c.iter().zip(&self.d).all(|(row, d)| &dot(row) == d)
    }

    /// Values of the original power variables for column exponents `exps`.
    pub fn lift(&self, exps: &[u64]) -> Model {
        self.provenance
            .iter()
            .map(|p| {
                let n = match p.exponent {
                    Exponent::Fixed(n) => n,
                    Exponent::Progression { column, offset, step } => offset + step * exps[column],
                };
                (p.var, num_traits::pow(p.base.clone(), n as usize))
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
enum Choice {
    Fixed(u64),
    From(u64),
}

struct Plan {
    vars: Vec<(Var, BaseTag)>,
    periods: [ResiduePeriod; 2],
    steps: [u64; 2],
}

impl Plan {
    fn tag_index(t: BaseTag) -> usize {
        usize::from(t == BaseTag::B)
    }

    fn options(&self, t: BaseTag) -> Vec<Choice> {
        let k = Self::tag_index(t);
        let rho = self.periods[k].preperiod;
        (0..rho).map(Choice::Fixed).chain((rho..rho + self.steps[k]).map(Choice::From)).collect()
    }

    fn residue(&self, t: BaseTag, c: &Choice) -> &BigInt {
        let p = &self.periods[Self::tag_index(t)];
        match c {
            Choice::Fixed(n) | Choice::From(n) => p.residue(*n),
        }
    }
}

/// Splits `gs` into power-system instances whose union is equisatisfiable with it.
pub fn unfold_to_problem1(
    gs: &GuardedSystem,
    tags: &BTreeMap<Var, BaseTag>,
    alpha: &BigInt,
    beta: &BigInt,
) -> Vec<ProblemOneInstance> {
    let modulus = gs.congruences().fold(BigInt::one(), |acc, (m, _)| acc.lcm(m));
    let periods = [residue_period(alpha, &modulus), residue_period(beta, &modulus)];
    let (pa, pb) = (periods[0].period, periods[1].period);
    let dep = mult_dependence(alpha, beta);
    let steps = match &dep {
        Dependence::Independent => [pa, pb],
        Dependence::Dependent { a, b, .. } => {
            let t = (pa / a.gcd(&pa)).lcm(&(pb / b.gcd(&pb)));
            [a * t, b * t]
        }
    };
    let plan = Plan { vars: tags.iter().map(|(v, t)| (*v, *t)).collect(), periods, steps };
    let congruences: Vec<(&BigInt, &LinearTerm)> = gs.congruences().collect();
    let mut out = Vec::new();
    let mut chosen: Vec<Choice> = Vec::new();
    enumerate(&plan, &congruences, &mut chosen, &mut |choices| {
        if let Some(inst) = build_instance(gs, &plan, &dep, choices, alpha, beta) {
            out.push(inst);
        }
    });
    out
}

fn enumerate(
    plan: &Plan,
    congruences: &[(&BigInt, &LinearTerm)],
    chosen: &mut Vec<Choice>,
    emit: &mut dyn FnMut(&[Choice]),
) {
    let i = chosen.len();
    if i == plan.vars.len() {
        emit(chosen);
        return;
    }
    let (var, tag) = plan.vars[i];
    for c in plan.options(tag) {
        chosen.push(c);
        let assigned: BTreeMap<Var, usize> =
            plan.vars[..=i].iter().enumerate().map(|(j, (v, _))| (*v, j)).collect();
        let ok = congruences.iter().all(|(m, t)| {
            // check once every variable of the congruence has a choice
            if !t.vars().any(|v| v == var) || !t.vars().all(|v| assigned.contains_key(&v)) {
                return true;
            }
            let mut s = t.constant.clone();
            for (v, a) in t.coeffs() {
                let j = assigned[&v];
                s += a * plan.residue(plan.vars[j].1, &chosen[j]);
            }
            s.mod_floor(m).is_zero()
        });
        if ok {
            enumerate(plan, congruences, chosen, emit);
        }
        chosen.pop();
    }
}

fn build_instance(
    gs: &GuardedSystem,
    plan: &Plan,
    dep: &Dependence,
    choices: &[Choice],
    alpha: &BigInt,
    beta: &BigInt,
) -> Option<ProblemOneInstance> {
    let single = matches!(dep, Dependence::Dependent { .. });
    let mut provenance = Vec::new();
    let mut bases = Vec::new();
    // per var: constant value or (column, factor)
    let mut role: BTreeMap<Var, Result<BigInt, (usize, BigInt)>> = BTreeMap::new();
    for ((var, tag), c) in plan.vars.iter().zip(choices) {
        let base = if *tag == BaseTag::A { alpha } else { beta };
        match c {
            Choice::Fixed(n) => {
                provenance.push(PowerSource { var: *var, base: base.clone(), exponent: Exponent::Fixed(*n) });
                role.insert(*var, Ok(num_traits::pow(base.clone(), *n as usize)));
            }
            Choice::From(a0) => {
                let column = bases.len();
                bases.push(if single { BaseTag::A } else { *tag });
                let step = plan.steps[Plan::tag_index(*tag)];
                provenance.push(PowerSource {
                    var: *var,
                    base: base.clone(),
                    exponent: Exponent::Progression { column, offset: *a0, step },
                });
                role.insert(*var, Err((column, num_traits::pow(base.clone(), *a0 as usize))));
            }
        }
    }
    let alpha_r = num_traits::pow(alpha.clone(), plan.steps[0] as usize);
    let beta_r = if single { alpha_r.clone() } else { num_traits::pow(beta.clone(), plan.steps[1] as usize) };
    let l = bases.len();
    let (mut a, mut b, mut c, mut d) = (vec![], vec![], vec![], vec![]);
    for con in &gs.constraints {
        let t = con.term();
        let mut row = vec![BigInt::zero(); l];
        let mut k = t.constant.clone();
        for (v, coef) in t.coeffs() {
            match role.get(&v).expect("constraint over power variables") {
                Ok(value) => k += coef * value,
                Err((col, factor)) => row[*col] += coef * factor,
            }
        }
        let constant_row = row.iter().all(Zero::is_zero);
        match con {
            Constraint::Gt(_) => {
                if constant_row {
                    if k <= BigInt::zero() {
                        return None;
                    }
                } else {
                    a.push(row);
                    b.push(-k);
                }
            }
            Constraint::Eq(_) => {
                if constant_row {
                    if !k.is_zero() {
                        return None;
                    }
                } else {
                    c.push(row);
                    d.push(-k);
                }
            }
            Constraint::Div(..) => {}
        }
    }
    Some(ProblemOneInstance { alpha: alpha_r, beta: beta_r, bases, a, b, c, d, provenance })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::{Atom, Rel};
    use crate::linarith::eliminate_integer_vars;
    use std::collections::BTreeSet;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn dependence() {
        assert_eq!(mult_dependence(&bi(2), &bi(3)), Dependence::Independent);
        assert_eq!(mult_dependence(&bi(4), &bi(8)), Dependence::Dependent { a: 3, b: 2, gamma: bi(64) });
        assert_eq!(mult_dependence(&bi(6), &bi(12)), Dependence::Independent);
    }

    #[test]
    fn periods() {
        let p = residue_period(&bi(2), &bi(12));
        assert_eq!((p.preperiod, p.period), (2, 2));
        assert_eq!(p.table, vec![bi(1), bi(2), bi(4), bi(8)]);
        let p = residue_period(&bi(2), &bi(7));
        assert_eq!((p.preperiod, p.period), (0, 3));
        assert_eq!(p.table, vec![bi(1), bi(2), bi(4)]);
        let p = residue_period(&bi(5), &bi(1));
        assert_eq!((p.preperiod, p.period), (0, 1));
        assert_eq!(p.table, vec![bi(0)]);
    }

    fn system(atoms: Vec<Atom>) -> GuardedSystem {
        let mut gs = eliminate_integer_vars(&atoms, &BTreeSet::new());
        assert_eq!(gs.len(), 1);
        gs.pop().unwrap()
    }

    fn congruence(y: Var, m: i64, r: i64, k: Var) -> Vec<Atom> {
        // y = m*k + r with k eliminated
        vec![Atom::Cmp(
            LinearTerm::var(y).sub(&LinearTerm::scaled_var(m, k)).sub(&LinearTerm::constant(r)),
            Rel::Eq,
        )]
    }

    fn unfold(y: Var, tag: BaseTag, m: i64, r: i64) -> Vec<ProblemOneInstance> {
        let k = Var(99);
        let gs = eliminate_integer_vars(&congruence(y, m, r, k), &[k].into_iter().collect());
        let tags: BTreeMap<Var, BaseTag> = [(y, tag)].into_iter().collect();
        gs.iter().flat_map(|g| unfold_to_problem1(g, &tags, &bi(2), &bi(3))).collect()
    }

    #[test]
    fn unfold_examples() {
        let y = Var(0);
        let insts = unfold(y, BaseTag::A, 3, 1);
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].alpha, bi(4));
        assert_eq!(insts[0].provenance[0].exponent, Exponent::Progression { column: 0, offset: 0, step: 2 });

        assert!(unfold(y, BaseTag::B, 2, 0).is_empty());

        let insts = unfold(y, BaseTag::A, 8, 4);
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].arity(), 0);
        assert_eq!(insts[0].provenance[0].exponent, Exponent::Fixed(2));
        assert_eq!(insts[0].lift(&[])[&y], bi(4));
    }

    #[test]
    fn comparison_rows() {
        let (x, z) = (Var(0), Var(1));
        let gs = system(vec![
            Atom::Cmp(LinearTerm::var(x).sub(&LinearTerm::var(z)).sub(&LinearTerm::constant(5)), Rel::Gt),
        ]);
        let tags: BTreeMap<Var, BaseTag> = [(x, BaseTag::A), (z, BaseTag::B)].into_iter().collect();
        let insts = unfold_to_problem1(&gs, &tags, &bi(2), &bi(3));
        assert_eq!(insts.len(), 1);
        assert_eq!(insts[0].a, vec![vec![bi(1), bi(-1)]]);
        assert_eq!(insts[0].b, vec![bi(5)]);
        assert!(insts[0].satisfied_by(&[4, 1]));
        assert!(!insts[0].satisfied_by(&[1, 0]));
    }

    #[test]
    fn dependent_bases_share_one_value() {
        let (x, z) = (Var(0), Var(1));
        let gs = system(vec![Atom::Cmp(LinearTerm::var(x).sub(&LinearTerm::var(z)), Rel::Eq)]);
        let tags: BTreeMap<Var, BaseTag> = [(x, BaseTag::A), (z, BaseTag::B)].into_iter().collect();
        let insts = unfold_to_problem1(&gs, &tags, &bi(4), &bi(8));
        assert_eq!(insts.len(), 6);
        for inst in &insts {
            assert_eq!(inst.alpha, bi(64));
            assert_eq!(inst.beta, bi(64));
        }
    }
}
