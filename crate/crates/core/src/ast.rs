//! Formulas over integer linear terms with two power predicates, plus exact
//! evaluation under integer assignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Index into a [`Symbols`] table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

/// Interned variable names. Ids are dense and assigned in first-seen order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Symbols {
    names: Vec<String>,
    index: HashMap<String, Var>,
}

impl Symbols {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn intern(&mut self, name: &str) -> Var {
        if let Some(v) = self.index.get(name) {
            return *v;
        }
        let v = Var(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), v);
        v
    }

    pub fn lookup(&self, name: &str) -> Option<Var> {
        self.index.get(name).copied()
    }

    pub fn name(&self, v: Var) -> &str {
        &self.names[v.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// A name not yet in the table, built from `stem`.
    pub fn fresh(&mut self, stem: &str) -> Var {
        let mut i = self.names.len();
        loop {
            let cand = format!("{stem}{i}");
            if !self.index.contains_key(&cand) {
                return self.intern(&cand);
            }
            i += 1;
        }
    }
}

/// `constant + Σ coeff·var`, never storing zero coefficients.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LinearTerm {
    pub constant: BigInt,
    coeffs: BTreeMap<Var, BigInt>,
}

impl LinearTerm {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: impl Into<BigInt>) -> Self {
        LinearTerm { constant: c.into(), coeffs: BTreeMap::new() }
    }

    pub fn var(v: Var) -> Self {
        Self::scaled_var(BigInt::one(), v)
    }

    pub fn scaled_var(c: impl Into<BigInt>, v: Var) -> Self {
        let mut t = Self::zero();
        t.add_coeff(v, &c.into());
        t
    }

    pub fn coeff(&self, v: Var) -> BigInt {
        self.coeffs.get(&v).cloned().unwrap_or_default()
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (Var, &BigInt)> {
        self.coeffs.iter().map(|(v, c)| (*v, c))
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add_coeff(&mut self, v: Var, c: &BigInt) {
        if c.is_zero() {
            return;
        }
        let e = self.coeffs.entry(v).or_default();
        *e += c;
        if e.is_zero() {
            self.coeffs.remove(&v);
        }
    }

    pub fn add(&self, other: &LinearTerm) -> LinearTerm {
        let mut out = self.clone();
        out.constant += &other.constant;
        for (v, c) in &other.coeffs {
            out.add_coeff(*v, c);
        }
        out
    }

    pub fn sub(&self, other: &LinearTerm) -> LinearTerm {
        self.add(&other.scale(&-BigInt::one()))
    }

    pub fn scale(&self, k: &BigInt) -> LinearTerm {
        if k.is_zero() {
            return LinearTerm::zero();
        }
        LinearTerm {
            constant: &self.constant * k,
            coeffs: self.coeffs.iter().map(|(v, c)| (*v, c * k)).collect(),
        }
    }

    pub fn neg(&self) -> LinearTerm {
        self.scale(&-BigInt::one())
    }

    /// Replace `v` by `t`.
    pub fn substitute(&self, v: Var, t: &LinearTerm) -> LinearTerm {
        let c = self.coeff(v);
        if c.is_zero() {
            return self.clone();
        }
        let mut rest = self.clone();
        rest.coeffs.remove(&v);
        rest.add(&t.scale(&c))
    }

    /// gcd of the variable coefficients (0 for a constant term).
    pub fn content(&self) -> BigInt {
        self.coeffs.values().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> LinearTerm {
        let mut out = LinearTerm::constant(self.constant.clone());
        for (v, c) in &self.coeffs {
            out.add_coeff(f(*v), c);
        }
        out
    }
}

/// Which power predicate: `A` is α^ℕ, `B` is β^ℕ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BaseTag {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rel {
    Gt,
    Eq,
    Lt,
    Ge,
    Le,
    Ne,
}

impl Rel {
    pub fn holds(self, x: &BigInt) -> bool {
        match self {
            Rel::Gt => x.is_positive(),
            Rel::Eq => x.is_zero(),
            Rel::Lt => x.is_negative(),
            Rel::Ge => !x.is_negative(),
            Rel::Le => !x.is_positive(),
            Rel::Ne => !x.is_zero(),
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Rel::Gt => ">",
            Rel::Eq => "=",
            Rel::Lt => "<",
            Rel::Ge => ">=",
            Rel::Le => "<=",
            Rel::Ne => "!=",
        }
    }
}

/// `term rel 0`, or `term ∈ γ^ℕ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Atom {
    Cmp(LinearTerm, Rel),
    Power(LinearTerm, BaseTag),
}

impl Atom {
    pub fn term(&self) -> &LinearTerm {
        match self {
            Atom::Cmp(t, _) | Atom::Power(t, _) => t,
        }
    }
}

/// `And([])` is truth and `Or([])` is falsity.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(Atom),
    And(Vec<Formula>),
    Or(Vec<Formula>),
    Not(Box<Formula>),
    Exists(Vec<Var>, Box<Formula>),
    Forall(Vec<Var>, Box<Formula>),
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::And(vec![])
    }

    pub fn ff() -> Formula {
        Formula::Or(vec![])
    }

    pub fn cmp(t: LinearTerm, rel: Rel) -> Formula {
        Formula::Atom(Atom::Cmp(t, rel))
    }

    pub fn power(t: LinearTerm, tag: BaseTag) -> Formula {
        Formula::Atom(Atom::Power(t, tag))
    }

    /// `lhs rel rhs`.
    pub fn rel(lhs: LinearTerm, rel: Rel, rhs: LinearTerm) -> Formula {
        Formula::cmp(lhs.sub(&rhs), rel)
    }

    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Or(vec![Formula::not(a), b])
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Atom(a) => {
                for v in a.term().vars() {
                    if !bound.contains(&v) {
                        out.insert(v);
                    }
                }
            }
            Formula::And(fs) | Formula::Or(fs) => {
                for f in fs {
                    f.collect_free(bound, out);
                }
            }
            Formula::Not(f) => f.collect_free(bound, out),
            Formula::Exists(vs, f) | Formula::Forall(vs, f) => {
                let n = bound.len();
                bound.extend(vs.iter().copied());
                f.collect_free(bound, out);
                bound.truncate(n);
            }
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Atom(_) => true,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().all(Formula::is_quantifier_free),
            Formula::Not(f) => f.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    pub fn map_vars(&self, f: &impl Fn(Var) -> Var) -> Formula {
        match self {
            Formula::Atom(Atom::Cmp(t, r)) => Formula::cmp(t.map_vars(f), *r),
            Formula::Atom(Atom::Power(t, g)) => Formula::power(t.map_vars(f), *g),
            Formula::And(fs) => Formula::And(fs.iter().map(|g| g.map_vars(f)).collect()),
            Formula::Or(fs) => Formula::Or(fs.iter().map(|g| g.map_vars(f)).collect()),
            Formula::Not(g) => Formula::not(g.map_vars(f)),
            Formula::Exists(vs, g) => {
                Formula::Exists(vs.iter().map(|v| f(*v)).collect(), Box::new(g.map_vars(f)))
            }
            Formula::Forall(vs, g) => {
                Formula::Forall(vs.iter().map(|v| f(*v)).collect(), Box::new(g.map_vars(f)))
            }
        }
    }
}

/// Assignment of integer values to variables.
pub type Model = BTreeMap<Var, BigInt>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unbound variable {0}")]
    Unbound(String),
    #[error("quantifier-free expected")]
    Quantifier,
    #[error("power base must exceed 1, got {0}")]
    BadBase(BigInt),
}

fn unbound(v: Var, syms: Option<&Symbols>) -> EvalError {
    match syms {
        Some(s) if (v.0 as usize) < s.len() => EvalError::Unbound(s.name(v).to_string()),
        _ => EvalError::Unbound(format!("#{}", v.0)),
    }
}

pub fn eval_term(t: &LinearTerm, m: &Model) -> Result<BigInt, EvalError> {
    eval_term_named(t, m, None)
}

pub fn eval_term_named(
    t: &LinearTerm,
    m: &Model,
    syms: Option<&Symbols>,
) -> Result<BigInt, EvalError> {
    let mut acc = t.constant.clone();
    for (v, c) in t.coeffs() {
        let x = m.get(&v).ok_or_else(|| unbound(v, syms))?;
        acc += c * x;
    }
    Ok(acc)
}

/// Exact membership of `x` in `{γ^n : n ∈ ℕ}` by repeated division.
pub fn is_power_of(x: &BigInt, gamma: &BigInt) -> Option<u64> {
    if !x.is_positive() || gamma <= &BigInt::one() {
        return None;
    }
    let mut x = x.clone();
    let mut n = 0u64;
    while !x.is_one() {
        let (q, r) = x.div_rem(gamma);
        if !r.is_zero() {
            return None;
        }
        x = q;
        n += 1;
    }
    Some(n)
}

pub fn eval_formula(
    f: &Formula,
    m: &Model,
    alpha: &BigInt,
    beta: &BigInt,
) -> Result<bool, EvalError> {
    for g in [alpha, beta] {
        if g <= &BigInt::one() {
            return Err(EvalError::BadBase(g.clone()));
        }
    }
    eval_qf(f, m, alpha, beta)
}

fn eval_qf(f: &Formula, m: &Model, alpha: &BigInt, beta: &BigInt) -> Result<bool, EvalError> {
    Ok(match f {
        Formula::Atom(Atom::Cmp(t, r)) => r.holds(&eval_term(t, m)?),
        Formula::Atom(Atom::Power(t, g)) => {
            let base = if *g == BaseTag::A { alpha } else { beta };
            is_power_of(&eval_term(t, m)?, base).is_some()
        }
        Formula::And(fs) => {
            for g in fs {
                if !eval_qf(g, m, alpha, beta)? {
                    return Ok(false);
                }
            }
            true
        }
        Formula::Or(fs) => {
            for g in fs {
                if eval_qf(g, m, alpha, beta)? {
                    return Ok(true);
                }
            }
            false
        }
        Formula::Not(g) => !eval_qf(g, m, alpha, beta)?,
        Formula::Exists(..) | Formula::Forall(..) => return Err(EvalError::Quantifier),
    })
}

impl fmt::Display for BaseTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BaseTag::A => "A",
            BaseTag::B => "B",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    #[test]
    fn eval_term_examples() {
        let (x, y) = (Var(0), Var(1));
        let t = LinearTerm::scaled_var(3, x).sub(&LinearTerm::var(y)).add(&LinearTerm::constant(2));
        let m: Model = [(x, bi(4)), (y, bi(5))].into_iter().collect();
        assert_eq!(eval_term(&t, &m).unwrap(), bi(9));
        assert_eq!(eval_term(&LinearTerm::zero(), &Model::new()).unwrap(), bi(0));

        let (a, b, c) = (Var(0), Var(1), Var(2));
        let t = LinearTerm::scaled_var(15, a)
            .add(&LinearTerm::scaled_var(-5, b))
            .add(&LinearTerm::var(c))
            .add(&LinearTerm::constant(-8));
        let m: Model = [(a, bi(1)), (b, bi(27)), (c, bi(128))].into_iter().collect();
        assert_eq!(eval_term(&t, &m).unwrap(), bi(0));
    }

    #[test]
    fn unbound_variable_is_named() {
        let mut s = Symbols::new();
        let x = s.intern("x");
        let err = eval_term_named(&LinearTerm::var(x), &Model::new(), Some(&s)).unwrap_err();
        assert_eq!(err.to_string(), "unbound variable x");
    }

    #[test]
    fn power_membership() {
        let x = Var(0);
        let one: Model = [(x, bi(1))].into_iter().collect();
        let f = Formula::power(LinearTerm::var(x), BaseTag::A);
        assert!(eval_formula(&f, &one, &bi(2), &bi(3)).unwrap());

        let six: Model = [(x, bi(6))].into_iter().collect();
        let g = Formula::And(vec![
            Formula::power(LinearTerm::var(x), BaseTag::A),
            Formula::power(LinearTerm::var(x), BaseTag::B),
            Formula::cmp(LinearTerm::var(x).sub(&LinearTerm::constant(1)), Rel::Gt),
        ]);
        assert!(!eval_formula(&g, &six, &bi(2), &bi(3)).unwrap());

        for v in [0, -1, -8] {
            let m: Model = [(x, bi(v))].into_iter().collect();
            assert!(!eval_formula(&f, &m, &bi(2), &bi(3)).unwrap());
        }
    }

    #[test]
    fn shifted_powers() {
        let (x, y) = (Var(0), Var(1));
        let f = Formula::And(vec![
            Formula::rel(LinearTerm::var(x), Rel::Eq, LinearTerm::var(y).add(&LinearTerm::constant(1))),
            Formula::power(LinearTerm::var(x), BaseTag::A),
            Formula::power(LinearTerm::var(y), BaseTag::B),
        ]);
        let m: Model = [(x, bi(4)), (y, bi(3))].into_iter().collect();
        assert!(eval_formula(&f, &m, &bi(2), &bi(3)).unwrap());
    }

    #[test]
    fn quantifier_rejected() {
        let f = Formula::Exists(vec![Var(0)], Box::new(Formula::tt()));
        assert_eq!(
            eval_formula(&f, &Model::new(), &bi(2), &bi(3)).unwrap_err(),
            EvalError::Quantifier
        );
    }
}
