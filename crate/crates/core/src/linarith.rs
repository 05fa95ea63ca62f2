//! Negation removal, power tagging, DNF, and Cooper-style elimination of the
//! integer variables of a conjunction, leaving congruence and comparison
//! constraints over the power variables.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::ast::{eval_term, Atom, BaseTag, Formula, LinearTerm, Model, Rel, Symbols, Var};

/// Removes `Not` and `≠`. A negated power atom `¬(t ∈ γ^ℕ)` becomes
/// `t < 1 ∨ ∃u (u ∈ γ^ℕ ∧ u < t ∧ t < γu)` with a fresh `u`.
pub fn normalize_negations(f: &Formula, syms: &mut Symbols, alpha: &BigInt, beta: &BigInt) -> Formula {
    push(f, true, syms, alpha, beta)
}

fn cmp_or(t: &LinearTerm, rels: &[Rel]) -> Formula {
    let mut parts: Vec<Formula> = rels.iter().map(|r| Formula::cmp(t.clone(), *r)).collect();
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        Formula::Or(parts)
    }
}

fn push(f: &Formula, pos: bool, syms: &mut Symbols, alpha: &BigInt, beta: &BigInt) -> Formula {
    match f {
        Formula::Atom(Atom::Cmp(t, r)) => {
            let rels: &[Rel] = match (r, pos) {
                (Rel::Ne, true) | (Rel::Eq, false) => &[Rel::Gt, Rel::Lt],
                (Rel::Gt, false) => &[Rel::Lt, Rel::Eq],
                (Rel::Lt, false) => &[Rel::Gt, Rel::Eq],
                (Rel::Ge, false) => &[Rel::Lt],
                (Rel::Le, false) => &[Rel::Gt],
                (Rel::Ne, false) => &[Rel::Eq],
                (r, true) => return Formula::cmp(t.clone(), *r),
            };
            cmp_or(t, rels)
        }
        Formula::Atom(Atom::Power(t, g)) => {
            if pos {
                return f.clone();
            }
            let gamma = if *g == BaseTag::A { alpha } else { beta };
            let u = syms.fresh("u");
            let uu = LinearTerm::var(u);
            Formula::Or(vec![
                Formula::rel(t.clone(), Rel::Lt, LinearTerm::constant(1)),
                Formula::Exists(
                    vec![u],
                    Box::new(Formula::And(vec![
                        Formula::power(uu.clone(), *g),
                        Formula::rel(uu.clone(), Rel::Lt, t.clone()),
                        Formula::rel(t.clone(), Rel::Lt, uu.scale(gamma)),
                    ])),
                ),
            ])
        }
        Formula::And(fs) | Formula::Or(fs) => {
            let parts = fs.iter().map(|g| push(g, pos, syms, alpha, beta)).collect();
            if matches!(f, Formula::And(_)) == pos {
                Formula::And(parts)
            } else {
                Formula::Or(parts)
            }
        }
        Formula::Not(g) => push(g, !pos, syms, alpha, beta),
        Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
            let body = Box::new(push(g, pos, syms, alpha, beta));
            if matches!(f, Formula::Exists(..)) == pos {
                Formula::Exists(vs.clone(), body)
            } else {
                Formula::Forall(vs.clone(), body)
            }
        }
    }
}

/// Disjunctive normal form in which every power atom applies to a bare
/// variable carrying a single base tag.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PowerTaggedFormula {
    pub disjuncts: Vec<Vec<Atom>>,
    pub power_vars: BTreeMap<Var, BaseTag>,
}

impl PowerTaggedFormula {
    /// Power variables constrained by a power atom in disjunct `i`.
    pub fn disjunct_power_vars(&self, i: usize) -> BTreeMap<Var, BaseTag> {
        self.disjuncts[i]
            .iter()
            .filter_map(|a| match a {
                Atom::Power(t, g) => t.vars().next().map(|v| (v, *g)),
                Atom::Cmp(..) => None,
            })
            .collect()
    }
}

fn bare_var(t: &LinearTerm) -> Option<Var> {
    let mut it = t.coeffs();
    match (it.next(), it.next()) {
        (Some((v, c)), None) if c.is_one() && t.constant.is_zero() => Some(v),
        _ => None,
    }
}

fn tag(f: &Formula, syms: &mut Symbols, tags: &mut BTreeMap<Var, BaseTag>) -> Formula {
    match f {
        Formula::Atom(Atom::Power(t, g)) => {
            if let Some(x) = bare_var(t) {
                if *tags.entry(x).or_insert(*g) == *g {
                    return f.clone();
                }
            }
            let y = syms.fresh("y");
            tags.insert(y, *g);
            Formula::And(vec![
                Formula::rel(LinearTerm::var(y), Rel::Eq, t.clone()),
                Formula::power(LinearTerm::var(y), *g),
            ])
        }
        Formula::Atom(_) => f.clone(),
        Formula::And(fs) => Formula::And(fs.iter().map(|g| tag(g, syms, tags)).collect()),
        Formula::Or(fs) => Formula::Or(fs.iter().map(|g| tag(g, syms, tags)).collect()),
        Formula::Not(g) => Formula::not(tag(g, syms, tags)),
        Formula::Exists(vs, g) => Formula::Exists(vs.clone(), Box::new(tag(g, syms, tags))),
        Formula::Forall(vs, g) => Formula::Forall(vs.clone(), Box::new(tag(g, syms, tags))),
    }
}

fn dnf(f: &Formula) -> Vec<Vec<Atom>> {
    match f {
        Formula::Atom(Atom::Cmp(t, Rel::Ne)) => {
            vec![vec![Atom::Cmp(t.clone(), Rel::Gt)], vec![Atom::Cmp(t.clone(), Rel::Lt)]]
        }
        Formula::Atom(a) => vec![vec![a.clone()]],
        Formula::Or(fs) => fs.iter().flat_map(dnf).collect(),
        Formula::And(fs) => {
            let mut acc: Vec<Vec<Atom>> = vec![vec![]];
            for g in fs {
                let d = dnf(g);
                let mut next = Vec::with_capacity(acc.len() * d.len());
                for left in &acc {
                    for right in &d {
                        let mut c = left.clone();
                        c.extend(right.iter().cloned());
                        next.push(c);
                    }
                }
                acc = next;
            }
            acc
        }
        // inner quantifiers come from negation removal and bind fresh names
        Formula::Exists(_, g) => dnf(g),
        Formula::Not(_) | Formula::Forall(..) => panic!("negation-free existential formula expected"),
    }
}

/// Expects a formula without `Not` and `Forall`.
pub fn to_power_tagged_dnf(f: &Formula, syms: &mut Symbols) -> PowerTaggedFormula {
    let mut tags = BTreeMap::new();
    let tagged = tag(f, syms, &mut tags);
    let mut disjuncts = Vec::new();
    let mut seen = BTreeSet::new();
    for mut d in dnf(&tagged) {
        d.dedup();
        let key = format!("{d:?}");
        if seen.insert(key) {
            disjuncts.push(d);
        }
    }
    PowerTaggedFormula { disjuncts, power_vars: tags }
}

/// `t > 0`, `t = 0`, or `m | t`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    Gt(LinearTerm),
    Eq(LinearTerm),
    Div(BigInt, LinearTerm),
}

impl Constraint {
    pub fn term(&self) -> &LinearTerm {
        match self {
            Constraint::Gt(t) | Constraint::Eq(t) | Constraint::Div(_, t) => t,
        }
    }

    fn with_term(&self, t: LinearTerm) -> Constraint {
        match self {
            Constraint::Gt(_) => Constraint::Gt(t),
            Constraint::Eq(_) => Constraint::Eq(t),
            Constraint::Div(m, _) => Constraint::Div(m.clone(), t),
        }
    }

    pub fn holds_at(&self, value: &BigInt) -> bool {
        match self {
            Constraint::Gt(_) => value.is_positive(),
            Constraint::Eq(_) => value.is_zero(),
            Constraint::Div(m, _) => value.mod_floor(m).is_zero(),
        }
    }

    pub fn holds(&self, m: &Model) -> Option<bool> {
        eval_term(self.term(), m).ok().map(|v| self.holds_at(&v))
    }

    pub fn from_atom(a: &Atom) -> Vec<Constraint> {
        let one = LinearTerm::constant(1);
        match a {
            Atom::Cmp(t, r) => match r {
                Rel::Gt => vec![Constraint::Gt(t.clone())],
                Rel::Eq => vec![Constraint::Eq(t.clone())],
                Rel::Lt => vec![Constraint::Gt(t.neg())],
                Rel::Ge => vec![Constraint::Gt(t.add(&one))],
                Rel::Le => vec![Constraint::Gt(t.neg().add(&one))],
                Rel::Ne => panic!("≠ must be split before conversion"),
            },
            Atom::Power(..) => vec![],
        }
    }
}

/// None: unsatisfiable; Some(None): trivially true.
fn simplify(c: Constraint) -> Option<Option<Constraint>> {
    let t = c.term();
    match &c {
        Constraint::Gt(_) => {
            if t.is_constant() {
                return t.constant.is_positive().then_some(None);
            }
            let g = t.content();
            if g.is_one() {
                return Some(Some(c));
            }
            let mut out = LinearTerm::constant(-(-&t.constant).div_floor(&g));
            for (v, a) in t.coeffs() {
                out.add_coeff(v, &(a / &g));
            }
            Some(Some(Constraint::Gt(out)))
        }
        Constraint::Eq(_) => {
            if t.is_constant() {
                return t.constant.is_zero().then_some(None);
            }
            let g = t.content();
            if !t.constant.is_multiple_of(&g) {
                return None;
            }
            let lead_neg = t.coeffs().next().is_some_and(|(_, a)| a.is_negative());
            let g = if lead_neg { -g } else { g };
            let mut out = LinearTerm::constant(&t.constant / &g);
            for (v, a) in t.coeffs() {
                out.add_coeff(v, &(a / &g));
            }
            Some(Some(Constraint::Eq(out)))
        }
        Constraint::Div(m, _) => {
            let m = m.abs();
            if m.is_one() {
                return Some(None);
            }
            let mut out = LinearTerm::constant(t.constant.mod_floor(&m));
            for (v, a) in t.coeffs() {
                out.add_coeff(v, &a.mod_floor(&m));
            }
            if out.is_constant() {
                return out.constant.is_zero().then_some(None);
            }
            let g = out.content().gcd(&out.constant).gcd(&m);
            if !g.is_one() {
                out = LinearTerm::constant(&out.constant / &g).add(&{
                    let mut s = LinearTerm::zero();
                    for (v, a) in out.coeffs() {
                        s.add_coeff(v, &(a / &g));
                    }
                    s
                });
                let m2 = &m / &g;
                if m2.is_one() {
                    return Some(None);
                }
                return Some(Some(Constraint::Div(m2, out)));
            }
            Some(Some(Constraint::Div(m, out)))
        }
    }
}

fn simplify_all(cs: impl IntoIterator<Item = Constraint>) -> Option<BTreeSet<Constraint>> {
    let mut out = BTreeSet::new();
    for c in cs {
        match simplify(c)? {
            Some(c) => {
                out.insert(c);
            }
            None => {}
        }
    }
    Some(out)
}

/// Conjunction of congruences and comparisons over the remaining variables,
/// plus what is needed to recover the eliminated ones.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardedSystem {
    pub constraints: Vec<Constraint>,
    trail: Vec<(Var, Vec<Constraint>)>,
}

impl GuardedSystem {
    pub fn holds(&self, m: &Model) -> bool {
        self.constraints.iter().all(|c| c.holds(m) == Some(true))
    }

    pub fn congruences(&self) -> impl Iterator<Item = (&BigInt, &LinearTerm)> {
        self.constraints.iter().filter_map(|c| match c {
            Constraint::Div(m, t) => Some((m, t)),
            _ => None,
        })
    }

    pub fn eliminated(&self) -> impl Iterator<Item = Var> + '_ {
        self.trail.iter().map(|(v, _)| *v)
    }

    /// Extends a model of `constraints` to the eliminated variables.
    pub fn back_substitute(&self, m: &mut Model) -> Option<()> {
        for (x, cs) in self.trail.iter().rev() {
            let value = solve_single(*x, cs, m)?;
            m.insert(*x, value);
        }
        Some(())
    }
}

/// Smallest-magnitude-first search for x satisfying `cs` given the other values.
fn solve_single(x: Var, cs: &[Constraint], m: &Model) -> Option<BigInt> {
    let mut lo: Option<BigInt> = None;
    let mut hi: Option<BigInt> = None;
    let mut fixed: Option<BigInt> = None;
    let mut period = BigInt::one();
    let mut rest = m.clone();
    rest.insert(x, BigInt::zero());
    for c in cs {
        let a = c.term().coeff(x);
        let k = eval_term(c.term(), &rest).ok()?;
        match c {
            Constraint::Eq(_) => {
                if a.is_zero() {
                    if !k.is_zero() {
                        return None;
                    }
                } else {
                    if !k.is_multiple_of(&a) {
                        return None;
                    }
                    fixed = Some(-k / &a);
                }
            }
            Constraint::Gt(_) => {
                if a.is_positive() {
                    let b: BigInt = (-&k).div_floor(&a) + 1;
                    lo = Some(lo.map_or(b.clone(), |l| l.max(b)));
                } else if a.is_negative() {
                    let b: BigInt = Integer::div_ceil(&k, &-&a) - 1;
                    hi = Some(hi.map_or(b.clone(), |h| h.min(b)));
                } else if !k.is_positive() {
                    return None;
                }
            }
            Constraint::Div(md, _) => period = period.lcm(md),
        }
    }
    let check = |v: &BigInt| {
        let mut mm = m.clone();
        mm.insert(x, v.clone());
        cs.iter().all(|c| c.holds(&mm) == Some(true))
    };
    if let Some(v) = fixed {
        return check(&v).then_some(v);
    }
    let start = match (&lo, &hi) {
        (Some(l), _) => l.clone(),
        (None, Some(h)) => h - &period + 1,
        (None, None) => BigInt::zero(),
    };
    let mut v = start;
    let mut steps = BigInt::zero();
    while steps < period {
        if hi.as_ref().is_some_and(|h| &v > h) {
            return None;
        }
        if check(&v) {
            return Some(v);
        }
        v += 1;
        steps += 1;
    }
    None
}

fn mentions(c: &Constraint, x: Var) -> bool {
    !c.term().coeff(x).is_zero()
}

/// Cost estimate for eliminating x: 0 with an equality, else branch count.
fn elim_cost(cs: &BTreeSet<Constraint>, x: Var) -> BigInt {
    let mut lower = 0u64;
    let mut upper = 0u64;
    let mut l = BigInt::one();
    let mut delta = BigInt::one();
    for c in cs.iter().filter(|c| mentions(c, x)) {
        let a = c.term().coeff(x);
        match c {
            Constraint::Eq(_) => return BigInt::zero(),
            Constraint::Gt(_) if a.is_positive() => lower += 1,
            Constraint::Gt(_) => upper += 1,
            Constraint::Div(m, _) => delta = delta.lcm(m),
        }
        l = l.lcm(&a.abs());
    }
    BigInt::from(lower.min(upper).max(1)) * delta * l
}

fn eliminate_one(cs: &BTreeSet<Constraint>, x: Var) -> Vec<BTreeSet<Constraint>> {
    let (with, without): (Vec<Constraint>, Vec<Constraint>) =
        cs.iter().cloned().partition(|c| mentions(c, x));
    if with.is_empty() {
        return vec![cs.clone()];
    }
    // equality: a·x + s = 0
    if let Some(eqc) = with
        .iter()
        .filter(|c| matches!(c, Constraint::Eq(_)))
        .min_by_key(|c| c.term().coeff(x).abs())
    {
        let a = eqc.term().coeff(x);
        let s = eqc.term().substitute(x, &LinearTerm::zero());
        let aa = a.abs();
        // |a|·x = -sgn(a)·s
        let ax = if a.is_positive() { s.neg() } else { s.clone() };
        let mut out: Vec<Constraint> = without.clone();
        out.push(Constraint::Div(aa.clone(), s.clone()));
        for c in &with {
            if c == eqc {
                continue;
            }
            let cx = c.term().coeff(x);
            let r = c.term().substitute(x, &LinearTerm::zero());
            let t = ax.scale(&cx).add(&r.scale(&aa));
            out.push(match c {
                Constraint::Div(m, _) => Constraint::Div(m * &aa, t),
                _ => c.with_term(t),
            });
        }
        return simplify_all(out).into_iter().collect();
    }
    let l = with.iter().fold(BigInt::one(), |acc, c| acc.lcm(&c.term().coeff(x).abs()));
    // x' = l·x appears with coefficient ±1; rows are (sign, rest, kind)
    let mut rows: Vec<(bool, LinearTerm, Constraint)> = Vec::new();
    for c in &with {
        let a = c.term().coeff(x);
        let f = &l / a.abs();
        let r = c.term().substitute(x, &LinearTerm::zero()).scale(&f);
        let kind = match c {
            Constraint::Div(m, _) => Constraint::Div(m * &f, LinearTerm::zero()),
            other => other.with_term(LinearTerm::zero()),
        };
        rows.push((a.is_positive(), r, kind));
    }
    rows.push((true, LinearTerm::zero(), Constraint::Div(l.clone(), LinearTerm::zero())));
    let lowers = rows.iter().filter(|(p, _, k)| *p && matches!(k, Constraint::Gt(_))).count();
    let uppers = rows.iter().filter(|(p, _, k)| !*p && matches!(k, Constraint::Gt(_))).count();
    if lowers > uppers {
        for row in rows.iter_mut() {
            row.0 = !row.0;
        }
    }
    let delta = rows.iter().fold(BigInt::one(), |acc, (_, _, k)| match k {
        Constraint::Div(m, _) => acc.lcm(m),
        _ => acc,
    });
    let instantiate = |value: &LinearTerm, drop_uppers: bool| -> Option<BTreeSet<Constraint>> {
        let mut out = without.clone();
        for (pos, r, kind) in &rows {
            if drop_uppers && matches!(kind, Constraint::Gt(_)) {
                continue;
            }
            let signed = if *pos { value.clone() } else { value.neg() };
            out.push(kind.with_term(signed.add(r)));
        }
        simplify_all(out)
    };
    let bounds: Vec<LinearTerm> = rows
        .iter()
        .filter(|(p, _, k)| *p && matches!(k, Constraint::Gt(_)))
        .map(|(_, r, _)| r.neg())
        .collect();
    let mut branches = BTreeSet::new();
    let mut j = BigInt::one();
    while j <= delta {
        let jt = LinearTerm::constant(j.clone());
        if bounds.is_empty() {
            if let Some(b) = instantiate(&jt, true) {
                branches.insert(b);
            }
        } else {
            for b in &bounds {
                if let Some(s) = instantiate(&b.add(&jt), false) {
                    branches.insert(s);
                }
            }
        }
        j += 1;
    }
    branches.into_iter().collect()
}

/// Projects a conjunction of comparison atoms onto the variables outside
/// `elim`. The result is a disjunction of systems; empty means unsatisfiable.
pub fn eliminate_integer_vars(atoms: &[Atom], elim: &BTreeSet<Var>) -> Vec<GuardedSystem> {
    if let Some(k) = atoms.iter().position(|a| matches!(a, Atom::Cmp(_, Rel::Ne))) {
        let Atom::Cmp(t, _) = &atoms[k] else { unreachable!() };
        let mut out = Vec::new();
        for r in [Rel::Lt, Rel::Gt] {
            let mut split = atoms.to_vec();
            split[k] = Atom::Cmp(t.clone(), r);
            out.extend(eliminate_integer_vars(&split, elim));
        }
        return out;
    }
    let base: Vec<Constraint> = atoms.iter().flat_map(Constraint::from_atom).collect();
    let Some(start) = simplify_all(base) else { return vec![] };
    let mut work: Vec<(BTreeSet<Constraint>, Vec<(Var, Vec<Constraint>)>, BTreeSet<Var>)> =
        vec![(start, vec![], elim.clone())];
    let mut done = Vec::new();
    while let Some((cs, trail, left)) = work.pop() {
        let present: Vec<Var> = left
            .iter()
            .copied()
            .filter(|x| cs.iter().any(|c| mentions(c, *x)))
            .collect();
        let Some(x) = present.iter().copied().min_by_key(|x| elim_cost(&cs, *x)) else {
            let mut trail = trail;
            // unconstrained eliminated variables take the value 0
            for x in left {
                trail.push((x, vec![]));
            }
            done.push(GuardedSystem { constraints: cs.into_iter().collect(), trail });
            continue;
        };
        let used: Vec<Constraint> = cs.iter().filter(|c| mentions(c, x)).cloned().collect();
        let mut rest = left.clone();
        rest.remove(&x);
        for next in eliminate_one(&cs, x) {
            let mut t = trail.clone();
            t.push((x, used.clone()));
            work.push((next, t, rest.clone()));
        }
    }
    done.reverse();
    done
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::eval_formula;
    use crate::textio::parse_formula;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn has_not(f: &Formula) -> bool {
        match f {
            Formula::Not(_) => true,
            Formula::Atom(_) => false,
            Formula::And(fs) | Formula::Or(fs) => fs.iter().any(has_not),
            Formula::Exists(_, g) | Formula::Forall(_, g) => has_not(g),
        }
    }

    #[test]
    fn negation_rewrites() {
        let p = parse_formula("!(x > 0)").unwrap();
        let mut syms = p.symbols.clone();
        let x = syms.lookup("x").unwrap();
        let g = normalize_negations(&p.formula, &mut syms, &bi(2), &bi(3));
        assert_eq!(
            g,
            Formula::Or(vec![
                Formula::cmp(LinearTerm::var(x), Rel::Lt),
                Formula::cmp(LinearTerm::var(x), Rel::Eq)
            ])
        );
        let p = parse_formula("!!(x = 0)").unwrap();
        let mut syms = p.symbols.clone();
        let g = normalize_negations(&p.formula, &mut syms, &bi(2), &bi(3));
        assert_eq!(g, Formula::cmp(LinearTerm::var(x), Rel::Eq));

        let p = parse_formula("!powA(x)").unwrap();
        let mut syms = p.symbols.clone();
        let g = normalize_negations(&p.formula, &mut syms, &bi(2), &bi(3));
        let Formula::Or(parts) = &g else { panic!() };
        assert_eq!(parts[0], Formula::rel(LinearTerm::var(x), Rel::Lt, LinearTerm::constant(1)));
        let Formula::Exists(us, body) = &parts[1] else { panic!() };
        let u = LinearTerm::var(us[0]);
        assert_eq!(
            **body,
            Formula::And(vec![
                Formula::power(u.clone(), BaseTag::A),
                Formula::rel(u.clone(), Rel::Lt, LinearTerm::var(x)),
                Formula::rel(LinearTerm::var(x), Rel::Lt, u.add(&u)),
            ])
        );
        assert!(!has_not(&g));
    }

    #[test]
    fn tagging() {
        let p = parse_formula("powA(x + 1)").unwrap();
        let mut syms = p.symbols.clone();
        let t = to_power_tagged_dnf(&p.formula, &mut syms);
        assert_eq!(t.disjuncts.len(), 1);
        let y = *t.power_vars.keys().next().unwrap();
        assert_eq!(syms.name(y), "y1");
        assert!(t.disjuncts[0].contains(&Atom::Power(LinearTerm::var(y), BaseTag::A)));

        let p = parse_formula("powA(x) & powB(z)").unwrap();
        let mut syms = p.symbols.clone();
        let t = to_power_tagged_dnf(&p.formula, &mut syms);
        assert_eq!(t.disjuncts, vec![vec![
            Atom::Power(LinearTerm::var(Var(0)), BaseTag::A),
            Atom::Power(LinearTerm::var(Var(1)), BaseTag::B)
        ]]);

        let p = parse_formula("powA(x) & powB(x)").unwrap();
        let mut syms = p.symbols.clone();
        let t = to_power_tagged_dnf(&p.formula, &mut syms);
        assert_eq!(t.power_vars.len(), 2);

        let p = parse_formula("(a = 0 | b = 0) & c = 0").unwrap();
        let mut syms = p.symbols.clone();
        let t = to_power_tagged_dnf(&p.formula, &mut syms);
        assert_eq!(t.disjuncts.len(), 2);
        assert!(t.disjuncts.iter().all(|d| d.len() == 2));
    }

    fn project(text: &str, elim: &[&str]) -> (Vec<GuardedSystem>, Symbols, Vec<Atom>) {
        let p = parse_formula(text).unwrap();
        let t = to_power_tagged_dnf(&p.formula, &mut p.symbols.clone());
        let atoms = t.disjuncts[0].clone();
        let e: BTreeSet<Var> = elim.iter().map(|n| p.symbols.lookup(n).unwrap()).collect();
        (eliminate_integer_vars(&atoms, &e), p.symbols, atoms)
    }

    fn accepts(gs: &[GuardedSystem], m: &Model) -> bool {
        gs.iter().any(|g| g.holds(m))
    }

    #[test]
    fn parity_projection() {
        let (gs, syms, _) = project("y = 2*x", &["x"]);
        let y = syms.lookup("y").unwrap();
        for v in -10..10 {
            let m: Model = [(y, bi(v))].into_iter().collect();
            assert_eq!(accepts(&gs, &m), v % 2 == 0);
        }
        assert_eq!(gs.len(), 1);
        assert_eq!(gs[0].constraints, vec![Constraint::Div(bi(2), LinearTerm::var(y))]);
    }

    #[test]
    fn bound_projection() {
        let (gs, syms, _) = project("x > 0 & y > x", &["x"]);
        let y = syms.lookup("y").unwrap();
        for v in -10..10 {
            let m: Model = [(y, bi(v))].into_iter().collect();
            assert_eq!(accepts(&gs, &m), v > 1, "{v}");
        }
    }

    #[test]
    fn two_equalities() {
        let (gs, syms, atoms) = project("y1 = 3*x + 1 & y2 = 3*x + 2", &["x"]);
        let (y1, y2) = (syms.lookup("y1").unwrap(), syms.lookup("y2").unwrap());
        let x = syms.lookup("x").unwrap();
        let body = Formula::And(atoms.iter().cloned().map(Formula::Atom).collect());
        for a in -30..30 {
            for b in -30..30 {
                let m: Model = [(y1, bi(a)), (y2, bi(b))].into_iter().collect();
                let expected = (-50..=50).any(|xv| a == 3 * xv + 1 && b == 3 * xv + 2);
                assert_eq!(accepts(&gs, &m), expected);
                assert_eq!(expected, a.rem_euclid(3) == 1 && b == a + 1);
                if let Some(g) = gs.iter().find(|g| g.holds(&m)) {
                    let mut full = m.clone();
                    g.back_substitute(&mut full).unwrap();
                    assert!(full.contains_key(&x));
                    assert!(eval_formula(&body, &full, &bi(2), &bi(3)).unwrap());
                }
            }
        }
    }
}
