//! Two-counter machines and their encoding as a sentence with three
//! alternating quantifier blocks whose truth is equivalent to halting.
//!
//! The trace of a run is written as a sequence of powers of α: each
//! configuration contributes `α^(R+c1)`, `α^(R+c2)`, `α^(r-1)`. A window
//! `(Al, Au, Bl, Bu)` selects the powers `B ∈ β^ℕ ∩ [Bl, Bu]` whose leading
//! base-α digit is 1; the next nonzero digit `A ∈ [Al, Au]` carries the
//! sequence entry `A / Al`. The encoding only builds the sentence; it never
//! decides it.
//!
//! Multiplication by a constant is written with an integer coefficient
//! (`2*C`, `α*A`), the same term as the repeated sum.
//!
//! The final-configuration constraint is emitted as `segment(C_last, α^(R-1)·Al, Bu)`,
//! which is the argument order of `segment(C, A, B)`.

use std::fmt;

use num_bigint::BigInt;
use num_traits::One;
use thiserror::Error;

use crate::ast::{Atom, BaseTag, Formula, LinearTerm, Rel, Symbols, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    Inc { counter: u8, goto: usize },
    TstDec { counter: u8, zero: usize, other: usize },
}

/// Instructions `1..R-1`; line `R` halts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinskyMachine {
    pub instrs: Vec<Instr>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MachineError {
    #[error("instruction {line}: counter {counter} is not 1 or 2")]
    Counter { line: usize, counter: u8 },
    #[error("instruction {line}: target {target} outside 1..{halt}")]
    Target { line: usize, target: usize, halt: usize },
    #[error("bases must exceed 1")]
    Base,
}

impl MinskyMachine {
    /// Index of the halting line.
    pub fn halt_line(&self) -> usize {
        self.instrs.len() + 1
    }

    pub fn validate(&self) -> Result<(), MachineError> {
        let halt = self.halt_line();
        for (i, ins) in self.instrs.iter().enumerate() {
            let line = i + 1;
            let (counter, targets) = match *ins {
                Instr::Inc { counter, goto } => (counter, vec![goto]),
                Instr::TstDec { counter, zero, other } => (counter, vec![zero, other]),
            };
            if counter != 1 && counter != 2 {
                return Err(MachineError::Counter { line, counter });
            }
            for target in targets {
                if !(1..=halt).contains(&target) {
                    return Err(MachineError::Target { line, target, halt });
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunOutcome {
    Halted(u64),
    Running,
}

pub fn simulate(m: &MinskyMachine, max_steps: u64) -> RunOutcome {
    let halt = m.halt_line();
    let (mut pc, mut c) = (1usize, [0u64; 2]);
    for step in 0..=max_steps {
        if pc == halt {
            return RunOutcome::Halted(step);
        }
        if step == max_steps {
            break;
        }
        match m.instrs[pc - 1] {
            Instr::Inc { counter, goto } => {
                c[counter as usize - 1] += 1;
                pc = goto;
            }
            Instr::TstDec { counter, zero, other } => {
                let k = counter as usize - 1;
                if c[k] == 0 {
                    pc = zero;
                } else {
                    c[k] -= 1;
                    pc = other;
                }
            }
        }
    }
    RunOutcome::Running
}

/// The sentence plus its symbol table.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub formula: Formula,
    pub symbols: Symbols,
}

struct Builder {
    syms: Symbols,
    alpha: BigInt,
    al: Var,
    au: Var,
    bl: Var,
    bu: Var,
}

fn v(x: Var) -> LinearTerm {
    LinearTerm::var(x)
}

fn le(a: LinearTerm, b: LinearTerm) -> Formula {
    Formula::rel(a, Rel::Le, b)
}

fn lt(a: LinearTerm, b: LinearTerm) -> Formula {
    Formula::rel(a, Rel::Lt, b)
}

fn eq(a: LinearTerm, b: LinearTerm) -> Formula {
    Formula::rel(a, Rel::Eq, b)
}

impl Builder {
    fn alpha_pow(&self, e: usize) -> BigInt {
        num_traits::pow(self.alpha.clone(), e)
    }

    /// `α^e · Al`
    fn scaled_al(&self, e: usize) -> LinearTerm {
        LinearTerm::scaled_var(self.alpha_pow(e), self.al)
    }

    /// B is a selected power with leading digit witness C and second digit A.
    fn segment(&self, c: LinearTerm, a: LinearTerm, b: LinearTerm) -> Formula {
        let bc = b.sub(&c);
        Formula::And(vec![
            Formula::power(c.clone(), BaseTag::A),
            Formula::power(a.clone(), BaseTag::A),
            le(v(self.al), a.clone()),
            le(a.clone(), v(self.au)),
            Formula::power(b.clone(), BaseTag::B),
            le(v(self.bl), b.clone()),
            le(b.clone(), v(self.bu)),
            le(c.clone(), b.clone()),
            lt(b, c.scale(&BigInt::from(2))),
            le(a.clone(), bc.clone()),
            lt(bc, a.scale(&self.alpha)),
        ])
    }

    /// No selected power lies strictly between b1 and b2.
    fn successor(&mut self, b1: LinearTerm, b2: LinearTerm) -> Formula {
        let (c, a, b) = (self.syms.intern("Cq"), self.syms.intern("Aq"), self.syms.intern("Bq"));
        let between = Formula::And(vec![lt(b1, v(b)), lt(v(b), b2)]);
        let body = Formula::Or(vec![
            Formula::not(between),
            Formula::not(self.segment(v(c), v(a), v(b))),
        ]);
        Formula::Forall(vec![c, a, b], Box::new(body))
    }

    /// Transition from the configuration in `a[0..3]` to the one in `a[3..6]`.
    fn step_formula(&self, m: &MinskyMachine, a: &[Var; 6]) -> Formula {
        let r = m.halt_line();
        let mut cases = Vec::new();
        for (i, ins) in m.instrs.iter().enumerate() {
            let at_line = eq(v(a[2]), self.scaled_al(i));
            let keep = |k: usize| eq(v(a[3 + k]), v(a[k]));
            let goto = |t: usize| eq(v(a[5]), self.scaled_al(t - 1));
            match *ins {
                Instr::Inc { counter, goto: t } => {
                    let k = counter as usize - 1;
                    let inc = eq(v(a[3 + k]), v(a[k]).scale(&self.alpha));
                    cases.push(Formula::And(vec![at_line, inc, keep(1 - k), goto(t)]));
                }
                Instr::TstDec { counter, zero, other } => {
                    let k = counter as usize - 1;
                    let floor = self.scaled_al(r);
                    let is_zero = Formula::And(vec![
                        at_line.clone(),
                        eq(v(a[k]), floor.clone()),
                        keep(k),
                        keep(1 - k),
                        goto(zero),
                    ]);
                    let dec = Formula::And(vec![
                        at_line,
                        Formula::rel(v(a[k]), Rel::Gt, floor),
                        eq(v(a[k]), v(a[3 + k]).scale(&self.alpha)),
                        keep(1 - k),
                        goto(other),
                    ]);
                    cases.push(Formula::Or(vec![is_zero, dec]));
                }
            }
        }
        disj(cases)
    }
}

fn disj(mut fs: Vec<Formula>) -> Formula {
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Formula::Or(fs)
    }
}

pub fn encode_minsky(m: &MinskyMachine, alpha: &BigInt, beta: &BigInt) -> Result<Encoding, MachineError> {
    if alpha <= &BigInt::one() || beta <= &BigInt::one() {
        return Err(MachineError::Base);
    }
    m.validate()?;
    let r = m.halt_line();
    let mut syms = Symbols::new();
    let al = syms.intern("Al");
    let au = syms.intern("Au");
    let bl = syms.intern("Bl");
    let bu = syms.intern("Bu");
    let mut b = Builder { syms, alpha: alpha.clone(), al, au, bl, bu };
    let xs: Vec<Var> = ["Bh1", "Bh2", "Ch0", "Ch1", "Ch2", "Clast"]
        .iter()
        .map(|n| b.syms.intern(n))
        .collect();
    let [bh1, bh2, ch0, ch1, ch2, clast] = xs[..] else { unreachable!() };
    let mut ys: Vec<[Var; 3]> = Vec::new();
    for i in 0..6 {
        let c = b.syms.intern(&format!("C{i}"));
        let a = b.syms.intern(&format!("A{i}"));
        let bb = b.syms.intern(&format!("B{i}"));
        ys.push([c, a, bb]);
    }

    let mut outer = vec![
        b.successor(v(bl), v(bh1)),
        b.successor(v(bh1), v(bh2)),
        b.segment(v(ch0), b.scaled_al(r), v(bl)),
        b.segment(v(ch1), b.scaled_al(r), v(bh1)),
        b.segment(v(ch2), v(al), v(bh2)),
        b.segment(v(clast), b.scaled_al(r - 1), v(bu)),
    ];

    let mut premise = Vec::new();
    for i in 0..5 {
        premise.push(b.successor(v(ys[i][2]), v(ys[i + 1][2])));
    }
    for y in &ys {
        premise.push(b.segment(v(y[0]), v(y[1]), v(y[2])));
    }
    premise.push(lt(v(ys[2][1]), b.scaled_al(r)));
    let a_vars: [Var; 6] = std::array::from_fn(|i| ys[i][1]);
    let step = b.step_formula(m, &a_vars);
    let all_y: Vec<Var> = ys.iter().flatten().copied().collect();
    outer.push(Formula::Forall(
        all_y,
        Box::new(Formula::implies(Formula::And(premise), step)),
    ));

    let mut xvars = vec![al, au, bl, bu];
    xvars.extend(xs);
    let formula = Formula::Exists(xvars, Box::new(Formula::And(outer)));
    Ok(Encoding { formula, symbols: b.syms })
}

/// Number of quantifier blocks after prenexing, taking negation into account.
pub fn quantifier_blocks(f: &Formula) -> usize {
    fn walk(f: &Formula, positive: bool, last: Option<bool>) -> usize {
        match f {
            Formula::Atom(_) => 0,
            Formula::And(fs) | Formula::Or(fs) => {
                fs.iter().map(|g| walk(g, positive, last)).max().unwrap_or(0)
            }
            Formula::Not(g) => walk(g, !positive, last),
            Formula::Exists(vs, g) | Formula::Forall(vs, g) => {
                if vs.is_empty() {
                    return walk(g, positive, last);
                }
                let existential = matches!(f, Formula::Exists(..)) == positive;
                let fresh = usize::from(last != Some(existential));
                fresh + walk(g, positive, Some(existential))
            }
        }
    }
    walk(f, true, None)
}

/// Occurrence counts of the segment and successor sub-formulas.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SkeletonCounts {
    pub segment: usize,
    pub successor: usize,
}

impl fmt::Display for SkeletonCounts {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} segment, {} successor", self.segment, self.successor)
    }
}

fn is_segment(f: &Formula) -> bool {
    match f {
        Formula::And(fs) => {
            fs.len() == 11
                && matches!(&fs[0], Formula::Atom(Atom::Power(_, BaseTag::A)))
                && matches!(&fs[1], Formula::Atom(Atom::Power(_, BaseTag::A)))
                && matches!(&fs[4], Formula::Atom(Atom::Power(_, BaseTag::B)))
                && fs.iter().all(|g| matches!(g, Formula::Atom(_)))
        }
        _ => false,
    }
}

fn is_successor(f: &Formula) -> bool {
    match f {
        Formula::Forall(vs, body) if vs.len() == 3 => match body.as_ref() {
            Formula::Or(gs) if gs.len() == 2 => {
                matches!(&gs[1], Formula::Not(inner) if is_segment(inner))
            }
            _ => false,
        },
        _ => false,
    }
}

/// Counts segment and successor occurrences, not descending into successors.
pub fn skeleton_counts(f: &Formula) -> SkeletonCounts {
    let mut out = SkeletonCounts::default();
    fn walk(f: &Formula, out: &mut SkeletonCounts) {
        if is_successor(f) {
            out.successor += 1;
            return;
        }
        if is_segment(f) {
            out.segment += 1;
            return;
        }
        match f {
            Formula::Atom(_) => {}
            Formula::And(fs) | Formula::Or(fs) => fs.iter().for_each(|g| walk(g, out)),
            Formula::Not(g) | Formula::Exists(_, g) | Formula::Forall(_, g) => walk(g, out),
        }
    }
    walk(f, &mut out);
    out
}

/// Counts for the existential part and for the universally quantified window.
pub fn split_counts(enc: &Encoding) -> Option<(SkeletonCounts, SkeletonCounts)> {
    let Formula::Exists(_, body) = &enc.formula else { return None };
    let Formula::And(parts) = body.as_ref() else { return None };
    let (window, head) = parts.split_last()?;
    let mut outer = SkeletonCounts::default();
    for p in head {
        let c = skeleton_counts(p);
        outer.segment += c.segment;
        outer.successor += c.successor;
    }
    Some((outer, skeleton_counts(window)))
}
