use std::collections::BTreeSet;

/// Conjunction of offset constraints `n_a = n_b + c` and fixings `n_a = v`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct AClassCell {
    pub offsets: Vec<(usize, usize, i64)>,
    pub fixes: Vec<(usize, u64)>,
}

impl AClassCell {
    pub fn fixed(values: &[(usize, u64)]) -> Self {
        AClassCell { offsets: vec![], fixes: values.to_vec() }
    }

    pub fn contains(&self, exps: &[u64]) -> bool {
        self.fixes.iter().all(|&(a, v)| exps[a] == v)
            && self.offsets.iter().all(|&(a, b, c)| exps[a] as i128 == exps[b] as i128 + c as i128)
    }

    pub fn with_offset(&self, a: usize, b: usize, c: i64) -> Self {
        let mut out = self.clone();
        out.offsets.push((a, b, c));
        out
    }

    pub fn conjoin(&self, other: &AClassCell) -> Self {
        let mut out = self.clone();
        out.offsets.extend_from_slice(&other.offsets);
        out.fixes.extend_from_slice(&other.fixes);
        out
    }

    /// Columns constrained by the cell.
    pub fn columns(&self) -> BTreeSet<usize> {
        self.offsets
            .iter()
            .flat_map(|&(a, b, _)| [a, b])
            .chain(self.fixes.iter().map(|&(a, _)| a))
            .collect()
    }

    /// All constrained columns fixed.
    pub fn is_point(&self) -> bool {
        self.offsets.is_empty()
    }
}

struct Classes {
    parent: Vec<usize>,
    // n_x − n_parent(x)
    pot: Vec<i64>,
}

impl Classes {
    fn new(n: usize) -> Self {
        Classes { parent: (0..n).collect(), pot: vec![0; n] }
    }

    fn find(&mut self, x: usize) -> (usize, i64) {
        if self.parent[x] == x {
            return (x, 0);
        }
        let p = self.parent[x];
        let (r, pp) = self.find(p);
        self.parent[x] = r;
        self.pot[x] += pp;
        (r, self.pot[x])
    }

    /// Imposes n_a − n_b = c; false on conflict.
    fn union(&mut self, a: usize, b: usize, c: i64) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa - pb == c;
        }
        // n_ra − n_rb = c − pa + pb
        self.parent[ra] = rb;
        self.pot[ra] = c - pa + pb;
        true
    }
}

/// Canonical form of `cell` over `arity` columns, or `None` when empty.
///
/// Each class of linked columns is written relative to its member with the
/// smallest exponent (ties to the lowest index); fully determined classes
/// become fixings.
pub fn cell_normalize(cell: &AClassCell, arity: usize) -> Option<AClassCell> {
    let mut cls = Classes::new(arity);
    for &(a, b, c) in &cell.offsets {
        if !cls.union(a, b, c) {
            return None;
        }
    }
    let mut root_value: Vec<Option<i64>> = vec![None; arity];
    for &(a, v) in &cell.fixes {
        let (r, p) = cls.find(a);
        let rv = v as i64 - p;
        match root_value[r] {
            Some(x) if x != rv => return None,
            _ => root_value[r] = Some(rv),
        }
    }
    let touched = cell.columns();
    let mut members: Vec<Vec<(usize, i64)>> = vec![vec![]; arity];
    for &x in &touched {
        let (r, p) = cls.find(x);
        members[r].push((x, p));
    }
    let mut out = AClassCell::default();
    for r in 0..arity {
        let ms = &members[r];
        if ms.is_empty() {
            continue;
        }
        if let Some(rv) = root_value[r] {
            for &(x, p) in ms {
                let v = rv + p;
                if v < 0 {
                    return None;
                }
                out.fixes.push((x, v as u64));
            }
        } else {
            let &(rep, rp) = ms.iter().min_by_key(|&&(x, p)| (p, x)).unwrap();
            for &(x, p) in ms {
                if x != rep {
                    out.offsets.push((x, rep, p - rp));
                }
            }
        }
    }
    out.offsets.sort();
    out.fixes.sort();
    Some(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    Complete,
    BudgetTruncated,
}

impl Completeness {
    pub fn and(self, o: Completeness) -> Completeness {
        if self == Completeness::Complete && o == Completeness::Complete {
            Completeness::Complete
        } else {
            Completeness::BudgetTruncated
        }
    }
}

/// Finite union of cells over a fixed arity.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AClassRepr {
    pub arity: usize,
    pub cells: Vec<AClassCell>,
    pub completeness: Completeness,
    /// Candidates tried by bounded enumeration while building this set.
    pub enumerated: u64,
}

impl AClassRepr {
    pub fn empty(arity: usize) -> Self {
        AClassRepr { arity, cells: vec![], completeness: Completeness::Complete, enumerated: 0 }
    }

    pub fn universe(arity: usize) -> Self {
        AClassRepr { arity, cells: vec![AClassCell::default()], ..Self::empty(arity) }
    }

    pub fn from_cells(arity: usize, cells: impl IntoIterator<Item = AClassCell>) -> Self {
        let mut r = Self::empty(arity);
        r.cells = canonical(arity, cells);
        r
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, exps: &[u64]) -> bool {
        self.cells.iter().any(|c| c.contains(exps))
    }

    pub fn union(&self, o: &AClassRepr) -> AClassRepr {
        AClassRepr {
            arity: self.arity,
            cells: canonical(self.arity, self.cells.iter().chain(&o.cells).cloned()),
            completeness: self.completeness.and(o.completeness),
            enumerated: self.enumerated + o.enumerated,
        }
    }

    pub fn intersect(&self, o: &AClassRepr) -> AClassRepr {
        let prods = self.cells.iter().flat_map(|a| o.cells.iter().map(move |b| a.conjoin(b)));
        AClassRepr {
            arity: self.arity,
            cells: canonical(self.arity, prods),
            completeness: self.completeness.and(o.completeness),
            enumerated: self.enumerated + o.enumerated,
        }
    }

    /// Adds `n_a = n_b + c` to every cell.
    pub fn with_offset(&self, a: usize, b: usize, c: i64) -> AClassRepr {
        AClassRepr {
            cells: canonical(self.arity, self.cells.iter().map(|cell| cell.with_offset(a, b, c))),
            ..self.clone()
        }
    }
}

fn canonical(arity: usize, cells: impl IntoIterator<Item = AClassCell>) -> Vec<AClassCell> {
    let set: BTreeSet<AClassCell> = cells.into_iter().filter_map(|c| cell_normalize(&c, arity)).collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalize_examples() {
        let c = AClassCell { offsets: vec![(1, 0, 1)], fixes: vec![(2, 3)] };
        assert_eq!(cell_normalize(&c, 3), Some(c.clone()));
        let cyc = AClassCell { offsets: vec![(0, 1, 1), (1, 0, 1)], fixes: vec![] };
        assert_eq!(cell_normalize(&cyc, 2), None);
        let neg = AClassCell { offsets: vec![(0, 1, 5)], fixes: vec![(0, 3)] };
        assert_eq!(cell_normalize(&neg, 2), None);
    }

    #[test]
    fn representative_is_smallest() {
        let c = AClassCell { offsets: vec![(0, 1, 2), (2, 0, -5)], fixes: vec![] };
        // n0 = n1 + 2, n2 = n0 − 5 = n1 − 3: n2 is the representative
        let n = cell_normalize(&c, 3).unwrap();
        assert_eq!(n.offsets, vec![(0, 2, 5), (1, 2, 3)]);
        assert!(n.contains(&[5, 3, 0]));
        assert!(!n.contains(&[5, 3, 1]));
    }

    #[test]
    fn fixes_propagate() {
        let c = AClassCell { offsets: vec![(0, 1, 2)], fixes: vec![(1, 4)] };
        assert_eq!(cell_normalize(&c, 2).unwrap(), AClassCell::fixed(&[(0, 6), (1, 4)]));
    }

    #[test]
    fn intersection() {
        let a = AClassRepr::from_cells(2, [AClassCell { offsets: vec![(0, 1, 0)], fixes: vec![] }]);
        let b = AClassRepr::from_cells(2, [AClassCell::fixed(&[(1, 2)]), AClassCell::fixed(&[(0, 1), (1, 0)])]);
        let i = a.intersect(&b);
        assert_eq!(i.cells, vec![AClassCell::fixed(&[(0, 2), (1, 2)])]);
    }
}
