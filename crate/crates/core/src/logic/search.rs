use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};

use super::eval::{check_space, children, constant_value, modal_on_node};
use super::{eval_on_mn1, Formula, LogicError, LogicSpec, Modality, Omega, PropOp, Resolved};
use crate::coalgebra::{refines_in, System, Unfolder};
use crate::monads::{Beh, Item, Node, SemKind, Space};
use crate::rational::Rational;

/// Bounds for formula enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    pub depth: usize,
    pub size: usize,
    pub max_formulas: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { depth: 4, size: 9, max_formulas: 20_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Table {
    Bits(Vec<u64>),
    Reals(Vec<Rational>),
}

impl Table {
    fn get(&self, i: usize) -> Omega {
        match self {
            Table::Bits(w) => Omega::Two(w[i / 64] >> (i % 64) & 1 == 1),
            Table::Reals(v) => Omega::Unit(v[i].clone()),
        }
    }

    fn from_values(vals: Vec<Omega>) -> Table {
        if vals.iter().all(|v| matches!(v, Omega::Two(_))) {
            let mut w = vec![0u64; vals.len().div_ceil(64)];
            for (i, v) in vals.iter().enumerate() {
                if v.as_bool() == Some(true) {
                    w[i / 64] |= 1 << (i % 64);
                }
            }
            Table::Bits(w)
        } else {
            Table::Reals(
                vals.into_iter()
                    .map(|v| match v {
                        Omega::Unit(r) => r,
                        Omega::Two(b) => Rational::from(b as i64),
                    })
                    .collect(),
            )
        }
    }

    fn combine(op: PropOp, a: &Table, b: &Table) -> Table {
        match (a, b) {
            (Table::Bits(x), Table::Bits(y)) => {
                Table::Bits(x.iter().zip(y).map(|(p, q)| if op == PropOp::And { p & q } else { p | q }).collect())
            }
            (Table::Reals(x), Table::Reals(y)) => Table::Reals(
                x.iter()
                    .zip(y)
                    .map(|(p, q)| if (op == PropOp::And) == (p <= q) { p.clone() } else { q.clone() })
                    .collect(),
            ),
            _ => unreachable!("tables of one level share a truth type"),
        }
    }
}

/// One enumerated formula with its values on the universe of its depth.
#[derive(Debug, Clone)]
pub struct Entry {
    pub formula: Formula,
    pub size: usize,
    table: Table,
}

/// Formulas by depth, deduplicated by their value tables on a universe of
/// behaviours closed under children. Within each depth entries come in
/// order of size.
pub struct Enumeration<'s> {
    space: &'s Space,
    logic: LogicSpec,
    caps: Caps,
    universe: Vec<Vec<Beh>>,
    nodes: Vec<Vec<Node>>,
    index: Vec<HashMap<Beh, usize>>,
    levels: Vec<Vec<Entry>>,
    truncated: bool,
}

impl<'s> Enumeration<'s> {
    pub fn new(space: &'s Space, logic: &LogicSpec, roots: &[Beh], caps: Caps) -> Result<Self, LogicError> {
        check_space(space, logic)?;
        let mut universe: Vec<Vec<Beh>> = Vec::new();
        let mut index: Vec<HashMap<Beh, usize>> = Vec::new();
        let mut queue: VecDeque<Beh> = roots.iter().copied().collect();
        while let Some(b) = queue.pop_front() {
            let d = space.depth(b);
            while universe.len() <= d {
                universe.push(Vec::new());
                index.push(HashMap::new());
            }
            if index[d].contains_key(&b) {
                continue;
            }
            index[d].insert(b, universe[d].len());
            universe[d].push(b);
            queue.extend(children(space, b)?);
        }
        let nodes = universe.iter().map(|l| l.iter().map(|&b| space.node(b)).collect()).collect();
        Ok(Enumeration {
            space,
            logic: logic.clone(),
            caps,
            universe,
            nodes,
            index,
            levels: Vec::new(),
            truncated: false,
        })
    }

    pub fn universe(&self, depth: usize) -> &[Beh] {
        self.universe.get(depth).map_or(&[], Vec::as_slice)
    }

    pub fn position(&self, depth: usize, b: Beh) -> Option<usize> {
        self.index.get(depth)?.get(&b).copied()
    }

    /// Whether some level stopped at `max_formulas`.
    pub fn truncated(&self) -> bool {
        self.truncated
    }

    /// Value of an entry of depth `depth` on a universe member.
    pub fn value(&self, depth: usize, e: &Entry, b: Beh) -> Option<Omega> {
        self.position(depth, b).map(|i| e.table.get(i))
    }

    pub fn level(&mut self, depth: usize) -> Result<&[Entry], LogicError> {
        while self.levels.len() <= depth {
            let k = self.levels.len();
            let l = self.build(k)?;
            self.levels.push(l);
        }
        Ok(&self.levels[depth])
    }

    fn build(&mut self, k: usize) -> Result<Vec<Entry>, LogicError> {
        let space = self.space;
        let n = self.universe(k).len();
        let mut seen: HashSet<Table> = HashSet::new();
        let mut entries: Vec<Entry> = Vec::new();
        let mut by_size: Vec<Vec<usize>> = vec![Vec::new(); self.caps.size + 1];
        let mods: Vec<(Modality, Resolved)> = self
            .logic
            .modalities(space.kind())
            .into_iter()
            .map(|m| Resolved::new(space, &m).map(|r| (m, r)))
            .collect::<Result<_, _>>()?;
        let ops = self.logic.binary_ops();
        let empty_level = Vec::new();
        let prev: &Vec<Entry> = if k > 0 { &self.levels[k - 1] } else { &empty_level };
        let nodes: &[Node] = self.nodes.get(k).map_or(&[], Vec::as_slice);
        fn push(
            f: Formula,
            size: usize,
            table: Table,
            seen: &mut HashSet<Table>,
            entries: &mut Vec<Entry>,
            by_size: &mut [Vec<usize>],
        ) {
            if seen.insert(table.clone()) {
                by_size[size].push(entries.len());
                entries.push(Entry { formula: f, size, table });
            }
        }
        'sizes: for s in 1..=self.caps.size {
            if s == 1 {
                for c in self.logic.constants_at(k) {
                    let vals = (0..n)
                        .map(|i| match &c {
                            Formula::Top => constant_value(space, self.universe[k][i]),
                            Formula::Prop(op, _) => Ok(super::eval::prop_value(space.kind(), *op, &[])),
                            Formula::Modal(..) => unreachable!("constants are not modal"),
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    push(c, 1, Table::from_values(vals), &mut seen, &mut entries, &mut by_size);
                }
            }
            if k > 0 {
                for (m, r) in &mods {
                    for (j, e) in prev.iter().enumerate() {
                        if e.size + 1 != s || (*m == Modality::Halt && j > 0) {
                            continue;
                        }
                        let mut vals = Vec::with_capacity(n);
                        for node in nodes {
                            vals.push(modal_on_node(space, *r, node, &mut |c| Ok(e.table.get(self.index[k - 1][&c])))?);
                        }
                        let f = Formula::Modal(m.clone(), Box::new(e.formula.clone()));
                        push(f, s, Table::from_values(vals), &mut seen, &mut entries, &mut by_size);
                    }
                }
            }
            for &op in &ops {
                for s1 in 1..s.saturating_sub(1) {
                    let s2 = s - 1 - s1;
                    if s1 > s2 {
                        break;
                    }
                    for (ii, &i) in by_size[s1].clone().iter().enumerate() {
                        let start = if s1 == s2 { ii + 1 } else { 0 };
                        for &j in by_size[s2].clone().iter().skip(start) {
                            let t = Table::combine(op, &entries[i].table, &entries[j].table);
                            if seen.contains(&t) {
                                continue;
                            }
                            let f = Formula::Prop(op, vec![entries[i].formula.clone(), entries[j].formula.clone()]);
                            push(f, s, t, &mut seen, &mut entries, &mut by_size);
                            if entries.len() >= self.caps.max_formulas {
                                self.truncated = true;
                                break 'sizes;
                            }
                        }
                    }
                }
            }
        }
        Ok(entries)
    }
}

/// A formula whose value on the left state is not below its value on the
/// right state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub formula: Formula,
    pub depth: usize,
    pub left: Omega,
    pub right: Omega,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FoundBy {
    Enumeration,
    Synthesis,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inclusion {
    pub included: bool,
    pub witness: Option<Witness>,
    pub found_by: Option<FoundBy>,
    pub truncated: bool,
}

fn unfold(space: &Space, sys: &System, x: usize, depth: usize) -> Result<Vec<Beh>, LogicError> {
    let mut u = Unfolder::new(space, sys)?;
    (0..=depth).map(|n| u.behaviour(x, n).map_err(LogicError::from)).collect()
}

/// Whether every formula up to `depth` is at least as true at `y` as at `x`.
/// Formulas are enumerated up to `caps`; past the caps a witness is
/// synthesized from the behaviours.
pub fn theory_included(
    space: &Space,
    logic: &LogicSpec,
    a: &System,
    x: usize,
    b: &System,
    y: usize,
    depth: usize,
    caps: Caps,
) -> Result<Inclusion, LogicError> {
    check_space(space, logic)?;
    let xs = unfold(space, a, x, depth)?;
    let ys = unfold(space, b, y, depth)?;
    let top = depth.min(caps.depth);
    let roots: Vec<Beh> = xs[..=top].iter().chain(&ys[..=top]).copied().collect();
    let mut en = Enumeration::new(space, logic, &roots, caps)?;
    for n in 0..=top {
        let (ix, iy) = (en.position(n, xs[n]).expect("root"), en.position(n, ys[n]).expect("root"));
        if let Some(e) = en.level(n)?.iter().find(|e| !e.table.get(ix).leq(&e.table.get(iy))) {
            let w = Witness { formula: e.formula.clone(), depth: n, left: e.table.get(ix), right: e.table.get(iy) };
            return Ok(Inclusion {
                included: false,
                witness: Some(w),
                found_by: Some(FoundBy::Enumeration),
                truncated: en.truncated(),
            });
        }
    }
    let mut synth = Synth::new(space, logic);
    for n in 0..=depth {
        if let Some(w) = synth.witness(xs[n], ys[n])? {
            return Ok(Inclusion {
                included: false,
                witness: Some(w),
                found_by: Some(FoundBy::Synthesis),
                truncated: en.truncated(),
            });
        }
    }
    Ok(Inclusion { included: true, witness: None, found_by: None, truncated: en.truncated() })
}

/// A witness at the first depth where refinement fails, or `None` when `x`
/// refines `y` up to `depth`.
pub fn distinguish(
    space: &Space,
    logic: &LogicSpec,
    a: &System,
    x: usize,
    b: &System,
    y: usize,
    depth: usize,
    caps: Caps,
) -> Result<Option<Witness>, LogicError> {
    check_space(space, logic)?;
    let verdict = refines_in(space, a, x, b, y, depth)?;
    let Some(n) = verdict.first_failure else {
        return Ok(None);
    };
    let xb = unfold(space, a, x, n)?[n];
    let yb = unfold(space, b, y, n)?[n];
    if let Some(w) = Synth::new(space, logic).witness(xb, yb)? {
        return Ok(Some(w));
    }
    let mut en = Enumeration::new(space, logic, &[xb, yb], caps)?;
    let (ix, iy) = (en.position(n, xb).expect("root"), en.position(n, yb).expect("root"));
    match en.level(n)?.iter().find(|e| !e.table.get(ix).leq(&e.table.get(iy))) {
        Some(e) => {
            Ok(Some(Witness { formula: e.formula.clone(), depth: n, left: e.table.get(ix), right: e.table.get(iy) }))
        }
        None => Err(LogicError::NoWitnessWithinBounds),
    }
}

/// Builds distinguishing formulas by recursion on normal forms.
struct Synth<'s> {
    space: &'s Space,
    logic: &'s LogicSpec,
    memo: HashMap<(Beh, Beh), Option<Formula>>,
}

impl<'s> Synth<'s> {
    fn new(space: &'s Space, logic: &'s LogicSpec) -> Self {
        Synth { space, logic, memo: HashMap::new() }
    }

    /// A checked witness for `b1 ≰ b2`, if one is found.
    fn witness(&mut self, b1: Beh, b2: Beh) -> Result<Option<Witness>, LogicError> {
        if self.space.leq(b1, b2) {
            return Ok(None);
        }
        let f = if self.space.kind() == SemKind::PTrace { self.word(b1, b2) } else { self.sep(b1, b2) };
        let Some(f) = f else { return Ok(None) };
        let left = eval_on_mn1(self.space, self.logic, &f, b1)?;
        let right = eval_on_mn1(self.space, self.logic, &f, b2)?;
        Ok((!left.leq(&right)).then(|| Witness { formula: f, depth: self.space.depth(b1), left, right }))
    }

    fn label(&self, a: u16) -> &str {
        &self.logic.labels()[a as usize]
    }

    /// A word whose probability drops from `b1` to `b2`.
    fn word(&self, b1: Beh, b2: Beh) -> Option<Formula> {
        let weights = |b: Beh| -> BTreeMap<Vec<u16>, Rational> {
            let mut m: BTreeMap<Vec<u16>, Rational> = BTreeMap::new();
            if let Node::Dist { entries, .. } = self.space.node(b) {
                for (w, _, p) in entries {
                    *m.entry(w).or_default() += &p;
                }
            }
            m
        };
        let (w1, w2) = (weights(b1), weights(b2));
        let (w, _) = w1.iter().find(|(w, p)| w2.get(*w).is_none_or(|q| *p > q))?;
        Some(w.iter().rev().fold(Formula::Top, |f, &a| Formula::dia(self.label(a), f)))
    }

    /// A formula of the depth of `b`, true at `b`; `b` must be live.
    fn holds_at(&self, b: Beh) -> Option<Formula> {
        if self.logic.flexible_top() {
            return Some(Formula::tt());
        }
        match self.space.node(b) {
            Node::Leaf(_) => Some(Formula::Top),
            Node::Layer { items, .. } => items.iter().find_map(|it| match *it {
                Item::Act { label, child, .. } => Some(Formula::dia(self.label(label), self.holds_at(child)?)),
                Item::Halt => None,
            }),
            _ => None,
        }
    }

    fn item_leq(&self, i: &Item, j: &Item) -> bool {
        match (i, j) {
            (Item::Halt, Item::Halt) => true,
            (Item::Act { ready: r1, label: a1, child: c1 }, Item::Act { ready: r2, label: a2, child: c2 }) => {
                r1 == r2 && a1 == a2 && self.space.leq(*c1, *c2)
            }
            _ => false,
        }
    }

    /// A formula true at `b1` and false at `b2`.
    fn sep(&mut self, b1: Beh, b2: Beh) -> Option<Formula> {
        if let Some(f) = self.memo.get(&(b1, b2)) {
            return f.clone();
        }
        let f = self.sep_uncached(b1, b2);
        self.memo.insert((b1, b2), f.clone());
        f
    }

    fn sep_uncached(&mut self, b1: Beh, b2: Beh) -> Option<Formula> {
        if self.space.leq(b1, b2) {
            return None;
        }
        let ready_sim = self.space.kind() == SemKind::ReadySim;
        match (self.space.node(b1), self.space.node(b2)) {
            (Node::Leaf(_), Node::Deadlock(0)) => Some(Formula::Top),
            (Node::Deadlock(d), Node::Layer { .. }) if d > 0 && self.logic.has_box() => {
                Some(Formula::and(self.logic.labels().iter().map(|a| Formula::boxed(a, Formula::ff())).collect()))
            }
            (Node::Layer { .. }, Node::Deadlock(_)) => self.holds_at(b1),
            (Node::Layer { items: i1, .. }, Node::Layer { items: i2, .. }) => {
                for it in &i1 {
                    if i2.iter().any(|jt| self.item_leq(it, jt)) {
                        continue;
                    }
                    let Item::Act { ready, label, child: c1 } = *it else {
                        return Some(Formula::Modal(Modality::Halt, Box::new(Formula::tt())));
                    };
                    let mut parts = Vec::new();
                    for jt in &i2 {
                        if let Item::Act { ready: r2, label: l2, child: c2 } = *jt {
                            if l2 == label && (!ready_sim || r2 == ready) {
                                parts.push(self.sep(c1, c2)?);
                            }
                        }
                    }
                    let arg = if parts.is_empty() { self.holds_at(c1)? } else { Formula::and(parts) };
                    let m = if ready_sim {
                        let names = (0..self.logic.labels().len() as u16)
                            .filter(|i| ready & (1 << i) != 0)
                            .map(|i| self.label(i).to_string())
                            .collect();
                        Modality::Ready { label: self.label(label).to_string(), ready: names }
                    } else {
                        Modality::Dia(self.label(label).to_string())
                    };
                    return Some(Formula::Modal(m, Box::new(arg)));
                }
                if !self.logic.has_box() {
                    return None;
                }
                for jt in &i2 {
                    let Item::Act { label, child: c2, .. } = *jt else { continue };
                    if i1.iter().any(|it| self.item_leq(it, jt)) {
                        continue;
                    }
                    let mut parts = Vec::new();
                    for it in &i1 {
                        if let Item::Act { label: l1, child: c1, .. } = *it {
                            if l1 == label {
                                parts.push(self.sep(c1, c2)?);
                            }
                        }
                    }
                    let arg = if parts.is_empty() { Formula::ff() } else { Formula::or(parts) };
                    return Some(Formula::boxed(self.label(label), arg));
                }
                None
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{builtin_logic, parse_formula, LogicKind};
    use crate::monads::Semantics;
    use crate::poset::FinPoset;

    fn lts(states: &[&str], edges: &[(&str, &str, &str)]) -> System {
        System::lts(FinPoset::discrete(states), &["a", "b", "c"], edges).unwrap()
    }

    fn setup(kind: SemKind) -> (Space, LogicSpec) {
        let sem = Semantics::new(kind, &["a", "b", "c"]).unwrap();
        (Space::over_one(sem), builtin_logic(LogicKind::for_semantics(kind), &["a", "b", "c"]).unwrap())
    }

    fn split_join() -> (System, System) {
        let split = lts(
            &["p", "p1", "p2", "p3", "p4"],
            &[("p", "a", "p1"), ("p", "a", "p2"), ("p1", "b", "p3"), ("p2", "c", "p4")],
        );
        let join = lts(&["q", "q1", "q2", "q3"], &[("q", "a", "q1"), ("q1", "b", "q2"), ("q1", "c", "q3")]);
        (split, join)
    }

    #[test]
    fn identical_states_are_included() {
        let (s, hml) = setup(SemKind::Bisim);
        let (split, _) = split_join();
        let p = split.state("p").unwrap();
        let inc = theory_included(&s, &hml, &split, p, &split, p, 3, Caps::default()).unwrap();
        assert!(inc.included && inc.witness.is_none());
    }

    #[test]
    fn sim_counterexample_is_a_diamond() {
        let (s, pos) = setup(SemKind::Sim);
        let x = lts(&["x", "x1"], &[("x", "a", "x1")]);
        let y = lts(&["y"], &[]);
        let (ix, iy) = (x.state("x").unwrap(), y.state("y").unwrap());
        let inc = theory_included(&s, &pos, &x, ix, &y, iy, 2, Caps::default()).unwrap();
        let w = inc.witness.unwrap();
        assert_eq!(w.formula.to_string(), "<a> tt");
        assert_eq!(inc.found_by, Some(FoundBy::Enumeration));
        let d = distinguish(&s, &pos, &x, ix, &y, iy, 2, Caps::default()).unwrap().unwrap();
        assert_eq!(d.formula.to_string(), "<a> tt");
        assert_eq!(d.depth, 1);
    }

    #[test]
    fn bisim_counterexample_for_branching() {
        let (s, hml) = setup(SemKind::Bisim);
        let (split, join) = split_join();
        let (p, q) = (split.state("p").unwrap(), join.state("q").unwrap());
        let w = theory_included(&s, &hml, &join, q, &split, p, 3, Caps::default()).unwrap().witness.unwrap();
        assert_eq!(w.depth, 2);
        assert_eq!((w.left.clone(), w.right.clone()), (Omega::Two(true), Omega::Two(false)));
        let classic = parse_formula("<a>(<b> tt & <c> tt)", &hml).unwrap();
        assert_eq!(eval_on_mn1(&s, &hml, &classic, unfold(&s, &join, q, 2).unwrap()[2]).unwrap(), Omega::Two(true));
        assert_eq!(eval_on_mn1(&s, &hml, &classic, unfold(&s, &split, p, 2).unwrap()[2]).unwrap(), Omega::Two(false));
        let d = distinguish(&s, &hml, &join, q, &split, p, 3, Caps::default()).unwrap().unwrap();
        assert_eq!(d.formula, classic);
        let back = distinguish(&s, &hml, &split, p, &join, q, 3, Caps::default()).unwrap().unwrap();
        assert!(!back.left.leq(&back.right));
    }

    #[test]
    fn refinement_means_no_witness() {
        let (s, pos) = setup(SemKind::Sim);
        let x = lts(&["x", "x1"], &[("x", "a", "x1")]);
        let y = lts(&["y", "y1", "y2"], &[("y", "a", "y1"), ("y", "b", "y2")]);
        let (ix, iy) = (x.state("x").unwrap(), y.state("y").unwrap());
        assert_eq!(distinguish(&s, &pos, &x, ix, &y, iy, 3, Caps::default()).unwrap(), None);
    }

    #[test]
    fn sync_witnesses_cover_deadlock() {
        let (s, sync) = setup(SemKind::Sync);
        let x = lts(&["x"], &[]);
        let y = lts(&["y"], &[("y", "a", "y")]);
        let (ix, iy) = (x.state("x").unwrap(), y.state("y").unwrap());
        let d = distinguish(&s, &sync, &x, ix, &y, iy, 2, Caps::default()).unwrap().unwrap();
        assert_eq!(d.formula.to_string(), "[a] ff & [b] ff & [c] ff");
        let e = distinguish(&s, &sync, &y, iy, &x, ix, 2, Caps::default()).unwrap().unwrap();
        assert_eq!(e.formula.to_string(), "<a> tt");
    }

    #[test]
    fn prob_word_witness() {
        let (s, prob) = setup(SemKind::PTrace);
        let half = |n, d| Rational::new(n, d);
        let x = System::pts(
            FinPoset::discrete(["x", "y", "z"]),
            &["a", "b", "c"],
            &[("x", "a", "y", half(1, 2)), ("y", "b", "z", half(1, 1))],
        )
        .unwrap();
        let y = System::pts(
            FinPoset::discrete(["x", "y", "z"]),
            &["a", "b", "c"],
            &[("x", "a", "y", half(1, 1)), ("y", "b", "z", half(1, 3))],
        )
        .unwrap();
        let (ix, iy) = (x.state("x").unwrap(), y.state("x").unwrap());
        let d = distinguish(&s, &prob, &x, ix, &y, iy, 3, Caps::default()).unwrap().unwrap();
        assert_eq!(d.formula.to_string(), "<a> <b> tt");
        assert_eq!((d.left, d.right), (Omega::Unit(half(1, 2)), Omega::Unit(half(1, 3))));
    }

    #[test]
    fn ready_sim_witnesses() {
        let (s, pos) = setup(SemKind::ReadySim);
        let x = lts(&["x", "x1"], &[("x", "a", "x1")]);
        let y = lts(&["y", "y1", "y2"], &[("y", "a", "y1"), ("y", "b", "y2")]);
        let (ix, iy) = (x.state("x").unwrap(), y.state("y").unwrap());
        let d = distinguish(&s, &pos, &x, ix, &y, iy, 2, Caps::default()).unwrap().unwrap();
        assert_eq!(d.formula.to_string(), "dia(a,{a}) tt");
        let z = lts(&["z"], &[]);
        let iz = z.state("z").unwrap();
        let h = distinguish(&s, &pos, &z, iz, &x, ix, 2, Caps::default()).unwrap().unwrap();
        assert_eq!(h.formula.to_string(), "dia(halt) tt");
    }
}
