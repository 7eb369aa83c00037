use std::cell::RefCell;
use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use super::{MonadError, SemKind, Semantics};
use crate::poset::FinPoset;
use crate::rational::Rational;
use crate::sdist::coupling_exists;

/// Handle of an interned behaviour; equal handles in one space are equal
/// normal forms.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Beh(u32);

impl fmt::Debug for Beh {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Depth-0 content: a base element, or a behaviour one nesting level down.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leaf {
    Base(usize),
    Inner(Beh),
}

/// A generator of a nondeterministic layer. `ready` is zero except under
/// ready similarity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Item {
    Act { ready: u32, label: u16, child: Beh },
    Halt,
}

impl Item {
    pub fn act(label: u16, child: Beh) -> Item {
        Item::Act { ready: 0, label, child }
    }

    pub fn child(&self) -> Option<Beh> {
        match self {
            Item::Act { child, .. } => Some(*child),
            Item::Halt => None,
        }
    }
}

pub type Word = Vec<u16>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    Leaf(Leaf),
    /// Synchronous deadlock, comparable only to itself.
    Deadlock(usize),
    /// Canonical generators: minima and maxima for convex sets, maxima for
    /// down-sets. Sorted.
    Layer {
        depth: usize,
        items: Vec<Item>,
    },
    /// Subdistribution on words of length `depth` times leaves. Sorted, merged.
    Dist {
        depth: usize,
        entries: Vec<(Word, Leaf, Rational)>,
    },
}

#[derive(Default)]
struct Store {
    nodes: Vec<Node>,
    depth: Vec<usize>,
    index: HashMap<Node, Beh>,
    leq: HashMap<(Beh, Beh), bool>,
}

/// Arena of normal forms for one semantics over one base poset.
pub struct Space {
    sem: Semantics,
    base: Arc<FinPoset>,
    pub(crate) cap: usize,
    store: RefCell<Store>,
}

impl fmt::Debug for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Space({}, {} nodes)", self.sem.kind, self.store.borrow().nodes.len())
    }
}

impl Space {
    pub const DEFAULT_CAP: usize = 16;

    pub fn new(sem: Semantics, base: Arc<FinPoset>) -> Space {
        Space { sem, base, cap: Self::DEFAULT_CAP, store: RefCell::default() }
    }

    /// Behaviours over the one-element base.
    pub fn over_one(sem: Semantics) -> Space {
        Space::new(sem, Arc::new(FinPoset::one()))
    }

    /// Largest generator count enumerated per layer.
    pub fn with_cap(mut self, cap: usize) -> Space {
        self.cap = cap;
        self
    }

    pub fn semantics(&self) -> &Semantics {
        &self.sem
    }

    pub fn kind(&self) -> SemKind {
        self.sem.kind
    }

    pub fn base(&self) -> &Arc<FinPoset> {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.store.borrow().nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn node(&self, b: Beh) -> Node {
        self.store.borrow().nodes[b.0 as usize].clone()
    }

    pub fn depth(&self, b: Beh) -> usize {
        self.store.borrow().depth[b.0 as usize]
    }

    pub fn is_deadlock(&self, b: Beh) -> bool {
        matches!(self.node(b), Node::Deadlock(_))
    }

    fn intern(&self, node: Node) -> Beh {
        if let Some(&b) = self.store.borrow().index.get(&node) {
            return b;
        }
        let depth = match &node {
            Node::Leaf(_) => 0,
            Node::Deadlock(d) => *d,
            Node::Layer { depth, .. } | Node::Dist { depth, .. } => *depth,
        };
        let mut st = self.store.borrow_mut();
        let b = Beh(st.nodes.len() as u32);
        st.nodes.push(node.clone());
        st.depth.push(depth);
        st.index.insert(node, b);
        b
    }

    fn check_leaf(&self, l: Leaf) -> Result<(), MonadError> {
        match l {
            Leaf::Base(x) if x >= self.base.len() => Err(MonadError::UnknownElement(format!("#{x}"))),
            Leaf::Inner(b) if b.0 as usize >= self.len() => Err(MonadError::UnknownElement(format!("{b:?}"))),
            _ => Ok(()),
        }
    }

    /// The depth-0 unit at a leaf.
    pub fn leaf(&self, l: Leaf) -> Result<Beh, MonadError> {
        self.check_leaf(l)?;
        Ok(match self.sem.kind {
            SemKind::PTrace => self.intern(Node::Dist { depth: 0, entries: vec![(Vec::new(), l, Rational::one())] }),
            _ => self.intern(Node::Leaf(l)),
        })
    }

    /// `η_X(x)`.
    pub fn unit(&self, x: usize) -> Result<Beh, MonadError> {
        self.leaf(Leaf::Base(x))
    }

    pub fn unit_named(&self, x: &str) -> Result<Beh, MonadError> {
        let i = self.base.index_of(x).map_err(|_| MonadError::UnknownElement(x.to_string()))?;
        self.unit(i)
    }

    pub fn deadlock(&self, depth: usize) -> Beh {
        self.intern(Node::Deadlock(depth))
    }

    /// A nondeterministic layer of the given depth from arbitrary generators.
    /// Under synchronous semantics deadlocked children are pruned and an
    /// empty layer is the deadlock.
    pub fn layer(&self, depth: usize, items: impl IntoIterator<Item = Item>) -> Result<Beh, MonadError> {
        if self.sem.kind == SemKind::PTrace || depth == 0 {
            return Err(MonadError::ShapeMismatch(format!("no layer of depth {depth} under {}", self.sem.kind)));
        }
        let mut v: Vec<Item> = Vec::new();
        for it in items {
            match it {
                Item::Act { ready, label, child } => {
                    if child.0 as usize >= self.len() {
                        return Err(MonadError::UnknownElement(format!("{child:?}")));
                    }
                    if self.depth(child) != depth - 1 {
                        return Err(MonadError::DepthMismatch(self.depth(child), depth - 1));
                    }
                    if label as usize >= self.sem.labels().len() {
                        return Err(MonadError::UnknownLabel(format!("#{label}")));
                    }
                    if self.sem.kind != SemKind::ReadySim && ready != 0 {
                        return Err(MonadError::ShapeMismatch("ready sets only exist under ready similarity".into()));
                    }
                    if self.sem.kind == SemKind::Sync && self.is_deadlock(child) {
                        continue;
                    }
                }
                Item::Halt if self.sem.kind != SemKind::ReadySim => {
                    return Err(MonadError::ShapeMismatch("halt only exists under ready similarity".into()));
                }
                Item::Halt => {}
            }
            v.push(it);
        }
        v.sort();
        v.dedup();
        if self.sem.kind == SemKind::Sync && v.is_empty() {
            return Ok(self.deadlock(depth));
        }
        let keep: Vec<Item> = if self.sem.kind.is_convex() {
            v.iter()
                .copied()
                .filter(|a| {
                    let minimal = !v.iter().any(|b| b != a && self.item_leq(b, a));
                    let maximal = !v.iter().any(|b| b != a && self.item_leq(a, b));
                    minimal || maximal
                })
                .collect()
        } else {
            v.iter().copied().filter(|a| !v.iter().any(|b| b != a && self.item_leq(a, b))).collect()
        };
        Ok(self.intern(Node::Layer { depth, items: keep }))
    }

    /// A subdistribution layer; repeated keys are merged.
    pub fn dist(
        &self,
        depth: usize,
        entries: impl IntoIterator<Item = (Word, Leaf, Rational)>,
    ) -> Result<Beh, MonadError> {
        if self.sem.kind != SemKind::PTrace {
            return Err(MonadError::ShapeMismatch(format!("no distributions under {}", self.sem.kind)));
        }
        let mut acc: std::collections::BTreeMap<(Word, Leaf), Rational> = Default::default();
        for (w, l, p) in entries {
            if w.len() != depth {
                return Err(MonadError::ShapeMismatch(format!("word of length {} at depth {depth}", w.len())));
            }
            if w.iter().any(|&a| a as usize >= self.sem.labels().len()) {
                return Err(MonadError::UnknownLabel(format!("{w:?}")));
            }
            if p.is_negative() {
                return Err(MonadError::ShapeMismatch(format!("negative weight {p}")));
            }
            self.check_leaf(l)?;
            *acc.entry((w, l)).or_default() += &p;
        }
        acc.retain(|_, p| !p.is_zero());
        let total: Rational = acc.values().sum();
        if total > Rational::one() {
            return Err(MonadError::MassExceedsOne(total));
        }
        let entries = acc.into_iter().map(|((w, l), p)| (w, l, p)).collect();
        Ok(self.intern(Node::Dist { depth, entries }))
    }

    /// Subconvex combination of distributions of one depth.
    pub fn mix(&self, depth: usize, parts: &[(Rational, Beh)]) -> Result<Beh, MonadError> {
        let mut out = Vec::new();
        for (p, b) in parts {
            let Node::Dist { depth: d, entries } = self.node(*b) else {
                return Err(MonadError::ShapeMismatch("mixing a non-distribution".into()));
            };
            if d != depth {
                return Err(MonadError::DepthMismatch(d, depth));
            }
            out.extend(entries.into_iter().map(|(w, l, q)| (w, l, p * &q)));
        }
        self.dist(depth, out)
    }

    /// Prefixes every word with `label`, raising the depth by one.
    pub fn prefix(&self, label: u16, b: Beh) -> Result<Beh, MonadError> {
        let Node::Dist { depth, entries } = self.node(b) else {
            return Err(MonadError::ShapeMismatch("prefixing a non-distribution".into()));
        };
        self.dist(
            depth + 1,
            entries.into_iter().map(|(w, l, p)| {
                let mut w2 = Vec::with_capacity(w.len() + 1);
                w2.push(label);
                w2.extend(w);
                (w2, l, p)
            }),
        )
    }

    fn item_leq(&self, a: &Item, b: &Item) -> bool {
        match (a, b) {
            (Item::Halt, Item::Halt) => true,
            (Item::Act { ready: r1, label: l1, child: c1 }, Item::Act { ready: r2, label: l2, child: c2 }) => {
                r1 == r2 && l1 == l2 && self.leq(*c1, *c2)
            }
            _ => false,
        }
    }

    fn leaf_leq(&self, a: &Leaf, b: &Leaf) -> bool {
        match (a, b) {
            (Leaf::Base(x), Leaf::Base(y)) => self.base.leq(*x, *y),
            (Leaf::Inner(x), Leaf::Inner(y)) => self.leq(*x, *y),
            _ => false,
        }
    }

    /// The order of the layer both behaviours live in; different depths or
    /// shapes are incomparable.
    pub fn leq(&self, a: Beh, b: Beh) -> bool {
        if a == b {
            return true;
        }
        if let Some(&r) = self.store.borrow().leq.get(&(a, b)) {
            return r;
        }
        let r = match (self.node(a), self.node(b)) {
            (Node::Leaf(x), Node::Leaf(y)) => self.leaf_leq(&x, &y),
            (Node::Layer { depth: d1, items: i1 }, Node::Layer { depth: d2, items: i2 }) if d1 == d2 => {
                let up = i1.iter().all(|x| i2.iter().any(|y| self.item_leq(x, y)));
                if self.sem.kind.is_convex() {
                    up && i2.iter().all(|y| i1.iter().any(|x| self.item_leq(x, y)))
                } else {
                    up
                }
            }
            (Node::Dist { depth: d1, entries: e1 }, Node::Dist { depth: d2, entries: e2 }) if d1 == d2 => {
                let left: Vec<((Word, Leaf), Rational)> = e1.into_iter().map(|(w, l, p)| ((w, l), p)).collect();
                let right: Vec<((Word, Leaf), Rational)> = e2.into_iter().map(|(w, l, p)| ((w, l), p)).collect();
                coupling_exists(&left, &right, |(w1, l1), (w2, l2)| w1 == w2 && self.leaf_leq(l1, l2))
            }
            _ => false,
        };
        self.store.borrow_mut().leq.insert((a, b), r);
        r
    }

    /// `μ^{n,k}`: grafts the depth-`k` behaviours at the bottom of a depth-`n`
    /// behaviour with inner leaves.
    pub fn mult(&self, n: usize, k: usize, nested: Beh) -> Result<Beh, MonadError> {
        if self.depth(nested) != n {
            return Err(MonadError::DepthMismatch(self.depth(nested), n));
        }
        self.graft(nested, k)
    }

    fn graft(&self, b: Beh, k: usize) -> Result<Beh, MonadError> {
        let inner = |l: Leaf| -> Result<Beh, MonadError> {
            match l {
                Leaf::Inner(c) if self.depth(c) == k => Ok(c),
                Leaf::Inner(c) => Err(MonadError::DepthMismatch(self.depth(c), k)),
                Leaf::Base(_) => {
                    Err(MonadError::ShapeMismatch("base leaf where a nested behaviour was expected".into()))
                }
            }
        };
        match self.node(b) {
            Node::Leaf(l) => inner(l),
            Node::Deadlock(d) => Ok(self.deadlock(d + k)),
            Node::Layer { depth, items } => {
                let mut out = Vec::with_capacity(items.len());
                for it in items {
                    out.push(match it {
                        Item::Act { ready, label, child } => Item::Act { ready, label, child: self.graft(child, k)? },
                        Item::Halt => Item::Halt,
                    });
                }
                self.layer(depth + k, out)
            }
            Node::Dist { depth, entries } => {
                let mut out = Vec::new();
                for (w, l, p) in entries {
                    let c = inner(l)?;
                    let Node::Dist { entries: inner_entries, .. } = self.node(c) else { unreachable!() };
                    for (w2, l2, q) in inner_entries {
                        let mut w3 = w.clone();
                        w3.extend(w2);
                        out.push((w3, l2, &p * &q));
                    }
                }
                self.dist(depth + k, out)
            }
        }
    }

    /// Rebuilds `b` in `target` with every leaf replaced by `f(leaf)`.
    pub fn map_leaves(
        &self,
        b: Beh,
        target: &Space,
        f: &mut dyn FnMut(Leaf) -> Result<Leaf, MonadError>,
    ) -> Result<Beh, MonadError> {
        let mut memo = HashMap::new();
        self.map_rec(b, target, f, &mut memo)
    }

    fn map_rec(
        &self,
        b: Beh,
        target: &Space,
        f: &mut dyn FnMut(Leaf) -> Result<Leaf, MonadError>,
        memo: &mut HashMap<Beh, Beh>,
    ) -> Result<Beh, MonadError> {
        if let Some(&r) = memo.get(&b) {
            return Ok(r);
        }
        let r = match self.node(b) {
            Node::Leaf(l) => target.leaf(f(l)?)?,
            Node::Deadlock(d) => target.deadlock(d),
            Node::Layer { depth, items } => {
                let mut out = Vec::with_capacity(items.len());
                for it in items {
                    out.push(match it {
                        Item::Act { ready, label, child } => {
                            Item::Act { ready, label, child: self.map_rec(child, target, f, memo)? }
                        }
                        Item::Halt => Item::Halt,
                    });
                }
                target.layer(depth, out)?
            }
            Node::Dist { depth, entries } => {
                let mut out = Vec::with_capacity(entries.len());
                for (w, l, p) in entries {
                    out.push((w, f(l)?, p));
                }
                target.dist(depth, out)?
            }
        };
        memo.insert(b, r);
        Ok(r)
    }

    /// Functor action of a monotone map of bases; `target` must live over the
    /// codomain.
    pub fn map(&self, f: &crate::poset::MonotoneMap, b: Beh, target: &Space) -> Result<Beh, MonadError> {
        if **f.domain() != *self.base || **f.codomain() != *target.base || target.sem != self.sem {
            return Err(MonadError::BaseMismatch);
        }
        self.map_leaves(b, target, &mut |l| match l {
            Leaf::Base(x) => Ok(Leaf::Base(f.apply(x))),
            Leaf::Inner(_) => Err(MonadError::ShapeMismatch("functor action on a nested behaviour".into())),
        })
    }

    /// Cuts a depth-`n+k` behaviour after `n` layers, giving a preimage under
    /// `μ^{n,k}`.
    pub fn split(&self, n: usize, b: Beh) -> Result<Beh, MonadError> {
        let d = self.depth(b);
        if d < n {
            return Err(MonadError::DepthMismatch(d, n));
        }
        if n == 0 {
            return match self.node(b) {
                Node::Deadlock(_) => Ok(self.deadlock(0)),
                _ => self.leaf(Leaf::Inner(b)),
            };
        }
        match self.node(b) {
            Node::Leaf(_) => unreachable!("depth is at least one"),
            Node::Deadlock(_) => Ok(self.deadlock(n)),
            Node::Layer { items, .. } => {
                let mut out = Vec::with_capacity(items.len());
                for it in items {
                    out.push(match it {
                        Item::Act { ready, label, child } => {
                            Item::Act { ready, label, child: self.split(n - 1, child)? }
                        }
                        Item::Halt => Item::Halt,
                    });
                }
                self.layer(n, out)
            }
            Node::Dist { entries, .. } => {
                let mut groups: std::collections::BTreeMap<Word, Vec<(Word, Leaf, Rational)>> = Default::default();
                for (w, l, p) in entries {
                    let (head, tail) = w.split_at(n);
                    groups.entry(head.to_vec()).or_default().push((tail.to_vec(), l, p));
                }
                let mut out = Vec::new();
                for (head, rest) in groups {
                    let mass: Rational = rest.iter().map(|e| &e.2).sum();
                    let inner = self.dist(d - n, rest.into_iter().map(|(w, l, p)| (w, l, &p / &mass)))?;
                    out.push((head, Leaf::Inner(inner), mass));
                }
                self.dist(n, out)
            }
        }
    }

    /// Canonical s-expression.
    pub fn show(&self, b: Beh) -> String {
        match self.node(b) {
            Node::Leaf(l) => self.show_leaf(l),
            Node::Deadlock(_) => "0".into(),
            Node::Layer { items, .. } => {
                let tag = if self.sem.kind.is_convex() { "conv" } else { "down" };
                let mut parts: Vec<String> = items
                    .iter()
                    .map(|it| match it {
                        Item::Halt => "halt".to_string(),
                        Item::Act { ready, label, child } => {
                            let ready = if self.sem.kind == SemKind::ReadySim {
                                self.sem.show_ready(*ready)
                            } else {
                                String::new()
                            };
                            format!("({}{} {})", self.sem.label(*label), ready, self.show(*child))
                        }
                    })
                    .collect();
                parts.sort();
                if parts.is_empty() {
                    format!("({tag})")
                } else {
                    format!("({tag} {})", parts.join(" "))
                }
            }
            Node::Dist { entries, .. } => {
                let mut parts: Vec<String> = entries
                    .iter()
                    .map(|(w, l, p)| format!("({p} {} {})", self.show_word(w), self.show_leaf(*l)))
                    .collect();
                parts.sort();
                if parts.is_empty() {
                    "(dist)".into()
                } else {
                    format!("(dist {})", parts.join(" "))
                }
            }
        }
    }

    pub fn show_word(&self, w: &[u16]) -> String {
        if w.is_empty() {
            "eps".into()
        } else {
            w.iter().map(|&a| self.sem.label(a)).collect::<Vec<_>>().join(".")
        }
    }

    fn show_leaf(&self, l: Leaf) -> String {
        match l {
            Leaf::Base(x) => self.base.name(x).to_string(),
            Leaf::Inner(c) => format!("[{}]", self.show(c)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::{validate_poset, MonotoneMap};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn space(kind: SemKind, labels: &[&str]) -> Space {
        Space::over_one(Semantics::new(kind, labels).unwrap())
    }

    #[test]
    fn units() {
        let b = space(SemKind::Bisim, &["a"]);
        assert_eq!(b.show(b.unit(0).unwrap()), "•");
        let s = space(SemKind::Sync, &["a"]);
        let live = s.unit(0).unwrap();
        let dead = s.deadlock(0);
        assert_ne!(live, dead);
        assert!(!s.leq(live, dead) && !s.leq(dead, live));
        let p = space(SemKind::PTrace, &["a"]);
        assert_eq!(p.show(p.unit(0).unwrap()), "(dist (1 eps •))");
        assert!(b.unit(3).is_err());
    }

    #[test]
    fn bisim_mult_is_grafting() {
        let s = space(SemKind::Bisim, &["a", "b"]);
        let dot = s.unit(0).unwrap();
        let inner = s.layer(1, [Item::act(1, dot)]).unwrap();
        let leaf = s.leaf(Leaf::Inner(inner)).unwrap();
        let nested = s.layer(1, [Item::act(0, leaf)]).unwrap();
        let flat = s.mult(1, 1, nested).unwrap();
        assert_eq!(s.show(flat), "(conv (a (conv (b •))))");
        assert_eq!(s.depth(flat), 2);
        assert!(s.mult(2, 1, nested).is_err());
    }

    #[test]
    fn sync_mult_prunes() {
        let s = space(SemKind::Sync, &["a"]);
        let dead1 = s.deadlock(1);
        let leaf = s.leaf(Leaf::Inner(dead1)).unwrap();
        let nested = s.layer(1, [Item::act(0, leaf)]).unwrap();
        // the nested layer itself is live
        assert!(!s.is_deadlock(nested));
        assert_eq!(s.mult(1, 1, nested).unwrap(), s.deadlock(2));
    }

    #[test]
    fn ptrace_mult_concatenates() {
        let s = space(SemKind::PTrace, &["a", "b"]);
        let inner = s.dist(1, [(vec![1], Leaf::Base(0), Rational::one())]).unwrap();
        let nested = s.dist(1, [(vec![0], Leaf::Inner(inner), r(1, 2))]).unwrap();
        let flat = s.mult(1, 1, nested).unwrap();
        assert_eq!(s.show(flat), "(dist (1/2 a.b •))");
    }

    #[test]
    fn orders() {
        let s = space(SemKind::Sim, &["a", "b"]);
        let dot = s.unit(0).unwrap();
        let a = s.layer(1, [Item::act(0, dot)]).unwrap();
        let ab = s.layer(1, [Item::act(0, dot), Item::act(1, dot)]).unwrap();
        assert!(s.leq(a, ab));
        assert!(!s.leq(ab, a));
        let y = space(SemKind::Sync, &["a"]);
        let dot = y.unit(0).unwrap();
        let live = y.layer(1, [Item::act(0, dot)]).unwrap();
        let dead = y.deadlock(1);
        assert!(!y.leq(dead, live) && !y.leq(live, dead));
        assert_eq!(y.layer(1, []).unwrap(), dead);
    }

    #[test]
    fn canonical_generators() {
        let base = Arc::new(validate_poset(["x", "y", "z"], &[("x", "y"), ("y", "z")]).unwrap());
        let sem = Semantics::new(SemKind::Bisim, &["a"]).unwrap();
        let s = Space::new(sem.clone(), base.clone());
        let [x, y, z] = [0, 1, 2].map(|i| s.unit(i).unwrap());
        let hull = s.layer(1, [Item::act(0, x), Item::act(0, y), Item::act(0, z)]).unwrap();
        let ends = s.layer(1, [Item::act(0, x), Item::act(0, z)]).unwrap();
        assert_eq!(hull, ends);
        let d = Space::new(Semantics::new(SemKind::Sim, &["a"]).unwrap(), base);
        let [x, z] = [0, 2].map(|i| d.unit(i).unwrap());
        assert_eq!(d.layer(1, [Item::act(0, x), Item::act(0, z)]).unwrap(), d.layer(1, [Item::act(0, z)]).unwrap());
    }

    #[test]
    fn functor_action() {
        let base = Arc::new(FinPoset::discrete(["x", "y"]));
        let one = Arc::new(FinPoset::discrete(["z"]));
        let sem = Semantics::new(SemKind::Sim, &["a"]).unwrap();
        let s = Space::new(sem.clone(), base.clone());
        let t = Space::new(sem, one.clone());
        let b = s.layer(1, [Item::act(0, s.unit(0).unwrap()), Item::act(0, s.unit(1).unwrap())]).unwrap();
        let f = MonotoneMap::new(base.clone(), one, vec![0, 0]).unwrap();
        assert_eq!(t.show(s.map(&f, b, &t).unwrap()), "(down (a z))");
        let id = MonotoneMap::identity(base);
        assert_eq!(s.map(&id, b, &s).unwrap(), b);
    }

    #[test]
    fn split_is_a_preimage() {
        let s = space(SemKind::PTrace, &["a", "b"]);
        let d = s
            .dist(
                2,
                [
                    (vec![0, 1], Leaf::Base(0), r(1, 3)),
                    (vec![0, 0], Leaf::Base(0), r(1, 6)),
                    (vec![1, 1], Leaf::Base(0), r(1, 2)),
                ],
            )
            .unwrap();
        let cut = s.split(1, d).unwrap();
        assert_eq!(s.mult(1, 1, cut).unwrap(), d);
    }

    #[test]
    fn dist_checks_mass() {
        let s = space(SemKind::PTrace, &["a"]);
        assert!(matches!(
            s.dist(0, [(vec![], Leaf::Base(0), r(3, 4)), (vec![], Leaf::Base(0), r(1, 2))]),
            Err(MonadError::MassExceedsOne(_))
        ));
    }
}
