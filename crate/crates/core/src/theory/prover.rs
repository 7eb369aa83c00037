use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::sync::Arc;

use super::term::{depth_of, substitute};
use super::{GradedTheory, Inequation, Term, TheoryError};
use crate::poset::FinPoset;

/// Limits for one saturation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Budget {
    /// Node-count bound on terms; defaults to the larger goal side.
    pub max_size: Option<usize>,
    pub max_terms: usize,
    pub max_rounds: usize,
    pub max_instances: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_size: None, max_terms: 20_000, max_rounds: 64, max_instances: 400_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetUsed {
    pub size_bound: usize,
    pub terms: usize,
    pub instances: usize,
    pub rounds: usize,
    pub facts: usize,
    /// No rule produced anything new in the last round.
    pub saturated: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Rule {
    Var,
    Ar,
    Trans,
    Mon,
    Ax1 { axiom: usize, subst: BTreeMap<String, Term> },
    Ax2 { axiom: usize, subst: BTreeMap<String, Term>, subterm: Term, i: usize, j: usize },
}

/// One derived judgement `Γ ⊢_depth lhs ≤ rhs`; premises index earlier steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Step {
    pub depth: usize,
    pub lhs: Term,
    pub rhs: Term,
    pub rule: Rule,
    pub premises: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Proved(Vec<Step>),
    NotProvedWithinBudget(BudgetUsed),
}

impl Verdict {
    pub fn is_proved(&self) -> bool {
        matches!(self, Verdict::Proved(_))
    }
}

type Id = u32;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Shape {
    Var(usize),
    App(usize, Vec<Id>),
}

struct Node {
    depth: usize,
    shape: Shape,
}

struct Universe {
    nodes: Vec<Node>,
    index: HashMap<(usize, Shape), Id>,
    /// Node ids per depth, and each node's position in that list.
    by_depth: Vec<Vec<Id>>,
    local: Vec<usize>,
    /// (depth, op) → nodes with that head.
    by_head: HashMap<(usize, usize), Vec<Id>>,
}

impl Universe {
    fn build(
        th: &GradedTheory,
        ctx: &FinPoset,
        top: usize,
        all_depths: bool,
        size: usize,
        max_terms: usize,
    ) -> Result<Universe, String> {
        let sig = &th.signature;
        let dmax = sig.ops().iter().map(|o| o.depth).max().unwrap_or(0).max(1);
        // by[k][s]: nodes of depth k and size s
        let mut by: Vec<Vec<Vec<Id>>> = vec![vec![Vec::new(); size + 1]; top + 1];
        let mut nodes: Vec<Node> = Vec::new();
        let mut index: HashMap<(usize, Shape), Id> = HashMap::new();
        let limit = |k: usize| if all_depths { size } else { size.saturating_sub((top - k).div_ceil(dmax)) };
        let mut push = |nodes: &mut Vec<Node>,
                        by: &mut Vec<Vec<Vec<Id>>>,
                        k: usize,
                        s: usize,
                        shape: Shape|
         -> Result<(), String> {
            if nodes.len() >= max_terms {
                return Err(format!("more than {max_terms} terms of size <= {size}"));
            }
            let id = nodes.len() as Id;
            index.insert((k, shape.clone()), id);
            nodes.push(Node { depth: k, shape });
            by[k][s].push(id);
            Ok(())
        };
        for s in 1..=size {
            for k in 0..=top {
                if s > limit(k) {
                    continue;
                }
                if s == 1 && k == 0 {
                    for x in 0..ctx.len() {
                        push(&mut nodes, &mut by, 0, 1, Shape::Var(x))?;
                    }
                }
                for (oi, op) in sig.ops().iter().enumerate() {
                    if op.depth > k {
                        continue;
                    }
                    let m = k - op.depth;
                    let n = op.arity_len();
                    if n == 0 {
                        if s == 1 {
                            push(&mut nodes, &mut by, k, 1, Shape::App(oi, Vec::new()))?;
                        }
                        continue;
                    }
                    if s < n + 1 {
                        continue;
                    }
                    for comp in compositions(s - 1, n) {
                        let lists: Vec<Vec<Id>> = comp.iter().map(|&c| by[m][c].clone()).collect();
                        if lists.iter().any(|l| l.is_empty()) {
                            continue;
                        }
                        let mut pick = vec![0usize; n];
                        loop {
                            let args: Vec<Id> = (0..n).map(|i| lists[i][pick[i]]).collect();
                            push(&mut nodes, &mut by, k, s, Shape::App(oi, args))?;
                            let mut i = n;
                            loop {
                                if i == 0 {
                                    break;
                                }
                                i -= 1;
                                pick[i] += 1;
                                if pick[i] < lists[i].len() {
                                    break;
                                }
                                pick[i] = 0;
                                if i == 0 {
                                    i = usize::MAX;
                                    break;
                                }
                            }
                            if i == usize::MAX {
                                break;
                            }
                        }
                    }
                }
            }
        }
        let keep: Vec<bool> = if all_depths {
            vec![true; nodes.len()]
        } else {
            let mut keep = vec![false; nodes.len()];
            for id in (0..nodes.len()).rev() {
                if nodes[id].depth == top {
                    keep[id] = true;
                }
                if keep[id] {
                    if let Shape::App(_, args) = &nodes[id].shape {
                        for &a in args {
                            keep[a as usize] = true;
                        }
                    }
                }
            }
            keep
        };
        let mut remap = vec![Id::MAX; nodes.len()];
        let mut out = Universe {
            nodes: Vec::new(),
            index: HashMap::new(),
            by_depth: vec![Vec::new(); top + 1],
            local: Vec::new(),
            by_head: HashMap::new(),
        };
        for (old, node) in nodes.into_iter().enumerate() {
            if !keep[old] {
                continue;
            }
            let shape = match node.shape {
                Shape::Var(x) => Shape::Var(x),
                Shape::App(op, args) => Shape::App(op, args.iter().map(|&a| remap[a as usize]).collect()),
            };
            let id = out.nodes.len() as Id;
            remap[old] = id;
            out.index.insert((node.depth, shape.clone()), id);
            out.local.push(out.by_depth[node.depth].len());
            out.by_depth[node.depth].push(id);
            if let Shape::App(op, _) = &shape {
                out.by_head.entry((node.depth, *op)).or_default().push(id);
            }
            out.nodes.push(Node { depth: node.depth, shape });
        }
        Ok(out)
    }

    fn lookup(&self, th: &GradedTheory, ctx: &FinPoset, depth: usize, t: &Term) -> Option<Id> {
        match t {
            Term::Var(x) => {
                let i = ctx.index_of(x).ok()?;
                (depth == 0).then(|| self.index.get(&(0, Shape::Var(i))).copied()).flatten()
            }
            Term::App(name, args) => {
                let oi = th.signature.index_of(name)?;
                let d = th.signature.op(oi).depth;
                let m = depth.checked_sub(d)?;
                let ids = args.iter().map(|a| self.lookup(th, ctx, m, a)).collect::<Option<Vec<_>>>()?;
                self.index.get(&(depth, Shape::App(oi, ids))).copied()
            }
        }
    }

    fn term(&self, th: &GradedTheory, ctx: &FinPoset, id: Id) -> Term {
        match &self.nodes[id as usize].shape {
            Shape::Var(x) => Term::Var(ctx.name(*x).to_string()),
            Shape::App(op, args) => {
                Term::App(th.signature.op(*op).name.clone(), args.iter().map(|&a| self.term(th, ctx, a)).collect())
            }
        }
    }
}

/// Compositions of `total` into `n` positive parts.
fn compositions(total: usize, n: usize) -> Vec<Vec<usize>> {
    fn go(total: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 1 {
            if total >= 1 {
                cur.push(total);
                out.push(cur.clone());
                cur.pop();
            }
            return;
        }
        for first in 1..=total.saturating_sub(n - 1) {
            cur.push(first);
            go(total - first, n - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if n > 0 {
        go(total, n, &mut Vec::new(), &mut out);
    }
    out
}

/// Square bit matrix.
struct Bits {
    words: usize,
    data: Vec<u64>,
}

impl Bits {
    fn new(n: usize) -> Bits {
        let words = n.div_ceil(64).max(1);
        Bits { words, data: vec![0; n * words] }
    }

    fn get(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize) {
        self.data[i * self.words + j / 64] |= 1 << (j % 64);
    }

    fn count(&self) -> usize {
        self.data.iter().map(|w| w.count_ones() as usize).sum()
    }
}

#[derive(Clone, Copy)]
enum Just {
    Var,
    Ar,
    Mon,
    Ax(usize),
}

struct Base {
    round: u32,
    just: Just,
}

enum AxKind {
    One,
    Two { subterm: Term, i: usize, j: usize },
}

struct Instance {
    axiom: usize,
    kind: usize,
    subst: Vec<Id>,
    lhs: Id,
    rhs: Id,
    premises: Vec<(Id, Id)>,
}

struct Pattern {
    axiom: usize,
    lhs: Term,
    rhs: Term,
    /// depth of the pattern sides relative to the substitution depth
    depth: usize,
    kind: AxKind,
}

/// The outcome of saturating all terms up to a size bound.
pub struct Saturation {
    theory: GradedTheory,
    ctx: Arc<FinPoset>,
    uni: Universe,
    rel: Vec<Bits>,
    base: HashMap<(Id, Id), Base>,
    patterns: Vec<Pattern>,
    instances: Vec<Instance>,
    pub used: BudgetUsed,
}

/// Saturates the terms of depth `top` (and their subterms, or all depths up to
/// `top` when `all_depths`) of size at most `size` in context `ctx`.
pub fn saturate(
    theory: &GradedTheory,
    ctx: Arc<FinPoset>,
    top: usize,
    all_depths: bool,
    size: usize,
    budget: &Budget,
) -> Result<Saturation, TheoryError> {
    let uni =
        Universe::build(theory, &ctx, top, all_depths, size, budget.max_terms).map_err(TheoryError::BudgetTooSmall)?;
    let mut sat = Saturation {
        theory: theory.clone(),
        ctx,
        rel: uni.by_depth.iter().map(|v| Bits::new(v.len())).collect(),
        uni,
        base: HashMap::new(),
        patterns: Vec::new(),
        instances: Vec::new(),
        used: BudgetUsed {
            size_bound: size,
            terms: 0,
            instances: 0,
            rounds: 0,
            facts: 0,
            saturated: false,
            note: None,
        },
    };
    sat.used.terms = sat.uni.nodes.len();
    sat.build_patterns();
    if let Err(note) = sat.build_instances(top, budget.max_instances) {
        sat.used.note = Some(note);
    }
    sat.used.instances = sat.instances.len();
    sat.run(budget.max_rounds, None);
    Ok(sat)
}

impl Saturation {
    fn has(&self, l: Id, r: Id) -> bool {
        let (nl, nr) = (&self.uni.nodes[l as usize], &self.uni.nodes[r as usize]);
        nl.depth == nr.depth && self.rel[nl.depth].get(self.uni.local[l as usize], self.uni.local[r as usize])
    }

    fn add(&mut self, l: Id, r: Id, round: u32, just: Just) -> bool {
        if self.has(l, r) {
            return false;
        }
        let d = self.uni.nodes[l as usize].depth;
        self.rel[d].set(self.uni.local[l as usize], self.uni.local[r as usize]);
        self.base.insert((l, r), Base { round, just });
        true
    }

    fn build_patterns(&mut self) {
        let sig = &self.theory.signature;
        for (ai, ax) in self.theory.axioms.iter().enumerate() {
            self.patterns.push(Pattern {
                axiom: ai,
                lhs: ax.lhs.clone(),
                rhs: ax.rhs.clone(),
                depth: ax.depth,
                kind: AxKind::One,
            });
            let mut seen = BTreeSet::new();
            for side in [&ax.lhs, &ax.rhs] {
                for (sub, d) in positions(sig, side, ax.depth) {
                    let Term::App(name, args) = &sub else { continue };
                    let Some(op) = sig.get(name) else { continue };
                    for (i, j) in op.arity.strict_pairs() {
                        if seen.insert((sub.clone(), i, j)) {
                            self.patterns.push(Pattern {
                                axiom: ai,
                                lhs: args[i].clone(),
                                rhs: args[j].clone(),
                                depth: d - op.depth,
                                kind: AxKind::Two { subterm: sub.clone(), i, j },
                            });
                        }
                    }
                }
            }
        }
    }

    fn build_instances(&mut self, top: usize, cap: usize) -> Result<(), String> {
        let th = &self.theory;
        let uni = &self.uni;
        let mut out = Vec::new();
        let mut seen: BTreeSet<(usize, Vec<Id>)> = BTreeSet::new();
        for (pi, pat) in self.patterns.iter().enumerate() {
            let ax = &th.axioms[pat.axiom];
            let avars: Vec<String> = ax.context.elements().to_vec();
            for k in 0..=top.saturating_sub(pat.depth) {
                if pat.depth + k > top {
                    continue;
                }
                let (side, other) = match (&pat.lhs, &pat.rhs) {
                    (Term::App(..), _) => (&pat.lhs, &pat.rhs),
                    (_, Term::App(..)) => (&pat.rhs, &pat.lhs),
                    _ => (&pat.lhs, &pat.rhs),
                };
                let candidates: Vec<Id> = match side {
                    Term::App(name, _) => {
                        let oi = th.signature.index_of(name).expect("axioms are well-formed");
                        uni.by_head.get(&(pat.depth + k, oi)).cloned().unwrap_or_default()
                    }
                    Term::Var(_) => uni.by_depth.get(k).cloned().unwrap_or_default(),
                };
                for cand in candidates {
                    let mut bind: BTreeMap<String, Id> = BTreeMap::new();
                    if !match_pattern(th, uni, side, pat.depth + k, cand, &mut bind) {
                        continue;
                    }
                    let _ = other;
                    let free: Vec<&String> = avars.iter().filter(|v| !bind.contains_key(*v)).collect();
                    let pool = &uni.by_depth[k];
                    let mut pick = vec![0usize; free.len()];
                    if !free.is_empty() && pool.is_empty() {
                        continue;
                    }
                    loop {
                        let mut g = bind.clone();
                        for (f, &p) in free.iter().zip(&pick) {
                            g.insert((*f).clone(), pool[p]);
                        }
                        let subst: Vec<Id> = avars.iter().map(|v| g[v]).collect();
                        if seen.insert((pi, subst.clone())) {
                            let l = build(th, uni, &pat.lhs, pat.depth + k, &g);
                            let r = build(th, uni, &pat.rhs, pat.depth + k, &g);
                            if let (Some(l), Some(r)) = (l, r) {
                                let mut premises = Vec::new();
                                for (xi, x) in avars.iter().enumerate() {
                                    for (yi, y) in avars.iter().enumerate() {
                                        if ax.context.leq(xi, yi) {
                                            premises.push((g[x], g[y]));
                                        }
                                    }
                                }
                                out.push(Instance { axiom: pat.axiom, kind: pi, subst, lhs: l, rhs: r, premises });
                                if out.len() > cap {
                                    self.instances = out;
                                    return Err(format!("more than {cap} axiom instances"));
                                }
                            }
                        }
                        // next free assignment
                        let mut i = free.len();
                        let mut done = true;
                        while i > 0 {
                            i -= 1;
                            pick[i] += 1;
                            if pick[i] < pool.len() {
                                done = false;
                                break;
                            }
                            pick[i] = 0;
                        }
                        if done {
                            break;
                        }
                    }
                }
            }
        }
        self.instances = out;
        Ok(())
    }

    fn run(&mut self, max_rounds: usize, goal: Option<(Id, Id)>) {
        let var_pairs: Vec<(Id, Id)> = {
            let mut v = Vec::new();
            for x in 0..self.ctx.len() {
                for y in 0..self.ctx.len() {
                    if self.ctx.leq(x, y) {
                        let a = self.uni.index.get(&(0, Shape::Var(x)));
                        let b = self.uni.index.get(&(0, Shape::Var(y)));
                        if let (Some(&a), Some(&b)) = (a, b) {
                            v.push((a, b));
                        }
                    }
                }
            }
            v
        };
        for (a, b) in var_pairs {
            self.add(a, b, 0, Just::Var);
        }
        let mut round = 0u32;
        loop {
            if goal.is_some_and(|(l, r)| self.has(l, r)) {
                break;
            }
            if round as usize >= max_rounds {
                self.used.note.get_or_insert_with(|| format!("stopped after {max_rounds} rounds"));
                break;
            }
            round += 1;
            let before = self.base.len();
            self.round_ar(round);
            self.round_mon(round);
            self.round_ax(round);
            let new_base = self.base.len() > before;
            let new_closure = if new_base { self.close() } else { false };
            if !new_base && !new_closure {
                self.used.saturated = true;
                break;
            }
        }
        self.used.rounds = round as usize;
        self.used.facts = self.rel.iter().map(Bits::count).sum();
    }

    fn round_ar(&mut self, round: u32) {
        for id in 0..self.uni.nodes.len() as Id {
            if self.has(id, id) {
                continue;
            }
            let Shape::App(op, args) = &self.uni.nodes[id as usize].shape else { continue };
            let arity = &self.theory.signature.op(*op).arity;
            let mut ok = true;
            'outer: for i in 0..args.len() {
                for j in 0..args.len() {
                    if arity.leq(i, j) && !self.has(args[i], args[j]) {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if ok {
                self.add(id, id, round, Just::Ar);
            }
        }
    }

    fn round_mon(&mut self, round: u32) {
        let mut heads: Vec<(usize, usize)> = self.uni.by_head.keys().copied().collect();
        heads.sort();
        for key in heads {
            let group = self.uni.by_head[&key].clone();
            let defined: Vec<Id> = group.iter().copied().filter(|&s| self.has(s, s)).collect();
            for &s in &defined {
                for &t in &defined {
                    if s == t || self.has(s, t) {
                        continue;
                    }
                    let (Shape::App(_, fa), Shape::App(_, ga)) =
                        (&self.uni.nodes[s as usize].shape, &self.uni.nodes[t as usize].shape)
                    else {
                        continue;
                    };
                    if fa.iter().zip(ga).all(|(&a, &b)| self.has(a, b)) {
                        self.add(s, t, round, Just::Mon);
                    }
                }
            }
        }
    }

    fn round_ax(&mut self, round: u32) {
        for k in 0..self.instances.len() {
            let inst = &self.instances[k];
            if self.has(inst.lhs, inst.rhs) || !inst.premises.iter().all(|&(a, b)| self.has(a, b)) {
                continue;
            }
            let (l, r) = (inst.lhs, inst.rhs);
            self.add(l, r, round, Just::Ax(k));
        }
    }

    /// Transitive closure per depth; returns whether anything was added.
    fn close(&mut self) -> bool {
        let mut changed = false;
        for bits in &mut self.rel {
            let n = bits.data.len() / bits.words;
            let w = bits.words;
            let mut rowk = vec![0u64; w];
            for k in 0..n {
                rowk.copy_from_slice(&bits.data[k * w..(k + 1) * w]);
                for i in 0..n {
                    if i != k && bits.get(i, k) {
                        let row = &mut bits.data[i * w..(i + 1) * w];
                        for (a, b) in row.iter_mut().zip(&rowk) {
                            let next = *a | *b;
                            if next != *a {
                                changed = true;
                                *a = next;
                            }
                        }
                    }
                }
            }
        }
        changed
    }

    pub fn context(&self) -> &Arc<FinPoset> {
        &self.ctx
    }

    pub fn theory(&self) -> &GradedTheory {
        &self.theory
    }

    /// Terms of the given depth in the saturated universe.
    pub fn terms_at(&self, depth: usize) -> Vec<Term> {
        self.uni
            .by_depth
            .get(depth)
            .map(|ids| ids.iter().map(|&i| self.uni.term(&self.theory, &self.ctx, i)).collect())
            .unwrap_or_default()
    }

    pub fn contains(&self, depth: usize, t: &Term) -> bool {
        self.uni.lookup(&self.theory, &self.ctx, depth, t).is_some()
    }

    pub fn holds(&self, depth: usize, lhs: &Term, rhs: &Term) -> bool {
        match (self.id(depth, lhs), self.id(depth, rhs)) {
            (Some(l), Some(r)) => self.has(l, r),
            _ => false,
        }
    }

    pub fn defined(&self, depth: usize, t: &Term) -> bool {
        self.holds(depth, t, t)
    }

    fn id(&self, depth: usize, t: &Term) -> Option<Id> {
        self.uni.lookup(&self.theory, &self.ctx, depth, t)
    }

    /// All derived inequalities as `(depth, lhs, rhs)`.
    pub fn facts(&self) -> Vec<(usize, Term, Term)> {
        let mut out = Vec::new();
        for (d, ids) in self.uni.by_depth.iter().enumerate() {
            let terms: Vec<Term> = ids.iter().map(|&i| self.uni.term(&self.theory, &self.ctx, i)).collect();
            for (a, ta) in terms.iter().enumerate() {
                for (b, tb) in terms.iter().enumerate() {
                    if self.rel[d].get(a, b) {
                        out.push((d, ta.clone(), tb.clone()));
                    }
                }
            }
        }
        out
    }

    /// Derived order among the terms of one depth, by local index.
    pub fn order_at(&self, depth: usize) -> Vec<Vec<bool>> {
        let n = self.uni.by_depth.get(depth).map_or(0, Vec::len);
        (0..n).map(|a| (0..n).map(|b| self.rel[depth].get(a, b)).collect()).collect()
    }

    /// A replayable derivation of `lhs ≤ rhs`, if derived.
    pub fn trace(&self, depth: usize, lhs: &Term, rhs: &Term) -> Option<Vec<Step>> {
        let (l, r) = (self.id(depth, lhs)?, self.id(depth, rhs)?);
        if !self.has(l, r) {
            return None;
        }
        let mut tb = TraceBuilder { sat: self, steps: Vec::new(), memo: HashMap::new(), adj: self.adjacency() };
        tb.prove(l, r, u32::MAX);
        Some(tb.steps)
    }

    fn adjacency(&self) -> HashMap<Id, Vec<(Id, u32)>> {
        let mut adj: HashMap<Id, Vec<(Id, u32)>> = HashMap::new();
        for (&(l, r), b) in &self.base {
            adj.entry(l).or_default().push((r, b.round));
        }
        for v in adj.values_mut() {
            v.sort();
        }
        adj
    }
}

/// Subterms of `t` with the depth they sit at when `t` has depth `d`.
fn positions(sig: &super::GradedSignature, t: &Term, d: usize) -> Vec<(Term, usize)> {
    let mut out = vec![(t.clone(), d)];
    if let Term::App(name, args) = t {
        if let Some(op) = sig.get(name) {
            if d >= op.depth {
                for a in args {
                    out.extend(positions(sig, a, d - op.depth));
                }
            }
        }
    }
    out
}

fn match_pattern(
    th: &GradedTheory,
    uni: &Universe,
    pat: &Term,
    depth: usize,
    node: Id,
    bind: &mut BTreeMap<String, Id>,
) -> bool {
    let n = &uni.nodes[node as usize];
    if n.depth != depth {
        return false;
    }
    match pat {
        Term::Var(x) => match bind.get(x) {
            Some(&b) => b == node,
            None => {
                bind.insert(x.clone(), node);
                true
            }
        },
        Term::App(name, pargs) => {
            let Shape::App(op, args) = &n.shape else { return false };
            let o = th.signature.op(*op);
            if o.name != *name || args.len() != pargs.len() {
                return false;
            }
            let m = depth - o.depth;
            pargs.iter().zip(args).all(|(p, &a)| match_pattern(th, uni, p, m, a, bind))
        }
    }
}

fn build(th: &GradedTheory, uni: &Universe, pat: &Term, depth: usize, g: &BTreeMap<String, Id>) -> Option<Id> {
    match pat {
        Term::Var(x) => {
            let id = *g.get(x)?;
            (uni.nodes[id as usize].depth == depth).then_some(id)
        }
        Term::App(name, args) => {
            let oi = th.signature.index_of(name)?;
            let m = depth.checked_sub(th.signature.op(oi).depth)?;
            let ids = args.iter().map(|a| build(th, uni, a, m, g)).collect::<Option<Vec<_>>>()?;
            uni.index.get(&(depth, Shape::App(oi, ids))).copied()
        }
    }
}

struct TraceBuilder<'a> {
    sat: &'a Saturation,
    steps: Vec<Step>,
    memo: HashMap<(Id, Id), usize>,
    adj: HashMap<Id, Vec<(Id, u32)>>,
}

impl TraceBuilder<'_> {
    fn push(&mut self, l: Id, r: Id, rule: Rule, premises: Vec<usize>) -> usize {
        let s = self.sat;
        let step = Step {
            depth: s.uni.nodes[l as usize].depth,
            lhs: s.uni.term(&s.theory, &s.ctx, l),
            rhs: s.uni.term(&s.theory, &s.ctx, r),
            rule,
            premises,
        };
        self.steps.push(step);
        let idx = self.steps.len() - 1;
        self.memo.insert((l, r), idx);
        idx
    }

    // Base facts cite their premises directly; facts added by closure are
    // re-derived as a chain of base facts from rounds before `bound`.
    fn prove(&mut self, l: Id, r: Id, bound: u32) -> usize {
        if let Some(&i) = self.memo.get(&(l, r)) {
            return i;
        }
        let sat = self.sat;
        if let Some(b) = sat.base.get(&(l, r)) {
            let round = b.round;
            let (rule, prem) = match b.just {
                Just::Var => (Rule::Var, Vec::new()),
                Just::Ar => {
                    let Shape::App(op, args) = &sat.uni.nodes[l as usize].shape else { unreachable!() };
                    let arity = &sat.theory.signature.op(*op).arity;
                    let mut prem = Vec::new();
                    for i in 0..args.len() {
                        for j in 0..args.len() {
                            if arity.leq(i, j) {
                                prem.push((args[i], args[j]));
                            }
                        }
                    }
                    (Rule::Ar, prem)
                }
                Just::Mon => {
                    let (Shape::App(_, f), Shape::App(_, g)) =
                        (&sat.uni.nodes[l as usize].shape, &sat.uni.nodes[r as usize].shape)
                    else {
                        unreachable!()
                    };
                    let mut prem: Vec<(Id, Id)> = f.iter().copied().zip(g.iter().copied()).collect();
                    prem.push((l, l));
                    prem.push((r, r));
                    (Rule::Mon, prem)
                }
                Just::Ax(k) => {
                    let inst = &sat.instances[k];
                    let ax = &sat.theory.axioms[inst.axiom];
                    let subst: BTreeMap<String, Term> = ax
                        .context
                        .elements()
                        .iter()
                        .zip(&inst.subst)
                        .map(|(x, &id)| (x.clone(), sat.uni.term(&sat.theory, &sat.ctx, id)))
                        .collect();
                    let rule = match &sat.patterns[inst.kind].kind {
                        AxKind::One => Rule::Ax1 { axiom: inst.axiom, subst },
                        AxKind::Two { subterm, i, j } => {
                            Rule::Ax2 { axiom: inst.axiom, subst, subterm: subterm.clone(), i: *i, j: *j }
                        }
                    };
                    (rule, inst.premises.clone())
                }
            };
            let idx: Vec<usize> = prem.into_iter().map(|(a, b)| self.prove(a, b, round)).collect();
            return self.push(l, r, rule, idx);
        }
        let path = self.path(l, r, bound).expect("closure facts are chains of earlier base facts");
        let mut acc = self.prove(path[0], path[1], bound);
        for w in 1..path.len() - 1 {
            let next = self.prove(path[w], path[w + 1], bound);
            if w == path.len() - 2 {
                return self.push(l, r, Rule::Trans, vec![acc, next]);
            }
            let (from, to) = (path[0], path[w + 1]);
            acc = match self.memo.get(&(from, to)) {
                Some(&i) => i,
                None => self.push(from, to, Rule::Trans, vec![acc, next]),
            };
        }
        acc
    }

    fn path(&self, l: Id, r: Id, bound: u32) -> Option<Vec<Id>> {
        let mut prev: HashMap<Id, Id> = HashMap::new();
        let mut queue = VecDeque::new();
        for &(n, round) in self.adj.get(&l).map(Vec::as_slice).unwrap_or(&[]) {
            if round < bound && !prev.contains_key(&n) {
                prev.insert(n, l);
                queue.push_back(n);
            }
        }
        while let Some(u) = queue.pop_front() {
            if u == r {
                let mut path = vec![r];
                let mut cur = r;
                loop {
                    let p = prev[&cur];
                    path.push(p);
                    if p == l && path.len() >= 2 {
                        break;
                    }
                    cur = p;
                }
                path.reverse();
                return Some(path);
            }
            for &(n, round) in self.adj.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                if round < bound && !prev.contains_key(&n) {
                    prev.insert(n, u);
                    queue.push_back(n);
                }
            }
        }
        None
    }
}

/// Semi-decides `goal` by saturation; `NotProvedWithinBudget` is inconclusive.
pub fn derivable(theory: &GradedTheory, goal: &Inequation, budget: &Budget) -> Result<Verdict, TheoryError> {
    goal.validate(&theory.signature)?;
    let need = goal.lhs.size().max(goal.rhs.size());
    let size = budget.max_size.unwrap_or(need);
    if need > size {
        return Ok(Verdict::NotProvedWithinBudget(BudgetUsed {
            size_bound: size,
            terms: 0,
            instances: 0,
            rounds: 0,
            facts: 0,
            saturated: false,
            note: Some("goal exceeds the size bound".into()),
        }));
    }
    let uni = match Universe::build(theory, &goal.context, goal.depth, false, size, budget.max_terms) {
        Ok(u) => u,
        Err(note) => {
            return Ok(Verdict::NotProvedWithinBudget(BudgetUsed {
                size_bound: size,
                terms: budget.max_terms,
                instances: 0,
                rounds: 0,
                facts: 0,
                saturated: false,
                note: Some(note),
            }))
        }
    };
    let mut sat = Saturation {
        theory: theory.clone(),
        ctx: goal.context.clone(),
        rel: uni.by_depth.iter().map(|v| Bits::new(v.len())).collect(),
        uni,
        base: HashMap::new(),
        patterns: Vec::new(),
        instances: Vec::new(),
        used: BudgetUsed {
            size_bound: size,
            terms: 0,
            instances: 0,
            rounds: 0,
            facts: 0,
            saturated: false,
            note: None,
        },
    };
    sat.used.terms = sat.uni.nodes.len();
    sat.build_patterns();
    if let Err(note) = sat.build_instances(goal.depth, budget.max_instances) {
        sat.used.note = Some(note);
    }
    sat.used.instances = sat.instances.len();
    let ids = (sat.id(goal.depth, &goal.lhs), sat.id(goal.depth, &goal.rhs));
    let (Some(l), Some(r)) = ids else {
        return Err(TheoryError::MalformedGoal("goal terms missing from the universe".into()));
    };
    sat.run(budget.max_rounds, Some((l, r)));
    Ok(match sat.trace(goal.depth, &goal.lhs, &goal.rhs) {
        Some(steps) => Verdict::Proved(steps),
        None => Verdict::NotProvedWithinBudget(sat.used),
    })
}

/// Decides `Γ ⊢_depth ↓t` argument-wise: arity inequations on the arguments
/// plus definedness of each argument, then one (Ar) step.
pub fn check_defined(
    theory: &GradedTheory,
    context: Arc<FinPoset>,
    t: &Term,
    depth: usize,
    budget: &Budget,
) -> Result<Verdict, TheoryError> {
    let goal = Inequation { context: context.clone(), depth, lhs: t.clone(), rhs: t.clone() };
    goal.validate(&theory.signature)?;
    let mut steps = Vec::new();
    match defined_rec(theory, &context, t, depth, budget, &mut steps)? {
        Ok(_) => Ok(Verdict::Proved(steps)),
        Err(used) => Ok(Verdict::NotProvedWithinBudget(used)),
    }
}

fn defined_rec(
    theory: &GradedTheory,
    ctx: &Arc<FinPoset>,
    t: &Term,
    depth: usize,
    budget: &Budget,
    steps: &mut Vec<Step>,
) -> Result<Result<usize, BudgetUsed>, TheoryError> {
    let Term::App(name, args) = t else {
        steps.push(Step { depth, lhs: t.clone(), rhs: t.clone(), rule: Rule::Var, premises: Vec::new() });
        return Ok(Ok(steps.len() - 1));
    };
    let op = theory.signature.lookup(name)?.clone();
    let m = depth - op.depth;
    let mut prem = Vec::new();
    for i in 0..args.len() {
        for j in 0..args.len() {
            if !op.arity.leq(i, j) {
                continue;
            }
            if i == j {
                match defined_rec(theory, ctx, &args[i], m, budget, steps)? {
                    Ok(k) => prem.push(k),
                    Err(u) => return Ok(Err(u)),
                }
                continue;
            }
            let g = Inequation { context: ctx.clone(), depth: m, lhs: args[i].clone(), rhs: args[j].clone() };
            match derivable(theory, &g, budget)? {
                Verdict::Proved(sub) => {
                    let off = steps.len();
                    let last = sub.len() - 1;
                    for mut s in sub {
                        s.premises.iter_mut().for_each(|p| *p += off);
                        steps.push(s);
                    }
                    prem.push(off + last);
                }
                Verdict::NotProvedWithinBudget(u) => return Ok(Err(u)),
            }
        }
    }
    steps.push(Step { depth, lhs: t.clone(), rhs: t.clone(), rule: Rule::Ar, premises: prem });
    Ok(Ok(steps.len() - 1))
}

/// Replays a derivation, checking each step against its rule.
pub fn verify_trace(
    theory: &GradedTheory,
    context: &FinPoset,
    steps: &[Step],
    goal: &Inequation,
) -> Result<(), String> {
    let sig = &theory.signature;
    for (n, s) in steps.iter().enumerate() {
        let fail = |m: &str| Err(format!("step {n} ({} <= {} : {}): {m}", s.lhs, s.rhs, s.depth));
        if s.premises.iter().any(|&p| p >= n) {
            return fail("premise does not precede the step");
        }
        for side in [&s.lhs, &s.rhs] {
            match depth_of(sig, side) {
                Ok(d) if d.admits(s.depth) => {}
                _ => return fail("side does not have the stated depth"),
            }
            if side.vars().iter().any(|x| context.index_of(x).is_err()) {
                return fail("variable outside the context");
            }
        }
        let have: BTreeSet<(usize, &Term, &Term)> =
            s.premises.iter().map(|&p| (steps[p].depth, &steps[p].lhs, &steps[p].rhs)).collect();
        let needs = |d: usize, a: &Term, b: &Term| have.contains(&(d, a, b));
        match &s.rule {
            Rule::Var => match (&s.lhs, &s.rhs) {
                (Term::Var(x), Term::Var(y)) if s.depth == 0 => {
                    if !context.leq_ids(x, y).unwrap_or(false) {
                        return fail("variables are not ordered in the context");
                    }
                }
                _ => return fail("(Var) needs two variables at depth 0"),
            },
            Rule::Ar => {
                let Term::App(name, args) = &s.lhs else { return fail("(Ar) needs an application") };
                if s.lhs != s.rhs {
                    return fail("(Ar) concludes definedness");
                }
                let op = sig.lookup(name).map_err(|e| e.to_string())?;
                let m = s.depth.checked_sub(op.depth).ok_or("depth below the operation depth")?;
                for i in 0..args.len() {
                    for j in 0..args.len() {
                        if op.arity.leq(i, j) && !needs(m, &args[i], &args[j]) {
                            return fail("missing arity premise");
                        }
                    }
                }
            }
            Rule::Trans => {
                let [p, q] = s.premises[..] else { return fail("(Trans) needs two premises") };
                let (p, q) = (&steps[p], &steps[q]);
                if p.depth != s.depth || q.depth != s.depth || p.lhs != s.lhs || p.rhs != q.lhs || q.rhs != s.rhs {
                    return fail("premises do not chain");
                }
            }
            Rule::Mon => {
                let (Term::App(a, f), Term::App(b, g)) = (&s.lhs, &s.rhs) else {
                    return fail("(Mon) needs two applications");
                };
                if a != b {
                    return fail("(Mon) needs one operation");
                }
                let op = sig.lookup(a).map_err(|e| e.to_string())?;
                let m = s.depth.checked_sub(op.depth).ok_or("depth below the operation depth")?;
                if !f.iter().zip(g).all(|(x, y)| needs(m, x, y)) {
                    return fail("missing argument premise");
                }
                if !needs(s.depth, &s.lhs, &s.lhs) || !needs(s.depth, &s.rhs, &s.rhs) {
                    return fail("missing definedness premise");
                }
            }
            Rule::Ax1 { axiom, subst } | Rule::Ax2 { axiom, subst, .. } => {
                let ax = theory.axioms.get(*axiom).ok_or("unknown axiom")?;
                let k = s.depth.checked_sub(match &s.rule {
                    Rule::Ax1 { .. } => ax.depth,
                    _ => 0,
                });
                let Some(mut k) = k else { return fail("depth below the axiom depth") };
                let mut ds = Vec::new();
                for x in ax.context.elements() {
                    let Some(img) = subst.get(x) else { return fail("substitution is not total") };
                    ds.push(depth_of(sig, img).map_err(|e| e.to_string())?);
                }
                if let Rule::Ax2 { subterm, i, j, .. } = &s.rule {
                    let pos: Vec<(Term, usize)> = positions(sig, &ax.lhs, ax.depth)
                        .into_iter()
                        .chain(positions(sig, &ax.rhs, ax.depth))
                        .filter(|(t, _)| t == subterm)
                        .collect();
                    let Some((Term::App(name, args), d)) = pos.first().cloned() else {
                        return fail("subterm does not occur in the axiom");
                    };
                    let op = sig.lookup(&name).map_err(|e| e.to_string())?;
                    if *i >= args.len() || *j >= args.len() || !op.arity.leq(*i, *j) {
                        return fail("positions are not ordered in the arity");
                    }
                    let pd = d - op.depth;
                    k = match s.depth.checked_sub(pd) {
                        Some(k) => k,
                        None => return fail("depth below the subterm depth"),
                    };
                    if substitute(subst, &args[*i]) != s.lhs || substitute(subst, &args[*j]) != s.rhs {
                        return fail("conclusion is not the instantiated arity constraint");
                    }
                } else if substitute(subst, &ax.lhs) != s.lhs || substitute(subst, &ax.rhs) != s.rhs {
                    return fail("conclusion is not the instantiated axiom");
                }
                if !ds.iter().all(|d| d.admits(k)) {
                    return fail("substitution is not uniform at the required depth");
                }
                let names = ax.context.elements();
                for (xi, x) in names.iter().enumerate() {
                    for (yi, y) in names.iter().enumerate() {
                        if ax.context.leq(xi, yi) && !needs(k, &subst[x], &subst[y]) {
                            return fail("missing context premise");
                        }
                    }
                }
            }
        }
    }
    let ok = steps.iter().any(|s| s.depth == goal.depth && s.lhs == goal.lhs && s.rhs == goal.rhs);
    if ok {
        Ok(())
    } else {
        Err("no step concludes the goal".into())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{builtin_theory, parse_context, parse_goal, TheoryName};

    fn goal(th: &GradedTheory, ctx: &str, g: &str) -> Inequation {
        parse_goal(&th.signature, Arc::new(parse_context(ctx).unwrap()), g).unwrap().0
    }

    fn proves(th: &GradedTheory, g: &Inequation) -> bool {
        match derivable(th, g, &Budget::default()).unwrap() {
            Verdict::Proved(steps) => {
                verify_trace(th, &g.context, &steps, g).unwrap();
                true
            }
            Verdict::NotProvedWithinBudget(_) => false,
        }
    }

    #[test]
    fn monotone_action() {
        let th = builtin_theory(TheoryName::Jsl, &["a", "b"], 2).unwrap();
        assert!(proves(&th, &goal(&th, "x<=y", "a(x) <= a(y) : 1")));
        assert!(!proves(&th, &goal(&th, "x<=y", "a(y) <= a(x) : 1")));
        assert!(!proves(&th, &goal(&th, "x, y", "a(x) <= a(y) : 1")));
    }

    #[test]
    fn down_axiom_with_empty_rest() {
        let th = builtin_theory(TheoryName::JslDown, &["a", "b"], 2).unwrap();
        assert!(proves(&th, &goal(&th, "x<=y", "a(x)+a(y) <= a(y) : 1")));
        assert!(proves(&th, &goal(&th, "x<=y", "a(y) <= a(x)+a(y) : 1")));
        // plain JSL only has the direction given by monotonicity
        let jsl = builtin_theory(TheoryName::Jsl, &["a", "b"], 2).unwrap();
        assert!(proves(&jsl, &goal(&jsl, "x<=y", "a(x)+a(y) <= a(y) : 1")));
        assert!(!proves(&jsl, &goal(&jsl, "x<=y", "a(y) <= a(x)+a(y) : 1")));
    }

    #[test]
    fn sync_pruning() {
        let th = builtin_theory(TheoryName::JslSync, &["a", "b"], 2).unwrap();
        assert!(proves(&th, &goal(&th, "z", "a(0)+b(z) <= b(z) : 1")));
        assert!(proves(&th, &goal(&th, "z", "b(z) <= a(0)+b(z) : 1")));
    }

    #[test]
    fn distributivity_both_ways() {
        let th = builtin_theory(TheoryName::Pt, &["a"], 2).unwrap();
        assert!(proves(&th, &goal(&th, "x, y", "a(1/2 x + 1/2 y) <= 1/2 a(x) + 1/2 a(y) : 1")));
        assert!(proves(&th, &goal(&th, "x, y", "1/2 a(x) + 1/2 a(y) <= a(1/2 x + 1/2 y) : 1")));
    }

    #[test]
    fn nested_idempotence() {
        let th = builtin_theory(TheoryName::Jsl, &["a", "b"], 2).unwrap();
        let g = goal(&th, "x, y", "a(a(x)+b(y)) <= a(b(y)+a(x)) : 2");
        // both sides parse to the same sorted sum
        assert_eq!(g.lhs, g.rhs);
        assert!(proves(&th, &goal(&th, "x", "a(a(x)) + a(a(x)+a(x)) <= a(a(x)) : 2")));
        assert!(!proves(&th, &goal(&th, "x", "a(a(x)) <= a(0) : 2")));
    }

    #[test]
    fn definedness() {
        let th = builtin_theory(TheoryName::Jsl, &["a"], 2).unwrap();
        let ctx = Arc::new(parse_context("x").unwrap());
        let v = check_defined(&th, ctx.clone(), &Term::var("x"), 0, &Budget::default()).unwrap();
        assert!(v.is_proved());
        let t = parse_term(&th.signature, "a(x) + a(x)").unwrap();
        let v = check_defined(&th, ctx.clone(), &t, 1, &Budget::default()).unwrap();
        let Verdict::Proved(steps) = v else { panic!("discrete arity") };
        let g = Inequation { context: ctx.clone(), depth: 1, lhs: t.clone(), rhs: t };
        verify_trace(&th, &ctx, &steps, &g).unwrap();
    }

    #[test]
    fn ordered_arity_blocks_definedness() {
        use crate::poset::validate_poset;
        use crate::theory::{GradedSignature, OpKind, Operation};
        let arity = Arc::new(validate_poset(["i", "j"], &[("i", "j")]).unwrap());
        let sig = GradedSignature::new([Operation::new("m", arity, 0, OpKind::Custom)]).unwrap();
        let th = GradedTheory::new("custom", sig, Vec::new()).unwrap();
        let t = Term::app("m", vec![Term::var("u"), Term::var("v")]);
        let free = Arc::new(parse_context("u, v").unwrap());
        let v = check_defined(&th, free, &t, 0, &Budget::default()).unwrap();
        assert!(!v.is_proved());
        let ordered = Arc::new(parse_context("u<=v").unwrap());
        assert!(check_defined(&th, ordered, &t, 0, &Budget::default()).unwrap().is_proved());
    }

    #[test]
    fn tampered_trace_is_rejected() {
        let th = builtin_theory(TheoryName::Jsl, &["a"], 2).unwrap();
        let g = goal(&th, "x<=y", "a(x) <= a(y) : 1");
        let Verdict::Proved(mut steps) = derivable(&th, &g, &Budget::default()).unwrap() else { panic!() };
        let last = steps.len() - 1;
        steps[last].premises.clear();
        assert!(verify_trace(&th, &g.context, &steps, &g).is_err());
    }

    use crate::theory::parse_term;
}
