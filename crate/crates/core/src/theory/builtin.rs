use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use super::{
    combo_name, positional_arity, GradedSignature, GradedTheory, Inequation, OpKind, Operation, Term, TheoryError,
};
use crate::poset::{validate_poset, FinPoset};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TheoryName {
    Jsl,
    JslDown,
    JslSync,
    Pt,
    Subconvex,
}

impl TheoryName {
    pub const ALL: [TheoryName; 5] =
        [TheoryName::Jsl, TheoryName::JslDown, TheoryName::JslSync, TheoryName::Pt, TheoryName::Subconvex];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoryName::Jsl => "JSL",
            TheoryName::JslDown => "JSL_DOWN",
            TheoryName::JslSync => "JSL_SYNC",
            TheoryName::Pt => "PT",
            TheoryName::Subconvex => "SUBCONVEX",
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(self, TheoryName::Pt | TheoryName::Subconvex)
    }
}

impl fmt::Display for TheoryName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoryName {
    type Err = TheoryError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TheoryName::ALL
            .into_iter()
            .find(|t| t.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| TheoryError::Parse(format!("unknown theory `{s}`")))
    }
}

/// Builtin theory with sums and combinations up to `width` summands; PT
/// coefficients use denominators up to `width`.
pub fn builtin_theory<S: AsRef<str>>(
    name: TheoryName,
    labels: &[S],
    width: usize,
) -> Result<GradedTheory, TheoryError> {
    builtin_theory_with(name, labels, width, width)
}

/// As [`builtin_theory`] with an explicit coefficient grid: all `k/d` with
/// `d <= grid`, plus 0.
pub fn builtin_theory_with<S: AsRef<str>>(
    name: TheoryName,
    labels: &[S],
    width: usize,
    grid: usize,
) -> Result<GradedTheory, TheoryError> {
    let labels: Vec<String> =
        labels.iter().map(|l| l.as_ref().to_string()).collect::<BTreeSet<_>>().into_iter().collect();
    if labels.is_empty() && name != TheoryName::Subconvex {
        return Err(TheoryError::EmptyLabelSet);
    }
    if width < 2 {
        return Err(TheoryError::InvalidBound(format!("width {width} is below 2")));
    }
    if name.is_probabilistic() && grid < 1 {
        return Err(TheoryError::InvalidBound("empty coefficient grid".into()));
    }
    let mut b = Builder::default();
    match name {
        TheoryName::Jsl | TheoryName::JslDown | TheoryName::JslSync => {
            b.jsl(&labels, width, if name == TheoryName::JslSync { 0 } else { 1 })?;
            if name == TheoryName::JslDown {
                b.down(&labels, width)?;
            }
            if name == TheoryName::JslSync {
                b.sync(&labels, width)?;
            }
        }
        TheoryName::Pt | TheoryName::Subconvex => {
            let g = grid_points(grid);
            b.subconvex(&g, width)?;
            if name == TheoryName::Pt {
                b.actions(&labels, &g, width)?;
            }
        }
    }
    let mut th = GradedTheory::new(name.as_str(), b.sig, b.axioms)?;
    th.family = Some(name);
    th.labels = if name == TheoryName::Subconvex { Vec::new() } else { labels };
    Ok(th)
}

fn grid_points(d: usize) -> Vec<Rational> {
    let mut pts = BTreeSet::new();
    pts.insert(Rational::zero());
    for den in 1..=d as i64 {
        for num in 1..=den {
            pts.insert(Rational::new(num, den));
        }
    }
    pts.into_iter().collect()
}

fn var(i: usize) -> Term {
    Term::var(format!("x{}", i + 1))
}

fn discrete_ctx(vars: &BTreeSet<String>) -> Arc<FinPoset> {
    Arc::new(FinPoset::discrete(vars.iter()))
}

#[derive(Default)]
struct Builder {
    sig: GradedSignature,
    axioms: Vec<Inequation>,
    seen: BTreeSet<(Vec<String>, String, String)>,
}

impl Builder {
    fn op(&mut self, name: String, n: usize, depth: usize, kind: OpKind) -> Result<(), TheoryError> {
        self.sig.add(Operation::new(name, positional_arity(n), depth, kind)).map(|_| ())
    }

    fn ineq(&mut self, ctx: Arc<FinPoset>, depth: usize, lhs: Term, rhs: Term) -> Result<(), TheoryError> {
        let key =
            (ctx.strict_pairs().iter().map(|(a, b)| format!("{a}<{b}")).collect(), lhs.to_string(), rhs.to_string());
        if lhs != rhs && self.seen.insert(key) {
            self.axioms.push(Inequation::new(&self.sig, ctx, depth, lhs, rhs)?);
        }
        Ok(())
    }

    fn equation(&mut self, ctx: Arc<FinPoset>, depth: usize, lhs: Term, rhs: Term) -> Result<(), TheoryError> {
        self.ineq(ctx.clone(), depth, lhs.clone(), rhs.clone())?;
        self.ineq(ctx, depth, rhs, lhs)
    }

    fn jsl(&mut self, labels: &[String], width: usize, zero_depth: usize) -> Result<(), TheoryError> {
        self.op("0".into(), 0, zero_depth, OpKind::Zero)?;
        for n in 1..=width {
            for seq in label_multisets(labels, n) {
                self.op(seq.join("+"), n, 1, OpKind::Choice(seq))?;
            }
        }
        // equations between sums with the same set of (label, variable) pairs
        let mut groups: BTreeMap<BTreeSet<(String, usize)>, Vec<Vec<(String, usize)>>> = BTreeMap::new();
        for n in 1..=width {
            for seq in label_multisets(labels, n) {
                for vars in all_assignments(n, width) {
                    let pairs: Vec<(String, usize)> = seq.iter().cloned().zip(vars).collect();
                    let set: BTreeSet<(String, usize)> = pairs.iter().cloned().collect();
                    groups.entry(set).or_default().push(pairs);
                }
            }
        }
        let mut eqs = BTreeSet::new();
        for members in groups.values() {
            for l in members {
                for r in members {
                    if l != r {
                        eqs.insert(canonical_pair(l, r));
                    }
                }
            }
        }
        for (l, r) in eqs {
            let vars: BTreeSet<String> = l.iter().map(|p| format!("x{}", p.1 + 1)).collect();
            let ctx = discrete_ctx(&vars);
            let (lt, rt) = (choice_term(&l), choice_term(&r));
            self.ineq(ctx, 1, lt, rt)?;
        }
        Ok(())
    }

    fn down(&mut self, labels: &[String], width: usize) -> Result<(), TheoryError> {
        let ctx_base = |k: usize| -> Result<Arc<FinPoset>, TheoryError> {
            let mut names = vec!["x".to_string(), "y".to_string()];
            names.extend((1..=k).map(|i| format!("z{i}")));
            Ok(Arc::new(validate_poset(names, &[("x".to_string(), "y".to_string())])?))
        };
        for a in labels {
            for k in 0..=width - 2 {
                for rest in label_multisets(labels, k) {
                    let t: Vec<(String, Term)> =
                        rest.iter().enumerate().map(|(i, b)| (b.clone(), Term::var(format!("z{}", i + 1)))).collect();
                    let mut lhs = vec![(a.clone(), Term::var("x")), (a.clone(), Term::var("y"))];
                    lhs.extend(t.iter().cloned());
                    let mut rhs = vec![(a.clone(), Term::var("y"))];
                    rhs.extend(t.iter().cloned());
                    self.equation(ctx_base(k)?, 1, sum_term(lhs), sum_term(rhs))?;
                }
            }
        }
        Ok(())
    }

    fn sync(&mut self, labels: &[String], width: usize) -> Result<(), TheoryError> {
        for a in labels {
            for k in 0..width {
                for rest in label_multisets(labels, k) {
                    let t: Vec<(String, Term)> =
                        rest.iter().enumerate().map(|(i, b)| (b.clone(), Term::var(format!("z{}", i + 1)))).collect();
                    let vars: BTreeSet<String> = (1..=k).map(|i| format!("z{i}")).collect();
                    let mut lhs = vec![(a.clone(), Term::constant("0"))];
                    lhs.extend(t.iter().cloned());
                    self.equation(discrete_ctx(&vars), 1, sum_term(lhs), sum_term(t))?;
                }
            }
        }
        Ok(())
    }

    fn subconvex(&mut self, grid: &[Rational], width: usize) -> Result<(), TheoryError> {
        self.op("0".into(), 0, 0, OpKind::Zero)?;
        let mut combos: Vec<Vec<Vec<Rational>>> = vec![vec![Vec::new()]];
        for n in 1..=width {
            let mut level = Vec::new();
            for c in tuples(grid, n) {
                if c.iter().sum::<Rational>() <= Rational::one() {
                    self.op(combo_name(&c), n, 0, OpKind::Combo(c.clone()))?;
                    level.push(c);
                }
            }
            combos.push(level);
        }
        let on = |c: &[Rational]| if c.is_empty() { "0".to_string() } else { combo_name(c) };
        let xs = |m: usize| -> Vec<Term> { (0..m).map(var).collect() };
        let ctx_of = |m: usize| discrete_ctx(&(0..m).map(|i| format!("x{}", i + 1)).collect());
        // unit: Σ δ_ik · x_k = x_i
        for n in 1..=width {
            for i in 0..n {
                let delta: Vec<Rational> =
                    (0..n).map(|k| if k == i { Rational::one() } else { Rational::zero() }).collect();
                self.equation(ctx_of(n), 0, Term::app(on(&delta), xs(n)), var(i))?;
            }
        }
        // multiplication: Σ_i p_i · Σ_k q_ik · x_k = Σ_k (Σ_i p_i q_ik) · x_k
        let gridset: BTreeSet<&Rational> = grid.iter().collect();
        for n in 1..=width {
            for m in 0..=width {
                for p in &combos[n] {
                    for rows in product_of(&combos[m], n) {
                        let r: Vec<Rational> =
                            (0..m).map(|k| (0..n).map(|i| &p[i] * &rows[i][k]).sum::<Rational>()).collect();
                        if r.iter().any(|x| !gridset.contains(x)) {
                            continue;
                        }
                        let inner: Vec<Term> = rows.iter().map(|q| Term::app(on(q), xs(m))).collect();
                        self.equation(ctx_of(m), 0, Term::app(on(p), inner), Term::app(on(&r), xs(m)))?;
                    }
                }
            }
        }
        // order: p ≤ q pointwise
        for n in 1..=width {
            for p in &combos[n] {
                for q in &combos[n] {
                    if p != q && p.iter().zip(q).all(|(a, b)| a <= b) {
                        self.ineq(ctx_of(n), 0, Term::app(on(p), xs(n)), Term::app(on(q), xs(n)))?;
                    }
                }
            }
        }
        Ok(())
    }

    fn actions(&mut self, labels: &[String], grid: &[Rational], width: usize) -> Result<(), TheoryError> {
        for a in labels {
            self.op(a.clone(), 1, 1, OpKind::Action(a.clone()))?;
        }
        let ctx_of = |m: usize| discrete_ctx(&(0..m).map(|i| format!("x{}", i + 1)).collect());
        for a in labels {
            self.equation(ctx_of(0), 1, Term::app(a.clone(), vec![Term::constant("0")]), Term::constant("0"))?;
            for n in 1..=width {
                for c in tuples(grid, n) {
                    if c.iter().sum::<Rational>() > Rational::one() {
                        continue;
                    }
                    let xs: Vec<Term> = (0..n).map(var).collect();
                    let lhs = Term::app(a.clone(), vec![Term::app(combo_name(&c), xs.clone())]);
                    let rhs =
                        Term::app(combo_name(&c), xs.into_iter().map(|x| Term::app(a.clone(), vec![x])).collect());
                    self.equation(ctx_of(n), 1, lhs, rhs)?;
                }
            }
        }
        Ok(())
    }
}

/// Nondecreasing label sequences of length `n`.
fn label_multisets(labels: &[String], n: usize) -> Vec<Vec<String>> {
    fn go(labels: &[String], n: usize, from: usize, cur: &mut Vec<String>, out: &mut Vec<Vec<String>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in from..labels.len() {
            cur.push(labels[i].clone());
            go(labels, n, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(labels, n, 0, &mut Vec::new(), &mut out);
    out
}

fn all_assignments(n: usize, vars: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..vars).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

fn tuples(grid: &[Rational], n: usize) -> Vec<Vec<Rational>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<Rational>| {
                grid.iter().map(move |g| {
                    let mut w = v.clone();
                    w.push(g.clone());
                    w
                })
            })
            .collect();
    }
    out
}

fn product_of<T: Clone>(items: &[T], n: usize) -> Vec<Vec<T>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|v: Vec<T>| {
                items.iter().map(move |g| {
                    let mut w = v.clone();
                    w.push(g.clone());
                    w
                })
            })
            .collect();
    }
    out
}

type Pairs = Vec<(String, usize)>;

// renames variables by first occurrence across both sides
fn canonical_pair(l: &Pairs, r: &Pairs) -> (Pairs, Pairs) {
    let mut names: BTreeMap<usize, usize> = BTreeMap::new();
    let mut rename = |s: &Pairs| -> Pairs {
        s.iter()
            .map(|(a, x)| {
                let next = names.len();
                (a.clone(), *names.entry(*x).or_insert(next))
            })
            .collect()
    };
    let l2 = rename(l);
    let r2 = rename(r);
    (l2, r2)
}

fn choice_term(pairs: &Pairs) -> Term {
    sum_term(pairs.iter().map(|(a, x)| (a.clone(), var(*x))).collect())
}

/// The choice term with the given summands (stably sorted by label).
fn sum_term(mut parts: Vec<(String, Term)>) -> Term {
    if parts.is_empty() {
        return Term::constant("0");
    }
    parts.sort_by(|a, b| a.0.cmp(&b.0));
    let name: Vec<&str> = parts.iter().map(|p| p.0.as_str()).collect();
    Term::app(name.join("+"), parts.into_iter().map(|p| p.1).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jsl_signature() {
        let th = builtin_theory(TheoryName::Jsl, &["a", "b"], 2).unwrap();
        let names: BTreeSet<&str> = th.signature.ops().iter().map(|o| o.name.as_str()).collect();
        assert_eq!(names, ["0", "a", "b", "a+a", "a+b", "b+b"].into());
        assert!(th.signature.ops().iter().all(|o| o.depth == 1));
        // idempotence and commutativity are among the axioms
        let shown: BTreeSet<String> = th.axioms.iter().map(|a| a.to_string()).collect();
        assert!(shown.contains("(a+a x1 x1) <= (a x1) : 1"));
        assert!(shown.contains("(a+a x1 x2) <= (a+a x2 x1) : 1"));
    }

    #[test]
    fn sync_zero_is_depth_zero() {
        let th = builtin_theory(TheoryName::JslSync, &["a"], 2).unwrap();
        assert_eq!(th.signature.get("0").unwrap().depth, 0);
        assert!(th.axioms.iter().any(|a| a.to_string() == "(a 0) <= 0 : 1"));
    }

    #[test]
    fn subconvex_axioms() {
        let th = builtin_theory(TheoryName::Subconvex, &[] as &[&str], 2).unwrap();
        let shown: BTreeSet<String> = th.axioms.iter().map(|a| a.to_string()).collect();
        assert!(shown.contains("(<1,0> x1 x2) <= x1 : 0"));
        assert!(shown.contains("x2 <= (<0,1> x1 x2) : 0"));
        let pt = builtin_theory(TheoryName::Pt, &["a"], 2).unwrap();
        let shown: BTreeSet<String> = pt.axioms.iter().map(|a| a.to_string()).collect();
        assert!(shown.contains("(<1/2,0> x1 x2) <= (<1/2,1/2> x1 x2) : 0"));
        assert!(shown.contains("(a (<1/2,1/2> x1 x2)) <= (<1/2,1/2> (a x1) (a x2)) : 1"));
    }

    #[test]
    fn errors() {
        assert_eq!(builtin_theory(TheoryName::Jsl, &[] as &[&str], 2).unwrap_err(), TheoryError::EmptyLabelSet);
        assert!(builtin_theory(TheoryName::Jsl, &["a"], 1).is_err());
        assert_eq!("jsl_down".parse::<TheoryName>().unwrap(), TheoryName::JslDown);
    }
}
