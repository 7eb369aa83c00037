use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{GradedSignature, OpKind, TheoryError};

/// A term over a graded signature. Arguments follow the element order of the
/// operation's arity poset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(x: impl Into<String>) -> Term {
        Term::Var(x.into())
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(op.into(), args)
    }

    pub fn constant(op: impl Into<String>) -> Term {
        Term::App(op.into(), Vec::new())
    }

    /// Node count.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    pub fn vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Term::Var(x) => {
                out.insert(x.clone());
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }
}

/// S-expression form; see [`GradedSignature::show`] for infix output.
impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(x) => write!(f, "{x}"),
            Term::App(op, args) if args.is_empty() => write!(f, "{op}"),
            Term::App(op, args) => {
                write!(f, "({op}")?;
                for a in args {
                    write!(f, " {a}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Admissible depths of a term: exactly `min`, or any `k >= min` when the
/// term is built from constants only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Depth {
    pub min: usize,
    pub flexible: bool,
}

impl Depth {
    pub fn admits(&self, k: usize) -> bool {
        k == self.min || (self.flexible && k > self.min)
    }
}

pub fn depth_of(sig: &GradedSignature, t: &Term) -> Result<Depth, TheoryError> {
    match t {
        Term::Var(_) => Ok(Depth { min: 0, flexible: false }),
        Term::App(name, args) => {
            let op = sig.lookup(name)?;
            if args.len() != op.arity_len() {
                return Err(TheoryError::ArityMismatch { op: name.clone(), expected: op.arity_len(), got: args.len() });
            }
            let ds = args.iter().map(|a| depth_of(sig, a)).collect::<Result<Vec<_>, _>>()?;
            let fixed: BTreeSet<usize> = ds.iter().filter(|d| !d.flexible).map(|d| d.min).collect();
            if fixed.len() > 1 {
                return Err(TheoryError::NonUniform(t.to_string()));
            }
            match fixed.first() {
                Some(&m) => {
                    if ds.iter().any(|d| !d.admits(m)) {
                        return Err(TheoryError::NonUniform(t.to_string()));
                    }
                    Ok(Depth { min: m + op.depth, flexible: false })
                }
                None => {
                    let m = ds.iter().map(|d| d.min).max().unwrap_or(0);
                    Ok(Depth { min: m + op.depth, flexible: true })
                }
            }
        }
    }
}

/// The uniform depth of `t` (least admissible depth for constant-only terms).
pub fn term_depth(sig: &GradedSignature, t: &Term) -> Result<usize, TheoryError> {
    depth_of(sig, t).map(|d| d.min)
}

pub fn subterms(t: &Term) -> BTreeSet<Term> {
    let mut out = BTreeSet::new();
    let mut stack = vec![t];
    while let Some(s) = stack.pop() {
        if out.insert(s.clone()) {
            if let Term::App(_, args) = s {
                stack.extend(args.iter());
            }
        }
    }
    out
}

/// Applies `gamma` homomorphically; all images must share one depth.
pub fn uniform_substitute(
    sig: &GradedSignature,
    gamma: &BTreeMap<String, Term>,
    t: &Term,
) -> Result<Term, TheoryError> {
    let mut depths = Vec::new();
    for x in t.vars() {
        let img = gamma.get(&x).ok_or_else(|| TheoryError::UnknownVariable(x.clone()))?;
        depths.push(depth_of(sig, img)?);
    }
    common_depth(&depths).ok_or_else(|| {
        let shown: Vec<String> = gamma.iter().map(|(x, s)| format!("{x} := {s}")).collect();
        TheoryError::NonUniformSubstitution(shown.join(", "))
    })?;
    Ok(substitute(gamma, t))
}

/// A depth every entry admits, if one exists.
pub(crate) fn common_depth(ds: &[Depth]) -> Option<usize> {
    let fixed: BTreeSet<usize> = ds.iter().filter(|d| !d.flexible).map(|d| d.min).collect();
    let k = match fixed.len() {
        0 => ds.iter().map(|d| d.min).max().unwrap_or(0),
        1 => *fixed.first().expect("one element"),
        _ => return None,
    };
    ds.iter().all(|d| d.admits(k)).then_some(k)
}

pub(crate) fn substitute(gamma: &BTreeMap<String, Term>, t: &Term) -> Term {
    match t {
        Term::Var(x) => gamma.get(x).cloned().unwrap_or_else(|| t.clone()),
        Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| substitute(gamma, a)).collect()),
    }
}

impl GradedSignature {
    /// Infix rendering for the builtin operation kinds, s-expressions otherwise.
    pub fn show(&self, t: &Term) -> String {
        let (name, args) = match t {
            Term::Var(x) => return x.clone(),
            Term::App(name, args) => (name, args),
        };
        let kind = self.get(name).map(|o| &o.kind);
        match kind {
            Some(OpKind::Zero) => name.clone(),
            Some(OpKind::Action(a)) if args.len() == 1 => format!("{a}({})", self.show(&args[0])),
            Some(OpKind::Choice(labels)) if labels.len() == args.len() => {
                let parts: Vec<String> =
                    labels.iter().zip(args).map(|(l, a)| format!("{l}({})", self.show(a))).collect();
                parts.join(" + ")
            }
            Some(OpKind::Combo(ps)) if ps.len() == args.len() && !ps.is_empty() => {
                let parts: Vec<String> = ps
                    .iter()
                    .zip(args)
                    .map(|(p, a)| {
                        let inner = self.show(a);
                        if self.is_sum(a) {
                            format!("{p} ({inner})")
                        } else {
                            format!("{p} {inner}")
                        }
                    })
                    .collect();
                parts.join(" + ")
            }
            _ if args.is_empty() => name.clone(),
            _ => {
                let parts: Vec<String> = args.iter().map(|a| self.show(a)).collect();
                format!("({name} {})", parts.join(" "))
            }
        }
    }

    fn is_sum(&self, t: &Term) -> bool {
        match t {
            Term::App(name, args) => match self.get(name).map(|o| &o.kind) {
                Some(OpKind::Combo(ps)) => !ps.is_empty(),
                Some(OpKind::Choice(ls)) => ls.len() > 1 || args.len() != 1,
                _ => false,
            },
            Term::Var(_) => false,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{positional_arity, Operation};

    fn sig() -> GradedSignature {
        GradedSignature::new([
            Operation::new("a", positional_arity(1), 1, OpKind::Choice(vec!["a".into()])),
            Operation::new("b", positional_arity(1), 1, OpKind::Choice(vec!["b".into()])),
            Operation::new("+", positional_arity(2), 0, OpKind::Custom),
            Operation::new("0", positional_arity(0), 1, OpKind::Zero),
        ])
        .unwrap()
    }

    fn x() -> Term {
        Term::var("x")
    }

    #[test]
    fn depth_examples() {
        let s = sig();
        assert_eq!(term_depth(&s, &x()).unwrap(), 0);
        assert_eq!(term_depth(&s, &Term::app("a", vec![x()])).unwrap(), 1);
        let mixed = Term::app("+", vec![x(), Term::app("a", vec![Term::var("y")])]);
        assert!(matches!(term_depth(&s, &mixed), Err(TheoryError::NonUniform(_))));
        // a constant adapts to its neighbours
        let with_zero = Term::app("+", vec![Term::constant("0"), Term::app("b", vec![Term::app("a", vec![x()])])]);
        assert_eq!(term_depth(&s, &with_zero).unwrap(), 2);
        assert!(depth_of(&s, &Term::constant("0")).unwrap().admits(3));
        assert!(!depth_of(&s, &Term::constant("0")).unwrap().admits(0));
    }

    #[test]
    fn subterm_examples() {
        assert_eq!(subterms(&x()), [x()].into());
        let ax = Term::app("a", vec![x()]);
        assert_eq!(subterms(&ax), [ax.clone(), x()].into());
        let abx = Term::app("a", vec![Term::app("b", vec![x()])]);
        assert_eq!(subterms(&abx).len(), 3);
    }

    #[test]
    fn substitution_examples() {
        let s = sig();
        let g: BTreeMap<String, Term> = [("x".to_string(), Term::var("y"))].into();
        assert_eq!(uniform_substitute(&s, &g, &x()).unwrap(), Term::var("y"));
        let g: BTreeMap<String, Term> = [("x".to_string(), Term::app("b", vec![Term::var("y")]))].into();
        let out = uniform_substitute(&s, &g, &Term::app("a", vec![x()])).unwrap();
        assert_eq!(out, Term::app("a", vec![Term::app("b", vec![Term::var("y")])]));
        assert_eq!(term_depth(&s, &out).unwrap(), 2);
        let g: BTreeMap<String, Term> =
            [("x".to_string(), Term::var("y")), ("z".to_string(), Term::app("a", vec![Term::var("y")]))].into();
        let t = Term::app("+", vec![x(), Term::var("z")]);
        assert!(matches!(uniform_substitute(&s, &g, &t), Err(TheoryError::NonUniformSubstitution(_))));
    }

    #[test]
    fn infix_rendering() {
        let s = sig();
        let t = Term::app("a", vec![Term::app("b", vec![x()])]);
        assert_eq!(s.show(&t), "a(b(x))");
        assert_eq!(s.show(&Term::app("+", vec![x(), x()])), "(+ x x)");
    }
}
