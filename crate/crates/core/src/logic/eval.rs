use std::collections::HashMap;

use super::{Formula, LogicError, LogicSpec, Modality, Omega, PropOp};
use crate::coalgebra::{n_step_behaviour, System};
use crate::monads::{Beh, Item, Node, SemKind, Space};
use crate::rational::Rational;

/// A modality with its label indices looked up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Resolved {
    Dia(u16),
    Box(u16),
    Ready(u16, u32),
    Halt,
}

impl Resolved {
    pub fn new(space: &Space, m: &Modality) -> Result<Resolved, LogicError> {
        let sem = space.semantics();
        Ok(match m {
            Modality::Dia(a) => Resolved::Dia(sem.label_index(a)?),
            Modality::Box(a) => Resolved::Box(sem.label_index(a)?),
            Modality::Ready { label, ready } => {
                Resolved::Ready(sem.label_index(label)?, sem.ready_mask(ready.iter().map(String::as_str))?)
            }
            Modality::Halt => Resolved::Halt,
        })
    }
}

pub(crate) fn check_space(space: &Space, logic: &LogicSpec) -> Result<(), LogicError> {
    logic.check(space.kind())?;
    if space.semantics().labels() != logic.labels() {
        return Err(LogicError::LabelMismatch);
    }
    Ok(())
}

/// `⟦φ⟧(b)` for a behaviour over the one-element base.
pub fn eval_on_mn1(space: &Space, logic: &LogicSpec, phi: &Formula, b: Beh) -> Result<Omega, LogicError> {
    check_space(space, logic)?;
    let d = space.depth(b);
    if !phi.depths().is_some_and(|ds| ds.admits(d)) {
        return Err(LogicError::DepthMismatch { formula: phi.to_string(), depth: d });
    }
    let mut memo = HashMap::new();
    eval_rec(space, phi, b, &mut memo)
}

/// `⟦φ⟧_γ(x)` at the least depth of `φ`.
pub fn eval_in_system(
    space: &Space,
    logic: &LogicSpec,
    phi: &Formula,
    sys: &System,
    x: usize,
) -> Result<Omega, LogicError> {
    let n = phi.depth().ok_or_else(|| LogicError::NonUniformDepth(phi.to_string()))?;
    let b = n_step_behaviour(space, sys, x, n)?;
    eval_on_mn1(space, logic, phi, b)
}

fn eval_rec(
    space: &Space,
    phi: &Formula,
    b: Beh,
    memo: &mut HashMap<(usize, Beh), Omega>,
) -> Result<Omega, LogicError> {
    let key = (phi as *const Formula as usize, b);
    if let Some(v) = memo.get(&key) {
        return Ok(v.clone());
    }
    let v = match phi {
        Formula::Top => constant_value(space, b)?,
        Formula::Prop(op, args) => {
            let vals = args.iter().map(|a| eval_rec(space, a, b, memo)).collect::<Result<Vec<_>, _>>()?;
            prop_value(space.kind(), *op, &vals)
        }
        Formula::Modal(m, arg) => {
            let r = Resolved::new(space, m)?;
            modal_value(space, r, b, &mut |c| eval_rec(space, arg, c, memo))?
        }
    };
    memo.insert(key, v.clone());
    Ok(v)
}

pub(crate) fn constant_value(space: &Space, b: Beh) -> Result<Omega, LogicError> {
    match space.node(b) {
        Node::Leaf(_) => Ok(Omega::Two(true)),
        Node::Deadlock(0) => Ok(Omega::Two(false)),
        Node::Dist { depth: 0, entries } => Ok(Omega::Unit(entries.iter().map(|e| &e.2).sum())),
        _ => Err(LogicError::DepthMismatch { formula: "tt".into(), depth: space.depth(b) }),
    }
}

pub(crate) fn prop_value(sem: SemKind, op: PropOp, vals: &[Omega]) -> Omega {
    if sem == SemKind::PTrace {
        let it = vals.iter().map(|v| match v {
            Omega::Unit(r) => r.clone(),
            Omega::Two(b) => Rational::from(*b as i64),
        });
        return Omega::Unit(match op {
            PropOp::Tt => Rational::one(),
            PropOp::Ff => Rational::zero(),
            PropOp::And => it.min().unwrap_or_else(Rational::one),
            PropOp::Or => it.max().unwrap_or_else(Rational::zero),
        });
    }
    let mut it = vals.iter().map(|v| v.as_bool().unwrap_or(false));
    Omega::Two(match op {
        PropOp::Tt => true,
        PropOp::Ff => false,
        PropOp::And => it.all(|b| b),
        PropOp::Or => it.any(|b| b),
    })
}

/// One modal step on a behaviour of depth at least one, given the values of
/// the argument formula on the children.
pub fn modal_value(
    space: &Space,
    m: Resolved,
    b: Beh,
    child: &mut dyn FnMut(Beh) -> Result<Omega, LogicError>,
) -> Result<Omega, LogicError> {
    modal_on_node(space, m, &space.node(b), child)
}

pub(crate) fn modal_on_node(
    space: &Space,
    m: Resolved,
    node: &Node,
    child: &mut dyn FnMut(Beh) -> Result<Omega, LogicError>,
) -> Result<Omega, LogicError> {
    let truth = |c: Beh, child: &mut dyn FnMut(Beh) -> Result<Omega, LogicError>| -> Result<bool, LogicError> {
        Ok(child(c)?.as_bool().unwrap_or(false))
    };
    match node {
        Node::Deadlock(d) if *d > 0 => Ok(Omega::Two(matches!(m, Resolved::Box(_)))),
        Node::Layer { items, .. } => {
            let mut out = matches!(m, Resolved::Box(_));
            for &it in items {
                match (m, it) {
                    (Resolved::Halt, Item::Halt) => out = true,
                    (Resolved::Dia(a), Item::Act { label, child: c, .. }) if label == a => {
                        if truth(c, child)? {
                            out = true;
                        }
                    }
                    (Resolved::Ready(a, r), Item::Act { ready, label, child: c }) if label == a && ready == r => {
                        if truth(c, child)? {
                            out = true;
                        }
                    }
                    (Resolved::Box(a), Item::Act { label, child: c, .. }) if label == a && !truth(c, child)? => {
                        out = false;
                    }
                    _ => {}
                }
            }
            Ok(Omega::Two(out))
        }
        Node::Dist { depth, entries } if *depth > 0 => {
            let Resolved::Dia(a) = m else {
                return Err(LogicError::UnknownSymbol("box under probabilistic semantics".into()));
            };
            let mut total = Rational::zero();
            for (w, l, p) in entries {
                if w[0] != a {
                    continue;
                }
                let point = space.dist(depth - 1, [(w[1..].to_vec(), *l, Rational::one())])?;
                match child(point)? {
                    Omega::Unit(v) => total += &(p * &v),
                    Omega::Two(_) => unreachable!("probabilistic values are rational"),
                }
            }
            Ok(Omega::Unit(total))
        }
        _ => Err(LogicError::DepthMismatch { formula: format!("{m:?}"), depth: 0 }),
    }
}

/// Sub-behaviours a modal step looks at.
pub(crate) fn children(space: &Space, b: Beh) -> Result<Vec<Beh>, LogicError> {
    Ok(match space.node(b) {
        Node::Layer { items, .. } => items.iter().filter_map(Item::child).collect(),
        Node::Dist { depth, entries } if depth > 0 => entries
            .into_iter()
            .map(|(w, l, _)| space.dist(depth - 1, [(w[1..].to_vec(), l, Rational::one())]))
            .collect::<Result<_, _>>()?,
        _ => Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{builtin_logic, parse_formula, LogicKind};
    use crate::monads::{Leaf, Semantics};
    use crate::poset::FinPoset;

    fn setup(kind: SemKind) -> (Space, LogicSpec) {
        let sem = Semantics::new(kind, &["a", "b"]).unwrap();
        (Space::over_one(sem), builtin_logic(LogicKind::for_semantics(kind), &["a", "b"]).unwrap())
    }

    #[test]
    fn two_valued_examples() {
        let (s, hml) = setup(SemKind::Bisim);
        let dot = s.leaf(Leaf::Base(0)).unwrap();
        let a_dot = s.layer(1, [Item::act(0, dot)]).unwrap();
        let f = parse_formula("<a> tt", &hml).unwrap();
        assert_eq!(eval_on_mn1(&s, &hml, &f, a_dot).unwrap(), Omega::Two(true));
        let empty = s.layer(1, []).unwrap();
        let g = parse_formula("[a] ff", &hml).unwrap();
        assert_eq!(eval_on_mn1(&s, &hml, &g, empty).unwrap(), Omega::Two(true));
        assert_eq!(eval_on_mn1(&s, &hml, &g, a_dot).unwrap(), Omega::Two(false));
        assert!(matches!(eval_on_mn1(&s, &hml, &f, dot), Err(LogicError::DepthMismatch { .. })));
    }

    #[test]
    fn sync_constants_and_deadlock() {
        let (s, sync) = setup(SemKind::Sync);
        let tt = parse_formula("tt", &sync).unwrap();
        assert_eq!(eval_on_mn1(&s, &sync, &tt, s.deadlock(0)).unwrap(), Omega::Two(false));
        assert_eq!(eval_on_mn1(&s, &sync, &tt, s.leaf(Leaf::Base(0)).unwrap()).unwrap(), Omega::Two(true));
        let d = parse_formula("<a> tt", &sync).unwrap();
        assert_eq!(eval_on_mn1(&s, &sync, &d, s.deadlock(1)).unwrap(), Omega::Two(false));
        let bx = parse_formula("[a] ff", &sync).unwrap();
        assert_eq!(eval_on_mn1(&s, &sync, &bx, s.deadlock(1)).unwrap(), Omega::Two(true));
    }

    #[test]
    fn probabilistic_examples() {
        let (s, prob) = setup(SemKind::PTrace);
        let half = |n, d| Rational::new(n, d);
        for k in 0..4 {
            let mu = s.dist(0, [(vec![], Leaf::Base(0), half(k, 3))]).unwrap();
            let tt = parse_formula("tt", &prob).unwrap();
            assert_eq!(eval_on_mn1(&s, &prob, &tt, mu).unwrap(), Omega::Unit(half(k, 3)));
        }
        let sys = System::pts(
            FinPoset::discrete(["x", "y", "z"]),
            &["a", "b"],
            &[("x", "a", "y", half(1, 2)), ("y", "b", "z", half(1, 1))],
        )
        .unwrap();
        let x = sys.state("x").unwrap();
        let f = parse_formula("<a> tt", &prob).unwrap();
        assert_eq!(eval_in_system(&s, &prob, &f, &sys, x).unwrap(), Omega::Unit(half(1, 2)));
        let g = parse_formula("<a><b> tt", &prob).unwrap();
        assert_eq!(eval_in_system(&s, &prob, &g, &sys, x).unwrap(), Omega::Unit(half(1, 2)));
        let h = parse_formula("<b> tt", &prob).unwrap();
        assert_eq!(eval_in_system(&s, &prob, &h, &sys, x).unwrap(), Omega::Unit(half(0, 1)));
    }

    #[test]
    fn system_evaluation() {
        let (s, hml) = setup(SemKind::Bisim);
        let sys = System::lts(FinPoset::discrete(["x", "y"]), &["a", "b"], &[("x", "a", "y")]).unwrap();
        let x = sys.state("x").unwrap();
        let f = parse_formula("<a> tt", &hml).unwrap();
        assert_eq!(eval_in_system(&s, &hml, &f, &sys, x).unwrap(), Omega::Two(true));
        let g = parse_formula("<a> <a> tt", &hml).unwrap();
        assert_eq!(eval_in_system(&s, &hml, &g, &sys, x).unwrap(), Omega::Two(false));
    }

    #[test]
    fn incompatible_logic() {
        let (s, _) = setup(SemKind::Sim);
        let hml = builtin_logic(LogicKind::Hml, &["a", "b"]).unwrap();
        let f = parse_formula("<a> tt", &hml).unwrap();
        let b = s.leaf(Leaf::Base(0)).unwrap();
        assert!(matches!(eval_on_mn1(&s, &hml, &f, b), Err(LogicError::IncompatibleLogic { .. })));
    }
}
