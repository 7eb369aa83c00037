use std::collections::HashMap;

use super::{CoalgError, System, Transitions};
use crate::monads::{Beh, Item, Leaf, SemKind, Semantics, Space};
use crate::rational::Rational;

/// Memoized n-step behaviours of one system in a space over `1`.
pub struct Unfolder<'a> {
    space: &'a Space,
    sys: &'a System,
    labels: Vec<u16>,
    memo: HashMap<(usize, usize), Beh>,
}

impl<'a> Unfolder<'a> {
    pub fn new(space: &'a Space, sys: &'a System) -> Result<Self, CoalgError> {
        if space.semantics().labels() != sys.labels.as_slice() {
            return Err(CoalgError::LabelMismatch(space.semantics().labels().to_vec(), sys.labels.clone()));
        }
        match (&sys.transitions, space.kind()) {
            (Transitions::Lts(_), SemKind::PTrace) => return Err(CoalgError::WrongSemantics("lts", SemKind::PTrace)),
            (Transitions::Pts(_), k) if k != SemKind::PTrace => return Err(CoalgError::WrongSemantics("pts", k)),
            _ => {}
        }
        let labels = (0..sys.labels.len() as u16).collect();
        Ok(Unfolder { space, sys, labels, memo: HashMap::new() })
    }

    pub fn space(&self) -> &Space {
        self.space
    }

    /// `M_n! ∘ γ⁽ⁿ⁾(x)`.
    pub fn behaviour(&mut self, x: usize, n: usize) -> Result<Beh, CoalgError> {
        if x >= self.sys.len() {
            return Err(CoalgError::UnknownState(format!("#{x}")));
        }
        // build bottom-up so recursion depth stays small
        for d in 0..=n {
            for s in 0..self.sys.len() {
                if !self.memo.contains_key(&(s, d)) {
                    let b = self.step(s, d)?;
                    self.memo.insert((s, d), b);
                }
            }
        }
        Ok(self.memo[&(x, n)])
    }

    fn step(&self, x: usize, n: usize) -> Result<Beh, CoalgError> {
        let s = self.space;
        if n == 0 {
            return Ok(s.leaf(Leaf::Base(0))?);
        }
        let prev = |y: usize| self.memo[&(y, n - 1)];
        Ok(match &self.sys.transitions {
            Transitions::Lts(t) => {
                let ready = if s.kind() == SemKind::ReadySim { self.sys.ready(x) } else { 0 };
                let mut items: Vec<Item> = t[x]
                    .iter()
                    .map(|&(a, y)| Item::Act { ready, label: self.labels[a as usize], child: prev(y) })
                    .collect();
                if s.kind() == SemKind::ReadySim && items.is_empty() {
                    items.push(Item::Halt);
                }
                s.layer(n, items)?
            }
            Transitions::Pts(t) => {
                let parts: Vec<(Rational, Beh)> = t[x]
                    .iter()
                    .map(|(a, y, p)| Ok((p.clone(), s.prefix(self.labels[*a as usize], prev(*y))?)))
                    .collect::<Result<_, CoalgError>>()?;
                s.mix(n, &parts)?
            }
        })
    }
}

/// The normalized depth-`n` behaviour of `x` over the one-element base.
pub fn n_step_behaviour(space: &Space, sys: &System, x: usize, n: usize) -> Result<Beh, CoalgError> {
    Unfolder::new(space, sys)?.behaviour(x, n)
}

/// Per-depth refinement verdicts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementVerdict {
    pub holds: Vec<bool>,
    pub first_failure: Option<usize>,
}

impl RefinementVerdict {
    pub fn holds_all(&self) -> bool {
        self.first_failure.is_none()
    }

    pub fn depth(&self) -> usize {
        self.holds.len().saturating_sub(1)
    }
}

/// Whether `x` refines `y` at each depth `0..=depth`.
pub fn refines(
    kind: SemKind,
    a: &System,
    x: usize,
    b: &System,
    y: usize,
    depth: usize,
) -> Result<RefinementVerdict, CoalgError> {
    if a.labels != b.labels {
        return Err(CoalgError::LabelMismatch(a.labels.clone(), b.labels.clone()));
    }
    let sem = Semantics::new(kind, &a.labels)?;
    let space = Space::over_one(sem);
    refines_in(&space, a, x, b, y, depth)
}

pub fn refines_in(
    space: &Space,
    a: &System,
    x: usize,
    b: &System,
    y: usize,
    depth: usize,
) -> Result<RefinementVerdict, CoalgError> {
    let mut ua = Unfolder::new(space, a)?;
    let mut ub = Unfolder::new(space, b)?;
    let mut holds = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let (p, q) = (ua.behaviour(x, n)?, ub.behaviour(y, n)?);
        holds.push(space.leq(p, q));
    }
    let first_failure = holds.iter().position(|h| !h);
    Ok(RefinementVerdict { holds, first_failure })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::FinPoset;

    fn lts(states: &[&str], edges: &[(&str, &str, &str)]) -> System {
        System::lts(FinPoset::discrete(states), &["a", "b", "c"], edges).unwrap()
    }

    fn space(kind: SemKind) -> Space {
        Space::over_one(Semantics::new(kind, &["a", "b", "c"]).unwrap())
    }

    #[test]
    fn depth_zero_is_unit() {
        let sys = lts(&["x"], &[]);
        for kind in [SemKind::Bisim, SemKind::Sim, SemKind::Sync] {
            let s = space(kind);
            assert_eq!(s.show(n_step_behaviour(&s, &sys, 0, 0).unwrap()), "•");
        }
    }

    #[test]
    fn sim_one_step() {
        let sys = lts(&["x", "x1"], &[("x", "a", "x1")]);
        let s = space(SemKind::Sim);
        assert_eq!(s.show(n_step_behaviour(&s, &sys, 0, 1).unwrap()), "(down (a •))");
    }

    #[test]
    fn sync_prunes_deadlocked_branch() {
        let sys = lts(&["s", "d"], &[("s", "a", "d")]);
        let s = space(SemKind::Sync);
        let x = sys.state("s").unwrap();
        assert!(s.is_deadlock(n_step_behaviour(&s, &sys, x, 2).unwrap()));
        assert!(!s.is_deadlock(n_step_behaviour(&s, &sys, x, 1).unwrap()));
    }

    #[test]
    fn refinement_examples() {
        let x = lts(&["x", "x1"], &[("x", "a", "x1")]);
        let y = lts(&["y", "y1", "y2"], &[("y", "a", "y1"), ("y", "b", "y2")]);
        assert!(refines(SemKind::Sim, &x, 0, &y, 0, 4).unwrap().holds_all());
        assert!(!refines(SemKind::Sim, &y, 0, &x, 0, 4).unwrap().holds_all());
        let split = lts(
            &["p", "p1", "p2", "p3", "p4"],
            &[("p", "a", "p1"), ("p", "a", "p2"), ("p1", "b", "p3"), ("p2", "c", "p4")],
        );
        let join = lts(&["q", "q1", "q2", "q3"], &[("q", "a", "q1"), ("q1", "b", "q2"), ("q1", "c", "q3")]);
        let v = refines(SemKind::Bisim, &split, 0, &join, 0, 3).unwrap();
        assert_eq!(v.holds, vec![true, true, false, false]);
        assert_eq!(v.first_failure, Some(2));
        assert!(refines(SemKind::Bisim, &split, 0, &split, 0, 3).unwrap().holds_all());
    }

    #[test]
    fn label_mismatch() {
        let x = System::lts(FinPoset::discrete(["x"]), &["a"], &[]).unwrap();
        let y = System::lts(FinPoset::discrete(["y"]), &["b"], &[]).unwrap();
        assert!(matches!(refines(SemKind::Sim, &x, 0, &y, 0, 1), Err(CoalgError::LabelMismatch(..))));
    }
}
