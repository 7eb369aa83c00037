use std::sync::Arc;

use super::space::{Beh, Item, Leaf, Space};
use super::{MonadError, SemKind, Semantics};
use crate::poset::FinPoset;
use crate::rational::Rational;
use crate::theory::{GradedAlgebra, GradedTheory, OpKind, Operation, TheoryError, TheoryName};

/// The canonical `M_1`-algebra on `(M_n 1, M_{n+1} 1)`: both `M_0`-structures
/// and the main structure map are multiplications.
pub struct M1Algebra<'s> {
    pub space: &'s Space,
    pub n: usize,
    /// Enumerated carriers; `None` under probabilistic semantics.
    pub a0: Option<Vec<Beh>>,
    pub a1: Option<Vec<Beh>>,
}

pub fn canonical_m1(space: &Space, n: usize) -> Result<M1Algebra<'_>, MonadError> {
    let (a0, a1) = if space.kind() == SemKind::PTrace {
        (None, None)
    } else {
        (Some(space.carrier(n)?), Some(space.carrier(n + 1)?))
    };
    Ok(M1Algebra { space, n, a0, a1 })
}

impl M1Algebra<'_> {
    /// `a⁰⁰ : M_0 A_0 → A_0`.
    pub fn a00(&self, b: Beh) -> Result<Beh, MonadError> {
        self.space.mult(0, self.n, b)
    }

    /// `a⁰¹ : M_0 A_1 → A_1`.
    pub fn a01(&self, b: Beh) -> Result<Beh, MonadError> {
        self.space.mult(0, self.n + 1, b)
    }

    /// `a¹⁰ : M_1 A_0 → A_1`.
    pub fn a10(&self, b: Beh) -> Result<Beh, MonadError> {
        self.space.mult(1, self.n, b)
    }

    /// Checks the two structure squares mixing `a¹⁰` with the `M_0`-structures
    /// on all of `M_1 M_0 A_0` and `M_0 M_1 A_0`; returns the number of
    /// elements checked.
    pub fn check_laws(&self) -> Result<usize, String> {
        let s = self.space;
        let a0 = self.a0.as_ref().ok_or("carriers are not enumerated")?;
        let a1 = self.a1.as_ref().ok_or("carriers are not enumerated")?;
        let err = |e: MonadError| e.to_string();
        let inner0: Vec<Leaf> = a0.iter().map(|&b| Leaf::Inner(b)).collect();
        let m0a0 = s.carrier_over(&inner0, 0).map_err(err)?;
        let outer: Vec<Leaf> = m0a0.iter().map(|&b| Leaf::Inner(b)).collect();
        let mut checked = 0;
        // a¹⁰ ∘ μ^{1,0} = a¹⁰ ∘ M_1 a⁰⁰
        for t in s.carrier_over(&outer, 1).map_err(err)? {
            let left = self.a10(s.mult(1, 0, t).map_err(err)?).map_err(err)?;
            let mapped = s
                .map_leaves(t, s, &mut |l| match l {
                    Leaf::Inner(c) => Ok(Leaf::Inner(self.a00(c)?)),
                    other => Ok(other),
                })
                .map_err(err)?;
            let right = self.a10(mapped).map_err(err)?;
            if left != right {
                return Err(format!("M1 M0 square fails at {}", s.show(t)));
            }
            checked += 1;
        }
        // a¹⁰ ∘ μ^{0,1} = a⁰¹ ∘ M_0 a¹⁰
        let m1a0: Vec<Leaf> = s.carrier_over(&inner0, 1).map_err(err)?.into_iter().map(Leaf::Inner).collect();
        for t in s.carrier_over(&m1a0, 0).map_err(err)? {
            let left = self.a10(s.mult(0, 1, t).map_err(err)?).map_err(err)?;
            let mapped = s
                .map_leaves(t, s, &mut |l| match l {
                    Leaf::Inner(c) => Ok(Leaf::Inner(self.a10(c)?)),
                    other => Ok(other),
                })
                .map_err(err)?;
            let right = self.a01(mapped).map_err(err)?;
            if left != right || !a1.contains(&right) {
                return Err(format!("M0 M1 square fails at {}", s.show(t)));
            }
            checked += 1;
        }
        Ok(checked)
    }
}

/// The normal-form model of a builtin theory over generators `X`, truncated
/// at depth `n`.
pub struct NormalFormModel {
    pub space: Space,
    max_depth: usize,
    /// Weights of probabilistic carriers are multiples of `1/grid`.
    pub grid: usize,
    pub grid_limit: usize,
}

pub fn normal_form_model(theory: &GradedTheory, x: Arc<FinPoset>, n: usize) -> Result<NormalFormModel, TheoryError> {
    let family = theory.family.ok_or_else(|| TheoryError::Uninterpreted(theory.name.clone()))?;
    let kind = match family {
        TheoryName::Jsl => SemKind::Bisim,
        TheoryName::JslDown => SemKind::Sim,
        TheoryName::JslSync => SemKind::Sync,
        TheoryName::Pt | TheoryName::Subconvex => SemKind::PTrace,
    };
    let sem = if family == TheoryName::Subconvex {
        Semantics::subconvex()
    } else {
        Semantics::new(kind, &theory.labels).map_err(|_| TheoryError::EmptyLabelSet)?
    };
    let mut grid = 1usize;
    for op in theory.signature.ops() {
        if let OpKind::Combo(ps) = &op.kind {
            for p in ps {
                let d = num_traits::ToPrimitive::to_usize(p.denom()).unwrap_or(1);
                grid = num_integer::lcm(grid, d);
            }
        }
    }
    Ok(NormalFormModel { space: Space::new(sem, x), max_depth: n, grid, grid_limit: 5000 })
}

fn model_err(e: MonadError) -> TheoryError {
    match e {
        MonadError::CarrierTooLarge { depth, .. } => TheoryError::CarrierTooLarge(depth),
        other => TheoryError::Model(other.to_string()),
    }
}

impl GradedAlgebra for NormalFormModel {
    type Elem = Beh;

    fn max_depth(&self) -> usize {
        self.max_depth
    }

    fn carrier(&self, depth: usize) -> Result<Vec<Beh>, TheoryError> {
        if self.space.kind() == SemKind::PTrace {
            self.space.grid_carrier(depth, self.grid, self.grid_limit).map_err(model_err)
        } else {
            self.space.carrier(depth).map_err(model_err)
        }
    }

    fn leq(&self, _: usize, a: &Beh, b: &Beh) -> bool {
        self.space.leq(*a, *b)
    }

    fn apply(&self, op: &Operation, m: usize, args: &[Beh]) -> Result<Beh, TheoryError> {
        let s = &self.space;
        let sem = s.semantics();
        let target = m + op.depth;
        let label = |a: &str| sem.label_index(a).map_err(model_err);
        let out = match &op.kind {
            OpKind::Choice(labels) => {
                let items = labels
                    .iter()
                    .zip(args)
                    .map(|(a, &c)| Ok(Item::act(label(a)?, c)))
                    .collect::<Result<Vec<_>, TheoryError>>()?;
                s.layer(target, items)
            }
            OpKind::Zero => match s.kind() {
                SemKind::Sync => Ok(s.deadlock(target)),
                SemKind::PTrace => s.dist(target, []),
                _ => s.layer(target, []),
            },
            OpKind::Action(a) => match s.kind() {
                SemKind::PTrace => s.prefix(label(a)?, args[0]),
                _ => s.layer(target, [Item::act(label(a)?, args[0])]),
            },
            OpKind::Combo(ps) => {
                let parts: Vec<(Rational, Beh)> = ps.iter().cloned().zip(args.iter().copied()).collect();
                s.mix(target, &parts)
            }
            OpKind::Custom => return Err(TheoryError::Uninterpreted(op.name.clone())),
        };
        out.map_err(model_err)
    }
}
