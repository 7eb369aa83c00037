use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;

use super::LogicSpec;
use crate::monads::SemKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PropOp {
    Tt,
    Ff,
    And,
    Or,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Modality {
    Dia(String),
    Box(String),
    /// Diamond that also fixes the ready set.
    Ready {
        label: String,
        ready: Vec<String>,
    },
    /// Holds iff the state has no transitions; ignores its argument.
    Halt,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::Dia(a) => write!(f, "<{a}>"),
            Modality::Box(a) => write!(f, "[{a}]"),
            Modality::Ready { label, ready } => write!(f, "dia({label},{{{}}})", ready.join(",")),
            Modality::Halt => f.write_str("dia(halt)"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// The truth constant `tt`, depth 0 only.
    Top,
    Prop(PropOp, Vec<Formula>),
    Modal(Modality, Box<Formula>),
}

/// Depths at which a formula is well formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Depths {
    Exactly(usize),
    AtLeast(usize),
}

impl Depths {
    pub fn least(self) -> usize {
        match self {
            Depths::Exactly(n) | Depths::AtLeast(n) => n,
        }
    }

    pub fn admits(self, n: usize) -> bool {
        match self {
            Depths::Exactly(m) => m == n,
            Depths::AtLeast(m) => n >= m,
        }
    }

    fn meet(self, other: Depths) -> Option<Depths> {
        use Depths::*;
        match (self, other) {
            (AtLeast(a), AtLeast(b)) => Some(AtLeast(a.max(b))),
            (Exactly(a), AtLeast(b)) | (AtLeast(b), Exactly(a)) => (a >= b).then_some(Exactly(a)),
            (Exactly(a), Exactly(b)) => (a == b).then_some(Exactly(a)),
        }
    }

    fn next(self) -> Depths {
        match self {
            Depths::Exactly(n) => Depths::Exactly(n + 1),
            Depths::AtLeast(n) => Depths::AtLeast(n + 1),
        }
    }
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::Prop(PropOp::Tt, Vec::new())
    }

    pub fn ff() -> Formula {
        Formula::Prop(PropOp::Ff, Vec::new())
    }

    pub fn dia(a: &str, f: Formula) -> Formula {
        Formula::Modal(Modality::Dia(a.to_string()), Box::new(f))
    }

    pub fn boxed(a: &str, f: Formula) -> Formula {
        Formula::Modal(Modality::Box(a.to_string()), Box::new(f))
    }

    /// Conjunction of the distinct members; a single member stands alone.
    pub fn and(parts: Vec<Formula>) -> Formula {
        Self::nary(PropOp::And, parts)
    }

    pub fn or(parts: Vec<Formula>) -> Formula {
        Self::nary(PropOp::Or, parts)
    }

    fn nary(op: PropOp, parts: Vec<Formula>) -> Formula {
        let mut flat = Vec::new();
        for p in parts {
            match p {
                Formula::Prop(o, inner) if o == op => flat.extend(inner),
                p => flat.push(p),
            }
        }
        flat.sort();
        flat.dedup();
        if flat.len() == 1 {
            flat.pop().expect("one element")
        } else {
            Formula::Prop(op, flat)
        }
    }

    /// `None` when the formula mixes depths.
    pub fn depths(&self) -> Option<Depths> {
        match self {
            Formula::Top => Some(Depths::Exactly(0)),
            Formula::Prop(_, args) => {
                let mut d = Depths::AtLeast(0);
                for a in args {
                    d = d.meet(a.depths()?)?;
                }
                Some(d)
            }
            Formula::Modal(_, arg) => Some(arg.depths()?.next()),
        }
    }

    /// Least uniform depth.
    pub fn depth(&self) -> Option<usize> {
        self.depths().map(Depths::least)
    }

    /// Node count with binary connectives.
    pub fn size(&self) -> usize {
        match self {
            Formula::Top => 1,
            Formula::Prop(_, args) if args.is_empty() => 1,
            Formula::Prop(_, args) => args.iter().map(Formula::size).sum::<usize>() + args.len() - 1,
            Formula::Modal(_, arg) => 1 + arg.size(),
        }
    }

    /// Negation normal form of the complement; `None` for `Top` and ready or
    /// halt modalities, which have no dual.
    pub fn negate(&self) -> Option<Formula> {
        Some(match self {
            Formula::Top => return None,
            Formula::Prop(PropOp::Tt, _) => Formula::ff(),
            Formula::Prop(PropOp::Ff, _) => Formula::tt(),
            Formula::Prop(PropOp::And, args) => {
                Formula::Prop(PropOp::Or, args.iter().map(Formula::negate).collect::<Option<_>>()?)
            }
            Formula::Prop(PropOp::Or, args) => {
                Formula::Prop(PropOp::And, args.iter().map(Formula::negate).collect::<Option<_>>()?)
            }
            Formula::Modal(Modality::Dia(a), f) => Formula::Modal(Modality::Box(a.clone()), Box::new(f.negate()?)),
            Formula::Modal(Modality::Box(a), f) => Formula::Modal(Modality::Dia(a.clone()), Box::new(f.negate()?)),
            Formula::Modal(..) => return None,
        })
    }

    fn is_compound(&self) -> bool {
        matches!(self, Formula::Prop(PropOp::And | PropOp::Or, args) if args.len() > 1)
    }

    fn fmt_arg(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_compound() {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Formula::Top | Formula::Prop(PropOp::Tt, _) => f.write_str("tt"),
            Formula::Prop(PropOp::Ff, _) => f.write_str("ff"),
            Formula::Prop(op, args) => {
                let sep = if *op == PropOp::And { " & " } else { " | " };
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    a.fmt_arg(f)?;
                }
                Ok(())
            }
            Formula::Modal(m, arg) => {
                write!(f, "{m} ")?;
                arg.fmt_arg(f)
            }
        }
    }
}

/// A random formula of uniform depth `depth` with at most roughly `size`
/// nodes.
pub fn random_formula<R: Rng>(rng: &mut R, logic: &LogicSpec, sem: SemKind, depth: usize, size: usize) -> Formula {
    let mods = logic.modalities(sem);
    let ops = logic.binary_ops();
    gen(rng, logic, &mods, &ops, depth, size.max(depth + 1))
}

fn min_size(logic: &LogicSpec, d: usize) -> usize {
    if logic.constants_at(d).is_empty() {
        d + 1
    } else {
        1
    }
}

fn gen<R: Rng>(rng: &mut R, logic: &LogicSpec, mods: &[Modality], ops: &[PropOp], d: usize, budget: usize) -> Formula {
    let consts = logic.constants_at(d);
    let mut choices = Vec::new();
    if !consts.is_empty() {
        choices.push(0);
    }
    if d > 0 && budget > d {
        choices.extend([1, 1]);
    }
    if !ops.is_empty() && budget > 2 * min_size(logic, d) {
        choices.push(2);
    }
    match choices.choose(rng).copied().unwrap_or(1) {
        0 => consts.choose(rng).expect("nonempty").clone(),
        1 => {
            let m = mods.choose(rng).expect("labels are nonempty").clone();
            Formula::Modal(m, Box::new(gen(rng, logic, mods, ops, d - 1, budget - 1)))
        }
        _ => {
            let op = *ops.choose(rng).expect("nonempty");
            let left_max = budget - 1 - min_size(logic, d);
            let left = rng.gen_range(min_size(logic, d)..=left_max);
            let l = gen(rng, logic, mods, ops, d, left);
            let r = gen(rng, logic, mods, ops, d, budget - 1 - left);
            Formula::Prop(op, vec![l, r])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{builtin_logic, LogicKind};
    use rand::SeedableRng;

    #[test]
    fn depth_sets() {
        let f = Formula::and(vec![Formula::tt(), Formula::dia("a", Formula::tt())]);
        assert_eq!(f.depths(), Some(Depths::AtLeast(1)));
        let g = Formula::and(vec![Formula::dia("a", Formula::Top), Formula::dia("a", Formula::dia("b", Formula::Top))]);
        assert_eq!(g.depths(), None);
        assert_eq!(Formula::boxed("a", Formula::ff()).depth(), Some(1));
    }

    #[test]
    fn negation_normal_form() {
        let f = Formula::dia("a", Formula::and(vec![Formula::tt(), Formula::boxed("b", Formula::ff())]));
        let n = f.negate().unwrap();
        assert_eq!(n.to_string(), "[a] (ff | <b> tt)");
        assert_eq!(n.negate().unwrap().to_string(), f.to_string());
        assert!(Formula::Top.negate().is_none());
    }

    #[test]
    fn printing_and_size() {
        let f =
            Formula::dia("a", Formula::and(vec![Formula::dia("b", Formula::tt()), Formula::dia("c", Formula::tt())]));
        assert_eq!(f.to_string(), "<a> (<b> tt & <c> tt)");
        assert_eq!(f.size(), 6);
    }

    #[test]
    fn random_formulas_have_the_requested_depth() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for kind in LogicKind::ALL {
            let logic = builtin_logic(kind, &["a", "b"]).unwrap();
            let sem = match kind {
                LogicKind::Hml => SemKind::Bisim,
                LogicKind::PosHml => SemKind::ReadySim,
                LogicKind::Sync => SemKind::Sync,
                LogicKind::Prob => SemKind::PTrace,
            };
            for d in 0..4 {
                for _ in 0..20 {
                    let f = random_formula(&mut rng, &logic, sem, d, 8);
                    assert!(f.depths().unwrap().admits(d), "{f} at {d}");
                }
            }
        }
    }
}
