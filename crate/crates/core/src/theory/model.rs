use std::collections::BTreeMap;
use std::fmt::Debug;

use super::{GradedSignature, Inequation, Operation, Term, TheoryError};
use crate::poset::FinPoset;

/// A graded algebra with finite, enumerable carriers `A_0 … A_n`.
pub trait GradedAlgebra {
    type Elem: Clone + Eq + Debug;

    fn max_depth(&self) -> usize;

    fn carrier(&self, depth: usize) -> Result<Vec<Self::Elem>, TheoryError>;

    fn leq(&self, depth: usize, a: &Self::Elem, b: &Self::Elem) -> bool;

    /// `op` on arguments from `A_m`, landing in `A_{m + depth(op)}`. Arguments
    /// are already monotone in the arity.
    fn apply(&self, op: &Operation, m: usize, args: &[Self::Elem]) -> Result<Self::Elem, TheoryError>;
}

/// Evaluates `t` at depth `target` under `val: Γ → A_m`; `None` where the
/// evaluation map is undefined.
pub fn eval_term<A: GradedAlgebra>(
    model: &A,
    sig: &GradedSignature,
    t: &Term,
    val: &BTreeMap<String, A::Elem>,
    m: usize,
    target: usize,
) -> Result<Option<A::Elem>, TheoryError> {
    match t {
        Term::Var(x) => {
            if target != m {
                return Ok(None);
            }
            val.get(x).cloned().map(Some).ok_or_else(|| TheoryError::UnknownVariable(x.clone()))
        }
        Term::App(name, args) => {
            let op = sig.lookup(name)?;
            let Some(inner) = target.checked_sub(op.depth) else { return Ok(None) };
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                match eval_term(model, sig, a, val, m, inner)? {
                    Some(v) => vals.push(v),
                    None => return Ok(None),
                }
            }
            for i in 0..vals.len() {
                for j in 0..vals.len() {
                    if i != j && op.arity.leq(i, j) && !model.leq(inner, &vals[i], &vals[j]) {
                        return Ok(None);
                    }
                }
            }
            model.apply(op, inner, &vals).map(Some)
        }
    }
}

/// All monotone maps `ctx → A_m`.
pub fn monotone_valuations<A: GradedAlgebra>(
    model: &A,
    ctx: &FinPoset,
    m: usize,
) -> Result<Vec<BTreeMap<String, A::Elem>>, TheoryError> {
    let carrier = model.carrier(m)?;
    let mut out = Vec::new();
    let mut cur: Vec<usize> = Vec::new();
    fn go<A: GradedAlgebra>(
        model: &A,
        ctx: &FinPoset,
        m: usize,
        carrier: &[A::Elem],
        cur: &mut Vec<usize>,
        out: &mut Vec<BTreeMap<String, A::Elem>>,
    ) {
        let k = cur.len();
        if k == ctx.len() {
            out.push(cur.iter().enumerate().map(|(i, &e)| (ctx.name(i).to_string(), carrier[e].clone())).collect());
            return;
        }
        for e in 0..carrier.len() {
            let ok = (0..k).all(|i| {
                (!ctx.leq(i, k) || model.leq(m, &carrier[cur[i]], &carrier[e]))
                    && (!ctx.leq(k, i) || model.leq(m, &carrier[e], &carrier[cur[i]]))
            });
            if ok {
                cur.push(e);
                go(model, ctx, m, carrier, cur, out);
                cur.pop();
            }
        }
    }
    go(model, ctx, m, &carrier, &mut cur, &mut out);
    Ok(out)
}

/// True iff every monotone valuation `Γ → A_m` with `m + k ≤ n` makes both
/// sides defined and ordered.
pub fn satisfies<A: GradedAlgebra>(model: &A, sig: &GradedSignature, ineq: &Inequation) -> Result<bool, TheoryError> {
    let n = model.max_depth();
    if ineq.depth > n {
        return Err(TheoryError::DepthOutOfRange { depth: ineq.depth, max: n });
    }
    ineq.validate(sig)?;
    for m in 0..=n - ineq.depth {
        let target = m + ineq.depth;
        for val in monotone_valuations(model, &ineq.context, m)? {
            let l = eval_term(model, sig, &ineq.lhs, &val, m, target)?;
            let r = eval_term(model, sig, &ineq.rhs, &val, m, target)?;
            match (l, r) {
                (Some(l), Some(r)) if model.leq(target, &l, &r) => {}
                _ => return Ok(false),
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::validate_poset;
    use crate::theory::{parse_context, parse_goal, GradedTheory, OpKind};
    use std::sync::Arc;

    /// Max on the chain {0,1,2} at every depth, with a unary `s` of depth 1
    /// that adds one up to the top.
    struct Chain;

    impl GradedAlgebra for Chain {
        type Elem = u8;
        fn max_depth(&self) -> usize {
            2
        }
        fn carrier(&self, _: usize) -> Result<Vec<u8>, TheoryError> {
            Ok(vec![0, 1, 2])
        }
        fn leq(&self, _: usize, a: &u8, b: &u8) -> bool {
            a <= b
        }
        fn apply(&self, op: &Operation, _: usize, args: &[u8]) -> Result<u8, TheoryError> {
            match op.name.as_str() {
                "max" => Ok(*args.iter().max().unwrap()),
                "s" => Ok((args[0] + 1).min(2)),
                "lo" => Ok(0),
                "pair" => Ok(args[0]),
                other => Err(TheoryError::Uninterpreted(other.to_string())),
            }
        }
    }

    fn theory() -> GradedTheory {
        let two = Arc::new(FinPoset::discrete(["l", "r"]));
        let one = Arc::new(FinPoset::discrete(["u"]));
        let ordered = Arc::new(validate_poset(["l", "r"], &[("l", "r")]).unwrap());
        let sig = GradedSignature::new([
            Operation::new("max", two, 0, OpKind::Custom),
            Operation::new("s", one, 1, OpKind::Custom),
            Operation::new("lo", Arc::new(FinPoset::discrete::<&str>([])), 0, OpKind::Custom),
            Operation::new("pair", ordered, 0, OpKind::Custom),
        ])
        .unwrap();
        GradedTheory::new("chain", sig, Vec::new()).unwrap()
    }

    fn holds(ctx: &str, g: &str) -> bool {
        let th = theory();
        let (ineq, _) = parse_goal(&th.signature, Arc::new(parse_context(ctx).unwrap()), g).unwrap();
        satisfies(&Chain, &th.signature, &ineq).unwrap()
    }

    #[test]
    fn examples() {
        assert!(holds("x", "(max x x) <= x : 0"));
        assert!(holds("x<=y", "(max x y) <= y : 0"));
        assert!(!holds("x, y", "(max x y) <= y : 0"));
        assert!(holds("x", "(s x) <= (s (max x x)) : 1"));
        assert!(!holds("x, y", "(s x) <= (s y) : 1"));
        assert!(holds("", "lo <= (s lo) : 1"));
        assert!(!holds("", "(s lo) <= lo : 1"));
    }

    #[test]
    fn undefined_sides_fail() {
        // `pair` needs its first argument below the second
        assert!(holds("x<=y", "(pair x y) <= (pair x y) : 0"));
        assert!(!holds("x, y", "(pair x y) <= (pair x y) : 0"));
    }

    #[test]
    fn depth_out_of_range() {
        let th = theory();
        let (ineq, _) =
            parse_goal(&th.signature, Arc::new(parse_context("x").unwrap()), "(s (s (s x))) <= (s (s (s x))) : 3")
                .unwrap();
        assert!(matches!(satisfies(&Chain, &th.signature, &ineq), Err(TheoryError::DepthOutOfRange { .. })));
    }

    #[test]
    fn valuations_are_monotone() {
        let ctx = parse_context("x<=y").unwrap();
        assert_eq!(monotone_valuations(&Chain, &ctx, 0).unwrap().len(), 6);
    }
}
