use super::eval::{check_space, constant_value, prop_value};
use super::{Caps, Enumeration, Formula, LogicError, LogicSpec, Omega};
use crate::monads::{Beh, SemKind, Space};

/// Grid used to sample probabilistic carriers.
const GRID_DENOM: usize = 3;
const GRID_LIMIT: usize = 5000;

/// Outcome of an order-reflection check over all pairs of a carrier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairCheck {
    /// Pairs `b₁ ≰ b₂`.
    pub pairs: usize,
    pub undetected: usize,
    pub example: Option<(String, String)>,
}

impl PairCheck {
    pub fn separating(&self) -> bool {
        self.undetected == 0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationReport {
    pub n: usize,
    pub depth0: PairCheck,
    pub depth1: PairCheck,
    /// Distinct depth-`n+1` evaluations used.
    pub formulas: usize,
    pub truncated: bool,
}

fn carrier(space: &Space, depth: usize) -> Result<Vec<Beh>, LogicError> {
    Ok(if space.kind() == SemKind::PTrace {
        space.grid_carrier(depth, GRID_DENOM, GRID_LIMIT)?
    } else {
        space.carrier(depth)?
    })
}

fn check_pairs(space: &Space, carrier: &[Beh], values: &[Vec<Omega>]) -> PairCheck {
    let mut pairs = 0;
    let mut undetected = 0;
    let mut example = None;
    for (i, &b1) in carrier.iter().enumerate() {
        for (j, &b2) in carrier.iter().enumerate() {
            if space.leq(b1, b2) {
                continue;
            }
            pairs += 1;
            if !values.iter().any(|v| !v[i].leq(&v[j])) {
                undetected += 1;
                example.get_or_insert_with(|| (space.show(b1), space.show(b2)));
            }
        }
    }
    PairCheck { pairs, undetected, example }
}

/// Depth-0 separation on `M₀1` and depth-1 separation from `Mₙ1` to
/// `Mₙ₊₁1`, over the free instances. Probabilistic carriers are grid
/// samples.
pub fn check_separation(
    space: &Space,
    logic: &LogicSpec,
    n: usize,
    caps: Caps,
) -> Result<SeparationReport, LogicError> {
    check_space(space, logic)?;
    let c0 = carrier(space, 0)?;
    let consts: Vec<Vec<Omega>> = logic
        .constants_at(0)
        .iter()
        .map(|c| {
            c0.iter()
                .map(|&b| match c {
                    Formula::Prop(op, _) => Ok(prop_value(space.kind(), *op, &[])),
                    _ => constant_value(space, b),
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<_, _>>()?;
    let depth0 = check_pairs(space, &c0, &consts);

    let upper = carrier(space, n + 1)?;
    let mut roots = carrier(space, n)?;
    roots.extend(&upper);
    let mut en = Enumeration::new(space, logic, &roots, caps)?;
    let level = en.level(n + 1)?.to_vec();
    let values: Vec<Vec<Omega>> = level
        .iter()
        .map(|e| upper.iter().map(|&b| en.value(n + 1, e, b).expect("carrier is in the universe")).collect())
        .collect();
    let depth1 = check_pairs(space, &upper, &values);
    Ok(SeparationReport { n, depth0, depth1, formulas: level.len(), truncated: en.truncated() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{builtin_logic, LogicKind};
    use crate::monads::Semantics;

    fn run(kind: SemKind, labels: &[&str], n: usize) -> SeparationReport {
        let space = Space::over_one(Semantics::new(kind, labels).unwrap());
        let logic = builtin_logic(LogicKind::for_semantics(kind), labels).unwrap();
        check_separation(&space, &logic, n, Caps::default()).unwrap()
    }

    #[test]
    fn hml_separates() {
        for n in 0..=1 {
            let r = run(SemKind::Bisim, &["a", "b"], n);
            assert!(r.depth0.separating() && r.depth1.separating(), "{r:?}");
        }
        let r = run(SemKind::Bisim, &["a"], 2);
        assert!(r.depth1.separating(), "{r:?}");
    }

    #[test]
    fn pos_hml_separates() {
        for n in 0..=1 {
            let r = run(SemKind::Sim, &["a", "b"], n);
            assert!(r.depth0.separating() && r.depth1.separating(), "{r:?}");
        }
    }

    #[test]
    fn sync_depth_zero_cannot_reflect_deadlock() {
        let r = run(SemKind::Sync, &["a"], 0);
        assert_eq!(r.depth0.pairs, 2);
        assert_eq!(r.depth0.undetected, 1);
        assert_eq!(r.depth0.example, Some(("0".to_string(), "•".to_string())));
        assert!(r.depth1.separating(), "{r:?}");
    }

    #[test]
    fn prob_separates_on_samples() {
        for n in 0..=1 {
            let r = run(SemKind::PTrace, &["a", "b"], n);
            assert!(r.depth0.separating() && r.depth1.separating(), "{r:?}");
        }
    }
}
