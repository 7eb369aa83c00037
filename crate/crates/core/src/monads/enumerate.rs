use std::collections::HashSet;

use super::space::{Beh, Item, Leaf, Space};
use super::{MonadError, SemKind};
use crate::rational::Rational;

impl Space {
    /// All normal forms of the given depth over the base.
    pub fn carrier(&self, depth: usize) -> Result<Vec<Beh>, MonadError> {
        let leaves: Vec<Leaf> = (0..self.base().len()).map(Leaf::Base).collect();
        self.carrier_over(&leaves, depth)
    }

    /// All normal forms of the given depth whose leaves come from `leaves`.
    /// Nondeterministic semantics only; fails once a layer would have more
    /// than `cap` generators.
    pub fn carrier_over(&self, leaves: &[Leaf], depth: usize) -> Result<Vec<Beh>, MonadError> {
        let kind = self.kind();
        if kind == SemKind::PTrace {
            return Err(MonadError::CarrierTooLarge { depth, items: usize::MAX, cap: self.cap });
        }
        let mut level: Vec<Beh> = leaves.iter().map(|&l| self.leaf(l)).collect::<Result<_, _>>()?;
        if kind == SemKind::Sync {
            level.push(self.deadlock(0));
        }
        for d in 1..=depth {
            let children: Vec<Beh> = level.iter().copied().filter(|&c| !self.is_deadlock(c)).collect();
            let items = self.generators(&children);
            if items.len() > self.cap {
                return Err(MonadError::CarrierTooLarge { depth: d, items: items.len(), cap: self.cap });
            }
            let mut seen = HashSet::new();
            let mut next = Vec::new();
            for mask in 0u64..(1u64 << items.len()) {
                let pick = (0..items.len()).filter(|i| mask >> i & 1 == 1).map(|i| items[i]);
                let b = self.layer(d, pick)?;
                if seen.insert(b) {
                    next.push(b);
                }
            }
            level = next;
        }
        Ok(level)
    }

    fn generators(&self, children: &[Beh]) -> Vec<Item> {
        let n = self.semantics().labels().len();
        let mut items = Vec::new();
        if self.kind() == SemKind::ReadySim {
            for ready in 1u32..(1 << n) {
                for label in (0..n as u16).filter(|a| ready >> a & 1 == 1) {
                    items.extend(children.iter().map(|&child| Item::Act { ready, label, child }));
                }
            }
            items.push(Item::Halt);
        } else {
            for label in 0..n as u16 {
                items.extend(children.iter().map(|&child| Item::act(label, child)));
            }
        }
        items
    }

    /// Distributions of the given depth whose weights are multiples of
    /// `1/denom`; a finite sample of the probabilistic layer.
    pub fn grid_carrier(&self, depth: usize, denom: usize, limit: usize) -> Result<Vec<Beh>, MonadError> {
        let labels = self.semantics().labels().len() as u16;
        let mut words: Vec<Vec<u16>> = vec![Vec::new()];
        for _ in 0..depth {
            words = words
                .into_iter()
                .flat_map(|w| {
                    (0..labels).map(move |a| {
                        let mut v = w.clone();
                        v.push(a);
                        v
                    })
                })
                .collect();
        }
        let keys: Vec<(Vec<u16>, Leaf)> =
            words.iter().flat_map(|w| (0..self.base().len()).map(move |x| (w.clone(), Leaf::Base(x)))).collect();
        let mut out = Vec::new();
        let mut counts = vec![0usize; keys.len()];
        fn go(
            s: &Space,
            keys: &[(Vec<u16>, Leaf)],
            counts: &mut Vec<usize>,
            i: usize,
            left: usize,
            denom: usize,
            depth: usize,
            limit: usize,
            out: &mut Vec<Beh>,
        ) -> Result<(), MonadError> {
            if out.len() > limit {
                return Err(MonadError::CarrierTooLarge { depth, items: out.len(), cap: limit });
            }
            if i == keys.len() {
                let entries = keys
                    .iter()
                    .zip(counts.iter())
                    .map(|((w, l), &c)| (w.clone(), *l, Rational::new(c as i64, denom as i64)));
                out.push(s.dist(depth, entries)?);
                return Ok(());
            }
            for c in 0..=left {
                counts[i] = c;
                go(s, keys, counts, i + 1, left - c, denom, depth, limit, out)?;
            }
            counts[i] = 0;
            Ok(())
        }
        go(self, &keys, &mut counts, 0, denom, denom, depth, limit, &mut out)?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monads::Semantics;

    fn count(kind: SemKind, labels: &[&str], depth: usize) -> usize {
        Space::over_one(Semantics::new(kind, labels).unwrap()).carrier(depth).unwrap().len()
    }

    #[test]
    fn small_carriers() {
        assert_eq!(count(SemKind::Bisim, &["a"], 1), 2);
        assert_eq!(count(SemKind::Sim, &["a", "b"], 1), 4);
        assert_eq!(count(SemKind::Sync, &["a"], 0), 2);
        // Sync depth 1 is nonempty subsets plus deadlock
        assert_eq!(count(SemKind::Sync, &["a", "b"], 1), 4);
        assert_eq!(count(SemKind::Bisim, &["a", "b"], 2), 256);
        assert_eq!(count(SemKind::Bisim, &["a"], 3), 16);
    }

    #[test]
    fn sim_depth_two_is_downsets() {
        // down-sets of {a,b} x (4-element boolean lattice of depth-1 sets)
        // are pairs of down-sets of that lattice: 6 * 6
        assert_eq!(count(SemKind::Sim, &["a", "b"], 2), 36);
    }

    #[test]
    fn cap_is_enforced() {
        let s = Space::over_one(Semantics::new(SemKind::Bisim, &["a", "b"]).unwrap());
        assert!(matches!(s.carrier(3), Err(MonadError::CarrierTooLarge { depth: 3, .. })));
        let p = Space::over_one(Semantics::new(SemKind::PTrace, &["a"]).unwrap());
        assert!(p.carrier(0).is_err());
    }

    #[test]
    fn grid() {
        let p = Space::over_one(Semantics::new(SemKind::PTrace, &["a", "b"]).unwrap());
        // two keys, weights in {0,1/2,1} with total at most 1
        assert_eq!(p.grid_carrier(1, 2, 100).unwrap().len(), 6);
    }
}
