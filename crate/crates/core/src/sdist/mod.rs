//! Exact finite subdistributions over a poset and the order ≼.

mod flow;
mod formal;
mod partition;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::poset::{same_base, FinPoset, MonotoneMap, PosetError};
use crate::rational::Rational;

pub use flow::{coupling_exists, sdist_leq_bruteforce, sdist_leq_flow, ATOM_LIMIT};
pub use formal::{
    common_refinement, is_obviously_below, is_subdivision, obviously_below, pull_subdivision, push_subdivision,
    FormalSum, Refinement,
};
pub use partition::{smd_psums_convert, Partition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SdistError {
    #[error("operands live over different base posets")]
    BaseMismatch,
    #[error("weight {0} is outside (0,1]")]
    InvalidWeight(Rational),
    #[error("total mass {0} exceeds 1")]
    MassExceedsOne(Rational),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("formal sums are not subdivisions of the same distribution")]
    NotSameDistribution,
    #[error("not a subdivision: {0}")]
    NotASubdivision(String),
    #[error("instance needs {0} atoms, above the brute-force limit")]
    TooLarge(usize),
    #[error("malformed formal sum: {0}")]
    Syntax(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// A finitely supported subdistribution on a finite poset.
#[derive(Clone, PartialEq, Eq)]
pub struct SubDist {
    base: Arc<FinPoset>,
    weights: BTreeMap<usize, Rational>,
}

impl SubDist {
    /// Sums repeated entries and drops zero weights.
    pub fn new(base: Arc<FinPoset>, entries: impl IntoIterator<Item = (usize, Rational)>) -> Result<Self, SdistError> {
        let mut weights: BTreeMap<usize, Rational> = BTreeMap::new();
        for (x, w) in entries {
            if w.is_negative() {
                return Err(SdistError::InvalidWeight(w));
            }
            if x >= base.len() {
                return Err(PosetError::UnknownElement(format!("#{x}")).into());
            }
            *weights.entry(x).or_default() += &w;
        }
        weights.retain(|_, w| !w.is_zero());
        let total: Rational = weights.values().sum();
        if total > Rational::one() {
            return Err(SdistError::MassExceedsOne(total));
        }
        Ok(SubDist { base, weights })
    }

    pub fn from_ids<S: AsRef<str>>(base: Arc<FinPoset>, entries: &[(S, Rational)]) -> Result<Self, SdistError> {
        let idx = entries
            .iter()
            .map(|(s, w)| Ok((base.index_of(s.as_ref())?, w.clone())))
            .collect::<Result<Vec<_>, SdistError>>()?;
        SubDist::new(base, idx)
    }

    pub fn zero(base: Arc<FinPoset>) -> Self {
        SubDist { base, weights: BTreeMap::new() }
    }

    pub fn dirac(base: Arc<FinPoset>, x: usize) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(x, Rational::one());
        SubDist { base, weights }
    }

    pub fn base(&self) -> &Arc<FinPoset> {
        &self.base
    }

    pub fn weight(&self, x: usize) -> Rational {
        self.weights.get(&x).cloned().unwrap_or_default()
    }

    pub fn weights(&self) -> &BTreeMap<usize, Rational> {
        &self.weights
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.weights.keys().copied()
    }

    pub fn mass(&self) -> Rational {
        self.weights.values().sum()
    }

    pub fn to_formal_sum(&self) -> FormalSum {
        FormalSum::from_parts(self.base.clone(), self.weights.iter().map(|(&x, w)| (w.clone(), x)).collect())
    }
}

impl fmt::Debug for SubDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for SubDist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.weights.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.weights.iter().map(|(&x, w)| format!("{} {}", w, self.base.name(x))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Pushforward along a monotone map.
pub fn sdist_map(f: &MonotoneMap, mu: &SubDist) -> Result<SubDist, SdistError> {
    if !same_base(f.domain(), &mu.base) {
        return Err(SdistError::BaseMismatch);
    }
    SubDist::new(f.codomain().clone(), mu.weights.iter().map(|(&x, w)| (f.apply(x), w.clone())))
}

/// Weighted mixture of inner subdistributions over a common base.
pub fn sdist_flatten(base: &Arc<FinPoset>, outer: &[(Rational, SubDist)]) -> Result<SubDist, SdistError> {
    let mut acc: Vec<(usize, Rational)> = Vec::new();
    for (p, inner) in outer {
        if !same_base(base, &inner.base) {
            return Err(SdistError::BaseMismatch);
        }
        if p.is_negative() {
            return Err(SdistError::InvalidWeight(p.clone()));
        }
        acc.extend(inner.weights.iter().map(|(&x, w)| (x, p * w)));
    }
    SubDist::new(base.clone(), acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::validate_poset;
    use proptest::prelude::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn xy() -> Arc<FinPoset> {
        Arc::new(validate_poset(["x", "y"], &[("x", "y")]).unwrap())
    }

    #[test]
    fn construction_checks_mass() {
        let b = xy();
        assert!(matches!(
            SubDist::from_ids(b.clone(), &[("x", r(3, 4)), ("y", r(1, 2))]),
            Err(SdistError::MassExceedsOne(_))
        ));
        let d = SubDist::from_ids(b, &[("x", r(1, 4)), ("x", r(1, 4))]).unwrap();
        assert_eq!(d.weight(0), r(1, 2));
        assert_eq!(d.to_string(), "1/2 x");
    }

    #[test]
    fn map_examples() {
        let b = Arc::new(FinPoset::discrete(["x1", "x2", "z"]));
        let star = Arc::new(FinPoset::discrete(["*"]));
        let mu = SubDist::from_ids(b.clone(), &[("x1", r(1, 3)), ("x2", r(1, 6))]).unwrap();
        let id = MonotoneMap::identity(b.clone());
        assert_eq!(sdist_map(&id, &mu).unwrap(), mu);
        let to_star = MonotoneMap::new(b.clone(), star.clone(), vec![0, 0, 0]).unwrap();
        assert_eq!(sdist_map(&to_star, &mu).unwrap().mass(), r(1, 2));
        let y = Arc::new(FinPoset::discrete(["y", "z"]));
        let merge = MonotoneMap::new(b, y.clone(), vec![0, 0, 1]).unwrap();
        assert_eq!(sdist_map(&merge, &mu).unwrap(), SubDist::from_ids(y, &[("y", r(1, 2))]).unwrap());
    }

    #[test]
    fn flatten_examples() {
        let b = Arc::new(FinPoset::discrete(["x", "y"]));
        let x = SubDist::dirac(b.clone(), 0);
        let y = SubDist::dirac(b.clone(), 1);
        assert_eq!(sdist_flatten(&b, &[(Rational::one(), x.clone())]).unwrap(), x);
        assert_eq!(
            sdist_flatten(&b, &[(r(1, 2), x.clone()), (r(1, 2), y)]).unwrap(),
            SubDist::from_ids(b.clone(), &[("x", r(1, 2)), ("y", r(1, 2))]).unwrap()
        );
        let half_x = SubDist::from_ids(b.clone(), &[("x", r(1, 2))]).unwrap();
        assert_eq!(sdist_flatten(&b, &[(r(1, 2), half_x)]).unwrap(), SubDist::from_ids(b, &[("x", r(1, 4))]).unwrap());
    }

    fn arb_dist(n: usize) -> impl Strategy<Value = Vec<(usize, Rational)>> {
        prop::collection::vec((0..n, 1i64..4), 0..4).prop_map(|v| {
            let k = v.len().max(1) as i64;
            v.into_iter().map(|(x, w)| (x, Rational::new(w, 4 * k))).collect()
        })
    }

    proptest! {
        #[test]
        fn map_is_functorial(mu in arb_dist(4), g in prop::collection::vec(0usize..3, 4), h in prop::collection::vec(0usize..2, 3)) {
            let a = Arc::new(FinPoset::discrete(["0", "1", "2", "3"]));
            let b = Arc::new(FinPoset::discrete(["0", "1", "2"]));
            let c = Arc::new(FinPoset::discrete(["0", "1"]));
            let mu = SubDist::new(a.clone(), mu).unwrap();
            let g = MonotoneMap::new(a.clone(), b, g).unwrap();
            let h = MonotoneMap::new(g.codomain().clone(), c, h).unwrap();
            prop_assert_eq!(sdist_map(&MonotoneMap::identity(a), &mu).unwrap(), mu.clone());
            let gh = g.compose(&h).unwrap();
            prop_assert_eq!(
                sdist_map(&gh, &mu).unwrap(),
                sdist_map(&h, &sdist_map(&g, &mu).unwrap()).unwrap()
            );
        }

        #[test]
        fn flatten_laws(ws in prop::collection::vec((1i64..3, arb_dist(3)), 1..3),
                        outer in prop::collection::vec(1i64..3, 1..3)) {
            let b = Arc::new(FinPoset::discrete(["0", "1", "2"]));
            let k = ws.len() as i64;
            let inner: Vec<(Rational, SubDist)> = ws
                .into_iter()
                .map(|(p, d)| (Rational::new(p, 2 * k), SubDist::new(b.clone(), d).unwrap()))
                .collect();
            let mix = sdist_flatten(&b, &inner).unwrap();
            // unit laws
            prop_assert_eq!(sdist_flatten(&b, &[(Rational::one(), mix.clone())]).unwrap(), mix.clone());
            let units: Vec<(Rational, SubDist)> =
                mix.weights().iter().map(|(&x, w)| (w.clone(), SubDist::dirac(b.clone(), x))).collect();
            prop_assert_eq!(sdist_flatten(&b, &units).unwrap(), mix.clone());
            // associativity: flatten the outer layer first or the inner layer first
            let m = outer.len() as i64;
            let outer: Vec<Rational> = outer.into_iter().map(|p| Rational::new(p, 2 * m)).collect();
            let left = sdist_flatten(
                &b,
                &outer.iter().map(|p| (p.clone(), mix.clone())).collect::<Vec<_>>(),
            ).unwrap();
            let mut right_parts = Vec::new();
            for p in &outer {
                for (q, d) in &inner {
                    right_parts.push((p * q, d.clone()));
                }
            }
            prop_assert_eq!(left, sdist_flatten(&b, &right_parts).unwrap());
        }
    }
}
