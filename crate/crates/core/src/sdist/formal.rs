use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use super::{Partition, SdistError, SubDist};
use crate::poset::{same_base, FinPoset};
use crate::rational::Rational;

/// A formal sum `Σ p_i · x_i`: summand order and repetitions are kept.
#[derive(Clone, PartialEq, Eq)]
pub struct FormalSum {
    base: Arc<FinPoset>,
    summands: Vec<(Rational, usize)>,
}

impl FormalSum {
    pub fn new(base: Arc<FinPoset>, summands: Vec<(Rational, usize)>) -> Result<Self, SdistError> {
        for (p, x) in &summands {
            if !p.is_unit_weight() {
                return Err(SdistError::InvalidWeight(p.clone()));
            }
            if *x >= base.len() {
                return Err(SdistError::Syntax(format!("element #{x} out of range")));
            }
        }
        let total: Rational = summands.iter().map(|s| &s.0).sum();
        if total > Rational::one() {
            return Err(SdistError::MassExceedsOne(total));
        }
        Ok(FormalSum { base, summands })
    }

    pub(crate) fn from_parts(base: Arc<FinPoset>, summands: Vec<(Rational, usize)>) -> Self {
        FormalSum { base, summands }
    }

    /// Parses `"1/2 x + 1/2 y"`; a bare element has coefficient 1, `0` is the empty sum.
    pub fn parse(base: Arc<FinPoset>, text: &str) -> Result<Self, SdistError> {
        let text = text.trim();
        if text == "0" || text.is_empty() {
            return Ok(FormalSum { base, summands: Vec::new() });
        }
        let mut summands = Vec::new();
        for term in text.split('+') {
            let term = term.trim().replace('*', " ");
            let mut words = term.split_whitespace();
            let (coef, elem) = match (words.next(), words.next(), words.next()) {
                (Some(e), None, None) => (Rational::one(), e),
                (Some(c), Some(e), None) => (c.parse::<Rational>().map_err(|e| SdistError::Syntax(e.to_string()))?, e),
                _ => return Err(SdistError::Syntax(format!("cannot read summand `{term}`"))),
            };
            summands.push((coef, base.index_of(elem)?));
        }
        FormalSum::new(base, summands)
    }

    pub fn base(&self) -> &Arc<FinPoset> {
        &self.base
    }

    pub fn summands(&self) -> &[(Rational, usize)] {
        &self.summands
    }

    pub fn len(&self) -> usize {
        self.summands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.summands.is_empty()
    }

    /// The represented subdistribution.
    pub fn to_subdist(&self) -> SubDist {
        SubDist::new(self.base.clone(), self.summands.iter().map(|(p, x)| (*x, p.clone())))
            .expect("formal sums have mass at most one")
    }

    fn by_element(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, (_, x)) in self.summands.iter().enumerate() {
            m.entry(*x).or_default().push(i);
        }
        m
    }
}

impl fmt::Debug for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for FormalSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.summands.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self.summands.iter().map(|(p, x)| format!("{} {}", p, self.base.name(*x))).collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Checks that `d` subdivides `e`, where `g[k]` is the summand of `e` that
/// summand `k` of `d` is carved out of.
pub fn is_subdivision(d: &FormalSum, e: &FormalSum, g: &[usize]) -> bool {
    if g.len() != d.len() || !same_base(&d.base, &e.base) {
        return false;
    }
    let mut acc = vec![Rational::zero(); e.len()];
    for (k, &j) in g.iter().enumerate() {
        if j >= e.len() || d.summands[k].1 != e.summands[j].1 {
            return false;
        }
        acc[j] += &d.summands[k].0;
    }
    acc.iter().zip(&e.summands).all(|(a, (q, _))| a == q)
}

/// A common subdivision together with the summand maps into both inputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Refinement {
    pub sum: FormalSum,
    pub into_a: Vec<usize>,
    pub into_b: Vec<usize>,
}

pub fn common_refinement(a: &FormalSum, b: &FormalSum) -> Result<Refinement, SdistError> {
    if !same_base(&a.base, &b.base) {
        return Err(SdistError::BaseMismatch);
    }
    if a.to_subdist() != b.to_subdist() {
        return Err(SdistError::NotSameDistribution);
    }
    let (ga, gb) = (a.by_element(), b.by_element());
    let mut summands = Vec::new();
    let (mut into_a, mut into_b) = (Vec::new(), Vec::new());
    for (x, ia) in &ga {
        let ib = &gb[x];
        let cuts = |idx: &[usize], s: &FormalSum| -> Vec<Rational> {
            let mut acc = Rational::zero();
            idx.iter()
                .map(|&i| {
                    let here = acc.clone();
                    acc += &s.summands[i].0;
                    here
                })
                .collect()
        };
        let (ca, cb) = (cuts(ia, a), cuts(ib, b));
        let total: Rational = ia.iter().map(|&i| &a.summands[i].0).sum();
        let points: BTreeSet<Rational> = ca.iter().chain(&cb).cloned().collect();
        let pts: Vec<&Rational> = points.iter().collect();
        for (k, u) in pts.iter().enumerate() {
            let v = pts.get(k + 1).copied().unwrap_or(&total);
            summands.push((v - u, *x));
            into_a.push(ia[ca.iter().rposition(|c| c <= u).expect("0 is a cut")]);
            into_b.push(ib[cb.iter().rposition(|c| c <= u).expect("0 is a cut")]);
        }
    }
    Ok(Refinement { sum: FormalSum { base: a.base.clone(), summands }, into_a, into_b })
}

/// Searches for an injection `f` with `p_i <= q_f(i)` and `x_i <= y_f(i)`.
pub fn obviously_below(a: &FormalSum, b: &FormalSum) -> Result<Option<Vec<usize>>, SdistError> {
    if !same_base(&a.base, &b.base) {
        return Err(SdistError::BaseMismatch);
    }
    let adj: Vec<Vec<usize>> = a
        .summands
        .iter()
        .map(|(p, x)| (0..b.len()).filter(|&j| p <= &b.summands[j].0 && a.base.leq(*x, b.summands[j].1)).collect())
        .collect();
    let mut owner: Vec<Option<usize>> = vec![None; b.len()];
    for i in 0..a.len() {
        let mut seen = vec![false; b.len()];
        if !augment(i, &adj, &mut owner, &mut seen) {
            return Ok(None);
        }
    }
    let mut f = vec![0; a.len()];
    for (j, o) in owner.iter().enumerate() {
        if let Some(i) = o {
            f[*i] = j;
        }
    }
    Ok(Some(f))
}

fn augment(i: usize, adj: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for &j in &adj[i] {
        if seen[j] {
            continue;
        }
        seen[j] = true;
        if owner[j].is_none_or(|k| augment(k, adj, owner, seen)) {
            owner[j] = Some(i);
            return true;
        }
    }
    false
}

pub fn is_obviously_below(a: &FormalSum, b: &FormalSum, f: &[usize]) -> bool {
    if f.len() != a.len() || !same_base(&a.base, &b.base) {
        return false;
    }
    let distinct: BTreeSet<&usize> = f.iter().collect();
    distinct.len() == f.len()
        && f.iter().enumerate().all(|(i, &j)| {
            j < b.len() && a.summands[i].0 <= b.summands[j].0 && a.base.leq(a.summands[i].1, b.summands[j].1)
        })
}

/// Given `a ⊑ b` via `f` and a subdivision `d` of `a` (via `g`), builds a
/// subdivision `d*` of `b` with `d ⊑ d*`. Returns `(d*, g*, f*)`.
pub fn push_subdivision(
    a: &FormalSum,
    b: &FormalSum,
    f: &[usize],
    d: &FormalSum,
    g: &[usize],
) -> Result<(FormalSum, Vec<usize>, Vec<usize>), SdistError> {
    if !is_obviously_below(a, b, f) {
        return Err(SdistError::NotASubdivision("a is not obviously below b via f".into()));
    }
    if !is_subdivision(d, a, g) {
        return Err(SdistError::NotASubdivision("d does not subdivide a".into()));
    }
    let mut pre: Vec<Option<usize>> = vec![None; b.len()];
    for (i, &j) in f.iter().enumerate() {
        pre[j] = Some(i);
    }
    let mut summands = Vec::new();
    let mut g_star = Vec::new();
    let mut f_star = vec![0; d.len()];
    for (j, (q, y)) in b.summands.iter().enumerate() {
        let mut rest = q.clone();
        if let Some(i) = pre[j] {
            for (k, _) in g.iter().enumerate().filter(|(_, &gi)| gi == i) {
                f_star[k] = summands.len();
                summands.push((d.summands[k].0.clone(), *y));
                g_star.push(j);
            }
            rest = &rest - &a.summands[i].0;
        }
        if rest.is_positive() {
            summands.push((rest, *y));
            g_star.push(j);
        }
    }
    Ok((FormalSum { base: b.base.clone(), summands }, g_star, f_star))
}

/// Given `a ⊑ b` via `f` and a subdivision `e` of `b` (via `h`), builds a
/// subdivision `d` of `a` with `d ⊑ e`. Returns `(d, g, f')`.
pub fn pull_subdivision(
    a: &FormalSum,
    b: &FormalSum,
    f: &[usize],
    e: &FormalSum,
    h: &[usize],
) -> Result<(FormalSum, Vec<usize>, Vec<usize>), SdistError> {
    if !is_obviously_below(a, b, f) {
        return Err(SdistError::NotASubdivision("a is not obviously below b via f".into()));
    }
    if !is_subdivision(e, b, h) {
        return Err(SdistError::NotASubdivision("e does not subdivide b".into()));
    }
    let mut summands = Vec::new();
    let (mut g, mut f_prime) = (Vec::new(), Vec::new());
    for (i, (p, x)) in a.summands.iter().enumerate() {
        let j = f[i];
        let pieces: Vec<usize> = (0..e.len()).filter(|&k| h[k] == j).collect();
        let smd = Partition::summands(pieces.iter().map(|&k| e.summands[k].0.clone()).collect())?;
        let cuts: Vec<Rational> = smd.points().into_iter().filter(|c| c < p).collect();
        for (n, c) in cuts.iter().enumerate() {
            let end = cuts.get(n + 1).unwrap_or(p);
            summands.push((end - c, *x));
            g.push(i);
            f_prime.push(pieces[n]);
        }
    }
    Ok((FormalSum { base: a.base.clone(), summands }, g, f_prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::validate_poset;
    use proptest::prelude::*;

    fn xy() -> Arc<FinPoset> {
        Arc::new(validate_poset(["x", "y"], &[("x", "y")]).unwrap())
    }

    fn fs(base: &Arc<FinPoset>, s: &str) -> FormalSum {
        FormalSum::parse(base.clone(), s).unwrap()
    }

    #[test]
    fn refinement_examples() {
        let b = xy();
        let a = fs(&b, "1/2 x + 1/2 x");
        let c = fs(&b, "1/3 x + 2/3 x");
        let rf = common_refinement(&a, &c).unwrap();
        assert_eq!(rf.sum, fs(&b, "1/3 x + 1/6 x + 1/2 x"));
        assert!(is_subdivision(&rf.sum, &a, &rf.into_a));
        assert!(is_subdivision(&rf.sum, &c, &rf.into_b));
        assert_eq!(common_refinement(&a, &a).unwrap().sum, a);
        let one = fs(&b, "1 x");
        let q = fs(&b, "1/4 x + 3/4 x");
        assert_eq!(common_refinement(&one, &q).unwrap().sum, q);
        assert_eq!(common_refinement(&one, &fs(&b, "1/2 x")), Err(SdistError::NotSameDistribution));
    }

    #[test]
    fn obviously_below_examples() {
        let b = xy();
        assert!(obviously_below(&fs(&b, "1/2 x"), &fs(&b, "1/2 y")).unwrap().is_some());
        assert!(obviously_below(&fs(&b, "1 y"), &fs(&b, "1 x")).unwrap().is_none());
        let (a, c) = (fs(&b, "1/3 x + 1/3 x"), fs(&b, "1/2 x + 1/2 x"));
        let f = obviously_below(&a, &c).unwrap().unwrap();
        assert!(is_obviously_below(&a, &c, &f));
    }

    #[test]
    fn parse_errors() {
        let b = xy();
        assert!(FormalSum::parse(b.clone(), "1/2 z").is_err());
        assert!(FormalSum::parse(b.clone(), "3/4 x + 1/2 y").is_err());
        assert!(FormalSum::parse(b.clone(), "1/2 x y").is_err());
        assert_eq!(fs(&b, "0").len(), 0);
        assert_eq!(fs(&b, "y").summands(), &[(Rational::one(), 1)]);
    }

    // random `a ⊑ b` over a 3-chain with sixths as coefficients
    fn arb_below() -> impl Strategy<Value = (Vec<(i64, usize)>, Vec<(i64, usize, i64, usize)>)> {
        (
            prop::collection::vec((1i64..3, 0usize..3, 0i64..2, 0usize..3), 1..4),
            prop::collection::vec((1i64..3, 0usize..3), 0..2),
        )
            .prop_map(|(pairs, extra)| (extra, pairs))
    }

    fn build(pairs: &[(i64, usize, i64, usize)], extra: &[(i64, usize)]) -> (FormalSum, FormalSum, Vec<usize>) {
        let base = Arc::new(FinPoset::chain(&["0", "1", "2"]).unwrap());
        let n = (pairs.len() + extra.len()) as i64;
        let scale = 3 * n;
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut f = Vec::new();
        for &(p, x, dp, dx) in pairs {
            a.push((Rational::new(p, scale), x));
            f.push(b.len());
            b.push((Rational::new(p + dp, scale), (x + dx).min(2)));
        }
        for &(q, y) in extra {
            b.push((Rational::new(q, scale), y));
        }
        (FormalSum::new(base.clone(), a).unwrap(), FormalSum::new(base, b).unwrap(), f)
    }

    fn split(s: &FormalSum, cuts: &[u8]) -> (FormalSum, Vec<usize>) {
        let mut out = Vec::new();
        let mut g = Vec::new();
        for (i, (p, x)) in s.summands().iter().enumerate() {
            let k = cuts.get(i).copied().unwrap_or(0) % 3;
            let piece = p / &Rational::from_integer(k as i64 + 1);
            for _ in 0..=k {
                out.push((piece.clone(), *x));
                g.push(i);
            }
        }
        (FormalSum::new(s.base().clone(), out).unwrap(), g)
    }

    proptest! {
        #[test]
        fn push_and_pull((extra, pairs) in arb_below(), cuts in prop::collection::vec(0u8..3, 6)) {
            let (a, b, f) = build(&pairs, &extra);
            prop_assert!(is_obviously_below(&a, &b, &f));
            let (d, g) = split(&a, &cuts);
            let (d_star, g_star, f_star) = push_subdivision(&a, &b, &f, &d, &g).unwrap();
            prop_assert!(is_subdivision(&d_star, &b, &g_star));
            prop_assert!(is_obviously_below(&d, &d_star, &f_star));
            let (e, h) = split(&b, &cuts);
            let (d2, g2, f2) = pull_subdivision(&a, &b, &f, &e, &h).unwrap();
            prop_assert!(is_subdivision(&d2, &a, &g2));
            prop_assert!(is_obviously_below(&d2, &e, &f2));
        }

        #[test]
        fn matching_finds_constructed_witness((extra, pairs) in arb_below()) {
            let (a, b, _) = build(&pairs, &extra);
            let found = obviously_below(&a, &b).unwrap();
            prop_assert!(found.as_deref().is_some_and(|f| is_obviously_below(&a, &b, f)));
        }
    }
}
