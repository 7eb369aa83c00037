use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use super::{CoalgError, System, Transitions};
use crate::monads::SemKind;
use crate::poset::FinPoset;
use crate::rational::Rational;
use crate::sdist::SubDist;

fn lts(sys: &System) -> Result<&Vec<Vec<(u16, usize)>>, CoalgError> {
    match &sys.transitions {
        Transitions::Lts(t) => Ok(t),
        Transitions::Pts(_) => Err(CoalgError::WrongSemantics("pts", SemKind::Bisim)),
    }
}

/// Coarsest bisimulation of a discrete LTS by signature refinement; returns
/// a block number per state, blocks numbered by first member.
pub fn classical_bisim(sys: &System) -> Result<Vec<usize>, CoalgError> {
    if !sys.states.is_discrete() {
        return Err(CoalgError::NotDiscrete);
    }
    let t = lts(sys)?;
    let mut block = vec![0usize; sys.len()];
    loop {
        let mut ids: HashMap<BTreeSet<(u16, usize)>, usize> = HashMap::new();
        let mut next = Vec::with_capacity(sys.len());
        for x in 0..sys.len() {
            let sig: BTreeSet<(u16, usize)> = t[x].iter().map(|&(a, y)| (a, block[y])).collect();
            // keep the old block in the key so blocks only split
            let mut key = sig;
            key.insert((u16::MAX, block[x]));
            let n = ids.len();
            next.push(*ids.entry(key).or_insert(n));
        }
        if next.iter().collect::<BTreeSet<_>>().len() == block.iter().collect::<BTreeSet<_>>().len() {
            return Ok(next);
        }
        block = next;
    }
}

/// Largest simulation from states of `a` to states of `b`, by refining the
/// full relation.
pub fn classical_sim(a: &System, b: &System) -> Result<Vec<Vec<bool>>, CoalgError> {
    if a.labels != b.labels {
        return Err(CoalgError::LabelMismatch(a.labels.clone(), b.labels.clone()));
    }
    let (ta, tb) = (lts(a)?, lts(b)?);
    let mut r = vec![vec![true; b.len()]; a.len()];
    loop {
        let mut changed = false;
        for x in 0..a.len() {
            for y in 0..b.len() {
                if r[x][y] && !ta[x].iter().all(|&(l, x2)| tb[y].iter().any(|&(m, y2)| l == m && r[x2][y2])) {
                    r[x][y] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            return Ok(r);
        }
    }
}

/// All traces of length at most `n` from `x`.
pub fn traces(sys: &System, x: usize, n: usize) -> Result<BTreeSet<Vec<u16>>, CoalgError> {
    let t = lts(sys)?;
    let mut out = BTreeSet::new();
    let mut frontier: BTreeSet<(Vec<u16>, usize)> = [(Vec::new(), x)].into();
    for _ in 0..=n {
        let mut next = BTreeSet::new();
        for (w, s) in frontier {
            for &(a, y) in &t[s] {
                let mut w2 = w.clone();
                w2.push(a);
                next.insert((w2, y));
            }
            out.insert(w);
        }
        frontier = next.into_iter().filter(|(w, _)| w.len() <= n).collect();
    }
    Ok(out)
}

/// Probability of each length-`n` trace from `x`; zero traces are omitted.
pub fn trace_weights(sys: &System, x: usize, n: usize) -> Result<BTreeMap<Vec<u16>, Rational>, CoalgError> {
    let Transitions::Pts(t) = &sys.transitions else {
        return Err(CoalgError::WrongSemantics("lts", SemKind::PTrace));
    };
    if x >= sys.len() {
        return Err(CoalgError::UnknownState(format!("#{x}")));
    }
    let mut cur: BTreeMap<(Vec<u16>, usize), Rational> = [((Vec::new(), x), Rational::one())].into();
    for _ in 0..n {
        let mut next: BTreeMap<(Vec<u16>, usize), Rational> = BTreeMap::new();
        for ((w, s), p) in cur {
            for (a, y, q) in &t[s] {
                let mut w2 = w.clone();
                w2.push(*a);
                *next.entry((w2, *y)).or_default() += &(&p * q);
            }
        }
        cur = next;
    }
    let mut out: BTreeMap<Vec<u16>, Rational> = BTreeMap::new();
    for ((w, _), p) in cur {
        *out.entry(w).or_default() += &p;
    }
    Ok(out)
}

/// Trace distribution as a subdistribution on the discrete poset of all
/// length-`n` words (named `a.b`, or `eps` for the empty word).
pub fn trace_dist(sys: &System, x: usize, n: usize) -> Result<SubDist, CoalgError> {
    let weights = trace_weights(sys, x, n)?;
    let mut words: Vec<Vec<u16>> = vec![Vec::new()];
    for _ in 0..n {
        words = words
            .into_iter()
            .flat_map(|w| (0..sys.labels.len() as u16).map(move |a| [w.clone(), vec![a]].concat()))
            .collect();
    }
    let name = |w: &[u16]| {
        if w.is_empty() {
            "eps".to_string()
        } else {
            w.iter().map(|&a| sys.labels[a as usize].as_str()).collect::<Vec<_>>().join(".")
        }
    };
    let base = Arc::new(FinPoset::discrete(words.iter().map(|w| name(w))));
    let entries = weights.into_iter().map(|(w, p)| (words.iter().position(|v| *v == w).expect("all words listed"), p));
    SubDist::new(base, entries).map_err(|e| CoalgError::Schema(e.to_string()))
}
