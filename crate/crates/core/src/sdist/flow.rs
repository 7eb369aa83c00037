use std::collections::VecDeque;

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};

use super::{SdistError, SubDist};
use crate::poset::FinPoset;
use crate::rational::{lcm_denominators, Rational};

/// Largest atom count either side may have in [`sdist_leq_bruteforce`].
pub const ATOM_LIMIT: usize = 12;

/// Decides `μ ≼ ν` by max-flow through the order relation.
pub fn sdist_leq_flow(p: &FinPoset, mu: &SubDist, nu: &SubDist) -> Result<bool, SdistError> {
    if !same_base_ref(p, mu) || !same_base_ref(p, nu) {
        return Err(SdistError::BaseMismatch);
    }
    let left: Vec<(usize, Rational)> = mu.weights().iter().map(|(&x, w)| (x, w.clone())).collect();
    let right: Vec<(usize, Rational)> = nu.weights().iter().map(|(&x, w)| (x, w.clone())).collect();
    Ok(coupling_exists(&left, &right, |x, y| p.leq(*x, *y)))
}

/// True iff all of the left mass can be routed to right-hand points above it
/// without exceeding their weights.
pub fn coupling_exists<K>(left: &[(K, Rational)], right: &[(K, Rational)], leq: impl Fn(&K, &K) -> bool) -> bool {
    let need: Rational = left.iter().map(|e| &e.1).sum();
    if need.is_zero() {
        return true;
    }
    let have: Rational = right.iter().map(|e| &e.1).sum();
    if need > have {
        return false;
    }
    let d = lcm_denominators(left.iter().chain(right).map(|e| &e.1));
    let scale = |r: &Rational| r.scaled(&d).expect("lcm clears denominators");
    let (m, n) = (left.len(), right.len());
    let (source, sink) = (0, m + n + 1);
    let size = m + n + 2;
    let mut cap = vec![vec![BigInt::zero(); size]; size];
    let total = scale(&need);
    for (i, (x, w)) in left.iter().enumerate() {
        cap[source][1 + i] = scale(w);
        for (j, (y, _)) in right.iter().enumerate() {
            if leq(x, y) {
                cap[1 + i][1 + m + j] = total.clone();
            }
        }
    }
    for (j, (_, w)) in right.iter().enumerate() {
        cap[1 + m + j][sink] = scale(w);
    }
    max_flow(&mut cap, source, sink) == total
}

/// Edmonds-Karp on a dense residual matrix.
fn max_flow(cap: &mut [Vec<BigInt>], s: usize, t: usize) -> BigInt {
    let n = cap.len();
    let mut flow = BigInt::zero();
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v].is_positive() {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut bottleneck: Option<BigInt> = None;
        let mut v = t;
        while v != s {
            let u = prev[v];
            bottleneck = Some(match bottleneck {
                Some(b) if b <= cap[u][v] => b,
                _ => cap[u][v].clone(),
            });
            v = u;
        }
        let b = bottleneck.expect("path has an edge");
        let mut v = t;
        while v != s {
            let u = prev[v];
            cap[u][v] -= &b;
            cap[v][u] += &b;
            v = u;
        }
        flow += b;
    }
}

/// Decides `μ ≼ ν` by cutting both sides into atoms of mass `1/D` and searching
/// for an injective, order-respecting atom assignment.
pub fn sdist_leq_bruteforce(p: &FinPoset, mu: &SubDist, nu: &SubDist) -> Result<bool, SdistError> {
    if !same_base_ref(p, mu) || !same_base_ref(p, nu) {
        return Err(SdistError::BaseMismatch);
    }
    let d = lcm_denominators(mu.weights().values().chain(nu.weights().values()));
    let atoms = |s: &SubDist| -> Result<Vec<(usize, usize)>, SdistError> {
        let mut out = Vec::new();
        let mut count = 0usize;
        for (&x, w) in s.weights() {
            let k = w.scaled(&d).and_then(|k| k.to_usize()).ok_or(SdistError::TooLarge(usize::MAX))?;
            count += k;
            if count > ATOM_LIMIT {
                return Err(SdistError::TooLarge(count));
            }
            out.push((x, k));
        }
        Ok(out)
    };
    let (left, right) = (atoms(mu)?, atoms(nu)?);
    let mut queue: Vec<usize> = Vec::new();
    for &(x, k) in &left {
        queue.extend(std::iter::repeat_n(x, k));
    }
    let mut room: Vec<(usize, usize)> = right;
    Ok(assign(p, &queue, 0, 0, &mut room))
}

fn same_base_ref(p: &FinPoset, s: &SubDist) -> bool {
    **s.base() == *p
}

// Atoms of one element are interchangeable, so consecutive equal atoms take
// non-decreasing targets.
fn assign(p: &FinPoset, queue: &[usize], k: usize, floor: usize, room: &mut [(usize, usize)]) -> bool {
    if k == queue.len() {
        return true;
    }
    let x = queue[k];
    for j in floor..room.len() {
        let (y, free) = room[j];
        if free == 0 || !p.leq(x, y) {
            continue;
        }
        room[j].1 -= 1;
        let next_floor = if queue.get(k + 1) == Some(&x) { j } else { 0 };
        let ok = assign(p, queue, k + 1, next_floor, room);
        room[j].1 += 1;
        if ok {
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::validate_poset;
    use std::sync::Arc;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn xy() -> Arc<FinPoset> {
        Arc::new(validate_poset(["x", "y"], &[("x", "y")]).unwrap())
    }

    fn sd(b: &Arc<FinPoset>, e: &[(&str, Rational)]) -> SubDist {
        SubDist::from_ids(b.clone(), e).unwrap()
    }

    #[test]
    fn flow_examples() {
        let b = xy();
        let leq = |m: &SubDist, n: &SubDist| sdist_leq_flow(&b, m, n).unwrap();
        assert!(leq(&sd(&b, &[("x", r(1, 2))]), &sd(&b, &[("y", r(1, 2))])));
        assert!(leq(&sd(&b, &[("x", r(1, 2)), ("y", r(1, 2))]), &sd(&b, &[("y", r(1, 1))])));
        assert!(!leq(&sd(&b, &[("x", r(1, 2))]), &sd(&b, &[("y", r(1, 4))])));
    }

    #[test]
    fn bruteforce_examples() {
        let b = xy();
        let brute = |m: &SubDist, n: &SubDist| sdist_leq_bruteforce(&b, m, n).unwrap();
        let mu = sd(&b, &[("x", r(1, 2)), ("y", r(1, 2))]);
        assert!(brute(&mu, &mu));
        assert!(brute(&mu, &sd(&b, &[("y", r(1, 1))])));
        let d = Arc::new(FinPoset::discrete(["x", "y"]));
        let one_x = SubDist::dirac(d.clone(), 0);
        let one_y = SubDist::dirac(d.clone(), 1);
        assert!(!sdist_leq_bruteforce(&d, &one_x, &one_y).unwrap());
    }

    #[test]
    fn bruteforce_is_gated() {
        let b = xy();
        let big = sd(&b, &[("x", r(13, 14))]);
        assert!(matches!(sdist_leq_bruteforce(&b, &big, &big), Err(SdistError::TooLarge(13))));
    }

    #[test]
    fn base_mismatch() {
        let b = xy();
        let other = Arc::new(FinPoset::discrete(["x", "y"]));
        let mu = SubDist::dirac(other, 0);
        assert_eq!(sdist_leq_flow(&b, &mu, &mu), Err(SdistError::BaseMismatch));
    }

    #[test]
    fn split_mass_needs_both_targets() {
        // x below both y and z; 2/3 at x must split over 1/3 y + 1/3 z
        let b = Arc::new(validate_poset(["x", "y", "z"], &[("x", "y"), ("x", "z")]).unwrap());
        let mu = sd(&b, &[("x", r(2, 3))]);
        let nu = sd(&b, &[("y", r(1, 3)), ("z", r(1, 3))]);
        assert!(sdist_leq_flow(&b, &mu, &nu).unwrap());
        assert!(sdist_leq_bruteforce(&b, &mu, &nu).unwrap());
        let nu2 = sd(&b, &[("y", r(1, 3)), ("x", r(1, 4))]);
        assert!(!sdist_leq_flow(&b, &mu, &nu2).unwrap());
        assert!(!sdist_leq_bruteforce(&b, &mu, &nu2).unwrap());
    }
}
