//! Input generators shared by the benchmarks.

use std::sync::Arc;

use gradpre_core::coalgebra::random::random_lts;
use gradpre_core::poset::validate_poset;
use gradpre_core::{FinPoset, Rational, SubDist, System};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `e0 <= e1 <= ... <= e(n-1)`.
pub fn chain(n: usize) -> Arc<FinPoset> {
    let names: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
    let order: Vec<(&str, &str)> = names.windows(2).map(|w| (w[0].as_str(), w[1].as_str())).collect();
    Arc::new(validate_poset(names.iter().map(String::as_str), &order).unwrap())
}

/// Two rows of `n/2` elements, each element of the first row below two of the second.
pub fn zigzag(n: usize) -> Arc<FinPoset> {
    let half = n / 2;
    let names: Vec<String> = (0..2 * half).map(|i| format!("e{i}")).collect();
    let mut order = Vec::new();
    for i in 0..half {
        order.push((names[i].as_str(), names[half + i].as_str()));
        order.push((names[i].as_str(), names[half + (i + 1) % half].as_str()));
    }
    Arc::new(validate_poset(names.iter().map(String::as_str), &order).unwrap())
}

/// Random subdistribution with full support and denominators at most `denom`.
pub fn random_subdist(rng: &mut ChaCha8Rng, p: &Arc<FinPoset>, denom: i64) -> SubDist {
    let total = denom * p.len() as i64;
    let mut left = total;
    let entries: Vec<(usize, Rational)> = (0..p.len())
        .map(|x| {
            let w = rng.gen_range(0..=left.min(denom));
            left -= w;
            (x, Rational::new(w, total))
        })
        .collect();
    SubDist::new(p.clone(), entries).unwrap()
}

/// Random discrete LTS over two labels.
pub fn lts(seed: u64, states: usize, density: f64) -> System {
    random_lts(&mut rng(seed), states, &["a", "b"], density)
}
