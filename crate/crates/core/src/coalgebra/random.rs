//! Random systems for property tests and benchmarks.

use rand::Rng;

use super::System;
use crate::poset::FinPoset;
use crate::rational::Rational;

fn names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("s{i}")).collect()
}

/// A discrete LTS where each (state, label, state) edge is present with
/// probability `density`.
pub fn random_lts<R: Rng>(rng: &mut R, states: usize, labels: &[&str], density: f64) -> System {
    let names = names(states);
    let mut edges = Vec::new();
    for x in &names {
        for a in labels {
            for y in &names {
                if rng.gen_bool(density) {
                    edges.push((x.as_str(), *a, y.as_str()));
                }
            }
        }
    }
    System::lts(FinPoset::discrete(&names), labels, &edges).expect("generated edges are well-formed")
}

/// A discrete PTS with at most `fanout` edges per state; each state's mass is
/// split in multiples of `1/d` for a random `d ≤ max_denom`.
pub fn random_pts<R: Rng>(rng: &mut R, states: usize, labels: &[&str], fanout: usize, max_denom: i64) -> System {
    let names = names(states);
    let mut edges = Vec::new();
    for x in &names {
        let d = rng.gen_range(1..=max_denom);
        let mut left = rng.gen_range(0..=d);
        for _ in 0..fanout {
            if left == 0 {
                break;
            }
            let k = rng.gen_range(1..=left);
            left -= k;
            let a = labels[rng.gen_range(0..labels.len())];
            let y = &names[rng.gen_range(0..states)];
            edges.push((x.as_str(), a, y.as_str(), Rational::new(k, d)));
        }
    }
    System::pts(FinPoset::discrete(&names), labels, &edges).expect("generated masses are at most one")
}
