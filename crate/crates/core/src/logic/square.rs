use std::sync::Arc;

use rand::Rng;

use super::eval::check_space;
use super::{eval_on_mn1, random_formula, Caps, Enumeration, Formula, LogicError, LogicSpec, Modality, Omega};
use crate::monads::{Beh, Item, Leaf, MonadError, Node, SemKind, Semantics, Space};
use crate::poset::FinPoset;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SquareViolation {
    pub modality: String,
    pub formula: String,
    pub input: String,
    pub lhs: Omega,
    pub rhs: Omega,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SquareReport {
    pub checked: usize,
    pub violations: usize,
    /// The first few violations.
    pub examples: Vec<SquareViolation>,
}

impl SquareReport {
    pub fn commutes(&self) -> bool {
        self.violations == 0
    }

    fn record(&mut self, v: impl FnOnce() -> SquareViolation, ok: bool) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < 8 {
                self.examples.push(v());
            }
        }
    }
}

/// `M₁Ω` for two-valued logics: the same semantics over the chain
/// `false < true`.
pub fn omega_space(sem: &Semantics) -> Space {
    Space::new(sem.clone(), Arc::new(FinPoset::chain(&["false", "true"]).expect("a chain is a poset")))
}

/// `⟦L⟧ : M₁Ω → Ω` by membership in the set an element of `M₁𝟚` stands for.
pub fn structure_map(omega: &Space, m: &Modality, b: Beh) -> Result<bool, LogicError> {
    let sem = omega.semantics();
    let yes = omega.base().index_of("true").expect("truth chain");
    let items = match omega.node(b) {
        Node::Deadlock(1) => Vec::new(),
        Node::Layer { depth: 1, items } => items,
        _ => return Err(MonadError::ShapeMismatch("expected an element of M₁Ω".into()).into()),
    };
    let value = |c: Beh| matches!(omega.node(c), Node::Leaf(Leaf::Base(v)) if v == yes);
    let below = |i: &Item, j: &Item| match (i, j) {
        (Item::Halt, Item::Halt) => true,
        (Item::Act { ready: r1, label: a1, child: c1 }, Item::Act { ready: r2, label: a2, child: c2 }) => {
            r1 == r2 && a1 == a2 && (!value(*c1) || value(*c2))
        }
        _ => false,
    };
    let convex = omega.kind().is_convex();
    let contains = |t: &Item| items.iter().any(|g| below(t, g)) && (!convex || items.iter().any(|g| below(g, t)));
    let leaf = |v: bool| omega.leaf(Leaf::Base(if v { yes } else { 1 - yes }));
    let readies: Vec<u32> = {
        let mut r: Vec<u32> =
            items.iter().filter_map(|i| if let Item::Act { ready, .. } = i { Some(*ready) } else { None }).collect();
        r.push(0);
        r.sort();
        r.dedup();
        r
    };
    Ok(match m {
        Modality::Dia(a) => {
            let a = sem.label_index(a)?;
            let t = leaf(true)?;
            readies.iter().any(|&ready| contains(&Item::Act { ready, label: a, child: t }))
        }
        Modality::Box(a) => {
            let a = sem.label_index(a)?;
            let f = leaf(false)?;
            !readies.iter().any(|&ready| contains(&Item::Act { ready, label: a, child: f }))
        }
        Modality::Ready { label, ready } => {
            let a = sem.label_index(label)?;
            let mask = sem.ready_mask(ready.iter().map(String::as_str))?;
            contains(&Item::Act { ready: mask, label: a, child: leaf(true)? })
        }
        Modality::Halt => contains(&Item::Halt),
    })
}

/// Pairs `s ≤ t` in `M₁𝟚` with `⟦L⟧(s) ≰ ⟦L⟧(t)`, over all of `M₁𝟚`.
pub fn structure_monotone(omega: &Space, modalities: &[Modality]) -> Result<SquareReport, LogicError> {
    let carrier = omega.carrier_over(&[Leaf::Base(0), Leaf::Base(1)], 1)?;
    let mut report = SquareReport::default();
    for m in modalities {
        for &s in &carrier {
            for &t in &carrier {
                if !omega.leq(s, t) {
                    continue;
                }
                let (l, r) = (structure_map(omega, m, s)?, structure_map(omega, m, t)?);
                report.record(
                    || SquareViolation {
                        modality: m.to_string(),
                        formula: String::new(),
                        input: format!("{} <= {}", omega.show(s), omega.show(t)),
                        lhs: Omega::Two(l),
                        rhs: Omega::Two(r),
                    },
                    l <= r,
                );
            }
        }
    }
    Ok(report)
}

/// Checks `⟦L(φ)⟧ ∘ μ¹ⁿ = ⟦L⟧ ∘ M₁⟦φ⟧` on all of `M₁Mₙ1`, for every
/// modality and every enumerated depth-`n` evaluation.
pub fn modality_square(space: &Space, logic: &LogicSpec, n: usize, caps: Caps) -> Result<SquareReport, LogicError> {
    check_space(space, logic)?;
    let base = space.carrier(n)?;
    let leaves: Vec<Leaf> = base.iter().map(|&c| Leaf::Inner(c)).collect();
    let nested = space.carrier_over(&leaves, 1)?;
    let omega = omega_space(space.semantics());
    let yes = omega.base().index_of("true").expect("truth chain");
    let mut en = Enumeration::new(space, logic, &base, caps)?;
    let level = en.level(n)?.to_vec();
    let mut report = SquareReport::default();
    for e in &level {
        for m in logic.modalities(space.kind()) {
            let phi = Formula::Modal(m.clone(), Box::new(e.formula.clone()));
            for &t in &nested {
                let lhs = eval_on_mn1(space, logic, &phi, space.mult(1, n, t)?)?;
                let ft = space.map_leaves(t, &omega, &mut |l| match l {
                    Leaf::Inner(c) => match en.value(n, e, c) {
                        Some(Omega::Two(v)) => Ok(Leaf::Base(if v { yes } else { 1 - yes })),
                        _ => Err(MonadError::UnknownElement(format!("{c:?}"))),
                    },
                    Leaf::Base(_) => Err(MonadError::ShapeMismatch("unnested leaf".into())),
                })?;
                let rhs = Omega::Two(structure_map(&omega, &m, ft)?);
                report.record(
                    || SquareViolation {
                        modality: m.to_string(),
                        formula: e.formula.to_string(),
                        input: space.show(t),
                        lhs: lhs.clone(),
                        rhs: rhs.clone(),
                    },
                    lhs == rhs,
                );
            }
        }
    }
    Ok(report)
}

/// A random weight vector in multiples of `1/d`, total at most one.
fn weights<R: Rng>(rng: &mut R, k: usize) -> Vec<Rational> {
    let d = rng.gen_range(1..=6i64);
    let mut left = rng.gen_range(0..=d);
    (0..k)
        .map(|_| {
            let w = rng.gen_range(0..=left);
            left -= w;
            Rational::new(w, d)
        })
        .collect()
}

fn random_word<R: Rng>(rng: &mut R, labels: u16, len: usize) -> Vec<u16> {
    (0..len).map(|_| rng.gen_range(0..labels)).collect()
}

fn random_dist<R: Rng>(rng: &mut R, space: &Space, depth: usize) -> Result<Beh, LogicError> {
    let labels = space.semantics().labels().len() as u16;
    let k = rng.gen_range(1..=3);
    let entries: Vec<_> =
        weights(rng, k).into_iter().map(|p| (random_word(rng, labels, depth), Leaf::Base(0), p)).collect();
    Ok(space.dist(depth, entries)?)
}

/// The square for `⟨a⟩` on random elements of `M₁Mₙ1`, against the
/// expected-value structure map.
pub fn prob_square<R: Rng>(
    rng: &mut R,
    space: &Space,
    logic: &LogicSpec,
    n: usize,
    samples: usize,
) -> Result<SquareReport, LogicError> {
    check_space(space, logic)?;
    let labels = space.semantics().labels().len() as u16;
    let mut report = SquareReport::default();
    for _ in 0..samples {
        let phi = random_formula(rng, logic, SemKind::PTrace, n, n + 1);
        let a = rng.gen_range(0..labels);
        let k = rng.gen_range(1..=3);
        let mut parts = Vec::new();
        for p in weights(rng, k) {
            let c = random_dist(rng, space, n)?;
            parts.push((rng.gen_range(0..labels), c, p));
        }
        let t = space.dist(1, parts.iter().map(|(b, c, p)| (vec![*b], Leaf::Inner(*c), p.clone())))?;
        let m = Modality::Dia(logic.labels()[a as usize].clone());
        let lhs = eval_on_mn1(space, logic, &Formula::Modal(m.clone(), Box::new(phi.clone())), space.mult(1, n, t)?)?;
        let mut rhs = Rational::zero();
        for (b, c, p) in &parts {
            if *b == a {
                let Omega::Unit(v) = eval_on_mn1(space, logic, &phi, *c)? else { unreachable!() };
                rhs += &(p * &v);
            }
        }
        let rhs = Omega::Unit(rhs);
        report.record(
            || SquareViolation {
                modality: m.to_string(),
                formula: phi.to_string(),
                input: space.show(t),
                lhs: lhs.clone(),
                rhs: rhs.clone(),
            },
            lhs == rhs,
        );
    }
    Ok(report)
}

/// A formal sum `Σ wᵢ·(aᵢ, rᵢ)` in `M₁[0,1]`.
type Formal = Vec<(u16, Rational, Rational)>;

fn alpha(a: u16, s: &Formal) -> Rational {
    s.iter().filter(|e| e.0 == a).map(|(_, r, w)| w * r).sum()
}

fn random_unit<R: Rng>(rng: &mut R) -> Rational {
    let d = rng.gen_range(1..=6i64);
    Rational::new(rng.gen_range(0..=d), d)
}

fn random_formal<R: Rng>(rng: &mut R, labels: u16) -> Formal {
    let k = rng.gen_range(0..=3);
    weights(rng, k).into_iter().map(|w| (rng.gen_range(0..labels), random_unit(rng), w)).collect()
}

/// `⟨a⟩ ∘ μ⁰¹ = o ∘ M₀⟨a⟩` on random elements of `M₀M₁[0,1]`.
pub fn prob_homomorphy<R: Rng>(rng: &mut R, labels: u16, samples: usize) -> SquareReport {
    let mut report = SquareReport::default();
    for _ in 0..samples {
        let k = rng.gen_range(0..=3);
        let nu: Vec<(Rational, Formal)> =
            weights(rng, k).into_iter().map(|q| (q, random_formal(rng, labels))).collect();
        let flat: Formal =
            nu.iter().flat_map(|(q, rho)| rho.iter().map(move |(a, r, w)| (*a, r.clone(), q * w))).collect();
        for a in 0..labels {
            let lhs = alpha(a, &flat);
            let rhs: Rational = nu.iter().map(|(q, rho)| q * &alpha(a, rho)).sum();
            report.record(
                || SquareViolation {
                    modality: format!("<{a}>"),
                    formula: String::new(),
                    input: format!("{nu:?}"),
                    lhs: Omega::Unit(lhs.clone()),
                    rhs: Omega::Unit(rhs.clone()),
                },
                lhs == rhs,
            );
        }
    }
    report
}

/// `⟨a⟩ ∘ μ¹⁰ = ⟨a⟩ ∘ M₁o` on random elements of `M₁M₀[0,1]`.
pub fn prob_coequalization<R: Rng>(rng: &mut R, labels: u16, samples: usize) -> SquareReport {
    let mut report = SquareReport::default();
    for _ in 0..samples {
        let k = rng.gen_range(0..=3);
        let xi: Vec<(u16, Vec<(Rational, Rational)>, Rational)> = weights(rng, k)
            .into_iter()
            .map(|p| {
                let j = rng.gen_range(0..=3);
                let inner = weights(rng, j).into_iter().map(|q| (random_unit(rng), q)).collect();
                (rng.gen_range(0..labels), inner, p)
            })
            .collect();
        let flattened: Formal =
            xi.iter().flat_map(|(a, inner, p)| inner.iter().map(move |(v, q)| (*a, v.clone(), p * q))).collect();
        let averaged: Formal =
            xi.iter().map(|(a, inner, p)| (*a, inner.iter().map(|(v, q)| q * v).sum(), p.clone())).collect();
        for a in 0..labels {
            let (lhs, rhs) = (alpha(a, &flattened), alpha(a, &averaged));
            report.record(
                || SquareViolation {
                    modality: format!("<{a}>"),
                    formula: String::new(),
                    input: format!("{xi:?}"),
                    lhs: Omega::Unit(lhs.clone()),
                    rhs: Omega::Unit(rhs.clone()),
                },
                lhs == rhs,
            );
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{builtin_logic, LogicKind};
    use rand::SeedableRng;

    fn setup(kind: SemKind, labels: &[&str]) -> (Space, LogicSpec) {
        (
            Space::over_one(Semantics::new(kind, labels).unwrap()),
            builtin_logic(LogicKind::for_semantics(kind), labels).unwrap(),
        )
    }

    #[test]
    fn box_is_monotone_only_over_convex_sets() {
        let bisim = omega_space(&Semantics::new(SemKind::Bisim, &["a"]).unwrap());
        let both = [Modality::Dia("a".into()), Modality::Box("a".into())];
        assert!(structure_monotone(&bisim, &both).unwrap().commutes());
        let sim = omega_space(&Semantics::new(SemKind::Sim, &["a"]).unwrap());
        assert!(structure_monotone(&sim, &both[..1]).unwrap().commutes());
        assert!(!structure_monotone(&sim, &both[1..]).unwrap().commutes());
    }

    #[test]
    fn squares_commute_for_bisim_and_sim() {
        for kind in [SemKind::Bisim, SemKind::Sim] {
            for n in 0..=1 {
                let (s, l) = setup(kind, &["a", "b"]);
                let r = modality_square(&s, &l, n, Caps::default()).unwrap();
                assert!(r.checked > 0 && r.commutes(), "{kind} {n}: {:?}", r.examples);
            }
        }
    }

    #[test]
    fn sync_box_square_breaks_on_pruned_branches() {
        let (s, l) = setup(SemKind::Sync, &["a", "b"]);
        let r = modality_square(&s, &l, 0, Caps::default()).unwrap();
        assert!(!r.commutes());
        assert!(r.examples.iter().all(|v| v.modality.starts_with('[')), "{:?}", r.examples);
    }

    #[test]
    fn prob_squares() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let (s, l) = setup(SemKind::PTrace, &["a", "b"]);
        for n in 0..=2 {
            assert!(prob_square(&mut rng, &s, &l, n, 100).unwrap().commutes());
        }
        assert!(prob_homomorphy(&mut rng, 2, 200).commutes());
        assert!(prob_coequalization(&mut rng, 2, 200).commutes());
    }
}
