use gradpre_core::coalgebra::random::{random_lts, random_pts};
use gradpre_core::coalgebra::{classical_bisim, n_step_behaviour, refines_in};
use gradpre_core::logic::{
    builtin_logic, distinguish, eval_in_system, eval_on_mn1, parse_formula, random_formula, Caps, LogicKind,
};
use gradpre_core::monads::{SemKind, Semantics, Space};
use gradpre_core::{load_system, refines, Omega, Rational, System, SystemDoc};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const BRANCHING: &str = r#"{
  "type": "lts",
  "states": ["p", "p1", "p2", "p3", "p4", "q", "q1", "q2", "q3"],
  "labels": ["a", "b", "c"],
  "transitions": [
    {"from": "p", "label": "a", "to": "p1"},
    {"from": "p", "label": "a", "to": "p2"},
    {"from": "p1", "label": "b", "to": "p3"},
    {"from": "p2", "label": "c", "to": "p4"},
    {"from": "q", "label": "a", "to": "q1"},
    {"from": "q1", "label": "b", "to": "q2"},
    {"from": "q1", "label": "c", "to": "q3"}
  ]
}"#;

fn load(text: &str, kind: SemKind) -> System {
    let doc: SystemDoc = serde_json::from_str(text).unwrap();
    load_system(&doc, kind).unwrap()
}

fn space(kind: SemKind, sys: &System) -> Space {
    Space::over_one(Semantics::new(kind, &sys.labels).unwrap())
}

#[test]
fn branching_pipeline() {
    let sys = load(BRANCHING, SemKind::Bisim);
    let (p, q) = (sys.state("p").unwrap(), sys.state("q").unwrap());

    let sim = refines(SemKind::Sim, &sys, p, &sys, q, 4).unwrap();
    assert!(sim.holds_all());
    let back = refines(SemKind::Sim, &sys, q, &sys, p, 4).unwrap();
    assert_eq!(back.first_failure, Some(2));
    let bisim = refines(SemKind::Bisim, &sys, p, &sys, q, 4).unwrap();
    assert_eq!(bisim.holds, [true, true, false, false, false]);

    let s = space(SemKind::Bisim, &sys);
    let hml = builtin_logic(LogicKind::Hml, &sys.labels).unwrap();
    let w = distinguish(&s, &hml, &sys, q, &sys, p, 4, Caps::default()).unwrap().unwrap();
    assert_eq!(w.depth, 2);
    assert_eq!(eval_in_system(&s, &hml, &w.formula, &sys, q).unwrap(), w.left);
    assert_eq!(eval_in_system(&s, &hml, &w.formula, &sys, p).unwrap(), w.right);
    assert!(!w.left.leq(&w.right));

    let phi = parse_formula("<a> [c] ff", &hml).unwrap();
    assert_eq!(eval_in_system(&s, &hml, &phi, &sys, p).unwrap(), Omega::Two(true));
    assert_eq!(eval_in_system(&s, &hml, &phi, &sys, q).unwrap(), Omega::Two(false));
}

#[test]
fn probabilistic_pipeline() {
    let coin = r#"{
      "type": "pts",
      "states": ["x", "y", "z", "w"],
      "labels": ["a", "b"],
      "transitions": [
        {"from": "x", "label": "a", "to": "y", "prob": "1/2"},
        {"from": "x", "label": "a", "to": "z", "prob": "1/2"},
        {"from": "y", "label": "b", "to": "w", "prob": "1"}
      ]
    }"#;
    let sys = load(coin, SemKind::PTrace);
    let s = space(SemKind::PTrace, &sys);
    let prob = builtin_logic(LogicKind::Prob, &sys.labels).unwrap();
    let x = sys.state("x").unwrap();
    let v = |f: &str| eval_in_system(&s, &prob, &parse_formula(f, &prob).unwrap(), &sys, x).unwrap();
    assert_eq!(v("<a> tt"), Omega::Unit(Rational::one()));
    assert_eq!(v("<a> <b> tt"), Omega::Unit(Rational::new(1, 2)));
    assert_eq!(v("<b> tt"), Omega::Unit(Rational::zero()));
    // w stops, so it lies below every state at positive depth
    let (y, w) = (sys.state("y").unwrap(), sys.state("w").unwrap());
    assert!(!refines(SemKind::PTrace, &sys, x, &sys, y, 2).unwrap().holds_all());
    assert!(refines(SemKind::PTrace, &sys, w, &sys, y, 2).unwrap().holds_all());
}

#[test]
fn malformed_systems_are_rejected() {
    let bad = BRANCHING.replace(r#""to": "p4""#, r#""to": "nowhere""#);
    let doc: SystemDoc = serde_json::from_str(&bad).unwrap();
    assert!(load_system(&doc, SemKind::Bisim).is_err());
    let unknown_label = BRANCHING.replace(r#""label": "c", "to": "q3""#, r#""label": "d", "to": "q3""#);
    let doc: SystemDoc = serde_json::from_str(&unknown_label).unwrap();
    assert!(load_system(&doc, SemKind::Bisim).is_err());
    assert!(serde_json::from_str::<SystemDoc>(r#"{"type": "lts", "states": [], "labels": [], "extra": 1}"#).is_err());
}

fn lts(seed: u64, states: usize) -> System {
    random_lts(&mut ChaCha8Rng::seed_from_u64(seed), states, &["a", "b"], 0.35)
}

const KINDS: [SemKind; 4] = [SemKind::Bisim, SemKind::Sim, SemKind::ReadySim, SemKind::Sync];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn refinement_is_a_preorder(seed in any::<u64>(), states in 1usize..5, k in 0usize..4) {
        let sys = lts(seed, states);
        let s = space(KINDS[k], &sys);
        let r: Vec<Vec<bool>> = (0..states)
            .map(|x| (0..states).map(|y| refines_in(&s, &sys, x, &sys, y, 6).unwrap().holds_all()).collect())
            .collect();
        for x in 0..states {
            prop_assert!(r[x][x]);
            for y in 0..states {
                for z in 0..states {
                    prop_assert!(!(r[x][y] && r[y][z]) || r[x][z]);
                }
            }
        }
    }

    #[test]
    fn bisim_refinement_is_symmetric(seed in any::<u64>(), states in 1usize..5) {
        let sys = lts(seed, states);
        let s = space(SemKind::Bisim, &sys);
        let blocks = classical_bisim(&sys).unwrap();
        for x in 0..states {
            for y in 0..states {
                let fwd = refines_in(&s, &sys, x, &sys, y, 16).unwrap().holds_all();
                let back = refines_in(&s, &sys, y, &sys, x, 16).unwrap().holds_all();
                prop_assert_eq!(fwd, back);
                prop_assert_eq!(fwd, blocks[x] == blocks[y]);
            }
        }
    }

    #[test]
    fn deeper_refinement_implies_shallower(seed in any::<u64>(), states in 1usize..5, k in 0usize..4) {
        let sys = lts(seed, states);
        let s = space(KINDS[k], &sys);
        for x in 0..states {
            for y in 0..states {
                let v = refines_in(&s, &sys, x, &sys, y, 6).unwrap();
                if let Some(n) = v.first_failure {
                    prop_assert!(v.holds[..n].iter().all(|&b| b));
                    prop_assert!(v.holds[n..].iter().all(|&b| !b));
                }
            }
        }
    }

    #[test]
    fn refinement_preserves_values(seed in any::<u64>(), states in 1usize..5, k in 0usize..5, depth in 0usize..4) {
        let kind = if k == 4 { SemKind::PTrace } else { KINDS[k] };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sys = if kind == SemKind::PTrace {
            random_pts(&mut rng, states, &["a", "b"], 3, 4)
        } else {
            random_lts(&mut rng, states, &["a", "b"], 0.4)
        };
        let s = space(kind, &sys);
        let logic = builtin_logic(LogicKind::for_semantics(kind), &sys.labels).unwrap();
        let phi = random_formula(&mut rng, &logic, kind, depth, 7);
        let n = phi.depth().unwrap();
        for x in 0..states {
            for y in 0..states {
                if refines_in(&s, &sys, x, &sys, y, n).unwrap().holds[n] {
                    let vx = eval_in_system(&s, &logic, &phi, &sys, x).unwrap();
                    let vy = eval_in_system(&s, &logic, &phi, &sys, y).unwrap();
                    prop_assert!(vx.leq(&vy), "{} at {x}, {y}: {vx} vs {vy}", phi);
                }
            }
        }
    }

    #[test]
    fn witnesses_separate_at_their_depth(seed in any::<u64>(), states in 2usize..5, k in 0usize..4) {
        let kind = KINDS[k];
        let sys = lts(seed, states);
        let s = space(kind, &sys);
        let logic = builtin_logic(LogicKind::for_semantics(kind), &sys.labels).unwrap();
        for x in 0..states {
            for y in 0..states {
                let refined = refines_in(&s, &sys, x, &sys, y, 4).unwrap().holds_all();
                match distinguish(&s, &logic, &sys, x, &sys, y, 4, Caps::default()).unwrap() {
                    None => prop_assert!(refined),
                    Some(w) => {
                        prop_assert!(!refined);
                        let at = |z| eval_on_mn1(&s, &logic, &w.formula, n_step_behaviour(&s, &sys, z, w.depth).unwrap()).unwrap();
                        prop_assert!(!at(x).leq(&at(y)));
                    }
                }
            }
        }
    }
}
