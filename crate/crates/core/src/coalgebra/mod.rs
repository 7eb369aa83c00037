//! Finite ordered transition systems, their n-step behaviours, refinement
//! between states and classical fixpoint oracles.

mod oracle;
pub mod random;
mod unfold;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::monads::{MonadError, SemKind};
use crate::poset::{validate_poset, FinPoset, PosetError};
use crate::rational::Rational;
use crate::sdist::coupling_exists;

pub use oracle::{classical_bisim, classical_sim, trace_dist, trace_weights, traces};
pub use unfold::{n_step_behaviour, refines, refines_in, RefinementVerdict, Unfolder};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CoalgError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("state `{state}` has outgoing mass {mass} > 1")]
    MassExceedsOne { state: String, mass: Rational },
    #[error("transition structure is not monotone: {lower} <= {upper} but {witness}")]
    NotMonotone { lower: String, upper: String, witness: String },
    #[error("unknown state `{0}`")]
    UnknownState(String),
    #[error("label sets differ: {0:?} vs {1:?}")]
    LabelMismatch(Vec<String>, Vec<String>),
    #[error("system order is not discrete")]
    NotDiscrete,
    #[error("{0} systems cannot be read under {1} semantics")]
    WrongSemantics(&'static str, SemKind),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Monad(#[from] MonadError),
}

/// On-disk form of a system.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemDoc {
    #[serde(rename = "type")]
    pub kind: String,
    pub states: Vec<String>,
    #[serde(default)]
    pub order: Vec<[String; 2]>,
    pub labels: Vec<String>,
    #[serde(default)]
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionDoc {
    pub from: String,
    pub label: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prob: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Transitions {
    /// Generators of the successor set per state.
    Lts(Vec<Vec<(u16, usize)>>),
    /// Weighted successors per state; repeated pairs are merged.
    Pts(Vec<Vec<(u16, usize, Rational)>>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct System {
    pub states: Arc<FinPoset>,
    /// Sorted, without duplicates.
    pub labels: Vec<String>,
    pub transitions: Transitions,
}

impl System {
    pub fn lts<S: AsRef<str>>(
        states: FinPoset,
        labels: &[S],
        edges: &[(&str, &str, &str)],
    ) -> Result<System, CoalgError> {
        let doc = SystemDoc {
            kind: "lts".into(),
            states: states.elements().to_vec(),
            order: order_pairs(&states),
            labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            transitions: edges
                .iter()
                .map(|(f, a, t)| TransitionDoc {
                    from: f.to_string(),
                    label: a.to_string(),
                    to: t.to_string(),
                    prob: None,
                })
                .collect(),
        };
        System::from_doc(&doc)
    }

    pub fn pts<S: AsRef<str>>(
        states: FinPoset,
        labels: &[S],
        edges: &[(&str, &str, &str, Rational)],
    ) -> Result<System, CoalgError> {
        let doc = SystemDoc {
            kind: "pts".into(),
            states: states.elements().to_vec(),
            order: order_pairs(&states),
            labels: labels.iter().map(|l| l.as_ref().to_string()).collect(),
            transitions: edges
                .iter()
                .map(|(f, a, t, p)| TransitionDoc {
                    from: f.to_string(),
                    label: a.to_string(),
                    to: t.to_string(),
                    prob: Some(p.clone()),
                })
                .collect(),
        };
        System::from_doc(&doc)
    }

    /// Builds a system without checking monotonicity.
    pub fn from_doc(doc: &SystemDoc) -> Result<System, CoalgError> {
        let pairs: Vec<(&str, &str)> = doc.order.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
        let states = Arc::new(validate_poset(doc.states.iter().map(String::as_str), &pairs)?);
        let mut labels = doc.labels.clone();
        labels.sort();
        labels.dedup();
        if labels.len() != doc.labels.len() {
            return Err(CoalgError::Schema("duplicate label".into()));
        }
        let state = |s: &str| states.index_of(s).map_err(|_| CoalgError::UnknownState(s.to_string()));
        let label = |a: &str| {
            labels
                .iter()
                .position(|l| l == a)
                .map(|i| i as u16)
                .ok_or_else(|| CoalgError::Schema(format!("undeclared label `{a}`")))
        };
        let transitions = match doc.kind.as_str() {
            "lts" => {
                let mut out: Vec<BTreeSet<(u16, usize)>> = vec![BTreeSet::new(); states.len()];
                for t in &doc.transitions {
                    if t.prob.is_some() {
                        return Err(CoalgError::Schema("lts transitions carry no probability".into()));
                    }
                    out[state(&t.from)?].insert((label(&t.label)?, state(&t.to)?));
                }
                Transitions::Lts(out.into_iter().map(|s| s.into_iter().collect()).collect())
            }
            "pts" => {
                let mut out: Vec<BTreeMap<(u16, usize), Rational>> = vec![BTreeMap::new(); states.len()];
                for t in &doc.transitions {
                    let p =
                        t.prob.clone().ok_or_else(|| CoalgError::Schema("pts transition without \"prob\"".into()))?;
                    if !p.is_positive() {
                        return Err(CoalgError::Schema(format!("probability {p} is not positive")));
                    }
                    *out[state(&t.from)?].entry((label(&t.label)?, state(&t.to)?)).or_default() += &p;
                }
                for (x, m) in out.iter().enumerate() {
                    let mass: Rational = m.values().sum();
                    if mass > Rational::one() {
                        return Err(CoalgError::MassExceedsOne { state: states.name(x).to_string(), mass });
                    }
                }
                Transitions::Pts(
                    out.into_iter().map(|m| m.into_iter().map(|((a, y), p)| (a, y, p)).collect()).collect(),
                )
            }
            other => return Err(CoalgError::Schema(format!("unknown system type `{other}`"))),
        };
        Ok(System { states, labels, transitions })
    }

    pub fn to_doc(&self) -> SystemDoc {
        let name = |x: usize| self.states.name(x).to_string();
        let (kind, transitions) = match &self.transitions {
            Transitions::Lts(t) => (
                "lts",
                t.iter()
                    .enumerate()
                    .flat_map(|(x, es)| {
                        es.iter().map(move |&(a, y)| TransitionDoc {
                            from: name(x),
                            label: self.labels[a as usize].clone(),
                            to: name(y),
                            prob: None,
                        })
                    })
                    .collect(),
            ),
            Transitions::Pts(t) => (
                "pts",
                t.iter()
                    .enumerate()
                    .flat_map(|(x, es)| {
                        es.iter().map(move |(a, y, p)| TransitionDoc {
                            from: name(x),
                            label: self.labels[*a as usize].clone(),
                            to: name(*y),
                            prob: Some(p.clone()),
                        })
                    })
                    .collect(),
            ),
        };
        SystemDoc {
            kind: kind.into(),
            states: self.states.elements().to_vec(),
            order: order_pairs(&self.states),
            labels: self.labels.clone(),
            transitions,
        }
    }

    pub fn is_probabilistic(&self) -> bool {
        matches!(self.transitions, Transitions::Pts(_))
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn state(&self, id: &str) -> Result<usize, CoalgError> {
        self.states.index_of(id).map_err(|_| CoalgError::UnknownState(id.to_string()))
    }

    /// Labels enabled at `x`, as a bitmask over label indices.
    pub fn ready(&self, x: usize) -> u32 {
        match &self.transitions {
            Transitions::Lts(t) => t[x].iter().fold(0, |m, &(a, _)| m | 1 << a),
            Transitions::Pts(t) => t[x].iter().fold(0, |m, (a, _, _)| m | 1 << a),
        }
    }

    /// Checks that the transition map is monotone for the order the semantics
    /// puts on successor structures.
    pub fn validate(&self, kind: SemKind) -> Result<(), CoalgError> {
        let name = |x: usize| self.states.name(x).to_string();
        let p = &self.states;
        match (&self.transitions, kind) {
            (Transitions::Lts(_), SemKind::PTrace) => return Err(CoalgError::WrongSemantics("lts", kind)),
            (Transitions::Pts(_), k) if k != SemKind::PTrace => return Err(CoalgError::WrongSemantics("pts", kind)),
            _ => {}
        }
        for (x, y) in p.strict_pairs() {
            let fail = |w: String| Err(CoalgError::NotMonotone { lower: name(x), upper: name(y), witness: w });
            match &self.transitions {
                Transitions::Lts(t) => {
                    let dominated = |u: usize, v: usize| {
                        t[u].iter().find(|&&(a, u2)| !t[v].iter().any(|&(b, v2)| a == b && p.leq(u2, v2)))
                    };
                    if let Some(&(a, s)) = dominated(x, y) {
                        return fail(format!(
                            "{} -{}-> {} has no matching successor above it",
                            name(x),
                            self.labels[a as usize],
                            name(s)
                        ));
                    }
                    if kind.is_convex() {
                        if let Some(&(a, s)) =
                            t[y].iter().find(|&&(a, v2)| !t[x].iter().any(|&(b, u2)| a == b && p.leq(u2, v2)))
                        {
                            return fail(format!(
                                "{} -{}-> {} has no matching successor below it",
                                name(y),
                                self.labels[a as usize],
                                name(s)
                            ));
                        }
                    }
                    if kind == SemKind::ReadySim && self.ready(x) != self.ready(y) {
                        return fail("their ready sets differ".into());
                    }
                }
                Transitions::Pts(t) => {
                    let left: Vec<((u16, usize), Rational)> =
                        t[x].iter().map(|(a, s, q)| ((*a, *s), q.clone())).collect();
                    let right: Vec<((u16, usize), Rational)> =
                        t[y].iter().map(|(a, s, q)| ((*a, *s), q.clone())).collect();
                    if !coupling_exists(&left, &right, |(a, u), (b, v)| a == b && p.leq(*u, *v)) {
                        return fail("the successor distribution is not below".into());
                    }
                }
            }
        }
        Ok(())
    }
}

fn order_pairs(p: &FinPoset) -> Vec<[String; 2]> {
    p.strict_pairs().into_iter().map(|(a, b)| [p.name(a).to_string(), p.name(b).to_string()]).collect()
}

/// Parses and validates a system for the given semantics.
pub fn load_system(doc: &SystemDoc, kind: SemKind) -> Result<System, CoalgError> {
    let sys = System::from_doc(doc)?;
    sys.validate(kind)?;
    Ok(sys)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn loads_discrete_lts() {
        let sys = System::lts(FinPoset::discrete(["x", "y"]), &["a"], &[("x", "a", "y")]).unwrap();
        for kind in [SemKind::Bisim, SemKind::Sim, SemKind::ReadySim, SemKind::Sync] {
            sys.validate(kind).unwrap();
        }
        assert!(matches!(sys.validate(SemKind::PTrace), Err(CoalgError::WrongSemantics(..))));
    }

    #[test]
    fn mass_above_one() {
        let e =
            System::pts(FinPoset::discrete(["x", "y"]), &["a"], &[("x", "a", "y", r(3, 4)), ("x", "a", "x", r(1, 2))]);
        assert!(matches!(e, Err(CoalgError::MassExceedsOne { .. })));
    }

    #[test]
    fn ordered_lts_must_be_monotone() {
        let states = validate_poset(["x", "y", "s"], &[("x", "y")]).unwrap();
        let sys = System::lts(states, &["a", "b"], &[("x", "a", "s"), ("y", "b", "s")]).unwrap();
        assert!(matches!(sys.validate(SemKind::Sim), Err(CoalgError::NotMonotone { .. })));
        let states = validate_poset(["x", "y", "s"], &[("x", "y")]).unwrap();
        let sys = System::lts(states, &["a", "b"], &[("x", "a", "s"), ("y", "a", "s"), ("y", "b", "s")]).unwrap();
        sys.validate(SemKind::Sim).unwrap();
        // convex semantics also look downwards
        assert!(sys.validate(SemKind::Bisim).is_err());
    }

    #[test]
    fn doc_round_trip() {
        let text = r#"{"type":"pts","states":["x","y"],"labels":["a"],
            "transitions":[{"from":"x","label":"a","to":"y","prob":"1/2"}]}"#;
        let doc: SystemDoc = serde_json::from_str(text).unwrap();
        let sys = load_system(&doc, SemKind::PTrace).unwrap();
        assert_eq!(System::from_doc(&sys.to_doc()).unwrap(), sys);
        let bad = r#"{"type":"lts","states":["x"],"labels":["a"],"transitions":[{"from":"x","label":"b","to":"x"}]}"#;
        let doc: SystemDoc = serde_json::from_str(bad).unwrap();
        assert!(matches!(System::from_doc(&doc), Err(CoalgError::Schema(_))));
    }
}
