//! Graded modal logics over the normal-form graded monads: formulas of
//! uniform depth, evaluation on n-step behaviours, formula search and the
//! desk-scale separation and algebra checks.

mod eval;
mod formula;
mod parse;
mod search;
mod separation;
mod square;

use std::fmt;
use std::str::FromStr;

use crate::coalgebra::CoalgError;
use crate::monads::{MonadError, SemKind};
use crate::rational::Rational;

pub use eval::{eval_in_system, eval_on_mn1, modal_value, Resolved};
pub use formula::{random_formula, Depths, Formula, Modality, PropOp};
pub use parse::parse_formula;
pub use search::{distinguish, theory_included, Caps, Entry, Enumeration, FoundBy, Inclusion, Witness};
pub use separation::{check_separation, PairCheck, SeparationReport};
pub use square::{
    modality_square, omega_space, prob_coequalization, prob_homomorphy, prob_square, structure_map, structure_monotone,
    SquareReport, SquareViolation,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LogicError {
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("formula `{0}` has no uniform depth")]
    NonUniformDepth(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("logic {logic} does not fit {sem} semantics")]
    IncompatibleLogic { logic: LogicKind, sem: SemKind },
    #[error("labels of logic and semantics differ")]
    LabelMismatch,
    #[error("formula `{formula}` cannot be evaluated at depth {depth}")]
    DepthMismatch { formula: String, depth: usize },
    #[error("no distinguishing formula within bounds")]
    NoWitnessWithinBounds,
    #[error(transparent)]
    Monad(#[from] MonadError),
    #[error(transparent)]
    Coalg(#[from] CoalgError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LogicKind {
    Hml,
    PosHml,
    Sync,
    Prob,
}

impl LogicKind {
    pub const ALL: [LogicKind; 4] = [LogicKind::Hml, LogicKind::PosHml, LogicKind::Sync, LogicKind::Prob];

    pub fn as_str(self) -> &'static str {
        match self {
            LogicKind::Hml => "HML",
            LogicKind::PosHml => "POS_HML",
            LogicKind::Sync => "SYNC",
            LogicKind::Prob => "PROB",
        }
    }

    /// The logic matching a semantics.
    pub fn for_semantics(kind: SemKind) -> LogicKind {
        match kind {
            SemKind::Bisim => LogicKind::Hml,
            SemKind::Sim | SemKind::ReadySim => LogicKind::PosHml,
            SemKind::Sync => LogicKind::Sync,
            SemKind::PTrace => LogicKind::Prob,
        }
    }
}

impl fmt::Display for LogicKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LogicKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().replace('-', "_").as_str() {
            "HML" => Ok(LogicKind::Hml),
            "POS_HML" | "POSHML" => Ok(LogicKind::PosHml),
            "SYNC" => Ok(LogicKind::Sync),
            "PROB" => Ok(LogicKind::Prob),
            _ => Err(format!("unknown logic `{s}` (expected HML, POS_HML, SYNC or PROB)")),
        }
    }
}

/// Truth values: the two-element chain or the unit interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Truth {
    Two,
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Omega {
    Two(bool),
    Unit(Rational),
}

impl Omega {
    pub fn leq(&self, other: &Omega) -> bool {
        match (self, other) {
            (Omega::Two(a), Omega::Two(b)) => a <= b,
            (Omega::Unit(a), Omega::Unit(b)) => a <= b,
            _ => false,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Omega::Two(b) => Some(*b),
            Omega::Unit(_) => None,
        }
    }
}

impl fmt::Display for Omega {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Omega::Two(b) => write!(f, "{b}"),
            Omega::Unit(r) => write!(f, "{r}"),
        }
    }
}

/// A builtin graded logic over a fixed label set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogicSpec {
    pub kind: LogicKind,
    labels: Vec<String>,
}

pub fn builtin_logic<S: AsRef<str>>(kind: LogicKind, labels: &[S]) -> Result<LogicSpec, LogicError> {
    let mut v: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
    v.sort();
    v.dedup();
    if v.is_empty() {
        return Err(LogicError::EmptyLabelSet);
    }
    Ok(LogicSpec { kind, labels: v })
}

impl LogicSpec {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn truth(&self) -> Truth {
        match self.kind {
            LogicKind::Prob => Truth::Unit,
            _ => Truth::Two,
        }
    }

    pub fn compatible(&self, sem: SemKind) -> bool {
        match self.kind {
            LogicKind::Hml => sem == SemKind::Bisim,
            LogicKind::PosHml => matches!(sem, SemKind::Sim | SemKind::ReadySim),
            LogicKind::Sync => sem == SemKind::Sync,
            LogicKind::Prob => sem == SemKind::PTrace,
        }
    }

    pub fn check(&self, sem: SemKind) -> Result<(), LogicError> {
        if self.compatible(sem) {
            Ok(())
        } else {
            Err(LogicError::IncompatibleLogic { logic: self.kind, sem })
        }
    }

    /// `tt` is a nullary propositional operator, usable at every depth.
    pub fn flexible_top(&self) -> bool {
        matches!(self.kind, LogicKind::Hml | LogicKind::PosHml)
    }

    pub fn has_ff(&self) -> bool {
        matches!(self.kind, LogicKind::Hml | LogicKind::Sync)
    }

    pub fn has_and(&self) -> bool {
        self.kind != LogicKind::Prob
    }

    pub fn has_or(&self) -> bool {
        matches!(self.kind, LogicKind::Hml | LogicKind::Sync)
    }

    pub fn has_box(&self) -> bool {
        matches!(self.kind, LogicKind::Hml | LogicKind::Sync)
    }

    pub fn has_negation(&self) -> bool {
        self.kind == LogicKind::Hml
    }

    /// Truth formulas available at `depth`: constants at depth 0 and nullary
    /// operators everywhere.
    pub fn constants_at(&self, depth: usize) -> Vec<Formula> {
        let mut out = Vec::new();
        if self.flexible_top() {
            out.push(Formula::Prop(PropOp::Tt, Vec::new()));
        } else if depth == 0 {
            out.push(Formula::Top);
        }
        if self.has_ff() {
            out.push(Formula::Prop(PropOp::Ff, Vec::new()));
        }
        out
    }

    pub fn binary_ops(&self) -> Vec<PropOp> {
        let mut out = Vec::new();
        if self.has_and() {
            out.push(PropOp::And);
        }
        if self.has_or() {
            out.push(PropOp::Or);
        }
        out
    }

    /// Modalities used by formula search under `sem`.
    pub fn modalities(&self, sem: SemKind) -> Vec<Modality> {
        let mut out = Vec::new();
        for a in &self.labels {
            out.push(Modality::Dia(a.clone()));
            if self.has_box() {
                out.push(Modality::Box(a.clone()));
            }
        }
        if sem == SemKind::ReadySim && self.kind == LogicKind::PosHml {
            let n = self.labels.len().min(16);
            for mask in 1u32..(1 << n) {
                let set: Vec<String> =
                    (0..n).filter(|i| mask & (1 << i) != 0).map(|i| self.labels[i].clone()).collect();
                for a in &set {
                    out.push(Modality::Ready { label: a.clone(), ready: set.clone() });
                }
            }
            out.push(Modality::Halt);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_shapes() {
        let hml = builtin_logic(LogicKind::Hml, &["b", "a"]).unwrap();
        assert_eq!(hml.labels(), ["a", "b"]);
        assert_eq!(hml.modalities(SemKind::Bisim).len(), 4);
        let pos = builtin_logic(LogicKind::PosHml, &["a"]).unwrap();
        assert!(!pos.has_box());
        assert_eq!(pos.modalities(SemKind::ReadySim).len(), 3);
        assert!(matches!(builtin_logic::<&str>(LogicKind::Sync, &[]), Err(LogicError::EmptyLabelSet)));
        assert_eq!(builtin_logic(LogicKind::Prob, &["a"]).unwrap().truth(), Truth::Unit);
    }

    #[test]
    fn compatibility() {
        let sync = builtin_logic(LogicKind::Sync, &["a"]).unwrap();
        assert!(sync.compatible(SemKind::Sync));
        assert!(!sync.compatible(SemKind::Bisim));
        for k in SemKind::ALL {
            assert!(builtin_logic(LogicKind::for_semantics(k), &["a"]).unwrap().compatible(k));
        }
    }

    #[test]
    fn omega_order_and_printing() {
        assert!(Omega::Two(false).leq(&Omega::Two(true)));
        assert!(!Omega::Unit(Rational::new(1, 2)).leq(&Omega::Unit(Rational::new(1, 3))));
        assert_eq!(Omega::Two(true).to_string(), "true");
        assert_eq!(Omega::Unit(Rational::new(1, 2)).to_string(), "1/2");
    }
}
