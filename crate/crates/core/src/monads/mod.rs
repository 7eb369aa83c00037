//! Executable normal forms for the graded monads behind bisimilarity,
//! similarity, ready similarity, synchronous bisimilarity and probabilistic
//! trace inclusion: unit, multiplication, functor action and per-depth orders.

mod algebra;
mod enumerate;
mod space;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

pub use algebra::{canonical_m1, normal_form_model, M1Algebra, NormalFormModel};
pub use space::{Beh, Item, Leaf, Node, Space, Word};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MonadError {
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("unknown label `{0}`")]
    UnknownLabel(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("depth mismatch: {0} vs {1}")]
    DepthMismatch(usize, usize),
    #[error("behaviours live over different bases")]
    BaseMismatch,
    #[error("carrier at depth {depth} has {items} generators, above the cap {cap}")]
    CarrierTooLarge { depth: usize, items: usize, cap: usize },
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("total mass {0} exceeds 1")]
    MassExceedsOne(crate::Rational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SemKind {
    Bisim,
    Sim,
    ReadySim,
    Sync,
    PTrace,
}

impl SemKind {
    pub const ALL: [SemKind; 5] = [SemKind::Bisim, SemKind::Sim, SemKind::ReadySim, SemKind::Sync, SemKind::PTrace];

    pub fn as_str(self) -> &'static str {
        match self {
            SemKind::Bisim => "bisim",
            SemKind::Sim => "sim",
            SemKind::ReadySim => "readysim",
            SemKind::Sync => "sync",
            SemKind::PTrace => "ptrace",
        }
    }

    /// Layers are compared by the Egli-Milner order rather than by inclusion
    /// of down-sets.
    pub fn is_convex(self) -> bool {
        matches!(self, SemKind::Bisim | SemKind::Sync)
    }

    pub fn is_probabilistic(self) -> bool {
        self == SemKind::PTrace
    }
}

impl fmt::Display for SemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SemKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "bisim" => Ok(SemKind::Bisim),
            "sim" => Ok(SemKind::Sim),
            "readysim" | "ready" => Ok(SemKind::ReadySim),
            "sync" => Ok(SemKind::Sync),
            "ptrace" | "pt" => Ok(SemKind::PTrace),
            other => Err(format!("unknown semantics `{other}` (expected bisim, sim, readysim, sync or ptrace)")),
        }
    }
}

/// A semantics together with its label alphabet.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Semantics {
    pub kind: SemKind,
    labels: Arc<[String]>,
}

impl Semantics {
    pub fn new<S: AsRef<str>>(kind: SemKind, labels: &[S]) -> Result<Self, MonadError> {
        if labels.is_empty() {
            return Err(MonadError::EmptyLabelSet);
        }
        Ok(Self::unchecked(kind, labels))
    }

    /// Subdistributions without actions, the probabilistic depth-0 layer.
    pub fn subconvex() -> Self {
        Self::unchecked::<&str>(SemKind::PTrace, &[])
    }

    fn unchecked<S: AsRef<str>>(kind: SemKind, labels: &[S]) -> Self {
        let mut v: Vec<String> = labels.iter().map(|s| s.as_ref().to_string()).collect();
        v.sort();
        v.dedup();
        Semantics { kind, labels: v.into() }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, i: u16) -> &str {
        &self.labels[i as usize]
    }

    pub fn label_index(&self, name: &str) -> Result<u16, MonadError> {
        self.labels
            .iter()
            .position(|l| l == name)
            .map(|i| i as u16)
            .ok_or_else(|| MonadError::UnknownLabel(name.to_string()))
    }

    /// Ready sets as bitmasks over the label indices.
    pub fn ready_mask<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Result<u32, MonadError> {
        let mut m = 0u32;
        for n in names {
            m |= 1 << self.label_index(n)?;
        }
        Ok(m)
    }

    pub fn show_ready(&self, mask: u32) -> String {
        let names: Vec<&str> =
            (0..self.labels.len()).filter(|i| mask >> i & 1 == 1).map(|i| self.labels[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}
