//! Graded signatures and uniform-depth terms, inequations in context, a
//! budgeted saturation prover for the derivation rules, satisfaction in
//! graded algebras and bounded free models.

mod builtin;
mod doc;
mod free;
mod model;
mod parse;
mod prover;
mod signature;
mod term;

use std::fmt;
use std::sync::Arc;

use crate::poset::{FinPoset, PosetError};

pub use builtin::{builtin_theory, builtin_theory_with, TheoryName};
pub use doc::{AxiomDoc, OperationDoc, TheoryDoc};
pub use free::{free_model_elements, FreeLayer, FreeModel};
pub use model::{eval_term, monotone_valuations, satisfies, GradedAlgebra};
pub use parse::{parse_context, parse_goal, parse_term, Relation};
pub use prover::{
    check_defined, derivable, saturate, verify_trace, Budget, BudgetUsed, Rule, Saturation, Step, Verdict,
};
pub use signature::{combo_name, positional_arity, GradedSignature, OpKind, Operation};
pub use term::{depth_of, subterms, term_depth, uniform_substitute, Depth, Term};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TheoryError {
    #[error("term `{0}` does not have a uniform depth")]
    NonUniform(String),
    #[error("substitution images do not share a depth: {0}")]
    NonUniformSubstitution(String),
    #[error("unknown operation `{0}`")]
    UnknownOperation(String),
    #[error("variable `{0}` is not in scope")]
    UnknownVariable(String),
    #[error("operation `{op}` takes {expected} arguments, got {got}")]
    ArityMismatch { op: String, expected: usize, got: usize },
    #[error("operation `{0}` declared twice")]
    DuplicateOperation(String),
    #[error("malformed goal: {0}")]
    MalformedGoal(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("depth {depth} is out of range for a model of depth {max}")]
    DepthOutOfRange { depth: usize, max: usize },
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("invalid bound: {0}")]
    InvalidBound(String),
    #[error("budget too small: {0}")]
    BudgetTooSmall(String),
    #[error("carrier at depth {0} is too large to enumerate")]
    CarrierTooLarge(usize),
    #[error("model does not interpret operation `{0}`")]
    Uninterpreted(String),
    #[error("model error: {0}")]
    Model(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
}

/// `Γ ⊢_k lhs ≤ rhs`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inequation {
    pub context: Arc<FinPoset>,
    pub depth: usize,
    pub lhs: Term,
    pub rhs: Term,
}

impl Inequation {
    pub fn new(
        sig: &GradedSignature,
        context: Arc<FinPoset>,
        depth: usize,
        lhs: Term,
        rhs: Term,
    ) -> Result<Self, TheoryError> {
        let ineq = Inequation { context, depth, lhs, rhs };
        ineq.validate(sig)?;
        Ok(ineq)
    }

    pub fn validate(&self, sig: &GradedSignature) -> Result<(), TheoryError> {
        for side in [&self.lhs, &self.rhs] {
            for x in side.vars() {
                if self.context.index_of(&x).is_err() {
                    return Err(TheoryError::MalformedGoal(format!("variable `{x}` is not in the context")));
                }
            }
            let d = depth_of(sig, side).map_err(|e| TheoryError::MalformedGoal(e.to_string()))?;
            if !d.admits(self.depth) {
                return Err(TheoryError::MalformedGoal(format!("`{side}` does not have depth {}", self.depth)));
            }
        }
        Ok(())
    }

    /// The reversed inequation.
    pub fn flipped(&self) -> Inequation {
        Inequation { context: self.context.clone(), depth: self.depth, lhs: self.rhs.clone(), rhs: self.lhs.clone() }
    }
}

impl fmt::Display for Inequation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {} : {}", self.lhs, self.rhs, self.depth)
    }
}

/// A graded signature with its axioms.
#[derive(Debug, Clone)]
pub struct GradedTheory {
    pub name: String,
    pub signature: GradedSignature,
    pub axioms: Vec<Inequation>,
    pub family: Option<TheoryName>,
    pub labels: Vec<String>,
}

impl GradedTheory {
    pub fn new(
        name: impl Into<String>,
        signature: GradedSignature,
        axioms: Vec<Inequation>,
    ) -> Result<Self, TheoryError> {
        for ax in &axioms {
            ax.validate(&signature)?;
        }
        Ok(GradedTheory { name: name.into(), signature, axioms, family: None, labels: Vec::new() })
    }
}
