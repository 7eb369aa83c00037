use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{parse_context, parse_goal, GradedSignature, GradedTheory, OpKind, Operation, Relation, TheoryError};
use crate::poset::validate_poset;

/// On-disk form of a custom theory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoryDoc {
    pub name: String,
    pub operations: Vec<OperationDoc>,
    #[serde(default)]
    pub axioms: Vec<AxiomDoc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationDoc {
    pub name: String,
    pub depth: usize,
    /// Argument positions; a constant has none.
    #[serde(default)]
    pub arity: Vec<String>,
    #[serde(default)]
    pub order: Vec<[String; 2]>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxiomDoc {
    /// Context block such as `x<=y, z`.
    #[serde(default)]
    pub context: String,
    /// `lhs <= rhs : k` or `lhs = rhs : k`; an equation adds both directions.
    pub axiom: String,
}

impl TheoryDoc {
    pub fn to_theory(&self) -> Result<GradedTheory, TheoryError> {
        let mut sig = GradedSignature::default();
        for op in &self.operations {
            let pairs: Vec<(&str, &str)> = op.order.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
            let arity = Arc::new(validate_poset(op.arity.iter().map(String::as_str), &pairs)?);
            sig.add(Operation::new(op.name.clone(), arity, op.depth, OpKind::Custom))?;
        }
        let mut axioms = Vec::new();
        for ax in &self.axioms {
            let ctx = Arc::new(parse_context(&ax.context)?);
            let (ineq, rel) = parse_goal(&sig, ctx, &ax.axiom)?;
            if rel == Relation::Eq {
                axioms.push(ineq.flipped());
            }
            axioms.push(ineq);
        }
        GradedTheory::new(self.name.clone(), sig, axioms)
    }
}
