use std::collections::HashMap;
use std::sync::Arc;

use super::TheoryError;
use crate::poset::FinPoset;
use crate::rational::Rational;

/// How the builtin normal-form models read an operation. Custom theories use
/// [`OpKind::Custom`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OpKind {
    /// `l_1(-) + ... + l_n(-)` with labels in argument order.
    Choice(Vec<String>),
    /// The empty sum or combination.
    Zero,
    /// A unary depth-1 action.
    Action(String),
    /// `p_1·(-) + ... + p_n·(-)`.
    Combo(Vec<Rational>),
    Custom,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Operation {
    pub name: String,
    pub arity: Arc<FinPoset>,
    pub depth: usize,
    pub kind: OpKind,
}

impl Operation {
    pub fn new(name: impl Into<String>, arity: Arc<FinPoset>, depth: usize, kind: OpKind) -> Self {
        Operation { name: name.into(), arity, depth, kind }
    }

    pub fn arity_len(&self) -> usize {
        self.arity.len()
    }

    pub fn is_constant(&self) -> bool {
        self.arity.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct GradedSignature {
    ops: Vec<Operation>,
    index: HashMap<String, usize>,
}

impl GradedSignature {
    pub fn new(ops: impl IntoIterator<Item = Operation>) -> Result<Self, TheoryError> {
        let mut sig = GradedSignature::default();
        for op in ops {
            sig.add(op)?;
        }
        Ok(sig)
    }

    pub fn add(&mut self, op: Operation) -> Result<usize, TheoryError> {
        if self.index.contains_key(&op.name) {
            return Err(TheoryError::DuplicateOperation(op.name));
        }
        let id = self.ops.len();
        self.index.insert(op.name.clone(), id);
        self.ops.push(op);
        Ok(id)
    }

    pub fn get(&self, name: &str) -> Option<&Operation> {
        self.index.get(name).map(|&i| &self.ops[i])
    }

    pub fn lookup(&self, name: &str) -> Result<&Operation, TheoryError> {
        self.get(name).ok_or_else(|| TheoryError::UnknownOperation(name.to_string()))
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn op(&self, id: usize) -> &Operation {
        &self.ops[id]
    }

    pub fn ops(&self) -> &[Operation] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn max_depth(&self) -> usize {
        self.ops.iter().map(|o| o.depth).max().unwrap_or(0)
    }
}

/// Discrete arity with `n` positions named `00`, `01`, ...
pub fn positional_arity(n: usize) -> Arc<FinPoset> {
    Arc::new(FinPoset::discrete((0..n).map(|i| format!("{i:02}"))))
}

/// Name of the subconvex combination with the given coefficients.
pub fn combo_name(coefs: &[Rational]) -> String {
    let parts: Vec<String> = coefs.iter().map(|c| c.to_string()).collect();
    format!("<{}>", parts.join(","))
}
