//! Behavioural preorders on finite ordered transition systems, decided through
//! graded monads, graded inequational theories and graded modal logics.

pub mod coalgebra;
pub mod logic;
pub mod monads;
pub mod poset;
pub mod rational;
pub mod sdist;
pub mod theory;

pub use coalgebra::{load_system, refines, RefinementVerdict, System, SystemDoc};
pub use logic::{builtin_logic, eval_in_system, parse_formula, Formula, LogicKind, LogicSpec, Omega};
pub use monads::{Beh, SemKind, Semantics, Space};
pub use poset::{FinPoset, MonotoneMap};
pub use rational::Rational;
pub use sdist::SubDist;
pub use theory::{builtin_theory, derivable, GradedTheory, Inequation, Term, TheoryName};
