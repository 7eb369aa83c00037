use std::sync::Arc;

use super::prover::{saturate, Budget, BudgetUsed};
use super::{GradedTheory, Term, TheoryError};
use crate::poset::FinPoset;

/// Derivable-equality classes of defined terms at one depth.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeLayer {
    pub depth: usize,
    /// Each class is sorted by size, smallest first.
    pub classes: Vec<Vec<Term>>,
    /// `leq[i][j]` iff class i is derivably below class j.
    pub leq: Vec<Vec<bool>>,
}

impl FreeLayer {
    pub fn class_of(&self, t: &Term) -> Option<usize> {
        self.classes.iter().position(|c| c.contains(t))
    }
}

#[derive(Debug, Clone)]
pub struct FreeModel {
    pub layers: Vec<FreeLayer>,
    pub used: BudgetUsed,
    /// Saturation finished, so the classes are exact for the size bound.
    pub exact: bool,
}

/// Bounded free model over generators `x`: defined terms of size at most
/// `size` at each depth up to `n`, quotiented by derivable equality.
pub fn free_model_elements(
    theory: &GradedTheory,
    x: Arc<FinPoset>,
    n: usize,
    size: usize,
    budget: &Budget,
) -> Result<FreeModel, TheoryError> {
    let sat = saturate(theory, x, n, true, size, budget)?;
    let mut layers = Vec::new();
    for depth in 0..=n {
        let terms = sat.terms_at(depth);
        let rel = sat.order_at(depth);
        let defined: Vec<usize> = (0..terms.len()).filter(|&i| rel[i][i]).collect();
        let mut class_of = vec![usize::MAX; terms.len()];
        let mut reps: Vec<usize> = Vec::new();
        let mut classes: Vec<Vec<Term>> = Vec::new();
        for &i in &defined {
            match reps.iter().position(|&r| rel[r][i] && rel[i][r]) {
                Some(c) => {
                    class_of[i] = c;
                    classes[c].push(terms[i].clone());
                }
                None => {
                    class_of[i] = reps.len();
                    reps.push(i);
                    classes.push(vec![terms[i].clone()]);
                }
            }
        }
        let leq = reps.iter().map(|&a| reps.iter().map(|&b| rel[a][b]).collect()).collect();
        layers.push(FreeLayer { depth, classes, leq });
    }
    let exact = sat.used.saturated && sat.used.note.is_none();
    Ok(FreeModel { layers, used: sat.used.clone(), exact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::Rational;
    use crate::theory::{builtin_theory, OpKind, TheoryName};

    #[test]
    fn jsl_one_label_one_generator() {
        let th = builtin_theory(TheoryName::Jsl, &["a"], 2).unwrap();
        let x = Arc::new(FinPoset::discrete(["x"]));
        let fm = free_model_elements(&th, x, 1, 3, &Budget::default()).unwrap();
        assert!(fm.exact);
        assert_eq!(fm.layers[0].classes.len(), 1);
        assert_eq!(fm.layers[1].classes.len(), 2);
        let zero = fm.layers[1].class_of(&Term::constant("0")).unwrap();
        let ax = fm.layers[1].class_of(&Term::app("a", vec![Term::var("x")])).unwrap();
        assert!(!fm.layers[1].leq[zero][ax]);
        assert!(!fm.layers[1].leq[ax][zero]);
    }

    #[test]
    fn depth_zero_is_generators() {
        let th = builtin_theory(TheoryName::JslDown, &["a", "b"], 2).unwrap();
        let x = Arc::new(crate::poset::validate_poset(["x", "y"], &[("x", "y")]).unwrap());
        let fm = free_model_elements(&th, x, 0, 4, &Budget::default()).unwrap();
        assert_eq!(fm.layers[0].classes, vec![vec![Term::var("x")], vec![Term::var("y")]]);
        assert_eq!(fm.layers[0].leq, vec![vec![true, true], vec![false, true]]);
    }

    fn mass(th: &GradedTheory, t: &Term) -> Rational {
        match t {
            Term::Var(_) => Rational::one(),
            Term::App(name, args) => match &th.signature.get(name).unwrap().kind {
                OpKind::Combo(ps) => ps.iter().zip(args).map(|(p, a)| p * &mass(th, a)).sum(),
                _ => Rational::zero(),
            },
        }
    }

    #[test]
    fn subconvex_depth_zero_classes_are_masses() {
        let th = builtin_theory(TheoryName::Subconvex, &[] as &[&str], 2).unwrap();
        let x = Arc::new(FinPoset::discrete(["x"]));
        let fm = free_model_elements(&th, x, 0, 5, &Budget::default()).unwrap();
        let layer = &fm.layers[0];
        let small: Vec<Term> = layer.classes.iter().flatten().filter(|t| t.size() <= 3).cloned().collect();
        for s in &small {
            for t in &small {
                let same = layer.class_of(s) == layer.class_of(t);
                assert_eq!(same, mass(&th, s) == mass(&th, t), "{s} vs {t}");
            }
        }
        let masses: std::collections::BTreeSet<Rational> = small.iter().map(|t| mass(&th, t)).collect();
        assert_eq!(masses.len(), 4);
    }
}
