use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use gradpre_core::poset::validate_poset;
use gradpre_core::theory::{builtin_theory, GradedTheory, TheoryDoc, TheoryName};
use gradpre_core::{load_system, FinPoset, SemKind, System, SystemDoc};
use serde::{Deserialize, Serialize};

/// `path.json:state`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateRef {
    pub path: PathBuf,
    pub state: String,
}

impl FromStr for StateRef {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.rsplit_once(':') {
            Some((path, state)) if !path.is_empty() && !state.is_empty() => {
                Ok(StateRef { path: PathBuf::from(path), state: state.to_string() })
            }
            _ => Err(format!("expected `file.json:state`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for StateRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.path.display(), self.state)
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

/// Loads the system behind a state reference and resolves the state.
pub fn load_state(r: &StateRef, kind: SemKind, validate: bool) -> Result<(System, usize)> {
    let doc: SystemDoc = read_json(&r.path)?;
    let sys = if validate { load_system(&doc, kind) } else { System::from_doc(&doc) }
        .with_context(|| format!("invalid system in {}", r.path.display()))?;
    let x = sys.state(&r.state)?;
    Ok((sys, x))
}

/// On-disk form of a poset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetDoc {
    pub elements: Vec<String>,
    #[serde(default)]
    pub order: Vec<[String; 2]>,
}

pub fn load_poset(path: &Path) -> Result<Arc<FinPoset>> {
    let doc: PosetDoc = read_json(path)?;
    let pairs: Vec<(&str, &str)> = doc.order.iter().map(|[a, b]| (a.as_str(), b.as_str())).collect();
    let p = validate_poset(doc.elements.iter().map(String::as_str), &pairs)
        .with_context(|| format!("invalid poset in {}", path.display()))?;
    Ok(Arc::new(p))
}

/// A builtin theory name or a path to a theory file.
pub fn load_theory(name_or_path: &str, labels: &[String], width: usize) -> Result<GradedTheory> {
    if let Ok(name) = TheoryName::from_str(name_or_path) {
        if labels.is_empty() && name != TheoryName::Subconvex {
            bail!("no labels given and none found in the goal; pass --labels");
        }
        return Ok(builtin_theory(name, labels, width)?);
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        bail!("`{name_or_path}` is neither a builtin theory nor a file");
    }
    let doc: TheoryDoc = read_json(path)?;
    doc.to_theory().with_context(|| format!("invalid theory in {}", path.display()))
}

/// Identifiers applied with parentheses, e.g. `a` in `a(x) + a(y)`.
pub fn labels_in(goal: &str) -> Vec<String> {
    let chars: Vec<char> = goal.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        if chars[i].is_alphabetic() || chars[i] == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if chars.get(i) == Some(&'(') {
                out.push(chars[start..i].iter().collect());
            }
        } else {
            i += 1;
        }
    }
    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn state_refs() {
        let r: StateRef = "dir/a.json:x".parse().unwrap();
        assert_eq!(r.path, PathBuf::from("dir/a.json"));
        assert_eq!(r.state, "x");
        assert!("a.json".parse::<StateRef>().is_err());
        assert!("a.json:".parse::<StateRef>().is_err());
    }

    #[test]
    fn goal_labels() {
        assert_eq!(labels_in("a(x)+a(y) <= a(y) : 1"), ["a"]);
        assert_eq!(labels_in("a(0) + b(z) <= b(z)"), ["a", "b"]);
        assert_eq!(labels_in("a(1/2 x + 1/2 y) = 1/2 a(x) + 1/2 a(y)"), ["a"]);
        assert!(labels_in("x <= x").is_empty());
    }
}
