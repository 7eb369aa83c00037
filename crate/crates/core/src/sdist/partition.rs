use std::collections::BTreeSet;

use super::SdistError;
use crate::rational::Rational;

/// A splitting of a positive total `p`, either as summands or as the set of
/// partial sums strictly below `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Partition {
    Summands { total: Rational, parts: Vec<Rational> },
    PartialSums { total: Rational, points: BTreeSet<Rational> },
}

impl Partition {
    pub fn summands(parts: Vec<Rational>) -> Result<Self, SdistError> {
        let total = parts.iter().sum();
        let p = Partition::Summands { total, parts };
        p.validate()?;
        Ok(p)
    }

    pub fn partial_sums(total: Rational, points: impl IntoIterator<Item = Rational>) -> Result<Self, SdistError> {
        let p = Partition::PartialSums { total, points: points.into_iter().collect() };
        p.validate()?;
        Ok(p)
    }

    pub fn total(&self) -> &Rational {
        match self {
            Partition::Summands { total, .. } | Partition::PartialSums { total, .. } => total,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Partition::Summands { parts, .. } => parts.len(),
            Partition::PartialSums { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn validate(&self) -> Result<(), SdistError> {
        let bad = |m: &str| Err(SdistError::InvalidPartition(m.to_string()));
        match self {
            Partition::Summands { total, parts } => {
                if parts.is_empty() {
                    return bad("no summands");
                }
                if parts.iter().any(|p| !p.is_positive()) {
                    return bad("summands must be positive");
                }
                if parts.iter().sum::<Rational>() != *total {
                    return bad("summands do not add up to the total");
                }
            }
            Partition::PartialSums { total, points } => {
                if !points.contains(&Rational::zero()) {
                    return bad("partial sums must contain 0");
                }
                if points.iter().any(|q| q.is_negative() || q >= total) {
                    return bad("partial sums must lie in [0, total)");
                }
            }
        }
        Ok(())
    }

    /// Summand form of this partition.
    pub fn parts(&self) -> Vec<Rational> {
        match self {
            Partition::Summands { parts, .. } => parts.clone(),
            Partition::PartialSums { total, points } => {
                let mut out = Vec::with_capacity(points.len());
                let pts: Vec<&Rational> = points.iter().collect();
                for (i, q) in pts.iter().enumerate() {
                    let next = pts.get(i + 1).copied().unwrap_or(total);
                    out.push(next - q);
                }
                out
            }
        }
    }

    /// Partial-sum form of this partition.
    pub fn points(&self) -> BTreeSet<Rational> {
        match self {
            Partition::PartialSums { points, .. } => points.clone(),
            Partition::Summands { parts, .. } => {
                let mut acc = Rational::zero();
                let mut out = BTreeSet::new();
                for p in parts {
                    out.insert(acc.clone());
                    acc += p;
                }
                out
            }
        }
    }
}

/// Converts between summand and partial-sum forms.
pub fn smd_psums_convert(part: &Partition) -> Result<Partition, SdistError> {
    part.validate()?;
    Ok(match part {
        Partition::Summands { total, .. } => Partition::PartialSums { total: total.clone(), points: part.points() },
        Partition::PartialSums { total, .. } => Partition::Summands { total: total.clone(), parts: part.parts() },
    })
}
