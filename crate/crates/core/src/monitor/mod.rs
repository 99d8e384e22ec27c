//! Runtime boundary checks: record which side of every predicate a state is
//! on and report the predicates whose side changed across a move.
//!
//! Detection only. The location of a crossing is never solved for; the
//! samplers handle crossings through their own update rules.

use std::fmt;

use thiserror::Error;

use crate::density::PiecewiseDensity;
use crate::graph::PredId;

/// One bit per predicate, `true` when the predicate expression is `< 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PredicateSnapshot {
    bits: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("snapshot lengths differ ({0} vs {1})")]
pub struct LengthMismatch(pub usize, pub usize);

impl PredicateSnapshot {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        PredicateSnapshot { bits }
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

impl fmt::Display for PredicateSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.bits.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

/// Evaluate every predicate at `x`. The caller supplies a full latent state
/// in coordinate order.
pub fn snapshot(pd: &PiecewiseDensity, x: &[f64]) -> PredicateSnapshot {
    PredicateSnapshot {
        bits: pd
            .predicate_values(x)
            .into_iter()
            .map(|v| v < 0.0)
            .collect(),
    }
}

/// Sorted ids of predicates whose bit differs.
pub fn detect_crossing(
    before: &PredicateSnapshot,
    after: &PredicateSnapshot,
) -> Result<Vec<PredId>, LengthMismatch> {
    if before.len() != after.len() {
        return Err(LengthMismatch(before.len(), after.len()));
    }
    Ok(before
        .bits
        .iter()
        .zip(&after.bits)
        .enumerate()
        .filter(|(_, (a, b))| a != b)
        .map(|(i, _)| PredId(i))
        .collect())
}

/// Symmetric difference of two sorted id lists, used to compose crossings
/// across consecutive moves.
pub fn xor_crossings(a: &[PredId], b: &[PredId]) -> Vec<PredId> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::build_density;
    use crate::frontend::{parse_checked, Constants};
    use crate::graph::compile;

    fn threshold_program() -> PiecewiseDensity {
        let src = "(let [x (sample (uniform 0 1))] (if (< x 0.3) (observe (normal 0 1) 0.2) (observe (normal 1 1) 0.2)))";
        build_density(&compile(&parse_checked(src, &Constants::new()).unwrap()).unwrap()).unwrap()
    }

    #[test]
    fn snapshots_of_threshold_program() {
        let pd = threshold_program();
        assert_eq!(snapshot(&pd, &[0.1]).bits(), &[true]);
        assert_eq!(snapshot(&pd, &[0.3]).bits(), &[false]);
        assert_eq!(snapshot(&pd, &[0.3]).to_string(), "[false]");
        let a = snapshot(&pd, &[0.1]);
        let b = snapshot(&pd, &[0.5]);
        assert_eq!(detect_crossing(&a, &b).unwrap(), vec![PredId(0)]);
        assert_eq!(detect_crossing(&a, &a).unwrap(), vec![]);
    }

    #[test]
    fn length_mismatch() {
        let a = PredicateSnapshot::from_bits(vec![true]);
        let b = PredicateSnapshot::from_bits(vec![true, false]);
        assert_eq!(detect_crossing(&a, &b), Err(LengthMismatch(1, 2)));
    }

    #[test]
    fn xor_composition() {
        let p = |v: &[usize]| v.iter().map(|&i| PredId(i)).collect::<Vec<_>>();
        assert_eq!(xor_crossings(&p(&[0, 2, 5]), &p(&[2, 3])), p(&[0, 3, 5]));
        assert_eq!(xor_crossings(&p(&[1]), &p(&[1])), p(&[]));
    }
}
