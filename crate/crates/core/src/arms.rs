use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A sorted, duplicate-free set of arm indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArmSubset(Vec<usize>);

impl ArmSubset {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    /// `{0, 1, ..., k-1}`.
    pub fn full(k: usize) -> Self {
        Self((0..k).collect())
    }

    /// Builds a subset from arbitrary indices, sorting and removing duplicates.
    pub fn new<I: IntoIterator<Item = usize>>(arms: I) -> Self {
        let mut members: Vec<usize> = arms.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        Self(members)
    }

    /// Checks every member lies in `[0, k)`.
    pub fn validate(&self, k: usize) -> Result<()> {
        match self.0.last() {
            Some(&max) if max >= k => Err(Error::InvalidGraph(format!(
                "arm index {max} out of range for {k} arms"
            ))),
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, arm: usize) -> bool {
        self.0.binary_search(&arm).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn insert(&mut self, arm: usize) -> bool {
        match self.0.binary_search(&arm) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, arm);
                true
            }
        }
    }

    pub fn remove(&mut self, arm: usize) -> bool {
        match self.0.binary_search(&arm) {
            Ok(pos) => {
                self.0.remove(pos);
                true
            }
            Err(_) => false,
        }
    }

    pub fn union(&self, other: &ArmSubset) -> ArmSubset {
        ArmSubset::new(self.iter().chain(other.iter()))
    }

    pub fn difference(&self, other: &ArmSubset) -> ArmSubset {
        ArmSubset(self.iter().filter(|a| !other.contains(*a)).collect())
    }

    pub fn intersection(&self, other: &ArmSubset) -> ArmSubset {
        ArmSubset(self.iter().filter(|a| other.contains(*a)).collect())
    }

    pub fn is_subset(&self, other: &ArmSubset) -> bool {
        self.iter().all(|a| other.contains(a))
    }

    pub fn is_disjoint(&self, other: &ArmSubset) -> bool {
        self.iter().all(|a| !other.contains(a))
    }

    pub fn retain<F: FnMut(usize) -> bool>(&mut self, mut keep: F) {
        self.0.retain(|&a| keep(a));
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for ArmSubset {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        ArmSubset::new(iter)
    }
}

impl fmt::Display for ArmSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{a}")?;
        }
        write!(f, "}}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_sorts_and_dedups() {
        let s = ArmSubset::new([4, 1, 4, 0]);
        assert_eq!(s.as_slice(), &[0, 1, 4]);
        assert!(s.contains(4));
        assert!(!s.contains(2));
    }

    #[test]
    fn validate_rejects_out_of_range() {
        assert!(ArmSubset::new([0, 3]).validate(4).is_ok());
        assert!(matches!(
            ArmSubset::new([0, 4]).validate(4),
            Err(Error::InvalidGraph(_))
        ));
    }

    #[test]
    fn set_algebra() {
        let a = ArmSubset::new([0, 1, 2]);
        let b = ArmSubset::new([2, 3]);
        assert_eq!(a.union(&b).as_slice(), &[0, 1, 2, 3]);
        assert_eq!(a.difference(&b).as_slice(), &[0, 1]);
        assert_eq!(a.intersection(&b).as_slice(), &[2]);
        assert!(!a.is_disjoint(&b));
        assert_eq!(a.to_string(), "{0,1,2}");
    }
}
