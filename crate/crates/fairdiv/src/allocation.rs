//! Allocations: ordered partitions of the items into per-agent bundles plus
//! an unallocated pool.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instance::Instance;

/// An ordered, possibly partial, partition of the items.
///
/// `bundles[i]` is agent `i`'s bundle; items in `pool` are unallocated. An
/// allocation is *complete* when the pool is empty. Fairness properties
/// quantify over bundles only — the pool is invisible to them.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Allocation {
    pub bundles: Vec<BTreeSet<usize>>,
    pub pool: BTreeSet<usize>,
}

impl Allocation {
    /// The empty allocation: every bundle empty, all `m` items pooled.
    pub fn empty(n: usize, m: usize) -> Self {
        Allocation {
            bundles: vec![BTreeSet::new(); n],
            pool: (0..m).collect(),
        }
    }

    /// Builds a complete or partial allocation from bundle slices; items not
    /// mentioned go to the pool.
    pub fn from_bundles(n: usize, m: usize, bundles: &[&[usize]]) -> Result<Self, Error> {
        if bundles.len() != n {
            return Err(Error::InvalidAllocation(format!(
                "{} bundles for {} agents",
                bundles.len(),
                n
            )));
        }
        let mut alloc = Allocation::empty(n, m);
        for (agent, bundle) in bundles.iter().enumerate() {
            for &item in *bundle {
                if item >= m {
                    return Err(Error::InvalidItem { item, m });
                }
                if !alloc.pool.remove(&item) {
                    return Err(Error::InvalidAllocation(format!(
                        "item {item} assigned twice"
                    )));
                }
                alloc.bundles[agent].insert(item);
            }
        }
        Ok(alloc)
    }

    pub fn n(&self) -> usize {
        self.bundles.len()
    }

    pub fn is_complete(&self) -> bool {
        self.pool.is_empty()
    }

    pub fn bundle(&self, agent: usize) -> &BTreeSet<usize> {
        &self.bundles[agent]
    }

    /// Moves `item` from the pool to `agent`'s bundle.
    pub fn assign(&mut self, agent: usize, item: usize) -> Result<(), Error> {
        if !self.pool.remove(&item) {
            return Err(Error::InvalidAllocation(format!(
                "item {item} is not in the pool"
            )));
        }
        self.bundles[agent].insert(item);
        Ok(())
    }

    /// Checks structural validity against `inst`: right bundle count,
    /// disjointness, and full coverage of the item set.
    pub fn validate(&self, inst: &Instance) -> Result<(), Error> {
        if self.bundles.len() != inst.n {
            return Err(Error::InvalidAllocation(format!(
                "{} bundles for {} agents",
                self.bundles.len(),
                inst.n
            )));
        }
        let mut seen = BTreeSet::new();
        for bundle in self.bundles.iter().chain(std::iter::once(&self.pool)) {
            for &item in bundle {
                if item >= inst.m {
                    return Err(Error::InvalidItem { item, m: inst.m });
                }
                if !seen.insert(item) {
                    return Err(Error::InvalidAllocation(format!(
                        "item {item} appears twice"
                    )));
                }
            }
        }
        if seen.len() != inst.m {
            let missing: Vec<usize> = inst.items().filter(|i| !seen.contains(i)).collect();
            return Err(Error::InvalidAllocation(format!(
                "items {missing:?} are neither allocated nor pooled"
            )));
        }
        Ok(())
    }

    /// Bundles as sorted vectors, the JSON wire shape.
    pub fn bundles_as_vecs(&self) -> Vec<Vec<usize>> {
        self.bundles
            .iter()
            .map(|b| b.iter().copied().collect())
            .collect()
    }
}

impl Serialize for Allocation {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("Allocation", 2)?;
        s.serialize_field("bundles", &self.bundles_as_vecs())?;
        s.serialize_field("pool", &self.pool)?;
        s.end()
    }
}

impl<'de> Deserialize<'de> for Allocation {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        // Accept any of: a bare array of bundles, {"allocation": [..]} as the
        // solver emits, or {"bundles": [..], "pool": [..]}.
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Wire {
            Bare(Vec<Vec<usize>>),
            Solver { allocation: Vec<Vec<usize>> },
            Full {
                bundles: Vec<Vec<usize>>,
                #[serde(default)]
                pool: Vec<usize>,
            },
        }
        let (bundles, pool) = match Wire::deserialize(deserializer)? {
            Wire::Bare(b) | Wire::Solver { allocation: b } => (b, vec![]),
            Wire::Full { bundles, pool } => (bundles, pool),
        };
        Ok(Allocation {
            bundles: bundles
                .into_iter()
                .map(|b| b.into_iter().collect())
                .collect(),
            pool: pool.into_iter().collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_assignment_is_rejected() {
        assert!(Allocation::from_bundles(2, 3, &[&[0, 1], &[1]]).is_err());
    }

    #[test]
    fn partial_allocations_keep_a_pool() {
        let a = Allocation::from_bundles(2, 4, &[&[0], &[2]]).unwrap();
        assert!(!a.is_complete());
        assert_eq!(a.pool, BTreeSet::from([1, 3]));
    }

    #[test]
    fn deserializes_all_wire_shapes() {
        let bare: Allocation = serde_json::from_str("[[0,1],[2]]").unwrap();
        let solver: Allocation =
            serde_json::from_str(r#"{"allocation": [[0,1],[2]]}"#).unwrap();
        let full: Allocation =
            serde_json::from_str(r#"{"bundles": [[0,1],[2]], "pool": []}"#).unwrap();
        assert_eq!(bare, solver);
        assert_eq!(bare, full);
    }

    #[test]
    fn validate_catches_missing_items() {
        let inst = Instance::additive(&[&[1, 1, 1], &[1, 1, 1]]);
        let a: Allocation = serde_json::from_str("[[0],[1]]").unwrap();
        // Item 2 is neither allocated nor pooled once deserialized bare.
        assert!(a.validate(&inst).is_err());
        let a = Allocation::from_bundles(2, 3, &[&[0], &[1]]).unwrap();
        assert!(a.validate(&inst).is_ok());
    }
}
