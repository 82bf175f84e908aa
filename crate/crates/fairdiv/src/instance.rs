//! Problem instances: agents, items, and one valuation function per agent.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::valuation::Valuation;
use crate::value::Value;

/// Optional structure declarations carried alongside an instance. They are
/// never used to drive an algorithm, only validated at load time so a
/// mislabeled instance fails loudly.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hints {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_set: Option<BTreeSet<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tiers: Option<Vec<BTreeSet<usize>>>,
}

impl Hints {
    fn is_empty(&self) -> bool {
        self.top_set.is_none() && self.tiers.is_none()
    }
}

/// A fair-division instance: `n` agents, `m` items, one valuation per agent.
///
/// Serialized as
/// `{"n": .., "m": .., "valuations": [{"kind": "additive", "values": [..]}, ..], "hints": {..}?}`
/// with rational values written as `"p/q"` strings (bare integers permitted).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Instance {
    pub n: usize,
    pub m: usize,
    pub valuations: Vec<Valuation>,
    #[serde(default, skip_serializing_if = "Hints::is_empty")]
    pub hints: Hints,
}

impl Instance {
    /// Builds and validates an instance without hints.
    pub fn new(n: usize, m: usize, valuations: Vec<Valuation>) -> Result<Self, Error> {
        let inst = Instance { n, m, valuations, hints: Hints::default() };
        inst.validate()?;
        Ok(inst)
    }

    /// Convenience constructor for all-additive instances with integer values.
    pub fn additive(rows: &[&[u64]]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.len());
        Instance::new(
            n,
            m,
            rows.iter()
                .map(|r| Valuation::additive(r.iter().copied()))
                .collect(),
        )
        .expect("well-formed additive instance")
    }

    pub fn agents(&self) -> std::ops::Range<usize> {
        0..self.n
    }

    pub fn items(&self) -> std::ops::Range<usize> {
        0..self.m
    }

    pub fn all_items(&self) -> BTreeSet<usize> {
        self.items().collect()
    }

    pub fn valuation(&self, agent: usize) -> &Valuation {
        &self.valuations[agent]
    }

    /// Value of `bundle` according to `agent`.
    pub fn value_of(&self, agent: usize, bundle: &BTreeSet<usize>) -> Result<Value, Error> {
        self.valuations[agent].bundle_value(bundle)
    }

    /// Singleton value of `item` according to `agent`.
    pub fn item_value(&self, agent: usize, item: usize) -> Result<Value, Error> {
        self.valuations[agent].item_value(item)
    }

    /// True when every agent's valuation is additive.
    pub fn is_additive(&self) -> bool {
        self.valuations
            .iter()
            .all(|v| matches!(v, Valuation::Additive { .. }))
    }

    /// Errors with the first non-additive agent, for solvers restricted to
    /// additive valuations.
    pub fn require_additive(&self) -> Result<(), Error> {
        for (agent, v) in self.valuations.iter().enumerate() {
            if !matches!(v, Valuation::Additive { .. }) {
                return Err(Error::UnsupportedValuation { agent, kind: v.kind_name() });
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), Error> {
        if self.n < 1 {
            return Err(Error::InvalidInstance("need at least one agent".into()));
        }
        if self.m < 1 {
            return Err(Error::InvalidInstance("need at least one item".into()));
        }
        if self.valuations.len() != self.n {
            return Err(Error::InvalidInstance(format!(
                "{} valuations for {} agents",
                self.valuations.len(),
                self.n
            )));
        }
        for v in &self.valuations {
            v.validate(self.m)?;
        }
        self.validate_hints()
    }

    fn validate_hints(&self) -> Result<(), Error> {
        if let Some(top) = &self.hints.top_set {
            if let Some(&item) = top.iter().find(|&&i| i >= self.m) {
                return Err(Error::InvalidInstance(format!(
                    "top-set hint mentions unknown item {item}"
                )));
            }
            for agent in self.agents() {
                let min_in = top
                    .iter()
                    .map(|&i| self.item_value(agent, i))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .min();
                let max_out = self
                    .items()
                    .filter(|i| !top.contains(i))
                    .map(|i| self.item_value(agent, i))
                    .collect::<Result<Vec<_>, _>>()?
                    .into_iter()
                    .max();
                if let (Some(lo), Some(hi)) = (min_in, max_out) {
                    if lo < hi {
                        return Err(Error::InvalidInstance(format!(
                            "top-set hint is not a valid top set for agent {agent}"
                        )));
                    }
                }
            }
        }
        if let Some(tiers) = &self.hints.tiers {
            let mut seen = BTreeSet::new();
            for tier in tiers {
                for &i in tier {
                    if i >= self.m || !seen.insert(i) {
                        return Err(Error::InvalidInstance(format!(
                            "tier hint repeats or exceeds item range at item {i}"
                        )));
                    }
                }
            }
            if seen.len() != self.m {
                return Err(Error::InvalidInstance(
                    "tier hint does not cover all items".into(),
                ));
            }
            for agent in self.agents() {
                for k in 0..tiers.len() {
                    for later in &tiers[k + 1..] {
                        for &g in &tiers[k] {
                            for &h in later {
                                if self.item_value(agent, g)? < self.item_value(agent, h)? {
                                    return Err(Error::InvalidInstance(format!(
                                        "tier hint violated: agent {agent} values item {h} above earlier-tier item {g}"
                                    )));
                                }
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let inst: Instance = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let inst = Instance::additive(&[&[10, 9, 5, 1], &[9, 10, 2, 2]]);
        let json = inst.to_json().unwrap();
        let back = Instance::from_json(&json).unwrap();
        assert_eq!(inst, back);
    }

    #[test]
    fn parses_spec_shaped_json() {
        let json = r#"{
            "n": 2, "m": 3,
            "valuations": [
                {"kind": "additive", "values": ["2", 1, "1/2"]},
                {"kind": "unit_demand", "values": [5, 1, 1]}
            ],
            "hints": {"top_set": [0]}
        }"#;
        let inst = Instance::from_json(json).unwrap();
        assert_eq!(inst.item_value(0, 2).unwrap(), Value::ratio(1, 2));
        assert_eq!(inst.hints.top_set.as_ref().unwrap().len(), 1);
    }

    #[test]
    fn mismatched_valuation_count_is_rejected() {
        let r = Instance::new(3, 2, vec![Valuation::additive([1, 2])]);
        assert!(r.is_err());
    }

    #[test]
    fn bad_top_set_hint_is_rejected() {
        let json = r#"{
            "n": 1, "m": 2,
            "valuations": [{"kind": "additive", "values": [1, 5]}],
            "hints": {"top_set": [0]}
        }"#;
        assert!(Instance::from_json(json).is_err());
    }

    #[test]
    fn tier_hint_must_partition_and_order() {
        let good = r#"{
            "n": 2, "m": 4,
            "valuations": [
                {"kind": "additive", "values": [9, 8, 2, 1]},
                {"kind": "additive", "values": [8, 9, 1, 2]}
            ],
            "hints": {"tiers": [[0, 1], [2, 3]]}
        }"#;
        assert!(Instance::from_json(good).is_ok());
        let bad = good.replace("[[0, 1], [2, 3]]", "[[0, 2], [1, 3]]");
        assert!(Instance::from_json(&bad).is_err());
    }
}
