//! Fairness verifiers: EF, EF1, EFX and their multiplicative relaxations.
//!
//! Every check quantifies over ordered agent pairs and decides the defining
//! inequality exactly. Partial allocations are verified over bundles only;
//! the pool is invisible to fairness.

use std::str::FromStr;

use serde::ser::{SerializeSeq, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::allocation::Allocation;
use crate::error::Error;
use crate::instance::Instance;
use crate::value::Value;

/// A fairness property to check.
///
/// The approximation factor of the `Alpha*` variants must lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FairnessProperty {
    /// `v_i(A_i) >= v_i(A_j)` for every pair.
    Ef,
    /// Some item of `A_j` can be removed to eliminate `i`'s envy.
    Ef1,
    /// Any item of `A_j` can be removed to eliminate `i`'s envy.
    Efx,
    /// `v_i(A_i) >= alpha * v_i(A_j)` for every pair.
    AlphaEf(Value),
    /// `v_i(A_i) >= alpha * v_i(A_j \ g)` for every pair and every `g`.
    AlphaEfx(Value),
}

impl FairnessProperty {
    pub fn alpha_ef(alpha: Value) -> Result<Self, Error> {
        check_alpha(&alpha)?;
        Ok(FairnessProperty::AlphaEf(alpha))
    }

    pub fn alpha_efx(alpha: Value) -> Result<Self, Error> {
        check_alpha(&alpha)?;
        Ok(FairnessProperty::AlphaEfx(alpha))
    }
}

fn check_alpha(alpha: &Value) -> Result<(), Error> {
    if *alpha > Value::one() {
        return Err(Error::InvalidValue(format!(
            "approximation factor {alpha} must lie in [0, 1]"
        )));
    }
    Ok(())
}

impl FromStr for FairnessProperty {
    type Err = Error;

    /// Parses `ef`, `ef1`, `efx`, `alpha-ef:<p/q>`, or `alpha-efx:<p/q>`.
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "ef" => Ok(FairnessProperty::Ef),
            "ef1" => Ok(FairnessProperty::Ef1),
            "efx" => Ok(FairnessProperty::Efx),
            _ => {
                if let Some(a) = s.strip_prefix("alpha-efx:") {
                    FairnessProperty::alpha_efx(a.parse()?)
                } else if let Some(a) = s.strip_prefix("alpha-ef:") {
                    FairnessProperty::alpha_ef(a.parse()?)
                } else {
                    Err(Error::InvalidValue(format!("unknown property {s:?}")))
                }
            }
        }
    }
}

/// One violated comparison: agent `i` toward agent `j`, with the offending
/// removed item for the EFX-style properties.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub item: Option<usize>,
}

impl Serialize for Witness {
    /// Wire shape `[i, j, g]` with 1-based agent indices, 0-based item index,
    /// and `null` for the pair-level (EF/EF1) violations.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(3))?;
        seq.serialize_element(&(self.i + 1))?;
        seq.serialize_element(&(self.j + 1))?;
        seq.serialize_element(&self.item)?;
        seq.end()
    }
}

/// Verdict of a fairness check, with every violating comparison and the
/// maximal certified EFX factor of the allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessReport {
    pub verdict: bool,
    pub witnesses: Vec<Witness>,
    pub certified_alpha: Value,
}

impl Serialize for FairnessReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("FairnessReport", 3)?;
        s.serialize_field("verdict", &self.verdict)?;
        s.serialize_field("alpha", &self.certified_alpha)?;
        s.serialize_field("witnesses", &self.witnesses)?;
        s.end()
    }
}

/// Decides `prop` on `alloc`, enumerating all violations sorted by
/// `(i, j, g)`.
pub fn check_fairness(
    inst: &Instance,
    alloc: &Allocation,
    prop: &FairnessProperty,
) -> Result<FairnessReport, Error> {
    alloc.validate(inst)?;
    let mut witnesses = Vec::new();
    for i in inst.agents() {
        let own = inst.value_of(i, alloc.bundle(i))?;
        for j in inst.agents() {
            if i == j {
                continue;
            }
            let other = alloc.bundle(j);
            match prop {
                FairnessProperty::Ef => {
                    if own < inst.value_of(i, other)? {
                        witnesses.push(Witness { i, j, item: None });
                    }
                }
                FairnessProperty::AlphaEf(alpha) => {
                    if own < alpha * &inst.value_of(i, other)? {
                        witnesses.push(Witness { i, j, item: None });
                    }
                }
                FairnessProperty::Ef1 => {
                    // Vacuously satisfied toward an empty bundle.
                    if let Some(floor) = inst.valuation(i).ef1_floor(other)? {
                        if own < floor {
                            witnesses.push(Witness { i, j, item: None });
                        }
                    }
                }
                FairnessProperty::Efx | FairnessProperty::AlphaEfx(_) => {
                    let alpha = match prop {
                        FairnessProperty::AlphaEfx(a) => a.clone(),
                        _ => Value::one(),
                    };
                    for (g, rest) in inst.valuation(i).removal_values(other)? {
                        if own < &alpha * &rest {
                            witnesses.push(Witness { i, j, item: Some(g) });
                        }
                    }
                }
            }
        }
    }
    Ok(FairnessReport {
        verdict: witnesses.is_empty(),
        witnesses,
        certified_alpha: max_alpha_efx(inst, alloc)?,
    })
}

/// The maximal `alpha` for which `alloc` is `alpha`-EFX: the minimum over all
/// triples `(i, j, g in A_j)` with `v_i(A_j \ g) > 0` of
/// `min(1, v_i(A_i) / v_i(A_j \ g))`, or 1 if no such triple exists.
pub fn max_alpha_efx(inst: &Instance, alloc: &Allocation) -> Result<Value, Error> {
    alloc.validate(inst)?;
    let mut alpha = Value::one();
    for i in inst.agents() {
        let own = inst.value_of(i, alloc.bundle(i))?;
        for j in inst.agents() {
            if i == j {
                continue;
            }
            for (_, rest) in inst.valuation(i).removal_values(alloc.bundle(j))? {
                if !rest.is_zero() {
                    alpha = alpha.min((&own / &rest).min(Value::one()));
                }
            }
        }
    }
    Ok(alpha)
}

/// Ordered pairs `(i, j)` where agent `i` strongly envies agent `j`, i.e.
/// the EFX condition of `i` toward `j` is violated. Empty exactly when the
/// allocation is EFX.
pub fn strong_envy_pairs(inst: &Instance, alloc: &Allocation) -> Result<Vec<(usize, usize)>, Error> {
    alloc.validate(inst)?;
    let mut pairs = Vec::new();
    for i in inst.agents() {
        let own = inst.value_of(i, alloc.bundle(i))?;
        for j in inst.agents() {
            if i == j {
                continue;
            }
            if let Some(threshold) = inst.valuation(i).efx_threshold(alloc.bundle(j))? {
                if own < threshold {
                    pairs.push((i, j));
                }
            }
        }
    }
    Ok(pairs)
}

/// True when `alloc` satisfies exact EFX.
pub fn is_efx(inst: &Instance, alloc: &Allocation) -> Result<bool, Error> {
    Ok(strong_envy_pairs(inst, alloc)?.is_empty())
}

/// True when `alloc` satisfies EF1.
pub fn is_ef1(inst: &Instance, alloc: &Allocation) -> Result<bool, Error> {
    Ok(check_fairness(inst, alloc, &FairnessProperty::Ef1)?.verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::Allocation;
    use crate::valuation::Valuation;

    fn report(inst: &Instance, bundles: &[&[usize]], prop: &FairnessProperty) -> FairnessReport {
        let alloc = Allocation::from_bundles(inst.n, inst.m, bundles).unwrap();
        check_fairness(inst, &alloc, prop).unwrap()
    }

    #[test]
    fn symmetric_singletons_are_efx() {
        let inst = Instance::additive(&[&[1, 1], &[1, 1]]);
        assert!(report(&inst, &[&[0], &[1]], &FairnessProperty::Efx).verdict);
    }

    #[test]
    fn efx_fails_but_ef1_holds_on_the_two_one_one_instance() {
        let inst = Instance::additive(&[&[2, 1, 1], &[2, 1, 1]]);
        let efx = report(&inst, &[&[1], &[0, 2]], &FairnessProperty::Efx);
        assert!(!efx.verdict);
        assert_eq!(
            efx.witnesses,
            vec![Witness { i: 0, j: 1, item: Some(2) }]
        );
        let ef1 = report(&inst, &[&[1], &[0, 2]], &FairnessProperty::Ef1);
        assert!(ef1.verdict, "removing item 0 leaves value 1 >= 1");
        let half = FairnessProperty::alpha_efx(Value::ratio(1, 2)).unwrap();
        assert!(report(&inst, &[&[1], &[0, 2]], &half).verdict);
    }

    #[test]
    fn witness_serialization_is_one_based_for_agents() {
        let inst = Instance::additive(&[&[2, 1, 1], &[2, 1, 1]]);
        let r = report(&inst, &[&[1], &[0, 2]], &FairnessProperty::Efx);
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"verdict":false,"alpha":"1/2","witnesses":[[1,2,2]]}"#
        );
    }

    #[test]
    fn max_alpha_on_spec_examples() {
        let inst = Instance::additive(&[&[1, 1], &[1, 1]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        assert_eq!(max_alpha_efx(&inst, &alloc).unwrap(), Value::one());

        let inst = Instance::additive(&[&[2, 1, 1], &[2, 1, 1]]);
        let alloc = Allocation::from_bundles(2, 3, &[&[1], &[0, 2]]).unwrap();
        assert_eq!(max_alpha_efx(&inst, &alloc).unwrap(), Value::ratio(1, 2));

        // Agent 2's only comparisons are against singleton-minus-one = empty.
        let inst = Instance::additive(&[&[3, 1, 1], &[3, 1, 1]]);
        let alloc = Allocation::from_bundles(2, 3, &[&[0], &[1, 2]]).unwrap();
        assert_eq!(max_alpha_efx(&inst, &alloc).unwrap(), Value::one());
    }

    #[test]
    fn strong_envy_pairs_on_spec_examples() {
        let inst = Instance::additive(&[&[2, 1, 1], &[2, 1, 1]]);
        let alloc = Allocation::from_bundles(2, 3, &[&[1], &[0, 2]]).unwrap();
        assert_eq!(strong_envy_pairs(&inst, &alloc).unwrap(), vec![(0, 1)]);

        let inst = Instance::additive(&[&[5, 1, 1, 1], &[5, 1, 1, 1], &[5, 1, 1, 1]]);
        let alloc = Allocation::from_bundles(3, 4, &[&[1], &[2], &[0, 3]]).unwrap();
        assert_eq!(
            strong_envy_pairs(&inst, &alloc).unwrap(),
            vec![(0, 2), (1, 2)]
        );

        let inst = Instance::additive(&[&[1, 1], &[1, 1]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        assert!(strong_envy_pairs(&inst, &alloc).unwrap().is_empty());
    }

    #[test]
    fn alpha_above_one_is_rejected() {
        assert!(FairnessProperty::alpha_efx(Value::ratio(3, 2)).is_err());
        assert!("alpha-efx:3/2".parse::<FairnessProperty>().is_err());
        assert!("alpha-efx:2/3".parse::<FairnessProperty>().is_ok());
    }

    #[test]
    fn empty_opposing_bundle_is_vacuous_for_ef1_and_efx() {
        // Agent 1 holds everything; agent 0 values nothing, so the only
        // non-vacuous direction (0 toward 1) is satisfied, and conditions
        // toward agent 0's empty bundle never produce witnesses.
        let inst = Instance {
            n: 2,
            m: 2,
            valuations: vec![Valuation::additive([0, 0]), Valuation::additive([1, 1])],
            hints: Default::default(),
        };
        let bundles: &[&[usize]] = &[&[], &[0, 1]];
        assert!(report(&inst, bundles, &FairnessProperty::Efx).verdict);
        assert!(report(&inst, bundles, &FairnessProperty::Ef1).verdict);
        assert!(report(&inst, bundles, &FairnessProperty::Ef).verdict);
        // An empty-handed agent who wants the items, by contrast, does
        // strongly envy: the vacuity is per opposing bundle, not per agent.
        let inst = Instance::additive(&[&[1, 1], &[1, 1]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0, 1], &[]]).unwrap();
        assert_eq!(strong_envy_pairs(&inst, &alloc).unwrap(), vec![(1, 0)]);
    }

    #[test]
    fn partial_allocation_ignores_the_pool() {
        let inst = Instance::additive(&[&[1, 1, 9], &[1, 1, 9]]);
        let alloc = Allocation::from_bundles(2, 3, &[&[0], &[1]]).unwrap();
        let r = check_fairness(&inst, &alloc, &FairnessProperty::Ef).unwrap();
        assert!(r.verdict, "pooled item 2 must not count as envy");
    }
}
