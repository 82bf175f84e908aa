//! Valuation functions over item bundles.
//!
//! Four kinds are supported, all monotone and nonnegative: additive,
//! multiplicative (factors at least 1), unit-demand, and an explicit table
//! over every subset (small item counts only). The first three are cancelable
//! by construction; tables must be checked with [`check_cancelable`] before
//! entering the tier solver.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::value::Value;

/// Largest item count for which exhaustive subset checks (table monotonicity,
/// cancelability) stay tractable.
pub const MAX_EXHAUSTIVE_ITEMS: usize = 12;

/// An agent's valuation function over subsets of the `m` items.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Valuation {
    /// `v(S) = sum of per-item values over S`; empty set is worth 0.
    Additive { values: Vec<Value> },
    /// `v(S) = product of per-item factors over S`; empty set is worth 1.
    /// Every factor must be at least 1 so the function is monotone.
    Multiplicative { values: Vec<Value> },
    /// `v(S) = max per-item value over S`; empty set is worth 0.
    UnitDemand { values: Vec<Value> },
    /// Explicit value per subset, indexed by bitmask (bit `j` = item `j`).
    /// Must contain `2^m` entries and pass a monotonicity check at load.
    Table { values: Vec<Value> },
}

impl Valuation {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Valuation::Additive { .. } => "additive",
            Valuation::Multiplicative { .. } => "multiplicative",
            Valuation::UnitDemand { .. } => "unit_demand",
            Valuation::Table { .. } => "table",
        }
    }

    pub fn additive(values: impl IntoIterator<Item = u64>) -> Self {
        Valuation::Additive {
            values: values.into_iter().map(Value::from_int).collect(),
        }
    }

    pub fn unit_demand(values: impl IntoIterator<Item = u64>) -> Self {
        Valuation::UnitDemand {
            values: values.into_iter().map(Value::from_int).collect(),
        }
    }

    pub fn multiplicative(factors: impl IntoIterator<Item = u64>) -> Self {
        Valuation::Multiplicative {
            values: factors.into_iter().map(Value::from_int).collect(),
        }
    }

    /// Validates this valuation against an instance with `m` items.
    pub fn validate(&self, m: usize) -> Result<(), Error> {
        match self {
            Valuation::Additive { values } | Valuation::UnitDemand { values } => {
                if values.len() != m {
                    return Err(Error::InvalidInstance(format!(
                        "{} valuation covers {} items, instance has {m}",
                        self.kind_name(),
                        values.len()
                    )));
                }
            }
            Valuation::Multiplicative { values } => {
                if values.len() != m {
                    return Err(Error::InvalidInstance(format!(
                        "multiplicative valuation covers {} items, instance has {m}",
                        values.len()
                    )));
                }
                if let Some(f) = values.iter().find(|f| **f < Value::one()) {
                    return Err(Error::InvalidInstance(format!(
                        "multiplicative factor {f} is below 1; monotonicity requires factors >= 1"
                    )));
                }
            }
            Valuation::Table { values } => {
                if m > MAX_EXHAUSTIVE_ITEMS {
                    return Err(Error::InvalidInstance(format!(
                        "table valuations support at most {MAX_EXHAUSTIVE_ITEMS} items, instance has {m}"
                    )));
                }
                if values.len() != 1usize << m {
                    return Err(Error::InvalidInstance(format!(
                        "table has {} entries, expected 2^{m} = {}",
                        values.len(),
                        1usize << m
                    )));
                }
                // Load-time monotonicity check: adding any item never
                // decreases the value.
                for mask in 0..values.len() {
                    for j in 0..m {
                        if mask & (1 << j) == 0 && values[mask] > values[mask | (1 << j)] {
                            return Err(Error::InvalidInstance(format!(
                                "table is not monotone: v({:?}) > v({:?})",
                                mask_to_set(mask),
                                mask_to_set(mask | (1 << j)),
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn item_bound(&self) -> usize {
        match self {
            Valuation::Additive { values }
            | Valuation::Multiplicative { values }
            | Valuation::UnitDemand { values } => values.len(),
            Valuation::Table { values } => values.len().trailing_zeros() as usize,
        }
    }

    /// True for the kinds that are cancelable by construction.
    pub fn is_builtin_cancelable(&self) -> bool {
        !matches!(self, Valuation::Table { .. })
    }

    /// Value of a single item.
    pub fn item_value(&self, item: usize) -> Result<Value, Error> {
        let m = self.item_bound();
        if item >= m {
            return Err(Error::InvalidItem { item, m });
        }
        Ok(match self {
            Valuation::Additive { values }
            | Valuation::Multiplicative { values }
            | Valuation::UnitDemand { values } => values[item].clone(),
            Valuation::Table { values } => values[1 << item].clone(),
        })
    }

    /// Value of a bundle of items.
    pub fn bundle_value(&self, bundle: &BTreeSet<usize>) -> Result<Value, Error> {
        let m = self.item_bound();
        if let Some(&item) = bundle.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidItem { item, m });
        }
        Ok(match self {
            Valuation::Additive { values } => {
                bundle.iter().map(|&i| values[i].clone()).sum()
            }
            Valuation::Multiplicative { values } => {
                let mut acc = Value::one();
                for &i in bundle {
                    acc *= &values[i];
                }
                acc
            }
            Valuation::UnitDemand { values } => bundle
                .iter()
                .map(|&i| values[i].clone())
                .max()
                .unwrap_or_else(Value::zero),
            Valuation::Table { values } => values[set_to_mask(bundle)].clone(),
        })
    }

    /// For each `g` in `bundle`, the value of `bundle \ {g}`, in ascending
    /// item order. Computed in O(|bundle|) total work per kind.
    pub fn removal_values(&self, bundle: &BTreeSet<usize>) -> Result<Vec<(usize, Value)>, Error> {
        let m = self.item_bound();
        if let Some(&item) = bundle.iter().find(|&&i| i >= m) {
            return Err(Error::InvalidItem { item, m });
        }
        let out = match self {
            Valuation::Additive { values } => {
                let total: Value = bundle.iter().map(|&i| values[i].clone()).sum();
                bundle
                    .iter()
                    .map(|&g| (g, &total - &values[g]))
                    .collect()
            }
            Valuation::Multiplicative { values } => {
                let mut total = Value::one();
                for &i in bundle {
                    total *= &values[i];
                }
                bundle
                    .iter()
                    .map(|&g| (g, &total / &values[g]))
                    .collect()
            }
            Valuation::UnitDemand { values } => {
                // Removing a non-best item leaves the max; removing the
                // unique best item leaves the runner-up.
                let mut best = Value::zero();
                let mut best_count = 0usize;
                let mut second = Value::zero();
                for &i in bundle {
                    let v = &values[i];
                    if *v > best {
                        second = best.clone();
                        best = v.clone();
                        best_count = 1;
                    } else if *v == best {
                        best_count += 1;
                    } else if *v > second {
                        second = v.clone();
                    }
                }
                bundle
                    .iter()
                    .map(|&g| {
                        let left = if values[g] == best && best_count == 1 {
                            second.clone()
                        } else {
                            best.clone()
                        };
                        (g, left)
                    })
                    .collect()
            }
            Valuation::Table { values } => {
                let mask = set_to_mask(bundle);
                bundle
                    .iter()
                    .map(|&g| (g, values[mask & !(1 << g)].clone()))
                    .collect()
            }
        };
        Ok(out)
    }

    /// `max over g in bundle of v(bundle \ g)` — the quantity an EFX check
    /// compares against. `None` for an empty bundle (the condition is vacuous).
    pub fn efx_threshold(&self, bundle: &BTreeSet<usize>) -> Result<Option<Value>, Error> {
        Ok(self
            .removal_values(bundle)?
            .into_iter()
            .map(|(_, v)| v)
            .max())
    }

    /// `min over g in bundle of v(bundle \ g)` — the quantity an EF1 check
    /// compares against. `None` for an empty bundle.
    pub fn ef1_floor(&self, bundle: &BTreeSet<usize>) -> Result<Option<Value>, Error> {
        Ok(self
            .removal_values(bundle)?
            .into_iter()
            .map(|(_, v)| v)
            .min())
    }

    /// Values of all `2^m` subsets, indexed by bitmask.
    pub fn subset_values(&self, m: usize) -> Result<Vec<Value>, Error> {
        self.validate(m)?;
        if m > MAX_EXHAUSTIVE_ITEMS {
            return Err(Error::TooLargeForExhaustiveCheck { m, max: MAX_EXHAUSTIVE_ITEMS });
        }
        let size = 1usize << m;
        let mut vals = Vec::with_capacity(size);
        match self {
            Valuation::Additive { values } => {
                vals.push(Value::zero());
                for mask in 1..size {
                    let low = mask.trailing_zeros() as usize;
                    let v = &vals[mask & (mask - 1)] + &values[low];
                    vals.push(v);
                }
            }
            Valuation::Multiplicative { values } => {
                vals.push(Value::one());
                for mask in 1..size {
                    let low = mask.trailing_zeros() as usize;
                    let v = &vals[mask & (mask - 1)] * &values[low];
                    vals.push(v);
                }
            }
            Valuation::UnitDemand { values } => {
                vals.push(Value::zero());
                for mask in 1..size {
                    let low = mask.trailing_zeros() as usize;
                    let v = vals[mask & (mask - 1)].clone().max(values[low].clone());
                    vals.push(v);
                }
            }
            Valuation::Table { values } => vals = values.clone(),
        }
        Ok(vals)
    }
}

/// Outcome of a cancelability check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Cancelability {
    Cancelable,
    /// Witness triple violating Definition 4.2-style cancelability:
    /// `v(S u g) > v(T u g)` holds but `v(S) > v(T)` does not.
    NotCancelable {
        s: BTreeSet<usize>,
        t: BTreeSet<usize>,
        g: usize,
    },
}

impl Cancelability {
    pub fn is_cancelable(&self) -> bool {
        matches!(self, Cancelability::Cancelable)
    }
}

/// Exhaustively decides whether `v` is cancelable over `m` items: for all
/// disjoint-from-`g` bundles `S`, `T` and items `g`,
/// `v(S u g) > v(T u g)` implies `v(S) > v(T)`.
///
/// The verdict is computed with a sorted per-item sweep in `O(m 2^m log 2^m)`
/// comparisons; only when the function fails is the quadratic scan run to
/// produce the lexicographically first witness triple.
pub fn check_cancelable(v: &Valuation, m: usize) -> Result<Cancelability, Error> {
    if m > MAX_EXHAUSTIVE_ITEMS {
        return Err(Error::TooLargeForExhaustiveCheck { m, max: MAX_EXHAUSTIVE_ITEMS });
    }
    let vals = v.subset_values(m)?;
    if cancelable_verdict(&vals, m) {
        return Ok(Cancelability::Cancelable);
    }
    // Witness scan in (S, T, g) lexicographic order.
    let size = 1usize << m;
    for s in 0..size {
        for t in 0..size {
            for g in 0..m {
                let bit = 1usize << g;
                if s & bit != 0 || t & bit != 0 {
                    continue;
                }
                if vals[s] <= vals[t] && vals[s | bit] > vals[t | bit] {
                    return Ok(Cancelability::NotCancelable {
                        s: mask_to_set(s),
                        t: mask_to_set(t),
                        g,
                    });
                }
            }
        }
    }
    Err(Error::Internal(
        "cancelability sweep found a violation the witness scan could not".into(),
    ))
}

/// Fast boolean verdict: for each item `g`, the map `S -> v(S u g)` over sets
/// avoiding `g` must be constant on each `v(S)`-equivalence class and
/// nondecreasing across classes.
fn cancelable_verdict(vals: &[Value], m: usize) -> bool {
    let size = vals.len();
    for g in 0..m {
        let bit = 1usize << g;
        let mut masks: Vec<usize> = (0..size).filter(|s| s & bit == 0).collect();
        masks.sort_by(|&a, &b| vals[a].cmp(&vals[b]).then(a.cmp(&b)));
        let mut i = 0;
        let mut prev_class_max: Option<Value> = None;
        while i < masks.len() {
            let mut j = i;
            while j < masks.len() && vals[masks[j]] == vals[masks[i]] {
                j += 1;
            }
            let with_g = &vals[masks[i] | bit];
            for &s in &masks[i..j] {
                if vals[s | bit] != *with_g {
                    return false;
                }
            }
            if let Some(prev) = &prev_class_max {
                if with_g < prev {
                    return false;
                }
            }
            prev_class_max = Some(with_g.clone());
            i = j;
        }
    }
    true
}

/// Exhaustively verifies monotonicity of `v` over all subset pairs `S <= T`.
pub fn is_monotone(v: &Valuation, m: usize) -> Result<bool, Error> {
    let vals = v.subset_values(m)?;
    let size = 1usize << m;
    for mask in 0..size {
        for j in 0..m {
            if mask & (1 << j) == 0 && vals[mask] > vals[mask | (1 << j)] {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

pub(crate) fn mask_to_set(mask: usize) -> BTreeSet<usize> {
    (0..usize::BITS as usize)
        .filter(|j| mask & (1usize << j) != 0)
        .collect()
}

pub(crate) fn set_to_mask(set: &BTreeSet<usize>) -> usize {
    set.iter().fold(0usize, |acc, &i| acc | (1usize << i))
}
