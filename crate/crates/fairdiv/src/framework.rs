//! The general approximation framework: run a partial-allocation builder,
//! measure its `(alpha, beta, gamma)` certificate, finish with plain envy
//! cycle elimination, and certify a `min(alpha, beta/(beta+1))`-EFX factor
//! for the final allocation.
//!
//! The certified factor always comes from the *measured* partial allocation,
//! not from a builder's theoretical promise, so a builder that beats its
//! theorem earns the better certificate.

use std::str::FromStr;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::allocation::Allocation;
use crate::ece::{run_ece, run_pick_rounds, EcePolicy};
use crate::error::Error;
use crate::instance::Instance;
use crate::topn;
use crate::value::Value;
use crate::verify::max_alpha_efx;

/// The pool-domination factor `beta`: the minimum over agents of
/// `v_i(S_i) / max over pool items h of v_i(h)`. Agents for whom every pool
/// item is worthless impose no constraint; with an empty pool (or only
/// unconstrained agents) the factor is infinite and the certificate collapses
/// to `alpha`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Beta {
    Finite(Value),
    Infinite,
}

impl Beta {
    /// `beta / (beta + 1)`, the framework's completion loss; 1 when infinite.
    pub fn completion_factor(&self) -> Value {
        match self {
            Beta::Finite(b) => b / &(b + &Value::one()),
            Beta::Infinite => Value::one(),
        }
    }
}

impl std::fmt::Display for Beta {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Beta::Finite(v) => write!(f, "{v}"),
            Beta::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Beta {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Measured certificate of a partial allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartialCertificate {
    /// Maximal EFX factor of the partial allocation, in `[0, 1]`.
    pub alpha: Value,
    /// Pool-domination factor.
    pub beta: Beta,
    /// Maximal EF1 factor of the partial allocation, in `[0, 1]`.
    pub gamma: Value,
    /// `min(alpha, beta / (beta + 1))` — the factor the completed allocation
    /// is certified to satisfy.
    pub certified_factor: Value,
}

impl Serialize for PartialCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("PartialCertificate", 4)?;
        s.serialize_field("alpha", &self.alpha)?;
        s.serialize_field("beta", &self.beta)?;
        s.serialize_field("gamma", &self.gamma)?;
        s.serialize_field("certified_factor", &self.certified_factor)?;
        s.end()
    }
}

/// Measures `(alpha, beta, gamma)` of a partial allocation and derives the
/// certified completion factor.
pub fn measure_partial(inst: &Instance, partial: &Allocation) -> Result<PartialCertificate, Error> {
    partial.validate(inst)?;
    let alpha = max_alpha_efx(inst, partial)?;

    let beta = if partial.pool.is_empty() {
        Beta::Infinite
    } else {
        let mut min_ratio: Option<Value> = None;
        for i in inst.agents() {
            let best_pool = partial
                .pool
                .iter()
                .map(|&h| inst.item_value(i, h))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .max()
                .expect("pool is nonempty");
            if best_pool.is_zero() {
                continue;
            }
            let own = inst.value_of(i, partial.bundle(i))?;
            let ratio = &own / &best_pool;
            min_ratio = Some(match min_ratio {
                Some(r) => r.min(ratio),
                None => ratio,
            });
        }
        match min_ratio {
            Some(r) => Beta::Finite(r),
            None => Beta::Infinite,
        }
    };

    let mut gamma = Value::one();
    for i in inst.agents() {
        let own = inst.value_of(i, partial.bundle(i))?;
        for j in inst.agents() {
            if i == j {
                continue;
            }
            if let Some(floor) = inst.valuation(i).ef1_floor(partial.bundle(j))? {
                if !floor.is_zero() {
                    gamma = gamma.min((&own / &floor).min(Value::one()));
                }
            }
        }
    }

    let certified_factor = alpha.clone().min(beta.completion_factor());
    Ok(PartialCertificate { alpha, beta, gamma, certified_factor })
}

/// Completes a partial allocation with plain ECE and returns the final
/// allocation together with the certificate measured on the partial.
pub fn complete_with_ece(
    inst: &Instance,
    partial: Allocation,
) -> Result<(Allocation, PartialCertificate), Error> {
    let certificate = measure_partial(inst, &partial)?;
    let policy = EcePolicy::plain(&partial);
    let full = run_ece(inst, &partial, &policy)?;
    Ok((full, certificate))
}

/// A named partial-allocation builder. The CLI, the bench harness, and the
/// tests all dispatch through this one registry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Builder {
    /// `n` distinct-source pick-favorite rounds from the empty allocation
    /// (the Theorem-2 partial; `alpha = 1`, `beta >= 1`).
    PickRounds,
    /// The Algorithm-3 partial for a common top-`n` set.
    TopN,
    /// Partial EFX allocation of a commonly ordered top-`l` set.
    RelaxedTop(usize),
    /// Round-robin partial over a top-`l` set valued within `[x, 2x]`.
    BoundedInterval(usize),
    /// Favorite items plus `n` pick rounds under distinct favorites.
    DistinctFavorites,
}

impl Builder {
    pub fn name(&self) -> String {
        match self {
            Builder::PickRounds => "pick-rounds".into(),
            Builder::TopN => "top-n".into(),
            Builder::RelaxedTop(l) => format!("relaxed-top:{l}"),
            Builder::BoundedInterval(l) => format!("bounded-interval:{l}"),
            Builder::DistinctFavorites => "distinct-favorites".into(),
        }
    }

    /// Produces the builder's partial allocation for `inst`.
    pub fn build_partial(&self, inst: &Instance) -> Result<Allocation, Error> {
        match self {
            Builder::PickRounds => {
                let start = Allocation::empty(inst.n, inst.m);
                run_pick_rounds(inst, &start, inst.n)
            }
            Builder::TopN => Ok(topn::top_n_partial(inst)?.0),
            Builder::RelaxedTop(l) => topn::relaxed_top_partial(inst, *l),
            Builder::BoundedInterval(l) => topn::bounded_interval_partial(inst, *l),
            Builder::DistinctFavorites => topn::distinct_favorites_partial(inst),
        }
    }
}

impl FromStr for Builder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        let parse_l = |arg: &str| -> Result<usize, Error> {
            arg.parse()
                .map_err(|_| Error::UnknownAlgorithm(format!("bad item count in {s:?}")))
        };
        match s {
            "pick-rounds" => Ok(Builder::PickRounds),
            "top-n" => Ok(Builder::TopN),
            "distinct-favorites" => Ok(Builder::DistinctFavorites),
            _ => {
                if let Some(arg) = s.strip_prefix("relaxed-top:") {
                    Ok(Builder::RelaxedTop(parse_l(arg)?))
                } else if let Some(arg) = s.strip_prefix("bounded-interval:") {
                    Ok(Builder::BoundedInterval(parse_l(arg)?))
                } else {
                    Err(Error::UnknownAlgorithm(s.into()))
                }
            }
        }
    }
}

/// Runs the framework end to end: build the partial, measure it, and finish
/// with plain ECE.
pub fn run_framework(
    inst: &Instance,
    builder: &Builder,
) -> Result<(Allocation, PartialCertificate), Error> {
    let partial = builder.build_partial(inst)?;
    complete_with_ece(inst, partial)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{check_fairness, is_ef1, FairnessProperty};

    #[test]
    fn measured_certificate_on_the_four_item_example() {
        let inst = Instance::additive(&[&[4, 4, 1, 1], &[4, 4, 1, 1]]);
        let partial = Allocation::from_bundles(2, 4, &[&[0], &[1]]).unwrap();
        let cert = measure_partial(&inst, &partial).unwrap();
        assert_eq!(cert.alpha, Value::one());
        assert_eq!(cert.beta, Beta::Finite(Value::from_int(4)));
        assert_eq!(cert.certified_factor, Value::ratio(4, 5));
    }

    #[test]
    fn degenerate_empty_partial_certifies_zero() {
        let inst = Instance::additive(&[&[1, 2], &[2, 1]]);
        let partial = Allocation::empty(2, 2);
        let cert = measure_partial(&inst, &partial).unwrap();
        assert_eq!(cert.alpha, Value::one());
        assert_eq!(cert.beta, Beta::Finite(Value::zero()));
        assert_eq!(cert.certified_factor, Value::zero());
    }

    #[test]
    fn complete_partial_collapses_to_alpha() {
        let inst = Instance::additive(&[&[2, 1, 1], &[2, 1, 1]]);
        let partial = Allocation::from_bundles(2, 3, &[&[1], &[0, 2]]).unwrap();
        let cert = measure_partial(&inst, &partial).unwrap();
        assert_eq!(cert.beta, Beta::Infinite);
        assert_eq!(cert.certified_factor, cert.alpha);
        assert_eq!(cert.alpha, Value::ratio(1, 2));
    }

    #[test]
    fn pick_rounds_builder_certifies_at_least_one_half() {
        let inst = Instance::additive(&[&[5, 4, 3, 0], &[4, 5, 0, 3]]);
        let (full, cert) = run_framework(&inst, &Builder::PickRounds).unwrap();
        assert!(full.is_complete());
        assert_eq!(cert.alpha, Value::one());
        assert!(cert.certified_factor >= Value::ratio(1, 2));
        let prop = FairnessProperty::alpha_efx(cert.certified_factor.clone()).unwrap();
        assert!(check_fairness(&inst, &full, &prop).unwrap().verdict);
    }

    #[test]
    fn equal_values_pin_the_pick_rounds_factor_to_one_half() {
        let inst = Instance::additive(&[&[1, 1, 1, 1], &[1, 1, 1, 1]]);
        let (_, cert) = run_framework(&inst, &Builder::PickRounds).unwrap();
        assert_eq!(cert.beta, Beta::Finite(Value::one()));
        assert_eq!(cert.certified_factor, Value::ratio(1, 2));
    }

    #[test]
    fn ef1_carries_over_when_gamma_is_one() {
        let inst = Instance::additive(&[&[7, 6, 2, 1, 1], &[6, 7, 1, 2, 1]]);
        let (full, cert) = run_framework(&inst, &Builder::PickRounds).unwrap();
        if cert.gamma == Value::one() {
            assert!(is_ef1(&inst, &full).unwrap());
        }
    }

    #[test]
    fn builder_names_round_trip() {
        for name in [
            "pick-rounds",
            "top-n",
            "relaxed-top:4",
            "bounded-interval:6",
            "distinct-favorites",
        ] {
            let b: Builder = name.parse().unwrap();
            assert_eq!(b.name(), name);
        }
        assert!("frobnicate".parse::<Builder>().is_err());
        assert!("relaxed-top:x".parse::<Builder>().is_err());
    }

    #[test]
    fn beta_serializes_finite_and_infinite() {
        assert_eq!(
            serde_json::to_string(&Beta::Finite(Value::ratio(3, 2))).unwrap(),
            "\"3/2\""
        );
        assert_eq!(serde_json::to_string(&Beta::Infinite).unwrap(), "\"inf\"");
    }
}
