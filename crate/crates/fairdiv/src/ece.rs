//! Envy cycle elimination: full decycling plus the pick-favorite variant.
//!
//! The solver keeps a value matrix `v_i(A_j)` alongside the allocation so a
//! round costs one column refresh instead of a full rebuild. Rotating a cycle
//! permutes matrix columns; both operations keep the matrix exact.

use std::collections::BTreeSet;

use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::allocation::Allocation;
use crate::envy::EnvyGraph;
use crate::error::Error;
use crate::instance::Instance;
use crate::value::Value;

/// How the next item of a round is chosen.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ItemOrder {
    /// Items are fed in this fixed order; the list must be a permutation of
    /// the starting pool.
    FixedSequence(Vec<usize>),
    /// The selected source picks her favorite unallocated item every round.
    SourcePicksFavorite,
}

/// Policy for a run of envy cycle elimination.
///
/// During the first `rounds_with_pick` rounds the source picks her favorite
/// unallocated item, and within the first `n` of those rounds a distinct
/// source is selected each time (lowest-index source not yet served). After
/// the pick rounds, `item_order` governs the feed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EcePolicy {
    pub item_order: ItemOrder,
    pub rounds_with_pick: usize,
}

impl EcePolicy {
    /// Plain Algorithm-1 policy: no pick rounds, pool fed in ascending item
    /// order.
    pub fn plain(start: &Allocation) -> Self {
        EcePolicy {
            item_order: ItemOrder::FixedSequence(start.pool.iter().copied().collect()),
            rounds_with_pick: 0,
        }
    }

    /// Theorem-2 policy: `n` pick rounds with distinct sources, then the
    /// remaining pool in ascending order.
    pub fn pick_favorite(n: usize, start: &Allocation) -> Self {
        EcePolicy {
            item_order: ItemOrder::FixedSequence(start.pool.iter().copied().collect()),
            rounds_with_pick: n,
        }
    }
}

/// One line of a run trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundTrace {
    pub round: usize,
    pub source: usize,
    pub item: usize,
    pub cycles_rotated: usize,
}

impl Serialize for RoundTrace {
    /// Agents are 1-based on the wire, items 0-based.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("RoundTrace", 4)?;
        s.serialize_field("round", &self.round)?;
        s.serialize_field("source", &(self.source + 1))?;
        s.serialize_field("item", &self.item)?;
        s.serialize_field("cycles_rotated", &self.cycles_rotated)?;
        s.end()
    }
}

/// Allocation state with a cached value matrix.
pub(crate) struct State<'a> {
    pub inst: &'a Instance,
    pub alloc: Allocation,
    /// `values[i][j] = v_i(A_j)`.
    values: Vec<Vec<Value>>,
}

impl<'a> State<'a> {
    pub fn new(inst: &'a Instance, alloc: Allocation) -> Result<Self, Error> {
        alloc.validate(inst)?;
        let values = inst
            .agents()
            .map(|i| {
                inst.agents()
                    .map(|j| inst.value_of(i, alloc.bundle(j)))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(State { inst, alloc, values })
    }

    pub fn own_value(&self, agent: usize) -> &Value {
        &self.values[agent][agent]
    }

    pub fn bundle_value(&self, viewer: usize, owner: usize) -> &Value {
        &self.values[viewer][owner]
    }

    /// Moves `item` from the pool into `agent`'s bundle and refreshes the
    /// affected matrix column.
    pub fn assign(&mut self, agent: usize, item: usize) -> Result<(), Error> {
        self.alloc.assign(agent, item)?;
        self.refresh_column(agent)
    }

    fn refresh_column(&mut self, owner: usize) -> Result<(), Error> {
        for i in self.inst.agents() {
            self.values[i][owner] = self.inst.value_of(i, self.alloc.bundle(owner))?;
        }
        Ok(())
    }

    pub fn envy_graph(&self) -> EnvyGraph {
        let n = self.inst.n;
        let mut adj = vec![Vec::new(); n];
        for i in 0..n {
            for j in 0..n {
                if i != j && self.values[i][i] < self.values[i][j] {
                    adj[i].push(j);
                }
            }
        }
        EnvyGraph::from_adjacency(adj)
    }

    pub fn sources(&self) -> Vec<usize> {
        self.envy_graph().sources()
    }

    /// Rotates bundles backwards along the envy cycle
    /// `c[0] -> c[1] -> ... -> c[0]`: each agent receives the bundle of the
    /// agent she envies. Every member strictly gains.
    pub fn rotate(&mut self, cycle: &[usize]) {
        debug_assert!(cycle.len() >= 2);
        let first_bundle = self.alloc.bundles[cycle[0]].clone();
        let first_col: Vec<Value> = self
            .inst
            .agents()
            .map(|i| self.values[i][cycle[0]].clone())
            .collect();
        for w in 0..cycle.len() - 1 {
            let (dst, src) = (cycle[w], cycle[w + 1]);
            self.alloc.bundles[dst] = self.alloc.bundles[src].clone();
            for i in self.inst.agents() {
                self.values[i][dst] = self.values[i][src].clone();
            }
        }
        let last = cycle[cycle.len() - 1];
        self.alloc.bundles[last] = first_bundle;
        for i in self.inst.agents() {
            self.values[i][last] = first_col[i].clone();
        }
        #[cfg(debug_assertions)]
        for &a in cycle {
            debug_assert!(
                self.values[a][a] >= Value::zero(),
                "rotation broke agent {a}"
            );
        }
    }

    /// Removes all envy cycles by repeated rotation; returns the rotation
    /// count. Terminates because every rotation strictly increases the sum of
    /// own-bundle values over a finite space.
    pub fn decycle(&mut self) -> usize {
        let mut rotations = 0;
        loop {
            let graph = self.envy_graph();
            match graph.find_cycle() {
                Some(cycle) => {
                    #[cfg(debug_assertions)]
                    let before: Vec<Value> =
                        cycle.iter().map(|&a| self.values[a][a].clone()).collect();
                    self.rotate(&cycle);
                    #[cfg(debug_assertions)]
                    for (k, &a) in cycle.iter().enumerate() {
                        debug_assert!(
                            self.values[a][a] > before[k],
                            "cycle member {a} did not strictly gain"
                        );
                    }
                    rotations += 1;
                }
                None => return rotations,
            }
        }
    }

    /// Exact EFX check on the current partial allocation.
    pub fn is_efx(&self) -> Result<bool, Error> {
        for i in self.inst.agents() {
            for j in self.inst.agents() {
                if i == j {
                    continue;
                }
                if let Some(threshold) =
                    self.inst.valuation(i).efx_threshold(self.alloc.bundle(j))?
                {
                    if *self.own_value(i) < threshold {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(true)
    }

    /// The agent's favorite pool item (ties to the lowest index).
    pub fn favorite_pool_item(&self, agent: usize) -> Result<Option<usize>, Error> {
        let mut best: Option<(usize, Value)> = None;
        for &item in &self.alloc.pool {
            let v = self.inst.item_value(agent, item)?;
            match &best {
                Some((_, bv)) if *bv >= v => {}
                _ => best = Some((item, v)),
            }
        }
        Ok(best.map(|(i, _)| i))
    }
}

/// Removes all envy cycles from `alloc` by rotating bundles backwards along
/// cycles until the envy graph is acyclic. Bundle multiset is preserved and
/// no agent's value decreases.
pub fn decycle(inst: &Instance, alloc: &Allocation) -> Result<Allocation, Error> {
    let mut state = State::new(inst, alloc.clone())?;
    state.decycle();
    Ok(state.alloc)
}

/// Runs envy cycle elimination from `start` under `policy` until the pool is
/// empty. See [`run_ece_traced`] for the traced variant.
pub fn run_ece(inst: &Instance, start: &Allocation, policy: &EcePolicy) -> Result<Allocation, Error> {
    run_ece_traced(inst, start, policy, &mut Vec::new())
}

/// Traced envy cycle elimination. One [`RoundTrace`] is appended per round;
/// rotations spent restoring the DAG before the first round are folded into
/// that round's `cycles_rotated`.
pub fn run_ece_traced(
    inst: &Instance,
    start: &Allocation,
    policy: &EcePolicy,
    trace: &mut Vec<RoundTrace>,
) -> Result<Allocation, Error> {
    if let ItemOrder::FixedSequence(seq) = &policy.item_order {
        let as_set: BTreeSet<usize> = seq.iter().copied().collect();
        if as_set != start.pool || as_set.len() != seq.len() {
            return Err(Error::InvalidAllocation(
                "fixed item sequence is not a permutation of the pool".into(),
            ));
        }
    }
    let mut state = State::new(inst, start.clone())?;
    let mut pending_rotations = state.decycle();
    let mut served: BTreeSet<usize> = BTreeSet::new();
    let mut sequence_cursor = 0usize;
    let mut round = 0usize;

    while !state.alloc.pool.is_empty() {
        round += 1;
        let pick_phase = round <= policy.rounds_with_pick;
        let sources = state.sources();
        let source = if pick_phase && round <= inst.n {
            // Theorem-2 rule: a distinct source in each of the first n rounds.
            *sources
                .iter()
                .find(|s| !served.contains(s))
                .ok_or_else(|| {
                    Error::Internal("no unserved source in a pick round".into())
                })?
        } else {
            *sources
                .first()
                .ok_or_else(|| Error::Internal("no source after decycle".into()))?
        };
        served.insert(source);

        let item = if pick_phase || policy.item_order == ItemOrder::SourcePicksFavorite {
            state
                .favorite_pool_item(source)?
                .ok_or_else(|| Error::Internal("empty pool mid-round".into()))?
        } else {
            match &policy.item_order {
                ItemOrder::FixedSequence(seq) => {
                    while sequence_cursor < seq.len()
                        && !state.alloc.pool.contains(&seq[sequence_cursor])
                    {
                        sequence_cursor += 1;
                    }
                    *seq.get(sequence_cursor).ok_or_else(|| {
                        Error::Internal("item sequence exhausted before the pool".into())
                    })?
                }
                ItemOrder::SourcePicksFavorite => unreachable!(),
            }
        };

        state.assign(source, item)?;
        let rotations = state.decycle();
        trace.push(RoundTrace {
            round,
            source,
            item,
            cycles_rotated: rotations + pending_rotations,
        });
        pending_rotations = 0;
    }
    debug_assert!(state.envy_graph().is_acyclic());
    Ok(state.alloc)
}

/// Runs only the pick-favorite phase: up to `rounds` rounds in which a
/// distinct unserved source picks her favorite pool item, with full decycling
/// after each placement. Returns the resulting partial allocation.
pub(crate) fn run_pick_rounds(
    inst: &Instance,
    start: &Allocation,
    rounds: usize,
) -> Result<Allocation, Error> {
    let mut state = State::new(inst, start.clone())?;
    state.decycle();
    let mut served = BTreeSet::new();
    for _ in 0..rounds {
        if state.alloc.pool.is_empty() {
            break;
        }
        let sources = state.sources();
        let source = *sources
            .iter()
            .find(|s| !served.contains(*s))
            .ok_or_else(|| Error::Internal("no unserved source in a pick round".into()))?;
        served.insert(source);
        let item = state
            .favorite_pool_item(source)?
            .ok_or_else(|| Error::Internal("empty pool mid-round".into()))?;
        state.assign(source, item)?;
        state.decycle();
    }
    Ok(state.alloc)
}

/// Runs plain ECE rounds feeding exactly `items` in the given order, then
/// stops. Every item must be in the starting pool.
pub(crate) fn run_ece_on_items(
    inst: &Instance,
    start: &Allocation,
    items: &[usize],
) -> Result<Allocation, Error> {
    let mut state = State::new(inst, start.clone())?;
    state.decycle();
    for &item in items {
        if !state.alloc.pool.contains(&item) {
            return Err(Error::InvalidAllocation(format!(
                "item {item} is not available to feed"
            )));
        }
        let sources = state.sources();
        let source = *sources
            .first()
            .ok_or_else(|| Error::Internal("no source after decycle".into()))?;
        state.assign(source, item)?;
        state.decycle();
    }
    Ok(state.alloc)
}

/// Plain Algorithm 1 from the empty allocation: the classic EF1 solver.
pub fn run_plain_ece(inst: &Instance) -> Result<Allocation, Error> {
    let start = Allocation::empty(inst.n, inst.m);
    let policy = EcePolicy::plain(&start);
    run_ece(inst, &start, &policy)
}

/// Theorem-2 variant from the empty allocation: `n` distinct-source
/// pick-favorite rounds, then the plain feed. Produces a 1/2-EFX allocation,
/// and a 1/2-EF one when `m > n`.
pub fn run_pick_favorite_ece(inst: &Instance) -> Result<Allocation, Error> {
    let start = Allocation::empty(inst.n, inst.m);
    let policy = EcePolicy::pick_favorite(inst.n, &start);
    run_ece(inst, &start, &policy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::{check_fairness, is_ef1, max_alpha_efx, FairnessProperty};

    #[test]
    fn decycle_is_identity_on_acyclic_input() {
        let inst = Instance::additive(&[&[3, 1], &[1, 3]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        assert_eq!(decycle(&inst, &alloc).unwrap(), alloc);
    }

    #[test]
    fn decycle_resolves_a_two_cycle() {
        let inst = Instance::additive(&[&[1, 2], &[2, 1]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        let fixed = decycle(&inst, &alloc).unwrap();
        assert_eq!(fixed, Allocation::from_bundles(2, 2, &[&[1], &[0]]).unwrap());
        let g = EnvyGraph::build(&inst, &fixed).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn decycle_resolves_a_three_cycle_to_everyones_favorite() {
        let inst = Instance::additive(&[&[1, 2, 0], &[0, 1, 2], &[2, 0, 1]]);
        let alloc = Allocation::from_bundles(3, 3, &[&[0], &[1], &[2]]).unwrap();
        let fixed = decycle(&inst, &alloc).unwrap();
        for agent in 0..3 {
            assert_eq!(
                inst.value_of(agent, fixed.bundle(agent)).unwrap(),
                Value::from_int(2)
            );
        }
    }

    #[test]
    fn decycle_preserves_bundle_multiset_and_values_never_drop() {
        let inst = Instance::additive(&[&[1, 2, 5], &[5, 1, 2], &[2, 5, 1]]);
        let alloc = Allocation::from_bundles(3, 3, &[&[0], &[1], &[2]]).unwrap();
        let before: Vec<Value> = (0..3)
            .map(|i| inst.value_of(i, alloc.bundle(i)).unwrap())
            .collect();
        let fixed = decycle(&inst, &alloc).unwrap();
        let mut old: Vec<_> = alloc.bundles.clone();
        let mut new: Vec<_> = fixed.bundles.clone();
        old.sort();
        new.sort();
        assert_eq!(old, new, "bundle multiset must be preserved");
        for i in 0..3 {
            assert!(inst.value_of(i, fixed.bundle(i)).unwrap() >= before[i]);
        }
    }

    #[test]
    fn plain_run_matches_the_hand_trace() {
        // Identical valuations (3,2,1): rounds give item 0 to agent 0, then
        // items 1 and 2 to agent 1, who stays the unique source.
        let inst = Instance::additive(&[&[3, 2, 1], &[3, 2, 1]]);
        let out = run_plain_ece(&inst).unwrap();
        assert_eq!(
            out,
            Allocation::from_bundles(2, 3, &[&[0], &[1, 2]]).unwrap()
        );
        assert!(is_ef1(&inst, &out).unwrap());
    }

    #[test]
    fn one_item_each_when_m_equals_n() {
        let inst = Instance::additive(&[&[4, 1, 2], &[2, 4, 1], &[1, 2, 4]]);
        let out = run_plain_ece(&inst).unwrap();
        assert!(out.is_complete());
        assert!(out.bundles.iter().all(|b| b.len() == 1));
    }

    #[test]
    fn pick_favorite_trace_and_half_ef() {
        let inst = Instance::additive(&[&[5, 4, 3, 0], &[4, 5, 0, 3]]);
        let mut trace = Vec::new();
        let start = Allocation::empty(2, 4);
        let policy = EcePolicy::pick_favorite(2, &start);
        let out = run_ece_traced(&inst, &start, &policy, &mut trace).unwrap();
        // Agent 0 picks item 0, agent 1 picks item 1.
        assert_eq!((trace[0].source, trace[0].item), (0, 0));
        assert_eq!((trace[1].source, trace[1].item), (1, 1));
        let half_ef = FairnessProperty::alpha_ef(Value::ratio(1, 2)).unwrap();
        assert!(check_fairness(&inst, &out, &half_ef).unwrap().verdict);
        assert!(max_alpha_efx(&inst, &out).unwrap() >= Value::ratio(1, 2));
    }

    #[test]
    fn ece_from_partial_start_completes_without_losing_value() {
        let inst = Instance::additive(&[&[4, 4, 1, 1], &[4, 4, 1, 1]]);
        let start = Allocation::from_bundles(2, 4, &[&[0], &[1]]).unwrap();
        let before: Vec<Value> = (0..2)
            .map(|i| inst.value_of(i, start.bundle(i)).unwrap())
            .collect();
        let policy = EcePolicy::plain(&start);
        let out = run_ece(&inst, &start, &policy).unwrap();
        assert!(out.is_complete());
        for i in 0..2 {
            assert!(inst.value_of(i, out.bundle(i)).unwrap() >= before[i]);
        }
    }

    #[test]
    fn fixed_sequence_must_cover_the_pool() {
        let inst = Instance::additive(&[&[1, 1], &[1, 1]]);
        let start = Allocation::empty(2, 2);
        let policy = EcePolicy {
            item_order: ItemOrder::FixedSequence(vec![0]),
            rounds_with_pick: 0,
        };
        assert!(run_ece(&inst, &start, &policy).is_err());
    }

    #[test]
    fn trace_serializes_with_one_based_source() {
        let t = RoundTrace { round: 1, source: 0, item: 3, cycles_rotated: 2 };
        assert_eq!(
            serde_json::to_string(&t).unwrap(),
            r#"{"round":1,"source":1,"item":3,"cycles_rotated":2}"#
        );
    }
}
