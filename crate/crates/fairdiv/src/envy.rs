//! The envy graph of an allocation and its structural queries.

use std::collections::{BTreeSet, VecDeque};

use crate::allocation::Allocation;
use crate::error::Error;
use crate::instance::Instance;
use crate::value::Value;

/// Directed graph over agents with an edge `(i, j)` exactly when agent `i`
/// values `j`'s bundle strictly more than her own. Ties produce no edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyGraph {
    adj: Vec<Vec<usize>>,
}

/// Result of a topological leveling attempt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EnvyLevels {
    /// `levels[i]` is agent `i`'s level: sources sit at level 0 and every
    /// incoming edge comes from a strictly lower level.
    Acyclic { levels: Vec<usize> },
    /// The graph contains a directed cycle, reported as an agent sequence
    /// `c[0] -> c[1] -> ... -> c[0]`.
    CycleDetected { cycle: Vec<usize> },
}

impl EnvyGraph {
    pub fn from_adjacency(adj: Vec<Vec<usize>>) -> Self {
        EnvyGraph { adj }
    }

    /// Builds the envy graph of `alloc` under `inst`, comparing bundle values
    /// in exact arithmetic.
    pub fn build(inst: &Instance, alloc: &Allocation) -> Result<Self, Error> {
        alloc.validate(inst)?;
        let own: Vec<Value> = inst
            .agents()
            .map(|i| inst.value_of(i, alloc.bundle(i)))
            .collect::<Result<_, _>>()?;
        let mut adj = vec![Vec::new(); inst.n];
        for i in inst.agents() {
            for j in inst.agents() {
                if i != j && own[i] < inst.value_of(i, alloc.bundle(j))? {
                    adj[i].push(j);
                }
            }
        }
        Ok(EnvyGraph { adj })
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn envies(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(i, out)| out.iter().map(move |&j| (i, j)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum()
    }

    /// Agents with no incoming envy edge, ascending.
    pub fn sources(&self) -> Vec<usize> {
        let mut envied = vec![false; self.n()];
        for (_, j) in self.edges() {
            envied[j] = true;
        }
        (0..self.n()).filter(|&i| !envied[i]).collect()
    }

    /// Finds a deterministic cycle: the shortest cycle through the
    /// lowest-index agent lying on any cycle (BFS ties broken by agent index).
    pub fn find_cycle(&self) -> Option<Vec<usize>> {
        for start in 0..self.n() {
            if let Some(cycle) = self.shortest_cycle_through(start) {
                return Some(cycle);
            }
        }
        None
    }

    /// Shortest cycle `start -> ... -> start`, if one exists. BFS explores
    /// neighbors in ascending index order, so the result is deterministic.
    fn shortest_cycle_through(&self, start: usize) -> Option<Vec<usize>> {
        let mut parent = vec![usize::MAX; self.n()];
        let mut queue = VecDeque::new();
        // Seed with start's successors; a path back to start closes a cycle.
        for &next in &self.adj[start] {
            if next == start {
                continue;
            }
            if parent[next] == usize::MAX {
                parent[next] = start;
                queue.push_back(next);
            }
        }
        while let Some(at) = queue.pop_front() {
            for &next in &self.adj[at] {
                if next == start {
                    let mut cycle = vec![at];
                    let mut cur = at;
                    while cur != start {
                        cur = parent[cur];
                        cycle.push(cur);
                    }
                    cycle.reverse();
                    return Some(cycle);
                }
                if parent[next] == usize::MAX {
                    parent[next] = at;
                    queue.push_back(next);
                }
            }
        }
        None
    }

    /// Topological levels, or the detected cycle. In the acyclic case level 0
    /// holds the sources and each agent sits one past her highest-level
    /// envier.
    pub fn levels(&self) -> EnvyLevels {
        if let Some(cycle) = self.find_cycle() {
            return EnvyLevels::CycleDetected { cycle };
        }
        let n = self.n();
        let mut indegree = vec![0usize; n];
        for (_, j) in self.edges() {
            indegree[j] += 1;
        }
        let mut levels = vec![0usize; n];
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut done = 0;
        while let Some(&i) = ready.iter().next() {
            ready.remove(&i);
            done += 1;
            for &j in &self.adj[i] {
                levels[j] = levels[j].max(levels[i] + 1);
                indegree[j] -= 1;
                if indegree[j] == 0 {
                    ready.insert(j);
                }
            }
        }
        debug_assert_eq!(done, n, "cycle missed by find_cycle");
        EnvyLevels::Acyclic { levels }
    }

    pub fn is_acyclic(&self) -> bool {
        self.find_cycle().is_none()
    }
}

/// Convenience wrapper for [`EnvyGraph::build`].
pub fn build_envy_graph(inst: &Instance, alloc: &Allocation) -> Result<EnvyGraph, Error> {
    EnvyGraph::build(inst, alloc)
}

/// Convenience wrapper for [`EnvyGraph::levels`].
pub fn envy_levels(graph: &EnvyGraph) -> EnvyLevels {
    graph.levels()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::Allocation;
    use crate::instance::Instance;

    #[test]
    fn symmetric_singletons_have_no_edges() {
        let inst = Instance::additive(&[&[1, 1], &[1, 1]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        let g = EnvyGraph::build(&inst, &alloc).unwrap();
        assert_eq!(g.edge_count(), 0);
        assert_eq!(g.sources(), vec![0, 1]);
    }

    #[test]
    fn crossed_preferences_give_a_two_cycle() {
        let inst = Instance::additive(&[&[1, 2], &[2, 1]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        let g = EnvyGraph::build(&inst, &alloc).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (1, 0)]);
        match g.levels() {
            EnvyLevels::CycleDetected { cycle } => assert_eq!(cycle, vec![0, 1]),
            other => panic!("expected a cycle, got {other:?}"),
        }
    }

    #[test]
    fn identical_values_rank_toward_the_best_bundle() {
        let inst = Instance::additive(&[&[3, 2, 1], &[3, 2, 1], &[3, 2, 1]]);
        let alloc = Allocation::from_bundles(3, 3, &[&[0], &[1], &[2]]).unwrap();
        let g = EnvyGraph::build(&inst, &alloc).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(1, 0), (2, 0), (2, 1)]);
    }

    #[test]
    fn levels_of_a_path_graph() {
        let g = EnvyGraph::from_adjacency(vec![vec![1], vec![2], vec![]]);
        assert_eq!(
            g.levels(),
            EnvyLevels::Acyclic { levels: vec![0, 1, 2] }
        );
        let empty = EnvyGraph::from_adjacency(vec![vec![], vec![], vec![]]);
        assert_eq!(
            empty.levels(),
            EnvyLevels::Acyclic { levels: vec![0, 0, 0] }
        );
    }

    #[test]
    fn ties_produce_no_envy_edge() {
        let inst = Instance::additive(&[&[2, 2], &[2, 2]]);
        let alloc = Allocation::from_bundles(2, 2, &[&[0], &[1]]).unwrap();
        let g = EnvyGraph::build(&inst, &alloc).unwrap();
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn no_self_loops_on_random_allocations() {
        let inst = Instance::additive(&[&[5, 1, 3], &[1, 5, 3], &[3, 3, 3]]);
        for bundles in [[&[0][..], &[1][..], &[2][..]], [&[0, 1][..], &[][..], &[2][..]]] {
            let alloc = Allocation::from_bundles(3, 3, &bundles).unwrap();
            let g = EnvyGraph::build(&inst, &alloc).unwrap();
            assert!(g.edges().all(|(i, j)| i != j));
        }
    }
}
