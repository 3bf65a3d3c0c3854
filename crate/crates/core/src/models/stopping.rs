use std::sync::Arc;

use super::{leaf_paths, ModelError};
use crate::integrand::{bounded_horizon, GridDomain, Integrand, IntegrandError, XReal};
use crate::lattice::{NodeId, ScenarioTree};
use crate::strategy::AdaptedStrategy;

/// Optimal stopping of an adapted reward `G`, encoded through decreasing
/// `{0,1}` holdings `h_0, …, h_{T−1}` with `h_{−1} = 1` and `h_T = 0`:
/// `Ψ(h) = Σ_{t=0}^{T} (h_{t−1} − h_t)·G_t`.
#[derive(Debug, Clone)]
pub struct Stopping {
    /// Reward at every node, by global id.
    rewards: Arc<Vec<XReal>>,
    paths: Arc<Vec<Vec<usize>>>,
    finite_somewhere: Arc<Vec<bool>>,
    bound: f64,
    domain: GridDomain,
}

/// A stopping time as its value on every leaf.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StoppingTime {
    pub per_leaf: Vec<usize>,
}

impl StoppingTime {
    /// Whether `{τ = t}` is decided by the history up to `t` for all `t`.
    pub fn is_adapted(&self, tree: &ScenarioTree) -> bool {
        if self.per_leaf.len() != tree.leaf_count() || self.per_leaf.iter().any(|&t| t > tree.horizon()) {
            return false;
        }
        for depth in 0..tree.horizon() {
            for i in 0..tree.nodes_at(depth) {
                let node = NodeId { depth, index: i };
                let taus: Vec<usize> = leaves_below(tree, node)
                    .map(|l| self.per_leaf[l])
                    .collect();
                let stopped = taus.iter().any(|&t| t <= depth);
                if stopped && taus.iter().any(|&t| t != taus[0]) {
                    return false;
                }
            }
        }
        true
    }

    /// Every stopping time, found by deciding at each node whether to stop
    /// there or defer to the children.
    pub fn enumerate(tree: &ScenarioTree) -> Vec<StoppingTime> {
        fn rec(tree: &ScenarioTree, node: NodeId) -> Vec<Vec<(usize, usize)>> {
            let stop: Vec<(usize, usize)> = leaves_below(tree, node).map(|l| (l, node.depth)).collect();
            if node.depth == tree.horizon() {
                return vec![stop];
            }
            let mut out = vec![stop];
            let mut partial: Vec<Vec<(usize, usize)>> = vec![vec![]];
            for child in tree.children(node) {
                let sub = rec(tree, child);
                partial = partial
                    .iter()
                    .flat_map(|p| {
                        sub.iter().map(move |s| {
                            let mut q = p.clone();
                            q.extend(s.iter().copied());
                            q
                        })
                    })
                    .collect();
            }
            out.extend(partial);
            out
        }
        rec(tree, NodeId::ROOT)
            .into_iter()
            .map(|assign| {
                let mut per_leaf = vec![0; tree.leaf_count()];
                for (l, t) in assign {
                    per_leaf[l] = t;
                }
                StoppingTime { per_leaf }
            })
            .collect()
    }
}

fn leaves_below(tree: &ScenarioTree, node: NodeId) -> impl Iterator<Item = usize> {
    let width: usize = (node.depth..tree.horizon()).map(|d| tree.branching(d)).product();
    node.index * width..(node.index + 1) * width
}

/// `τ = inf{t : h_t = 0}` with the convention `h_T = 0`.
pub fn stopping_time(holdings: &[usize]) -> usize {
    holdings
        .iter()
        .position(|&h| h == 0)
        .unwrap_or(holdings.len())
}

/// Holdings `h_0..h_{T−1}` equal to 1 strictly before `τ` and 0 after.
pub fn holdings_from_stopping_time(tau: usize, horizon: usize) -> Vec<usize> {
    (0..horizon).map(|t| usize::from(t < tau)).collect()
}

impl Stopping {
    /// `rewards` gives `G` at every node by global id; `−∞` is allowed.
    pub fn new(tree: &ScenarioTree, rewards: Vec<XReal>) -> Result<Self, ModelError> {
        if rewards.len() != tree.node_count() {
            return Err(ModelError::Length {
                what: "reward process".into(),
                got: rewards.len(),
                expected: tree.node_count(),
            });
        }
        let periods = vec![vec![vec![0.0], vec![1.0]]; tree.horizon()];
        let domain = GridDomain::new(periods, None)?;
        let bound = rewards
            .iter()
            .filter_map(|g| g.finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let bound = if bound.is_finite() { bound } else { 0.0 };
        let paths = leaf_paths(tree);
        let finite_somewhere = paths
            .iter()
            .map(|p| p.iter().any(|&id| rewards[id].is_finite()))
            .collect();
        Ok(Self {
            rewards: Arc::new(rewards),
            paths: Arc::new(paths),
            finite_somewhere: Arc::new(finite_somewhere),
            bound,
            domain,
        })
    }

    pub fn reward(&self, id: usize) -> XReal {
        self.rewards[id]
    }

    /// `G_τ` on the path to `leaf`.
    pub fn stopped_reward(&self, leaf: usize, tau: usize) -> XReal {
        self.rewards[self.paths[leaf][tau]]
    }

    /// Holdings of a stopping time as an adapted strategy.
    pub fn strategy_of(&self, tree: &ScenarioTree, tau: &StoppingTime) -> AdaptedStrategy {
        let mut actions = vec![0; tree.internal_node_count()];
        for (leaf, &t) in tau.per_leaf.iter().enumerate() {
            for (depth, &id) in self.paths[leaf][..tree.horizon()].iter().enumerate() {
                actions[id] = usize::from(depth < t);
            }
        }
        AdaptedStrategy { actions }
    }

    /// Stopping time of an adapted holdings strategy.
    pub fn stopping_time_of(&self, tree: &ScenarioTree, h: &AdaptedStrategy) -> StoppingTime {
        let per_leaf = (0..tree.leaf_count())
            .map(|l| stopping_time(&h.along(tree, l)))
            .collect();
        StoppingTime { per_leaf }
    }
}

impl Integrand for Stopping {
    fn name(&self) -> &'static str {
        "stopping"
    }

    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn upper_bound(&self) -> f64 {
        self.bound
    }

    fn leaf_count(&self) -> usize {
        self.paths.len()
    }

    fn feasible_actions(&self, t: usize, prefix: &[usize]) -> Result<Vec<usize>, IntegrandError> {
        if prefix.len() != t || t >= self.domain.horizon() || prefix.windows(2).any(|w| w[1] > w[0]) || prefix.iter().any(|&a| a > 1) {
            return Err(IntegrandError::InfeasiblePrefix(t));
        }
        Ok(match prefix.last() {
            Some(0) => vec![0],
            _ => vec![0, 1],
        })
    }

    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal {
        let path = &self.paths[leaf];
        let horizon = actions.len();
        let mut acc = XReal::ZERO;
        let mut prev = 1usize;
        for t in 0..=horizon {
            let h = if t < horizon { actions[t] } else { 0 };
            if prev != h {
                // only nonzero coefficients contribute, so −∞ rewards
                // at unstopped times stay out of the sum
                let coef = prev as f64 - h as f64;
                acc = acc + self.rewards[path[t]].scale(coef.max(0.0));
            }
            prev = h;
        }
        acc
    }

    fn horizon_analytic(&self, leaf: usize, x: &[f64]) -> Result<XReal, IntegrandError> {
        Ok(bounded_horizon(self.finite_somewhere[leaf], x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::integrand::feasible_strategies;

    fn binary(horizon: usize) -> ScenarioTree {
        ScenarioTree::new(vec![vec![vec![1.0], vec![2.0]]; horizon]).unwrap()
    }

    fn deterministic(tree: &ScenarioTree, g: &[f64]) -> Stopping {
        let rewards = (0..tree.node_count())
            .map(|id| XReal::from_f64(g[tree.from_global(id).depth]))
            .collect();
        Stopping::new(tree, rewards).unwrap()
    }

    #[test]
    fn feasibility_is_monotone() {
        let t = binary(3);
        let m = deterministic(&t, &[0.0, 2.0, 1.0, 0.0]);
        assert_eq!(m.feasible_actions(1, &[1]).unwrap(), vec![0, 1]);
        assert_eq!(m.feasible_actions(1, &[0]).unwrap(), vec![0]);
        assert!(m.feasible_actions(2, &[0, 1]).is_err());
        assert_eq!(feasible_strategies(&m).len(), 4);
    }

    #[test]
    fn stop_at_zero_pays_g0() {
        let t = binary(2);
        let m = deterministic(&t, &[0.5, 2.0, 1.0]);
        assert_eq!(m.terminal_value(3, &[0, 0]).to_f64(), 0.5);
        assert_eq!(m.terminal_value(3, &[1, 0]).to_f64(), 2.0);
        assert_eq!(m.terminal_value(3, &[1, 1]).to_f64(), 1.0);
    }

    #[test]
    fn unstopped_neg_inf_is_ignored() {
        let t = binary(1);
        let rewards = vec![XReal::from_f64(1.0), XReal::NEG_INF, XReal::NEG_INF];
        let m = Stopping::new(&t, rewards).unwrap();
        assert_eq!(m.terminal_value(0, &[0]).to_f64(), 1.0);
        assert!(m.terminal_value(0, &[1]).is_neg_inf());
        assert_eq!(m.upper_bound(), 1.0);
    }

    #[test]
    fn five_stopping_times_on_two_period_binary_tree() {
        let t = binary(2);
        let all = StoppingTime::enumerate(&t);
        assert_eq!(all.len(), 5);
        let m = deterministic(&t, &[0.0, 0.0, 0.0]);
        for tau in &all {
            assert!(tau.is_adapted(&t));
            let h = m.strategy_of(&t, tau);
            assert!(h.is_feasible(&t, &m));
            assert_eq!(&m.stopping_time_of(&t, &h), tau);
        }
    }

    #[test]
    fn path_bijection_round_trip() {
        for horizon in 1..5 {
            for tau in 0..=horizon {
                let h = holdings_from_stopping_time(tau, horizon);
                assert_eq!(stopping_time(&h), tau);
            }
        }
        assert_eq!(stopping_time(&[1, 0, 0]), 1);
        assert_eq!(stopping_time(&[1, 1]), 2);
    }

    #[test]
    fn telescoping_weights_sum_to_one() {
        let t = binary(3);
        let m = deterministic(&t, &[1.0, 1.0, 1.0, 1.0]);
        for s in feasible_strategies(&m) {
            assert_eq!(m.terminal_value(0, &s).to_f64(), 1.0);
        }
    }

    #[test]
    fn non_adapted_time_is_rejected() {
        let t = binary(1);
        assert!(!StoppingTime { per_leaf: vec![0, 1] }.is_adapted(&t));
        assert!(StoppingTime { per_leaf: vec![1, 1] }.is_adapted(&t));
    }
}
