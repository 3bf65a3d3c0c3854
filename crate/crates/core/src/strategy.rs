//! Adapted strategies on a scenario tree.

use serde::{Deserialize, Serialize};

use crate::integrand::Integrand;
use crate::lattice::{NodeId, ScenarioTree};

/// One action index per non-leaf node, keyed by global node id, so the
/// action at depth `t` depends only on the history up to `t`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdaptedStrategy {
    pub actions: Vec<usize>,
}

impl AdaptedStrategy {
    /// The zero action at every node.
    pub fn zero(tree: &ScenarioTree, model: &dyn Integrand) -> Self {
        let dom = model.domain();
        let actions = (0..tree.internal_node_count())
            .map(|id| dom.zero_action(tree.from_global(id).depth))
            .collect();
        Self { actions }
    }

    /// Action sequence realized along the path to `leaf`.
    pub fn along(&self, tree: &ScenarioTree, leaf: usize) -> Vec<usize> {
        let leaf = tree.leaf(leaf);
        (0..tree.horizon())
            .map(|d| self.actions[tree.global(tree.ancestor(leaf, d))])
            .collect()
    }

    pub fn action_at(&self, tree: &ScenarioTree, node: NodeId) -> usize {
        self.actions[tree.global(node)]
    }

    /// Whether every realized path is a feasible strategy of `model`.
    pub fn is_feasible(&self, tree: &ScenarioTree, model: &dyn Integrand) -> bool {
        (0..tree.leaf_count()).all(|l| model.is_feasible(&self.along(tree, l)))
    }

    /// Flat real vector realized along the path to `leaf`.
    pub fn realized(&self, tree: &ScenarioTree, model: &dyn Integrand, leaf: usize) -> Vec<f64> {
        model.domain().flatten(&self.along(tree, leaf))
    }

    /// Whether the strategy is the zero action at every node in `relevant`.
    pub fn is_zero_on(&self, tree: &ScenarioTree, model: &dyn Integrand, relevant: &[bool]) -> bool {
        self.actions.iter().enumerate().all(|(id, &a)| {
            !relevant[id] || a == model.domain().zero_action(tree.from_global(id).depth)
        })
    }
}
