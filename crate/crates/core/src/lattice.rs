//! Finite scenario lattices and per-node ambiguity kernels.
//!
//! A [`ScenarioTree`] is the product lattice `Ω₁ × … × Ω_T` where period `t`
//! draws one outcome from its own finite outcome list. Nodes at depth `t` are
//! indexed lexicographically by the outcome indices of their path, so the
//! children of node `i` at depth `t` are `i·b .. (i+1)·b` at depth `t + 1`,
//! with `b` the outcome count of period `t + 1`.
//!
//! An [`AmbiguityKernel`] attaches to every non-leaf node a nonempty finite
//! list of probability vectors over that node's children. A measure in the
//! ambiguity family is a [`KernelSelection`]: one vector chosen per node.

use thiserror::Error;

use crate::integrand::XReal;

/// Ingestion tolerance on probability vector sums.
pub const PROB_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("scenario tree needs at least one period")]
    NoStages,
    #[error("period {0} has no outcomes")]
    EmptyStage(usize),
    #[error("period {period} outcome {outcome} has dimension {got}, expected {expected}")]
    OutcomeDimension {
        period: usize,
        outcome: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite outcome value in period {0}")]
    NonFiniteOutcome(usize),
    #[error("dimension mismatch: {values} values but {probs} probabilities")]
    DimensionMismatch { values: usize, probs: usize },
    #[error("kernel for node {node} is empty")]
    EmptyKernel { node: usize },
    #[error("kernel list count {got} does not match the {expected} non-leaf nodes")]
    KernelNodeCount { got: usize, expected: usize },
    #[error("kernel vector {vector} at node {node} has {got} entries, node has {expected} children")]
    KernelLength {
        node: usize,
        vector: usize,
        got: usize,
        expected: usize,
    },
    #[error("kernel vector {vector} at node {node} is not a probability vector: {reason}")]
    NotProbability {
        node: usize,
        vector: usize,
        reason: String,
    },
    #[error("binomial band is invalid: {0}")]
    Band(String),
}

/// Position of a node in the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId {
    pub depth: usize,
    pub index: usize,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId { depth: 0, index: 0 };
}

#[derive(Debug, Clone)]
pub struct ScenarioTree {
    stages: Vec<Vec<Vec<f64>>>,
    /// Number of nodes at each depth 0..=T.
    level_sizes: Vec<usize>,
    /// Global id of the first node at each depth.
    offsets: Vec<usize>,
    outcome_dim: usize,
}

impl ScenarioTree {
    /// Builds the product lattice from per-period outcome lists.
    pub fn new(stages: Vec<Vec<Vec<f64>>>) -> Result<Self, LatticeError> {
        if stages.is_empty() {
            return Err(LatticeError::NoStages);
        }
        let outcome_dim = stages
            .iter()
            .find_map(|s| s.first().map(Vec::len))
            .unwrap_or(0);
        for (period, stage) in stages.iter().enumerate() {
            if stage.is_empty() {
                return Err(LatticeError::EmptyStage(period + 1));
            }
            for (outcome, v) in stage.iter().enumerate() {
                if v.len() != outcome_dim {
                    return Err(LatticeError::OutcomeDimension {
                        period: period + 1,
                        outcome,
                        got: v.len(),
                        expected: outcome_dim,
                    });
                }
                if v.iter().any(|x| !x.is_finite()) {
                    return Err(LatticeError::NonFiniteOutcome(period + 1));
                }
            }
        }
        let mut level_sizes = vec![1usize];
        for stage in &stages {
            let last = *level_sizes.last().unwrap();
            level_sizes.push(last * stage.len());
        }
        let mut offsets = Vec::with_capacity(level_sizes.len());
        let mut acc = 0;
        for &n in &level_sizes {
            offsets.push(acc);
            acc += n;
        }
        Ok(Self {
            stages,
            level_sizes,
            offsets,
            outcome_dim,
        })
    }

    /// Number of periods `T`.
    pub fn horizon(&self) -> usize {
        self.stages.len()
    }

    pub fn outcome_dim(&self) -> usize {
        self.outcome_dim
    }

    /// Outcome lists per period (period `t + 1` at index `t`).
    pub fn stages(&self) -> &[Vec<Vec<f64>>] {
        &self.stages
    }

    /// Children per node at `depth` (outcome count of period `depth + 1`).
    pub fn branching(&self, depth: usize) -> usize {
        self.stages[depth].len()
    }

    pub fn nodes_at(&self, depth: usize) -> usize {
        self.level_sizes[depth]
    }

    pub fn node_count(&self) -> usize {
        self.offsets[self.horizon()] + self.level_sizes[self.horizon()]
    }

    /// Nodes with depth < T; these carry kernels and decisions.
    pub fn internal_node_count(&self) -> usize {
        self.offsets[self.horizon()]
    }

    pub fn leaf_count(&self) -> usize {
        self.level_sizes[self.horizon()]
    }

    pub fn global(&self, node: NodeId) -> usize {
        self.offsets[node.depth] + node.index
    }

    pub fn from_global(&self, id: usize) -> NodeId {
        let depth = match self.offsets.binary_search(&id) {
            Ok(d) => d,
            Err(d) => d - 1,
        };
        NodeId {
            depth,
            index: id - self.offsets[depth],
        }
    }

    pub fn leaf(&self, index: usize) -> NodeId {
        NodeId {
            depth: self.horizon(),
            index,
        }
    }

    pub fn children(&self, node: NodeId) -> impl Iterator<Item = NodeId> {
        let b = self.branching(node.depth);
        let depth = node.depth + 1;
        (node.index * b..(node.index + 1) * b).map(move |index| NodeId { depth, index })
    }

    pub fn parent(&self, node: NodeId) -> Option<NodeId> {
        if node.depth == 0 {
            return None;
        }
        let b = self.branching(node.depth - 1);
        Some(NodeId {
            depth: node.depth - 1,
            index: node.index / b,
        })
    }

    /// Ancestor of `node` at `depth` (the node itself when depths agree).
    pub fn ancestor(&self, node: NodeId, depth: usize) -> NodeId {
        let mut index = node.index;
        for d in (depth..node.depth).rev() {
            index /= self.branching(d);
        }
        NodeId { depth, index }
    }

    /// Nodes on the path from the root to `node`, root first.
    pub fn path_nodes(&self, node: NodeId) -> Vec<NodeId> {
        (0..=node.depth).map(|d| self.ancestor(node, d)).collect()
    }

    /// Outcome indices of the path leading to `node`.
    pub fn encode_path(&self, node: NodeId) -> Vec<usize> {
        let mut path = vec![0; node.depth];
        let mut index = node.index;
        for d in (0..node.depth).rev() {
            let b = self.branching(d);
            path[d] = index % b;
            index /= b;
        }
        path
    }

    /// Inverse of [`encode_path`](Self::encode_path).
    pub fn decode_path(&self, path: &[usize]) -> Option<NodeId> {
        if path.len() > self.horizon() {
            return None;
        }
        let mut index = 0;
        for (d, &k) in path.iter().enumerate() {
            let b = self.branching(d);
            if k >= b {
                return None;
            }
            index = index * b + k;
        }
        Some(NodeId {
            depth: path.len(),
            index,
        })
    }

    /// Outcome realized on the last step into `node` (depth ≥ 1).
    pub fn outcome(&self, node: NodeId) -> &[f64] {
        assert!(node.depth >= 1, "the root has no incoming outcome");
        let b = self.branching(node.depth - 1);
        &self.stages[node.depth - 1][node.index % b]
    }

    /// Position of `node` among its siblings.
    pub fn child_slot(&self, node: NodeId) -> usize {
        node.index % self.branching(node.depth - 1)
    }

    /// Internal nodes of the subtree rooted at `root`, in depth-major order.
    pub fn subtree_internal(&self, root: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut level = vec![root];
        while let Some(first) = level.first() {
            if first.depth >= self.horizon() {
                break;
            }
            out.extend(level.iter().copied());
            level = level.iter().flat_map(|&n| self.children(n)).collect();
        }
        out
    }
}

/// Fixed-order expectation over children with the extended-real rules:
/// zero weights are skipped, and a `−∞` child under positive weight absorbs.
pub fn expectation(values: &[XReal], probs: &[f64]) -> Result<XReal, LatticeError> {
    if values.len() != probs.len() {
        return Err(LatticeError::DimensionMismatch {
            values: values.len(),
            probs: probs.len(),
        });
    }
    Ok(expectation_unchecked(values, probs))
}

#[inline]
pub(crate) fn expectation_unchecked(values: &[XReal], probs: &[f64]) -> XReal {
    let mut acc = 0.0;
    for (v, &p) in values.iter().zip(probs) {
        if p == 0.0 {
            continue;
        }
        match v.finite() {
            Some(x) => acc += p * x,
            None => return XReal::NEG_INF,
        }
    }
    XReal::from_f64(acc)
}

/// Per-node finite sets of one-step laws.
#[derive(Debug, Clone)]
pub struct AmbiguityKernel {
    /// Indexed by global id of the non-leaf nodes.
    lists: Vec<Vec<Vec<f64>>>,
    /// Node reachable with positive probability under some selection.
    relevant: Vec<bool>,
}

impl AmbiguityKernel {
    /// Kernel lists given per non-leaf node, in global id order.
    pub fn new(tree: &ScenarioTree, lists: Vec<Vec<Vec<f64>>>) -> Result<Self, LatticeError> {
        let expected = tree.internal_node_count();
        if lists.len() != expected {
            return Err(LatticeError::KernelNodeCount {
                got: lists.len(),
                expected,
            });
        }
        let mut lists = lists;
        for (id, list) in lists.iter_mut().enumerate() {
            let node = tree.from_global(id);
            if list.is_empty() {
                return Err(LatticeError::EmptyKernel { node: id });
            }
            let b = tree.branching(node.depth);
            for (k, v) in list.iter_mut().enumerate() {
                if v.len() != b {
                    return Err(LatticeError::KernelLength {
                        node: id,
                        vector: k,
                        got: v.len(),
                        expected: b,
                    });
                }
                normalize(v).map_err(|reason| LatticeError::NotProbability {
                    node: id,
                    vector: k,
                    reason,
                })?;
            }
        }
        let relevant = reachability(tree, &lists);
        Ok(Self { lists, relevant })
    }

    /// Same list of vectors at every node of a given depth.
    pub fn homogeneous(
        tree: &ScenarioTree,
        per_depth: &[Vec<Vec<f64>>],
    ) -> Result<Self, LatticeError> {
        if per_depth.len() != tree.horizon() {
            return Err(LatticeError::KernelNodeCount {
                got: per_depth.len(),
                expected: tree.horizon(),
            });
        }
        let mut lists = Vec::with_capacity(tree.internal_node_count());
        for (depth, list) in per_depth.iter().enumerate() {
            for _ in 0..tree.nodes_at(depth) {
                lists.push(list.clone());
            }
        }
        Self::new(tree, lists)
    }

    /// Every Dirac measure on the children of every node.
    pub fn dirac(tree: &ScenarioTree) -> Self {
        let per_depth: Vec<Vec<Vec<f64>>> = (0..tree.horizon())
            .map(|d| {
                let b = tree.branching(d);
                (0..b)
                    .map(|k| {
                        let mut v = vec![0.0; b];
                        v[k] = 1.0;
                        v
                    })
                    .collect()
            })
            .collect();
        Self::homogeneous(tree, &per_depth).expect("dirac vectors are valid")
    }

    /// Binomial band family `p·δ_u + (1 − p)·δ_d`: for each up outcome `u`,
    /// down outcome `d` and up-probability `p`, one vector per node.
    pub fn binomial_band(
        tree: &ScenarioTree,
        up: &[usize],
        down: &[usize],
        probs: &[f64],
    ) -> Result<Self, LatticeError> {
        if up.is_empty() || down.is_empty() || probs.is_empty() {
            return Err(LatticeError::Band("up, down and p lists must be nonempty".into()));
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(LatticeError::Band(format!("probability {p} outside [0, 1]")));
        }
        let mut per_depth = Vec::with_capacity(tree.horizon());
        for depth in 0..tree.horizon() {
            let b = tree.branching(depth);
            if let Some(k) = up.iter().chain(down).find(|&&k| k >= b) {
                return Err(LatticeError::Band(format!(
                    "outcome index {k} out of range at depth {depth}"
                )));
            }
            let mut list = Vec::new();
            for &u in up {
                for &d in down {
                    if u == d {
                        return Err(LatticeError::Band(format!(
                            "outcome {u} is both up and down"
                        )));
                    }
                    for &p in probs {
                        let mut v = vec![0.0; b];
                        v[u] = p;
                        v[d] = 1.0 - p;
                        list.push(v);
                    }
                }
            }
            per_depth.push(list);
        }
        Self::homogeneous(tree, &per_depth)
    }

    pub fn vectors(&self, tree: &ScenarioTree, node: NodeId) -> &[Vec<f64>] {
        &self.lists[tree.global(node)]
    }

    pub fn vectors_by_id(&self, id: usize) -> &[Vec<f64>] {
        &self.lists[id]
    }

    /// Whether `node` carries positive probability under some selection.
    pub fn is_relevant(&self, tree: &ScenarioTree, node: NodeId) -> bool {
        self.relevant[tree.global(node)]
    }

    /// Child slots with positive weight under at least one vector.
    pub fn charged_children(&self, tree: &ScenarioTree, node: NodeId) -> Vec<bool> {
        let b = tree.branching(node.depth);
        let mut out = vec![false; b];
        for v in self.vectors(tree, node) {
            for (k, &p) in v.iter().enumerate() {
                if p > 0.0 {
                    out[k] = true;
                }
            }
        }
        out
    }

    /// Number of selections below `root`; `None` when it exceeds `u128`.
    pub fn selection_count(&self, tree: &ScenarioTree, root: NodeId) -> Option<u128> {
        tree.subtree_internal(root)
            .iter()
            .try_fold(1u128, |acc, &n| acc.checked_mul(self.vectors(tree, n).len() as u128))
    }

    /// Streams every selection for the subtree below `root`.
    ///
    /// Nodes outside the subtree keep choice 0.
    pub fn enumerate_selections<'a>(
        &'a self,
        tree: &'a ScenarioTree,
        root: NodeId,
    ) -> Selections<'a> {
        let nodes: Vec<usize> = tree
            .subtree_internal(root)
            .into_iter()
            .map(|n| tree.global(n))
            .collect();
        let radices = nodes.iter().map(|&id| self.lists[id].len()).collect();
        Selections {
            nodes,
            radices,
            current: KernelSelection {
                choices: vec![0; self.lists.len()],
            },
            done: false,
            _kernel: self,
        }
    }
}

fn normalize(v: &mut [f64]) -> Result<(), String> {
    if let Some(p) = v.iter().find(|p| !p.is_finite() || **p < 0.0) {
        return Err(format!("entry {p} is negative or non-finite"));
    }
    let sum: f64 = v.iter().sum();
    if (sum - 1.0).abs() > PROB_TOLERANCE {
        return Err(format!("entries sum to {sum}"));
    }
    if sum != 1.0 {
        v.iter_mut().for_each(|p| *p /= sum);
    }
    Ok(())
}

fn reachability(tree: &ScenarioTree, lists: &[Vec<Vec<f64>>]) -> Vec<bool> {
    let mut relevant = vec![false; tree.node_count()];
    relevant[0] = true;
    for id in 0..tree.internal_node_count() {
        if !relevant[id] {
            continue;
        }
        let node = tree.from_global(id);
        for (k, child) in tree.children(node).enumerate() {
            if lists[id].iter().any(|v| v[k] > 0.0) {
                relevant[tree.global(child)] = true;
            }
        }
    }
    relevant
}

/// One probability vector chosen at every non-leaf node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct KernelSelection {
    /// Index into each node's kernel list, by global node id.
    pub choices: Vec<usize>,
}

impl KernelSelection {
    /// Probability of every node under this selection, by global id.
    pub fn node_probabilities(&self, tree: &ScenarioTree, kernel: &AmbiguityKernel) -> Vec<f64> {
        let mut probs = vec![0.0; tree.node_count()];
        probs[0] = 1.0;
        for id in 0..tree.internal_node_count() {
            let p = probs[id];
            let node = tree.from_global(id);
            let v = &kernel.vectors_by_id(id)[self.choices[id]];
            for (k, child) in tree.children(node).enumerate() {
                probs[tree.global(child)] = p * v[k];
            }
        }
        probs
    }

    /// Probability of each leaf, leaf order.
    pub fn leaf_probabilities(&self, tree: &ScenarioTree, kernel: &AmbiguityKernel) -> Vec<f64> {
        let probs = self.node_probabilities(tree, kernel);
        let first = tree.global(tree.leaf(0));
        probs[first..].to_vec()
    }
}

/// Odometer over the selections of a subtree.
pub struct Selections<'a> {
    nodes: Vec<usize>,
    radices: Vec<usize>,
    current: KernelSelection,
    done: bool,
    _kernel: &'a AmbiguityKernel,
}

impl Iterator for Selections<'_> {
    type Item = KernelSelection;

    fn next(&mut self) -> Option<KernelSelection> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        // advance: last node varies fastest
        self.done = true;
        for pos in (0..self.nodes.len()).rev() {
            let id = self.nodes[pos];
            if self.current.choices[id] + 1 < self.radices[pos] {
                self.current.choices[id] += 1;
                self.done = false;
                break;
            }
            self.current.choices[id] = 0;
        }
        Some(out)
    }
}

/// Path expectation `Σ_leaf P(leaf)·v(leaf)` in leaf order.
pub fn path_expectation(leaf_probs: &[f64], leaf_values: &[XReal]) -> XReal {
    expectation_unchecked(leaf_values, leaf_probs)
}
