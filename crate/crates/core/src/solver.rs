//! Robust backward induction over (node, action prefix) states.
//!
//! With `Ψ_T = Ψ`, the recursion is
//!
//! ```text
//! Φ_t(ω^t, x^{t+1}) = min_{p ∈ kernel(ω^t)} Σ_k p_k Ψ_{t+1}(ω^t ⊗ k, x^{t+1})
//! Ψ_t(ω^t, x^t)     = max_{a feasible after x^t} Φ_t(ω^t, (x^t, a))
//! ```
//!
//! Feasibility of a prefix does not depend on the path, so prefixes are
//! numbered once per level in a [`PrefixTrie`] and every value table is a
//! dense `node × prefix` array.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::integrand::{Integrand, IntegrandError, XReal};
use crate::lattice::{expectation_unchecked, AmbiguityKernel, NodeId, ScenarioTree};
use crate::strategy::AdaptedStrategy;

/// Absolute tolerance for value comparisons.
pub const VALUE_TOLERANCE: f64 = 1e-9;

/// Default selection budget for the explicit policy evaluation route.
pub const DEFAULT_SELECTION_BUDGET: u128 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("infeasible problem: {0}")]
    Infeasible(String),
    #[error("value {value} exceeds the declared upper bound {bound}")]
    UpperBound { value: f64, bound: f64 },
    #[error("internal consistency failure: {0}")]
    Consistency(String),
    #[error("model and tree disagree: {0}")]
    Shape(String),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error("worker pool: {0}")]
    Pool(String),
}

/// A scenario tree, its ambiguity kernels and a payoff.
#[derive(Clone, Copy)]
pub struct Problem<'a> {
    pub tree: &'a ScenarioTree,
    pub kernel: &'a AmbiguityKernel,
    pub model: &'a dyn Integrand,
}

impl<'a> Problem<'a> {
    pub fn new(
        tree: &'a ScenarioTree,
        kernel: &'a AmbiguityKernel,
        model: &'a dyn Integrand,
    ) -> Result<Self, SolverError> {
        if model.leaf_count() != tree.leaf_count() {
            return Err(SolverError::Shape(format!(
                "model has {} leaves, tree has {}",
                model.leaf_count(),
                tree.leaf_count()
            )));
        }
        if model.domain().horizon() != tree.horizon() {
            return Err(SolverError::Shape(format!(
                "domain has {} periods, tree has {}",
                model.domain().horizon(),
                tree.horizon()
            )));
        }
        Ok(Self {
            tree,
            kernel,
            model,
        })
    }

    /// Same problem with a different payoff.
    pub fn with_model(&self, model: &'a dyn Integrand) -> Self {
        Self { model, ..*self }
    }
}

/// Feasible action prefixes, numbered per length.
#[derive(Debug, Clone)]
pub struct PrefixTrie {
    /// `parent[t][p]` for prefixes of length `t ≥ 1`.
    parent: Vec<Vec<usize>>,
    /// Last action of each prefix of length `t ≥ 1`.
    last: Vec<Vec<usize>>,
    /// Extensions of prefix `p` at level `t` are the level-`t+1` prefixes
    /// `start[t][p] .. start[t][p + 1]`.
    start: Vec<Vec<usize>>,
}

impl PrefixTrie {
    pub fn build(model: &dyn Integrand) -> Result<Self, IntegrandError> {
        let horizon = model.domain().horizon();
        let mut parent = vec![vec![]];
        let mut last = vec![vec![]];
        let mut start = Vec::with_capacity(horizon);
        let mut level: Vec<Vec<usize>> = vec![vec![]];
        for t in 0..horizon {
            let mut next = Vec::new();
            let mut next_parent = Vec::new();
            let mut next_last = Vec::new();
            let mut st = Vec::with_capacity(level.len() + 1);
            for (p, prefix) in level.iter().enumerate() {
                st.push(next.len());
                for a in model.feasible_actions(t, prefix)? {
                    let mut q = prefix.clone();
                    q.push(a);
                    next.push(q);
                    next_parent.push(p);
                    next_last.push(a);
                }
            }
            st.push(next.len());
            start.push(st);
            parent.push(next_parent);
            last.push(next_last);
            level = next;
        }
        Ok(Self {
            parent,
            last,
            start,
        })
    }

    pub fn horizon(&self) -> usize {
        self.start.len()
    }

    /// Number of feasible prefixes of length `t`.
    pub fn len(&self, t: usize) -> usize {
        if t == 0 {
            1
        } else {
            self.last[t].len()
        }
    }

    pub fn is_empty(&self, t: usize) -> bool {
        self.len(t) == 0
    }

    pub fn extensions(&self, t: usize, p: usize) -> std::ops::Range<usize> {
        self.start[t][p]..self.start[t][p + 1]
    }

    /// Last action of prefix `c` of length `t ≥ 1`.
    pub fn action(&self, t: usize, c: usize) -> usize {
        self.last[t][c]
    }

    pub fn parent(&self, t: usize, c: usize) -> usize {
        self.parent[t][c]
    }

    /// Action sequence of prefix `p` of length `t`.
    pub fn actions(&self, t: usize, mut p: usize) -> Vec<usize> {
        let mut out = vec![0; t];
        for s in (1..=t).rev() {
            out[s - 1] = self.last[s][p];
            p = self.parent[s][p];
        }
        out
    }

    /// Id of a prefix given by its action indices.
    pub fn find(&self, actions: &[usize]) -> Option<usize> {
        let mut p = 0;
        for (t, &a) in actions.iter().enumerate() {
            if t >= self.horizon() {
                return None;
            }
            let r = self.extensions(t, p);
            let lo = r.start;
            // extensions are listed in the order returned by the model
            p = r.into_iter().find(|&c| self.last[t + 1][c] == a)?;
            debug_assert!(p >= lo);
        }
        Some(p)
    }

    /// Extension of prefix `p` (length `t`) by action `a`.
    pub fn child(&self, t: usize, p: usize, a: usize) -> Option<usize> {
        self.extensions(t, p).find(|&c| self.last[t + 1][c] == a)
    }
}

/// `Ψ_t` and `Φ_t` on every (node, feasible prefix) cell.
#[derive(Debug, Clone)]
pub struct ValueField {
    pub trie: PrefixTrie,
    /// `psi[t][node_index · P_t + p]`.
    psi: Vec<Vec<XReal>>,
    /// `phi[t][node_index · P_{t+1} + c]`, `c` a prefix of length `t + 1`.
    phi: Vec<Vec<XReal>>,
    bound: f64,
}

impl ValueField {
    pub fn horizon(&self) -> usize {
        self.trie.horizon()
    }

    pub fn upper_bound(&self) -> f64 {
        self.bound
    }

    pub fn psi_cell(&self, t: usize, node_index: usize, p: usize) -> XReal {
        self.psi[t][node_index * self.trie.len(t) + p]
    }

    /// `Φ_t` at a node for the length-`t+1` prefix `c`.
    pub fn phi_cell(&self, t: usize, node_index: usize, c: usize) -> XReal {
        self.phi[t][node_index * self.trie.len(t + 1) + c]
    }

    /// `Ψ_t(node, prefix)`; `−∞` for infeasible prefixes.
    pub fn psi(&self, node: NodeId, prefix: &[usize]) -> XReal {
        debug_assert_eq!(node.depth, prefix.len());
        match self.trie.find(prefix) {
            Some(p) => self.psi_cell(node.depth, node.index, p),
            None => XReal::NEG_INF,
        }
    }

    /// `Φ_t(node, prefix ⊕ a)`; `−∞` for infeasible extensions.
    pub fn phi(&self, node: NodeId, prefix: &[usize]) -> XReal {
        debug_assert_eq!(node.depth + 1, prefix.len());
        match self.trie.find(prefix) {
            Some(c) => self.phi_cell(node.depth, node.index, c),
            None => XReal::NEG_INF,
        }
    }

    /// `Ψ_t(node, x)` for a real prefix vector of length `d·t`.
    pub fn psi_at(&self, model: &dyn Integrand, node: NodeId, x: &[f64]) -> XReal {
        let dom = model.domain();
        if x.len() != dom.dim() * node.depth {
            return XReal::NEG_INF;
        }
        let idx: Option<Vec<usize>> = x
            .chunks(dom.dim())
            .enumerate()
            .map(|(t, v)| dom.locate(t, v))
            .collect();
        match idx {
            Some(idx) => self.psi(node, &idx),
            None => XReal::NEG_INF,
        }
    }

    pub fn root_value(&self) -> XReal {
        self.psi[0][0]
    }

    /// Every stored `Ψ_t` and `Φ_t` value.
    pub fn all_values(&self) -> impl Iterator<Item = XReal> + '_ {
        self.psi.iter().chain(&self.phi).flatten().copied()
    }
}

/// Chosen extension for every (node, feasible prefix) cell.
#[derive(Debug, Clone)]
pub struct PolicyTable {
    /// `choice[t][node_index · P_t + p]` = chosen length-`t+1` prefix.
    choice: Vec<Vec<Option<usize>>>,
    pub root_value: XReal,
}

impl PolicyTable {
    /// The chosen action at a cell, as an action index.
    pub fn action(&self, field: &ValueField, t: usize, node_index: usize, p: usize) -> Option<usize> {
        self.choice[t][node_index * field.trie.len(t) + p].map(|c| field.trie.action(t + 1, c))
    }

    /// Follows the policy from the root, giving an action at every node.
    pub fn realize(&self, tree: &ScenarioTree, field: &ValueField) -> AdaptedStrategy {
        let mut actions = vec![0; tree.internal_node_count()];
        let mut prefix_of = vec![0usize; 1];
        for t in 0..tree.horizon() {
            let b = tree.branching(t);
            let mut next = vec![0usize; tree.nodes_at(t + 1)];
            for (i, &p) in prefix_of.iter().enumerate() {
                let c = self.choice[t][i * field.trie.len(t) + p]
                    .or_else(|| field.trie.extensions(t, p).next());
                let Some(c) = c else { continue };
                actions[tree.global(NodeId { depth: t, index: i })] = field.trie.action(t + 1, c);
                for k in 0..b {
                    next[i * b + k] = c;
                }
            }
            prefix_of = next;
        }
        AdaptedStrategy { actions }
    }
}

/// Worker configuration.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Threads used inside a level; 0 picks the rayon default.
    pub workers: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { workers: 1 }
    }
}

pub(crate) fn with_pool<T: Send>(
    workers: usize,
    f: impl FnOnce() -> T + Send,
) -> Result<T, SolverError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| SolverError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}

fn check_bound(values: &[XReal], bound: f64) -> Result<(), SolverError> {
    for v in values {
        if let Some(x) = v.finite() {
            if x > bound + VALUE_TOLERANCE {
                return Err(SolverError::UpperBound { value: x, bound });
            }
        }
    }
    Ok(())
}

/// Computes `Ψ_t` and `Φ_t` for every level, then checks the root.
pub fn backward_induct(problem: &Problem, opts: SolveOptions) -> Result<ValueField, SolverError> {
    let field = value_field(problem, opts)?;
    if field.root_value().is_neg_inf() {
        return Err(SolverError::Infeasible(
            "every strategy has worst-case value -inf".into(),
        ));
    }
    Ok(field)
}

/// The full value field without the root feasibility check.
pub fn value_field(problem: &Problem, opts: SolveOptions) -> Result<ValueField, SolverError> {
    with_pool(opts.workers, || backward_induct_in_pool(problem))?
}

fn backward_induct_in_pool(problem: &Problem) -> Result<ValueField, SolverError> {
    let Problem {
        tree,
        kernel,
        model,
    } = *problem;
    let horizon = tree.horizon();
    let trie = PrefixTrie::build(model)?;
    let bound = model.upper_bound();
    let mut psi: Vec<Vec<XReal>> = vec![Vec::new(); horizon + 1];
    let mut phi: Vec<Vec<XReal>> = vec![Vec::new(); horizon];

    let full: Vec<Vec<usize>> = (0..trie.len(horizon))
        .map(|p| trie.actions(horizon, p))
        .collect();
    let n_full = full.len().max(1);
    let mut terminal = vec![XReal::NEG_INF; tree.leaf_count() * full.len()];
    terminal
        .par_chunks_mut(n_full)
        .enumerate()
        .for_each(|(leaf, row)| {
            for (cell, actions) in row.iter_mut().zip(&full) {
                *cell = model.terminal_value(leaf, actions);
            }
        });
    check_bound(&terminal, bound)?;
    psi[horizon] = terminal;

    for t in (0..horizon).rev() {
        let b = tree.branching(t);
        let n_prefix = trie.len(t);
        let n_ext = trie.len(t + 1);
        let next = &psi[t + 1];
        let offset = tree.global(NodeId { depth: t, index: 0 });
        let mut phi_t = vec![XReal::NEG_INF; tree.nodes_at(t) * n_ext];
        if n_ext > 0 {
            phi_t
                .par_chunks_mut(n_ext)
                .enumerate()
                .for_each(|(i, row)| {
                    let vectors = kernel.vectors_by_id(offset + i);
                    let mut child_vals = vec![XReal::NEG_INF; b];
                    for (c, cell) in row.iter_mut().enumerate() {
                        for (k, v) in child_vals.iter_mut().enumerate() {
                            *v = next[(i * b + k) * n_ext + c];
                        }
                        *cell = vectors
                            .iter()
                            .map(|p| expectation_unchecked(&child_vals, p))
                            .min()
                            .expect("kernel lists are nonempty");
                    }
                });
        }
        let mut psi_t = vec![XReal::NEG_INF; tree.nodes_at(t) * n_prefix];
        psi_t
            .par_chunks_mut(n_prefix)
            .enumerate()
            .for_each(|(i, row)| {
                for (p, cell) in row.iter_mut().enumerate() {
                    *cell = trie
                        .extensions(t, p)
                        .map(|c| phi_t[i * n_ext + c])
                        .max()
                        .unwrap_or(XReal::NEG_INF);
                }
            });
        check_bound(&phi_t, bound)?;
        check_bound(&psi_t, bound)?;
        phi[t] = phi_t;
        psi[t] = psi_t;
    }
    Ok(ValueField {
        trie,
        psi,
        phi,
        bound,
    })
}

/// Picks, at every cell, an extension attaining the max within
/// [`VALUE_TOLERANCE`], preferring the action of smallest norm and then
/// the lexicographically smallest one.
pub fn extract_policy(problem: &Problem, field: &ValueField) -> PolicyTable {
    let dom = problem.model.domain();
    let trie = &field.trie;
    let mut choice = Vec::with_capacity(field.horizon());
    for t in 0..field.horizon() {
        let n_prefix = trie.len(t);
        let mut row = vec![None; problem.tree.nodes_at(t) * n_prefix];
        for (i, chunk) in row.chunks_mut(n_prefix.max(1)).enumerate() {
            for (p, cell) in chunk.iter_mut().enumerate() {
                let best = field.psi_cell(t, i, p);
                *cell = trie
                    .extensions(t, p)
                    .filter(|&c| {
                        let v = field.phi_cell(t, i, c);
                        best.is_neg_inf() || v.approx_eq(best, VALUE_TOLERANCE) || v >= best
                    })
                    .min_by_key(|&c| dom.tie_rank(t, trie.action(t + 1, c)));
            }
        }
        choice.push(row);
    }
    PolicyTable {
        choice,
        root_value: field.root_value(),
    }
}

/// Backward min-recursion with actions pinned to `strategy`; returns the
/// worst-case value at every node by global id.
pub fn pinned_values(problem: &Problem, strategy: &AdaptedStrategy) -> Vec<XReal> {
    let tree = problem.tree;
    let mut vals = vec![XReal::NEG_INF; tree.node_count()];
    for leaf in 0..tree.leaf_count() {
        let actions = strategy.along(tree, leaf);
        vals[tree.global(tree.leaf(leaf))] = if problem.model.is_feasible(&actions) {
            problem.model.terminal_value(leaf, &actions)
        } else {
            XReal::NEG_INF
        };
    }
    robust_backward(problem, &mut vals, tree.horizon());
    vals
}

/// Fills `vals` for depths below `from` by the nested worst-case
/// expectation, given values at depth `from`.
fn robust_backward(problem: &Problem, vals: &mut [XReal], from: usize) {
    let tree = problem.tree;
    let mut child_vals = Vec::new();
    for t in (0..from).rev() {
        for i in 0..tree.nodes_at(t) {
            let node = NodeId { depth: t, index: i };
            child_vals.clear();
            child_vals.extend(tree.children(node).map(|c| vals[tree.global(c)]));
            vals[tree.global(node)] = problem
                .kernel
                .vectors(tree, node)
                .iter()
                .map(|p| expectation_unchecked(&child_vals, p))
                .min()
                .expect("kernel lists are nonempty");
        }
    }
}

/// `inf_P E^P[X]` for `X` measurable at depth `t`, given by its values on
/// the depth-`t` nodes.
pub fn robust_expectation(problem: &Problem, t: usize, values: &[XReal]) -> XReal {
    let tree = problem.tree;
    let mut vals = vec![XReal::NEG_INF; tree.node_count()];
    let off = tree.global(NodeId { depth: t, index: 0 });
    vals[off..off + values.len()].copy_from_slice(values);
    robust_backward(problem, &mut vals, t);
    vals[0]
}

/// Both routes of the worst-case evaluation of a fixed strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyEvaluation {
    pub pinned: XReal,
    /// Minimum over every kernel selection; absent above the budget.
    pub enumerated: Option<XReal>,
}

/// Worst-case value of `strategy`, computed by the pinned backward
/// recursion and, when the selection count is within `budget`, by an
/// explicit minimum over selections of the pathwise expectation.
pub fn evaluate_policy(
    problem: &Problem,
    strategy: &AdaptedStrategy,
    budget: u128,
) -> Result<PolicyEvaluation, SolverError> {
    let tree = problem.tree;
    let pinned_all = pinned_values(problem, strategy);
    let pinned = pinned_all[0];
    let count = problem.kernel.selection_count(tree, NodeId::ROOT);
    let enumerated = match count {
        Some(n) if n <= budget => {
            let first = tree.global(tree.leaf(0));
            let leaf_vals = &pinned_all[first..];
            let v = problem
                .kernel
                .enumerate_selections(tree, NodeId::ROOT)
                .map(|s| {
                    crate::lattice::path_expectation(
                        &s.leaf_probabilities(tree, problem.kernel),
                        leaf_vals,
                    )
                })
                .min()
                .expect("at least one selection");
            if !v.approx_eq(pinned, VALUE_TOLERANCE) {
                return Err(SolverError::Consistency(format!(
                    "pinned recursion gives {pinned}, selection minimum gives {v}"
                )));
            }
            Some(v)
        }
        _ => None,
    };
    Ok(PolicyEvaluation { pinned, enumerated })
}

/// `A_t = inf_P E^P[Ψ_t(ω^t, H^t)]` for `t = 0..=T`; non-increasing in `t`
/// for every strategy and constant for an optimal one.
pub fn value_chain(problem: &Problem, field: &ValueField, strategy: &AdaptedStrategy) -> Vec<XReal> {
    let tree = problem.tree;
    (0..=tree.horizon())
        .map(|t| {
            let vals: Vec<XReal> = (0..tree.nodes_at(t))
                .map(|i| {
                    let node = NodeId { depth: t, index: i };
                    let prefix: Vec<usize> = (0..t)
                        .map(|s| strategy.actions[tree.global(tree.ancestor(node, s))])
                        .collect();
                    field.psi(node, &prefix)
                })
                .collect();
            robust_expectation(problem, t, &vals)
        })
        .collect()
}

/// Root value, value field and extracted policy.
#[derive(Debug, Clone)]
pub struct Solution {
    pub field: ValueField,
    pub policy: PolicyTable,
    pub strategy: AdaptedStrategy,
}

impl Solution {
    pub fn root_value(&self) -> XReal {
        self.field.root_value()
    }
}

pub fn solve(problem: &Problem, opts: SolveOptions) -> Result<Solution, SolverError> {
    let field = backward_induct(problem, opts)?;
    let policy = extract_policy(problem, &field);
    let strategy = policy.realize(problem.tree, &field);
    Ok(Solution {
        field,
        policy,
        strategy,
    })
}

/// Ingestion checks run before a solve: the zero strategy must have a
/// finite worst-case value, and `probes` random feasible (leaf, strategy)
/// pairs must respect the upper bound.
pub fn check_assumptions(problem: &Problem, probes: usize, seed: u64) -> Result<XReal, SolverError> {
    let tree = problem.tree;
    let model = problem.model;
    let zero = AdaptedStrategy::zero(tree, model);
    if !zero.is_feasible(tree, model) {
        return Err(SolverError::Infeasible("the zero strategy is not feasible".into()));
    }
    let zero_value = pinned_values(problem, &zero)[0];
    if zero_value.is_neg_inf() {
        return Err(SolverError::Infeasible(
            "the zero strategy has worst-case value -inf".into(),
        ));
    }
    let bound = model.upper_bound();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..probes {
        let leaf = rng.gen_range(0..tree.leaf_count());
        let mut actions = Vec::with_capacity(tree.horizon());
        for t in 0..tree.horizon() {
            let opts = model.feasible_actions(t, &actions)?;
            if opts.is_empty() {
                break;
            }
            actions.push(opts[rng.gen_range(0..opts.len())]);
        }
        if actions.len() < tree.horizon() {
            continue;
        }
        if let Some(v) = model.terminal_value(leaf, &actions).finite() {
            if v > bound + VALUE_TOLERANCE {
                return Err(SolverError::UpperBound { value: v, bound });
            }
        }
    }
    Ok(zero_value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{Frictionless, PriceRule, Stopping, Utility};

    fn binomial_band() -> (ScenarioTree, AmbiguityKernel, Frictionless) {
        let tree = ScenarioTree::new(vec![vec![vec![1.5], vec![0.5]]]).unwrap();
        let kernel =
            AmbiguityKernel::homogeneous(&tree, &[vec![vec![0.3, 0.7], vec![0.7, 0.3]]]).unwrap();
        let model = Frictionless::new(
            &tree,
            &[1.0],
            PriceRule::Multiplicative,
            Utility::Exponential { risk_aversion: 1.0 },
            1.0,
            3,
        )
        .unwrap();
        (tree, kernel, model)
    }

    #[test]
    fn binomial_example_root_value() {
        let (tree, kernel, model) = binomial_band();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let sol = solve(&problem, SolveOptions::default()).unwrap();
        let expect = 1.0 - (-1.0f64).exp();
        assert!((sol.root_value().to_f64() - expect).abs() < 1e-12);
        assert!((sol.root_value().to_f64() - 0.632_120_6).abs() < 1e-7);
        let a = sol.strategy.actions[0];
        assert_eq!(model.domain().action(0, a), &[0.0]);
        // h = ±1 worst case
        let one = model.domain().locate(0, &[1.0]).unwrap();
        let minus = model.domain().locate(0, &[-1.0]).unwrap();
        for h in [one, minus] {
            let v = field_phi(&sol.field, h);
            assert!((v - 0.5085).abs() < 1e-4, "{v}");
        }
        let eval = evaluate_policy(&problem, &sol.strategy, DEFAULT_SELECTION_BUDGET).unwrap();
        assert!(eval.pinned.approx_eq(sol.root_value(), 1e-12));
        assert!(eval.enumerated.unwrap().approx_eq(sol.root_value(), 1e-12));
    }

    fn field_phi(field: &ValueField, a: usize) -> f64 {
        field.phi(NodeId::ROOT, &[a]).to_f64()
    }

    #[test]
    fn constant_payoff_picks_zero() {
        let tree = ScenarioTree::new(vec![vec![vec![1.0], vec![1.0]]; 2]).unwrap();
        let kernel = AmbiguityKernel::dirac(&tree);
        let model = Frictionless::new(
            &tree,
            &[1.0],
            PriceRule::Multiplicative,
            Utility::Linear { cap: 5.0 },
            1.0,
            2,
        )
        .unwrap();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let sol = solve(&problem, SolveOptions::default()).unwrap();
        assert_eq!(sol.root_value().to_f64(), 1.0);
        let zero = AdaptedStrategy::zero(&tree, &model);
        assert_eq!(sol.strategy, zero);
    }

    #[test]
    fn deterministic_stopping() {
        let tree = ScenarioTree::new(vec![vec![vec![1.0], vec![2.0]]; 2]).unwrap();
        let g = [0.0, 2.0, 1.0];
        let rewards = (0..tree.node_count())
            .map(|id| XReal::from_f64(g[tree.from_global(id).depth]))
            .collect();
        let model = Stopping::new(&tree, rewards).unwrap();
        let kernel = AmbiguityKernel::homogeneous(
            &tree,
            &[vec![vec![0.5, 0.5], vec![0.9, 0.1]], vec![vec![0.2, 0.8]]],
        )
        .unwrap();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let sol = solve(&problem, SolveOptions::default()).unwrap();
        assert_eq!(sol.root_value().to_f64(), 2.0);
        // h₀ = 1 at the root, h₁ = 0 at both depth-1 nodes
        assert_eq!(sol.strategy.actions, vec![1, 0, 0]);
    }

    #[test]
    fn infeasible_zero_strategy_is_reported() {
        let tree = ScenarioTree::new(vec![vec![vec![1.0], vec![2.0]]]).unwrap();
        let rewards = vec![XReal::NEG_INF, XReal::from_f64(1.0), XReal::from_f64(1.0)];
        let model = Stopping::new(&tree, rewards).unwrap();
        let kernel = AmbiguityKernel::dirac(&tree);
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        assert!(matches!(
            check_assumptions(&problem, 10, 0),
            Err(SolverError::Infeasible(_))
        ));
    }

    #[test]
    fn prefix_trie_round_trip() {
        let (_, _, model) = binomial_band();
        let trie = PrefixTrie::build(&model).unwrap();
        assert_eq!(trie.len(1), 7);
        for c in 0..7 {
            assert_eq!(trie.find(&trie.actions(1, c)), Some(c));
        }
        assert_eq!(trie.find(&[9]), None);
    }

    #[test]
    fn worker_count_does_not_change_values() {
        let tree = ScenarioTree::new(vec![vec![vec![1.3], vec![1.0], vec![0.8]]; 3]).unwrap();
        let kernel = AmbiguityKernel::homogeneous(
            &tree,
            &[
                vec![vec![0.2, 0.3, 0.5], vec![0.4, 0.4, 0.2]],
                vec![vec![0.3, 0.3, 0.4]],
                vec![vec![0.1, 0.6, 0.3], vec![0.5, 0.0, 0.5]],
            ],
        )
        .unwrap();
        let model = Frictionless::new(
            &tree,
            &[1.0],
            PriceRule::Multiplicative,
            Utility::Exponential { risk_aversion: 0.5 },
            1.0,
            2,
        )
        .unwrap();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let a = backward_induct(&problem, SolveOptions { workers: 1 }).unwrap();
        let b = backward_induct(&problem, SolveOptions { workers: 4 }).unwrap();
        let bits = |f: &ValueField| f.all_values().map(|v| v.to_f64().to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }
}
