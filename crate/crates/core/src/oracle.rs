//! Exhaustive ground truth: every adapted strategy against every kernel
//! selection, without any dynamic programming.

use rayon::prelude::*;
use thiserror::Error;

use crate::integrand::{IntegrandError, XReal};
use crate::lattice::{path_expectation, KernelSelection, NodeId, ScenarioTree};
use crate::models::{Stopping, StoppingTime};
use crate::solver::{with_pool, Problem, SolverError, VALUE_TOLERANCE};
use crate::strategy::AdaptedStrategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumerationBudget {
    pub strategies: u128,
    pub selections: u128,
}

impl Default for EnumerationBudget {
    fn default() -> Self {
        Self {
            strategies: 10_000_000,
            selections: 1_000_000,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{what} count {} exceeds the budget of {limit}", count.map_or("beyond 2^128".to_string(), |c| c.to_string()))]
    Budget {
        what: &'static str,
        count: Option<u128>,
        limit: u128,
    },
    #[error("the problem has no feasible adapted strategy")]
    NoStrategy,
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

/// Feasible prefixes discovered on demand, with their extension lists.
struct Prefixes {
    actions: Vec<Vec<usize>>,
    ext: Vec<Option<Vec<(usize, usize)>>>,
}

impl Prefixes {
    fn new() -> Self {
        Self {
            actions: vec![vec![]],
            ext: vec![None],
        }
    }

    /// `(action, prefix id)` pairs extending prefix `p`, in tie order.
    fn extensions(&mut self, problem: &Problem, p: usize) -> Result<Vec<(usize, usize)>, IntegrandError> {
        if let Some(e) = &self.ext[p] {
            return Ok(e.clone());
        }
        let prefix = self.actions[p].clone();
        let t = prefix.len();
        let dom = problem.model.domain();
        let mut acts = problem.model.feasible_actions(t, &prefix)?;
        acts.sort_by_key(|&a| dom.tie_rank(t, a));
        let mut out = Vec::with_capacity(acts.len());
        for a in acts {
            let mut q = prefix.clone();
            q.push(a);
            self.actions.push(q);
            self.ext.push(None);
            out.push((a, self.actions.len() - 1));
        }
        self.ext[p] = Some(out.clone());
        Ok(out)
    }
}

/// Exact number of adapted strategies, `None` past `u128`.
pub fn strategy_count(problem: &Problem) -> Result<Option<u128>, IntegrandError> {
    fn count(
        problem: &Problem,
        pre: &mut Prefixes,
        p: usize,
        t: usize,
    ) -> Result<Option<u128>, IntegrandError> {
        if t == problem.tree.horizon() {
            return Ok(Some(1));
        }
        let b = problem.tree.branching(t) as u32;
        let mut total: u128 = 0;
        for (_, c) in pre.extensions(problem, p)? {
            let Some(sub) = count(problem, pre, c, t + 1)? else {
                return Ok(None);
            };
            let Some(pow) = sub.checked_pow(b) else {
                return Ok(None);
            };
            let Some(next) = total.checked_add(pow) else {
                return Ok(None);
            };
            total = next;
        }
        Ok(Some(total))
    }
    count(problem, &mut Prefixes::new(), 0, 0)
}

/// Restriction of the options at one node during enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pin {
    /// Every feasible action.
    Free,
    /// Only the first action in tie order.
    First,
    /// Only the zero action, or the first in tie order if zero is not
    /// feasible.
    Zero,
}

fn apply_pin(problem: &Problem, t: usize, opts: Vec<(usize, usize)>, pin: Pin) -> Vec<(usize, usize)> {
    match pin {
        Pin::Free => opts,
        Pin::First => opts.into_iter().take(1).collect(),
        Pin::Zero => {
            let z = problem.model.domain().zero_action(t);
            match opts.iter().find(|o| o.0 == z) {
                Some(&o) => vec![o],
                None => opts.into_iter().take(1).collect(),
            }
        }
    }
}

/// Number of adapted strategies under per-node pins, `None` past `u128`.
pub fn pinned_count(problem: &Problem, pins: &[Pin]) -> Result<Option<u128>, IntegrandError> {
    fn count(
        problem: &Problem,
        pins: &[Pin],
        pre: &mut Prefixes,
        memo: &mut std::collections::HashMap<(usize, usize), Option<u128>>,
        node: NodeId,
        p: usize,
    ) -> Result<Option<u128>, IntegrandError> {
        let tree = problem.tree;
        if node.depth == tree.horizon() {
            return Ok(Some(1));
        }
        let id = tree.global(node);
        if let Some(&v) = memo.get(&(id, p)) {
            return Ok(v);
        }
        let opts = apply_pin(problem, node.depth, pre.extensions(problem, p)?, pins[id]);
        let mut total: Option<u128> = Some(0);
        for (_, c) in opts {
            let mut prod: Option<u128> = Some(1);
            for child in tree.children(node) {
                let sub = count(problem, pins, pre, memo, child, c)?;
                prod = prod.zip(sub).and_then(|(a, b)| a.checked_mul(b));
            }
            total = total.zip(prod).and_then(|(a, b)| a.checked_add(b));
        }
        memo.insert((id, p), total);
        Ok(total)
    }
    let mut memo = std::collections::HashMap::new();
    count(problem, pins, &mut Prefixes::new(), &mut memo, NodeId::ROOT, 0)
}

/// Odometer over adapted strategies. Nodes are visited in global id order
/// (parents before children) and each node's options are in tie order,
/// so the stream is sorted lexicographically by per-node tie rank.
pub struct AdaptedStrategies<'a> {
    problem: Problem<'a>,
    pins: Vec<Pin>,
    prefixes: Prefixes,
    /// Prefix id reached at each node (before its own action).
    node_prefix: Vec<usize>,
    options: Vec<Vec<(usize, usize)>>,
    pos: Vec<usize>,
    done: bool,
}

impl<'a> AdaptedStrategies<'a> {
    fn new(problem: Problem<'a>) -> Result<Self, IntegrandError> {
        let pins = vec![Pin::Free; problem.tree.internal_node_count()];
        Self::with_pins(problem, pins)
    }

    fn with_pins(problem: Problem<'a>, pins: Vec<Pin>) -> Result<Self, IntegrandError> {
        let n = problem.tree.internal_node_count();
        let mut it = Self {
            problem,
            pins,
            prefixes: Prefixes::new(),
            node_prefix: vec![0; n],
            options: vec![Vec::new(); n],
            pos: vec![0; n],
            done: n == 0,
        };
        if !it.fill_from(0)? {
            it.done = true;
        }
        Ok(it)
    }

    /// Resets nodes `from..` to their first option; false if some node has
    /// no feasible action.
    fn fill_from(&mut self, from: usize) -> Result<bool, IntegrandError> {
        let tree = self.problem.tree;
        for id in from..self.options.len() {
            let node = tree.from_global(id);
            let p = match tree.parent(node) {
                None => 0,
                Some(par) => {
                    let pid = tree.global(par);
                    self.options[pid][self.pos[pid]].1
                }
            };
            self.node_prefix[id] = p;
            let opts = self.prefixes.extensions(&self.problem, p)?;
            self.options[id] = apply_pin(&self.problem, node.depth, opts, self.pins[id]);
            self.pos[id] = 0;
            if self.options[id].is_empty() {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn current(&self) -> AdaptedStrategy {
        AdaptedStrategy {
            actions: self
                .options
                .iter()
                .zip(&self.pos)
                .map(|(o, &k)| o[k].0)
                .collect(),
        }
    }

    /// Full-prefix id at every leaf for the current strategy.
    fn leaf_prefixes(&self) -> Vec<usize> {
        let tree = self.problem.tree;
        let last = tree.horizon() - 1;
        (0..tree.leaf_count())
            .map(|l| {
                let parent = tree.global(tree.ancestor(tree.leaf(l), last));
                self.options[parent][self.pos[parent]].1
            })
            .collect()
    }
}

impl Iterator for AdaptedStrategies<'_> {
    type Item = (AdaptedStrategy, Vec<usize>);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let out = (self.current(), self.leaf_prefixes());
        self.done = true;
        for id in (0..self.options.len()).rev() {
            if self.pos[id] + 1 < self.options[id].len() {
                self.pos[id] += 1;
                // later nodes may sit below this one; their options depend
                // on the new prefix
                if self.fill_from(id + 1).unwrap_or(false) {
                    self.done = false;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Streams every adapted strategy after checking the budget.
pub fn enumerate_adapted<'a>(
    problem: &Problem<'a>,
    budget: &EnumerationBudget,
) -> Result<impl Iterator<Item = AdaptedStrategy> + 'a, OracleError> {
    let count = strategy_count(problem)?;
    match count {
        Some(n) if n <= budget.strategies => {}
        _ => {
            return Err(OracleError::Budget {
                what: "adapted strategy",
                count,
                limit: budget.strategies,
            })
        }
    }
    Ok(AdaptedStrategies::new(*problem)?.map(|(s, _)| s))
}

/// Streams the adapted strategies allowed by `pins` after checking the
/// budget.
pub fn enumerate_pinned<'a>(
    problem: &Problem<'a>,
    pins: Vec<Pin>,
    budget: &EnumerationBudget,
) -> Result<impl Iterator<Item = AdaptedStrategy> + 'a, OracleError> {
    let count = pinned_count(problem, &pins)?;
    match count {
        Some(n) if n <= budget.strategies => {}
        _ => {
            return Err(OracleError::Budget {
                what: "adapted strategy",
                count,
                limit: budget.strategies,
            })
        }
    }
    Ok(AdaptedStrategies::with_pins(*problem, pins)?.map(|(s, _)| s))
}

fn check_selections(problem: &Problem, budget: &EnumerationBudget) -> Result<u128, OracleError> {
    let count = problem.kernel.selection_count(problem.tree, NodeId::ROOT);
    match count {
        Some(n) if n <= budget.selections => Ok(n),
        _ => Err(OracleError::Budget {
            what: "kernel selection",
            count,
            limit: budget.selections,
        }),
    }
}

/// Leaf probabilities of every selection.
fn selection_table(problem: &Problem) -> Vec<Vec<f64>> {
    problem
        .kernel
        .enumerate_selections(problem.tree, NodeId::ROOT)
        .map(|s: KernelSelection| s.leaf_probabilities(problem.tree, problem.kernel))
        .collect()
}

fn worst_case(table: &[Vec<f64>], leaf_values: &[XReal]) -> XReal {
    table
        .iter()
        .map(|p| path_expectation(p, leaf_values))
        .min()
        .expect("at least one selection")
}

#[derive(Debug, Clone)]
pub struct OracleResult {
    pub value: XReal,
    pub argmax: AdaptedStrategy,
    pub strategies: u128,
    pub selections: u128,
}

const BATCH: usize = 4096;

/// `max_H min_P E^P[Ψ(H)]` by enumeration. The argmax is the first
/// strategy in enumeration order within [`VALUE_TOLERANCE`] of the max.
pub fn supinf_bruteforce(
    problem: &Problem,
    budget: &EnumerationBudget,
    workers: usize,
) -> Result<OracleResult, OracleError> {
    let strategies = strategy_count(problem)?;
    match strategies {
        Some(n) if n <= budget.strategies => {}
        _ => {
            return Err(OracleError::Budget {
                what: "adapted strategy",
                count: strategies,
                limit: budget.strategies,
            })
        }
    }
    let selections = check_selections(problem, budget)?;
    let tree = problem.tree;
    let model = problem.model;
    let table = selection_table(problem);

    let mut iter = AdaptedStrategies::new(*problem)?;
    let mut values: Vec<(AdaptedStrategy, XReal)> = Vec::new();
    // terminal values are memoized per (leaf, full prefix id)
    let mut terminal: Vec<Option<Vec<XReal>>> = Vec::new();
    loop {
        let batch: Vec<(AdaptedStrategy, Vec<usize>)> = iter.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let leaf_vals: Vec<Vec<XReal>> = batch
            .iter()
            .map(|(_, prefixes)| {
                prefixes
                    .iter()
                    .enumerate()
                    .map(|(leaf, &p)| {
                        if terminal.len() <= p {
                            terminal.resize(p + 1, None);
                        }
                        let row = terminal[p].get_or_insert_with(|| {
                            let actions = &iter.prefixes.actions[p];
                            (0..tree.leaf_count())
                                .map(|l| model.terminal_value(l, actions))
                                .collect()
                        });
                        row[leaf]
                    })
                    .collect()
            })
            .collect();
        let worst: Vec<XReal> = with_pool(workers, || {
            leaf_vals
                .par_iter()
                .map(|lv| worst_case(&table, lv))
                .collect()
        })?;
        values.extend(batch.into_iter().map(|(s, _)| s).zip(worst));
    }
    if values.is_empty() {
        return Err(OracleError::NoStrategy);
    }
    let best = values.iter().map(|(_, v)| *v).max().unwrap();
    let argmax = values
        .into_iter()
        .find(|(_, v)| best.is_neg_inf() || v.approx_eq(best, VALUE_TOLERANCE))
        .map(|(s, _)| s)
        .unwrap();
    Ok(OracleResult {
        value: best,
        argmax,
        strategies: strategies.unwrap(),
        selections,
    })
}

/// Worst-case value of one strategy as a minimum over selections of the
/// pathwise expectation.
pub fn strategy_value(
    problem: &Problem,
    strategy: &AdaptedStrategy,
    budget: &EnumerationBudget,
) -> Result<XReal, OracleError> {
    check_selections(problem, budget)?;
    let tree = problem.tree;
    let leaf_vals: Vec<XReal> = (0..tree.leaf_count())
        .map(|l| {
            let a = strategy.along(tree, l);
            if problem.model.is_feasible(&a) {
                problem.model.terminal_value(l, &a)
            } else {
                XReal::NEG_INF
            }
        })
        .collect();
    Ok(worst_case(&selection_table(problem), &leaf_vals))
}

/// Number of stopping times, `None` past `u128`.
pub fn stopping_time_count(tree: &ScenarioTree) -> Option<u128> {
    let mut count: u128 = 1;
    for depth in (0..tree.horizon()).rev() {
        count = count.checked_pow(tree.branching(depth) as u32)?.checked_add(1)?;
    }
    Some(count)
}

#[derive(Debug, Clone)]
pub struct StoppingResult {
    pub value: XReal,
    pub best: StoppingTime,
    pub count: u128,
}

/// `max_τ min_P E^P[G_τ]` over every stopping time, using the rewards
/// directly rather than the holdings encoding.
pub fn stopping_bruteforce(
    tree: &ScenarioTree,
    kernel: &crate::lattice::AmbiguityKernel,
    model: &Stopping,
    budget: &EnumerationBudget,
) -> Result<StoppingResult, OracleError> {
    let count = stopping_time_count(tree);
    match count {
        Some(n) if n <= budget.strategies => {}
        _ => {
            return Err(OracleError::Budget {
                what: "stopping time",
                count,
                limit: budget.strategies,
            })
        }
    }
    let problem = Problem::new(tree, kernel, model)?;
    check_selections(&problem, budget)?;
    let table = selection_table(&problem);
    let mut best: Option<(StoppingTime, XReal)> = None;
    let all = StoppingTime::enumerate(tree);
    let scored: Vec<(StoppingTime, XReal)> = all
        .into_iter()
        .map(|tau| {
            let vals: Vec<XReal> = tau
                .per_leaf
                .iter()
                .enumerate()
                .map(|(l, &t)| model.stopped_reward(l, t))
                .collect();
            let v = worst_case(&table, &vals);
            (tau, v)
        })
        .collect();
    let top = scored.iter().map(|(_, v)| *v).max().expect("at least one stopping time");
    for (tau, v) in scored {
        if top.is_neg_inf() || v.approx_eq(top, VALUE_TOLERANCE) {
            best = Some((tau, v));
            break;
        }
    }
    let (best, _) = best.unwrap();
    Ok(StoppingResult {
        value: top,
        best,
        count: count.unwrap(),
    })
}
