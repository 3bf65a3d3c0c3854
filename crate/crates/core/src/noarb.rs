//! No-arbitrage diagnostics.
//!
//! The global condition asks that the only adapted strategy whose horizon
//! value `Ψ^∞(H)` is nonnegative on every relevant path be the strategy that
//! vanishes on every relevant node. Alongside the exhaustive global search
//! this module offers per-measure arbitrage scans for gain-form models,
//! one-step local cones, and a pinned recursion of horizon values used as an
//! independent cross-check of the global verdict.

use std::cmp::Ordering;
use std::sync::atomic::{AtomicBool, Ordering as AtomicOrdering};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::integrand::{horizon, GridDomain, HorizonKind, Integrand, IntegrandError, XReal};
use crate::lattice::{KernelSelection, NodeId};
use crate::oracle::{enumerate_pinned, EnumerationBudget, OracleError, Pin};
use crate::solver::{pinned_values, value_field, with_pool, Problem, SolveOptions, SolverError, ValueField};
use crate::strategy::AdaptedStrategy;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoarbError {
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Integrand(#[from] IntegrandError),
    #[error("per-measure scans need a gain-form model, not {0}")]
    NotGainForm(&'static str),
    #[error("horizon recursion is inconclusive: a numeric horizon did not stabilize")]
    Inconclusive,
    #[error("internal consistency failure: {0}")]
    Consistency(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NaVerdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Nonzero action of a strategy at one node.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeAction {
    pub node: usize,
    pub depth: usize,
    #[serde(serialize_with = "crate::integrand::serialize_f64_seq")]
    pub action: Vec<f64>,
}

/// A strategy reported as an arbitrage direction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    /// Actions on the nodes where the strategy is nonzero.
    pub support: Vec<NodeAction>,
    #[serde(skip)]
    pub strategy: AdaptedStrategy,
}

impl Witness {
    fn new(problem: &Problem, strategy: AdaptedStrategy) -> Self {
        let tree = problem.tree;
        let dom = problem.model.domain();
        let support = strategy
            .actions
            .iter()
            .enumerate()
            .filter_map(|(id, &a)| {
                let depth = tree.from_global(id).depth;
                (a != dom.zero_action(depth)).then(|| NodeAction {
                    node: id,
                    depth,
                    action: dom.action(depth, a).to_vec(),
                })
            })
            .collect();
        Self { support, strategy }
    }

    /// The action at the root.
    pub fn root_action(&self) -> Option<&[f64]> {
        self.support
            .iter()
            .find(|n| n.node == 0)
            .map(|n| n.action.as_slice())
    }
}

/// Order on witnesses: total squared norm over `nodes`, then
/// lexicographic over the node actions in id order.
fn witness_order(dom: &GridDomain, problem: &Problem, nodes: &[bool], a: &AdaptedStrategy, b: &AdaptedStrategy) -> Ordering {
    let tree = problem.tree;
    let norm = |s: &AdaptedStrategy| -> f64 {
        s.actions
            .iter()
            .enumerate()
            .filter(|(id, _)| nodes[*id])
            .map(|(id, &x)| dom.norm_sq(tree.from_global(id).depth, x))
            .sum()
    };
    norm(a).total_cmp(&norm(b)).then_with(|| {
        for (id, (&x, &y)) in a.actions.iter().zip(&b.actions).enumerate() {
            if !nodes[id] {
                continue;
            }
            let depth = tree.from_global(id).depth;
            let o = dom
                .action(depth, x)
                .iter()
                .zip(dom.action(depth, y))
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal);
            if o.is_ne() {
                return o;
            }
        }
        Ordering::Equal
    })
}

fn relevant_flags(problem: &Problem) -> Vec<bool> {
    let tree = problem.tree;
    (0..tree.node_count())
        .map(|id| problem.kernel.is_relevant(tree, tree.from_global(id)))
        .collect()
}

fn relevant_leaves(problem: &Problem, relevant: &[bool]) -> Vec<usize> {
    let tree = problem.tree;
    (0..tree.leaf_count())
        .filter(|&l| relevant[tree.global(tree.leaf(l))])
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Probe {
    Witness,
    NotWitness,
    Inconclusive,
}

/// Result of a global search.
#[derive(Debug, Clone, Serialize)]
pub struct GlobalNa {
    pub verdict: NaVerdict,
    pub witness: Option<Witness>,
    /// Strategies examined (relevant nodes free, others at zero).
    pub strategies_checked: u64,
    /// Strategies whose horizon could not be decided numerically.
    pub inconclusive_strategies: u64,
    pub horizon: HorizonKind,
}

const BATCH: usize = 4096;

/// Searches every adapted strategy in the action window for a nonzero
/// (on relevant nodes) strategy with `Ψ^∞ ≥ 0` on every relevant leaf.
pub fn global_na_check(
    problem: &Problem,
    budget: &EnumerationBudget,
    workers: usize,
) -> Result<GlobalNa, NoarbError> {
    search(problem, budget, workers, problem.tree.horizon())
}

/// [`global_na_check`] restricted to strategies that vanish from period
/// `t` on.
pub fn global_na_check_until(
    problem: &Problem,
    budget: &EnumerationBudget,
    workers: usize,
    t: usize,
) -> Result<GlobalNa, NoarbError> {
    search(problem, budget, workers, t)
}

fn search(
    problem: &Problem,
    budget: &EnumerationBudget,
    workers: usize,
    until: usize,
) -> Result<GlobalNa, NoarbError> {
    let tree = problem.tree;
    let model = problem.model;
    let relevant = relevant_flags(problem);
    let leaves = relevant_leaves(problem, &relevant);
    let pins: Vec<Pin> = (0..tree.internal_node_count())
        .map(|id| {
            if relevant[id] && tree.from_global(id).depth < until {
                Pin::Free
            } else {
                Pin::Zero
            }
        })
        .collect();
    let mut iter = enumerate_pinned(problem, pins, budget)?;
    let numeric_used = AtomicBool::new(false);
    let mut best: Option<AdaptedStrategy> = None;
    let mut checked = 0u64;
    let mut inconclusive = 0u64;
    let dom = model.domain();
    loop {
        let batch: Vec<AdaptedStrategy> = iter.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        checked += batch.len() as u64;
        let probes: Vec<Result<Probe, IntegrandError>> = with_pool(workers, || {
            batch
                .par_iter()
                .map(|s| {
                    if s.is_zero_on(tree, model, &relevant) {
                        return Ok(Probe::NotWitness);
                    }
                    let mut unsure = false;
                    for &leaf in &leaves {
                        let x = s.realized(tree, model, leaf);
                        match horizon(model, leaf, &x) {
                            Ok(h) => {
                                if h.kind == HorizonKind::Numeric {
                                    numeric_used.store(true, AtomicOrdering::Relaxed);
                                }
                                if h.value < XReal::ZERO {
                                    return Ok(Probe::NotWitness);
                                }
                            }
                            Err(IntegrandError::NotStabilized(..)) => {
                                numeric_used.store(true, AtomicOrdering::Relaxed);
                                unsure = true;
                            }
                            Err(e) => return Err(e),
                        }
                    }
                    Ok(if unsure {
                        Probe::Inconclusive
                    } else {
                        Probe::Witness
                    })
                })
                .collect()
        })?;
        for (s, probe) in batch.into_iter().zip(probes) {
            match probe? {
                Probe::Witness => {
                    let better = match &best {
                        None => true,
                        Some(b) => witness_order(dom, problem, &relevant, &s, b).is_lt(),
                    };
                    if better {
                        best = Some(s);
                    }
                }
                Probe::Inconclusive => inconclusive += 1,
                Probe::NotWitness => {}
            }
        }
    }
    let verdict = if best.is_some() {
        NaVerdict::Fails
    } else if inconclusive > 0 {
        NaVerdict::Inconclusive
    } else {
        NaVerdict::Holds
    };
    Ok(GlobalNa {
        verdict,
        witness: best.map(|s| Witness::new(problem, s)),
        strategies_checked: checked,
        inconclusive_strategies: inconclusive,
        horizon: if numeric_used.into_inner() {
            HorizonKind::Numeric
        } else {
            HorizonKind::Analytic
        },
    })
}

/// Witnesses of classical arbitrage under a single measure.
#[derive(Debug, Clone, Serialize)]
pub struct SelectionScan {
    /// Position of the selection in enumeration order.
    pub selection: usize,
    /// Chosen kernel vector index per non-leaf node.
    pub choices: Vec<usize>,
    pub witnesses: Vec<Witness>,
}

/// Window strategies with nonnegative gain on every positive-probability
/// path of `selection` and positive gain on at least one, sorted by norm
/// and then lexicographically.
pub fn per_measure_scan(
    problem: &Problem,
    selection: &KernelSelection,
    budget: &EnumerationBudget,
) -> Result<Vec<Witness>, NoarbError> {
    let tree = problem.tree;
    let model = problem.model;
    let zeros = vec![0.0; model.domain().dim() * tree.horizon()];
    if model.gain(0, &zeros).is_none() {
        return Err(NoarbError::NotGainForm(model.name()));
    }
    let probs = selection.node_probabilities(tree, problem.kernel);
    let charged: Vec<bool> = probs.iter().map(|&p| p > 0.0).collect();
    let pins = (0..tree.internal_node_count())
        .map(|id| if charged[id] { Pin::Free } else { Pin::Zero })
        .collect();
    let leaves: Vec<usize> = (0..tree.leaf_count())
        .filter(|&l| charged[tree.global(tree.leaf(l))])
        .collect();
    let mut out: Vec<AdaptedStrategy> = enumerate_pinned(problem, pins, budget)?
        .filter(|s| {
            let mut positive = false;
            for &leaf in &leaves {
                let g = model
                    .gain(leaf, &s.realized(tree, model, leaf))
                    .expect("gain-form model");
                if g < 0.0 {
                    return false;
                }
                positive |= g > 0.0;
            }
            positive
        })
        .collect();
    let dom = model.domain();
    out.sort_by(|a, b| witness_order(dom, problem, &charged, a, b));
    Ok(out.into_iter().map(|s| Witness::new(problem, s)).collect())
}

/// [`per_measure_scan`] for every kernel selection.
pub fn scan_all_selections(
    problem: &Problem,
    budget: &EnumerationBudget,
) -> Result<Vec<SelectionScan>, NoarbError> {
    let tree = problem.tree;
    let count = problem.kernel.selection_count(tree, NodeId::ROOT);
    match count {
        Some(n) if n <= budget.selections => {}
        _ => {
            return Err(OracleError::Budget {
                what: "kernel selection",
                count,
                limit: budget.selections,
            }
            .into())
        }
    }
    problem
        .kernel
        .enumerate_selections(tree, NodeId::ROOT)
        .enumerate()
        .map(|(i, sel)| {
            Ok(SelectionScan {
                selection: i,
                witnesses: per_measure_scan(problem, &sel, budget)?,
                choices: sel.choices,
            })
        })
        .collect()
}

/// `Ψ^∞` as a payoff, so the backward machinery can run on horizon values.
pub struct HorizonIntegrand<'a> {
    inner: &'a dyn Integrand,
    unsettled: AtomicBool,
}

impl<'a> HorizonIntegrand<'a> {
    pub fn new(inner: &'a dyn Integrand) -> Self {
        Self {
            inner,
            unsettled: AtomicBool::new(false),
        }
    }

    /// Whether some numeric horizon failed to stabilize (and was taken as
    /// `−∞`).
    pub fn unsettled(&self) -> bool {
        self.unsettled.load(AtomicOrdering::Relaxed)
    }
}

impl Integrand for HorizonIntegrand<'_> {
    fn name(&self) -> &'static str {
        "horizon"
    }

    fn domain(&self) -> &GridDomain {
        self.inner.domain()
    }

    fn upper_bound(&self) -> f64 {
        0.0
    }

    fn leaf_count(&self) -> usize {
        self.inner.leaf_count()
    }

    fn feasible_actions(&self, t: usize, prefix: &[usize]) -> Result<Vec<usize>, IntegrandError> {
        self.inner.feasible_actions(t, prefix)
    }

    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal {
        let x = self.inner.domain().flatten(actions);
        match horizon(self.inner, leaf, &x) {
            Ok(h) => h.value,
            Err(_) => {
                self.unsettled.store(true, AtomicOrdering::Relaxed);
                XReal::NEG_INF
            }
        }
    }
}

/// Pinned backward recursion of horizon values: NA holds iff no strategy
/// that is nonzero on a relevant node keeps the recursion at 0 up to the
/// root.
pub fn horizon_dp_check(
    problem: &Problem,
    budget: &EnumerationBudget,
    workers: usize,
) -> Result<bool, NoarbError> {
    let tree = problem.tree;
    let relevant = relevant_flags(problem);
    let hz = HorizonIntegrand::new(problem.model);
    let hp = problem.with_model(&hz);
    let pins = (0..tree.internal_node_count())
        .map(|id| if relevant[id] { Pin::Free } else { Pin::Zero })
        .collect();
    let mut iter = enumerate_pinned(problem, pins, budget)?;
    loop {
        let batch: Vec<AdaptedStrategy> = iter.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            break;
        }
        let found = with_pool(workers, || {
            batch.par_iter().any(|s| {
                !s.is_zero_on(tree, problem.model, &relevant)
                    && pinned_values(&hp, s)[0] >= XReal::ZERO
            })
        })?;
        if found {
            return Ok(false);
        }
    }
    if hz.unsettled() {
        return Err(NoarbError::Inconclusive);
    }
    Ok(true)
}

/// Compares the global verdict with the horizon recursion.
pub fn cross_check(global: &GlobalNa, dp_holds: bool) -> Result<(), NoarbError> {
    let global_holds = match global.verdict {
        NaVerdict::Holds => true,
        NaVerdict::Fails => false,
        NaVerdict::Inconclusive => return Ok(()),
    };
    if global_holds != dp_holds {
        return Err(NoarbError::Consistency(format!(
            "global search says NA {}, horizon recursion says {}",
            if global_holds { "holds" } else { "fails" },
            if dp_holds { "holds" } else { "fails" }
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConeKind {
    Exact,
    Surrogate,
}

/// Window actions `h` at a node with nonnegative one-step horizon value.
#[derive(Debug, Clone, Serialize)]
pub struct LocalCone {
    pub node: usize,
    pub depth: usize,
    pub kind: ConeKind,
    #[serde(serialize_with = "crate::integrand::serialize_f64_nested")]
    pub members: Vec<Vec<f64>>,
}

impl LocalCone {
    pub fn is_trivial(&self) -> bool {
        self.members.iter().all(|h| h.iter().all(|&x| x == 0.0))
    }
}

/// Horizon values `Ψ̄_t`, `Φ̄_t` obtained by running the robust recursion on
/// `Ψ^∞`; an upper bound for the one-step horizon values.
pub fn surrogate_field(problem: &Problem, workers: usize) -> Result<(ValueField, bool), NoarbError> {
    let hz = HorizonIntegrand::new(problem.model);
    let field = value_field(&problem.with_model(&hz), SolveOptions { workers })?;
    let unsettled = hz.unsettled();
    Ok((field, unsettled))
}

/// The local cone at `node`. Exact for models with a linear one-step gain;
/// otherwise the surrogate built from `surrogate` (see [`surrogate_field`]).
pub fn local_cone(problem: &Problem, node: NodeId, surrogate: Option<&ValueField>) -> LocalCone {
    let tree = problem.tree;
    let model = problem.model;
    let dom = model.domain();
    let t = node.depth;
    let id = tree.global(node);
    if model.has_exact_local_cone() {
        let charged = problem.kernel.charged_children(tree, node);
        let width: usize = (t + 1..tree.horizon()).map(|d| tree.branching(d)).product();
        let d = dom.dim();
        let members = dom
            .actions(t)
            .iter()
            .filter(|h| {
                let mut x = vec![0.0; d * tree.horizon()];
                x[t * d..(t + 1) * d].copy_from_slice(h);
                tree.children(node).enumerate().all(|(k, child)| {
                    !charged[k] || model.gain(child.index * width, &x).unwrap_or(f64::NEG_INFINITY) >= 0.0
                })
            })
            .cloned()
            .collect();
        return LocalCone {
            node: id,
            depth: t,
            kind: ConeKind::Exact,
            members,
        };
    }
    let mut members = Vec::new();
    if let Some(field) = surrogate {
        let zeros: Vec<usize> = (0..t).map(|s| dom.zero_action(s)).collect();
        if let Some(p) = field.trie.find(&zeros) {
            for c in field.trie.extensions(t, p) {
                if field.phi_cell(t, node.index, c) >= XReal::ZERO {
                    members.push(dom.action(t, field.trie.action(t + 1, c)).to_vec());
                }
            }
        }
    }
    LocalCone {
        node: id,
        depth: t,
        kind: ConeKind::Surrogate,
        members,
    }
}

/// Local cones at every relevant non-leaf node.
pub fn local_cones(problem: &Problem, workers: usize) -> Result<Vec<LocalCone>, NoarbError> {
    let tree = problem.tree;
    let surrogate = if problem.model.has_exact_local_cone() {
        None
    } else {
        Some(surrogate_field(problem, workers)?.0)
    };
    Ok((0..tree.internal_node_count())
        .map(|id| tree.from_global(id))
        .filter(|&n| problem.kernel.is_relevant(tree, n))
        .map(|n| local_cone(problem, n, surrogate.as_ref()))
        .collect())
}

/// The strategy equal to `h` at `node` and zero elsewhere.
pub fn lift_local(problem: &Problem, node: NodeId, h: &[f64]) -> Option<AdaptedStrategy> {
    let tree = problem.tree;
    let mut s = AdaptedStrategy::zero(tree, problem.model);
    let a = problem.model.domain().locate(node.depth, h)?;
    s.actions[tree.global(node)] = a;
    s.is_feasible(tree, problem.model).then_some(s)
}

/// Whether `Ψ^∞(strategy) ≥ 0` on every relevant leaf, using closed forms
/// where available.
pub fn horizon_nonnegative(problem: &Problem, strategy: &AdaptedStrategy) -> Result<bool, IntegrandError> {
    let tree = problem.tree;
    let relevant = relevant_flags(problem);
    for leaf in relevant_leaves(problem, &relevant) {
        let x = strategy.realized(tree, problem.model, leaf);
        if horizon(problem.model, leaf, &x)?.value < XReal::ZERO {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Whether `strategy` is nonzero on some relevant node.
pub fn nonzero_qs(problem: &Problem, strategy: &AdaptedStrategy) -> bool {
    !strategy.is_zero_on(problem.tree, problem.model, &relevant_flags(problem))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{AmbiguityKernel, ScenarioTree};
    use crate::models::{Frictionless, PriceRule, Stopping, Utility};

    fn dirac_family() -> (ScenarioTree, AmbiguityKernel, Frictionless) {
        let outcomes = [0.2, 0.3, 0.7, 0.9];
        let tree = ScenarioTree::new(vec![outcomes.iter().map(|w| vec![2.0 * w]).collect()]).unwrap();
        let kernel = AmbiguityKernel::dirac(&tree);
        let model = Frictionless::new(&tree, &[1.0], PriceRule::Level, Utility::Exponential { risk_aversion: 1.0 }, 1.0, 3).unwrap();
        (tree, kernel, model)
    }

    #[test]
    fn every_dirac_admits_arbitrage_but_na_holds() {
        let (tree, kernel, model) = dirac_family();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let budget = EnumerationBudget::default();
        let global = global_na_check(&problem, &budget, 1).unwrap();
        assert_eq!(global.verdict, NaVerdict::Holds);
        let scans = scan_all_selections(&problem, &budget).unwrap();
        assert_eq!(scans.len(), 4);
        let signs = [-1.0, -1.0, 1.0, 1.0];
        for (scan, sign) in scans.iter().zip(signs) {
            let first = &scan.witnesses[0];
            assert_eq!(first.root_action().unwrap(), &[sign]);
            assert_eq!(scan.witnesses.len(), 3);
        }
        assert!(horizon_dp_check(&problem, &budget, 1).unwrap());
        let cones = local_cones(&problem, 1).unwrap();
        assert!(cones[0].is_trivial());
    }

    #[test]
    fn duplicate_asset_is_redundant() {
        let tree = ScenarioTree::new(vec![vec![vec![1.2, 1.2], vec![0.8, 0.8]]]).unwrap();
        let kernel = AmbiguityKernel::homogeneous(&tree, &[vec![vec![0.5, 0.5]]]).unwrap();
        let model = Frictionless::new(&tree, &[1.0, 1.0], PriceRule::Multiplicative, Utility::Exponential { risk_aversion: 1.0 }, 1.0, 2).unwrap();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let budget = EnumerationBudget::default();
        let global = global_na_check(&problem, &budget, 2).unwrap();
        assert_eq!(global.verdict, NaVerdict::Fails);
        let w = global.witness.unwrap();
        assert_eq!(w.root_action().unwrap(), &[-1.0, 1.0]);
        assert!(!horizon_dp_check(&problem, &budget, 1).unwrap());
        let cone = &local_cones(&problem, 1).unwrap()[0];
        assert!(!cone.is_trivial());
        for h in &cone.members {
            let lifted = lift_local(&problem, NodeId::ROOT, h).unwrap();
            assert!(horizon_nonnegative(&problem, &lifted).unwrap());
        }
    }

    #[test]
    fn flat_prices_fail_everywhere() {
        let tree = ScenarioTree::new(vec![vec![vec![1.0], vec![1.0]]; 2]).unwrap();
        let kernel = AmbiguityKernel::dirac(&tree);
        let model = Frictionless::new(&tree, &[1.0], PriceRule::Multiplicative, Utility::Exponential { risk_aversion: 1.0 }, 1.0, 1).unwrap();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let budget = EnumerationBudget::default();
        assert_eq!(global_na_check(&problem, &budget, 1).unwrap().verdict, NaVerdict::Fails);
        assert!(!horizon_dp_check(&problem, &budget, 1).unwrap());
        let cones = local_cones(&problem, 1).unwrap();
        assert!(cones.iter().all(|c| c.members.len() == 3));
    }

    #[test]
    fn risk_neutral_singleton_has_no_scan_witness() {
        let tree = ScenarioTree::new(vec![vec![vec![1.5], vec![0.5]]]).unwrap();
        let kernel = AmbiguityKernel::homogeneous(&tree, &[vec![vec![0.5, 0.5]]]).unwrap();
        let model = Frictionless::new(&tree, &[1.0], PriceRule::Multiplicative, Utility::Exponential { risk_aversion: 1.0 }, 1.0, 3).unwrap();
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let scans = scan_all_selections(&problem, &EnumerationBudget::default()).unwrap();
        assert!(scans[0].witnesses.is_empty());
    }

    #[test]
    fn stopping_cones_are_surrogate_and_trivial() {
        let tree = ScenarioTree::new(vec![vec![vec![1.0], vec![2.0]]; 2]).unwrap();
        let model = Stopping::new(&tree, vec![XReal::from_f64(1.0); tree.node_count()]).unwrap();
        let kernel = AmbiguityKernel::dirac(&tree);
        let problem = Problem::new(&tree, &kernel, &model).unwrap();
        let cones = local_cones(&problem, 1).unwrap();
        assert!(cones.iter().all(|c| c.kind == ConeKind::Surrogate && c.is_trivial()));
        let budget = EnumerationBudget::default();
        assert_eq!(global_na_check(&problem, &budget, 1).unwrap().verdict, NaVerdict::Holds);
        assert!(per_measure_scan(&problem, &KernelSelection { choices: vec![0; 3] }, &budget).is_err());
    }
}
