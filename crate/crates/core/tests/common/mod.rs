//! Random instance generators and reference implementations shared by the
//! integration tests and the acceptance harness.
#![allow(dead_code)]

use knightian::integrand::{GridDomain, Integrand, IntegrandError, XReal};
use knightian::lattice::{AmbiguityKernel, NodeId, ScenarioTree};
use knightian::models::{Frictionless, PriceRule, Stopping, Utility};
use knightian::oracle::strategy_count;
use knightian::solver::Problem;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    use rand::SeedableRng;
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random tree with `T ≤ max_t` stages of at most `max_b` outcomes.
pub fn random_tree(rng: &mut TestRng, max_t: usize, max_b: usize, dim: usize) -> ScenarioTree {
    let t = rng.gen_range(1..=max_t);
    let stages = (0..t)
        .map(|_| {
            let b = rng.gen_range(2..=max_b);
            (0..b)
                .map(|_| (0..dim).map(|_| rng.gen_range(0.6..1.5)).collect())
                .collect()
        })
        .collect();
    ScenarioTree::new(stages).unwrap()
}

fn random_vector(rng: &mut TestRng, b: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..b)
        .map(|_| if rng.gen_bool(0.15) { 0.0 } else { rng.gen_range(0.05..1.0) })
        .collect();
    if v.iter().all(|&x| x == 0.0) {
        v[rng.gen_range(0..b)] = 1.0;
    }
    let s: f64 = v.iter().sum();
    v.iter_mut().for_each(|x| *x /= s);
    v
}

/// Between 1 and `max_k` random probability vectors at every node.
pub fn random_kernel(rng: &mut TestRng, tree: &ScenarioTree, max_k: usize) -> AmbiguityKernel {
    let lists = (0..tree.internal_node_count())
        .map(|id| {
            let b = tree.branching(tree.from_global(id).depth);
            let k = rng.gen_range(1..=max_k);
            (0..k).map(|_| random_vector(rng, b)).collect()
        })
        .collect();
    AmbiguityKernel::new(tree, lists).unwrap()
}

/// The kernel with one extra random vector appended at each node.
pub fn enlarge_kernel(rng: &mut TestRng, tree: &ScenarioTree, k: &AmbiguityKernel) -> AmbiguityKernel {
    let lists = (0..tree.internal_node_count())
        .map(|id| {
            let mut l = k.vectors_by_id(id).to_vec();
            let b = tree.branching(tree.from_global(id).depth);
            l.push(random_vector(rng, b));
            l
        })
        .collect();
    AmbiguityKernel::new(tree, lists).unwrap()
}

/// A single random vector per node.
pub fn singleton_kernel(rng: &mut TestRng, tree: &ScenarioTree) -> AmbiguityKernel {
    random_kernel(rng, tree, 1)
}

/// A payoff given by an explicit table over (leaf, strategy), on a random
/// non-integer grid, with coupled feasibility and occasional `−∞` values.
pub struct TablePayoff {
    domain: GridDomain,
    leaves: usize,
    /// `forbidden[t][a]`: action `a` at `t + 1` is not allowed after it.
    forbidden: Vec<Vec<Vec<bool>>>,
    values: Vec<XReal>,
    radix: Vec<usize>,
    bound: f64,
}

impl TablePayoff {
    pub fn random(rng: &mut TestRng, tree: &ScenarioTree, max_actions: usize, dim: usize) -> Self {
        let horizon = tree.horizon();
        let mut periods = Vec::new();
        for _ in 0..horizon {
            let n = rng.gen_range(1..=max_actions);
            let mut pts = vec![vec![0.0; dim]];
            while pts.len() < n {
                let p: Vec<f64> = (0..dim).map(|_| f64::from(rng.gen_range(-4i32..=4)) * 0.5).collect();
                if !pts.contains(&p) {
                    pts.push(p);
                }
            }
            periods.push(pts);
        }
        let domain = GridDomain::new(periods, None).unwrap();
        let forbidden = (0..horizon.saturating_sub(1))
            .map(|t| {
                (0..domain.len(t))
                    .map(|_| {
                        (0..domain.len(t + 1))
                            .map(|b| b != domain.zero_action(t + 1) && rng.gen_bool(0.25))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let radix: Vec<usize> = (0..horizon).map(|t| domain.len(t)).collect();
        let total: usize = radix.iter().product::<usize>() * tree.leaf_count();
        let bound = 1.0;
        let mut values: Vec<XReal> = (0..total)
            .map(|_| {
                if rng.gen_bool(0.08) {
                    XReal::NEG_INF
                } else {
                    XReal::from_f64(rng.gen_range(-1.0..bound))
                }
            })
            .collect();
        let mut me = Self {
            domain,
            leaves: tree.leaf_count(),
            forbidden,
            values: Vec::new(),
            radix,
            bound,
        };
        let zero: Vec<usize> = (0..horizon).map(|t| me.domain.zero_action(t)).collect();
        for leaf in 0..me.leaves {
            let i = me.index(leaf, &zero);
            if values[i].is_neg_inf() {
                values[i] = XReal::from_f64(rng.gen_range(-1.0..bound));
            }
        }
        me.values = values;
        me
    }

    fn index(&self, leaf: usize, actions: &[usize]) -> usize {
        let mut i = leaf;
        for (&a, &r) in actions.iter().zip(&self.radix) {
            i = i * r + a;
        }
        i
    }

    pub fn set_all_finite(&mut self) {
        for v in &mut self.values {
            if v.is_neg_inf() {
                *v = XReal::ZERO;
            }
        }
    }
}

impl Integrand for TablePayoff {
    fn name(&self) -> &'static str {
        "table"
    }

    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn upper_bound(&self) -> f64 {
        self.bound
    }

    fn leaf_count(&self) -> usize {
        self.leaves
    }

    fn feasible_actions(&self, t: usize, prefix: &[usize]) -> Result<Vec<usize>, IntegrandError> {
        if prefix.len() != t || t >= self.domain.horizon() {
            return Err(IntegrandError::InfeasiblePrefix(t));
        }
        for s in 1..t {
            if prefix[s] >= self.domain.len(s) || self.forbidden[s - 1][prefix[s - 1]][prefix[s]] {
                return Err(IntegrandError::InfeasiblePrefix(t));
            }
        }
        Ok((0..self.domain.len(t))
            .filter(|&b| t == 0 || !self.forbidden[t - 1][prefix[t - 1]][b])
            .collect())
    }

    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal {
        self.values[self.index(leaf, actions)]
    }
}

/// Solver-sized random instance of a table payoff: strategies times
/// selections stays below `work`.
pub struct TableInstance {
    pub tree: ScenarioTree,
    pub kernel: AmbiguityKernel,
    pub model: TablePayoff,
}

impl TableInstance {
    pub fn problem(&self) -> Problem<'_> {
        Problem::new(&self.tree, &self.kernel, &self.model).unwrap()
    }
}

pub fn random_table_instance(rng: &mut TestRng, work: u128) -> TableInstance {
    loop {
        let tree = random_tree(rng, 3, 3, 1);
        let kernel = random_kernel(rng, &tree, 3);
        let dim = rng.gen_range(1..=2);
        let model = TablePayoff::random(rng, &tree, 5, dim);
        let p = Problem::new(&tree, &kernel, &model).unwrap();
        let s = strategy_count(&p).unwrap();
        let sel = kernel.selection_count(&tree, NodeId::ROOT);
        if let (Some(s), Some(sel)) = (s, sel) {
            if s.saturating_mul(sel).saturating_mul(tree.leaf_count() as u128) <= work {
                return TableInstance { tree, kernel, model };
            }
        }
    }
}

/// Random one-asset frictionless model.
pub fn random_frictionless(rng: &mut TestRng, tree: &ScenarioTree, radius: u32) -> Frictionless {
    let rule = *[PriceRule::Multiplicative, PriceRule::Additive]
        .choose(rng)
        .unwrap();
    let utility = Utility::Exponential {
        risk_aversion: rng.gen_range(0.3..2.0),
    };
    Frictionless::new(tree, &vec![1.0; tree.outcome_dim()], rule, utility, rng.gen_range(0.5..2.0), radius).unwrap()
}

/// Random stopping model with finite rewards.
pub fn random_stopping(rng: &mut TestRng, tree: &ScenarioTree) -> Stopping {
    let g = (0..tree.node_count())
        .map(|_| XReal::from_f64(f64::from(rng.gen_range(0i32..20)) / 4.0))
        .collect();
    Stopping::new(tree, g).unwrap()
}

/// Single-prior dynamic programming written directly on action sequences:
/// `V(node, prefix) = max_a Σ_k p_k V(child_k, prefix + a)`.
pub fn classical_dp(tree: &ScenarioTree, kernel: &AmbiguityKernel, model: &dyn Integrand) -> XReal {
    fn go(
        tree: &ScenarioTree,
        kernel: &AmbiguityKernel,
        model: &dyn Integrand,
        node: NodeId,
        prefix: &mut Vec<usize>,
    ) -> XReal {
        let t = node.depth;
        if t == tree.horizon() {
            return model.terminal_value(node.index, prefix);
        }
        let p = &kernel.vectors(tree, node)[0];
        let acts = model.feasible_actions(t, prefix).unwrap();
        let mut best = XReal::NEG_INF;
        for a in acts {
            prefix.push(a);
            let mut acc = 0.0;
            let mut dead = false;
            for (k, child) in tree.children(node).enumerate() {
                if p[k] == 0.0 {
                    continue;
                }
                let v = go(tree, kernel, model, child, prefix);
                match v.finite() {
                    Some(x) => acc += p[k] * x,
                    None => dead = true,
                }
            }
            prefix.pop();
            let v = if dead { XReal::NEG_INF } else { XReal::from_f64(acc) };
            if v > best {
                best = v;
            }
        }
        best
    }
    go(tree, kernel, model, NodeId::ROOT, &mut Vec::new())
}

/// Path to the repository's sample configs.
pub fn configs_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

pub fn sample_configs() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(configs_dir())
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "json").then(|| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    std::fs::read_to_string(&p).unwrap(),
                )
            })
        })
        .collect();
    out.sort();
    out
}
