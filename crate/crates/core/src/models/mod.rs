//! Example payoff families built on a scenario tree.

mod frictionless;
mod liquidation;
mod roch_soner;
mod semistatic;
mod stopping;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::integrand::{IntegrandError, XReal};
use crate::lattice::ScenarioTree;

pub use frictionless::Frictionless;
pub use liquidation::{Impact, Liquidation};
pub use roch_soner::{simulate as simulate_book, RochSoner, RsState};
pub use semistatic::SemiStatic;
pub use stopping::{holdings_from_stopping_time, stopping_time, Stopping, StoppingTime};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error(transparent)]
    Domain(#[from] IntegrandError),
    #[error("invalid model parameter: {0}")]
    Parameter(String),
    #[error("{what} has {got} entries, expected {expected}")]
    Length {
        what: String,
        got: usize,
        expected: usize,
    },
}

/// Utility functions bounded from above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Utility {
    /// `1 − exp(−a·v)`.
    Exponential { risk_aversion: f64 },
    /// `min(cap, v^γ/γ)` for `v > 0`, `−∞` otherwise; `γ < 1`, `γ ≠ 0`.
    Power { gamma: f64, cap: f64 },
    /// `min(cap, ln v)` for `v > 0`, `−∞` otherwise.
    Log { cap: f64 },
    /// `min(cap, v)`.
    Linear { cap: f64 },
}

impl Utility {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: &str| Err(ModelError::Parameter(m.into()));
        match *self {
            Utility::Exponential { risk_aversion } if !(risk_aversion > 0.0 && risk_aversion.is_finite()) => {
                bad("risk aversion must be positive")
            }
            Utility::Power { gamma, cap }
                if !(gamma < 1.0 && gamma != 0.0 && gamma.is_finite() && cap.is_finite()) =>
            {
                bad("power utility needs finite gamma < 1, gamma != 0, and a finite cap")
            }
            Utility::Log { cap } | Utility::Linear { cap } if !cap.is_finite() => {
                bad("utility cap must be finite")
            }
            _ => Ok(()),
        }
    }

    pub fn value(&self, v: f64) -> XReal {
        let u = match *self {
            Utility::Exponential { risk_aversion } => 1.0 - (-risk_aversion * v).exp(),
            Utility::Power { gamma, cap } => {
                if v > 0.0 {
                    (v.powf(gamma) / gamma).min(cap)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Utility::Log { cap } => {
                if v > 0.0 {
                    v.ln().min(cap)
                } else {
                    f64::NEG_INFINITY
                }
            }
            Utility::Linear { cap } => v.min(cap),
        };
        if u.is_nan() {
            XReal::NEG_INF
        } else {
            XReal::from_f64(u)
        }
    }

    pub fn upper_bound(&self) -> f64 {
        match *self {
            Utility::Exponential { .. } => 1.0,
            Utility::Power { gamma, cap } if gamma < 0.0 => cap.min(0.0),
            Utility::Power { cap, .. } | Utility::Log { cap } | Utility::Linear { cap } => cap,
        }
    }
}

/// How period outcomes move the price.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PriceRule {
    /// `S_{t+1} = S_t ⊙ ω_{t+1}`.
    #[default]
    Multiplicative,
    /// `S_{t+1} = S_t + ω_{t+1}`.
    Additive,
    /// `S_{t+1} = ω_{t+1}`.
    Level,
}

/// Price vector at every node, indexed by global node id.
pub fn price_paths(
    tree: &ScenarioTree,
    s0: &[f64],
    rule: PriceRule,
) -> Result<Vec<Vec<f64>>, ModelError> {
    if s0.len() != tree.outcome_dim() {
        return Err(ModelError::Length {
            what: "initial price".into(),
            got: s0.len(),
            expected: tree.outcome_dim(),
        });
    }
    let mut prices = vec![Vec::new(); tree.node_count()];
    prices[0] = s0.to_vec();
    for id in 1..tree.node_count() {
        let node = tree.from_global(id);
        let parent = tree.global(tree.parent(node).unwrap());
        let w = tree.outcome(node);
        let p = &prices[parent];
        prices[id] = match rule {
            PriceRule::Multiplicative => p.iter().zip(w).map(|(a, b)| a * b).collect(),
            PriceRule::Additive => p.iter().zip(w).map(|(a, b)| a + b).collect(),
            PriceRule::Level => w.to_vec(),
        };
    }
    Ok(prices)
}

/// Global ids of the nodes on each root-to-leaf path.
pub fn leaf_paths(tree: &ScenarioTree) -> Vec<Vec<usize>> {
    (0..tree.leaf_count())
        .map(|i| {
            tree.path_nodes(tree.leaf(i))
                .into_iter()
                .map(|n| tree.global(n))
                .collect()
        })
        .collect()
}

/// Price increments `S_{t+1} − S_t` along each leaf's path, flattened to
/// length `d·T`.
pub fn leaf_increments(tree: &ScenarioTree, prices: &[Vec<f64>]) -> Vec<Vec<f64>> {
    leaf_paths(tree)
        .iter()
        .map(|path| {
            path.windows(2)
                .flat_map(|w| {
                    prices[w[1]]
                        .iter()
                        .zip(&prices[w[0]])
                        .map(|(a, b)| a - b)
                        .collect::<Vec<_>>()
                })
                .collect()
        })
        .collect()
}

/// A real-valued adapted process given at every node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeProcessSpec<T> {
    /// The same value everywhere.
    Constant(T),
    /// One list per depth `0..=T`; a list of length 1 is broadcast across
    /// the depth, otherwise it must have one entry per node.
    PerDepth(Vec<Vec<T>>),
}

impl<T: Clone> NodeProcessSpec<T> {
    pub fn resolve(&self, tree: &ScenarioTree, what: &str) -> Result<Vec<T>, ModelError> {
        match self {
            NodeProcessSpec::Constant(c) => Ok(vec![c.clone(); tree.node_count()]),
            NodeProcessSpec::PerDepth(levels) => {
                if levels.len() != tree.horizon() + 1 {
                    return Err(ModelError::Length {
                        what: format!("{what} depth list"),
                        got: levels.len(),
                        expected: tree.horizon() + 1,
                    });
                }
                let mut out = Vec::with_capacity(tree.node_count());
                for (depth, level) in levels.iter().enumerate() {
                    let n = tree.nodes_at(depth);
                    if level.len() == 1 {
                        out.extend(std::iter::repeat_n(level[0].clone(), n));
                    } else if level.len() == n {
                        out.extend(level.iter().cloned());
                    } else {
                        return Err(ModelError::Length {
                            what: format!("{what} at depth {depth}"),
                            got: level.len(),
                            expected: n,
                        });
                    }
                }
                Ok(out)
            }
        }
    }
}
