//! Problem configuration documents.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::integrand::{GridDomain, Integrand, XReal};
use crate::lattice::{AmbiguityKernel, ScenarioTree};
use crate::models::{
    price_paths, Frictionless, Impact, Liquidation, NodeProcessSpec, PriceRule, RochSoner,
    SemiStatic, Stopping, Utility,
};

use super::CliError;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub schema_version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub tree: TreeSpec,
    pub kernel: KernelSpec,
    pub model: ModelSpec,
    /// Declared per-period spacing of the action grid; one entry is
    /// broadcast to every period.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_spacing: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expect: Option<Expect>,
}

/// A scalar outcome may be written as a bare number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutcomeSpec {
    Scalar(f64),
    Vector(Vec<f64>),
}

impl OutcomeSpec {
    fn to_vec(&self) -> Vec<f64> {
        match self {
            OutcomeSpec::Scalar(x) => vec![*x],
            OutcomeSpec::Vector(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    pub stages: Vec<Vec<OutcomeSpec>>,
    /// Repeat the stage list this many times.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeat: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum KernelSpec {
    /// One vector list per depth, applied at every node of that depth; a
    /// single list is used at every depth.
    PerDepth { vectors: Vec<Vec<Vec<f64>>> },
    /// One vector list per non-leaf node, in breadth-first order.
    PerNode { vectors: Vec<Vec<Vec<f64>>> },
    /// Every point mass at every node.
    Dirac,
    BinomialBand {
        up: Vec<usize>,
        down: Vec<usize>,
        p: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ClaimSpec {
    /// `(S_T − strike)^+ − price` on one asset.
    Call {
        #[serde(default)]
        asset: usize,
        strike: f64,
        price: f64,
    },
    /// `(strike − S_T)^+ − price` on one asset.
    Put {
        #[serde(default)]
        asset: usize,
        strike: f64,
        price: f64,
    },
    /// Net payoff given per leaf.
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardSpec {
    /// `G` given per node (a constant, or one list per depth).
    Process { values: NodeProcessSpec<XReal> },
    /// `(strike − S_t)^+`.
    AmericanPut {
        s0: f64,
        #[serde(default)]
        price_rule: PriceRule,
        strike: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImpactSpec {
    pub resilience: f64,
    pub depth: NodeProcessSpec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Frictionless {
        s0: Vec<f64>,
        #[serde(default)]
        price_rule: PriceRule,
        utility: Utility,
        x0: f64,
        radius: u32,
    },
    SemiStatic {
        s0: Vec<f64>,
        #[serde(default)]
        price_rule: PriceRule,
        utility: Utility,
        x0: f64,
        radius: u32,
        static_radius: u32,
        claims: Vec<ClaimSpec>,
    },
    Stopping {
        rewards: RewardSpec,
    },
    Liquidation {
        s0: f64,
        #[serde(default)]
        price_rule: PriceRule,
        utility: Utility,
        x0: f64,
        initial_position: u32,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        impact: Option<ImpactSpec>,
    },
    RochSoner {
        s0: f64,
        #[serde(default)]
        price_rule: PriceRule,
        resilience: f64,
        depth: NodeProcessSpec<f64>,
        utility: Utility,
        radius: u32,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub workers: usize,
    pub doubling_check: bool,
    pub budget_strategies: u64,
    pub budget_selections: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            workers: 1,
            doubling_check: true,
            budget_strategies: 10_000_000,
            budget_selections: 1_000_000,
        }
    }
}

/// Assertions a run of the config is expected to satisfy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expect {
    /// Expected exit code of every command without its own.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    /// Substring of the diagnostic accompanying a nonzero exit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message_contains: Option<String>,
    #[serde(default = "default_expect_tolerance")]
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<ExpectSolve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<ExpectOracle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub na_check: Option<ExpectNa>,
}

impl Expect {
    /// Exit code `command` is expected to return.
    pub fn exit_code_for(&self, command: super::Command) -> i32 {
        use super::Command;
        let own = match command {
            Command::Solve | Command::DumpValues => self.solve.as_ref().and_then(|x| x.exit_code),
            Command::Oracle => self.oracle.as_ref().and_then(|x| x.exit_code),
            Command::NaCheck => self.na_check.as_ref().and_then(|x| x.exit_code),
        };
        own.or(self.exit_code).unwrap_or(0)
    }
}

fn default_expect_tolerance() -> f64 {
    1e-7
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectSolve {
    /// Expected exit code of this command, overriding the shared one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_value: Option<XReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_action: Option<Vec<f64>>,
    /// Stopping time per leaf.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopping_time: Option<Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectOracle {
    /// Expected exit code of this command, overriding the shared one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<XReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stopping_count: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectNa {
    /// Expected exit code of this command, overriding the shared one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exit_code: Option<i32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holds: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness_root: Option<Vec<f64>>,
    /// Root action of the first witness of each selection, `null` when the
    /// selection admits none.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selection_witness_roots: Option<Vec<Option<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub root_cone_trivial: Option<bool>,
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: ProblemConfig =
            serde_json::from_str(text).map_err(|e| CliError::Validation(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    /// SHA-256 of the canonical serialization (sorted keys, no whitespace).
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_value(self)
            .and_then(|v| serde_json::to_string(&v))
            .expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn build(&self) -> Result<Instance, CliError> {
        let mut stages: Vec<Vec<Vec<f64>>> = self
            .tree
            .stages
            .iter()
            .map(|s| s.iter().map(OutcomeSpec::to_vec).collect())
            .collect();
        if let Some(n) = self.tree.repeat {
            stages = std::iter::repeat_n(stages, n).flatten().collect();
        }
        let tree = ScenarioTree::new(stages).map_err(validation)?;
        let kernel = self.build_kernel(&tree)?;
        let model = self.build_model(&tree)?;
        if let Some(spacing) = &self.grid_spacing {
            let dom = model.as_dyn().domain();
            let declared = if spacing.len() == 1 {
                vec![spacing[0]; dom.horizon()]
            } else {
                spacing.clone()
            };
            let periods = (0..dom.horizon()).map(|t| dom.actions(t).to_vec()).collect();
            GridDomain::new(periods, Some(&declared)).map_err(validation)?;
        }
        Ok(Instance {
            tree,
            kernel,
            model,
        })
    }

    fn build_kernel(&self, tree: &ScenarioTree) -> Result<AmbiguityKernel, CliError> {
        let k = match &self.kernel {
            KernelSpec::PerDepth { vectors } => {
                if vectors.len() == 1 && tree.horizon() > 1 {
                    AmbiguityKernel::homogeneous(tree, &vec![vectors[0].clone(); tree.horizon()])
                } else {
                    AmbiguityKernel::homogeneous(tree, vectors)
                }
            }
            KernelSpec::PerNode { vectors } => AmbiguityKernel::new(tree, vectors.clone()),
            KernelSpec::Dirac => Ok(AmbiguityKernel::dirac(tree)),
            KernelSpec::BinomialBand { up, down, p } => {
                AmbiguityKernel::binomial_band(tree, up, down, p)
            }
        };
        k.map_err(validation)
    }

    fn build_model(&self, tree: &ScenarioTree) -> Result<Model, CliError> {
        let m = match &self.model {
            ModelSpec::Frictionless {
                s0,
                price_rule,
                utility,
                x0,
                radius,
            } => Model::Frictionless(
                Frictionless::new(tree, s0, *price_rule, *utility, *x0, *radius).map_err(validation)?,
            ),
            ModelSpec::SemiStatic {
                s0,
                price_rule,
                utility,
                x0,
                radius,
                static_radius,
                claims,
            } => {
                let claims = claim_tables(tree, s0, *price_rule, claims)?;
                Model::SemiStatic(SemiStatic::new(
                    tree,
                    s0,
                    *price_rule,
                    *utility,
                    *x0,
                    *radius,
                    *static_radius,
                    &claims,
                )
                .map_err(validation)?)
            }
            ModelSpec::Stopping { rewards } => {
                let g = match rewards {
                    RewardSpec::Process { values } => values.resolve(tree, "rewards").map_err(validation)?,
                    RewardSpec::AmericanPut {
                        s0,
                        price_rule,
                        strike,
                    } => price_paths(tree, &[*s0], *price_rule)
                        .map_err(validation)?
                        .iter()
                        .map(|p| XReal::from_f64((strike - p[0]).max(0.0)))
                        .collect(),
                };
                Model::Stopping(Stopping::new(tree, g).map_err(validation)?)
            }
            ModelSpec::Liquidation {
                s0,
                price_rule,
                utility,
                x0,
                initial_position,
                impact,
            } => {
                let impact = match impact {
                    Some(i) => Some(Impact {
                        resilience: i.resilience,
                        depth: i.depth.resolve(tree, "depth").map_err(validation)?,
                    }),
                    None => None,
                };
                Model::Liquidation(Liquidation::new(
                    tree,
                    *s0,
                    *price_rule,
                    *utility,
                    *x0,
                    *initial_position,
                    impact,
                )
                .map_err(validation)?)
            }
            ModelSpec::RochSoner {
                s0,
                price_rule,
                resilience,
                depth,
                utility,
                radius,
            } => {
                let depth = depth.resolve(tree, "depth").map_err(validation)?;
                Model::RochSoner(RochSoner::new(
                    tree,
                    *s0,
                    *price_rule,
                    *resilience,
                    depth,
                    *utility,
                    *radius,
                )
                .map_err(validation)?)
            }
        };
        Ok(m)
    }
}

fn validation(e: impl std::fmt::Display) -> CliError {
    CliError::Validation(e.to_string())
}

fn claim_tables(
    tree: &ScenarioTree,
    s0: &[f64],
    rule: PriceRule,
    claims: &[ClaimSpec],
) -> Result<Vec<Vec<f64>>, CliError> {
    let prices = price_paths(tree, s0, rule).map_err(validation)?;
    let first = tree.global(tree.leaf(0));
    let terminal = &prices[first..];
    claims
        .iter()
        .map(|c| match c {
            ClaimSpec::Call { asset, strike, price } | ClaimSpec::Put { asset, strike, price } => {
                if *asset >= s0.len() {
                    return Err(CliError::Validation(format!("claim on missing asset {asset}")));
                }
                let call = matches!(c, ClaimSpec::Call { .. });
                Ok(terminal
                    .iter()
                    .map(|s| {
                        let payoff = if call { s[*asset] - strike } else { strike - s[*asset] };
                        payoff.max(0.0) - price
                    })
                    .collect())
            }
            ClaimSpec::Table { values } => Ok(values.clone()),
        })
        .collect()
}

/// A built model, kept concrete so model-specific reports stay available.
pub enum Model {
    Frictionless(Frictionless),
    SemiStatic(SemiStatic),
    Stopping(Stopping),
    Liquidation(Liquidation),
    RochSoner(RochSoner),
}

impl Model {
    pub fn as_dyn(&self) -> &dyn Integrand {
        match self {
            Model::Frictionless(m) => m,
            Model::SemiStatic(m) => m,
            Model::Stopping(m) => m,
            Model::Liquidation(m) => m,
            Model::RochSoner(m) => m,
        }
    }

    pub fn stopping(&self) -> Option<&Stopping> {
        match self {
            Model::Stopping(m) => Some(m),
            _ => None,
        }
    }
}

/// Tree, kernels and model built from a config.
pub struct Instance {
    pub tree: ScenarioTree,
    pub kernel: AmbiguityKernel,
    pub model: Model,
}
