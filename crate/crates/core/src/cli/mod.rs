//! Batch front end: config ingestion, commands and JSON reports.

mod config;
mod report;

use std::time::Instant;

use thiserror::Error;

use crate::integrand::XReal;
use crate::lattice::NodeId;
use crate::noarb::{self, NaVerdict, NoarbError};
use crate::oracle::{self, EnumerationBudget, OracleError};
use crate::solver::{self, Problem, SolveOptions, SolverError, VALUE_TOLERANCE};

pub use config::{
    ClaimSpec, Expect, ExpectNa, ExpectOracle, ExpectSolve, ImpactSpec, Instance, KernelSpec,
    Model, ModelSpec, OutcomeSpec, ProblemConfig, RewardSpec, SolverConfig, TreeSpec, SCHEMA_VERSION,
};
pub use report::{
    Check, DoublingReport, NaDoubling, NaReport, OracleReport, PolicyEntry, RunReport,
    SolveReport, StoppingOracleReport, ValueEntry,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_VALIDATION: i32 = 3;
pub const EXIT_BUDGET: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

/// Seed for the upper-bound probes run at ingestion.
const PROBE_SEED: u64 = 0x5eed;
const PROBES: usize = 256;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CliError {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("{0}")]
    Failure(String),
    #[error("inconclusive: {0}")]
    Inconclusive(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Infeasible(_) => EXIT_INFEASIBLE,
            CliError::Budget(_) => EXIT_BUDGET,
            CliError::Failure(_) => EXIT_FAILURE,
            CliError::Inconclusive(_) => EXIT_INCONCLUSIVE,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Infeasible(_) => CliError::Infeasible(e.to_string()),
            SolverError::UpperBound { .. } | SolverError::Shape(_) | SolverError::Integrand(_) => {
                CliError::Validation(e.to_string())
            }
            SolverError::Consistency(_) | SolverError::Pool(_) => CliError::Failure(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Budget { .. } => CliError::Budget(e.to_string()),
            OracleError::NoStrategy => CliError::Infeasible(e.to_string()),
            OracleError::Integrand(_) => CliError::Validation(e.to_string()),
            OracleError::Solver(s) => s.into(),
        }
    }
}

impl From<NoarbError> for CliError {
    fn from(e: NoarbError) -> Self {
        match e {
            NoarbError::Oracle(o) => o.into(),
            NoarbError::Solver(s) => s.into(),
            NoarbError::Integrand(_) => CliError::Validation(e.to_string()),
            NoarbError::NotGainForm(_) => CliError::Validation(e.to_string()),
            NoarbError::Inconclusive => CliError::Inconclusive(e.to_string()),
            NoarbError::Consistency(_) => CliError::Failure(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Oracle,
    NaCheck,
    DumpValues,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Oracle => "oracle",
            Command::NaCheck => "na-check",
            Command::DumpValues => "dump-values",
        }
    }
}

/// Command-line overrides of the config's solver options.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub workers: Option<usize>,
    pub budget_strategies: Option<u64>,
    pub budget_selections: Option<u64>,
    pub no_doubling_check: bool,
}

/// What a command produced: a report (possibly alongside a failure) and
/// the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Option<RunReport>,
    pub exit_code: i32,
    /// Diagnostics for standard error.
    pub messages: Vec<String>,
}

impl Outcome {
    fn error(e: CliError) -> Self {
        Self {
            report: None,
            exit_code: e.exit_code(),
            messages: vec![e.to_string()],
        }
    }
}

/// Runs `command` on the config text.
pub fn run(command: Command, config_text: &str, overrides: &Overrides) -> Outcome {
    let cfg = match ProblemConfig::parse(config_text) {
        Ok(c) => c,
        Err(e) => return Outcome::error(e),
    };
    run_config(command, &cfg, overrides)
}

pub fn run_config(command: Command, cfg: &ProblemConfig, overrides: &Overrides) -> Outcome {
    let started = Instant::now();
    let mut settings = cfg.solver.clone();
    if let Some(w) = overrides.workers {
        settings.workers = w;
    }
    if let Some(b) = overrides.budget_strategies {
        settings.budget_strategies = b;
    }
    if let Some(b) = overrides.budget_selections {
        settings.budget_selections = b;
    }
    if overrides.no_doubling_check {
        settings.doubling_check = false;
    }
    if settings.workers == 0 {
        return Outcome::error(CliError::Validation("workers must be at least 1".into()));
    }
    let instance = match cfg.build() {
        Ok(i) => i,
        Err(e) => return Outcome::error(e),
    };
    let mut report = RunReport::new(command.name(), cfg, instance.model.as_dyn().name());
    let result = match command {
        Command::Solve => cmd_solve(&instance, &settings, &mut report, false),
        Command::DumpValues => cmd_solve(&instance, &settings, &mut report, true),
        Command::Oracle => cmd_oracle(&instance, &settings, &mut report),
        Command::NaCheck => cmd_nacheck(&instance, &settings, &mut report),
    };
    let mut messages = report.warnings.clone();
    let mut exit_code = match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            messages.push(e.to_string());
            if report.is_empty() {
                return Outcome {
                    report: None,
                    exit_code: e.exit_code(),
                    messages,
                };
            }
            e.exit_code()
        }
    };
    if let Some(expect) = &cfg.expect {
        report.checks = report::evaluate_expectations(command, expect, &report);
        for c in report.checks.iter().filter(|c| !c.passed) {
            messages.push(format!("expectation failed: {} ({})", c.name, c.detail));
            if exit_code == EXIT_OK {
                exit_code = EXIT_FAILURE;
            }
        }
    }
    messages.push(format!(
        "{} finished in {:.3} s",
        command.name(),
        started.elapsed().as_secs_f64()
    ));
    Outcome {
        report: Some(report),
        exit_code,
        messages,
    }
}

fn budget(settings: &SolverConfig) -> EnumerationBudget {
    EnumerationBudget {
        strategies: settings.budget_strategies.into(),
        selections: settings.budget_selections.into(),
    }
}

fn problem(instance: &Instance) -> Result<Problem<'_>, CliError> {
    Ok(Problem::new(
        &instance.tree,
        &instance.kernel,
        instance.model.as_dyn(),
    )?)
}

fn cmd_solve(
    instance: &Instance,
    settings: &SolverConfig,
    report: &mut RunReport,
    dump: bool,
) -> Result<(), CliError> {
    let problem = problem(instance)?;
    let model = problem.model;
    let tree = problem.tree;
    let zero_value = solver::check_assumptions(&problem, PROBES, PROBE_SEED)?;
    let opts = SolveOptions {
        workers: settings.workers,
    };
    let sol = solver::solve(&problem, opts)?;
    let root = sol.root_value();
    let eval = solver::evaluate_policy(&problem, &sol.strategy, settings.budget_selections.into())?;
    if !eval.pinned.approx_eq(root, VALUE_TOLERANCE) {
        return Err(CliError::Failure(format!(
            "extracted policy is worth {} but the root value is {root}",
            eval.pinned
        )));
    }
    let dom = model.domain();
    let policy = (0..tree.internal_node_count())
        .map(|id| {
            let node = tree.from_global(id);
            PolicyEntry {
                node: id,
                depth: node.depth,
                path: tree.encode_path(node),
                action: reals(dom.action(node.depth, sol.strategy.actions[id])),
            }
        })
        .collect();
    let stopping_time = instance
        .model
        .stopping()
        .map(|s| s.stopping_time_of(tree, &sol.strategy).per_leaf);
    let doubling = if settings.doubling_check {
        model
            .widened()
            .map(|wide| -> Result<DoublingReport, CliError> {
                let wp = problem.with_model(wide.as_ref());
                let wide_root = solver::backward_induct(&wp, opts)?.root_value();
                let delta = wide_root.distance(root);
                let truncated = delta > VALUE_TOLERANCE;
                if truncated {
                    report.warnings.push(format!(
                        "window truncation: root value moves by {delta:e} when the window is doubled"
                    ));
                }
                Ok(DoublingReport {
                    root_value: wide_root,
                    delta: XReal::from_f64(delta),
                    truncation_warning: truncated,
                })
            })
            .transpose()?
    } else {
        None
    };
    report.solve = Some(SolveReport {
        root_value: root,
        upper_bound: XReal::from_f64(model.upper_bound()),
        zero_strategy_value: zero_value,
        policy_value_pinned: eval.pinned,
        policy_value_enumerated: eval.enumerated,
        policy,
        stopping_time,
        doubling,
    });
    if dump {
        let field = &sol.field;
        let mut values = Vec::new();
        for t in 0..=tree.horizon() {
            for i in 0..tree.nodes_at(t) {
                let node = NodeId { depth: t, index: i };
                for p in 0..field.trie.len(t) {
                    let prefix = field.trie.actions(t, p);
                    let phi = if t < tree.horizon() {
                        Some(
                            field
                                .trie
                                .extensions(t, p)
                                .map(|c| field.phi_cell(t, i, c))
                                .collect(),
                        )
                    } else {
                        None
                    };
                    values.push(ValueEntry {
                        node: tree.global(node),
                        depth: t,
                        prefix: prefix
                            .iter()
                            .enumerate()
                            .map(|(s, &a)| reals(dom.action(s, a)))
                            .collect(),
                        psi: field.psi_cell(t, i, p),
                        phi,
                    });
                }
            }
        }
        report.values = Some(values);
    }
    Ok(())
}

fn cmd_oracle(instance: &Instance, settings: &SolverConfig, report: &mut RunReport) -> Result<(), CliError> {
    let problem = problem(instance)?;
    let model = problem.model;
    let tree = problem.tree;
    let budget = budget(settings);
    solver::check_assumptions(&problem, PROBES, PROBE_SEED)?;
    // Refuse before any work when the instance is out of budget.
    match oracle::strategy_count(&problem).map_err(|e| CliError::Validation(e.to_string()))? {
        Some(n) if n <= budget.strategies => {}
        count => {
            return Err(OracleError::Budget {
                what: "adapted strategy",
                count,
                limit: budget.strategies,
            }
            .into())
        }
    }
    let sol = solver::solve(&problem, SolveOptions { workers: settings.workers })?;
    let brute = oracle::supinf_bruteforce(&problem, &budget, settings.workers)?;
    let root = sol.root_value();
    let delta = brute.value.distance(root);
    let dom = model.domain();
    let solver_action = sol.strategy.actions[0];
    let oracle_action = brute.argmax.actions[0];
    let ties = solver_action == oracle_action && delta <= VALUE_TOLERANCE;
    let stopping = match instance.model.stopping() {
        Some(s) => {
            let r = oracle::stopping_bruteforce(tree, &instance.kernel, s, &budget)?;
            let d = r.value.distance(root);
            Some(StoppingOracleReport {
                value: r.value,
                delta: XReal::from_f64(d),
                stopping_times: r.count,
                best: r.best.per_leaf,
            })
        }
        None => None,
    };
    report.oracle = Some(OracleReport {
        solver_value: root,
        oracle_value: brute.value,
        delta: XReal::from_f64(delta),
        strategies: brute.strategies,
        selections: brute.selections,
        solver_root_action: reals(dom.action(0, solver_action)),
        oracle_root_action: reals(dom.action(0, oracle_action)),
        argmax_ties: ties,
        stopping,
    });
    let o = report.oracle.as_ref().expect("just set");
    if delta > VALUE_TOLERANCE {
        return Err(CliError::Failure(format!(
            "solver and brute force differ by {delta:e}"
        )));
    }
    if !ties {
        return Err(CliError::Failure(
            "solver policy does not tie the brute-force argmax at the root".into(),
        ));
    }
    if let Some(s) = &o.stopping {
        if s.delta.to_f64() > VALUE_TOLERANCE {
            return Err(CliError::Failure(format!(
                "solver and stopping-time enumeration differ by {:e}",
                s.delta.to_f64()
            )));
        }
    }
    Ok(())
}

fn cmd_nacheck(instance: &Instance, settings: &SolverConfig, report: &mut RunReport) -> Result<(), CliError> {
    let problem = problem(instance)?;
    let model = problem.model;
    let budget = budget(settings);
    let workers = settings.workers;
    solver::check_assumptions(&problem, PROBES, PROBE_SEED)?;
    let global = noarb::global_na_check(&problem, &budget, workers)?;
    let recursion = match noarb::horizon_dp_check(&problem, &budget, workers) {
        Ok(holds) => {
            noarb::cross_check(&global, holds)?;
            Some(holds)
        }
        Err(NoarbError::Inconclusive) => None,
        Err(e) => return Err(e.into()),
    };
    let zeros = vec![0.0; model.domain().dim() * problem.tree.horizon()];
    let selections = if model.gain(0, &zeros).is_some() {
        Some(noarb::scan_all_selections(&problem, &budget)?)
    } else {
        None
    };
    let cones = noarb::local_cones(&problem, workers)?;
    let doubling = if settings.doubling_check {
        match model.widened() {
            Some(wide) => {
                let wp = problem.with_model(wide.as_ref());
                match noarb::global_na_check(&wp, &budget, workers) {
                    Ok(g) => {
                        let agrees = g.verdict == global.verdict;
                        if !agrees {
                            report.warnings.push(format!(
                                "window truncation: the verdict on the doubled window is {:?}",
                                g.verdict
                            ));
                        }
                        Some(NaDoubling {
                            verdict: g.verdict,
                            agrees,
                        })
                    }
                    Err(NoarbError::Oracle(OracleError::Budget { .. })) => {
                        report
                            .warnings
                            .push("doubled-window NA search skipped: over budget".into());
                        None
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            None => None,
        }
    } else {
        None
    };
    let verdict = global.verdict;
    report.na_check = Some(NaReport {
        verdict,
        na_holds: match verdict {
            NaVerdict::Holds => Some(true),
            NaVerdict::Fails => Some(false),
            NaVerdict::Inconclusive => None,
        },
        global,
        horizon_recursion_holds: recursion,
        selections,
        local_cones: cones,
        doubling,
    });
    if verdict == NaVerdict::Inconclusive {
        return Err(CliError::Inconclusive(
            "a numeric horizon did not stabilize and no witness was found".into(),
        ));
    }
    Ok(())
}

fn reals(x: &[f64]) -> Vec<XReal> {
    x.iter().map(|&v| XReal::from_f64(v)).collect()
}
