//! Machine-readable run reports.

use serde::Serialize;

use crate::integrand::XReal;
use crate::noarb::{GlobalNa, LocalCone, NaVerdict, SelectionScan};

use super::config::{Expect, ProblemConfig, SCHEMA_VERSION};
use super::Command;

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: &'static str,
    pub config_hash: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub model: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub na_check: Option<NaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<ValueEntry>>,
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
}

impl RunReport {
    pub(super) fn new(command: &'static str, cfg: &ProblemConfig, model: &'static str) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION"),
            command,
            config_hash: cfg.hash(),
            name: cfg.name.clone(),
            model,
            solve: None,
            oracle: None,
            na_check: None,
            values: None,
            warnings: Vec::new(),
            checks: Vec::new(),
        }
    }

    pub(super) fn is_empty(&self) -> bool {
        self.solve.is_none() && self.oracle.is_none() && self.na_check.is_none()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Chosen action at a node along the optimal policy.
#[derive(Debug, Clone, Serialize)]
pub struct PolicyEntry {
    pub node: usize,
    pub depth: usize,
    /// Child slot taken at each depth from the root.
    pub path: Vec<usize>,
    pub action: Vec<XReal>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DoublingReport {
    pub root_value: XReal,
    pub delta: XReal,
    pub truncation_warning: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub root_value: XReal,
    pub upper_bound: XReal,
    pub zero_strategy_value: XReal,
    pub policy_value_pinned: XReal,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub policy_value_enumerated: Option<XReal>,
    pub policy: Vec<PolicyEntry>,
    /// Optimal stopping time per leaf, for stopping models.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopping_time: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling: Option<DoublingReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct StoppingOracleReport {
    pub value: XReal,
    pub delta: XReal,
    pub stopping_times: u128,
    pub best: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct OracleReport {
    pub solver_value: XReal,
    pub oracle_value: XReal,
    pub delta: XReal,
    pub strategies: u128,
    pub selections: u128,
    pub solver_root_action: Vec<XReal>,
    pub oracle_root_action: Vec<XReal>,
    pub argmax_ties: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stopping: Option<StoppingOracleReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct NaDoubling {
    pub verdict: NaVerdict,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct NaReport {
    pub verdict: NaVerdict,
    pub na_holds: Option<bool>,
    pub global: GlobalNa,
    /// Verdict of the pinned horizon recursion; `null` if inconclusive.
    pub horizon_recursion_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selections: Option<Vec<SelectionScan>>,
    pub local_cones: Vec<LocalCone>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub doubling: Option<NaDoubling>,
}

/// One value-field cell.
#[derive(Debug, Clone, Serialize)]
pub struct ValueEntry {
    pub node: usize,
    pub depth: usize,
    pub prefix: Vec<Vec<XReal>>,
    pub psi: XReal,
    /// `Φ_t` for each feasible extension, in action order.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi: Option<Vec<XReal>>,
}

/// Outcome of one embedded expectation.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn close(a: XReal, b: XReal, tol: f64) -> bool {
    a.approx_eq(b, tol)
}

fn same_action(a: &[XReal], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_f64() == *y)
}

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check {
        name: name.into(),
        passed,
        detail,
    }
}

pub(super) fn evaluate_expectations(command: Command, e: &Expect, r: &RunReport) -> Vec<Check> {
    let tol = e.tolerance;
    let mut out = Vec::new();
    match command {
        Command::Solve | Command::DumpValues => {
            let (Some(x), Some(s)) = (&e.solve, &r.solve) else {
                return out;
            };
            if let Some(v) = x.root_value {
                out.push(check(
                    "root_value",
                    close(s.root_value, v, tol),
                    format!("got {}, expected {v}", s.root_value),
                ));
            }
            if let Some(a) = &x.root_action {
                let got = &s.policy[0].action;
                out.push(check(
                    "root_action",
                    same_action(got, a),
                    format!("got {got:?}, expected {a:?}"),
                ));
            }
            if let Some(tau) = &x.stopping_time {
                out.push(check(
                    "stopping_time",
                    s.stopping_time.as_ref() == Some(tau),
                    format!("got {:?}, expected {tau:?}", s.stopping_time),
                ));
            }
        }
        Command::Oracle => {
            let Some(o) = &r.oracle else {
                return out;
            };
            let expected = e
                .oracle
                .as_ref()
                .and_then(|x| x.value)
                .or_else(|| e.solve.as_ref().and_then(|x| x.root_value));
            if let Some(v) = expected {
                out.push(check(
                    "oracle_value",
                    close(o.oracle_value, v, tol),
                    format!("got {}, expected {v}", o.oracle_value),
                ));
            }
            if let Some(n) = e.oracle.as_ref().and_then(|x| x.stopping_count) {
                let got = o.stopping.as_ref().map(|s| s.stopping_times);
                out.push(check(
                    "stopping_count",
                    got == Some(n.into()),
                    format!("got {got:?}, expected {n}"),
                ));
            }
        }
        Command::NaCheck => {
            let (Some(x), Some(n)) = (&e.na_check, &r.na_check) else {
                return out;
            };
            if let Some(h) = x.holds {
                out.push(check(
                    "na_holds",
                    n.na_holds == Some(h),
                    format!("got {:?}, expected {h}", n.na_holds),
                ));
            }
            if let Some(w) = &x.witness_root {
                let got = n
                    .global
                    .witness
                    .as_ref()
                    .and_then(|w| w.root_action())
                    .map(<[f64]>::to_vec);
                out.push(check(
                    "witness_root",
                    got.as_ref() == Some(w),
                    format!("got {got:?}, expected {w:?}"),
                ));
            }
            if let Some(roots) = &x.selection_witness_roots {
                let got: Option<Vec<Option<Vec<f64>>>> = n.selections.as_ref().map(|s| {
                    s.iter()
                        .map(|scan| {
                            scan.witnesses
                                .first()
                                .map(|w| w.root_action().map_or_else(Vec::new, <[f64]>::to_vec))
                        })
                        .collect()
                });
                out.push(check(
                    "selection_witness_roots",
                    got.as_ref() == Some(roots),
                    format!("got {got:?}, expected {roots:?}"),
                ));
            }
            if let Some(t) = x.root_cone_trivial {
                let got = n.local_cones.iter().find(|c| c.node == 0).map(|c| c.is_trivial());
                out.push(check(
                    "root_cone_trivial",
                    got == Some(t),
                    format!("got {got:?}, expected {t}"),
                ));
            }
        }
    }
    out
}
