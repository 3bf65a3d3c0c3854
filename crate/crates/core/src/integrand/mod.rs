//! Extended-real payoff functionals on discrete strategy domains.

mod grid;
mod horizon;
mod xreal;

use thiserror::Error;

pub use grid::{check_grid_condition, integer_box, tie_order, GridDomain, SPACING_TOLERANCE};
pub use horizon::{
    default_schedule, horizon, horizon_numeric, HorizonKind, HorizonValue, STABILIZATION_TOLERANCE,
};
pub use xreal::{format_f64, serialize_f64, serialize_f64_nested, serialize_f64_seq, XReal};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrandError {
    #[error("grid condition violated in period {period}: {detail}")]
    GridConditionViolation { period: usize, detail: String },
    #[error("domain period {0} does not contain the zero action")]
    MissingZero(usize),
    #[error("domain period {0} is empty")]
    EmptyDomain(usize),
    #[error("action has dimension {got}, expected {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("non-finite coordinate in domain")]
    NonFinite,
    #[error("action prefix of length {0} is infeasible")]
    InfeasiblePrefix(usize),
    #[error("no closed-form horizon for this integrand")]
    NotAvailable,
    #[error("horizon estimate did not stabilize (last values {0} and {1})")]
    NotStabilized(XReal, XReal),
}

/// How the numeric horizon estimator generates candidate points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HorizonSupport {
    /// The domain is the finite set of all feasible strategies.
    Bounded,
    /// The domain is an unbounded integer lattice of which the action
    /// window is only a truncation; values off the window come from
    /// [`Integrand::evaluate_unbounded`].
    IntegerLattice,
}

/// A payoff `Ψ(ω, x)` on the leaves of a scenario tree.
///
/// Strategies are handled as sequences of action indices into
/// [`domain`](Integrand::domain); feasibility of a prefix does not depend on
/// the path, so the set of feasible strategies is a product-like trie shared
/// by every scenario.
pub trait Integrand: Send + Sync {
    fn name(&self) -> &'static str;

    fn domain(&self) -> &GridDomain;

    /// The constant `C` bounding every value from above.
    fn upper_bound(&self) -> f64;

    fn leaf_count(&self) -> usize;

    /// Actions available in period `t` after the feasible `prefix`.
    fn feasible_actions(&self, t: usize, prefix: &[usize]) -> Result<Vec<usize>, IntegrandError> {
        if prefix.len() != t
            || prefix
                .iter()
                .enumerate()
                .any(|(s, &a)| a >= self.domain().len(s))
        {
            return Err(IntegrandError::InfeasiblePrefix(t));
        }
        Ok((0..self.domain().len(t)).collect())
    }

    /// Value of a feasible full strategy (one action index per period).
    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal;

    fn is_feasible(&self, actions: &[usize]) -> bool {
        (0..actions.len()).all(|t| {
            self.feasible_actions(t, &actions[..t])
                .map(|f| f.contains(&actions[t]))
                .unwrap_or(false)
        })
    }

    /// `Ψ(leaf, x)` for a flat real vector of length `d·T`.
    fn evaluate(&self, leaf: usize, x: &[f64]) -> XReal {
        match self.domain().locate_all(x) {
            Some(idx) if self.is_feasible(&idx) => self.terminal_value(leaf, &idx),
            _ => XReal::NEG_INF,
        }
    }

    fn horizon_support(&self) -> HorizonSupport {
        HorizonSupport::Bounded
    }

    /// `Ψ` on the untruncated domain; only differs from
    /// [`evaluate`](Integrand::evaluate) for lattice-supported models.
    fn evaluate_unbounded(&self, leaf: usize, x: &[f64]) -> XReal {
        self.evaluate(leaf, x)
    }

    /// Closed-form `Ψ^∞(leaf, x)`.
    fn horizon_analytic(&self, _leaf: usize, _x: &[f64]) -> Result<XReal, IntegrandError> {
        Err(IntegrandError::NotAvailable)
    }

    /// Pathwise trading gain for gain-form models.
    fn gain(&self, _leaf: usize, _x: &[f64]) -> Option<f64> {
        None
    }

    /// Whether the one-step horizon at a node depends only on the action
    /// and the child through a linear gain `⟨h, ΔS⟩`, so the local cone
    /// has a closed form.
    fn has_exact_local_cone(&self) -> bool {
        false
    }

    /// The same model with every window radius doubled, if it has one.
    fn widened(&self) -> Option<Box<dyn Integrand>> {
        None
    }
}

/// All feasible full strategies, as action index sequences, in the order
/// given by walking periods with actions in index order.
pub fn feasible_strategies(f: &dyn Integrand) -> Vec<Vec<usize>> {
    let horizon = f.domain().horizon();
    let mut out = vec![];
    let mut stack = vec![Vec::with_capacity(horizon)];
    while let Some(prefix) = stack.pop() {
        let t = prefix.len();
        if t == horizon {
            out.push(prefix);
            continue;
        }
        let acts = f
            .feasible_actions(t, &prefix)
            .expect("prefix built from feasible actions");
        for &a in acts.iter().rev() {
            let mut next = prefix.clone();
            next.push(a);
            stack.push(next);
        }
    }
    out
}

/// `Ψ^∞` is 0 at the origin and `−∞` elsewhere on bounded domains, provided
/// `Ψ` is finite somewhere on the path.
pub(crate) fn bounded_horizon(finite_somewhere: bool, x: &[f64]) -> XReal {
    if finite_somewhere && x.iter().all(|&v| v == 0.0) {
        XReal::ZERO
    } else {
        XReal::NEG_INF
    }
}
