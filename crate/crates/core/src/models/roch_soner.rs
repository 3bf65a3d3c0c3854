use std::sync::{Arc, OnceLock};

use super::{leaf_paths, price_paths, ModelError, PriceRule, Utility};
use crate::integrand::{bounded_horizon, feasible_strategies, GridDomain, Integrand, IntegrandError, XReal};
use crate::lattice::ScenarioTree;

/// Book state after period `t`: price impact `ℓ_t` and wealth `V_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsState {
    pub impact: f64,
    pub wealth: f64,
}

/// Forward simulation of the resilient order book along one path.
///
/// `prices` and `depth` hold `S_t` and `m_t` for `t = 0..=T`; `holdings`
/// holds `h_0..h_{T−1}`, and `h_{−1} = initial`. Starting from
/// `ℓ_0 = V_0 = 0`:
///
/// ```text
/// V_{t+1} = V_t + h_t (S_{t+1} − S_t) − κ ℓ_t h_t − (m_{t+1} − m_t) h_t²
/// ℓ_{t+1} = (1 − κ) ℓ_t + 2 m_{t+1} (h_t − h_{t−1})
/// ```
///
/// Returns the states for `t = 0..=T`.
pub fn simulate(
    prices: &[f64],
    depth: &[f64],
    resilience: f64,
    initial: f64,
    holdings: &[f64],
) -> Vec<RsState> {
    let mut out = Vec::with_capacity(holdings.len() + 1);
    let mut state = RsState {
        impact: 0.0,
        wealth: 0.0,
    };
    out.push(state);
    let mut prev = initial;
    for (t, &h) in holdings.iter().enumerate() {
        let wealth = state.wealth + h * (prices[t + 1] - prices[t])
            - resilience * state.impact * h
            - (depth[t + 1] - depth[t]) * h * h;
        let impact = (1.0 - resilience) * state.impact + 2.0 * depth[t + 1] * (h - prev);
        state = RsState { impact, wealth };
        out.push(state);
        prev = h;
    }
    out
}

pub(super) fn validate_impact(
    tree: &ScenarioTree,
    resilience: f64,
    depth: &[f64],
) -> Result<(), ModelError> {
    if !(resilience > 0.0 && resilience < 1.0) {
        return Err(ModelError::Parameter(format!(
            "resilience {resilience} must lie in (0, 1)"
        )));
    }
    if depth.len() != tree.node_count() {
        return Err(ModelError::Length {
            what: "depth process".into(),
            got: depth.len(),
            expected: tree.node_count(),
        });
    }
    if depth.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(ModelError::Parameter("depth must be positive and finite".into()));
    }
    Ok(())
}

/// Utility of terminal wealth `U(V_T)` for integer trades in a resilient
/// limit order book, positions in `{−R..R}` per period.
#[derive(Debug, Clone)]
pub struct RochSoner {
    prices: Arc<Vec<f64>>,
    depth: Arc<Vec<f64>>,
    paths: Arc<Vec<Vec<usize>>>,
    resilience: f64,
    utility: Utility,
    radius: u32,
    domain: GridDomain,
    finite_somewhere: Arc<OnceLock<Vec<bool>>>,
}

impl RochSoner {
    /// `depth` gives `m` at every node, by global id.
    pub fn new(
        tree: &ScenarioTree,
        s0: f64,
        rule: PriceRule,
        resilience: f64,
        depth: Vec<f64>,
        utility: Utility,
        radius: u32,
    ) -> Result<Self, ModelError> {
        utility.validate()?;
        if tree.outcome_dim() != 1 {
            return Err(ModelError::Parameter("the order book model has a single asset".into()));
        }
        validate_impact(tree, resilience, &depth)?;
        let prices = price_paths(tree, &[s0], rule)?
            .into_iter()
            .map(|p| p[0])
            .collect();
        Ok(Self {
            prices: Arc::new(prices),
            depth: Arc::new(depth),
            paths: Arc::new(leaf_paths(tree)),
            resilience,
            utility,
            radius,
            domain: GridDomain::integer_window(1, tree.horizon(), radius)?,
            finite_somewhere: Arc::new(OnceLock::new()),
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    /// State trajectory for real holdings along the path to `leaf`.
    pub fn trajectory(&self, leaf: usize, holdings: &[f64]) -> Vec<RsState> {
        let path = &self.paths[leaf];
        let s: Vec<f64> = path.iter().map(|&id| self.prices[id]).collect();
        let m: Vec<f64> = path.iter().map(|&id| self.depth[id]).collect();
        simulate(&s, &m, self.resilience, 0.0, holdings)
    }

    fn finite_on(&self, leaf: usize) -> bool {
        self.finite_somewhere.get_or_init(|| {
            let all = feasible_strategies(self);
            (0..self.paths.len())
                .map(|l| all.iter().any(|s| self.terminal_value(l, s).is_finite()))
                .collect()
        })[leaf]
    }
}

impl Integrand for RochSoner {
    fn name(&self) -> &'static str {
        "roch_soner"
    }

    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn upper_bound(&self) -> f64 {
        self.utility.upper_bound()
    }

    fn leaf_count(&self) -> usize {
        self.paths.len()
    }

    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal {
        let holdings = self.domain.flatten(actions);
        let last = *self.trajectory(leaf, &holdings).last().unwrap();
        self.utility.value(last.wealth)
    }

    fn horizon_analytic(&self, leaf: usize, x: &[f64]) -> Result<XReal, IntegrandError> {
        Ok(bounded_horizon(self.finite_on(leaf), x))
    }

    fn widened(&self) -> Option<Box<dyn Integrand>> {
        let radius = self.radius.checked_mul(2)?.max(1);
        Some(Box::new(Self {
            radius,
            domain: GridDomain::integer_window(1, self.domain.horizon(), radius).ok()?,
            finite_somewhere: Arc::new(OnceLock::new()),
            ..self.clone()
        }))
    }
}
