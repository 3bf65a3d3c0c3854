use std::sync::Arc;

use super::{leaf_paths, price_paths, roch_soner, ModelError, PriceRule, Utility};
use crate::integrand::{bounded_horizon, GridDomain, Integrand, IntegrandError, XReal};
use crate::lattice::ScenarioTree;

/// Price impact parameters for the impact variant of [`Liquidation`].
#[derive(Debug, Clone)]
pub struct Impact {
    pub resilience: f64,
    /// Book depth at every node, by global id.
    pub depth: Vec<f64>,
}

/// Selling an initial block of `M` shares by the horizon.
///
/// Actions are the holdings `h_t ∈ {0..M}` carried over period `t`, with
/// `h_{−1} = M`; holdings never increase, and `h_{T−1} = 0` so that the
/// position is flat at the end. Without impact the liquidation value is
/// `U(x₀ + M·S₀ + Σ_t h_t ΔS_{t+1})`, the cash from selling at the
/// prevailing prices. With impact the gain term is replaced by the
/// resilient-book wealth recursion started from `h_{−1} = M`.
#[derive(Debug, Clone)]
pub struct Liquidation {
    prices: Arc<Vec<f64>>,
    paths: Arc<Vec<Vec<usize>>>,
    impact: Option<Arc<Impact>>,
    utility: Utility,
    x0: f64,
    initial: u32,
    finite_somewhere: Arc<Vec<bool>>,
    domain: GridDomain,
}

impl Liquidation {
    pub fn new(
        tree: &ScenarioTree,
        s0: f64,
        rule: PriceRule,
        utility: Utility,
        x0: f64,
        initial: u32,
        impact: Option<Impact>,
    ) -> Result<Self, ModelError> {
        utility.validate()?;
        if tree.outcome_dim() != 1 {
            return Err(ModelError::Parameter("liquidation needs a single asset".into()));
        }
        if initial == 0 {
            return Err(ModelError::Parameter("initial position must be positive".into()));
        }
        if !x0.is_finite() || !s0.is_finite() {
            return Err(ModelError::Parameter("initial wealth and price must be finite".into()));
        }
        if let Some(imp) = &impact {
            roch_soner::validate_impact(tree, imp.resilience, &imp.depth)?;
        }
        let prices = price_paths(tree, &[s0], rule)?
            .into_iter()
            .map(|p| p[0])
            .collect();
        let periods = vec![(0..=initial).map(|k| vec![f64::from(k)]).collect(); tree.horizon()];
        let domain = GridDomain::new(periods, None)?;
        let mut model = Self {
            prices: Arc::new(prices),
            paths: Arc::new(leaf_paths(tree)),
            impact: impact.map(Arc::new),
            utility,
            x0,
            initial,
            finite_somewhere: Arc::new(Vec::new()),
            domain,
        };
        let strategies = crate::integrand::feasible_strategies(&model);
        let finite = (0..tree.leaf_count())
            .map(|l| strategies.iter().any(|s| model.terminal_value(l, s).is_finite()))
            .collect();
        model.finite_somewhere = Arc::new(finite);
        Ok(model)
    }

    pub fn initial_position(&self) -> u32 {
        self.initial
    }

    fn holding(&self, t: usize, a: usize) -> f64 {
        self.domain.action(t, a)[0]
    }

    /// Terminal wealth of a holdings path.
    pub fn wealth(&self, leaf: usize, holdings: &[f64]) -> f64 {
        let path = &self.paths[leaf];
        let m = f64::from(self.initial);
        let base = self.x0 + m * self.prices[path[0]];
        match &self.impact {
            None => {
                let mut v = base;
                for (t, h) in holdings.iter().enumerate() {
                    v += h * (self.prices[path[t + 1]] - self.prices[path[t]]);
                }
                v
            }
            Some(imp) => {
                let s: Vec<f64> = path.iter().map(|&id| self.prices[id]).collect();
                let depth: Vec<f64> = path.iter().map(|&id| imp.depth[id]).collect();
                let last = roch_soner::simulate(&s, &depth, imp.resilience, m, holdings)
                    .last()
                    .copied()
                    .expect("nonempty trajectory");
                base + last.wealth
            }
        }
    }
}

impl Integrand for Liquidation {
    fn name(&self) -> &'static str {
        "liquidation"
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

    fn feasible_actions(&self, t: usize, prefix: &[usize]) -> Result<Vec<usize>, IntegrandError> {
        let horizon = self.domain.horizon();
        if prefix.len() != t || t >= horizon {
            return Err(IntegrandError::InfeasiblePrefix(t));
        }
        let mut cap = self.initial as usize;
        for (s, &a) in prefix.iter().enumerate() {
            if a > cap || (s + 1 == horizon && a != 0) {
                return Err(IntegrandError::InfeasiblePrefix(t));
            }
            cap = a;
        }
        // actions are sorted, so index k is holding k
        Ok(if t + 1 == horizon { vec![0] } else { (0..=cap).collect() })
    }

    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal {
        let holdings: Vec<f64> = actions
            .iter()
            .enumerate()
            .map(|(t, &a)| self.holding(t, a))
            .collect();
        self.utility.value(self.wealth(leaf, &holdings))
    }

    fn horizon_analytic(&self, leaf: usize, x: &[f64]) -> Result<XReal, IntegrandError> {
        Ok(bounded_horizon(self.finite_somewhere[leaf], x))
    }
}
