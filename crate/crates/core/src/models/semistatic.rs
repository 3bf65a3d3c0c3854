use std::sync::Arc;

use super::frictionless::{is_integer_vector, strided_gain};
use super::{leaf_increments, price_paths, ModelError, PriceRule, Utility};
use crate::integrand::{integer_box, GridDomain, HorizonSupport, Integrand, IntegrandError, XReal};
use crate::lattice::ScenarioTree;

/// Dynamic stock positions plus a one-shot position `g ∈ {−G..G}^I` in
/// static claims `f_i`, valued as
/// `U(x₀ + Σ_t ⟨h_t, ΔS_{t+1}⟩ + Σ_i g_i f_i)`.
///
/// Each period's action is `(h_t, g)` of length `d + I`; the static block
/// may only be nonzero in period 0.
#[derive(Debug, Clone)]
pub struct SemiStatic {
    increments: Arc<Vec<Vec<f64>>>,
    /// `claims[leaf][i] = f_i(leaf)`.
    claims: Arc<Vec<Vec<f64>>>,
    utility: Utility,
    x0: f64,
    radius: u32,
    static_radius: u32,
    stock_dim: usize,
    domain: GridDomain,
}

impl SemiStatic {
    /// `claims[i][leaf]` is the payoff of static claim `i` at `leaf`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        tree: &ScenarioTree,
        s0: &[f64],
        rule: PriceRule,
        utility: Utility,
        x0: f64,
        radius: u32,
        static_radius: u32,
        claims: &[Vec<f64>],
    ) -> Result<Self, ModelError> {
        utility.validate()?;
        if !x0.is_finite() {
            return Err(ModelError::Parameter("initial wealth must be finite".into()));
        }
        for (i, f) in claims.iter().enumerate() {
            if f.len() != tree.leaf_count() {
                return Err(ModelError::Length {
                    what: format!("static claim {i}"),
                    got: f.len(),
                    expected: tree.leaf_count(),
                });
            }
            if f.iter().any(|v| !v.is_finite()) {
                return Err(ModelError::Parameter(format!("static claim {i} is not finite")));
            }
        }
        let prices = price_paths(tree, s0, rule)?;
        let increments = Arc::new(leaf_increments(tree, &prices));
        let by_leaf = (0..tree.leaf_count())
            .map(|l| claims.iter().map(|f| f[l]).collect())
            .collect();
        let stock_dim = tree.outcome_dim();
        let domain = Self::build_domain(stock_dim, claims.len(), tree.horizon(), radius, static_radius)?;
        Ok(Self {
            increments,
            claims: Arc::new(by_leaf),
            utility,
            x0,
            radius,
            static_radius,
            stock_dim,
            domain,
        })
    }

    fn build_domain(
        d: usize,
        n_claims: usize,
        horizon: usize,
        radius: u32,
        static_radius: u32,
    ) -> Result<GridDomain, ModelError> {
        let mut first = vec![radius; d];
        first.extend(std::iter::repeat_n(static_radius, n_claims));
        let mut later = vec![radius; d];
        later.extend(std::iter::repeat_n(0, n_claims));
        let mut periods = vec![integer_box(&first)];
        periods.extend((1..horizon).map(|_| integer_box(&later)));
        Ok(GridDomain::new(periods, None)?)
    }

    pub fn claim_count(&self) -> usize {
        self.domain.dim() - self.stock_dim
    }

    pub fn stock_dim(&self) -> usize {
        self.stock_dim
    }

    fn total_gain(&self, leaf: usize, x: &[f64]) -> f64 {
        let stride = self.domain.dim();
        let mut v = strided_gain(x, stride, &self.increments[leaf], self.stock_dim);
        for (g, f) in x[self.stock_dim..stride].iter().zip(&self.claims[leaf]) {
            v += g * f;
        }
        v
    }

    fn static_block_clear(&self, x: &[f64]) -> bool {
        let stride = self.domain.dim();
        x.chunks(stride)
            .skip(1)
            .all(|b| b[self.stock_dim..].iter().all(|&g| g == 0.0))
    }
}

impl Integrand for SemiStatic {
    fn name(&self) -> &'static str {
        "semi_static"
    }

    fn domain(&self) -> &GridDomain {
        &self.domain
    }

    fn upper_bound(&self) -> f64 {
        self.utility.upper_bound()
    }

    fn leaf_count(&self) -> usize {
        self.increments.len()
    }

    fn terminal_value(&self, leaf: usize, actions: &[usize]) -> XReal {
        let x = self.domain.flatten(actions);
        self.utility.value(self.x0 + self.total_gain(leaf, &x))
    }

    fn horizon_support(&self) -> HorizonSupport {
        HorizonSupport::IntegerLattice
    }

    fn evaluate_unbounded(&self, leaf: usize, x: &[f64]) -> XReal {
        if x.len() != self.domain.dim() * self.domain.horizon()
            || !is_integer_vector(x)
            || !self.static_block_clear(x)
        {
            return XReal::NEG_INF;
        }
        self.utility.value(self.x0 + self.total_gain(leaf, x))
    }

    fn horizon_analytic(&self, leaf: usize, x: &[f64]) -> Result<XReal, IntegrandError> {
        Ok(if self.static_block_clear(x) && self.total_gain(leaf, x) >= 0.0 {
            XReal::ZERO
        } else {
            XReal::NEG_INF
        })
    }

    fn gain(&self, leaf: usize, x: &[f64]) -> Option<f64> {
        Some(self.total_gain(leaf, x))
    }

    fn widened(&self) -> Option<Box<dyn Integrand>> {
        let radius = self.radius.checked_mul(2)?.max(1);
        let static_radius = self.static_radius.checked_mul(2)?.max(1);
        let domain = Self::build_domain(
            self.stock_dim,
            self.claim_count(),
            self.domain.horizon(),
            radius,
            static_radius,
        )
        .ok()?;
        Some(Box::new(Self {
            radius,
            static_radius,
            domain,
            ..self.clone()
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Frictionless;

    fn tree() -> ScenarioTree {
        ScenarioTree::new(vec![vec![vec![1.2], vec![0.9]]; 2]).unwrap()
    }

    #[test]
    fn without_claims_matches_frictionless_bitwise() {
        let t = tree();
        let u = Utility::Exponential { risk_aversion: 0.7 };
        let a = SemiStatic::new(&t, &[1.0], PriceRule::Multiplicative, u, 1.0, 2, 1, &[]).unwrap();
        let b = Frictionless::new(&t, &[1.0], PriceRule::Multiplicative, u, 1.0, 2).unwrap();
        assert_eq!(a.domain(), b.domain());
        for leaf in 0..t.leaf_count() {
            for i in 0..5 {
                for j in 0..5 {
                    let va = a.terminal_value(leaf, &[i, j]);
                    let vb = b.terminal_value(leaf, &[i, j]);
                    assert_eq!(va.to_f64().to_bits(), vb.to_f64().to_bits());
                }
            }
        }
    }

    #[test]
    fn static_block_only_at_time_zero() {
        let t = tree();
        let u = Utility::Linear { cap: 10.0 };
        let call: Vec<f64> = vec![0.44, 0.08, 0.0, 0.0];
        let m = SemiStatic::new(&t, &[1.0], PriceRule::Multiplicative, u, 0.0, 1, 1, &[call]).unwrap();
        assert_eq!(m.domain().len(0), 9);
        assert_eq!(m.domain().len(1), 3);
        // h = 0 throughout, g = 1: value is the claim payoff
        let v = m.evaluate(0, &[0.0, 1.0, 0.0, 0.0]);
        assert!((v.to_f64() - 0.44).abs() < 1e-15);
        assert!(m.evaluate(0, &[0.0, 0.0, 0.0, 1.0]).is_neg_inf());
        assert!(m.horizon_analytic(0, &[0.0, 0.0, 0.0, 1.0]).unwrap().is_neg_inf());
        assert_eq!(m.horizon_analytic(0, &[0.0, 1.0, 0.0, 0.0]).unwrap(), XReal::ZERO);
    }
}
