use std::sync::Arc;

use super::{leaf_increments, price_paths, ModelError, PriceRule, Utility};
use crate::integrand::{GridDomain, HorizonSupport, Integrand, IntegrandError, XReal};
use crate::lattice::ScenarioTree;

/// Utility of terminal wealth from integer stock positions,
/// `U(x₀ + Σ_t ⟨h_t, S_{t+1} − S_t⟩)`, with positions in `{−R..R}^d`.
#[derive(Debug, Clone)]
pub struct Frictionless {
    increments: Arc<Vec<Vec<f64>>>,
    utility: Utility,
    x0: f64,
    radius: u32,
    domain: GridDomain,
}

impl Frictionless {
    pub fn new(
        tree: &ScenarioTree,
        s0: &[f64],
        rule: PriceRule,
        utility: Utility,
        x0: f64,
        radius: u32,
    ) -> Result<Self, ModelError> {
        utility.validate()?;
        if !x0.is_finite() {
            return Err(ModelError::Parameter("initial wealth must be finite".into()));
        }
        let prices = price_paths(tree, s0, rule)?;
        let increments = Arc::new(leaf_increments(tree, &prices));
        let domain = GridDomain::integer_window(tree.outcome_dim(), tree.horizon(), radius)?;
        Ok(Self {
            increments,
            utility,
            x0,
            radius,
            domain,
        })
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn utility(&self) -> Utility {
        self.utility
    }

    pub fn initial_wealth(&self) -> f64 {
        self.x0
    }

    /// `S_{t+1} − S_t` along the leaf's path, flattened.
    pub fn increments(&self, leaf: usize) -> &[f64] {
        &self.increments[leaf]
    }

    pub fn with_radius(&self, radius: u32) -> Result<Self, ModelError> {
        let domain = GridDomain::integer_window(self.domain.dim(), self.domain.horizon(), radius)?;
        Ok(Self {
            radius,
            domain,
            ..self.clone()
        })
    }

    fn gain_of(&self, leaf: usize, x: &[f64]) -> f64 {
        let d = self.domain.dim();
        strided_gain(x, d, &self.increments[leaf], d)
    }
}

/// `Σ_t ⟨h_t, ΔS_t⟩` where `h_t` is the first `d` entries of each
/// `stride`-long block of `x`.
pub(super) fn strided_gain(x: &[f64], stride: usize, increments: &[f64], d: usize) -> f64 {
    let mut acc = 0.0;
    for (block, ds) in x.chunks(stride).zip(increments.chunks(d)) {
        for (h, s) in block[..d].iter().zip(ds) {
            acc += h * s;
        }
    }
    acc
}

pub(super) fn is_integer_vector(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite() && v.fract() == 0.0)
}

impl Integrand for Frictionless {
    fn name(&self) -> &'static str {
        "frictionless"
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
        self.utility.value(self.x0 + self.gain_of(leaf, &x))
    }

    fn horizon_support(&self) -> HorizonSupport {
        HorizonSupport::IntegerLattice
    }

    fn evaluate_unbounded(&self, leaf: usize, x: &[f64]) -> XReal {
        if x.len() != self.increments[leaf].len() || !is_integer_vector(x) {
            return XReal::NEG_INF;
        }
        self.utility.value(self.x0 + self.gain_of(leaf, x))
    }

    fn horizon_analytic(&self, leaf: usize, x: &[f64]) -> Result<XReal, IntegrandError> {
        Ok(if self.gain_of(leaf, x) >= 0.0 {
            XReal::ZERO
        } else {
            XReal::NEG_INF
        })
    }

    fn gain(&self, leaf: usize, x: &[f64]) -> Option<f64> {
        Some(self.gain_of(leaf, x))
    }

    fn has_exact_local_cone(&self) -> bool {
        true
    }

    fn widened(&self) -> Option<Box<dyn Integrand>> {
        let r = self.radius.checked_mul(2)?.max(1);
        self.with_radius(r).ok().map(|m| Box::new(m) as Box<dyn Integrand>)
    }
}
