mod common;

use common::*;
use knightian::integrand::{Integrand, XReal};
use knightian::lattice::NodeId;
use knightian::solver::{self, Problem, SolveOptions};
use knightian::strategy::AdaptedStrategy;
use proptest::prelude::*;
use rand::Rng;

/// A random feasible adapted strategy, built node by node in id order.
fn random_strategy(rng: &mut TestRng, p: &Problem) -> AdaptedStrategy {
    let tree = p.tree;
    let mut s = AdaptedStrategy::zero(tree, p.model);
    for id in 0..tree.internal_node_count() {
        let node = tree.from_global(id);
        let prefix: Vec<usize> = (0..node.depth)
            .map(|d| s.actions[tree.global(tree.ancestor(node, d))])
            .collect();
        let opts = p.model.feasible_actions(node.depth, &prefix).unwrap();
        s.actions[id] = opts[rng.gen_range(0..opts.len())];
    }
    s
}

fn close(a: XReal, b: XReal) -> bool {
    a.approx_eq(b, 1e-9)
}

#[test]
fn value_chain_is_constant_for_the_optimum_and_decreasing_otherwise() {
    let mut rng = rng(11);
    for _ in 0..25 {
        let ti = random_table_instance(&mut rng, 500_000);
        let p = ti.problem();
        let sol = solver::solve(&p, SolveOptions::default()).unwrap();
        let chain = solver::value_chain(&p, &sol.field, &sol.strategy);
        assert!(chain.iter().all(|&v| close(v, sol.root_value())), "{chain:?}");
        for _ in 0..100 {
            let s = random_strategy(&mut rng, &p);
            let chain = solver::value_chain(&p, &sol.field, &s);
            for w in chain.windows(2) {
                assert!(w[1] <= w[0] || close(w[0], w[1]), "{chain:?}");
            }
            let pinned = solver::pinned_values(&p, &s)[0];
            assert!(pinned <= sol.root_value() || close(pinned, sol.root_value()));
        }
    }
}

#[test]
fn worker_counts_give_identical_fields() {
    let mut rng = rng(12);
    for _ in 0..20 {
        let ti = random_table_instance(&mut rng, 500_000);
        let p = ti.problem();
        let base: Vec<XReal> = solver::value_field(&p, SolveOptions::default())
            .unwrap()
            .all_values()
            .collect();
        for workers in [2, 3, 8] {
            let other: Vec<XReal> = solver::value_field(&p, SolveOptions { workers }).unwrap().all_values().collect();
            assert_eq!(base.len(), other.len());
            assert!(base.iter().zip(&other).all(|(a, b)| a.to_f64().to_bits() == b.to_f64().to_bits()));
        }
    }
}

#[test]
fn assumption_check_accepts_random_tables() {
    let mut rng = rng(13);
    for _ in 0..20 {
        let ti = random_table_instance(&mut rng, 100_000);
        let zero = solver::pinned_values(&ti.problem(), &AdaptedStrategy::zero(&ti.tree, &ti.model))[0];
        assert_eq!(solver::check_assumptions(&ti.problem(), 256, 1).unwrap(), zero);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn root_is_bounded_by_the_zero_strategy_and_the_cap(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ti = random_table_instance(&mut rng, 200_000);
        let p = ti.problem();
        let sol = solver::solve(&p, SolveOptions::default()).unwrap();
        let zero = solver::pinned_values(&p, &AdaptedStrategy::zero(&ti.tree, &ti.model))[0];
        prop_assert!(zero <= sol.root_value() || close(zero, sol.root_value()));
        prop_assert!(sol.root_value().to_f64() <= ti.model.upper_bound() + 1e-9);
        prop_assert!(sol.strategy.is_feasible(&ti.tree, &ti.model));
    }

    #[test]
    fn psi_is_the_max_of_phi(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let ti = random_table_instance(&mut rng, 200_000);
        let p = ti.problem();
        let field = solver::value_field(&p, SolveOptions::default()).unwrap();
        let tree = &ti.tree;
        for t in 0..tree.horizon() {
            for i in 0..tree.nodes_at(t) {
                let node = NodeId { depth: t, index: i };
                let prefix: Vec<usize> = (0..t).map(|s| ti.model.domain().zero_action(s)).collect();
                let best = ti
                    .model
                    .feasible_actions(t, &prefix)
                    .unwrap()
                    .into_iter()
                    .map(|a| {
                        let mut q = prefix.clone();
                        q.push(a);
                        field.phi(node, &q)
                    })
                    .max()
                    .unwrap();
                prop_assert_eq!(field.psi(node, &prefix), best);
            }
        }
    }
}
