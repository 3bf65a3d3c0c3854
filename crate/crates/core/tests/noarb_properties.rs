mod common;

use common::*;
use knightian::lattice::{AmbiguityKernel, NodeId, ScenarioTree};
use knightian::noarb::{self, ConeKind, NaVerdict};
use knightian::oracle::EnumerationBudget;
use knightian::solver::Problem;
use knightian::strategy::AdaptedStrategy;
use proptest::prelude::*;

fn frictionless_case(seed: u64) -> (ScenarioTree, AmbiguityKernel, knightian::models::Frictionless) {
    let mut rng = rng(seed);
    let tree = random_tree(&mut rng, 2, 3, 1);
    let kernel = random_kernel(&mut rng, &tree, 2);
    let model = random_frictionless(&mut rng, &tree, 1);
    (tree, kernel, model)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn nontrivial_cones_lift_to_global_witnesses(seed in any::<u64>()) {
        let (tree, kernel, model) = frictionless_case(seed);
        let p = Problem::new(&tree, &kernel, &model).unwrap();
        let budget = EnumerationBudget::default();
        let global = noarb::global_na_check(&p, &budget, 1).unwrap();
        for cone in noarb::local_cones(&p, 1).unwrap() {
            prop_assert_eq!(cone.kind, ConeKind::Exact);
            let node = tree.from_global(cone.node);
            for h in cone.members.iter().filter(|h| h.iter().any(|&x| x != 0.0)) {
                let s = noarb::lift_local(&p, node, h).expect("window action lifts");
                prop_assert!(noarb::nonzero_qs(&p, &s));
                prop_assert!(noarb::horizon_nonnegative(&p, &s).unwrap());
                prop_assert_eq!(global.verdict, NaVerdict::Fails);
            }
        }
        if tree.horizon() == 1 {
            let root = noarb::local_cone(&p, NodeId::ROOT, None);
            prop_assert_eq!(root.is_trivial(), global.verdict == NaVerdict::Holds);
        }
    }

    #[test]
    fn truncated_searches_are_monotone(seed in any::<u64>()) {
        let (tree, kernel, model) = frictionless_case(seed);
        let p = Problem::new(&tree, &kernel, &model).unwrap();
        let budget = EnumerationBudget::default();
        let verdicts: Vec<NaVerdict> = (0..=tree.horizon())
            .map(|t| noarb::global_na_check_until(&p, &budget, 1, t).unwrap().verdict)
            .collect();
        prop_assert_eq!(verdicts[0], NaVerdict::Holds);
        prop_assert_eq!(
            *verdicts.last().unwrap(),
            noarb::global_na_check(&p, &budget, 1).unwrap().verdict
        );
        for w in verdicts.windows(2) {
            prop_assert!(!(w[0] == NaVerdict::Fails && w[1] == NaVerdict::Holds));
        }
    }

    #[test]
    fn scan_witnesses_are_arbitrages(seed in any::<u64>()) {
        let (tree, kernel, model) = frictionless_case(seed);
        let p = Problem::new(&tree, &kernel, &model).unwrap();
        let budget = EnumerationBudget::default();
        let scans = noarb::scan_all_selections(&p, &budget).unwrap();
        let selections: Vec<_> = kernel.enumerate_selections(&tree, NodeId::ROOT).collect();
        prop_assert_eq!(scans.len(), selections.len());
        for (scan, sel) in scans.iter().zip(&selections) {
            let probs = sel.leaf_probabilities(&tree, &kernel);
            for w in &scan.witnesses {
                let s: &AdaptedStrategy = &w.strategy;
                let gains: Vec<(f64, f64)> = (0..tree.leaf_count())
                    .map(|l| {
                        let g = knightian::integrand::Integrand::gain(&model, l, &s.realized(&tree, &model, l)).unwrap();
                        (probs[l], g)
                    })
                    .collect();
                prop_assert!(gains.iter().all(|&(q, g)| q == 0.0 || g >= 0.0));
                prop_assert!(gains.iter().any(|&(q, g)| q > 0.0 && g > 0.0));
            }
        }
    }
}

#[test]
fn horizon_recursion_agrees_with_search() {
    let budget = EnumerationBudget::default();
    for seed in 0..40 {
        let (tree, kernel, model) = frictionless_case(seed);
        let p = Problem::new(&tree, &kernel, &model).unwrap();
        let global = noarb::global_na_check(&p, &budget, 1).unwrap();
        let holds = noarb::horizon_dp_check(&p, &budget, 1).unwrap();
        noarb::cross_check(&global, holds).unwrap();
    }
}

#[test]
fn worker_count_does_not_change_the_witness() {
    let budget = EnumerationBudget::default();
    for seed in 0..20 {
        let (tree, kernel, model) = frictionless_case(seed);
        let p = Problem::new(&tree, &kernel, &model).unwrap();
        let one = serde_json::to_string(&noarb::global_na_check(&p, &budget, 1).unwrap()).unwrap();
        let many = serde_json::to_string(&noarb::global_na_check(&p, &budget, 4).unwrap()).unwrap();
        assert_eq!(one, many);
    }
}
