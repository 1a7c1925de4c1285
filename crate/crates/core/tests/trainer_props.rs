use proptest::prelude::*;

use cutlab::corpus;
use cutlab::graph::{encode, BipartiteGraph};
use cutlab::policy::{self, PolicyParams, ACTION_DIM};
use cutlab::scoring::ScoringWeights;
use cutlab::trainer::{
    reinforce_batch, reinforce_gradient, relative_improvement, Adam, CutSelectionEnv, Environment,
    RolloutConfig, RolloutEnv, DEFAULT_LR,
};

fn cfg() -> RolloutConfig {
    RolloutConfig { n_rounds: 5, cuts_per_round: 2, ..RolloutConfig::default() }
}

/// Reward peaks at `a0 = target`; nothing else matters.
struct Quadratic {
    graph: BipartiteGraph,
    target: f64,
}

impl Environment for Quadratic {
    fn graph(&self) -> &BipartiteGraph {
        &self.graph
    }

    fn reward(&self, a: &[f64; ACTION_DIM]) -> cutlab::Result<f64> {
        Ok(-(a[0] - self.target).powi(2))
    }
}

#[test]
fn gradient_sign_points_to_the_optimum() {
    let graph = encode(&corpus::packing(4, 2, 0));
    let mut right = 0;
    for run in 0..100u64 {
        let th = PolicyParams::init(8, run);
        let mu0 = policy::forward(&graph, &th).unwrap()[0];
        let dir = if run % 2 == 0 { 1.0 } else { -1.0 };
        let env = Quadratic { graph: graph.clone(), target: mu0 + 0.2 * dir };
        let (grad, _) = reinforce_gradient(&th, std::slice::from_ref(&env), 100, 0.01, run, false).unwrap();
        // the head bias of the first output only moves mu_0
        let bias0 = th.len() - ACTION_DIM;
        if -grad[bias0] * dir > 0.0 {
            right += 1;
        }
    }
    assert!(right >= 95, "{right}/100");
}

#[test]
fn reinforce_is_bit_reproducible() {
    let envs: Vec<CutSelectionEnv> =
        (0..3).map(|s| CutSelectionEnv::new(corpus::packing(6, 3, s), cfg()).unwrap()).collect();
    let run = || {
        let mut th = PolicyParams::init(6, 11);
        let mut adam = Adam::new(th.len(), DEFAULT_LR);
        for epoch in 0..3 {
            reinforce_batch(&mut th, &mut adam, &envs, 4, 0.01, 100 + epoch, false).unwrap();
        }
        th
    };
    assert_eq!(run().as_slice(), run().as_slice());
}

#[test]
fn empty_batch_is_an_error() {
    let th = PolicyParams::init(4, 0);
    let envs: Vec<CutSelectionEnv> = Vec::new();
    assert!(reinforce_gradient(&th, &envs, 4, 0.01, 0, false).is_err());
}

#[test]
fn integral_root_leaves_gap_alone() {
    // x <= 2 with x integer: root already integral
    let inst = cutlab::MilpInstance::new(
        "trivial",
        vec![-1.0],
        vec![(0, 0, 1.0)],
        vec![2.0],
        vec![0.0],
        vec![5.0],
        vec![cutlab::VarType::Integer],
        vec![cutlab::ConsType::Linear],
    )
    .unwrap();
    let env = RolloutEnv::new(inst, cfg()).unwrap();
    let root = env.root_gap().unwrap();
    for w in [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.3, 0.7]] {
        let r = env.run(&ScoringWeights::raw(w).unwrap()).unwrap();
        assert_eq!((r.gap, r.cuts_added), (root, 0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn rollout_properties(seed in 0u64..10_000, w in prop::array::uniform4(-1.0f64..1.0)) {
        let env = CutSelectionEnv::new(corpus::packing(6, 3, seed), cfg()).unwrap();
        let root = env.rollout_env().root_gap().unwrap();
        let g = env.gap(&w).unwrap();
        prop_assert!(g <= root + 1e-9);
        prop_assert_eq!(g, env.gap(&w).unwrap());
        prop_assert_eq!(env.reward(&[0.25; 4]).unwrap(), 0.0);
        let r = env.reward(&w).unwrap();
        prop_assert_eq!(r, relative_improvement(env.baseline_gap(), g));
    }

    #[test]
    fn improvement_is_antisymmetric(g in 0.01f64..1.0) {
        let (b, h) = (g, g * 0.5);
        let up = relative_improvement(b, h);
        let down = relative_improvement(h, b);
        prop_assert!(up > 0.0 && down < 0.0);
        prop_assert!(((up * (b + 1e-8)) + (down * (h + 1e-8))).abs() <= 1e-12);
    }

    #[test]
    fn grid_best_never_worse_than_baseline(seed in 0u64..10_000) {
        let env = RolloutEnv::new(corpus::packing(6, 3, seed), cfg()).unwrap();
        let res = cutlab::trainer::grid_search(&env, 4).unwrap();
        prop_assert_eq!(res.table.len(), 35);
        prop_assert!(res.best_gap <= res.baseline_gap);
        prop_assert!(res.best_improvement >= 0.0);
    }
}
