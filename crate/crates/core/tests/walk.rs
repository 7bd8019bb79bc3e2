mod common;

use common::*;
use noisy_geom::noise::NoisyContext;
use noisy_geom::walk::{run_walk, run_walk_on_tree, run_walk_with_retries, WalkConfig};
use noisy_geom::Error;

#[test]
fn adversarial_path_terminates_at_target() {
    let dag = PathDag { len: 28 };
    let cfg = WalkConfig::new(1e-3, 20);
    let mut ok = 0;
    for trial in 0..20_000 {
        let mut ctx = NoisyContext::for_trial(0.0, 11, trial).unwrap();
        let mut o = AdversarialPath { target: 20, p_e: 1.0 / 16.0 };
        if let Ok(out) = run_walk_with_retries(&dag, &mut o, 0, &cfg, &mut ctx, 3) {
            ok += u32::from(out.target == 20);
        }
    }
    assert!(ok as f64 / 20_000.0 >= 0.999, "{ok}");
}

#[test]
fn diamonds_rejoin_and_still_terminate() {
    let dag = Diamonds { junctions: 10 };
    let eps = 1e-3;
    let cfg = WalkConfig::new(eps, 2 * dag.junctions);
    let trials = 20_000;
    let mut ok = 0;
    for trial in 0..trials {
        let mut ctx = NoisyContext::for_trial(0.0, 12, trial).unwrap();
        let mut o = LyingDiamonds { dag: &dag, p_e: 1.0 / 16.0 };
        if let Ok(out) = run_walk_with_retries(&dag, &mut o, 0, &cfg, &mut ctx, 3) {
            ok += u32::from(out.target == dag.target());
        }
    }
    assert!(ok as f64 / trials as f64 >= 1.0 - eps, "{ok}/{trials}");
}

#[test]
fn tree_walk_stack_is_the_root_path() {
    let tree = HeapTree { height: 8 };
    let cfg = WalkConfig::new(1e-3, 8);
    let mut ctx = NoisyContext::new(0.0, 13).unwrap();
    let mut successes = 0;
    for trial in 0..2000u64 {
        let target = 2 + (noisy_geom::noise::mix64(trial) % 510);
        let mut o = LyingTreeOracle { tree: &tree, target, p_e: 1.0 / 16.0 };
        if let Ok((t, path)) = run_walk_on_tree(&tree, &mut o, 1, &cfg, &mut ctx) {
            if t == target {
                successes += 1;
                assert_eq!(path, tree.path_to(target));
            }
        }
    }
    assert!(successes >= 1990, "{successes}");
}

#[test]
fn zero_noise_tree_path() {
    let tree = HeapTree { height: 4 };
    let mut o = LyingTreeOracle { tree: &tree, target: 27, p_e: 0.0 };
    let (t, path) = run_walk_on_tree(&tree, &mut o, 1, &WalkConfig::new(0.01, 4), &mut NoisyContext::exact()).unwrap();
    assert_eq!(t, 27);
    assert_eq!(path, vec![1, 3, 6, 13, 27]);
}

#[test]
fn root_target_is_rejected() {
    let tree = HeapTree { height: 0 };
    let mut o = LyingTreeOracle { tree: &tree, target: 1, p_e: 0.0 };
    let r = run_walk(&tree, &mut o, 1, &WalkConfig::new(0.01, 1), &mut NoisyContext::exact());
    assert!(matches!(r, Err(Error::StructuralError(_))));
}

#[test]
fn success_does_not_improve_with_more_noise() {
    // a deliberately weak tolerance so failures are frequent enough to see
    let dag = PathDag { len: 24 };
    let cfg = WalkConfig::new(0.2, 16).with_threshold_factor(1.0);
    let trials = 20_000;
    let rates: Vec<f64> = [0.0, 1.0 / 64.0, 1.0 / 32.0, 1.0 / 16.0]
        .iter()
        .map(|&p_e| {
            let mut ok = 0;
            for trial in 0..trials {
                let mut ctx = NoisyContext::for_trial(0.0, 14, trial).unwrap();
                let mut o = AdversarialPath { target: 16, p_e };
                if let Ok(out) = run_walk(&dag, &mut o, 0, &cfg, &mut ctx) {
                    ok += u32::from(out.target == 16);
                }
            }
            ok as f64 / trials as f64
        })
        .collect();
    assert_eq!(rates[0], 1.0);
    assert!(rates.windows(2).all(|w| w[1] <= w[0]), "{rates:?}");
}
