use noisy_geom::bst::{natural, noisy_sort, Located, OrderedTree};
use noisy_geom::noise::NoisyContext;
use noisy_geom::Params;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn invariants_survive_mixed_operations(ops in prop::collection::vec((any::<bool>(), 0i64..64), 1..200)) {
        let mut t = OrderedTree::new();
        let mut ctx = NoisyContext::exact();
        let p = Params::default();
        let mut model = std::collections::BTreeMap::new();
        for (ins, k) in ops {
            if ins {
                model.entry(k).or_insert_with(|| t.insert(k, &natural, &mut ctx, &p).unwrap());
            } else if let Some(id) = model.remove(&k) {
                prop_assert_eq!(t.delete(id).unwrap(), k);
            }
            t.check_invariants(&natural).map_err(TestCaseError::fail)?;
        }
        let keys: Vec<i64> = t.keys().copied().collect();
        prop_assert_eq!(keys, model.keys().copied().collect::<Vec<_>>());
    }

    #[test]
    fn exact_search_finds_every_key(keys in prop::collection::btree_set(-1000i64..1000, 1..100), q in -1000i64..1000) {
        let keys: Vec<i64> = keys.into_iter().collect();
        let mut t = OrderedTree::new();
        let mut ctx = NoisyContext::exact();
        for &k in &keys {
            t.insert(k, &natural, &mut ctx, &Params::default()).unwrap();
        }
        let got = t.search(&q, &natural, &mut ctx, &Params::default()).unwrap();
        prop_assert_eq!(got, t.exact_locate(&q, &natural).unwrap());
        match got {
            Located::Found(v) => prop_assert_eq!(*t.key(v), q),
            vacant => {
                prop_assert!(!keys.contains(&q));
                let (a, b) = t.neighbors(vacant);
                prop_assert!(a.is_none_or(|a| *t.key(a) < q));
                prop_assert!(b.is_none_or(|b| *t.key(b) > q));
            }
        }
    }
}

#[test]
fn delete_all_in_random_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let mut t = OrderedTree::new();
        let mut ctx = NoisyContext::exact();
        let mut ids: Vec<_> = (1..=7).map(|k| t.insert(k, &natural, &mut ctx, &Params::default()).unwrap()).collect();
        ids.shuffle(&mut rng);
        for id in ids {
            t.delete(id).unwrap();
            t.check_invariants(&natural).unwrap();
        }
        assert!(t.is_empty());
    }
}

#[test]
fn noisy_search_accuracy() {
    let n = 1024;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let keys: Vec<i64> = (0..n).map(|_| rng.gen_range(0..1_000_000) * 2).collect();
    let mut t = OrderedTree::new();
    let mut ex = NoisyContext::exact();
    let mut uniq = std::collections::BTreeSet::new();
    for k in keys {
        if uniq.insert(k) {
            t.insert(k, &natural, &mut ex, &Params::default()).unwrap();
        }
    }
    let mut ctx = NoisyContext::new(0.1, 3).unwrap();
    let mut wrong = 0;
    for _ in 0..2000 {
        let q: i64 = rng.gen_range(0..2_000_001);
        let got = t.search(&q, &natural, &mut ctx, &Params::default()).unwrap();
        if got != t.exact_locate(&q, &natural).unwrap() {
            wrong += 1;
        }
    }
    assert_eq!(wrong, 0);
}

#[test]
fn noisy_interleaved_updates_match_replay() {
    let mut ok = 0;
    for trial in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let mut ctx = NoisyContext::for_trial(0.1, 99, trial).unwrap();
        let mut t = OrderedTree::with_scale(2000);
        let mut model = std::collections::BTreeMap::new();
        for _ in 0..2000 {
            let k: i64 = rng.gen_range(0..500);
            if let Some(id) = model.remove(&k) {
                t.delete(id).unwrap();
            } else {
                model.insert(k, t.insert(k, &natural, &mut ctx, &Params::default()).unwrap());
            }
        }
        if t.keys().copied().collect::<Vec<_>>() == model.keys().copied().collect::<Vec<_>>() {
            ok += 1;
        }
    }
    assert_eq!(ok, 10);
}

#[test]
fn noisy_sort_sorts() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut items: Vec<u32> = (0..1000).collect();
    items.shuffle(&mut rng);
    let mut ctx = NoisyContext::new(0.1, 17).unwrap();
    let out = noisy_sort(&items, &natural, &mut ctx, &Params::default()).unwrap();
    assert_eq!(out, (0..1000).collect::<Vec<_>>());
    let mut t = OrderedTree::new();
    let mut ex = NoisyContext::exact();
    for &k in &items {
        t.insert(k, &natural, &mut ex, &Params::default()).unwrap();
    }
    let drained: Vec<u32> = (0..1000).map(|_| t.pq_extract_min().unwrap()).collect();
    assert_eq!(drained, (0..1000).collect::<Vec<_>>());
}
