use noisy_geom::instance::{generate_instance, Kind};
use noisy_geom::noise::NoisyContext;
use noisy_geom::oracle;
use noisy_geom::predicates::{above_segment, Point2, Segment2};
use noisy_geom::trapezoid::{build_trap_map, build_with_order, BOX};
use noisy_geom::Params;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn segments(n: usize, seed: u64) -> Vec<Segment2> {
    generate_instance(Kind::SegmentsNoncrossing, n, seed).unwrap().segments().unwrap().to_vec()
}

/// A query point off every wall and supporting line.
fn query_point(rng: &mut ChaCha8Rng, segs: &[Segment2]) -> Point2 {
    loop {
        let q = Point2::new(rng.gen_range(-(1 << 20)..1 << 20), rng.gen_range(-(1 << 20)..1 << 20));
        let clean = segs.iter().all(|s| s.a.x != q.x && s.b.x != q.x && !above_segment(q, s).is_zero());
        if clean {
            return q;
        }
    }
}

#[test]
fn exact_build_matches_brute_force() {
    for seed in 0..10 {
        let segs = segments(60, seed);
        let mut ctx = NoisyContext::new(0.0, seed).unwrap();
        let map = build_trap_map(&segs, &mut ctx, &Params::default()).unwrap();
        let leaves = map.canonical_leaves();
        assert_eq!(leaves.len(), 3 * segs.len() + 1);
        assert_eq!(leaves, oracle::trapezoid_decomposition(&segs));
    }
}

#[test]
fn leaf_tiling_by_area() {
    // doubled area of a trapezoid: width times the sum of the heights of
    // its top and bottom at both walls
    let segs = segments(40, 3);
    let map = build_trap_map(&segs, &mut NoisyContext::exact(), &Params::default()).unwrap();
    let mut twice_area = num_rational::BigRational::from_integer(0.into());
    for id in map.leaves() {
        let t = map.trapezoid(id);
        let h = |x: i64| {
            let top = oracle::y_at(map.line(t.top), x);
            let bot = oracle::y_at(map.line(t.bottom), x);
            num_rational::BigRational::new(top.num.into(), top.den.into())
                - num_rational::BigRational::new(bot.num.into(), bot.den.into())
        };
        let w = num_rational::BigRational::from_integer((t.rightp.x - t.leftp.x).into());
        twice_area += w * (h(t.leftp.x) + h(t.rightp.x));
    }
    let side = num_rational::BigRational::from_integer((2 * BOX).into());
    assert_eq!(twice_area, side.clone() * side * num_rational::BigRational::from_integer(2.into()));
}

#[test]
fn noisy_build_matches_replay_and_queries_agree() {
    let segs = segments(200, 9);
    let params = Params::default();
    let mut ok = 0;
    for trial in 0..5 {
        let mut ctx = NoisyContext::for_trial(0.1, 1, trial).unwrap();
        let map = build_trap_map(&segs, &mut ctx, &params).unwrap();
        let replay = build_with_order(&segs, map.insertion_order(), &mut NoisyContext::exact(), &params).unwrap();
        if map.canonical_leaves() == replay.canonical_leaves() {
            ok += 1;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        for _ in 0..300 {
            let q = query_point(&mut rng, &segs);
            let got = map.query(q, &mut ctx, &params).unwrap();
            assert_eq!(Some(got), oracle::locate_leaf(&map, q));
        }
    }
    assert_eq!(ok, 5);
}

#[test]
fn dag_size_is_linear() {
    for n in [64, 256, 1024] {
        let segs = segments(n, 1);
        let map = build_trap_map(&segs, &mut NoisyContext::new(0.0, 2).unwrap(), &Params::default()).unwrap();
        let per = map.node_count() as f64 / n as f64;
        assert!(per < 12.0, "nodes per segment {per} at n = {n}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn any_order_gives_the_same_map(seed in 0u64..1000, n in 1usize..25) {
        let segs = segments(n, seed);
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::seq::SliceRandom;
        order.shuffle(&mut rng);
        let map = build_with_order(&segs, &order, &mut NoisyContext::exact(), &Params::default()).unwrap();
        prop_assert_eq!(map.canonical_leaves(), oracle::trapezoid_decomposition(&segs));
    }
}
