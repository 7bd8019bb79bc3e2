use noisy_geom::delaunay::{build_delaunay, build_with_order, emst, emst_from};
use noisy_geom::instance::{generate_instance, Kind};
use noisy_geom::noise::NoisyContext;
use noisy_geom::oracle;
use noisy_geom::predicates::Point2;
use noisy_geom::Params;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(n: usize, seed: u64) -> Vec<Point2> {
    generate_instance(Kind::PointsUniform, n, seed).unwrap().points().unwrap().to_vec()
}

#[test]
fn exact_build_is_delaunay() {
    for seed in 0..5 {
        let pts = points(150, seed);
        let dt = build_delaunay(&pts, &mut NoisyContext::new(0.0, seed).unwrap(), &Params::default()).unwrap();
        let r = dt.result();
        oracle::check_delaunay(&pts, &r.triangles).unwrap();
        assert!(oracle::empty_circumcircles(&pts, &r.triangles));
    }
}

#[test]
fn square_ish_emst_matches_prim() {
    let pts: Vec<Point2> = [(0, 0), (10, 1), (11, 12), (-1, 9)].iter().map(|&(x, y)| Point2::new(x, y)).collect();
    let t = emst(&pts, &mut NoisyContext::exact(), &Params::default()).unwrap();
    assert_eq!(t, oracle::emst(&pts));
}

#[test]
fn noisy_build_and_locate() {
    let pts = points(256, 4);
    let params = Params::default();
    for trial in 0..3 {
        let mut ctx = NoisyContext::for_trial(0.1, 8, trial).unwrap();
        let dt = build_delaunay(&pts, &mut ctx, &params).unwrap();
        let r = dt.result();
        oracle::check_delaunay(&pts, &r.triangles).unwrap();
        assert_eq!(emst_from(&dt, &mut ctx, &params).unwrap(), oracle::emst(&pts));
        let replay = build_with_order(&pts, dt.insertion_order(), &mut NoisyContext::exact(), &params).unwrap();
        assert_eq!(replay.result(), r);
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        for _ in 0..300 {
            let q = Point2::new(rng.gen_range(-(1 << 20)..1 << 20), rng.gen_range(-(1 << 20)..1 << 20));
            let Ok(got) = dt.locate(q, &mut ctx, &params) else { continue };
            assert!(dt.contains_point(got, q));
        }
    }
}

#[test]
fn stars_are_closed_fans() {
    let pts = points(64, 2);
    let dt = build_delaunay(&pts, &mut NoisyContext::exact(), &Params::default()).unwrap();
    let last = dt.insertion_order().len() - 1;
    let p = dt.insertion_order()[last] as u32;
    let star = dt.star(last);
    assert!(star.len() >= 3);
    for &t in star {
        assert!(dt.triangle(t).v.contains(&p));
        assert!(dt.triangle(t).is_leaf());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn small_instances_match_oracles(seed in 0u64..10_000, n in 3usize..40) {
        let pts = points(n, seed);
        let dt = build_delaunay(&pts, &mut NoisyContext::new(0.0, seed).unwrap(), &Params::default()).unwrap();
        let r = dt.result();
        prop_assert!(oracle::check_delaunay(&pts, &r.triangles).is_ok());
        prop_assert!(oracle::empty_circumcircles(&pts, &r.triangles));
        let mst = emst_from(&dt, &mut NoisyContext::exact(), &Params::default()).unwrap();
        prop_assert_eq!(mst, oracle::emst(&pts));
    }
}
