use noisy_geom::instance::{generate_instance, Kind};
use noisy_geom::noise::NoisyContext;
use noisy_geom::oracle;
use noisy_geom::predicates::{Point2, Segment2};
use noisy_geom::sweep::{closest_pair, intersect_segments, SweepOptions, SweepTrapezoid};
use noisy_geom::{Error, Params};
use proptest::prelude::*;

fn seg(a: (i64, i64), b: (i64, i64)) -> Segment2 {
    Segment2::new(Point2::new(a.0, a.1), Point2::new(b.0, b.1)).unwrap()
}

fn crossing(n: usize, seed: u64) -> Vec<Segment2> {
    generate_instance(Kind::SegmentsCrossing, n, seed).unwrap().segments().unwrap().to_vec()
}

fn points(n: usize, seed: u64) -> Vec<Point2> {
    generate_instance(Kind::PointsUniform, n, seed).unwrap().points().unwrap().to_vec()
}

const CHECKED: SweepOptions = SweepOptions { emit_trapezoids: true, instrumented: true };

#[test]
fn two_segments_cross_once() {
    let segs = [seg((0, 0), (4, 4)), seg((1, 4), (5, 0))];
    let out = intersect_segments(&segs, &mut NoisyContext::exact(), &Params::default(), CHECKED).unwrap();
    assert_eq!(out.crossings.len(), 1);
    let p = out.crossings[0].2;
    assert_eq!((p.x.num, p.x.den, p.y.num, p.y.den), (5, 2, 5, 2));
    assert_eq!(out.trapezoids.unwrap().len(), 3 * 2 + 3 + 1);
}

#[test]
fn parallel_segments_do_not_cross() {
    let segs: Vec<_> = (0..20).map(|i| seg((10 * i, 100 * i), (10 * i + 5, 100 * i + 7))).collect();
    let out = intersect_segments(&segs, &mut NoisyContext::new(0.1, 1).unwrap(), &Params::default(), CHECKED).unwrap();
    assert!(out.crossings.is_empty());
}

#[test]
fn shared_event_abscissa_is_rejected() {
    let segs = [seg((0, 0), (4, 4)), seg((0, 4), (4, 0))];
    let err = intersect_segments(&segs, &mut NoisyContext::exact(), &Params::default(), CHECKED);
    assert!(matches!(err, Err(Error::GeneralPositionViolation(_))));
}

#[test]
fn exact_sweep_matches_brute_force() {
    for seed in 0..5 {
        let segs = crossing(150, seed);
        let want = oracle::all_crossings(&segs);
        assert!(!want.is_empty());
        let out = intersect_segments(&segs, &mut NoisyContext::exact(), &Params::default(), CHECKED).unwrap();
        assert_eq!(out.crossings, want);
        let k = want.len();
        assert_eq!(out.trapezoids.unwrap().len(), 3 * segs.len() + 3 * k + 1);
    }
}

#[test]
fn decomposition_matches_trapezoid_oracle_without_crossings() {
    for seed in 0..5 {
        let segs = generate_instance(Kind::SegmentsNoncrossing, 80, seed).unwrap().segments().unwrap().to_vec();
        let out = intersect_segments(&segs, &mut NoisyContext::exact(), &Params::default(), CHECKED).unwrap();
        let want: Vec<SweepTrapezoid> = oracle::trapezoid_decomposition(&segs).into_iter().map(Into::into).collect();
        let mut want = want;
        want.sort();
        assert_eq!(out.trapezoids.unwrap(), want);
    }
}

#[test]
fn noisy_sweep_finds_every_crossing() {
    let segs = crossing(200, 7);
    let want = oracle::all_crossings(&segs);
    let mut ok = 0;
    for trial in 0..10 {
        let mut ctx = NoisyContext::for_trial(0.1, 3, trial).unwrap();
        let out = intersect_segments(&segs, &mut ctx, &Params::default(), SweepOptions::default());
        ok += usize::from(out.is_ok_and(|o| o.crossings == want));
    }
    assert!(ok >= 9, "{ok}/10");
}

#[test]
fn closest_pair_small_cases() {
    let pts = [Point2::new(0, 0), Point2::new(1, 0), Point2::new(5, 5)];
    let got = closest_pair(&pts, &mut NoisyContext::exact(), &Params::default()).unwrap();
    assert_eq!(got, (pts[0], pts[1]));
    let two = [Point2::new(3, 9), Point2::new(-2, 4)];
    assert_eq!(closest_pair(&two, &mut NoisyContext::exact(), &Params::default()).unwrap(), (two[1], two[0]));
    assert!(matches!(
        closest_pair(&two[..1], &mut NoisyContext::exact(), &Params::default()),
        Err(Error::TooFewPoints { .. })
    ));
}

#[test]
fn noisy_closest_pair_matches_brute_force() {
    let mut ok = 0;
    for trial in 0..10 {
        let pts = points(1024, trial);
        let (i, j) = oracle::closest_pair(&pts).unwrap();
        let want = (pts[i].min(pts[j]), pts[i].max(pts[j]));
        let mut ctx = NoisyContext::for_trial(0.1, 5, trial).unwrap();
        ok += usize::from(closest_pair(&pts, &mut ctx, &Params::default()) == Ok(want));
    }
    assert!(ok >= 9, "{ok}/10");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn exact_sweep_any_instance(seed in 0u64..10_000, n in 2usize..40) {
        let segs = crossing(n, seed);
        let out = intersect_segments(&segs, &mut NoisyContext::exact(), &Params::default(), CHECKED).unwrap();
        prop_assert_eq!(&out.crossings, &oracle::all_crossings(&segs));
    }

    #[test]
    fn exact_closest_pair_any_instance(seed in 0u64..10_000, n in 3usize..200) {
        let pts = points(n, seed);
        let (i, j) = oracle::closest_pair(&pts).unwrap();
        let got = closest_pair(&pts, &mut NoisyContext::exact(), &Params::default()).unwrap();
        prop_assert_eq!(got, (pts[i].min(pts[j]), pts[i].max(pts[j])));
    }
}
