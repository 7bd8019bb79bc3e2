//! Static convex hull: noisy sort, then a monotone-chain scan whose
//! orientation tests are amplified by repetition.

use crate::bst::noisy_sort;
use crate::error::{Error, Result};
use crate::general_position::validate_points;
use crate::noise::NoisyContext;
use crate::predicates::Point2;
use crate::Params;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HullStats {
    pub sort_calls: u64,
    pub scan_calls: u64,
}

/// Counterclockwise hull starting at the lexicographically smallest point.
pub fn convex_hull_2d(pts: &[Point2], ctx: &mut NoisyContext, params: &Params) -> Result<Vec<Point2>> {
    convex_hull_with_stats(pts, ctx, params).map(|(h, _)| h)
}

pub fn convex_hull_with_stats(
    pts: &[Point2],
    ctx: &mut NoisyContext,
    params: &Params,
) -> Result<(Vec<Point2>, HullStats)> {
    if pts.len() < 3 {
        return Err(Error::TooFewPoints { needed: 3, got: pts.len() });
    }
    validate_points(pts)?;
    let c0 = ctx.calls();
    let order = |a: &Point2, b: &Point2| Ok(a.cmp(b));
    let sorted = noisy_sort(pts, &order, ctx, params)?;
    let c1 = ctx.calls();
    let plan = params.amplify(ctx.p(), pts.len())?;

    // lower chain left to right, then upper chain right to left
    let mut hull: Vec<Point2> = Vec::with_capacity(pts.len() + 1);
    for pass in 0..2 {
        let floor = hull.len();
        let seq: Box<dyn Iterator<Item = &Point2>> =
            if pass == 0 { Box::new(sorted.iter()) } else { Box::new(sorted.iter().rev()) };
        for &p in seq {
            while hull.len() >= floor + 2 {
                let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if ctx.ccw(a, b, p, plan)? {
                    break;
                }
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    let stats = HullStats { sort_calls: c1 - c0, scan_calls: ctx.calls() - c1 };
    Ok((hull, stats))
}
