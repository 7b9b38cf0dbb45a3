use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::twist::{smooth_step, Twist};
use crate::curve::{endpoint_frames, MoorePath};
use crate::error::{precondition, Error, Result};
use crate::manifold::{BasisPoint, ChartedManifold};
use crate::spline::{default_degree, fit_open, fit_periodic};

const FIXTURE_INTERVALS: usize = 256;
const GEODESIC_STEPS: usize = 512;

/// Geodesic from `x` with initial velocity `v` on `[0, 1]`, basepoint frame
/// taken from the curve itself (singular for a geodesic). Through the chart
/// origin of a conformal built-in the geodesic is a straight chord, so its
/// higher derivatives vanish to rounding; elsewhere they are at fit-error level.
pub fn geodesic_segment(m: &ChartedManifold, x: &[f64], v: &[f64]) -> Result<MoorePath> {
    let n = m.dim();
    let f = |t: f64| {
        let w: Vec<f64> = v.iter().map(|c| c * t).collect();
        // a fixed step count keeps the integration error smooth in t
        Ok(m.geodesic(x, &w, GEODESIC_STEPS)?.0)
    };
    let spline = fit_open(f, n, default_degree(n), 0.0, 1.0, FIXTURE_INTERVALS)?;
    let path = MoorePath::from_spline(m, BasisPoint { point: x.to_vec(), frame: DMatrix::identity(n, n) }, spline)?;
    let (f0, _) = endpoint_frames(m, &path)?;
    Ok(path.with_basepoint(BasisPoint { point: x.to_vec(), frame: f0 }))
}

/// Unit circle `(cos t, sin t)` on `[0, 2 pi]`.
pub fn circle_loop() -> Result<MoorePath> {
    let flat = ChartedManifold::euclidean(2);
    let f = |t: f64| Ok(vec![t.cos(), t.sin()]);
    let spline = fit_periodic(f, 2, default_degree(2), 0.0, 2.0 * PI, FIXTURE_INTERVALS)?;
    let frame = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
    MoorePath::from_spline(&flat, BasisPoint { point: vec![1.0, 0.0], frame }, spline)
}

fn bent_half(twist: &Twist, c: f64) -> Result<crate::spline::BSpline> {
    let n = twist.dim();
    let alpha = &twist.path;
    let a = alpha.duration();
    let (s0, len) = (0.5 * a, 0.5 * a);
    let f = |t: f64| {
        let u = (t - s0) / len;
        let bend = c * u * u * (1.0 - smooth_step(u / 0.5));
        let mut p = alpha.eval(t);
        p[n - 1] += bend;
        Ok(p)
    };
    fit_open(f, n, alpha.degree(), s0, len, 4 * FIXTURE_INTERVALS)
}

/// The twist with its second half bent so that a frame jump of size
/// `target` appears at the midpoint; endpoints and `C^1` contact are kept.
pub fn jump_fixture(twist: &Twist, target: f64) -> Result<MoorePath> {
    if !(target > 0.0 && target < 0.5) {
        return Err(precondition("the jump target must lie in (0, 1/2)"));
    }
    let flat = ChartedManifold::euclidean(twist.dim());
    let a = twist.path.duration();
    let first = twist.path.pieces()[0].restrict(0.0, 0.5 * a);
    let build = |c: f64| -> Result<MoorePath> {
        MoorePath::from_pieces(&flat, twist.path.basepoint().clone(), vec![first.clone(), bent_half(twist, c)?])
    };
    let jump = |c: f64| -> Result<f64> { Ok(build(c)?.jumps()[0]) };
    let (mut lo, mut hi) = (0.0, 1.0);
    while jump(hi)? < target {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Construction("cannot reach the requested frame jump".into()));
        }
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if jump(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    build(0.5 * (lo + hi))
}
