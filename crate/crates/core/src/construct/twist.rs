use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::curve::{endpoint_frames, nondeg_margin, MoorePath};
use crate::error::{precondition, Error, Result};
use crate::manifold::{BasisPoint, ChartedManifold};
use crate::spline::{default_degree, fit_periodic};

/// Fit intervals per unit frequency of the twist.
const INTERVALS_PER_FREQUENCY: usize = 64;
const MARGIN_FLOOR: f64 = 1e-6;

/// A certified non-degenerate loop in flat R^n based at the origin.
#[derive(Clone, Debug)]
pub struct Twist {
    pub path: MoorePath,
    pub margin: f64,
    /// Largest relative mismatch of the derivative jets across the seam.
    pub seam_error: f64,
    pub max_frequency: u32,
}

impl Twist {
    pub fn dim(&self) -> usize {
        self.path.dim()
    }
    pub fn frame(&self) -> &DMatrix<f64> {
        &self.path.basepoint().frame
    }
}

fn raw_twist(n: usize, t: f64) -> Vec<f64> {
    let w = 2.0 * PI * t;
    let mut v = Vec::with_capacity(n);
    let mut k = 1;
    if n % 2 == 1 {
        // a trefoil-like block; the plain (cos, sin, sin 3) curve is degenerate
        v.push(w.cos() + 0.5 * (2.0 * w).cos());
        v.push(w.sin() - 0.5 * (2.0 * w).sin());
        v.push(-0.25 * (3.0 * w).sin());
        k = 4;
    }
    while v.len() < n {
        v.push((k as f64 * w).cos());
        v.push((k as f64 * w).sin());
        k += 1;
    }
    v
}

fn max_frequency(n: usize) -> u32 {
    if n % 2 == 1 {
        if n == 3 {
            3
        } else {
            (4 + (n - 3) / 2 - 1) as u32
        }
    } else {
        (n / 2) as u32
    }
}

/// The model twist `alpha` in the loop space of R^n with `F_alpha(0)` positively oriented.
pub fn make_twist(n: usize) -> Result<Twist> {
    if n < 2 {
        return Err(precondition("twists need n >= 2"));
    }
    let flat = ChartedManifold::euclidean(n);
    let freq = max_frequency(n);
    let intervals = INTERVALS_PER_FREQUENCY * freq as usize;
    let origin = raw_twist(n, 0.0);
    let f = |t: f64| Ok(raw_twist(n, t).iter().zip(&origin).map(|(a, b)| a - b).collect());
    let spline = fit_periodic(f, n, default_degree(n), 0.0, 1.0, intervals)?;
    let mut path = MoorePath::from_spline(&flat, BasisPoint::origin(n), spline)?;
    let (f0, _) = endpoint_frames(&flat, &path)?;
    if f0.determinant() < 0.0 {
        path = path.map_points(move |p| {
            let mut q = p.to_vec();
            q[n - 1] = -q[n - 1];
            q
        });
    }
    let (f0, f1) = endpoint_frames(&flat, &path)?;
    let seam_error = (0..n)
        .map(|j| (f0.column(j) - f1.column(j)).norm() / f0.column(j).norm().max(1.0))
        .fold(0.0, f64::max);
    let path = path.with_basepoint(BasisPoint { point: vec![0.0; n], frame: f0 });
    let margin = nondeg_margin(&flat, &path, crate::curve::DEFAULT_DENSITY)?;
    if !(margin > MARGIN_FLOOR) || seam_error > 1e-9 {
        return Err(Error::Construction(format!(
            "twist for n = {n} failed certification (margin {margin:e}, seam {seam_error:e})"
        )));
    }
    Ok(Twist { path, margin, seam_error, max_frequency: freq })
}

/// Image `exp_{x0}(lambda alpha)` of a flat loop, with its own frame as basepoint frame.
pub fn exponentiate_loop(m: &ChartedManifold, alpha: &MoorePath, x0: &[f64], lambda: f64) -> Result<MoorePath> {
    let piece = &alpha.pieces()[0];
    let q = super::spans(piece);
    let a = alpha.duration();
    let f = |t: f64| {
        let v: Vec<f64> = alpha.eval(t).iter().map(|c| lambda * c).collect();
        m.exp_map(x0, &v)
    };
    let spline = fit_periodic(f, m.dim(), alpha.degree(), 0.0, a, q)?;
    let bp = BasisPoint { point: x0.to_vec(), frame: DMatrix::identity(m.dim(), m.dim()) };
    let path = MoorePath::from_spline(m, bp, spline)?;
    let (f0, _) = endpoint_frames(m, &path)?;
    Ok(path.with_basepoint(BasisPoint { point: x0.to_vec(), frame: f0 }))
}

/// Largest `lambda` in `1, 1/2, 1/4, ...` whose image stays in the chart with margin at least `tol`.
pub fn scale_into_manifold(m: &ChartedManifold, twist: &Twist, x0: &[f64], tol: f64, density: f64) -> Result<(f64, MoorePath)> {
    if m.dim() != twist.dim() {
        return Err(precondition("twist dimension does not match the manifold"));
    }
    if !(tol < twist.margin) {
        return Err(Error::Scaling(format!(
            "tolerance {tol} is not below the flat margin {}",
            twist.margin
        )));
    }
    let mut profile = vec![];
    for k in 0..=20 {
        let lambda = 0.5f64.powi(k);
        match exponentiate_loop(m, &twist.path, x0, lambda) {
            Ok(w) => {
                let margin = nondeg_margin(m, &w, density)?;
                if margin >= tol {
                    return Ok((lambda, w));
                }
                profile.push(format!("{lambda}: margin {margin:.3e}"));
            }
            Err(Error::ChartEscape { .. }) => profile.push(format!("{lambda}: leaves the chart")),
            Err(e) => return Err(e),
        }
    }
    Err(Error::Scaling(format!("no scale reached margin {tol}: {}", profile.join(", "))))
}

/// `C^infinity` step from 0 (for `x <= 0`) to 1 (for `x >= 1`), flat at both ends.
pub fn smooth_step(x: f64) -> f64 {
    let h = |y: f64| if y > 0.0 { (-1.0 / y).exp() } else { 0.0 };
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let (a, b) = (h(x), h(1.0 - x));
        a / (a + b)
    }
}
