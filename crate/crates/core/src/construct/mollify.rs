use serde::{Deserialize, Serialize};

use super::twist::smooth_step;
use crate::curve::{endpoint_frames, frame_closeness, nondeg_margin, MoorePath, DEFAULT_DENSITY, FRAME_MATCH_TOL};
use crate::error::{precondition, Error, Result};
use crate::manifold::ChartedManifold;
use crate::spline::fit_periodic;

/// Floor on fit intervals per unit of normalized time.
pub const MOLLIFY_INTERVALS_PER_UNIT: usize = 1024;
/// Fit intervals per kernel width.
const INTERVALS_PER_WIDTH: f64 = 8.0;
const GAUSS_POINTS: usize = 16;
/// Quadrature cells per kernel half-width, on top of the knot spans.
const CELLS_PER_HALF_WIDTH: usize = 4;

pub const KERNEL_DESCRIPTION: &str =
    "bump exp(-1/(1-x^2)) of half-width tau, truncated at the ends of the interval and renormalized";

/// `f_eps`: 1 on `[0, eps/2]` and `[1 - eps/2, 1]`, 0 on `[eps, 1 - eps]`.
pub fn blend_profile(eps: f64, s: f64) -> f64 {
    let h = eps / 2.0;
    let r = s.min(1.0 - s);
    1.0 - smooth_step((r - h) / h)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MollifyReport {
    pub tau: f64,
    pub eps2: f64,
    pub margin_before: f64,
    pub margin_after: f64,
    pub jumps_removed: usize,
    pub endpoint_closeness: f64,
    pub kernel: String,
}

fn gauss_legendre(k: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; k];
    let mut w = vec![0.0; k];
    for i in 0..k {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (k as f64 + 0.5)).cos();
        loop {
            let (mut p0, mut p1) = (1.0, z);
            for j in 2..=k {
                let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                let (mut p0, mut p1) = (1.0, z);
                for j in 2..=k {
                    let p2 = ((2 * j - 1) as f64 * z * p1 - (j - 1) as f64 * p0) / j as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = k as f64 * (z * p1 - p0) / (z * z - 1.0);
                x[i] = z;
                w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
                break;
            }
        }
    }
    (x, w)
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - x * x)).exp()
    }
}

struct Smoother<'a> {
    gamma: &'a MoorePath,
    breaks: Vec<f64>,
    width: f64,
    nodes: (Vec<f64>, Vec<f64>),
}

impl Smoother<'_> {
    fn eval(&self, t: f64) -> Vec<f64> {
        let n = self.gamma.dim();
        if self.width == 0.0 {
            return self.gamma.eval(t);
        }
        let a = self.gamma.duration();
        let (lo, hi) = ((t - self.width).max(0.0), (t + self.width).min(a));
        let cell = self.width / CELLS_PER_HALF_WIDTH as f64;
        let mut cuts = vec![lo];
        let mut c = lo + cell;
        while c < hi {
            cuts.push(c);
            c += cell;
        }
        cuts.extend(self.breaks.iter().copied().filter(|&b| b > lo && b < hi));
        cuts.push(hi);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
        let (mut acc, mut mass) = (vec![0.0; n], 0.0);
        for w in cuts.windows(2) {
            let (u0, u1) = (w[0], w[1]);
            let (mid, half) = (0.5 * (u0 + u1), 0.5 * (u1 - u0));
            for (x, wt) in self.nodes.0.iter().zip(&self.nodes.1) {
                let u = mid + half * x;
                let k = bump((t - u) / self.width) * wt * half;
                if k == 0.0 {
                    continue;
                }
                mass += k;
                for (a, v) in acc.iter_mut().zip(self.gamma.eval(u)) {
                    *a += k * v;
                }
            }
        }
        acc.iter().map(|v| v / mass).collect()
    }
}

/// Smooths `gamma` in chart coordinates with a kernel of normalized width `tau`,
/// then blends with `gamma0` so that both ends coincide with `gamma0`.
/// The result is parametrized like `gamma0`.
pub fn mollify(
    m: &ChartedManifold,
    gamma: &MoorePath,
    tau: f64,
    gamma0: &MoorePath,
    eps2: f64,
) -> Result<(MoorePath, MollifyReport)> {
    if gamma.is_neutral() || gamma0.is_neutral() {
        return Err(precondition("mollify needs nonempty curves"));
    }
    if !(eps2 > 0.0 && eps2 < 0.5) || !(tau >= 0.0 && tau < eps2 / 2.0) {
        return Err(precondition("mollify needs 0 < eps2 < 1/2 and 0 <= tau < eps2/2"));
    }
    if gamma.manifold_spec() != m.spec() || gamma0.manifold_spec() != m.spec() {
        return Err(precondition("curves must live on the given manifold"));
    }
    let a = gamma.duration();
    let a0 = gamma0.duration();
    let smoother = Smoother {
        gamma,
        breaks: gamma.offsets().to_vec(),
        width: tau * a,
        nodes: gauss_legendre(GAUSS_POINTS),
    };
    let q0: usize = gamma0.pieces().iter().map(super::spans).sum();
    let mut need = MOLLIFY_INTERVALS_PER_UNIT.max(gamma.pieces().iter().map(super::spans).sum());
    if tau > 0.0 {
        need = need.max((INTERVALS_PER_WIDTH / tau).ceil() as usize);
    }
    let intervals = q0 * need.div_ceil(q0);
    let f = |s: f64| {
        let r = s / a0;
        let w = blend_profile(eps2, r);
        let p = gamma0.eval(s);
        if w == 1.0 {
            return Ok(p);
        }
        let g = smoother.eval(r * a);
        Ok(g.iter().zip(&p).map(|(x, y)| x * (1.0 - w) + y * w).collect())
    };
    let spline = fit_periodic(f, m.dim(), gamma0.degree(), 0.0, a0, intervals)?;
    let out = MoorePath::from_spline(m, gamma0.basepoint().clone(), spline)?;
    let density = DEFAULT_DENSITY as f64 / a0;
    let margin_before = nondeg_margin(m, gamma, DEFAULT_DENSITY as f64 / a)?;
    let margin_after = nondeg_margin(m, &out, density)?;
    let (f0, f1) = endpoint_frames(m, &out)?;
    let bf = &gamma0.basepoint().frame;
    let endpoint_closeness = frame_closeness(&f0, bf).max(frame_closeness(&f1, bf));
    let report = MollifyReport {
        tau,
        eps2,
        margin_before,
        margin_after,
        jumps_removed: gamma.jumps().iter().filter(|&&j| j > FRAME_MATCH_TOL).count(),
        endpoint_closeness,
        kernel: KERNEL_DESCRIPTION.into(),
    };
    if !(margin_after > 0.0) {
        return Err(Error::Smoothing(format!("smoothed curve is degenerate at tau = {tau}, eps2 = {eps2}")));
    }
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(GAUSS_POINTS);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let i: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(30)).sum();
        assert!((i - 2.0 / 31.0).abs() < 1e-14);
    }

    #[test]
    fn blend_is_flat_at_the_ends() {
        let e = 0.1;
        for s in [0.0, 0.02, 0.05, 0.95, 1.0] {
            assert_eq!(blend_profile(e, s), 1.0);
        }
        for s in [0.1, 0.5, 0.9] {
            assert_eq!(blend_profile(e, s), 0.0);
        }
        let f = blend_profile(e, 0.07);
        assert!(f > 0.0 && f < 1.0);
        assert_eq!((1.0 - f) + f, 1.0);
    }
}
