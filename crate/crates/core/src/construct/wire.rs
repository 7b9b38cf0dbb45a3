use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::twist::smooth_step;
use crate::curve::{
    columns_to_matrix, concat_all, endpoint_frames, frame_closeness, frame_map, nondeg_margin,
    segment_grid, FrameCurve, MoorePath,
};
use crate::error::{precondition, Error, Result};
use crate::manifold::{BasisPoint, ChartedManifold, Lift};
use crate::spline::{fit_periodic_samples, interpolate_open, BSpline};

/// Loop of rotations turning `turns` times in the plane of the orthonormal
/// pair `(u, v)`, held at the identity on `[0, hold]` and `[duration - hold, duration]`.
pub fn rotation_loop(u: &[f64], v: &[f64], turns: f64, duration: f64, hold: f64, density: f64) -> Result<FrameCurve> {
    let n = u.len();
    if v.len() != n || !(hold >= 0.0 && 2.0 * hold < duration) {
        return Err(precondition("rotation loop needs matching vectors and hold < duration / 2"));
    }
    let (u, v) = (DVector::from_column_slice(u), DVector::from_column_slice(v));
    if (u.norm() - 1.0).abs() > 1e-12 || (v.norm() - 1.0).abs() > 1e-12 || u.dot(&v).abs() > 1e-12 {
        return Err(precondition("rotation plane must be given by an orthonormal pair"));
    }
    let uu = &u * u.transpose() + &v * v.transpose();
    let skew = &v * u.transpose() - &u * v.transpose();
    FrameCurve::sample(n, duration, density, |t| {
        let th = 2.0 * std::f64::consts::PI * turns * smooth_step((t - hold) / (duration - 2.0 * hold));
        DMatrix::identity(n, n) + &uu * (th.cos() - 1.0) + &skew * th.sin()
    })
}

fn fitted_loop(a: &FrameCurve, degree: usize) -> Result<BSpline> {
    if a.segments().len() != 1 {
        return Err(precondition("the matrix loop must be sampled without jumps"));
    }
    let n = a.dim();
    let seg = &a.segments()[0];
    let p = seg.times.len() - 1;
    let h = a.duration() / p as f64;
    if seg.times.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-6 * h) {
        return Err(precondition("the matrix loop must be sampled on a uniform grid"));
    }
    let id = DMatrix::<f64>::identity(n, n);
    let held = seg.frames[..2].iter().chain(&seg.frames[p - 1..]).all(|f| (f - &id).amax() < 1e-9);
    if !held {
        return Err(precondition("the matrix loop must be the identity near both ends"));
    }
    if seg.frames.iter().any(|f| !(f.determinant() > 0.0)) {
        return Err(precondition("the matrix loop must stay in GL+"));
    }
    let vals: Vec<f64> = seg.frames[..p]
        .iter()
        .flat_map(|f| (0..n).flat_map(move |i| (0..n).map(move |j| f[(i, j)])))
        .collect();
    fit_periodic_samples(&vals, n * n, degree, a.start_time(), a.duration())
}

fn mat_from(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| v[i * n + j])
}

fn check_flat_loop(omega: &MoorePath) -> Result<()> {
    if omega.manifold_spec().kind != crate::manifold::ManifoldKind::Euclidean {
        return Err(precondition("the twist must live in flat R^n"));
    }
    if omega.is_neutral() || omega.pieces().len() != 1 {
        return Err(precondition("the twist must be a single nonempty piece"));
    }
    if omega.start_point().iter().any(|v| v.abs() > 1e-9) {
        return Err(precondition("the twist must be based at the origin"));
    }
    Ok(())
}

fn per_twist_intervals(omega: &MoorePath) -> usize {
    super::spans(&omega.pieces()[0]).max(64)
}

/// `A^[N](t) = A(t) omega(N t / a)` on `[0, a]`.
pub fn matrix_wire(a: &FrameCurve, omega: &MoorePath, n_twists: usize) -> Result<MoorePath> {
    check_flat_loop(omega)?;
    if n_twists == 0 {
        return Err(precondition("the number of twists must be positive"));
    }
    let n = omega.dim();
    if a.dim() != n {
        return Err(precondition("matrix loop and twist dimensions differ"));
    }
    let fa = fitted_loop(a, omega.degree())?;
    let q = per_twist_intervals(omega);
    let aw = omega.duration();
    let dur = a.duration();
    let total = n_twists * q;
    let table: Vec<Vec<f64>> = (0..q).map(|j| omega.eval(aw * j as f64 / q as f64)).collect();
    let vals: Vec<f64> = (0..total)
        .into_par_iter()
        .flat_map_iter(|i| {
            let t = a.start_time() + dur * i as f64 / total as f64;
            let am = mat_from(&fa.eval(t), n);
            let w = am * DVector::from_column_slice(&table[i % q]);
            w.iter().copied().collect::<Vec<_>>()
        })
        .collect();
    let spline = fit_periodic_samples(&vals, n, omega.degree(), 0.0, dur)?;
    let flat = ChartedManifold::euclidean(n);
    let path = MoorePath::from_spline(&flat, BasisPoint::origin(n), spline)?;
    let (f0, _) = endpoint_frames(&flat, &path)?;
    Ok(path.with_basepoint(BasisPoint { point: vec![0.0; n], frame: f0 }))
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AsymptoticRow {
    pub n: usize,
    pub k: usize,
    pub deviation: f64,
}

/// Normalized deviation `max |W^(k) - c^k A omega^(k)| / (c^k max |omega^(k)|)`,
/// `c = N a_omega / a`, for `k = 1..=n`.
pub fn asymptotic_table(a: &FrameCurve, omega: &MoorePath, ns: &[usize], samples_per_twist: usize) -> Result<Vec<AsymptoticRow>> {
    check_flat_loop(omega)?;
    let n = omega.dim();
    let fa = fitted_loop(a, omega.degree())?;
    let aw = omega.duration();
    let dur = a.duration();
    let wscale: Vec<f64> = {
        let grid = segment_grid(aw, samples_per_twist as f64 / aw);
        (1..=n)
            .map(|k| {
                grid.iter()
                    .map(|&s| DVector::from_column_slice(&omega.eval_ders(s, k)[k]).norm())
                    .fold(0.0, f64::max)
            })
            .collect()
    };
    let mut rows = vec![];
    for &nt in ns {
        let w = matrix_wire(a, omega, nt)?;
        let c = nt as f64 * aw / dur;
        let grid = segment_grid(dur, (samples_per_twist * nt) as f64 / dur);
        let dev: Vec<Vec<f64>> = grid
            .par_iter()
            .map(|&t| {
                let wd = w.eval_ders(t, n);
                let am = mat_from(&fa.eval(a.start_time() + t), n);
                let s = (nt as f64 * t / dur).fract() * aw;
                let s = if t >= dur { aw } else { s };
                let od = omega.eval_ders(s, n);
                (1..=n)
                    .map(|k| {
                        let model = &am * DVector::from_column_slice(&od[k]) * c.powi(k as i32);
                        (DVector::from_column_slice(&wd[k]) - model).norm()
                    })
                    .collect()
            })
            .collect();
        for k in 1..=n {
            let m = dev.iter().map(|r| r[k - 1]).fold(0.0, f64::max);
            rows.push(AsymptoticRow { n: nt, k, deviation: m / (c.powi(k as i32) * wscale[k - 1]) });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct WireReport {
    pub n: usize,
    pub margin: f64,
    pub endpoint_closeness: f64,
    pub asymptotics: Vec<AsymptoticRow>,
}

#[derive(Clone, Debug)]
pub struct WireSearch {
    pub n: usize,
    pub wire: MoorePath,
    pub margin: f64,
    pub profile: Vec<(usize, f64)>,
}

/// Smallest even `N <= n_max` with wire margin at least `tol`.
pub fn find_wire_n(a: &FrameCurve, omega: &MoorePath, tol: f64, n_max: usize, density: f64) -> Result<WireSearch> {
    let flat = ChartedManifold::euclidean(omega.dim());
    let mut profile = vec![];
    for nt in (2..=n_max).step_by(2) {
        let w = matrix_wire(a, omega, nt)?;
        let margin = nondeg_margin(&flat, &w, density * nt as f64 / a.duration())?;
        profile.push((nt, margin));
        if margin >= tol {
            return Ok(WireSearch { n: nt, wire: w, margin, profile });
        }
    }
    let tail: Vec<String> = profile.iter().map(|(n, m)| format!("{n}: {m:.3e}")).collect();
    Err(Error::Construction(format!("no even N <= {n_max} reaches margin {tol}; profile {}", tail.join(", "))))
}

/// Sampled `A_1 f_1 A_2 f_2 ... A_{N/2} f_{N/2}` with `A_i = A|[2(i-1)a/N, 2ia/N]`
/// and `f_i = A(2ia/N) F(omega omega) F(omega omega)(0)^-1`.
pub fn cut_insert(a: &FrameCurve, omega: &MoorePath, n_twists: usize, density: f64) -> Result<FrameCurve> {
    check_flat_loop(omega)?;
    if n_twists == 0 || n_twists % 2 == 1 {
        return Err(precondition("cut-and-insert needs an even positive N"));
    }
    let n = omega.dim();
    let fa = fitted_loop(a, omega.degree())?;
    let flat = ChartedManifold::euclidean(n);
    let ww = concat_all(&[omega.clone(), omega.clone()], 0.0)?;
    let fww = frame_map(&flat, &ww, density)?.based_at_identity()?;
    let dur = a.duration();
    let t0 = a.start_time();
    let mut out: Option<FrameCurve> = None;
    for i in 1..=n_twists / 2 {
        let (lo, hi) = (2.0 * (i - 1) as f64 * dur / n_twists as f64, 2.0 * i as f64 * dur / n_twists as f64);
        let piece = FrameCurve::sample(n, hi - lo, density, |s| mat_from(&fa.eval(t0 + lo + s), n))?;
        let ai = mat_from(&fa.eval(t0 + hi), n);
        let fi = fww.map(|f| &ai * f);
        let chunk = piece.concat(&fi)?;
        out = Some(match out {
            None => chunk,
            Some(acc) => acc.concat(&chunk)?,
        });
    }
    Ok(out.unwrap())
}

/// Sup distance between two sampled frame paths after rescaling both to `[0, 1]`.
pub fn frame_c0_distance(f: &FrameCurve, g: &FrameCurve, samples: usize) -> f64 {
    (0..=samples)
        .into_par_iter()
        .map(|i| {
            let s = i as f64 / samples as f64;
            let a = f.frame_at(f.start_time() + s * f.duration());
            let b = g.frame_at(g.start_time() + s * g.duration());
            (a - b).norm()
        })
        .reduce(|| 0.0, f64::max)
}

/// How twist coordinates are attached to the lift.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum FrameMatching {
    /// The lift frame receives the standard basis of R^n (suits orthonormal lifts).
    Standard,
    /// The lift frame receives the initial derivative frame of the scaled
    /// twist (suits frame-map lifts; junctions then match).
    TwistFrame,
}

/// Derivative frame at 0 of `beta(s) = lambda0 alpha(a_alpha s / (lambda0 a))`.
pub fn twist_basis(alpha: &MoorePath, lambda0: f64, a: f64) -> DMatrix<f64> {
    let n = alpha.dim();
    let c = alpha.duration() / (lambda0 * a);
    let d = alpha.eval_ders(0.0, n);
    let cols: Vec<Vec<f64>> = (1..=n).map(|k| d[k].iter().map(|v| lambda0 * v * c.powi(k as i32)).collect()).collect();
    columns_to_matrix(&cols)
}

struct WireGeometry<'a> {
    m: &'a ChartedManifold,
    lift: &'a Lift,
    beta: Vec<Vec<f64>>,
    pinv: DMatrix<f64>,
    basis: DMatrix<f64>,
    lambda0: f64,
    q: usize,
}

impl<'a> WireGeometry<'a> {
    fn new(m: &'a ChartedManifold, lift: &'a Lift, alpha: &MoorePath, lambda0: f64, matching: FrameMatching) -> Result<Self> {
        check_flat_loop(alpha)?;
        if !(lambda0 > 0.0) {
            return Err(precondition("lambda0 must be positive"));
        }
        let n = m.dim();
        if alpha.dim() != n || lift.frames().dim() != n {
            return Err(precondition("twist, lift and manifold dimensions differ"));
        }
        let q = per_twist_intervals(alpha);
        let aw = alpha.duration();
        let beta = (0..=q)
            .map(|j| alpha.eval(aw * j as f64 / q as f64).iter().map(|v| lambda0 * v).collect())
            .collect();
        let basis = twist_basis(alpha, lambda0, lift.duration());
        let pinv = match matching {
            FrameMatching::Standard => DMatrix::identity(n, n),
            FrameMatching::TwistFrame => basis
                .clone()
                .try_inverse()
                .ok_or_else(|| precondition("twist frame is singular"))?,
        };
        Ok(WireGeometry { m, lift, beta, pinv, basis, lambda0, q })
    }

    fn identification(&self, u: f64) -> DMatrix<f64> {
        self.lift.frame_at(u) * &self.pinv
    }

    fn twist_point(&self, u: f64, j: usize) -> Result<Vec<f64>> {
        let x = self.lift.point_at(u);
        let w = self.identification(u) * DVector::from_column_slice(&self.beta[j]);
        self.m.exp_map(&x, w.as_slice())
    }

    fn twist_duration(&self) -> f64 {
        self.lambda0 * self.lift.duration()
    }

    /// Closed twist anchored at base time `u`.
    fn twist_at(&self, u: f64, degree: usize) -> Result<BSpline> {
        let vals: Vec<f64> = (0..self.q)
            .into_par_iter()
            .map(|j| self.twist_point(u, j))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        fit_periodic_samples(&vals, self.m.dim(), degree, 0.0, self.twist_duration())
    }

    fn reference(&self, u: f64) -> DMatrix<f64> {
        self.identification(u) * &self.basis
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifoldWireReport {
    pub n: usize,
    pub lambda0: f64,
    pub matching: FrameMatching,
    pub margin: f64,
    pub start_closeness: f64,
    pub end_closeness: f64,
    pub endpoint_closeness: f64,
}

#[derive(Clone, Debug)]
pub struct ManifoldWire {
    pub path: MoorePath,
    pub report: ManifoldWireReport,
}

/// `gamma^[N](t) = exp_{Gamma(t / (lambda0 N))}(lambda0 alpha(t / (lambda0 a)))` on `[0, a lambda0 N]`.
/// Endpoint closeness compares the wire frames with the twist frame carried by the lift.
pub fn manifold_wire(
    m: &ChartedManifold,
    lift: &Lift,
    alpha: &MoorePath,
    lambda0: f64,
    n_twists: usize,
    matching: FrameMatching,
    density: f64,
) -> Result<ManifoldWire> {
    if n_twists == 0 {
        return Err(precondition("the number of twists must be positive"));
    }
    let g = WireGeometry::new(m, lift, alpha, lambda0, matching)?;
    let a = lift.duration();
    let total = n_twists * g.q;
    let dur = g.twist_duration() * n_twists as f64;
    let sites: Vec<f64> = (0..=total).map(|i| if i == total { dur } else { dur * i as f64 / total as f64 }).collect();
    let vals: Vec<f64> = (0..=total)
        .into_par_iter()
        .map(|i| g.twist_point(a * i as f64 / total as f64, i % g.q))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let spline = interpolate_open(&sites, &vals, m.dim(), lift.base().degree())?;
    let path = MoorePath::from_spline(m, BasisPoint { point: lift.point_at(0.0), frame: g.reference(0.0) }, spline)?;
    let (f0, f1) = endpoint_frames(m, &path)?;
    let start_closeness = frame_closeness(&f0, &g.reference(0.0));
    let end_closeness = frame_closeness(&f1, &g.reference(a));
    let margin = nondeg_margin(m, &path, density / g.twist_duration())?;
    Ok(ManifoldWire {
        path,
        report: ManifoldWireReport {
            n: n_twists,
            lambda0,
            matching,
            margin,
            start_closeness,
            end_closeness,
            endpoint_closeness: start_closeness.max(end_closeness),
        },
    })
}

/// First `N` in `candidates` whose wire reaches margin `tol` and endpoint closeness `eps`.
pub fn find_manifold_wire_n(
    m: &ChartedManifold,
    lift: &Lift,
    alpha: &MoorePath,
    lambda0: f64,
    matching: FrameMatching,
    tol: f64,
    eps: f64,
    candidates: &[usize],
    density: f64,
) -> Result<(ManifoldWire, Vec<ManifoldWireReport>)> {
    let mut seen = vec![];
    for &nt in candidates {
        let w = manifold_wire(m, lift, alpha, lambda0, nt, matching, density)?;
        seen.push(w.report.clone());
        if w.report.margin >= tol && w.report.endpoint_closeness <= eps {
            return Ok((w, seen));
        }
    }
    Err(Error::Construction(format!(
        "no candidate N reaches margin {tol} and closeness {eps}: {}",
        seen.iter()
            .map(|r| format!("N={} margin {:.3e} closeness {:.3e}", r.n, r.margin, r.endpoint_closeness))
            .collect::<Vec<_>>()
            .join("; ")
    )))
}

fn base_piece(lift: &Lift, lo: f64, hi: f64) -> BSpline {
    let s = &lift.base().pieces()[0];
    s.restrict(lo.max(s.start()), hi.min(s.end()))
}

fn assemble(m: &ChartedManifold, lift: &Lift, pieces: Vec<BSpline>, delta: f64) -> Result<MoorePath> {
    let bp = lift.base().basepoint().clone();
    let paths: Vec<MoorePath> = pieces
        .into_iter()
        .map(|p| MoorePath::from_spline(m, bp.clone(), p))
        .collect::<Result<_>>()?;
    concat_all(&paths, delta)
}

/// `gamma^0 . omega_1 . gamma^1 . ... . gamma^{N-1} . omega_N` with
/// `gamma^i = gamma|[ia/N, (i+1)a/N]` and `omega_i` the twist anchored at `ia/N`.
#[allow(clippy::too_many_arguments)]
pub fn conc_family(
    m: &ChartedManifold,
    lift: &Lift,
    alpha: &MoorePath,
    lambda0: f64,
    n_twists: usize,
    matching: FrameMatching,
    delta: f64,
) -> Result<MoorePath> {
    slide_homotopy(m, lift, alpha, lambda0, n_twists, matching, delta, None)
}

/// Configuration of `conc_family` with the twist at slot `i` moved to
/// `(i + tau) a / N`; `tau = 0` is `conc_family`, `tau = 1` places it next
/// to the twist at `(i + 1) a / N`. `slide = None` gives the unmoved family.
#[allow(clippy::too_many_arguments)]
pub fn slide_homotopy(
    m: &ChartedManifold,
    lift: &Lift,
    alpha: &MoorePath,
    lambda0: f64,
    n_twists: usize,
    matching: FrameMatching,
    delta: f64,
    slide: Option<(usize, f64)>,
) -> Result<MoorePath> {
    if n_twists == 0 {
        return Err(precondition("the number of twists must be positive"));
    }
    if let Some((i, tau)) = slide {
        if i == 0 || i >= n_twists || !(0.0..=1.0).contains(&tau) {
            return Err(precondition("slide needs 1 <= i < N and tau in [0, 1]"));
        }
    }
    let g = WireGeometry::new(m, lift, alpha, lambda0, matching)?;
    let a = lift.duration();
    let deg = lift.base().degree();
    let slot = |i: usize| a * i as f64 / n_twists as f64;
    let mut pieces = vec![];
    for i in 0..n_twists {
        let (lo, hi) = (slot(i), if i + 1 == n_twists { a } else { slot(i + 1) });
        match slide {
            Some((j, tau)) if j == i => {
                let mid = lo + tau * (hi - lo);
                if mid > lo {
                    pieces.push(base_piece(lift, lo, mid));
                }
                pieces.push(g.twist_at(mid, deg)?);
                if mid < hi {
                    pieces.push(base_piece(lift, mid, hi));
                }
            }
            _ => pieces.push(base_piece(lift, lo, hi)),
        }
        if !matches!(slide, Some((j, _)) if j == i + 1) {
            pieces.push(g.twist_at(hi, deg)?);
        }
    }
    assemble(m, lift, pieces, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::make_twist;
    use crate::spin::{curve_class, SpinClass};

    fn loop_z(turns: f64) -> FrameCurve {
        rotation_loop(&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], turns, 1.0, 0.05, 1024.0).unwrap()
    }

    #[test]
    fn rotation_loop_is_held_and_closed() {
        let a = loop_z(1.0);
        let id = DMatrix::<f64>::identity(3, 3);
        assert!((a.first() - &id).amax() < 1e-15);
        assert!((a.last() - &id).amax() < 1e-12);
        assert!(a.samples().all(|(_, f)| (f.determinant() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn trivial_loop_wire_is_the_iterated_twist() {
        let tw = make_twist(2).unwrap();
        let a = rotation_loop(&[1.0, 0.0], &[0.0, 1.0], 0.0, 1.0, 0.05, 256.0).unwrap();
        let w = matrix_wire(&a, &tw.path, 3).unwrap();
        for &t in &[0.1, 0.37, 0.8] {
            let e = tw.path.eval((3.0 * t as f64).fract());
            let v = w.eval(t);
            assert!((e[0] - v[0]).abs() < 1e-9 && (e[1] - v[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn wire_class_follows_the_loop() {
        let tw = make_twist(3).unwrap();
        let flat = ChartedManifold::euclidean(3);
        let w0 = curve_class(&flat, &tw.path, 1024.0).unwrap().class;
        for (turns, expect) in [(1.0, SpinClass::Minus), (2.0, SpinClass::Plus)] {
            let w = matrix_wire(&loop_z(turns), &tw.path, 32).unwrap();
            let c = curve_class(&flat, &w, 32.0 * 1024.0).unwrap().class;
            assert_eq!(c, expect * w0.pow(32));
        }
    }

    #[test]
    fn cut_insert_requires_even_n() {
        let tw = make_twist(3).unwrap();
        assert!(cut_insert(&loop_z(1.0), &tw.path, 3, 256.0).is_err());
    }
}
