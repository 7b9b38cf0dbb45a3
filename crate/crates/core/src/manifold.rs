//! Riemannian manifolds presented by a single chart, with Levi-Civita
//! Christoffel symbols, the exponential map and parallel transport.
//!
//! The built-in models are conformally flat, `g = phi^2 I` with
//! `phi = 2 / (1 + kappa |x|^2)`: the round sphere in stereographic
//! coordinates (`kappa > 0`) and the Poincare ball (`kappa < 0`).

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::curve::{segment_grid, FrameCurve, FrameSegment, MoorePath};
use crate::error::{precondition, Error, Result};
use crate::jet::{dot, Jet};
use crate::spline::{interpolate_open, BSpline};

pub const DEFAULT_FD_STEP: f64 = 1e-4;
pub const EUCLIDEAN_CHART_RADIUS: f64 = 1e6;

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ManifoldKind {
    Euclidean,
    Sphere,
    Hyperbolic,
    Custom,
}

/// Serializable manifold descriptor.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct ManifoldSpec {
    pub kind: ManifoldKind,
    pub dim: usize,
    pub chart_radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<String>,
}

type MetricFn = fn(&[f64]) -> DMatrix<f64>;

pub struct RegisteredMetric {
    pub name: &'static str,
    pub about: &'static str,
    metric: MetricFn,
}

fn paraboloid(x: &[f64]) -> DMatrix<f64> {
    let v = DVector::from_column_slice(x);
    DMatrix::identity(x.len(), x.len()) + &v * v.transpose()
}

fn round_sphere(x: &[f64]) -> DMatrix<f64> {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let phi = 2.0 / (1.0 + r2);
    DMatrix::identity(x.len(), x.len()) * (phi * phi)
}

static METRICS: [RegisteredMetric; 2] = [
    RegisteredMetric {
        name: "paraboloid",
        about: "graph of |x|^2/2, g = I + x x^T",
        metric: paraboloid,
    },
    RegisteredMetric {
        name: "round-sphere-fd",
        about: "unit sphere in stereographic coordinates with finite-difference Christoffels",
        metric: round_sphere,
    },
];

pub fn registered_metrics() -> &'static [RegisteredMetric] {
    &METRICS
}

#[derive(Clone, Copy, Debug)]
enum Model {
    Flat,
    Conformal { kappa: f64 },
    Custom { metric: MetricFn, fd_step: f64 },
}

/// Christoffel symbols `Gamma^k_ij` at a point, stored `[(k * n + i) * n + j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, k: usize, i: usize, j: usize) -> f64 {
        self.data[(k * self.n + i) * self.n + j]
    }

    pub fn contract(&self, u: &[f64], v: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|k| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.data[(k * n + i) * n + j] * u[i] * v[j];
                    }
                }
                s
            })
            .collect()
    }

    pub fn max_abs_diff(&self, o: &Christoffel) -> f64 {
        self.data.iter().zip(&o.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub struct ChartedManifold {
    spec: ManifoldSpec,
    model: Model,
}

impl PartialEq for ChartedManifold {
    fn eq(&self, o: &Self) -> bool {
        self.spec == o.spec
    }
}

impl ChartedManifold {
    pub fn euclidean(n: usize) -> Self {
        Self::from_spec(&ManifoldSpec {
            kind: ManifoldKind::Euclidean,
            dim: n,
            chart_radius: EUCLIDEAN_CHART_RADIUS,
            curvature_scale: None,
            metric: None,
        })
        .expect("valid euclidean descriptor")
    }

    /// Sphere of curvature `scale`; the chart omits a neighbourhood of the antipode.
    pub fn sphere(n: usize, scale: f64) -> Result<Self> {
        Self::from_spec(&ManifoldSpec {
            kind: ManifoldKind::Sphere,
            dim: n,
            chart_radius: 10.0 / scale.sqrt(),
            curvature_scale: Some(scale),
            metric: None,
        })
    }

    /// Poincare ball of curvature `-scale`.
    pub fn hyperbolic(n: usize, scale: f64) -> Result<Self> {
        Self::from_spec(&ManifoldSpec {
            kind: ManifoldKind::Hyperbolic,
            dim: n,
            chart_radius: 0.95 / scale.sqrt(),
            curvature_scale: Some(scale),
            metric: None,
        })
    }

    pub fn custom(name: &str, n: usize, chart_radius: f64) -> Result<Self> {
        Self::from_spec(&ManifoldSpec {
            kind: ManifoldKind::Custom,
            dim: n,
            chart_radius,
            curvature_scale: None,
            metric: Some(name.to_string()),
        })
    }

    pub fn with_chart_radius(&self, r: f64) -> Result<Self> {
        let mut s = self.spec.clone();
        s.chart_radius = r;
        Self::from_spec(&s)
    }

    pub fn from_spec(spec: &ManifoldSpec) -> Result<Self> {
        if spec.dim < 2 {
            return Err(Error::Input(format!("manifold dimension must be at least 2, got {}", spec.dim)));
        }
        if !(spec.chart_radius > 0.0) || !spec.chart_radius.is_finite() {
            return Err(Error::Input("chart radius must be positive and finite".into()));
        }
        let scale = || -> Result<f64> {
            match spec.curvature_scale {
                Some(s) if s > 0.0 && s.is_finite() => Ok(s),
                Some(_) => Err(Error::Input("curvature scale must be positive".into())),
                None => Ok(1.0),
            }
        };
        let model = match spec.kind {
            ManifoldKind::Euclidean => Model::Flat,
            ManifoldKind::Sphere => Model::Conformal { kappa: scale()? },
            ManifoldKind::Hyperbolic => {
                let s = scale()?;
                if spec.chart_radius >= 1.0 / s.sqrt() {
                    return Err(Error::Input(format!(
                        "hyperbolic chart radius must be below {}",
                        1.0 / s.sqrt()
                    )));
                }
                Model::Conformal { kappa: -s }
            }
            ManifoldKind::Custom => {
                let name = spec
                    .metric
                    .as_deref()
                    .ok_or_else(|| Error::Input("custom manifold needs a metric name".into()))?;
                let m = METRICS
                    .iter()
                    .find(|m| m.name == name)
                    .ok_or_else(|| Error::Input(format!("unknown metric `{name}`")))?;
                Model::Custom { metric: m.metric, fd_step: DEFAULT_FD_STEP }
            }
        };
        Ok(ChartedManifold { spec: spec.clone(), model })
    }

    pub fn spec(&self) -> &ManifoldSpec {
        &self.spec
    }
    pub fn dim(&self) -> usize {
        self.spec.dim
    }
    pub fn chart_radius(&self) -> f64 {
        self.spec.chart_radius
    }
    pub fn is_flat(&self) -> bool {
        matches!(self.model, Model::Flat)
    }
    /// Whether covariant derivatives can be formed by exact series arithmetic.
    pub fn has_closed_form(&self) -> bool {
        !matches!(self.model, Model::Custom { .. })
    }

    pub fn in_chart(&self, x: &[f64]) -> bool {
        norm(x) < self.spec.chart_radius
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(precondition(format!("point has dimension {}, expected {}", x.len(), self.dim())));
        }
        let r = norm(x);
        if !(r < self.spec.chart_radius) {
            return Err(Error::ChartEscape { param: 0.0, radius: r, limit: self.spec.chart_radius });
        }
        Ok(())
    }

    fn conformal_factor(kappa: f64, x: &[f64]) -> f64 {
        2.0 / (1.0 + kappa * x.iter().map(|v| v * v).sum::<f64>())
    }

    pub fn metric(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        match self.model {
            Model::Flat => DMatrix::identity(n, n),
            Model::Conformal { kappa } => {
                let p = Self::conformal_factor(kappa, x);
                DMatrix::identity(n, n) * (p * p)
            }
            Model::Custom { metric, .. } => metric(x),
        }
    }

    pub fn inner(&self, x: &[f64], u: &[f64], v: &[f64]) -> f64 {
        match self.model {
            Model::Flat => dotv(u, v),
            Model::Conformal { kappa } => {
                let p = Self::conformal_factor(kappa, x);
                p * p * dotv(u, v)
            }
            Model::Custom { metric, .. } => {
                let g = metric(x);
                let (u, v) = (DVector::from_column_slice(u), DVector::from_column_slice(v));
                u.dot(&(g * v))
            }
        }
    }

    pub fn norm(&self, x: &[f64], v: &[f64]) -> f64 {
        self.inner(x, v, v).max(0.0).sqrt()
    }

    /// A g-orthonormal frame at `x` (columns), upper triangular in chart coordinates.
    pub fn orthonormal_frame(&self, x: &[f64]) -> DMatrix<f64> {
        let g = self.metric(x);
        let l = g.cholesky().expect("metric must be positive definite").l();
        l.transpose().try_inverse().expect("invertible Cholesky factor")
    }

    pub fn sqrt_det_metric(&self, x: &[f64]) -> f64 {
        match self.model {
            Model::Flat => 1.0,
            Model::Conformal { kappa } => Self::conformal_factor(kappa, x).powi(self.dim() as i32),
            Model::Custom { metric, .. } => metric(x).determinant().max(0.0).sqrt(),
        }
    }

    /// Gradient of `ln phi` for conformal models.
    fn grad_log_phi(kappa: f64, x: &[f64]) -> Vec<f64> {
        let q = 1.0 + kappa * x.iter().map(|v| v * v).sum::<f64>();
        x.iter().map(|&xi| -2.0 * kappa * xi / q).collect()
    }

    pub fn christoffel(&self, x: &[f64]) -> Christoffel {
        let n = self.dim();
        match self.model {
            Model::Flat => Christoffel { n, data: vec![0.0; n * n * n] },
            Model::Conformal { kappa } => {
                let s = Self::grad_log_phi(kappa, x);
                let mut data = vec![0.0; n * n * n];
                for k in 0..n {
                    for i in 0..n {
                        for j in 0..n {
                            let mut v = 0.0;
                            if i == k {
                                v += s[j];
                            }
                            if j == k {
                                v += s[i];
                            }
                            if i == j {
                                v -= s[k];
                            }
                            data[(k * n + i) * n + j] = v;
                        }
                    }
                }
                Christoffel { n, data }
            }
            Model::Custom { fd_step, .. } => self.christoffel_fd(x, fd_step),
        }
    }

    /// Christoffel symbols from central differences of the metric.
    pub fn christoffel_fd(&self, x: &[f64], h: f64) -> Christoffel {
        let n = self.dim();
        let mut dg = Vec::with_capacity(n);
        for m in 0..n {
            let mut xp = x.to_vec();
            let mut xm = x.to_vec();
            xp[m] += h;
            xm[m] -= h;
            dg.push((self.metric(&xp) - self.metric(&xm)) / (2.0 * h));
        }
        let ginv = self
            .metric(x)
            .try_inverse()
            .expect("metric must be invertible inside the chart");
        let mut data = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (dg[i][(j, l)] + dg[j][(i, l)] - dg[l][(i, j)]);
                    }
                    data[(k * n + i) * n + j] = 0.5 * s;
                }
            }
        }
        Christoffel { n, data }
    }

    /// `Gamma(x)(u, v)`.
    pub fn contract(&self, x: &[f64], u: &[f64], v: &[f64]) -> Vec<f64> {
        match self.model {
            Model::Flat => vec![0.0; self.dim()],
            Model::Conformal { kappa } => {
                let s = Self::grad_log_phi(kappa, x);
                let (us, vs, uv) = (dotv(u, &s), dotv(v, &s), dotv(u, v));
                (0..self.dim()).map(|k| u[k] * vs + v[k] * us - uv * s[k]).collect()
            }
            Model::Custom { .. } => self.christoffel(x).contract(u, v),
        }
    }

    /// `Gamma(x)(u, v)` on truncated series; `None` when no closed form exists.
    pub fn contract_jet(&self, x: &[Jet], u: &[Jet], v: &[Jet]) -> Option<Vec<Jet>> {
        let order = u.iter().chain(v).map(|j| j.order()).min().unwrap_or(0);
        match self.model {
            Model::Flat => Some(vec![Jet::zero(order); self.dim()]),
            Model::Conformal { kappa } => {
                let xs: Vec<Jet> = x.iter().map(|j| j.truncate(order)).collect();
                let q = Jet::constant(1.0, order) + dot(&xs, &xs).scale(kappa);
                let qi = q.recip().scale(-2.0 * kappa);
                let s: Vec<Jet> = xs.iter().map(|xi| *xi * qi).collect();
                let (us, vs, uv) = (dot(u, &s), dot(v, &s), dot(u, v));
                Some((0..self.dim()).map(|k| u[k] * vs + v[k] * us - uv * s[k]).collect())
            }
            Model::Custom { .. } => None,
        }
    }

    fn geodesic_rhs(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        self.contract(x, u, u).into_iter().map(|v| -v).collect()
    }

    /// `exp_x(v)` by fixed-step RK4 on the geodesic equation.
    pub fn exp_map(&self, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        self.check_point(x)?;
        if self.is_flat() {
            let y: Vec<f64> = x.iter().zip(v).map(|(a, b)| a + b).collect();
            let r = norm(&y);
            if r >= self.chart_radius() {
                return Err(Error::ChartEscape { param: 1.0, radius: r, limit: self.chart_radius() });
            }
            return Ok(y);
        }
        let speed = self.norm(x, v);
        let steps = ((64.0 * speed).ceil() as usize).max(64);
        Ok(self.geodesic(x, v, steps)?.0)
    }

    /// Integrates the geodesic through `(x, v)` for unit time; returns the end point and velocity.
    pub fn geodesic(&self, x: &[f64], v: &[f64], steps: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.dim();
        let h = 1.0 / steps as f64;
        let mut p = x.to_vec();
        let mut u = v.to_vec();
        let lim = self.chart_radius();
        let guard = |y: &[f64], s: f64| -> Result<()> {
            let r = norm(y);
            if !(r < lim) {
                Err(Error::ChartEscape { param: s, radius: r, limit: lim })
            } else {
                Ok(())
            }
        };
        let axpy = |a: &[f64], s: f64, b: &[f64]| -> Vec<f64> { (0..n).map(|i| a[i] + s * b[i]).collect() };
        for step in 0..steps {
            let t = step as f64 * h;
            let k1x = u.clone();
            let k1u = self.geodesic_rhs(&p, &u);
            let p2 = axpy(&p, 0.5 * h, &k1x);
            guard(&p2, t + 0.5 * h)?;
            let u2 = axpy(&u, 0.5 * h, &k1u);
            let k2u = self.geodesic_rhs(&p2, &u2);
            let p3 = axpy(&p, 0.5 * h, &u2);
            guard(&p3, t + 0.5 * h)?;
            let u3 = axpy(&u, 0.5 * h, &k2u);
            let k3u = self.geodesic_rhs(&p3, &u3);
            let p4 = axpy(&p, h, &u3);
            guard(&p4, t + h)?;
            let u4 = axpy(&u, h, &k3u);
            let k4u = self.geodesic_rhs(&p4, &u4);
            for i in 0..n {
                p[i] += h / 6.0 * (k1x[i] + 2.0 * u2[i] + 2.0 * u3[i] + u4[i]);
                u[i] += h / 6.0 * (k1u[i] + 2.0 * k2u[i] + 2.0 * k3u[i] + k4u[i]);
            }
            guard(&p, t + h)?;
        }
        Ok((p, u))
    }
}

/// Base point of a loop space: a chart point and a frame of its tangent space.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisPoint {
    pub point: Vec<f64>,
    pub frame: DMatrix<f64>,
}

impl BasisPoint {
    pub fn origin(n: usize) -> Self {
        BasisPoint { point: vec![0.0; n], frame: DMatrix::identity(n, n) }
    }
}

#[derive(Serialize, Deserialize)]
struct BasisPointRepr {
    point: Vec<f64>,
    frame: Vec<Vec<f64>>,
}

impl Serialize for BasisPoint {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        BasisPointRepr { point: self.point.clone(), frame: matrix_rows(&self.frame) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisPoint {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BasisPointRepr::deserialize(d)?;
        let frame = matrix_from_rows(&r.frame).map_err(serde::de::Error::custom)?;
        if frame.nrows() != r.point.len() {
            return Err(serde::de::Error::custom("basepoint frame does not match point dimension"));
        }
        Ok(BasisPoint { point: r.point, frame })
    }
}

pub fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

pub fn matrix_from_rows(rows: &[Vec<f64>]) -> std::result::Result<DMatrix<f64>, String> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err("frame must be a nonempty square matrix".into());
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

pub(crate) fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub(crate) fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Parallel transport of the frame `f` along `path`, sampled like the frame map.
pub fn parallel_transport(m: &ChartedManifold, path: &MoorePath, f: &DMatrix<f64>, density: f64) -> Result<FrameCurve> {
    let n = m.dim();
    if path.is_neutral() {
        return Err(precondition("cannot transport along the neutral path"));
    }
    if f.nrows() != n || f.ncols() != n {
        return Err(precondition("frame size does not match the manifold"));
    }
    let mut e = f.clone();
    let mut segments = Vec::with_capacity(path.pieces().len());
    let rhs = |piece: &BSpline, t: f64, e: &DMatrix<f64>| -> DMatrix<f64> {
        let d = piece.eval_ders(t, 1);
        let mut out = DMatrix::zeros(n, n);
        for c in 0..n {
            let col: Vec<f64> = e.column(c).iter().copied().collect();
            let g = m.contract(&d[0], &d[1], &col);
            for k in 0..n {
                out[(k, c)] = -g[k];
            }
        }
        out
    };
    for (idx, piece) in path.pieces().iter().enumerate() {
        let grid = segment_grid(piece.end(), density);
        let mut frames = Vec::with_capacity(grid.len());
        let mut points = Vec::with_capacity(grid.len());
        for (i, &t) in grid.iter().enumerate() {
            if i > 0 {
                let t0 = grid[i - 1];
                let h = t - t0;
                let k1 = rhs(piece, t0, &e);
                let k2 = rhs(piece, t0 + 0.5 * h, &(&e + &k1 * (0.5 * h)));
                let k3 = rhs(piece, t0 + 0.5 * h, &(&e + &k2 * (0.5 * h)));
                let k4 = rhs(piece, t, &(&e + &k3 * h));
                e += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            }
            let x = piece.eval(t);
            if !m.in_chart(&x) {
                return Err(Error::ChartEscape { param: t + path.offsets()[idx], radius: norm(&x), limit: m.chart_radius() });
            }
            points.push(x);
            frames.push(e.clone());
        }
        let off = path.offsets()[idx];
        segments.push(FrameSegment { times: grid.iter().map(|t| t + off).collect(), frames, points: Some(points) });
    }
    FrameCurve::new(n, segments)
}

/// A frame path over a single-piece base curve, smoothed so it can be
/// evaluated at any time.
#[derive(Clone, Debug)]
pub struct Lift {
    base: MoorePath,
    frames: FrameCurve,
    entries: BSpline,
}

impl Lift {
    pub fn new(base: MoorePath, frames: FrameCurve) -> Result<Self> {
        if base.pieces().len() != 1 {
            return Err(precondition("a lift needs a base curve with one piece"));
        }
        if frames.segments().len() != 1 {
            return Err(precondition("a lift needs a continuous frame path"));
        }
        if (frames.duration() - base.duration()).abs() > 1e-9 * base.duration().max(1.0) {
            return Err(precondition("lift and base curve durations differ"));
        }
        let n = frames.dim();
        let seg = &frames.segments()[0];
        let t0 = seg.times[0];
        let sites: Vec<f64> = seg.times.iter().map(|t| t - t0).collect();
        let vals: Vec<f64> = seg
            .frames
            .iter()
            .flat_map(|f| (0..n).flat_map(move |i| (0..n).map(move |j| f[(i, j)])))
            .collect();
        let entries = interpolate_open(&sites, &vals, n * n, base.degree())?;
        Ok(Lift { base, frames, entries })
    }

    pub fn parallel(m: &ChartedManifold, base: MoorePath, f: &DMatrix<f64>, density: f64) -> Result<Self> {
        let frames = parallel_transport(m, &base, f, density)?;
        Self::new(base, frames)
    }

    pub fn frame_map(m: &ChartedManifold, base: MoorePath, density: f64) -> Result<Self> {
        let frames = crate::curve::frame_map(m, &base, density)?;
        Self::new(base, frames)
    }

    pub fn base(&self) -> &MoorePath {
        &self.base
    }
    pub fn frames(&self) -> &FrameCurve {
        &self.frames
    }
    pub fn duration(&self) -> f64 {
        self.base.duration()
    }
    pub fn point_at(&self, t: f64) -> Vec<f64> {
        self.base.eval(t)
    }
    pub fn frame_at(&self, t: f64) -> DMatrix<f64> {
        let n = self.frames.dim();
        let v = self.entries.eval(t.clamp(0.0, self.entries.end()));
        DMatrix::from_fn(n, n, |i, j| v[i * n + j])
    }
}

/// `exp_{gamma(t)}(sum_i v_i E_i(t))` for a lift `E` of `gamma`.
pub fn exp_frame(m: &ChartedManifold, lift: &Lift, t: f64, v: &[f64]) -> Result<Vec<f64>> {
    let x = lift.point_at(t);
    let w = lift.frame_at(t) * DVector::from_column_slice(v);
    m.exp_map(&x, w.as_slice())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conformal_christoffels_match_finite_differences() {
        let s = ChartedManifold::sphere(3, 1.0).unwrap();
        let x = [0.3, -0.2, 0.5];
        let fd = s.christoffel_fd(&x, 1e-4);
        assert!(s.christoffel(&x).max_abs_diff(&fd) < 1e-7);
    }

    #[test]
    fn paraboloid_christoffels_closed_form() {
        let m = ChartedManifold::custom("paraboloid", 2, 5.0).unwrap();
        let x = [0.4, -0.7];
        let g = m.christoffel(&x);
        let q = 1.0 + 0.16 + 0.49;
        for k in 0..2 {
            for i in 0..2 {
                for j in 0..2 {
                    let e = if i == j { x[k] / q } else { 0.0 };
                    assert!((g.get(k, i, j) - e).abs() < 1e-7);
                }
            }
        }
    }

    #[test]
    fn hyperbolic_exp_at_origin_is_tanh() {
        // at the origin g = 4I, so |v|_g = 2|v| and the radius is tanh(|v|)
        let h = ChartedManifold::hyperbolic(2, 1.0).unwrap();
        let v = [0.6, 0.8];
        let y = h.exp_map(&[0.0, 0.0], &[v[0] * 1.2, v[1] * 1.2]).unwrap();
        let r = norm(&y);
        assert!((r - 1.2f64.tanh()).abs() < 1e-9, "r = {r}");
        assert!((y[0] / r - 0.6).abs() < 1e-12);
    }

    #[test]
    fn sphere_exp_at_origin_is_tan() {
        let s = ChartedManifold::sphere(3, 1.0).unwrap();
        let y = s.exp_map(&[0.0; 3], &[0.0, 0.0, 0.7]).unwrap();
        assert!((y[2] - 0.7f64.tan()).abs() < 1e-9);
    }

    #[test]
    fn escape_is_reported() {
        let h = ChartedManifold::hyperbolic(2, 1.0).unwrap();
        match h.exp_map(&[0.0, 0.0], &[3.0, 0.0]) {
            Err(Error::ChartEscape { param, .. }) => assert!(param > 0.0 && param <= 1.0),
            other => panic!("expected chart escape, got {other:?}"),
        }
    }

    #[test]
    fn latitude_holonomy_on_the_sphere() {
        use crate::spline::fit_periodic;
        use std::f64::consts::PI;
        let s = ChartedManifold::sphere(2, 1.0).unwrap();
        let theta: f64 = 0.9;
        let r = (theta / 2.0).tan();
        let sp = fit_periodic(|t| Ok(vec![r * (2.0 * PI * t).cos(), r * (2.0 * PI * t).sin()]), 2, 5, 0.0, 1.0, 256).unwrap();
        let base = BasisPoint { point: vec![r, 0.0], frame: DMatrix::identity(2, 2) };
        let path = MoorePath::from_spline(&s, base, sp).unwrap();
        let pt = parallel_transport(&s, &path, &DMatrix::identity(2, 2), 1024.0).unwrap();
        let e = pt.last();
        let angle = e[(1, 0)].atan2(e[(0, 0)]).rem_euclid(2.0 * PI);
        let expected = (2.0 * PI * (1.0 - theta.cos())).rem_euclid(2.0 * PI);
        assert!((angle - expected).abs() < 1e-6, "angle {angle} expected {expected}");
        // transport preserves the metric: the column stays of constant g-length
        let g0 = s.norm(&[r, 0.0], &[1.0, 0.0]);
        let col: Vec<f64> = e.column(0).iter().copied().collect();
        assert!((s.norm(&[r, 0.0], &col) - g0).abs() < 1e-9);
    }

    #[test]
    fn invalid_descriptors_are_rejected() {
        assert!(ChartedManifold::custom("nope", 2, 1.0).is_err());
        let mut spec = ChartedManifold::hyperbolic(2, 1.0).unwrap().spec().clone();
        spec.chart_radius = 1.0;
        assert!(ChartedManifold::from_spec(&spec).is_err());
        spec.dim = 1;
        assert!(ChartedManifold::from_spec(&spec).is_err());
    }

    #[test]
    fn descriptor_round_trips_through_json() {
        let m = ChartedManifold::custom("paraboloid", 3, 2.0).unwrap();
        let s = serde_json::to_string(m.spec()).unwrap();
        assert!(s.contains("\"kind\":\"custom\""));
        let back: ManifoldSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(&back, m.spec());
    }
}
