//! Moore paths of chart splines, their covariant-derivative frames and the
//! non-degeneracy margin.

use std::io::{Read, Write};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{precondition, Error, Result};
use crate::jet::Jet;
use crate::manifold::{norm, BasisPoint, ChartedManifold, ManifoldSpec};
use crate::spline::{interpolate_open, BSpline};

/// Two frames closer than this count as equal.
pub const FRAME_MATCH_TOL: f64 = 1e-9;
/// Column norms below this make a frame degenerate.
pub const DEGENERACY_FLOOR: f64 = 1e-12;
/// Default frame-sampling density, samples per unit of curve time.
pub const DEFAULT_DENSITY: f64 = 2048.0;
const MIN_SEGMENT_SAMPLES: usize = 8;

/// A path `[0, a] -> M` made of spline pieces in local time, concatenated end to end.
#[derive(Clone, Debug, PartialEq)]
pub struct MoorePath {
    manifold: ManifoldSpec,
    basepoint: BasisPoint,
    degree: usize,
    pieces: Vec<BSpline>,
    offsets: Vec<f64>,
    jumps: Vec<f64>,
}

impl MoorePath {
    pub fn neutral(m: &ChartedManifold, basepoint: BasisPoint, degree: usize) -> Self {
        MoorePath {
            manifold: m.spec().clone(),
            basepoint,
            degree,
            pieces: vec![],
            offsets: vec![0.0],
            jumps: vec![],
        }
    }

    pub fn from_spline(m: &ChartedManifold, basepoint: BasisPoint, spline: BSpline) -> Result<Self> {
        Self::from_pieces(m, basepoint, vec![spline])
    }

    /// Pieces are shifted to start at zero; seam jumps are measured in `m`.
    pub fn from_pieces(m: &ChartedManifold, basepoint: BasisPoint, pieces: Vec<BSpline>) -> Result<Self> {
        let n = m.dim();
        if basepoint.point.len() != n || basepoint.frame.nrows() != n {
            return Err(precondition("basepoint dimension does not match the manifold"));
        }
        let degree = pieces.first().map(|p| p.degree()).unwrap_or(crate::spline::default_degree(n));
        for p in &pieces {
            if p.dim() != n {
                return Err(precondition("piece dimension does not match the manifold"));
            }
            if p.degree() != degree {
                return Err(precondition("all pieces must share one degree"));
            }
        }
        if degree < n + 1 {
            return Err(precondition(format!("degree {degree} cannot carry {n} derivatives")));
        }
        let pieces: Vec<BSpline> = pieces.into_iter().map(|p| p.shifted_to_zero()).collect();
        let mut path = MoorePath {
            manifold: m.spec().clone(),
            basepoint,
            degree,
            offsets: offsets_of(&pieces),
            pieces,
            jumps: vec![],
        };
        path.jumps = (1..path.pieces.len())
            .map(|i| seam_closeness(m, &path.pieces[i - 1], &path.pieces[i]))
            .collect::<Result<_>>()?;
        Ok(path)
    }

    pub fn manifold_spec(&self) -> &ManifoldSpec {
        &self.manifold
    }
    pub fn manifold(&self) -> Result<ChartedManifold> {
        ChartedManifold::from_spec(&self.manifold)
    }
    pub fn basepoint(&self) -> &BasisPoint {
        &self.basepoint
    }
    pub fn with_basepoint(mut self, b: BasisPoint) -> Self {
        self.basepoint = b;
        self
    }
    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn dim(&self) -> usize {
        self.manifold.dim
    }
    pub fn pieces(&self) -> &[BSpline] {
        &self.pieces
    }
    /// Start times of the pieces followed by the total duration.
    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }
    /// Frame closeness at each seam between consecutive pieces.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }
    pub fn recorded_jumps(&self) -> usize {
        self.jumps.iter().filter(|&&j| j > FRAME_MATCH_TOL).count()
    }
    pub fn max_jump(&self) -> f64 {
        self.jumps.iter().copied().fold(0.0, f64::max)
    }
    pub fn duration(&self) -> f64 {
        *self.offsets.last().unwrap()
    }
    pub fn is_neutral(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Piece index and local time; right-continuous except at the final time.
    pub fn locate(&self, t: f64) -> (usize, f64) {
        let np = self.pieces.len();
        assert!(np > 0, "cannot evaluate the neutral path");
        let mut i = match self.offsets[..np].binary_search_by(|o| o.partial_cmp(&t).unwrap()) {
            Ok(i) => i,
            Err(i) => i.saturating_sub(1),
        };
        i = i.min(np - 1);
        (i, (t - self.offsets[i]).clamp(0.0, self.pieces[i].end()))
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let (i, s) = self.locate(t);
        self.pieces[i].eval(s)
    }

    pub fn eval_ders(&self, t: f64, nd: usize) -> Vec<Vec<f64>> {
        let (i, s) = self.locate(t);
        self.pieces[i].eval_ders(s, nd)
    }

    pub fn start_point(&self) -> Vec<f64> {
        self.pieces.first().map(|p| p.eval(0.0)).unwrap_or_else(|| self.basepoint.point.clone())
    }
    pub fn end_point(&self) -> Vec<f64> {
        self.pieces.last().map(|p| p.eval(p.end())).unwrap_or_else(|| self.basepoint.point.clone())
    }

    /// Same trace on `[0, new_duration]`.
    pub fn rescaled(&self, new_duration: f64) -> Result<MoorePath> {
        if !(new_duration > 0.0) || self.is_neutral() {
            return Err(precondition("rescaling needs a nonempty path and a positive duration"));
        }
        let c = new_duration / self.duration();
        let pieces: Vec<BSpline> = self.pieces.iter().map(|p| p.affine_time(c, 0.0)).collect();
        Ok(MoorePath { offsets: offsets_of(&pieces), pieces, ..self.clone() })
    }

    /// Applies an affine chart map to every piece (exact on control points).
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64> + Copy) -> MoorePath {
        let pieces = self.pieces.iter().map(|p| p.map_points(f)).collect();
        MoorePath { pieces, ..self.clone() }
    }

    /// Convenience: concatenation with this path's own manifold.
    pub fn concat(&self, other: &MoorePath, delta: f64) -> Result<MoorePath> {
        concat(self, other, delta)
    }
}

fn offsets_of(pieces: &[BSpline]) -> Vec<f64> {
    let mut o = Vec::with_capacity(pieces.len() + 1);
    let mut acc = 0.0;
    o.push(acc);
    for p in pieces {
        acc += p.end();
        o.push(acc);
    }
    o
}

fn seam_closeness(m: &ChartedManifold, left: &BSpline, right: &BSpline) -> Result<f64> {
    let n = m.dim();
    let (_, l) = covariant_at(m, left, left.end(), n)?;
    let (_, r) = covariant_at(m, right, 0.0, n)?;
    Ok(frame_closeness(&columns_to_matrix(&l), &columns_to_matrix(&r)))
}

/// Covariant derivatives `D^{j-1} gamma'`, `j = 1..=k`, at local time `t` of one piece.
pub fn covariant_at(m: &ChartedManifold, piece: &BSpline, t: f64, k: usize) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = m.dim();
    let ders = piece.eval_ders(t, k);
    let point = ders[0].clone();
    if !m.in_chart(&point) {
        return Err(Error::ChartEscape { param: t, radius: norm(&point), limit: m.chart_radius() });
    }
    if m.is_flat() {
        return Ok((point, ders[1..].to_vec()));
    }
    if !m.has_closed_form() {
        let rows = covariant_refit(m, piece, &[t], k)?;
        return Ok((point, rows.into_iter().next().unwrap()));
    }
    let x: Vec<Jet> = (0..n)
        .map(|c| {
            let d: Vec<f64> = ders.iter().map(|row| row[c]).collect();
            Jet::from_derivatives(&d, k)
        })
        .collect();
    let xd: Vec<Jet> = x.iter().map(|j| j.deriv()).collect();
    let mut v = xd.clone();
    let mut out = Vec::with_capacity(k);
    for j in 1..=k {
        out.push(v.iter().map(|c| c.value()).collect());
        if j == k {
            break;
        }
        let g = m.contract_jet(&x, &xd, &v).expect("closed-form connection");
        v = v.iter().zip(&g).map(|(a, b)| a.deriv() + *b).collect();
    }
    Ok((point, out))
}

/// Covariant derivatives for metrics without closed-form Christoffels:
/// the recursion `V_{j+1} = V_j' + Gamma(gamma', V_j)` with `V_j'` taken from
/// a spline refit of the samples of `V_j`.
fn covariant_refit(m: &ChartedManifold, piece: &BSpline, times: &[f64], k: usize) -> Result<Vec<Vec<Vec<f64>>>> {
    let n = m.dim();
    let d = piece.degree();
    let spans = piece.knots().windows(2).filter(|w| w[1] > w[0]).count();
    let intervals = (4 * spans).max(64);
    let (a, b) = (piece.start(), piece.end());
    let sites: Vec<f64> = (0..=intervals)
        .map(|i| if i == intervals { b } else { a + (b - a) * i as f64 / intervals as f64 })
        .collect();
    let base: Vec<Vec<Vec<f64>>> = sites.par_iter().map(|&t| piece.eval_ders(t, 1)).collect();
    let mut fields: Vec<BSpline> = Vec::with_capacity(k);
    let mut v: Vec<f64> = base.iter().flat_map(|r| r[1].clone()).collect();
    for j in 1..=k {
        let s = interpolate_open(&sites, &v, n, d)?;
        if j < k {
            v = sites
                .par_iter()
                .enumerate()
                .flat_map_iter(|(i, &t)| {
                    let dv = s.eval_ders(t, 1);
                    let g = m.contract(&base[i][0], &base[i][1], &dv[0]);
                    (0..n).map(move |c| dv[1][c] + g[c])
                })
                .collect();
        }
        fields.push(s);
    }
    Ok(times.iter().map(|&t| fields.iter().map(|f| f.eval(t)).collect()).collect())
}

pub fn columns_to_matrix(cols: &[Vec<f64>]) -> DMatrix<f64> {
    let n = cols.first().map(|c| c.len()).unwrap_or(0);
    DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i])
}

/// `max(|L1 L2^-1 - I|_F, |L2 L1^-1 - I|_F)`; infinite when either is singular.
pub fn frame_closeness(l1: &DMatrix<f64>, l2: &DMatrix<f64>) -> f64 {
    let n = l1.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let (Some(i1), Some(i2)) = (l1.clone().try_inverse(), l2.clone().try_inverse()) else {
        return f64::INFINITY;
    };
    let a = (l1 * i2 - &id).norm();
    let b = (l2 * i1 - &id).norm();
    let r = a.max(b);
    if r.is_finite() {
        r
    } else {
        f64::INFINITY
    }
}

/// Normalized volume of the columns: `sqrt(det g) |det V| / prod |v_j|_g`, in `[0, 1]`.
pub fn frame_volume(m: &ChartedManifold, x: &[f64], cols: &[Vec<f64>]) -> f64 {
    signed_frame_volume(m, x, cols).abs()
}

/// As `frame_volume`, carrying the sign of `det V`.
pub fn signed_frame_volume(m: &ChartedManifold, x: &[f64], cols: &[Vec<f64>]) -> f64 {
    let mut prod = 1.0;
    for c in cols {
        let l = m.norm(x, c);
        if !(l >= DEGENERACY_FLOOR) {
            return 0.0;
        }
        prod *= l;
    }
    let det = columns_to_matrix(cols).determinant();
    (m.sqrt_det_metric(x) * det / prod).clamp(-1.0, 1.0)
}

/// Uniform sample times of a segment of length `len`, both ends included.
pub fn segment_grid(len: f64, density: f64) -> Vec<f64> {
    let k = ((density * len).ceil() as usize).max(MIN_SEGMENT_SAMPLES);
    (0..=k).map(|i| if i == k { len } else { len * i as f64 / k as f64 }).collect()
}

/// One sampled segment of a frame curve, in global time.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameSegment {
    pub times: Vec<f64>,
    pub frames: Vec<DMatrix<f64>>,
    /// Base points, when the frames live over a curve.
    pub points: Option<Vec<Vec<f64>>>,
}

/// A sampled path of `n x n` matrices, split into segments at recorded jumps.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameCurve {
    dim: usize,
    segments: Vec<FrameSegment>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrameJump {
    pub time: f64,
    pub left: DMatrix<f64>,
    pub right: DMatrix<f64>,
    pub closeness: f64,
}

impl FrameCurve {
    pub fn new(dim: usize, segments: Vec<FrameSegment>) -> Result<Self> {
        if segments.is_empty() {
            return Err(precondition("frame curve needs at least one segment"));
        }
        for s in &segments {
            if s.times.len() < 2 || s.times.len() != s.frames.len() {
                return Err(precondition("each frame segment needs at least two samples"));
            }
            if s.times.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(precondition("frame sample times must increase"));
            }
            if s.frames.iter().any(|f| f.nrows() != dim || f.ncols() != dim) {
                return Err(precondition("frame has the wrong size"));
            }
            if let Some(p) = &s.points {
                if p.len() != s.times.len() {
                    return Err(precondition("base points do not match the samples"));
                }
            }
        }
        for w in segments.windows(2) {
            if (w[1].times[0] - w[0].times.last().unwrap()).abs() > 1e-9 {
                return Err(precondition("frame segments must abut"));
            }
        }
        Ok(FrameCurve { dim, segments })
    }

    /// Samples `f` on a uniform grid of `[0, duration]`.
    pub fn sample(dim: usize, duration: f64, density: f64, f: impl Fn(f64) -> DMatrix<f64> + Sync) -> Result<Self> {
        let times = segment_grid(duration, density);
        let frames = times.par_iter().map(|&t| f(t)).collect();
        Self::new(dim, vec![FrameSegment { times, frames, points: None }])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn segments(&self) -> &[FrameSegment] {
        &self.segments
    }
    pub fn start_time(&self) -> f64 {
        self.segments[0].times[0]
    }
    pub fn end_time(&self) -> f64 {
        *self.segments.last().unwrap().times.last().unwrap()
    }
    pub fn duration(&self) -> f64 {
        self.end_time() - self.start_time()
    }
    pub fn first(&self) -> &DMatrix<f64> {
        &self.segments[0].frames[0]
    }
    pub fn last(&self) -> &DMatrix<f64> {
        self.segments.last().unwrap().frames.last().unwrap()
    }
    pub fn len(&self) -> usize {
        self.segments.iter().map(|s| s.times.len()).sum()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// All samples in order; both one-sided frames appear at a jump.
    pub fn samples(&self) -> impl Iterator<Item = (f64, &DMatrix<f64>)> {
        self.segments.iter().flat_map(|s| s.times.iter().copied().zip(s.frames.iter()))
    }

    pub fn jumps(&self) -> Vec<FrameJump> {
        self.segments
            .windows(2)
            .map(|w| {
                let left = w[0].frames.last().unwrap().clone();
                let right = w[1].frames[0].clone();
                let closeness = frame_closeness(&left, &right);
                FrameJump { time: w[1].times[0], left, right, closeness }
            })
            .collect()
    }

    pub fn is_continuous(&self) -> bool {
        self.jumps().iter().all(|j| j.closeness <= FRAME_MATCH_TOL)
    }

    pub fn map(&self, f: impl Fn(&DMatrix<f64>) -> DMatrix<f64> + Sync) -> FrameCurve {
        let segments = self
            .segments
            .iter()
            .map(|s| FrameSegment {
                times: s.times.clone(),
                frames: s.frames.par_iter().map(&f).collect(),
                points: s.points.clone(),
            })
            .collect();
        FrameCurve { dim: self.dim, segments }
    }

    /// `F(t) F(0)^-1`, a path starting at the identity.
    pub fn based_at_identity(&self) -> Result<FrameCurve> {
        let inv = self
            .first()
            .clone()
            .try_inverse()
            .ok_or_else(|| precondition("initial frame is singular"))?;
        Ok(self.map(|f| f * &inv))
    }

    /// Shifts time so the curve starts at `t0`.
    pub fn shifted(&self, t0: f64) -> FrameCurve {
        let dt = t0 - self.start_time();
        let segments = self
            .segments
            .iter()
            .map(|s| FrameSegment {
                times: s.times.iter().map(|t| t + dt).collect(),
                frames: s.frames.clone(),
                points: s.points.clone(),
            })
            .collect();
        FrameCurve { dim: self.dim, segments }
    }

    /// Moore concatenation of sampled frame paths.
    pub fn concat(&self, other: &FrameCurve) -> Result<FrameCurve> {
        if self.dim != other.dim {
            return Err(precondition("frame curves of different dimension"));
        }
        let mut segments = self.segments.clone();
        segments.extend(other.shifted(self.end_time()).segments);
        Ok(FrameCurve { dim: self.dim, segments })
    }

    /// Linear interpolation between samples (right-continuous at jumps).
    pub fn frame_at(&self, t: f64) -> DMatrix<f64> {
        let seg = self
            .segments
            .iter()
            .rev()
            .find(|s| s.times[0] <= t)
            .unwrap_or(&self.segments[0]);
        let ts = &seg.times;
        let i = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return seg.frames[i].clone(),
            Err(i) => i,
        };
        if i == 0 {
            return seg.frames[0].clone();
        }
        if i >= ts.len() {
            return seg.frames.last().unwrap().clone();
        }
        let w = (t - ts[i - 1]) / (ts[i] - ts[i - 1]);
        &seg.frames[i - 1] * (1.0 - w) + &seg.frames[i] * w
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["t".to_string()];
        for i in 0..self.dim {
            for j in 0..self.dim {
                header.push(format!("m{}{}", i, j));
            }
        }
        wr.write_record(&header)?;
        for (t, f) in self.samples() {
            let mut rec = vec![format!("{t:?}")];
            for i in 0..self.dim {
                for j in 0..self.dim {
                    rec.push(format!("{:?}", f[(i, j)]));
                }
            }
            wr.write_record(&rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Reads `t, m00, m01, ...` rows; a repeated time starts a new segment.
    pub fn read_csv<R: Read>(r: R) -> Result<FrameCurve> {
        let mut rd = csv::Reader::from_reader(r);
        let ncols = rd.headers()?.len();
        let n = ((ncols.saturating_sub(1)) as f64).sqrt().round() as usize;
        if n < 1 || n * n + 1 != ncols {
            return Err(Error::Input(format!("frame CSV needs 1 + n^2 columns, found {ncols}")));
        }
        let mut segments = vec![FrameSegment { times: vec![], frames: vec![], points: None }];
        for rec in rd.records() {
            let rec = rec?;
            let vals: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Input(format!("bad number `{s}`: {e}"))))
                .collect::<Result<_>>()?;
            let t = vals[0];
            let f = DMatrix::from_fn(n, n, |i, j| vals[1 + i * n + j]);
            let cur = segments.last_mut().unwrap();
            match cur.times.last() {
                Some(&lt) if t == lt => {
                    segments.push(FrameSegment { times: vec![t], frames: vec![f], points: None });
                }
                Some(&lt) if t < lt => return Err(Error::Input("frame CSV times must not decrease".into())),
                _ => {
                    cur.times.push(t);
                    cur.frames.push(f);
                }
            }
        }
        FrameCurve::new(n, segments).map_err(|e| Error::Input(e.to_string()))
    }
}

/// Covariant derivative fields `D^{j-1} gamma'`, `j = 1..=k`, sampled per piece.
pub fn covariant_derivatives(m: &ChartedManifold, path: &MoorePath, k: usize, density: f64) -> Result<Vec<CovariantSamples>> {
    check_manifold(m, path)?;
    path.pieces
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let local = segment_grid(p.end(), density);
            let rows: Vec<(Vec<f64>, Vec<Vec<f64>>)> = if m.has_closed_form() {
                local.par_iter().map(|&t| covariant_at(m, p, t, k)).collect::<Result<_>>()?
            } else {
                let pts: Vec<Vec<f64>> = local.iter().map(|&t| p.eval(t)).collect();
                for (t, x) in local.iter().zip(&pts) {
                    if !m.in_chart(x) {
                        return Err(Error::ChartEscape { param: *t, radius: norm(x), limit: m.chart_radius() });
                    }
                }
                pts.into_iter().zip(covariant_refit(m, p, &local, k)?).collect()
            };
            let off = path.offsets[i];
            Ok(CovariantSamples {
                times: local.iter().map(|t| t + off).collect(),
                points: rows.iter().map(|r| r.0.clone()).collect(),
                fields: rows.into_iter().map(|r| r.1).collect(),
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct CovariantSamples {
    pub times: Vec<f64>,
    pub points: Vec<Vec<f64>>,
    /// `fields[i][j]` is the `(j+1)`-th derivative column at `times[i]`.
    pub fields: Vec<Vec<Vec<f64>>>,
}

fn check_manifold(m: &ChartedManifold, path: &MoorePath) -> Result<()> {
    if m.dim() != path.dim() {
        return Err(precondition("path and manifold dimensions differ"));
    }
    Ok(())
}

/// The frame map `t -> (gamma'(t), ..., D^{n-1} gamma'(t))` on a grid of
/// `density` samples per unit time.
pub fn frame_map(m: &ChartedManifold, path: &MoorePath, density: f64) -> Result<FrameCurve> {
    if path.is_neutral() {
        return Err(precondition("the neutral path has no frame map"));
    }
    let n = m.dim();
    let samples = covariant_derivatives(m, path, n, density)?;
    let segments = samples
        .into_iter()
        .map(|s| FrameSegment {
            frames: s.fields.iter().map(|c| columns_to_matrix(c)).collect(),
            times: s.times,
            points: Some(s.points),
        })
        .collect();
    FrameCurve::new(n, segments)
}

/// Minimum normalized frame volume over the sampling grid; zero means degenerate.
/// An orientation change between samples forces a zero of the determinant in
/// between, so it also yields zero.
pub fn nondeg_margin(m: &ChartedManifold, path: &MoorePath, density: f64) -> Result<f64> {
    if path.is_neutral() {
        return Ok(1.0);
    }
    let samples = covariant_derivatives(m, path, m.dim(), density)?;
    let vols: Vec<f64> = samples
        .iter()
        .flat_map(|s| s.points.iter().zip(&s.fields).map(|(x, c)| signed_frame_volume(m, x, c)))
        .collect();
    let sign = vols[0].signum();
    Ok(vols.iter().map(|v| v * sign).fold(f64::INFINITY, f64::min).max(0.0))
}

/// Derivative frame at the start and end of the path.
pub fn endpoint_frames(m: &ChartedManifold, path: &MoorePath) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let n = m.dim();
    let first = &path.pieces[0];
    let last = path.pieces.last().unwrap();
    let (_, a) = covariant_at(m, first, 0.0, n)?;
    let (_, b) = covariant_at(m, last, last.end(), n)?;
    Ok((columns_to_matrix(&a), columns_to_matrix(&b)))
}

/// Moore concatenation. Requires matching manifold, basepoint and degree,
/// `gamma1(a1) = gamma2(0)` and end frames within `delta` of each other.
pub fn concat(g1: &MoorePath, g2: &MoorePath, delta: f64) -> Result<MoorePath> {
    if g1.manifold != g2.manifold {
        return Err(Error::Concatenation("paths live on different manifolds".into()));
    }
    if g1.basepoint.point != g2.basepoint.point || frame_closeness(&g1.basepoint.frame, &g2.basepoint.frame) > FRAME_MATCH_TOL {
        return Err(Error::Concatenation("paths have different basepoints".into()));
    }
    if g1.is_neutral() {
        return Ok(g2.clone());
    }
    if g2.is_neutral() {
        return Ok(g1.clone());
    }
    if g1.degree != g2.degree {
        return Err(Error::Concatenation(format!("degrees differ ({} vs {})", g1.degree, g2.degree)));
    }
    let (e, s) = (g1.end_point(), g2.start_point());
    let gap = e.iter().zip(&s).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if gap > FRAME_MATCH_TOL {
        return Err(Error::Concatenation(format!("endpoint gap {gap:e}")));
    }
    let m = g1.manifold()?;
    let jump = seam_closeness(&m, g1.pieces.last().unwrap(), &g2.pieces[0])?;
    if !(jump <= delta + FRAME_MATCH_TOL) {
        return Err(Error::Concatenation(format!("frame jump {jump:e} exceeds delta {delta:e}")));
    }
    let mut pieces = g1.pieces.clone();
    pieces.extend(g2.pieces.iter().cloned());
    let mut jumps = g1.jumps.clone();
    jumps.push(jump);
    jumps.extend_from_slice(&g2.jumps);
    Ok(MoorePath { offsets: offsets_of(&pieces), pieces, jumps, ..g1.clone() })
}

/// Concatenation of several paths with the same jump allowance.
pub fn concat_all(paths: &[MoorePath], delta: f64) -> Result<MoorePath> {
    let mut it = paths.iter();
    let mut acc = it.next().ok_or_else(|| precondition("nothing to concatenate"))?.clone();
    for p in it {
        acc = concat(&acc, p, delta)?;
    }
    Ok(acc)
}

/// Outcome of a membership test for `L M(delta)`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Membership {
    pub member: bool,
    pub closed: bool,
    pub continuous: bool,
    pub margin: f64,
    pub start_closeness: f64,
    pub end_closeness: f64,
    pub max_jump: f64,
    pub jumps: usize,
    pub reasons: Vec<String>,
}

pub fn in_lm_delta(m: &ChartedManifold, path: &MoorePath, delta: f64, density: f64) -> Result<Membership> {
    check_manifold(m, path)?;
    let x0 = &path.basepoint.point;
    let mut reasons = vec![];
    if path.is_neutral() {
        return Ok(Membership {
            member: true,
            closed: true,
            continuous: true,
            margin: 1.0,
            start_closeness: 0.0,
            end_closeness: 0.0,
            max_jump: 0.0,
            jumps: 0,
            reasons,
        });
    }
    let gap = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    let closed = gap(&path.start_point(), x0) <= FRAME_MATCH_TOL && gap(&path.end_point(), x0) <= FRAME_MATCH_TOL;
    if !closed {
        reasons.push("path does not start and end at the basepoint".into());
    }
    let continuous = path
        .pieces
        .windows(2)
        .all(|w| gap(&w[0].eval(w[0].end()), &w[1].eval(0.0)) <= FRAME_MATCH_TOL);
    if !continuous {
        reasons.push("consecutive pieces do not meet".into());
    }
    let margin = nondeg_margin(m, path, density)?;
    if !(margin > 0.0) {
        reasons.push("a piece is degenerate".into());
    }
    let (fa, fb) = endpoint_frames(m, path)?;
    let start_closeness = frame_closeness(&fa, &path.basepoint.frame);
    let end_closeness = frame_closeness(&fb, &path.basepoint.frame);
    let tol = delta + FRAME_MATCH_TOL;
    if !(start_closeness <= tol && end_closeness <= tol) {
        reasons.push("endpoint frames are not delta-close to the basepoint frame".into());
    }
    let max_jump = path.max_jump();
    if !(max_jump <= tol) {
        reasons.push("a seam jump exceeds delta".into());
    }
    Ok(Membership {
        member: reasons.is_empty(),
        closed,
        continuous,
        margin,
        start_closeness,
        end_closeness,
        max_jump,
        jumps: path.recorded_jumps(),
        reasons,
    })
}

/// Discrete C^n distance after rescaling `b` to the duration of `a`:
/// sup of the coordinate distance plus the largest sup g-norm distance of
/// the covariant derivatives, sampled on a uniform grid.
pub fn cn_distance(m: &ChartedManifold, a: &MoorePath, b: &MoorePath, density: f64) -> Result<f64> {
    if a.is_neutral() || b.is_neutral() {
        return Err(precondition("cannot compare neutral paths"));
    }
    let n = m.dim();
    let b = b.rescaled(a.duration())?;
    let times = segment_grid(a.duration(), density);
    let eval = |p: &MoorePath, t: f64| {
        let (i, s) = p.locate(t);
        covariant_at(m, &p.pieces[i], s, n)
    };
    let rows: Vec<(f64, Vec<f64>)> = times
        .par_iter()
        .map(|&t| -> Result<(f64, Vec<f64>)> {
            let (xa, va) = eval(a, t)?;
            let (xb, vb) = eval(&b, t)?;
            let dx = xa.iter().zip(&xb).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
            let dv = va
                .iter()
                .zip(&vb)
                .map(|(u, v)| {
                    let d: Vec<f64> = u.iter().zip(v).map(|(p, q)| p - q).collect();
                    m.norm(&xa, &d)
                })
                .collect();
            Ok((dx, dv))
        })
        .collect::<Result<_>>()?;
    let dx = rows.iter().map(|r| r.0).fold(0.0, f64::max);
    let dv = (0..n)
        .map(|j| rows.iter().map(|r| r.1[j]).fold(0.0, f64::max))
        .fold(0.0, f64::max);
    Ok(dx + dv)
}

/// A compact family of paths indexed by parameters.
#[derive(Clone, Debug)]
pub struct PathFamily {
    pub params: Vec<f64>,
    pub paths: Vec<MoorePath>,
}

impl PathFamily {
    pub fn new(params: Vec<f64>, paths: Vec<MoorePath>) -> Result<Self> {
        if params.len() != paths.len() || paths.is_empty() {
            return Err(precondition("family needs one path per parameter"));
        }
        Ok(PathFamily { params, paths })
    }

    pub fn margin(&self, m: &ChartedManifold, density: f64) -> Result<f64> {
        self.paths
            .iter()
            .map(|p| nondeg_margin(m, p, density))
            .try_fold(f64::INFINITY, |acc, r| r.map(|v| acc.min(v)))
    }

    pub fn max_jump(&self) -> f64 {
        self.paths.iter().map(|p| p.max_jump()).fold(0.0, f64::max)
    }
}

#[derive(Serialize, Deserialize)]
struct CurveFile {
    version: u32,
    manifold: ManifoldSpec,
    duration: f64,
    degree: usize,
    knots: Vec<f64>,
    control_points: Vec<Vec<f64>>,
    basepoint: BasisPoint,
}

pub const CURVE_FILE_VERSION: u32 = 1;

impl MoorePath {
    /// Single knot vector; seams carry multiplicity `degree + 1`.
    pub fn to_json(&self) -> Result<String> {
        let d = self.degree;
        let mut knots = vec![];
        let mut control_points = vec![];
        for (i, p) in self.pieces.iter().enumerate() {
            let off = self.offsets[i];
            let skip = if i == 0 { 0 } else { d + 1 };
            knots.extend(p.knots()[skip..].iter().map(|k| k + off));
            control_points.extend((0..p.n_ctrl()).map(|j| p.control_point(j).to_vec()));
        }
        let file = CurveFile {
            version: CURVE_FILE_VERSION,
            manifold: self.manifold.clone(),
            duration: self.duration(),
            degree: d,
            knots,
            control_points,
            basepoint: self.basepoint.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(s: &str) -> Result<MoorePath> {
        let f: CurveFile = serde_json::from_str(s).map_err(|e| Error::Input(format!("curve file: {e}")))?;
        if f.version != CURVE_FILE_VERSION {
            return Err(Error::Input(format!("unsupported curve file version {}", f.version)));
        }
        let m = ChartedManifold::from_spec(&f.manifold)?;
        if f.knots.is_empty() && f.control_points.is_empty() {
            return Ok(MoorePath::neutral(&m, f.basepoint, f.degree));
        }
        if f.control_points.iter().any(|c| c.len() != f.manifold.dim) {
            return Err(Error::Input("control point dimension does not match the manifold".into()));
        }
        let ctrl: Vec<f64> = f.control_points.into_iter().flatten().collect();
        let s = BSpline::new(f.degree, f.manifold.dim, f.knots, ctrl)?;
        if (s.duration() - f.duration).abs() > 1e-9 * f.duration.max(1.0) {
            return Err(Error::Input("duration does not match the knot vector".into()));
        }
        MoorePath::from_pieces(&m, f.basepoint, s.split_at_full_knots())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spline::fit_periodic;
    use std::f64::consts::PI;

    fn circle_path(m: &ChartedManifold, r: f64) -> MoorePath {
        let s = fit_periodic(
            |t| Ok(vec![r * (2.0 * PI * t).cos() - r, r * (2.0 * PI * t).sin()]),
            2,
            5,
            0.0,
            1.0,
            256,
        )
        .unwrap();
        let p = MoorePath::from_spline(m, BasisPoint::origin(2), s).unwrap();
        let (f0, _) = endpoint_frames(m, &p).unwrap();
        p.with_basepoint(BasisPoint { point: vec![0.0, 0.0], frame: f0 })
    }

    #[test]
    fn closeness_of_scaled_frames() {
        let l = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.5, 3.0]);
        let c = frame_closeness(&l, &(&l * 1.1));
        assert!((c - 0.1 * 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(frame_closeness(&l, &l), 0.0);
        assert!(frame_closeness(&l, &DMatrix::zeros(2, 2)).is_infinite());
    }

    #[test]
    fn circle_has_unit_margin_and_is_a_loop() {
        let m = ChartedManifold::euclidean(2);
        let p = circle_path(&m, 0.5);
        let margin = nondeg_margin(&m, &p, 512.0).unwrap();
        assert!((margin - 1.0).abs() < 1e-6);
        let mem = in_lm_delta(&m, &p, 0.0, 512.0).unwrap();
        assert!(mem.member, "{:?}", mem.reasons);
    }

    #[test]
    fn concatenation_is_associative_and_records_seams() {
        let m = ChartedManifold::euclidean(2);
        let p = circle_path(&m, 0.5);
        let a = concat(&concat(&p, &p, 0.0).unwrap(), &p, 0.0).unwrap();
        let b = concat(&p, &concat(&p, &p, 0.0).unwrap(), 0.0).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.pieces().len(), 3);
        assert_eq!(a.recorded_jumps(), 0);
        let e = MoorePath::neutral(&m, p.basepoint().clone(), 5);
        assert_eq!(concat(&e, &p, 0.0).unwrap(), p);
        assert_eq!(concat(&p, &e, 0.0).unwrap(), p);
    }

    #[test]
    fn frame_map_concatenates_with_the_path() {
        let m = ChartedManifold::euclidean(2);
        let p = circle_path(&m, 0.5);
        let pp = concat(&p, &p, 0.0).unwrap();
        let f = frame_map(&m, &p, 64.0).unwrap();
        let ff = frame_map(&m, &pp, 64.0).unwrap();
        assert_eq!(f.concat(&f).unwrap(), ff);
    }

    #[test]
    fn json_round_trip_preserves_pieces() {
        let m = ChartedManifold::euclidean(2);
        let p = circle_path(&m, 0.5);
        let pp = concat(&p, &p, 0.0).unwrap();
        let back = MoorePath::from_json(&pp.to_json().unwrap()).unwrap();
        assert_eq!(back.pieces().len(), 2);
        for &t in &[0.0, 0.3, 1.0, 1.7, 2.0] {
            let (u, v) = (pp.eval(t), back.eval(t));
            assert!((u[0] - v[0]).abs() < 1e-12 && (u[1] - v[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn refit_route_agrees_with_series_route() {
        let s = ChartedManifold::sphere(2, 1.0).unwrap();
        let fd = ChartedManifold::custom("round-sphere-fd", 2, 10.0).unwrap();
        let p = circle_path(&s, 0.4);
        let a = covariant_derivatives(&s, &p, 2, 64.0).unwrap();
        let b = covariant_derivatives(&fd, &p, 2, 64.0).unwrap();
        let mut worst: f64 = 0.0;
        for (ra, rb) in a[0].fields.iter().zip(&b[0].fields) {
            for j in 0..2 {
                let scale = ra[j].iter().map(|v| v * v).sum::<f64>().sqrt();
                let d = ra[j].iter().zip(&rb[j]).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
                worst = worst.max(d / scale);
            }
        }
        assert!(worst < 1e-4, "relative discrepancy {worst:e}");
    }

    #[test]
    fn frame_csv_round_trip_keeps_jumps() {
        let id = DMatrix::<f64>::identity(2, 2);
        let seg = |t0: f64, s: f64| FrameSegment {
            times: vec![t0, t0 + 0.5, t0 + 1.0],
            frames: vec![&id * s, &id * s, &id * s],
            points: None,
        };
        let f = FrameCurve::new(2, vec![seg(0.0, 1.0), seg(1.0, 2.0)]).unwrap();
        let mut buf = vec![];
        f.write_csv(&mut buf).unwrap();
        let g = FrameCurve::read_csv(&buf[..]).unwrap();
        assert_eq!(g.segments().len(), 2);
        assert_eq!(g.jumps().len(), 1);
        assert!(g.jumps()[0].closeness > 0.5);
    }
}
