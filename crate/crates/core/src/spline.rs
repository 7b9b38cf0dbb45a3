//! Clamped B-splines in chart coordinates with exact derivatives.
//!
//! Knots are expressed in curve time. Closed fits are solved on a periodic
//! (circulant) system with an FFT and then clamped by knot insertion, so the
//! derivative jets at the two ends agree to rounding.

use rayon::prelude::*;
use rustfft::{num_complex::Complex64, FftPlanner};

use crate::error::{precondition, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct BSpline {
    degree: usize,
    dim: usize,
    knots: Vec<f64>,
    ctrl: Vec<f64>,
}

/// Smallest odd degree `d >= n + 2`; interpolation sites then coincide with knots.
pub fn default_degree(n: usize) -> usize {
    let d = n + 2;
    if d % 2 == 1 {
        d
    } else {
        d + 1
    }
}

impl BSpline {
    pub fn new(degree: usize, dim: usize, knots: Vec<f64>, ctrl: Vec<f64>) -> Result<Self> {
        if dim == 0 || ctrl.len() % dim != 0 {
            return Err(Error::Input("control point array does not match dimension".into()));
        }
        let n_ctrl = ctrl.len() / dim;
        if n_ctrl < degree + 1 {
            return Err(Error::Input(format!(
                "degree {degree} spline needs at least {} control points, got {n_ctrl}",
                degree + 1
            )));
        }
        if knots.len() != n_ctrl + degree + 1 {
            return Err(Error::Input(format!(
                "expected {} knots, got {}",
                n_ctrl + degree + 1,
                knots.len()
            )));
        }
        if knots.windows(2).any(|w| !(w[1] >= w[0])) || knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::Input("knot vector must be finite and nondecreasing".into()));
        }
        let (a, b) = (knots[0], knots[knots.len() - 1]);
        if !(b > a) {
            return Err(Error::Input("spline domain has zero length".into()));
        }
        if knots[..=degree].iter().any(|&k| k != a) || knots[knots.len() - degree - 1..].iter().any(|&k| k != b) {
            return Err(Error::Input("knot vector must be clamped".into()));
        }
        // interior multiplicity above degree+1 would leave empty basis functions
        let mut run = 1;
        for w in knots[degree + 1..knots.len() - degree - 1].windows(2) {
            run = if w[1] == w[0] { run + 1 } else { 1 };
            if run > degree + 1 {
                return Err(Error::Input("interior knot multiplicity exceeds degree + 1".into()));
            }
        }
        Ok(BSpline { degree, dim, knots, ctrl })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn knots(&self) -> &[f64] {
        &self.knots
    }
    pub fn ctrl(&self) -> &[f64] {
        &self.ctrl
    }
    pub fn n_ctrl(&self) -> usize {
        self.ctrl.len() / self.dim
    }
    pub fn start(&self) -> f64 {
        self.knots[0]
    }
    pub fn end(&self) -> f64 {
        self.knots[self.knots.len() - 1]
    }
    pub fn duration(&self) -> f64 {
        self.end() - self.start()
    }
    pub fn control_point(&self, i: usize) -> &[f64] {
        &self.ctrl[i * self.dim..(i + 1) * self.dim]
    }

    /// Distinct interior knot values.
    pub fn interior_breaks(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.knots[self.degree + 1..self.knots.len() - self.degree - 1].to_vec();
        v.dedup();
        v
    }

    fn find_span(&self, t: f64) -> usize {
        let n = self.n_ctrl() - 1;
        let d = self.degree;
        if t >= self.knots[n + 1] {
            // last nonempty span
            let mut s = n;
            while self.knots[s] == self.knots[s + 1] {
                s -= 1;
            }
            return s;
        }
        if t <= self.knots[d] {
            let mut s = d;
            while self.knots[s] == self.knots[s + 1] {
                s += 1;
            }
            return s;
        }
        let (mut lo, mut hi) = (d, n + 1);
        let mut mid = (lo + hi) / 2;
        while t < self.knots[mid] || t >= self.knots[mid + 1] {
            if t < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = (lo + hi) / 2;
        }
        mid
    }

    /// Basis function derivatives at `t` in span `span`; `out[k][j]` is the
    /// k-th derivative of `N_{span-d+j}`.
    fn basis_ders(&self, span: usize, t: f64, nd: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let u = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = t - u[span + 1 - j];
            right[j] = u[span + j] - t;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }
        let mut ders = vec![vec![0.0; p + 1]; nd + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let n = nd.min(p);
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for k in 1..=n {
                let mut d = 0.0;
                let rk = r as isize - k as isize;
                let pk = p - k;
                if r >= k {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1: usize = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2: usize = if r as isize - 1 <= pk as isize { k - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
                    d += a[s2][k] * ndu[r][pk];
                }
                ders[k][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut f = p as f64;
        for k in 1..=n {
            for v in ders[k].iter_mut() {
                *v *= f;
            }
            f *= (p - k) as f64;
        }
        ders
    }

    /// Derivatives `0..=nd` at `t`, written to `out` as `(nd+1) * dim` values.
    pub fn eval_ders_into(&self, t: f64, nd: usize, out: &mut [f64]) {
        let span = self.find_span(t);
        let b = self.basis_ders(span, t, nd);
        let dim = self.dim;
        out[..(nd + 1) * dim].iter_mut().for_each(|v| *v = 0.0);
        for (k, row) in b.iter().enumerate() {
            for (j, &w) in row.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                let cp = self.control_point(span - self.degree + j);
                for c in 0..dim {
                    out[k * dim + c] += w * cp[c];
                }
            }
        }
    }

    pub fn eval_ders(&self, t: f64, nd: usize) -> Vec<Vec<f64>> {
        let mut buf = vec![0.0; (nd + 1) * self.dim];
        self.eval_ders_into(t, nd, &mut buf);
        buf.chunks(self.dim).map(|c| c.to_vec()).collect()
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut buf = vec![0.0; self.dim];
        self.eval_ders_into(t, 0, &mut buf);
        buf
    }

    /// Reparametrize by `t -> scale * t + shift` (scale > 0).
    pub fn affine_time(&self, scale: f64, shift: f64) -> BSpline {
        assert!(scale > 0.0);
        let mut s = self.clone();
        for k in s.knots.iter_mut() {
            *k = scale * *k + shift;
        }
        s
    }

    pub fn shifted_to_zero(&self) -> BSpline {
        self.affine_time(1.0, -self.start())
    }

    /// Applies `f` to each control point; exact for affine maps of chart coordinates.
    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> BSpline {
        let mut ctrl = Vec::with_capacity(self.ctrl.len());
        let mut dim = self.dim;
        for i in 0..self.n_ctrl() {
            let p = f(self.control_point(i));
            dim = p.len();
            ctrl.extend(p);
        }
        BSpline { degree: self.degree, dim, knots: self.knots.clone(), ctrl }
    }

    pub fn insert_knot(&self, u: f64) -> BSpline {
        let (knots, ctrl) = insert_knot_raw(&self.knots, &self.ctrl, self.dim, self.degree, u);
        BSpline { degree: self.degree, dim: self.dim, knots, ctrl }
    }

    fn multiplicity(&self, u: f64) -> usize {
        self.knots.iter().filter(|&&k| k == u).count()
    }

    /// Splits at an interior time into two clamped splines.
    pub fn split_at(&self, t: f64) -> (BSpline, BSpline) {
        assert!(t > self.start() && t < self.end(), "split time outside open domain");
        let d = self.degree;
        let mut s = self.clone();
        while s.multiplicity(t) < d + 1 {
            s = s.insert_knot(t);
        }
        let r = s.knots.iter().position(|&k| k == t).unwrap();
        let left = BSpline {
            degree: d,
            dim: s.dim,
            knots: s.knots[..=r + d].to_vec(),
            ctrl: s.ctrl[..r * s.dim].to_vec(),
        };
        let right = BSpline {
            degree: d,
            dim: s.dim,
            knots: s.knots[r..].to_vec(),
            ctrl: s.ctrl[r * s.dim..].to_vec(),
        };
        (left, right)
    }

    /// Restriction to `[a, b]` keeping absolute time.
    pub fn restrict(&self, a: f64, b: f64) -> BSpline {
        assert!(a < b && a >= self.start() && b <= self.end());
        let mut s = self.clone();
        if a > s.start() {
            s = s.split_at(a).1;
        }
        if b < s.end() {
            s = s.split_at(b).0;
        }
        s
    }

    /// Splits at interior knots of multiplicity `degree + 1`.
    pub fn split_at_full_knots(&self) -> Vec<BSpline> {
        let d = self.degree;
        let mut out = Vec::new();
        let mut rest = self.clone();
        loop {
            let inner = &rest.knots[d + 1..rest.knots.len() - d - 1];
            let mut cut = None;
            let mut i = 0;
            while i < inner.len() {
                let mut j = i;
                while j + 1 < inner.len() && inner[j + 1] == inner[i] {
                    j += 1;
                }
                if j - i + 1 == d + 1 {
                    cut = Some(inner[i]);
                    break;
                }
                i = j + 1;
            }
            match cut {
                Some(t) => {
                    let (l, r) = rest.split_at(t);
                    out.push(l);
                    rest = r;
                }
                None => {
                    out.push(rest);
                    return out;
                }
            }
        }
    }
}

fn insert_knot_raw(knots: &[f64], ctrl: &[f64], dim: usize, d: usize, u: f64) -> (Vec<f64>, Vec<f64>) {
    let n_ctrl = ctrl.len() / dim;
    // span with knots[k] <= u < knots[k+1]; at the right end use the span ending at u
    let mut k = knots.iter().rposition(|&x| x <= u).expect("knot insertion before the first knot");
    if k >= n_ctrl {
        k = knots.iter().rposition(|&x| x < u).expect("knot insertion before the first knot");
    }
    assert!(k < n_ctrl && k >= d, "knot insertion outside the valid span range");
    let mut q = Vec::with_capacity(ctrl.len() + dim);
    for i in 0..=n_ctrl {
        if i + d <= k {
            q.extend_from_slice(&ctrl[i * dim..(i + 1) * dim]);
        } else if i <= k {
            let a = (u - knots[i]) / (knots[i + d] - knots[i]);
            for c in 0..dim {
                q.push(a * ctrl[i * dim + c] + (1.0 - a) * ctrl[(i - 1) * dim + c]);
            }
        } else {
            q.extend_from_slice(&ctrl[(i - 1) * dim..i * dim]);
        }
    }
    let mut nk = knots.to_vec();
    nk.insert(k + 1, u);
    (nk, q)
}

/// Cardinal B-spline of degree `d` on integer knots `0..=d+1`.
fn cardinal(d: usize, x: f64) -> f64 {
    if d == 0 {
        return if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 };
    }
    (x * cardinal(d - 1, x) + (d as f64 + 1.0 - x) * cardinal(d - 1, x - 1.0)) / d as f64
}

/// Closed interpolant through `values[i]` at `t0 + i * duration / P`, `i < P`,
/// assumed periodic. Degree must be odd.
pub fn fit_periodic_samples(values: &[f64], dim: usize, degree: usize, t0: f64, duration: f64) -> Result<BSpline> {
    if degree % 2 == 0 {
        return Err(precondition("periodic fits require an odd degree"));
    }
    let p = values.len() / dim;
    if p < 2 * degree + 2 {
        return Err(precondition(format!("periodic fit needs at least {} intervals", 2 * degree + 2)));
    }
    let d = degree;
    let h = duration / p as f64;
    let b: Vec<f64> = (0..=d).map(|k| cardinal(d, (d - k) as f64)).collect();
    let denom: Vec<Complex64> = (0..p)
        .map(|l| {
            b.iter()
                .enumerate()
                .map(|(k, &bk)| {
                    let th = 2.0 * std::f64::consts::PI * ((l * k) % p) as f64 / p as f64;
                    Complex64::new(bk * th.cos(), bk * th.sin())
                })
                .sum()
        })
        .collect();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(p);
    let inv = planner.plan_fft_inverse(p);
    let mut coef = vec![0.0; p * dim];
    for c in 0..dim {
        let mut buf: Vec<Complex64> = (0..p).map(|i| Complex64::new(values[i * dim + c], 0.0)).collect();
        fwd.process(&mut buf);
        for (x, dd) in buf.iter_mut().zip(&denom) {
            *x /= *dd;
        }
        inv.process(&mut buf);
        for i in 0..p {
            coef[i * dim + c] = buf[i].re / p as f64;
        }
    }
    let knots: Vec<f64> = (0..p + 2 * d + 1).map(|j| t0 + (j as f64 - d as f64) * h).collect();
    let mut ctrl = Vec::with_capacity((p + d) * dim);
    for j in 0..p + d {
        let jj = j % p;
        ctrl.extend_from_slice(&coef[jj * dim..(jj + 1) * dim]);
    }
    let t1 = t0 + duration;
    let (mut kn, mut cp) = (knots, ctrl);
    // the exact end values avoid drift in the uniform knot formula
    kn[d] = t0;
    kn[p + d] = t1;
    for _ in 0..d {
        let r = insert_knot_raw(&kn, &cp, dim, d, t0);
        kn = r.0;
        cp = r.1;
    }
    for _ in 0..d {
        let r = insert_knot_raw(&kn, &cp, dim, d, t1);
        kn = r.0;
        cp = r.1;
    }
    let nk = kn.len();
    let knots = kn[d..nk - d].to_vec();
    let nc = cp.len() / dim;
    let mut ctrl = cp[d * dim..(nc - d) * dim].to_vec();
    // the control points cut off left of t0 are, by periodicity, the last d
    // control points of the clamped end at t1; reusing them makes the seam jets
    // below order d agree to the last bit
    let m = ctrl.len();
    ctrl[m - d * dim..].copy_from_slice(&cp[..d * dim]);
    BSpline::new(d, dim, knots, ctrl)
}

/// Closed interpolant of a periodic map sampled at `intervals` uniform sites.
pub fn fit_periodic<F>(f: F, dim: usize, degree: usize, t0: f64, duration: f64, intervals: usize) -> Result<BSpline>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let h = duration / intervals as f64;
    let vals: Vec<Vec<f64>> = (0..intervals)
        .into_par_iter()
        .map(|i| f(t0 + i as f64 * h))
        .collect::<Result<_>>()?;
    let flat: Vec<f64> = vals.into_iter().flatten().collect();
    if flat.len() != intervals * dim {
        return Err(precondition("sampled values have the wrong dimension"));
    }
    fit_periodic_samples(&flat, dim, degree, t0, duration)
}

/// Interpolant through `values[i]` at strictly increasing `sites[i]`, with
/// interior knots placed at running averages of the sites.
pub fn interpolate_open(sites: &[f64], values: &[f64], dim: usize, degree: usize) -> Result<BSpline> {
    let m = sites.len();
    let d = degree;
    if m < d + 1 || values.len() != m * dim {
        return Err(precondition("open interpolation needs at least degree + 1 sites"));
    }
    if sites.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(precondition("interpolation sites must be strictly increasing"));
    }
    let mut knots = vec![sites[0]; d + 1];
    for j in 1..m - d {
        knots.push(sites[j..j + d].iter().sum::<f64>() / d as f64);
    }
    knots.extend(std::iter::repeat_n(sites[m - 1], d + 1));
    let shape = BSpline::new(d, 1, knots.clone(), vec![0.0; m])?;
    // banded collocation, half bandwidth d
    let w = 2 * d + 1;
    let mut band = vec![0.0; m * w];
    for (i, &t) in sites.iter().enumerate() {
        let span = shape.find_span(t);
        let b = shape.basis_ders(span, t, 0);
        for (j, &v) in b[0].iter().enumerate() {
            let col = span - d + j;
            if v == 0.0 {
                continue;
            }
            let off = col as isize - i as isize + d as isize;
            if off < 0 || off as usize >= w {
                return Err(precondition("collocation matrix is not banded"));
            }
            band[i * w + off as usize] = v;
        }
    }
    let mut rhs = values.to_vec();
    solve_banded(&mut band, &mut rhs, m, d, dim)?;
    BSpline::new(d, dim, knots, rhs)
}

/// Gaussian elimination without pivoting on a band matrix stored row-wise
/// with offset `col - row + kd`; solves in place for `nrhs` right-hand sides.
fn solve_banded(band: &mut [f64], rhs: &mut [f64], m: usize, kd: usize, nrhs: usize) -> Result<()> {
    let w = 2 * kd + 1;
    for k in 0..m {
        let piv = band[k * w + kd];
        if piv.abs() < 1e-300 {
            return Err(precondition("singular collocation matrix"));
        }
        for i in k + 1..(k + kd + 1).min(m) {
            let f = band[i * w + (k + kd - i)] / piv;
            if f == 0.0 {
                continue;
            }
            for j in k..(k + kd + 1).min(m) {
                band[i * w + (j + kd - i)] -= f * band[k * w + (j + kd - k)];
            }
            for c in 0..nrhs {
                rhs[i * nrhs + c] -= f * rhs[k * nrhs + c];
            }
        }
    }
    for k in (0..m).rev() {
        for c in 0..nrhs {
            let mut s = rhs[k * nrhs + c];
            for j in k + 1..(k + kd + 1).min(m) {
                s -= band[k * w + (j + kd - k)] * rhs[j * nrhs + c];
            }
            rhs[k * nrhs + c] = s / band[k * w + kd];
        }
    }
    Ok(())
}

/// Open interpolant of `f` at `intervals + 1` uniform sites on `[t0, t0 + duration]`.
pub fn fit_open<F>(f: F, dim: usize, degree: usize, t0: f64, duration: f64, intervals: usize) -> Result<BSpline>
where
    F: Fn(f64) -> Result<Vec<f64>> + Sync,
{
    let h = duration / intervals as f64;
    let sites: Vec<f64> = (0..=intervals)
        .map(|i| if i == intervals { t0 + duration } else { t0 + i as f64 * h })
        .collect();
    let vals: Vec<Vec<f64>> = sites.par_iter().map(|&t| f(t)).collect::<Result<_>>()?;
    let flat: Vec<f64> = vals.into_iter().flatten().collect();
    if flat.len() != sites.len() * dim {
        return Err(precondition("sampled values have the wrong dimension"));
    }
    interpolate_open(&sites, &flat, dim, degree)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn circle(t: f64) -> Result<Vec<f64>> {
        Ok(vec![(2.0 * PI * t).cos(), (2.0 * PI * t).sin()])
    }

    #[test]
    fn default_degree_is_odd_and_large_enough() {
        assert_eq!(default_degree(2), 5);
        assert_eq!(default_degree(3), 5);
        assert_eq!(default_degree(4), 7);
        assert_eq!(default_degree(5), 7);
    }

    #[test]
    fn cardinal_bspline_partition_of_unity() {
        for d in 1..8 {
            let s: f64 = (1..=d).map(|k| cardinal(d, k as f64)).sum();
            assert!((s - 1.0).abs() < 1e-14, "degree {d}");
        }
        assert!((cardinal(3, 2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn periodic_fit_interpolates_and_closes() {
        let s = fit_periodic(circle, 2, 5, 0.0, 1.0, 64).unwrap();
        for i in 0..64 {
            let t = i as f64 / 64.0;
            let v = s.eval(t);
            let e = circle(t).unwrap();
            assert!((v[0] - e[0]).abs() < 1e-12 && (v[1] - e[1]).abs() < 1e-12);
        }
        let a = s.eval_ders(0.0, 4);
        let b = s.eval_ders(1.0, 4);
        for k in 0..=4 {
            for c in 0..2 {
                let scale = 64f64.powi(k as i32) * 10.0;
                assert!((a[k][c] - b[k][c]).abs() < 1e-11 * scale, "jet mismatch at order {k}: {} vs {}", a[k][c], b[k][c]);
            }
        }
        // between sites the error is small and derivatives are accurate
        let t = 0.3172;
        let d = s.eval_ders(t, 3);
        let w = 2.0 * PI;
        assert!((d[0][0] - (w * t).cos()).abs() < 1e-9);
        assert!((d[3][1] + w.powi(3) * (w * t).cos()).abs() < 1e-3 * w.powi(3));
    }

    #[test]
    fn open_fit_reproduces_polynomials_of_low_degree() {
        let f = |t: f64| Ok(vec![1.0 + 2.0 * t - t.powi(3), t.powi(5)]);
        let s = fit_open(f, 2, 5, -0.5, 2.0, 20).unwrap();
        for &t in &[-0.5, -0.1, 0.77, 1.5] {
            let d = s.eval_ders(t, 2);
            assert!((d[0][0] - (1.0 + 2.0 * t - t.powi(3))).abs() < 1e-11);
            assert!((d[1][1] - 5.0 * t.powi(4)).abs() < 1e-9);
            assert!((d[2][0] + 6.0 * t).abs() < 1e-9);
        }
    }

    #[test]
    fn split_and_insertion_preserve_the_curve() {
        let s = fit_periodic(circle, 2, 5, 0.0, 1.0, 32).unwrap();
        let ins = s.insert_knot(0.4137);
        let (l, r) = s.split_at(0.5);
        for &t in &[0.05, 0.3, 0.4137, 0.49, 0.51, 0.9] {
            let e = s.eval_ders(t, 3);
            let a = ins.eval_ders(t, 3);
            let b = if t < 0.5 { l.eval_ders(t, 3) } else { r.eval_ders(t, 3) };
            for k in 0..=3 {
                for c in 0..2 {
                    assert!((e[k][c] - a[k][c]).abs() < 1e-8 * (1.0 + e[k][c].abs()));
                    assert!((e[k][c] - b[k][c]).abs() < 1e-8 * (1.0 + e[k][c].abs()));
                }
            }
        }
        assert_eq!(l.end(), 0.5);
        assert_eq!(r.start(), 0.5);
    }

    #[test]
    fn full_knot_splitting_recovers_pieces() {
        let s = fit_periodic(circle, 2, 5, 0.0, 1.0, 32).unwrap();
        let (l, r) = s.split_at(0.25);
        let mut knots = l.knots().to_vec();
        knots.extend_from_slice(&r.knots()[6..]);
        let mut ctrl = l.ctrl().to_vec();
        ctrl.extend_from_slice(r.ctrl());
        let joined = BSpline::new(5, 2, knots, ctrl).unwrap();
        let parts = joined.split_at_full_knots();
        assert_eq!(parts.len(), 2);
        assert_eq!(parts[0], l);
        assert_eq!(parts[1], r);
    }

    #[test]
    fn rejects_unclamped_knots() {
        let k = vec![0.0, 0.0, 0.5, 1.0, 1.0, 1.0];
        assert!(BSpline::new(2, 1, k, vec![0.0; 3]).is_err());
    }
}
