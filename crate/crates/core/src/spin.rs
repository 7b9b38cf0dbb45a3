//! The pi_0 invariant of loops of frames: lift a sampled SO(n) loop to the
//! spin group step by step and read off the sign of the endpoint rotor.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::curve::{frame_map, FrameCurve, MoorePath};
use crate::error::{precondition, Error, Result};
use crate::manifold::ChartedManifold;

/// Closure tolerance for loops of orthonormal frames.
pub const LOOP_CLOSURE_TOL: f64 = 1e-6;
/// Largest non-scalar part allowed in the endpoint rotor.
pub const ROTOR_RESIDUAL_TOL: f64 = 1e-6;
const SANDWICH_TOL: f64 = 1e-8;

/// Sign of the spin lift of a loop in SO(n): `Plus` when it lifts to a loop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SpinClass {
    Plus,
    Minus,
}

impl SpinClass {
    pub fn sign(self) -> i8 {
        match self {
            SpinClass::Plus => 1,
            SpinClass::Minus => -1,
        }
    }
    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            SpinClass::Plus
        } else {
            SpinClass::Minus
        }
    }
    pub fn pow(self, k: u32) -> Self {
        if self == SpinClass::Minus && k % 2 == 1 {
            SpinClass::Minus
        } else {
            SpinClass::Plus
        }
    }
}

impl std::ops::Mul for SpinClass {
    type Output = SpinClass;
    fn mul(self, o: SpinClass) -> SpinClass {
        if self == o {
            SpinClass::Plus
        } else {
            SpinClass::Minus
        }
    }
}

impl Serialize for SpinClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_i8(self.sign())
    }
}

impl<'de> Deserialize<'de> for SpinClass {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match i8::deserialize(d)? {
            1 => Ok(SpinClass::Plus),
            -1 => Ok(SpinClass::Minus),
            v => Err(serde::de::Error::custom(format!("spin class must be +1 or -1, got {v}"))),
        }
    }
}

/// Multivector of Cl(n) with Euclidean signature, indexed by blade bitmask.
#[derive(Clone, Debug, PartialEq)]
pub struct Rotor {
    n: usize,
    c: Vec<f64>,
}

fn reorder_sign(a: usize, b: usize) -> f64 {
    let mut a = a >> 1;
    let mut swaps = 0;
    while a != 0 {
        swaps += (a & b).count_ones();
        a >>= 1;
    }
    if swaps % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn grade(mask: usize) -> u32 {
    mask.count_ones()
}

impl Rotor {
    pub fn identity(n: usize) -> Self {
        assert!((1..=12).contains(&n));
        let mut c = vec![0.0; 1 << n];
        c[0] = 1.0;
        Rotor { n, c }
    }

    fn vector(n: usize, k: usize) -> Self {
        let mut c = vec![0.0; 1 << n];
        c[1 << k] = 1.0;
        Rotor { n, c }
    }

    pub fn scalar(&self) -> f64 {
        self.c[0]
    }

    /// Coefficient of `e_i e_j` (i < j).
    pub fn bivector_coeff(&self, i: usize, j: usize) -> f64 {
        self.c[(1 << i) | (1 << j)]
    }

    /// Largest coefficient outside the scalar part.
    pub fn non_scalar_norm(&self) -> f64 {
        self.c[1..].iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn reverse(&self) -> Self {
        let c = self
            .c
            .iter()
            .enumerate()
            .map(|(m, &v)| {
                let g = grade(m);
                if (g * g.saturating_sub(1) / 2) % 2 == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Rotor { n: self.n, c }
    }

    pub fn mul(&self, o: &Rotor) -> Rotor {
        assert_eq!(self.n, o.n);
        let mut c = vec![0.0; self.c.len()];
        for (a, &x) in self.c.iter().enumerate() {
            if x == 0.0 {
                continue;
            }
            for (b, &y) in o.c.iter().enumerate() {
                if y == 0.0 {
                    continue;
                }
                c[a ^ b] += reorder_sign(a, b) * x * y;
            }
        }
        Rotor { n: self.n, c }
    }

    fn add_scaled(&mut self, o: &Rotor, s: f64) {
        for (a, b) in self.c.iter_mut().zip(&o.c) {
            *a += s * b;
        }
    }

    fn frob(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `exp(1/2 sum_{i<j} s_ij e_i e_j)` for a skew matrix `s`.
    pub fn from_skew(s: &DMatrix<f64>) -> Rotor {
        let n = s.nrows();
        let mut b = Rotor { n, c: vec![0.0; 1 << n] };
        for i in 0..n {
            for j in i + 1..n {
                b.c[(1 << i) | (1 << j)] = 0.5 * s[(i, j)];
            }
        }
        let norm = b.frob();
        let mut squarings = 0;
        let mut scale = 1.0;
        while norm * scale > 0.25 {
            scale *= 0.5;
            squarings += 1;
        }
        let bs = Rotor { n, c: b.c.iter().map(|v| v * scale).collect() };
        let mut sum = Rotor::identity(n);
        let mut term = Rotor::identity(n);
        for k in 1..=16 {
            term = term.mul(&bs);
            term.c.iter_mut().for_each(|v| *v /= k as f64);
            sum.add_scaled(&term, 1.0);
            if term.frob() < 1e-18 {
                break;
            }
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }

    /// The rotation `v -> R v R~` as a matrix acting on column vectors.
    pub fn rotation_matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let rr = self.reverse();
        let mut q = DMatrix::zeros(n, n);
        for k in 0..n {
            let v = self.mul(&Rotor::vector(n, k)).mul(&rr);
            for i in 0..n {
                q[(i, k)] = v.c[1 << i];
            }
        }
        q
    }
}

fn identity_like(m: &DMatrix<f64>) -> DMatrix<f64> {
    DMatrix::identity(m.nrows(), m.ncols())
}

fn sqrtm_db(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let mut y = a.clone();
    let mut z = identity_like(a);
    for _ in 0..60 {
        let yi = y.clone().try_inverse().ok_or_else(|| Error::Spin("singular matrix in square root".into()))?;
        let zi = z.clone().try_inverse().ok_or_else(|| Error::Spin("singular matrix in square root".into()))?;
        let yn = (&y + zi) * 0.5;
        let zn = (&z + yi) * 0.5;
        let done = (&yn - &y).norm() < 1e-15 * yn.norm();
        y = yn;
        z = zn;
        if done {
            break;
        }
    }
    Ok(y)
}

/// Principal logarithm of a rotation close enough to the identity, as a skew matrix.
pub fn log_rotation(q: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let id = identity_like(q);
    let mut x = q.clone();
    let mut k = 0;
    while (&x - &id).norm() > 0.05 {
        x = sqrtm_db(&x)?;
        k += 1;
        if k > 40 {
            return Err(Error::Spin("matrix logarithm did not converge".into()));
        }
    }
    let y = &x - &id;
    let mut l = DMatrix::zeros(q.nrows(), q.ncols());
    let mut p = y.clone();
    for m in 1..=60 {
        let term = &p * ((if m % 2 == 1 { 1.0 } else { -1.0 }) / m as f64);
        let small = term.norm() < 1e-18;
        l += term;
        if small {
            break;
        }
        p = &p * &y;
    }
    l *= 2f64.powi(k);
    Ok((&l - l.transpose()) * 0.5)
}

/// Orthonormalization by Gram-Schmidt with a positive triangular factor.
pub fn gl_to_so(l: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = l.nrows();
    if l.ncols() != n {
        return Err(precondition("frame must be square"));
    }
    let mut q = l.clone();
    let scale = l.norm().max(f64::MIN_POSITIVE);
    for j in 0..n {
        for i in 0..j {
            let r = q.column(i).dot(&q.column(j));
            let qi = q.column(i).clone_owned();
            q.column_mut(j).axpy(-r, &qi, 1.0);
        }
        let nrm = q.column(j).norm();
        if !(nrm > 1e-14 * scale) {
            return Err(precondition("frame is singular"));
        }
        q.column_mut(j).scale_mut(1.0 / nrm);
    }
    if q.determinant() < 0.0 {
        return Err(precondition("frame has negative orientation"));
    }
    Ok(q)
}

/// Rotor of the relative rotation `q_prev^T q_next`.
pub fn rotor_step(q_prev: &DMatrix<f64>, q_next: &DMatrix<f64>) -> Result<Rotor> {
    let delta = q_prev.transpose() * q_next;
    let s = log_rotation(&delta)?;
    let angle = s.clone().svd(false, false).singular_values.max();
    if !(angle < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Spin(format!("sampling too coarse: step rotates by {angle:.3} rad")));
    }
    let r = Rotor::from_skew(&s);
    let err = (r.rotation_matrix() - &delta).amax();
    if err > SANDWICH_TOL {
        return Err(Error::Spin(format!("rotor sandwich misses the step rotation by {err:e}")));
    }
    Ok(r)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct LoopInvariant {
    pub class: SpinClass,
    pub residual: f64,
    pub samples: usize,
}

/// Spin class of a closed loop of orthonormal frames.
pub fn loop_class(q: &FrameCurve) -> Result<LoopInvariant> {
    let id = DMatrix::<f64>::identity(q.dim(), q.dim());
    for (_, f) in q.samples() {
        if (f.transpose() * f - &id).amax() > 1e-8 {
            return Err(precondition("loop_class expects orthonormal frames"));
        }
    }
    let gap = (q.first() - q.last()).norm();
    if gap > LOOP_CLOSURE_TOL {
        return Err(Error::Spin(format!("frame path is not closed (gap {gap:e})")));
    }
    let frames: Vec<&DMatrix<f64>> = q.samples().map(|(_, f)| f).collect();
    let steps: Vec<Rotor> = {
        use rayon::prelude::*;
        frames.par_windows(2).map(|w| rotor_step(w[0], w[1])).collect::<Result<_>>()?
    };
    let mut r = Rotor::identity(q.dim());
    for s in &steps {
        r = r.mul(s);
    }
    let s = r.scalar();
    let residual = r.non_scalar_norm().max((s.abs() - 1.0).abs());
    if residual > ROTOR_RESIDUAL_TOL {
        return Err(Error::Spin(format!("endpoint rotor is not +-1 (residual {residual:e})")));
    }
    Ok(LoopInvariant { class: SpinClass::from_sign(s), residual, samples: frames.len() })
}

/// Orthonormalizes every frame of a sampled frame path.
pub fn frenet(f: &FrameCurve) -> Result<FrameCurve> {
    for (_, m) in f.samples() {
        gl_to_so(m)?;
    }
    Ok(f.map(|m| gl_to_so(m).expect("checked above")))
}

/// Spin class of a curve through its Frenet frames.
pub fn curve_class(m: &ChartedManifold, path: &MoorePath, density: f64) -> Result<LoopInvariant> {
    if path.is_neutral() {
        return Ok(LoopInvariant { class: SpinClass::Plus, residual: 0.0, samples: 0 });
    }
    let f = frame_map(m, path, density)?;
    loop_class(&frenet(&f)?)
}
