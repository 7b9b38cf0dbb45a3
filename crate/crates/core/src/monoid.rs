use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{concat, MoorePath};
use crate::error::Result;
use crate::manifold::ChartedManifold;
use crate::spin::{curve_class, SpinClass};

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// `omega . gamma` (left) or `gamma . omega` (right).
pub fn omega_multiply(side: Side, gamma: &MoorePath, omega: &MoorePath, delta: f64) -> Result<MoorePath> {
    match side {
        Side::Left => concat(omega, gamma, delta),
        Side::Right => concat(gamma, omega, delta),
    }
}

/// `(gamma, k)`: the class of `gamma` at stage `k` of the direct limit under `omega .`.
#[derive(Clone, Debug)]
pub struct StabilizedCurve {
    pub curve: MoorePath,
    pub power: u32,
}

pub fn stabilize(gamma: &MoorePath) -> StabilizedCurve {
    StabilizedCurve { curve: gamma.clone(), power: 0 }
}

impl StabilizedCurve {
    /// `(omega . gamma, k + 1)`, equal to `self` in the limit.
    pub fn shift(&self, omega: &MoorePath, delta: f64) -> Result<StabilizedCurve> {
        Ok(StabilizedCurve { curve: omega_multiply(Side::Left, &self.curve, omega, delta)?, power: self.power + 1 })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Pi0Comparison {
    pub equal: bool,
    pub class_a: SpinClass,
    pub class_b: SpinClass,
    pub power_a: u32,
    pub power_b: u32,
    pub omega_class: SpinClass,
}

/// Equality of `(c1, k1)` and `(c2, k2)` in the localized `pi_0`, detected through
/// the frame-loop invariant: `[c1] [omega]^k2 = [c2] [omega]^k1`.
pub fn stabilized_equal_pi0(
    m: &ChartedManifold,
    a: &StabilizedCurve,
    b: &StabilizedCurve,
    omega: &MoorePath,
    density: f64,
) -> Result<Pi0Comparison> {
    let cls = |p: &MoorePath| -> Result<SpinClass> {
        Ok(curve_class(m, p, density / p.duration().max(f64::MIN_POSITIVE))?.class)
    };
    let (ca, cb, cw) = (cls(&a.curve)?, cls(&b.curve)?, cls(omega)?);
    Ok(Pi0Comparison {
        equal: ca * cw.pow(b.power) == cb * cw.pow(a.power),
        class_a: ca,
        class_b: cb,
        power_a: a.power,
        power_b: b.power,
        omega_class: cw,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CensusReport {
    pub dim: usize,
    pub classes: Vec<SpinClass>,
    pub plus: usize,
    pub minus: usize,
    pub class_count: usize,
    pub both_classes: bool,
}

/// Partition of loops by frame-loop class; `density` is samples per loop.
pub fn pi0_census(m: &ChartedManifold, samples: &[MoorePath], density: f64) -> Result<CensusReport> {
    let classes: Vec<SpinClass> = samples
        .par_iter()
        .map(|p| Ok(curve_class(m, p, density / p.duration().max(f64::MIN_POSITIVE))?.class))
        .collect::<Result<_>>()?;
    let plus = classes.iter().filter(|c| **c == SpinClass::Plus).count();
    let minus = classes.len() - plus;
    Ok(CensusReport {
        dim: m.dim(),
        plus,
        minus,
        class_count: (plus > 0) as usize + (minus > 0) as usize,
        both_classes: plus > 0 && minus > 0,
        classes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::make_twist;
    use crate::curve::FRAME_MATCH_TOL;

    #[test]
    fn shift_is_equal_and_neutral_is_a_unit() {
        let tw = make_twist(3).unwrap();
        let flat = ChartedManifold::euclidean(3);
        let w = &tw.path;
        let g = stabilize(w);
        let s = g.shift(w, FRAME_MATCH_TOL).unwrap();
        assert!(stabilized_equal_pi0(&flat, &g, &s, w, 4096.0).unwrap().equal);
        let e = MoorePath::neutral(&flat, w.basepoint().clone(), w.degree());
        let l = omega_multiply(Side::Left, &e, w, 0.0).unwrap();
        let r = omega_multiply(Side::Right, &e, w, 0.0).unwrap();
        assert_eq!(l.duration(), w.duration());
        assert_eq!(r.duration(), w.duration());
    }
}
