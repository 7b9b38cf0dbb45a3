//! Truncated Taylor series in one variable.
//!
//! A `Jet` of order `k` stores `f(t0 + s) = c[0] + c[1] s + ... + c[k] s^k + O(s^{k+1})`.
//! Coefficients are Taylor coefficients, so `c[j] = f^(j)(t0) / j!`.

pub const MAX_ORDER: usize = 12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; MAX_ORDER + 1],
    order: usize,
}

impl Jet {
    pub fn zero(order: usize) -> Self {
        assert!(order <= MAX_ORDER, "jet order {order} exceeds {MAX_ORDER}");
        Jet { c: [0.0; MAX_ORDER + 1], order }
    }

    pub fn constant(v: f64, order: usize) -> Self {
        let mut j = Self::zero(order);
        j.c[0] = v;
        j
    }

    /// Builds a jet from derivative values `f^(j)(t0)`, `j = 0..=order`.
    pub fn from_derivatives(ders: &[f64], order: usize) -> Self {
        let mut j = Self::zero(order);
        let mut fact = 1.0;
        for (i, c) in j.c.iter_mut().enumerate().take(order + 1) {
            if i > 0 {
                fact *= i as f64;
            }
            *c = ders.get(i).copied().unwrap_or(0.0) / fact;
        }
        j
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeff(&self, i: usize) -> f64 {
        if i <= self.order {
            self.c[i]
        } else {
            0.0
        }
    }

    /// `j`-th derivative at the expansion point.
    pub fn derivative_value(&self, j: usize) -> f64 {
        let fact: f64 = (1..=j).map(|i| i as f64).product();
        self.coeff(j) * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut j = *self;
        for c in j.c.iter_mut().skip(order + 1) {
            *c = 0.0;
        }
        j.order = order;
        j
    }

    /// d/ds; the order drops by one.
    pub fn deriv(&self) -> Self {
        let order = self.order.saturating_sub(1);
        let mut j = Self::zero(order);
        if self.order == 0 {
            return j;
        }
        for i in 0..=order {
            j.c[i] = (i + 1) as f64 * self.c[i + 1];
        }
        j
    }

    pub fn scale(&self, k: f64) -> Self {
        let mut j = *self;
        for c in j.c.iter_mut().take(self.order + 1) {
            *c *= k;
        }
        j
    }

    pub fn recip(&self) -> Self {
        let a0 = self.c[0];
        assert!(a0 != 0.0, "jet reciprocal of a series with zero constant term");
        let mut r = Self::zero(self.order);
        r.c[0] = 1.0 / a0;
        for i in 1..=self.order {
            let mut s = 0.0;
            for k in 1..=i {
                s += self.c[k] * r.c[i - k];
            }
            r.c[i] = -s / a0;
        }
        r
    }
}

impl std::ops::Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut j = Jet::zero(order);
        for i in 0..=order {
            j.c[i] = self.c[i] + o.c[i];
        }
        j
    }
}

impl std::ops::Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut j = Jet::zero(order);
        for i in 0..=order {
            j.c[i] = self.c[i] - o.c[i];
        }
        j
    }
}

impl std::ops::Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let order = self.order.min(o.order);
        let mut j = Jet::zero(order);
        for i in 0..=order {
            let mut s = 0.0;
            for k in 0..=i {
                s += self.c[k] * o.c[i - k];
            }
            j.c[i] = s;
        }
        j
    }
}

impl std::ops::Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl std::ops::Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

pub fn dot(a: &[Jet], b: &[Jet]) -> Jet {
    let order = a.iter().chain(b).map(|j| j.order).min().unwrap_or(0);
    a.iter()
        .zip(b)
        .fold(Jet::zero(order), |acc, (x, y)| acc + *x * *y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp_jet(order: usize) -> Jet {
        let ders = vec![1.0; order + 1];
        Jet::from_derivatives(&ders, order)
    }

    #[test]
    fn product_matches_exp_sum() {
        // e^s * e^s = e^{2s}
        let e = exp_jet(8);
        let p = e * e;
        for i in 0..=8 {
            assert!((p.derivative_value(i) - 2f64.powi(i as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn quotient_of_geometric_series() {
        // 1 / (1 - s) = sum s^i
        let mut d = Jet::constant(1.0, 6);
        d.c[1] = -1.0;
        let q = Jet::constant(1.0, 6) / d;
        for i in 0..=6 {
            assert!((q.coeff(i) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_shifts_coefficients() {
        let e = exp_jet(5);
        let d = e.deriv();
        assert_eq!(d.order(), 4);
        for i in 0..=4 {
            assert!((d.derivative_value(i) - 1.0).abs() < 1e-12);
        }
    }
}
