//! Truncated Taylor jets: a value together with its first four derivatives
//! with respect to one variable. Arithmetic follows Leibniz and Faà di Bruno,
//! so a formula written once on `Jet` yields exact derivatives.

use std::ops::{Add, Div, Mul, Neg, Sub};

/// Number of derivatives carried beyond the value.
pub const ORDER: usize = 4;

/// `d[k]` is the k-th derivative; `d[0]` is the value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub d: [f64; ORDER + 1],
}

impl Jet {
    pub fn constant(c: f64) -> Self {
        Jet {
            d: [c, 0.0, 0.0, 0.0, 0.0],
        }
    }

    /// The independent variable evaluated at `x`.
    pub fn variable(x: f64) -> Self {
        Jet {
            d: [x, 1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn value(&self) -> f64 {
        self.d[0]
    }

    /// Derivative of the jet. The top order is unknown afterwards and is set to NaN
    /// so that accidental use shows up.
    pub fn derivative(&self) -> Self {
        Jet {
            d: [self.d[1], self.d[2], self.d[3], self.d[4], f64::NAN],
        }
    }

    /// Apply a scalar function given its derivatives `phi[k] = φ^{(k)}(self.value())`.
    pub fn compose(&self, phi: [f64; ORDER + 1]) -> Self {
        let [_, f1, f2, f3, f4] = self.d;
        Jet {
            d: [
                phi[0],
                phi[1] * f1,
                phi[2] * f1 * f1 + phi[1] * f2,
                phi[3] * f1.powi(3) + 3.0 * phi[2] * f1 * f2 + phi[1] * f3,
                phi[4] * f1.powi(4)
                    + 6.0 * phi[3] * f1 * f1 * f2
                    + phi[2] * (3.0 * f2 * f2 + 4.0 * f1 * f3)
                    + phi[1] * f4,
            ],
        }
    }

    pub fn exp(&self) -> Self {
        let e = self.d[0].exp();
        self.compose([e; ORDER + 1])
    }

    pub fn ln(&self) -> Self {
        let v = self.d[0];
        self.compose([v.ln(), 1.0 / v, -1.0 / (v * v), 2.0 / v.powi(3), -6.0 / v.powi(4)])
    }

    /// `ln(1 + self)`, accurate when the value is small.
    pub fn ln_1p(&self) -> Self {
        let v = 1.0 + self.d[0];
        self.compose([
            self.d[0].ln_1p(),
            1.0 / v,
            -1.0 / (v * v),
            2.0 / v.powi(3),
            -6.0 / v.powi(4),
        ])
    }

    pub fn recip(&self) -> Self {
        let v = self.d[0];
        let r = 1.0 / v;
        self.compose([r, -r * r, 2.0 * r.powi(3), -6.0 * r.powi(4), 24.0 * r.powi(5)])
    }

    /// Real power; the value must be positive unless `p` is an integer.
    pub fn powf(&self, p: f64) -> Self {
        let v = self.d[0];
        let mut phi = [0.0; ORDER + 1];
        let mut coef = 1.0;
        for (k, slot) in phi.iter_mut().enumerate() {
            *slot = coef * v.powf(p - k as f64);
            coef *= p - k as f64;
        }
        self.compose(phi)
    }

    pub fn powi(&self, n: i32) -> Self {
        let v = self.d[0];
        let mut phi = [0.0; ORDER + 1];
        let mut coef = 1.0;
        for (k, slot) in phi.iter_mut().enumerate() {
            let e = n - k as i32;
            *slot = if coef == 0.0 { 0.0 } else { coef * v.powi(e) };
            coef *= e as f64;
        }
        self.compose(phi)
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.d[0].sin_cos();
        self.compose([s, c, -s, -c, s])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.d[0].sin_cos();
        self.compose([c, -s, -c, s, c])
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut out = *self;
        out.d.iter_mut().for_each(|v| *v *= c);
        out
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(rhs.d) {
            *a += b;
        }
        Jet { d }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        let mut d = self.d;
        for (a, b) in d.iter_mut().zip(rhs.d) {
            *a -= b;
        }
        Jet { d }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        let (f, g) = (self.d, rhs.d);
        Jet {
            d: [
                f[0] * g[0],
                f[1] * g[0] + f[0] * g[1],
                f[2] * g[0] + 2.0 * f[1] * g[1] + f[0] * g[2],
                f[3] * g[0] + 3.0 * f[2] * g[1] + 3.0 * f[1] * g[2] + f[0] * g[3],
                f[4] * g[0] + 4.0 * f[3] * g[1] + 6.0 * f[2] * g[2] + 4.0 * f[1] * g[3] + f[0] * g[4],
            ],
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.d[0] += rhs;
        self
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(mut self, rhs: f64) -> Jet {
        self.d[0] -= rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, rhs: f64) -> Jet {
        self.scale(1.0 / rhs)
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        -rhs + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fd(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
        (-f(x + 2.0 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn polynomial_derivatives_are_exact() {
        let x = Jet::variable(1.5);
        let p = x.powi(4) * 2.0 - x * 3.0 + 1.0;
        assert_relative_eq!(p.d[0], 2.0 * 1.5f64.powi(4) - 4.5 + 1.0);
        assert_relative_eq!(p.d[1], 8.0 * 1.5f64.powi(3) - 3.0);
        assert_relative_eq!(p.d[2], 24.0 * 1.5 * 1.5);
        assert_relative_eq!(p.d[3], 48.0 * 1.5);
        assert_relative_eq!(p.d[4], 48.0);
    }

    #[test]
    fn composite_matches_finite_differences() {
        let f = |x: Jet| (x.sin() * x.exp()).ln_1p() / (x * x + 1.0).sqrt();
        let scalar = |x: f64| (x.sin() * x.exp()).ln_1p() / (x * x + 1.0).sqrt();
        let x0 = 0.7;
        let j = f(Jet::variable(x0));
        let d1 = |x: f64| f(Jet::variable(x)).d[1];
        let d2 = |x: f64| f(Jet::variable(x)).d[2];
        let d3 = |x: f64| f(Jet::variable(x)).d[3];
        assert_relative_eq!(j.d[0], scalar(x0), max_relative = 1e-14);
        assert_relative_eq!(j.d[1], fd(scalar, x0, 1e-3), max_relative = 1e-9);
        assert_relative_eq!(j.d[2], fd(d1, x0, 1e-3), max_relative = 1e-9);
        assert_relative_eq!(j.d[3], fd(d2, x0, 1e-3), max_relative = 1e-9);
        assert_relative_eq!(j.d[4], fd(d3, x0, 1e-3), max_relative = 1e-8);
    }

    #[test]
    fn derivative_shifts_orders() {
        let j = Jet::variable(2.0).powi(3);
        let d = j.derivative();
        assert_eq!(d.d[0], 12.0);
        assert_eq!(d.d[1], 12.0);
        assert_eq!(d.d[2], 6.0);
        assert!(d.d[4].is_nan());
    }
}
