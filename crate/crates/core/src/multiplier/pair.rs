//! Multiplier pairs (f, g) and the pointwise coefficients they produce in the
//! integrated identity for -□u·(f∂ₓu + g u).

use crate::error::{Error, Result};
use crate::geometry::WarpGeometry;
use crate::jet::Jet;
use crate::smooth::smooth_step;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MultiplierFamily {
    /// f = x²/a², g = ½a^{-2}(a²f)' - δq with q = x^{1+2m}(1+x^{2m})^{-2-1/m}.
    Delta { delta: f64 },
    /// f = (1-β(x/R))·x/(x+ρ), g = ½a^{-2}·x/(x+ρ)·[(1-β(x/R))a²]'.
    Exterior { r: f64, rho: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierPair {
    pub geom: WarpGeometry,
    pub family: MultiplierFamily,
}

/// Coefficients of (∂ₓu)², a^{-2}|∂_ω u|², (∂ₜu)² and u² in the space-time
/// integral of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coefficients {
    pub dx: f64,
    pub angular: f64,
    pub dt: f64,
    pub u: f64,
}

impl Coefficients {
    pub fn as_array(&self) -> [f64; 4] {
        [self.dx, self.angular, self.dt, self.u]
    }
}

/// 1 - β(s): 0 for s ≤ 1/2, 1 for s ≥ 1.
fn exterior_switch(s: Jet) -> Jet {
    smooth_step(s.scale(2.0) - 1.0)
}

fn q_jet(m: u32, x: Jet) -> Jet {
    let p = 2 * m as i32;
    let base = x.powi(p) + 1.0;
    x.powi(p + 1) * base.powf(-2.0 - 1.0 / m as f64)
}

impl MultiplierPair {
    pub fn delta_family(geom: WarpGeometry, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::invalid("delta", format!("need δ > 0, got {delta}")));
        }
        Ok(MultiplierPair {
            geom,
            family: MultiplierFamily::Delta { delta },
        })
    }

    pub fn exterior_family(geom: WarpGeometry, r: f64, rho: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::invalid("R", format!("need R > 0, got {r}")));
        }
        if !(rho >= r && rho.is_finite()) {
            return Err(Error::invalid("rho", format!("need ρ ≥ R = {r}, got {rho}")));
        }
        Ok(MultiplierPair {
            geom,
            family: MultiplierFamily::Exterior { r, rho },
        })
    }

    pub fn delta(&self) -> Option<f64> {
        match self.family {
            MultiplierFamily::Delta { delta } => Some(delta),
            MultiplierFamily::Exterior { .. } => None,
        }
    }

    fn a_sq(&self, x: f64) -> Jet {
        self.geom.a_jet(Jet::variable(x)).powi(2)
    }

    /// Below R/2 the exterior pair vanishes identically.
    fn exterior_inactive(&self, x: f64) -> bool {
        matches!(self.family, MultiplierFamily::Exterior { r, .. } if x <= 0.5 * r)
    }

    /// f and its derivatives through order 4.
    pub fn f(&self, x: f64) -> Jet {
        let xj = Jet::variable(x);
        match self.family {
            MultiplierFamily::Delta { .. } => xj * xj / self.a_sq(x),
            MultiplierFamily::Exterior { r, rho } => {
                if self.exterior_inactive(x) {
                    return Jet::constant(0.0);
                }
                exterior_switch(xj / r) * xj / (xj + rho)
            }
        }
    }

    /// ½a^{-2}(a²f)', valid through order 3.
    pub fn half_flux(&self, x: f64) -> Jet {
        let a2 = self.a_sq(x);
        (a2 * self.f(x)).derivative() * 0.5 / a2
    }

    /// g and its derivatives through order 3.
    pub fn g(&self, x: f64) -> Jet {
        match self.family {
            MultiplierFamily::Delta { delta } => {
                self.half_flux(x) - q_jet(self.geom.m(), Jet::variable(x)).scale(delta)
            }
            MultiplierFamily::Exterior { r, rho } => {
                if self.exterior_inactive(x) {
                    return Jet::constant(0.0);
                }
                let xj = Jet::variable(x);
                let a2 = self.a_sq(x);
                let bracket = (exterior_switch(xj / r) * a2).derivative();
                (xj / (xj + rho)) * bracket * 0.5 / a2
            }
        }
    }

    /// The four coefficients computed from f and g as defined, without any
    /// closed-form simplification.
    pub fn coefficients(&self, x: f64) -> Coefficients {
        let f = self.f(x);
        let g = self.g(x);
        let h = self.half_flux(x);
        let a = self.geom.a_jet(Jet::variable(x));
        let a2 = a * a;
        let dlog_a = a.d[1] / a.d[0];
        let u = -0.5 * (a2 * g.derivative()).derivative().value() / a2.value();
        Coefficients {
            dx: f.d[1] + g.value() - h.value(),
            angular: f.value() * dlog_a + g.value() - h.value(),
            dt: h.value() - g.value(),
            u,
        }
    }

    /// Roundoff scale of each coefficient: the sum of magnitudes of the terms
    /// entering `coefficients`.
    pub fn coefficient_scales(&self, x: f64) -> Coefficients {
        let f = self.f(x);
        let g = self.g(x);
        let h = self.half_flux(x);
        let a = self.geom.a_jet(Jet::variable(x));
        let a2 = a * a;
        let gp = g.derivative();
        let u = 0.5 * ((a2.d[1] * gp.d[0]).abs() + (a2.d[0] * gp.d[1]).abs()) / a2.value();
        Coefficients {
            dx: f.d[1].abs() + g.value().abs() + h.value().abs(),
            angular: (f.value() * a.d[1] / a.d[0]).abs() + g.value().abs() + h.value().abs(),
            dt: g.value().abs() + h.value().abs(),
            u,
        }
    }
}

/// Closed-form coefficients of the delta family:
/// ∂ₓ: 2x/P^{1+1/m} - δq, angular: x^{1+2m}/P^{1+1/m} - δq, ∂ₜ: δq,
/// u²: 2m x^{2m-1}/P^{2+1/m} + δ m(2m+1) x^{2m-1}(x^{4m} - 4x^{2m} + 1)/P^{4+1/m},
/// with P = 1 + x^{2m} and q = x^{1+2m}/P^{2+1/m}.
pub fn closed_form_coefficients(m: u32, delta: f64, x: f64) -> Coefficients {
    let mf = m as f64;
    let y = x.powi(2 * m as i32);
    let p = 1.0 + y;
    let inv_m = 1.0 / mf;
    let q = x.powi(2 * m as i32 + 1) * p.powf(-2.0 - inv_m);
    let low = x.powi(2 * m as i32 - 1);
    Coefficients {
        dx: 2.0 * x * p.powf(-1.0 - inv_m) - delta * q,
        angular: x.powi(2 * m as i32 + 1) * p.powf(-1.0 - inv_m) - delta * q,
        dt: delta * q,
        u: 2.0 * mf * low * p.powf(-2.0 - inv_m)
            + delta * mf * (2.0 * mf + 1.0) * low * (y * y - 4.0 * y + 1.0) * p.powf(-4.0 - inv_m),
    }
}

/// Comparison weights the coefficients are measured against.
pub fn comparison_weights(m: u32, x: f64) -> Coefficients {
    let y = x.powi(2 * m as i32);
    let p = 1.0 + y;
    let inv_m = 1.0 / m as f64;
    Coefficients {
        dx: x * p.powf(-1.0 - inv_m),
        angular: x.powi(2 * m as i32 + 1) * p.powf(-1.0 - inv_m),
        dt: x.powi(2 * m as i32 + 1) * p.powf(-2.0 - inv_m),
        u: x.powi(2 * m as i32 - 1) * p.powf(-2.0 - inv_m),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpParams;

    fn geom(m: u32) -> WarpGeometry {
        WarpGeometry::new(WarpParams::new(m, 0.5).unwrap())
    }

    #[test]
    fn family_validation() {
        assert!(MultiplierPair::delta_family(geom(1), 0.0).is_err());
        assert!(MultiplierPair::exterior_family(geom(1), 4.0, 3.0).is_err());
        assert!(MultiplierPair::exterior_family(geom(1), 4.0, 4.0).is_ok());
    }

    #[test]
    fn definitions_match_closed_forms() {
        for m in 1..=3 {
            let pair = MultiplierPair::delta_family(geom(m), 0.3).unwrap();
            for i in 0..60 {
                let x = 10f64.powf(-2.0 + 4.0 * i as f64 / 59.0);
                let c = pair.coefficients(x).as_array();
                let s = pair.coefficient_scales(x).as_array();
                let k = closed_form_coefficients(m, 0.3, x).as_array();
                for j in 0..4 {
                    assert!(
                        (c[j] - k[j]).abs() <= 1e-13 * s[j],
                        "m={m} x={x} j={j}: {} vs {}",
                        c[j],
                        k[j]
                    );
                }
            }
        }
    }

    #[test]
    fn coefficients_vanish_at_origin() {
        let pair = MultiplierPair::delta_family(geom(2), 0.2).unwrap();
        for v in pair.coefficients(0.0).as_array() {
            assert_eq!(v, 0.0);
        }
        for v in closed_form_coefficients(2, 0.2, 0.0).as_array() {
            assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn exterior_pair_against_finite_differences() {
        let pair = MultiplierPair::exterior_family(geom(1), 4.0, 6.0).unwrap();
        assert_eq!(pair.f(1.9).value(), 0.0);
        assert_eq!(pair.g(1.9).value(), 0.0);
        // Beyond R the switch is 1, so f = x/(x+ρ) and g = x/(x+ρ)·a'/a.
        let x = 5.0;
        assert!((pair.f(x).value() - x / (x + 6.0)).abs() < 1e-15);
        let g = pair.g(x).value();
        let a = pair.geom.a(x);
        assert!((g - x / (x + 6.0) * pair.geom.da(x) / a).abs() < 1e-14);
        let eps = 1e-5;
        for &x in &[2.3, 3.0, 3.7] {
            let fd = (pair.f(x + eps).value() - pair.f(x - eps).value()) / (2.0 * eps);
            assert!((pair.f(x).d[1] - fd).abs() < 1e-8);
            let fd = (pair.g(x + eps).value() - pair.g(x - eps).value()) / (2.0 * eps);
            assert!((pair.g(x).d[1] - fd).abs() < 1e-7);
        }
    }
}
