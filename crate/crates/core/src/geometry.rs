//! The warp a(x) = (x^{2m} + 1)^{1/(2m)}, its derivatives, the angular mode
//! table, and the per-mode potentials V_l = l(l+1)/a² + a''/a.

use crate::error::{Error, Result};
use crate::jet::Jet;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpParams {
    /// Warp exponent (m = 1 is non-degenerate trapping).
    pub m: u32,
    /// Location of the Dirichlet boundary.
    pub x0: f64,
}

impl WarpParams {
    pub fn new(m: u32, x0: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "warp exponent must be at least 1"));
        }
        if !x0.is_finite() || x0 == 0.0 {
            return Err(Error::invalid(
                "x0",
                format!("boundary must be finite and nonzero, got {x0}"),
            ));
        }
        Ok(WarpParams { m, x0 })
    }

    fn two_m(&self) -> i32 {
        2 * self.m as i32
    }
}

/// One spherical harmonic degree with its Laplace eigenvalue and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularMode {
    pub l: usize,
    pub sigma_sq: f64,
    pub multiplicity: usize,
}

impl AngularMode {
    pub fn new(l: usize) -> Self {
        AngularMode {
            l,
            sigma_sq: (l * (l + 1)) as f64,
            multiplicity: 2 * l + 1,
        }
    }

    /// A single real spherical harmonic of degree l (multiplicity 1).
    pub fn single_harmonic(l: usize) -> Self {
        AngularMode {
            multiplicity: 1,
            ..AngularMode::new(l)
        }
    }

    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

/// Modes l = 0..=l_max in increasing order.
pub fn mode_table(l_max: usize) -> Vec<AngularMode> {
    (0..=l_max).map(AngularMode::new).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WarpGeometry {
    pub params: WarpParams,
}

impl WarpGeometry {
    pub fn new(params: WarpParams) -> Self {
        WarpGeometry { params }
    }

    pub fn m(&self) -> u32 {
        self.params.m
    }

    pub fn x0(&self) -> f64 {
        self.params.x0
    }

    /// x^{2m-1}/(1+x^{2m}), arranged so neither branch overflows.
    fn rational_first(&self, x: f64) -> f64 {
        let n = self.params.two_m();
        if x.abs() <= 1.0 {
            x.powi(n - 1) / (1.0 + x.powi(n))
        } else {
            1.0 / (x * (1.0 + x.powi(-n)))
        }
    }

    pub fn a(&self, x: f64) -> f64 {
        let n = self.params.two_m();
        let t = x.abs();
        if t <= 1.0 {
            (t.powi(n).ln_1p() / n as f64).exp()
        } else {
            t * (t.powi(-n).ln_1p() / n as f64).exp()
        }
    }

    /// a'(x) = x^{2m-1}(x^{2m}+1)^{1/(2m)-1}.
    pub fn da(&self, x: f64) -> f64 {
        self.a(x) * self.rational_first(x)
    }

    /// a''(x) = (2m-1)x^{2m-2}(x^{2m}+1)^{1/(2m)-2}.
    pub fn d2a(&self, x: f64) -> f64 {
        self.a(x) * self.curvature_ratio(x)
    }

    /// a'(x)/a(x).
    pub fn log_derivative(&self, x: f64) -> f64 {
        self.rational_first(x)
    }

    /// a''(x)/a(x) = (2m-1)x^{2m-2}/(1+x^{2m})², which is V_0.
    pub fn curvature_ratio(&self, x: f64) -> f64 {
        let m = self.params.m as i32;
        let n = 2 * m;
        if m == 1 {
            return 1.0 / (1.0 + x * x).powi(2);
        }
        let c = (n - 1) as f64;
        if x.abs() <= 1.0 {
            c * x.powi(n - 2) / (1.0 + x.powi(n)).powi(2)
        } else {
            c * x.powi(-n - 2) / (1.0 + x.powi(-n)).powi(2)
        }
    }

    /// V_l(x) = l(l+1) a^{-2} + a''/a.
    pub fn potential(&self, l: usize, x: f64) -> f64 {
        let a = self.a(x);
        AngularMode::new(l).sigma_sq / (a * a) + self.curvature_ratio(x)
    }

    /// Taylor jet of a at x, for multiplier computations.
    pub fn a_jet(&self, x: Jet) -> Jet {
        let n = self.params.two_m();
        (x.powi(n).ln_1p() / n as f64).exp()
    }
}

/// Evaluate a (order 0), a' (order 1) or a'' (order 2).
pub fn warp_eval(params: &WarpParams, x: f64, order: u8) -> f64 {
    let g = WarpGeometry::new(*params);
    match order {
        0 => g.a(x),
        1 => g.da(x),
        2 => g.d2a(x),
        _ => panic!("warp_eval supports orders 0, 1, 2; got {order}"),
    }
}

pub fn potential(geom: &WarpGeometry, l: usize, x: f64) -> f64 {
    geom.potential(l, x)
}

/// Whether V_l is strictly increasing on [x0, x0/2] (sampled) with V_l(x0/2) < V_l(0),
/// the hypotheses under which the lowest Dirichlet eigenvalue on (x0, 0) is bracketed.
pub fn bracket_hypotheses_hold(geom: &WarpGeometry, l: usize, samples: usize) -> bool {
    let x0 = geom.x0();
    if x0 >= 0.0 {
        return false;
    }
    let samples = samples.max(2);
    let mut prev = geom.potential(l, x0);
    for i in 1..=samples {
        let x = x0 + 0.5 * (-x0) * i as f64 / samples as f64;
        let v = geom.potential(l, x);
        if v <= prev {
            return false;
        }
        prev = v;
    }
    prev < geom.potential(l, 0.0)
}

/// Smallest L ≤ l_max such that the bracket hypotheses hold for every l in L..=l_max.
pub fn monotonicity_threshold(geom: &WarpGeometry, l_max: usize, samples: usize) -> Option<usize> {
    let mut threshold = None;
    for l in (0..=l_max).rev() {
        if bracket_hypotheses_hold(geom, l, samples) {
            threshold = Some(l);
        } else {
            break;
        }
    }
    threshold
}
