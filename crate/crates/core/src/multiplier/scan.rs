use super::pair::{closed_form_coefficients, comparison_weights, Coefficients, MultiplierPair};
use crate::error::{Error, Result};
use crate::geometry::WarpGeometry;

/// Sample range used for the suite's δ: log-spaced x ∈ [1e-3, 1e3].
pub const SUITE_RANGE: (f64, f64) = (1e-3, 1e3);
pub const SUITE_SAMPLES: usize = 2001;

/// Regression bound for sup g·a of the delta family at the suite δ, m ∈ {1,2,3}.
/// The measured sup is 1 to within 2e-15, approached as x → ∞.
pub const G_TIMES_A_BOUND: f64 = 1.0 + 1e-12;

/// Allowance for roundoff in the pointwise check 0 ≤ f ≤ 1.
pub const F_RANGE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientScan {
    pub m: u32,
    pub delta: f64,
    pub x: Vec<f64>,
    /// Coefficients from the definitions of f and g.
    pub coefficients: Vec<Coefficients>,
    /// Closed-form coefficient divided by its comparison weight.
    pub margins: Vec<Coefficients>,
    pub min_margin: Coefficients,
    /// max |definition - closed form| / roundoff scale, per coefficient.
    pub closed_form_defect: Coefficients,
    pub f_min: f64,
    pub f_max: f64,
    pub max_g_times_a: f64,
    /// Largest δ keeping every margin positive on the samples.
    pub admissible_delta: f64,
}

impl CoefficientScan {
    pub fn margins_positive(&self) -> bool {
        self.min_margin.as_array().iter().all(|&v| v > 0.0)
    }

    pub fn f_in_unit_interval(&self) -> bool {
        self.f_min >= -F_RANGE_SLACK && self.f_max <= 1.0 + F_RANGE_SLACK
    }
}

pub fn log_samples(range: (f64, f64), samples: usize) -> Vec<f64> {
    let (lo, hi) = (range.0.ln(), range.1.ln());
    (0..samples)
        .map(|i| (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp())
        .collect()
}

fn min_margins(m: u32, delta: f64, x: &[f64]) -> Coefficients {
    let mut out = [f64::INFINITY; 4];
    for &xi in x {
        let c = closed_form_coefficients(m, delta, xi).as_array();
        let w = comparison_weights(m, xi).as_array();
        for j in 0..4 {
            out[j] = out[j].min(c[j] / w[j]);
        }
    }
    Coefficients {
        dx: out[0],
        angular: out[1],
        dt: out[2],
        u: out[3],
    }
}

fn all_positive(c: &Coefficients) -> bool {
    c.as_array().iter().all(|&v| v > 0.0)
}

/// Bisection for the largest δ with every closed-form margin positive on `x`.
pub fn admissible_delta(m: u32, x: &[f64]) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while all_positive(&min_margins(m, hi, x)) {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if all_positive(&min_margins(m, mid, x)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Half the admissible δ on the suite's sample set.
pub fn suite_delta(m: u32) -> f64 {
    0.5 * admissible_delta(m, &log_samples(SUITE_RANGE, SUITE_SAMPLES))
}

pub fn coefficient_scan(
    geom: &WarpGeometry,
    pair: &MultiplierPair,
    x_range: (f64, f64),
    samples: usize,
) -> Result<CoefficientScan> {
    let delta = pair
        .delta()
        .ok_or_else(|| Error::invalid("pair", "the coefficient scan needs the delta family"))?;
    let (lo, hi) = x_range;
    if !(lo > 0.0 && lo > geom.x0() && hi > lo && hi.is_finite()) {
        return Err(Error::invalid(
            "x_range",
            format!("need max(0, x0) < lo < hi, got ({lo}, {hi}) with x0 = {}", geom.x0()),
        ));
    }
    if samples < 2 {
        return Err(Error::invalid("samples", "need at least 2"));
    }
    let m = geom.m();
    let x = log_samples(x_range, samples);
    let mut coefficients = Vec::with_capacity(samples);
    let mut margins = Vec::with_capacity(samples);
    let mut defect = [0.0f64; 4];
    let (mut f_min, mut f_max, mut max_ga) = (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &xi in &x {
        let c = pair.coefficients(xi);
        let s = pair.coefficient_scales(xi).as_array();
        let k = closed_form_coefficients(m, delta, xi);
        let w = comparison_weights(m, xi).as_array();
        let (ca, ka) = (c.as_array(), k.as_array());
        for j in 0..4 {
            if s[j] > 0.0 {
                defect[j] = defect[j].max((ca[j] - ka[j]).abs() / s[j]);
            }
        }
        margins.push(Coefficients {
            dx: ka[0] / w[0],
            angular: ka[1] / w[1],
            dt: ka[2] / w[2],
            u: ka[3] / w[3],
        });
        coefficients.push(c);
        let f = pair.f(xi).value();
        f_min = f_min.min(f);
        f_max = f_max.max(f);
        max_ga = max_ga.max(pair.g(xi).value() * geom.a(xi));
    }
    Ok(CoefficientScan {
        m,
        delta,
        min_margin: min_margins(m, delta, &x),
        admissible_delta: admissible_delta(m, &x),
        x,
        coefficients,
        margins,
        closed_form_defect: Coefficients {
            dx: defect[0],
            angular: defect[1],
            dt: defect[2],
            u: defect[3],
        },
        f_min,
        f_max,
        max_g_times_a: max_ga,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpParams;

    #[test]
    fn admissible_delta_matches_margin_analysis() {
        // Angular margin 1 - δ/(1+x^{2m}) needs δ < 1 + x_min^{2m}; the u² margin
        // 2m + δm(2m+1)r(y) with min r = -1/2 at y = 1 needs δ < 4/(2m+1).
        let x = log_samples(SUITE_RANGE, SUITE_SAMPLES);
        let expect = |m: u32| (1.0 + 1e-3f64.powi(2 * m as i32)).min(4.0 / (2.0 * m as f64 + 1.0));
        for m in 1..=3 {
            let d = admissible_delta(m, &x);
            assert!((d - expect(m)).abs() < 1e-9, "m={m}: {d}");
        }
    }

    #[test]
    fn scan_rejects_bad_input() {
        let geom = WarpGeometry::new(WarpParams::new(1, 1e-4).unwrap());
        let ext = MultiplierPair::exterior_family(geom, 4.0, 4.0).unwrap();
        assert!(coefficient_scan(&geom, &ext, SUITE_RANGE, 10).is_err());
        let pair = MultiplierPair::delta_family(geom, 0.1).unwrap();
        assert!(coefficient_scan(&geom, &pair, (1e-5, 1.0), 10).is_err());
        let s = coefficient_scan(&geom, &pair, SUITE_RANGE, 301).unwrap();
        assert!(s.margins_positive());
        assert!(s.f_in_unit_interval());
        assert!(s.max_g_times_a <= G_TIMES_A_BOUND);
        for (c, &x) in s.coefficients.iter().zip(&s.x) {
            let q = x.powi(3) * (1.0 + x * x).powf(-3.0);
            assert!((c.dt - 0.1 * q).abs() <= 4e-16 * (x / (1.0 + x * x)));
        }
    }
}
