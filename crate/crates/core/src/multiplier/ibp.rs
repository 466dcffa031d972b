//! Manufactured-solution check of the multiplier identity
//!
//!   -∫∫ □u·(f∂ₓu + g u) dV dt
//!     = [∫ ∂ₜu (f∂ₓu + g u) dV]₀^T + ∫∫ c_x(∂ₓu)² + c_ω a^{-2}|∂_ω u|² + c_t(∂ₜu)² + c_u u² dV dt
//!       + ½∫∫ f(x₀)(∂ₓu)²|_{x₀} a(x₀)² dσ dt,
//!
//! with □u = -∂ₜ²u + a^{-2}∂ₓ(a²∂ₓu) + a^{-2}Δ_ω u, evaluated for
//! u = T(t)φ(x)Y(ω) with a single real harmonic Y of unit norm.

use super::pair::MultiplierPair;
use crate::error::{Error, Result};
use crate::geometry::{AngularMode, WarpGeometry};
use crate::jet::Jet;
use crate::smooth::smooth_step;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeShape {
    /// sin(νt).
    Sine { frequency: f64 },
    /// cos(νt) + c.
    Cosine { frequency: f64, offset: f64 },
    /// e^{-κt} sin(νt).
    DampedSine { rate: f64, frequency: f64 },
    /// exp(-((t - center)/width)²).
    Pulse { center: f64, width: f64 },
    /// sin t + 0.3 cos 2t.
    Mixed,
}

impl TimeShape {
    pub fn jet(&self, t: f64) -> Jet {
        let tj = Jet::variable(t);
        match *self {
            TimeShape::Sine { frequency } => tj.scale(frequency).sin(),
            TimeShape::Cosine { frequency, offset } => tj.scale(frequency).cos() + offset,
            TimeShape::DampedSine { rate, frequency } => tj.scale(-rate).exp() * tj.scale(frequency).sin(),
            TimeShape::Pulse { center, width } => {
                let s = (tj - center) / width;
                (-(s * s)).exp()
            }
            TimeShape::Mixed => tj.sin() + tj.scale(2.0).cos().scale(0.3),
        }
    }
}

/// u = T(t)·φ(x)·Y_l(ω) with φ(x) = s^k·(1 - S(2s/L - 1))·(1 + c·s), s = x - x₀,
/// where S is the smooth step. φ vanishes to order k at the wall and is
/// supported in [x₀, x₀ + L].
#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedSolution {
    pub label: String,
    pub l: usize,
    pub time: TimeShape,
    pub wall_order: u32,
    pub support: f64,
    pub tilt: f64,
    /// Overall amplitude; 0 gives u ≡ 0.
    pub amplitude: f64,
}

impl ManufacturedSolution {
    pub fn new(label: &str, l: usize, time: TimeShape, wall_order: u32, support: f64, tilt: f64) -> Self {
        ManufacturedSolution {
            label: label.to_string(),
            l,
            time,
            wall_order,
            support,
            tilt,
            amplitude: 1.0,
        }
    }

    pub fn space_jet(&self, x0: f64, x: f64) -> Jet {
        let s = Jet::variable(x - x0);
        if s.value() >= self.support {
            return Jet::constant(0.0);
        }
        let cut = 1.0 - smooth_step(s.scale(2.0 / self.support) - 1.0);
        let mut phi = cut * (s.scale(self.tilt) + 1.0);
        if self.wall_order > 0 {
            phi = phi * s.powi(self.wall_order as i32);
        }
        phi.scale(self.amplitude)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpOptions {
    /// Space intervals at the coarsest level.
    pub n_x: usize,
    /// Time intervals at the coarsest level.
    pub n_t: usize,
    /// Number of refinement levels (each halves both steps).
    pub levels: usize,
    /// Largest |u(t, x₀)| accepted as a Dirichlet trace.
    pub trace_tolerance: f64,
}

impl Default for IbpOptions {
    fn default() -> Self {
        IbpOptions {
            n_x: 200,
            n_t: 100,
            levels: 3,
            trace_tolerance: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbpLevel {
    pub n_x: usize,
    pub n_t: usize,
    pub hx: f64,
    pub ht: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// ½∫ f(x₀)(∂ₓu)² a(x₀)² dt.
    pub boundary_term: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    pub label: String,
    pub l: usize,
    pub t_final: f64,
    pub x_max: f64,
    /// Finest-level values.
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub boundary_term: f64,
    pub levels: Vec<IbpLevel>,
    /// log₂ of successive gap ratios; the last entry is the reported order.
    pub orders: Vec<f64>,
    pub order: f64,
}

fn trapezoid_weights(n: usize, h: f64) -> impl Iterator<Item = f64> {
    (0..=n).map(move |i| if i == 0 || i == n { 0.5 * h } else { h })
}

fn evaluate(
    geom: &WarpGeometry,
    pair: &MultiplierPair,
    u: &ManufacturedSolution,
    t_final: f64,
    x_max: f64,
    n_x: usize,
    n_t: usize,
) -> IbpLevel {
    let x0 = geom.x0();
    let sigma_sq = AngularMode::new(u.l).sigma_sq;
    let hx = (x_max - x0) / n_x as f64;
    let ht = t_final / n_t as f64;

    // Space factors.
    let (mut s_pair, mut s_op, mut s_x, mut s_ang, mut s_t, mut s_u) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (i, w) in trapezoid_weights(n_x, hx).enumerate() {
        let x = if i == n_x { x_max } else { x0 + i as f64 * hx };
        let phi = u.space_jet(x0, x);
        if phi.d[..3].iter().all(|&v| v == 0.0) {
            continue;
        }
        let a = geom.a_jet(Jet::variable(x));
        let a2 = a * a;
        let f = pair.f(x).value();
        let g = pair.g(x).value();
        let c = pair.coefficients(x);
        let mult = f * phi.d[1] + g * phi.d[0];
        // a^{-2}(a²φ')' - σ²a^{-2}φ
        let l_phi = phi.d[2] + a2.d[1] / a2.d[0] * phi.d[1] - sigma_sq / a2.d[0] * phi.d[0];
        let vol = w * a2.d[0];
        s_pair += vol * phi.d[0] * mult;
        s_op += vol * l_phi * mult;
        s_x += vol * c.dx * phi.d[1] * phi.d[1];
        s_ang += w * c.angular * sigma_sq * phi.d[0] * phi.d[0];
        s_t += vol * c.dt * phi.d[0] * phi.d[0];
        s_u += vol * c.u * phi.d[0] * phi.d[0];
    }

    // Time factors.
    let (mut q_acc, mut q_sq, mut q_vel) = (0.0, 0.0, 0.0);
    for (k, w) in trapezoid_weights(n_t, ht).enumerate() {
        let t = if k == n_t { t_final } else { k as f64 * ht };
        let tj = u.time.jet(t);
        q_acc += w * tj.d[2] * tj.d[0];
        q_sq += w * tj.d[0] * tj.d[0];
        q_vel += w * tj.d[1] * tj.d[1];
    }
    let (end, start) = (u.time.jet(t_final), u.time.jet(0.0));
    let time_boundary = end.d[1] * end.d[0] - start.d[1] * start.d[0];

    let wall = u.space_jet(x0, x0).d[1];
    let boundary_term = 0.5 * pair.f(x0).value() * geom.a(x0).powi(2) * wall * wall * q_sq;

    // □u = -T''φ + T·Lφ, so -∫∫□u(fφ' + gφ)T dV dt = ∫T''T·s_pair - ∫T²·s_op.
    let lhs = q_acc * s_pair - q_sq * s_op;
    let rhs = time_boundary * s_pair + q_sq * (s_x + s_ang + s_u) + q_vel * s_t + boundary_term;
    IbpLevel {
        n_x,
        n_t,
        hx,
        ht,
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
        boundary_term,
    }
}

pub fn verify_ibp(
    geom: &WarpGeometry,
    pair: &MultiplierPair,
    u: &ManufacturedSolution,
    t_final: f64,
    x_max: f64,
    opts: &IbpOptions,
) -> Result<IdentityReport> {
    let x0 = geom.x0();
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::invalid("T", format!("need T > 0, got {t_final}")));
    }
    if !(u.support > 0.0) || x0 + u.support > x_max {
        return Err(Error::invalid(
            "u",
            format!("support [x0, x0 + {}] must lie inside [x0, x_max = {x_max}]", u.support),
        ));
    }
    if opts.levels < 2 || opts.n_x < 2 || opts.n_t < 2 {
        return Err(Error::invalid("ibp options", "need at least 2 levels and 2 intervals"));
    }
    if pair.geom != *geom {
        return Err(Error::invalid(
            "pair",
            "multiplier pair was built for a different geometry",
        ));
    }
    let wall = u.space_jet(x0, x0).value().abs();
    let trace = wall
        * (0..=opts.n_t)
            .map(|k| u.time.jet(t_final * k as f64 / opts.n_t as f64).value().abs())
            .fold(0.0, f64::max);
    if trace > opts.trace_tolerance {
        return Err(Error::DirichletTrace { trace });
    }

    let levels: Vec<IbpLevel> = (0..opts.levels)
        .map(|k| evaluate(geom, pair, u, t_final, x_max, opts.n_x << k, opts.n_t << k))
        .collect();
    let orders: Vec<f64> = levels
        .windows(2)
        .map(|w| {
            if w[0].gap > 0.0 && w[1].gap > 0.0 {
                (w[0].gap / w[1].gap).log2()
            } else {
                f64::NAN
            }
        })
        .collect();
    let last = *levels.last().expect("at least two levels");
    Ok(IdentityReport {
        label: u.label.clone(),
        l: u.l,
        t_final,
        x_max,
        lhs: last.lhs,
        rhs: last.rhs,
        gap: last.gap,
        boundary_term: last.boundary_term,
        order: *orders.last().expect("at least one ratio"),
        orders,
        levels,
    })
}

/// Multiplier pair, manufactured solution, T and x_max for one identity check.
#[derive(Debug, Clone, PartialEq)]
pub struct IbpCase {
    pub pair: MultiplierPair,
    pub solution: ManufacturedSolution,
    pub t_final: f64,
    pub x_max: f64,
}

/// The suite's manufactured corpus on the given geometry: delta-family pairs
/// at `delta` over several (l, time shape) combinations, one solution with a
/// double zero at the wall, and two exterior-family pairs.
pub fn ibp_corpus(geom: &WarpGeometry, delta: f64) -> Result<Vec<IbpCase>> {
    let x0 = geom.x0();
    let dp = MultiplierPair::delta_family(*geom, delta)?;
    let solutions = [
        ManufacturedSolution::new("sine l=1", 1, TimeShape::Sine { frequency: 1.0 }, 1, 3.0, 0.0),
        ManufacturedSolution::new(
            "cosine l=0",
            0,
            TimeShape::Cosine {
                frequency: 2.0,
                offset: 0.3,
            },
            1,
            2.5,
            0.5,
        ),
        ManufacturedSolution::new(
            "damped l=2",
            2,
            TimeShape::DampedSine {
                rate: 0.5,
                frequency: 3.0,
            },
            1,
            4.0,
            -0.1,
        ),
        ManufacturedSolution::new(
            "pulse l=4",
            4,
            TimeShape::Pulse {
                center: 1.0,
                width: 0.5,
            },
            1,
            3.0,
            0.2,
        ),
        ManufacturedSolution::new("mixed l=3", 3, TimeShape::Mixed, 1, 3.5, 0.0),
        ManufacturedSolution::new("double zero l=2", 2, TimeShape::Sine { frequency: 1.5 }, 2, 3.0, 0.3),
    ];
    let mut cases: Vec<IbpCase> = solutions
        .into_iter()
        .map(|s| IbpCase {
            pair: dp,
            x_max: x0 + s.support,
            solution: s,
            t_final: 2.0,
        })
        .collect();
    for (r, l, shape) in [
        (4.0, 1, TimeShape::Sine { frequency: 1.0 }),
        (
            8.0,
            2,
            TimeShape::Cosine {
                frequency: 1.0,
                offset: 0.0,
            },
        ),
    ] {
        let support = r + 2.0 - x0.min(0.0);
        cases.push(IbpCase {
            pair: MultiplierPair::exterior_family(*geom, r, r)?,
            solution: ManufacturedSolution::new(&format!("exterior R={r} l={l}"), l, shape, 1, support, 0.0),
            t_final: 2.0,
            x_max: x0 + support,
        });
    }
    Ok(cases)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpParams;

    fn geom() -> WarpGeometry {
        WarpGeometry::new(WarpParams::new(1, 1.0).unwrap())
    }

    #[test]
    fn zero_solution_gives_zero() {
        let g = geom();
        let pair = MultiplierPair::delta_family(g, 0.5).unwrap();
        let mut u = ManufacturedSolution::new("zero", 1, TimeShape::Sine { frequency: 1.0 }, 1, 3.0, 0.0);
        u.amplitude = 0.0;
        let r = verify_ibp(&g, &pair, &u, 2.0, 4.0, &IbpOptions::default()).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert_eq!(r.rhs, 0.0);
    }

    #[test]
    fn dirichlet_violation_reports_trace() {
        let g = geom();
        let pair = MultiplierPair::delta_family(g, 0.5).unwrap();
        let u = ManufacturedSolution::new("no wall zero", 1, TimeShape::Sine { frequency: 1.0 }, 0, 3.0, 0.0);
        match verify_ibp(&g, &pair, &u, 2.0, 4.0, &IbpOptions::default()) {
            Err(Error::DirichletTrace { trace }) => assert!((trace - 1.0).abs() < 0.01, "{trace}"),
            other => panic!("expected a trace error, got {other:?}"),
        }
    }

    #[test]
    fn sine_bump_converges_at_second_order() {
        let g = geom();
        let pair = MultiplierPair::delta_family(g, 0.5).unwrap();
        let u = ManufacturedSolution::new("sine", 1, TimeShape::Sine { frequency: 1.0 }, 1, 3.0, 0.0);
        let r = verify_ibp(&g, &pair, &u, 2.0, 4.0, &IbpOptions::default()).unwrap();
        assert!((1.8..=2.2).contains(&r.order), "{r:?}");
        assert!(r.gap < 1e-4 * r.lhs.abs());
        assert!(r.boundary_term > 0.0);
    }

    #[test]
    fn double_zero_has_no_boundary_term() {
        let g = geom();
        let pair = MultiplierPair::delta_family(g, 0.5).unwrap();
        let u = ManufacturedSolution::new("double", 2, TimeShape::Sine { frequency: 1.0 }, 2, 3.0, 0.0);
        let r = verify_ibp(&g, &pair, &u, 2.0, 4.0, &IbpOptions::default()).unwrap();
        assert_eq!(r.boundary_term, 0.0);
    }
}
