//! Cutoff quasimodes on the trapped side (x₀ < 0): the lowest Dirichlet
//! eigenfunction ψ of P_l on (x₀, 0), cut off near the top of the potential
//! barrier, u = χψ/‖χψ‖, together with its residual and localization data.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{bracket_hypotheses_hold, AngularMode, WarpGeometry};
use crate::jet::Jet;
use crate::smooth::smooth_step;
use crate::spectral::{eigen_lowest, mode_operator, quadrature_hk, quadrature_l2, EigenPair, Grid};

/// Samples used when checking monotonicity of V_l on [x₀, x₀/2].
const MONOTONICITY_SAMPLES: usize = 2000;

/// Quantities below this are treated as floating-point noise in decay fits.
pub const FIT_FLOOR: f64 = 1e-14;

/// χ ≡ 1 on [x₀, plateau_end], χ ≡ 0 on [support_end, 0], smooth and
/// nonincreasing in between.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CutoffProfile {
    pub x0: f64,
    pub plateau_end: f64,
    pub support_end: f64,
}

impl CutoffProfile {
    pub fn new(x0: f64, plateau_end: f64, support_end: f64) -> Result<Self> {
        if !(x0 < plateau_end && plateau_end < support_end && support_end < 0.0) {
            return Err(Error::invalid(
                "cutoff",
                format!("need x0 < plateau_end < support_end < 0, got {x0}, {plateau_end}, {support_end}"),
            ));
        }
        if plateau_end <= 0.5 * x0 {
            return Err(Error::invalid(
                "cutoff",
                format!("plateau must extend past x0/2 = {}, got {plateau_end}", 0.5 * x0),
            ));
        }
        Ok(CutoffProfile {
            x0,
            plateau_end,
            support_end,
        })
    }

    /// χ and its first four derivatives at x.
    pub fn jet(&self, x: f64) -> Jet {
        let width = self.support_end - self.plateau_end;
        let s = (Jet::variable(x) - self.plateau_end) / width;
        1.0 - smooth_step(s)
    }

    pub fn value(&self, x: f64) -> f64 {
        self.jet(x).value()
    }

    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        self.jet(x).d[order]
    }
}

/// χ ≡ 1 on [x₀, 0.4x₀], χ ≡ 0 on [0.1x₀, 0].
pub fn default_cutoff(x0: f64) -> Result<CutoffProfile> {
    if !(x0 < 0.0) {
        return Err(Error::invalid("x0", format!("cutoff quasimodes need x0 < 0, got {x0}")));
    }
    CutoffProfile::new(x0, 0.4 * x0, 0.1 * x0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BracketCheck {
    pub l: usize,
    pub v_at_x0: f64,
    pub v_at_half: f64,
    /// V_l(3x₀/4) + 16π²x₀^{-2}: the square-well comparison bound.
    pub v_at_threequarters_bound: f64,
    pub tau_sq: f64,
    /// V_l strictly increasing on [x₀, x₀/2] and V_l(x₀/2) < V_l(0).
    pub monotone: bool,
    pub in_bracket: bool,
    pub below_square_well: bool,
    /// V_l(3x₀/4) + 16π²x₀^{-2} ≤ V_l(x₀/2): the square-well bound alone already
    /// gives the upper end of the bracket. Holds only for l well past monotonicity.
    pub comparison_holds: bool,
}

impl BracketCheck {
    /// The bracket result applies (hypotheses hold) and was confirmed.
    pub fn passed(&self) -> bool {
        self.monotone && self.in_bracket && self.below_square_well
    }

    /// l is below the monotonicity threshold; a failed bracket is then not a defect.
    pub fn below_threshold(&self) -> bool {
        !self.monotone
    }
}

fn check_interval_grid(geom: &WarpGeometry, grid: &Grid) -> Result<()> {
    let x0 = geom.x0();
    if x0 >= 0.0 {
        return Err(Error::invalid(
            "x0",
            format!("quasimodes live on the trapped side x0 < 0, got {x0}"),
        ));
    }
    if (grid.x_left - x0).abs() > 1e-12 * x0.abs() || grid.x_right.abs() > 1e-9 * x0.abs() {
        return Err(Error::invalid(
            "grid_interval",
            format!("expected a grid on ({x0}, 0), got ({}, {})", grid.x_left, grid.x_right),
        ));
    }
    Ok(())
}

/// Lowest Dirichlet eigenvalue of P_l on (x₀, 0) against [V_l(x₀), V_l(x₀/2)]
/// and the square-well bound.
pub fn bracket_check(geom: &WarpGeometry, l: usize, grid_interval: &Grid) -> Result<BracketCheck> {
    check_interval_grid(geom, grid_interval)?;
    let x0 = geom.x0();
    let op = mode_operator(*grid_interval, geom, l)?;
    let tau_sq = eigen_lowest(&op, 1)?[0].lambda;
    let v_at_x0 = geom.potential(l, x0);
    let v_at_half = geom.potential(l, 0.5 * x0);
    let bound = geom.potential(l, 0.75 * x0) + 16.0 * PI * PI / (x0 * x0);
    Ok(BracketCheck {
        l,
        v_at_x0,
        v_at_half,
        v_at_threequarters_bound: bound,
        tau_sq,
        monotone: bracket_hypotheses_hold(geom, l, MONOTONICITY_SAMPLES),
        in_bracket: v_at_x0 <= tau_sq && tau_sq <= v_at_half,
        below_square_well: tau_sq <= bound,
        comparison_holds: bound <= v_at_half,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quasimode {
    pub mode: AngularMode,
    pub tau_sq: f64,
    /// Lowest eigenpair ψ on the interval grid.
    pub psi: EigenPair,
    /// u = χψ/‖χψ‖ on the interval grid.
    pub u_interval: Vec<f64>,
    /// u extended by zero onto the evolution grid.
    pub u: Vec<f64>,
    /// ‖(P_l - τ²)u‖_{H^k} for k = 0, 1, 2 on the interval grid.
    pub residual_hk: [f64; 3],
    /// ‖1_{supp(1-χ)}ψ‖ / ‖ψ‖.
    pub agmon_ratio: f64,
    /// ‖χψ‖ / ‖ψ‖.
    pub cutoff_mass: f64,
    pub cutoff: CutoffProfile,
    pub grid_interval: Grid,
    pub grid_extended: Grid,
}

impl Quasimode {
    pub fn l(&self) -> usize {
        self.mode.l
    }

    pub fn tau(&self) -> f64 {
        self.tau_sq.sqrt()
    }

    pub fn sigma(&self) -> f64 {
        self.mode.sigma()
    }

    /// (P_l - τ²)u on the interval grid.
    pub fn residual_vector(&self, geom: &WarpGeometry) -> Result<Vec<f64>> {
        let op = mode_operator(self.grid_interval, geom, self.mode.l)?;
        Ok(op
            .apply(&self.u_interval)
            .iter()
            .zip(&self.u_interval)
            .map(|(pu, u)| pu - self.tau_sq * u)
            .collect())
    }
}

pub fn build_quasimode(
    geom: &WarpGeometry,
    l: usize,
    cutoff: &CutoffProfile,
    grid_interval: &Grid,
    grid_extended: &Grid,
) -> Result<Quasimode> {
    check_interval_grid(geom, grid_interval)?;
    if !grid_extended.contains_prefix(grid_interval) {
        return Err(Error::invalid(
            "grid_extended",
            "evolution grid must share x0 and h with the interval grid and extend past 0",
        ));
    }
    if (cutoff.x0 - geom.x0()).abs() > 1e-12 * geom.x0().abs() {
        return Err(Error::invalid("cutoff", "cutoff is anchored at a different x0"));
    }
    let bracket = bracket_check(geom, l, grid_interval)?;
    if !bracket.monotone {
        return Err(Error::BelowThreshold { l });
    }

    let op = mode_operator(*grid_interval, geom, l)?;
    let psi = eigen_lowest(&op, 1)?.remove(0);
    let nodes = grid_interval.nodes();
    let chi_psi: Vec<f64> = nodes
        .iter()
        .zip(&psi.vector)
        .map(|(&x, p)| cutoff.value(x) * p)
        .collect();
    let psi_norm = quadrature_l2(grid_interval, &psi.vector);
    let chi_norm = quadrature_l2(grid_interval, &chi_psi);
    let u_interval: Vec<f64> = chi_psi.iter().map(|v| v / chi_norm).collect();

    let tail: Vec<f64> = nodes
        .iter()
        .zip(&psi.vector)
        .map(|(&x, p)| if x > cutoff.plateau_end { *p } else { 0.0 })
        .collect();
    let agmon_ratio = quadrature_l2(grid_interval, &tail) / psi_norm;

    let residual: Vec<f64> = op
        .apply(&u_interval)
        .iter()
        .zip(&u_interval)
        .map(|(pu, u)| pu - psi.lambda * u)
        .collect();
    let mut residual_hk = [0.0; 3];
    for (k, slot) in residual_hk.iter_mut().enumerate() {
        *slot = quadrature_hk(grid_interval, &residual, k)?;
    }

    let mut u = vec![0.0; grid_extended.n_interior];
    u[..u_interval.len()].copy_from_slice(&u_interval);

    Ok(Quasimode {
        mode: AngularMode::single_harmonic(l),
        tau_sq: psi.lambda,
        psi,
        u_interval,
        u,
        residual_hk,
        agmon_ratio,
        cutoff_mass: chi_norm / psi_norm,
        cutoff: *cutoff,
        grid_interval: *grid_interval,
        grid_extended: *grid_extended,
    })
}

/// Which measured quantity a decay fit uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayQuantity {
    /// ‖(P - τ²)u‖_{H^k}.
    Residual(usize),
    Agmon,
}

/// Abscissa of a decay fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Abscissa {
    Sigma,
    Tau,
}

/// Least-squares fit of log(quantity) against the abscissa.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// (abscissa, ln quantity) pairs used in the fit.
    pub samples: Vec<(f64, f64)>,
    /// Samples dropped because the quantity was below the floating-point floor.
    pub excluded: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fit ln q = intercept + slope·x over (x, q) pairs. Requires at least five
/// distinct abscissae above the floor and a negative slope.
pub fn fit_log_linear(points: &[(f64, f64)]) -> Result<DecayFit> {
    let (kept, excluded): (Vec<_>, Vec<_>) = points.iter().copied().partition(|&(_, q)| q >= FIT_FLOOR);
    if kept.is_empty() {
        return Err(Error::Fit("every sample is below the floating-point floor".into()));
    }
    let mut xs: Vec<f64> = kept.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 5 {
        return Err(Error::Fit(format!(
            "need at least 5 distinct abscissae, got {}",
            xs.len()
        )));
    }
    let samples: Vec<(f64, f64)> = kept.iter().map(|&(x, q)| (x, q.ln())).collect();
    let n = samples.len() as f64;
    let mx = samples.iter().map(|p| p.0).sum::<f64>() / n;
    let my = samples.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = samples.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    if !(slope < 0.0) {
        return Err(Error::Fit(format!("fitted slope {slope} is not negative")));
    }
    Ok(DecayFit {
        samples,
        excluded: excluded
            .iter()
            .map(|&(x, q)| (x, q.max(f64::MIN_POSITIVE).ln()))
            .collect(),
        slope,
        intercept,
        r_squared,
    })
}

pub fn fit_exponential_rate(quasimodes: &[Quasimode], quantity: DecayQuantity, abscissa: Abscissa) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> = quasimodes
        .iter()
        .map(|q| {
            let x = match abscissa {
                Abscissa::Sigma => q.sigma(),
                Abscissa::Tau => q.tau(),
            };
            let y = match quantity {
                DecayQuantity::Residual(k) => q.residual_hk[k.min(2)],
                DecayQuantity::Agmon => q.agmon_ratio,
            };
            (x, y)
        })
        .collect();
    if let DecayQuantity::Residual(k) = quantity {
        if k > 2 {
            return Err(Error::invalid("k", format!("residual orders are 0, 1, 2; got {k}")));
        }
    }
    fit_log_linear(&points)
}
