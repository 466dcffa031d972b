//! The sign of x₀ decides everything: a frequency-indexed family of packets
//! near a wall at x₀ > 0 keeps (‖u‖²_{LE¹} + sup E)/E(0) bounded, while
//! cutoff quasimodes for x₀ < 0 drive it up with T.

use num_complex::Complex64;

use super::audit::{le_bound_audit_exact, positive_ratio_exact};
use crate::error::{Error, Result};
use crate::evolve::{quasimode_data, ModeState, Propagator, WaveField};
use crate::geometry::{AngularMode, WarpGeometry, WarpParams};
use crate::quasimode::{build_quasimode, default_cutoff};
use crate::spectral::Grid;

/// exp(-1/(1 - r²)) with r = (x - center)/radius, zero for |r| ≥ 1.
pub fn compact_bump(center: f64, radius: f64, x: f64) -> f64 {
    let r = (x - center) / radius;
    if r.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - r * r)).exp()
    }
}

/// w = b(x)e^{iωx}, ∂ₜw = -iω w: a packet with carrier frequency ω.
pub fn frequency_packet(grid: &Grid, l: usize, center: f64, radius: f64, omega: f64) -> Result<WaveField> {
    let w: Vec<Complex64> = grid
        .nodes()
        .iter()
        .map(|&x| Complex64::from_polar(compact_bump(center, radius, x), omega * x))
        .collect();
    let w_t = w.iter().map(|v| Complex64::new(0.0, -omega) * v).collect();
    WaveField::new(
        *grid,
        0.0,
        vec![ModeState::new(AngularMode::single_harmonic(l), w, w_t)?],
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationOptions {
    pub m: u32,
    /// Wall x₀ > 0 side.
    pub positive_x0: f64,
    pub positive_l: usize,
    pub positive_h: f64,
    pub positive_x_max: f64,
    pub center: f64,
    pub radius: f64,
    pub omegas: Vec<f64>,
    /// Wall x₀ < 0 side.
    pub negative_x0: f64,
    pub negative_ls: Vec<usize>,
    pub negative_h: f64,
    pub negative_x_max: f64,
    pub negative_t: f64,
}

impl Default for BifurcationOptions {
    fn default() -> Self {
        BifurcationOptions {
            m: 1,
            positive_x0: 1.0,
            positive_l: 0,
            positive_h: 0.01,
            positive_x_max: 21.0,
            center: 2.5,
            radius: 1.2,
            omegas: (0..7).map(|k| 2f64.powi(k)).collect(),
            negative_x0: -1.0,
            negative_ls: vec![20, 40, 60],
            negative_h: 0.005,
            negative_x_max: 5.0,
            negative_t: 500.0,
        }
    }
}

impl BifurcationOptions {
    /// Last time at which the packet's leading edge has not reached X_max:
    /// X_max - (center + radius) - 1.
    pub fn positive_horizon(&self) -> f64 {
        (self.positive_x_max - self.center - self.radius - 1.0).floor()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.positive_x0 > 0.0) {
            return Err(Error::invalid("positive_x0", "must be > 0"));
        }
        if !(self.negative_x0 < 0.0) {
            return Err(Error::invalid("negative_x0", "must be < 0"));
        }
        if self.center - self.radius <= self.positive_x0 {
            return Err(Error::invalid("center", "packet must sit strictly inside (x0, ∞)"));
        }
        if !(self.positive_horizon() > 0.0) {
            return Err(Error::DomainTooShort {
                x_max: self.positive_x_max,
                required: self.center + self.radius + 2.0,
            });
        }
        if self.omegas.is_empty() || self.negative_ls.is_empty() {
            return Err(Error::invalid("family", "need at least one ω and one l"));
        }
        if !(self.negative_t > 0.0) {
            return Err(Error::invalid("negative_t", "must be > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositiveRow {
    pub omega: f64,
    pub ratio: f64,
    pub ratio_local: f64,
    pub le1: f64,
    pub energy0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativeRow {
    pub l: usize,
    pub tau: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BifurcationReport {
    pub positive_t: f64,
    pub positive: Vec<PositiveRow>,
    pub negative: Vec<NegativeRow>,
    pub positive_max: f64,
    /// max/min of the positive-side ratio.
    pub positive_spread: f64,
    pub negative_min: f64,
    pub negative_max: f64,
    /// Smallest negative-side ratio over the positive-side maximum.
    pub contrast: f64,
}

pub fn bifurcation(opts: &BifurcationOptions) -> Result<BifurcationReport> {
    opts.validate()?;
    let n_of = |x0: f64, x_max: f64, h: f64| ((x_max - x0) / h).round() as usize - 1;

    let geom = WarpGeometry::new(WarpParams::new(opts.m, opts.positive_x0)?);
    let n = n_of(opts.positive_x0, opts.positive_x_max, opts.positive_h);
    let grid = Grid::new(opts.positive_x0, opts.positive_x_max, n)?;
    let prop = Propagator::new(geom, grid)?;
    let positive_t = opts.positive_horizon();
    let mut positive = Vec::with_capacity(opts.omegas.len());
    for &omega in &opts.omegas {
        let data = frequency_packet(&grid, opts.positive_l, opts.center, opts.radius, omega)?;
        let audit = le_bound_audit_exact(&prop, &data, positive_t)?;
        positive.push(PositiveRow {
            omega,
            ratio: audit.ratio_positive,
            ratio_local: audit.ratio_local,
            le1: audit.le1,
            energy0: audit.energy0,
        });
    }

    let geom = WarpGeometry::new(WarpParams::new(opts.m, opts.negative_x0)?);
    let cutoff = default_cutoff(opts.negative_x0)?;
    let gi = Grid::new(opts.negative_x0, 0.0, n_of(opts.negative_x0, 0.0, opts.negative_h))?;
    let ge = Grid::new(
        opts.negative_x0,
        opts.negative_x_max,
        n_of(opts.negative_x0, opts.negative_x_max, opts.negative_h),
    )?;
    let prop = Propagator::new(geom, ge)?;
    let mut negative = Vec::with_capacity(opts.negative_ls.len());
    for &l in &opts.negative_ls {
        let qm = build_quasimode(&geom, l, &cutoff, &gi, &ge)?;
        let data = quasimode_data(&qm)?;
        negative.push(NegativeRow {
            l,
            tau: qm.tau(),
            ratio: positive_ratio_exact(&prop, &data, opts.negative_t)?,
        });
    }

    let pos = positive.iter().map(|r| r.ratio);
    let positive_max = pos.clone().fold(f64::NEG_INFINITY, f64::max);
    let positive_min = pos.fold(f64::INFINITY, f64::min);
    let negative_min = negative.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let negative_max = negative.iter().map(|r| r.ratio).fold(f64::NEG_INFINITY, f64::max);
    Ok(BifurcationReport {
        positive_t,
        positive,
        negative,
        positive_max,
        positive_spread: positive_max / positive_min,
        negative_min,
        negative_max,
        contrast: negative_min / positive_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packet_shape() {
        let grid = Grid::new(1.0, 5.0, 399).unwrap();
        let f = frequency_packet(&grid, 0, 2.5, 1.2, 8.0).unwrap();
        let m = &f.modes[0];
        for (i, x) in grid.nodes().iter().enumerate() {
            assert!((m.w[i].norm() - compact_bump(2.5, 1.2, *x)).abs() < 1e-15);
            assert!((m.w_t[i] - Complex64::new(0.0, -8.0) * m.w[i]).norm() < 1e-15);
        }
        assert_eq!(compact_bump(2.5, 1.2, 1.3), 0.0);
    }

    #[test]
    fn options_validation() {
        let mut o = BifurcationOptions::default();
        assert_eq!(o.positive_horizon(), 16.0);
        o.positive_x_max = 5.0;
        assert!(o.validate().is_err());
        let o = BifurcationOptions {
            positive_x0: -0.5,
            ..BifurcationOptions::default()
        };
        assert!(o.validate().is_err());
    }
}
