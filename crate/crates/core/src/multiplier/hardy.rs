use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{WarpGeometry, WarpParams};
use crate::smooth::smooth_step_value;
use crate::spectral::Grid;

/// Suite constant C_H: 1.25 × the largest ratio seen on `hardy_corpus(HARDY_SEED, HARDY_CORPUS_SIZE)`.
pub const HARDY_CONSTANT: f64 = 1.25 * 0.291315;
pub const HARDY_SEED: u64 = 0x4841_5244;
pub const HARDY_CORPUS_SIZE: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyResult {
    /// ∫ a^{-2}u² dV.
    pub lhs: f64,
    /// ∫ (∂ₓu)² dV.
    pub rhs: f64,
    pub ratio: f64,
    /// u ≡ 0: ratio reported as 0.
    pub degenerate: bool,
    pub within_bound: bool,
}

/// Both sides of the Hardy inequality for u at the interior nodes of `grid`
/// (zero at both ends). dV = a²dx, so the left side is Σ h u² and the right
/// side uses edge differences weighted by a² at the midpoints.
pub fn hardy_check(geom: &WarpGeometry, grid: &Grid, u: &[f64]) -> Result<HardyResult> {
    if geom.x0() <= 0.0 {
        return Err(Error::invalid(
            "x0",
            format!("the Hardy inequality is anchored at x0 > 0, got {}", geom.x0()),
        ));
    }
    if grid.x_left != geom.x0() {
        return Err(Error::invalid("grid", "grid must start at the wall x0"));
    }
    if u.len() != grid.n_interior {
        return Err(Error::invalid(
            "u",
            format!("{} values for {} interior nodes", u.len(), grid.n_interior),
        ));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("u", "non-finite values"));
    }
    let h = grid.h;
    let lhs = h * u.iter().map(|v| v * v).sum::<f64>();
    let mut rhs = 0.0;
    for e in 0..grid.n_edges() {
        let right = if e < u.len() { u[e] } else { 0.0 };
        let left = if e > 0 { u[e - 1] } else { 0.0 };
        let d = (right - left) / h;
        rhs += h * geom.a(grid.edge_midpoint(e)).powi(2) * d * d;
    }
    let degenerate = lhs == 0.0 && rhs == 0.0;
    let ratio = if degenerate { 0.0 } else { lhs / rhs };
    Ok(HardyResult {
        lhs,
        rhs,
        ratio,
        degenerate,
        within_bound: ratio <= HARDY_CONSTANT,
    })
}

/// One randomized admissible profile: a sum of smooth bumps anchored at the wall.
#[derive(Debug, Clone, PartialEq)]
pub struct HardySample {
    pub geom: WarpGeometry,
    pub grid: Grid,
    pub u: Vec<f64>,
}

/// s·(1 - S(2s/L - 1)), s = x - x₀: vanishes at the wall, supported in [x₀, x₀ + L].
pub fn wall_bump(x0: f64, support: f64, x: f64) -> f64 {
    let s = x - x0;
    if s <= 0.0 || s >= support {
        return 0.0;
    }
    s * (1.0 - smooth_step_value(2.0 * s / support - 1.0))
}

/// Randomized corpus: x₀ ∈ (0.05, 3), m ∈ {1,2,3}, 1–4 bumps with random
/// support lengths spanning 0.2 to 40 and random signs and oscillation.
pub fn hardy_corpus(seed: u64, count: usize) -> Result<Vec<HardySample>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let m = rng.gen_range(1..=3u32);
        let x0 = rng.gen_range(0.05..3.0);
        let geom = WarpGeometry::new(WarpParams::new(m, x0)?);
        let bumps: Vec<(f64, f64, f64)> = (0..rng.gen_range(1..=4))
            .map(|_| {
                let support = 10f64.powf(rng.gen_range(-0.7..1.6));
                (support, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..6.0))
            })
            .collect();
        let span = bumps.iter().map(|b| b.0).fold(0.0, f64::max);
        let n = 4000;
        let grid = Grid::new(x0, x0 + span * 1.05, n)?;
        let u = grid
            .nodes()
            .iter()
            .map(|&x| {
                bumps
                    .iter()
                    .map(|&(l, amp, k)| amp * wall_bump(x0, l, x) * (1.0 + 0.5 * (k * (x - x0) / l).sin()))
                    .sum()
            })
            .collect();
        out.push(HardySample { geom, grid, u });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nonpositive_wall() {
        let geom = WarpGeometry::new(WarpParams::new(1, -1.0).unwrap());
        let grid = Grid::new(-1.0, 1.0, 10).unwrap();
        assert!(hardy_check(&geom, &grid, &[0.0; 10]).is_err());
    }

    #[test]
    fn zero_is_degenerate() {
        let geom = WarpGeometry::new(WarpParams::new(1, 1.0).unwrap());
        let grid = Grid::new(1.0, 3.0, 50).unwrap();
        let r = hardy_check(&geom, &grid, &[0.0; 50]).unwrap();
        assert!(r.degenerate && r.ratio == 0.0 && r.within_bound);
    }

    #[test]
    fn linear_ramp_matches_quadrature_oracle() {
        // u = x - x0 on [x0, x0 + 1], smoothly cut off: compare against a fine midpoint rule.
        let geom = WarpGeometry::new(WarpParams::new(1, 0.5).unwrap());
        let grid = Grid::new(0.5, 2.0, 2999).unwrap();
        let u: Vec<f64> = grid.nodes().iter().map(|&x| wall_bump(0.5, 1.0, x)).collect();
        let r = hardy_check(&geom, &grid, &u).unwrap();
        let n = 200_000;
        let h = 1.0 / n as f64;
        let (mut lhs, mut rhs) = (0.0, 0.0);
        for i in 0..n {
            let x = 0.5 + (i as f64 + 0.5) * h;
            let v = wall_bump(0.5, 1.0, x);
            let d = (wall_bump(0.5, 1.0, x + 1e-6) - wall_bump(0.5, 1.0, x - 1e-6)) / 2e-6;
            lhs += h * v * v;
            rhs += h * geom.a(x).powi(2) * d * d;
        }
        assert!((r.lhs - lhs).abs() < 1e-5 * lhs);
        assert!((r.rhs - rhs).abs() < 1e-4 * rhs);
        assert!(r.within_bound);
    }
}
