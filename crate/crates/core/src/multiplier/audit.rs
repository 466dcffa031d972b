//! Both sides of the interior local-energy bound and of the lossless bound
//! ‖u‖²_{LE¹} + sup E ≲ E(0) + ‖□u‖²_{L¹L² + LE*}.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::evolve::{time_integrals, DensityGram, ForcingSpec, ModalExpansion, Propagator, WaveField};
use crate::geometry::WarpGeometry;
use crate::spectral::{
    le_norms, le_star_from_shells, mode_energy_w_form, mode_operator, GradientStencil, NormWeights, QuadraticDensity,
    ShellAccumulator,
};

/// Truncation of the exact-time path (dropped energy fraction).
const EXACT_TRUNCATION: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeBoundAudit {
    /// ∫∫ x^{-2m-1}(∂ₓu)² + x^{-1}a^{-2}|∂_ω u|² + x^{-2m-1}(∂ₜu)² + x^{-2m-3}u² dV dt.
    pub lhs_local: f64,
    /// E(0) + ∫∫ |□u|(|∂u| + a^{-1}|u|) dV dt.
    pub rhs_local: f64,
    pub ratio_local: f64,
    pub le1: f64,
    pub sup_energy: f64,
    pub energy0: f64,
    pub forcing_l1l2: f64,
    pub forcing_le_star: f64,
    /// min of the two: an upper bound for the sum-space norm.
    pub forcing_norm: f64,
    pub lhs_positive: f64,
    pub rhs_positive: f64,
    pub ratio_positive: f64,
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn require_positive_wall(geom: &WarpGeometry) -> Result<()> {
    if geom.x0() <= 0.0 {
        return Err(Error::invalid(
            "x0",
            format!("the local-energy bound needs x0 > 0, got {}", geom.x0()),
        ));
    }
    Ok(())
}

fn assemble(
    lhs_local: f64,
    pairing: f64,
    le1: f64,
    sup_energy: f64,
    energy0: f64,
    l1l2: f64,
    le_star: f64,
) -> LeBoundAudit {
    let forcing_norm = l1l2.min(le_star);
    let rhs_local = energy0 + pairing;
    let lhs_positive = le1 * le1 + sup_energy;
    let rhs_positive = energy0 + forcing_norm * forcing_norm;
    LeBoundAudit {
        lhs_local,
        rhs_local,
        ratio_local: ratio(lhs_local, rhs_local),
        le1,
        sup_energy,
        energy0,
        forcing_l1l2: l1l2,
        forcing_le_star: le_star,
        forcing_norm,
        lhs_positive,
        rhs_positive,
        ratio_positive: ratio(lhs_positive, rhs_positive),
    }
}

/// Audit a sampled history (trapezoid in time). `forcing` is the g of
/// ẅ + P w = g that produced the history, g = -a·□u.
pub fn le_bound_audit(
    history: &[WaveField],
    geom: &WarpGeometry,
    forcing: Option<&ForcingSpec>,
) -> Result<LeBoundAudit> {
    require_positive_wall(geom)?;
    let first = history.first().ok_or(Error::EmptyHistory)?;
    let grid = first.grid;
    if grid.x_left != geom.x0() {
        return Err(Error::invalid("history", "grid must start at the wall x0"));
    }
    if history
        .iter()
        .any(|f| f.grid != grid || f.modes.len() != first.modes.len())
    {
        return Err(Error::invalid(
            "history",
            "all samples must share one grid and mode list",
        ));
    }
    if let Some(spec) = forcing {
        spec.validate(first)?;
    }
    let weights = NormWeights::new(&grid, geom);
    let stencil = GradientStencil::new(&grid, geom);
    let a_nodes: Vec<f64> = grid.nodes().iter().map(|&x| geom.a(x)).collect();
    let a_edges: Vec<f64> = (0..grid.n_edges()).map(|e| geom.a(grid.edge_midpoint(e))).collect();
    let ops = first
        .modes
        .iter()
        .map(|m| mode_operator(grid, geom, m.mode.l))
        .collect::<Result<Vec<_>>>()?;
    let local: Vec<QuadraticDensity> = first
        .modes
        .iter()
        .map(|m| QuadraticDensity::interior_local(&grid, geom, &m.mode))
        .collect();

    let h = grid.h;
    let mut star = ShellAccumulator::new(weights.clone());
    let mut energies = Vec::with_capacity(history.len());
    let mut samples = Vec::with_capacity(history.len());
    for field in history {
        let g = forcing.map(|f| f.values_at(field, field.time));
        let mut energy = 0.0;
        let mut lhs = 0.0;
        let mut pairing = 0.0;
        let mut f_sq = 0.0;
        let mut shells = vec![0.0; weights.n_shells];
        for (k, (state, op)) in field.modes.iter().zip(&ops).enumerate() {
            let mult = state.mode.multiplicity as f64;
            energy += mult * mode_energy_w_form(op, state);
            lhs += mult * local[k].total(&stencil, state);
            let Some(g) = &g else { continue };
            let grad = stencil.apply(&state.w);
            for i in 0..state.len() {
                let gi = g[k][i].norm_sqr();
                f_sq += mult * h * gi;
                shells[weights.node_shell[i]] += mult * h * gi;
                if gi == 0.0 {
                    continue;
                }
                let a = a_nodes[i];
                let ux_sq =
                    0.5 * (grad[i].norm_sqr() / a_edges[i].powi(2) + grad[i + 1].norm_sqr() / a_edges[i + 1].powi(2));
                let u_sq = state.w[i].norm_sqr() / (a * a);
                let du = (state.w_t[i].norm_sqr() / (a * a) + ux_sq + state.mode.sigma_sq * u_sq / (a * a)).sqrt();
                // |F| dV (|∂u| + a^{-1}|u|) with |F| = |g|/a and dV = a²h.
                pairing += mult * h * a * a * (gi.sqrt() / a) * (du + u_sq.sqrt() / a);
            }
        }
        star.push(field.time, shells);
        energies.push(energy);
        samples.push((field.time, lhs, pairing, f_sq.sqrt()));
    }
    let trapezoid = |pick: fn(&(f64, f64, f64, f64)) -> f64| -> f64 {
        samples
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (pick(&w[0]) + pick(&w[1])))
            .sum()
    };
    let lhs_local = trapezoid(|s| s.1);
    let pairing = trapezoid(|s| s.2);
    let l1l2 = trapezoid(|s| s.3);
    let le_star = le_star_from_shells(star.totals());
    let le1 = le_norms(history, geom)?.le1;
    let sup_energy = energies.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(assemble(
        lhs_local,
        pairing,
        le1,
        sup_energy,
        energies[0],
        l1l2,
        le_star,
    ))
}

struct ExactParts {
    energy0: f64,
    le1: f64,
    lhs_local: Option<f64>,
}

fn exact_parts(prop: &Propagator, data: &WaveField, t: f64, with_local: bool) -> Result<ExactParts> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::invalid("T", format!("need T > 0, got {t}")));
    }
    let grid = *prop.grid();
    let geom = *prop.geometry();
    let weights = NormWeights::new(&grid, &geom);
    let stencil = GradientStencil::new(&grid, &geom);
    let mut energy0 = 0.0;
    let mut shells = vec![0.0; weights.n_shells];
    let mut lhs = 0.0;
    for spec in prop.to_spectral(data)? {
        let basis = prop.basis(spec.mode.l)?;
        let mult = spec.mode.multiplicity as f64;
        energy0 += mult * spec.energy(&basis);
        let exp = ModalExpansion::new(Arc::clone(&basis), &spec, EXACT_TRUNCATION)?;
        let le1 = DensityGram::new(
            &exp,
            &QuadraticDensity::le1(&grid, &geom, &spec.mode),
            &stencil,
            Some(&weights),
        );
        for (s, v) in shells.iter_mut().zip(time_integrals(&exp, &le1, t)) {
            *s += mult * v;
        }
        if with_local {
            let gram = DensityGram::new(
                &exp,
                &QuadraticDensity::interior_local(&grid, &geom, &spec.mode),
                &stencil,
                None,
            );
            lhs += mult * time_integrals(&exp, &gram, t)[0];
        }
    }
    Ok(ExactParts {
        energy0,
        le1: crate::spectral::le_from_shells(&shells),
        lhs_local: with_local.then_some(lhs),
    })
}

/// Homogeneous audit over [t₀, t₀ + T] with exact time integrals. Energy is
/// conserved by the propagator, so sup E = E(0).
pub fn le_bound_audit_exact(prop: &Propagator, data: &WaveField, t: f64) -> Result<LeBoundAudit> {
    require_positive_wall(prop.geometry())?;
    let p = exact_parts(prop, data, t, true)?;
    Ok(assemble(
        p.lhs_local.unwrap_or(0.0),
        0.0,
        p.le1,
        p.energy0,
        p.energy0,
        0.0,
        0.0,
    ))
}

/// (‖u‖²_{LE¹[0,T]} + sup E)/E(0) for homogeneous data, on either side of the
/// wall's sign. This is the quantity whose uniform boundedness fails when x₀ < 0.
pub fn positive_ratio_exact(prop: &Propagator, data: &WaveField, t: f64) -> Result<f64> {
    let p = exact_parts(prop, data, t, false)?;
    Ok(ratio(p.le1 * p.le1 + p.energy0, p.energy0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{ForcingTerm, ModeState, TimeProfile};
    use crate::geometry::{AngularMode, WarpParams};
    use crate::multiplier::wall_bump;
    use crate::spectral::Grid;
    use crate::Complex64;

    fn setup() -> (WarpGeometry, Grid, WaveField) {
        let geom = WarpGeometry::new(WarpParams::new(1, 1.0).unwrap());
        let grid = Grid::new(1.0, 9.0, 399).unwrap();
        let a: Vec<f64> = grid.nodes().iter().map(|&x| geom.a(x)).collect();
        let u: Vec<f64> = grid.nodes().iter().map(|&x| wall_bump(1.0, 2.0, x)).collect();
        let state = ModeState::from_u(AngularMode::single_harmonic(1), &a, &u, &vec![0.0; u.len()]).unwrap();
        let field = WaveField::new(grid, 0.0, vec![state]).unwrap();
        (geom, grid, field)
    }

    #[test]
    fn zero_data_zero_forcing() {
        let (geom, grid, field) = setup();
        let zero = WaveField::new(
            grid,
            0.0,
            vec![ModeState::zeros(AngularMode::single_harmonic(1), grid.n_interior)],
        )
        .unwrap();
        let hist = vec![zero.clone(), WaveField { time: 1.0, ..zero }];
        let a = le_bound_audit(&hist, &geom, None).unwrap();
        assert_eq!(a.lhs_local, 0.0);
        assert_eq!(a.rhs_local, 0.0);
        assert_eq!(a.ratio_local, 0.0);
        let _ = field;
    }

    #[test]
    fn rejects_negative_wall() {
        let geom = WarpGeometry::new(WarpParams::new(1, -1.0).unwrap());
        let grid = Grid::new(-1.0, 2.0, 50).unwrap();
        let zero = WaveField::new(grid, 0.0, vec![ModeState::zeros(AngularMode::single_harmonic(0), 50)]).unwrap();
        assert!(le_bound_audit(&[zero], &geom, None).is_err());
    }

    #[test]
    fn sampled_and_exact_paths_agree() {
        let (geom, grid, field) = setup();
        let prop = Propagator::new(geom, grid).unwrap();
        let t = 4.0;
        let n = 800;
        let hist: Vec<WaveField> = (0..=n)
            .map(|k| prop.evolve_to(&field, t * k as f64 / n as f64).unwrap())
            .collect();
        let sampled = le_bound_audit(&hist, &geom, None).unwrap();
        let exact = le_bound_audit_exact(&prop, &field, t).unwrap();
        assert!((sampled.lhs_local - exact.lhs_local).abs() < 1e-3 * exact.lhs_local);
        assert!((sampled.le1 - exact.le1).abs() < 1e-3 * exact.le1);
        assert!((sampled.energy0 - exact.energy0).abs() < 1e-12 * exact.energy0);
        assert!((exact.ratio_positive - positive_ratio_exact(&prop, &field, t).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn forcing_norms_of_a_constant_profile() {
        // g = a·(indicator-like bump) constant in time: L¹L² = T‖g‖, and the pairing is nonnegative.
        let (geom, grid, field) = setup();
        let profile: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&x| Complex64::new(wall_bump(1.0, 1.5, x), 0.0))
            .collect();
        let norm = (grid.h * profile.iter().map(|c| c.norm_sqr()).sum::<f64>()).sqrt();
        let spec = ForcingSpec::Separable(vec![ForcingTerm {
            mode_index: 0,
            profile,
            time: TimeProfile::Constant,
        }]);
        let hist: Vec<WaveField> = (0..=10)
            .map(|k| WaveField {
                time: 0.2 * k as f64,
                ..field.clone()
            })
            .collect();
        let a = le_bound_audit(&hist, &geom, Some(&spec)).unwrap();
        assert!((a.forcing_l1l2 - 2.0 * norm).abs() < 1e-12);
        assert!(a.forcing_norm <= a.forcing_l1l2);
        assert!(a.rhs_local > a.energy0);
    }
}
