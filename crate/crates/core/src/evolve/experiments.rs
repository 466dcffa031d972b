//! Local-energy experiments on top of the exact propagator: energy and E_R
//! histories, the Duhamel comparison against phase-rotated data, and LE¹ growth.

use std::f64::consts::{PI, SQRT_2};
use std::sync::Arc;

use num_complex::Complex64;

use super::field::{ModeState, WaveField};
use super::gram::{densities_at, time_integrals, DensityGram, ModalExpansion};
use super::propagator::{h_distance_sq, ModeBasis, Propagator, SpectralMode};
use crate::error::{Error, Result};
use crate::quasimode::Quasimode;
use crate::spectral::{dbk_norm, le_from_shells, mode_energy_w_form, GradientStencil, NormWeights, QuadraticDensity};

/// How the artificial wall at X_max is justified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DomainPolicy {
    /// X_max ≥ R + T_max: the wall is causally invisible on the local region.
    Causal,
    /// The energy beyond X_max - margin stays below `tolerance`·E at every report time.
    LeakageCertified { margin: f64, tolerance: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionOptions {
    pub t_max: f64,
    pub r: f64,
    /// Step of the E_R scan; defaults to min(h, 2π/(20ω_q)) with ω_q the
    /// frequency below which all but 10⁻⁴ of the energy lies.
    pub scan_dt: Option<f64>,
    /// Dropped energy fraction of the expansion used by the E_R scan. The scanned
    /// E_R/E is then accurate to 2·scan_truncation^{1/2}.
    pub scan_truncation: f64,
    /// Uniform report rows over [0, t_max] (checkpoint times are added).
    pub report_points: usize,
    /// Horizons at which LE¹[0, T] is evaluated.
    pub checkpoints: Vec<f64>,
    pub domain: DomainPolicy,
    /// Dropped energy fraction allowed when truncating the modal expansion.
    pub truncation: f64,
}

impl EvolutionOptions {
    pub fn new(t_max: f64, r: f64) -> Self {
        EvolutionOptions {
            t_max,
            r,
            scan_dt: None,
            scan_truncation: 1e-10,
            report_points: 200,
            checkpoints: vec![t_max],
            domain: DomainPolicy::Causal,
            truncation: 1e-14,
        }
    }

    fn validate(&self, grid_left: f64) -> Result<()> {
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::invalid("T_max", format!("need T_max > 0, got {}", self.t_max)));
        }
        if !(self.r > grid_left) {
            return Err(Error::invalid(
                "R",
                format!("need R > x0 = {grid_left}, got {}", self.r),
            ));
        }
        if !(self.truncation >= 0.0
            && self.truncation < 1.0
            && self.scan_truncation >= 0.0
            && self.scan_truncation < 1.0)
        {
            return Err(Error::invalid("truncation", "truncation fractions must lie in [0, 1)"));
        }
        if self.report_points == 0 {
            return Err(Error::invalid("report_points", "need at least one report interval"));
        }
        if let Some(dt) = self.scan_dt {
            if !(dt > 0.0) {
                return Err(Error::invalid("scan_dt", format!("need scan_dt > 0, got {dt}")));
            }
        }
        if self.checkpoints.iter().any(|&c| !(c > 0.0 && c <= self.t_max)) {
            return Err(Error::invalid("checkpoints", "checkpoints must lie in (0, T_max]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionReport {
    pub times: Vec<f64>,
    /// E(t) recomputed from the reconstructed grid state.
    pub energy: Vec<f64>,
    pub local_energy: Vec<f64>,
    /// LE¹[0, t] at checkpoint rows.
    pub le1_running: Vec<Option<f64>>,
    /// ‖U(t) - e^{-iτt}U(0)‖_{H_{x₀}} when a comparison frequency is given.
    pub duhamel_gap: Vec<Option<f64>>,
    /// First scanned t with E_R(t) < ½E_R(0).
    pub t_confinement: Option<f64>,
    pub local_ratio_min: f64,
    pub scan_dt: f64,
    pub scan_samples: usize,
    pub data_h_norm: f64,
    /// Largest |E(t) - E(0)|/E(0) over report rows.
    pub energy_drift: f64,
    /// Largest fraction of E beyond X_max - margin over report rows (0 for causal runs).
    pub leakage: f64,
    pub truncated_fraction: f64,
    pub scan_truncated_fraction: f64,
    pub kept_components: usize,
    pub le1_checkpoints: Vec<(f64, f64)>,
}

impl EvolutionReport {
    pub fn local_ratio(&self) -> Vec<f64> {
        let e0 = self.local_energy[0];
        self.local_energy
            .iter()
            .map(|e| if e0 > 0.0 { e / e0 } else { 0.0 })
            .collect()
    }
}

struct ModeRun {
    basis: Arc<ModeBasis>,
    spec: SpectralMode,
    exp: ModalExpansion,
    scan: ModalExpansion,
    mult: f64,
}

/// Smallest ω_k such that components above it carry at most `tail` of the energy.
fn quantile_frequency(basis: &ModeBasis, spec: &SpectralMode, tail: f64) -> f64 {
    let energies = spec.component_energies(basis);
    let total: f64 = energies.iter().sum();
    let mut acc = 0.0;
    for (k, e) in energies.iter().enumerate() {
        acc += e;
        if acc >= (1.0 - tail) * total {
            return basis.lambda(k).max(0.0).sqrt();
        }
    }
    basis.basis.lambdas.last().map_or(0.0, |l| l.max(0.0).sqrt())
}

fn report_times(opts: &EvolutionOptions) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=opts.report_points)
        .map(|i| opts.t_max * i as f64 / opts.report_points as f64)
        .chain(opts.checkpoints.iter().copied())
        .collect();
    t.sort_by(f64::total_cmp);
    t.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * opts.t_max);
    t
}

/// Evolve homogeneous data and record energies, local energies, LE¹ at
/// checkpoints and, with `comparison_tau`, the distance to e^{-iτt}·data.
pub fn run_evolution(
    prop: &Propagator,
    data: &WaveField,
    opts: &EvolutionOptions,
    comparison_tau: Option<f64>,
) -> Result<EvolutionReport> {
    let grid = *prop.grid();
    let geom = *prop.geometry();
    opts.validate(grid.x_left)?;
    if data.modes.is_empty() {
        return Err(Error::invalid("data", "no modes to evolve"));
    }
    for m in &data.modes {
        for (x, (w, wt)) in grid.nodes().iter().zip(m.w.iter().zip(&m.w_t)) {
            if *x >= opts.r && (w.norm() > 0.0 || wt.norm() > 0.0) {
                return Err(Error::invalid(
                    "data",
                    format!("data must be supported in x < R = {}; found support at x = {x}", opts.r),
                ));
            }
        }
    }
    if let DomainPolicy::Causal = opts.domain {
        let required = opts.r + opts.t_max;
        if grid.x_right < required {
            return Err(Error::DomainTooShort {
                x_max: grid.x_right,
                required,
            });
        }
    }

    let spectra = prop.to_spectral(data)?;
    let mut runs = Vec::with_capacity(spectra.len());
    for spec in spectra {
        let basis = prop.basis(spec.mode.l)?;
        let exp = ModalExpansion::new(Arc::clone(&basis), &spec, opts.truncation)?;
        let scan = ModalExpansion::new(Arc::clone(&basis), &spec, opts.scan_truncation.max(opts.truncation))?;
        runs.push(ModeRun {
            mult: spec.mode.multiplicity as f64,
            basis,
            spec,
            exp,
            scan,
        });
    }
    let total_energy: f64 = runs.iter().map(|r| r.mult * r.spec.energy(&r.basis)).sum();
    let data_h_norm = (2.0 * total_energy).sqrt();
    let kept_components = runs.iter().map(|r| r.exp.len()).sum();
    let scan_truncated_fraction = runs.iter().map(|r| r.scan.truncated_fraction).fold(0.0, f64::max);
    let truncated_fraction = runs.iter().map(|r| r.exp.truncated_fraction).fold(0.0, f64::max);

    let weights = NormWeights::new(&grid, &geom);
    let stencil = GradientStencil::new(&grid, &geom);
    let wall_cut = match opts.domain {
        DomainPolicy::Causal => None,
        DomainPolicy::LeakageCertified { margin, .. } => Some(grid.x_right - margin),
    };
    let mut scan_grams = Vec::with_capacity(runs.len());
    let mut local_grams = Vec::with_capacity(runs.len());
    let mut wall_grams = Vec::with_capacity(runs.len());
    let mut le1_grams = Vec::with_capacity(runs.len());
    for run in &runs {
        let energy = QuadraticDensity::energy(&grid, &geom, &run.spec.mode).scaled(0.5);
        let local = energy.clone().truncated(&grid, opts.r);
        scan_grams.push(DensityGram::new(&run.scan, &local, &stencil, None));
        local_grams.push(DensityGram::new(&run.exp, &local, &stencil, None));
        wall_grams.push(wall_cut.map(|c| DensityGram::new(&run.exp, &energy.beyond(&grid, c), &stencil, None)));
        let le1 = QuadraticDensity::le1(&grid, &geom, &run.spec.mode);
        le1_grams.push(DensityGram::new(&run.exp, &le1, &stencil, Some(&weights)));
    }
    let t0 = data.time;
    let local_at = |times: &[f64], scan: bool| -> Vec<f64> {
        let mut out = vec![0.0; times.len()];
        let grams = if scan { &scan_grams } else { &local_grams };
        for (run, gram) in runs.iter().zip(grams) {
            let exp = if scan { &run.scan } else { &run.exp };
            let abs: Vec<f64> = times.iter().map(|t| t0 + t).collect();
            for (o, v) in out.iter_mut().zip(densities_at(exp, gram, &abs)) {
                *o += run.mult * v[0];
            }
        }
        out
    };

    // Fine scan of E_R.
    let omega_q = runs
        .iter()
        .map(|r| quantile_frequency(&r.basis, &r.spec, 1e-4))
        .fold(0.0, f64::max);
    let scan_dt = opts.scan_dt.unwrap_or_else(|| {
        grid.h.min(if omega_q > 0.0 {
            2.0 * PI / (20.0 * omega_q)
        } else {
            grid.h
        })
    });
    let scan_samples = (opts.t_max / scan_dt).ceil() as usize + 1;
    let e_r0 = local_at(&[0.0], true)[0];
    let mut local_ratio_min = f64::INFINITY;
    let mut t_confinement = None;
    let chunk = 2048;
    let mut start = 0;
    while start < scan_samples {
        let end = (start + chunk).min(scan_samples);
        let times: Vec<f64> = (start..end).map(|i| (i as f64 * scan_dt).min(opts.t_max)).collect();
        for (t, e) in times.iter().zip(local_at(&times, true)) {
            let ratio = if e_r0 > 0.0 { e / e_r0 } else { 0.0 };
            local_ratio_min = local_ratio_min.min(ratio);
            if t_confinement.is_none() && e < 0.5 * e_r0 {
                t_confinement = Some(*t);
            }
        }
        start = end;
    }

    let times = report_times(opts);
    let local_energy = local_at(&times, false);
    let mut energy = Vec::with_capacity(times.len());
    let mut duhamel_gap = Vec::with_capacity(times.len());
    let mut leakage = 0.0f64;
    for &t in &times {
        let mut e = 0.0;
        let mut gap_sq = 0.0;
        let mut wall = 0.0;
        for (run, wg) in runs.iter().zip(&wall_grams) {
            let moved = run.spec.at(&run.basis, t0 + t);
            let state: ModeState = moved.to_state(&run.basis);
            e += run.mult * mode_energy_w_form(&run.basis.op, &state);
            if let Some(tau) = comparison_tau {
                let phase = Complex64::from_polar(1.0, -tau * t);
                let rotated = SpectralMode {
                    mode: run.spec.mode,
                    time: t0 + t,
                    pos: run.spec.pos.iter().map(|c| c * phase).collect(),
                    vel: run.spec.vel.iter().map(|c| c * phase).collect(),
                };
                gap_sq += run.mult * h_distance_sq(&run.basis, &moved, &rotated);
            }
            if let Some(g) = wg {
                wall += run.mult * densities_at(&run.exp, g, &[t0 + t])[0][0];
            }
        }
        energy.push(e);
        duhamel_gap.push(comparison_tau.map(|_| gap_sq.max(0.0).sqrt()));
        if total_energy > 0.0 {
            leakage = leakage.max(wall / total_energy);
        }
    }
    if let DomainPolicy::LeakageCertified { tolerance, .. } = opts.domain {
        if leakage > tolerance {
            return Err(Error::WallContaminated { leakage, tolerance });
        }
    }
    let e0 = energy[0];
    let energy_drift = energy
        .iter()
        .map(|e| if e0 > 0.0 { (e - e0).abs() / e0 } else { (e - e0).abs() })
        .fold(0.0, f64::max);

    let mut le1_checkpoints = Vec::with_capacity(opts.checkpoints.len());
    for &c in &opts.checkpoints {
        let mut shells = vec![0.0; weights.n_shells];
        for (run, gram) in runs.iter().zip(&le1_grams) {
            for (s, v) in shells.iter_mut().zip(time_integrals(&run.exp, gram, c)) {
                *s += run.mult * v;
            }
        }
        le1_checkpoints.push((c, le_from_shells(&shells)));
    }
    let le1_running = times
        .iter()
        .map(|t| {
            le1_checkpoints
                .iter()
                .find(|(c, _)| (c - t).abs() <= 1e-12 * opts.t_max)
                .map(|(_, v)| *v)
        })
        .collect();

    Ok(EvolutionReport {
        times,
        energy,
        local_energy,
        le1_running,
        duhamel_gap,
        t_confinement,
        local_ratio_min,
        scan_dt,
        scan_samples,
        data_h_norm,
        energy_drift,
        leakage,
        truncated_fraction,
        scan_truncated_fraction,
        kept_components,
        le1_checkpoints,
    })
}

/// Quasimode data (w, ∂ₜw) = (u, -iτu) on the evolution grid.
pub fn quasimode_data(qm: &Quasimode) -> Result<WaveField> {
    let w: Vec<Complex64> = qm.u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let w_t: Vec<Complex64> = w.iter().map(|v| Complex64::new(0.0, -qm.tau()) * v).collect();
    WaveField::single(qm.grid_extended, ModeState::new(qm.mode, w, w_t)?)
}

/// ‖(0, (P_l - τ²)u)‖_{H_{x₀}} on the evolution grid.
pub fn quasimode_forcing_norm(prop: &Propagator, qm: &Quasimode) -> Result<f64> {
    let basis = prop.basis(qm.l())?;
    let pu = basis.op.apply(&qm.u);
    let r: f64 = pu.iter().zip(&qm.u).map(|(p, u)| (p - qm.tau_sq * u).powi(2)).sum();
    Ok((qm.mode.multiplicity as f64 * prop.grid().h * r).sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfinementReport {
    pub l: usize,
    pub tau: f64,
    pub evolution: EvolutionReport,
    /// ‖F_j‖_{H_{x₀}} with F_j = (0, (P - τ²)u).
    pub forcing_norm: f64,
    /// Time up to which E_R^{1/2} ≥ ½‖data‖ follows from gap(t) ≤ t‖F‖:
    /// (1 - 2^{-1/2})‖data‖/‖F‖.
    pub certified_time: f64,
    /// E_R^{1/2}(t) ≥ ½‖data‖_{H_{x₀}} at every scanned t.
    pub lower_bound_holds: bool,
    /// gap(t) ≤ t‖F‖ at every report row (with roundoff slack).
    pub gap_bound_holds: bool,
}

/// Homogeneous evolution of quasimode data with the Duhamel comparison.
pub fn run_confinement(prop: &Propagator, qm: &Quasimode, opts: &EvolutionOptions) -> Result<ConfinementReport> {
    if qm.grid_extended != *prop.grid() {
        return Err(Error::invalid(
            "quasimode",
            "quasimode was built on a different evolution grid",
        ));
    }
    let data = quasimode_data(qm)?;
    let evolution = run_evolution(prop, &data, opts, Some(qm.tau()))?;
    let forcing_norm = quasimode_forcing_norm(prop, qm)?;
    let d = evolution.data_h_norm;
    let certified_time = if forcing_norm > 0.0 {
        (1.0 - 1.0 / SQRT_2) * d / forcing_norm
    } else {
        f64::INFINITY
    };
    let e_half = 0.25 * d * d;
    let lower_bound_holds = evolution.local_ratio_min * evolution.local_energy[0] >= e_half;
    let slack = 1e-12 * d;
    let gap_bound_holds = evolution
        .times
        .iter()
        .zip(&evolution.duhamel_gap)
        .all(|(t, g)| g.map_or(true, |g| g <= t * forcing_norm + slack));
    Ok(ConfinementReport {
        l: qm.l(),
        tau: qm.tau(),
        evolution,
        forcing_norm,
        certified_time,
        lower_bound_holds,
        gap_bound_holds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioTrend {
    Increasing,
    Decreasing,
    Mixed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Le1GrowthRow {
    pub l: usize,
    pub tau: f64,
    pub dbk: f64,
    pub dbk_resolution_limited: bool,
    pub t_confinement: Option<f64>,
    /// (T, LE¹[0,T], ratio) for horizons T ≤ min(t_confinement, budget).
    pub samples: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Le1Growth {
    pub rows: Vec<Le1GrowthRow>,
    /// Index into `rows` of the first quasimode whose ratio exceeds A.
    pub j_star: Option<usize>,
    pub t_star: Option<f64>,
    pub threshold: f64,
    pub k: usize,
    /// Ratio trend across rows at the largest horizon they share.
    pub trend: RatioTrend,
    pub budget_exhausted: bool,
}

/// ‖u_j‖_{LE¹[0,T]} / ‖data_j‖_{D(B^k)} for each quasimode over the horizons in
/// `opts.checkpoints`, stopping the search at the first ratio above `threshold`.
pub fn le1_growth(
    prop: &Propagator,
    quasimodes: &[Quasimode],
    k: usize,
    threshold: f64,
    opts: &EvolutionOptions,
) -> Result<Le1Growth> {
    if quasimodes.windows(2).any(|w| w[1].tau_sq < w[0].tau_sq) {
        return Err(Error::invalid(
            "quasimodes",
            "quasimodes must be ordered by increasing τ",
        ));
    }
    let geom = *prop.geometry();
    let mut rows = Vec::with_capacity(quasimodes.len());
    let mut j_star = None;
    let mut t_star = None;
    for (j, qm) in quasimodes.iter().enumerate() {
        let data = quasimode_data(qm)?;
        let dbk = dbk_norm(&data, &geom, k)?;
        let report = run_evolution(prop, &data, opts, None)?;
        let limit = report.t_confinement.unwrap_or(f64::INFINITY);
        let samples: Vec<(f64, f64, f64)> = report
            .le1_checkpoints
            .iter()
            .filter(|(t, _)| *t <= limit)
            .map(|&(t, le1)| (t, le1, le1 / dbk.value))
            .collect();
        if j_star.is_none() {
            if let Some(&(t, _, _)) = samples.iter().find(|s| s.2 > threshold) {
                j_star = Some(j);
                t_star = Some(t);
            }
        }
        rows.push(Le1GrowthRow {
            l: qm.l(),
            tau: qm.tau(),
            dbk: dbk.value,
            dbk_resolution_limited: dbk.resolution_limited,
            t_confinement: report.t_confinement,
            samples,
        });
    }
    let common = rows
        .iter()
        .filter_map(|r| r.samples.last().map(|s| s.0))
        .fold(f64::INFINITY, f64::min);
    let finals: Vec<f64> = rows
        .iter()
        .filter_map(|r| r.samples.iter().rev().find(|s| s.0 <= common).map(|s| s.2))
        .collect();
    let trend = if finals.windows(2).all(|w| w[1] > w[0]) {
        RatioTrend::Increasing
    } else if finals.windows(2).all(|w| w[1] < w[0]) {
        RatioTrend::Decreasing
    } else {
        RatioTrend::Mixed
    };
    Ok(Le1Growth {
        rows,
        budget_exhausted: j_star.is_none(),
        j_star,
        t_star,
        threshold,
        k,
        trend,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{AngularMode, WarpGeometry, WarpParams};
    use crate::quasimode::{build_quasimode, default_cutoff};
    use crate::spectral::Grid;

    fn trapped(l: usize) -> (Propagator, Quasimode) {
        let geom = WarpGeometry::new(WarpParams::new(1, -1.0).unwrap());
        let gi = Grid::new(-1.0, 0.0, 199).unwrap();
        let ge = Grid::with_spacing(-1.0, gi.h, 599).unwrap();
        let qm = build_quasimode(&geom, l, &default_cutoff(-1.0).unwrap(), &gi, &ge).unwrap();
        (Propagator::new(geom, ge).unwrap(), qm)
    }

    #[test]
    fn confinement_short_run_invariants() {
        let (prop, qm) = trapped(20);
        let mut opts = EvolutionOptions::new(20.0, 1.0);
        opts.domain = DomainPolicy::LeakageCertified {
            margin: 0.5,
            tolerance: 1e-3,
        };
        opts.checkpoints = vec![5.0, 10.0, 20.0];
        let rep = run_confinement(&prop, &qm, &opts).unwrap();
        let ev = &rep.evolution;
        assert_eq!(ev.duhamel_gap[0], Some(0.0));
        assert!(ev.energy_drift < 1e-10);
        assert!(rep.gap_bound_holds);
        assert!(ev.local_ratio_min > 0.9);
        assert!(rep.lower_bound_holds);
        assert!(ev.t_confinement.is_none());
        assert_eq!(ev.le1_running.iter().filter(|v| v.is_some()).count(), 3);
        let le: Vec<f64> = ev.le1_checkpoints.iter().map(|c| c.1).collect();
        assert!(le[0] < le[1] && le[1] < le[2]);

        opts.domain = DomainPolicy::Causal;
        assert!(matches!(
            run_confinement(&prop, &qm, &opts),
            Err(Error::DomainTooShort { .. })
        ));
        opts.r = -0.5;
        opts.domain = DomainPolicy::LeakageCertified {
            margin: 0.5,
            tolerance: 1e-3,
        };
        assert!(run_confinement(&prop, &qm, &opts).is_err());
    }

    #[test]
    fn growth_reports_budget_exhaustion() {
        let (prop, qm) = trapped(20);
        let mut opts = EvolutionOptions::new(4.0, 1.0);
        opts.domain = DomainPolicy::LeakageCertified {
            margin: 0.5,
            tolerance: 1e-3,
        };
        opts.checkpoints = vec![1.0, 2.0, 4.0];
        let g = le1_growth(&prop, &[qm], 1, 1e6, &opts).unwrap();
        assert!(g.budget_exhausted && g.j_star.is_none());
        assert_eq!(g.rows[0].samples.len(), 3);
    }

    #[test]
    fn nontrapped_bump_leaves_the_local_region() {
        let geom = WarpGeometry::new(WarpParams::new(1, 1.0).unwrap());
        let grid = Grid::new(1.0, 16.0, 749).unwrap();
        let prop = Propagator::new(geom, grid).unwrap();
        let w: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|&x| {
                let s = (x - 2.5) / 1.0;
                Complex64::new(if s.abs() < 1.0 { (1.0 - s * s).powi(4) } else { 0.0 }, 0.0)
            })
            .collect();
        let mode = AngularMode::single_harmonic(0);
        let data = WaveField::single(
            grid,
            ModeState::new(mode, w.clone(), vec![Complex64::new(0.0, 0.0); w.len()]).unwrap(),
        )
        .unwrap();
        let rep = run_evolution(&prop, &data, &EvolutionOptions::new(10.0, 4.0), None).unwrap();
        let t = rep.t_confinement.expect("energy should leave [x0, R]");
        assert!(t < 4.0, "t = {t}");
        assert!(rep.energy_drift < 1e-10);
    }
}
