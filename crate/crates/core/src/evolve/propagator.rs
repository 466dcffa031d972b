use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use super::field::{ModeState, WaveField};
use crate::error::{Error, Result};
use crate::geometry::{AngularMode, WarpGeometry};
use crate::spectral::{eigen_decompose, mode_operator, EigenBasis, Grid, TridiagonalOperator};

/// Discrete P_l on the evolution grid with its full eigendecomposition.
#[derive(Debug)]
pub struct ModeBasis {
    pub l: usize,
    pub op: TridiagonalOperator,
    pub basis: EigenBasis,
}

impl ModeBasis {
    pub fn len(&self) -> usize {
        self.basis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn lambda(&self, k: usize) -> f64 {
        self.basis.lambdas[k]
    }

    pub fn min_lambda(&self) -> f64 {
        self.basis.lambdas.first().copied().unwrap_or(0.0)
    }
}

/// Advance one coefficient pair (position, velocity) of ÿ + λy = 0 by t.
pub fn rotate(lambda: f64, pos: Complex64, vel: Complex64, t: f64) -> (Complex64, Complex64) {
    if lambda > 0.0 {
        let w = lambda.sqrt();
        let (s, c) = (w * t).sin_cos();
        (pos * c + vel * (s / w), -pos * (w * s) + vel * c)
    } else if lambda < 0.0 {
        let k = (-lambda).sqrt();
        let (s, c) = ((k * t).sinh(), (k * t).cosh());
        (pos * c + vel * (s / k), pos * (k * s) + vel * c)
    } else {
        (pos + vel * t, vel)
    }
}

/// One mode in the eigenbasis of its P_l: w = Σ pos_k e_k, ∂ₜw = Σ vel_k e_k at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralMode {
    pub mode: AngularMode,
    pub time: f64,
    pub pos: Vec<Complex64>,
    pub vel: Vec<Complex64>,
}

impl SpectralMode {
    pub fn from_state(basis: &ModeBasis, state: &ModeState, time: f64) -> Result<Self> {
        if state.mode.l != basis.l || state.len() != basis.len() {
            return Err(Error::invalid(
                "mode state",
                format!(
                    "state (l = {}, {} nodes) does not match basis (l = {}, {} nodes)",
                    state.mode.l,
                    state.len(),
                    basis.l,
                    basis.len()
                ),
            ));
        }
        Ok(SpectralMode {
            mode: state.mode,
            time,
            pos: basis.basis.project(&state.w),
            vel: basis.basis.project(&state.w_t),
        })
    }

    pub fn to_state(&self, basis: &ModeBasis) -> ModeState {
        ModeState {
            mode: self.mode,
            w: basis.basis.reconstruct(&self.pos),
            w_t: basis.basis.reconstruct(&self.vel),
        }
    }

    /// Exact evolution to absolute time t (forward or backward).
    pub fn at(&self, basis: &ModeBasis, t: f64) -> SpectralMode {
        let dt = t - self.time;
        let (pos, vel) = self
            .pos
            .iter()
            .zip(&self.vel)
            .zip(&basis.basis.lambdas)
            .map(|((&p, &v), &lam)| rotate(lam, p, v, dt))
            .unzip();
        SpectralMode {
            mode: self.mode,
            time: t,
            pos,
            vel,
        }
    }

    /// ½ Σ (λ_k|pos_k|² + |vel_k|²), without the multiplicity.
    pub fn energy(&self, basis: &ModeBasis) -> f64 {
        0.5 * self
            .pos
            .iter()
            .zip(&self.vel)
            .zip(&basis.basis.lambdas)
            .map(|((p, v), lam)| lam * p.norm_sqr() + v.norm_sqr())
            .sum::<f64>()
    }

    /// Per-component energy λ_k|pos_k|² + |vel_k|².
    pub fn component_energies(&self, basis: &ModeBasis) -> Vec<f64> {
        self.pos
            .iter()
            .zip(&self.vel)
            .zip(&basis.basis.lambdas)
            .map(|((p, v), lam)| lam * p.norm_sqr() + v.norm_sqr())
            .collect()
    }
}

/// Squared H_{x₀} distance Σ λ_k|δpos_k|² + |δvel_k|² between two spectral states.
pub fn h_distance_sq(basis: &ModeBasis, a: &SpectralMode, b: &SpectralMode) -> f64 {
    a.pos
        .iter()
        .zip(&b.pos)
        .zip(a.vel.iter().zip(&b.vel))
        .zip(&basis.basis.lambdas)
        .map(|(((pa, pb), (va, vb)), lam)| lam * (pa - pb).norm_sqr() + (va - vb).norm_sqr())
        .sum()
}

/// Exact-in-time propagation of the spatially discrete Dirichlet problem on a
/// fixed evolution grid. Eigendecompositions are built once per l and shared.
#[derive(Debug)]
pub struct Propagator {
    geom: WarpGeometry,
    grid: Grid,
    cache: Mutex<BTreeMap<usize, Arc<ModeBasis>>>,
}

impl Propagator {
    pub fn new(geom: WarpGeometry, grid: Grid) -> Result<Self> {
        if (grid.x_left - geom.x0()).abs() > 1e-12 * geom.x0().abs().max(1.0) {
            return Err(Error::invalid(
                "grid",
                format!(
                    "evolution grid must start at the wall x0 = {}, got {}",
                    geom.x0(),
                    grid.x_left
                ),
            ));
        }
        Ok(Propagator {
            geom,
            grid,
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn geometry(&self) -> &WarpGeometry {
        &self.geom
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn basis(&self, l: usize) -> Result<Arc<ModeBasis>> {
        if let Some(b) = self.cache.lock().expect("basis cache poisoned").get(&l) {
            return Ok(Arc::clone(b));
        }
        let op = mode_operator(self.grid, &self.geom, l)?;
        let basis = eigen_decompose(&op)?;
        let built = Arc::new(ModeBasis { l, op, basis });
        let mut cache = self.cache.lock().expect("basis cache poisoned");
        Ok(Arc::clone(cache.entry(l).or_insert(built)))
    }

    pub fn to_spectral(&self, field: &WaveField) -> Result<Vec<SpectralMode>> {
        self.check_field(field)?;
        field
            .modes
            .iter()
            .map(|m| SpectralMode::from_state(&*self.basis(m.mode.l)?, m, field.time))
            .collect()
    }

    pub fn to_field(&self, modes: &[SpectralMode]) -> Result<WaveField> {
        let time = modes.first().map_or(0.0, |m| m.time);
        let states = modes
            .iter()
            .map(|m| Ok(m.to_state(&*self.basis(m.mode.l)?)))
            .collect::<Result<Vec<_>>>()?;
        WaveField::new(self.grid, time, states)
    }

    /// The homogeneous solution at absolute time t (any sign).
    pub fn evolve_to(&self, field: &WaveField, t: f64) -> Result<WaveField> {
        let spec = self.to_spectral(field)?;
        let moved = spec
            .iter()
            .map(|m| Ok(m.at(&*self.basis(m.mode.l)?, t)))
            .collect::<Result<Vec<_>>>()?;
        self.to_field(&moved)
    }

    /// States at t₀ + i·dt for i = 0..=steps. The homogeneous part is exact;
    /// forcing enters through the trapezoid rule applied to the Duhamel integral.
    pub fn propagate(
        &self,
        field: &WaveField,
        dt: f64,
        steps: usize,
        forcing: Option<&super::ForcingSpec>,
    ) -> Result<Vec<WaveField>> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid("dt", format!("need dt > 0, got {dt}")));
        }
        let spec = self.to_spectral(field)?;
        let bases = spec.iter().map(|m| self.basis(m.mode.l)).collect::<Result<Vec<_>>>()?;
        for b in &bases {
            if b.min_lambda() < 0.0 {
                eprintln!(
                    "warning: P_{} has a negative discrete eigenvalue {:.3e}; using hyperbolic branches",
                    b.l,
                    b.min_lambda()
                );
            }
        }
        let t0 = field.time;
        let mut out = Vec::with_capacity(steps + 1);
        match forcing {
            None => {
                for i in 0..=steps {
                    let t = t0 + i as f64 * dt;
                    let moved: Vec<SpectralMode> = spec.iter().zip(&bases).map(|(m, b)| m.at(b, t)).collect();
                    out.push(self.to_field(&moved)?);
                }
            }
            Some(f) => {
                f.validate(field)?;
                let projected = f.project(&bases)?;
                let mut cur = spec;
                let mut g_prev = f.coefficients_at(&projected, t0);
                out.push(self.to_field(&cur)?);
                for i in 1..=steps {
                    let t = t0 + i as f64 * dt;
                    let g_next = f.coefficients_at(&projected, t);
                    for (mi, (m, b)) in cur.iter_mut().zip(&bases).enumerate() {
                        let mut next = m.at(b, t);
                        for k in 0..b.len() {
                            let (gp, gv) = rotate(b.lambda(k), Complex64::new(0.0, 0.0), g_prev[mi][k], dt);
                            next.pos[k] += 0.5 * dt * gp;
                            next.vel[k] += 0.5 * dt * (gv + g_next[mi][k]);
                        }
                        *m = next;
                    }
                    g_prev = g_next;
                    out.push(self.to_field(&cur)?);
                }
            }
        }
        Ok(out)
    }

    fn check_field(&self, field: &WaveField) -> Result<()> {
        if field.grid != self.grid {
            return Err(Error::invalid("field", "field grid differs from the propagator grid"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpParams;

    fn setup() -> Propagator {
        let geom = WarpGeometry::new(WarpParams::new(1, -1.0).unwrap());
        let grid = Grid::new(-1.0, 3.0, 200).unwrap();
        Propagator::new(geom, grid).unwrap()
    }

    fn bump(grid: &Grid, center: f64) -> Vec<Complex64> {
        grid.nodes()
            .iter()
            .map(|x| Complex64::new((-(x - center).powi(2) * 8.0).exp(), 0.0))
            .collect()
    }

    #[test]
    fn rotate_matches_closed_forms() {
        let (p, v) = rotate(4.0, Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), 0.3);
        assert!((p.re - (0.6f64).cos()).abs() < 1e-15 && (v.re + 2.0 * (0.6f64).sin()).abs() < 1e-15);
        let (p, v) = rotate(-4.0, Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), 0.3);
        assert!((p.re - ((0.6f64).cosh() + (0.6f64).sinh())).abs() < 1e-14);
        assert!((v.re - (2.0 * (0.6f64).sinh() + 2.0 * (0.6f64).cosh())).abs() < 1e-14);
        let (p, v) = rotate(0.0, Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), 0.5);
        assert_eq!((p.re, v.re), (2.0, 2.0));
    }

    #[test]
    fn eigenvector_data_oscillates_as_cosine() {
        let prop = setup();
        let b = prop.basis(2).unwrap();
        let k = 3;
        let e: Vec<Complex64> = b.basis.vector(k).iter().map(|&v| Complex64::new(v, 0.0)).collect();
        let state = ModeState::new(AngularMode::new(2), e.clone(), vec![Complex64::new(0.0, 0.0); e.len()]).unwrap();
        let field = WaveField::single(*prop.grid(), state).unwrap();
        let t = 7.3;
        let moved = prop.evolve_to(&field, t).unwrap();
        let c = (b.lambda(k).sqrt() * t).cos();
        for (got, want) in moved.modes[0].w.iter().zip(&e) {
            assert!((got - want * c).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_data_stays_zero() {
        let prop = setup();
        let field = WaveField::single(*prop.grid(), ModeState::zeros(AngularMode::new(1), 200)).unwrap();
        for f in prop.propagate(&field, 0.1, 5, None).unwrap() {
            assert!(f.modes[0].w.iter().chain(&f.modes[0].w_t).all(|v| v.norm() == 0.0));
        }
    }

    #[test]
    fn spectral_round_trip() {
        let prop = setup();
        let w = bump(prop.grid(), 0.5);
        let state = ModeState::new(AngularMode::new(4), w.clone(), w.iter().map(|v| v * 0.5).collect()).unwrap();
        let field = WaveField::single(*prop.grid(), state.clone()).unwrap();
        let back = prop.to_field(&prop.to_spectral(&field).unwrap()).unwrap();
        let scale = w.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for (a, b) in back.modes[0].w.iter().zip(&state.w) {
            assert!((a - b).norm() <= 1e-10 * scale);
        }
        assert!(prop.propagate(&field, 0.0, 3, None).is_err());
        let other = WaveField::single(Grid::new(-1.0, 2.0, 200).unwrap(), state).unwrap();
        assert!(prop.to_spectral(&other).is_err());
    }
}
