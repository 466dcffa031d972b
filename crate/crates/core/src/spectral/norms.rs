//! Energies, local energies, dyadic local-energy norms and the D(B^k) graph norm.
//!
//! Fields are stored in w = a·u. The global energy uses the w-form quadratic
//! form ½(‖ẇ‖² + ⟨P w, w⟩), which the discrete propagator conserves exactly.
//! Localized quantities use the u-form density; its discrete gradient is
//! a(x_mid)·(u_{i+1} - u_i)/h with u = w/a, so it agrees with a direct
//! u-variable evaluation to roundoff and with the w-form to O(h²).

use num_complex::Complex64;

use super::grid::Grid;
use super::operator::{build_operator, TridiagonalOperator};
use crate::error::{Error, Result};
use crate::evolve::{ModeState, WaveField};
use crate::geometry::{AngularMode, WarpGeometry};

/// ⟨x⟩ = (1 + x²)^{1/2}.
pub fn japanese_bracket(x: f64) -> f64 {
    x.hypot(1.0)
}

/// j with ⟨x⟩ ∈ [2^j, 2^{j+1}).
pub fn shell_index(x: f64) -> usize {
    let b = japanese_bracket(x);
    let mut j = b.log2().floor().max(0.0) as usize;
    while 2f64.powi(j as i32 + 1) <= b {
        j += 1;
    }
    while j > 0 && 2f64.powi(j as i32) > b {
        j -= 1;
    }
    j
}

/// Dyadic shell membership of nodes and edges, and dV weights a(x_i)²h.
#[derive(Debug, Clone, PartialEq)]
pub struct NormWeights {
    pub node_shell: Vec<usize>,
    pub edge_shell: Vec<usize>,
    pub n_shells: usize,
    pub volume: Vec<f64>,
}

impl NormWeights {
    pub fn new(grid: &Grid, geom: &WarpGeometry) -> Self {
        let node_shell: Vec<usize> = grid.nodes().iter().map(|&x| shell_index(x)).collect();
        let edge_shell: Vec<usize> = (0..grid.n_edges())
            .map(|e| shell_index(grid.edge_midpoint(e)))
            .collect();
        let n_shells = node_shell.iter().chain(&edge_shell).max().map_or(0, |m| m + 1);
        let volume = grid.nodes().iter().map(|&x| geom.a(x).powi(2) * grid.h).collect();
        NormWeights {
            node_shell,
            edge_shell,
            n_shells,
            volume,
        }
    }

    /// Node indices belonging to shell j.
    pub fn shell_nodes(&self, j: usize) -> Vec<usize> {
        (0..self.node_shell.len())
            .filter(|&i| self.node_shell[i] == j)
            .collect()
    }
}

/// Discrete u-form gradient: D_e w = right_e·w_e - left_e·w_{e-1} on edge e.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientStencil {
    pub right: Vec<f64>,
    pub left: Vec<f64>,
}

impl GradientStencil {
    pub fn new(grid: &Grid, geom: &WarpGeometry) -> Self {
        let n = grid.n_interior;
        let a_nodes: Vec<f64> = grid.nodes().iter().map(|&x| geom.a(x)).collect();
        let mut right = vec![0.0; n + 1];
        let mut left = vec![0.0; n + 1];
        for e in 0..=n {
            let am = geom.a(grid.edge_midpoint(e));
            if e < n {
                right[e] = am / (grid.h * a_nodes[e]);
            }
            if e > 0 {
                left[e] = am / (grid.h * a_nodes[e - 1]);
            }
        }
        GradientStencil { right, left }
    }

    pub fn apply(&self, w: &[Complex64]) -> Vec<Complex64> {
        let n = w.len();
        (0..=n)
            .map(|e| {
                let r = if e < n {
                    w[e] * self.right[e]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                let l = if e > 0 {
                    w[e - 1] * self.left[e]
                } else {
                    Complex64::new(0.0, 0.0)
                };
                r - l
            })
            .collect()
    }
}

/// Weights of a quadratic space density
/// Σ_i kinetic_i |ẇ_i|² + potential_i |w_i|² + Σ_e gradient_e |D_e w|²,
/// with the quadrature weight h already folded in.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticDensity {
    pub kinetic: Vec<f64>,
    pub potential: Vec<f64>,
    pub gradient: Vec<f64>,
}

impl QuadraticDensity {
    /// (∂ₜu)² + (∂ₓu)² + σ²a^{-2}u² against dV.
    pub fn energy(grid: &Grid, geom: &WarpGeometry, mode: &AngularMode) -> Self {
        let h = grid.h;
        let n = grid.n_interior;
        QuadraticDensity {
            kinetic: vec![h; n],
            potential: grid
                .nodes()
                .iter()
                .map(|&x| h * mode.sigma_sq / geom.a(x).powi(2))
                .collect(),
            gradient: vec![h; n + 1],
        }
    }

    /// |u|² against dV.
    pub fn amplitude(grid: &Grid) -> Self {
        let n = grid.n_interior;
        QuadraticDensity {
            kinetic: vec![0.0; n],
            potential: vec![grid.h; n],
            gradient: vec![0.0; n + 1],
        }
    }

    /// |∂u|² + ⟨x⟩^{-2}|u|² against dV, the integrand of LE¹.
    pub fn le1(grid: &Grid, geom: &WarpGeometry, mode: &AngularMode) -> Self {
        let mut d = QuadraticDensity::energy(grid, geom, mode);
        for (p, &x) in d.potential.iter_mut().zip(&grid.nodes()) {
            *p += grid.h / (1.0 + x * x);
        }
        d
    }

    /// Left side integrand of the interior local-energy estimate:
    /// x^{-2m-1}(∂ₓu)² + x^{-1}a^{-2}|∂_ω u|² + x^{-2m-1}(∂ₜu)² + x^{-2m-3}u².
    /// Requires x > 0 on the grid.
    pub fn interior_local(grid: &Grid, geom: &WarpGeometry, mode: &AngularMode) -> Self {
        let h = grid.h;
        let p = 2 * geom.m() as i32;
        let nodes = grid.nodes();
        QuadraticDensity {
            kinetic: nodes.iter().map(|&x| h * x.powi(-p - 1)).collect(),
            potential: nodes
                .iter()
                .map(|&x| h * (mode.sigma_sq / (x * geom.a(x).powi(2)) + x.powi(-p - 3)))
                .collect(),
            gradient: (0..grid.n_edges())
                .map(|e| h * grid.edge_midpoint(e).powi(-p - 1))
                .collect(),
        }
    }

    /// Zero the weights of nodes with x > r and edges with midpoint > r.
    pub fn truncated(mut self, grid: &Grid, r: f64) -> Self {
        for (i, x) in grid.nodes().iter().enumerate() {
            if *x > r {
                self.kinetic[i] = 0.0;
                self.potential[i] = 0.0;
            }
        }
        for e in 0..grid.n_edges() {
            if grid.edge_midpoint(e) > r {
                self.gradient[e] = 0.0;
            }
        }
        self
    }

    /// Zero the weights of nodes with x ≤ r and edges with midpoint ≤ r.
    pub fn beyond(mut self, grid: &Grid, r: f64) -> Self {
        for (i, x) in grid.nodes().iter().enumerate() {
            if *x <= r {
                self.kinetic[i] = 0.0;
                self.potential[i] = 0.0;
            }
        }
        for e in 0..grid.n_edges() {
            if grid.edge_midpoint(e) <= r {
                self.gradient[e] = 0.0;
            }
        }
        self
    }

    pub fn scaled(mut self, c: f64) -> Self {
        for v in self
            .kinetic
            .iter_mut()
            .chain(&mut self.potential)
            .chain(&mut self.gradient)
        {
            *v *= c;
        }
        self
    }

    /// Integral of the density, split by shell (`shells = None` gives one total).
    pub fn shell_sums(&self, stencil: &GradientStencil, state: &ModeState, shells: Option<&NormWeights>) -> Vec<f64> {
        let n_out = shells.map_or(1, |s| s.n_shells);
        let mut out = vec![0.0; n_out];
        for i in 0..state.len() {
            let s = shells.map_or(0, |w| w.node_shell[i]);
            out[s] += self.kinetic[i] * state.w_t[i].norm_sqr() + self.potential[i] * state.w[i].norm_sqr();
        }
        if self.gradient.iter().any(|&g| g != 0.0) {
            for (e, d) in stencil.apply(&state.w).iter().enumerate() {
                let s = shells.map_or(0, |w| w.edge_shell[e]);
                out[s] += self.gradient[e] * d.norm_sqr();
            }
        }
        out
    }

    pub fn total(&self, stencil: &GradientStencil, state: &ModeState) -> f64 {
        self.shell_sums(stencil, state, None)[0]
    }
}

/// Mode operator P_l = -d²/dx² + V_l on the given grid.
pub fn mode_operator(grid: Grid, geom: &WarpGeometry, l: usize) -> Result<TridiagonalOperator> {
    let g = *geom;
    build_operator(grid, move |x| g.potential(l, x), format!("V_{l} (m = {})", geom.m()))
}

fn inner_re(grid: &Grid, a: &[Complex64], b: &[Complex64]) -> f64 {
    grid.h * a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum::<f64>()
}

/// ½(‖ẇ‖² + ⟨P w, w⟩) for one mode, without the multiplicity.
pub fn mode_energy_w_form(op: &TridiagonalOperator, state: &ModeState) -> f64 {
    let pw = op.apply_complex(&state.w);
    0.5 * (inner_re(&op.grid, &state.w_t, &state.w_t) + inner_re(&op.grid, &state.w, &pw))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyNorms {
    /// Conserved energy E.
    pub energy: f64,
    /// E_R: energy density integrated over x₀ ≤ x ≤ R.
    pub local_energy: f64,
    /// ‖(u, ∂ₜu)‖_{H_{x₀}} = (2E)^{1/2}.
    pub h_norm: f64,
}

pub fn energy_norms(state: &WaveField, geom: &WarpGeometry, r: f64) -> Result<EnergyNorms> {
    if r <= geom.x0() {
        return Err(Error::invalid("R", format!("need R > x0 = {}, got {r}", geom.x0())));
    }
    let grid = state.grid;
    let stencil = GradientStencil::new(&grid, geom);
    let mut energy = 0.0;
    let mut local = 0.0;
    for m in &state.modes {
        let mult = m.mode.multiplicity as f64;
        let op = mode_operator(grid, geom, m.mode.l)?;
        energy += mult * mode_energy_w_form(&op, m);
        let density = QuadraticDensity::energy(&grid, geom, &m.mode).truncated(&grid, r);
        local += 0.5 * mult * density.total(&stencil, m);
    }
    Ok(EnergyNorms {
        energy,
        local_energy: local,
        h_norm: (2.0 * energy).max(0.0).sqrt(),
    })
}

/// Space-time integrals accumulated per dyadic shell by the trapezoid rule in t.
#[derive(Debug, Clone)]
pub struct ShellAccumulator {
    weights: NormWeights,
    totals: Vec<f64>,
    last: Option<(f64, Vec<f64>)>,
}

impl ShellAccumulator {
    pub fn new(weights: NormWeights) -> Self {
        let n = weights.n_shells;
        ShellAccumulator {
            weights,
            totals: vec![0.0; n],
            last: None,
        }
    }

    /// Add a sample of per-shell space integrals at time t (t must increase).
    pub fn push(&mut self, t: f64, values: Vec<f64>) {
        if let Some((t0, prev)) = &self.last {
            let dt = t - t0;
            for (tot, (a, b)) in self.totals.iter_mut().zip(prev.iter().zip(&values)) {
                *tot += 0.5 * dt * (a + b);
            }
        }
        self.last = Some((t, values));
    }

    pub fn weights(&self) -> &NormWeights {
        &self.weights
    }

    pub fn totals(&self) -> &[f64] {
        &self.totals
    }
}

/// sup_j 2^{-j/2} (I_j)^{1/2}.
pub fn le_from_shells(shells: &[f64]) -> f64 {
    shells
        .iter()
        .enumerate()
        .map(|(j, v)| 2f64.powf(-0.5 * j as f64) * v.max(0.0).sqrt())
        .fold(0.0, f64::max)
}

/// Σ_j 2^{j/2} (I_j)^{1/2}.
pub fn le_star_from_shells(shells: &[f64]) -> f64 {
    shells
        .iter()
        .enumerate()
        .map(|(j, v)| 2f64.powf(0.5 * j as f64) * v.max(0.0).sqrt())
        .sum()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LeNorms {
    pub le: f64,
    pub le1: f64,
    /// Dual sum Σ 2^{j/2}‖u‖_{shell j} of the same history.
    pub le_star: f64,
    pub le_shells: Vec<f64>,
    pub le1_shells: Vec<f64>,
}

/// LE, LE¹ and LE* of a sampled history over [t_first, t_last] (trapezoid in t).
pub fn le_norms(history: &[WaveField], geom: &WarpGeometry) -> Result<LeNorms> {
    let first = history.first().ok_or(Error::EmptyHistory)?;
    let grid = first.grid;
    let weights = NormWeights::new(&grid, geom);
    let stencil = GradientStencil::new(&grid, geom);
    let amp = QuadraticDensity::amplitude(&grid);
    let le1_densities: Vec<QuadraticDensity> = first
        .modes
        .iter()
        .map(|m| QuadraticDensity::le1(&grid, geom, &m.mode))
        .collect();
    let mut acc_le = ShellAccumulator::new(weights.clone());
    let mut acc_le1 = ShellAccumulator::new(weights.clone());
    for field in history {
        let mut v_le = vec![0.0; weights.n_shells];
        let mut v_le1 = vec![0.0; weights.n_shells];
        for (m, d1) in field.modes.iter().zip(&le1_densities) {
            let mult = m.mode.multiplicity as f64;
            for (s, v) in amp.shell_sums(&stencil, m, Some(&weights)).into_iter().enumerate() {
                v_le[s] += mult * v;
            }
            for (s, v) in d1.shell_sums(&stencil, m, Some(&weights)).into_iter().enumerate() {
                v_le1[s] += mult * v;
            }
        }
        acc_le.push(field.time, v_le);
        acc_le1.push(field.time, v_le1);
    }
    let le_shells = acc_le.totals().to_vec();
    let le1_shells = acc_le1.totals().to_vec();
    Ok(LeNorms {
        le: le_from_shells(&le_shells),
        le1: le_from_shells(&le1_shells),
        le_star: le_star_from_shells(&le_shells),
        le_shells,
        le1_shells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbkNorm {
    /// ‖d‖_H + ‖B^k d‖_H.
    pub value: f64,
    pub h_norm: f64,
    pub bk_norm: f64,
    /// Set when the per-application growth approaches the grid's largest frequency,
    /// so the discrete B^k no longer approximates the continuum operator.
    pub resolution_limited: bool,
}

/// H_{x₀} norm in w-variables: Σ mult (⟨P w0, w0⟩ + ‖w1‖²)^{1/2}-combined.
fn h_norm_sq(ops: &[TridiagonalOperator], modes: &[(usize, Vec<Complex64>, Vec<Complex64>)]) -> f64 {
    modes
        .iter()
        .zip(ops)
        .map(|((mult, w0, w1), op)| {
            let pw = op.apply_complex(w0);
            *mult as f64 * (inner_re(&op.grid, w0, &pw) + inner_re(&op.grid, w1, w1))
        })
        .sum()
}

/// Graph norm of B^k with B(w0, w1) = (i w1, -i P w0) applied mode by mode.
pub fn dbk_norm(data: &WaveField, geom: &WarpGeometry, k: usize) -> Result<DbkNorm> {
    let grid = data.grid;
    let ops: Vec<TridiagonalOperator> = data
        .modes
        .iter()
        .map(|m| mode_operator(grid, geom, m.mode.l))
        .collect::<Result<_>>()?;
    let mut cur: Vec<(usize, Vec<Complex64>, Vec<Complex64>)> = data
        .modes
        .iter()
        .map(|m| (m.mode.multiplicity, m.w.clone(), m.w_t.clone()))
        .collect();
    let h0 = h_norm_sq(&ops, &cur).max(0.0).sqrt();
    let i = Complex64::new(0.0, 1.0);
    for _ in 0..k {
        cur = cur
            .into_iter()
            .zip(&ops)
            .map(|((mult, w0, w1), op)| {
                let pw = op.apply_complex(&w0);
                let n0: Vec<Complex64> = w1.iter().map(|v| i * v).collect();
                let n1: Vec<Complex64> = pw.iter().map(|v| -i * v).collect();
                (mult, n0, n1)
            })
            .collect();
    }
    let hk = h_norm_sq(&ops, &cur).max(0.0).sqrt();
    let lambda_max = ops.iter().map(|op| op.gershgorin().1).fold(0.0, f64::max);
    let resolution_limited = k > 0 && h0 > 0.0 && (hk / h0).powf(1.0 / k as f64) > 0.5 * lambda_max.sqrt();
    Ok(DbkNorm {
        value: h0 + hk,
        h_norm: h0,
        bk_norm: hk,
        resolution_limited,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::WarpParams;

    fn geom() -> WarpGeometry {
        WarpGeometry::new(WarpParams::new(1, -1.0).unwrap())
    }

    #[test]
    fn shells_partition() {
        assert_eq!(shell_index(0.0), 0);
        assert_eq!(shell_index(3f64.sqrt() - 1e-9), 0);
        assert_eq!(shell_index(3f64.sqrt() + 1e-9), 1);
        assert_eq!(shell_index(-15f64.sqrt() - 1e-9), 2);
        let g = Grid::new(-3.0, 20.0, 500).unwrap();
        let w = NormWeights::new(&g, &geom());
        let total: usize = (0..w.n_shells).map(|j| w.shell_nodes(j).len()).sum();
        assert_eq!(total, g.n_interior);
        for (i, &x) in g.nodes().iter().enumerate() {
            let j = w.node_shell[i] as i32;
            let b = japanese_bracket(x);
            assert!(2f64.powi(j) <= b && b < 2f64.powi(j + 1));
        }
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let g = Grid::new(-1.0, 4.0, 100).unwrap();
        let f = WaveField::single(g, ModeState::zeros(AngularMode::new(3), 100)).unwrap();
        let e = energy_norms(&f, &geom(), 1.0).unwrap();
        assert_eq!((e.energy, e.local_energy, e.h_norm), (0.0, 0.0, 0.0));
        assert!(energy_norms(&f, &geom(), -2.0).is_err());
    }

    #[test]
    fn kinetic_only_energy() {
        // u = 0, ∂ₜu = φ with ‖φ‖²_{L²(dV)} = 2, so E = 1.
        let g = Grid::new(-1.0, 4.0, 400).unwrap();
        let geo = geom();
        let raw: Vec<f64> = g.nodes().iter().map(|x| (-(x - 1.0f64).powi(2)).exp()).collect();
        let norm: f64 = raw
            .iter()
            .zip(g.nodes())
            .map(|(v, x)| v * v * geo.a(x).powi(2) * g.h)
            .sum();
        let phi: Vec<f64> = raw.iter().map(|v| v * (2.0 / norm).sqrt()).collect();
        let a: Vec<f64> = g.nodes().iter().map(|&x| geo.a(x)).collect();
        let s = ModeState::from_u(AngularMode::new(0), &a, &vec![0.0; 400], &phi).unwrap();
        let f = WaveField::single(g, s).unwrap();
        let e = energy_norms(&f, &geo, 10.0).unwrap();
        assert!((e.energy - 1.0).abs() < 1e-13);
        assert!((e.local_energy - 1.0).abs() < 1e-13);
    }

    #[test]
    fn conjugation_identity() {
        // ‖a^{-1}(a u)‖²_{L²(dV)} is the flat sum Σ h u².
        let g = Grid::new(-2.0, 3.0, 300).unwrap();
        let geo = WarpGeometry::new(WarpParams::new(2, -2.0).unwrap());
        let u: Vec<f64> = g.nodes().iter().map(|x| (3.0 * x).sin() * (-x * x).exp()).collect();
        let flat: f64 = u.iter().map(|v| v * v * g.h).sum();
        let weights = NormWeights::new(&g, &geo);
        let v_sq: f64 = u
            .iter()
            .zip(g.nodes())
            .zip(&weights.volume)
            .map(|((ui, x), vol)| (ui / geo.a(x)).powi(2) * vol)
            .sum();
        assert!((flat - v_sq).abs() <= 1e-14 * flat);
    }

    #[test]
    fn le_of_static_single_shell_field() {
        let g = Grid::new(-1.0, 1.5, 200).unwrap();
        let geo = geom();
        let w: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|x| Complex64::new((1.0 - x * x).max(0.0), 0.0))
            .collect();
        let s = ModeState::new(AngularMode::new(0), w.clone(), vec![Complex64::new(0.0, 0.0); 200]).unwrap();
        let t_end = 3.0;
        let history: Vec<WaveField> = (0..=10)
            .map(|i| WaveField::new(g, t_end * i as f64 / 10.0, vec![s.clone()]).unwrap())
            .collect();
        let norms = le_norms(&history, &geo).unwrap();
        let l2 = (g.h * w.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
        assert!((norms.le - l2 * t_end.sqrt()).abs() < 1e-12);
        assert!((norms.le_star - norms.le).abs() < 1e-12);
        assert!(le_norms(&[], &geo).is_err());
    }

    #[test]
    fn le_weights_shell_two() {
        // A bump supported in shell 2 only: LE = 2^{-1}‖u‖.
        let g = Grid::new(-1.0, 7.0, 800).unwrap();
        let geo = geom();
        let w: Vec<Complex64> = g
            .nodes()
            .iter()
            .map(|x| Complex64::new((1.0 - ((x - 5.0) / 0.8).powi(2)).max(0.0), 0.0))
            .collect();
        let s = ModeState::new(AngularMode::new(0), w.clone(), vec![Complex64::new(0.0, 0.0); 800]).unwrap();
        let h0 = WaveField::new(g, 0.0, vec![s.clone()]).unwrap();
        let h1 = WaveField::new(g, 1.0, vec![s]).unwrap();
        let norms = le_norms(&[h0, h1], &geo).unwrap();
        let l2 = (g.h * w.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt();
        assert!((norms.le - 0.5 * l2).abs() < 1e-12);
        assert!((norms.le_star - 2.0 * l2).abs() < 1e-12);
    }

    #[test]
    fn dbk_identity_power() {
        let g = Grid::new(-1.0, 3.0, 100).unwrap();
        let w: Vec<Complex64> = g.nodes().iter().map(|x| Complex64::new(x.cos(), 0.3)).collect();
        let s = ModeState::new(AngularMode::new(2), w.clone(), w).unwrap();
        let f = WaveField::single(g, s).unwrap();
        let d = dbk_norm(&f, &geom(), 0).unwrap();
        assert!((d.value - 2.0 * d.h_norm).abs() < 1e-12 * d.value);
        assert!(!d.resolution_limited);
    }
}
