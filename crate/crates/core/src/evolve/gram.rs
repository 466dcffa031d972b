//! Closed-form time integrals of quadratic densities of homogeneous solutions.
//!
//! A homogeneous mode is w(t) = Σ_k e_k (α_k e^{iω_k s} + β_k e^{-iω_k s}) with
//! s = t - t₀, so ∫₀^T wᴴ G w dt reduces to Gram entries G_kk' times
//! J(Δ) = ∫₀^T e^{iΔs} ds over the four frequency combinations of each pair.

use std::sync::Arc;

use ndarray::{s, Array1, Array2, Axis};
use num_complex::Complex64;

use super::propagator::{ModeBasis, SpectralMode};
use crate::error::{Error, Result};
use crate::geometry::AngularMode;
use crate::spectral::{GradientStencil, NormWeights, QuadraticDensity};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Kept eigencomponents of one homogeneous mode in exponential form.
#[derive(Debug, Clone)]
pub struct ModalExpansion {
    pub basis: Arc<ModeBasis>,
    pub mode: AngularMode,
    pub time: f64,
    pub kept: Vec<usize>,
    pub omega: Vec<f64>,
    pub alpha: Vec<Complex64>,
    pub beta: Vec<Complex64>,
    /// Energy fraction carried by dropped components.
    pub truncated_fraction: f64,
}

impl ModalExpansion {
    /// Keep the most energetic components until the dropped energy fraction is ≤ `tol`.
    pub fn new(basis: Arc<ModeBasis>, spec: &SpectralMode, tol: f64) -> Result<Self> {
        if spec.pos.len() != basis.len() {
            return Err(Error::invalid(
                "spectral mode",
                "coefficient count does not match the basis",
            ));
        }
        let energies = spec.component_energies(&basis);
        let total: f64 = energies.iter().sum();
        let mut order: Vec<usize> = (0..energies.len()).collect();
        order.sort_by(|&a, &b| energies[b].total_cmp(&energies[a]));
        let mut kept = Vec::new();
        let mut remaining = total;
        for &k in &order {
            if remaining <= tol * total {
                break;
            }
            kept.push(k);
            remaining -= energies[k];
        }
        kept.sort_unstable();
        let mut omega = Vec::with_capacity(kept.len());
        let mut alpha = Vec::with_capacity(kept.len());
        let mut beta = Vec::with_capacity(kept.len());
        for &k in &kept {
            let lambda = basis.lambda(k);
            if lambda <= 0.0 {
                return Err(Error::NonPositiveSpectrum { l: basis.l, lambda });
            }
            let w = lambda.sqrt();
            let (a, b) = (spec.pos[k], spec.vel[k]);
            omega.push(w);
            alpha.push(0.5 * a + b / (2.0 * I * w));
            beta.push(0.5 * a - b / (2.0 * I * w));
        }
        let kept_energy: f64 = kept.iter().map(|&k| energies[k]).sum();
        Ok(ModalExpansion {
            basis,
            mode: spec.mode,
            time: spec.time,
            kept,
            omega,
            alpha,
            beta,
            truncated_fraction: if total > 0.0 {
                ((total - kept_energy) / total).max(0.0)
            } else {
                0.0
            },
        })
    }

    pub fn len(&self) -> usize {
        self.kept.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kept.is_empty()
    }

    /// Amplitudes of ∂ₜw in the same exponential form.
    fn velocity_amplitudes(&self) -> (Vec<Complex64>, Vec<Complex64>) {
        let p = self.alpha.iter().zip(&self.omega).map(|(a, w)| I * w * a).collect();
        let q = self.beta.iter().zip(&self.omega).map(|(b, w)| -I * w * b).collect();
        (p, q)
    }

    /// Kept basis vectors as rows (K × n).
    fn rows(&self) -> Array2<f64> {
        self.basis.basis.vectors.select(Axis(0), &self.kept)
    }
}

/// G = Fᵀ diag(w) F restricted to the support of a density: r rows of length K.
#[derive(Debug, Clone)]
pub struct GramFactor {
    pub rows: Array2<f64>,
    pub weights: Array1<f64>,
}

impl GramFactor {
    fn rank(&self) -> usize {
        self.weights.len()
    }

    /// Σ_r w_r ((F xr)_r² + (F xi)_r²) per column.
    fn form(&self, xr: &Array2<f64>, xi: &Array2<f64>) -> Array1<f64> {
        let w = self.weights.view().insert_axis(Axis(1));
        let yr = self.rows.dot(xr);
        let yi = self.rows.dot(xi);
        (&(&yr * &yr + &yi * &yi) * &w).sum_axis(Axis(0))
    }
}

/// Per-group Gram matrices of a density over the kept components.
#[derive(Debug, Clone)]
pub struct DensityGram {
    pub kinetic: Vec<Array2<f64>>,
    pub statics: Vec<Array2<f64>>,
    /// Kept when the total rank is below K; pointwise evaluation then costs
    /// O(rK) instead of O(K²).
    pub factors: Vec<Option<FactoredGroup>>,
}

#[derive(Debug, Clone)]
pub struct FactoredGroup {
    pub kinetic: Vec<GramFactor>,
    pub statics: Vec<GramFactor>,
}

fn weighted_gram(m: &Array2<f64>, weights: &[f64], cols: &[usize]) -> (Array2<f64>, GramFactor) {
    let sub = m.select(Axis(1), cols);
    let w = Array1::from_iter(cols.iter().map(|&c| weights[c]));
    let scaled = &sub * &w;
    let gram = sub.dot(&scaled.t());
    (
        gram,
        GramFactor {
            rows: sub.reversed_axes(),
            weights: w,
        },
    )
}

impl DensityGram {
    /// Groups are the dyadic shells of `shells`, or a single group when `None`.
    pub fn new(
        exp: &ModalExpansion,
        density: &QuadraticDensity,
        stencil: &GradientStencil,
        shells: Option<&NormWeights>,
    ) -> Self {
        let e = exp.rows();
        let (k, n) = e.dim();
        let mut d = Array2::<f64>::zeros((k, n + 1));
        {
            let right = ndarray::ArrayView1::from(&stencil.right[..n]);
            let left = ndarray::ArrayView1::from(&stencil.left[1..]);
            let mut head = d.slice_mut(s![.., 0..n]);
            head += &(&e * &right);
            let mut tail = d.slice_mut(s![.., 1..n + 1]);
            tail -= &(&e * &left);
        }
        let groups = shells.map_or(1, |w| w.n_shells);
        let mut kinetic = Vec::with_capacity(groups);
        let mut statics = Vec::with_capacity(groups);
        let mut factors = Vec::with_capacity(groups);
        for g in 0..groups {
            let nodes: Vec<usize> = (0..n)
                .filter(|&i| shells.map_or(true, |w| w.node_shell[i] == g))
                .collect();
            let edges: Vec<usize> = (0..=n)
                .filter(|&i| shells.map_or(true, |w| w.edge_shell[i] == g))
                .filter(|&i| density.gradient[i] != 0.0)
                .collect();
            let nodes_k: Vec<usize> = nodes.iter().copied().filter(|&i| density.kinetic[i] != 0.0).collect();
            let nodes_p: Vec<usize> = nodes.iter().copied().filter(|&i| density.potential[i] != 0.0).collect();
            let (kin, fk) = weighted_gram(&e, &density.kinetic, &nodes_k);
            let (mut st, fp) = weighted_gram(&e, &density.potential, &nodes_p);
            let (grad, fg) = weighted_gram(&d, &density.gradient, &edges);
            st += &grad;
            kinetic.push(kin);
            statics.push(st);
            let rank = fk.rank().max(fp.rank() + fg.rank());
            factors.push((rank < k).then(|| FactoredGroup {
                kinetic: vec![fk],
                statics: vec![fp, fg],
            }));
        }
        DensityGram {
            kinetic,
            statics,
            factors,
        }
    }

    pub fn groups(&self) -> usize {
        self.kinetic.len()
    }
}

/// ∫₀^T e^{iΔs} ds given phase = e^{iΔT}.
fn j_integral(delta: f64, t: f64, phase: Complex64) -> Complex64 {
    let x = delta * t;
    if x.abs() < 1e-2 {
        // T Σ (ix)^n/(n+1)!
        let mut term = Complex64::new(1.0, 0.0);
        let mut sum = term;
        for n in 1..8 {
            term *= I * x / (n + 1) as f64;
            sum += term;
        }
        sum * t
    } else {
        (phase - 1.0) / (I * delta)
    }
}

/// ∫_{t₀}^{t₀+T} of each group's density (quadrature weights already in the density).
pub fn time_integrals(exp: &ModalExpansion, gram: &DensityGram, span: f64) -> Vec<f64> {
    let groups = gram.groups();
    let mut acc = vec![0.0; groups];
    if exp.is_empty() || span == 0.0 {
        return acc;
    }
    let (pk, qk) = exp.velocity_amplitudes();
    let z: Vec<Complex64> = exp.omega.iter().map(|w| Complex64::from_polar(1.0, w * span)).collect();
    let n = exp.len();
    for a in 0..n {
        for b in 0..n {
            let jm = j_integral(exp.omega[b] - exp.omega[a], span, z[b] * z[a].conj());
            let jp = j_integral(exp.omega[a] + exp.omega[b], span, z[a] * z[b]);
            let pair = |p: &[Complex64], q: &[Complex64]| -> f64 {
                (p[a].conj() * p[b] * jm
                    + q[a].conj() * q[b] * jm.conj()
                    + p[a].conj() * q[b] * jp.conj()
                    + q[a].conj() * p[b] * jp)
                    .re
            };
            let cs = pair(&exp.alpha, &exp.beta);
            let ck = pair(&pk, &qk);
            for g in 0..groups {
                acc[g] += gram.statics[g][[a, b]] * cs + gram.kinetic[g][[a, b]] * ck;
            }
        }
    }
    acc
}

/// Each group's density at the given absolute times.
pub fn densities_at(exp: &ModalExpansion, gram: &DensityGram, times: &[f64]) -> Vec<Vec<f64>> {
    let groups = gram.groups();
    let nt = times.len();
    if exp.is_empty() {
        return vec![vec![0.0; groups]; nt];
    }
    let n = exp.len();
    let (pk, qk) = exp.velocity_amplitudes();
    let mut wr = Array2::<f64>::zeros((n, nt));
    let mut wi = Array2::<f64>::zeros((n, nt));
    let mut vr = Array2::<f64>::zeros((n, nt));
    let mut vi = Array2::<f64>::zeros((n, nt));
    for k in 0..n {
        for (c, &t) in times.iter().enumerate() {
            let z = Complex64::from_polar(1.0, exp.omega[k] * (t - exp.time));
            let w = exp.alpha[k] * z + exp.beta[k] * z.conj();
            let v = pk[k] * z + qk[k] * z.conj();
            wr[[k, c]] = w.re;
            wi[[k, c]] = w.im;
            vr[[k, c]] = v.re;
            vi[[k, c]] = v.im;
        }
    }
    let form = |g: &Array2<f64>, xr: &Array2<f64>, xi: &Array2<f64>| -> ndarray::Array1<f64> {
        (xr * &g.dot(xr)).sum_axis(Axis(0)) + (xi * &g.dot(xi)).sum_axis(Axis(0))
    };
    let mut out = vec![vec![0.0; groups]; nt];
    for g in 0..groups {
        let (s, k) = match &gram.factors[g] {
            Some(f) => (
                f.statics
                    .iter()
                    .map(|f| f.form(&wr, &wi))
                    .fold(ndarray::Array1::zeros(nt), |a, b| a + b),
                f.kinetic
                    .iter()
                    .map(|f| f.form(&vr, &vi))
                    .fold(ndarray::Array1::zeros(nt), |a, b| a + b),
            ),
            None => (form(&gram.statics[g], &wr, &wi), form(&gram.kinetic[g], &vr, &vi)),
        };
        for c in 0..nt {
            out[c][g] = s[c] + k[c];
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::{ModeState, Propagator, WaveField};
    use crate::geometry::{WarpGeometry, WarpParams};
    use crate::spectral::norms::ShellAccumulator;
    use crate::spectral::Grid;

    #[test]
    fn j_integral_branches_agree() {
        for &t in &[0.5, 3.0, 40.0] {
            for &d in &[1e-9, 1e-4, 2.4e-4, 2.6e-4, 0.3, 7.0] {
                let phase = Complex64::from_polar(1.0, d * t);
                let got = j_integral(d, t, phase);
                let x = d * t;
                let want = Complex64::new(x.sin(), 2.0 * (0.5 * x).sin().powi(2)) / d;
                assert!((got - want).norm() <= 1e-13 * t, "d={d} t={t}");
            }
        }
    }

    #[test]
    fn exact_integrals_match_fine_trapezoid() {
        let geom = WarpGeometry::new(WarpParams::new(1, -1.0).unwrap());
        let grid = Grid::new(-1.0, 4.0, 150).unwrap();
        let prop = Propagator::new(geom, grid).unwrap();
        let mode = AngularMode::single_harmonic(3);
        let w: Vec<Complex64> = grid
            .nodes()
            .iter()
            .map(|x| Complex64::new((-(x - 0.5f64).powi(2) * 6.0).exp(), 0.0))
            .collect();
        let wt: Vec<Complex64> = w.iter().map(|v| v * Complex64::new(0.3, -1.1)).collect();
        let field = WaveField::single(grid, ModeState::new(mode, w, wt).unwrap()).unwrap();
        let spec = prop.to_spectral(&field).unwrap().remove(0);
        let basis = prop.basis(3).unwrap();
        let exp = ModalExpansion::new(Arc::clone(&basis), &spec, 0.0).unwrap();
        let weights = NormWeights::new(&grid, &geom);
        let stencil = GradientStencil::new(&grid, &geom);
        let density = QuadraticDensity::le1(&grid, &geom, &mode);
        let gram = DensityGram::new(&exp, &density, &stencil, Some(&weights));
        let span = 2.0;
        let exact = time_integrals(&exp, &gram, span);

        let steps = 4000;
        let dt = span / steps as f64;
        let mut acc = ShellAccumulator::new(weights.clone());
        for i in 0..=steps {
            let t = i as f64 * dt;
            let state = spec.at(&basis, t).to_state(&basis);
            acc.push(t, density.shell_sums(&stencil, &state, Some(&weights)));
        }
        let top = exact.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (e, q) in exact.iter().zip(acc.totals()) {
            assert!((e - q).abs() <= 1e-6 * top, "exact {e} trapezoid {q}");
        }

        let at = densities_at(&exp, &gram, &[0.7]);
        let state = spec.at(&basis, 0.7).to_state(&basis);
        let direct = density.shell_sums(&stencil, &state, Some(&weights));
        for (a, b) in at[0].iter().zip(&direct) {
            assert!((a - b).abs() <= 1e-12 * top / span, "{a} vs {b}");
        }
    }
}
