//! Symmetric tridiagonal eigensolver: Sturm-count bisection for eigenvalues,
//! inverse iteration (with reorthogonalization inside clusters) for vectors.

use std::collections::VecDeque;

use ndarray::Array2;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::grid::Grid;
use super::operator::{tridiag_apply, TridiagonalOperator};
use crate::error::{Error, Result};

/// Eigenpair with the vector normalized so that Σ h v_i² = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda: f64,
    pub vector: Vec<f64>,
    /// ‖(P - λ)v‖₂ / ‖v‖₂.
    pub residual: f64,
}

const MAX_INVERSE_ITERATIONS: usize = 50;
const LANES: usize = 4;

fn pivmin(off: f64) -> f64 {
    f64::MIN_POSITIVE * (off * off).max(1.0)
}

/// Number of eigenvalues strictly below `lambda` (LDLᵀ sign count).
pub fn sturm_count(diag: &[f64], off: f64, lambda: f64) -> usize {
    let e2 = off * off;
    let piv = pivmin(off);
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        q = if i == 0 { d - lambda } else { d - lambda - e2 / q };
        if q.abs() < piv {
            q = -piv;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// Four independent Sturm counts in one pass; the recurrences interleave.
fn sturm_count_lanes(diag: &[f64], off: f64, lambda: [f64; LANES]) -> [usize; LANES] {
    let e2 = off * off;
    let piv = pivmin(off);
    let mut count = [0usize; LANES];
    let mut q = [1.0f64; LANES];
    for (i, &d) in diag.iter().enumerate() {
        for l in 0..LANES {
            let mut v = if i == 0 {
                d - lambda[l]
            } else {
                d - lambda[l] - e2 / q[l]
            };
            if v.abs() < piv {
                v = -piv;
            }
            count[l] += (v < 0.0) as usize;
            q[l] = v;
        }
    }
    count
}

/// Eigenvalues with 0-based indices `indices` (ascending order of the spectrum).
fn bisect_eigenvalues(op: &TridiagonalOperator, indices: &[usize]) -> Vec<f64> {
    let (glo, ghi) = op.gershgorin();
    let width = (ghi - glo).max(f64::MIN_POSITIVE);
    let glo = glo - 2.0 * f64::EPSILON * width;
    let ghi = ghi + 2.0 * f64::EPSILON * width;
    let abstol = 2.0 * pivmin(op.offdiag);
    let mut out = vec![0.0; indices.len()];
    for (chunk_no, chunk) in indices.chunks(LANES).enumerate() {
        let mut lo = [glo; LANES];
        let mut hi = [ghi; LANES];
        let mut done = [false; LANES];
        for l in chunk.len()..LANES {
            done[l] = true;
        }
        for _ in 0..256 {
            let mut mid = [0.0; LANES];
            for l in 0..LANES {
                mid[l] = 0.5 * (lo[l] + hi[l]);
            }
            let counts = sturm_count_lanes(&op.diag, op.offdiag, mid);
            for l in 0..chunk.len() {
                if done[l] {
                    continue;
                }
                if counts[l] > chunk[l] {
                    hi[l] = mid[l];
                } else {
                    lo[l] = mid[l];
                }
                let tol = 2.0 * f64::EPSILON * lo[l].abs().max(hi[l].abs()) + abstol;
                let m = 0.5 * (lo[l] + hi[l]);
                if hi[l] - lo[l] <= tol || m <= lo[l] || m >= hi[l] {
                    done[l] = true;
                }
            }
            if done.iter().all(|&d| d) {
                break;
            }
        }
        for l in 0..chunk.len() {
            out[chunk_no * LANES + l] = 0.5 * (lo[l] + hi[l]);
        }
    }
    out
}

/// LU factorization with partial pivoting of a tridiagonal matrix
/// (diagonal `d`, constant off-diagonal), as in LAPACK's dgttrf.
struct TridiagLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: f64, shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|x| x - shift).collect();
        let mut dl = vec![off; n.saturating_sub(1)];
        let mut du = vec![off; n.saturating_sub(1)];
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if last.abs() < tiny {
                *last = if *last < 0.0 { -tiny } else { tiny };
            }
        }
        TridiagLu {
            d,
            dl,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual_norm(diag: &[f64], off: f64, lambda: f64, v: &[f64]) -> f64 {
    let pv = tridiag_apply(diag, off, v);
    pv.iter()
        .zip(v)
        .map(|(p, x)| (p - lambda * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn orthogonalize(v: &mut [f64], against: &[&[f64]]) {
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for q in against {
            let c: f64 = q.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(q.iter()).for_each(|(x, qi)| *x -= c * qi);
        }
    }
}

/// Inverse iteration for one eigenvalue; returns an ℓ²-normalized vector.
fn inverse_iteration(
    op: &TridiagonalOperator,
    index: usize,
    lambda: f64,
    shift: f64,
    cluster: &[&[f64]],
) -> Result<(Vec<f64>, f64)> {
    let n = op.len();
    let norm = op.norm_inf();
    let tol = 1e-13 * norm;
    let tiny = f64::EPSILON * norm;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + index as u64);
    let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    orthogonalize(&mut x, cluster);
    let s = norm2(&x);
    x.iter_mut().for_each(|v| *v /= s);

    let mut shift = shift;
    let mut lu = TridiagLu::factor(&op.diag, op.offdiag, shift, tiny);
    let mut best = f64::INFINITY;
    let mut stalled = 0;
    let mut last_residual = f64::INFINITY;
    for it in 0..MAX_INVERSE_ITERATIONS {
        lu.solve(&mut x);
        orthogonalize(&mut x, cluster);
        let s = norm2(&x);
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::Convergence {
                index,
                lambda,
                residual: f64::NAN,
            });
        }
        x.iter_mut().for_each(|v| *v /= s);
        let r = residual_norm(&op.diag, op.offdiag, lambda, &x);
        if r <= tol && it >= 1 {
            return Ok((x, r));
        }
        if r < 0.5 * last_residual {
            stalled = 0;
        } else {
            stalled += 1;
        }
        best = best.min(r);
        last_residual = r;
        if stalled >= 3 {
            shift += 1e-12 * op.diag_norm_inf();
            lu = TridiagLu::factor(&op.diag, op.offdiag, shift, tiny);
            stalled = 0;
        }
    }
    Err(Error::Convergence {
        index,
        lambda,
        residual: best,
    })
}

/// Eigenvectors (ℓ²-normalized) for eigenvalues `lambdas` given in ascending order.
///
/// Each vector is reorthogonalized against the previous vectors whose eigenvalues
/// lie within 1e-3‖T‖; farther eigenvectors are already orthogonal to about
/// ε‖T‖/gap by inverse iteration itself. A sliding window (rather than chained
/// clusters) keeps the cost linear when the whole spectrum is closely spaced.
fn eigenvectors(op: &TridiagonalOperator, first_index: usize, lambdas: &[f64]) -> Result<Vec<(Vec<f64>, f64)>> {
    let ortol = 1e-3 * op.norm_inf();
    let mut out: Vec<(Vec<f64>, f64)> = Vec::with_capacity(lambdas.len());
    let mut window: VecDeque<(f64, Vec<f64>)> = VecDeque::new();
    let mut prev_shift = f64::NEG_INFINITY;
    for (j, &lambda) in lambdas.iter().enumerate() {
        while window.front().is_some_and(|(l, _)| lambda - l > ortol) {
            window.pop_front();
        }
        let mut shift = lambda;
        if j > 0 {
            let pertol = 10.0 * f64::EPSILON * lambda.abs().max(f64::MIN_POSITIVE);
            if shift - prev_shift < pertol {
                shift = prev_shift + pertol;
            }
        }
        let neighbours: Vec<&[f64]> = window.iter().map(|(_, v)| v.as_slice()).collect();
        let (v, r) = inverse_iteration(op, first_index + j, lambda, shift, &neighbours)?;
        prev_shift = shift;
        window.push_back((lambda, v.clone()));
        out.push((v, r));
    }
    Ok(out)
}

/// Scale an ℓ²-unit vector to Σ h v² = 1 and fix its sign: the first component
/// larger than 1e-8 of the maximum magnitude is made positive.
fn normalize_for_grid(v: &mut [f64], h: f64) {
    let scale = 1.0 / h.sqrt();
    let vmax = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sign = v.iter().find(|x| x.abs() > 1e-8 * vmax).map_or(1.0, |x| x.signum());
    v.iter_mut().for_each(|x| *x *= sign * scale);
}

/// The k smallest eigenpairs in ascending order.
pub fn eigen_lowest(op: &TridiagonalOperator, k: usize) -> Result<Vec<EigenPair>> {
    if k == 0 || k > op.len() {
        return Err(Error::invalid("k", format!("need 1 <= k <= {}, got {k}", op.len())));
    }
    let indices: Vec<usize> = (0..k).collect();
    let lambdas = bisect_eigenvalues(op, &indices);
    let vectors = eigenvectors(op, 0, &lambdas)?;
    Ok(lambdas
        .into_iter()
        .zip(vectors)
        .map(|(lambda, (mut v, r))| {
            normalize_for_grid(&mut v, op.grid.h);
            EigenPair {
                lambda,
                vector: v,
                residual: r,
            }
        })
        .collect())
}

/// Full eigendecomposition: P = Σ λ_k e_k e_kᵀ W with W = h·I.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub grid: Grid,
    pub lambdas: Vec<f64>,
    /// Row k is e_k, normalized so Σ h e_k(i)² = 1.
    pub vectors: Array2<f64>,
    pub max_residual: f64,
}

pub fn eigen_decompose(op: &TridiagonalOperator) -> Result<EigenBasis> {
    let n = op.len();
    let indices: Vec<usize> = (0..n).collect();
    let lambdas = bisect_eigenvalues(op, &indices);
    let pairs = eigenvectors(op, 0, &lambdas)?;
    let mut vectors = Array2::zeros((n, n));
    let mut max_residual = 0.0f64;
    for (k, (mut v, r)) in pairs.into_iter().enumerate() {
        normalize_for_grid(&mut v, op.grid.h);
        vectors.row_mut(k).assign(&ndarray::ArrayView1::from(&v));
        max_residual = max_residual.max(r);
    }
    Ok(EigenBasis {
        grid: op.grid,
        lambdas,
        vectors,
        max_residual,
    })
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn vector(&self, k: usize) -> ndarray::ArrayView1<'_, f64> {
        self.vectors.row(k)
    }

    /// Coefficients c_k = Σ h e_k(i) v_i.
    pub fn project(&self, v: &[Complex64]) -> Vec<Complex64> {
        let (re, im) = split(v);
        let h = self.grid.h;
        let cr = self.vectors.dot(&re);
        let ci = self.vectors.dot(&im);
        cr.iter()
            .zip(ci.iter())
            .map(|(a, b)| Complex64::new(a * h, b * h))
            .collect()
    }

    /// Σ c_k e_k.
    pub fn reconstruct(&self, coeffs: &[Complex64]) -> Vec<Complex64> {
        // Row sums: the stored vectors are rows, so this walks memory contiguously.
        let n = self.vectors.ncols();
        let mut vr = ndarray::Array1::<f64>::zeros(n);
        let mut vi = ndarray::Array1::<f64>::zeros(n);
        for (c, row) in coeffs.iter().zip(self.vectors.rows()) {
            if c.re != 0.0 {
                vr.scaled_add(c.re, &row);
            }
            if c.im != 0.0 {
                vi.scaled_add(c.im, &row);
            }
        }
        vr.iter().zip(vi.iter()).map(|(a, b)| Complex64::new(*a, *b)).collect()
    }

    /// Largest |⟨e_j, e_k⟩_h - δ_jk| (O(n³); meant for tests).
    pub fn orthogonality_defect(&self) -> f64 {
        let g = self.vectors.dot(&self.vectors.t()) * self.grid.h;
        let mut worst = 0.0f64;
        for ((i, j), v) in g.indexed_iter() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v - target).abs());
        }
        worst
    }
}

fn split(v: &[Complex64]) -> (ndarray::Array1<f64>, ndarray::Array1<f64>) {
    (v.iter().map(|c| c.re).collect(), v.iter().map(|c| c.im).collect())
}
