use num_complex::Complex64;

use super::grid::Grid;
use crate::error::{Error, Result};

/// Three-point Dirichlet discretization of -d²/dx² + V.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalOperator {
    pub grid: Grid,
    pub diag: Vec<f64>,
    pub offdiag: f64,
    /// V at the nodes.
    pub potential: Vec<f64>,
    pub potential_id: String,
}

pub fn build_operator(
    grid: Grid,
    potential: impl Fn(f64) -> f64,
    potential_id: impl Into<String>,
) -> Result<TridiagonalOperator> {
    let inv_h2 = 1.0 / (grid.h * grid.h);
    let mut values = Vec::with_capacity(grid.n_interior);
    for x in grid.nodes() {
        let v = potential(x);
        if !v.is_finite() {
            return Err(Error::NonFinitePotential { x, value: v });
        }
        values.push(v);
    }
    Ok(TridiagonalOperator {
        grid,
        diag: values.iter().map(|v| 2.0 * inv_h2 + v).collect(),
        offdiag: -inv_h2,
        potential: values,
        potential_id: potential_id.into(),
    })
}

impl TridiagonalOperator {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag_norm_inf(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// Infinity norm of the matrix (max absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        let e = self.offdiag.abs();
        let n = self.len();
        (0..n)
            .map(|i| {
                let neighbours = if n == 1 {
                    0.0
                } else if i == 0 || i == n - 1 {
                    e
                } else {
                    2.0 * e
                };
                self.diag[i].abs() + neighbours
            })
            .fold(0.0, f64::max)
    }

    /// Interval containing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let e = self.offdiag.abs();
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (i, &d) in self.diag.iter().enumerate() {
            let r = if i == 0 || i == n - 1 { e } else { 2.0 * e };
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        tridiag_apply(&self.diag, self.offdiag, v)
    }

    pub fn apply_complex(&self, v: &[Complex64]) -> Vec<Complex64> {
        let n = self.len();
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| {
                let mut s = v[i] * self.diag[i];
                if i > 0 {
                    s += v[i - 1] * self.offdiag;
                }
                if i + 1 < n {
                    s += v[i + 1] * self.offdiag;
                }
                s
            })
            .collect()
    }

    /// Same grid, potential shifted by a constant.
    pub fn shifted(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|d| *d += c);
        out.potential.iter_mut().for_each(|v| *v += c);
        out.potential_id = format!("{} + {c}", self.potential_id);
        out
    }
}

pub(crate) fn tridiag_apply(diag: &[f64], off: f64, v: &[f64]) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(v.len(), n);
    (0..n)
        .map(|i| {
            let mut s = diag[i] * v[i];
            if i > 0 {
                s += off * v[i - 1];
            }
            if i + 1 < n {
                s += off * v[i + 1];
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencil_entries() {
        let g = Grid::new(0.0, 1.0, 3).unwrap();
        let op = build_operator(g, |_| 0.0, "zero").unwrap();
        assert_eq!(op.diag, vec![32.0, 32.0, 32.0]);
        assert_eq!(op.offdiag, -16.0);
        assert_eq!(op.apply(&[1.0, 1.0, 1.0]), vec![16.0, 0.0, 16.0]);
    }

    #[test]
    fn rejects_non_finite_potential() {
        let g = Grid::new(-1.0, 1.0, 4).unwrap();
        let err = build_operator(g, |x| 1.0 / (x - g.node(1)), "pole").unwrap_err();
        assert!(matches!(err, Error::NonFinitePotential { .. }));
    }
}
