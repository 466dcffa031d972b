use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::AngularMode;
use crate::spectral::Grid;

/// One angular mode of the field in the conjugated variable w = a·u,
/// as grid vectors of (w, ∂ₜw). Dirichlet values are implicit zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeState {
    pub mode: AngularMode,
    pub w: Vec<Complex64>,
    pub w_t: Vec<Complex64>,
}

impl ModeState {
    pub fn new(mode: AngularMode, w: Vec<Complex64>, w_t: Vec<Complex64>) -> Result<Self> {
        if w.len() != w_t.len() {
            return Err(Error::invalid(
                "mode state",
                format!("w has {} entries but w_t has {}", w.len(), w_t.len()),
            ));
        }
        Ok(ModeState { mode, w, w_t })
    }

    pub fn zeros(mode: AngularMode, n: usize) -> Self {
        ModeState {
            mode,
            w: vec![Complex64::new(0.0, 0.0); n],
            w_t: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Build from real profiles of u and ∂ₜu sampled at the nodes.
    pub fn from_u(mode: AngularMode, a_at_nodes: &[f64], u: &[f64], u_t: &[f64]) -> Result<Self> {
        let conj = |v: &[f64]| -> Vec<Complex64> {
            v.iter()
                .zip(a_at_nodes)
                .map(|(x, a)| Complex64::new(x * a, 0.0))
                .collect()
        };
        ModeState::new(mode, conj(u), conj(u_t))
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }
}

/// A collection of modes on a shared grid at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveField {
    pub grid: Grid,
    pub time: f64,
    pub modes: Vec<ModeState>,
}

impl WaveField {
    pub fn new(grid: Grid, time: f64, modes: Vec<ModeState>) -> Result<Self> {
        for m in &modes {
            if m.len() != grid.n_interior {
                return Err(Error::invalid(
                    "modes",
                    format!(
                        "mode l = {} has {} nodes, grid has {}",
                        m.mode.l,
                        m.len(),
                        grid.n_interior
                    ),
                ));
            }
        }
        Ok(WaveField { grid, time, modes })
    }

    pub fn single(grid: Grid, state: ModeState) -> Result<Self> {
        WaveField::new(grid, 0.0, vec![state])
    }
}
