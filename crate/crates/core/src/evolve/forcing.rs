use num_complex::Complex64;

use super::field::WaveField;
use super::propagator::ModeBasis;
use crate::error::{Error, Result};
use std::sync::Arc;

/// Scalar time factor of a separable forcing term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeProfile {
    Constant,
    /// e^{-iνt}.
    Phase {
        frequency: f64,
    },
    /// sin(νt).
    Sine {
        frequency: f64,
    },
    /// exp(-((t - center)/width)²).
    Pulse {
        center: f64,
        width: f64,
    },
}

impl TimeProfile {
    pub fn value(&self, t: f64) -> Complex64 {
        match *self {
            TimeProfile::Constant => Complex64::new(1.0, 0.0),
            TimeProfile::Phase { frequency } => Complex64::from_polar(1.0, -frequency * t),
            TimeProfile::Sine { frequency } => Complex64::new((frequency * t).sin(), 0.0),
            TimeProfile::Pulse { center, width } => Complex64::new((-((t - center) / width).powi(2)).exp(), 0.0),
        }
    }
}

/// g(t, x) = profile(x)·time(t) acting on mode `mode_index` of the field.
/// The profile is the forcing of ẅ + P_l w = g in the conjugated variable;
/// for □_g u = F this is g = -a·F.
#[derive(Debug, Clone, PartialEq)]
pub struct ForcingTerm {
    pub mode_index: usize,
    pub profile: Vec<Complex64>,
    pub time: TimeProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ForcingSpec {
    Separable(Vec<ForcingTerm>),
    /// e^{-iτt}(P_l - τ²)w_q: the forcing under which the phase-rotated
    /// quasimode data e^{-iτt}(w_q, -iτ w_q) is an exact solution.
    QuasimodeResidual {
        mode_index: usize,
        residual: Vec<Complex64>,
        tau: f64,
    },
}

pub(crate) struct ProjectedForcing {
    lens: Vec<usize>,
    terms: Vec<(usize, Vec<Complex64>, TimeProfile)>,
}

impl ForcingSpec {
    pub fn terms(&self) -> Vec<ForcingTerm> {
        match self {
            ForcingSpec::Separable(t) => t.clone(),
            ForcingSpec::QuasimodeResidual {
                mode_index,
                residual,
                tau,
            } => vec![ForcingTerm {
                mode_index: *mode_index,
                profile: residual.clone(),
                time: TimeProfile::Phase { frequency: *tau },
            }],
        }
    }

    pub fn validate(&self, field: &WaveField) -> Result<()> {
        for term in self.terms() {
            let Some(m) = field.modes.get(term.mode_index) else {
                return Err(Error::invalid(
                    "forcing",
                    format!(
                        "term refers to mode index {} but the field has {}",
                        term.mode_index,
                        field.modes.len()
                    ),
                ));
            };
            if term.profile.len() != m.len() {
                return Err(Error::invalid(
                    "forcing",
                    format!("profile has {} nodes, mode has {}", term.profile.len(), m.len()),
                ));
            }
            if term.profile.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return Err(Error::invalid("forcing", "profile has non-finite entries"));
            }
        }
        Ok(())
    }

    /// g(t) per field mode (zero vectors for unforced modes).
    pub fn values_at(&self, field: &WaveField, t: f64) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = field
            .modes
            .iter()
            .map(|m| vec![Complex64::new(0.0, 0.0); m.len()])
            .collect();
        for term in self.terms() {
            let c = term.time.value(t);
            for (o, p) in out[term.mode_index].iter_mut().zip(&term.profile) {
                *o += p * c;
            }
        }
        out
    }

    pub(crate) fn project(&self, bases: &[Arc<ModeBasis>]) -> Result<ProjectedForcing> {
        let terms = self
            .terms()
            .into_iter()
            .map(|t| {
                let b = bases
                    .get(t.mode_index)
                    .ok_or_else(|| Error::invalid("forcing", "mode index out of range"))?;
                Ok((t.mode_index, b.basis.project(&t.profile), t.time))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ProjectedForcing {
            lens: bases.iter().map(|b| b.len()).collect(),
            terms,
        })
    }

    pub(crate) fn coefficients_at(&self, projected: &ProjectedForcing, t: f64) -> Vec<Vec<Complex64>> {
        let mut out: Vec<Vec<Complex64>> = projected
            .lens
            .iter()
            .map(|&n| vec![Complex64::new(0.0, 0.0); n])
            .collect();
        for (mi, coeffs, time) in &projected.terms {
            let c = time.value(t);
            for (o, p) in out[*mi].iter_mut().zip(coeffs) {
                *o += p * c;
            }
        }
        out
    }
}
