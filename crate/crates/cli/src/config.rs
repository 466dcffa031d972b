use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use warptrap::multiplier::{suite_delta, HARDY_CORPUS_SIZE, HARDY_SEED};

use crate::Command;

/// Every knob of every subcommand. Unset fields take per-command defaults in
/// [`ExperimentConfig::resolve`]; the resolved config is echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub m: u32,
    /// Wall position. Trapped side for quasimode/confinement/le1-growth and the
    /// x0 < 0 half of bifurcation; the wall of the multiplier audit.
    pub x0: Option<f64>,
    /// Wall of the x0 > 0 half of bifurcation.
    pub x0_plus: f64,
    /// Explicit harmonic degrees; when empty, l_min..=l_max in steps of l_step.
    pub l_list: Vec<usize>,
    pub l_min: Option<usize>,
    pub l_max: Option<usize>,
    pub l_step: Option<usize>,
    /// Interior nodes on (x0, 0); sets the spacing h = |x0|/(n_interval + 1).
    pub n_interval: usize,
    /// Outer artificial wall of the evolution grid (x0 < 0 runs).
    pub x_max: f64,
    pub r: Option<f64>,
    pub t_max: Option<f64>,
    /// LE¹ horizons; default T/8, T/4, T/2, T.
    pub checkpoints: Vec<f64>,
    /// Regularity order of the D(B^k) norm.
    pub k: usize,
    /// Ratio A searched for by le1-growth.
    pub threshold: f64,
    /// Multiplier δ; default half the admissible value.
    pub delta: Option<f64>,
    pub seed: u64,
    pub hardy_samples: usize,
    /// Carrier frequencies of the x0 > 0 packet family.
    pub omegas: Vec<f64>,
    /// Grid spacing of the x0 > 0 local-energy run in bifurcation.
    pub h_plus: f64,
    /// Outer wall of that run; default R + T + 1. Must leave X_max - R ≥ T.
    pub x_max_plus: Option<f64>,
    pub leakage_margin: f64,
    pub leakage_tolerance: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            m: 1,
            x0: None,
            x0_plus: 1.0,
            l_list: Vec::new(),
            l_min: None,
            l_max: None,
            l_step: None,
            n_interval: 199,
            x_max: 5.0,
            r: None,
            t_max: None,
            checkpoints: Vec::new(),
            k: 1,
            threshold: 10.0,
            delta: None,
            seed: HARDY_SEED,
            hardy_samples: HARDY_CORPUS_SIZE,
            omegas: (0..7).map(|k| 2f64.powi(k)).collect(),
            h_plus: 0.05,
            x_max_plus: None,
            leakage_margin: 1.0,
            leakage_tolerance: 1e-4,
        }
    }
}

fn invalid(field: &'static str, reason: impl Into<String>) -> anyhow::Error {
    warptrap::Error::InvalidParameter {
        field,
        reason: reason.into(),
    }
    .into()
}

impl ExperimentConfig {
    /// Reads a JSON config, or the `# config:` header of a CSV written by this tool.
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let json = match text.lines().find_map(|l| l.strip_prefix("# config: ")) {
            Some(header) => header.to_string(),
            None => text,
        };
        serde_json::from_str(&json).map_err(|e| invalid("config", format!("{}: {e}", path.display())))
    }

    /// Fills per-command defaults and checks the preconditions of the command.
    pub fn resolve(mut self, cmd: Command) -> anyhow::Result<Self> {
        let (x0, l_range, r, t) = match cmd {
            Command::Quasimode => (-1.0, (20, 70, 1), 1.0, 0.0),
            Command::Confinement => (-1.0, (20, 60, 20), 1.0, 1000.0),
            Command::Le1Growth => (-1.0, (20, 60, 20), 1.0, 1000.0),
            Command::Bifurcation => (-1.0, (20, 60, 20), 4.0, 200.0),
            Command::MultiplierAudit => (1.0, (0, 0, 1), 0.0, 0.0),
        };
        let x0 = *self.x0.get_or_insert(x0);
        self.l_min.get_or_insert(l_range.0);
        self.l_max.get_or_insert(l_range.1);
        self.l_step.get_or_insert(l_range.2);
        if self.l_list.is_empty() && cmd != Command::MultiplierAudit {
            let (lo, hi, step) = (
                self.l_min.unwrap_or(0),
                self.l_max.unwrap_or(0),
                self.l_step.unwrap_or(1),
            );
            if step == 0 {
                return Err(invalid("l_step", "must be ≥ 1"));
            }
            self.l_list = (lo..=hi).step_by(step).collect();
        }
        if cmd != Command::Quasimode && cmd != Command::MultiplierAudit {
            self.r.get_or_insert(r);
            let t = *self.t_max.get_or_insert(t);
            if self.checkpoints.is_empty() {
                self.checkpoints = vec![t / 8.0, t / 4.0, t / 2.0, t];
            }
        }
        if cmd == Command::MultiplierAudit && self.delta.is_none() {
            self.delta = Some(suite_delta(self.m));
        }

        if !(1..=8).contains(&self.m) {
            return Err(invalid("m", format!("need 1 ≤ m ≤ 8, got {}", self.m)));
        }
        match cmd {
            Command::MultiplierAudit => {
                if !(x0 > 0.0) {
                    return Err(invalid(
                        "x0",
                        format!("the multiplier audit needs a wall at x0 > 0, got {x0}"),
                    ));
                }
            }
            _ => {
                if !(x0 < 0.0) {
                    return Err(invalid(
                        "x0",
                        format!("quasimode construction requires the trapped side x0 < 0, got {x0}"),
                    ));
                }
                if self.l_list.is_empty() {
                    return Err(invalid("l_list", "no harmonic degrees selected"));
                }
                if self.n_interval < 4 {
                    return Err(invalid("n_interval", "need at least 4 interior nodes"));
                }
                if !(self.x_max > 0.0) {
                    return Err(invalid("x_max", "the evolution grid must extend past 0"));
                }
            }
        }
        if cmd == Command::Bifurcation {
            if !(self.x0_plus > 0.0) {
                return Err(invalid("x0_plus", format!("need x0_plus > 0, got {}", self.x0_plus)));
            }
            if self.omegas.is_empty() {
                return Err(invalid("omegas", "need at least one frequency"));
            }
            if !(self.h_plus > 0.0) {
                return Err(invalid("h_plus", "must be > 0"));
            }
            let (r, t) = (self.r(), self.t_max());
            let x_max_plus = *self.x_max_plus.get_or_insert(r + t + 1.0);
            if x_max_plus - r < t {
                return Err(warptrap::Error::DomainTooShort {
                    x_max: x_max_plus,
                    required: r + t,
                }
                .into());
            }
        }
        if let Some(d) = self.delta {
            if !(d > 0.0) {
                return Err(invalid("delta", format!("need δ > 0, got {d}")));
            }
        }
        Ok(self)
    }

    pub fn x0(&self) -> f64 {
        self.x0.expect("resolved config")
    }

    pub fn r(&self) -> f64 {
        self.r.expect("resolved config")
    }

    pub fn t_max(&self) -> f64 {
        self.t_max.expect("resolved config")
    }

    /// Spacing of the trapped-side grids.
    pub fn h(&self) -> f64 {
        self.x0().abs() / (self.n_interval + 1) as f64
    }

    pub fn n_extended(&self) -> usize {
        ((self.x_max - self.x0()) / self.h()).round() as usize - 1
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_resolve_per_command() {
        let q = ExperimentConfig::default().resolve(Command::Quasimode).unwrap();
        assert_eq!(q.l_list, (20..=70).collect::<Vec<_>>());
        assert_eq!(q.x0(), -1.0);
        assert_eq!(q.n_extended(), 1199);
        let c = ExperimentConfig::default().resolve(Command::Confinement).unwrap();
        assert_eq!(c.checkpoints, vec![125.0, 250.0, 500.0, 1000.0]);
        let a = ExperimentConfig::default().resolve(Command::MultiplierAudit).unwrap();
        assert!(a.delta.unwrap() > 0.0 && a.x0() == 1.0);
    }

    #[test]
    fn preconditions_name_the_field() {
        let cfg = ExperimentConfig {
            x0: Some(1.0),
            ..ExperimentConfig::default()
        };
        let err = cfg.resolve(Command::Quasimode).unwrap_err().to_string();
        assert!(err.contains("`x0`"), "{err}");
        let cfg = ExperimentConfig {
            l_min: Some(30),
            l_max: Some(20),
            ..ExperimentConfig::default()
        };
        let err = cfg.resolve(Command::Quasimode).unwrap_err().to_string();
        assert!(err.contains("`l_list`"), "{err}");
    }

    #[test]
    fn resolved_config_round_trips() {
        let cfg = ExperimentConfig::default().resolve(Command::Bifurcation).unwrap();
        let back: ExperimentConfig = serde_json::from_str(&cfg.to_json()).unwrap();
        assert_eq!(back.resolve(Command::Bifurcation).unwrap(), cfg);
    }
}
