//! Exact-in-time evolution of the spatially discrete Dirichlet problem,
//! mode by mode in the eigenbasis of P_l, and the confinement experiments.

mod checkpoint;
mod experiments;
mod field;
mod forcing;
pub mod gram;
mod propagator;

pub use checkpoint::{read_checkpoint, write_checkpoint, Checkpoint};
pub use experiments::{
    le1_growth, quasimode_data, quasimode_forcing_norm, run_confinement, run_evolution, ConfinementReport,
    DomainPolicy, EvolutionOptions, EvolutionReport, Le1Growth, Le1GrowthRow, RatioTrend,
};
pub use field::{ModeState, WaveField};
pub use forcing::{ForcingSpec, ForcingTerm, TimeProfile};
pub use gram::{densities_at, time_integrals, DensityGram, FactoredGroup, GramFactor, ModalExpansion};
pub use propagator::{h_distance_sq, rotate, ModeBasis, Propagator, SpectralMode};
