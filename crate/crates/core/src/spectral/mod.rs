//! Uniform-grid Dirichlet discretization, the tridiagonal eigensolver,
//! quadrature and the norm/energy evaluators.

mod eigen;
mod grid;
pub mod norms;
mod operator;
mod quadrature;

pub use eigen::{eigen_decompose, eigen_lowest, sturm_count, EigenBasis, EigenPair};
pub use grid::Grid;
pub use norms::{
    dbk_norm, energy_norms, japanese_bracket, le_from_shells, le_norms, le_star_from_shells, mode_energy_w_form,
    mode_operator, shell_index, DbkNorm, EnergyNorms, GradientStencil, LeNorms, NormWeights, QuadraticDensity,
    ShellAccumulator,
};
pub use operator::{build_operator, TridiagonalOperator};
pub use quadrature::{first_difference, l2_norm_complex, quadrature_hk, quadrature_l2, second_difference, seminorm_hk};
