//! Numerical toolkit for radial complex Monge-Ampère calculus on the unit
//! ball: profiles, model families, Moser-Trudinger and Brezis-Merle type
//! functionals, Legendre and Laplace transforms, thermodynamic duality, the
//! mean-field equation and exact dimensional constants.

pub mod acceptance;
pub mod constants;
pub mod error;
pub mod families;
pub mod functionals;
pub mod grid;
pub mod mfe;
pub mod profile;
pub mod quad;
pub mod thermo;
pub mod transforms;

pub use error::{Error, ErrorClass, Result};
pub use grid::GridSpec;
pub use profile::{
    energy, exp_integral, log_exp_integral, lp_moment, ma_mass, make_profile, volume_function,
    EnergyReport, LpMoment, MassProfile, RadialProfile,
};
pub use families::{
    cone_profile, cone_profile_on, fs_profile, ke_residual, product_lift, KeResidual,
    SeparableProfile,
};
pub use functionals::{
    bm_check, bm_check_product, fit_volume_bound, mt_check, sobolev_check, sweep, BMReport,
    FamilyDescriptor, FamilyKind, MTReport, SobolevReport, SweepRow,
};
pub use transforms::{
    converse_check, laplace_layer_cake, legendre, legendre_discrete, lemma_check,
    log_laplace_envelope, ConvexGridFunction, LaplacePair, LemmaReport, Side,
};
pub use thermo::{
    alpha_lower_bound, dirac_measure, duality_gap, entropy, entropy_legendre_gap, free_energy,
    gibbs_measure, free_energy_bound_check, matched_pair, measure_energy, monge_ampere_measure, pairing,
    potential_of_measure, uniform_measure, RadialMeasure,
};
pub use mfe::{
    concentration_report, continuation, oracle_epsilon, solve, solve_gamma_form, ConcentrationReport,
    MFESolution, Method, SolveOptions,
};
pub use constants::{
    constants_row, counterexample_check, smallest_counterexample_n, ConstantsRow, Counterexample,
};
