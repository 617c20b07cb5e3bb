//! Bell-Mermin operators for n qubits: construction, quantum and
//! local-hidden-variable extrema, and the GHZ characterization of maximal
//! violation with constructive recovery of the local unitaries.
//!
//! Qubit 1 is the most significant bit of every amplitude index and the
//! leftmost tensor factor.

pub mod algebra;
pub mod characterization;
pub mod error;
pub mod lhv;
pub mod mermin;
pub mod optimize;
pub mod random;
pub mod sampler;

pub use algebra::{
    BlochVector, DenseOperator, MeasurementSettings, SettingPair, StateVector, DENSE_CAP,
};
pub use characterization::{
    double_prime_basis, extract_ghz_lu, lu_ghz_instance, max_eigenspace_structure,
    norm_bound_scalar, orthogonality_defects, ExtractionWitness, Tolerances,
};
pub use error::{MerminError, Result};
pub use lhv::{lhv_bound, lhv_max, violation_ratio, LhvResult};
pub use mermin::{
    build_mermin, build_mermin_expansion, build_mermin_product_form, ghz_state,
    mermin_expectation, mermin_expectation_matrix_free, mermin_squared_identity_check,
    mermin_terms, quantum_bound, w_state, BuildForm, IdentityReport, MerminTerm,
};
pub use optimize::{optimal_state, seesaw_settings, SeesawConfig, SeesawResult};
pub use sampler::{estimate_mermin, sample_term, MerminEstimate, ShotRecord, Shots};
