//! Pauli algebra, tensor products, pure states and dense Hermitian operators.

mod operator;
mod pauli;
mod settings;
mod state;

pub use operator::{
    embed_local, hermitian_eigensystem, hermitian_eigenvalues, operator_norm, tensor_chain,
    DenseOperator, Eigensystem, DENSE_CAP, HERMITIAN_TOL,
};
pub(crate) use operator::check_dense_cap;
pub use pauli::{
    bloch_components, cross3, dot3, identity2, max_abs_diff2, norm3, pauli_observable,
    pauli_triple, paulis, plus_eigenvector, Ket, sigma_x, sigma_y, sigma_z, spin_matrix, BlochVector, LocalObservable,
    Mat2, PauliTriple, UNIT_NORM_TOL,
};
pub use settings::{MeasurementSettings, SettingPair};
pub use state::{
    apply_product, apply_single_qubit, inner, product_expectation, StateVector,
    MAX_STATE_QUBITS, STATE_NORM_TOL,
};
