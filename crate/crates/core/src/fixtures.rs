//! Small published systems with fully printed data.

use crate::lti::LtiSystem;
use crate::matlib::Matrix;

/// Two-state, single-input single-output system with `A = diag(2, 1)`,
/// `B = (−1, 1)ᵀ`, `C = (1, 1)`. Its order-one reductions have closed-form
/// critical points.
pub fn two_state_system() -> LtiSystem {
    LtiSystem::new(
        Matrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]),
        Matrix::from_row_slice(2, 1, &[-1.0, 1.0]),
        Matrix::from_row_slice(1, 2, &[1.0, 1.0]),
    )
    .expect("fixture is valid")
}

pub const FIVE_STATE_A: [f64; 25] = [
    3.0, -1.0, 1.0, 1.0, -1.0, //
    -1.0, 2.0, 0.0, 0.0, 2.0, //
    1.0, 0.0, 2.0, 1.0, 1.0, //
    1.0, 0.0, 1.0, 3.0, 0.0, //
    -1.0, 2.0, 1.0, 0.0, 4.0,
];

pub const FIVE_STATE_B: [f64; 10] = [
    0.0, 1.0, //
    1.0, 0.0, //
    -1.0, 1.0, //
    1.0, 0.0, //
    0.0, 1.0,
];

pub const FIVE_STATE_C: [f64; 10] = [
    1.0, 0.0, 0.0, 0.0, 0.0, //
    0.0, 0.0, 1.0, 0.0, 1.0,
];

/// Reference Stiefel basis (5×3, four printed digits, so only orthonormal to ~1e-4).
pub const FIVE_STATE_STIEFEL_BASIS: [f64; 15] = [
    0.8906, 0.1189, -0.1025, //
    -0.1117, 0.7216, 0.0373, //
    -0.0650, -0.1558, 0.8994, //
    -0.2144, 0.6138, 0.0302, //
    0.3798, 0.2532, 0.4223,
];

/// Reference balanced-truncation `A_r` for the five-state system (printed digits).
pub const FIVE_STATE_BT_A_R: [f64; 9] = [
    2.8944, -0.0422, -1.4729, //
    -0.0318, 1.0470, -0.2615, //
    -1.1764, -0.2355, 4.1898,
];

/// Five-state, two-input, two-output system with SPD `A`.
pub fn five_state_system() -> LtiSystem {
    LtiSystem::new(
        Matrix::from_row_slice(5, 5, &FIVE_STATE_A),
        Matrix::from_row_slice(5, 2, &FIVE_STATE_B),
        Matrix::from_row_slice(2, 5, &FIVE_STATE_C),
    )
    .expect("fixture is valid")
}

pub fn five_state_stiefel_basis() -> Matrix {
    Matrix::from_row_slice(5, 3, &FIVE_STATE_STIEFEL_BASIS)
}

pub fn five_state_bt_reference_a_r() -> Matrix {
    Matrix::from_row_slice(3, 3, &FIVE_STATE_BT_A_R)
}
