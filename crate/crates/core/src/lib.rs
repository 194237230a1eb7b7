//! Stability- and symmetry-preserving H² model reduction.
//!
//! The full-order system `ẋ = −Ax + Bu, y = Cx` has a symmetric positive
//! definite `A`. Reduced models `(A_r, B_r, C_r)` are searched on the product
//! manifold `Sym₊(r) × R^{r×m} × R^{p×r}`, where `Sym₊(r)` carries the
//! affine-invariant metric. Because that manifold is geodesically complete,
//! every trust-region step lands on a reduced model with SPD `A_r`, so the
//! reduced system inherits stability and a real spectrum.
//!
//! Modules, bottom-up:
//!
//! - [`matlib`]: symmetric eigen-kernels, SPD functions, Lyapunov/Sylvester solves.
//! - [`lti`]: system types, Gramians, H² norms and error norms.
//! - [`manifold`]: geometry of `Sym₊(r)` and the product manifolds.
//! - [`objective`]: the H² error objective with Riemannian gradient and Hessian,
//!   for general systems and for gradient systems (`C = Bᵀ`).
//! - [`optimizer`]: Riemannian trust-region with truncated CG.
//! - [`baselines`]: balanced truncation and Stiefel-projection descent.
//! - [`fixtures`]: small published systems used by tests and the CLI.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(any(test, feature = "std"))]
extern crate std;

pub mod baselines;
mod error;
pub mod fixtures;
pub mod lti;
pub mod manifold;
pub mod matlib;
pub mod objective;
pub mod optimizer;

pub use error::{Error, Result};
pub use matlib::Matrix;
