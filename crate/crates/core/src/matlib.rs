//! Dense symmetric linear-algebra kernels.
//!
//! Every coefficient matrix that enters a Lyapunov or Sylvester equation on
//! the optimization path is symmetric with a positive spectrum, so the solvers
//! here diagonalize both coefficients and divide entrywise in the eigenbases.
//! The general (nonsymmetric) solvers at the bottom exist only to score
//! reduced models that do not have a symmetric `A_r`, such as the output of
//! balanced truncation.

use alloc::vec::Vec;
use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::{Error, Result};

pub type Matrix = DMatrix<f64>;

/// Relative asymmetry below which inputs are silently symmetrized.
pub const SYMMETRY_TOLERANCE: f64 = 1e-10;
/// A matrix is SPD iff `λ_min > SPD_TOLERANCE · max(1, λ_max)`.
pub const SPD_TOLERANCE: f64 = 1e-12;
/// `|λᵢ + μⱼ| < SINGULARITY_TOLERANCE · (‖F‖₂ + ‖G‖₂)` is treated as singular.
pub const SINGULARITY_TOLERANCE: f64 = 1e-12;

const EIGEN_MAX_ITERATIONS: usize = 10_000;

/// Symmetric part `(M + Mᵀ)/2`.
pub fn sym(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

pub fn frobenius_norm(m: &Matrix) -> f64 {
    m.norm()
}

/// `tr(Z1ᵀ Z2)`.
pub fn frobenius_inner(z1: &Matrix, z2: &Matrix) -> Result<f64> {
    ensure_shape("frobenius_inner", z2, z1.shape())?;
    Ok(z1.dot(z2))
}

pub fn ensure_finite(what: &'static str, m: &Matrix) -> Result<()> {
    if m.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite { what })
    }
}

pub fn ensure_square(what: &'static str, m: &Matrix) -> Result<usize> {
    if m.is_square() {
        Ok(m.nrows())
    } else {
        Err(Error::NotSquare {
            what,
            rows: m.nrows(),
            cols: m.ncols(),
        })
    }
}

pub fn ensure_shape(what: &'static str, m: &Matrix, expected: (usize, usize)) -> Result<()> {
    if m.shape() == expected {
        Ok(())
    } else {
        Err(Error::ShapeMismatch {
            what,
            expected,
            found: m.shape(),
        })
    }
}

/// Validates a nominally symmetric input and returns its symmetric part.
///
/// Asymmetry up to `SYMMETRY_TOLERANCE · ‖M‖_F` is floating-point drift and
/// is absorbed; anything larger is rejected.
pub fn symmetrized(what: &'static str, m: &Matrix) -> Result<Matrix> {
    ensure_square(what, m)?;
    ensure_finite(what, m)?;
    let asym = (m - m.transpose()).norm();
    let scale = m.norm();
    if asym > SYMMETRY_TOLERANCE * scale {
        return Err(Error::NotSymmetric {
            what,
            asymmetry: asym / scale,
        });
    }
    Ok(sym(m))
}

/// Eigendecomposition of a symmetric matrix, eigenvalues ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct SymEig {
    pub eigenvalues: DVector<f64>,
    pub eigenvectors: Matrix,
}

impl SymEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Spectral norm of the decomposed matrix.
    pub fn spectral_radius(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// `V · diag(f(λ)) · Vᵀ`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (j, lambda) in self.eigenvalues.iter().enumerate() {
            let fl = f(*lambda);
            scaled.column_mut(j).scale_mut(fl);
        }
        sym(&(scaled * v.transpose()))
    }

    pub fn reconstruct(&self) -> Matrix {
        self.map(|l| l)
    }

    pub fn is_positive_definite(&self) -> bool {
        self.dim() > 0 && self.min() > SPD_TOLERANCE * self.max().max(1.0)
    }

    pub fn ensure_positive_definite(&self, what: &'static str) -> Result<()> {
        if self.is_positive_definite() {
            Ok(())
        } else {
            Err(Error::NotPositiveDefinite {
                what,
                min_eigenvalue: self.min(),
            })
        }
    }
}

pub fn sym_eig(s: &Matrix) -> Result<SymEig> {
    let s = symmetrized("sym_eig", s)?;
    sym_eig_unchecked(s)
}

fn sym_eig_unchecked(s: Matrix) -> Result<SymEig> {
    let n = s.nrows();
    if n == 0 {
        return Ok(SymEig {
            eigenvalues: DVector::zeros(0),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(s, f64::EPSILON, EIGEN_MAX_ITERATIONS)
        .ok_or(Error::EigenNoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Eigendecomposition of an SPD matrix, rejecting anything that fails the SPD check.
pub fn spd_eig(what: &'static str, s: &Matrix) -> Result<SymEig> {
    let eig = sym_eig(s)?;
    eig.ensure_positive_definite(what)?;
    Ok(eig)
}

pub fn spd_sqrt(s: &Matrix) -> Result<Matrix> {
    Ok(spd_eig("spd_sqrt", s)?.map(libm::sqrt))
}

pub fn spd_inv_sqrt(s: &Matrix) -> Result<Matrix> {
    Ok(spd_eig("spd_inv_sqrt", s)?.map(|l| 1.0 / libm::sqrt(l)))
}

pub fn spd_inverse(s: &Matrix) -> Result<Matrix> {
    Ok(spd_eig("spd_inverse", s)?.map(|l| 1.0 / l))
}

/// Eigendecomposition of `M·Mᵀ` for square `M`, by one-sided Jacobi on the
/// columns of `M`.
///
/// Unlike forming `M·Mᵀ` and diagonalizing it, small eigenvalues keep high
/// relative accuracy when `M = K·D` with `K` well conditioned and `D`
/// diagonal, however wide the spread of `D`.
pub fn gram_eig(m: &Matrix) -> Result<SymEig> {
    let n = ensure_square("gram_eig", m)?;
    ensure_finite("gram_eig", m)?;
    let mut x = m.clone();
    // The computed cosine is only accurate to about √n·ε.
    let tol = libm::sqrt(n as f64) * f64::EPSILON;
    let mut converged = false;
    for _ in 0..GRAM_EIG_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                // Only the cosine between the columns and the ratio of their norms
                // enter the rotation, so squared norms can't overflow or underflow.
                let (np, nq) = (column_norm(&x, p), column_norm(&x, q));
                if np == 0.0 || nq == 0.0 {
                    continue;
                }
                let cos = (0..n)
                    .map(|i| (x[(i, p)] / np) * (x[(i, q)] / nq))
                    .sum::<f64>();
                if !cos.is_finite() {
                    return Err(Error::EigenNoConvergence);
                }
                if cos.abs() <= tol {
                    continue;
                }
                rotated = true;
                let zeta = (nq / np - np / nq) / (2.0 * cos);
                let t = if zeta.abs() > 1e150 {
                    0.5 / zeta
                } else {
                    zeta.signum() / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta))
                };
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                for i in 0..n {
                    let (xp, xq) = (x[(i, p)], x[(i, q)]);
                    x[(i, p)] = c * xp - s * xq;
                    x[(i, q)] = s * xp + c * xq;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::EigenNoConvergence);
    }
    let norms: Vec<f64> = (0..n).map(|j| column_norm(&x, j)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]));
    let mut eigenvectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        if norms[src] > 0.0 {
            for i in 0..n {
                eigenvectors[(i, dst)] = x[(i, src)] / norms[src];
            }
        }
    }
    let eigenvalues = DVector::from_iterator(n, order.iter().map(|&i| norms[i] * norms[i]));
    Ok(SymEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Euclidean norm of column `j`, scaled so it neither overflows nor underflows.
fn column_norm(x: &Matrix, j: usize) -> f64 {
    let col = x.column(j);
    let scale = col.amax();
    if scale == 0.0 {
        return 0.0;
    }
    scale * libm::sqrt(col.iter().map(|v| (v / scale) * (v / scale)).sum::<f64>())
}

const GRAM_EIG_MAX_SWEEPS: usize = 100;

/// Matrix exponential of a symmetric matrix.
///
/// Fails with [`Error::ExponentOutOfRange`] when an eigenvalue of the result
/// would overflow or underflow to zero, since the result would then not be
/// a representable SPD matrix.
pub fn sym_exp(h: &Matrix) -> Result<Matrix> {
    let eig = sym_eig(h)?;
    sym_exp_of(&eig)
}

fn sym_exp_of(eig: &SymEig) -> Result<Matrix> {
    for &l in eig.eigenvalues.iter() {
        let e = libm::exp(l);
        if !e.is_finite() || e <= f64::MIN_POSITIVE {
            return Err(Error::ExponentOutOfRange { exponent: l });
        }
    }
    Ok(eig.map(libm::exp))
}

/// Solves `F·Z + Z·G = W` for symmetric `F` (n×n) and `G` (r×r).
pub fn solve_sylvester(f: &Matrix, g: &Matrix, w: &Matrix) -> Result<Matrix> {
    let ef = sym_eig(f)?;
    let eg = sym_eig(g)?;
    solve_sylvester_spectral(&ef, &eg, w)
}

/// [`solve_sylvester`] with both coefficients already diagonalized.
pub fn solve_sylvester_spectral(f: &SymEig, g: &SymEig, w: &Matrix) -> Result<Matrix> {
    ensure_shape("solve_sylvester rhs", w, (f.dim(), g.dim()))?;
    ensure_finite("solve_sylvester rhs", w)?;
    let threshold = SINGULARITY_TOLERANCE * (f.spectral_radius() + g.spectral_radius());
    let mut hat = f.eigenvectors.transpose() * w * &g.eigenvectors;
    for j in 0..g.dim() {
        let mu = g.eigenvalues[j];
        for i in 0..f.dim() {
            let d = f.eigenvalues[i] + mu;
            if !(d.abs() >= threshold) || d == 0.0 {
                return Err(Error::SpectrumOverlap { gap: d.abs() });
            }
            hat[(i, j)] /= d;
        }
    }
    Ok(&f.eigenvectors * hat * g.eigenvectors.transpose())
}

/// Solves `F·Z + Z·F = W` for symmetric `F`, `W`; the result is exactly symmetric.
pub fn solve_lyapunov_sym(f: &Matrix, w: &Matrix) -> Result<Matrix> {
    let ef = sym_eig(f)?;
    solve_lyapunov_spectral(&ef, w)
}

pub fn solve_lyapunov_spectral(f: &SymEig, w: &Matrix) -> Result<Matrix> {
    let w = symmetrized("solve_lyapunov rhs", w)?;
    let z = solve_sylvester_spectral(f, f, &w)?;
    Ok(sym(&z))
}

/// Solves `F·Z + Z·G = W` where `F` is symmetric (given by its eigenpairs)
/// and `G` is an arbitrary square matrix.
///
/// In the eigenbasis of `F` each row decouples into an r×r system
/// `(λᵢ I + Gᵀ) ẑᵢ = ŵᵢ`.
pub fn solve_sylvester_sym_general(f: &SymEig, g: &Matrix, w: &Matrix) -> Result<Matrix> {
    let r = ensure_square("solve_sylvester coefficient", g)?;
    ensure_shape("solve_sylvester rhs", w, (f.dim(), r))?;
    ensure_finite("solve_sylvester coefficient", g)?;
    let hat_w = f.eigenvectors.transpose() * w;
    let gt = g.transpose();
    let mut hat = Matrix::zeros(f.dim(), r);
    for i in 0..f.dim() {
        let mut system = gt.clone();
        for k in 0..r {
            system[(k, k)] += f.eigenvalues[i];
        }
        let rhs = hat_w.row(i).transpose();
        let sol = system.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
        hat.set_row(i, &sol.transpose());
    }
    Ok(&f.eigenvectors * hat)
}

/// Solves `F·Z + Z·G = W` for arbitrary square `F`, `G` through the
/// Kronecker form `(I ⊗ F + Gᵀ ⊗ I) vec(Z) = vec(W)`. Intended for small
/// reduced-order matrices only.
pub fn solve_sylvester_dense(f: &Matrix, g: &Matrix, w: &Matrix) -> Result<Matrix> {
    let n = ensure_square("solve_sylvester coefficient", f)?;
    let r = ensure_square("solve_sylvester coefficient", g)?;
    ensure_shape("solve_sylvester rhs", w, (n, r))?;
    ensure_finite("solve_sylvester coefficient", f)?;
    ensure_finite("solve_sylvester coefficient", g)?;
    let dim = n * r;
    let mut k = Matrix::zeros(dim, dim);
    // column-major vec: index (i, j) -> j*n + i
    for j in 0..r {
        for i in 0..n {
            let row = j * n + i;
            for l in 0..n {
                k[(row, j * n + l)] += f[(i, l)];
            }
            for l in 0..r {
                k[(row, l * n + i)] += g[(l, j)];
            }
        }
    }
    let rhs = DVector::from_column_slice(w.as_slice());
    let sol = k.lu().solve(&rhs).ok_or(Error::SingularSystem)?;
    Ok(Matrix::from_column_slice(n, r, sol.as_slice()))
}
