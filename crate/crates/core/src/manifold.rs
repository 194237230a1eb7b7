//! Geometry of `Sym₊(r)` under the affine-invariant metric
//! `⟨ξ₁, ξ₂⟩_S = tr(S⁻¹ξ₁S⁻¹ξ₂)`, and of the product manifolds
//! `M = Sym₊(r) × R^{r×m} × R^{p×r}` and `M̃ = Sym₊(r) × R^{r×m}`.
//!
//! The exponential map `Exp_S(ξ) = S^{1/2} exp(S^{−1/2} ξ S^{−1/2}) S^{1/2}`
//! is defined for every tangent vector, so optimization steps never leave the
//! cone. The Euclidean factors carry the Frobenius metric and translate
//! additively.

use crate::lti::ReducedSystem;
use crate::matlib::{
    self, ensure_finite, ensure_shape, ensure_square, gram_eig, spd_eig, sym, sym_eig, Matrix,
    SymEig,
};
use crate::{Error, Result};

/// A point of `Sym₊(r)` with its eigendecomposition and square roots cached.
#[derive(Debug, Clone)]
pub struct SpdPoint {
    s: Matrix,
    eig: SymEig,
    sqrt: Matrix,
    inv_sqrt: Matrix,
}

impl SpdPoint {
    /// Validates `s` against the SPD tolerance.
    pub fn new(s: Matrix) -> Result<Self> {
        let eig = spd_eig("SPD point", &s)?;
        Ok(Self::from_eig(sym(&s), eig))
    }

    fn from_eig(s: Matrix, eig: SymEig) -> Self {
        let sqrt = eig.map(libm::sqrt);
        let inv_sqrt = eig.map(|l| 1.0 / libm::sqrt(l));
        Self {
            s,
            eig,
            sqrt,
            inv_sqrt,
        }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.s
    }

    pub fn eig(&self) -> &SymEig {
        &self.eig
    }

    pub fn sqrt(&self) -> &Matrix {
        &self.sqrt
    }

    pub fn inv_sqrt(&self) -> &Matrix {
        &self.inv_sqrt
    }

    pub fn inverse(&self) -> Matrix {
        self.eig.map(|l| 1.0 / l)
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eig.min()
    }

    /// `S^{−1/2} ξ S^{−1/2}`; the metric is the Frobenius product of these.
    fn whiten(&self, xi: &Matrix) -> Matrix {
        &self.inv_sqrt * xi * &self.inv_sqrt
    }
}

/// A tangent vector at a point of `Sym₊(r)`: a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdTangent(Matrix);

impl SpdTangent {
    pub fn new(xi: Matrix) -> Result<Self> {
        Ok(Self(matlib::symmetrized("SPD tangent", &xi)?))
    }

    pub fn zeros(r: usize) -> Self {
        Self(Matrix::zeros(r, r))
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

fn check_tangent(s: &SpdPoint, xi: &Matrix) -> Result<()> {
    ensure_shape("SPD tangent", xi, (s.dim(), s.dim()))
}

/// `tr(S⁻¹ ξ₁ S⁻¹ ξ₂)`.
pub fn spd_inner(s: &SpdPoint, xi1: &SpdTangent, xi2: &SpdTangent) -> Result<f64> {
    check_tangent(s, &xi1.0)?;
    check_tangent(s, &xi2.0)?;
    Ok(s.whiten(&xi1.0).dot(&s.whiten(&xi2.0)))
}

/// `Exp_S(ξ) = S^{1/2} exp(S^{−1/2} ξ S^{−1/2}) S^{1/2}`.
///
/// Fails only if the endpoint is not representable in double precision.
pub fn spd_exp(s: &SpdPoint, xi: &SpdTangent) -> Result<SpdPoint> {
    check_tangent(s, &xi.0)?;
    let exponent = sym_eig(&s.whiten(&xi.0))?;
    let out_of_range = Error::ExponentOutOfRange {
        exponent: exponent.spectral_radius(),
    };
    // The eigenvalues of S^{1/2} e^E S^{1/2} lie in [λ_min(S), λ_max(S)]·e^{λ(E)},
    // so endpoints that can't be represented are caught before forming M.
    let (s_min, s_max) = (s.eig.min(), s.eig.max());
    if libm::log(s_min) + exponent.max() > libm::log(f64::MAX)
        || libm::log(s_max) + exponent.min() < libm::log(f64::MIN_POSITIVE)
    {
        return Err(out_of_range);
    }
    // Exp_S(ξ) = M·Mᵀ with M = S^{1/2} V e^{Λ/2}; diagonalizing through M keeps
    // tiny eigenvalues accurate, so the result is SPD whenever representable.
    let mut m = &s.sqrt * &exponent.eigenvectors;
    for (j, l) in exponent.eigenvalues.iter().enumerate() {
        m.column_mut(j).scale_mut(libm::exp(0.5 * l));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(out_of_range);
    }
    let eig = gram_eig(&m)?;
    if !(eig.min() >= f64::MIN_POSITIVE) || !eig.max().is_finite() {
        return Err(out_of_range);
    }
    let next = SpdPoint::from_eig(eig.reconstruct(), eig);
    debug_assert!(next.min_eigenvalue() > 0.0);
    Ok(next)
}

/// `grad f(S) = S sym(∇f̄(S)) S`.
pub fn spd_grad_from_euclidean(s: &SpdPoint, eucl_grad: &Matrix) -> Result<SpdTangent> {
    check_tangent(s, eucl_grad)?;
    Ok(SpdTangent(sym(&(&s.s * sym(eucl_grad) * &s.s))))
}

/// `Hess f(S)[ξ] = S sym(D∇f̄(S)[ξ]) S + sym(ξ sym(∇f̄(S)) S)`.
pub fn spd_hess_from_euclidean(
    s: &SpdPoint,
    eucl_grad: &Matrix,
    eucl_grad_dderiv: &Matrix,
    xi: &SpdTangent,
) -> Result<SpdTangent> {
    check_tangent(s, eucl_grad)?;
    check_tangent(s, eucl_grad_dderiv)?;
    check_tangent(s, &xi.0)?;
    let first = &s.s * sym(eucl_grad_dderiv) * &s.s;
    let second = sym(&(&xi.0 * sym(eucl_grad) * &s.s));
    Ok(SpdTangent(sym(&(first + second))))
}

/// A point of `M` (with `C_r`) or of `M̃` (`c_r == None`, gradient systems).
#[derive(Debug, Clone)]
pub struct ProductPoint {
    a_r: SpdPoint,
    b_r: Matrix,
    c_r: Option<Matrix>,
}

impl ProductPoint {
    pub fn new(a_r: Matrix, b_r: Matrix, c_r: Matrix) -> Result<Self> {
        let a_r = SpdPoint::new(a_r)?;
        Self::from_parts(a_r, b_r, Some(c_r))
    }

    /// A point of `M̃`, where `C_r = B_rᵀ` is implied.
    pub fn new_gradient(a_r: Matrix, b_r: Matrix) -> Result<Self> {
        let a_r = SpdPoint::new(a_r)?;
        Self::from_parts(a_r, b_r, None)
    }

    pub fn from_parts(a_r: SpdPoint, b_r: Matrix, c_r: Option<Matrix>) -> Result<Self> {
        let r = a_r.dim();
        if b_r.nrows() != r {
            return Err(Error::ShapeMismatch {
                what: "B_r",
                expected: (r, b_r.ncols()),
                found: b_r.shape(),
            });
        }
        ensure_finite("B_r", &b_r)?;
        if let Some(c) = &c_r {
            if c.ncols() != r {
                return Err(Error::ShapeMismatch {
                    what: "C_r",
                    expected: (c.nrows(), r),
                    found: c.shape(),
                });
            }
            ensure_finite("C_r", c)?;
        }
        Ok(Self { a_r, b_r, c_r })
    }

    pub fn from_reduced(red: &ReducedSystem) -> Result<Self> {
        Self::new(red.a_r().clone(), red.b_r().clone(), red.c_r().clone())
    }

    pub fn a_r(&self) -> &SpdPoint {
        &self.a_r
    }

    pub fn b_r(&self) -> &Matrix {
        &self.b_r
    }

    pub fn c_r(&self) -> Option<&Matrix> {
        self.c_r.as_ref()
    }

    pub fn r(&self) -> usize {
        self.a_r.dim()
    }

    pub fn is_gradient_form(&self) -> bool {
        self.c_r.is_none()
    }

    /// Intrinsic manifold dimension `r(r+1)/2 + rm (+ pr)`.
    pub fn manifold_dim(&self) -> usize {
        let r = self.r();
        r * (r + 1) / 2 + self.b_r.len() + self.c_r.as_ref().map_or(0, |c| c.len())
    }

    /// The reduced system this point represents (`C_r = B_rᵀ` on `M̃`).
    pub fn to_reduced_system(&self) -> Result<ReducedSystem> {
        let c_r = self.c_r.clone().unwrap_or_else(|| self.b_r.transpose());
        ReducedSystem::new(self.a_r.matrix().clone(), self.b_r.clone(), c_r)
    }

    /// Views a point of `M̃` as the point `(A_r, B_r, B_rᵀ)` of `M`.
    pub fn to_full_form(&self) -> Self {
        Self {
            a_r: self.a_r.clone(),
            b_r: self.b_r.clone(),
            c_r: Some(self.c_r.clone().unwrap_or_else(|| self.b_r.transpose())),
        }
    }
}

/// A tangent vector `(ξ, η, ζ)`; `zeta` is absent on `M̃`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTangent {
    pub xi: Matrix,
    pub eta: Matrix,
    pub zeta: Option<Matrix>,
}

impl ProductTangent {
    /// Builds a tangent vector, symmetrizing `xi`.
    pub fn new(xi: Matrix, eta: Matrix, zeta: Option<Matrix>) -> Result<Self> {
        let xi = matlib::symmetrized("tangent xi", &xi)?;
        Ok(Self { xi, eta, zeta })
    }

    pub fn zero_at(pt: &ProductPoint) -> Self {
        Self {
            xi: Matrix::zeros(pt.r(), pt.r()),
            eta: Matrix::zeros(pt.b_r.nrows(), pt.b_r.ncols()),
            zeta: pt.c_r.as_ref().map(|c| Matrix::zeros(c.nrows(), c.ncols())),
        }
    }

    pub fn scaled(&self, alpha: f64) -> Self {
        Self {
            xi: &self.xi * alpha,
            eta: &self.eta * alpha,
            zeta: self.zeta.as_ref().map(|z| z * alpha),
        }
    }

    /// `self += alpha · other`.
    pub fn axpy(&mut self, alpha: f64, other: &Self) {
        self.xi.zip_apply(&other.xi, |a, b| *a += alpha * b);
        self.eta.zip_apply(&other.eta, |a, b| *a += alpha * b);
        if let (Some(z), Some(oz)) = (self.zeta.as_mut(), other.zeta.as_ref()) {
            z.zip_apply(oz, |a, b| *a += alpha * b);
        }
    }

    /// `alpha · self + beta · other`.
    pub fn combine(&self, alpha: f64, other: &Self, beta: f64) -> Self {
        let mut out = self.scaled(alpha);
        out.axpy(beta, other);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.xi.iter().all(|v| v.is_finite())
            && self.eta.iter().all(|v| v.is_finite())
            && self
                .zeta
                .as_ref()
                .is_none_or(|z| z.iter().all(|v| v.is_finite()))
    }

    /// The `A_r` component as an [`SpdTangent`].
    pub fn spd_part(&self) -> SpdTangent {
        SpdTangent(self.xi.clone())
    }
}

fn check_product_tangent(pt: &ProductPoint, t: &ProductTangent) -> Result<()> {
    let r = pt.r();
    ensure_shape("tangent xi", &t.xi, (r, r))?;
    ensure_shape("tangent eta", &t.eta, pt.b_r.shape())?;
    match (&pt.c_r, &t.zeta) {
        (Some(c), Some(z)) => ensure_shape("tangent zeta", z, c.shape()),
        (None, None) => Ok(()),
        (Some(c), None) => Err(Error::ShapeMismatch {
            what: "tangent zeta",
            expected: c.shape(),
            found: (0, 0),
        }),
        (None, Some(z)) => Err(Error::ShapeMismatch {
            what: "tangent zeta",
            expected: (0, 0),
            found: z.shape(),
        }),
    }
}

/// `tr(A_r⁻¹ξ₁A_r⁻¹ξ₂) + tr(η₁ᵀη₂) + tr(ζ₁ᵀζ₂)`.
pub fn product_inner(pt: &ProductPoint, t1: &ProductTangent, t2: &ProductTangent) -> Result<f64> {
    check_product_tangent(pt, t1)?;
    check_product_tangent(pt, t2)?;
    let spd = pt.a_r.whiten(&t1.xi).dot(&pt.a_r.whiten(&t2.xi));
    let zeta = match (&t1.zeta, &t2.zeta) {
        (Some(z1), Some(z2)) => z1.dot(z2),
        _ => 0.0,
    };
    Ok(spd + t1.eta.dot(&t2.eta) + zeta)
}

pub fn product_norm(pt: &ProductPoint, t: &ProductTangent) -> Result<f64> {
    Ok(libm::sqrt(product_inner(pt, t, t)?.max(0.0)))
}

/// `(Exp_{A_r}(ξ), B_r + η, C_r + ζ)`.
pub fn product_exp(pt: &ProductPoint, t: &ProductTangent) -> Result<ProductPoint> {
    check_product_tangent(pt, t)?;
    let a_r = spd_exp(&pt.a_r, &SpdTangent(sym(&t.xi)))?;
    let b_r = &pt.b_r + &t.eta;
    let c_r = match (&pt.c_r, &t.zeta) {
        (Some(c), Some(z)) => Some(c + z),
        _ => None,
    };
    ProductPoint::from_parts(a_r, b_r, c_r)
}

/// Square symmetric check for callers holding raw matrices.
pub fn is_symmetric(m: &Matrix) -> bool {
    ensure_square("matrix", m).is_ok() && matlib::symmetrized("matrix", m).is_ok()
}
